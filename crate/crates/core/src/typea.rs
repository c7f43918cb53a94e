//! Type-A quiver data against Slodowy slices: dimension vectors, the block
//! decomposition of the expanded representation, the transversal lift and its
//! checks, the e = 0 flag map, and Slodowy slices in gl_N.
//!
//! Vertices 1..n−1 of the type-A graph are quiver vertices 0..n−2. For the expanded data
//! Ã_0 = Γ̃₁ and B̃_0 = Δ̃₁, so Ṽ_0 = D′_0 is the framing space K^N.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quiver::{moment_map, tangent_space, FramedQuiver, Quiver, QuiverRep};
use crate::scalars::{
    int, mat_kernel, mat_solve, rank, rref, rone, rzero, Field, Jet, JsonScalar, Matrix, Rational, Scalar,
};

// ---------------------------------------------------------------------------
// Dimension data

#[derive(Clone, Debug, PartialEq)]
pub struct TypeAData {
    pub n: usize,
    pub big_n: usize,
    /// r_1..r_n.
    pub r: Vec<usize>,
    /// d_1..d_{n−1}.
    pub d: Vec<usize>,
    pub v: Vec<usize>,
    pub tilde_v: Vec<usize>,
    pub tilde_d: Vec<usize>,
}

/// v_i = Σ_{j>i} r_j − Σ_{j>i} (j−i) d_j and ṽ_i = v_i + Σ_{j>i} (j−i) d_j = dim(V_i ⊕ D′_i).
pub fn build_typea(n: usize, big_n: usize, r: &[usize], d: &[usize]) -> Result<TypeAData> {
    if n < 2 || r.len() != n || d.len() != n - 1 {
        return Err(Error::ShapeMismatch(format!("need n ≥ 2, {n} parts of r and {} of d", n.saturating_sub(1))));
    }
    if r.iter().sum::<usize>() != big_n {
        return Err(Error::InvalidInput("r must sum to N".into()));
    }
    if d.iter().enumerate().map(|(k, &x)| (k + 1) * x).sum::<usize>() != big_n {
        return Err(Error::InvalidInput("Σ i·d_i must equal N".into()));
    }
    let mut v = Vec::new();
    let mut tilde_v = Vec::new();
    for i in 1..n {
        let rs: i64 = (i + 1..=n).map(|j| r[j - 1] as i64).sum();
        let ds: i64 = (i + 1..n).map(|j| (j - i) as i64 * d[j - 1] as i64).sum();
        let vi = rs - ds;
        if vi <= 0 {
            return Err(Error::NonPositiveDimension(i));
        }
        v.push(vi as usize);
        tilde_v.push((vi + ds) as usize);
    }
    let mut tilde_d = vec![0; n - 1];
    tilde_d[0] = big_n;
    Ok(TypeAData { n, big_n, r: r.to_vec(), d: d.to_vec(), v, tilde_v, tilde_d })
}

impl TypeAData {
    pub fn quiver(&self) -> Result<FramedQuiver> {
        FramedQuiver::new(Quiver::linear(self.n - 1), self.d.clone())
    }

    pub fn tilde_quiver(&self) -> Result<FramedQuiver> {
        FramedQuiver::new(Quiver::linear(self.n - 1), self.tilde_d.clone())
    }

    /// True for d = (N, 0, …, 0).
    pub fn is_e0(&self) -> bool {
        self.d[0] == self.big_n
    }

    fn d_at(&self, j: usize) -> usize {
        self.d[j - 1]
    }

    fn v_at(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            self.v[i - 1]
        }
    }

    /// Summands of Ṽ_i for i = 0..n−1: V_i first, then D_j^{(k)} for j > i and 1 ≤ k ≤ j−i.
    /// Zero-dimensional summands are omitted.
    pub fn layout(&self, i: usize) -> Layout {
        let mut parts = Vec::new();
        let mut off = 0;
        let vi = self.v_at(i);
        if vi > 0 {
            parts.push((Summand::V, off, vi));
            off += vi;
        }
        for j in i + 1..self.n {
            let dj = self.d_at(j);
            if dj == 0 {
                continue;
            }
            for k in 1..=j - i {
                parts.push((Summand::D { j, k }, off, dj));
                off += dj;
            }
        }
        Layout { parts, dim: off }
    }

    /// sl₂-triple on D′_i.
    pub fn sl2_for_blocks(&self, i: usize) -> Sl2Triple {
        let towers: Vec<(usize, usize)> =
            (i + 1..self.n).filter(|&j| self.d_at(j) > 0).map(|j| (j - i, self.d_at(j))).collect();
        tower_triple(&towers)
    }

    pub fn to_json(&self) -> Value {
        json!({"n": self.n, "N": self.big_n, "r": self.r, "d": self.d, "v": self.v, "tilde_v": self.tilde_v, "tilde_d": self.tilde_d})
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Summand {
    V,
    D { j: usize, k: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    /// (summand, offset, dimension).
    pub parts: Vec<(Summand, usize, usize)>,
    pub dim: usize,
}

impl Layout {
    /// Offset and size of the D′ part, which follows V.
    fn d_range(&self) -> (usize, usize) {
        let start = self.parts.iter().find(|p| p.0 != Summand::V).map_or(self.dim, |p| p.1);
        (start, self.dim - start)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    T,
    S,
}

/// min(h−h′+1, h−h′+1+j′−j) for T-blocks and min(h−h′, h−h′+j′−j) for S-blocks.
pub fn grad_degree(j: usize, h: usize, j2: usize, h2: usize, kind: BlockKind) -> i64 {
    let (j, h, j2, h2) = (j as i64, h as i64, j2 as i64, h2 as i64);
    let base = match kind {
        BlockKind::T => h - h2 + 1,
        BlockKind::S => h - h2,
    };
    base.min(base + j2 - j)
}

// ---------------------------------------------------------------------------
// sl₂-triples

#[derive(Clone, Debug, PartialEq)]
pub struct Sl2Triple {
    pub e: Matrix<Rational>,
    pub h: Matrix<Rational>,
    pub f: Matrix<Rational>,
}

impl Sl2Triple {
    pub fn relations_hold(&self) -> bool {
        let two = int(2);
        self.h.commutator(&self.e) == self.e.scale(&two)
            && self.h.commutator(&self.f) == self.f.scale(&two).neg()
            && self.e.commutator(&self.f) == self.h
    }
}

/// Towers given as (length L, multiplicity m). Within a tower the copies are
/// ordered h = 1..L; e maps copy h to h−1 by the identity and f maps h to h+1
/// by h(L−h).
pub fn tower_triple(towers: &[(usize, usize)]) -> Sl2Triple {
    let dim: usize = towers.iter().map(|(l, m)| l * m).sum();
    let mut e = Matrix::zeros(dim, dim);
    let mut f = Matrix::zeros(dim, dim);
    let mut off = 0;
    for &(len, m) in towers {
        let at = |h: usize| off + (h - 1) * m;
        for h in 1..=len {
            for c in 0..m {
                if h > 1 {
                    e.set(at(h - 1) + c, at(h) + c, rone());
                }
                if h < len {
                    f.set(at(h + 1) + c, at(h) + c, int((h * (len - h)) as i64));
                }
            }
        }
        off += len * m;
    }
    let h = e.commutator(&f);
    Sl2Triple { e, h, f }
}

// ---------------------------------------------------------------------------
// Polynomials in the unknown block entries

/// Polynomial with monomials given as sorted variable lists.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S> {
    terms: BTreeMap<Vec<usize>, S>,
}

impl<S: Scalar> Poly<S> {
    pub fn constant(c: S) -> Self {
        let mut p = Poly { terms: BTreeMap::new() };
        p.add_term(Vec::new(), c);
        p
    }

    pub fn var(k: usize) -> Self {
        let mut p = Poly { terms: BTreeMap::new() };
        p.add_term(vec![k], S::one());
        p
    }

    fn add_term(&mut self, m: Vec<usize>, c: S) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(S::zero);
        *slot = slot.plus(&c);
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }
}

impl<S: Scalar> Scalar for Poly<S> {
    fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }
    fn one() -> Self {
        Poly::constant(S::one())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    fn plus(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (m, c) in &o.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
    fn minus(&self, o: &Self) -> Self {
        self.plus(&o.negated())
    }
    fn times(&self, o: &Self) -> Self {
        let mut p = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let mut m = m1.clone();
                m.extend(m2);
                m.sort_unstable();
                p.add_term(m, c1.times(c2));
            }
        }
        p
    }
    fn negated(&self) -> Self {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.negated())).collect() }
    }
    fn from_rational(r: &Rational) -> Self {
        Poly::constant(S::from_rational(r))
    }
}

impl Poly<Rational> {
    fn substitute(&self, known: &[Option<Rational>]) -> Self {
        let mut p = Poly::zero();
        for (m, c) in &self.terms {
            let mut coeff = c.clone();
            let mut rest = Vec::new();
            for &k in m {
                match &known[k] {
                    Some(val) => coeff = coeff.times(val),
                    None => rest.push(k),
                }
            }
            p.add_term(rest, coeff);
        }
        p
    }
}

// ---------------------------------------------------------------------------
// Block rules

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapKind {
    /// Ã_i: Ṽ_i → Ṽ_{i+1}.
    A,
    /// B̃_i: Ṽ_{i+1} → Ṽ_i.
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Matched {
    /// A_i with 1-based vertex index i ≥ 1.
    A(usize),
    B(usize),
    /// Γ_j with 1-based vertex index.
    Gamma(usize),
    Delta(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRule {
    Zero,
    Identity,
    Matched(Matched),
    /// Unknown; `order` ranks it for the solver.
    Free { order: (i64, usize) },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpec {
    pub map: MapKind,
    pub i: usize,
    pub row: Summand,
    pub col: Summand,
    pub row_off: usize,
    pub col_off: usize,
    pub rows: usize,
    pub cols: usize,
    pub name: String,
    pub rule: BlockRule,
}

fn summand_label(s: Summand) -> String {
    match s {
        Summand::V => "V".into(),
        Summand::D { j, k } => format!("{j},{k}"),
    }
}

fn a_rule(i: usize, row: Summand, col: Summand) -> BlockRule {
    match (row, col) {
        (Summand::D { j, k: h }, Summand::D { j: j2, k: h2 }) => {
            let g = grad_degree(j, h, j2, h2, BlockKind::T);
            if g < 0 {
                BlockRule::Zero
            } else if g == 0 {
                if (j2, h2) == (j, h + 1) {
                    BlockRule::Identity
                } else {
                    BlockRule::Zero
                }
            } else {
                BlockRule::Free { order: (g, h) }
            }
        }
        (Summand::D { .. }, Summand::V) => BlockRule::Zero,
        (Summand::V, Summand::D { j: j2, k: h2 }) => {
            if h2 != 1 {
                BlockRule::Zero
            } else if j2 == i + 1 {
                BlockRule::Matched(Matched::Gamma(i + 1))
            } else {
                BlockRule::Free { order: (0, h2) }
            }
        }
        (Summand::V, Summand::V) => BlockRule::Matched(Matched::A(i)),
    }
}

fn b_rule(i: usize, row: Summand, col: Summand) -> BlockRule {
    match (row, col) {
        (Summand::D { j, k: h }, Summand::D { j: j2, k: h2 }) => {
            let g = grad_degree(j, h, j2, h2, BlockKind::S);
            if g < 0 {
                BlockRule::Zero
            } else if g == 0 {
                if (j2, h2) == (j, h) {
                    BlockRule::Identity
                } else {
                    BlockRule::Zero
                }
            } else {
                BlockRule::Free { order: (g, h) }
            }
        }
        (Summand::D { j, k: h }, Summand::V) => {
            if h != j - i {
                BlockRule::Zero
            } else if j == i + 1 {
                BlockRule::Matched(Matched::Delta(i + 1))
            } else {
                BlockRule::Free { order: (0, h) }
            }
        }
        (Summand::V, Summand::D { .. }) => BlockRule::Zero,
        (Summand::V, Summand::V) => BlockRule::Matched(Matched::B(i)),
    }
}

impl TypeAData {
    /// Every block of Ã_i and B̃_i, i = 0..n−2.
    pub fn block_specs(&self) -> Vec<BlockSpec> {
        let mut out = Vec::new();
        for i in 0..self.n - 1 {
            let (src, dst) = (self.layout(i), self.layout(i + 1));
            for &(row, ro, rd) in &dst.parts {
                for &(col, co, cd) in &src.parts {
                    let name = format!("T[{i};{};{}]", summand_label(row), summand_label(col));
                    let name = if (row, col) == (Summand::V, Summand::V) { format!("A[{i}]") } else { name };
                    out.push(BlockSpec { map: MapKind::A, i, row, col, row_off: ro, col_off: co, rows: rd, cols: cd, name, rule: a_rule(i, row, col) });
                }
            }
            for &(row, ro, rd) in &src.parts {
                for &(col, co, cd) in &dst.parts {
                    let name = format!("S[{i};{};{}]", summand_label(row), summand_label(col));
                    let name = if (row, col) == (Summand::V, Summand::V) { format!("B[{i}]") } else { name };
                    out.push(BlockSpec { map: MapKind::B, i, row, col, row_off: ro, col_off: co, rows: rd, cols: cd, name, rule: b_rule(i, row, col) });
                }
            }
        }
        out
    }
}

fn matched_block<S: Scalar>(x: &QuiverRep<S>, m: Matched) -> &Matrix<S> {
    match m {
        Matched::A(i) => &x.a[i - 1],
        Matched::B(i) => &x.b[i - 1],
        Matched::Gamma(j) => &x.gamma[j - 1],
        Matched::Delta(j) => &x.delta[j - 1],
    }
}

// ---------------------------------------------------------------------------
// Equations

/// Moment map of the expanded data at vertices 1..n−1, then the bracket
/// relations [π B̃_iÃ_i|_{D′_i} − e_i, f_i] for i = 0..n−2.
pub fn transversal_equations<T: Scalar>(data: &TypeAData, a: &[Matrix<T>], b: &[Matrix<T>]) -> Vec<(String, Matrix<T>)> {
    let mut out = Vec::new();
    let last = data.n - 1;
    for k in 1..=last {
        let mut mu = a[k - 1].mul(&b[k - 1]);
        if k < last {
            mu = mu.sub(&b[k].mul(&a[k]));
        }
        out.push((format!("moment[{k}]"), mu));
    }
    for i in 0..last {
        let (off, size) = data.layout(i).d_range();
        if size == 0 {
            continue;
        }
        let triple = data.sl2_for_blocks(i);
        let lift = |m: &Matrix<Rational>| m.map(|x| T::from_rational(x));
        let m = b[i].mul(&a[i]).block(off, off, size, size).sub(&lift(&triple.e));
        out.push((format!("bracket[{i}]"), m.commutator(&lift(&triple.f))));
    }
    out
}

struct System<S> {
    a: Vec<Matrix<Poly<S>>>,
    b: Vec<Matrix<Poly<S>>>,
    /// (map, i, row, col, order) for each unknown.
    vars: Vec<(MapKind, usize, usize, usize, (i64, usize))>,
}

fn build_system<S: Scalar>(data: &TypeAData, x: &QuiverRep<S>) -> System<S> {
    let mut a: Vec<Matrix<Poly<S>>> = (0..data.n - 1).map(|i| Matrix::zeros(data.layout(i + 1).dim, data.layout(i).dim)).collect();
    let mut b: Vec<Matrix<Poly<S>>> = (0..data.n - 1).map(|i| Matrix::zeros(data.layout(i).dim, data.layout(i + 1).dim)).collect();
    let mut vars = Vec::new();
    for spec in data.block_specs() {
        let target = match spec.map {
            MapKind::A => &mut a[spec.i],
            MapKind::B => &mut b[spec.i],
        };
        for r in 0..spec.rows {
            for c in 0..spec.cols {
                let (rr, cc) = (spec.row_off + r, spec.col_off + c);
                let entry = match spec.rule {
                    BlockRule::Zero => continue,
                    BlockRule::Identity => {
                        if r != c {
                            continue;
                        }
                        Poly::one()
                    }
                    BlockRule::Matched(m) => Poly::constant(matched_block(x, m).get(r, c).clone()),
                    BlockRule::Free { order } => {
                        vars.push((spec.map, spec.i, rr, cc, order));
                        Poly::var(vars.len() - 1)
                    }
                };
                target.set(rr, cc, entry);
            }
        }
    }
    System { a, b, vars }
}

fn flatten<T: Scalar>(eqs: Vec<(String, Matrix<T>)>) -> Vec<T> {
    eqs.into_iter().flat_map(|(_, m)| m.into_data()).collect()
}

/// Solves by repeatedly fixing every unknown that the currently affine
/// equations determine; when none is determined, the first unknown in `order`
/// is set to 0. Returns the values and the number of such fallbacks.
fn propagate(eqs: &[Poly<Rational>], nvars: usize, order: &[usize]) -> Result<(Vec<Rational>, usize)> {
    let mut known: Vec<Option<Rational>> = vec![None; nvars];
    let mut fallbacks = 0;
    while known.iter().any(Option::is_none) {
        let unknown: Vec<usize> = (0..nvars).filter(|&k| known[k].is_none()).collect();
        let col_of: BTreeMap<usize, usize> = unknown.iter().enumerate().map(|(c, &k)| (k, c)).collect();
        let mut rows = Vec::new();
        for p in eqs {
            let q = p.substitute(&known);
            match q.max_degree() {
                None => {}
                Some(0) => return Err(Error::LiftInconsistent("constant residual".into())),
                Some(1) => rows.push(q),
                Some(_) => {}
            }
        }
        let width = unknown.len() + 1;
        let mut m = Matrix::<Rational>::zeros(rows.len(), width);
        for (r, q) in rows.iter().enumerate() {
            for (mono, c) in &q.terms {
                let col = if mono.is_empty() { unknown.len() } else { col_of[&mono[0]] };
                m.set(r, col, c.clone());
            }
        }
        let (red, pivots) = rref(&m);
        let mut progress = false;
        for (r, &p) in pivots.iter().enumerate() {
            if p == unknown.len() {
                return Err(Error::LiftInconsistent("linear stage is inconsistent".into()));
            }
            if (0..unknown.len()).all(|c| c == p || red.get(r, c).is_zero()) {
                known[unknown[p]] = Some(red.get(r, unknown.len()).negated());
                progress = true;
            }
        }
        if !progress {
            let k = *order.iter().find(|&&k| known[k].is_none()).expect("an unknown remains");
            known[k] = Some(rzero());
            fallbacks += 1;
        }
    }
    Ok((known.into_iter().map(|v| v.expect("all assigned")).collect(), fallbacks))
}

// ---------------------------------------------------------------------------
// Lifted representations

/// The expanded representation (Ã_i, B̃_i), i = 0..n−2.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockRep<S> {
    pub data: TypeAData,
    pub a: Vec<Matrix<S>>,
    pub b: Vec<Matrix<S>>,
}

impl<S: Scalar> BlockRep<S> {
    pub fn block(&self, spec: &BlockSpec) -> Matrix<S> {
        let m = match spec.map {
            MapKind::A => &self.a[spec.i],
            MapKind::B => &self.b[spec.i],
        };
        m.block(spec.row_off, spec.col_off, spec.rows, spec.cols)
    }

    /// The representation of the expanded quiver carrying (Ã, B̃, Γ̃₁ = Ã_0, Δ̃₁ = B̃_0).
    pub fn to_quiver_rep(&self) -> Result<QuiverRep<S>> {
        let q = self.data.tilde_quiver()?;
        let mut rep = QuiverRep::zero(&q, &self.data.tilde_v)?;
        rep.gamma[0] = self.a[0].clone();
        rep.delta[0] = self.b[0].clone();
        for i in 1..self.data.n - 1 {
            rep.a[i - 1] = self.a[i].clone();
            rep.b[i - 1] = self.b[i].clone();
        }
        Ok(rep)
    }

    /// The matched blocks read back as a representation of the original data.
    pub fn matched_rep(&self) -> Result<QuiverRep<S>> {
        let q = self.data.quiver()?;
        let mut rep = QuiverRep::zero(&q, &self.data.v)?;
        for spec in self.data.block_specs() {
            if let BlockRule::Matched(m) = spec.rule {
                let blk = self.block(&spec);
                match m {
                    Matched::A(i) => rep.a[i - 1] = blk,
                    Matched::B(i) => rep.b[i - 1] = blk,
                    Matched::Gamma(j) => rep.gamma[j - 1] = blk,
                    Matched::Delta(j) => rep.delta[j - 1] = blk,
                }
            }
        }
        Ok(rep)
    }

    /// Σ_i tr(B̃_i Ã′_i) between the B̃ of `self` and the Ã of `o`.
    pub fn beta_pairing(&self, o: &Self) -> S {
        self.b.iter().zip(&o.a).fold(S::zero(), |acc, (b, a)| acc.plus(&b.mul(a).trace()))
    }
}

impl<S: Scalar + JsonScalar> BlockRep<S> {
    pub fn to_json(&self) -> Value {
        let blocks: Vec<Value> = self
            .data
            .block_specs()
            .iter()
            .filter(|s| s.rows * s.cols > 0)
            .map(|s| {
                let rule = match s.rule {
                    BlockRule::Zero => "zero",
                    BlockRule::Identity => "identity",
                    BlockRule::Matched(_) => "matched",
                    BlockRule::Free { .. } => "free",
                };
                json!({"name": s.name, "rule": rule, "matrix": self.block(s).to_json()})
            })
            .collect();
        json!({
            "data": self.data.to_json(),
            "A_tilde": self.a.iter().map(Matrix::to_json).collect::<Vec<_>>(),
            "B_tilde": self.b.iter().map(Matrix::to_json).collect::<Vec<_>>(),
            "blocks": blocks,
        })
    }

    pub fn from_json(v: &Value, data: &TypeAData) -> Result<Self> {
        let read = |key: &str, shape: &dyn Fn(usize) -> (usize, usize)| -> Result<Vec<Matrix<S>>> {
            let list = v.get(key).and_then(Value::as_array).ok_or_else(|| Error::InvalidInput(format!("missing {key}")))?;
            if list.len() != data.n - 1 {
                return Err(Error::ShapeMismatch(format!("{key} needs {} matrices", data.n - 1)));
            }
            list.iter().enumerate().map(|(i, m)| {
                let (r, c) = shape(i);
                Matrix::from_json(m, r, c)
            }).collect()
        };
        let a = read("A_tilde", &|i| (data.layout(i + 1).dim, data.layout(i).dim))?;
        let b = read("B_tilde", &|i| (data.layout(i).dim, data.layout(i + 1).dim))?;
        Ok(BlockRep { data: data.clone(), a, b })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// (item, passed) in a fixed order.
    pub items: Vec<(String, bool)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|(_, ok)| *ok)
    }

    pub fn failures(&self) -> Vec<String> {
        self.items.iter().filter(|(_, ok)| !ok).map(|(n, _)| n.clone()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({"passed": self.passed(), "failures": self.failures(), "checked": self.items.len()})
    }
}

fn check_shapes<S: Scalar>(x: &QuiverRep<S>, data: &TypeAData) -> Result<()> {
    let q = data.quiver()?;
    if x.quiver != q || x.v != data.v {
        return Err(Error::ShapeMismatch("representation does not match the type-A data".into()));
    }
    x.validate()
}

/// Forced blocks, matching equations, moment map and bracket relations.
pub fn maffei_verify(xt: &BlockRep<Rational>, x: &QuiverRep<Rational>) -> Result<VerifyReport> {
    let data = &xt.data;
    check_shapes(x, data)?;
    let mut items = Vec::new();
    for spec in data.block_specs() {
        if spec.rows * spec.cols == 0 {
            continue;
        }
        let blk = xt.block(&spec);
        let ok = match spec.rule {
            BlockRule::Zero => blk.is_zero(),
            BlockRule::Identity => blk == Matrix::identity(spec.rows),
            BlockRule::Matched(m) => blk == *matched_block(x, m),
            BlockRule::Free { .. } => continue,
        };
        items.push((spec.name.clone(), ok));
    }
    for (name, m) in transversal_equations(data, &xt.a, &xt.b) {
        items.push((name, m.is_zero()));
    }
    Ok(VerifyReport { items })
}

fn assemble(data: &TypeAData, sys: &System<Rational>, values: &[Rational]) -> BlockRep<Rational> {
    let eval = |m: &Matrix<Poly<Rational>>| {
        let known: Vec<Option<Rational>> = values.iter().cloned().map(Some).collect();
        m.map(|p| p.substitute(&known).terms.get(&Vec::new()).cloned().unwrap_or_else(rzero))
    };
    BlockRep { data: data.clone(), a: sys.a.iter().map(eval).collect(), b: sys.b.iter().map(eval).collect() }
}

/// The unique transversal x̃ whose matched blocks are x.
pub fn maffei_lift(x: &QuiverRep<Rational>, data: &TypeAData) -> Result<BlockRep<Rational>> {
    check_shapes(x, data)?;
    if moment_map(x)?.iter().any(|m| !m.is_zero()) {
        return Err(Error::PreconditionMomentMap);
    }
    let sys = build_system(data, x);
    let eqs = flatten(transversal_equations(data, &sys.a, &sys.b));
    let mut order: Vec<usize> = (0..sys.vars.len()).collect();
    order.sort_by_key(|&k| sys.vars[k].4);
    let (values, _) = propagate(&eqs, sys.vars.len(), &order)?;
    order.reverse();
    let (probe, _) = propagate(&eqs, sys.vars.len(), &order)?;
    if probe != values {
        return Err(Error::LiftInconsistent("solution depends on the unknown order".into()));
    }
    let xt = assemble(data, &sys, &values);
    let report = maffei_verify(&xt, x)?;
    if !report.passed() {
        return Err(Error::LiftInconsistent(report.failures().join(", ")));
    }
    Ok(xt)
}

/// Lift of a first-order family x + εv: values from [`maffei_lift`], derivatives
/// from the linearized equations, which must determine them uniquely.
pub fn maffei_lift_jet(x: &QuiverRep<Jet<Rational>>, data: &TypeAData) -> Result<BlockRep<Jet<Rational>>> {
    let value = maffei_lift(&x.map(|j| j.value.clone()), data)?;
    let sys = build_system(data, x);
    let vals: Vec<Rational> = sys
        .vars
        .iter()
        .map(|&(map, i, r, c, _)| match map {
            MapKind::A => value.a[i].get(r, c).clone(),
            MapKind::B => value.b[i].get(r, c).clone(),
        })
        .collect();
    let eqs = flatten(transversal_equations(data, &sys.a, &sys.b));
    let nv = vals.len();
    let mut lin = Matrix::<Rational>::zeros(eqs.len(), nv);
    let mut rhs = Matrix::<Rational>::zeros(eqs.len(), 1);
    for (row, p) in eqs.iter().enumerate() {
        let mut constant = rzero();
        for (mono, c) in &p.terms {
            let prod = |skip: Option<usize>| {
                mono.iter().enumerate().filter(|(pos, _)| Some(*pos) != skip).fold(rone(), |acc, (_, &k)| acc.times(&vals[k]))
            };
            constant = constant.plus(&c.derivative.times(&prod(None)));
            for (pos, &k) in mono.iter().enumerate() {
                let cur = lin.get(row, k).plus(&c.value.times(&prod(Some(pos))));
                lin.set(row, k, cur);
            }
        }
        rhs.set(row, 0, constant.negated());
    }
    let deriv = if nv == 0 {
        Vec::new()
    } else {
        let sol = mat_solve(&lin, &rhs).map_err(|_| Error::LiftInconsistent("linearized system is inconsistent".into()))?;
        if !mat_kernel(&lin).is_empty() {
            return Err(Error::LiftInconsistent("linearized system is underdetermined".into()));
        }
        sol.into_data()
    };
    let eval = |m: &Matrix<Poly<Jet<Rational>>>| {
        m.map(|p| {
            p.terms.iter().fold(Jet::constant(rzero()), |acc, (mono, c)| {
                let term = mono.iter().fold(c.clone(), |t, &k| t.times(&Jet::new(vals[k].clone(), deriv[k].clone())));
                acc.plus(&term)
            })
        })
    };
    Ok(BlockRep { data: data.clone(), a: sys.a.iter().map(eval).collect(), b: sys.b.iter().map(eval).collect() })
}

fn jet_rep(x: &QuiverRep<Rational>, v: &QuiverRep<Rational>) -> QuiverRep<Jet<Rational>> {
    let coords: Vec<Jet<Rational>> = x.to_coords().into_iter().zip(v.to_coords()).map(|(a, b)| Jet::new(a, b)).collect();
    x.map(|c| Jet::constant(c.clone())).with_coords(&coords)
}

/// Derivative of the lift along tangent vector v at x.
pub fn lift_differential(x: &QuiverRep<Rational>, v: &QuiverRep<Rational>, data: &TypeAData) -> Result<BlockRep<Rational>> {
    let jl = maffei_lift_jet(&jet_rep(x, v), data)?;
    Ok(BlockRep { data: data.clone(), a: jl.a.iter().map(Matrix::derivatives).collect(), b: jl.b.iter().map(Matrix::derivatives).collect() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PullbackReport {
    pub pairs: usize,
    pub mismatches: usize,
}

/// β̃(dΦv¹, dΦv²) = β(v¹, v²) on `trials` seeded pairs of tangent vectors, plus
/// the pairs (v, v) and (v, 0).
pub fn symplectic_pullback_check(x: &QuiverRep<Rational>, data: &TypeAData, trials: usize, seed: u64) -> Result<PullbackReport> {
    let basis = tangent_space(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = x.scale(&rzero());
    let draw = |rng: &mut ChaCha8Rng| {
        basis.iter().fold(zero.clone(), |acc, b| acc.add(&b.scale(&int(rng.gen_range(-3..=3)))))
    };
    let mut pairs = Vec::new();
    for _ in 0..trials {
        let v1 = draw(&mut rng);
        let v2 = draw(&mut rng);
        pairs.push((v1, v2));
    }
    if let Some((v1, _)) = pairs.first().cloned() {
        pairs.push((v1.clone(), v1.clone()));
        pairs.push((v1, zero.clone()));
    }
    let mut mismatches = 0;
    for (v1, v2) in &pairs {
        let d1 = lift_differential(x, v1, data)?;
        let d2 = lift_differential(x, v2, data)?;
        if d1.beta_pairing(&d2) != v1.beta_pairing(v2) {
            mismatches += 1;
        }
    }
    Ok(PullbackReport { pairs: pairs.len(), mismatches })
}

/// Weight of [e_i, f_i] on each coordinate of Ṽ_i: j−i+1−2h on D_j^{(h)}, 0 on V_i.
fn weights(data: &TypeAData, i: usize) -> Vec<i64> {
    let mut w = Vec::new();
    for (s, _, dim) in data.layout(i).parts {
        let val = match s {
            Summand::V => 0,
            Summand::D { j, k } => j as i64 - i as i64 + 1 - 2 * k as i64,
        };
        w.extend(std::iter::repeat(val).take(dim));
    }
    w
}

fn power(t: &Rational, e: i64) -> Rational {
    let base = if e < 0 { t.inv().expect("t is nonzero") } else { t.clone() };
    (0..e.unsigned_abs()).fold(rone(), |acc, _| acc.times(&base))
}

/// t·x̃ = t⁻¹γ(t)x̃: an entry from weight w_c to weight w_r scales by t^{−1+w_r−w_c}.
pub fn kazhdan_act(xt: &BlockRep<Rational>, t: &Rational) -> BlockRep<Rational> {
    let data = &xt.data;
    let scale = |m: &Matrix<Rational>, wr: &[i64], wc: &[i64]| {
        Matrix::from_fn(m.rows(), m.cols(), |r, c| m.get(r, c).times(&power(t, -1 + wr[r] - wc[c])))
    };
    let a = (0..data.n - 1).map(|i| scale(&xt.a[i], &weights(data, i + 1), &weights(data, i))).collect();
    let b = (0..data.n - 1).map(|i| scale(&xt.b[i], &weights(data, i), &weights(data, i + 1))).collect();
    BlockRep { data: data.clone(), a, b }
}

/// t·x̃ is transversal, its matched blocks are t⁻¹ times those of x̃, and it
/// equals the lift of t⁻¹x.
pub fn kazhdan_action_check(xt: &BlockRep<Rational>, t: &Rational) -> Result<bool> {
    if t.is_zero() {
        return Err(Error::InvalidInput("t must be nonzero".into()));
    }
    let x = xt.matched_rep()?;
    let tinv = t.inv().expect("nonzero");
    let scaled_x = x.scale(&tinv);
    let moved = kazhdan_act(xt, t);
    let report = maffei_verify(&moved, &scaled_x)?;
    Ok(report.passed() && maffei_lift(&scaled_x, &xt.data)? == moved)
}

// ---------------------------------------------------------------------------
// The e = 0 flag map

#[derive(Clone, Debug, PartialEq)]
pub struct FlagIso {
    /// Δ₁Γ₁ on K^N.
    pub endomorphism: Matrix<Rational>,
    /// Bases of F_0 = 0 ⊂ F_1 ⊂ … ⊂ F_n = K^N.
    pub flag: Vec<Vec<Vec<Rational>>>,
    /// x·F_k ⊆ F_{k−1} for every k.
    pub descends: bool,
    pub nilpotent: bool,
}

impl FlagIso {
    pub fn to_json(&self) -> Value {
        json!({
            "endomorphism": self.endomorphism.to_json(),
            "flag_dimensions": self.flag.iter().map(Vec::len).collect::<Vec<_>>(),
            "flag": self.flag.iter().map(|f| f.iter().map(|v| v.iter().map(JsonScalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "descends": self.descends,
            "nilpotent": self.nilpotent,
        })
    }
}

fn contained<S: Field>(dim: usize, u: &[Vec<S>], w: &[Vec<S>]) -> bool {
    let wm = crate::scalars::columns_to_matrix(dim, w);
    let mut all = w.to_vec();
    all.extend(u.iter().cloned());
    rank(&crate::scalars::columns_to_matrix(dim, &all)) == rank(&wm)
}

/// (Δ₁Γ₁, 0 ⊂ ker Γ₁ ⊂ ker A₁Γ₁ ⊂ … ⊂ K^N) with dim F_k = r_1 + … + r_k.
pub fn flag_iso_e0(x: &QuiverRep<Rational>, data: &TypeAData) -> Result<FlagIso> {
    if !data.is_e0() {
        return Err(Error::InvalidInput("flag map needs d = (N, 0, …, 0)".into()));
    }
    check_shapes(x, data)?;
    if moment_map(x)?.iter().any(|m| !m.is_zero()) {
        return Err(Error::PreconditionMomentMap);
    }
    let big_n = data.big_n;
    let endo = x.delta[0].mul(&x.gamma[0]);
    let mut flag = vec![Vec::new()];
    let mut chain = x.gamma[0].clone();
    for k in 1..data.n {
        let expected: usize = data.r[..k].iter().sum();
        let f = mat_kernel(&chain);
        if f.len() != expected {
            return Err(Error::FlagDimensionMismatch(format!("dim F_{k} = {} but r gives {expected}", f.len())));
        }
        flag.push(f);
        if k < data.n - 1 {
            chain = x.a[k - 1].mul(&chain);
        }
    }
    flag.push((0..big_n).map(|c| (0..big_n).map(|r| if r == c { rone() } else { rzero() }).collect()).collect());
    let descends = (1..flag.len()).all(|k| {
        let image: Vec<Vec<Rational>> = flag[k].iter().map(|v| endo.apply(v)).collect();
        contained(big_n, &image, &flag[k - 1])
    });
    let nilpotent = endo.pow(data.n).is_zero();
    Ok(FlagIso { endomorphism: endo, flag, descends, nilpotent })
}

// ---------------------------------------------------------------------------
// Slodowy slices

#[derive(Clone, Debug, PartialEq)]
pub struct SlodowySlice {
    pub n: usize,
    pub jordan_type: Vec<usize>,
    pub triple: Sl2Triple,
    /// Basis of ker ad f by ad h-weight spaces.
    pub slice_basis: Vec<Matrix<Rational>>,
    /// j + 2 for a basis vector of ad h-weight −j.
    pub kazhdan_degrees: Vec<usize>,
}

impl SlodowySlice {
    pub fn to_json(&self) -> Value {
        json!({
            "N": self.n,
            "jordan_type": self.jordan_type,
            "e": self.triple.e.to_json(),
            "h": self.triple.h.to_json(),
            "f": self.triple.f.to_json(),
            "dimension": self.slice_basis.len(),
            "kazhdan_degrees": self.kazhdan_degrees,
            "sl2_relations": self.triple.relations_hold(),
        })
    }
}

pub fn dual_partition(p: &[usize]) -> Vec<usize> {
    let max = p.iter().copied().max().unwrap_or(0);
    (1..=max).map(|k| p.iter().filter(|&&x| x >= k).count()).collect()
}

/// S = e + ker ad f for e in Jordan form of the given type.
pub fn slodowy_slice(n: usize, jordan_type: &[usize]) -> Result<SlodowySlice> {
    if jordan_type.iter().any(|&x| x == 0) || jordan_type.windows(2).any(|w| w[0] < w[1]) || jordan_type.iter().sum::<usize>() != n {
        return Err(Error::InvalidPartition(format!("{jordan_type:?} is not a partition of {n}")));
    }
    let towers: Vec<(usize, usize)> = jordan_type.iter().map(|&m| (m, 1)).collect();
    let triple = tower_triple(&towers);
    let hw: Vec<i64> = (0..n).map(|a| triple.h.get(a, a).to_integer().try_into().unwrap_or(0)).collect();
    let mut by_weight: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            by_weight.entry(hw[a] - hw[b]).or_default().push((a, b));
        }
    }
    let mut slice_basis = Vec::new();
    let mut kazhdan_degrees = Vec::new();
    for (&w, entries) in by_weight.iter() {
        // ad f restricted to the weight-w space, as columns in N²-space.
        let cols: Vec<Vec<Rational>> = entries
            .iter()
            .map(|&(a, b)| {
                let mut z = Matrix::zeros(n, n);
                z.set(a, b, rone());
                triple.f.commutator(&z).into_data()
            })
            .collect();
        let adf = crate::scalars::columns_to_matrix(n * n, &cols);
        for kv in mat_kernel(&adf) {
            let mut z = Matrix::zeros(n, n);
            for (c, &(a, b)) in kv.iter().zip(entries) {
                z.set(a, b, c.clone());
            }
            if w > 0 {
                return Err(Error::InvalidInput("ker ad f met a positive weight".into()));
            }
            slice_basis.push(z);
            kazhdan_degrees.push((2 - w) as usize);
        }
    }
    Ok(SlodowySlice { n, jordan_type: jordan_type.to_vec(), triple, slice_basis, kazhdan_degrees })
}

/// All partitions of n, largest parts first.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for k in (1..=n.min(max)).rev() {
            prefix.push(k);
            go(n - k, k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Seeded points of Λ₀ for the type-A data.
pub fn sample_lambda0(data: &TypeAData, seed: u64) -> Result<QuiverRep<Rational>> {
    crate::quiver::sample_lambda0(&data.quiver()?, &data.v, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quiver::{cyclic_paths, trace_invariant};
    use crate::scalars::rat;

    fn general() -> TypeAData {
        build_typea(3, 4, &[2, 1, 1], &[2, 1]).unwrap()
    }

    fn e0() -> TypeAData {
        build_typea(3, 4, &[2, 1, 1], &[4, 0]).unwrap()
    }

    #[test]
    fn dimension_examples() {
        let d = e0();
        assert_eq!((d.v.clone(), d.tilde_v.clone()), (vec![2, 1], vec![2, 1]));
        let d = build_typea(2, 2, &[1, 1], &[2]).unwrap();
        assert_eq!((d.v.clone(), d.tilde_v.clone()), (vec![1], vec![1]));
        assert_eq!(build_typea(2, 2, &[2, 0], &[2]), Err(Error::NonPositiveDimension(1)));
        let d = general();
        assert_eq!((d.v.clone(), d.tilde_v.clone(), d.tilde_d.clone()), (vec![1, 1], vec![2, 1], vec![4, 0]));
        // ṽ_i = Σ_{j>i} r_j, the e = 0 dimension vector.
        for (n, big_n, r, dv) in [(4, 6, vec![2, 2, 1, 1], vec![1, 1, 1]), (4, 5, vec![1, 2, 1, 1], vec![2, 0, 1])] {
            let data = build_typea(n, big_n, &r, &dv).unwrap();
            for i in 1..n {
                assert_eq!(data.tilde_v[i - 1], r[i..].iter().sum::<usize>());
                assert_eq!(data.layout(i).dim, data.tilde_v[i - 1]);
            }
            assert_eq!(data.layout(0).dim, big_n);
        }
    }

    #[test]
    fn grad_examples() {
        assert_eq!(grad_degree(2, 1, 2, 2, BlockKind::T), 0);
        assert_eq!(grad_degree(2, 1, 2, 1, BlockKind::S), 0);
        assert_eq!(grad_degree(3, 1, 3, 3, BlockKind::T), -1);
    }

    #[test]
    fn sl2_examples() {
        let t = tower_triple(&[(1, 3)]);
        assert!(t.e.is_zero() && t.f.is_zero() && t.h.is_zero());
        let t = tower_triple(&[(2, 1)]);
        assert_eq!(t.f.get(1, 0), &int(1));
        assert_eq!((t.h.get(0, 0).clone(), t.h.get(1, 1).clone()), (int(1), int(-1)));
        for p in partitions(5) {
            assert!(tower_triple(&p.iter().map(|&m| (m, 2)).collect::<Vec<_>>()).relations_hold());
        }
        let d = general();
        for i in 0..d.n - 1 {
            assert!(d.sl2_for_blocks(i).relations_hold());
        }
    }

    #[test]
    fn hand_checked_fixture() {
        // Unknowns a = T[0;2,1;2,1], b = T[0;V;2,1], c = S[0;2,2;2,1], d = S[0;2,2;V]:
        // the equations give b = B₁Γ₂, d = Δ₂A₁ and a = c = ½Δ₂Γ₂.
        let data = general();
        let x = sample_lambda0(&data, 7).unwrap();
        let xt = maffei_lift(&x, &data).unwrap();
        let get = |name: &str| {
            let spec = data.block_specs().into_iter().find(|s| s.name == name).unwrap();
            xt.block(&spec).get(0, 0).clone()
        };
        let (a1, b1, g2, d2) = (&x.a[0], &x.b[0], &x.gamma[1], &x.delta[1]);
        assert_eq!(get("T[0;V;2,1]"), b1.mul(g2).get(0, 0).clone());
        assert_eq!(get("S[0;2,2;V]"), d2.mul(a1).get(0, 0).clone());
        let half = d2.mul(g2).get(0, 0).times(&rat(1, 2));
        assert_eq!(get("T[0;2,1;2,1]"), half);
        assert_eq!(get("S[0;2,2;2,1]"), half);
        assert_eq!(get("T[0;2,1;2,2]"), rone());
        assert_eq!(get("S[0;2,1;2,1]"), rone());
    }

    #[test]
    fn samples_need_no_fallback() {
        for data in [general(), e0(), build_typea(4, 6, &[2, 2, 1, 1], &[1, 1, 1]).unwrap()] {
            for seed in 0..3 {
                let x = sample_lambda0(&data, seed).unwrap();
                let sys = build_system(&data, &x);
                let eqs = flatten(transversal_equations(&data, &sys.a, &sys.b));
                let order: Vec<usize> = (0..sys.vars.len()).collect();
                let (_, fallbacks) = propagate(&eqs, sys.vars.len(), &order).unwrap();
                assert_eq!(fallbacks, 0);
                assert!(maffei_verify(&maffei_lift(&x, &data).unwrap(), &x).unwrap().passed());
            }
        }
    }

    #[test]
    fn lift_zero_is_canonical_frame() {
        let data = general();
        let x = QuiverRep::zero(&data.quiver().unwrap(), &data.v).unwrap();
        let xt = maffei_lift(&x, &data).unwrap();
        for spec in data.block_specs() {
            let blk = xt.block(&spec);
            match spec.rule {
                BlockRule::Identity => assert_eq!(blk, Matrix::identity(spec.rows)),
                _ => assert!(blk.is_zero(), "{}", spec.name),
            }
        }
        assert!(maffei_verify(&xt, &x).unwrap().passed());
    }

    #[test]
    fn lift_samples_and_negative_control() {
        let data = general();
        for seed in 0..4 {
            let x = sample_lambda0(&data, seed).unwrap();
            let xt = maffei_lift(&x, &data).unwrap();
            assert_eq!(maffei_lift(&x, &data).unwrap(), xt);
            assert_eq!(xt.matched_rep().unwrap(), x);
            assert!(crate::quiver::moment_map(&xt.to_quiver_rep().unwrap()).unwrap().iter().all(Matrix::is_zero));
            for t in [int(2), int(3), int(-1), rone()] {
                assert!(kazhdan_action_check(&xt, &t).unwrap());
            }
            let mut bad = xt.clone();
            let spec = data.block_specs().into_iter().find(|s| s.rule == BlockRule::Zero && s.rows * s.cols > 0).unwrap();
            let m = match spec.map {
                MapKind::A => &mut bad.a[spec.i],
                MapKind::B => &mut bad.b[spec.i],
            };
            m.set(spec.row_off, spec.col_off, rone());
            let report = maffei_verify(&bad, &x).unwrap();
            assert!(report.failures().contains(&spec.name));
        }
        let mut off = sample_lambda0(&data, 1).unwrap();
        off.b[0] = off.b[0].add(&Matrix::identity(1));
        assert_eq!(maffei_lift(&off, &data), Err(Error::PreconditionMomentMap));
    }

    #[test]
    fn pullback_identity() {
        let data = general();
        for seed in 0..2 {
            let x = sample_lambda0(&data, seed).unwrap();
            let report = symplectic_pullback_check(&x, &data, 3, seed).unwrap();
            assert_eq!(report.mismatches, 0);
            assert_eq!(report.pairs, 5);
        }
    }

    #[test]
    fn e0_lift_is_identity_and_flags() {
        let data = e0();
        let mut checked = 0;
        for seed in 0..6 {
            let x = sample_lambda0(&data, seed).unwrap();
            let xt = maffei_lift(&x, &data).unwrap();
            assert_eq!(xt.to_quiver_rep().unwrap(), x.clone());
            for path in cyclic_paths(&x.quiver.expand(), 4) {
                let y = xt.to_quiver_rep().unwrap();
                let (ex, ey) = (x.expand_framing(), y.expand_framing());
                assert_eq!(trace_invariant(&ex, &path).unwrap(), trace_invariant(&ey, &path).unwrap());
            }
            if !crate::quiver::is_semistable_det(&x).unwrap() {
                continue;
            }
            let fi = flag_iso_e0(&x, &data).unwrap();
            assert!(fi.descends && fi.nilpotent);
            assert_eq!(fi.flag.iter().map(Vec::len).collect::<Vec<_>>(), vec![0, 2, 3, 4]);
            checked += 1;
        }
        assert!(checked > 0);
        let mut x = sample_lambda0(&data, 0).unwrap();
        x.gamma[0] = Matrix::zeros(2, 4);
        x.delta[0] = Matrix::zeros(4, 2);
        x.a[0] = Matrix::zeros(1, 2);
        x.b[0] = Matrix::zeros(2, 1);
        assert!(matches!(flag_iso_e0(&x, &data), Err(Error::FlagDimensionMismatch(_))));
        let small = build_typea(2, 2, &[1, 1], &[2]).unwrap();
        let x = sample_lambda0(&small, 3).unwrap();
        let fi = flag_iso_e0(&x, &small).unwrap();
        assert_eq!(fi.flag.iter().map(Vec::len).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(fi.endomorphism.apply(&fi.flag[1][0]).iter().all(Scalar::is_zero));
    }

    #[test]
    fn slodowy_examples() {
        let s = slodowy_slice(2, &[2]).unwrap();
        let mut deg = s.kazhdan_degrees.clone();
        deg.sort_unstable();
        assert_eq!(deg, vec![2, 4]);
        let s = slodowy_slice(2, &[1, 1]).unwrap();
        assert_eq!(s.kazhdan_degrees, vec![2; 4]);
        assert_eq!(slodowy_slice(3, &[2, 1]).unwrap().slice_basis.len(), 5);
        assert!(matches!(slodowy_slice(3, &[1, 2]), Err(Error::InvalidPartition(_))));
        for n in 1..=4 {
            for p in partitions(n) {
                let s = slodowy_slice(n, &p).unwrap();
                assert!(s.triple.relations_hold());
                let expect: usize = dual_partition(&p).iter().map(|x| x * x).sum();
                assert_eq!(s.slice_basis.len(), expect);
                assert!(s.kazhdan_degrees.iter().all(|&k| k >= 2));
                for z in &s.slice_basis {
                    assert!(s.triple.f.commutator(z).is_zero());
                }
            }
        }
    }
}
