//! Quivers, framed representations and the moment map.
//!
//! Doubled arrows are addressed by id: `2k` is the original arrow `a_k`
//! (acting `V_t → V_h`) and `2k + 1` is its reverse `a_k*` (acting `V_h → V_t`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::scalars::{
    columns_to_matrix, int, mat_kernel, mat_solve, preimage, rank, subspace_intersection, Field, Jet, JsonScalar,
    Matrix, Rational, Scalar,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    pub vertex_count: usize,
    /// (tail, head) pairs.
    pub arrows: Vec<(usize, usize)>,
}

impl Quiver {
    pub fn new(vertex_count: usize, arrows: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidInput("a quiver needs at least one vertex".into()));
        }
        if let Some(&(t, h)) = arrows.iter().find(|&&(t, h)| t >= vertex_count || h >= vertex_count) {
            return Err(Error::IndexOutOfRange(format!("arrow ({t}, {h}) with {vertex_count} vertices")));
        }
        Ok(Quiver { vertex_count, arrows })
    }

    /// Two vertices, one arrow 0 → 1.
    pub fn kronecker() -> Self {
        Quiver { vertex_count: 2, arrows: vec![(0, 1)] }
    }

    /// Two vertices, two parallel arrows 0 → 1.
    pub fn affine_a1() -> Self {
        Quiver { vertex_count: 2, arrows: vec![(0, 1), (0, 1)] }
    }

    /// Linear A_n quiver 0 → 1 → … → n−1.
    pub fn linear(n: usize) -> Self {
        Quiver { vertex_count: n, arrows: (1..n).map(|i| (i - 1, i)).collect() }
    }

    pub fn has_loop_at(&self, i: usize) -> bool {
        self.arrows.iter().any(|&(t, h)| t == i && h == i)
    }

    pub fn is_loop_free(&self) -> bool {
        self.arrows.iter().all(|&(t, h)| t != h)
    }

    /// (tail, head) of a doubled-arrow id.
    pub fn doubled_ends(&self, id: usize) -> Result<(usize, usize)> {
        let &(t, h) = self
            .arrows
            .get(id / 2)
            .ok_or_else(|| Error::IndexOutOfRange(format!("doubled arrow {id} with {} arrows", self.arrows.len())))?;
        Ok(if id % 2 == 0 { (t, h) } else { (h, t) })
    }

    pub fn to_json(&self) -> Value {
        json!({"vertices": self.vertex_count, "arrows": self.arrows.iter().map(|&(t, h)| [t, h]).collect::<Vec<_>>()})
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FramedQuiver {
    pub base: Quiver,
    pub framing: Vec<usize>,
}

impl FramedQuiver {
    pub fn new(base: Quiver, framing: Vec<usize>) -> Result<Self> {
        if framing.len() != base.vertex_count {
            return Err(Error::ShapeMismatch(format!(
                "framing has {} entries for {} vertices",
                framing.len(),
                base.vertex_count
            )));
        }
        Ok(FramedQuiver { base, framing })
    }

    pub fn unframed(base: Quiver) -> Self {
        let n = base.vertex_count;
        FramedQuiver { base, framing: vec![0; n] }
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count
    }

    /// The quiver Q^w: one extra vertex `s = n` and `d_i` arrows `i → s`.
    ///
    /// Framing arrows are appended after the base arrows, ordered by (i, j).
    pub fn expand(&self) -> Quiver {
        let n = self.base.vertex_count;
        let mut arrows = self.base.arrows.clone();
        for (i, &d) in self.framing.iter().enumerate() {
            arrows.extend(std::iter::repeat((i, n)).take(d));
        }
        Quiver { vertex_count: n + 1, arrows }
    }

    /// v^w = (v, 1).
    pub fn expand_dimension(&self, v: &[usize]) -> Vec<usize> {
        let mut out = v.to_vec();
        out.push(1);
        out
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let n = v
            .get("vertices")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::InvalidInput("quiver needs integer \"vertices\"".into()))? as usize;
        let arrows = v
            .get("arrows")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("quiver needs \"arrows\"".into()))?
            .iter()
            .map(|a| {
                let pair = a.as_array().filter(|p| p.len() == 2).and_then(|p| Some((p[0].as_u64()?, p[1].as_u64()?)));
                pair.map(|(t, h)| (t as usize, h as usize))
                    .ok_or_else(|| Error::InvalidInput(format!("arrow must be [tail, head], got {a}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let base = Quiver::new(n, arrows)?;
        let framing = match v.get("framing") {
            None => vec![0; n],
            Some(f) => usize_vec(f, "framing")?,
        };
        FramedQuiver::new(base, framing)
    }

    pub fn to_json(&self) -> Value {
        let mut j = self.base.to_json();
        j["framing"] = json!(self.framing);
        j
    }
}

pub fn usize_vec(v: &Value, what: &str) -> Result<Vec<usize>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidInput(format!("{what} must be a list")))?
        .iter()
        .map(|x| x.as_u64().map(|x| x as usize).ok_or_else(|| Error::InvalidInput(format!("{what} entries must be nonnegative integers"))))
        .collect()
}

/// A point of the representation space of the doubled framed quiver.
#[derive(Clone, Debug, PartialEq)]
pub struct QuiverRep<S> {
    pub quiver: FramedQuiver,
    pub v: Vec<usize>,
    /// A_a: v_h × v_t.
    pub a: Vec<Matrix<S>>,
    /// B_a: v_t × v_h.
    pub b: Vec<Matrix<S>>,
    /// Γ_i: v_i × d_i.
    pub gamma: Vec<Matrix<S>>,
    /// Δ_i: d_i × v_i.
    pub delta: Vec<Matrix<S>>,
}

impl<S: Scalar> QuiverRep<S> {
    pub fn zero(quiver: &FramedQuiver, v: &[usize]) -> Result<Self> {
        if v.len() != quiver.vertex_count() {
            return Err(Error::ShapeMismatch(format!("dimension vector of length {} for {} vertices", v.len(), quiver.vertex_count())));
        }
        let arrows = &quiver.base.arrows;
        Ok(QuiverRep {
            quiver: quiver.clone(),
            v: v.to_vec(),
            a: arrows.iter().map(|&(t, h)| Matrix::zeros(v[h], v[t])).collect(),
            b: arrows.iter().map(|&(t, h)| Matrix::zeros(v[t], v[h])).collect(),
            gamma: (0..v.len()).map(|i| Matrix::zeros(v[i], quiver.framing[i])).collect(),
            delta: (0..v.len()).map(|i| Matrix::zeros(quiver.framing[i], v[i])).collect(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.quiver;
        let v = &self.v;
        let arrows = &q.base.arrows;
        let bad = |what: String| Err(Error::ShapeMismatch(what));
        if v.len() != q.vertex_count() {
            return bad(format!("dimension vector length {}", v.len()));
        }
        if self.a.len() != arrows.len() || self.b.len() != arrows.len() {
            return bad("one A and one B block per arrow".into());
        }
        if self.gamma.len() != v.len() || self.delta.len() != v.len() {
            return bad("one Gamma and one Delta block per vertex".into());
        }
        for (k, &(t, h)) in arrows.iter().enumerate() {
            if self.a[k].shape() != (v[h], v[t]) {
                return bad(format!("A[{k}] has shape {:?}, expected {:?}", self.a[k].shape(), (v[h], v[t])));
            }
            if self.b[k].shape() != (v[t], v[h]) {
                return bad(format!("B[{k}] has shape {:?}, expected {:?}", self.b[k].shape(), (v[t], v[h])));
            }
        }
        for i in 0..v.len() {
            let d = q.framing[i];
            if self.gamma[i].shape() != (v[i], d) {
                return bad(format!("Gamma[{i}] has shape {:?}, expected {:?}", self.gamma[i].shape(), (v[i], d)));
            }
            if self.delta[i].shape() != (d, v[i]) {
                return bad(format!("Delta[{i}] has shape {:?}, expected {:?}", self.delta[i].shape(), (d, v[i])));
            }
        }
        Ok(())
    }

    /// Matrix of a doubled arrow.
    pub fn arrow_matrix(&self, id: usize) -> Result<&Matrix<S>> {
        self.quiver.base.doubled_ends(id)?;
        Ok(if id % 2 == 0 { &self.a[id / 2] } else { &self.b[id / 2] })
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> QuiverRep<T> {
        QuiverRep {
            quiver: self.quiver.clone(),
            v: self.v.clone(),
            a: self.a.iter().map(|m| m.map(f)).collect(),
            b: self.b.iter().map(|m| m.map(f)).collect(),
            gamma: self.gamma.iter().map(|m| m.map(f)).collect(),
            delta: self.delta.iter().map(|m| m.map(f)).collect(),
        }
    }

    fn blocks(&self) -> impl Iterator<Item = &Matrix<S>> {
        self.a.iter().chain(&self.b).chain(&self.gamma).chain(&self.delta)
    }

    fn blocks_mut(&mut self) -> impl Iterator<Item = &mut Matrix<S>> {
        self.a.iter_mut().chain(self.b.iter_mut()).chain(self.gamma.iter_mut()).chain(self.delta.iter_mut())
    }

    /// Flat coordinates in the order A, B, Γ, Δ, each block row-major.
    pub fn to_coords(&self) -> Vec<S> {
        self.blocks().flat_map(|m| m.data().iter().cloned()).collect()
    }

    pub fn coord_count(&self) -> usize {
        self.blocks().map(|m| m.data().len()).sum()
    }

    /// Inverse of [`Self::to_coords`] on a representation of the same shape.
    pub fn with_coords(&self, coords: &[S]) -> Self {
        assert_eq!(coords.len(), self.coord_count(), "coordinate count");
        let mut out = self.clone();
        let mut pos = 0;
        for m in out.blocks_mut() {
            let (r, c) = m.shape();
            *m = Matrix::from_vec(r, c, coords[pos..pos + r * c].to_vec());
            pos += r * c;
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.blocks().all(Matrix::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        let c: Vec<S> = self.to_coords().iter().zip(o.to_coords()).map(|(x, y)| x.plus(&y)).collect();
        self.with_coords(&c)
    }

    pub fn scale(&self, s: &S) -> Self {
        let c: Vec<S> = self.to_coords().iter().map(|x| x.times(s)).collect();
        self.with_coords(&c)
    }

    /// Action of (g_i) ∈ GL(v), given with the inverses.
    pub fn act(&self, g: &[Matrix<S>], g_inv: &[Matrix<S>]) -> Self {
        let arrows = &self.quiver.base.arrows;
        QuiverRep {
            quiver: self.quiver.clone(),
            v: self.v.clone(),
            a: arrows.iter().enumerate().map(|(k, &(t, h))| g[h].mul(&self.a[k]).mul(&g_inv[t])).collect(),
            b: arrows.iter().enumerate().map(|(k, &(t, h))| g[t].mul(&self.b[k]).mul(&g_inv[h])).collect(),
            gamma: (0..self.v.len()).map(|i| g[i].mul(&self.gamma[i])).collect(),
            delta: (0..self.v.len()).map(|i| self.delta[i].mul(&g_inv[i])).collect(),
        }
    }

    /// Pairing Σ tr(B¹A²) + Σ tr(Δ¹Γ²) between the (B, Δ) part of `self` and the (A, Γ) part of `o`.
    pub fn beta_pairing(&self, o: &Self) -> S {
        let mut acc = S::zero();
        for k in 0..self.a.len() {
            acc = acc.plus(&self.b[k].mul(&o.a[k]).trace());
        }
        for i in 0..self.v.len() {
            acc = acc.plus(&self.delta[i].mul(&o.gamma[i]).trace());
        }
        acc
    }

    /// The representation of Q^w with v^w = (v, 1) carrying the same data.
    ///
    /// Arrow `i → s` number j gets A = row j of Δ_i and B = −(column j of Γ_i),
    /// so the moment map agrees at the old vertices and equals −Σ tr(Γ_iΔ_i) at s.
    pub fn expand_framing(&self) -> QuiverRep<S> {
        let q = &self.quiver;
        let expanded = FramedQuiver::unframed(q.expand());
        let mut out = QuiverRep {
            quiver: expanded,
            v: q.expand_dimension(&self.v),
            a: self.a.clone(),
            b: self.b.clone(),
            gamma: Vec::new(),
            delta: Vec::new(),
        };
        for (i, &d) in q.framing.iter().enumerate() {
            for j in 0..d {
                out.a.push(self.delta[i].block(j, 0, 1, self.v[i]));
                out.b.push(self.gamma[i].block(0, j, self.v[i], 1).neg());
            }
        }
        out.gamma = out.v.iter().map(|&n| Matrix::zeros(n, 0)).collect();
        out.delta = out.v.iter().map(|&n| Matrix::zeros(0, n)).collect();
        out
    }

    /// Inverse of [`Self::expand_framing`].
    pub fn collapse_framing(&self, framed: &FramedQuiver) -> Result<Self> {
        let n = framed.vertex_count();
        let base_arrows = framed.base.arrows.len();
        if self.quiver.base != framed.expand() || self.v.len() != n + 1 || self.v[n] != 1 {
            return Err(Error::ShapeMismatch("representation is not on the expanded quiver with v_s = 1".into()));
        }
        let mut out = QuiverRep::zero(framed, &self.v[..n])?;
        out.a = self.a[..base_arrows].to_vec();
        out.b = self.b[..base_arrows].to_vec();
        let mut k = base_arrows;
        for i in 0..n {
            for j in 0..framed.framing[i] {
                out.delta[i].set_block(j, 0, &self.a[k]);
                out.gamma[i].set_block(0, j, &self.b[k].neg());
                k += 1;
            }
        }
        Ok(out)
    }
}

impl<S: Scalar + JsonScalar> QuiverRep<S> {
    pub fn to_json(&self) -> Value {
        let blocks = |ms: &[Matrix<S>]| ms.iter().map(Matrix::to_json).collect::<Vec<_>>();
        json!({
            "quiver": self.quiver.to_json(),
            "v": self.v,
            "A": blocks(&self.a),
            "B": blocks(&self.b),
            "Gamma": blocks(&self.gamma),
            "Delta": blocks(&self.delta),
        })
    }

    /// Missing blocks default to zero.
    pub fn from_json(v: &Value) -> Result<Self> {
        let quiver = FramedQuiver::from_json(v.get("quiver").ok_or_else(|| Error::InvalidInput("rep needs \"quiver\"".into()))?)?;
        let dims = usize_vec(v.get("v").ok_or_else(|| Error::InvalidInput("rep needs \"v\"".into()))?, "v")?;
        let mut rep = QuiverRep::zero(&quiver, &dims)?;
        let read = |key: &str, target: &mut Vec<Matrix<S>>| -> Result<()> {
            if let Some(list) = v.get(key) {
                let list = list.as_array().ok_or_else(|| Error::InvalidInput(format!("{key} must be a list")))?;
                if list.len() != target.len() {
                    return Err(Error::ShapeMismatch(format!("{key} needs {} blocks", target.len())));
                }
                for (slot, m) in target.iter_mut().zip(list) {
                    *slot = Matrix::from_json(m, slot.rows(), slot.cols())?;
                }
            }
            Ok(())
        };
        read("A", &mut rep.a)?;
        read("B", &mut rep.b)?;
        read("Gamma", &mut rep.gamma)?;
        read("Delta", &mut rep.delta)?;
        Ok(rep)
    }
}

/// μ_i = Σ_{h(a)=i} A_a B_a − Σ_{t(a)=i} B_a A_a + Γ_i Δ_i.
pub fn moment_map<S: Scalar>(rep: &QuiverRep<S>) -> Result<Vec<Matrix<S>>> {
    rep.validate()?;
    let v = &rep.v;
    let mut mu: Vec<Matrix<S>> = (0..v.len()).map(|i| rep.gamma[i].mul(&rep.delta[i])).collect();
    for (k, &(t, h)) in rep.quiver.base.arrows.iter().enumerate() {
        mu[h] = mu[h].add(&rep.a[k].mul(&rep.b[k]));
        mu[t] = mu[t].sub(&rep.b[k].mul(&rep.a[k]));
    }
    Ok(mu)
}

/// True when μ_i = χ_i·id at every vertex.
pub fn in_lambda<S: Scalar>(rep: &QuiverRep<S>, chi: &[S]) -> Result<bool> {
    let mu = moment_map(rep)?;
    Ok(mu.iter().enumerate().all(|(i, m)| *m == Matrix::scalar(rep.v[i], &chi[i])))
}

/// Trace of M_{p0}·M_{p1}⋯M_{pk}, the rightmost factor applied first.
pub fn trace_invariant<S: Scalar>(rep: &QuiverRep<S>, path: &[usize]) -> Result<S> {
    rep.validate()?;
    let q = &rep.quiver.base;
    let Some(&last) = path.last() else {
        return Err(Error::ShapeMismatch("empty path".into()));
    };
    for w in path.windows(2) {
        let (t0, _) = q.doubled_ends(w[0])?;
        let (_, h1) = q.doubled_ends(w[1])?;
        if t0 != h1 {
            return Err(Error::ShapeMismatch(format!("arrows {} and {} do not compose", w[0], w[1])));
        }
    }
    let (_, h0) = q.doubled_ends(path[0])?;
    let (tl, _) = q.doubled_ends(last)?;
    if h0 != tl {
        return Err(Error::ShapeMismatch("path is not cyclic".into()));
    }
    let mut prod = rep.arrow_matrix(path[0])?.clone();
    for &id in &path[1..] {
        prod = prod.mul(rep.arrow_matrix(id)?);
    }
    Ok(prod.trace())
}

/// All cyclic doubled-arrow paths of length 1..=max_len, up to nothing (rotations included).
pub fn cyclic_paths(q: &Quiver, max_len: usize) -> Vec<Vec<usize>> {
    let ids = 2 * q.arrows.len();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..ids).map(|id| vec![id]).collect();
    while let Some(p) = stack.pop() {
        let (_, h0) = q.doubled_ends(p[0]).expect("valid id");
        let (tl, _) = q.doubled_ends(*p.last().expect("nonempty")).expect("valid id");
        if h0 == tl {
            out.push(p.clone());
        }
        if p.len() < max_len {
            for id in 0..ids {
                let (_, h) = q.doubled_ends(id).expect("valid id");
                if h == tl {
                    let mut np = p.clone();
                    np.push(id);
                    stack.push(np);
                }
            }
        }
    }
    out.sort();
    out
}

fn random_entry(rng: &mut ChaCha8Rng) -> Rational {
    int(rng.gen_range(-3..=3))
}

/// Exact point of μ^{-1}(χ·id): (A, Γ) are drawn from the seeded stream and
/// (B, Δ) solve the resulting linear system, plus a random kernel element.
pub fn sample_lambda(q: &FramedQuiver, v: &[usize], chi: &[Rational], seed: u64) -> Result<QuiverRep<Rational>> {
    sample_lambda_with(q, v, chi, seed, false)
}

/// As [`sample_lambda`]; with `nonzero_bd` set, a system that admits only
/// (B, Δ) = 0 is reported as `SampleFailed`.
pub fn sample_lambda_with(
    q: &FramedQuiver,
    v: &[usize],
    chi: &[Rational],
    seed: u64,
    nonzero_bd: bool,
) -> Result<QuiverRep<Rational>> {
    if chi.len() != q.vertex_count() {
        return Err(Error::ShapeMismatch(format!("chi has {} entries for {} vertices", chi.len(), q.vertex_count())));
    }
    let mut rep = QuiverRep::<Rational>::zero(q, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for m in rep.a.iter_mut().chain(rep.gamma.iter_mut()) {
        let (r, c) = m.shape();
        *m = Matrix::from_fn(r, c, |_, _| random_entry(&mut rng));
    }
    // Unknowns are the B entries then the Δ entries; μ is linear in them.
    let arrows = &q.base.arrows;
    let mut offsets_b = Vec::new();
    let mut n_unknowns = 0;
    for &(t, h) in arrows {
        offsets_b.push(n_unknowns);
        n_unknowns += v[t] * v[h];
    }
    let mut offsets_d = Vec::new();
    for i in 0..v.len() {
        offsets_d.push(n_unknowns);
        n_unknowns += q.framing[i] * v[i];
    }
    let mut row_offsets = Vec::new();
    let mut n_eq = 0;
    for &vi in v {
        row_offsets.push(n_eq);
        n_eq += vi * vi;
    }
    let mut sys = Matrix::<Rational>::zeros(n_eq, n_unknowns);
    let mut rhs = Matrix::<Rational>::zeros(n_eq, 1);
    let add = |sys: &mut Matrix<Rational>, r: usize, c: usize, x: &Rational| {
        let cur = sys.get(r, c).plus(x);
        sys.set(r, c, cur);
    };
    for (k, &(t, h)) in arrows.iter().enumerate() {
        let a = &rep.a[k];
        // (A B)[r][c] = Σ_m A[r][m] B[m][c] at vertex h; B is v_t × v_h.
        for r in 0..v[h] {
            for c in 0..v[h] {
                for m in 0..v[t] {
                    add(&mut sys, row_offsets[h] + r * v[h] + c, offsets_b[k] + m * v[h] + c, a.get(r, m));
                }
            }
        }
        // −(B A)[r][c] = −Σ_m B[r][m] A[m][c] at vertex t.
        for r in 0..v[t] {
            for c in 0..v[t] {
                for m in 0..v[h] {
                    add(&mut sys, row_offsets[t] + r * v[t] + c, offsets_b[k] + r * v[h] + m, &a.get(m, c).negated());
                }
            }
        }
    }
    for i in 0..v.len() {
        let d = q.framing[i];
        let g = &rep.gamma[i];
        for r in 0..v[i] {
            for c in 0..v[i] {
                for m in 0..d {
                    add(&mut sys, row_offsets[i] + r * v[i] + c, offsets_d[i] + m * v[i] + c, g.get(r, m));
                }
            }
            rhs.set(row_offsets[i] + r * v[i] + r, 0, chi[i].clone());
        }
    }
    let particular = mat_solve(&sys, &rhs)?.into_data();
    let kernel = mat_kernel(&sys);
    if nonzero_bd && n_unknowns > 0 && kernel.is_empty() && particular.iter().all(Scalar::is_zero) {
        return Err(Error::SampleFailed);
    }
    let mut x = particular;
    for kv in &kernel {
        let c = random_entry(&mut rng);
        for (xi, ki) in x.iter_mut().zip(kv) {
            *xi = xi.plus(&c.times(ki));
        }
    }
    for (k, &(t, h)) in arrows.iter().enumerate() {
        rep.b[k] = Matrix::from_vec(v[t], v[h], x[offsets_b[k]..offsets_b[k] + v[t] * v[h]].to_vec());
    }
    for i in 0..v.len() {
        let d = q.framing[i];
        rep.delta[i] = Matrix::from_vec(d, v[i], x[offsets_d[i]..offsets_d[i] + d * v[i]].to_vec());
    }
    debug_assert!(in_lambda(&rep, chi).unwrap_or(false));
    Ok(rep)
}

pub fn sample_lambda0(q: &FramedQuiver, v: &[usize], seed: u64) -> Result<QuiverRep<Rational>> {
    let zero = vec![crate::scalars::rzero(); q.vertex_count()];
    sample_lambda(q, v, &zero, seed)
}

/// Determinant-character semistability: no nonzero (A, B)-stable family inside ker Δ.
pub fn is_semistable_det<S: Field>(rep: &QuiverRep<S>) -> Result<bool> {
    rep.validate()?;
    let v = &rep.v;
    let mut sub: Vec<Vec<Vec<S>>> = (0..v.len()).map(|i| mat_kernel(&rep.delta[i])).collect();
    loop {
        let mut changed = false;
        for (k, &(t, h)) in rep.quiver.base.arrows.iter().enumerate() {
            // A_k maps V_t into V_h, B_k maps V_h into V_t.
            for (src, dst, m) in [(t, h, &rep.a[k]), (h, t, &rep.b[k])] {
                let pre = preimage(m, &sub[dst]);
                let next = subspace_intersection(v[src], &sub[src], &pre);
                if next.len() < sub[src].len() {
                    sub[src] = next;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(sub.iter().all(Vec::is_empty))
}

/// Basis of ker dμ at `rep`, computed column by column with jets.
pub fn tangent_space(rep: &QuiverRep<Rational>) -> Result<Vec<QuiverRep<Rational>>> {
    rep.validate()?;
    let base = rep.map(|x| Jet::constant(x.clone()));
    let n = rep.coord_count();
    let mut columns = Vec::with_capacity(n);
    let coords = base.to_coords();
    for k in 0..n {
        let mut c = coords.clone();
        c[k] = Jet::new(c[k].value.clone(), crate::scalars::rone());
        let mu = moment_map(&base.with_coords(&c))?;
        columns.push(mu.iter().flat_map(|m| m.derivatives().into_data()).collect::<Vec<_>>());
    }
    let rows = columns.first().map_or(0, Vec::len);
    let jac = columns_to_matrix(rows, &columns);
    Ok(mat_kernel(&jac).iter().map(|kv| rep.with_coords(kv)).collect())
}

fn arrows_at(q: &Quiver, i: usize) -> Vec<(usize, bool)> {
    q.arrows
        .iter()
        .enumerate()
        .filter_map(|(k, &(t, h))| {
            if t == i {
                Some((k, true))
            } else if h == i {
                Some((k, false))
            } else {
                None
            }
        })
        .collect()
}

/// Reflection functor at a loop-free vertex of an unframed representation in μ^{-1}(χ).
///
/// Every arrow at i is read as leaving i: for t(a) = i the pair is (A_a, −B_a),
/// for h(a) = i it is (B_a, A_a). Then A: V_i → T, B: T → V_i and μ_i = BA.
/// The new space is ker B with A′ its inclusion, and B′ solves A′B′ = AB − χ_i.
/// Returns the new representation and s_i χ.
pub fn reflect<S: Field>(rep: &QuiverRep<S>, i: usize, chi: &[S]) -> Result<(QuiverRep<S>, Vec<S>)> {
    rep.validate()?;
    let q = &rep.quiver.base;
    if i >= q.vertex_count {
        return Err(Error::IndexOutOfRange(format!("vertex {i}")));
    }
    if rep.quiver.framing.iter().any(|&d| d > 0) {
        return Err(Error::Unsupported("reflect acts on unframed representations; expand the framing first".into()));
    }
    if q.has_loop_at(i) {
        return Err(Error::NotReflectable(format!("vertex {i} carries a loop")));
    }
    if chi.len() != q.vertex_count {
        return Err(Error::ShapeMismatch("chi length".into()));
    }
    if !in_lambda(rep, chi)? {
        return Err(Error::PreconditionMomentMap);
    }
    let v = &rep.v;
    let at = arrows_at(q, i);
    let other = |k: usize, out: bool| if out { q.arrows[k].1 } else { q.arrows[k].0 };
    let dim_t: usize = at.iter().map(|&(k, out)| v[other(k, out)]).sum();
    let mut big_a = Matrix::<S>::zeros(dim_t, v[i]);
    let mut big_b = Matrix::<S>::zeros(v[i], dim_t);
    let mut pos = 0;
    for &(k, out) in &at {
        let (alpha, beta) = if out { (rep.a[k].clone(), rep.b[k].neg()) } else { (rep.b[k].clone(), rep.a[k].clone()) };
        big_a.set_block(pos, 0, &alpha);
        big_b.set_block(0, pos, &beta);
        pos += alpha.rows();
    }
    if rank(&big_b) != v[i] {
        return Err(Error::NotReflectable(format!("the map onto V_{i} is not surjective")));
    }
    let kernel = mat_kernel(&big_b);
    let new_dim = kernel.len();
    let a_new = columns_to_matrix(dim_t, &kernel);
    let target = big_a.mul(&big_b).sub(&Matrix::scalar(dim_t, &chi[i]));
    let b_new = mat_solve(&a_new, &target).map_err(|_| Error::NotReflectable("A'B' = AB - chi_i has no solution".into()))?;
    if a_new.mul(&b_new) != target {
        return Err(Error::NotReflectable("A'B' = AB - chi_i has no solution".into()));
    }
    let mut new_v = v.clone();
    new_v[i] = new_dim;
    let mut out = QuiverRep::zero(&rep.quiver, &new_v)?;
    for (k, _) in q.arrows.iter().enumerate() {
        out.a[k] = rep.a[k].clone();
        out.b[k] = rep.b[k].clone();
    }
    let mut pos = 0;
    for &(k, out_arrow) in &at {
        let w = v[other(k, out_arrow)];
        let alpha = a_new.block(pos, 0, w, new_dim);
        let beta = b_new.block(0, pos, new_dim, w);
        if out_arrow {
            out.a[k] = alpha;
            out.b[k] = beta.neg();
        } else {
            out.b[k] = alpha;
            out.a[k] = beta;
        }
        pos += w;
    }
    let new_chi = reflect_character(q, i, chi);
    Ok((out, new_chi))
}

/// (s_i χ)_j = χ_j − a_ij χ_i with the symmetric Cartan matrix of a loop-free vertex i.
pub fn reflect_character<S: Scalar>(q: &Quiver, i: usize, chi: &[S]) -> Vec<S> {
    let mut out = chi.to_vec();
    for (j, slot) in out.iter_mut().enumerate() {
        let links = q.arrows.iter().filter(|&&(t, h)| (t == i && h == j) || (t == j && h == i)).count() as i64;
        let a_ij = if i == j { 2 } else { -links };
        *slot = chi[j].minus(&S::from_int(a_ij).times(&chi[i]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::{mat_inverse, rat};
    use proptest::prelude::*;

    fn m(rows: Vec<Vec<i64>>) -> Matrix<Rational> {
        Matrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(int).collect()).collect())
    }

    fn affine_a1_framed() -> FramedQuiver {
        FramedQuiver::new(Quiver::affine_a1(), vec![1, 0]).unwrap()
    }

    #[test]
    fn kronecker_moment_map() {
        let q = FramedQuiver::unframed(Quiver::kronecker());
        let mut rep = QuiverRep::zero(&q, &[1, 1]).unwrap();
        assert!(moment_map(&rep).unwrap().iter().all(Matrix::is_zero));
        rep.a[0] = m(vec![vec![2]]);
        rep.b[0] = m(vec![vec![3]]);
        let mu = moment_map(&rep).unwrap();
        assert_eq!(mu, vec![m(vec![vec![-6]]), m(vec![vec![6]])]);
        assert_eq!(trace_invariant(&rep, &[0, 1]).unwrap(), int(6));
        assert_eq!(trace_invariant(&rep, &[1, 0]).unwrap(), int(6));
        assert!(trace_invariant(&rep, &[0, 0]).is_err());
    }

    #[test]
    fn sampling_hits_the_fibre() {
        let kron = FramedQuiver::unframed(Quiver::kronecker());
        for seed in 0..5 {
            let rep = sample_lambda0(&kron, &[1, 1], seed).unwrap();
            assert!(in_lambda(&rep, &[int(0), int(0)]).unwrap());
            let rep = sample_lambda0(&affine_a1_framed(), &[1, 1], seed).unwrap();
            assert!(moment_map(&rep).unwrap().iter().all(Matrix::is_zero));
        }
        let empty = sample_lambda0(&affine_a1_framed(), &[0, 0], 1).unwrap();
        assert!(empty.is_zero());
        assert_eq!(sample_lambda0(&kron, &[1, 1], 7), sample_lambda0(&kron, &[1, 1], 7));
    }

    #[test]
    fn sample_failure_is_reported() {
        // One vertex, v = 1, w = 1: Γ random, Δ forced to zero by μ = ΓΔ = 0.
        let q = FramedQuiver::new(Quiver::new(1, vec![]).unwrap(), vec![1]).unwrap();
        let zero = [int(0)];
        let outcome = (0..10).map(|s| sample_lambda_with(&q, &[1], &zero, s, true)).find(|r| r.is_err());
        assert_eq!(outcome, Some(Err(Error::SampleFailed)));
        // Kronecker with A ≠ 0 forces B = 0.
        let kron = FramedQuiver::unframed(Quiver::kronecker());
        let rep = sample_lambda0(&kron, &[1, 1], 0).unwrap();
        if !rep.a[0].is_zero() {
            assert!(rep.b[0].is_zero());
            assert_eq!(sample_lambda_with(&kron, &[1, 1], &[int(0), int(0)], 0, true), Err(Error::SampleFailed));
        }
    }

    #[test]
    fn semistability_examples() {
        let q = FramedQuiver::new(Quiver::kronecker(), vec![1, 0]).unwrap();
        assert!(is_semistable_det(&QuiverRep::<Rational>::zero(&q, &[0, 0]).unwrap()).unwrap());
        let mut rep = QuiverRep::<Rational>::zero(&q, &[1, 1]).unwrap();
        rep.delta[0] = m(vec![vec![1]]);
        assert!(!is_semistable_det(&rep).unwrap());
        rep.b[0] = m(vec![vec![1]]);
        assert!(is_semistable_det(&rep).unwrap());
    }

    #[test]
    fn framing_expansion_round_trip() {
        let q = affine_a1_framed();
        let rep = sample_lambda(&q, &[1, 1], &[int(2), int(-1)], 3).unwrap();
        let big = rep.expand_framing();
        let mu = moment_map(&big).unwrap();
        assert_eq!(mu[0], m(vec![vec![2]]));
        assert_eq!(mu[1], m(vec![vec![-1]]));
        assert_eq!(mu[2], m(vec![vec![-1]]));
        assert_eq!(big.collapse_framing(&q).unwrap(), rep);
    }

    #[test]
    fn reflect_trivial_case() {
        // One vertex with an arrow to a second; AB = χ id with B invertible and dim T = dim V_i.
        let q = FramedQuiver::unframed(Quiver::kronecker());
        let mut rep = QuiverRep::zero(&q, &[1, 1]).unwrap();
        rep.a[0] = m(vec![vec![2]]);
        rep.b[0] = m(vec![vec![3]]);
        let chi = vec![int(-6), int(6)];
        let (out, new_chi) = reflect(&rep, 1, &chi).unwrap();
        assert_eq!(out.v, vec![1, 0]);
        assert_eq!(new_chi, vec![int(0), int(-6)]);
        assert!(in_lambda(&out, &new_chi).unwrap());
    }

    #[test]
    fn reflect_generic_affine_a1() {
        let q = affine_a1_framed();
        let chi = vec![rat(3, 2), int(-2)];
        let rep = sample_lambda(&q, &[1, 1], &chi, 11).unwrap().expand_framing();
        let mut chi_w = chi.clone();
        chi_w.push(rat(1, 2));
        for i in 0..3 {
            let (out, new_chi) = reflect(&rep, i, &chi_w).unwrap();
            assert!(in_lambda(&out, &new_chi).unwrap());
            let (back, back_chi) = reflect(&out, i, &new_chi).unwrap();
            assert_eq!(back_chi, chi_w);
            assert_eq!(back.v, rep.v);
            for p in cyclic_paths(&rep.quiver.base, 4) {
                assert_eq!(trace_invariant(&back, &p).unwrap(), trace_invariant(&rep, &p).unwrap(), "path {p:?}");
            }
        }
    }

    #[test]
    fn equivariance_to_first_order() {
        let q = affine_a1_framed();
        let rep = sample_lambda0(&q, &[1, 2], 5).unwrap_or_else(|_| sample_lambda0(&q, &[1, 1], 5).unwrap());
        let jrep = rep.map(|x| Jet::constant(x.clone()));
        let xi: Vec<Matrix<Rational>> = rep.v.iter().map(|&n| Matrix::from_fn(n, n, |r, c| int((r as i64 + 2 * c as i64) % 3 - 1))).collect();
        let g: Vec<_> = xi.iter().map(|x| Matrix::from_parts(&Matrix::identity(x.rows()), x)).collect();
        let g_inv: Vec<_> = xi.iter().map(|x| Matrix::from_parts(&Matrix::identity(x.rows()), &x.neg())).collect();
        let moved = moment_map(&jrep.act(&g, &g_inv)).unwrap();
        let mu = moment_map(&jrep).unwrap();
        for i in 0..rep.v.len() {
            assert_eq!(moved[i], g[i].mul(&mu[i]).mul(&g_inv[i]));
        }
    }

    #[test]
    fn tangent_vectors_kill_the_differential() {
        let q = affine_a1_framed();
        let rep = sample_lambda0(&q, &[1, 1], 2).unwrap();
        let tangents = tangent_space(&rep).unwrap();
        assert!(!tangents.is_empty());
        for t in tangents {
            let jet = QuiverRep {
                quiver: rep.quiver.clone(),
                v: rep.v.clone(),
                a: rep.a.iter().zip(&t.a).map(|(x, y)| Matrix::from_parts(x, y)).collect(),
                b: rep.b.iter().zip(&t.b).map(|(x, y)| Matrix::from_parts(x, y)).collect(),
                gamma: rep.gamma.iter().zip(&t.gamma).map(|(x, y)| Matrix::from_parts(x, y)).collect(),
                delta: rep.delta.iter().zip(&t.delta).map(|(x, y)| Matrix::from_parts(x, y)).collect(),
            };
            assert!(moment_map(&jet).unwrap().iter().all(Matrix::is_zero));
        }
    }

    #[test]
    fn json_round_trip() {
        let rep = sample_lambda0(&affine_a1_framed(), &[1, 1], 9).unwrap();
        assert_eq!(QuiverRep::<Rational>::from_json(&rep.to_json()).unwrap(), rep);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sampled_points_have_zero_moment_map(seed in 0u64..1000, v0 in 0usize..3, v1 in 0usize..3) {
            let q = FramedQuiver::new(Quiver::affine_a1(), vec![1, 1]).unwrap();
            if let Ok(rep) = sample_lambda0(&q, &[v0, v1], seed) {
                prop_assert!(moment_map(&rep).unwrap().iter().all(Matrix::is_zero));
            }
        }

        #[test]
        fn trace_invariants_survive_conjugation(seed in 0u64..1000, g0 in prop::collection::vec(-2i64..=2, 4), g1 in prop::collection::vec(-2i64..=2, 4)) {
            let q = FramedQuiver::unframed(Quiver::affine_a1());
            let rep = sample_lambda0(&q, &[2, 2], seed).unwrap();
            let mut g = vec![Matrix::from_vec(2, 2, g0.into_iter().map(int).collect()), Matrix::from_vec(2, 2, g1.into_iter().map(int).collect())];
            for x in g.iter_mut() {
                if mat_inverse(x).is_none() {
                    *x = Matrix::identity(2);
                }
            }
            let g_inv: Vec<_> = g.iter().map(|x| mat_inverse(x).unwrap()).collect();
            let moved = rep.act(&g, &g_inv);
            for p in cyclic_paths(&q.base, 4) {
                prop_assert_eq!(trace_invariant(&moved, &p).unwrap(), trace_invariant(&rep, &p).unwrap());
            }
        }
    }
}
