//! Cartan data, positive roots, the p-function and weight multiplicities.
//!
//! Root and weight vectors are integer vectors. Roots are written in the basis
//! of simple roots ε_i, weights in the basis of fundamental weights ω_i, and
//! the pairing is (x, y) = xᵀCy with C the symmetric Cartan matrix.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quiver::{FramedQuiver, Quiver};
use crate::scalars::{int, rat, rzero, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CartanType {
    Finite,
    Affine,
    Indefinite,
}

impl CartanType {
    pub fn label(self) -> &'static str {
        match self {
            CartanType::Finite => "finite",
            CartanType::Affine => "affine",
            CartanType::Indefinite => "indefinite",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CartanData {
    pub matrix: Vec<Vec<i64>>,
    pub kind: CartanType,
    /// Undirected adjacency multiplicities, used for support connectivity.
    links: Vec<Vec<i64>>,
}

impl CartanData {
    pub fn from_quiver(q: &Quiver) -> Result<Self> {
        if !q.is_loop_free() {
            return Err(Error::InvalidInput("Cartan data needs a loop-free quiver".into()));
        }
        let n = q.vertex_count;
        let mut links = vec![vec![0i64; n]; n];
        for &(t, h) in &q.arrows {
            links[t][h] += 1;
            links[h][t] += 1;
        }
        let matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 2 } else { -links[i][j] }).collect()).collect();
        Ok(Self::from_parts(matrix, links))
    }

    /// Symmetric generalized Cartan matrix given directly.
    pub fn from_matrix(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let n = matrix.len();
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n || row[i] != 2 {
                return Err(Error::InvalidInput("Cartan matrix must be square with diagonal 2".into()));
            }
            for (j, &x) in row.iter().enumerate() {
                if i != j && (x > 0 || matrix[j][i] != x) {
                    return Err(Error::InvalidInput("Cartan matrix must be symmetric with nonpositive off-diagonal".into()));
                }
            }
        }
        let links = (0..n).map(|i| (0..n).map(|j| if i == j { 0 } else { -matrix[i][j] }).collect()).collect();
        Ok(Self::from_parts(matrix, links))
    }

    fn from_parts(matrix: Vec<Vec<i64>>, links: Vec<Vec<i64>>) -> Self {
        let kind = classify(&matrix);
        CartanData { matrix, kind, links }
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        self.matrix.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn pairing(&self, x: &[i64], y: &[i64]) -> i64 {
        x.iter().zip(self.apply(y)).map(|(a, b)| a * b).sum()
    }

    /// s_i α = α − (α, ε_i) ε_i.
    pub fn reflect_root(&self, i: usize, alpha: &[i64]) -> Vec<i64> {
        let c = self.apply(alpha)[i];
        let mut out = alpha.to_vec();
        out[i] -= c;
        out
    }

    /// Whether the vertices with nonzero coordinate form a connected subgraph.
    pub fn support_connected(&self, alpha: &[i64]) -> bool {
        let support: Vec<usize> = (0..alpha.len()).filter(|&i| alpha[i] != 0).collect();
        let Some(&start) = support.first() else {
            return false;
        };
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for &j in &support {
                if self.links[i][j] > 0 && seen.insert(j) {
                    queue.push_back(j);
                }
            }
        }
        seen.len() == support.len()
    }

    /// Primitive positive generator of the radical for affine data.
    pub fn delta(&self) -> Option<Vec<i64>> {
        if self.kind != CartanType::Affine {
            return None;
        }
        let m = crate::scalars::Matrix::from_fn(self.rank(), self.rank(), |r, c| int(self.matrix[r][c]));
        let ker = crate::scalars::mat_kernel(&m);
        let v = ker.first()?;
        // Clear denominators, then divide by the gcd and fix the sign.
        let lcm = v.iter().fold(num_bigint::BigInt::from(1), |acc, x| num_integer::Integer::lcm(&acc, x.denom()));
        let ints: Vec<i64> = v
            .iter()
            .map(|x| {
                let y = x * Rational::from_integer(lcm.clone());
                i64::try_from(y.to_integer()).expect("small radical")
            })
            .collect();
        let g = ints.iter().fold(0i64, |acc, &x| num_integer::Integer::gcd(&acc, &x));
        let sign = if ints.iter().any(|&x| x < 0) { -1 } else { 1 };
        Some(ints.iter().map(|&x| sign * x / g).collect())
    }
}

/// Inertia of a symmetric integer matrix by congruence elimination.
fn inertia(matrix: &[Vec<i64>]) -> (usize, usize, usize) {
    let n = matrix.len();
    let mut m: Vec<Vec<Rational>> = matrix.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let (mut pos, mut neg) = (0, 0);
    loop {
        if let Some(idx) = alive.iter().position(|&i| m[i][i] != rzero()) {
            let p = alive.remove(idx);
            let piv = m[p][p].clone();
            if piv > rzero() {
                pos += 1;
            } else {
                neg += 1;
            }
            for &i in &alive {
                for &j in &alive {
                    let upd = &m[i][p] * &m[p][j] / &piv;
                    m[i][j] -= upd;
                }
            }
            continue;
        }
        // All remaining diagonals vanish; a nonzero off-diagonal entry gives one of each sign.
        let pair = alive.iter().enumerate().find_map(|(a, &i)| alive[a + 1..].iter().find(|&&j| m[i][j] != rzero()).map(|&j| (i, j)));
        match pair {
            Some((i, j)) => {
                // Replace e_i by e_i + e_j, which has nonzero norm 2m_ij.
                for k in 0..n {
                    let add = m[j][k].clone();
                    m[i][k] += add;
                }
                for k in 0..n {
                    let add = m[k][j].clone();
                    m[k][i] += add;
                }
            }
            None => return (pos, neg, alive.len()),
        }
    }
}

fn classify(matrix: &[Vec<i64>]) -> CartanType {
    match inertia(matrix) {
        (_, 0, 0) => CartanType::Finite,
        (_, 0, 1) => CartanType::Affine,
        _ => CartanType::Indefinite,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Root {
    pub coords: Vec<i64>,
    pub real: bool,
}

impl Root {
    pub fn to_json(&self) -> Value {
        json!({"coords": self.coords, "real": self.real})
    }
}

/// p(α) = 1 − Σα_i² + Σ_a α_t α_h.
pub fn p_value(alpha: &[i64], q: &Quiver) -> Rational {
    int(p_int(alpha, q))
}

fn p_int(alpha: &[i64], q: &Quiver) -> i64 {
    1 - alpha.iter().map(|x| x * x).sum::<i64>() + q.arrows.iter().map(|&(t, h)| alpha[t] * alpha[h]).sum::<i64>()
}

/// Kac's criterion for a positive vector: `Some(true)` for a real root,
/// `Some(false)` for an imaginary root, `None` when not a root.
pub fn root_kind(cartan: &CartanData, alpha: &[i64]) -> Option<bool> {
    if alpha.iter().any(|&x| x < 0) || alpha.iter().all(|&x| x == 0) {
        return None;
    }
    let mut a = alpha.to_vec();
    loop {
        if a.iter().sum::<i64>() == 1 {
            return Some(true);
        }
        if !cartan.support_connected(&a) {
            return None;
        }
        let ca = cartan.apply(&a);
        match (0..a.len()).find(|&i| ca[i] > 0) {
            Some(i) => {
                a[i] -= ca[i];
                if a[i] < 0 {
                    return None;
                }
            }
            None => return Some(false),
        }
    }
}

fn below(bound: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &b in bound {
        out = out.into_iter().flat_map(|p: Vec<i64>| (0..=b.max(0)).map(move |x| {
            let mut q = p.clone();
            q.push(x);
            q
        })).collect();
    }
    out
}

fn sort_roots(roots: &mut [Root]) {
    roots.sort_by(|a, b| a.coords.iter().sum::<i64>().cmp(&b.coords.iter().sum::<i64>()).then(a.coords.cmp(&b.coords)));
}

/// Every positive root ≤ bound, for any loop-free quiver, by Kac's criterion.
pub fn positive_roots_kac(cartan: &CartanData, bound: &[i64]) -> Vec<Root> {
    let mut out: Vec<Root> =
        below(bound).into_iter().filter_map(|a| root_kind(cartan, &a).map(|real| Root { coords: a, real })).collect();
    sort_roots(&mut out);
    out
}

/// Positive roots ≤ bound for finite or affine type.
///
/// Real roots come from the reflection closure of the simple roots inside the
/// box; each step raises one coordinate, so the box loses nothing. Affine type
/// adds the imaginary roots nδ.
pub fn positive_roots_below(q: &Quiver, bound: &[usize]) -> Result<Vec<Root>> {
    let cartan = CartanData::from_quiver(q)?;
    positive_roots_of(&cartan, &bound.iter().map(|&b| b as i64).collect::<Vec<_>>())
}

pub fn positive_roots_of(cartan: &CartanData, bound: &[i64]) -> Result<Vec<Root>> {
    if cartan.kind == CartanType::Indefinite {
        return Err(Error::IndefiniteType);
    }
    let n = cartan.rank();
    let fits = |a: &[i64]| a.iter().zip(bound).all(|(x, b)| *x >= 0 && x <= b);
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queue = VecDeque::new();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        if fits(&e) && seen.insert(e.clone()) {
            queue.push_back(e);
        }
    }
    while let Some(a) = queue.pop_front() {
        for i in 0..n {
            let r = cartan.reflect_root(i, &a);
            if r[i] > a[i] && fits(&r) && seen.insert(r.clone()) {
                queue.push_back(r);
            }
        }
    }
    let mut out: Vec<Root> = seen.into_iter().map(|coords| Root { coords, real: true }).collect();
    if let Some(delta) = cartan.delta() {
        let mut k = 1;
        loop {
            let nd: Vec<i64> = delta.iter().map(|d| d * k).collect();
            if !fits(&nd) {
                break;
            }
            out.push(Root { coords: nd, real: false });
            k += 1;
        }
    }
    sort_roots(&mut out);
    Ok(out)
}

/// θ·α ≠ 0 for every positive root α ≤ bound.
pub fn is_generic(theta: &[Rational], q: &Quiver, bound: &[usize]) -> Result<bool> {
    if theta.len() != q.vertex_count {
        return Err(Error::ShapeMismatch("theta length".into()));
    }
    let roots = positive_roots_below(q, bound)?;
    Ok(roots.iter().all(|r| {
        let s = r.coords.iter().zip(theta).fold(rzero(), |acc, (&a, t)| acc + int(a) * t);
        s != rzero()
    }))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CbReport {
    pub dimension: Vec<i64>,
    pub p_total: i64,
    /// Largest Σ p(v^i) over decompositions with at least two parts.
    pub best_sum: Option<i64>,
    pub best_decomposition: Option<Vec<Vec<i64>>>,
    pub decompositions: u64,
    pub strict: bool,
    pub nonstrict: bool,
    pub strict_requested: bool,
    pub violations: Vec<Vec<Vec<i64>>>,
}

impl CbReport {
    pub fn verdict(&self) -> bool {
        if self.strict_requested {
            self.strict
        } else {
            self.nonstrict
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dimension": self.dimension,
            "p": self.p_total,
            "best_sum": self.best_sum,
            "best_decomposition": self.best_decomposition,
            "decompositions": self.decompositions,
            "strict": self.strict,
            "nonstrict": self.nonstrict,
            "strict_requested": self.strict_requested,
            "violations": self.violations,
        })
    }
}

struct DecompositionSearch<'a> {
    roots: &'a [Vec<i64>],
    p: &'a [i64],
    best: HashMap<(Vec<i64>, usize), Option<(i64, Vec<usize>)>>,
    count: HashMap<(Vec<i64>, usize), u64>,
}

impl DecompositionSearch<'_> {
    fn fits(part: &[i64], target: &[i64]) -> bool {
        part.iter().zip(target).all(|(a, b)| a <= b)
    }

    fn minus(a: &[i64], b: &[i64]) -> Vec<i64> {
        a.iter().zip(b).map(|(x, y)| x - y).collect()
    }

    /// Best Σp over decompositions of `target` into roots with index ≤ `cap`.
    fn best(&mut self, target: &[i64], cap: usize) -> Option<(i64, Vec<usize>)> {
        if target.iter().all(|&x| x == 0) {
            return Some((0, vec![]));
        }
        let key = (target.to_vec(), cap);
        if let Some(hit) = self.best.get(&key) {
            return hit.clone();
        }
        let mut result: Option<(i64, Vec<usize>)> = None;
        for k in 0..=cap.min(self.roots.len().saturating_sub(1)) {
            if !Self::fits(&self.roots[k], target) {
                continue;
            }
            let rest = Self::minus(target, &self.roots[k]);
            if let Some((s, mut parts)) = self.best(&rest, k) {
                let total = s + self.p[k];
                if result.as_ref().is_none_or(|(b, _)| total > *b) {
                    parts.insert(0, k);
                    result = Some((total, parts));
                }
            }
        }
        self.best.insert(key, result.clone());
        result
    }

    fn count(&mut self, target: &[i64], cap: usize) -> u64 {
        if target.iter().all(|&x| x == 0) {
            return 1;
        }
        let key = (target.to_vec(), cap);
        if let Some(&c) = self.count.get(&key) {
            return c;
        }
        let mut total = 0;
        for k in 0..=cap.min(self.roots.len().saturating_sub(1)) {
            if Self::fits(&self.roots[k], target) {
                total += self.count(&Self::minus(target, &self.roots[k]), k);
            }
        }
        self.count.insert(key, total);
        total
    }
}

/// Decomposes v^w into at least two positive roots of Q^w and compares Σp with p(v^w).
///
/// Parts are kept in nonincreasing order of their index in a fixed root list,
/// so each multiset is visited once.
pub fn cb_flatness_check(q: &FramedQuiver, v: &[usize], strict: bool) -> Result<CbReport> {
    if v.len() != q.vertex_count() {
        return Err(Error::ShapeMismatch("dimension vector length".into()));
    }
    if CartanData::from_quiver(&q.base)?.kind == CartanType::Indefinite {
        return Err(Error::IndefiniteType);
    }
    let big = q.expand();
    let cartan = CartanData::from_quiver(&big)?;
    let target: Vec<i64> = q.expand_dimension(v).iter().map(|&x| x as i64).collect();
    let roots: Vec<Vec<i64>> = positive_roots_kac(&cartan, &target).into_iter().map(|r| r.coords).collect();
    let p: Vec<i64> = roots.iter().map(|r| p_int(r, &big)).collect();
    let p_total = p_int(&target, &big);
    let mut search = DecompositionSearch { roots: &roots, p: &p, best: HashMap::new(), count: HashMap::new() };
    let mut best: Option<(i64, Vec<usize>)> = None;
    let mut decompositions = 0;
    for k in 0..roots.len() {
        if roots[k] == target || !DecompositionSearch::fits(&roots[k], &target) {
            continue;
        }
        let rest = DecompositionSearch::minus(&target, &roots[k]);
        decompositions += search.count(&rest, k);
        if let Some((s, mut parts)) = search.best(&rest, k) {
            let total = s + p[k];
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                parts.insert(0, k);
                best = Some((total, parts));
            }
        }
    }
    let best_sum = best.as_ref().map(|(s, _)| *s);
    let best_decomposition = best.as_ref().map(|(_, parts)| parts.iter().map(|&k| roots[k].clone()).collect::<Vec<_>>());
    let strict_ok = best_sum.is_none_or(|s| p_total > s);
    let nonstrict_ok = best_sum.is_none_or(|s| p_total >= s);
    let violated = if strict { !strict_ok } else { !nonstrict_ok };
    Ok(CbReport {
        dimension: target,
        p_total,
        best_sum,
        violations: if violated { best_decomposition.clone().into_iter().collect() } else { vec![] },
        best_decomposition,
        decompositions,
        strict: strict_ok,
        nonstrict: nonstrict_ok,
        strict_requested: strict,
    })
}

/// d_i ≥ 2v_i − v_{i−1} − v_{i+1} with v_0 = v_n = 0.
pub fn dominance_check(d: &[i64], v: &[i64]) -> bool {
    let n = v.len();
    (0..n).all(|i| {
        let left = if i > 0 { v[i - 1] } else { 0 };
        let right = if i + 1 < n { v[i + 1] } else { 0 };
        d.get(i).copied().unwrap_or(0) >= 2 * v[i] - left - right
    })
}

/// Type A_{n−1} Cartan matrix of size n−1.
pub fn type_a_cartan(size: usize) -> CartanData {
    CartanData::from_quiver(&Quiver::linear(size)).expect("linear quivers are loop-free")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityViolation {
    pub v_prime: Vec<i64>,
    pub p_difference: Rational,
    pub half_norm: Rational,
}

/// Scans every v′ ≤ v, v′ ≠ v, for p(v) − p(v′) ≥ ½(u, u) where
/// p(x) = Σ d_i x_i − ½(x, x) and u = v − v′, in type A.
pub fn type_a_inequality_scan(d: &[i64], v: &[i64]) -> Vec<InequalityViolation> {
    let cartan = type_a_cartan(v.len());
    let p = |x: &[i64]| int(x.iter().zip(d).map(|(a, b)| a * b).sum::<i64>()) - rat(cartan.pairing(x, x), 2);
    let pv = p(v);
    let mut out = Vec::new();
    for vp in below(v) {
        if vp == v {
            continue;
        }
        let u: Vec<i64> = v.iter().zip(&vp).map(|(a, b)| a - b).collect();
        let diff = &pv - p(&vp);
        let half = rat(cartan.pairing(&u, &u), 2);
        if diff < half {
            out.push(InequalityViolation { v_prime: vp, p_difference: diff, half_norm: half });
        }
    }
    out
}

/// Dimension of the weight space L(d)_{d − v} by Freudenthal's recursion.
///
/// `d` is in fundamental-weight coordinates and `v` in simple-root
/// coordinates. At μ = λ − β the recursion reads
/// m(μ)·(2Σ(λ_i+1)β_i − βᵀCβ) = 2 Σ_{α>0} mult(α) Σ_{k≥1} m(μ+kα)·(Σλ_iα_i − (β−kα)ᵀCα).
pub fn weight_multiplicity(cartan: &CartanData, d: &[i64], v: &[i64]) -> Result<u64> {
    let n = cartan.rank();
    if d.len() != n || v.len() != n {
        return Err(Error::ShapeMismatch("weight and dimension vectors must match the Cartan rank".into()));
    }
    if d.iter().any(|&x| x < 0) {
        return Err(Error::NonDominantHighestWeight);
    }
    if v.iter().any(|&x| x < 0) {
        return Ok(0);
    }
    let roots = positive_roots_of(cartan, v)?;
    let imaginary_mult = n as i64 - 1;
    let mults: Vec<i64> = roots.iter().map(|r| if r.real { 1 } else { imaginary_mult }).collect();
    let ca: Vec<Vec<i64>> = roots.iter().map(|r| cartan.apply(&r.coords)).collect();
    let lam_alpha: Vec<i64> = roots.iter().map(|r| r.coords.iter().zip(d).map(|(a, b)| a * b).sum()).collect();
    let mut table: BTreeMap<Vec<i64>, Rational> = BTreeMap::new();
    let mut points = below(v);
    points.sort_by_key(|b| b.iter().sum::<i64>());
    for beta in points {
        if beta.iter().all(|&x| x == 0) {
            table.insert(beta, int(1));
            continue;
        }
        let denom = 2 * beta.iter().zip(d).map(|(b, l)| (l + 1) * b).sum::<i64>() - cartan.pairing(&beta, &beta);
        let mut num = rzero();
        for (idx, root) in roots.iter().enumerate() {
            let mut k = 1;
            loop {
                let shifted: Vec<i64> = beta.iter().zip(&root.coords).map(|(b, a)| b - k * a).collect();
                if shifted.iter().any(|&x| x < 0) {
                    break;
                }
                let m = table.get(&shifted).cloned().unwrap_or_else(rzero);
                if m != rzero() {
                    let pair = lam_alpha[idx] - shifted.iter().zip(&ca[idx]).map(|(a, b)| a * b).sum::<i64>();
                    num += m * int(2 * mults[idx] * pair);
                }
                k += 1;
            }
        }
        let m = if denom == 0 {
            if num != rzero() {
                return Err(Error::InvalidInput("Freudenthal denominator vanished at a weight".into()));
            }
            rzero()
        } else {
            num / int(denom)
        };
        if !m.is_integer() || m < rzero() {
            return Err(Error::InvalidInput(format!("non-integral multiplicity {m} at {beta:?}")));
        }
        table.insert(beta, m);
    }
    let m = table.get(v).cloned().unwrap_or_else(rzero);
    Ok(u64::try_from(m.to_integer()).expect("nonnegative"))
}

/// s_i on a weight written as λ − β in root coordinates: β ↦ β + (d − Cβ)_i ε_i.
pub fn reflect_weight_offset(cartan: &CartanData, d: &[i64], i: usize, beta: &[i64]) -> Vec<i64> {
    let cb = cartan.apply(beta);
    let mut out = beta.to_vec();
    out[i] += d[i] - cb[i];
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coords(roots: &[Root]) -> Vec<Vec<i64>> {
        roots.iter().map(|r| r.coords.clone()).collect()
    }

    #[test]
    fn p_function_examples() {
        let q = Quiver::affine_a1();
        assert_eq!(p_value(&[1, 0], &q), int(0));
        assert_eq!(p_value(&[1, 1], &q), int(1));
        assert_eq!(p_value(&[0, 0], &q), int(1));
    }

    #[test]
    fn classification() {
        assert_eq!(CartanData::from_quiver(&Quiver::linear(3)).unwrap().kind, CartanType::Finite);
        assert_eq!(CartanData::from_quiver(&Quiver::affine_a1()).unwrap().kind, CartanType::Affine);
        let d4 = Quiver::new(5, vec![(0, 4), (1, 4), (2, 4), (3, 4)]).unwrap();
        let c = CartanData::from_quiver(&d4).unwrap();
        assert_eq!(c.kind, CartanType::Affine);
        assert_eq!(c.delta(), Some(vec![1, 1, 1, 1, 2]));
        let kron3 = Quiver::new(2, vec![(0, 1); 3]).unwrap();
        assert_eq!(CartanData::from_quiver(&kron3).unwrap().kind, CartanType::Indefinite);
        let framed = FramedQuiver::new(Quiver::affine_a1(), vec![1, 0]).unwrap().expand();
        assert_eq!(CartanData::from_quiver(&framed).unwrap().kind, CartanType::Indefinite);
    }

    #[test]
    fn root_lists() {
        assert_eq!(coords(&positive_roots_below(&Quiver::linear(2), &[1, 1]).unwrap()), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        let a1 = positive_roots_below(&Quiver::affine_a1(), &[1, 1]).unwrap();
        assert_eq!(coords(&a1), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert!(!a1[2].real);
        assert!(positive_roots_below(&Quiver::linear(2), &[0, 0]).unwrap().is_empty());
        let wild = Quiver::new(2, vec![(0, 1); 3]).unwrap();
        assert_eq!(positive_roots_below(&wild, &[1, 1]), Err(Error::IndefiniteType));
        // Finite A3 has 6 positive roots.
        assert_eq!(positive_roots_below(&Quiver::linear(3), &[5, 5, 5]).unwrap().len(), 6);
    }

    #[test]
    fn reflection_closure_agrees_with_kac_criterion() {
        let quivers = [
            Quiver::linear(3),
            Quiver::affine_a1(),
            Quiver::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap(),
            Quiver::new(5, vec![(0, 4), (1, 4), (2, 4), (3, 4)]).unwrap(),
        ];
        for q in quivers {
            let c = CartanData::from_quiver(&q).unwrap();
            let bound: Vec<i64> = vec![3; q.vertex_count];
            let ub: Vec<usize> = vec![3; q.vertex_count];
            assert_eq!(positive_roots_below(&q, &ub).unwrap(), positive_roots_kac(&c, &bound), "{q:?}");
        }
    }

    #[test]
    fn genericity() {
        let q = Quiver::affine_a1();
        assert!(is_generic(&[int(-1), int(-1)], &q, &[2, 2]).unwrap());
        assert!(!is_generic(&[int(0), int(0)], &q, &[1, 0]).unwrap());
        assert!(!is_generic(&[int(1), int(-1)], &q, &[2, 2]).unwrap());
        assert!(is_generic(&[int(1), int(-1)], &q, &[0, 0]).unwrap());
    }

    #[test]
    fn affine_a1_framed_is_flat_but_not_strict() {
        // v^w = (1,1,1): δ + ε_s has Σp = 1 = p(v^w).
        let q = FramedQuiver::new(Quiver::affine_a1(), vec![1, 0]).unwrap();
        let r = cb_flatness_check(&q, &[1, 1], true).unwrap();
        assert_eq!(r.p_total, 1);
        assert_eq!(r.best_sum, Some(1));
        assert!(r.nonstrict);
        assert!(!r.strict);
        assert_eq!(r.violations.len(), 1);
        let sum: Vec<i64> = (0..3).map(|i| r.violations[0].iter().map(|p| p[i]).sum()).collect();
        assert_eq!(sum, vec![1, 1, 1]);
    }

    #[test]
    fn single_root_without_decomposition_is_vacuous() {
        let q = FramedQuiver::new(Quiver::new(1, vec![]).unwrap(), vec![0]).unwrap();
        let r = cb_flatness_check(&q, &[0], true).unwrap();
        // v^w = ε_s only.
        assert_eq!(r.decompositions, 0);
        assert!(r.strict && r.nonstrict);
    }

    #[test]
    fn dominance_examples() {
        assert!(dominance_check(&[4, 0], &[2, 1]));
        assert!(dominance_check(&[2, 2, 2], &[1, 1, 1]));
        assert!(!dominance_check(&[0, 0], &[1, 0]));
        assert!(type_a_inequality_scan(&[4, 0], &[2, 1]).is_empty());
        let bad = type_a_inequality_scan(&[0, 0], &[1, 0]);
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].v_prime, vec![0, 0]);
    }

    #[test]
    fn multiplicity_examples() {
        let a1 = type_a_cartan(1);
        assert_eq!(weight_multiplicity(&a1, &[2], &[1]).unwrap(), 1);
        assert_eq!(weight_multiplicity(&a1, &[2], &[3]).unwrap(), 0);
        let a2 = type_a_cartan(2);
        assert_eq!(weight_multiplicity(&a2, &[1, 1], &[1, 1]).unwrap(), 2);
        assert_eq!(weight_multiplicity(&a2, &[1, 1], &[0, 0]).unwrap(), 1);
        assert_eq!(weight_multiplicity(&a2, &[-1, 1], &[0, 0]), Err(Error::NonDominantHighestWeight));
        // Basic representation of affine A1: weight Λ_0 − δ has multiplicity 1, Λ_0 − 2δ has 2.
        let aff = CartanData::from_quiver(&Quiver::affine_a1()).unwrap();
        assert_eq!(weight_multiplicity(&aff, &[1, 0], &[1, 1]).unwrap(), 1);
        assert_eq!(weight_multiplicity(&aff, &[1, 0], &[2, 2]).unwrap(), 2);
        assert_eq!(weight_multiplicity(&aff, &[1, 0], &[3, 3]).unwrap(), 3);
    }

    fn dominant_case() -> impl Strategy<Value = (usize, Vec<i64>, Vec<i64>)> {
        (1usize..=3).prop_flat_map(|n| (Just(n), prop::collection::vec(0i64..=2, n), prop::collection::vec(0i64..=2, n)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn p_is_one_minus_half_norm(alpha in prop::collection::vec(-3i64..=3, 4)) {
            let q = Quiver::new(4, vec![(0, 1), (1, 2), (1, 3), (3, 0)]).unwrap();
            let c = CartanData::from_quiver(&q).unwrap();
            prop_assert_eq!(p_value(&alpha, &q), int(1) - rat(c.pairing(&alpha, &alpha), 2));
        }

        #[test]
        fn strictness_verdicts_are_consistent(v0 in 0usize..3, v1 in 0usize..3, d0 in 0usize..2, d1 in 0usize..2) {
            let q = FramedQuiver::new(Quiver::affine_a1(), vec![d0, d1]).unwrap();
            let s = cb_flatness_check(&q, &[v0, v1], true).unwrap();
            let ns = cb_flatness_check(&q, &[v0, v1], false).unwrap();
            prop_assert_eq!(s.best_sum, ns.best_sum);
            prop_assert!(!s.strict || ns.nonstrict);
            prop_assert!(!(s.verdict() && !s.violations.is_empty()));
            prop_assert!(!(ns.verdict() && !ns.violations.is_empty()));
        }

        #[test]
        fn multiplicities_are_weyl_invariant((n, d, v) in dominant_case(), word in prop::collection::vec(0usize..3, 0..5)) {
            let c = type_a_cartan(n);
            let m = weight_multiplicity(&c, &d, &v).unwrap();
            let mut beta = v.clone();
            for i in word.into_iter().filter(|&i| i < n) {
                beta = reflect_weight_offset(&c, &d, i, &beta);
            }
            prop_assert_eq!(weight_multiplicity(&c, &d, &beta).unwrap(), m);
        }
    }
}
