//! Parameter spaces of the three families and the linear maps between them,
//! with the finite Weyl group and ℤ/2 actions on ẑ.
//!
//! Matrices act on coordinate columns: column j is the image of source basis
//! vector j written in the target basis. Entries are cyclotomic since class
//! sums of ζ-valued characters need not be rational.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::mckay::{mckay_quiver, KleinianGroup};
use crate::roots::CartanData;
use crate::scalars::{int, mat_inverse, mat_kernel, rat, rone, rzero, CycScalar, JsonScalar, Matrix, Rational, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParamSpace {
    /// h, c₁..c_l, k.
    SraWreath(usize),
    /// h, c₁..c_r.
    SraKlein(usize),
    /// h, ε₀..ε_r.
    ZHat(usize),
    /// ẑ vectors with Σ δ_i·(ε_i-coefficient) = 0, written in the ẑ basis.
    ZHat0(usize),
    /// ε₁..ε_{n−1} for a composition of length n.
    AStar(usize),
}

impl ParamSpace {
    pub fn basis(&self) -> Vec<String> {
        let cs = |l: usize| (1..=l).map(|i| format!("c{i}"));
        let eps = |r: usize| (0..=r).map(|i| format!("eps{i}"));
        let mut out = Vec::new();
        match *self {
            ParamSpace::SraWreath(l) => {
                out.push("h".into());
                out.extend(cs(l));
                out.push("k".into());
            }
            ParamSpace::SraKlein(r) => {
                out.push("h".into());
                out.extend(cs(r));
            }
            ParamSpace::ZHat(r) | ParamSpace::ZHat0(r) => {
                out.push("h".into());
                out.extend(eps(r));
            }
            ParamSpace::AStar(n) => out.extend((1..n).map(|i| format!("eps{i}"))),
        }
        out
    }

    pub fn label(&self) -> String {
        match *self {
            ParamSpace::SraWreath(l) => format!("sra-wreath({l})"),
            ParamSpace::SraKlein(r) => format!("sra-klein({r})"),
            ParamSpace::ZHat(r) => format!("zhat({r})"),
            ParamSpace::ZHat0(r) => format!("zhat0({r})"),
            ParamSpace::AStar(n) => format!("astar({n})"),
        }
    }

    fn to_json(&self) -> Value {
        json!({"space": self.label(), "basis": self.basis()})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamMap {
    pub source: ParamSpace,
    pub target: ParamSpace,
    pub matrix: Matrix<CycScalar>,
    /// Left inverse: inverse·matrix = id.
    pub inverse: Matrix<CycScalar>,
}

impl ParamMap {
    pub fn apply(&self, x: &[CycScalar]) -> Vec<CycScalar> {
        self.matrix.apply(x)
    }

    pub fn apply_inverse(&self, y: &[CycScalar]) -> Vec<CycScalar> {
        self.inverse.apply(y)
    }

    /// The matrix when every entry is rational.
    pub fn rational_matrix(&self) -> Option<Matrix<Rational>> {
        let entries: Option<Vec<Rational>> = self.matrix.data().iter().map(CycScalar::to_rational).collect();
        entries.map(|e| Matrix::from_vec(self.matrix.rows(), self.matrix.cols(), e))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "matrix": matrix_json(&self.matrix),
            "inverse": matrix_json(&self.inverse),
            "inverse_verified": self.inverse.mul(&self.matrix) == Matrix::identity(self.matrix.cols()),
        })
    }
}

/// Rows of strings for rational entries, cyclotomic objects otherwise.
fn matrix_json(m: &Matrix<CycScalar>) -> Value {
    let entry = |c: &CycScalar| match c.to_rational() {
        Some(r) => Value::String(crate::scalars::rational_to_string(&r)),
        None => c.to_json(),
    };
    Value::Array((0..m.rows()).map(|r| Value::Array((0..m.cols()).map(|c| entry(m.get(r, c))).collect())).collect())
}

fn cint(x: i64) -> CycScalar {
    CycScalar::rational(int(x))
}

/// Coordinates of tr_{N_i}𝐜 = h·dim N_i + Σ_j c_j Σ_{γ∈S_j} χ_i(γ) in (h, c₁..c_l).
fn trace_c(g: &KleinianGroup, i: usize) -> Vec<CycScalar> {
    let mut out = vec![cint(g.dims[i] as i64)];
    for c in 1..g.classes.len() {
        out.push(cint(g.classes[c].len() as i64).times(&g.char_table[i][c]));
    }
    out
}

/// The inverse-direction images ẑ* → param* for the wreath family, as a matrix
/// whose column j is the image of (h, ε₀..ε_r)_j in (h, c₁..c_l, k).
pub fn upsilon_images(g: &KleinianGroup) -> Matrix<CycScalar> {
    let classes = g.classes.len();
    let size = classes + 1;
    let order = cint(g.order() as i64);
    let mut m = Matrix::zeros(size, size);
    m.set(0, 0, CycScalar::one());
    for i in 0..classes {
        let mut col = trace_c(g, i);
        col.push(CycScalar::zero());
        if i == 0 {
            col[size - 1] = order.clone();
            col[0] = col[0].minus(&order.times(&CycScalar::rational(rat(1, 2))));
        }
        for (r, x) in col.into_iter().enumerate() {
            m.set(r, i + 1, x);
        }
    }
    m
}

/// υ: (h, c₁..c_l, k) → (h, ε₀..ε_r), the inverse of [`upsilon_images`].
pub fn build_upsilon(g: &KleinianGroup, n: usize) -> Result<ParamMap> {
    if n < 2 {
        return Err(Error::InvalidInput("the wreath map needs n > 1".into()));
    }
    if g.order() < 2 {
        return Err(Error::InvalidInput("the group must be nontrivial".into()));
    }
    let images = upsilon_images(g);
    let upsilon = mat_inverse(&images).ok_or(Error::NotInvertible)?;
    let l = g.classes.len() - 1;
    Ok(ParamMap { source: ParamSpace::SraWreath(l), target: ParamSpace::ZHat(l), matrix: upsilon, inverse: images })
}

/// Images for n = 1: h ↦ h, ε₀ ↦ tr_{N₀}𝐜 − |Γ|h, ε_i ↦ tr_{N_i}𝐜, in (h, c₁..c_r).
pub fn upsilon0_images(g: &KleinianGroup) -> Matrix<CycScalar> {
    let classes = g.classes.len();
    let order = cint(g.order() as i64);
    let mut m = Matrix::zeros(classes, classes + 1);
    m.set(0, 0, CycScalar::one());
    for i in 0..classes {
        let mut col = trace_c(g, i);
        if i == 0 {
            col[0] = col[0].minus(&order);
        }
        for (r, x) in col.into_iter().enumerate() {
            m.set(r, i + 1, x);
        }
    }
    m
}

/// υ₀: (h, c₁..c_r) → ẑ₀, landing on representatives with Σ δ_i ε_i-coefficients = 0.
pub fn build_upsilon0(g: &KleinianGroup) -> Result<ParamMap> {
    let images = upsilon0_images(g);
    let delta = g.dims.iter().map(|&d| cint(d as i64)).collect::<Vec<_>>();
    let size = images.cols();
    // Σ δ_i·image(ε_i) = 0.
    let mut weighted = vec![CycScalar::zero(); size];
    weighted[1..].clone_from_slice(&delta);
    if !images.apply(&weighted).iter().all(Scalar::is_zero) {
        return Err(Error::RelationViolated);
    }
    // Columns spanning the δ-orthogonal representatives.
    let mut constraint = Matrix::zeros(1, size);
    for (i, d) in delta.iter().enumerate() {
        constraint.set(0, i + 1, d.clone());
    }
    let reps = mat_kernel(&constraint);
    let q = crate::scalars::columns_to_matrix(size, &reps);
    let square = images.mul(&q);
    let inv = mat_inverse(&square).ok_or(Error::NotInvertible)?;
    let r = g.classes.len() - 1;
    Ok(ParamMap { source: ParamSpace::SraKlein(r), target: ParamSpace::ZHat0(r), matrix: q.mul(&inv), inverse: images })
}

/// λ in simple-root coordinates α₁..α_r ↦ χ with χ_i = λ_i and χ₀ = −Σ δ_i λ_i (δ₀ = 1).
pub fn hstar_to_z0(lambda: &[Rational], delta: &[i64]) -> Result<Vec<Rational>> {
    if delta.len() != lambda.len() + 1 {
        return Err(Error::ShapeMismatch("δ needs one more entry than λ".into()));
    }
    let pair = lambda.iter().zip(&delta[1..]).fold(rzero(), |acc, (l, &d)| acc.plus(&l.times(&int(d))));
    let mut out = vec![pair.negated()];
    out.extend(lambda.iter().cloned());
    Ok(out)
}

/// ε_i-coefficient Σ_{j≤i} r_j x_j for i = 1..n−1.
pub fn a_to_zstar(x: &[Rational], r: &[usize]) -> Result<Vec<Rational>> {
    if x.len() != r.len() {
        return Err(Error::ShapeMismatch("x and r differ in length".into()));
    }
    let mut partial = rzero();
    let mut sums = Vec::new();
    for (xi, &ri) in x.iter().zip(r) {
        partial = partial.plus(&xi.times(&int(ri as i64)));
        sums.push(partial.clone());
    }
    if !partial.is_zero() {
        return Err(Error::NonTraceZero);
    }
    sums.pop();
    Ok(sums)
}

/// A ẑ element (h, χ₀..χ_r) with χ paired against roots in ℤ^{Q₀}.
#[derive(Clone, Debug, PartialEq)]
pub struct ZHatVec {
    pub h: Rational,
    pub chi: Vec<Rational>,
}

impl ZHatVec {
    pub fn pairing(&self, alpha: &[i64]) -> Rational {
        self.chi.iter().zip(alpha).fold(rzero(), |acc, (c, &a)| acc.plus(&c.times(&int(a))))
    }

    pub fn to_json(&self) -> Value {
        json!({"h": crate::scalars::rational_to_string(&self.h), "chi": self.chi.iter().map(crate::scalars::rational_to_string).collect::<Vec<_>>()})
    }
}

/// ρ in ε-coordinates: ρ·α_j = 1 for j ≥ 1 and ρ·δ = 0.
pub fn rho(cartan: &CartanData) -> Result<Vec<Rational>> {
    let delta = cartan.delta().ok_or(Error::IndefiniteType)?;
    let mut out = vec![int(-delta[1..].iter().sum::<i64>() / delta[0])];
    out.extend((1..delta.len()).map(|_| rone()));
    Ok(out)
}

fn reflect_chi(cartan: &CartanData, i: usize, chi: &[Rational]) -> Vec<Rational> {
    chi.iter().enumerate().map(|(j, c)| c.minus(&chi[i].times(&int(cartan.matrix[i][j])))).collect()
}

/// Applies the word right to left; s_i acts by (s_iχ)_j = χ_j − C_{ij}χ_i so that
/// (s_iχ)·α = χ·(s_iα). With `dot` the action is s_i·χ = s_i(χ + ρ) − ρ.
pub fn weyl_act(cartan: &CartanData, word: &[usize], x: &ZHatVec, dot: bool) -> Result<ZHatVec> {
    let n = cartan.rank();
    if x.chi.len() != n {
        return Err(Error::ShapeMismatch(format!("χ needs {n} entries")));
    }
    if let Some(&bad) = word.iter().find(|&&i| i == 0 || i >= n) {
        return Err(Error::IndexOutOfRange(format!("reflection index {bad} outside 1..{}", n - 1)));
    }
    let shift = if dot { Some(rho(cartan)?) } else { None };
    let mut chi = x.chi.clone();
    if let Some(r) = &shift {
        chi = chi.iter().zip(r).map(|(a, b)| a.plus(b)).collect();
    }
    for &i in word.iter().rev() {
        chi = reflect_chi(cartan, i, &chi);
    }
    if let Some(r) = &shift {
        chi = chi.iter().zip(r).map(|(a, b)| a.minus(b)).collect();
    }
    Ok(ZHatVec { h: x.h.clone(), chi })
}

/// χ = χ₀ + t·ε₀ with χ₀·δ = 0 maps to χ₀ − t·ε₀.
pub fn sigma_flip(x: &ZHatVec, delta: &[i64]) -> Result<ZHatVec> {
    if delta.len() != x.chi.len() || delta[0] == 0 {
        return Err(Error::ShapeMismatch("δ must match χ and have δ₀ ≠ 0".into()));
    }
    let t = x.pairing(delta).times(&rat(1, delta[0]));
    let mut chi = x.chi.clone();
    chi[0] = chi[0].minus(&t.times(&int(2)));
    Ok(ZHatVec { h: x.h.clone(), chi })
}

/// Cartan data of the McKay graph of the group.
pub fn mckay_cartan(g: &KleinianGroup) -> Result<CartanData> {
    let (q, _) = mckay_quiver(g)?;
    CartanData::from_quiver(&q)
}

/// (s_i s_j)^{m_ij} = id and s_i² = id on `x` for all finite nodes.
pub fn braid_relations_hold(cartan: &CartanData, x: &ZHatVec, dot: bool) -> Result<bool> {
    let n = cartan.rank();
    for i in 1..n {
        if weyl_act(cartan, &[i, i], x, dot)? != *x {
            return Ok(false);
        }
        for j in i + 1..n {
            let m = match cartan.matrix[i][j] * cartan.matrix[j][i] {
                0 => 2,
                1 => 3,
                2 => 4,
                3 => 6,
                _ => continue,
            };
            let word: Vec<usize> = (0..m).flat_map(|_| [i, j]).collect();
            if weyl_act(cartan, &word, x, dot)? != *x {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mckay::{build_group, Family};
    use proptest::prelude::*;

    fn col(m: &Matrix<CycScalar>, j: usize) -> Vec<Rational> {
        (0..m.rows()).map(|r| m.get(r, j).to_rational().unwrap()).collect()
    }

    fn ccol(m: &Matrix<CycScalar>, j: usize) -> Vec<CycScalar> {
        (0..m.rows()).map(|r| m.get(r, j).clone()).collect()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn cyclic2_values() {
        let g = build_group(Family::Cyclic(2)).unwrap();
        let u = build_upsilon(&g, 2).unwrap();
        // Images: ε₀ ↦ c₁ + 2k, ε₁ ↦ h − c₁.
        assert_eq!(col(&u.inverse, 1), ints(&[0, 1, 2]));
        assert_eq!(col(&u.inverse, 2), ints(&[1, -1, 0]));
        // υ: h ↦ h, c₁ ↦ h − ε₁, k ↦ ½(ε₀ + ε₁ − h).
        assert_eq!(col(&u.matrix, 0), ints(&[1, 0, 0]));
        assert_eq!(col(&u.matrix, 1), ints(&[1, 0, -1]));
        assert_eq!(col(&u.matrix, 2), vec![rat(-1, 2), rat(1, 2), rat(1, 2)]);
        let u0 = build_upsilon0(&g).unwrap();
        assert_eq!(col(&u0.inverse, 1), ints(&[-1, 1]));
        assert_eq!(col(&u0.inverse, 2), ints(&[1, -1]));
        assert_eq!(col(&u0.matrix, 0), ints(&[1, 0, 0]));
        assert_eq!(col(&u0.matrix, 1), vec![rone(), rat(1, 2), rat(-1, 2)]);
    }

    #[test]
    fn maps_invert_and_agree() {
        for fam in [Family::Cyclic(2), Family::Cyclic(3), Family::BinaryDihedral(2), Family::BinaryTetrahedral] {
            let g = build_group(fam).unwrap();
            let u = build_upsilon(&g, 2).unwrap();
            let size = u.matrix.rows();
            assert_eq!(u.inverse.mul(&u.matrix), Matrix::identity(size));
            assert_eq!(u.matrix.mul(&u.inverse), Matrix::identity(size));
            let mut h = vec![CycScalar::zero(); size];
            h[0] = CycScalar::one();
            assert_eq!(u.apply(&h), h);
            let u0 = build_upsilon0(&g).unwrap();
            assert_eq!(u0.inverse.mul(&u0.matrix), Matrix::identity(size - 1));
            assert_eq!(u0.apply(&h[..size - 1]), h);
            // Image of ε₀ differs by |Γ|k + ½|Γ|h.
            let order = cint(g.order() as i64);
            let mut diff = ccol(&u.inverse, 1);
            let mut other = ccol(&u0.inverse, 1);
            other.push(CycScalar::zero());
            for (d, o) in diff.iter_mut().zip(&other) {
                *d = d.minus(o);
            }
            let mut expect = vec![CycScalar::zero(); size];
            expect[0] = order.times(&CycScalar::rational(rat(1, 2)));
            expect[size - 1] = order;
            assert_eq!(diff, expect);
        }
        let g = build_group(Family::Cyclic(2)).unwrap();
        assert!(matches!(build_upsilon(&g, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn small_maps() {
        assert_eq!(hstar_to_z0(&[rone()], &[1, 1]).unwrap(), ints(&[-1, 1]));
        assert_eq!(hstar_to_z0(&[rzero()], &[1, 1]).unwrap(), ints(&[0, 0]));
        assert_eq!(a_to_zstar(&ints(&[1, -1]), &[1, 1]).unwrap(), ints(&[1]));
        assert_eq!(a_to_zstar(&ints(&[1, -1, -1]), &[2, 1, 1]).unwrap(), ints(&[2, 1]));
        assert_eq!(a_to_zstar(&ints(&[1, 1]), &[1, 1]), Err(Error::NonTraceZero));
    }

    #[test]
    fn affine_a1_reflection() {
        let c = mckay_cartan(&build_group(Family::Cyclic(2)).unwrap()).unwrap();
        let x = ZHatVec { h: rone(), chi: ints(&[3, 5]) };
        let y = weyl_act(&c, &[1], &x, false).unwrap();
        assert_eq!(y.pairing(&[0, 1]), x.pairing(&[0, 1]).negated());
        assert_eq!(weyl_act(&c, &[], &x, false).unwrap(), x);
        assert!(matches!(weyl_act(&c, &[0], &x, false), Err(Error::IndexOutOfRange(_))));
        let flipped = sigma_flip(&ZHatVec { h: rzero(), chi: ints(&[1, 0]) }, &[1, 1]).unwrap();
        assert_eq!(flipped.chi, ints(&[-1, 0]));
        let fixed = ZHatVec { h: rzero(), chi: ints(&[-2, 2]) };
        assert_eq!(sigma_flip(&fixed, &[1, 1]).unwrap(), fixed);
    }

    proptest! {
        #[test]
        fn braid_and_flip(vals in proptest::collection::vec(-9i64..9, 5), h in -4i64..4, dot in any::<bool>()) {
            for fam in [Family::Cyclic(3), Family::Cyclic(4), Family::BinaryDihedral(2)] {
                let g = build_group(fam).unwrap();
                let c = mckay_cartan(&g).unwrap();
                let delta = c.delta().unwrap();
                let x = ZHatVec { h: int(h), chi: ints(&vals[..c.rank()]) };
                prop_assert!(braid_relations_hold(&c, &x, dot).unwrap());
                let f = sigma_flip(&x, &delta).unwrap();
                prop_assert_eq!(sigma_flip(&f, &delta).unwrap(), x.clone());
                for i in 1..c.rank() {
                    let a = sigma_flip(&weyl_act(&c, &[i], &x, dot).unwrap(), &delta).unwrap();
                    let b = weyl_act(&c, &[i], &f, dot).unwrap();
                    prop_assert_eq!(a, b);
                    prop_assert_eq!(weyl_act(&c, &[i], &x, dot).unwrap().pairing(&delta), x.pairing(&delta));
                }
            }
        }
    }
}
