//! Finite subgroups of SL₂ as explicit matrix groups, their character
//! tables, McKay quivers, wreath products and symplectic reflections.
//!
//! Irreducible characters are ordered trivial first, then by dimension. The
//! McKay quiver uses the same vertex order, so vertex 0 is the extending vertex.

use std::collections::{HashMap, VecDeque};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quiver::Quiver;
use crate::scalars::{
    columns_to_matrix, cyc_conjugate, int, mat_inverse, mat_kernel, rank, rat, CycScalar, JsonScalar, Matrix,
    Rational, Scalar,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Cyclic(u32),
    BinaryDihedral(u32),
    BinaryTetrahedral,
    BinaryOctahedral,
    BinaryIcosahedral,
}

impl Family {
    pub fn parse(name: &str, m: Option<u32>) -> Result<Self> {
        let need_m = || m.ok_or_else(|| Error::InvalidInput(format!("family {name} needs --m")));
        match name {
            "cyclic" => Ok(Family::Cyclic(need_m()?)),
            "binary-dihedral" | "dihedral" => Ok(Family::BinaryDihedral(need_m()?)),
            "binary-tetrahedral" | "tetrahedral" => Ok(Family::BinaryTetrahedral),
            "binary-octahedral" | "octahedral" => Ok(Family::BinaryOctahedral),
            "binary-icosahedral" | "icosahedral" => Ok(Family::BinaryIcosahedral),
            _ => Err(Error::InvalidInput(format!("unknown family {name:?}"))),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Family::Cyclic(m) => format!("cyclic({m})"),
            Family::BinaryDihedral(m) => format!("binary-dihedral({m})"),
            Family::BinaryTetrahedral => "binary-tetrahedral".into(),
            Family::BinaryOctahedral => "binary-octahedral".into(),
            Family::BinaryIcosahedral => "binary-icosahedral".into(),
        }
    }
}

type Mat2 = Matrix<CycScalar>;

/// Hashable form of a group element at a fixed conductor.
fn element_key(m: &Mat2, conductor: u32) -> Vec<Vec<Rational>> {
    m.data().iter().map(|x| x.lift(conductor).coeffs().to_vec()).collect()
}

fn cyc(r: i64) -> CycScalar {
    CycScalar::rational(int(r))
}

fn zeta(m: u32, k: i64) -> CycScalar {
    CycScalar::zeta(m, k)
}

fn mat2(a: CycScalar, b: CycScalar, c: CycScalar, d: CycScalar) -> Mat2 {
    Matrix::from_vec(2, 2, vec![a, b, c, d])
}

/// x0 + x1·i + x2·j + x3·k as a 2×2 matrix, with i = diag(ζ₄, −ζ₄), j = [[0,1],[−1,0]], k = ij.
fn quaternion(x: [CycScalar; 4]) -> Mat2 {
    let i = zeta(4, 1);
    let [x0, x1, x2, x3] = x;
    mat2(
        x0.plus(&x1.times(&i)),
        x2.plus(&x3.times(&i)),
        x2.negated().plus(&x3.times(&i)),
        x0.minus(&x1.times(&i)),
    )
}

fn half() -> CycScalar {
    CycScalar::rational(rat(1, 2))
}

/// τ = (1 + √5)/2 = 1 + ζ₅ + ζ₅⁴.
pub fn golden() -> CycScalar {
    cyc(1).plus(&zeta(5, 1)).plus(&zeta(5, 4))
}

/// √2 = ζ₈ − ζ₈³.
pub fn sqrt2() -> CycScalar {
    zeta(8, 1).minus(&zeta(8, 3))
}

#[derive(Clone, Debug)]
pub struct KleinianGroup {
    pub family: Family,
    /// Conductor of the matrix entries.
    pub conductor: u32,
    /// Element 0 is the identity.
    pub elements: Vec<Mat2>,
    /// Word in the generators for each element, leftmost factor first.
    pub words: Vec<Vec<usize>>,
    pub generators: Vec<Mat2>,
    pub classes: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    /// Rows are irreducible characters, columns are classes.
    pub char_table: Vec<Vec<CycScalar>>,
    pub dims: Vec<usize>,
    lookup: HashMap<Vec<Vec<Rational>>, usize>,
}

/// Representation given by images of the generators.
struct GeneratorImages(Vec<Mat2>);

impl KleinianGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn index_of(&self, m: &Mat2) -> Option<usize> {
        self.lookup.get(&element_key(m, self.conductor)).copied()
    }

    pub fn multiply(&self, i: usize, j: usize) -> usize {
        self.index_of(&self.elements[i].mul(&self.elements[j])).expect("closed under multiplication")
    }

    pub fn inverse(&self, i: usize) -> usize {
        let m = &self.elements[i];
        let inv = mat2(m.get(1, 1).clone(), m.get(0, 1).negated(), m.get(1, 0).negated(), m.get(0, 0).clone());
        self.index_of(&inv).expect("closed under inverses")
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.classes.iter().map(Vec::len).collect()
    }

    /// Trace of the defining 2-dimensional representation on each class.
    pub fn natural_character(&self) -> Vec<CycScalar> {
        self.classes.iter().map(|c| self.elements[c[0]].trace()).collect()
    }

    /// Character value of irreducible `irrep` at element `g`.
    pub fn character_at(&self, irrep: usize, g: usize) -> &CycScalar {
        &self.char_table[irrep][self.class_of[g]]
    }

    /// (1/|Γ|) Σ_C |C| a(C) conj(b(C)).
    pub fn inner_product(&self, a: &[CycScalar], b: &[CycScalar]) -> CycScalar {
        let mut acc = CycScalar::zero();
        for (k, class) in self.classes.iter().enumerate() {
            acc = acc.plus(&cyc(class.len() as i64).times(&a[k]).times(&cyc_conjugate(&b[k])));
        }
        acc.times(&CycScalar::rational(rat(1, self.order() as i64)))
    }

    pub fn to_json(&self) -> Value {
        let (quiver, delta) = mckay_quiver(self).map(|(q, d)| (Some(q), d)).unwrap_or((None, self.dims.clone()));
        json!({
            "family": self.family.label(),
            "order": self.order(),
            "class_sizes": self.class_sizes(),
            "class_representatives": self.classes.iter().map(|c| self.elements[c[0]].to_json()).collect::<Vec<_>>(),
            "char_table": self.char_table.iter().map(|row| row.iter().map(JsonScalar::to_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "dims": self.dims,
            "vertex_order": "irreducible characters, trivial first, then by dimension; vertex 0 is the extending vertex",
            "mckay": quiver.map(|q| json!({"arrows": q.arrows, "adjacency": mckay_matrix(self).ok()})),
            "delta": delta,
        })
    }
}

fn generators(family: Family) -> Result<(u32, Vec<Mat2>)> {
    Ok(match family {
        Family::Cyclic(m) => {
            if m == 0 {
                return Err(Error::InvalidInput("cyclic order must be positive".into()));
            }
            (m, vec![mat2(zeta(m, 1), cyc(0), cyc(0), zeta(m, -1))])
        }
        Family::BinaryDihedral(m) => {
            if m == 0 {
                return Err(Error::InvalidInput("binary dihedral parameter must be positive".into()));
            }
            let c = num_integer::lcm(2 * m, 4);
            let a = mat2(zeta(2 * m, 1), cyc(0), cyc(0), zeta(2 * m, -1));
            let b = mat2(cyc(0), cyc(1), cyc(-1), cyc(0));
            (c, vec![a, b])
        }
        Family::BinaryTetrahedral => (4, vec![quaternion([cyc(0), cyc(1), cyc(0), cyc(0)]), tetra_a()]),
        Family::BinaryOctahedral => (8, vec![tetra_a(), mat2(zeta(8, 1), cyc(0), cyc(0), zeta(8, -1))]),
        Family::BinaryIcosahedral => (20, vec![tetra_a(), icosa_g()]),
    })
}

/// ½(1 + i + j + k), of order 6.
fn tetra_a() -> Mat2 {
    quaternion([half(), half(), half(), half()])
}

/// ½(τ + τ⁻¹ i + j), of order 10.
fn icosa_g() -> Mat2 {
    let tau = golden();
    let tau_inv = tau.minus(&cyc(1));
    quaternion([tau.times(&half()), tau_inv.times(&half()), half(), cyc(0)])
}

fn close(conductor: u32, gens: &[Mat2]) -> (Vec<Mat2>, Vec<Vec<usize>>, HashMap<Vec<Vec<Rational>>, usize>) {
    let id = Matrix::<CycScalar>::identity(2);
    let mut elements = vec![id.clone()];
    let mut words = vec![vec![]];
    let mut lookup = HashMap::from([(element_key(&id, conductor), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (gi, g) in gens.iter().enumerate() {
            let p = elements[i].mul(g);
            let key = element_key(&p, conductor);
            if !lookup.contains_key(&key) {
                lookup.insert(key, elements.len());
                let mut w = words[i].clone();
                w.push(gi);
                words.push(w);
                elements.push(p);
                queue.push_back(elements.len() - 1);
            }
        }
    }
    (elements, words, lookup)
}

pub fn build_group(family: Family) -> Result<KleinianGroup> {
    build_group_with(family, false)
}

/// With `corrupt` set one character value is altered before validation,
/// which must then fail.
pub fn build_group_with(family: Family, corrupt: bool) -> Result<KleinianGroup> {
    let (conductor, gens) = generators(family)?;
    let (elements, words, lookup) = close(conductor, &gens);
    let mut group = KleinianGroup {
        family,
        conductor,
        elements,
        words,
        generators: gens,
        classes: Vec::new(),
        class_of: Vec::new(),
        char_table: Vec::new(),
        dims: Vec::new(),
        lookup,
    };
    compute_classes(&mut group);
    let mut table = match family {
        Family::Cyclic(m) => (0..m as i64).map(|l| group.character_from(&GeneratorImages(vec![Matrix::from_vec(1, 1, vec![zeta(m, l)])]))).collect(),
        Family::BinaryDihedral(m) => dihedral_table(&group, m),
        Family::BinaryTetrahedral => shipped_table(&group, tetrahedral_data())?,
        Family::BinaryOctahedral => shipped_table(&group, octahedral_data())?,
        Family::BinaryIcosahedral => shipped_table(&group, icosahedral_data())?,
    };
    // Trivial first, then by dimension; the sort is stable.
    table.sort_by_key(|row: &Vec<CycScalar>| {
        let is_trivial = row.iter().all(|x| x.is_one());
        (!is_trivial, row[0].to_rational().map(|r| r.to_integer()).unwrap_or_default())
    });
    if corrupt {
        let last = table.len() - 1;
        let col = table[last].len() - 1;
        table[last][col] = table[last][col].plus(&cyc(1));
    }
    group.dims = table
        .iter()
        .map(|row| row[0].to_rational().filter(|r| r.is_integer() && *r > int(0)).map(|r| usize::try_from(r.to_integer()).unwrap_or(0)).unwrap_or(0))
        .collect();
    group.char_table = table;
    validate_table(&group)?;
    Ok(group)
}

fn compute_classes(group: &mut KleinianGroup) {
    let n = group.order();
    let gens_idx: Vec<usize> = group.generators.iter().map(|g| group.index_of(g).expect("generator present")).collect();
    let mut class_of = vec![usize::MAX; n];
    let mut classes = Vec::new();
    for start in 0..n {
        if class_of[start] != usize::MAX {
            continue;
        }
        let id = classes.len();
        let mut members = vec![start];
        class_of[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens_idx {
                let y = group.multiply(group.multiply(g, x), group.inverse(g));
                if class_of[y] == usize::MAX {
                    class_of[y] = id;
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    group.classes = classes;
    group.class_of = class_of;
}

impl KleinianGroup {
    /// Character of a representation given by generator images, evaluated along words.
    fn character_from(&self, rep: &GeneratorImages) -> Vec<CycScalar> {
        let dim = rep.0[0].rows();
        self.classes
            .iter()
            .map(|c| {
                let w = &self.words[c[0]];
                w.iter().fold(Matrix::<CycScalar>::identity(dim), |acc, &g| acc.mul(&rep.0[g])).trace()
            })
            .collect()
    }
}

fn dihedral_table(group: &KleinianGroup, m: u32) -> Vec<Vec<CycScalar>> {
    let one = |x: CycScalar| Matrix::from_vec(1, 1, vec![x]);
    let mut rows = Vec::new();
    // Linear characters: a ↦ ±1 and b ↦ a square root of χ(a)^m.
    for sa in [1i64, -1] {
        let b_sq_is_one = sa == 1 || m % 2 == 0;
        let roots = if b_sq_is_one { [cyc(1), cyc(-1)] } else { [zeta(4, 1), zeta(4, 3)] };
        for rb in roots {
            rows.push(group.character_from(&GeneratorImages(vec![one(cyc(sa)), one(rb)])));
        }
    }
    for l in 1..m as i64 {
        let a = mat2(zeta(2 * m, l), cyc(0), cyc(0), zeta(2 * m, -l));
        let sign = if l % 2 == 0 { 1 } else { -1 };
        let b = mat2(cyc(0), cyc(sign), cyc(1), cyc(0));
        rows.push(group.character_from(&GeneratorImages(vec![a, b])));
    }
    rows
}

/// Shipped table: representative matrices and one row per irreducible in that column order.
struct ShippedTable {
    representatives: Vec<Mat2>,
    rows: Vec<Vec<CycScalar>>,
}

fn shipped_table(group: &KleinianGroup, data: ShippedTable) -> Result<Vec<Vec<CycScalar>>> {
    let mut column_of_class = vec![usize::MAX; group.classes.len()];
    for (col, rep) in data.representatives.iter().enumerate() {
        let idx = group
            .index_of(rep)
            .ok_or_else(|| Error::TableValidationFailed(format!("representative {col} is not a group element")))?;
        column_of_class[group.class_of[idx]] = col;
    }
    if column_of_class.iter().any(|&c| c == usize::MAX) || data.representatives.len() != group.classes.len() {
        return Err(Error::TableValidationFailed("representatives do not hit every class once".into()));
    }
    Ok(data.rows.iter().map(|row| column_of_class.iter().map(|&c| row[c].clone()).collect()).collect())
}

fn row(xs: &[CycScalar]) -> Vec<CycScalar> {
    xs.to_vec()
}

fn tetrahedral_data() -> ShippedTable {
    let a = tetra_a();
    let i = quaternion([cyc(0), cyc(1), cyc(0), cyc(0)]);
    let id = Matrix::identity(2);
    let representatives = vec![id.clone(), id.neg(), i, a.clone(), a.pow(2), a.pow(4), a.pow(5)];
    let (w, w2) = (zeta(3, 1), zeta(3, 2));
    let c = cyc;
    let rows = vec![
        row(&[c(1), c(1), c(1), c(1), c(1), c(1), c(1)]),
        row(&[c(1), c(1), c(1), w.clone(), w2.clone(), w.clone(), w2.clone()]),
        row(&[c(1), c(1), c(1), w2.clone(), w.clone(), w2.clone(), w.clone()]),
        row(&[c(2), c(-2), c(0), c(1), c(-1), c(-1), c(1)]),
        row(&[c(2), c(-2), c(0), w.clone(), w2.negated(), w.negated(), w2.clone()]),
        row(&[c(2), c(-2), c(0), w2.clone(), w.negated(), w2.negated(), w.clone()]),
        row(&[c(3), c(3), c(-1), c(0), c(0), c(0), c(0)]),
    ];
    ShippedTable { representatives, rows }
}

fn octahedral_data() -> ShippedTable {
    let a = tetra_a();
    let b = mat2(zeta(8, 1), cyc(0), cyc(0), zeta(8, -1));
    let i = quaternion([cyc(0), cyc(1), cyc(0), cyc(0)]);
    let inv_sqrt2 = sqrt2().times(&half());
    let c_el = quaternion([cyc(0), inv_sqrt2.clone(), inv_sqrt2, cyc(0)]);
    let id = Matrix::identity(2);
    let representatives = vec![id.clone(), id.neg(), i, a.clone(), a.pow(2), b.clone(), b.pow(3), c_el];
    let s = sqrt2();
    let c = cyc;
    let rows = vec![
        row(&[c(1), c(1), c(1), c(1), c(1), c(1), c(1), c(1)]),
        row(&[c(1), c(1), c(1), c(1), c(1), c(-1), c(-1), c(-1)]),
        row(&[c(2), c(2), c(2), c(-1), c(-1), c(0), c(0), c(0)]),
        row(&[c(3), c(3), c(-1), c(0), c(0), c(-1), c(-1), c(1)]),
        row(&[c(3), c(3), c(-1), c(0), c(0), c(1), c(1), c(-1)]),
        row(&[c(2), c(-2), c(0), c(1), c(-1), s.clone(), s.negated(), c(0)]),
        row(&[c(2), c(-2), c(0), c(1), c(-1), s.negated(), s.clone(), c(0)]),
        row(&[c(4), c(-4), c(0), c(-1), c(1), c(0), c(0), c(0)]),
    ];
    ShippedTable { representatives, rows }
}

fn icosahedral_data() -> ShippedTable {
    let a = tetra_a();
    let g = icosa_g();
    let i = quaternion([cyc(0), cyc(1), cyc(0), cyc(0)]);
    let id = Matrix::identity(2);
    let representatives = vec![id.clone(), id.neg(), i, a.clone(), a.pow(2), g.clone(), g.pow(2), g.pow(3), g.pow(4)];
    let t = golden();
    let one_minus_t = cyc(1).minus(&t);
    let t_minus_one = t.minus(&cyc(1));
    let c = cyc;
    let rows = vec![
        row(&[c(1), c(1), c(1), c(1), c(1), c(1), c(1), c(1), c(1)]),
        row(&[c(3), c(3), c(-1), c(0), c(0), t.clone(), one_minus_t.clone(), one_minus_t.clone(), t.clone()]),
        row(&[c(3), c(3), c(-1), c(0), c(0), one_minus_t.clone(), t.clone(), t.clone(), one_minus_t.clone()]),
        row(&[c(4), c(4), c(0), c(1), c(1), c(-1), c(-1), c(-1), c(-1)]),
        row(&[c(5), c(5), c(1), c(-1), c(-1), c(0), c(0), c(0), c(0)]),
        row(&[c(2), c(-2), c(0), c(1), c(-1), t.clone(), t_minus_one.clone(), one_minus_t.clone(), t.negated()]),
        row(&[c(2), c(-2), c(0), c(1), c(-1), one_minus_t.clone(), t.negated(), t.clone(), t_minus_one.clone()]),
        row(&[c(4), c(-4), c(0), c(-1), c(1), c(1), c(-1), c(1), c(-1)]),
        row(&[c(6), c(-6), c(0), c(0), c(0), c(-1), c(1), c(-1), c(1)]),
    ];
    ShippedTable { representatives, rows }
}

fn validate_table(group: &KleinianGroup) -> Result<()> {
    let n = group.order() as i64;
    let table = &group.char_table;
    let fail = |msg: String| Err(Error::TableValidationFailed(msg));
    if table.len() != group.classes.len() {
        return fail(format!("{} irreducibles for {} classes", table.len(), group.classes.len()));
    }
    if group.dims.iter().map(|d| d * d).sum::<usize>() != group.order() {
        return fail("sum of squared dimensions differs from the group order".into());
    }
    if group.class_of[0] != 0 || group.classes[0] != vec![0] {
        return fail("identity must form class 0".into());
    }
    if !table[0].iter().all(CycScalar::is_one) {
        return fail("first row must be the trivial character".into());
    }
    for (i, r) in table.iter().enumerate() {
        if r[0] != cyc(group.dims[i] as i64) {
            return fail(format!("row {i} does not start with its dimension"));
        }
        for (j, s) in table.iter().enumerate() {
            let ip = group.inner_product(r, s);
            let expect = if i == j { cyc(1) } else { cyc(0) };
            if ip != expect {
                return fail(format!("rows {i} and {j} are not orthonormal"));
            }
        }
    }
    let sizes = group.class_sizes();
    for a in 0..sizes.len() {
        for b in 0..sizes.len() {
            let s = table.iter().fold(CycScalar::zero(), |acc, r| acc.plus(&r[a].times(&cyc_conjugate(&r[b]))));
            let expect = if a == b { CycScalar::rational(rat(n, sizes[a] as i64)) } else { cyc(0) };
            if s != expect {
                return fail(format!("columns {a} and {b} are not orthogonal"));
            }
        }
    }
    Ok(())
}

/// m_ij = ⟨χ_nat·χ_i, χ_j⟩.
pub fn mckay_matrix(g: &KleinianGroup) -> Result<Vec<Vec<usize>>> {
    let nat = g.natural_character();
    let r = g.char_table.len();
    let mut out = vec![vec![0; r]; r];
    for i in 0..r {
        let prod: Vec<CycScalar> = nat.iter().zip(&g.char_table[i]).map(|(a, b)| a.times(b)).collect();
        for j in 0..r {
            let m = g
                .inner_product(&prod, &g.char_table[j])
                .to_rational()
                .filter(|x| x.is_integer() && *x >= int(0))
                .ok_or(Error::NonIntegralMultiplicity(i, j))?;
            out[i][j] = usize::try_from(m.to_integer()).map_err(|_| Error::NonIntegralMultiplicity(i, j))?;
        }
    }
    Ok(out)
}

/// Undoubled McKay quiver (arrows i → j for i < j, and m_ii/2 loops) with δ = dims.
pub fn mckay_quiver(g: &KleinianGroup) -> Result<(Quiver, Vec<usize>)> {
    let m = mckay_matrix(g)?;
    let mut arrows = Vec::new();
    for i in 0..m.len() {
        if m[i][i] % 2 != 0 {
            return Err(Error::NonIntegralMultiplicity(i, i));
        }
        arrows.extend(std::iter::repeat((i, i)).take(m[i][i] / 2));
        for j in i + 1..m.len() {
            if m[i][j] != m[j][i] {
                return Err(Error::NonIntegralMultiplicity(i, j));
            }
            arrows.extend(std::iter::repeat((i, j)).take(m[i][j]));
        }
    }
    Ok((Quiver::new(m.len(), arrows)?, g.dims.clone()))
}

// ---------------------------------------------------------------------------
// Wreath products

/// (σ, γ) with σ ∈ S_n as images of 0..n and γ ∈ Γⁿ as element indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WreathElement {
    pub perm: Vec<usize>,
    pub gammas: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct WreathGroup {
    pub n: usize,
    pub gamma: KleinianGroup,
}

impl WreathGroup {
    pub fn new(n: usize, gamma: KleinianGroup) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("wreath rank must be positive".into()));
        }
        Ok(WreathGroup { n, gamma })
    }

    pub fn order(&self) -> usize {
        (1..=self.n).product::<usize>() * self.gamma.order().pow(self.n as u32)
    }

    pub fn identity(&self) -> WreathElement {
        WreathElement { perm: (0..self.n).collect(), gammas: vec![0; self.n] }
    }

    /// (σ,γ)(τ,δ) = (στ, ε) with ε_i = γ_{τ(i)} δ_i.
    pub fn multiply(&self, x: &WreathElement, y: &WreathElement) -> WreathElement {
        WreathElement {
            perm: (0..self.n).map(|i| x.perm[y.perm[i]]).collect(),
            gammas: (0..self.n).map(|i| self.gamma.multiply(x.gammas[y.perm[i]], y.gammas[i])).collect(),
        }
    }

    pub fn inverse(&self, x: &WreathElement) -> WreathElement {
        let mut perm = vec![0; self.n];
        for (i, &p) in x.perm.iter().enumerate() {
            perm[p] = i;
        }
        // ε_i = γ_{σ⁻¹(i)}⁻¹ makes (σ,γ)(σ⁻¹,ε) = 1.
        let gammas = (0..self.n).map(|i| self.gamma.inverse(x.gammas[perm[i]])).collect();
        WreathElement { perm, gammas }
    }

    /// Action on V = L^{⊕n} in the Darboux basis x_1..x_n, y_1..y_n: block (σ(i), i) is γ_i.
    pub fn matrix(&self, x: &WreathElement) -> Matrix<CycScalar> {
        let n = self.n;
        let mut m = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            let g = &self.gamma.elements[x.gammas[i]];
            let j = x.perm[i];
            for (r, rr) in [j, n + j].into_iter().enumerate() {
                for (c, cc) in [i, n + i].into_iter().enumerate() {
                    m.set(rr, cc, g.get(r, c).clone());
                }
            }
        }
        m
    }

    /// All elements; only sensible for small groups.
    pub fn elements(&self) -> Vec<WreathElement> {
        let mut perms = vec![vec![]];
        for k in 0..self.n {
            perms = perms
                .into_iter()
                .flat_map(|p: Vec<usize>| (0..=k).map(move |pos| {
                    let mut q = p.clone();
                    q.insert(pos, k);
                    q
                }))
                .collect();
        }
        let mut tuples = vec![vec![]];
        for _ in 0..self.n {
            tuples = tuples
                .into_iter()
                .flat_map(|t: Vec<usize>| (0..self.gamma.order()).map(move |g| {
                    let mut u = t.clone();
                    u.push(g);
                    u
                }))
                .collect();
        }
        let mut out: Vec<WreathElement> = perms
            .iter()
            .flat_map(|p| tuples.iter().map(move |t| WreathElement { perm: p.clone(), gammas: t.clone() }))
            .collect();
        out.sort();
        let id = self.identity();
        let pos = out.iter().position(|e| *e == id).expect("identity present");
        out.swap(0, pos);
        out
    }
}

/// ω(x_i, y_i) = 1 in the Darboux basis.
pub fn symplectic_form(n: usize) -> Matrix<CycScalar> {
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j.set(i, n + i, cyc(1));
        j.set(n + i, i, cyc(-1));
    }
    j
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReflectionClass {
    Sym,
    /// Index of a nontrivial conjugacy class of Γ, counted from 1.
    Gamma(usize),
}

#[derive(Clone, Debug)]
pub struct SymplecticReflection {
    pub element: WreathElement,
    pub class_label: ReflectionClass,
    /// Projector onto im(s − id) along ker(s − id).
    pub projector: Matrix<CycScalar>,
}

fn reflection_projector(s: &Matrix<CycScalar>) -> Result<Matrix<CycScalar>> {
    let dim = s.rows();
    let d = s.sub(&Matrix::identity(dim));
    if rank(&d) != 2 {
        return Err(Error::InvalidInput("element is not a symplectic reflection".into()));
    }
    let image = crate::scalars::column_space(&d);
    let kernel = mat_kernel(&d);
    let mut cols = image.clone();
    cols.extend(kernel);
    let p = columns_to_matrix(dim, &cols);
    let p_inv = mat_inverse(&p).ok_or_else(|| Error::InvalidInput("image and kernel are not complementary".into()))?;
    let mut diag = Matrix::zeros(dim, dim);
    for k in 0..image.len() {
        diag.set(k, k, cyc(1));
    }
    Ok(p.mul(&diag).mul(&p_inv))
}

/// S_sym = {s_ij γ_(i) γ_(j)⁻¹} (for n > 1) followed by S_c = {γ_(j) : γ ∈ class c}
/// for every nontrivial class c of Γ, each element checked to have rank(s − id) = 2.
pub fn symplectic_reflections(w: &WreathGroup) -> Result<Vec<SymplecticReflection>> {
    let n = w.n;
    let g = &w.gamma;
    let mut out = Vec::new();
    let mut push = |element: WreathElement, label: ReflectionClass| -> Result<()> {
        let projector = reflection_projector(&w.matrix(&element))?;
        out.push(SymplecticReflection { element, class_label: label, projector });
        Ok(())
    };
    for i in 0..n {
        for j in i + 1..n {
            for gamma in 0..g.order() {
                let mut e = w.identity();
                e.perm.swap(i, j);
                e.gammas[i] = gamma;
                e.gammas[j] = g.inverse(gamma);
                push(e, ReflectionClass::Sym)?;
            }
        }
    }
    for (c, class) in g.classes.iter().enumerate().skip(1) {
        for &gamma in class {
            for j in 0..n {
                let mut e = w.identity();
                e.gammas[j] = gamma;
                push(e, ReflectionClass::Gamma(c))?;
            }
        }
    }
    Ok(out)
}

/// ω(πx, πy).
pub fn omega_s(s: &SymplecticReflection, x: &[CycScalar], y: &[CycScalar]) -> CycScalar {
    let n = s.projector.rows() / 2;
    let px = s.projector.apply(x);
    let py = s.projector.apply(y);
    let j = symplectic_form(n);
    px.iter().zip(j.apply(&py)).fold(CycScalar::zero(), |acc, (a, b)| acc.plus(&a.times(&b)))
}

/// Sum of a character over the elements of class `c`: |C|·χ(C), required to be rational.
pub fn class_sum(g: &KleinianGroup, irrep: usize, c: usize) -> Result<Rational> {
    cyc(g.classes[c].len() as i64).times(&g.char_table[irrep][c]).to_rational().ok_or(Error::NonRationalTrace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chebyshev(tr: &CycScalar, k: usize) -> CycScalar {
        // Character of Sym^k of the natural representation from its trace.
        let (mut prev, mut cur) = (cyc(1), tr.clone());
        if k == 0 {
            return prev;
        }
        for _ in 1..k {
            let next = tr.times(&cur).minus(&prev);
            prev = cur;
            cur = next;
        }
        cur
    }

    /// ζ ↦ ζ^s on values expressed at conductor m.
    fn galois(x: &CycScalar, m: u32, s: i64) -> CycScalar {
        let y = x.lift(m);
        y.coeffs().iter().enumerate().fold(CycScalar::zero(), |acc, (k, c)| acc.plus(&CycScalar::zeta(m, s * k as i64).times(&CycScalar::rational(c.clone()))))
    }

    fn same_rows(a: &[Vec<CycScalar>], b: &[Vec<CycScalar>]) -> bool {
        a.len() == b.len() && a.iter().all(|r| b.contains(r)) && b.iter().all(|r| a.contains(r))
    }

    #[test]
    fn cyclic_two() {
        let g = build_group(Family::Cyclic(2)).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.char_table, vec![vec![cyc(1), cyc(1)], vec![cyc(1), cyc(-1)]]);
        assert_eq!(g.dims, vec![1, 1]);
        let (q, delta) = mckay_quiver(&g).unwrap();
        assert_eq!(q.arrows, vec![(0, 1), (0, 1)]);
        assert_eq!(delta, vec![1, 1]);
    }

    #[test]
    fn group_orders_and_dimensions() {
        let cases = [
            (Family::Cyclic(1), 1, vec![1]),
            (Family::Cyclic(5), 5, vec![1; 5]),
            (Family::BinaryDihedral(2), 8, vec![1, 1, 1, 1, 2]),
            (Family::BinaryDihedral(3), 12, vec![1, 1, 1, 1, 2, 2]),
            (Family::BinaryTetrahedral, 24, vec![1, 1, 1, 2, 2, 2, 3]),
            (Family::BinaryOctahedral, 48, vec![1, 1, 2, 2, 2, 3, 3, 4]),
            (Family::BinaryIcosahedral, 120, vec![1, 2, 2, 3, 3, 4, 4, 5, 6]),
        ];
        for (family, order, dims) in cases {
            let g = build_group(family).unwrap();
            assert_eq!(g.order(), order, "{family:?}");
            assert_eq!(g.dims, dims, "{family:?}");
            for e in &g.elements {
                assert!(crate::scalars::determinant(e).is_one());
            }
        }
    }

    #[test]
    fn shipped_tables_match_symmetric_power_construction() {
        // 2T: Sym^0..2 of the natural representation twisted by the linear characters.
        let g = build_group(Family::BinaryTetrahedral).unwrap();
        let nat = g.natural_character();
        let linear: Vec<Vec<CycScalar>> = g.char_table.iter().filter(|r| r[0].is_one()).cloned().collect();
        let mut built = linear.clone();
        for l in &linear {
            built.push(nat.iter().zip(l).map(|(a, b)| a.times(b)).collect());
        }
        built.push(nat.iter().map(|t| chebyshev(t, 2)).collect());
        assert!(same_rows(&built, &g.char_table));

        // 2I: Sym^0..5 plus Galois twists of the natural and adjoint representations.
        let g = build_group(Family::BinaryIcosahedral).unwrap();
        let nat = g.natural_character();
        let mut built: Vec<Vec<CycScalar>> = (0..6).map(|k| nat.iter().map(|t| chebyshev(t, k)).collect()).collect();
        let nat2: Vec<CycScalar> = nat.iter().map(|t| galois(t, 20, 3)).collect();
        built.push(nat2.clone());
        built.push(built[2].iter().map(|t| galois(t, 20, 3)).collect());
        built.push(nat.iter().zip(&nat2).map(|(a, b)| a.times(b)).collect());
        assert!(same_rows(&built, &g.char_table));

        // 2O: Sym^k for k ≤ 3, the sign character and its products.
        let g = build_group(Family::BinaryOctahedral).unwrap();
        let nat = g.natural_character();
        let sign = g.char_table[1].clone();
        let sym: Vec<Vec<CycScalar>> = (0..4).map(|k| nat.iter().map(|t| chebyshev(t, k)).collect()).collect();
        let twist = |r: &Vec<CycScalar>| r.iter().zip(&sign).map(|(a, b)| a.times(b)).collect::<Vec<_>>();
        let mut built = vec![sym[0].clone(), sign.clone(), sym[1].clone(), twist(&sym[1]), sym[2].clone(), twist(&sym[2]), sym[3].clone()];
        // The remaining 2-dim character is Sym²⊗Sym² minus the rest; take it from orthogonality instead.
        let two: Vec<CycScalar> = sym[2].iter().zip(&sym[2]).map(|(a, b)| a.times(b)).collect();
        let mut rest = two.clone();
        for r in [&sym[0], &sym[2], &twist(&sym[2])] {
            let m = g.inner_product(&two, r);
            rest = rest.iter().zip(r.iter()).map(|(x, y)| x.minus(&m.times(y))).collect();
        }
        built.push(rest);
        assert!(same_rows(&built, &g.char_table));
    }

    #[test]
    fn corrupted_table_is_rejected() {
        assert!(matches!(build_group_with(Family::BinaryTetrahedral, true), Err(Error::TableValidationFailed(_))));
        assert!(matches!(build_group_with(Family::Cyclic(3), true), Err(Error::TableValidationFailed(_))));
    }

    #[test]
    fn mckay_quivers_are_affine_with_delta_in_kernel() {
        for family in [
            Family::Cyclic(2),
            Family::Cyclic(4),
            Family::BinaryDihedral(2),
            Family::BinaryDihedral(3),
            Family::BinaryTetrahedral,
            Family::BinaryOctahedral,
            Family::BinaryIcosahedral,
        ] {
            let g = build_group(family).unwrap();
            let m = mckay_matrix(&g).unwrap();
            for i in 0..m.len() {
                for j in 0..m.len() {
                    assert_eq!(m[i][j], m[j][i]);
                }
            }
            let (q, delta) = mckay_quiver(&g).unwrap();
            let c = crate::roots::CartanData::from_quiver(&q).unwrap();
            assert_eq!(c.kind, crate::roots::CartanType::Affine, "{family:?}");
            let d: Vec<i64> = delta.iter().map(|&x| x as i64).collect();
            assert!(c.apply(&d).iter().all(|&x| x == 0));
            assert_eq!(c.delta(), Some(d));
        }
        let (q, delta) = mckay_quiver(&build_group(Family::BinaryDihedral(2)).unwrap()).unwrap();
        assert_eq!(q.arrows, vec![(0, 4), (1, 4), (2, 4), (3, 4)]);
        assert_eq!(delta, vec![1, 1, 1, 1, 2]);
    }

    #[test]
    fn wreath_group_laws() {
        let w = WreathGroup::new(2, build_group(Family::Cyclic(3)).unwrap()).unwrap();
        let els = w.elements();
        assert_eq!(els.len(), w.order());
        assert_eq!(els.len(), 18);
        for x in &els {
            assert_eq!(w.multiply(x, &w.inverse(x)), w.identity());
            for y in els.iter().take(6) {
                assert_eq!(w.matrix(&w.multiply(x, y)), w.matrix(x).mul(&w.matrix(y)));
            }
        }
    }

    #[test]
    fn reflection_counts() {
        let c2 = build_group(Family::Cyclic(2)).unwrap();
        let w = WreathGroup::new(1, c2.clone()).unwrap();
        let s = symplectic_reflections(&w).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].class_label, ReflectionClass::Gamma(1));
        assert_eq!(s[0].projector, Matrix::identity(2));
        let w = WreathGroup::new(2, build_group(Family::Cyclic(1)).unwrap()).unwrap();
        assert_eq!(symplectic_reflections(&w).unwrap().len(), 1);
        let w = WreathGroup::new(2, c2).unwrap();
        let s = symplectic_reflections(&w).unwrap();
        assert_eq!(s.iter().filter(|r| r.class_label == ReflectionClass::Sym).count(), 2);
        assert_eq!(s.iter().filter(|r| r.class_label == ReflectionClass::Gamma(1)).count(), 2);
        // Exhaustive scan: exactly these elements have rank(g − id) = 2.
        let scan: Vec<WreathElement> =
            w.elements().into_iter().filter(|e| rank(&w.matrix(e).sub(&Matrix::identity(4))) == 2).collect();
        assert_eq!(scan.len(), s.len());
        assert!(s.iter().all(|r| scan.contains(&r.element)));
    }

    #[test]
    fn omega_s_properties() {
        let w = WreathGroup::new(2, build_group(Family::Cyclic(3)).unwrap()).unwrap();
        let om = symplectic_form(2);
        let basis: Vec<Vec<CycScalar>> = (0..4).map(|k| (0..4).map(|i| cyc((i == k) as i64)).collect()).collect();
        for s in symplectic_reflections(&w).unwrap() {
            let p = &s.projector;
            assert_eq!(p.mul(p), *p);
            let m = w.matrix(&s.element);
            assert_eq!(m.transpose().mul(&om).mul(&m), om);
            for x in &basis {
                for y in &basis {
                    assert_eq!(omega_s(&s, x, y), omega_s(&s, y, x).negated());
                }
                if m.apply(x) == *x {
                    assert!(basis.iter().all(|y| omega_s(&s, x, y).is_zero()));
                }
            }
        }
    }

    #[test]
    fn class_sums_are_rational() {
        for family in [Family::Cyclic(3), Family::BinaryDihedral(3), Family::BinaryIcosahedral] {
            let g = build_group(family).unwrap();
            for i in 0..g.char_table.len() {
                for c in 0..g.classes.len() {
                    if g.char_table[i][c].to_rational().is_none() {
                        // Galois-conjugate classes are separate; class sums need not be rational one class at a time.
                        continue;
                    }
                    assert!(class_sum(&g, i, c).is_ok());
                }
            }
        }
    }
}
