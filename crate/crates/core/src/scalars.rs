//! Exact scalars and dense linear algebra.
//!
//! Three scalar kinds are provided: big rationals, elements of cyclotomic
//! fields stored as coefficient vectors modulo the cyclotomic polynomial, and
//! first-order jets over any scalar. Elimination pivots on the first nonzero
//! entry of a column; there is no tolerance anywhere.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rzero() -> Rational {
    <Rational as Zero>::zero()
}

pub fn rone() -> Rational {
    <Rational as One>::one()
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// Renders as `p/q` with `q > 0`, also for integers.
pub fn rational_to_string(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `p/q` or a bare integer `p`.
pub fn rational_from_str(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Commutative ring operations shared by every scalar kind.
pub trait Scalar: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn from_rational(r: &Rational) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(&int(n))
    }
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// Scalars where every nonzero element is invertible.
pub trait Field: Scalar {
    fn inv(&self) -> Option<Self>;

    fn divide(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.times(&i))
    }
}

/// JSON round trip for scalars.
pub trait JsonScalar: Sized {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl Scalar for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
}

impl Field for Rational {
    fn inv(&self) -> Option<Self> {
        if Zero::is_zero(self) {
            None
        } else {
            Some(self.recip())
        }
    }
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        Value::String(rational_to_string(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => rational_from_str(s),
            Value::Number(n) if n.is_i64() => Ok(int(n.as_i64().unwrap_or(0))),
            _ => Err(Error::InvalidInput(format!("expected rational string, got {v}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic numbers

pub fn euler_phi(m: u32) -> usize {
    let mut n = m;
    let mut result = m;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result as usize
}

fn cyclotomic_cache() -> &'static Mutex<HashMap<u32, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of the m-th cyclotomic polynomial, constant term first.
pub fn cyclotomic_poly(m: u32) -> Arc<Vec<i64>> {
    assert!(m >= 1, "conductor must be positive");
    if let Some(p) = cyclotomic_cache().lock().unwrap().get(&m) {
        return p.clone();
    }
    let mut num = vec![0i64; m as usize + 1];
    num[0] = -1;
    num[m as usize] = 1;
    for d in 1..m {
        if m % d == 0 {
            let div = cyclotomic_poly(d);
            num = poly_div_exact(&num, &div);
        }
    }
    let p = Arc::new(num);
    cyclotomic_cache().lock().unwrap().insert(m, p.clone());
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dn = den.len() - 1;
    let qn = rem.len() - 1 - dn;
    let mut q = vec![0i64; qn + 1];
    for k in (0..=qn).rev() {
        let c = rem[k + dn];
        q[k] = c;
        for (t, &dc) in den.iter().enumerate() {
            rem[k + t] -= c * dc;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

/// Element of Q(ζ_m) in the power basis 1, ζ, …, ζ^{φ(m)−1}.
#[derive(Clone, Debug)]
pub struct CycScalar {
    conductor: u32,
    coeffs: Vec<Rational>,
}

impl CycScalar {
    pub fn rational(r: Rational) -> Self {
        CycScalar { conductor: 1, coeffs: vec![r] }
    }

    /// ζ_m^k.
    pub fn zeta(m: u32, k: i64) -> Self {
        let e = k.rem_euclid(m as i64) as usize;
        let mut poly = vec![rzero(); e + 1];
        poly[e] = rone();
        CycScalar { conductor: m, coeffs: reduce_poly(m, poly) }
    }

    /// Builds from a coefficient list of powers of ζ_m of any length.
    pub fn from_powers(m: u32, poly: Vec<Rational>) -> Self {
        CycScalar { conductor: m, coeffs: reduce_poly(m, poly) }
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn to_rational(&self) -> Option<Rational> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Some(self.coeffs[0].clone())
        } else {
            None
        }
    }

    /// Re-expresses the element at conductor `m`, which must be a multiple.
    pub fn lift(&self, m: u32) -> Self {
        if m == self.conductor {
            return self.clone();
        }
        assert!(m % self.conductor == 0, "conductor {m} is not a multiple of {}", self.conductor);
        let step = (m / self.conductor) as usize;
        let mut poly = vec![rzero(); (self.coeffs.len() - 1) * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            poly[k * step] = c.clone();
        }
        CycScalar { conductor: m, coeffs: reduce_poly(m, poly) }
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        if self.conductor == o.conductor {
            return (self.clone(), o.clone());
        }
        let l = self.conductor.lcm(&o.conductor);
        (self.lift(l), o.lift(l))
    }

    /// Reduces to the smallest conductor dividing the current one that still holds the value.
    pub fn simplify(&self) -> Self {
        let m = self.conductor;
        for d in 1..m {
            if m % d != 0 {
                continue;
            }
            let step = (m / d) as usize;
            // ζ_d = ζ_m^step; try to express self in powers of ζ_d.
            let phi_d = euler_phi(d);
            let mut mat = Matrix::<Rational>::zeros(self.coeffs.len(), phi_d);
            for j in 0..phi_d {
                let b = CycScalar::zeta(m, (j * step) as i64);
                for (r, c) in b.coeffs.iter().enumerate() {
                    mat.set(r, j, c.clone());
                }
            }
            let rhs = Matrix::from_vec(self.coeffs.len(), 1, self.coeffs.clone());
            if let Ok(sol) = mat_solve(&mat, &rhs) {
                return CycScalar { conductor: d, coeffs: sol.data };
            }
        }
        self.clone()
    }
}

fn reduce_poly(m: u32, poly: Vec<Rational>) -> Vec<Rational> {
    let mu = m as usize;
    let mut acc = vec![rzero(); mu];
    for (k, c) in poly.into_iter().enumerate() {
        if !Zero::is_zero(&c) {
            acc[k % mu] += c;
        }
    }
    let phi = cyclotomic_poly(m);
    let deg = phi.len() - 1;
    for top in (deg..mu).rev() {
        if Zero::is_zero(&acc[top]) {
            continue;
        }
        let c = std::mem::replace(&mut acc[top], rzero());
        for t in 0..deg {
            if phi[t] != 0 {
                acc[top - deg + t] -= &c * int(phi[t]);
            }
        }
    }
    acc.truncate(deg);
    acc
}

/// Complex conjugation ζ ↦ ζ^{-1}.
pub fn cyc_conjugate(z: &CycScalar) -> CycScalar {
    let m = z.conductor as usize;
    let mut poly = vec![rzero(); m];
    for (k, c) in z.coeffs.iter().enumerate() {
        poly[(m - k) % m] += c;
    }
    CycScalar { conductor: z.conductor, coeffs: reduce_poly(z.conductor, poly) }
}

impl PartialEq for CycScalar {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.common(o);
        a.coeffs == b.coeffs
    }
}

impl Scalar for CycScalar {
    fn zero() -> Self {
        CycScalar::rational(rzero())
    }
    fn one() -> Self {
        CycScalar::rational(rone())
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
    fn plus(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        CycScalar { conductor: a.conductor, coeffs }
    }
    fn minus(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect();
        CycScalar { conductor: a.conductor, coeffs }
    }
    fn times(&self, o: &Self) -> Self {
        if let Some(r) = o.to_rational() {
            let coeffs = self.coeffs.iter().map(|x| x * &r).collect();
            return CycScalar { conductor: self.conductor, coeffs };
        }
        if let Some(r) = self.to_rational() {
            let coeffs = o.coeffs.iter().map(|x| x * &r).collect();
            return CycScalar { conductor: o.conductor, coeffs };
        }
        let (a, b) = self.common(o);
        let mut poly = vec![rzero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, x) in a.coeffs.iter().enumerate() {
            if Zero::is_zero(x) {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !Zero::is_zero(y) {
                    poly[i + j] += x * y;
                }
            }
        }
        CycScalar { conductor: a.conductor, coeffs: reduce_poly(a.conductor, poly) }
    }
    fn negated(&self) -> Self {
        CycScalar { conductor: self.conductor, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }
    fn from_rational(r: &Rational) -> Self {
        CycScalar::rational(r.clone())
    }
}

impl Field for CycScalar {
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.to_rational() {
            return Some(CycScalar::rational(r.recip()));
        }
        let n = self.coeffs.len();
        let mut mat = Matrix::<Rational>::zeros(n, n);
        for j in 0..n {
            let col = self.times(&CycScalar::zeta(self.conductor, j as i64));
            for (r, c) in col.coeffs.iter().enumerate() {
                mat.set(r, j, c.clone());
            }
        }
        let mut rhs = Matrix::<Rational>::zeros(n, 1);
        rhs.set(0, 0, rone());
        let sol = mat_solve(&mat, &rhs).ok()?;
        Some(CycScalar { conductor: self.conductor, coeffs: sol.data })
    }
}

impl fmt::Display for CycScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if Zero::is_zero(c) {
                continue;
            }
            if k == 0 {
                parts.push(format!("{c}"));
            } else {
                parts.push(format!("{c}*z{}^{k}", self.conductor));
            }
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl JsonScalar for CycScalar {
    fn to_json(&self) -> Value {
        json!({
            "conductor": self.conductor,
            "coeffs": self.coeffs.iter().map(rational_to_string).collect::<Vec<_>>(),
        })
    }
    fn from_json(v: &Value) -> Result<Self> {
        if v.is_string() {
            return Ok(CycScalar::rational(Rational::from_json(v)?));
        }
        let m = v
            .get("conductor")
            .and_then(Value::as_u64)
            .filter(|&m| m >= 1)
            .ok_or_else(|| Error::InvalidInput("cyclotomic needs a positive conductor".into()))?
            as u32;
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidInput("cyclotomic needs coeffs".into()))?
            .iter()
            .map(Rational::from_json)
            .collect::<Result<Vec<_>>>()?;
        if coeffs.len() != euler_phi(m) {
            return Err(Error::InvalidInput(format!("conductor {m} needs {} coefficients", euler_phi(m))));
        }
        Ok(CycScalar { conductor: m, coeffs })
    }
}

// ---------------------------------------------------------------------------
// Jets

/// value + ε·derivative with ε² = 0.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<S> {
    pub value: S,
    pub derivative: S,
}

impl<S: Scalar> Jet<S> {
    pub fn new(value: S, derivative: S) -> Self {
        Jet { value, derivative }
    }
    pub fn constant(value: S) -> Self {
        Jet { value, derivative: S::zero() }
    }
}

impl<S: Field> Jet<S> {
    pub fn inv(&self) -> Option<Self> {
        let vi = self.value.inv()?;
        let d = self.derivative.times(&vi).times(&vi).negated();
        Some(Jet { value: vi, derivative: d })
    }
}

impl<S: Scalar> Scalar for Jet<S> {
    fn zero() -> Self {
        Jet::constant(S::zero())
    }
    fn one() -> Self {
        Jet::constant(S::one())
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.derivative.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        Jet { value: self.value.plus(&o.value), derivative: self.derivative.plus(&o.derivative) }
    }
    fn minus(&self, o: &Self) -> Self {
        Jet { value: self.value.minus(&o.value), derivative: self.derivative.minus(&o.derivative) }
    }
    fn times(&self, o: &Self) -> Self {
        Jet {
            value: self.value.times(&o.value),
            derivative: self.value.times(&o.derivative).plus(&self.derivative.times(&o.value)),
        }
    }
    fn negated(&self) -> Self {
        Jet { value: self.value.negated(), derivative: self.derivative.negated() }
    }
    fn from_rational(r: &Rational) -> Self {
        Jet::constant(S::from_rational(r))
    }
}

impl<S: JsonScalar> JsonScalar for Jet<S> {
    fn to_json(&self) -> Value {
        json!({"value": self.value.to_json(), "derivative": self.derivative.to_json()})
    }
    fn from_json(v: &Value) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::InvalidInput(format!("jet needs {k}")));
        Ok(Jet { value: S::from_json(get("value")?)?, derivative: S::from_json(get("derivative")?)? })
    }
}

// ---------------------------------------------------------------------------
// Matrices

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn scalar(n: usize, c: &S) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = c.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn column(v: &[S]) -> Self {
        Matrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
    pub fn data(&self) -> &[S] {
        &self.data
    }
    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> Vec<S> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn col(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix product shape {:?} x {:?}", self.shape(), o.shape());
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let idx = i * o.cols + j;
                        out.data[idx] = out.data[idx].plus(&a.times(b));
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape(), "matrix sum shape");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.plus(b)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.shape(), o.shape(), "matrix difference shape");
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&o.data).map(|(a, b)| a.minus(b)).collect() }
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|a| a.times(c))
    }

    pub fn neg(&self) -> Self {
        self.map(Scalar::negated)
    }

    pub fn trace(&self) -> S {
        assert_eq!(self.rows, self.cols, "trace of non-square matrix");
        (0..self.rows).fold(S::zero(), |acc, i| acc.plus(self.get(i, i)))
    }

    pub fn apply(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows)
            .map(|r| (0..self.cols).fold(S::zero(), |acc, c| acc.plus(&self.get(r, c).times(&v[c]))))
            .collect()
    }

    /// Sub-block starting at (r0, c0).
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |r, c| self.get(r0 + r, c0 + c).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for r in 0..b.rows {
            for c in 0..b.cols {
                self.set(r0 + r, c0 + c, b.get(r, c).clone());
            }
        }
    }

    pub fn hstack(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows, "hstack rows");
        Matrix::from_fn(self.rows, self.cols + o.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                o.get(r, c - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.cols, "vstack cols");
        let mut data = self.data.clone();
        data.extend(o.data.iter().cloned());
        Matrix { rows: self.rows + o.rows, cols: self.cols, data }
    }

    /// Commutator a·b − b·a.
    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }
}

impl<S: Scalar + JsonScalar> Matrix<S> {
    pub fn to_json(&self) -> Value {
        Value::Array((0..self.rows).map(|r| Value::Array(self.row(r).iter().map(JsonScalar::to_json).collect())).collect())
    }

    /// Parses a list of rows; `rows`/`cols` resolve the shape of empty matrices.
    pub fn from_json(v: &Value, rows: usize, cols: usize) -> Result<Self> {
        let arr = v.as_array().ok_or_else(|| Error::InvalidInput("matrix must be a list of rows".into()))?;
        if arr.len() != rows {
            return Err(Error::ShapeMismatch(format!("expected {rows} rows, found {}", arr.len())));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for row in arr {
            let row = row.as_array().ok_or_else(|| Error::InvalidInput("matrix row must be a list".into()))?;
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!("expected {cols} columns, found {}", row.len())));
            }
            for x in row {
                data.push(S::from_json(x)?);
            }
        }
        Ok(Matrix { rows, cols, data })
    }
}

impl<S: Scalar> Matrix<Jet<S>> {
    pub fn values(&self) -> Matrix<S> {
        self.map(|j| j.value.clone())
    }
    pub fn derivatives(&self) -> Matrix<S> {
        self.map(|j| j.derivative.clone())
    }
    pub fn from_parts(value: &Matrix<S>, derivative: &Matrix<S>) -> Self {
        assert_eq!(value.shape(), derivative.shape(), "jet parts shape");
        Matrix::from_fn(value.rows, value.cols, |r, c| Jet::new(value.get(r, c).clone(), derivative.get(r, c).clone()))
    }
}

/// Reduced row echelon form and pivot columns.
pub fn rref<S: Field>(m: &Matrix<S>) -> (Matrix<S>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row == a.rows {
            break;
        }
        let Some(p) = (row..a.rows).find(|&r| !a.get(r, col).is_zero()) else {
            continue;
        };
        if p != row {
            for c in 0..a.cols {
                a.data.swap(p * a.cols + c, row * a.cols + c);
            }
        }
        let inv = a.get(row, col).inv().expect("nonzero pivot in a field");
        for c in col..a.cols {
            let v = a.get(row, c).times(&inv);
            a.set(row, c, v);
        }
        for r in 0..a.rows {
            if r == row || a.get(r, col).is_zero() {
                continue;
            }
            let f = a.get(r, col).clone();
            for c in col..a.cols {
                let v = a.get(r, c).minus(&f.times(a.get(row, c)));
                a.set(r, c, v);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

pub fn rank<S: Field>(m: &Matrix<S>) -> usize {
    rref(m).1.len()
}

/// Basis of the right null space, one vector per free column.
pub fn mat_kernel<S: Field>(m: &Matrix<S>) -> Vec<Vec<S>> {
    let (r, pivots) = rref(m);
    let mut is_pivot = vec![None; m.cols];
    for (i, &p) in pivots.iter().enumerate() {
        is_pivot[p] = Some(i);
    }
    let mut basis = Vec::new();
    for free in 0..m.cols {
        if is_pivot[free].is_some() {
            continue;
        }
        let mut v = vec![S::zero(); m.cols];
        v[free] = S::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = r.get(i, free).negated();
        }
        basis.push(v);
    }
    basis
}

/// Some x with a·x = b; free variables are set to zero.
pub fn mat_solve<S: Field>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    if a.rows != b.rows {
        return Err(Error::ShapeMismatch(format!("solve: {} rows vs {} rows", a.rows, b.rows)));
    }
    let aug = a.hstack(b);
    let (r, pivots) = rref(&aug);
    if pivots.iter().any(|&p| p >= a.cols) {
        return Err(Error::NoSolution);
    }
    let mut x = Matrix::zeros(a.cols, b.cols);
    for (i, &p) in pivots.iter().enumerate() {
        for j in 0..b.cols {
            x.set(p, j, r.get(i, a.cols + j).clone());
        }
    }
    Ok(x)
}

pub fn mat_inverse<S: Field>(a: &Matrix<S>) -> Option<Matrix<S>> {
    if a.rows != a.cols {
        return None;
    }
    let x = mat_solve(a, &Matrix::identity(a.rows)).ok()?;
    if a.mul(&x) == Matrix::identity(a.rows) {
        Some(x)
    } else {
        None
    }
}

/// Determinant by elimination.
pub fn determinant<S: Field>(a: &Matrix<S>) -> S {
    assert_eq!(a.rows, a.cols, "determinant of non-square matrix");
    let mut m = a.clone();
    let n = m.rows;
    let mut det = S::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m.get(r, col).is_zero()) else {
            return S::zero();
        };
        if p != col {
            for c in 0..n {
                m.data.swap(p * n + c, col * n + c);
            }
            det = det.negated();
        }
        let piv = m.get(col, col).clone();
        det = det.times(&piv);
        let inv = piv.inv().expect("nonzero pivot");
        for r in col + 1..n {
            if m.get(r, col).is_zero() {
                continue;
            }
            let f = m.get(r, col).times(&inv);
            for c in col..n {
                let v = m.get(r, c).minus(&f.times(m.get(col, c)));
                m.set(r, c, v);
            }
        }
    }
    det
}

/// Basis of the column space, taken from the pivot columns.
pub fn column_space<S: Field>(m: &Matrix<S>) -> Vec<Vec<S>> {
    rref(m).1.into_iter().map(|c| m.col(c)).collect()
}

/// Matrix whose columns are the given vectors; `n` fixes the row count when empty.
pub fn columns_to_matrix<S: Scalar>(n: usize, cols: &[Vec<S>]) -> Matrix<S> {
    Matrix::from_fn(n, cols.len(), |r, c| cols[c][r].clone())
}

/// Intersection of two subspaces of S^n given by spanning columns.
pub fn subspace_intersection<S: Field>(n: usize, u: &[Vec<S>], w: &[Vec<S>]) -> Vec<Vec<S>> {
    if u.is_empty() || w.is_empty() {
        return Vec::new();
    }
    let mu = columns_to_matrix(n, u);
    let mw = columns_to_matrix(n, w);
    let joint = mu.hstack(&mw.neg());
    let ker = mat_kernel(&joint);
    let vecs: Vec<Vec<S>> = ker.iter().map(|k| mu.apply(&k[..u.len()])).collect();
    column_space(&columns_to_matrix(n, &vecs))
}

/// Preimage under `f` of the span of `w` (a subspace of the source).
pub fn preimage<S: Field>(f: &Matrix<S>, w: &[Vec<S>]) -> Vec<Vec<S>> {
    let mw = columns_to_matrix(f.rows, w);
    let joint = f.hstack(&mw.neg());
    let ker = mat_kernel(&joint);
    let vecs: Vec<Vec<S>> = ker.iter().map(|k| k[..f.cols].to_vec()).collect();
    column_space(&columns_to_matrix(f.cols, &vecs))
}

pub fn rational_is_integer(r: &Rational) -> bool {
    r.is_integer()
}

pub fn rational_abs(r: &Rational) -> Rational {
    r.abs()
}
