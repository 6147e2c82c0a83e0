//! Exact rational linear algebra.
//!
//! Everything in this module works over arbitrary-precision rationals, so
//! the certificates it produces (invariant forms, ranks, signatures) carry no
//! rounding error. Matrices here are tiny (7×7 generators, systems with at
//! most a few hundred rows), so coefficient growth during elimination is not
//! a concern.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Arbitrary-precision rational, always stored in lowest terms.
pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRows { row: usize, expected: usize, found: usize },
    #[error("no generators supplied")]
    NoGenerators,
}

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Dense matrix of exact rationals, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn diagonal(diag: &[Rational]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        let n_rows = rows.len();
        let mut entries = Vec::with_capacity(n_rows * cols);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(LinalgError::RaggedRows {
                    row: r,
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Ok(Self {
            rows: n_rows,
            cols,
            entries,
        })
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self, LinalgError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|x| x * s).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && *self == self.transpose()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().all(|x| x.is_integer())
    }

    /// Integer entries, if every entry is integral and fits in an `i64`.
    pub fn to_integers(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|x| if x.is_integer() { x.to_integer().to_i64() } else { None })
                    .collect()
            })
            .collect()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self[(i, j)].to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = Rational::zero();
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if !a.is_zero() {
                    acc += a * &rhs[(k, j)];
                }
            }
            acc
        }))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity(self.rows);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Determinant by Gaussian elimination over the rationals.
    pub fn determinant(&self) -> Result<Rational, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Rational::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !a[(r, k)].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != k {
                a.swap_rows(p, k);
                det = -det;
            }
            let pivot = a[(k, k)].clone();
            det *= &pivot;
            for r in k + 1..n {
                if a[(r, k)].is_zero() {
                    continue;
                }
                let f = &a[(r, k)] / &pivot;
                for c in k..n {
                    let delta = &f * &a[(k, c)];
                    a[(r, c)] -= delta;
                }
            }
        }
        Ok(det)
    }

    /// Exact inverse by Gauss–Jordan elimination.
    pub fn inverse(&self) -> Result<Self, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for k in 0..n {
            let p = (k..n)
                .find(|&r| !a[(r, k)].is_zero())
                .ok_or(LinalgError::Singular)?;
            a.swap_rows(p, k);
            inv.swap_rows(p, k);
            let pivot_inv = a[(k, k)].recip();
            a.scale_row(k, &pivot_inv);
            inv.scale_row(k, &pivot_inv);
            for r in 0..n {
                if r == k || a[(r, k)].is_zero() {
                    continue;
                }
                let f = a[(r, k)].clone();
                a.sub_row_multiple(r, k, &f);
                inv.sub_row_multiple(r, k, &f);
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: &Rational) {
        for c in 0..self.cols {
            self[(r, c)] *= s;
        }
    }

    /// row[target] -= f * row[source]
    fn sub_row_multiple(&mut self, target: usize, source: usize, f: &Rational) {
        for c in 0..self.cols {
            if self[(source, c)].is_zero() {
                continue;
            }
            let delta = f * &self[(source, c)];
            self[(target, c)] -= delta;
        }
    }
}

impl Index<(usize, usize)> for ExactMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ExactMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.entries[i * self.cols + j]
    }
}

impl Mul for &ExactMatrix {
    type Output = ExactMatrix;
    fn mul(self, rhs: &ExactMatrix) -> ExactMatrix {
        self.checked_mul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &ExactMatrix {
    type Output = ExactMatrix;
    fn add(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ExactMatrix {
    type Output = ExactMatrix;
    fn sub(self, rhs: &ExactMatrix) -> ExactMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ExactMatrix {
    type Output = ExactMatrix;
    fn neg(self) -> ExactMatrix {
        self.scale(&-Rational::one())
    }
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Rank and a reduced-echelon nullspace basis of a (possibly rectangular) matrix.
///
/// Each basis vector has a 1 in exactly one free column, zeros in the other
/// free columns, and the negated reduced-row-echelon entries in the pivot
/// columns. The basis is therefore unique for a given column order and does
/// not depend on the order of the rows.
pub fn rank_and_nullspace(m: &ExactMatrix) -> (usize, Vec<Vec<Rational>>) {
    let (rank, rref, pivots) = reduced_row_echelon(m);
    let cols = m.cols();
    let mut is_pivot = vec![false; cols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let basis = (0..cols)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![Rational::zero(); cols];
            v[free] = Rational::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -rref[(row, free)].clone();
            }
            v
        })
        .collect();
    (rank, basis)
}

fn reduced_row_echelon(m: &ExactMatrix) -> (usize, ExactMatrix, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols() {
        if row == a.rows() {
            break;
        }
        let Some(p) = (row..a.rows()).find(|&r| !a[(r, col)].is_zero()) else {
            continue;
        };
        a.swap_rows(p, row);
        let inv = a[(row, col)].recip();
        a.scale_row(row, &inv);
        for r in 0..a.rows() {
            if r != row && !a[(r, col)].is_zero() {
                let f = a[(r, col)].clone();
                a.sub_row_multiple(r, row, &f);
            }
        }
        pivots.push(col);
        row += 1;
    }
    (row, a, pivots)
}

/// Rescale a rational vector to the primitive integer vector on the same
/// ray whose first nonzero entry is positive.
pub fn primitive_integer_vector(v: &[Rational]) -> Vec<BigInt> {
    let denom_lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v
        .iter()
        .map(|x| x.numer() * (&denom_lcm / x.denom()))
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(first) if first.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter().map(|x| x / &g * &sign).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.positive + self.zero + self.negative
    }

    /// The signature of `-Q`.
    pub fn flipped(self) -> Self {
        Self {
            positive: self.negative,
            zero: self.zero,
            negative: self.positive,
        }
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.positive, self.zero, self.negative)
    }
}

/// Symmetric bilinear form `Q(x, y) = xᵀ Q y`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymmetricBilinearForm {
    matrix: ExactMatrix,
}

impl SymmetricBilinearForm {
    pub fn new(matrix: ExactMatrix) -> Result<Self, LinalgError> {
        if !matrix.is_square() {
            return Err(LinalgError::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        if !matrix.is_symmetric() {
            return Err(LinalgError::NotSymmetric);
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &ExactMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn signature(&self) -> Signature {
        signature(self)
    }

    /// `MᵀQM − Q`; zero exactly when `M` preserves the form.
    pub fn invariance_residual(&self, m: &ExactMatrix) -> ExactMatrix {
        &(&(&m.transpose() * &self.matrix) * m) - &self.matrix
    }

    /// Pullback `AᵀQA`.
    pub fn congruent(&self, a: &ExactMatrix) -> Self {
        Self {
            matrix: &(&a.transpose() * &self.matrix) * a,
        }
    }
}

/// Signature by exact diagonalization by congruence.
///
/// Pivot rule: the first nonzero diagonal entry of the trailing block; if the
/// trailing diagonal is all zero but some off-diagonal `a_ij` is not, add row
/// and column `j` to row and column `i`, which makes `a_ii = 2 a_ij ≠ 0`.
pub fn signature(q: &SymmetricBilinearForm) -> Signature {
    let n = q.dim();
    let mut a = q.matrix.clone();
    let mut sig = Signature {
        positive: 0,
        zero: 0,
        negative: 0,
    };
    for k in 0..n {
        let pivot = match (k..n).find(|&i| !a[(i, i)].is_zero()) {
            Some(i) => Some(i),
            None => {
                let off = (k..n)
                    .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                    .find(|&(i, j)| !a[(i, j)].is_zero());
                off.map(|(i, j)| {
                    congruence_add(&mut a, i, j);
                    i
                })
            }
        };
        let Some(p) = pivot else {
            sig.zero += n - k;
            break;
        };
        congruence_swap(&mut a, p, k);
        let d = a[(k, k)].clone();
        for r in k + 1..n {
            if a[(r, k)].is_zero() {
                continue;
            }
            let f = &a[(r, k)] / &d;
            a.sub_row_multiple(r, k, &f);
            for i in 0..n {
                let delta = &f * &a[(i, k)];
                a[(i, r)] -= delta;
            }
        }
        if d.is_positive() {
            sig.positive += 1;
        } else {
            sig.negative += 1;
        }
    }
    sig
}

fn congruence_swap(a: &mut ExactMatrix, i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap_rows(i, j);
    for r in 0..a.rows() {
        a.entries.swap(r * a.cols + i, r * a.cols + j);
    }
}

/// row_i += row_j, then col_i += col_j.
fn congruence_add(a: &mut ExactMatrix, i: usize, j: usize) {
    let n = a.rows();
    for c in 0..n {
        let v = a[(j, c)].clone();
        a[(i, c)] += v;
    }
    for r in 0..n {
        let v = a[(r, j)].clone();
        a[(r, i)] += v;
    }
}

/// Alternating 3-form stored by its coefficients on increasing triples
/// `i < j < k`, in lexicographic order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlternatingTrilinearForm {
    dim: usize,
    coefficients: Vec<Rational>,
}

impl AlternatingTrilinearForm {
    pub fn new(dim: usize, coefficients: Vec<Rational>) -> Result<Self, LinalgError> {
        let expected = increasing_triples(dim).len();
        if coefficients.len() != expected {
            return Err(LinalgError::DimensionMismatch {
                expected,
                found: coefficients.len(),
            });
        }
        Ok(Self { dim, coefficients })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// Entry of the fully antisymmetric tensor.
    pub fn component(&self, i: usize, j: usize, k: usize) -> Rational {
        let mut idx = [i, j, k];
        if idx[0] == idx[1] || idx[1] == idx[2] || idx[0] == idx[2] {
            return Rational::zero();
        }
        // bubble sort, tracking parity
        let mut odd = false;
        for _ in 0..2 {
            for p in 0..2 {
                if idx[p] > idx[p + 1] {
                    idx.swap(p, p + 1);
                    odd = !odd;
                }
            }
        }
        let c = self.coefficients[triple_index(self.dim, idx[0], idx[1], idx[2])].clone();
        if odd {
            -c
        } else {
            c
        }
    }

    pub fn evaluate(&self, x: &[Rational], y: &[Rational], z: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (t, &(i, j, k)) in increasing_triples(self.dim).iter().enumerate() {
            let c = &self.coefficients[t];
            if c.is_zero() {
                continue;
            }
            let minor = det3(
                [&x[i], &x[j], &x[k]],
                [&y[i], &y[j], &y[k]],
                [&z[i], &z[j], &z[k]],
            );
            acc += c * minor;
        }
        acc
    }

    /// The form `(x, y, z) ↦ φ(Mx, My, Mz)`.
    pub fn pullback(&self, m: &ExactMatrix) -> Self {
        let triples = increasing_triples(self.dim);
        let coefficients = triples
            .iter()
            .map(|&(a, b, c)| {
                triples
                    .iter()
                    .zip(&self.coefficients)
                    .filter(|(_, phi)| !phi.is_zero())
                    .map(|(&(i, j, k), phi)| phi * minor3(m, (i, j, k), (a, b, c)))
                    .fold(Rational::zero(), |acc, x| acc + x)
            })
            .collect();
        Self {
            dim: self.dim,
            coefficients,
        }
    }

    pub fn is_invariant_under(&self, m: &ExactMatrix) -> bool {
        self.pullback(m) == *self
    }
}

/// Increasing triples `(i, j, k)` with `i < j < k < dim`, lexicographic.
pub fn increasing_triples(dim: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            for k in j + 1..dim {
                out.push((i, j, k));
            }
        }
    }
    out
}

fn triple_index(dim: usize, i: usize, j: usize, k: usize) -> usize {
    increasing_triples(dim)
        .iter()
        .position(|&t| t == (i, j, k))
        .expect("triple in range")
}

fn det3(r0: [&Rational; 3], r1: [&Rational; 3], r2: [&Rational; 3]) -> Rational {
    r0[0] * (r1[1] * r2[2] - r1[2] * r2[1]) - r0[1] * (r1[0] * r2[2] - r1[2] * r2[0])
        + r0[2] * (r1[0] * r2[1] - r1[1] * r2[0])
}

/// Determinant of the 3×3 submatrix of `m` on the given rows and columns.
fn minor3(m: &ExactMatrix, rows: (usize, usize, usize), cols: (usize, usize, usize)) -> Rational {
    let r = [rows.0, rows.1, rows.2];
    let c = [cols.0, cols.1, cols.2];
    let e = |a: usize, b: usize| &m[(r[a], c[b])];
    det3([e(0, 0), e(0, 1), e(0, 2)], [e(1, 0), e(1, 1), e(1, 2)], [e(2, 0), e(2, 1), e(2, 2)])
}

fn check_generators(gens: &[ExactMatrix]) -> Result<usize, LinalgError> {
    let first = gens.first().ok_or(LinalgError::NoGenerators)?;
    if !first.is_square() {
        return Err(LinalgError::NotSquare {
            rows: first.rows(),
            cols: first.cols(),
        });
    }
    let dim = first.dim();
    for g in gens {
        if !g.is_square() {
            return Err(LinalgError::NotSquare {
                rows: g.rows(),
                cols: g.cols(),
            });
        }
        if g.dim() != dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
    }
    Ok(dim)
}

/// Parity of a bilinear form: `Q = Qᵀ` or `Q = −Qᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormParity {
    Symmetric,
    Alternating,
}

/// Basis of all bilinear forms of the given parity preserved by every
/// generator, i.e. `MᵀQM = Q`. Returned as matrices.
///
/// Unknowns are the independent entries: `i ≤ j` (symmetric, `d(d+1)/2`
/// of them) or `i < j` (alternating, `d(d−1)/2`).
pub fn invariant_bilinear_matrices(
    gens: &[ExactMatrix],
    parity: FormParity,
) -> Result<Vec<ExactMatrix>, LinalgError> {
    let dim = check_generators(gens)?;
    let unknowns: Vec<(usize, usize)> = (0..dim)
        .flat_map(|i| {
            let start = match parity {
                FormParity::Symmetric => i,
                FormParity::Alternating => i + 1,
            };
            (start..dim).map(move |j| (i, j))
        })
        .collect();
    let n = unknowns.len();
    let mut system = ExactMatrix::zeros(gens.len() * n, n);
    for (g, m) in gens.iter().enumerate() {
        for (e, &(a, b)) in unknowns.iter().enumerate() {
            let row = g * n + e;
            for (u, &(i, j)) in unknowns.iter().enumerate() {
                let coeff = if i == j {
                    &m[(i, a)] * &m[(i, b)]
                } else {
                    let cross = &m[(j, a)] * &m[(i, b)];
                    match parity {
                        FormParity::Symmetric => &m[(i, a)] * &m[(j, b)] + cross,
                        FormParity::Alternating => &m[(i, a)] * &m[(j, b)] - cross,
                    }
                };
                system[(row, u)] = coeff;
            }
            system[(row, e)] -= Rational::one();
        }
    }
    let (_, basis) = rank_and_nullspace(&system);
    Ok(basis
        .into_iter()
        .map(|v| {
            let mut q = ExactMatrix::zeros(dim, dim);
            for (&(i, j), x) in unknowns.iter().zip(v) {
                q[(i, j)] = x.clone();
                q[(j, i)] = match parity {
                    FormParity::Symmetric => x,
                    FormParity::Alternating => -x,
                };
            }
            q
        })
        .collect())
}

/// Basis of the symmetric bilinear forms `Q` with `MᵀQM = Q` for every generator.
pub fn invariant_bilinear_space(
    gens: &[ExactMatrix],
) -> Result<Vec<SymmetricBilinearForm>, LinalgError> {
    Ok(invariant_bilinear_matrices(gens, FormParity::Symmetric)?
        .into_iter()
        .map(|matrix| SymmetricBilinearForm { matrix })
        .collect())
}

/// Basis of the alternating 3-forms `φ` with `φ(Mx, My, Mz) = φ(x, y, z)`
/// for every generator, solved over the `C(d, 3)` independent coefficients.
pub fn invariant_trilinear_space(
    gens: &[ExactMatrix],
) -> Result<Vec<AlternatingTrilinearForm>, LinalgError> {
    let dim = check_generators(gens)?;
    let triples = increasing_triples(dim);
    let n = triples.len();
    let mut system = ExactMatrix::zeros(gens.len() * n, n);
    for (g, m) in gens.iter().enumerate() {
        for (e, &target) in triples.iter().enumerate() {
            let row = g * n + e;
            for (u, &source) in triples.iter().enumerate() {
                system[(row, u)] = minor3(m, source, target);
            }
            system[(row, e)] -= Rational::one();
        }
    }
    let (_, basis) = rank_and_nullspace(&system);
    Ok(basis
        .into_iter()
        .map(|coefficients| AlternatingTrilinearForm { dim, coefficients })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(xs: &[Rational]) -> ExactMatrix {
        ExactMatrix::diagonal(xs)
    }

    #[test]
    fn identity_has_full_rank() {
        let (rank, basis) = rank_and_nullspace(&ExactMatrix::identity(7));
        assert_eq!(rank, 7);
        assert!(basis.is_empty());
    }

    #[test]
    fn zero_matrix_nullspace_is_standard_basis() {
        let (rank, basis) = rank_and_nullspace(&ExactMatrix::zeros(3, 3));
        assert_eq!(rank, 0);
        assert_eq!(basis.len(), 3);
        for (i, v) in basis.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                assert_eq!(*x, rat(i64::from(i == j)));
            }
        }
    }

    #[test]
    fn empty_matrix_has_rank_zero() {
        let (rank, basis) = rank_and_nullspace(&ExactMatrix::zeros(0, 0));
        assert_eq!(rank, 0);
        assert!(basis.is_empty());
    }

    #[test]
    fn rectangular_nullspace() {
        let m = ExactMatrix::from_integers(&[vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        let (rank, basis) = rank_and_nullspace(&m);
        assert_eq!(rank, 1);
        assert_eq!(basis, vec![vec![rat(-2), rat(1), rat(0)], vec![rat(-3), rat(0), rat(1)]]);
    }

    #[test]
    fn small_signatures() {
        let id = SymmetricBilinearForm::new(ExactMatrix::identity(7)).unwrap();
        assert_eq!(
            id.signature(),
            Signature { positive: 7, zero: 0, negative: 0 }
        );
        let hyp = SymmetricBilinearForm::new(diag(&[rat(1), rat(-1)])).unwrap();
        assert_eq!(
            hyp.signature(),
            Signature { positive: 1, zero: 0, negative: 1 }
        );
    }

    #[test]
    fn signature_needs_off_diagonal_trick() {
        // zero diagonal, hyperbolic plane plus a null direction
        let m = ExactMatrix::from_integers(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 0]]).unwrap();
        let q = SymmetricBilinearForm::new(m).unwrap();
        assert_eq!(q.signature(), Signature { positive: 1, zero: 1, negative: 1 });
    }

    #[test]
    fn non_symmetric_form_is_rejected() {
        let m = ExactMatrix::from_integers(&[vec![0, 1], vec![0, 0]]).unwrap();
        assert_eq!(SymmetricBilinearForm::new(m), Err(LinalgError::NotSymmetric));
    }

    #[test]
    fn identity_preserves_every_symmetric_form() {
        let space = invariant_bilinear_space(&[ExactMatrix::identity(2)]).unwrap();
        assert_eq!(space.len(), 3);
    }

    #[test]
    fn hyperbolic_diagonal_preserves_only_the_antidiagonal() {
        let space = invariant_bilinear_space(&[diag(&[rat(2), ratio(1, 2)])]).unwrap();
        assert_eq!(space.len(), 1);
        let expected = ExactMatrix::from_integers(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(space[0].matrix(), &expected);
    }

    #[test]
    fn sl2_preserves_the_area_form() {
        let a = ExactMatrix::from_integers(&[vec![1, 2], vec![0, 1]]).unwrap();
        let b = ExactMatrix::from_integers(&[vec![1, 0], vec![2, 1]]).unwrap();
        let alt = invariant_bilinear_matrices(&[a.clone(), b.clone()], FormParity::Alternating)
            .unwrap();
        assert_eq!(alt.len(), 1);
        let sym = invariant_bilinear_space(&[a, b]).unwrap();
        assert!(sym.is_empty());
    }

    #[test]
    fn trilinear_identity_and_parity() {
        let id = invariant_trilinear_space(&[ExactMatrix::identity(7)]).unwrap();
        assert_eq!(id.len(), 35);
        let minus = invariant_trilinear_space(&[-&ExactMatrix::identity(7)]).unwrap();
        assert!(minus.is_empty());
    }

    #[test]
    fn mismatched_generators_are_rejected() {
        let err = invariant_bilinear_space(&[ExactMatrix::identity(2), ExactMatrix::identity(3)])
            .unwrap_err();
        assert_eq!(err, LinalgError::DimensionMismatch { expected: 2, found: 3 });
        assert!(invariant_trilinear_space(&[]).is_err());
    }

    #[test]
    fn trilinear_component_is_antisymmetric() {
        let coeffs = (0..35).map(|t| rat(t as i64 + 1)).collect();
        let phi = AlternatingTrilinearForm::new(7, coeffs).unwrap();
        let c = phi.component(1, 3, 5);
        assert_eq!(phi.component(3, 1, 5), -c.clone());
        assert_eq!(phi.component(5, 3, 1), -c.clone());
        assert_eq!(phi.component(3, 5, 1), c);
        assert_eq!(phi.component(2, 2, 4), rat(0));
    }

    #[test]
    fn inverse_and_determinant() {
        let m = ExactMatrix::from_integers(&[vec![2, 1], vec![7, 4]]).unwrap();
        assert_eq!(m.determinant().unwrap(), rat(1));
        assert!((&m * &m.inverse().unwrap()).is_identity());
        let singular = ExactMatrix::from_integers(&[vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(singular.inverse(), Err(LinalgError::Singular));
        assert_eq!(singular.determinant().unwrap(), rat(0));
    }

    #[test]
    fn primitive_vector_clears_denominators() {
        let v = vec![ratio(-1, 2), rat(0), ratio(3, 4)];
        let p = primitive_integer_vector(&v);
        assert_eq!(p, vec![BigInt::from(2), BigInt::from(0), BigInt::from(-3)]);
    }
}
