//! Multilinear functors on matrices: dual, exterior and symmetric powers,
//! tensor products and direct sums.
//!
//! Bases are fixed once and for all: exterior powers use increasing
//! `k`-tuples and symmetric powers use non-decreasing `k`-tuples, both in
//! lexicographic order. Tensor products use the Kronecker ordering.
//!
//! The same generic code runs over exact rationals and over `f64`; there is
//! no mixed mode.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_traits::{Num, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::exact_linalg::{ExactMatrix, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FunctorError {
    #[error("dual of a singular matrix")]
    Singular,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("power degree must be at least 1")]
    ZeroDegree,
    #[error("exterior power {k} exceeds dimension {dim}")]
    DegreeTooLarge { k: usize, dim: usize },
    #[error("direct sum needs at least one summand")]
    EmptySum,
    #[error("cannot parse functor spec `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

/// Entry type for functor evaluation.
pub trait Field: nalgebra::Scalar + Num + Neg<Output = Self> {
    /// Pivot preference for elimination; larger is better, zero means unusable.
    fn pivot_weight(&self) -> f64;
}

impl Field for f64 {
    fn pivot_weight(&self) -> f64 {
        self.abs()
    }
}

impl Field for Rational {
    fn pivot_weight(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FunctorSpec {
    Identity,
    Dual,
    ExteriorPower(usize),
    SymmetricPower(usize),
    Tensor(Box<FunctorSpec>, Box<FunctorSpec>),
    DirectSum(Vec<FunctorSpec>),
}

impl FunctorSpec {
    pub fn validate(&self) -> Result<(), FunctorError> {
        match self {
            Self::Identity | Self::Dual => Ok(()),
            Self::ExteriorPower(0) | Self::SymmetricPower(0) => Err(FunctorError::ZeroDegree),
            Self::ExteriorPower(_) | Self::SymmetricPower(_) => Ok(()),
            Self::Tensor(a, b) => {
                a.validate()?;
                b.validate()
            }
            Self::DirectSum(parts) if parts.is_empty() => Err(FunctorError::EmptySum),
            Self::DirectSum(parts) => parts.iter().try_for_each(Self::validate),
        }
    }

    /// Dimension of the functor applied to a `dim`-dimensional space.
    pub fn output_dim(&self, dim: usize) -> Result<usize, FunctorError> {
        self.validate()?;
        Ok(match self {
            Self::Identity | Self::Dual => dim,
            Self::ExteriorPower(k) => {
                if *k > dim {
                    return Err(FunctorError::DegreeTooLarge { k: *k, dim });
                }
                binomial(dim, *k)
            }
            Self::SymmetricPower(k) => binomial(dim + k - 1, *k),
            Self::Tensor(a, b) => a.output_dim(dim)? * b.output_dim(dim)?,
            Self::DirectSum(parts) => parts
                .iter()
                .map(|p| p.output_dim(dim))
                .sum::<Result<usize, _>>()?,
        })
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl fmt::Display for FunctorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Identity => f.write_str("identity"),
            Self::Dual => f.write_str("dual"),
            Self::ExteriorPower(k) => write!(f, "ext:{k}"),
            Self::SymmetricPower(k) => write!(f, "sym:{k}"),
            Self::Tensor(a, b) => write!(f, "tensor({a},{b})"),
            Self::DirectSum(parts) => {
                f.write_str("sum(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for FunctorSpec {
    type Err = FunctorError;

    /// `identity | dual | ext:k | sym:k | tensor(<spec>,<spec>) | sum(<spec>;...)`
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = Parser {
            input: s,
            chars: s.char_indices().peekable(),
        };
        let spec = parser.spec()?;
        parser.skip_ws();
        if let Some(&(pos, _)) = parser.chars.peek() {
            return Err(parser.error(format!("trailing input at byte {pos}")));
        }
        spec.validate().map_err(|e| parser.error(e.to_string()))?;
        Ok(spec)
    }
}

struct Parser<'a> {
    input: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
}

impl Parser<'_> {
    fn error(&self, reason: String) -> FunctorError {
        FunctorError::Parse {
            input: self.input.to_string(),
            reason,
        }
    }

    fn skip_ws(&mut self) {
        while self.chars.next_if(|(_, c)| c.is_whitespace()).is_some() {}
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let mut out = String::new();
        while let Some((_, c)) = self.chars.next_if(|(_, c)| c.is_ascii_alphanumeric() || *c == '_') {
            out.push(c);
        }
        out
    }

    fn expect(&mut self, want: char) -> Result<(), FunctorError> {
        self.skip_ws();
        match self.chars.next() {
            Some((_, c)) if c == want => Ok(()),
            Some((pos, c)) => Err(self.error(format!("expected `{want}` at byte {pos}, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn degree(&mut self) -> Result<usize, FunctorError> {
        self.expect(':')?;
        let digits = self.word();
        digits
            .parse()
            .map_err(|_| self.error(format!("invalid degree `{digits}`")))
    }

    fn spec(&mut self) -> Result<FunctorSpec, FunctorError> {
        let head = self.word();
        match head.as_str() {
            "identity" | "id" => Ok(FunctorSpec::Identity),
            "dual" => Ok(FunctorSpec::Dual),
            "ext" => Ok(FunctorSpec::ExteriorPower(self.degree()?)),
            "sym" => Ok(FunctorSpec::SymmetricPower(self.degree()?)),
            "tensor" => {
                self.expect('(')?;
                let a = self.spec()?;
                self.expect(',')?;
                let b = self.spec()?;
                self.expect(')')?;
                Ok(FunctorSpec::Tensor(Box::new(a), Box::new(b)))
            }
            "sum" => {
                self.expect('(')?;
                let mut parts = vec![self.spec()?];
                loop {
                    self.skip_ws();
                    match self.chars.peek() {
                        Some((_, ';')) => {
                            self.chars.next();
                            parts.push(self.spec()?);
                        }
                        _ => break,
                    }
                }
                self.expect(')')?;
                Ok(FunctorSpec::DirectSum(parts))
            }
            "" => Err(self.error("expected a functor name".into())),
            other => Err(self.error(format!("unknown functor `{other}`"))),
        }
    }
}

impl Serialize for FunctorSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FunctorSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Apply a functor to a square matrix.
pub fn apply_functor<T: Field>(m: &DMatrix<T>, f: &FunctorSpec) -> Result<DMatrix<T>, FunctorError> {
    if !m.is_square() {
        return Err(FunctorError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    f.validate()?;
    match f {
        FunctorSpec::Identity => Ok(m.clone()),
        FunctorSpec::Dual => Ok(inverse(m).ok_or(FunctorError::Singular)?.transpose()),
        FunctorSpec::ExteriorPower(k) => exterior_power(m, *k),
        FunctorSpec::SymmetricPower(k) => Ok(symmetric_power(m, *k)),
        FunctorSpec::Tensor(a, b) => Ok(kronecker(&apply_functor(m, a)?, &apply_functor(m, b)?)),
        FunctorSpec::DirectSum(parts) => {
            let blocks = parts
                .iter()
                .map(|p| apply_functor(m, p))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(block_diagonal(&blocks))
        }
    }
}

/// Exact-arithmetic entry point.
pub fn apply_functor_exact(m: &ExactMatrix, f: &FunctorSpec) -> Result<ExactMatrix, FunctorError> {
    let dense = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)].clone());
    let out = apply_functor(&dense, f)?;
    Ok(ExactMatrix::from_fn(out.nrows(), out.ncols(), |i, j| out[(i, j)].clone()))
}

/// Exponents of `f(V)` as integer combinations of the exponents of `V`:
/// row `r` holds the coefficients of the `r`-th output exponent, in the
/// basis order used by [`apply_functor`].
pub fn exponent_combinations(f: &FunctorSpec, dim: usize) -> Result<Vec<Vec<i64>>, FunctorError> {
    f.output_dim(dim)?;
    let from_tuples = |tuples: Vec<Vec<usize>>| {
        tuples
            .into_iter()
            .map(|t| {
                let mut row = vec![0; dim];
                for i in t {
                    row[i] += 1;
                }
                row
            })
            .collect()
    };
    Ok(match f {
        FunctorSpec::Identity => from_tuples((0..dim).map(|i| vec![i]).collect()),
        FunctorSpec::Dual => (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { -1 } else { 0 }).collect())
            .collect(),
        FunctorSpec::ExteriorPower(k) => from_tuples(increasing_tuples(dim, *k)),
        FunctorSpec::SymmetricPower(k) => from_tuples(nondecreasing_tuples(dim, *k)),
        FunctorSpec::Tensor(a, b) => {
            let (ca, cb) = (exponent_combinations(a, dim)?, exponent_combinations(b, dim)?);
            ca.iter()
                .flat_map(|ra| cb.iter().map(move |rb| ra.iter().zip(rb).map(|(x, y)| x + y).collect()))
                .collect()
        }
        FunctorSpec::DirectSum(parts) => {
            let mut rows = Vec::new();
            for p in parts {
                rows.extend(exponent_combinations(p, dim)?);
            }
            rows
        }
    })
}

/// Increasing `k`-subsets of `0..n`, lexicographic.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Non-decreasing `k`-tuples of `0..n`, lexicographic.
pub fn nondecreasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Matrix of `k×k` minors: entry `(I, J)` is `det M[I, J]`.
fn exterior_power<T: Field>(m: &DMatrix<T>, k: usize) -> Result<DMatrix<T>, FunctorError> {
    let n = m.nrows();
    if k > n {
        return Err(FunctorError::DegreeTooLarge { k, dim: n });
    }
    let subsets = increasing_tuples(n, k);
    let size = subsets.len();
    Ok(DMatrix::from_fn(size, size, |a, b| {
        let sub = DMatrix::from_fn(k, k, |i, j| m[(subsets[a][i], subsets[b][j])].clone());
        determinant(&sub)
    }))
}

/// Action on degree-`k` monomials: the basis vector `x_J` maps to
/// `∏ₜ (Σᵢ M[i, jₜ] xᵢ)`, expanded in the monomial basis.
fn symmetric_power<T: Field>(m: &DMatrix<T>, k: usize) -> DMatrix<T> {
    let n = m.nrows();
    let basis = nondecreasing_tuples(n, k);
    let index: BTreeMap<&Vec<usize>, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let mut out = DMatrix::from_element(basis.len(), basis.len(), T::zero());
    for (col, monomial) in basis.iter().enumerate() {
        let mut poly: BTreeMap<Vec<usize>, T> = BTreeMap::from([(Vec::new(), T::one())]);
        for &j in monomial {
            let mut next: BTreeMap<Vec<usize>, T> = BTreeMap::new();
            for (term, coeff) in &poly {
                for i in 0..n {
                    let a = &m[(i, j)];
                    if a.is_zero() {
                        continue;
                    }
                    let mut t = term.clone();
                    let pos = t.partition_point(|&x| x <= i);
                    t.insert(pos, i);
                    let entry = next.entry(t).or_insert_with(T::zero);
                    *entry = entry.clone() + coeff.clone() * a.clone();
                }
            }
            poly = next;
        }
        for (term, coeff) in poly {
            out[(index[&term], col)] = coeff;
        }
    }
    out
}

pub fn kronecker<T: Field>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let (br, bc) = b.shape();
    DMatrix::from_fn(a.nrows() * br, a.ncols() * bc, |i, j| {
        a[(i / br, j / bc)].clone() * b[(i % br, j % bc)].clone()
    })
}

pub fn block_diagonal<T: Field>(blocks: &[DMatrix<T>]) -> DMatrix<T> {
    let n: usize = blocks.iter().map(DMatrix::nrows).sum();
    let mut out = DMatrix::from_element(n, n, T::zero());
    let mut offset = 0;
    for b in blocks {
        for i in 0..b.nrows() {
            for j in 0..b.ncols() {
                out[(offset + i, offset + j)] = b[(i, j)].clone();
            }
        }
        offset += b.nrows();
    }
    out
}

/// Determinant by elimination, choosing the pivot with the largest
/// [`Field::pivot_weight`] in each column.
pub fn determinant<T: Field>(m: &DMatrix<T>) -> T {
    let n = m.nrows();
    let mut a = m.clone();
    let mut det = T::one();
    for k in 0..n {
        let Some(p) = best_pivot(&a, k) else {
            return T::zero();
        };
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        let pivot = a[(k, k)].clone();
        for r in k + 1..n {
            if a[(r, k)].is_zero() {
                continue;
            }
            let f = a[(r, k)].clone() / pivot.clone();
            for c in k..n {
                a[(r, c)] = a[(r, c)].clone() - f.clone() * a[(k, c)].clone();
            }
        }
        det = det * pivot;
    }
    det
}

/// Gauss–Jordan inverse; `None` when singular.
pub fn inverse<T: Field>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut inv = DMatrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() });
    for k in 0..n {
        let p = best_pivot(&a, k)?;
        a.swap_rows(p, k);
        inv.swap_rows(p, k);
        let pivot = a[(k, k)].clone();
        for c in 0..n {
            a[(k, c)] = a[(k, c)].clone() / pivot.clone();
            inv[(k, c)] = inv[(k, c)].clone() / pivot.clone();
        }
        for r in 0..n {
            if r == k || a[(r, k)].is_zero() {
                continue;
            }
            let f = a[(r, k)].clone();
            for c in 0..n {
                a[(r, c)] = a[(r, c)].clone() - f.clone() * a[(k, c)].clone();
                inv[(r, c)] = inv[(r, c)].clone() - f.clone() * inv[(k, c)].clone();
            }
        }
    }
    Some(inv)
}

fn best_pivot<T: Field>(a: &DMatrix<T>, k: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for r in k..a.nrows() {
        let w = a[(r, k)].pivot_weight();
        if w > 0.0 && best.is_none_or(|(_, bw)| w > bw) {
            best = Some((r, w));
        }
    }
    best.map(|(r, _)| r)
}

#[cfg(test)]
mod tests {
    use super::exponent_combinations as combos;

    #[test]
    fn combinations_match_diagonal_functors() {
        let diag = [2.0f64, 0.5, 3.0];
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&diag));
        let logs: Vec<f64> = diag.iter().map(|x| x.ln()).collect();
        for text in ["identity", "dual", "ext:2", "sym:2", "tensor(dual,ext:2)", "sum(id;ext:3;sym:3)"] {
            let f: FunctorSpec = text.parse().unwrap();
            let out = apply_functor(&m, &f).unwrap();
            let rows = combos(&f, 3).unwrap();
            assert_eq!(rows.len(), out.nrows(), "{text}");
            for (r, row) in rows.iter().enumerate() {
                let predicted: f64 = row.iter().zip(&logs).map(|(&c, l)| c as f64 * l).sum();
                assert!((out[(r, r)].ln() - predicted).abs() < 1e-12, "{text} row {r}");
            }
        }
    }

    use super::*;
    use crate::exact_linalg::{rat, ratio};

    fn exact(rows: &[Vec<i64>]) -> ExactMatrix {
        ExactMatrix::from_integers(rows).unwrap()
    }

    #[test]
    fn exterior_square_of_diagonal() {
        let m = ExactMatrix::diagonal(&[rat(2), rat(1), ratio(1, 2)]);
        let out = apply_functor_exact(&m, &FunctorSpec::ExteriorPower(2)).unwrap();
        // pairs (0,1), (0,2), (1,2)
        assert_eq!(out, ExactMatrix::diagonal(&[rat(2), rat(1), ratio(1, 2)]));
    }

    #[test]
    fn exterior_square_of_identity() {
        let out = apply_functor_exact(&ExactMatrix::identity(7), &FunctorSpec::ExteriorPower(2)).unwrap();
        assert_eq!(out, ExactMatrix::identity(21));
    }

    #[test]
    fn top_exterior_power_is_determinant() {
        let m = exact(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        let out = apply_functor_exact(&m, &FunctorSpec::ExteriorPower(3)).unwrap();
        assert_eq!(out.dim(), 1);
        assert_eq!(out[(0, 0)], m.determinant().unwrap());
    }

    #[test]
    fn dual_is_an_involution() {
        let m = exact(&[vec![2, 1], vec![7, 4]]);
        let dd = apply_functor_exact(
            &apply_functor_exact(&m, &FunctorSpec::Dual).unwrap(),
            &FunctorSpec::Dual,
        )
        .unwrap();
        assert_eq!(dd, m);
    }

    #[test]
    fn dual_of_singular_fails() {
        let m = exact(&[vec![1, 2], vec![2, 4]]);
        assert_eq!(apply_functor_exact(&m, &FunctorSpec::Dual), Err(FunctorError::Singular));
    }

    #[test]
    fn exterior_power_too_large() {
        assert_eq!(
            apply_functor_exact(&ExactMatrix::identity(3), &FunctorSpec::ExteriorPower(4)),
            Err(FunctorError::DegreeTooLarge { k: 4, dim: 3 })
        );
    }

    #[test]
    fn symmetric_square_of_diagonal() {
        let m = ExactMatrix::diagonal(&[rat(2), rat(3)]);
        let out = apply_functor_exact(&m, &FunctorSpec::SymmetricPower(2)).unwrap();
        // monomials x0², x0x1, x1²
        assert_eq!(out, ExactMatrix::diagonal(&[rat(4), rat(6), rat(9)]));
    }

    #[test]
    fn symmetric_square_of_shear() {
        // x0 -> x0, x1 -> x0 + x1
        let m = exact(&[vec![1, 1], vec![0, 1]]);
        let out = apply_functor_exact(&m, &FunctorSpec::SymmetricPower(2)).unwrap();
        let expected = exact(&[vec![1, 1, 1], vec![0, 1, 2], vec![0, 0, 1]]);
        assert_eq!(out, expected);
    }

    #[test]
    fn tensor_and_sum_dimensions() {
        let spec: FunctorSpec = "sum(tensor(identity,dual);ext:2;sym:2)".parse().unwrap();
        assert_eq!(spec.output_dim(3).unwrap(), 9 + 3 + 6);
        let m = exact(&[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        let out = apply_functor_exact(&m, &spec).unwrap();
        assert_eq!(out.dim(), 18);
    }

    #[test]
    fn float_and_exact_paths_agree() {
        let m = exact(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        for spec in ["ext:2", "sym:2", "dual", "tensor(ext:2,identity)"] {
            let spec: FunctorSpec = spec.parse().unwrap();
            let e = apply_functor_exact(&m, &spec).unwrap().to_f64();
            let f = apply_functor(&m.to_f64(), &spec).unwrap();
            assert!((e - f).abs().max() < 1e-12, "{spec}");
        }
    }

    #[test]
    fn parse_and_display() {
        for s in ["identity", "dual", "ext:2", "sym:3", "tensor(ext:2,dual)", "sum(identity;ext:2;dual)"] {
            let spec: FunctorSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let spaced: FunctorSpec = " tensor( ext:2 , id ) ".parse().unwrap();
        assert_eq!(spaced.to_string(), "tensor(ext:2,identity)");
    }

    #[test]
    fn parse_errors() {
        for s in ["", "ext", "ext:0", "ext:x", "tensor(dual)", "sum()", "frob", "dual dual"] {
            assert!(s.parse::<FunctorSpec>().is_err(), "{s:?} should not parse");
        }
    }

    #[test]
    fn tuple_enumeration() {
        assert_eq!(increasing_tuples(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(nondecreasing_tuples(2, 2), vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(increasing_tuples(7, 2).len(), 21);
    }
}
