//! The G₂ root system, weights of its two fundamental representations, the
//! restriction map to the split real form, and the Lyapunov-vector dictionary
//! between chamber vectors and spectra.
//!
//! Weights live in the three-coordinate model `{a ∈ Z³ : a₁ + a₂ + a₃ = 0}`
//! with the standard inner product, so `e₁ − e₂` is literally `(1, −1, 0)`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, Signed};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("unknown representation `{0}` (expected `standard` or `adjoint`)")]
    UnknownRepresentation(String),
    #[error("weight coordinates {0:?} do not sum to zero")]
    NonZeroSum([i64; 3]),
    #[error("Lyapunov vector {coords} lies outside the closed positive chamber")]
    OutsideChamber { coords: String },
    #[error("exponents must satisfy a >= b >= c >= 0, got ({a}, {b}, {c})")]
    OrderingViolated { a: String, b: String, c: String },
    #[error("additivity a = b + c violated by {defect} (tolerance {tol})")]
    AdditivityViolated { defect: String, tol: String },
}

/// Integer weight in the sum-zero model.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeightVector([i64; 3]);

impl WeightVector {
    pub const ZERO: WeightVector = WeightVector([0, 0, 0]);

    pub fn new(coords: [i64; 3]) -> Result<Self, RootError> {
        if coords.iter().sum::<i64>() != 0 {
            return Err(RootError::NonZeroSum(coords));
        }
        Ok(Self(coords))
    }

    /// `eᵢ − eⱼ` (zero-based indices).
    pub fn difference(i: usize, j: usize) -> Self {
        let mut c = [0; 3];
        c[i] += 1;
        c[j] -= 1;
        Self(c)
    }

    pub fn coords(&self) -> [i64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Self) -> i64 {
        self.0.iter().zip(other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_squared(&self) -> i64 {
        self.dot(self)
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    /// Pairing with a real (or rational) chamber vector.
    pub fn evaluate<T>(&self, gamma: &LyapunovVector<T>) -> T
    where
        T: Coord,
    {
        self.0
            .iter()
            .zip(gamma.coords.iter())
            .fold(T::zero(), |acc, (&w, g)| acc + T::from_i64(w).unwrap() * g.clone())
    }
}

impl Add for WeightVector {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1], self.0[2] + rhs.0[2]])
    }
}

impl Neg for WeightVector {
    type Output = Self;
    fn neg(self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl fmt::Debug for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// The twelve roots of G₂ together with the simple pair.
#[derive(Debug, Clone)]
pub struct RootSystemG2 {
    pub roots: Vec<WeightVector>,
    pub simple: (WeightVector, WeightVector),
}

impl RootSystemG2 {
    pub fn short_roots(&self) -> Vec<WeightVector> {
        let min = self.roots.iter().map(WeightVector::norm_squared).min().unwrap_or(0);
        self.roots.iter().copied().filter(|r| r.norm_squared() == min).collect()
    }

    pub fn long_roots(&self) -> Vec<WeightVector> {
        let min = self.roots.iter().map(WeightVector::norm_squared).min().unwrap_or(0);
        self.roots.iter().copied().filter(|r| r.norm_squared() != min).collect()
    }

    pub fn contains(&self, w: &WeightVector) -> bool {
        self.roots.contains(w)
    }
}

/// `±(e₁−e₂), ±(e₁−e₃), ±(e₂−e₃), ±(−e₁+2e₂−e₃), ±(2e₁−e₂−e₃), ±(e₁+e₂−2e₃)`
/// with simple roots `α₁ = e₁ − e₂`, `α₂ = −e₁ + 2e₂ − e₃`.
pub fn build_root_system() -> RootSystemG2 {
    let positive = [
        [1, -1, 0],
        [1, 0, -1],
        [0, 1, -1],
        [-1, 2, -1],
        [2, -1, -1],
        [1, 1, -2],
    ];
    let roots = positive
        .iter()
        .flat_map(|&c| [WeightVector(c), -WeightVector(c)])
        .collect();
    RootSystemG2 {
        roots,
        simple: (WeightVector([1, -1, 0]), WeightVector([-1, 2, -1])),
    }
}

/// Angle between two weights under the standard inner product.
pub fn angle(a: &WeightVector, b: &WeightVector) -> f64 {
    let cos = a.dot(b) as f64 / ((a.norm_squared() * b.norm_squared()) as f64).sqrt();
    cos.clamp(-1.0, 1.0).acos()
}

/// Restriction to the maximal split torus. For the split real form the
/// restricted root system is again G₂ with `r(αᵢ) = βᵢ`, so on coordinates
/// this is `eᵢ ↦ fᵢ`.
pub fn restrict(w: WeightVector) -> WeightVector {
    w
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepresentationName {
    Standard,
    Adjoint,
}

impl FromStr for RepresentationName {
    type Err = RootError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "standard" | "std" => Ok(Self::Standard),
            "adjoint" | "adj" => Ok(Self::Adjoint),
            other => Err(RootError::UnknownRepresentation(other.to_string())),
        }
    }
}

impl fmt::Display for RepresentationName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Standard => "standard",
            Self::Adjoint => "adjoint",
        })
    }
}

/// A representation given by its weight multiset (multiplicities expanded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Representation {
    pub name: String,
    pub weights: Vec<WeightVector>,
}

impl Representation {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn multiset(&self) -> BTreeMap<WeightVector, usize> {
        multiset(&self.weights)
    }
}

pub fn multiset(weights: &[WeightVector]) -> BTreeMap<WeightVector, usize> {
    let mut out = BTreeMap::new();
    for w in weights {
        *out.entry(*w).or_insert(0) += 1;
    }
    out
}

/// Multiset union.
pub fn multiset_sum(
    a: &BTreeMap<WeightVector, usize>,
    b: &BTreeMap<WeightVector, usize>,
) -> BTreeMap<WeightVector, usize> {
    let mut out = a.clone();
    for (w, m) in b {
        *out.entry(*w).or_insert(0) += m;
    }
    out
}

pub fn representation_weights(name: RepresentationName) -> Representation {
    let weights = match name {
        RepresentationName::Standard => {
            let mut w = vec![WeightVector::ZERO];
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                w.push(WeightVector::difference(i, j));
                w.push(WeightVector::difference(j, i));
            }
            w
        }
        RepresentationName::Adjoint => {
            let mut w = build_root_system().roots;
            w.extend([WeightVector::ZERO, WeightVector::ZERO]);
            w
        }
    };
    Representation {
        name: name.to_string(),
        weights,
    }
}

/// All `wᵢ + wⱼ` over unordered index pairs `i < j` of the expanded weight
/// list: the weights of the exterior square.
pub fn exterior_square_weight_multiset(rep: &Representation) -> Vec<WeightVector> {
    let w = &rep.weights;
    let mut out = Vec::with_capacity(w.len() * w.len().saturating_sub(1) / 2);
    for i in 0..w.len() {
        for j in i + 1..w.len() {
            out.push(w[i] + w[j]);
        }
    }
    out
}

/// Scalar type for chamber vectors: `f64` for estimates, rationals for exact
/// round trips.
pub trait Coord: Num + Signed + Clone + PartialOrd + FromPrimitive + fmt::Display {}

impl<T> Coord for T where T: Num + Signed + Clone + PartialOrd + FromPrimitive + fmt::Display {}

/// A vector `Γ = (g₁, g₂, g₃)` with zero coordinate sum in the closed
/// positive chamber `g₁ ≥ g₂ ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovVector<T = f64> {
    coords: [T; 3],
}

impl<T: Coord> LyapunovVector<T> {
    /// Chamber membership is `⟨β₁, Γ⟩ = g₁ − g₂ ≥ 0` and
    /// `⟨β₂, Γ⟩ = −g₁ + 2g₂ − g₃ = 3g₂ ≥ 0`, each allowed to miss by `tol`;
    /// the coordinate sum must vanish within `tol` too. Use `tol = 0` on
    /// exact inputs.
    pub fn new(coords: [T; 3], tol: T) -> Result<Self, RootError> {
        let [g1, g2, g3] = coords.clone();
        let sum = g1.clone() + g2.clone() + g3;
        let neg_tol = -tol.clone();
        if sum.abs() > tol || g1 - g2.clone() < neg_tol || g2 < neg_tol {
            return Err(RootError::OutsideChamber {
                coords: format!("({}, {}, {})", coords[0], coords[1], coords[2]),
            });
        }
        Ok(Self { coords })
    }

    pub fn zero() -> Self {
        Self {
            coords: [T::zero(), T::zero(), T::zero()],
        }
    }

    pub fn coords(&self) -> &[T; 3] {
        &self.coords
    }
}

/// A spectrum with multiplicity, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T = f64> {
    values: Vec<T>,
}

impl<T: Coord> Spectrum<T> {
    pub fn new(mut values: Vec<T>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The strictly positive entries, in descending order.
    pub fn positive_part(&self) -> Vec<T> {
        self.values.iter().filter(|v| v.is_positive()).cloned().collect()
    }
}

/// Evaluate each restricted weight on `Γ`, one value per weight with
/// multiplicity, sorted descending.
pub fn predict_spectrum<T: Coord>(rep: &Representation, gamma: &LyapunovVector<T>) -> Spectrum<T> {
    Spectrum::new(
        rep.weights
            .iter()
            .map(|w| restrict(*w).evaluate(gamma))
            .collect(),
    )
}

/// Invert the standard-representation dictionary: given the positive
/// exponents `a ≥ b ≥ c ≥ 0` with `a = b + c`, return the unique chamber
/// vector whose standard spectrum is `{±a, ±b, ±c, 0}`. The largest value is
/// read as `⟨e₁−e₃, Γ⟩` and the middle one as `⟨e₂−e₃, Γ⟩`.
pub fn recover_lyapunov_vector<T: Coord>(a: T, b: T, c: T, tol: T) -> Result<LyapunovVector<T>, RootError> {
    if a < b || b < c || c.is_negative() {
        return Err(RootError::OrderingViolated {
            a: a.to_string(),
            b: b.to_string(),
            c: c.to_string(),
        });
    }
    let defect = (a - b.clone() - c.clone()).abs();
    if defect > tol {
        return Err(RootError::AdditivityViolated {
            defect: defect.to_string(),
            tol: tol.to_string(),
        });
    }
    let two = T::from_i64(2).unwrap();
    let three = T::from_i64(3).unwrap();
    let g1 = (b.clone() + two.clone() * c.clone()) / three.clone();
    let g2 = (b.clone() - c.clone()) / three.clone();
    let g3 = -(two * b + c) / three;
    Ok(LyapunovVector { coords: [g1, g2, g3] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn w(c: [i64; 3]) -> WeightVector {
        WeightVector::new(c).unwrap()
    }

    #[test]
    fn twelve_roots_closed_under_negation() {
        let rs = build_root_system();
        assert_eq!(rs.roots.len(), 12);
        assert_eq!(multiset(&rs.roots).len(), 12);
        for r in &rs.roots {
            assert!(rs.contains(&-*r));
            assert_eq!(r.coords().iter().sum::<i64>(), 0);
        }
        assert!(rs.contains(&w([2, -1, -1])));
        assert!(rs.contains(&w([-2, 1, 1])));
    }

    #[test]
    fn short_and_long_roots() {
        let rs = build_root_system();
        let short = rs.short_roots();
        let long = rs.long_roots();
        assert_eq!(short.len(), 6);
        assert_eq!(long.len(), 6);
        assert_eq!(long[0].norm_squared(), 3 * short[0].norm_squared());
    }

    #[test]
    fn simple_roots_meet_at_five_sixths_pi() {
        let rs = build_root_system();
        assert_eq!(rs.simple.0, w([1, -1, 0]));
        assert_eq!(rs.simple.1, w([-1, 2, -1]));
        assert!((angle(&rs.simple.0, &rs.simple.1) - 5.0 * PI / 6.0).abs() < 1e-12);
    }

    #[test]
    fn restriction_is_coordinatewise() {
        assert_eq!(restrict(w([1, -1, 0])), w([1, -1, 0]));
        assert_eq!(restrict(w([2, -1, -1])), w([2, -1, -1]));
        assert_eq!(restrict(WeightVector::ZERO), WeightVector::ZERO);
    }

    #[test]
    fn non_zero_sum_weights_are_rejected() {
        assert_eq!(WeightVector::new([1, 0, 0]), Err(RootError::NonZeroSum([1, 0, 0])));
    }

    #[test]
    fn representation_dimensions() {
        let std = representation_weights(RepresentationName::Standard);
        let adj = representation_weights(RepresentationName::Adjoint);
        assert_eq!(std.dim(), 7);
        assert_eq!(adj.dim(), 14);
        assert_eq!(adj.multiset()[&WeightVector::ZERO], 2);
        for rep in [&std, &adj] {
            let neg: Vec<_> = rep.weights.iter().map(|x| -*x).collect();
            assert_eq!(multiset(&neg), rep.multiset());
        }
        assert!("spin".parse::<RepresentationName>().is_err());
    }

    #[test]
    fn predictions_on_integer_gamma() {
        let gamma = LyapunovVector::new([2.0, 1.0, -3.0], 0.0).unwrap();
        let std = predict_spectrum(&representation_weights(RepresentationName::Standard), &gamma);
        assert_eq!(std.values(), &[5.0, 4.0, 1.0, 0.0, -1.0, -4.0, -5.0]);
        let adj = predict_spectrum(&representation_weights(RepresentationName::Adjoint), &gamma);
        assert_eq!(
            adj.values(),
            &[9.0, 6.0, 5.0, 4.0, 3.0, 1.0, 0.0, 0.0, -1.0, -3.0, -4.0, -5.0, -6.0, -9.0]
        );
        let zero = predict_spectrum(&representation_weights(RepresentationName::Adjoint), &LyapunovVector::<f64>::zero());
        assert!(zero.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn chamber_violations() {
        assert!(LyapunovVector::new([1.0, 2.0, -3.0], 0.0).is_err());
        assert!(LyapunovVector::new([3.0, -1.0, -2.0], 0.0).is_err());
        assert!(LyapunovVector::new([1.0, 1.0, 1.0], 0.0).is_err());
        assert!(LyapunovVector::new([1.0, -1e-10, -1.0 + 1e-10], 1e-9).is_ok());
    }

    #[test]
    fn recovery_examples() {
        let g = recover_lyapunov_vector(5.0, 4.0, 1.0, 0.0).unwrap();
        assert_eq!(g.coords(), &[2.0, 1.0, -3.0]);
        let g = recover_lyapunov_vector(2.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(g.coords(), &[1.0, 0.0, -1.0]);
        let g = recover_lyapunov_vector(0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(g.coords(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn recovery_errors() {
        assert!(matches!(
            recover_lyapunov_vector(1.0, 4.0, 1.0, 0.0),
            Err(RootError::OrderingViolated { .. })
        ));
        assert!(matches!(
            recover_lyapunov_vector(6.0, 4.0, 1.0, 0.5),
            Err(RootError::AdditivityViolated { .. })
        ));
        assert!(recover_lyapunov_vector(5.2, 4.0, 1.0, 0.5).is_ok());
    }

    #[test]
    fn exterior_square_splits_as_adjoint_plus_standard() {
        let std = representation_weights(RepresentationName::Standard);
        let adj = representation_weights(RepresentationName::Adjoint);
        let ext = exterior_square_weight_multiset(&std);
        assert_eq!(ext.len(), 21);
        assert_eq!(multiset(&ext), multiset_sum(&adj.multiset(), &std.multiset()));
        let trivial = Representation {
            name: "trivial".into(),
            weights: vec![WeightVector::ZERO],
        };
        assert!(exterior_square_weight_multiset(&trivial).is_empty());
    }
}
