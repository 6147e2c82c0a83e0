//! Sum formulas for positive Lyapunov exponents of variations of Hodge
//! structure, evaluated in exact rational arithmetic.
//!
//! For weight 1 the sum of the `g` positive exponents equals
//! `2·deg(H^{1,0}) / (2g(C) − 2 + #S)`. For higher weight `n` the conjectural
//! version uses `F^{⌈n/2⌉}` when all of its directions carry positive
//! exponents, and only the top `d = dim H^{n,0}` exponents otherwise.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cocycle_engine::{column_mean_and_se, EstimationResult};
use crate::exact_linalg::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulaError {
    #[error("base is not hyperbolic: 2g - 2 + #S = {0} <= 0")]
    NonHyperbolic(i64),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("k = {k} exceeds the number of possible positive exponents ({max})")]
    TooManyExponents { k: usize, max: usize },
    #[error("cannot parse degree `{0}` as a rational p/q")]
    BadDegree(String),
    #[error("prediction is symbolic in deg({0}); supply the degree to compare")]
    Symbolic(String),
    #[error("the conjectured formula does not apply to this (hodge numbers, k)")]
    NotApplicable,
    #[error("scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("signature ({p},{q}) inconsistent with rank {rank}")]
    InconsistentSignature { rank: usize, p: usize, q: usize },
    #[error("estimate has {available} exponents, need {needed}")]
    TooFewExponents { available: usize, needed: usize },
}

pub fn parse_rational(s: &str) -> Result<Rational, FormulaError> {
    let bad = || FormulaError::BadDegree(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(num, den))
}

/// `2g − 2 + #S`, which must be positive on a hyperbolic base.
pub fn hyperbolic_denominator(genus: u32, punctures: u32) -> Result<i64, FormulaError> {
    let d = 2 * i64::from(genus) - 2 + i64::from(punctures);
    if d <= 0 {
        return Err(FormulaError::NonHyperbolic(d));
    }
    Ok(d)
}

/// `2·degree / (2·genus − 2 + punctures)`.
pub fn kontsevich_sum(genus: u32, punctures: u32, degree: &Rational) -> Result<Rational, FormulaError> {
    let denom = hyperbolic_denominator(genus, punctures)?;
    Ok(degree * Rational::from_integer(2.into()) / Rational::from_integer(denom.into()))
}

/// Weight, Hodge numbers, base topology and (optionally) bundle degrees.
///
/// `hodge_numbers[i]` is `h^{n−i, i}`, so the first entry is `dim H^{n,0}`.
/// Degree labels are `F^p` or `H^{n,0}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VhsProfile {
    pub weight: usize,
    pub hodge_numbers: Vec<u32>,
    pub genus: u32,
    pub punctures: u32,
    pub degrees: BTreeMap<String, Rational>,
}

/// JSON form: degrees are `"p/q"` strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VhsProfileJson {
    pub weight: usize,
    pub hodge_numbers: Vec<u32>,
    pub genus: u32,
    pub punctures: u32,
    #[serde(default)]
    pub degrees: BTreeMap<String, String>,
}

impl VhsProfile {
    pub fn new(weight: usize, hodge_numbers: Vec<u32>, genus: u32, punctures: u32) -> Result<Self, FormulaError> {
        let p = Self {
            weight,
            hodge_numbers,
            genus,
            punctures,
            degrees: BTreeMap::new(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_degree(mut self, label: &str, degree: Rational) -> Self {
        self.degrees.insert(label.to_string(), degree);
        self
    }

    pub fn validate(&self) -> Result<(), FormulaError> {
        if self.weight == 0 {
            return Err(FormulaError::InvalidProfile("weight must be at least 1".into()));
        }
        let h = &self.hodge_numbers;
        if h.len() != self.weight + 1 {
            return Err(FormulaError::InvalidProfile(format!(
                "weight {} needs {} Hodge numbers, got {}",
                self.weight,
                self.weight + 1,
                h.len()
            )));
        }
        if (0..h.len()).any(|i| h[i] != h[h.len() - 1 - i]) {
            return Err(FormulaError::InvalidProfile(format!(
                "Hodge numbers {h:?} violate h^(p,q) = h^(q,p)"
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, FormulaError> {
        let raw: VhsProfileJson =
            serde_json::from_str(text).map_err(|e| FormulaError::InvalidProfile(e.to_string()))?;
        let degrees = raw
            .degrees
            .iter()
            .map(|(k, v)| Ok((k.clone(), parse_rational(v)?)))
            .collect::<Result<_, FormulaError>>()?;
        let p = Self {
            weight: raw.weight,
            hodge_numbers: raw.hodge_numbers,
            genus: raw.genus,
            punctures: raw.punctures,
            degrees,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_json(&self) -> VhsProfileJson {
        VhsProfileJson {
            weight: self.weight,
            hodge_numbers: self.hodge_numbers.clone(),
            genus: self.genus,
            punctures: self.punctures,
            degrees: self.degrees.iter().map(|(k, v)| (k.clone(), v.to_string())).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.hodge_numbers.iter().map(|&h| h as usize).sum()
    }

    /// `dim F^p = Σ_{p' ≥ p} h^{p', n−p'}`.
    pub fn filtration_dim(&self, p: usize) -> usize {
        let n = self.weight;
        (0..=n)
            .filter(|&i| n - i >= p)
            .map(|i| self.hodge_numbers[i] as usize)
            .sum()
    }

    /// `dim H^{n,0}`.
    pub fn top_hodge_dim(&self) -> usize {
        self.hodge_numbers[0] as usize
    }

    pub fn middle_filtration_index(&self) -> usize {
        self.weight.div_ceil(2)
    }

    pub fn filtration_label(&self, p: usize) -> String {
        format!("F^{p}")
    }

    pub fn top_hodge_label(&self) -> String {
        format!("H^{{{},0}}", self.weight)
    }

    /// Degree of a bundle; `F^n` and `H^{n,0}` name the same bundle.
    pub fn degree(&self, label: &str) -> Option<&Rational> {
        if let Some(d) = self.degrees.get(label) {
            return Some(d);
        }
        let n = self.weight;
        let alias = if label == self.filtration_label(n) {
            self.top_hodge_label()
        } else if label == self.top_hodge_label() {
            self.filtration_label(n)
        } else {
            return None;
        };
        self.degrees.get(&alias)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `k = dim F^{⌈n/2⌉}`: all positive exponents, bundle `F^{⌈n/2⌉}`.
    #[serde(rename = "full-F")]
    FullF,
    /// `dim H^{n,0} < k < dim F^{⌈n/2⌉}`: top `d` exponents, bundle `H^{n,0}`.
    #[serde(rename = "truncated-H^{n,0}")]
    TruncatedHn0,
    #[serde(rename = "not-applicable")]
    NotApplicable,
}

/// Either an exact value or `coefficient·deg(bundle)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredictedSum {
    Exact(Rational),
    Symbolic { bundle: String, numerator: i64, denominator: i64 },
}

impl PredictedSum {
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Symbolic { .. } => None,
        }
    }
}

impl fmt::Display for PredictedSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(r) => write!(f, "{r}"),
            Self::Symbolic {
                bundle,
                numerator,
                denominator,
            } => write!(f, "{numerator}*deg({bundle})/{denominator}"),
        }
    }
}

impl Serialize for PredictedSum {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaPrediction {
    pub branch: Branch,
    /// Number of positive exponents supplied.
    pub k: usize,
    /// Number of top exponents whose sum is predicted.
    pub k_used: usize,
    pub bundle: Option<String>,
    pub predicted_sum: Option<PredictedSum>,
}

/// Evaluate the conjectured sum formula for `k` positive exponents.
///
/// Branches: `k = dim F^{⌈n/2⌉}` gives the full formula; `d < k < dim F`
/// with `d = dim H^{n,0}` gives the truncated one over the top `d`
/// exponents, and so does `k = d = 1`, where the top exponent alone is
/// predicted. Every other `k` is not covered.
pub fn conjecture_prediction(profile: &VhsProfile, k: usize) -> Result<FormulaPrediction, FormulaError> {
    profile.validate()?;
    let max = profile.rank() / 2;
    if k > max {
        return Err(FormulaError::TooManyExponents { k, max });
    }
    let denom = hyperbolic_denominator(profile.genus, profile.punctures)?;
    let mid = profile.middle_filtration_index();
    let f_dim = profile.filtration_dim(mid);
    let d = profile.top_hodge_dim();

    let (branch, k_used, bundle) = if k == f_dim && k > 0 {
        (Branch::FullF, k, profile.filtration_label(mid))
    } else if k < f_dim && (k > d || (k == 1 && d == 1)) {
        (Branch::TruncatedHn0, d, profile.top_hodge_label())
    } else {
        return Ok(FormulaPrediction {
            branch: Branch::NotApplicable,
            k,
            k_used: 0,
            bundle: None,
            predicted_sum: None,
        });
    };
    let predicted = match profile.degree(&bundle) {
        Some(deg) => PredictedSum::Exact(kontsevich_sum(profile.genus, profile.punctures, deg)?),
        None => PredictedSum::Symbolic {
            bundle: bundle.clone(),
            numerator: 2,
            denominator: denom,
        },
    };
    Ok(FormulaPrediction {
        branch,
        k,
        k_used,
        bundle: Some(bundle),
        predicted_sum: Some(predicted),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeInput {
    /// Signature `(p, q)` of the invariant symmetric form.
    Signature(usize, usize),
    /// Weight-1 (symplectic) variation.
    WeightOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpectrumShape {
    pub positive: usize,
    pub zero: usize,
    pub negative: usize,
}

impl SpectrumShape {
    pub fn total(&self) -> usize {
        self.positive + self.zero + self.negative
    }

    /// `+…+ 0…0 −…−` as a sign pattern.
    pub fn pattern(&self) -> String {
        "+".repeat(self.positive) + &"0".repeat(self.zero) + &"-".repeat(self.negative)
    }
}

/// Slots forced by an invariant form: `min(p, q)` positive, as many
/// negative, `|p − q|` zero. Symplectic forms pair everything.
pub fn spectrum_shape(rank: usize, input: ShapeInput) -> Result<SpectrumShape, FormulaError> {
    match input {
        ShapeInput::Signature(p, q) => {
            if p + q != rank {
                return Err(FormulaError::InconsistentSignature { rank, p, q });
            }
            Ok(SpectrumShape {
                positive: p.min(q),
                zero: p.abs_diff(q),
                negative: p.min(q),
            })
        }
        ShapeInput::WeightOne => {
            if rank % 2 == 1 {
                return Err(FormulaError::InvalidProfile(format!(
                    "weight-1 variation needs even rank, got {rank}"
                )));
            }
            Ok(SpectrumShape {
                positive: rank / 2,
                zero: 0,
                negative: rank / 2,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub predicted: String,
    pub k_used: usize,
    pub scale: f64,
    pub estimated_sum: f64,
    pub scaled_sum: f64,
    pub scaled_std_error: f64,
    pub defect: f64,
    pub defect_sigma: f64,
    pub tol_sigma: f64,
    pub consistent: bool,
}

/// Confront `scale · (λ̂₁ + … + λ̂_{k_used})` with an exact prediction.
/// The standard error of the partial sum comes from the per-block sums.
pub fn compare_prediction(
    prediction: &FormulaPrediction,
    estimate: &EstimationResult,
    scale: f64,
    tol_sigma: f64,
) -> Result<ComparisonReport, FormulaError> {
    let predicted = match &prediction.predicted_sum {
        Some(PredictedSum::Exact(r)) => r.clone(),
        Some(PredictedSum::Symbolic { bundle, .. }) => return Err(FormulaError::Symbolic(bundle.clone())),
        None => return Err(FormulaError::NotApplicable),
    };
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(FormulaError::InvalidScale(scale));
    }
    let k = prediction.k_used;
    if estimate.exponents.len() < k {
        return Err(FormulaError::TooFewExponents {
            available: estimate.exponents.len(),
            needed: k,
        });
    }
    let estimated_sum: f64 = estimate.exponents[..k].iter().sum();
    let per_block: Vec<Vec<f64>> = estimate
        .block_estimates
        .iter()
        .map(|row| vec![row[..k].iter().sum()])
        .collect();
    let (_, se) = column_mean_and_se(&per_block, 1);
    let pred = predicted.to_f64().unwrap_or(f64::NAN);
    let scaled_sum = scale * estimated_sum;
    let scaled_std_error = scale * se[0];
    let defect = (scaled_sum - pred).abs();
    let defect_sigma = if scaled_std_error > 0.0 {
        defect / scaled_std_error
    } else if defect == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ComparisonReport {
        predicted: predicted.to_string(),
        k_used: k,
        scale,
        estimated_sum,
        scaled_sum,
        scaled_std_error,
        defect,
        defect_sigma,
        tol_sigma,
        consistent: defect <= tol_sigma * scaled_std_error,
    })
}
