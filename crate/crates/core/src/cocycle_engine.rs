//! Monte Carlo estimation of Lyapunov spectra of matrix cocycles over random
//! words.
//!
//! Each block is an independent restart: a fresh orthonormal frame is pushed
//! through the matrices of a random word, re-orthonormalized by QR (positive
//! diagonal convention) every `renorm_interval` steps, and the logs of the
//! `R` diagonals are accumulated after a discarded burn-in. Block means give
//! the estimate; their spread gives the standard error.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::monodromy_dataset::{CocycleGenerators, Letter};
use crate::rep_functors::{apply_functor_exact, exponent_combinations, FunctorError, FunctorSpec};
use crate::root_g2::Spectrum;

/// Frames whose entries exceed this between renormalizations are treated as
/// blown up.
const BLOW_UP_THRESHOLD: f64 = 1e200;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid walk configuration: {0}")]
    Config(String),
    #[error("a non-backtracking walk needs at least two admissible symbols (got {0} generator)")]
    TooFewSymbols(usize),
    #[error(
        "numerical blow-up in block {block} at step {step}; lower renorm_interval (currently {renorm_interval})"
    )]
    BlowUp {
        block: usize,
        step: usize,
        renorm_interval: usize,
    },
    #[error("singular frame in block {block} at step {step}: a generator is (numerically) singular")]
    Singular { block: usize, step: usize },
    #[error("hints inconsistent with dimension {dim}: {reason}")]
    InconsistentHints { dim: usize, reason: String },
    #[error("functor: {0}")]
    Functor(#[from] FunctorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkKind {
    /// Uniform over generators and inverses.
    IidUniform,
    NonBacktracking,
    /// Uniform over the generators alone (a semigroup walk).
    IidPositive,
}

impl std::str::FromStr for WalkKind {
    type Err = EngineError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iid-uniform" | "iid" => Ok(Self::IidUniform),
            "non-backtracking" | "nb" => Ok(Self::NonBacktracking),
            "iid-positive" | "positive" => Ok(Self::IidPositive),
            other => Err(EngineError::Config(format!(
                "unknown walk kind `{other}` (expected `iid-uniform`, `non-backtracking` or `iid-positive`)"
            ))),
        }
    }
}

fn default_burn_in() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub walk_kind: WalkKind,
    /// Total accumulated steps over all blocks (burn-in excluded).
    pub steps: usize,
    pub renorm_interval: usize,
    pub blocks: usize,
    pub master_seed: u64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            walk_kind: WalkKind::NonBacktracking,
            steps: 1_000_000,
            renorm_interval: 1,
            blocks: 20,
            master_seed: 0,
            burn_in: default_burn_in(),
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.blocks == 0 {
            return Err(EngineError::Config("blocks must be at least 1".into()));
        }
        if self.steps == 0 || !self.steps.is_multiple_of(self.blocks) {
            return Err(EngineError::Config(format!(
                "steps ({}) must be a positive multiple of blocks ({})",
                self.steps, self.blocks
            )));
        }
        if self.renorm_interval == 0 {
            return Err(EngineError::Config("renorm_interval must be at least 1".into()));
        }
        Ok(())
    }

    pub fn steps_per_block(&self) -> usize {
        self.steps / self.blocks
    }
}

/// splitmix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of block `b`: `splitmix64(master ⊕ (b + 1)·γ)` with `γ` the 64-bit
/// golden-ratio increment.
pub fn block_seed(master_seed: u64, block: usize) -> u64 {
    splitmix64(master_seed ^ (block as u64 + 1).wrapping_mul(GOLDEN_GAMMA))
}

/// Infinite deterministic stream of generator letters.
#[derive(Debug, Clone)]
pub struct WordStream {
    rng: ChaCha8Rng,
    symbols: usize,
    kind: WalkKind,
    last: Option<Letter>,
}

impl WordStream {
    pub fn new(gen_count: usize, kind: WalkKind, seed: u64) -> Result<Self, EngineError> {
        if gen_count == 0 {
            return Err(EngineError::Config("need at least one generator".into()));
        }
        if kind == WalkKind::NonBacktracking && 2 * gen_count - 1 < 2 {
            return Err(EngineError::TooFewSymbols(gen_count));
        }
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            symbols: 2 * gen_count,
            kind,
            last: None,
        })
    }
}

impl Iterator for WordStream {
    type Item = Letter;

    fn next(&mut self) -> Option<Letter> {
        let letter = match (self.kind, self.last) {
            (WalkKind::NonBacktracking, Some(prev)) => {
                // uniform over the symbols other than the inverse of the last one
                let forbidden = prev.inverse().symbol();
                let mut s = self.rng.gen_range(0..self.symbols - 1);
                if s >= forbidden {
                    s += 1;
                }
                Letter::from_symbol(s)
            }
            (WalkKind::IidPositive, _) => Letter::new(self.rng.gen_range(0..self.symbols / 2), false),
            _ => Letter::from_symbol(self.rng.gen_range(0..self.symbols)),
        };
        self.last = Some(letter);
        Some(letter)
    }
}

/// The stream seeded directly by `config.master_seed`.
pub fn sample_word_stream(gen_count: usize, config: &WalkConfig) -> Result<WordStream, EngineError> {
    WordStream::new(gen_count, config.walk_kind, config.master_seed)
}

/// Floating-point images of the generators (and their inverses) under a functor.
#[derive(Debug, Clone)]
pub struct Cocycle {
    pub functor: FunctorSpec,
    pub dim: usize,
    forward: Vec<DMatrix<f64>>,
    backward: Vec<DMatrix<f64>>,
}

impl Cocycle {
    /// The functor is evaluated in exact arithmetic and converted to `f64`
    /// once; integer entries convert exactly.
    pub fn new(gens: &CocycleGenerators, functor: &FunctorSpec) -> Result<Self, EngineError> {
        let dim = functor.output_dim(gens.dim)?;
        let mut forward = Vec::with_capacity(gens.generators.len());
        let mut backward = Vec::with_capacity(gens.generators.len());
        for g in &gens.generators {
            forward.push(apply_functor_exact(&g.matrix, functor)?.to_f64());
            backward.push(apply_functor_exact(&g.inverse, functor)?.to_f64());
        }
        Ok(Self {
            functor: functor.clone(),
            dim,
            forward,
            backward,
        })
    }

    /// From floating-point matrices; inverses are computed numerically.
    pub fn from_float(matrices: Vec<DMatrix<f64>>) -> Result<Self, EngineError> {
        let dim = matrices.first().map_or(0, DMatrix::nrows);
        let backward = matrices
            .iter()
            .map(|m| m.clone().try_inverse().ok_or(EngineError::Singular { block: 0, step: 0 }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            functor: FunctorSpec::Identity,
            dim,
            forward: matrices,
            backward,
        })
    }

    pub fn generator_count(&self) -> usize {
        self.forward.len()
    }

    fn matrix(&self, letter: Letter) -> &DMatrix<f64> {
        if letter.is_inverse() {
            &self.backward[letter.generator()]
        } else {
            &self.forward[letter.generator()]
        }
    }
}

struct FrameState {
    frame: DMatrix<f64>,
    scratch: DMatrix<f64>,
    acc: Vec<f64>,
}

impl FrameState {
    fn new(dim: usize) -> Self {
        Self {
            frame: DMatrix::identity(dim, dim),
            scratch: DMatrix::zeros(dim, dim),
            acc: vec![0.0; dim],
        }
    }

    /// QR with positive `R` diagonal; returns `log rᵢᵢ` into `acc` when asked.
    fn renormalize(&mut self, accumulate: bool) -> Result<(), ()> {
        if self.frame.iter().any(|x| !x.is_finite() || x.abs() > BLOW_UP_THRESHOLD) {
            return Err(());
        }
        let (mut q, r) = self.frame.clone().qr().unpack();
        for i in 0..r.nrows() {
            let d = r[(i, i)];
            if d == 0.0 || !d.is_finite() {
                return Err(());
            }
            if d < 0.0 {
                q.column_mut(i).neg_mut();
            }
            if accumulate {
                self.acc[i] += d.abs().ln();
            }
        }
        self.frame = q;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockFailure {
    BlowUp(usize),
    Singular(usize),
}

/// Run one block over a word of length `burn_in + steps`; per-cocycle
/// accumulated log growth divided by `steps`.
fn run_block(
    cocycles: &[Cocycle],
    word: impl Iterator<Item = Letter>,
    burn_in: usize,
    steps: usize,
    renorm_interval: usize,
) -> Result<Vec<Vec<f64>>, BlockFailure> {
    let mut states: Vec<FrameState> = cocycles.iter().map(|c| FrameState::new(c.dim)).collect();
    let total = burn_in + steps;
    let mut since_qr = 0;
    for (t, letter) in word.take(total).enumerate() {
        for (state, cocycle) in states.iter_mut().zip(cocycles) {
            state.scratch.gemm(1.0, cocycle.matrix(letter), &state.frame, 0.0);
            std::mem::swap(&mut state.scratch, &mut state.frame);
        }
        since_qr += 1;
        let done = t + 1;
        if since_qr == renorm_interval || done == burn_in || done == total {
            let accumulate = done > burn_in;
            for state in &mut states {
                state.renormalize(accumulate).map_err(|()| {
                    if state.frame.iter().all(|x| x.is_finite() && x.abs() <= BLOW_UP_THRESHOLD) {
                        BlockFailure::Singular(t)
                    } else {
                        BlockFailure::BlowUp(t)
                    }
                })?;
            }
            since_qr = 0;
        }
    }
    let denom = steps as f64;
    Ok(states
        .into_iter()
        .map(|s| s.acc.into_iter().map(|a| a / denom).collect())
        .collect())
}

/// Exponents of a single cocycle along an explicit word (no blocks, no
/// sorting). The first `burn_in` letters are applied but not accumulated.
pub fn exponents_along_word(
    cocycle: &Cocycle,
    word: &[Letter],
    burn_in: usize,
    renorm_interval: usize,
) -> Result<Vec<f64>, EngineError> {
    if word.len() <= burn_in || renorm_interval == 0 {
        return Err(EngineError::Config("word must be longer than the burn-in".into()));
    }
    let steps = word.len() - burn_in;
    run_block(
        std::slice::from_ref(cocycle),
        word.iter().copied(),
        burn_in,
        steps,
        renorm_interval,
    )
    .map(|mut v| v.remove(0))
    .map_err(|f| match f {
        BlockFailure::BlowUp(step) => EngineError::BlowUp {
            block: 0,
            step,
            renorm_interval,
        },
        BlockFailure::Singular(step) => EngineError::Singular { block: 0, step },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub dataset: String,
    pub functor: FunctorSpec,
    /// Sorted descending.
    pub exponents: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// `blocks × dim`, columns permuted to match `exponents`.
    pub block_estimates: Vec<Vec<f64>>,
    pub steps_used: usize,
    pub config: WalkConfig,
}

impl EstimationResult {
    fn from_blocks(
        dataset: &str,
        functor: &FunctorSpec,
        blocks: Vec<Vec<f64>>,
        config: &WalkConfig,
    ) -> Self {
        let dim = blocks.first().map_or(0, Vec::len);
        let (means, ses) = column_mean_and_se(&blocks, dim);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| means[b].total_cmp(&means[a]));
        Self {
            dataset: dataset.to_string(),
            functor: functor.clone(),
            exponents: order.iter().map(|&i| means[i]).collect(),
            std_errors: order.iter().map(|&i| ses[i]).collect(),
            block_estimates: blocks
                .iter()
                .map(|row| order.iter().map(|&i| row[i]).collect())
                .collect(),
            steps_used: config.steps,
            config: config.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn spectrum(&self) -> Spectrum<f64> {
        Spectrum::new(self.exponents.clone())
    }

    /// `index,value,std_error`, one exponent per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,value,std_error\n");
        for (i, (v, se)) in self.exponents.iter().zip(&self.std_errors).enumerate() {
            let _ = writeln!(out, "{},{:?},{:?}", i + 1, v, se);
        }
        out
    }
}

/// Per-column mean and standard error of the mean (sample standard
/// deviation over `√blocks`; zero for a single block).
pub fn column_mean_and_se(rows: &[Vec<f64>], dim: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut means = vec![0.0; dim];
    for row in rows {
        for (m, x) in means.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let ses = (0..dim)
        .map(|j| {
            if rows.len() < 2 {
                return 0.0;
            }
            let ss: f64 = rows.iter().map(|r| (r[j] - means[j]).powi(2)).sum();
            (ss / (n - 1.0) / n).sqrt()
        })
        .collect();
    (means, ses)
}

/// Estimate the spectrum of the generators' cocycle.
pub fn estimate_exponents(gens: &CocycleGenerators, config: &WalkConfig) -> Result<EstimationResult, EngineError> {
    let mut out = coupled_estimate(gens, &[FunctorSpec::Identity], config)?;
    Ok(out.remove(0))
}

/// One estimate per functor, all driven by the same word stream in every
/// block. The identity functor is prepended when absent.
pub fn coupled_estimate(
    gens: &CocycleGenerators,
    functors: &[FunctorSpec],
    config: &WalkConfig,
) -> Result<Vec<EstimationResult>, EngineError> {
    config.validate()?;
    let mut specs = functors.to_vec();
    if !specs.contains(&FunctorSpec::Identity) {
        specs.insert(0, FunctorSpec::Identity);
    }
    let cocycles = specs
        .iter()
        .map(|f| Cocycle::new(gens, f))
        .collect::<Result<Vec<_>, _>>()?;
    let per_block = estimate_blocks(&cocycles, config)?;
    Ok(specs
        .iter()
        .enumerate()
        .map(|(c, spec)| {
            let blocks = per_block.iter().map(|b| b[c].clone()).collect();
            EstimationResult::from_blocks(&gens.name, spec, blocks, config)
        })
        .collect())
}

/// Raw block estimates `[block][cocycle][coordinate]`, merged in block order.
pub fn estimate_blocks(cocycles: &[Cocycle], config: &WalkConfig) -> Result<Vec<Vec<Vec<f64>>>, EngineError> {
    config.validate()?;
    let gen_count = cocycles.first().map_or(0, Cocycle::generator_count);
    // fail early on configuration errors
    WordStream::new(gen_count, config.walk_kind, 0)?;
    let steps = config.steps_per_block();
    (0..config.blocks)
        .into_par_iter()
        .map(|b| {
            let stream = WordStream::new(gen_count, config.walk_kind, block_seed(config.master_seed, b))?;
            run_block(cocycles, stream, config.burn_in, steps, config.renorm_interval).map_err(|f| match f {
                BlockFailure::BlowUp(step) => EngineError::BlowUp {
                    block: b,
                    step,
                    renorm_interval: config.renorm_interval,
                },
                BlockFailure::Singular(step) => EngineError::Singular { block: b, step },
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpectrumHints {
    pub expect_zero: bool,
    pub expect_symmetry: bool,
    pub expect_g2_additivity: bool,
}

impl SpectrumHints {
    /// Everything the G₂ standard representation forces.
    pub fn g2_standard() -> Self {
        Self {
            expect_zero: true,
            expect_symmetry: true,
            expect_g2_additivity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub tol_sigma: f64,
    pub hints: SpectrumHints,
    /// `max |λᵢ + λ_{d+1−i}|`.
    pub symmetry_defect: f64,
    pub symmetry_pass: Option<bool>,
    /// `|median exponent|`, odd dimension only.
    pub zero_defect: Option<f64>,
    /// Exponents within `tol_sigma` standard errors of zero.
    pub zero_count: usize,
    pub zero_pass: Option<bool>,
    /// `|λ₁ − λ₂ − λ₃|`.
    pub additivity_defect: Option<f64>,
    pub additivity_pass: Option<bool>,
    /// Consecutive differences of the positive exponents in combined-SE units.
    pub gap_zscores: Vec<f64>,
    pub gap_pass: bool,
    pub exponent_sum: f64,
}

impl DiagnosticsReport {
    pub fn all_pass(&self) -> bool {
        self.gap_pass
            && [self.symmetry_pass, self.zero_pass, self.additivity_pass]
                .iter()
                .all(|p| p.unwrap_or(true))
    }
}

fn combined(ses: &[f64]) -> f64 {
    ses.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// `|x| ≤ tol·se`, robust to `se = 0`.
fn within(x: f64, tol_sigma: f64, se: f64) -> bool {
    x.abs() <= tol_sigma * se
}

/// Structural checks on an estimated spectrum.
pub fn analyze_spectrum(
    result: &EstimationResult,
    hints: SpectrumHints,
    tol_sigma: f64,
) -> Result<DiagnosticsReport, EngineError> {
    let l = &result.exponents;
    let se = &result.std_errors;
    let d = l.len();
    if se.len() != d {
        return Err(EngineError::Config("std_errors missing".into()));
    }
    if hints.expect_zero && d.is_multiple_of(2) {
        return Err(EngineError::InconsistentHints {
            dim: d,
            reason: "a forced zero exponent needs odd dimension".into(),
        });
    }
    if hints.expect_g2_additivity && d < 3 {
        return Err(EngineError::InconsistentHints {
            dim: d,
            reason: "additivity needs at least three exponents".into(),
        });
    }

    let pairs: Vec<(usize, usize)> = (0..d / 2).map(|i| (i, d - 1 - i)).collect();
    let symmetry_defect = pairs
        .iter()
        .map(|&(i, j)| (l[i] + l[j]).abs())
        .fold(0.0, f64::max);
    let symmetry_pass = hints.expect_symmetry.then(|| {
        pairs
            .iter()
            .all(|&(i, j)| within(l[i] + l[j], tol_sigma, combined(&[se[i], se[j]])))
    });

    let zero_defect = (d % 2 == 1).then(|| l[d / 2].abs());
    let zero_count = (0..d).filter(|&i| within(l[i], tol_sigma, se[i])).count();
    let zero_pass = hints.expect_zero.then_some(zero_count == 1);

    let additivity_defect = (d >= 3).then(|| (l[0] - l[1] - l[2]).abs());
    let additivity_pass = hints.expect_g2_additivity.then(|| {
        within(l[0] - l[1] - l[2], tol_sigma, combined(&se[..3]))
    });

    let positive = if hints.expect_symmetry {
        d / 2
    } else {
        (0..d).take_while(|&i| l[i] > 0.0 && !within(l[i], tol_sigma, se[i])).count()
    };
    let gap_zscores: Vec<f64> = (1..positive)
        .map(|i| {
            let diff = l[i - 1] - l[i];
            let s = combined(&[se[i - 1], se[i]]);
            if s > 0.0 {
                diff / s
            } else if diff > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .collect();
    let gap_pass = gap_zscores.iter().all(|&z| z > tol_sigma);

    Ok(DiagnosticsReport {
        tol_sigma,
        hints,
        symmetry_defect,
        symmetry_pass,
        zero_defect,
        zero_count,
        zero_pass,
        additivity_defect,
        additivity_pass,
        gap_zscores,
        gap_pass,
        exponent_sum: l.iter().sum(),
    })
}

/// Differences at or below this are treated as agreement even when both
/// standard errors vanish (deterministic cocycles).
pub const EXACT_AGREEMENT: f64 = 1e-12;

/// Entrywise confrontation of two sorted spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumComparison {
    pub label: String,
    pub reference: Vec<f64>,
    pub estimated: Vec<f64>,
    /// `√(se_ref² + se_est²)` per entry.
    pub combined_std_errors: Vec<f64>,
    pub zscores: Vec<f64>,
    pub max_abs_defect: f64,
    pub max_zscore: f64,
    pub tol_sigma: f64,
    pub passed: bool,
}

impl SpectrumComparison {
    fn build(
        label: String,
        reference: Vec<f64>,
        reference_se: &[f64],
        estimated: &EstimationResult,
        tol_sigma: f64,
    ) -> Result<Self, EngineError> {
        if reference.len() != estimated.dim() {
            return Err(EngineError::Config(format!(
                "{label}: comparing {} reference values with {} estimates",
                reference.len(),
                estimated.dim()
            )));
        }
        let combined_std_errors: Vec<f64> = reference_se
            .iter()
            .zip(&estimated.std_errors)
            .map(|(a, b)| combined(&[*a, *b]))
            .collect();
        let diffs: Vec<f64> = reference.iter().zip(&estimated.exponents).map(|(a, b)| b - a).collect();
        let zscores: Vec<f64> = diffs
            .iter()
            .zip(&combined_std_errors)
            .map(|(&d, &s)| {
                if d.abs() <= EXACT_AGREEMENT {
                    0.0
                } else if s > 0.0 {
                    d / s
                } else {
                    d.signum() * f64::INFINITY
                }
            })
            .collect();
        let passed = diffs
            .iter()
            .zip(&combined_std_errors)
            .all(|(&d, &s)| d.abs() <= EXACT_AGREEMENT || within(d, tol_sigma, s));
        Ok(Self {
            label,
            max_abs_defect: diffs.iter().fold(0.0, |m, d| m.max(d.abs())),
            max_zscore: zscores.iter().fold(0.0, |m, z| m.max(z.abs())),
            reference,
            estimated: estimated.exponents.clone(),
            combined_std_errors,
            zscores,
            tol_sigma,
            passed,
        })
    }
}

/// Compare the spectrum of `f(V)` with the one predicted from the spectrum of
/// `V`. Predictions are formed block by block, so their standard errors come
/// from the same block layout; sorting happens after averaging.
pub fn functor_consistency(
    identity: &EstimationResult,
    image: &EstimationResult,
    tol_sigma: f64,
) -> Result<SpectrumComparison, EngineError> {
    let dim = identity.dim();
    let rows = exponent_combinations(&image.functor, dim)?;
    let blocks: Vec<Vec<f64>> = identity
        .block_estimates
        .iter()
        .map(|b| {
            rows.iter()
                .map(|r| r.iter().zip(b).map(|(&c, x)| c as f64 * x).sum())
                .collect()
        })
        .collect();
    let (means, ses) = column_mean_and_se(&blocks, rows.len());
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| means[b].total_cmp(&means[a]));
    SpectrumComparison::build(
        format!("{} vs identity", image.functor),
        order.iter().map(|&i| means[i]).collect(),
        &order.iter().map(|&i| ses[i]).collect::<Vec<_>>(),
        image,
        tol_sigma,
    )
}

/// Agreement of two independent runs, entry by entry.
pub fn compare_runs(a: &EstimationResult, b: &EstimationResult, tol_sigma: f64) -> Result<SpectrumComparison, EngineError> {
    SpectrumComparison::build(
        format!("seed {} vs seed {}", b.config.master_seed, a.config.master_seed),
        a.exponents.clone(),
        &a.std_errors,
        b,
        tol_sigma,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::{rat, ratio, ExactMatrix};
    use crate::monodromy_dataset::DatasetMetadata;

    fn dataset(mats: Vec<ExactMatrix>) -> CocycleGenerators {
        let meta = DatasetMetadata {
            genus: 0,
            punctures: 3,
            hodge_numbers: vec![],
        };
        let labelled = mats.into_iter().enumerate().map(|(i, m)| (format!("g{i}"), m)).collect();
        CocycleGenerators::new("test", labelled, meta).unwrap()
    }

    fn exact_result(values: &[f64]) -> EstimationResult {
        EstimationResult {
            dataset: "exact".into(),
            functor: FunctorSpec::Identity,
            exponents: values.to_vec(),
            std_errors: vec![0.0; values.len()],
            block_estimates: vec![values.to_vec()],
            steps_used: 1,
            config: WalkConfig::default(),
        }
    }

    #[test]
    fn exterior_square_of_diagonal_is_consistent() {
        let g = dataset(vec![ExactMatrix::diagonal(&[rat(2), rat(1), ratio(1, 2)])]);
        let cfg = WalkConfig {
            walk_kind: WalkKind::IidUniform,
            steps: 2000,
            blocks: 2,
            burn_in: 0,
            ..WalkConfig::default()
        };
        let rs = coupled_estimate(&g, &[FunctorSpec::ExteriorPower(2)], &cfg).unwrap();
        let cmp = functor_consistency(&rs[0], &rs[1], 3.0).unwrap();
        assert!(cmp.passed, "{cmp:?}");
        assert_eq!(cmp.reference.len(), 3);
    }

    #[test]
    fn comparison_flags_disagreement() {
        let a = exact_result(&[1.0, 0.0, -1.0]);
        let mut b = exact_result(&[1.0, 0.0, -1.0]);
        assert!(compare_runs(&a, &b, 3.0).unwrap().passed);
        b.exponents[0] = 1.1;
        b.std_errors = vec![0.01; 3];
        let cmp = compare_runs(&a, &b, 3.0).unwrap();
        assert!(!cmp.passed);
        assert!((cmp.zscores[0] - 10.0).abs() < 1e-9);
        let short = exact_result(&[1.0]);
        assert!(compare_runs(&a, &short, 3.0).is_err());
    }

    #[test]
    fn single_generator_iid_uses_two_symbols() {
        let cfg = WalkConfig {
            walk_kind: WalkKind::IidUniform,
            ..WalkConfig::default()
        };
        let stream = sample_word_stream(1, &cfg).unwrap();
        let seen: std::collections::BTreeSet<i32> = stream.take(1000).map(Letter::signed).collect();
        assert_eq!(seen, [-1, 1].into_iter().collect());
    }

    #[test]
    fn single_generator_non_backtracking_is_rejected() {
        let cfg = WalkConfig::default();
        assert!(matches!(sample_word_stream(1, &cfg), Err(EngineError::TooFewSymbols(1))));
    }

    #[test]
    fn non_backtracking_never_cancels() {
        let cfg = WalkConfig {
            master_seed: 7,
            ..WalkConfig::default()
        };
        let word: Vec<Letter> = sample_word_stream(4, &cfg).unwrap().take(10_000).collect();
        assert!(word.windows(2).all(|w| w[1] != w[0].inverse()));
        // all eight symbols are used
        let symbols: std::collections::BTreeSet<usize> = word.iter().map(|l| l.symbol()).collect();
        assert_eq!(symbols.len(), 8);
    }

    #[test]
    fn streams_are_deterministic() {
        let cfg = WalkConfig {
            master_seed: 42,
            ..WalkConfig::default()
        };
        let a: Vec<Letter> = sample_word_stream(4, &cfg).unwrap().take(10_000).collect();
        let b: Vec<Letter> = sample_word_stream(4, &cfg).unwrap().take(10_000).collect();
        assert_eq!(a, b);
        let other = WalkConfig {
            master_seed: 43,
            ..cfg
        };
        let c: Vec<Letter> = sample_word_stream(4, &other).unwrap().take(10_000).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn block_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..100).map(|b| block_seed(42, b)).collect();
        assert_eq!(seeds.len(), 100);
    }

    #[test]
    fn config_validation() {
        let bad = WalkConfig {
            steps: 1001,
            blocks: 20,
            ..WalkConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = WalkConfig {
            renorm_interval: 0,
            ..WalkConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn diagonal_single_generator_is_exact() {
        let gens = dataset(vec![ExactMatrix::diagonal(&[rat(4), rat(1), ratio(1, 4)])]);
        let cfg = WalkConfig {
            walk_kind: WalkKind::IidUniform,
            steps: 10_000,
            blocks: 20,
            ..WalkConfig::default()
        };
        // with iid letters the generator and its inverse appear, so drive the
        // cocycle along the positive word directly
        let cocycle = Cocycle::new(&gens, &FunctorSpec::Identity).unwrap();
        let word = vec![Letter::new(0, false); 10_000 + cfg.burn_in];
        let ex = exponents_along_word(&cocycle, &word, cfg.burn_in, 1).unwrap();
        let ln4 = 4f64.ln();
        assert!((ex[0] - ln4).abs() < 1e-12);
        assert!(ex[1].abs() < 1e-12);
        assert!((ex[2] + ln4).abs() < 1e-12);
    }

    #[test]
    fn blow_up_is_reported() {
        let gens = dataset(vec![ExactMatrix::diagonal(&[rat(1_000_000), ratio(1, 1_000_000)])]);
        let cocycle = Cocycle::new(&gens, &FunctorSpec::Identity).unwrap();
        let word = vec![Letter::new(0, false); 200];
        let err = exponents_along_word(&cocycle, &word, 0, 100).unwrap_err();
        assert!(matches!(err, EngineError::BlowUp { .. }), "{err}");
        assert!(err.to_string().contains("renorm_interval"));
    }

    #[test]
    fn diagnostics_on_exact_input() {
        let r = exact_result(&[5.0, 4.0, 1.0, 0.0, -1.0, -4.0, -5.0]);
        let d = analyze_spectrum(&r, SpectrumHints::g2_standard(), 3.0).unwrap();
        assert_eq!(d.symmetry_defect, 0.0);
        assert_eq!(d.zero_defect, Some(0.0));
        assert_eq!(d.additivity_defect, Some(0.0));
        assert_eq!(d.zero_count, 1);
        assert!(d.all_pass());
    }

    #[test]
    fn diagnostics_on_symmetric_pair() {
        let r = exact_result(&[1.0, -1.0]);
        let hints = SpectrumHints {
            expect_symmetry: true,
            ..SpectrumHints::default()
        };
        let d = analyze_spectrum(&r, hints, 3.0).unwrap();
        assert_eq!(d.symmetry_defect, 0.0);
        assert_eq!(d.symmetry_pass, Some(true));
    }

    #[test]
    fn inconsistent_hints() {
        let r = exact_result(&[1.0, -1.0]);
        let hints = SpectrumHints {
            expect_zero: true,
            ..SpectrumHints::default()
        };
        assert!(matches!(
            analyze_spectrum(&r, hints, 3.0),
            Err(EngineError::InconsistentHints { dim: 2, .. })
        ));
    }

    #[test]
    fn broken_additivity_fails() {
        let r = exact_result(&[5.0, 3.0, 1.0, 0.0, -1.0, -3.0, -5.0]);
        let d = analyze_spectrum(&r, SpectrumHints::g2_standard(), 3.0).unwrap();
        assert_eq!(d.additivity_pass, Some(false));
        assert_eq!(d.additivity_defect, Some(1.0));
    }

    #[test]
    fn csv_layout() {
        let r = exact_result(&[0.5, -0.5]);
        assert_eq!(r.to_csv(), "index,value,std_error\n1,0.5,0.0\n2,-0.5,0.0\n");
    }
}
