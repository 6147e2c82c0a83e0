//! Built-in monodromy datasets and their exact certification.
//!
//! The G₂ dataset holds the four local monodromies of a rank-7 weight-2
//! variation over the sphere punctured at `0, ±2/(3√3), ∞`. Matrices are kept
//! in JSON assets with integer entries, and each asset is pinned by a SHA-256
//! checksum.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::exact_linalg::{
    invariant_bilinear_matrices, invariant_trilinear_space, primitive_integer_vector, rat,
    ExactMatrix, FormParity, LinalgError, Rational, Signature, SymmetricBilinearForm,
};

const G2_ASSET: &str = include_str!("../assets/g2-elliptic-surface.json");
const G2_SHA256: &str = "63d316b35af03dafeeba36ea0bbbf9364de5b53cf5e3791bdc0cf808578d8ebc";
const SL2_ASSET: &str = include_str!("../assets/sl2-sanity.json");
const SL2_SHA256: &str = "3a43f0dcb6b2479b19311bdf97dbebbd5b0991b233fb3d64fef324a5dd14a023";

/// Longest word length [`find_relations`] will enumerate.
pub const MAX_RELATION_LENGTH: usize = 8;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("unknown dataset `{0}` (expected `g2-elliptic-surface` or `sl2-sanity`)")]
    UnknownDataset(String),
    #[error("checksum mismatch for built-in dataset `{name}`: expected {expected}, found {found}")]
    ChecksumMismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error("malformed dataset: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read dataset file: {0}")]
    Io(#[from] std::io::Error),
    #[error("dataset declares dim {declared} but generator `{label}` is {rows}x{cols}")]
    WrongShape {
        label: String,
        declared: usize,
        rows: usize,
        cols: usize,
    },
    #[error("generator `{0}` is singular")]
    Singular(String),
    #[error("duplicate generator label `{0}`")]
    DuplicateLabel(String),
    #[error("dataset has no generators")]
    Empty,
    #[error("relation search length {requested} exceeds the limit {MAX_RELATION_LENGTH}")]
    RelationLengthTooLarge { requested: usize },
    #[error("relation search needs integral generators and inverses")]
    NonIntegral,
    #[error("integer overflow while multiplying words")]
    Overflow,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinDataset {
    G2EllipticSurface,
    Sl2Sanity,
}

impl BuiltinDataset {
    pub const ALL: [BuiltinDataset; 2] = [Self::G2EllipticSurface, Self::Sl2Sanity];

    pub fn name(self) -> &'static str {
        match self {
            Self::G2EllipticSurface => "g2-elliptic-surface",
            Self::Sl2Sanity => "sl2-sanity",
        }
    }

    pub fn asset(self) -> &'static str {
        match self {
            Self::G2EllipticSurface => G2_ASSET,
            Self::Sl2Sanity => SL2_ASSET,
        }
    }

    pub fn expected_checksum(self) -> &'static str {
        match self {
            Self::G2EllipticSurface => G2_SHA256,
            Self::Sl2Sanity => SL2_SHA256,
        }
    }
}

impl FromStr for BuiltinDataset {
    type Err = DatasetError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| DatasetError::UnknownDataset(s.to_string()))
    }
}

impl fmt::Display for BuiltinDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// On-disk dataset format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetAsset {
    pub name: String,
    pub dim: usize,
    pub generators: Vec<GeneratorAsset>,
    pub metadata: DatasetMetadata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorAsset {
    pub label: String,
    pub rows: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMetadata {
    pub genus: u32,
    pub punctures: u32,
    pub hodge_numbers: Vec<u32>,
}

impl DatasetMetadata {
    /// Hodge weight `n`, read off from the number of Hodge numbers.
    pub fn weight(&self) -> usize {
        self.hodge_numbers.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub label: String,
    pub matrix: ExactMatrix,
    pub inverse: ExactMatrix,
}

/// A named, ordered list of invertible generators of a matrix cocycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleGenerators {
    pub name: String,
    pub dim: usize,
    pub generators: Vec<Generator>,
    pub metadata: DatasetMetadata,
    /// SHA-256 of the JSON text the dataset was read from, if any.
    pub checksum: Option<String>,
}

impl CocycleGenerators {
    pub fn new(
        name: impl Into<String>,
        generators: Vec<(String, ExactMatrix)>,
        metadata: DatasetMetadata,
    ) -> Result<Self, DatasetError> {
        let dim = generators.first().ok_or(DatasetError::Empty)?.1.rows();
        let mut seen = HashSet::new();
        let generators = generators
            .into_iter()
            .map(|(label, matrix)| {
                if matrix.rows() != dim || matrix.cols() != dim {
                    return Err(DatasetError::WrongShape {
                        label,
                        declared: dim,
                        rows: matrix.rows(),
                        cols: matrix.cols(),
                    });
                }
                if !seen.insert(label.clone()) {
                    return Err(DatasetError::DuplicateLabel(label));
                }
                let inverse = matrix
                    .inverse()
                    .map_err(|_| DatasetError::Singular(label.clone()))?;
                Ok(Generator {
                    label,
                    matrix,
                    inverse,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            name: name.into(),
            dim,
            generators,
            metadata,
            checksum: None,
        })
    }

    pub fn from_asset(asset: DatasetAsset) -> Result<Self, DatasetError> {
        let declared = asset.dim;
        let gens = asset
            .generators
            .into_iter()
            .map(|g| {
                let m = ExactMatrix::from_integers(&g.rows)?;
                if m.rows() != declared || m.cols() != declared {
                    return Err(DatasetError::WrongShape {
                        label: g.label,
                        declared,
                        rows: m.rows(),
                        cols: m.cols(),
                    });
                }
                Ok((g.label, m))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(asset.name, gens, asset.metadata)
    }

    pub fn from_json_str(text: &str) -> Result<Self, DatasetError> {
        let asset: DatasetAsset = serde_json::from_str(text)?;
        let mut out = Self::from_asset(asset)?;
        out.checksum = Some(sha256_hex(text.as_bytes()));
        Ok(out)
    }

    pub fn from_file(path: &Path) -> Result<Self, DatasetError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Back to the asset form. Fails only if an entry is not an `i64`.
    pub fn to_asset(&self) -> Option<DatasetAsset> {
        Some(DatasetAsset {
            name: self.name.clone(),
            dim: self.dim,
            generators: self
                .generators
                .iter()
                .map(|g| {
                    Some(GeneratorAsset {
                        label: g.label.clone(),
                        rows: g.matrix.to_integers()?,
                    })
                })
                .collect::<Option<Vec<_>>>()?,
            metadata: self.metadata.clone(),
        })
    }

    pub fn labels(&self) -> Vec<&str> {
        self.generators.iter().map(|g| g.label.as_str()).collect()
    }

    pub fn matrices(&self) -> Vec<ExactMatrix> {
        self.generators.iter().map(|g| g.matrix.clone()).collect()
    }

    /// The dataset restricted to the named generators, in their original order.
    pub fn subset(&self, labels: &[String]) -> Self {
        let keep: HashSet<&str> = labels.iter().map(String::as_str).collect();
        Self {
            name: format!("{}[{}]", self.name, labels.join(",")),
            dim: self.dim,
            generators: self
                .generators
                .iter()
                .filter(|g| keep.contains(g.label.as_str()))
                .cloned()
                .collect(),
            metadata: self.metadata.clone(),
            checksum: self.checksum.clone(),
        }
    }

    /// Render a word as `A B^-1 C`.
    pub fn format_word(&self, word: &[Letter]) -> String {
        word.iter()
            .map(|l| {
                let label = &self.generators[l.generator()].label;
                if l.is_inverse() {
                    format!("{label}^-1")
                } else {
                    label.clone()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_builtin(which: BuiltinDataset) -> Result<CocycleGenerators, DatasetError> {
    let text = which.asset();
    let found = sha256_hex(text.as_bytes());
    if found != which.expected_checksum() {
        return Err(DatasetError::ChecksumMismatch {
            name: which.name().to_string(),
            expected: which.expected_checksum().to_string(),
            found,
        });
    }
    CocycleGenerators::from_json_str(text)
}

/// Built-in name or path to a JSON asset.
pub fn load_dataset(reference: &str) -> Result<CocycleGenerators, DatasetError> {
    match reference.parse::<BuiltinDataset>() {
        Ok(b) => load_builtin(b),
        Err(e) => {
            let path = Path::new(reference);
            if path.exists() {
                CocycleGenerators::from_file(path)
            } else {
                Err(e)
            }
        }
    }
}

/// A generator or its inverse, encoded as a nonzero signed index: `+(g+1)`
/// for generator `g`, `−(g+1)` for its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        let i = generator as i32 + 1;
        Self(if inverse { -i } else { i })
    }

    pub fn from_signed(value: i32) -> Option<Self> {
        (value != 0).then_some(Self(value))
    }

    /// Position among the `2n` symbols, ordered `g₀, g₀⁻¹, g₁, g₁⁻¹, …`.
    pub fn from_symbol(symbol: usize) -> Self {
        Self::new(symbol / 2, symbol % 2 == 1)
    }

    pub fn symbol(self) -> usize {
        2 * self.generator() + usize::from(self.is_inverse())
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn generator(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Self(-self.0)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.0)
    }
}

/// Least `k ≤ dim` with `(M − I)^k = 0`, if `M` is unipotent.
pub fn unipotency_index(m: &ExactMatrix) -> Option<usize> {
    let n = m.rows();
    let nil = m - &ExactMatrix::identity(n);
    let mut power = nil.clone();
    for k in 1..=n.max(1) {
        if power.is_zero() {
            return Some(k);
        }
        power = &power * &nil;
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub word: String,
    pub letters: Vec<i32>,
    /// `+1` if the word evaluates to the identity, `−1` for minus the identity.
    pub sign: i8,
}

type IntMatrix = Vec<i128>;

fn int_matrix(m: &ExactMatrix) -> Option<IntMatrix> {
    m.to_integers()
        .map(|rows| rows.into_iter().flatten().map(i128::from).collect())
}

fn int_mul(a: &IntMatrix, b: &IntMatrix, n: usize) -> Option<IntMatrix> {
    let mut out = vec![0i128; n * n];
    for i in 0..n {
        for k in 0..n {
            let x = a[i * n + k];
            if x == 0 {
                continue;
            }
            for j in 0..n {
                let t = x.checked_mul(b[k * n + j])?;
                out[i * n + j] = out[i * n + j].checked_add(t)?;
            }
        }
    }
    Some(out)
}

fn scalar_identity_sign(m: &IntMatrix, n: usize) -> Option<i8> {
    let d = m[0];
    if d != 1 && d != -1 {
        return None;
    }
    let ok = (0..n).all(|i| (0..n).all(|j| m[i * n + j] == if i == j { d } else { 0 }));
    ok.then_some(d as i8)
}

/// All nonempty reduced words of length at most `max_len` over the generators
/// and their inverses that evaluate to `±I`, in shortlex order with symbols
/// ordered `g₀, g₀⁻¹, g₁, g₁⁻¹, …`.
pub fn find_relations(gens: &CocycleGenerators, max_len: usize) -> Result<Vec<Relation>, DatasetError> {
    if max_len > MAX_RELATION_LENGTH {
        return Err(DatasetError::RelationLengthTooLarge { requested: max_len });
    }
    let n = gens.dim;
    let symbols: Vec<IntMatrix> = (0..2 * gens.generators.len())
        .map(|s| {
            let g = &gens.generators[s / 2];
            int_matrix(if s % 2 == 0 { &g.matrix } else { &g.inverse })
        })
        .collect::<Option<_>>()
        .ok_or(DatasetError::NonIntegral)?;

    let mut found: Vec<(Vec<Letter>, i8)> = Vec::new();
    let mut word: Vec<Letter> = Vec::with_capacity(max_len);
    let identity: IntMatrix = (0..n * n).map(|k| i128::from(k / n == k % n)).collect();

    fn dfs(
        prefix: &IntMatrix,
        word: &mut Vec<Letter>,
        symbols: &[IntMatrix],
        n: usize,
        max_len: usize,
        found: &mut Vec<(Vec<Letter>, i8)>,
    ) -> Result<(), DatasetError> {
        if word.len() == max_len {
            return Ok(());
        }
        for (s, m) in symbols.iter().enumerate() {
            let letter = Letter::from_symbol(s);
            if word.last() == Some(&letter.inverse()) {
                continue;
            }
            let next = int_mul(prefix, m, n).ok_or(DatasetError::Overflow)?;
            word.push(letter);
            if let Some(sign) = scalar_identity_sign(&next, n) {
                found.push((word.clone(), sign));
            }
            dfs(&next, word, symbols, n, max_len, found)?;
            word.pop();
        }
        Ok(())
    }

    dfs(&identity, &mut word, &symbols, n, max_len, &mut found)?;
    found.sort_by(|(a, _), (b, _)| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.iter().map(|l| l.symbol()).cmp(b.iter().map(|l| l.symbol())))
    });
    Ok(found
        .into_iter()
        .map(|(w, sign)| Relation {
            word: gens.format_word(&w),
            letters: w.iter().map(|l| l.signed()).collect(),
            sign,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub label: String,
    pub determinant: String,
    pub unipotency_index: Option<usize>,
    pub integral_inverse: bool,
    /// Whether `MᵀQM − Q` vanishes for every basis form found (exactly).
    pub bilinear_residual_zero: bool,
    /// Whether the pullback of every invariant 3-form found equals itself.
    pub trilinear_residual_zero: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub failing_generators: Vec<String>,
    pub largest_consistent_subset: Vec<String>,
    pub fallback_generators: Vec<String>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub dataset: String,
    pub checksum: Option<String>,
    pub dim: usize,
    pub generators: Vec<GeneratorReport>,
    pub symmetric_form_dimension: usize,
    pub alternating_form_dimension: usize,
    pub trilinear_form_dimension: Option<usize>,
    /// Primitive integer representative, sign chosen so that positive ≥ negative.
    pub symmetric_form: Option<Vec<Vec<String>>>,
    pub signature: Option<Signature>,
    pub alternating_form: Option<Vec<Vec<String>>>,
    /// Nonzero coefficients `((i, j, k), c)` of a primitive integer 3-form, zero-based.
    pub three_form: Option<Vec<ThreeFormTerm>>,
    pub relation_max_len: usize,
    pub relations: Vec<Relation>,
    pub checks: Vec<Check>,
    pub discrepancy: Option<Discrepancy>,
}

/// `((i, j, k), c)` with `i < j < k`.
pub type ThreeFormTerm = ((usize, usize, usize), String);

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn integer_rows(m: &ExactMatrix) -> Vec<Vec<String>> {
    let prim = primitive_integer_vector(m.entries());
    prim.chunks(m.cols())
        .map(|row| row.iter().map(ToString::to_string).collect())
        .collect()
}

fn matrix_from_integers(n: usize, values: &[BigInt]) -> ExactMatrix {
    ExactMatrix::from_fn(n, n, |i, j| Rational::from_integer(values[i * n + j].clone()))
}

/// [`verify_invariance_with`] with relation words up to length 4.
pub fn verify_invariance(gens: &CocycleGenerators) -> Result<VerificationReport, DatasetError> {
    verify_invariance_with(gens, 4)
}

/// Exact certification of a generator set: invariant symmetric and
/// alternating bilinear forms, the signature of a symmetric generator,
/// invariant 3-forms in dimension 7, local unipotency data and short
/// relation words. Failures are recorded as checks, not returned as errors.
pub fn verify_invariance_with(
    gens: &CocycleGenerators,
    relation_max_len: usize,
) -> Result<VerificationReport, DatasetError> {
    let mats = gens.matrices();
    let n = gens.dim;
    let sym = invariant_bilinear_matrices(&mats, FormParity::Symmetric)?;
    let alt = invariant_bilinear_matrices(&mats, FormParity::Alternating)?;
    let tri = if n == 7 {
        Some(invariant_trilinear_space(&mats)?)
    } else {
        None
    };

    let (symmetric_form, signature) = match sym.as_slice() {
        [q] => {
            let prim = matrix_from_integers(n, &primitive_integer_vector(q.entries()));
            let form = SymmetricBilinearForm::new(prim)?;
            let mut sig = form.signature();
            let mut matrix = form.matrix().clone();
            if sig.negative > sig.positive {
                sig = sig.flipped();
                matrix = -&matrix;
            }
            (Some(integer_rows(&matrix)), Some(sig))
        }
        _ => (None, None),
    };
    let alternating_form = match alt.as_slice() {
        [w] => Some(integer_rows(w)),
        _ => None,
    };
    let three_form = tri.as_ref().and_then(|t| match t.as_slice() {
        [phi] => {
            let prim = primitive_integer_vector(phi.coefficients());
            let triples = crate::exact_linalg::increasing_triples(n);
            Some(
                triples
                    .into_iter()
                    .zip(prim)
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(t, c)| (t, c.to_string()))
                    .collect(),
            )
        }
        _ => None,
    });

    let generators = gens
        .generators
        .iter()
        .map(|g| {
            let bilinear_residual_zero = sym
                .iter()
                .chain(&alt)
                .all(|q| (&(&g.matrix.transpose() * q) * &g.matrix) == *q);
            GeneratorReport {
                label: g.label.clone(),
                determinant: g.matrix.determinant().map(|d| d.to_string()).unwrap_or_default(),
                unipotency_index: unipotency_index(&g.matrix),
                integral_inverse: g.inverse.is_integral(),
                bilinear_residual_zero,
                trilinear_residual_zero: tri
                    .as_ref()
                    .map(|t| t.iter().all(|phi| phi.is_invariant_under(&g.matrix))),
            }
        })
        .collect::<Vec<_>>();

    let relations = find_relations(gens, relation_max_len).unwrap_or_default();

    let mut checks = vec![Check {
        name: "exact-residuals".into(),
        passed: generators.iter().all(|g| {
            g.bilinear_residual_zero && g.trilinear_residual_zero.unwrap_or(true)
        }),
        detail: "M^T Q M - Q and phi(M.,M.,M.) - phi vanish exactly for every generator".into(),
    }];
    if gens.metadata.weight() % 2 == 1 {
        checks.push(Check {
            name: "alternating-form-unique".into(),
            passed: alt.len() == 1,
            detail: format!("invariant alternating forms: dimension {}", alt.len()),
        });
    } else {
        checks.push(Check {
            name: "symmetric-form-unique".into(),
            passed: sym.len() == 1,
            detail: format!("invariant symmetric forms: dimension {}", sym.len()),
        });
    }
    if n == 7 {
        let expected = Signature {
            positive: 4,
            zero: 0,
            negative: 3,
        };
        checks.push(Check {
            name: "signature-4-3".into(),
            passed: signature == Some(expected),
            detail: match signature {
                Some(s) => format!("signature of the invariant form {s}"),
                None => "no unique invariant symmetric form".into(),
            },
        });
        let tri_dim = tri.as_ref().map_or(0, Vec::len);
        checks.push(Check {
            name: "three-form-unique".into(),
            passed: tri_dim == 1,
            detail: format!("invariant alternating 3-forms: dimension {tri_dim}"),
        });
    }

    let mut report = VerificationReport {
        dataset: gens.name.clone(),
        checksum: gens.checksum.clone(),
        dim: n,
        symmetric_form_dimension: sym.len(),
        alternating_form_dimension: alt.len(),
        trilinear_form_dimension: tri.as_ref().map(Vec::len),
        symmetric_form,
        signature,
        alternating_form,
        three_form,
        relation_max_len,
        relations,
        generators,
        checks,
        discrepancy: None,
    };
    if !report.passed() && n == 7 {
        report.discrepancy = Some(discrepancy(gens, &report)?);
    }
    Ok(report)
}

fn discrepancy(gens: &CocycleGenerators, report: &VerificationReport) -> Result<Discrepancy, DatasetError> {
    let labels: Vec<String> = gens.labels().iter().map(|s| s.to_string()).collect();
    let k = labels.len();
    let mut best: Option<Vec<String>> = None;
    // subsets by decreasing size, then by mask order
    'outer: for size in (1..=k).rev() {
        for mask in 0u32..(1 << k) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let subset: Vec<ExactMatrix> = (0..k)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| gens.generators[i].matrix.clone())
                .collect();
            if invariant_bilinear_matrices(&subset, FormParity::Symmetric)?.len() == 1 {
                best = Some((0..k).filter(|i| mask & (1 << i) != 0).map(|i| labels[i].clone()).collect());
                break 'outer;
            }
        }
    }
    let best = best.unwrap_or_default();
    let keep: BTreeSet<&String> = best.iter().collect();
    let failing = labels.iter().filter(|l| !keep.contains(l)).cloned().collect::<Vec<_>>();
    let fallback = report
        .generators
        .iter()
        .filter(|g| g.unipotency_index.is_some())
        .map(|g| g.label.clone())
        .collect();
    Ok(Discrepancy {
        failing_generators: if failing.is_empty() { labels.clone() } else { failing },
        largest_consistent_subset: best,
        fallback_generators: fallback,
        note: "certification failed; downstream estimation uses the unipotent generators".into(),
    })
}

/// The generator set downstream estimation should use: the full set when
/// certification passed, the fallback subgroup otherwise.
pub fn downstream_generators(gens: &CocycleGenerators, report: &VerificationReport) -> CocycleGenerators {
    match &report.discrepancy {
        Some(d) if !d.fallback_generators.is_empty() => gens.subset(&d.fallback_generators),
        _ => gens.clone(),
    }
}

/// `(M − I)` support, used to sanity-check transcriptions.
pub fn off_identity_support(m: &ExactMatrix) -> Vec<(usize, usize)> {
    let n = m.rows();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { Rational::one() } else { Rational::zero() };
            if m[(i, j)] != expected {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn determinant_is_one(m: &ExactMatrix) -> bool {
    m.determinant().map(|d| d == rat(1)).unwrap_or(false)
}
