//! Manifest schema, loading and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use nlform::instance::{GenerateOptions, Instance, InstanceDoc};
use nlform::perturbed::{BetaConstants, WeightSpec};
use nlform::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum CliError {
    /// Bad manifest or input; exit status 2.
    Validation(String),
    /// Failure inside a computation; exit status 3.
    Module { context: String, source: Error },
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Module { context, source } => write!(f, "{context}: {source}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Module { .. } | CliError::Io(_) => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn module<T>(context: impl Into<String>, r: nlform::Result<T>) -> CliResult<T> {
    r.map_err(|source| CliError::Module { context: context.into(), source })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    FiniteVerify,
    LatticeSubordination,
    SharpnessScan,
    PerturbedThreshold,
    TheoremBatch,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::FiniteVerify => "finite-verify",
            Kind::LatticeSubordination => "lattice-subordination",
            Kind::SharpnessScan => "sharpness-scan",
            Kind::PerturbedThreshold => "perturbed-threshold",
            Kind::TheoremBatch => "theorem-batch",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Slack tolerance for inequality checks.
    pub tol: f64,
    /// Relative tolerance on fitted exponents.
    pub slope_tol: f64,
    /// Tolerance of the killed-model extension identity.
    pub gf_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol: 1e-9, slope_tol: 0.1, gf_tol: 1e-12 }
    }
}

impl Tolerances {
    fn validate(&self) -> CliResult<()> {
        for (name, v) in [("tol", self.tol), ("slope_tol", self.slope_tol), ("gf_tol", self.gf_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Validation(format!("field `tolerances.{name}` must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest<P> {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub params: P,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base: PathBuf,
}

#[derive(Deserialize)]
struct KindOnly {
    kind: Kind,
}

/// Reads the experiment kind without validating the rest.
pub fn peek_kind(text: &str) -> CliResult<Kind> {
    serde_json::from_str::<KindOnly>(text).map(|k| k.kind).map_err(|e| CliError::Validation(format!("manifest: {e}")))
}

pub fn parse<P: DeserializeOwned>(text: &str, base: &Path, expected: Kind) -> CliResult<Manifest<P>> {
    let mut m: Manifest<P> = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
    if m.kind != expected {
        return Err(CliError::Validation(format!("manifest kind {} where {} was expected", m.kind.name(), expected.name())));
    }
    m.tolerances.validate()?;
    m.base = base.to_path_buf();
    m.output_dir = m.output_dir.map(|d| if d.is_absolute() { d } else { base.join(d) });
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    Thm20,
    Lemma1,
    Lemma2,
    Thm21,
    /// Orlicz-Sobolev to isoperimetry and back through `β₁`.
    Thm41,
    /// Extension identity plus the killed forward and converse statements.
    Thm43,
}

impl TheoremId {
    pub fn needs_killing(self) -> Option<bool> {
        match self {
            TheoremId::Thm20 | TheoremId::Lemma1 | TheoremId::Lemma2 | TheoremId::Thm41 => Some(false),
            TheoremId::Thm43 => Some(true),
            TheoremId::Thm21 => None,
        }
    }

    pub fn defaults(killed: bool) -> Vec<TheoremId> {
        if killed {
            vec![TheoremId::Thm21, TheoremId::Thm43]
        } else {
            vec![TheoremId::Thm20, TheoremId::Lemma1, TheoremId::Lemma2, TheoremId::Thm21, TheoremId::Thm41]
        }
    }
}

/// An instance given inline or as a path to an instance file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRef {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub instance: Option<InstanceDoc>,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

impl InputRef {
    pub fn load(&self, index: usize, base: &Path) -> CliResult<(String, Instance)> {
        let (doc, default_name) = match (&self.instance, &self.path) {
            (Some(doc), None) => (doc.clone(), format!("instance-{index:03}")),
            (None, Some(p)) => {
                let full = if p.is_absolute() { p.clone() } else { base.join(p) };
                let text = std::fs::read_to_string(&full).map_err(|e| CliError::Validation(format!("input {}: {e}", full.display())))?;
                let doc: InstanceDoc = serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("input {}: {e}", full.display())))?;
                let stem = p.file_stem().map_or_else(|| format!("instance-{index:03}"), |s| s.to_string_lossy().into_owned());
                (doc, stem)
            }
            _ => return Err(CliError::Validation(format!("params.instances[{index}]: give exactly one of `instance` or `path`"))),
        };
        let name = self.name.clone().unwrap_or(default_name);
        let inst = Instance::from_doc(&doc).map_err(|e| CliError::Validation(format!("instance `{name}`: {e}")))?;
        Ok((name, inst))
    }
}

fn default_functions() -> usize {
    500
}

fn default_batch_functions() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteParams {
    pub instances: Vec<InputRef>,
    #[serde(default)]
    pub theorems: Option<Vec<TheoremId>>,
    /// Random test functions per check.
    #[serde(default = "default_functions")]
    pub functions: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchParams {
    pub count: usize,
    #[serde(default)]
    pub generator: GenerateOptions,
    #[serde(default)]
    pub theorems: Option<Vec<TheoremId>>,
    #[serde(default = "default_batch_functions")]
    pub functions: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn validate(&self, field: &str) -> CliResult<Vec<f64>> {
        if !(self.from > 0.0 && self.to > self.from && self.to.is_finite() && self.points >= 2) {
            return Err(CliError::Validation(format!("field `{field}` needs 0 < from < to and points >= 2")));
        }
        Ok(nlform::fit::log_grid(self.from, self.to, self.points))
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeCase {
    pub n: usize,
    pub alpha: f64,
}

fn default_k() -> usize {
    1_000_000
}

fn default_radius() -> usize {
    128
}

fn default_times() -> GridSpec {
    GridSpec { from: 1.0, to: 64.0, points: 7 }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeParams {
    pub cases: Vec<LatticeCase>,
    /// Truncation depth of the subordination series.
    #[serde(default = "default_k")]
    pub k_max: usize,
    /// Profile radius; fits use `|x| ∈ [2, R/2]`.
    #[serde(default = "default_radius")]
    pub radius: usize,
    #[serde(default = "default_times")]
    pub times: GridSpec,
    /// Torus side for the gradient decay; omitted to skip it.
    #[serde(default)]
    pub gradient_side: Option<usize>,
    /// Truncation radius for the truncated-kernel rate; omitted to skip it.
    #[serde(default)]
    pub truncated_rho: Option<usize>,
    /// Export `p₁` on a small window `(K, R)` as CSV.
    #[serde(default)]
    pub window: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMode {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RadialCase {
    pub n: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub mode: KernelMode,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct YoungRef {
    pub name: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NmCase {
    pub n: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub young: YoungRef,
    #[serde(default = "one")]
    pub c: f64,
    /// Expected outcome of the scan.
    pub expect_bounded: bool,
}

fn one() -> f64 {
    1.0
}

fn default_s_grid() -> GridSpec {
    GridSpec { from: 1e-3, to: 1e3, points: 25 }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessParams {
    #[serde(default)]
    pub radial: Vec<RadialCase>,
    #[serde(default)]
    pub nm: Vec<NmCase>,
    #[serde(default = "default_s_grid")]
    pub s_grid: GridSpec,
}

fn default_phi_ls() -> GridSpec {
    GridSpec { from: 1e2, to: 1e4, points: 9 }
}

fn default_ramp_ls() -> GridSpec {
    GridSpec { from: 10.0, to: 1e3, points: 5 }
}

fn default_classify_tol() -> f64 {
    0.02
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BetaRange {
    pub r_lo: f64,
    pub r_hi: f64,
    #[serde(default)]
    pub constants: BetaConstants,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbedParams {
    pub n: usize,
    pub alpha: f64,
    pub eps: Vec<f64>,
    /// Radii for the tabulated `Φ(l)`.
    #[serde(default = "default_phi_ls")]
    pub phi_ls: GridSpec,
    /// Radii for the ramp quantities.
    #[serde(default = "default_ramp_ls")]
    pub ramp_ls: GridSpec,
    /// Rate exponent fit for every `ε > α/2`; omitted to skip it.
    #[serde(default)]
    pub beta: Option<BetaRange>,
    /// Absolute slope tolerance of the threshold classification.
    #[serde(default = "default_classify_tol")]
    pub classify_tol: f64,
    /// Extra weights tabulated alongside the log family.
    #[serde(default)]
    pub weights: Vec<WeightSpec>,
}
