//! Experiment configuration: TOML schema and validation.
//!
//! Validation reports the first offending key by its dotted path
//! (e.g. `kernel.alpha`) before any compute starts.

use serde::Deserialize;

use latfrac_core::kernels::Kernel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Relax,
    Solve,
    Verify,
    VeryWeak,
    Uniqueness,
    Consistency,
    Semiclassical,
    VeryWeakSemiclassical,
    Admissibility,
}

impl ExperimentKind {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "relax" => Self::Relax,
            "solve" => Self::Solve,
            "verify" => Self::Verify,
            "veryweak" => Self::VeryWeak,
            "uniqueness" => Self::Uniqueness,
            "consistency" => Self::Consistency,
            "semiclassical" => Self::Semiclassical,
            "veryweak-semiclassical" => Self::VeryWeakSemiclassical,
            "admissibility" => Self::Admissibility,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Relax => "relax",
            Self::Solve => "solve",
            Self::Verify => "verify",
            Self::VeryWeak => "veryweak",
            Self::Uniqueness => "uniqueness",
            Self::Consistency => "consistency",
            Self::Semiclassical => "semiclassical",
            Self::VeryWeakSemiclassical => "veryweak-semiclassical",
            Self::Admissibility => "admissibility",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sobolev_s: f64,
    pub lambda: Option<f64>,
    pub draws: Option<usize>,
    pub lattice: Option<LatticeBlock>,
    pub potential: Option<PotentialBlock>,
    pub kernel: Option<KernelBlock>,
    pub coefficient: Option<CoefficientBlock>,
    pub source: Option<SourceBlock>,
    pub data: Option<DataBlock>,
    pub time: Option<TimeBlock>,
    pub epsilon: Option<EpsilonBlock>,
    pub uniqueness: Option<UniquenessBlock>,
    pub output: Option<OutputBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeBlock {
    pub n: usize,
    pub hbar: Option<f64>,
    pub hbar_sweep: Option<Vec<f64>>,
    pub radius: Option<i64>,
    pub box_halfwidth: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialBlock {
    pub kind: String,
    pub v0: f64,
    #[serde(default)]
    pub monomials: Vec<MonomialBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialBlock {
    pub coefficient: f64,
    pub powers: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    #[serde(rename = "type")]
    pub kind: String,
    pub alpha: f64,
    pub m: Option<f64>,
    pub b: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientBlock {
    pub preset: String,
    pub a0: f64,
    pub slope: Option<f64>,
    pub offset: Option<f64>,
    pub amplitude: Option<f64>,
    pub frequency: Option<f64>,
    #[serde(default)]
    pub atoms: Vec<AtomBlock>,
    #[serde(default)]
    pub jumps: Vec<JumpBlock>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomBlock {
    pub t0: f64,
    pub weight: f64,
    #[serde(default)]
    pub order: u8,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpBlock {
    pub t0: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceBlock {
    pub preset: String,
    pub amplitude: Option<f64>,
    pub t0: Option<f64>,
    pub sigma_t: Option<f64>,
    pub width: Option<f64>,
    pub mode_index: Option<usize>,
    pub frequency: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataBlock {
    pub preset: String,
    pub width: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub index: Option<usize>,
    pub site: Option<Vec<i64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    pub t_final: f64,
    pub steps: usize,
    #[serde(default = "one")]
    pub grading: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonBlock {
    #[serde(default = "default_start_pow")]
    pub start_pow: u32,
    #[serde(default = "default_end_pow")]
    pub end_pow: u32,
    #[serde(default = "default_l1")]
    pub l1: u32,
}

fn default_start_pow() -> u32 {
    1
}
fn default_end_pow() -> u32 {
    10
}
fn default_l1() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniquenessBlock {
    pub perturbation: String,
    pub amplitude: Option<f64>,
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: String,
}

/// A validated configuration: the raw blocks plus the parsed experiment tag.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub raw: RawConfig,
    /// Original file text, echoed into the manifest.
    pub source_text: String,
}

#[derive(Debug, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

fn fail<T>(key: &str, msg: &str) -> Result<T, ConfigError> {
    Err(ConfigError(format!("`{key}`: {msg}")))
}

fn require<'a, T>(field: &'a Option<T>, key: &str) -> Result<&'a T, ConfigError> {
    field
        .as_ref()
        .ok_or_else(|| ConfigError(format!("`{key}`: required for this experiment but missing")))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| ConfigError(format!("parse error: {e}")))?;
    let kind = ExperimentKind::parse(&raw.experiment)
        .ok_or_else(|| ConfigError(format!("`experiment`: unknown experiment `{}`", raw.experiment)))?;
    let cfg = ExperimentConfig {
        kind,
        raw,
        source_text: text.to_string(),
    };
    validate(&cfg)?;
    Ok(cfg)
}

pub fn parse_config_file(path: &std::path::Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn validate_kernel(block: &KernelBlock) -> Result<(), ConfigError> {
    match block.kind.as_str() {
        "cd" | "cf" | "ab" => {}
        "custom" => {
            return fail(
                "kernel.type",
                "custom kernels carry callables and are only available through the library API",
            )
        }
        other => return fail("kernel.type", &format!("unknown kernel `{other}`")),
    }
    if !(block.alpha > 0.0 && block.alpha < 1.0) {
        return fail(
            "kernel.alpha",
            &format!("must lie strictly in (0,1), got {}", block.alpha),
        );
    }
    if let Some(m) = block.m {
        if m <= 0.0 {
            return fail("kernel.m", "normalization must be positive");
        }
    }
    if let Some(b) = block.b {
        if b <= 0.0 {
            return fail("kernel.b", "normalization must be positive");
        }
    }
    Ok(())
}

pub fn build_kernel(block: &KernelBlock) -> Result<Kernel, ConfigError> {
    let k = match block.kind.as_str() {
        "cd" => Kernel::caputo_dzhrbashyan(block.alpha),
        "cf" => Kernel::caputo_fabrizio(block.alpha, block.m.unwrap_or(1.0)),
        "ab" => Kernel::atangana_baleanu(block.alpha, block.b.unwrap_or(1.0)),
        other => return fail("kernel.type", &format!("unknown kernel `{other}`")),
    };
    k.map_err(|e| ConfigError(format!("`kernel`: {e}")))
}

fn validate_lattice(block: &LatticeBlock, sweep_mode: bool) -> Result<(), ConfigError> {
    if block.n == 0 {
        return fail("lattice.n", "dimension must be at least 1");
    }
    if sweep_mode {
        let sweep = require(&block.hbar_sweep, "lattice.hbar_sweep")?;
        if sweep.is_empty() {
            return fail("lattice.hbar_sweep", "needs at least one spacing");
        }
        if sweep.iter().any(|&h| h <= 0.0) {
            return fail("lattice.hbar_sweep", "spacings must be positive");
        }
        if sweep.windows(2).any(|w| w[1] >= w[0]) {
            return fail("lattice.hbar_sweep", "spacings must be strictly decreasing");
        }
        let x = require(&block.box_halfwidth, "lattice.box_halfwidth")?;
        if *x <= 0.0 {
            return fail("lattice.box_halfwidth", "must be positive");
        }
    } else {
        let h = require(&block.hbar, "lattice.hbar")?;
        if *h <= 0.0 {
            return fail("lattice.hbar", "must be positive");
        }
        match (block.radius, block.box_halfwidth) {
            (Some(r), _) if r < 0 => return fail("lattice.radius", "must be nonnegative"),
            (Some(_), _) => {}
            (None, Some(x)) if x > 0.0 => {}
            (None, Some(_)) => return fail("lattice.box_halfwidth", "must be positive"),
            (None, None) => {
                return fail("lattice.radius", "either radius or box_halfwidth is required")
            }
        }
    }
    Ok(())
}

fn validate_potential(block: &PotentialBlock, n: usize) -> Result<(), ConfigError> {
    if block.v0 <= 0.0 {
        return fail("potential.v0", "floor must be positive");
    }
    match block.kind.as_str() {
        "constant" | "harmonic" => Ok(()),
        "polynomial" => {
            if block.monomials.is_empty() {
                return fail("potential.monomials", "polynomial potential needs monomials");
            }
            for (i, m) in block.monomials.iter().enumerate() {
                if m.powers.len() != n {
                    return fail(
                        &format!("potential.monomials[{i}].powers"),
                        &format!("needs one exponent per dimension ({n})"),
                    );
                }
            }
            Ok(())
        }
        other => fail("potential.kind", &format!("unknown potential `{other}`")),
    }
}

fn validate_coefficient(
    block: &CoefficientBlock,
    distributional: Option<bool>,
) -> Result<(), ConfigError> {
    if block.a0 <= 0.0 {
        return fail("coefficient.a0", "floor must be positive");
    }
    let is_distributional = match block.preset.as_str() {
        "constant" => false,
        "linear" => {
            let slope = block.slope.unwrap_or(0.0);
            if block.a0 + slope.min(0.0) <= 0.0 {
                return fail("coefficient.slope", "coefficient must stay positive");
            }
            false
        }
        "sinusoidal" => {
            let offset = block.offset.unwrap_or(2.0);
            let amplitude = block.amplitude.unwrap_or(1.0);
            if offset - amplitude.abs() <= 0.0 {
                return fail(
                    "coefficient.amplitude",
                    "offset − |amplitude| must stay positive",
                );
            }
            false
        }
        "distributional" => {
            for (i, a) in block.atoms.iter().enumerate() {
                if a.order > 1 {
                    return fail(
                        &format!("coefficient.atoms[{i}].order"),
                        "only 0 (delta) and 1 (delta') are supported",
                    );
                }
            }
            true
        }
        other => return fail("coefficient.preset", &format!("unknown preset `{other}`")),
    };
    match distributional {
        Some(true) if !is_distributional => fail(
            "coefficient.preset",
            "this experiment needs the distributional preset",
        ),
        Some(false) if is_distributional => fail(
            "coefficient.preset",
            "this experiment needs a regular (non-distributional) preset",
        ),
        _ => Ok(()),
    }
}

fn validate_source(block: &SourceBlock) -> Result<(), ConfigError> {
    match block.preset.as_str() {
        "zero" | "gaussian_pulse" | "mode_tone" => Ok(()),
        other => fail("source.preset", &format!("unknown preset `{other}`")),
    }
}

fn validate_data(block: &DataBlock, semiclassical: bool) -> Result<(), ConfigError> {
    match block.preset.as_str() {
        "gaussian" => Ok(()),
        "eigenmode" | "indicator" => {
            if semiclassical {
                fail(
                    "data.preset",
                    "spacing sweeps need continuum data with fourth derivatives (use `gaussian`)",
                )
            } else {
                Ok(())
            }
        }
        other => fail("data.preset", &format!("unknown preset `{other}`")),
    }
}

fn validate_time(block: &TimeBlock) -> Result<(), ConfigError> {
    if block.t_final <= 0.0 {
        return fail("time.t_final", "must be positive");
    }
    if block.steps == 0 {
        return fail("time.steps", "must be at least 1");
    }
    if block.grading < 1.0 {
        return fail("time.grading", "must be >= 1 (1 = uniform)");
    }
    Ok(())
}

fn validate_epsilon(block: &EpsilonBlock) -> Result<(), ConfigError> {
    if block.start_pow == 0 {
        return fail("epsilon.start_pow", "must be at least 1");
    }
    if block.end_pow <= block.start_pow {
        return fail("epsilon.end_pow", "must exceed start_pow");
    }
    if block.end_pow - block.start_pow < 3 {
        return fail("epsilon.end_pow", "schedule needs at least 4 points for the fits");
    }
    if block.l1 == 0 {
        return fail("epsilon.l1", "must be at least 1");
    }
    Ok(())
}

fn validate_uniqueness(block: &UniquenessBlock) -> Result<(), ConfigError> {
    match block.perturbation.as_str() {
        "identical" | "offset" => Ok(()),
        "powerlaw" => {
            if block.exponent.unwrap_or(3.0) <= 0.0 {
                return fail("uniqueness.exponent", "must be positive");
            }
            Ok(())
        }
        other => fail(
            "uniqueness.perturbation",
            &format!("unknown perturbation `{other}`"),
        ),
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    use ExperimentKind::*;
    let raw = &cfg.raw;
    match cfg.kind {
        Admissibility => {
            validate_kernel(require(&raw.kernel, "kernel")?)?;
        }
        Relax => {
            validate_kernel(require(&raw.kernel, "kernel")?)?;
            validate_time(require(&raw.time, "time")?)?;
            let lambda = raw
                .lambda
                .ok_or_else(|| ConfigError("`lambda`: required for relax".into()))?;
            if lambda <= 0.0 {
                return fail("lambda", "must be positive");
            }
        }
        Solve | Verify => {
            let lattice = require(&raw.lattice, "lattice")?;
            validate_lattice(lattice, false)?;
            validate_potential(require(&raw.potential, "potential")?, lattice.n)?;
            validate_kernel(require(&raw.kernel, "kernel")?)?;
            validate_time(require(&raw.time, "time")?)?;
            if cfg.kind == Solve {
                validate_coefficient(require(&raw.coefficient, "coefficient")?, Some(false))?;
                validate_data(require(&raw.data, "data")?, false)?;
            }
            if let Some(src) = &raw.source {
                validate_source(src)?;
            }
            if let Some(draws) = raw.draws {
                if draws == 0 {
                    return fail("draws", "must be at least 1");
                }
            }
        }
        VeryWeak | Uniqueness => {
            let lattice = require(&raw.lattice, "lattice")?;
            validate_lattice(lattice, false)?;
            validate_potential(require(&raw.potential, "potential")?, lattice.n)?;
            validate_kernel(require(&raw.kernel, "kernel")?)?;
            validate_time(require(&raw.time, "time")?)?;
            validate_coefficient(require(&raw.coefficient, "coefficient")?, Some(true))?;
            validate_data(require(&raw.data, "data")?, false)?;
            validate_epsilon(require(&raw.epsilon, "epsilon")?)?;
            if let Some(src) = &raw.source {
                validate_source(src)?;
            }
            if cfg.kind == Uniqueness {
                validate_uniqueness(require(&raw.uniqueness, "uniqueness")?)?;
            }
        }
        Consistency => {
            let lattice = require(&raw.lattice, "lattice")?;
            validate_lattice(lattice, false)?;
            validate_potential(require(&raw.potential, "potential")?, lattice.n)?;
            validate_kernel(require(&raw.kernel, "kernel")?)?;
            validate_time(require(&raw.time, "time")?)?;
            validate_coefficient(require(&raw.coefficient, "coefficient")?, Some(false))?;
            validate_data(require(&raw.data, "data")?, false)?;
            validate_epsilon(require(&raw.epsilon, "epsilon")?)?;
            if let Some(src) = &raw.source {
                validate_source(src)?;
            }
        }
        Semiclassical | VeryWeakSemiclassical => {
            let lattice = require(&raw.lattice, "lattice")?;
            validate_lattice(lattice, true)?;
            validate_potential(require(&raw.potential, "potential")?, lattice.n)?;
            validate_kernel(require(&raw.kernel, "kernel")?)?;
            validate_time(require(&raw.time, "time")?)?;
            validate_data(require(&raw.data, "data")?, true)?;
            if cfg.kind == VeryWeakSemiclassical {
                validate_coefficient(require(&raw.coefficient, "coefficient")?, Some(true))?;
                validate_epsilon(require(&raw.epsilon, "epsilon")?)?;
            } else {
                validate_coefficient(require(&raw.coefficient, "coefficient")?, Some(false))?;
            }
            if let Some(src) = &raw.source {
                validate_source(src)?;
            }
        }
    }
    Ok(())
}
