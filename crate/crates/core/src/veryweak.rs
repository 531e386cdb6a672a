//! Mollifier regularization and very weak solutions.
//!
//! Distributional coefficients a = smooth + Σ δ-atoms + Σ Heaviside jumps
//! are replaced by nets a_ε = a ⋆ ψ_{ω(ε)} with a Friedrichs mollifier ψ and
//! ω(ε) = (log 1/ε)^{−1/L₁}. The net of solutions of the mollified problems
//! is classified by how its norms scale against powers of ε:
//!
//! * moderate — bounded by ε^{−N} for some N (fitted by log-log regression);
//! * negligible — decaying faster than every probed ε^q.
//!
//! Atoms enter the regularization directly as ψ_ω^{(order)}(t − t₀) scaled
//! by 1/ω^{1+order}, jumps as the mollified step; the smooth part is
//! convolved with ψ_ω using a clamped extension of its boundary values so
//! constants are reproduced exactly and positivity survives near t = 0, T.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::Kernel;
use crate::lattice::LatticeSpec;
use crate::quad;
use crate::solver::{self, CoefficientProfile, SolutionField, SourceTerm};
use crate::spectral::SpectralDecomposition;
use num_complex::Complex64;

/// Minimum grid nodes across a mollifier bump [t₀ − ω, t₀ + ω].
pub const MIN_NODES_PER_BUMP: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MollifierKind {
    /// c · exp(−1/(1−t²)) on (−1, 1).
    Bump,
    /// (1 + cos πt)/2 on (−1, 1); ships as the alternative for
    /// negligibility experiments.
    RaisedCosine,
}

/// A normalized Friedrichs mollifier: smooth, even, nonnegative, supported
/// in [−1, 1], with unit integral (the constant is always computed by
/// quadrature, never hard-coded).
#[derive(Debug, Clone)]
pub struct Mollifier {
    kind: MollifierKind,
    norm_const: f64,
    /// Cached quadrature nodes (x_i, w_i·ψ(x_i)) for convolutions against ψ.
    conv_nodes: Arc<Vec<(f64, f64)>>,
}

fn bump_base(t: f64) -> f64 {
    if t * t >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn bump_base_prime(t: f64) -> f64 {
    if t * t >= 1.0 {
        0.0
    } else {
        let d = 1.0 - t * t;
        bump_base(t) * (-2.0 * t / (d * d))
    }
}

fn cosine_base(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * t).cos())
    }
}

fn cosine_base_prime(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        -0.5 * std::f64::consts::PI * (std::f64::consts::PI * t).sin()
    }
}

/// Fixed composite Gauss–Kronrod panel rule on [a, b]; enough for the C∞
/// integrands here and usable inside infallible closures.
fn panel_integral<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    // One GK15 evaluation per panel, no adaptivity.
    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_5,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_224,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_18,
        0.140_653_259_715_525_92,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_83,
    ];
    let mut total = 0.0;
    let h = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let c = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = WGK[7] * f(c);
        for j in 0..7 {
            let x = half * XGK[j];
            acc += WGK[j] * (f(c - x) + f(c + x));
        }
        total += acc * half;
    }
    total
}

const CONV_PANELS: usize = 24;

fn gk15_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_5,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_224,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_18,
        0.140_653_259_715_525_92,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_83,
    ];
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 15);
    for p in 0..panels {
        let c = a + p as f64 * h + 0.5 * h;
        let half = 0.5 * h;
        nodes.push((c, WGK[7] * half));
        for j in 0..7 {
            let x = half * XGK[j];
            nodes.push((c - x, WGK[j] * half));
            nodes.push((c + x, WGK[j] * half));
        }
    }
    nodes
}

impl Mollifier {
    fn build(kind: MollifierKind, base: fn(f64) -> f64) -> Result<Self> {
        let integral = quad::integrate(base, -1.0, 1.0, 1e-14, 1e-13)?;
        let norm_const = 1.0 / integral.value;
        let conv_nodes = gk15_nodes(-1.0, 1.0, CONV_PANELS)
            .into_iter()
            .map(|(x, w)| (x, w * norm_const * base(x)))
            .collect();
        Ok(Mollifier {
            kind,
            norm_const,
            conv_nodes: Arc::new(conv_nodes),
        })
    }

    pub fn bump() -> Result<Self> {
        Self::build(MollifierKind::Bump, bump_base)
    }

    pub fn raised_cosine() -> Result<Self> {
        Self::build(MollifierKind::RaisedCosine, cosine_base)
    }

    /// ∫ ψ(x) f(x) dx over the support, with the cached rule.
    pub fn convolve<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.conv_nodes.iter().map(|&(x, w)| w * f(x)).sum()
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    /// The normalization constant c with ∫ c·base = 1.
    pub fn normalization(&self) -> f64 {
        self.norm_const
    }

    /// ψ(t), normalized.
    pub fn psi(&self, t: f64) -> f64 {
        let base = match self.kind {
            MollifierKind::Bump => bump_base(t),
            MollifierKind::RaisedCosine => cosine_base(t),
        };
        self.norm_const * base
    }

    /// ψ'(t).
    pub fn psi_prime(&self, t: f64) -> f64 {
        let base = match self.kind {
            MollifierKind::Bump => bump_base_prime(t),
            MollifierKind::RaisedCosine => cosine_base_prime(t),
        };
        self.norm_const * base
    }

    /// ψ_ω(t) = ψ(t/ω)/ω.
    pub fn psi_scaled(&self, t: f64, omega: f64) -> f64 {
        self.psi(t / omega) / omega
    }

    /// ψ_ω'(t) = ψ'(t/ω)/ω².
    pub fn psi_prime_scaled(&self, t: f64, omega: f64) -> f64 {
        self.psi_prime(t / omega) / (omega * omega)
    }

    /// Mollified step Ψ(y) = ∫_{−1}^{y} ψ.
    pub fn step(&self, y: f64) -> f64 {
        if y <= -1.0 {
            return 0.0;
        }
        if y >= 1.0 {
            return 1.0;
        }
        panel_integral(|v| self.psi(v), -1.0, y, 24)
    }

    /// Ψ_ω(t) = Ψ(t/ω).
    pub fn step_scaled(&self, t: f64, omega: f64) -> f64 {
        self.step(t / omega)
    }
}

/// Normalization constant of the default bump mollifier, computed fresh by
/// adaptive quadrature.
pub fn mollifier_constant() -> Result<f64> {
    Ok(Mollifier::bump()?.normalization())
}

/// A point irregularity: weight·δ^{(order)} at t₀ with order 0 (δ) or 1 (δ').
#[derive(Debug, Clone, Copy)]
pub struct Atom {
    pub t0: f64,
    pub weight: f64,
    pub order: u8,
}

/// A Heaviside jump of `height` at t₀.
#[derive(Debug, Clone, Copy)]
pub struct Jump {
    pub t0: f64,
    pub height: f64,
}

/// Distributional coefficient: smooth part plus atoms and jumps, with a
/// strictly positive floor on the smooth part.
#[derive(Clone)]
pub struct DistributionalCoefficient {
    pub smooth: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub atoms: Vec<Atom>,
    pub jumps: Vec<Jump>,
    /// a₀: floor of the smooth part.
    pub floor: f64,
}

impl std::fmt::Debug for DistributionalCoefficient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "DistributionalCoefficient(floor={}, atoms={:?}, jumps={:?})",
            self.floor, self.atoms, self.jumps
        )
    }
}

impl DistributionalCoefficient {
    /// Constant smooth part a₀ plus the listed irregularities.
    pub fn constant_plus_atoms(a0: f64, atoms: Vec<Atom>, jumps: Vec<Jump>) -> Result<Self> {
        if !(a0 > 0.0 && a0.is_finite()) {
            return Err(Error::InvalidCoefficient(format!(
                "smooth floor must be positive, got {a0}"
            )));
        }
        for atom in &atoms {
            if atom.order > 1 {
                return Err(Error::InvalidCoefficient(format!(
                    "atom order {} unsupported (0 = delta, 1 = delta')",
                    atom.order
                )));
            }
        }
        Ok(DistributionalCoefficient {
            smooth: Arc::new(move |_| a0),
            atoms,
            jumps,
            floor: a0,
        })
    }

    fn validate_support(&self, t_final: f64) -> Result<()> {
        for atom in &self.atoms {
            if !(0.0..=t_final).contains(&atom.t0) {
                return Err(Error::InvalidCoefficient(format!(
                    "atom at t0 = {} outside [0, {t_final}]",
                    atom.t0
                )));
            }
        }
        for jump in &self.jumps {
            if !(0.0..=t_final).contains(&jump.t0) {
                return Err(Error::InvalidCoefficient(format!(
                    "jump at t0 = {} outside [0, {t_final}]",
                    jump.t0
                )));
            }
        }
        Ok(())
    }
}

/// ε schedule with the structure-order parameter L₁ fixing
/// ω(ε) = (log 1/ε)^{−1/L₁}, so that exp(ω^{−L₁}) = 1/ε by construction.
#[derive(Debug, Clone)]
pub struct EpsilonSchedule {
    pub epsilons: Vec<f64>,
    pub l1: u32,
}

impl EpsilonSchedule {
    /// ε = 2^{−start_pow} … 2^{−end_pow} (geometric).
    pub fn geometric(start_pow: u32, end_pow: u32, l1: u32) -> Result<Self> {
        if start_pow == 0 || end_pow <= start_pow {
            return Err(Error::InvalidArgument(format!(
                "epsilon schedule needs 1 <= start < end, got 2^-{start_pow} .. 2^-{end_pow}"
            )));
        }
        if l1 == 0 {
            return Err(Error::InvalidArgument("L1 must be at least 1".into()));
        }
        Ok(EpsilonSchedule {
            epsilons: (start_pow..=end_pow).map(|p| 0.5f64.powi(p as i32)).collect(),
            l1,
        })
    }

    /// Default: ε = 2^{−1} … 2^{−10}, L₁ = 1.
    pub fn default_schedule() -> Self {
        Self::geometric(1, 10, 1).unwrap()
    }

    pub fn omega(&self, eps: f64) -> f64 {
        (1.0 / eps).ln().powf(-1.0 / self.l1 as f64)
    }

    pub fn contains(&self, eps: f64) -> bool {
        self.epsilons.iter().any(|&e| (e - eps).abs() <= 1e-15 * e)
    }
}

/// The mollified coefficient a_ε as an infallible callable.
///
/// a_ε(t) = (smooth ⋆ ψ_ω)(t) + Σ w·ψ_ω^{(order)}(t−t₀) + Σ h·Ψ_ω(t−t₀),
/// with the smooth part read through a clamped extension of [0, T].
pub fn regularize(
    coeff: &DistributionalCoefficient,
    mollifier: &Mollifier,
    schedule: &EpsilonSchedule,
    eps: f64,
    t_final: f64,
) -> Result<impl Fn(f64) -> f64 + Send + Sync + Clone + use<>> {
    if !schedule.contains(eps) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} is not part of the schedule"
        )));
    }
    coeff.validate_support(t_final)?;
    let omega = schedule.omega(eps);
    let smooth = Arc::clone(&coeff.smooth);
    let atoms = coeff.atoms.clone();
    let jumps = coeff.jumps.clone();
    let moll = mollifier.clone();
    Ok(move |t: f64| {
        let clamped = |s: f64| smooth(s.clamp(0.0, t_final));
        let mut v = moll.convolve(|x| clamped(t - omega * x));
        for atom in &atoms {
            v += match atom.order {
                0 => atom.weight * moll.psi_scaled(t - atom.t0, omega),
                _ => atom.weight * moll.psi_prime_scaled(t - atom.t0, omega),
            };
        }
        for jump in &jumps {
            v += jump.height * moll.step_scaled(t - jump.t0, omega);
        }
        v
    })
}

/// Distributional source: a regular part plus time atoms carried by fixed
/// site profiles.
#[derive(Clone)]
pub struct DistributionalSource {
    pub smooth: SourceTerm,
    pub atoms: Vec<SourceAtom>,
}

#[derive(Clone)]
pub struct SourceAtom {
    pub t0: f64,
    pub weight: f64,
    pub order: u8,
    /// Site-space profile multiplying the time atom.
    pub profile: Vec<f64>,
}

impl DistributionalSource {
    pub fn regular(smooth: SourceTerm) -> Self {
        DistributionalSource {
            smooth,
            atoms: Vec::new(),
        }
    }

    /// f_ε on the grid: regular part passed through, atoms mollified.
    pub fn regularize(
        &self,
        mollifier: &Mollifier,
        schedule: &EpsilonSchedule,
        eps: f64,
        spec: &LatticeSpec,
        dec: &SpectralDecomposition,
        grid: &TimeGrid,
    ) -> Result<SourceTerm> {
        let mut rows = self.smooth.materialize(spec, dec, grid)?;
        if self.atoms.is_empty() {
            return Ok(SourceTerm::ModeSamples(rows));
        }
        let omega = schedule.omega(eps);
        for atom in &self.atoms {
            if atom.profile.len() != spec.site_count() {
                return Err(Error::InvalidArgument(format!(
                    "source atom profile has {} values for {} sites",
                    atom.profile.len(),
                    spec.site_count()
                )));
            }
            let profile_hat = dec.forward_real(&atom.profile)?;
            for (m, &t) in grid.points().iter().enumerate() {
                let factor = match atom.order {
                    0 => atom.weight * mollifier.psi_scaled(t - atom.t0, omega),
                    _ => atom.weight * mollifier.psi_prime_scaled(t - atom.t0, omega),
                };
                if factor != 0.0 {
                    for (slot, c) in rows[m].0.iter_mut().zip(&profile_hat.0) {
                        *slot += c * factor;
                    }
                }
            }
        }
        Ok(SourceTerm::ModeSamples(rows))
    }
}

/// Least-squares classification of a norm sweep against ε^{−N}.
#[derive(Debug, Clone, Copy)]
pub struct ModerateFit {
    /// Slope of log‖·‖ against log(1/ε).
    pub slope: f64,
    pub r_squared: f64,
    /// Fitted moderateness exponent N.
    pub exponent: u32,
    /// Growth slower than any positive power (slope < 0.5): N reported as 0.
    pub slowly_varying: bool,
    /// Zero-variance sweep; N = 0 by convention.
    pub degenerate: bool,
}

pub fn moderateness_fit(epsilons: &[f64], norms: &[f64]) -> Result<ModerateFit> {
    if epsilons.len() != norms.len() || epsilons.len() < 4 {
        return Err(Error::InvalidArgument(
            "moderateness fit needs at least 4 (eps, norm) pairs".into(),
        ));
    }
    let xs: Vec<f64> = epsilons.iter().map(|&e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|&n| n.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let syy: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    if syy < 1e-20 {
        return Ok(ModerateFit {
            slope: 0.0,
            r_squared: 1.0,
            exponent: 0,
            slowly_varying: false,
            degenerate: true,
        });
    }
    let slope = sxy / sxx;
    let r_squared = (sxy * sxy) / (sxx * syy);
    let slowly_varying = slope < 0.5;
    let exponent = if slowly_varying {
        0
    } else {
        (slope - 0.05).ceil().max(0.0) as u32
    };
    Ok(ModerateFit {
        slope,
        r_squared,
        exponent,
        slowly_varying,
        degenerate: false,
    })
}

/// Tail decay of a difference sweep against probe powers ε^q.
#[derive(Debug, Clone)]
pub struct NegligibilityReport {
    pub all_zero: bool,
    /// Log-log slope fitted on the small-ε half of the schedule.
    pub tail_slope: f64,
    /// (q, pass) for each probe power.
    pub passes: Vec<(u32, bool)>,
}

pub fn negligibility_check(epsilons: &[f64], diffs: &[f64], probe_qs: &[u32]) -> Result<NegligibilityReport> {
    if epsilons.len() != diffs.len() || epsilons.len() < 4 {
        return Err(Error::InvalidArgument(
            "negligibility check needs at least 4 (eps, diff) pairs".into(),
        ));
    }
    if diffs.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidArgument(
            "negligibility check needs finite nonnegative differences".into(),
        ));
    }
    if diffs.iter().all(|&d| d == 0.0) {
        return Ok(NegligibilityReport {
            all_zero: true,
            tail_slope: f64::INFINITY,
            passes: probe_qs.iter().map(|&q| (q, true)).collect(),
        });
    }
    // Fit on the tail (smallest ε half), where the asymptotic rate lives.
    let half = epsilons.len() / 2;
    let xs: Vec<f64> = epsilons[half..].iter().map(|&e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = diffs[half..].iter().map(|&d| d.max(1e-300).ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let tail_slope = -sxy / sxx; // decay rate: diff ~ ε^{tail_slope}
    let passes = probe_qs
        .iter()
        .map(|&q| (q, tail_slope >= q as f64 - 0.1))
        .collect();
    Ok(NegligibilityReport {
        all_zero: false,
        tail_slope,
        passes,
    })
}

/// One solved ε-net with the scalars the fits consume.
#[derive(Debug)]
pub struct VeryWeakFamily {
    pub epsilons: Vec<f64>,
    pub omegas: Vec<f64>,
    /// sup_t a_ε(t) on each solve grid.
    pub sup_a: Vec<f64>,
    /// Sup over the grid of the H^{2+s} norm of u_ε.
    pub sol_norms: Vec<f64>,
    pub fields: Vec<SolutionField>,
    pub warnings: Vec<String>,
    pub moderateness: ModerateFit,
}

/// Resolution rule: every atom/jump needs ≥ MIN_NODES_PER_BUMP grid nodes
/// across its bump; refine locally and warn otherwise.
fn resolve_grid(
    grid: &TimeGrid,
    coeff: &DistributionalCoefficient,
    omega: f64,
    eps: f64,
    warnings: &mut Vec<String>,
) -> TimeGrid {
    let mut out = grid.clone();
    let centers: Vec<f64> = coeff
        .atoms
        .iter()
        .map(|a| a.t0)
        .chain(coeff.jumps.iter().map(|j| j.t0))
        .collect();
    for t0 in centers {
        let inside = out
            .points()
            .iter()
            .filter(|&&t| (t - t0).abs() <= omega)
            .count();
        if inside < MIN_NODES_PER_BUMP {
            warnings.push(format!(
                "eps={eps}: only {inside} grid nodes across the bump at t0={t0} (width {omega:.4}); refining locally"
            ));
            out = out.refine_around(t0, omega, MIN_NODES_PER_BUMP);
        }
    }
    out
}

/// Solve the regularized problem for every ε in the schedule and fit the
/// moderateness exponent of the solution norms.
#[allow(clippy::too_many_arguments)]
pub fn veryweak_solve(
    kernel: &Kernel,
    spec: &LatticeSpec,
    dec: &Arc<SpectralDecomposition>,
    coeff: &DistributionalCoefficient,
    source: &DistributionalSource,
    u0: &[f64],
    schedule: &EpsilonSchedule,
    grid: &TimeGrid,
    s: f64,
    mollifier: &Mollifier,
) -> Result<VeryWeakFamily> {
    let t_final = grid.t_final();
    let mut warnings = Vec::new();
    let mut omegas = Vec::new();
    let mut sup_a = Vec::new();
    let mut sol_norms = Vec::new();
    let mut fields = Vec::new();
    for &eps in &schedule.epsilons {
        let omega = schedule.omega(eps);
        omegas.push(omega);
        let solve_grid = resolve_grid(grid, coeff, omega, eps, &mut warnings);
        let a_eps = regularize(coeff, mollifier, schedule, eps, t_final)?;
        let profile = CoefficientProfile::regular(a_eps.clone(), t_final)
            .map_err(|e| Error::InvalidCoefficient(format!("eps={eps}: {e}")))?;
        let f_eps = source.regularize(mollifier, schedule, eps, spec, dec, &solve_grid)?;
        let field = solver::solve_full(kernel, spec, dec, &profile, u0, &f_eps, &solve_grid)?;
        let sup = solve_grid
            .points()
            .iter()
            .map(|&t| a_eps(t))
            .fold(f64::NEG_INFINITY, f64::max);
        let norm = (0..solve_grid.len())
            .map(|m| field.sobolev_norm_at(m, 2.0 + s))
            .fold(0.0f64, f64::max);
        sup_a.push(sup);
        sol_norms.push(norm);
        fields.push(field);
    }
    let moderateness = moderateness_fit(&schedule.epsilons, &sol_norms)?;
    Ok(VeryWeakFamily {
        epsilons: schedule.epsilons.clone(),
        omegas,
        sup_a,
        sol_norms,
        fields,
        warnings,
        moderateness,
    })
}

/// How the second family differs from the first in a uniqueness experiment.
#[derive(Debug, Clone, Copy)]
pub enum CoefficientPerturbation {
    Identical,
    /// ã_ε = a_ε + amplitude · ε^exponent.
    PowerLaw { amplitude: f64, exponent: f64 },
    /// ã_ε = a_ε + amplitude (not negligible; the experiment must fail).
    Offset { amplitude: f64 },
}

impl CoefficientPerturbation {
    fn delta(&self, eps: f64) -> f64 {
        match self {
            CoefficientPerturbation::Identical => 0.0,
            CoefficientPerturbation::PowerLaw { amplitude, exponent } => {
                amplitude * eps.powf(*exponent)
            }
            CoefficientPerturbation::Offset { amplitude } => *amplitude,
        }
    }
}

#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub coeff_diffs: Vec<f64>,
    pub solution_diffs: Vec<f64>,
    /// sup_t a_ε of the base family, per ε.
    pub base_sup_a: Vec<f64>,
    /// Sup over the grid of the H^{2+s} norm of the base family, per ε.
    pub base_sol_norms: Vec<f64>,
    pub coeff_negligibility: NegligibilityReport,
    pub coeff_slope: f64,
    pub solution_slope: f64,
    pub pass: bool,
}

/// Solve two negligibly-different regularization families and check that the
/// solution difference decays at least like the coefficient difference
/// (slopes compared with 0.5 tolerance).
#[allow(clippy::too_many_arguments)]
pub fn uniqueness_experiment(
    kernel: &Kernel,
    spec: &LatticeSpec,
    dec: &Arc<SpectralDecomposition>,
    coeff: &DistributionalCoefficient,
    source: &DistributionalSource,
    u0: &[f64],
    schedule: &EpsilonSchedule,
    grid: &TimeGrid,
    s: f64,
    mollifier: &Mollifier,
    perturbation: CoefficientPerturbation,
) -> Result<UniquenessReport> {
    let t_final = grid.t_final();
    let mut coeff_diffs = Vec::new();
    let mut solution_diffs = Vec::new();
    let mut base_sup_a = Vec::new();
    let mut base_sol_norms = Vec::new();
    let mut warnings = Vec::new();
    for &eps in &schedule.epsilons {
        let omega = schedule.omega(eps);
        let solve_grid = resolve_grid(grid, coeff, omega, eps, &mut warnings);
        let a_eps = regularize(coeff, mollifier, schedule, eps, t_final)?;
        base_sup_a.push(
            solve_grid
                .points()
                .iter()
                .map(|&t| a_eps(t))
                .fold(f64::NEG_INFINITY, f64::max),
        );
        let delta = perturbation.delta(eps);
        let a_tilde = {
            let base = a_eps.clone();
            move |t: f64| base(t) + delta
        };
        let p1 = CoefficientProfile::regular(a_eps, t_final)
            .map_err(|e| Error::InvalidCoefficient(format!("eps={eps}: {e}")))?;
        let p2 = CoefficientProfile::regular(a_tilde, t_final)
            .map_err(|e| Error::InvalidCoefficient(format!("eps={eps}: {e}")))?;
        let f_eps = source.regularize(mollifier, schedule, eps, spec, dec, &solve_grid)?;
        let u1 = solver::solve_full(kernel, spec, dec, &p1, u0, &f_eps, &solve_grid)?;
        let u2 = solver::solve_full(kernel, spec, dec, &p2, u0, &f_eps, &solve_grid)?;
        let mut diff = 0.0f64;
        let mut base_norm = 0.0f64;
        for m in 0..solve_grid.len() {
            let row: Vec<Complex64> = u1.modes[m]
                .0
                .iter()
                .zip(&u2.modes[m].0)
                .map(|(a, b)| a - b)
                .collect();
            diff = diff.max(dec.sobolev_norm(&crate::spectral::ModeVector(row), 2.0 + s));
            base_norm = base_norm.max(u1.sobolev_norm_at(m, 2.0 + s));
        }
        coeff_diffs.push(delta.abs());
        solution_diffs.push(diff);
        base_sol_norms.push(base_norm);
    }
    let coeff_negligibility = negligibility_check(&schedule.epsilons, &coeff_diffs, &[1, 2, 3])?;
    let coeff_slope = coeff_negligibility.tail_slope;
    let solution_slope = negligibility_check(&schedule.epsilons, &solution_diffs, &[1])?.tail_slope;
    // Gate: the perturbed family must differ negligibly (at least ε¹ decay).
    let negligible = coeff_negligibility.all_zero || coeff_negligibility.passes[0].1;
    let pass = negligible
        && (solution_diffs.iter().all(|&d| d == 0.0) || solution_slope >= coeff_slope - 0.5);
    Ok(UniquenessReport {
        coeff_diffs,
        solution_diffs,
        base_sup_a,
        base_sol_norms,
        coeff_negligibility,
        coeff_slope,
        solution_slope,
        pass,
    })
}

#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub epsilons: Vec<f64>,
    /// e(ε) = max_t ‖u_ε(t) − u(t)‖_{H^{2+s}}.
    pub errors: Vec<f64>,
    /// sup_t a_ε per ε.
    pub sup_a: Vec<f64>,
    /// Sup over the grid of the H^{2+s} norm of u_ε, per ε.
    pub sol_norms: Vec<f64>,
    pub monotone_tail: bool,
    /// e(ε_min) / e(ε_max).
    pub final_ratio: f64,
    pub pass: bool,
}

/// Convergence of mollified solves to the classical solution for a
/// continuous coefficient: e(ε) must not increase along the schedule tail
/// and must shrink by at least 5× across the whole schedule.
#[allow(clippy::too_many_arguments)]
pub fn consistency_experiment(
    kernel: &Kernel,
    spec: &LatticeSpec,
    dec: &Arc<SpectralDecomposition>,
    a_smooth: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    source: &SourceTerm,
    u0: &[f64],
    schedule: &EpsilonSchedule,
    grid: &TimeGrid,
    s: f64,
    mollifier: &Mollifier,
) -> Result<ConsistencyReport> {
    let t_final = grid.t_final();
    let a_ref = Arc::clone(&a_smooth);
    let classical_profile = CoefficientProfile::regular(move |t| a_ref(t), t_final)?;
    let classical = solver::solve_full(kernel, spec, dec, &classical_profile, u0, source, grid)?;
    let coeff = DistributionalCoefficient {
        smooth: a_smooth,
        atoms: Vec::new(),
        jumps: Vec::new(),
        floor: classical_profile.floor(),
    };
    let mut errors = Vec::new();
    let mut sup_a = Vec::new();
    let mut sol_norms = Vec::new();
    for &eps in &schedule.epsilons {
        let a_eps = regularize(&coeff, mollifier, schedule, eps, t_final)?;
        sup_a.push(
            grid.points()
                .iter()
                .map(|&t| a_eps(t))
                .fold(f64::NEG_INFINITY, f64::max),
        );
        let profile = CoefficientProfile::regular(a_eps, t_final)
            .map_err(|e| Error::InvalidCoefficient(format!("eps={eps}: {e}")))?;
        let field = solver::solve_full(kernel, spec, dec, &profile, u0, source, grid)?;
        let mut err = 0.0f64;
        let mut norm = 0.0f64;
        for m in 0..grid.len() {
            let row: Vec<Complex64> = field.modes[m]
                .0
                .iter()
                .zip(&classical.modes[m].0)
                .map(|(a, b)| a - b)
                .collect();
            err = err.max(dec.sobolev_norm(&crate::spectral::ModeVector(row), 2.0 + s));
            norm = norm.max(field.sobolev_norm_at(m, 2.0 + s));
        }
        errors.push(err);
        sol_norms.push(norm);
    }
    let half = errors.len() / 2;
    let monotone_tail = errors[half..]
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14);
    let final_ratio = if errors[0] == 0.0 {
        if *errors.last().unwrap() == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        errors.last().unwrap() / errors[0]
    };
    let exact_everywhere = errors.iter().all(|&e| e <= 1e-8);
    let pass = exact_everywhere || (monotone_tail && final_ratio <= 0.2);
    Ok(ConsistencyReport {
        epsilons: schedule.epsilons.clone(),
        errors,
        sup_a,
        sol_norms,
        monotone_tail,
        final_ratio,
        pass,
    })
}
