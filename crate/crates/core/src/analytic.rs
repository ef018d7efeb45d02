//! Closed-form output variances, fidelities, and limits for every protection
//! strategy, in both the empty-cavity storage scenario (unit gain) and the
//! squeezing-generation scenario (per-cycle gain above one).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaussian::{Axis, GaussianError, MeterSpec, QuadratureState, VACUUM_VAR};

/// Ratio is treated as degenerate (geometric sum evaluated term by term)
/// when it is closer to one than this.
const DEGENERATE_RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("per-cycle gain must be at least 1, got {0}")]
    GainBelowOne(f64),
    #[error("storage formulas require unit gain, got G = {0}")]
    StorageRequiresUnitGain(f64),
    #[error("saturation limit diverges unless G > R (R = {r}, G = {g})")]
    SaturationDiverges { r: f64, g: f64 },
    #[error("target variance {target} is unreachable: RG = {rg} <= 1 never squeezes")]
    UnreachableTarget { target: f64, rg: f64 },
    #[error("target variance must be positive, got {0}")]
    NonPositiveTarget(f64),
    #[error("analytic moments require a diagonal covariance, got cov_xp = {0}")]
    NonDiagonalInput(f64),
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
}

/// The four strategies compared by the protocol, labelled A-D in reports.
///
/// A and B erase the mirror back-action with per-cycle homodyne detection and
/// one final feed-forward correction; C and D let the cavity run open loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    /// A: meter pulses squeezed in X, homodyne erasing with feed-forward.
    #[serde(rename = "a")]
    SqueezedMeterErasing,
    /// B: unsqueezed vacuum meters, homodyne erasing with feed-forward.
    #[serde(rename = "b")]
    VacuumMeterErasing,
    /// C: unprotected storage with vacuum entering the mirror.
    #[serde(rename = "c")]
    Unprotected,
    /// D: meter pulses squeezed in P injected, no measurement.
    #[serde(rename = "d")]
    SqueezedInjection,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::SqueezedMeterErasing,
        Strategy::VacuumMeterErasing,
        Strategy::Unprotected,
        Strategy::SqueezedInjection,
    ];

    /// Report label used in figure tables.
    pub fn letter(&self) -> char {
        match self {
            Strategy::SqueezedMeterErasing => 'A',
            Strategy::VacuumMeterErasing => 'B',
            Strategy::Unprotected => 'C',
            Strategy::SqueezedInjection => 'D',
        }
    }

    /// Whether the strategy measures the leaking field and feeds forward.
    pub fn is_erasing(&self) -> bool {
        matches!(
            self,
            Strategy::SqueezedMeterErasing | Strategy::VacuumMeterErasing
        )
    }

    /// The meter pulse this strategy injects when the squeezed resource has
    /// variance `squeezed_var`: A squeezes X, D squeezes P, B and C use vacuum.
    pub fn canonical_meter(&self, squeezed_var: f64) -> Result<MeterSpec, GaussianError> {
        match self {
            Strategy::SqueezedMeterErasing => MeterSpec::new(Axis::X, squeezed_var),
            Strategy::SqueezedInjection => MeterSpec::new(Axis::P, squeezed_var),
            Strategy::VacuumMeterErasing | Strategy::Unprotected => Ok(MeterSpec::vacuum()),
        }
    }
}

/// Output variance pair `(var_x, var_p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariancePair {
    pub var_x: f64,
    pub var_p: f64,
}

impl VariancePair {
    pub fn new(var_x: f64, var_p: f64) -> Self {
        Self { var_x, var_p }
    }

    pub fn vacuum() -> Self {
        Self::new(VACUUM_VAR, VACUUM_VAR)
    }
}

/// Full parameter set for one protocol run.
///
/// `gain == 1` selects the storage scenario (final squeezing correction for
/// erasing strategies, optional universal amplification for C/D); any larger
/// gain selects squeezing generation, where no final squeezing is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    reflectivity: f64,
    gain: f64,
    cycles: u32,
    meter: MeterSpec,
    strategy: Strategy,
    universal_correction: bool,
}

impl ProtocolConfig {
    pub fn new(
        strategy: Strategy,
        reflectivity: f64,
        gain: f64,
        cycles: u32,
        meter: MeterSpec,
        universal_correction: bool,
    ) -> Result<Self, AnalyticError> {
        if !(reflectivity > 0.0 && reflectivity <= 1.0) {
            return Err(GaussianError::ReflectivityOutOfRange(reflectivity).into());
        }
        if !(gain >= 1.0) {
            return Err(AnalyticError::GainBelowOne(gain));
        }
        Ok(Self {
            reflectivity,
            gain,
            cycles,
            meter,
            strategy,
            universal_correction,
        })
    }

    /// Empty-cavity storage with the strategy's canonical meter orientation.
    pub fn storage(
        strategy: Strategy,
        reflectivity: f64,
        cycles: u32,
        meter_squeezed_var: f64,
        universal_correction: bool,
    ) -> Result<Self, AnalyticError> {
        let meter = strategy.canonical_meter(meter_squeezed_var)?;
        Self::new(strategy, reflectivity, 1.0, cycles, meter, universal_correction)
    }

    /// Squeezing generation with a nonlinear crystal of per-cycle gain `gain`.
    pub fn generation(
        strategy: Strategy,
        reflectivity: f64,
        gain: f64,
        cycles: u32,
        meter_squeezed_var: f64,
    ) -> Result<Self, AnalyticError> {
        let meter = strategy.canonical_meter(meter_squeezed_var)?;
        Self::new(strategy, reflectivity, gain, cycles, meter, false)
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }

    /// Amplitude transmissivity `T = sqrt(1 - R^2)`.
    pub fn transmissivity(&self) -> f64 {
        (1.0 - self.reflectivity * self.reflectivity).sqrt()
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn cycles(&self) -> u32 {
        self.cycles
    }

    pub fn meter(&self) -> MeterSpec {
        self.meter
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn universal_correction(&self) -> bool {
        self.universal_correction
    }

    pub fn is_storage(&self) -> bool {
        self.gain == 1.0
    }

    pub fn with_cycles(&self, cycles: u32) -> Self {
        Self { cycles, ..*self }
    }

    pub fn with_strategy(&self, strategy: Strategy) -> Result<Self, AnalyticError> {
        let meter = strategy.canonical_meter(self.meter.squeezed_var())?;
        Ok(Self {
            strategy,
            meter,
            ..*self
        })
    }
}

/// `sum_{j=0}^{n-1} q^j`, evaluated term by term near the pole at `q = 1`.
fn geometric_sum(ratio: f64, n: u32) -> f64 {
    let q = ratio * ratio;
    if (ratio - 1.0).abs() < DEGENERATE_RATIO_TOL {
        let mut acc = 0.0;
        let mut term = 1.0;
        for _ in 0..n {
            acc += term;
            term *= q;
        }
        acc
    } else {
        (1.0 - q.powi(n as i32)) / (1.0 - q)
    }
}

/// Overlap of two zero-mean Gaussian states given as variance pairs:
/// `[(var_xa + var_xb)(var_pa + var_pb)]^{-1/2}`.
pub fn fidelity_from_pairs(a: VariancePair, b: VariancePair) -> f64 {
    1.0 / ((a.var_x + b.var_x) * (a.var_p + b.var_p)).sqrt()
}

/// Output variances after `N` storage cycles (unit gain required).
///
/// Erasing strategies preserve `var_p` exactly and add `(R^{-2N} - 1)` units
/// of the meter's X variance to `var_x`. Passive strategies decay toward the
/// meter variances; with the universal correction the decayed state is
/// amplified back, adding one vacuum unit of ancilla noise per quadrature.
pub fn storage_variances(
    cfg: &ProtocolConfig,
    input: VariancePair,
) -> Result<VariancePair, AnalyticError> {
    if !cfg.is_storage() {
        return Err(AnalyticError::StorageRequiresUnitGain(cfg.gain));
    }
    let r = cfg.reflectivity;
    let n = cfg.cycles as i32;
    let decay = r.powi(2 * n); // R^{2N}
    let growth = r.powi(-2 * n); // R^{-2N}
    let meter = cfg.meter;
    Ok(match cfg.strategy {
        s if s.is_erasing() => VariancePair::new(
            input.var_x + (growth - 1.0) * meter.var_x(),
            input.var_p,
        ),
        _ if cfg.universal_correction => VariancePair::new(
            input.var_x + (growth - 1.0) * (meter.var_x() + VACUUM_VAR),
            input.var_p + (growth - 1.0) * (meter.var_p() + VACUUM_VAR),
        ),
        _ => VariancePair::new(
            decay * input.var_x + (1.0 - decay) * meter.var_x(),
            decay * input.var_p + (1.0 - decay) * meter.var_p(),
        ),
    })
}

/// Storage fidelity: overlap of the input with the stored-and-released state.
///
/// Means cancel for the erasing and universally corrected strategies; the
/// non-universal passive branch assumes a zero-mean input.
pub fn storage_fidelity(cfg: &ProtocolConfig, input: VariancePair) -> Result<f64, AnalyticError> {
    let out = storage_variances(cfg, input)?;
    Ok(fidelity_from_pairs(input, out))
}

/// Output variances of the generation scenario on vacuum input, after the
/// feed-forward displacement for erasing strategies and open loop otherwise.
/// No final squeezing correction is applied in this scenario.
pub fn generation_variances(cfg: &ProtocolConfig) -> VariancePair {
    evolved_variances(cfg, VariancePair::vacuum())
}

/// Same dynamics for a general diagonal input state.
pub(crate) fn evolved_variances(cfg: &ProtocolConfig, input: VariancePair) -> VariancePair {
    let r = cfg.reflectivity;
    let g = cfg.gain;
    let t2 = 1.0 - r * r;
    let n = cfg.cycles as i32;
    let rg = r * g;
    let meter = cfg.meter;

    let var_x = rg.powi(2 * n) * input.var_x + t2 * geometric_sum(rg, cfg.cycles) * meter.var_x();
    let var_p = if cfg.strategy.is_erasing() {
        rg.powi(-2 * n) * input.var_p
    } else {
        let rq = r / g;
        rq.powi(2 * n) * input.var_p + t2 * geometric_sum(rq, cfg.cycles) * meter.var_p()
    };
    VariancePair::new(var_x, var_p)
}

/// Large-N floor of the unprotected squeezed variance,
/// `G^2 (1 - R^2) / (G^2 - R^2) * meter_p_var`. Requires `G > R`.
pub fn saturation_limit(
    reflectivity: f64,
    gain: f64,
    meter_p_var: f64,
) -> Result<f64, AnalyticError> {
    let (r, g) = (reflectivity, gain);
    if !(g > r) {
        return Err(AnalyticError::SaturationDiverges { r, g });
    }
    Ok(g * g * (1.0 - r * r) / (g * g - r * r) * meter_p_var)
}

/// Overlap of the produced state with a zero-mean target, both given as
/// variance pairs.
pub fn target_fidelity(produced: VariancePair, target: VariancePair) -> f64 {
    fidelity_from_pairs(produced, target)
}

/// Smallest cycle count whose protected variance `(RG)^{-2N}/2` reaches
/// `target_var_p`. The closed-form estimate is re-checked against the exact
/// recursion at `N - 1` and `N` to absorb rounding in the logarithms.
pub fn min_cycles_to_var_p(
    reflectivity: f64,
    gain: f64,
    target_var_p: f64,
) -> Result<u32, AnalyticError> {
    if !(target_var_p > 0.0) {
        return Err(AnalyticError::NonPositiveTarget(target_var_p));
    }
    if target_var_p >= VACUUM_VAR {
        return Ok(0);
    }
    let rg = reflectivity * gain;
    if !(rg > 1.0) {
        return Err(AnalyticError::UnreachableTarget {
            target: target_var_p,
            rg,
        });
    }
    let protected_var = |n: u32| VACUUM_VAR * rg.powi(-2 * (n as i32));
    let mut n = ((VACUUM_VAR / target_var_p).ln() / (2.0 * rg.ln())).ceil() as u32;
    while protected_var(n) > target_var_p {
        n += 1;
    }
    while n > 0 && protected_var(n - 1) <= target_var_p {
        n -= 1;
    }
    Ok(n)
}

/// Analytic prediction of the full output state for a diagonal-covariance
/// input; the reference the Monte Carlo engine is validated against.
pub fn output_state(
    cfg: &ProtocolConfig,
    input: &QuadratureState,
) -> Result<QuadratureState, AnalyticError> {
    if input.cov_xp().abs() > 1e-12 {
        return Err(AnalyticError::NonDiagonalInput(input.cov_xp()));
    }
    let pair = VariancePair::new(input.var_x(), input.var_p());
    let n = cfg.cycles as i32;
    let r = cfg.reflectivity;
    let rg = r * cfg.gain;

    let (mean_x, mean_p, vars) = if cfg.is_storage() {
        let vars = storage_variances(cfg, pair)?;
        if cfg.strategy.is_erasing() || cfg.universal_correction {
            (input.mean_x(), input.mean_p(), vars)
        } else {
            let decay = r.powi(n);
            (decay * input.mean_x(), decay * input.mean_p(), vars)
        }
    } else {
        let vars = evolved_variances(cfg, pair);
        let mean_x = rg.powi(n) * input.mean_x();
        let mean_p = if cfg.strategy.is_erasing() {
            rg.powi(-n) * input.mean_p()
        } else {
            (r / cfg.gain).powi(n) * input.mean_p()
        };
        (mean_x, mean_p, vars)
    };
    Ok(QuadratureState::new(mean_x, mean_p, vars.var_x, vars.var_p, 0.0)?)
}
