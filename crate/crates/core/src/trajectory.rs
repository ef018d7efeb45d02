//! Seeded Monte Carlo engine at the conditional-Gaussian level.
//!
//! Each trajectory propagates the exact conditional state of the cavity mode:
//! homodyne outcomes are sampled from their true marginals, means are updated
//! by Gaussian conditioning, and the covariance recursion is deterministic.
//! This is exact for the linear dynamics here and serves as the independent
//! oracle for the closed forms in [`crate::analytic`].

use nalgebra::Matrix2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{output_state, AnalyticError, ProtocolConfig};
use crate::gaussian::{mirror_mix, GaussianError, QuadratureState, VACUUM_VAR};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Gaussian(#[from] GaussianError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("measurement record has {got} outcomes but the config runs {expected} cycles")]
    RecordMismatch { expected: usize, got: usize },
    #[error("ensemble statistics need at least 2 trajectories, got {0}")]
    TooFewTrajectories(usize),
}

/// Homodyne currents of one trajectory, in emission order `i_P1 .. i_PN`.
/// Empty for the passive strategies C and D.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementRecord {
    outcomes: Vec<f64>,
}

impl MeasurementRecord {
    pub fn new(outcomes: Vec<f64>) -> Self {
        Self { outcomes }
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }
}

/// Final corrected conditional state plus the record that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub final_state: QuadratureState,
    pub record: MeasurementRecord,
}

/// One round trip: crystal gain, mirror mixing with a fresh meter pulse, and
/// for the erasing strategies a homodyne detection of the leaked P quadrature.
///
/// Returns the post-cycle conditional signal state and the sampled outcome
/// (`None` for the passive strategies, which trace the meter out).
pub fn run_cycle<R: Rng + ?Sized>(
    signal: &QuadratureState,
    cfg: &ProtocolConfig,
    rng: &mut R,
) -> Result<(QuadratureState, Option<f64>), TrajectoryError> {
    let gained = signal.squeeze_gain(cfg.gain())?;
    let meter = cfg.meter().state();
    let joint = mirror_mix(&gained, &meter, cfg.reflectivity())?;
    if cfg.strategy().is_erasing() {
        let (outcome, conditioned) = joint.homodyne_meter_p(rng)?;
        Ok((conditioned, Some(outcome)))
    } else {
        Ok((joint.signal_marginal(), None))
    }
}

/// Feed-forward weight applied to the k-th outcome (1-based, emission order):
/// `(T/R) (RG)^{k-N}`. Summed against the record this cancels every meter
/// term in the evolved P quadrature, leaving `(RG)^{-N} P_in`.
pub fn feedforward_weight(cfg: &ProtocolConfig, k: u32) -> f64 {
    let r = cfg.reflectivity();
    let rg = r * cfg.gain();
    (cfg.transmissivity() / r) * rg.powi(k as i32 - cfg.cycles() as i32)
}

/// The single classical correction performed after all cycles.
///
/// Erasing strategies: one displacement of the P mean by the weighted sum of
/// the recorded currents, followed (storage only) by the final squeezing
/// `X -> X / R^N`, `P -> R^N P`. Passive strategies with the universal flag
/// (storage only) instead get a phase-insensitive amplification of gain
/// `R^{-N}` that restores the means and adds one vacuum unit of ancilla noise
/// per `(R^{-2N} - 1)`.
pub fn apply_feedforward(
    state: &QuadratureState,
    record: &MeasurementRecord,
    cfg: &ProtocolConfig,
) -> Result<QuadratureState, TrajectoryError> {
    apply_feedforward_scaled(state, record, cfg, 1.0)
}

/// `apply_feedforward` with every weight multiplied by `scale`; scales other
/// than one deliberately corrupt the correction for sensitivity probes.
pub fn apply_feedforward_scaled(
    state: &QuadratureState,
    record: &MeasurementRecord,
    cfg: &ProtocolConfig,
    scale: f64,
) -> Result<QuadratureState, TrajectoryError> {
    let n = cfg.cycles();
    if cfg.strategy().is_erasing() {
        if record.len() != n as usize {
            return Err(TrajectoryError::RecordMismatch {
                expected: n as usize,
                got: record.len(),
            });
        }
        let r = cfg.reflectivity();
        let rg = r * cfg.gain();
        let mut weight = scale * (cfg.transmissivity() / r) * rg.powi(1 - n as i32);
        let mut dp = 0.0;
        for &outcome in record.outcomes() {
            dp += weight * outcome;
            weight *= rg;
        }
        let displaced = state.displaced(0.0, dp);
        if cfg.is_storage() {
            Ok(displaced.squeeze_gain(r.powi(-(n as i32)))?)
        } else {
            Ok(displaced)
        }
    } else {
        if !record.is_empty() {
            return Err(TrajectoryError::RecordMismatch {
                expected: 0,
                got: record.len(),
            });
        }
        if cfg.is_storage() && cfg.universal_correction() {
            let g2 = cfg.reflectivity().powi(-2 * n as i32);
            let cov = state.cov() * g2 + Matrix2::identity() * ((g2 - 1.0) * VACUUM_VAR);
            Ok(QuadratureState::from_raw(state.mean() * g2.sqrt(), cov))
        } else {
            Ok(*state)
        }
    }
}

/// Runs all cycles and the final correction for one trajectory.
pub fn run_trajectory<R: Rng + ?Sized>(
    cfg: &ProtocolConfig,
    input: &QuadratureState,
    rng: &mut R,
) -> Result<TrajectoryResult, TrajectoryError> {
    run_trajectory_scaled(cfg, input, rng, 1.0)
}

fn run_trajectory_scaled<R: Rng + ?Sized>(
    cfg: &ProtocolConfig,
    input: &QuadratureState,
    rng: &mut R,
    scale: f64,
) -> Result<TrajectoryResult, TrajectoryError> {
    let mut state = *input;
    let mut outcomes = Vec::with_capacity(if cfg.strategy().is_erasing() {
        cfg.cycles() as usize
    } else {
        0
    });
    for _ in 0..cfg.cycles() {
        let (next, outcome) = run_cycle(&state, cfg, rng)?;
        state = next;
        if let Some(i) = outcome {
            outcomes.push(i);
        }
    }
    let record = MeasurementRecord::new(outcomes);
    let final_state = apply_feedforward_scaled(&state, &record, cfg, scale)?;
    Ok(TrajectoryResult {
        final_state,
        record,
    })
}

/// Knobs for an ensemble run beyond the physics config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub n_traj: usize,
    pub seed: u64,
    /// Multiplies every feed-forward weight; 1.0 is the faithful protocol.
    pub feedforward_scale: f64,
}

impl RunOptions {
    pub fn new(n_traj: usize, seed: u64) -> Self {
        Self {
            n_traj,
            seed,
            feedforward_scale: 1.0,
        }
    }
}

/// Number of jackknife blocks (fewer when the ensemble is tiny).
const JACKKNIFE_BLOCKS: usize = 100;

/// Floor applied to a standard error before forming a z-score, so that
/// deterministic moments (the passive strategies sample nothing) compare by
/// relative rounding error instead of dividing by zero.
const Z_SCORE_SE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct BlockSums {
    n: usize,
    sx: f64,
    sp: f64,
    sxx: f64,
    spp: f64,
    sxp: f64,
}

impl BlockSums {
    fn add(&mut self, mx: f64, mp: f64) {
        self.n += 1;
        self.sx += mx;
        self.sp += mp;
        self.sxx += mx * mx;
        self.spp += mp * mp;
        self.sxp += mx * mp;
    }

    fn merged(blocks: &[BlockSums]) -> BlockSums {
        let mut total = BlockSums::default();
        for b in blocks {
            total.n += b.n;
            total.sx += b.sx;
            total.sp += b.sp;
            total.sxx += b.sxx;
            total.spp += b.spp;
            total.sxp += b.sxp;
        }
        total
    }

    fn minus(&self, other: &BlockSums) -> BlockSums {
        BlockSums {
            n: self.n - other.n,
            sx: self.sx - other.sx,
            sp: self.sp - other.sp,
            sxx: self.sxx - other.sxx,
            spp: self.spp - other.spp,
            sxp: self.sxp - other.sxp,
        }
    }

    fn mean_x(&self) -> f64 {
        self.sx / self.n as f64
    }

    fn mean_p(&self) -> f64 {
        self.sp / self.n as f64
    }

    /// Unbiased sample covariance of the conditional means.
    fn spread(&self) -> Matrix2<f64> {
        let n = self.n as f64;
        let vx = (self.sxx - self.sx * self.sx / n) / (n - 1.0);
        let vp = (self.spp - self.sp * self.sp / n) / (n - 1.0);
        let cxp = (self.sxp - self.sx * self.sp / n) / (n - 1.0);
        Matrix2::new(vx.max(0.0), cxp, cxp, vp.max(0.0))
    }
}

/// Ensemble moments derived from a set of block sums plus the shared
/// conditional covariance; used for jackknife resampling of any estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleMoments {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

fn moments_of(total: &BlockSums, cond: &Matrix2<f64>) -> EnsembleMoments {
    let spread = total.spread();
    EnsembleMoments {
        mean_x: total.mean_x(),
        mean_p: total.mean_p(),
        var_x: cond[(0, 0)] + spread[(0, 0)],
        var_p: cond[(1, 1)] + spread[(1, 1)],
        cov_xp: cond[(0, 1)] + spread[(0, 1)],
    }
}

/// Law-of-total-variance estimate of the physical output state from a seeded
/// trajectory ensemble: shared conditional covariance plus the sample
/// covariance of the corrected conditional means.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n_traj: usize,
    pub mean_x: f64,
    pub mean_p: f64,
    /// Conditional covariance + spread of conditional means.
    pub ens_cov: Matrix2<f64>,
    /// Outcome-independent conditional covariance shared by all trajectories.
    pub cond_cov: Matrix2<f64>,
    pub se_mean_x: f64,
    pub se_mean_p: f64,
    pub se_var_x: f64,
    pub se_var_p: f64,
    blocks: Vec<BlockSums>,
}

impl EnsembleStats {
    pub fn var_x(&self) -> f64 {
        self.ens_cov[(0, 0)]
    }

    pub fn var_p(&self) -> f64 {
        self.ens_cov[(1, 1)]
    }

    pub fn cov_xp(&self) -> f64 {
        self.ens_cov[(0, 1)]
    }

    /// Point estimate and jackknife standard error of any statistic of the
    /// ensemble moments (block-deletion over the fixed trajectory blocks).
    pub fn jackknife<F: Fn(&EnsembleMoments) -> f64>(&self, stat: F) -> (f64, f64) {
        let total = BlockSums::merged(&self.blocks);
        let estimate = stat(&moments_of(&total, &self.cond_cov));
        let b = self.blocks.len() as f64;
        let loo: Vec<f64> = self
            .blocks
            .iter()
            .map(|blk| stat(&moments_of(&total.minus(blk), &self.cond_cov)))
            .collect();
        let loo_mean = loo.iter().sum::<f64>() / b;
        let var = loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>() * (b - 1.0) / b;
        (estimate, var.sqrt())
    }
}

fn block_ranges(n_traj: usize) -> Vec<std::ops::Range<usize>> {
    let blocks = JACKKNIFE_BLOCKS.min(n_traj);
    let base = n_traj / blocks;
    let rem = n_traj % blocks;
    let mut ranges = Vec::with_capacity(blocks);
    let mut start = 0;
    for b in 0..blocks {
        let len = base + usize::from(b < rem);
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}

/// Runs `opts.n_traj` independent trajectories with per-trajectory RNG
/// streams split off the master seed, and reduces them blockwise in a fixed
/// order. The result is bit-identical for fixed options regardless of how
/// many worker threads execute the blocks.
pub fn run_ensemble_with(
    cfg: &ProtocolConfig,
    input: &QuadratureState,
    opts: &RunOptions,
) -> Result<EnsembleStats, TrajectoryError> {
    if opts.n_traj < 2 {
        return Err(TrajectoryError::TooFewTrajectories(opts.n_traj));
    }
    let ranges = block_ranges(opts.n_traj);
    let per_block: Result<Vec<(BlockSums, Matrix2<f64>)>, TrajectoryError> = ranges
        .par_iter()
        .map(|range| {
            let mut sums = BlockSums::default();
            let mut cond = Matrix2::zeros();
            for t in range.clone() {
                let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
                rng.set_stream(t as u64);
                let traj = run_trajectory_scaled(cfg, input, &mut rng, opts.feedforward_scale)?;
                sums.add(traj.final_state.mean_x(), traj.final_state.mean_p());
                if t == range.start {
                    cond = traj.final_state.cov();
                }
            }
            Ok((sums, cond))
        })
        .collect();
    let per_block = per_block?;

    // Gaussian conditioning makes the covariance outcome-independent, so every
    // block must report the same matrix.
    let cond_cov = per_block[0].1;
    debug_assert!(per_block.iter().all(|(_, c)| *c == cond_cov));

    let blocks: Vec<BlockSums> = per_block.into_iter().map(|(s, _)| s).collect();
    let total = BlockSums::merged(&blocks);
    let m = moments_of(&total, &cond_cov);
    let spread = total.spread();

    let stats_shell = EnsembleStats {
        n_traj: opts.n_traj,
        mean_x: m.mean_x,
        mean_p: m.mean_p,
        ens_cov: cond_cov + spread,
        cond_cov,
        se_mean_x: 0.0,
        se_mean_p: 0.0,
        se_var_x: 0.0,
        se_var_p: 0.0,
        blocks,
    };
    let (_, se_mean_x) = stats_shell.jackknife(|m| m.mean_x);
    let (_, se_mean_p) = stats_shell.jackknife(|m| m.mean_p);
    let (_, se_var_x) = stats_shell.jackknife(|m| m.var_x);
    let (_, se_var_p) = stats_shell.jackknife(|m| m.var_p);
    Ok(EnsembleStats {
        se_mean_x,
        se_mean_p,
        se_var_x,
        se_var_p,
        ..stats_shell
    })
}

pub fn run_ensemble(
    cfg: &ProtocolConfig,
    input: &QuadratureState,
    n_traj: usize,
    seed: u64,
) -> Result<EnsembleStats, TrajectoryError> {
    run_ensemble_with(cfg, input, &RunOptions::new(n_traj, seed))
}

/// The four moments compared between Monte Carlo and the closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    MeanX,
    MeanP,
    VarX,
    VarP,
}

impl Moment {
    pub const ALL: [Moment; 4] = [Moment::MeanX, Moment::MeanP, Moment::VarX, Moment::VarP];

    pub fn label(&self) -> &'static str {
        match self {
            Moment::MeanX => "mean_x",
            Moment::MeanP => "mean_p",
            Moment::VarX => "var_x",
            Moment::VarP => "var_p",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCheck {
    pub moment: Moment,
    pub mc: f64,
    pub analytic: f64,
    pub se: f64,
    pub z: f64,
}

/// Per-moment z-scores of one ensemble against the analytic prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<MomentCheck>,
    pub stats: EnsembleStats,
}

impl ValidationReport {
    pub fn max_abs_z(&self) -> f64 {
        self.checks.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }

    pub fn passes(&self, gate: f64) -> bool {
        self.checks.iter().all(|c| c.z.abs() < gate)
    }
}

fn z_score(mc: f64, analytic: f64, se: f64) -> f64 {
    let floor = Z_SCORE_SE_FLOOR * analytic.abs().max(1.0);
    (mc - analytic) / se.max(floor)
}

/// Runs an ensemble and scores each output moment against
/// [`crate::analytic::output_state`].
pub fn cross_validate_with(
    cfg: &ProtocolConfig,
    input: &QuadratureState,
    opts: &RunOptions,
) -> Result<ValidationReport, TrajectoryError> {
    let predicted = output_state(cfg, input)?;
    let stats = run_ensemble_with(cfg, input, opts)?;
    let checks = Moment::ALL
        .iter()
        .map(|&moment| {
            let (mc, analytic, se) = match moment {
                Moment::MeanX => (stats.mean_x, predicted.mean_x(), stats.se_mean_x),
                Moment::MeanP => (stats.mean_p, predicted.mean_p(), stats.se_mean_p),
                Moment::VarX => (stats.var_x(), predicted.var_x(), stats.se_var_x),
                Moment::VarP => (stats.var_p(), predicted.var_p(), stats.se_var_p),
            };
            MomentCheck {
                moment,
                mc,
                analytic,
                se,
                z: z_score(mc, analytic, se),
            }
        })
        .collect();
    Ok(ValidationReport { checks, stats })
}

pub fn cross_validate(
    cfg: &ProtocolConfig,
    input: &QuadratureState,
    n_traj: usize,
    seed: u64,
) -> Result<ValidationReport, TrajectoryError> {
    cross_validate_with(cfg, input, &RunOptions::new(n_traj, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::Strategy;
    use approx::assert_relative_eq;

    const FIG2_METER_VAR: f64 = 0.5 * 0.1353352832366127;

    fn fig2(strategy: Strategy, cycles: u32) -> ProtocolConfig {
        ProtocolConfig::storage(strategy, 0.99, cycles, FIG2_METER_VAR, true).unwrap()
    }

    #[test]
    fn lossless_mirror_leaves_signal_untouched() {
        let cfg = ProtocolConfig::storage(
            Strategy::SqueezedMeterErasing,
            1.0,
            1,
            FIG2_METER_VAR,
            true,
        )
        .unwrap();
        let input = QuadratureState::coherent(2.0, -1.0);
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let (state, outcome) = run_cycle(&input, &cfg, &mut rng).unwrap();
        assert_eq!(state, input);

        // outcome is distributed as the meter's own P marginal
        let anti = 0.25 / FIG2_METER_VAR;
        let mut sum2 = 0.0;
        let n = 100_000;
        for _ in 0..n {
            let (_, i) = run_cycle(&input, &cfg, &mut rng).unwrap();
            let i = i.unwrap();
            sum2 += i * i;
        }
        assert_relative_eq!(sum2 / n as f64, anti, max_relative = 0.02);
        let _ = outcome;
    }

    #[test]
    fn single_cycle_conditional_variance_reference() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let (state, outcome) = run_cycle(&QuadratureState::vacuum(), &cfg, &mut rng).unwrap();
        assert!(outcome.is_some());
        assert_relative_eq!(state.var_p(), 0.5087540432470583, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_is_a_fixed_point_of_the_unprotected_cycle() {
        let cfg = fig2(Strategy::Unprotected, 1);
        let mut rng = ChaCha12Rng::seed_from_u64(0);
        let (state, outcome) = run_cycle(&QuadratureState::vacuum(), &cfg, &mut rng).unwrap();
        assert!(outcome.is_none());
        assert_relative_eq!(state.var_x(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(state.var_p(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn feedforward_identities() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 0);
        let input = QuadratureState::coherent(1.0, 2.0);
        let out = apply_feedforward(&input, &MeasurementRecord::default(), &cfg).unwrap();
        assert_eq!(out, input);

        // all-zero record reduces to the pure squeezing correction
        let cfg = fig2(Strategy::SqueezedMeterErasing, 7);
        let record = MeasurementRecord::new(vec![0.0; 7]);
        let conditional = QuadratureState::new(0.4, -0.3, 0.6, 0.45, 0.0).unwrap();
        let corrected = apply_feedforward(&conditional, &record, &cfg).unwrap();
        let expected = conditional.squeeze_gain(0.99f64.powi(-7)).unwrap();
        assert_eq!(corrected, expected);

        // record/strategy mismatches are rejected
        let short = MeasurementRecord::new(vec![0.0; 3]);
        assert!(matches!(
            apply_feedforward(&conditional, &short, &cfg),
            Err(TrajectoryError::RecordMismatch { expected: 7, got: 3 })
        ));
        let passive = fig2(Strategy::Unprotected, 7);
        assert!(apply_feedforward(&conditional, &record, &passive).is_err());
    }

    #[test]
    fn passive_trajectories_have_empty_records() {
        let cfg = fig2(Strategy::SqueezedInjection, 20);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let traj = run_trajectory(&cfg, &QuadratureState::vacuum(), &mut rng).unwrap();
        assert!(traj.record.is_empty());

        let erased = fig2(Strategy::VacuumMeterErasing, 20);
        let traj = run_trajectory(&erased, &QuadratureState::vacuum(), &mut rng).unwrap();
        assert_eq!(traj.record.len(), 20);
    }

    #[test]
    fn ensemble_is_deterministic_under_fixed_seed() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 25);
        let input = QuadratureState::coherent(3.0, 1.0);
        let a = run_ensemble(&cfg, &input, 3000, 42).unwrap();
        let b = run_ensemble(&cfg, &input, 3000, 42).unwrap();
        assert_eq!(a, b);
        let c = run_ensemble(&cfg, &input, 3000, 43).unwrap();
        assert_ne!(a.mean_p, c.mean_p);
    }

    #[test]
    fn lossless_ensemble_reproduces_the_input_exactly() {
        let cfg = ProtocolConfig::storage(
            Strategy::SqueezedMeterErasing,
            1.0,
            10,
            FIG2_METER_VAR,
            true,
        )
        .unwrap();
        let input = QuadratureState::coherent(3.0, 1.0);
        let stats = run_ensemble(&cfg, &input, 500, 7).unwrap();
        assert_eq!(stats.mean_x, 3.0);
        assert_eq!(stats.mean_p, 1.0);
        assert_eq!(stats.ens_cov, input.cov());
        assert_eq!(stats.se_var_p, 0.0);
    }

    #[test]
    fn conditional_covariance_is_trajectory_independent() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 30);
        let input = QuadratureState::coherent(1.0, -2.0);
        let mut rng_a = ChaCha12Rng::seed_from_u64(1);
        let mut rng_b = ChaCha12Rng::seed_from_u64(999);
        let a = run_trajectory(&cfg, &input, &mut rng_a).unwrap();
        let b = run_trajectory(&cfg, &input, &mut rng_b).unwrap();
        assert_eq!(a.final_state.cov(), b.final_state.cov());
        assert_ne!(a.final_state.mean_p(), b.final_state.mean_p());
    }

    #[test]
    fn storage_ensemble_matches_closed_forms() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 50);
        let input = QuadratureState::coherent(3.0, 1.0);
        let report = cross_validate(&cfg, &input, 20_000, 11).unwrap();
        assert!(
            report.passes(3.0),
            "max |z| = {}, checks: {:?}",
            report.max_abs_z(),
            report.checks
        );
    }

    #[test]
    fn generation_ensemble_matches_closed_forms() {
        let cfg = ProtocolConfig::generation(
            Strategy::VacuumMeterErasing,
            0.99,
            (0.02f64).exp(),
            60,
            FIG2_METER_VAR,
        )
        .unwrap();
        let report = cross_validate(&cfg, &QuadratureState::vacuum(), 20_000, 12).unwrap();
        assert!(report.passes(3.0), "max |z| = {}", report.max_abs_z());
    }

    #[test]
    fn passive_ensembles_are_deterministic_and_exact() {
        for strategy in [Strategy::Unprotected, Strategy::SqueezedInjection] {
            let cfg = fig2(strategy, 40);
            let input = QuadratureState::coherent(3.0, 1.0);
            let report = cross_validate(&cfg, &input, 100, 0).unwrap();
            assert!(report.max_abs_z() < 1e-2, "max |z| = {}", report.max_abs_z());
            assert_eq!(report.stats.se_mean_x, 0.0);
        }
    }

    #[test]
    fn zero_cycles_gives_exactly_zero_z() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 0);
        let input = QuadratureState::coherent(0.5, -0.25);
        let report = cross_validate(&cfg, &input, 100, 3).unwrap();
        assert_eq!(report.max_abs_z(), 0.0);
    }

    #[test]
    fn corrupted_feedforward_is_detected() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 100);
        let input = QuadratureState::coherent(3.0, 1.0);
        let mut opts = RunOptions::new(20_000, 21);
        opts.feedforward_scale = 1.1;
        let report = cross_validate_with(&cfg, &input, &opts).unwrap();
        assert!(
            report.max_abs_z() > 5.0,
            "corruption went unnoticed: max |z| = {}",
            report.max_abs_z()
        );
    }

    #[test]
    fn ensemble_rejects_tiny_runs() {
        let cfg = fig2(Strategy::SqueezedMeterErasing, 1);
        let input = QuadratureState::vacuum();
        assert!(matches!(
            run_ensemble(&cfg, &input, 1, 0),
            Err(TrajectoryError::TooFewTrajectories(1))
        ));
    }
}
