//! Single- and two-mode Gaussian states with the symplectic operations and
//! homodyne conditioning the cavity protocols are built from.
//!
//! Conventions: quadratures satisfy `[X, P] = i`, so the vacuum has variance
//! 1/2 in both quadratures and every physical covariance matrix obeys
//! `det(cov) >= 1/4`, with equality exactly for pure states.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

/// Absolute tolerance on the uncertainty bound `det(cov) >= 1/4`.
pub const UNCERTAINTY_TOL: f64 = 1e-9;
/// Tolerance for the purity test `det(cov) = 1/4`.
pub const PURITY_TOL: f64 = 1e-9;

/// Vacuum quadrature variance in this convention.
pub const VACUUM_VAR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GaussianError {
    #[error("squeezed variance must be positive, got {0}")]
    NonPositiveSqueezedVariance(f64),
    #[error("squeeze gain must be positive, got {0}")]
    NonPositiveGain(f64),
    #[error("mirror reflectivity must lie in (0, 1], got {0}")]
    ReflectivityOutOfRange(f64),
    #[error("covariance matrix is not symmetric positive-definite (det = {det})")]
    NotPositiveDefinite { det: f64 },
    #[error("covariance violates the uncertainty bound det >= 1/4 (det = {det})")]
    UncertaintyViolation { det: f64 },
    #[error("meter P variance must be positive for homodyne conditioning, got {0}")]
    DegenerateMeter(f64),
}

/// Which quadrature of a meter pulse carries the squeezing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    P,
}

/// Pure squeezed-vacuum ancilla injected at the imperfect mirror each cycle.
///
/// The realized state is a minimum-uncertainty state: the squeezed axis has
/// variance `squeezed_var` and the conjugate axis `1/(4 squeezed_var)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterSpec {
    axis: Axis,
    squeezed_var: f64,
}

impl MeterSpec {
    pub fn new(axis: Axis, squeezed_var: f64) -> Result<Self, GaussianError> {
        if !(squeezed_var > 0.0) {
            return Err(GaussianError::NonPositiveSqueezedVariance(squeezed_var));
        }
        Ok(Self { axis, squeezed_var })
    }

    /// Unsqueezed vacuum pulse.
    pub fn vacuum() -> Self {
        Self {
            axis: Axis::X,
            squeezed_var: VACUUM_VAR,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn squeezed_var(&self) -> f64 {
        self.squeezed_var
    }

    /// Variance of the X quadrature of the realized pulse.
    pub fn var_x(&self) -> f64 {
        match self.axis {
            Axis::X => self.squeezed_var,
            Axis::P => 0.25 / self.squeezed_var,
        }
    }

    /// Variance of the P quadrature of the realized pulse.
    pub fn var_p(&self) -> f64 {
        match self.axis {
            Axis::X => 0.25 / self.squeezed_var,
            Axis::P => self.squeezed_var,
        }
    }

    /// The zero-mean pure state this spec describes.
    pub fn state(&self) -> QuadratureState {
        QuadratureState::from_raw(
            Vector2::zeros(),
            Matrix2::new(self.var_x(), 0.0, 0.0, self.var_p()),
        )
    }
}

/// Single-mode Gaussian state: quadrature means plus a 2x2 covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureState {
    mean: Vector2<f64>,
    cov: Matrix2<f64>,
}

impl QuadratureState {
    /// Validating constructor from scalar moments.
    pub fn new(
        mean_x: f64,
        mean_p: f64,
        var_x: f64,
        var_p: f64,
        cov_xp: f64,
    ) -> Result<Self, GaussianError> {
        let cov = Matrix2::new(var_x, cov_xp, cov_xp, var_p);
        let det = cov.determinant();
        if !(var_x > 0.0 && var_p > 0.0 && det > 0.0) {
            return Err(GaussianError::NotPositiveDefinite { det });
        }
        if det < 0.25 - UNCERTAINTY_TOL {
            return Err(GaussianError::UncertaintyViolation { det });
        }
        Ok(Self::from_raw(Vector2::new(mean_x, mean_p), cov))
    }

    /// Vacuum: zero mean, covariance diag(1/2, 1/2).
    pub fn vacuum() -> Self {
        Self::from_raw(Vector2::zeros(), Matrix2::from_diagonal_element(VACUUM_VAR))
    }

    /// Pure squeezed vacuum described by `spec`.
    pub fn squeezed(spec: &MeterSpec) -> Self {
        spec.state()
    }

    /// Coherent state: vacuum covariance displaced to `(mean_x, mean_p)`.
    pub fn coherent(mean_x: f64, mean_p: f64) -> Self {
        Self::vacuum().displaced(mean_x, mean_p)
    }

    // Ops whose algebra preserves validity construct states directly.
    pub(crate) fn from_raw(mean: Vector2<f64>, cov: Matrix2<f64>) -> Self {
        Self { mean, cov }
    }

    pub fn mean_x(&self) -> f64 {
        self.mean.x
    }

    pub fn mean_p(&self) -> f64 {
        self.mean.y
    }

    pub fn mean(&self) -> Vector2<f64> {
        self.mean
    }

    pub fn var_x(&self) -> f64 {
        self.cov[(0, 0)]
    }

    pub fn var_p(&self) -> f64 {
        self.cov[(1, 1)]
    }

    pub fn cov_xp(&self) -> f64 {
        self.cov[(0, 1)]
    }

    pub fn cov(&self) -> Matrix2<f64> {
        self.cov
    }

    pub fn det_cov(&self) -> f64 {
        self.cov.determinant()
    }

    /// Pure state iff `det(cov) = 1/4` within [`PURITY_TOL`].
    pub fn is_pure(&self) -> bool {
        (self.det_cov() - 0.25).abs() <= PURITY_TOL
    }

    /// Phase-space displacement: shifts the means, leaves the covariance alone.
    pub fn displaced(&self, dx: f64, dp: f64) -> Self {
        Self::from_raw(self.mean + Vector2::new(dx, dp), self.cov)
    }

    /// Ideal single-mode squeezer: `X -> g X`, `P -> P / g`.
    pub fn squeeze_gain(&self, gain: f64) -> Result<Self, GaussianError> {
        if !(gain > 0.0) {
            return Err(GaussianError::NonPositiveGain(gain));
        }
        let s = gain_matrix(gain);
        Ok(Self::from_raw(s * self.mean, s * self.cov * s.transpose()))
    }
}

/// Two-mode Gaussian state ordered as `(x_s, p_s, x_m, p_m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    mean: Vector4<f64>,
    cov: Matrix4<f64>,
}

impl JointState {
    /// Product state of independent signal and meter modes.
    pub fn product(signal: &QuadratureState, meter: &QuadratureState) -> Self {
        let mut mean = Vector4::zeros();
        mean.fixed_rows_mut::<2>(0).copy_from(&signal.mean);
        mean.fixed_rows_mut::<2>(2).copy_from(&meter.mean);
        let mut cov = Matrix4::zeros();
        cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&signal.cov);
        cov.fixed_view_mut::<2, 2>(2, 2).copy_from(&meter.cov);
        Self { mean, cov }
    }

    pub fn mean(&self) -> Vector4<f64> {
        self.mean
    }

    pub fn cov(&self) -> Matrix4<f64> {
        self.cov
    }

    pub fn signal_marginal(&self) -> QuadratureState {
        QuadratureState::from_raw(
            self.mean.fixed_rows::<2>(0).into_owned(),
            self.cov.fixed_view::<2, 2>(0, 0).into_owned(),
        )
    }

    pub fn meter_marginal(&self) -> QuadratureState {
        QuadratureState::from_raw(
            self.mean.fixed_rows::<2>(2).into_owned(),
            self.cov.fixed_view::<2, 2>(2, 2).into_owned(),
        )
    }

    /// Homodyne detection of the meter P quadrature with a sampled outcome.
    ///
    /// Draws the outcome from the meter-P marginal and returns it together
    /// with the conditioned signal state.
    pub fn homodyne_meter_p<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<(f64, QuadratureState), GaussianError> {
        let var = self.cov[(3, 3)];
        if !(var > 0.0) {
            return Err(GaussianError::DegenerateMeter(var));
        }
        let normal = Normal::new(self.mean[3], var.sqrt()).expect("finite std dev");
        let outcome = normal.sample(rng);
        Ok((outcome, self.condition_on_meter_p(outcome)?))
    }

    /// Gaussian conditioning of the signal on a given meter-P outcome.
    ///
    /// The signal mean moves by `cross * (outcome - mean_m) / var_m` and the
    /// covariance contracts by the Schur complement `cross crossᵀ / var_m`.
    pub fn condition_on_meter_p(&self, outcome: f64) -> Result<QuadratureState, GaussianError> {
        let var_m = self.cov[(3, 3)];
        if !(var_m > 0.0) {
            return Err(GaussianError::DegenerateMeter(var_m));
        }
        let cross = Vector2::new(self.cov[(0, 3)], self.cov[(1, 3)]);
        let mean = self.mean.fixed_rows::<2>(0).into_owned()
            + cross * ((outcome - self.mean[3]) / var_m);
        let cov =
            self.cov.fixed_view::<2, 2>(0, 0).into_owned() - cross * cross.transpose() / var_m;
        Ok(QuadratureState::from_raw(mean, cov))
    }

    /// Mean of the meter P quadrature (the homodyne outcome distribution mean).
    pub fn meter_p_mean(&self) -> f64 {
        self.mean[3]
    }

    /// Variance of the meter P quadrature.
    pub fn meter_p_var(&self) -> f64 {
        self.cov[(3, 3)]
    }
}

/// Symplectic matrix of the squeezer `X -> g X, P -> P / g`.
pub fn gain_matrix(gain: f64) -> Matrix2<f64> {
    Matrix2::new(gain, 0.0, 0.0, 1.0 / gain)
}

/// Symplectic matrix of the lossy-mirror beamsplitter in `(x_s, p_s, x_m, p_m)`
/// ordering, with `T = sqrt(1 - R^2)`:
/// signal out `= R * signal + T * meter`, meter out `= T * signal - R * meter`.
pub fn beamsplitter_matrix(reflectivity: f64) -> Result<Matrix4<f64>, GaussianError> {
    if !(reflectivity > 0.0 && reflectivity <= 1.0) {
        return Err(GaussianError::ReflectivityOutOfRange(reflectivity));
    }
    let r = reflectivity;
    let t = (1.0 - r * r).sqrt();
    #[rustfmt::skip]
    let s = Matrix4::new(
        r,   0.0, t,   0.0,
        0.0, r,   0.0, t,
        t,   0.0, -r,  0.0,
        0.0, t,   0.0, -r,
    );
    Ok(s)
}

/// Mixes the intracavity signal with a fresh meter pulse at the imperfect
/// mirror, returning the correlated two-mode state.
pub fn mirror_mix(
    signal: &QuadratureState,
    meter: &QuadratureState,
    reflectivity: f64,
) -> Result<JointState, GaussianError> {
    let s = beamsplitter_matrix(reflectivity)?;
    let joint = JointState::product(signal, meter);
    Ok(JointState {
        mean: s * joint.mean,
        cov: s * joint.cov * s.transpose(),
    })
}

/// Gaussian overlap of two states, normalized so identical pure states give 1:
/// `det(Σa + Σb)^{-1/2} * exp(-δμᵀ (Σa + Σb)⁻¹ δμ / 2)`.
///
/// For zero-mean states with diagonal covariances this is
/// `[(var_xa + var_xb)(var_pa + var_pb)]^{-1/2}`.
pub fn overlap_fidelity(a: &QuadratureState, b: &QuadratureState) -> f64 {
    let sum = a.cov + b.cov;
    let det = sum.determinant();
    let dmu = a.mean - b.mean;
    let inv = sum.try_inverse().expect("valid states sum to invertible covariance");
    let exponent = -0.5 * (dmu.transpose() * inv * dmu)[(0, 0)];
    (exponent.exp() / det.sqrt()).min(1.0)
}

/// Squeezing in decibels relative to vacuum: `10 log10(v / 0.5)`.
/// Negative for squeezed variances, zero for vacuum.
pub fn variance_to_db(variance: f64) -> f64 {
    10.0 * (variance / VACUUM_VAR).log10()
}
