//! Experiment specifications: the structured config file format, validation,
//! and the built-in figure presets.
//!
//! Configs are TOML with `deny_unknown_fields` everywhere, so a typo in a
//! physics parameter is a hard error instead of a silently ignored key.

use serde::{Deserialize, Serialize};

use crate::analytic::{ProtocolConfig, Strategy, VariancePair};
use crate::gaussian::{Axis, MeterSpec, QuadratureState};

use super::ExperimentError;

/// Which protocol scenario a spec drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Storage,
    Generation,
}

impl Scenario {
    pub fn label(&self) -> &'static str {
        match self {
            Scenario::Storage => "storage",
            Scenario::Generation => "generation",
        }
    }
}

/// Initial signal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum InputSpec {
    #[default]
    Vacuum,
    Coherent {
        mean_x: f64,
        mean_p: f64,
    },
    /// Pure squeezed vacuum with the given variance along `axis`.
    Squeezed {
        axis: Axis,
        variance: f64,
    },
}

impl InputSpec {
    pub fn state(&self) -> Result<QuadratureState, ExperimentError> {
        Ok(match *self {
            InputSpec::Vacuum => QuadratureState::vacuum(),
            InputSpec::Coherent { mean_x, mean_p } => QuadratureState::coherent(mean_x, mean_p),
            InputSpec::Squeezed { axis, variance } => {
                let spec = MeterSpec::new(axis, variance).map_err(|e| {
                    ExperimentError::Config(format!("input.variance: {e}"))
                })?;
                QuadratureState::squeezed(&spec)
            }
        })
    }

    pub fn variance_pair(&self) -> Result<VariancePair, ExperimentError> {
        let s = self.state()?;
        Ok(VariancePair::new(s.var_x(), s.var_p()))
    }
}

/// A parameter that is a single number for curve commands and may be a list
/// of values for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarOrList {
    Scalar(f64),
    List(Vec<f64>),
}

impl ScalarOrList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ScalarOrList::Scalar(v) => vec![*v],
            ScalarOrList::List(vs) => vs.clone(),
        }
    }

    pub fn scalar(&self, field: &str) -> Result<f64, ExperimentError> {
        match self {
            ScalarOrList::Scalar(v) => Ok(*v),
            ScalarOrList::List(vs) if vs.len() == 1 => Ok(vs[0]),
            ScalarOrList::List(_) => Err(ExperimentError::Config(format!(
                "{field}: this command takes a single value, not a list"
            ))),
        }
    }

    fn is_swept(&self) -> bool {
        matches!(self, ScalarOrList::List(vs) if vs.len() > 1)
    }
}

fn one() -> ScalarOrList {
    ScalarOrList::Scalar(1.0)
}

fn one_u32() -> u32 {
    1
}

/// Inclusive ascending range of cycle counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CycleRange {
    pub start: u32,
    pub stop: u32,
    #[serde(default = "one_u32")]
    pub step: u32,
}

impl CycleRange {
    pub fn single(n: u32) -> Self {
        Self {
            start: n,
            stop: n,
            step: 1,
        }
    }

    pub fn values(&self) -> Vec<u32> {
        (self.start..=self.stop).step_by(self.step.max(1) as usize).collect()
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        if self.step == 0 {
            return Err(ExperimentError::Config("grid.cycles.step: must be at least 1".into()));
        }
        if self.start > self.stop {
            return Err(ExperimentError::Config(format!(
                "grid.cycles: range must ascend, got start = {} > stop = {}",
                self.start, self.stop
            )));
        }
        Ok(())
    }
}

/// Physical parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub reflectivity: ScalarOrList,
    #[serde(default = "one")]
    pub gain: ScalarOrList,
    /// Squeezed variance of the meter resource (strategy A squeezes X,
    /// strategy D squeezes P, B and C ignore it and inject vacuum).
    pub meter_var: ScalarOrList,
    pub cycles: CycleRange,
}

/// The pure squeezed-P target state the squeeze command scores fidelity
/// against and the sweep command inverts for.
///
/// `var_p` defines the target state (conjugate variance follows from
/// purity). With `fidelity` set, sweeps search the cycle range for the first
/// point whose target fidelity reaches it; otherwise they invert the
/// protected variance for `var_p` in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub var_p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

impl TargetSpec {
    /// Minimum-uncertainty pair `(1/(4 var_p), var_p)`.
    pub fn state_pair(&self) -> VariancePair {
        VariancePair::new(0.25 / self.var_p, self.var_p)
    }
}

fn default_true() -> bool {
    true
}

/// A full experiment description; the unit the CLI loads, validates, and
/// echoes into every CSV it writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub strategies: Vec<Strategy>,
    /// Whether passive strategies (C/D) amplify the released state back to
    /// the input mean values (storage only).
    #[serde(default = "default_true")]
    pub universal_correction: bool,
    /// Monte Carlo trajectories per grid point; 0 = analytic columns only.
    #[serde(default)]
    pub trajectories: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub input: InputSpec,
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    /// Default output path, overridable with `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    /// Copy with the output path cleared; what gets echoed into CSV headers
    /// so that redirecting output does not change the emitted bytes.
    pub fn content_key(&self) -> Self {
        Self {
            out: None,
            ..self.clone()
        }
    }

    /// Checks shared by every command.
    pub fn validate_common(&self) -> Result<(), ExperimentError> {
        if self.strategies.is_empty() {
            return Err(ExperimentError::Config("strategies: at least one required".into()));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(ExperimentError::Config(format!(
                    "strategies: duplicate entry {:?}",
                    s.letter()
                )));
            }
        }
        self.grid.cycles.validate()?;
        for r in self.grid.reflectivity.values() {
            if !(r > 0.0 && r <= 1.0) {
                return Err(ExperimentError::Config(format!(
                    "grid.reflectivity: must lie in (0, 1], got {r}"
                )));
            }
        }
        for g in self.grid.gain.values() {
            if !(g >= 1.0) {
                return Err(ExperimentError::Config(format!(
                    "grid.gain: must be at least 1, got {g}"
                )));
            }
            if self.scenario == Scenario::Storage && g != 1.0 {
                return Err(ExperimentError::Config(format!(
                    "grid.gain: the storage scenario requires gain = 1, got {g}"
                )));
            }
        }
        for v in self.grid.meter_var.values() {
            if !(v > 0.0) {
                return Err(ExperimentError::Config(format!(
                    "grid.meter_var: must be positive, got {v}"
                )));
            }
        }
        if self.scenario == Scenario::Generation && self.input != InputSpec::Vacuum {
            return Err(ExperimentError::Config(
                "input.kind: the generation scenario starts from vacuum".into(),
            ));
        }
        Ok(())
    }

    /// Checks for the curve commands (`store`, `squeeze`), which take a
    /// single grid point per axis and scan cycles.
    pub fn validate_curve(&self, expected: Scenario) -> Result<(), ExperimentError> {
        self.validate_common()?;
        if self.scenario != expected {
            return Err(ExperimentError::Config(format!(
                "scenario: this command runs the {} scenario, config says {}",
                expected.label(),
                self.scenario.label()
            )));
        }
        self.grid.reflectivity.scalar("grid.reflectivity")?;
        self.grid.gain.scalar("grid.gain")?;
        self.grid.meter_var.scalar("grid.meter_var")?;
        if expected == Scenario::Generation {
            match self.target {
                Some(t) if t.var_p > 0.0 => {}
                Some(t) => {
                    return Err(ExperimentError::Config(format!(
                        "target.var_p: must be positive, got {}",
                        t.var_p
                    )))
                }
                None => {
                    return Err(ExperimentError::Config(
                        "target.var_p: required by the squeeze command".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn validate_sweep(&self) -> Result<(), ExperimentError> {
        self.validate_common()?;
        if self.scenario != Scenario::Generation {
            return Err(ExperimentError::Config(
                "scenario: sweep inverts generation targets; set scenario = \"generation\"".into(),
            ));
        }
        let swept = [
            self.grid.reflectivity.is_swept(),
            self.grid.gain.is_swept(),
            self.grid.meter_var.is_swept(),
        ]
        .iter()
        .filter(|&&s| s)
        .count();
        if swept > 2 {
            return Err(ExperimentError::Config(
                "grid: sweep supports at most two swept parameters".into(),
            ));
        }
        match self.target {
            None => Err(ExperimentError::Config(
                "target.var_p: sweep needs a target".into(),
            )),
            Some(t) if t.var_p <= 0.0 => Err(ExperimentError::Config(format!(
                "target.var_p: must be positive, got {}",
                t.var_p
            ))),
            Some(TargetSpec { fidelity: Some(f), .. }) if !(f > 0.0 && f <= 1.0) => {
                Err(ExperimentError::Config(format!(
                    "target.fidelity: must lie in (0, 1], got {f}"
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn validate_compare(&self) -> Result<(), ExperimentError> {
        self.validate_common()?;
        self.grid.reflectivity.scalar("grid.reflectivity")?;
        self.grid.gain.scalar("grid.gain")?;
        self.grid.meter_var.scalar("grid.meter_var")?;
        if self.grid.cycles.start != self.grid.cycles.stop {
            return Err(ExperimentError::Config(
                "grid.cycles: compare checks a single cycle count; set start = stop".into(),
            ));
        }
        if self.trajectories < 1000 {
            return Err(ExperimentError::Config(format!(
                "trajectories: compare needs at least 1000, got {}",
                self.trajectories
            )));
        }
        Ok(())
    }

    /// Protocol config for one grid point of this spec.
    pub fn protocol_config(
        &self,
        strategy: Strategy,
        reflectivity: f64,
        gain: f64,
        meter_var: f64,
        cycles: u32,
    ) -> Result<ProtocolConfig, ExperimentError> {
        let meter = strategy
            .canonical_meter(meter_var)
            .map_err(|e| ExperimentError::Config(format!("grid.meter_var: {e}")))?;
        ProtocolConfig::new(
            strategy,
            reflectivity,
            gain,
            cycles,
            meter,
            self.universal_correction,
        )
        .map_err(|e| ExperimentError::Config(format!("grid: {e}")))
    }
}

/// The figure presets: captions of the four paper plots encoded as specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Fig2, Preset::Fig3, Preset::Fig4, Preset::Fig5];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Preset::ALL.iter().copied().find(|p| p.name() == name)
    }

    pub fn spec(&self) -> ExperimentSpec {
        let meter_var = 0.5 * (-2.0f64).exp();
        let storage_grid = GridSpec {
            reflectivity: ScalarOrList::Scalar(0.99),
            gain: ScalarOrList::Scalar(1.0),
            meter_var: ScalarOrList::Scalar(meter_var),
            cycles: CycleRange {
                start: 1,
                stop: 500,
                step: 1,
            },
        };
        let generation_grid = GridSpec {
            reflectivity: ScalarOrList::Scalar(0.99),
            gain: ScalarOrList::Scalar((0.02f64).exp()),
            meter_var: ScalarOrList::Scalar(meter_var),
            cycles: CycleRange {
                start: 1,
                stop: 2000,
                step: 1,
            },
        };
        match self {
            // unknown coherent state in the lossy cavity, universal correction
            Preset::Fig2 => ExperimentSpec {
                scenario: Scenario::Storage,
                strategies: Strategy::ALL.to_vec(),
                universal_correction: true,
                trajectories: 0,
                seed: 0,
                input: InputSpec::Coherent {
                    mean_x: 3.0,
                    mean_p: 1.0,
                },
                grid: storage_grid,
                target: None,
                out: None,
            },
            // known squeezed vacuum, zero mean, no amplification needed
            Preset::Fig3 => ExperimentSpec {
                scenario: Scenario::Storage,
                strategies: Strategy::ALL.to_vec(),
                universal_correction: false,
                trajectories: 0,
                seed: 0,
                input: InputSpec::Squeezed {
                    axis: Axis::P,
                    variance: 0.5 * (-5.0f64).exp(),
                },
                grid: storage_grid,
                target: None,
                out: None,
            },
            Preset::Fig4 | Preset::Fig5 => ExperimentSpec {
                scenario: Scenario::Generation,
                strategies: Strategy::ALL.to_vec(),
                universal_correction: false,
                trajectories: 0,
                seed: 0,
                input: InputSpec::Vacuum,
                grid: generation_grid,
                target: Some(TargetSpec {
                    var_p: 0.5 * (-5.0f64).exp(),
                    fidelity: None,
                }),
                out: None,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_round_trip_is_identity() {
        for preset in Preset::ALL {
            let spec = preset.spec();
            let text = spec.to_toml();
            let back = ExperimentSpec::from_toml(&text).unwrap();
            assert_eq!(spec, back, "{} round trip", preset.name());
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = Preset::Fig2.spec().to_toml();
        text.push_str("\nreflectivty = 0.5\n");
        let err = ExperimentSpec::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("reflectivty"), "{err}");

        let nested = text.replace("\nreflectivty = 0.5\n", "");
        let nested = nested.replace("[grid]", "[grid]\nrefelectivity = 0.1");
        assert!(ExperimentSpec::from_toml(&nested).is_err());
    }

    #[test]
    fn presets_validate_for_their_commands() {
        Preset::Fig2.spec().validate_curve(Scenario::Storage).unwrap();
        Preset::Fig3.spec().validate_curve(Scenario::Storage).unwrap();
        Preset::Fig4.spec().validate_curve(Scenario::Generation).unwrap();
        Preset::Fig5.spec().validate_curve(Scenario::Generation).unwrap();

        assert!(Preset::Fig2.spec().validate_curve(Scenario::Generation).is_err());
        assert!(Preset::Fig4.spec().validate_curve(Scenario::Storage).is_err());
    }

    #[test]
    fn validation_names_the_offending_field() {
        let mut spec = Preset::Fig2.spec();
        spec.grid.gain = ScalarOrList::Scalar(1.5);
        let err = spec.validate_common().unwrap_err().to_string();
        assert!(err.contains("grid.gain"), "{err}");

        let mut spec = Preset::Fig2.spec();
        spec.grid.reflectivity = ScalarOrList::Scalar(0.0);
        let err = spec.validate_common().unwrap_err().to_string();
        assert!(err.contains("grid.reflectivity"), "{err}");

        let mut spec = Preset::Fig4.spec();
        spec.input = InputSpec::Coherent {
            mean_x: 1.0,
            mean_p: 0.0,
        };
        let err = spec.validate_common().unwrap_err().to_string();
        assert!(err.contains("input.kind"), "{err}");

        let mut spec = Preset::Fig4.spec();
        spec.target = None;
        let err = spec.validate_curve(Scenario::Generation).unwrap_err().to_string();
        assert!(err.contains("target.var_p"), "{err}");

        let mut spec = Preset::Fig2.spec();
        spec.strategies.push(Strategy::SqueezedMeterErasing);
        let err = spec.validate_common().unwrap_err().to_string();
        assert!(err.contains("strategies"), "{err}");
    }

    #[test]
    fn sweep_validation() {
        let mut spec = Preset::Fig4.spec();
        spec.grid.reflectivity = ScalarOrList::List(vec![0.9, 0.99]);
        spec.grid.gain = ScalarOrList::List(vec![1.01, 1.02]);
        spec.validate_sweep().unwrap();

        spec.grid.meter_var = ScalarOrList::List(vec![0.05, 0.06]);
        let err = spec.validate_sweep().unwrap_err().to_string();
        assert!(err.contains("at most two"), "{err}");

        let mut spec = Preset::Fig4.spec();
        spec.target = Some(TargetSpec {
            var_p: 0.005,
            fidelity: Some(1.5),
        });
        let err = spec.validate_sweep().unwrap_err().to_string();
        assert!(err.contains("target.fidelity"), "{err}");

        let mut spec = Preset::Fig2.spec();
        spec.target = Some(TargetSpec {
            var_p: 0.1,
            fidelity: None,
        });
        let err = spec.validate_sweep().unwrap_err().to_string();
        assert!(err.contains("scenario"), "{err}");
    }

    #[test]
    fn compare_validation() {
        let mut spec = Preset::Fig2.spec();
        spec.grid.cycles = CycleRange::single(100);
        spec.trajectories = 500;
        let err = spec.validate_compare().unwrap_err().to_string();
        assert!(err.contains("trajectories"), "{err}");

        spec.trajectories = 2000;
        spec.validate_compare().unwrap();

        spec.grid.cycles = CycleRange { start: 1, stop: 100, step: 1 };
        let err = spec.validate_compare().unwrap_err().to_string();
        assert!(err.contains("grid.cycles"), "{err}");
    }
}
