//! Run configuration: a single TOML file with nested sections, merged with
//! command-line overrides and validated against the library preconditions
//! before any computation starts.
//!
//! Angles are radians; Rabi magnitudes and detunings rad/s; rates 1/s; times
//! seconds. Traversal times are configured as dimensionless gap*T products
//! (`omega_t`), converted to seconds with the configured omega_scale.

use holonomy::loops::{ParameterLoop, SpeedProfile};
use holonomy::model::{GateKind, GateModel};
use holonomy::noise::{BudgetThresholds, GateClass, NoiseBudget};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SimulateGate,
    SweepAdiabaticity,
    HolonomyCompare,
    NoiseBudget,
    Circuit,
    NonabelianDemo,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SimulateGate => "simulate_gate",
            Experiment::SweepAdiabaticity => "sweep_adiabaticity",
            Experiment::HolonomyCompare => "holonomy_compare",
            Experiment::NoiseBudget => "noise_budget",
            Experiment::Circuit => "circuit",
            Experiment::NonabelianDemo => "nonabelian_demo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Forward,
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopShape {
    Latitude,
    Sector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GateSection {
    pub kind: GateKind,
    /// Lamb-Dicke parameter (two-ion gate only).
    pub eta: f64,
    /// Additional detuning in rad/s (two-ion gate only).
    pub delta: f64,
}

impl Default for GateSection {
    fn default() -> Self {
        Self {
            kind: GateKind::U1,
            eta: 0.1,
            delta: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopSection {
    pub shape: LoopShape,
    /// Latitude of the sweep segment (rad).
    pub theta0: f64,
    /// Longitude span for sector loops (rad).
    pub phi_span: f64,
    /// Fraction of loop parameter spent in each theta ramp.
    pub ramp_fraction: f64,
    pub orientation: Orientation,
    /// Overall Rabi magnitude Omega (rad/s).
    pub omega_scale: f64,
}

impl Default for LoopSection {
    fn default() -> Self {
        Self {
            shape: LoopShape::Latitude,
            theta0: std::f64::consts::FRAC_PI_3,
            phi_span: std::f64::consts::TAU,
            ramp_fraction: 0.1,
            orientation: Orientation::Forward,
            omega_scale: 1.0,
        }
    }
}

impl LoopSection {
    pub fn build(&self) -> Result<ParameterLoop, String> {
        let lp = match self.shape {
            LoopShape::Latitude => {
                ParameterLoop::latitude(self.theta0, self.ramp_fraction, self.omega_scale)
            }
            LoopShape::Sector => ParameterLoop::sector(
                self.theta0,
                self.phi_span,
                self.ramp_fraction,
                self.omega_scale,
            ),
        }
        .map_err(|e| format!("loop: {e}"))?;
        match self.orientation {
            Orientation::Forward => Ok(lp),
            Orientation::Reversed => lp.reversed().map_err(|e| format!("loop: {e}")),
        }
    }

    #[allow(dead_code)]
    pub fn speed_profile(&self) -> SpeedProfile {
        SpeedProfile::Uniform
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingSection {
    /// Dimensionless gap * T product for single runs.
    pub omega_t: f64,
    /// Ascending gap * T list for sweeps.
    pub omega_t_list: Vec<f64>,
    /// Integration steps; 0 selects steps_per_unit * omega_t automatically.
    pub steps: usize,
    /// Steps per unit of gap * T when steps = 0.
    pub steps_per_unit: f64,
    /// Resolution of the Wilson-line oracle.
    pub oracle_steps: usize,
}

impl Default for TimingSection {
    fn default() -> Self {
        Self {
            omega_t: 2000.0,
            omega_t_list: vec![2000.0, 3170.0, 5024.0, 7962.0, 12619.0, 20000.0],
            steps: 0,
            steps_per_unit: 10.0,
            oracle_steps: 20_000,
        }
    }
}

impl TimingSection {
    pub fn steps_for(&self, omega_t: f64) -> usize {
        if self.steps > 0 {
            self.steps
        } else {
            (self.steps_per_unit * omega_t).ceil().max(100.0) as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhasesSection {
    /// U1 phase for circuit/non-abelian experiments (rad).
    pub phi1: f64,
    /// U2 phase (rad).
    pub phi2: f64,
    /// Number of Haar-random synthesis targets.
    pub n_haar_targets: usize,
}

impl Default for PhasesSection {
    fn default() -> Self {
        Self {
            phi1: std::f64::consts::FRAC_PI_2,
            phi2: std::f64::consts::FRAC_PI_2,
            n_haar_targets: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub omega: f64,
    pub eta: f64,
    pub delta: f64,
    pub gamma_s: f64,
    pub gamma_h: f64,
    pub t_gate: f64,
    pub gate_class: GateClass,
    pub thresholds: ThresholdSection,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let tau = std::f64::consts::TAU;
        Self {
            omega: tau * 1e6,
            eta: 0.1,
            delta: tau * 1e5,
            gamma_s: tau * 1e7,
            gamma_h: 1e3,
            t_gate: 1e-4,
            gate_class: GateClass::TwoBit,
            thresholds: ThresholdSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSection {
    pub leakage: f64,
    pub spontaneous: f64,
    pub heating_ratio: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        let d = BudgetThresholds::default();
        Self {
            leakage: d.leakage,
            spontaneous: d.spontaneous,
            heating_ratio: d.heating_ratio,
        }
    }
}

impl From<ThresholdSection> for BudgetThresholds {
    fn from(t: ThresholdSection) -> Self {
        Self {
            leakage: t.leakage,
            spontaneous: t.spontaneous,
            heating_ratio: t.heating_ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads for sweep fan-out; 0 = all available processors.
    pub parallel: usize,
    /// Emit static SVG plots for sweep experiments.
    pub plot: bool,
    pub gate: GateSection,
    #[serde(rename = "loop")]
    pub loop_section: LoopSection,
    pub timing: TimingSection,
    pub phases: PhasesSection,
    pub noise: NoiseSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::SimulateGate,
            seed: 42,
            output_dir: PathBuf::from("out"),
            parallel: 0,
            plot: false,
            gate: GateSection::default(),
            loop_section: LoopSection::default(),
            timing: TimingSection::default(),
            phases: PhasesSection::default(),
            noise: NoiseSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("config parse error: {e}"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn gate_model(&self) -> GateModel {
        match self.gate.kind {
            GateKind::U1 => GateModel::u1(),
            GateKind::U2 => GateModel::u2(),
            GateKind::U3 => GateModel::u3(self.gate.eta, self.gate.delta),
        }
    }

    /// Check every numeric field against the owning module's preconditions;
    /// collects one message per offending field.
    pub fn validate(&self) -> Vec<String> {
        let mut errors = Vec::new();
        if let Err(e) = self.loop_section.build() {
            errors.push(e);
        }
        if self.gate.kind == GateKind::U3 {
            let probe = holonomy::model::LoopPoint::new(0.1, 0.0, self.loop_section.omega_scale);
            match probe {
                Ok(point) => {
                    if let Err(e) =
                        holonomy::model::u3_control_map(&point, self.gate.eta, self.gate.delta)
                    {
                        errors.push(format!("gate: {e}"));
                    }
                }
                Err(e) => errors.push(format!("loop.omega_scale: {e}")),
            }
        }
        if self.timing.omega_t <= 0.0 || !self.timing.omega_t.is_finite() {
            errors.push(format!(
                "timing.omega_t: must be positive and finite, got {}",
                self.timing.omega_t
            ));
        }
        if self.timing.steps_per_unit <= 0.0 {
            errors.push(format!(
                "timing.steps_per_unit: must be positive, got {}",
                self.timing.steps_per_unit
            ));
        }
        if self.timing.oracle_steps < 2 {
            errors.push(format!(
                "timing.oracle_steps: need at least 2, got {}",
                self.timing.oracle_steps
            ));
        }
        if self.experiment == Experiment::SweepAdiabaticity {
            if self.timing.omega_t_list.len() < 4 {
                errors.push(format!(
                    "timing.omega_t_list: need at least 4 entries, got {}",
                    self.timing.omega_t_list.len()
                ));
            }
            if self.timing.omega_t_list.windows(2).any(|w| w[0] >= w[1]) {
                errors.push("timing.omega_t_list: entries must be strictly ascending".into());
            }
            if self
                .timing
                .omega_t_list
                .iter()
                .any(|t| !(t.is_finite() && *t > 0.0))
            {
                errors.push("timing.omega_t_list: entries must be positive and finite".into());
            }
        }
        if self.experiment == Experiment::Circuit && self.phases.n_haar_targets == 0 {
            errors.push("phases.n_haar_targets: must be at least 1".into());
        }
        for (name, value) in [
            ("phases.phi1", self.phases.phi1),
            ("phases.phi2", self.phases.phi2),
        ] {
            if !value.is_finite() {
                errors.push(format!("{name}: must be finite, got {value}"));
            }
        }
        if self.experiment == Experiment::NoiseBudget {
            if let Err(e) = self.noise_budget() {
                errors.push(format!("noise: {e}"));
            }
        }
        errors
    }

    pub fn noise_budget(&self) -> Result<NoiseBudget, holonomy::noise::NoiseError> {
        NoiseBudget::new(
            self.noise.omega,
            self.noise.eta,
            self.noise.delta,
            self.noise.gamma_s,
            self.noise.gamma_h,
            self.noise.t_gate,
            self.noise.gate_class,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        let config = RunConfig::default();
        assert!(config.validate().is_empty());
    }

    #[test]
    fn toml_roundtrip() {
        let config = RunConfig::default();
        let text = config.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn validation_reports_field_names() {
        let mut config = RunConfig::default();
        config.loop_section.theta0 = -1.0;
        config.timing.omega_t = 0.0;
        let errors = config.validate();
        assert!(errors.iter().any(|e| e.contains("loop")));
        assert!(errors.iter().any(|e| e.contains("timing.omega_t")));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("experimnt = \"circuit\"").is_err());
    }
}
