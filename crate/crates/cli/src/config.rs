//! Experiment configuration: strict TOML schema, figure presets and
//! command-line overrides.
//!
//! Resolution order: preset (or bare scenario) < config file < `--set` <
//! dedicated flags. Everything is merged as a TOML tree and only then
//! deserialized, so unknown keys are rejected wherever they come from.

use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use noonsim::physical::RB85_MASS_AMU;
use noonsim::{FrequencyUnits, IntegratorConfig, InteractionConvention, PhaseSign};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    GroundState,
    Ramp,
    RamseySweep,
    CoherenceAnalysis,
    EstimateU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
#[value(rename_all = "UPPER")]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Preset {
    pub fn label(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Fig8 => "fig8",
        }
    }
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::GroundState => "ground_state",
            Scenario::Ramp => "ramp",
            Scenario::RamseySweep => "ramsey_sweep",
            Scenario::CoherenceAnalysis => "coherence_analysis",
            Scenario::EstimateU => "estimate_u",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub ground_state: GroundStateSection,
    #[serde(default)]
    pub ramp: RampSection,
    #[serde(default)]
    pub input: InputSection,
    #[serde(default)]
    pub ramsey: RamseySection,
    #[serde(default)]
    pub coherence: CoherenceSection,
    #[serde(default)]
    pub physical: PhysicalSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("output")
}

/// Model parameters shared by every scenario (rates in rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    /// Each value is run separately.
    pub atoms: Vec<usize>,
    pub kappa: f64,
    pub u: f64,
    pub e_left: f64,
    pub e_right: f64,
    pub convention: InteractionConvention,
}

impl Default for SystemSection {
    fn default() -> Self {
        Self {
            atoms: vec![20],
            kappa: 1.0,
            u: 0.0,
            e_left: 0.0,
            e_right: 0.0,
            convention: InteractionConvention::default(),
        }
    }
}

impl SystemSection {
    pub fn params(&self, u: f64) -> noonsim::SystemParams {
        noonsim::SystemParams {
            kappa: self.kappa,
            u_left: u,
            u_right: u,
            e_left: self.e_left,
            e_right: self.e_right,
            interaction_convention: self.convention,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundStateSection {
    /// Interaction values in units of `system.kappa`.
    pub u_over_kappa: Vec<f64>,
    /// Stop when the energy changes by less than this per step (rad/s).
    pub tolerance: f64,
}

impl Default for GroundStateSection {
    fn default() -> Self {
        Self {
            u_over_kappa: vec![0.0, -0.1, -0.5],
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RampSection {
    pub u_start: f64,
    pub u_end: f64,
    /// Ramps written out as full trajectories.
    pub ramp_times: Vec<f64>,
    pub samples: usize,
    /// Ramp times for the final-fidelity sweep; empty disables it.
    pub fidelity_times: Vec<f64>,
    /// Post-ramp hold used for the averaged-fidelity diagnostic (s).
    pub hold_time: f64,
}

impl Default for RampSection {
    fn default() -> Self {
        Self {
            u_start: 1.0,
            u_end: -3.0,
            ramp_times: vec![0.5, 4.0],
            samples: 200,
            fidelity_times: Vec::new(),
            hold_time: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    #[default]
    Noon,
    Mixture,
    /// Ground state at `system.u`.
    GroundState,
    /// Final state of a ramp from `ramp.u_start` to `ramp.u_end`.
    Ramp,
}

/// State fed into the interferometer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub kind: InputKind,
    /// NOON relative phase.
    pub phi: f64,
    /// Ramp duration when `kind = "ramp"` (s).
    pub ramp_time: f64,
    /// Replace the state by the diagonal mixture with the same populations.
    pub dephase: bool,
}

impl Default for InputSection {
    fn default() -> Self {
        Self {
            kind: InputKind::Noon,
            phi: 0.0,
            ramp_time: 4.0,
            dephase: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RamseySection {
    pub kappa_bs: f64,
    /// Interference-stage interaction rates (rad/s); each is run separately.
    pub u_interference: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bs_duration: Option<f64>,
    pub phase_sign: PhaseSign,
    pub grid_points: usize,
    /// Explicit angles; overrides the uniform grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thetas: Option<Vec<f64>>,
    pub max_moment: usize,
    /// Adds `p_0..p_N` columns to the fringe CSV.
    pub distributions: bool,
}

impl Default for RamseySection {
    fn default() -> Self {
        Self {
            kappa_bs: 1.0,
            u_interference: vec![0.0],
            bs_duration: None,
            phase_sign: PhaseSign::Right,
            grid_points: noonsim::ramsey::DEFAULT_GRID_POINTS,
            thetas: None,
            max_moment: 2,
            distributions: false,
        }
    }
}

impl RamseySection {
    pub fn config(&self, u: f64, convention: InteractionConvention) -> noonsim::RamseyConfig {
        noonsim::RamseyConfig {
            kappa_bs: self.kappa_bs,
            u_interference: u,
            bs_duration: self.bs_duration,
            phase_sign: self.phase_sign,
            convention,
        }
    }

    pub fn grid(&self) -> Vec<f64> {
        self.thetas
            .clone()
            .unwrap_or_else(|| noonsim::uniform_grid(self.grid_points))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoherenceSection {
    /// Check the parity decomposition against calibrated weights when the
    /// interference stage is linear.
    pub verify: bool,
}

impl Default for CoherenceSection {
    fn default() -> Self {
        Self { verify: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalSection {
    pub mass_amu: f64,
    pub omega: [f64; 3],
    pub omega_units: FrequencyUnits,
    /// Each value is evaluated separately.
    pub scattering_length_a0: Vec<f64>,
}

impl Default for PhysicalSection {
    fn default() -> Self {
        Self {
            mass_amu: RB85_MASS_AMU,
            omega: [1000.0, 1000.0, 100.0],
            omega_units: FrequencyUnits::Angular,
            scattering_length_a0: vec![2000.0, -200.0],
        }
    }
}

impl ExperimentConfig {
    /// Subdirectory of `output_dir` that receives this run's files.
    pub fn run_label(&self) -> &'static str {
        self.preset.map_or(self.scenario.label(), Preset::label)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |msg: String| Err(Failure::Validation(msg));
        if self.system.atoms.is_empty() || self.system.atoms.contains(&0) {
            return bad("system.atoms must be a non-empty list of positive integers".into());
        }
        if self.system.atoms.iter().any(|&n| n > 4096) {
            return bad("system.atoms above 4096 is not supported".into());
        }
        if self.ground_state.tolerance.is_nan() || self.ground_state.tolerance <= 0.0 {
            return bad(format!(
                "ground_state.tolerance must be > 0 (got {})",
                self.ground_state.tolerance
            ));
        }
        if self.ramp.samples < 2 {
            return bad("ramp.samples must be >= 2".into());
        }
        let times = self.ramp.ramp_times.iter().chain(&self.ramp.fidelity_times);
        if times.clone().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("ramp times must be > 0".into());
        }
        if self.ramp.hold_time.is_nan() || self.ramp.hold_time < 0.0 {
            return bad("ramp.hold_time must be >= 0".into());
        }
        if self.ramsey.u_interference.is_empty() {
            return bad("ramsey.u_interference must not be empty".into());
        }
        if self.ramsey.thetas.as_ref().is_some_and(Vec::is_empty) || self.ramsey.grid_points == 0 {
            return bad("the theta grid must not be empty".into());
        }
        if self.physical.scattering_length_a0.is_empty() {
            return bad("physical.scattering_length_a0 must not be empty".into());
        }
        for &u in &self.ramsey.u_interference {
            self.ramsey.config(u, self.system.convention).validate()?;
        }
        Ok(())
    }
}

/// Preset definitions: fully specified parameter sets per figure.
pub fn preset_config(preset: Preset) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        scenario: Scenario::GroundState,
        preset: Some(preset),
        output_dir: default_output_dir(),
        system: SystemSection::default(),
        integrator: IntegratorConfig::default(),
        ground_state: GroundStateSection::default(),
        ramp: RampSection::default(),
        input: InputSection::default(),
        ramsey: RamseySection::default(),
        coherence: CoherenceSection::default(),
        physical: PhysicalSection::default(),
    };
    let ramp_system = SystemSection {
        kappa: 10.0,
        ..SystemSection::default()
    };
    match preset {
        Preset::Fig1 => {
            c.system.atoms = vec![20];
            c.system.kappa = 1.0;
            c.ground_state.u_over_kappa = vec![0.0, -0.1, -0.5];
        }
        Preset::Fig2 => {
            c.scenario = Scenario::RamseySweep;
            c.system.atoms = vec![1, 2];
            c.ramsey.max_moment = 2;
        }
        Preset::Fig3 => {
            c.scenario = Scenario::RamseySweep;
            c.ramsey.thetas = Some(vec![FRAC_PI_2]);
            // kappa_bs = 1, so these are U/kappa.
            c.ramsey.u_interference = vec![0.0, -0.01, -0.025];
            c.ramsey.distributions = true;
        }
        Preset::Fig4 => {
            c.scenario = Scenario::RamseySweep;
            c.system.atoms = vec![10, 20];
            c.ramsey.u_interference = vec![0.0, -0.01, -0.025];
        }
        Preset::Fig5 => {
            c.scenario = Scenario::Ramp;
            c.system = ramp_system;
            c.ramp.ramp_times = vec![0.5, 4.0];
        }
        Preset::Fig6 => {
            c.scenario = Scenario::Ramp;
            c.system = ramp_system;
            c.ramp.ramp_times = Vec::new();
            c.ramp.fidelity_times = vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
        }
        Preset::Fig7 | Preset::Fig8 => {
            c.scenario = if preset == Preset::Fig7 {
                Scenario::RamseySweep
            } else {
                Scenario::CoherenceAnalysis
            };
            c.system = ramp_system;
            c.ramp.u_end = -1.0;
            c.input.kind = InputKind::Ramp;
            c.input.ramp_time = 4.0;
            // Interference-stage tunneling is not stated for these figures;
            // the generation-stage value is assumed.
            c.ramsey.kappa_bs = 10.0;
            c.ramsey.u_interference = vec![0.0, -0.1, -0.25];
        }
    }
    c
}

/// Deep-merges `overlay` into `base`; tables merge key by key, everything
/// else is replaced.
pub fn merge(base: &mut Table, overlay: Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

/// Applies `section.key=value`; the value is read as a TOML literal and
/// falls back to a bare string.
pub fn apply_set(table: &mut Table, assignment: &str) -> Result<(), Failure> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        Failure::validation(format!("--set expects KEY=VALUE (got {assignment:?})"))
    })?;
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    set_path(table, path.trim(), value)
}

pub fn set_path(table: &mut Table, path: &str, value: Value) -> Result<(), Failure> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Failure::validation(format!("malformed key {path:?}")));
    }
    let mut node = table;
    for key in &keys[..keys.len() - 1] {
        let entry = node
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| Failure::validation(format!("{key:?} in {path:?} is not a section")))?;
    }
    node.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

pub fn to_table(config: &ExperimentConfig) -> Table {
    Table::try_from(config).expect("configs always serialize to a TOML table")
}

pub fn from_table(table: Table) -> Result<ExperimentConfig, Failure> {
    let config: ExperimentConfig =
        Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| {
                Failure::validation(format!("invalid configuration: {}", e.message()))
            })?;
    config.validate()?;
    Ok(config)
}

/// Reads a TOML config, or a JSON file such as a previous `summary.json`
/// (its `config` member is used when present).
pub fn read_config_file(path: &Path) -> Result<Table, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let mut json: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
        if let Some(inner) = json.get_mut("config") {
            json = inner.take();
        }
        Table::deserialize(json)
            .map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
    } else {
        text.parse::<Table>()
            .map_err(|e| Failure::validation(format!("{}: {}", path.display(), e.message())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(scenario: &str) -> Table {
        format!("scenario = \"{scenario}\"").parse().unwrap()
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let c = from_table(base("ramp")).unwrap();
        assert_eq!(c.scenario, Scenario::Ramp);
        assert_eq!(c.system.atoms, vec![20]);
        assert_eq!(c.ramp.samples, 200);
        assert_eq!(c.integrator.step_tolerance, 1e-12);
        assert_eq!(c.system.convention, InteractionConvention::Full);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut t = base("ramp");
        apply_set(&mut t, "ramp.speed=3").unwrap();
        assert!(matches!(from_table(t), Err(Failure::Validation(_))));
        let mut t = base("ramp");
        apply_set(&mut t, "colour=1").unwrap();
        assert!(from_table(t).is_err());
        let mut t = base("ramp");
        apply_set(&mut t, "integrator.tolerance=1e-9").unwrap();
        assert!(from_table(t).is_err());
    }

    #[test]
    fn set_parses_toml_literals() {
        let mut t = base("ramp");
        apply_set(&mut t, "ramp.ramp_times=[1, 2.5]").unwrap();
        apply_set(&mut t, "ramp.u_end=-1").unwrap();
        apply_set(&mut t, "system.convention=half").unwrap();
        apply_set(&mut t, "system.atoms=[4]").unwrap();
        let c = from_table(t).unwrap();
        assert_eq!(c.ramp.ramp_times, vec![1.0, 2.5]);
        assert_eq!(c.ramp.u_end, -1.0);
        assert_eq!(c.system.convention, InteractionConvention::Half);
        assert!(apply_set(&mut base("ramp"), "no_equals").is_err());
        assert!(apply_set(&mut base("ramp"), "scenario.x=1").is_err());
    }

    #[test]
    fn semantic_validation() {
        let mut t = base("ramsey_sweep");
        apply_set(&mut t, "ramsey.kappa_bs=0").unwrap();
        assert!(from_table(t).is_err());
        let mut t = base("ramp");
        apply_set(&mut t, "system.atoms=[]").unwrap();
        assert!(from_table(t).is_err());
        let mut t = base("ramp");
        apply_set(&mut t, "ramp.ramp_times=[-1]").unwrap();
        assert!(from_table(t).is_err());
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for preset in Preset::value_variants() {
            let c = preset_config(*preset);
            c.validate().unwrap();
            let back = from_table(to_table(&c)).unwrap();
            assert_eq!(back, c);
        }
    }

    #[test]
    fn preset_parameters() {
        let fig6 = preset_config(Preset::Fig6);
        assert_eq!(
            fig6.ramp.fidelity_times,
            vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
        );
        assert_eq!(
            (fig6.system.kappa, fig6.ramp.u_start, fig6.ramp.u_end),
            (10.0, 1.0, -3.0)
        );
        let fig8 = preset_config(Preset::Fig8);
        assert_eq!(fig8.scenario, Scenario::CoherenceAnalysis);
        assert_eq!(fig8.ramp.u_end, -1.0);
        assert_eq!(fig8.ramsey.u_interference, vec![0.0, -0.1, -0.25]);
        assert_eq!(preset_config(Preset::Fig4).system.atoms, vec![10, 20]);
    }

    #[test]
    fn merge_is_deep() {
        let mut a: Table = "[ramp]\nu_start = 2.0\nu_end = 1.0".parse().unwrap();
        let b: Table = "[ramp]\nu_end = 0.5".parse().unwrap();
        merge(&mut a, b);
        assert_eq!(a["ramp"]["u_start"].as_float(), Some(2.0));
        assert_eq!(a["ramp"]["u_end"].as_float(), Some(0.5));
    }
}
