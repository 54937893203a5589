//! Real- and imaginary-time propagation in the fixed-number basis.
//!
//! Time-dependent segments use an adaptive Dormand-Prince 8(5,3) integrator;
//! constant segments can use the exact eigen-propagator instead.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hamiltonian::{
    hamiltonian_matrix, HamiltonianMatrix, InteractionConvention, SystemParams,
};
use crate::observables::{diff_variance, noon_fidelity};
use crate::rk::{self, RkStats, StepControl};
use crate::state::FockVector;
use crate::table::Table;
use crate::C64;

/// Norm drift above which a real-time run is rejected.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

/// Piecewise-linear function of time, clamped outside its knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return invalid("piecewise-linear schedule needs at least one knot");
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return invalid("schedule knots must be finite");
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return invalid("schedule knot times must be strictly increasing");
        }
        Ok(Self { knots })
    }

    /// Straight line from `start` at t = 0 to `end` at t = `duration`.
    pub fn linear(start: f64, end: f64, duration: f64) -> Result<Self> {
        if !(duration > 0.0) {
            return invalid(format!("ramp duration must be > 0 (got {duration})"));
        }
        Self::new(vec![(0.0, start), (duration, end)])
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn value_at(&self, t: f64) -> f64 {
        let first = self.knots[0];
        let last = self.knots[self.knots.len() - 1];
        if t <= first.0 {
            return first.1;
        }
        if t >= last.0 {
            return last.1;
        }
        let i = self.knots.partition_point(|k| k.0 <= t);
        let (t0, v0) = self.knots[i - 1];
        let (t1, v1) = self.knots[i];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn is_constant(&self) -> bool {
        self.knots.iter().all(|k| k.1 == self.knots[0].1)
    }
}

/// System parameters over `[0, duration]`, optionally with a ramped `U`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub base: SystemParams,
    /// Overrides `u_left = u_right` when present.
    pub u_ramp: Option<PiecewiseLinear>,
    pub duration: f64,
}

impl ParamSchedule {
    pub fn constant(base: SystemParams, duration: f64) -> Self {
        Self {
            base,
            u_ramp: None,
            duration,
        }
    }

    pub fn ramped(base: SystemParams, u_ramp: PiecewiseLinear, duration: f64) -> Self {
        Self {
            base,
            u_ramp: Some(u_ramp),
            duration,
        }
    }

    pub fn params_at(&self, t: f64) -> SystemParams {
        match &self.u_ramp {
            Some(ramp) => self.base.with_u(ramp.value_at(t.clamp(0.0, self.duration))),
            None => self.base,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.u_ramp
            .as_ref()
            .is_none_or(PiecewiseLinear::is_constant)
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return invalid(format!(
                "schedule duration must be >= 0 (got {})",
                self.duration
            ));
        }
        self.base.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact `exp(-iHt)` from the eigendecomposition; constant schedules only.
    ExponentialEigen,
    /// Adaptive Dormand-Prince 8(5,3).
    AdaptiveRk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Per-step tolerance, applied as both absolute and relative error bound.
    pub step_tolerance: f64,
    /// Upper bound on the step size (s).
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::AdaptiveRk,
            step_tolerance: 1e-12,
            max_step: 0.05,
            max_steps: 20_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn exact() -> Self {
        Self {
            method: Method::ExponentialEigen,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.step_tolerance > 0.0) {
            return invalid(format!(
                "step_tolerance must be > 0 (got {})",
                self.step_tolerance
            ));
        }
        if !(self.max_step > 0.0) {
            return invalid(format!("max_step must be > 0 (got {})", self.max_step));
        }
        Ok(())
    }

    fn step_control(&self) -> StepControl {
        StepControl {
            tolerance: self.step_tolerance,
            max_step: self.max_step,
            max_steps: self.max_steps,
        }
    }
}

/// Output of a real-time run together with its integration diagnostics.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: FockVector,
    /// `| ||c|| - 1 |` before renormalization.
    pub norm_drift: f64,
    pub stats: RkStats,
}

/// `H(t)` split into the `U`-independent part and the pair-count diagonal.
struct DrivenHamiltonian<'a> {
    schedule: &'a ParamSchedule,
    fixed: HamiltonianMatrix,
    pairs: Vec<f64>,
}

impl<'a> DrivenHamiltonian<'a> {
    fn new(schedule: &'a ParamSchedule, total_atoms: usize) -> Result<Self> {
        let (fixed, pairs) = match &schedule.u_ramp {
            Some(_) => {
                let fixed = hamiltonian_matrix(&schedule.base.with_u(0.0), total_atoms)?;
                let chi = schedule.base.interaction_convention.factor();
                let n_tot = total_atoms as f64;
                let pairs = (0..=total_atoms)
                    .map(|n| {
                        let (l, r) = (n_tot - n as f64, n as f64);
                        chi * (l * (l - 1.0) + r * (r - 1.0))
                    })
                    .collect();
                (fixed, pairs)
            }
            None => (
                hamiltonian_matrix(&schedule.base, total_atoms)?,
                vec![0.0; total_atoms + 1],
            ),
        };
        Ok(Self {
            schedule,
            fixed,
            pairs,
        })
    }

    /// `dy = -i H(t) y`.
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.fixed.apply_into(y, dy);
        if let Some(ramp) = &self.schedule.u_ramp {
            let u = ramp.value_at(t.clamp(0.0, self.schedule.duration));
            for ((d, c), p) in dy.iter_mut().zip(y).zip(&self.pairs) {
                *d += c * (u * p);
            }
        }
        for d in dy.iter_mut() {
            *d = C64::new(d.im, -d.re);
        }
    }
}

fn checked_normalize(amplitudes: Vec<C64>) -> Result<(FockVector, f64)> {
    let norm = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let drift = (norm - 1.0).abs();
    if !(drift <= MAX_NORM_DRIFT) {
        return Err(Error::IntegrationFailure(format!(
            "norm drift {drift:e} exceeds {MAX_NORM_DRIFT:e}; tighten step_tolerance"
        )));
    }
    Ok((
        FockVector::from_raw(amplitudes.into_iter().map(|c| c / norm).collect()),
        drift,
    ))
}

/// Solves `i dc/dt = H(t) c` over the schedule and returns the final state.
pub fn real_evolve(
    state: &FockVector,
    schedule: &ParamSchedule,
    config: &IntegratorConfig,
) -> Result<FockVector> {
    real_evolve_report(state, schedule, config).map(|e| e.state)
}

/// [`real_evolve`] with norm-drift and step diagnostics.
pub fn real_evolve_report(
    state: &FockVector,
    schedule: &ParamSchedule,
    config: &IntegratorConfig,
) -> Result<Evolution> {
    let mut run = evolve_through(state, schedule, config, &[schedule.duration])?;
    Ok(Evolution {
        state: run.snapshots.pop().expect("one sample requested"),
        norm_drift: run.max_norm_drift,
        stats: run.stats,
    })
}

/// Exact propagation under constant parameters via the eigendecomposition.
pub fn propagate_exact(state: &FockVector, params: &SystemParams, t: f64) -> Result<FockVector> {
    let eig = hamiltonian_matrix(params, state.total_atoms())?.eigensystem();
    let out = apply_dense(&eig.propagator(t), state.amplitudes());
    checked_normalize(out).map(|(s, _)| s)
}

pub(crate) fn apply_dense(u: &nalgebra::DMatrix<C64>, c: &[C64]) -> Vec<C64> {
    (u * nalgebra::DVector::from_column_slice(c))
        .iter()
        .copied()
        .collect()
}

struct SampledRun {
    snapshots: Vec<FockVector>,
    max_norm_drift: f64,
    stats: RkStats,
}

/// Evolves `state` and returns normalized snapshots at each time in
/// `sample_times` (ascending, within `[0, duration]`). The integration itself
/// never renormalizes, so the reported drift is cumulative.
fn evolve_through(
    state: &FockVector,
    schedule: &ParamSchedule,
    config: &IntegratorConfig,
    sample_times: &[f64],
) -> Result<SampledRun> {
    schedule.validate()?;
    config.validate()?;
    if sample_times.windows(2).any(|w| w[1] < w[0])
        || sample_times
            .iter()
            .any(|&t| !(0.0..=schedule.duration).contains(&t))
    {
        return invalid("sample times must be sorted and inside [0, duration]");
    }
    let n = state.total_atoms();
    let mut run = SampledRun {
        snapshots: Vec::with_capacity(sample_times.len()),
        max_norm_drift: 0.0,
        stats: RkStats::default(),
    };
    let record = |amplitudes: Vec<C64>, run: &mut SampledRun| -> Result<()> {
        let (s, drift) = checked_normalize(amplitudes)?;
        run.max_norm_drift = run.max_norm_drift.max(drift);
        run.snapshots.push(s);
        Ok(())
    };
    match config.method {
        Method::ExponentialEigen => {
            if !schedule.is_time_independent() {
                return invalid("exponential propagation requires a time-independent schedule");
            }
            let eig = hamiltonian_matrix(&schedule.params_at(0.0), n)?.eigensystem();
            for &t in sample_times {
                record(
                    apply_dense(&eig.propagator(t), state.amplitudes()),
                    &mut run,
                )?;
            }
        }
        Method::AdaptiveRk => {
            let driven = DrivenHamiltonian::new(schedule, n)?;
            let mut control = config.step_control();
            let mut y = state.amplitudes().to_vec();
            let mut t = 0.0;
            for &t_next in sample_times {
                // The step budget covers the whole run, not each sample segment.
                control.max_steps = config.max_steps - (run.stats.accepted + run.stats.rejected);
                run.stats +=
                    rk::integrate(|t, y, dy| driven.rhs(t, y, dy), t, t_next, &mut y, &control)?;
                t = t_next;
                record(y.clone(), &mut run)?;
            }
        }
    }
    Ok(run)
}

/// Settings for the imaginary-time ground-state search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImaginaryTimeConfig {
    /// Stop once the energy changes by less than this per step (rad/s).
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step as a fraction of `1 / spectral radius`.
    pub step_fraction: f64,
    pub record_energies: bool,
}

impl Default for ImaginaryTimeConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 5_000_000,
            step_fraction: 0.1,
            record_energies: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub state: FockVector,
    pub energy: f64,
    pub iterations: usize,
    /// Energy after every step, when requested.
    pub energies: Vec<f64>,
}

/// Lowest-energy state by imaginary-time propagation with default settings
/// and the given energy tolerance.
pub fn ground_state(params: &SystemParams, total_atoms: usize, tol: f64) -> Result<FockVector> {
    let config = ImaginaryTimeConfig {
        tolerance: tol,
        ..ImaginaryTimeConfig::default()
    };
    ground_state_with(params, total_atoms, &config).map(|g| g.state)
}

/// Imaginary-time propagation: repeated `c <- (1 - dtau H) c` with
/// renormalization, started from uniform positive amplitudes.
///
/// The uniform start is symmetric under `n -> N - n`, so for symmetric wells
/// the iteration stays in the symmetric sector and selects the two-peaked
/// superposition even where the lowest doublet is numerically degenerate.
pub fn ground_state_with(
    params: &SystemParams,
    total_atoms: usize,
    config: &ImaginaryTimeConfig,
) -> Result<GroundState> {
    if !(config.tolerance > 0.0) {
        return invalid(format!("tolerance must be > 0 (got {})", config.tolerance));
    }
    if !(config.step_fraction > 0.0 && config.step_fraction <= 1.0) {
        return invalid("step_fraction must be in (0, 1]");
    }
    let h = hamiltonian_matrix(params, total_atoms)?;
    let dim = total_atoms + 1;
    let mut c = vec![C64::new(1.0 / (dim as f64).sqrt(), 0.0); dim];
    let radius = h.spectral_radius_bound();
    let energy_of =
        |c: &[C64], hc: &[C64]| -> f64 { c.iter().zip(hc).map(|(a, b)| (a.conj() * b).re).sum() };
    let mut hc = h.apply(&c);
    let mut energy = energy_of(&c, &hc);
    let mut energies = Vec::new();
    if radius == 0.0 {
        return Ok(GroundState {
            state: FockVector::from_raw(c),
            energy,
            iterations: 0,
            energies,
        });
    }
    let dtau = config.step_fraction / radius;
    let mut last_change = f64::INFINITY;
    for iteration in 1..=config.max_iterations {
        for (ci, hci) in c.iter_mut().zip(&hc) {
            *ci -= hci * dtau;
        }
        let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for ci in c.iter_mut() {
            *ci /= norm;
        }
        h.apply_into(&c, &mut hc);
        let next = energy_of(&c, &hc);
        if config.record_energies {
            energies.push(next);
        }
        last_change = (energy - next).abs();
        energy = next;
        if last_change < config.tolerance {
            return Ok(GroundState {
                state: FockVector::from_raw(c),
                energy,
                iterations: iteration,
                energies,
            });
        }
    }
    Err(Error::ConvergenceFailure {
        iterations: config.max_iterations,
        residual: last_change,
    })
}

/// Options shared by [`ramp_run`] and [`fidelity_vs_ramp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampConfig {
    /// Number of stored samples, including `t = 0` and the final time.
    pub samples: usize,
    pub integrator: IntegratorConfig,
    pub convention: InteractionConvention,
    pub ground_state: ImaginaryTimeConfig,
}

impl Default for RampConfig {
    fn default() -> Self {
        Self {
            samples: 200,
            integrator: IntegratorConfig::default(),
            convention: InteractionConvention::default(),
            ground_state: ImaginaryTimeConfig::default(),
        }
    }
}

/// States sampled along a ramp.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub interaction: Vec<f64>,
    pub states: Vec<FockVector>,
    pub max_norm_drift: f64,
    pub stats: RkStats,
}

impl Trajectory {
    pub fn final_state(&self) -> &FockVector {
        self.states
            .last()
            .expect("trajectories hold at least two samples")
    }

    pub fn initial_state(&self) -> &FockVector {
        &self.states[0]
    }

    /// Columns `t, n, probability`, one row per sample and basis state.
    pub fn distribution_table(&self) -> Table {
        let mut t = Table::new(["t", "n", "probability"]);
        for (&time, s) in self.times.iter().zip(&self.states) {
            for (n, p) in s.probabilities().into_iter().enumerate() {
                t.push(vec![time, n as f64, p]);
            }
        }
        t
    }

    /// Columns `t, u, diff_variance, fidelity` (NOON fidelity, best phase).
    pub fn summary_table(&self) -> Table {
        let mut t = Table::new(["t", "u", "diff_variance", "fidelity"]);
        for ((&time, &u), s) in self.times.iter().zip(&self.interaction).zip(&self.states) {
            t.push(vec![time, u, diff_variance(s), noon_fidelity(s).0]);
        }
        t
    }
}

/// Starts in the ground state at `u_start` and ramps `U` linearly to `u_end`
/// over `ramp_time` with constant `kappa`.
pub fn ramp_run(
    total_atoms: usize,
    kappa: f64,
    u_start: f64,
    u_end: f64,
    ramp_time: f64,
    config: &RampConfig,
) -> Result<Trajectory> {
    if !(ramp_time > 0.0 && ramp_time.is_finite()) {
        return invalid(format!("ramp_time must be > 0 (got {ramp_time})"));
    }
    if config.samples < 2 {
        return invalid("a trajectory needs at least two samples");
    }
    let base = SystemParams::symmetric(kappa, u_start).with_convention(config.convention);
    let initial = ground_state_with(&base, total_atoms, &config.ground_state)?.state;
    let ramp = PiecewiseLinear::linear(u_start, u_end, ramp_time)?;
    let schedule = ParamSchedule::ramped(base, ramp.clone(), ramp_time);
    let last = config.samples - 1;
    let times: Vec<f64> = (0..config.samples)
        .map(|k| {
            if k == last {
                ramp_time
            } else {
                ramp_time * k as f64 / last as f64
            }
        })
        .collect();
    let integrator = IntegratorConfig {
        method: Method::AdaptiveRk,
        ..config.integrator
    };
    let run = evolve_through(&initial, &schedule, &integrator, &times)?;
    Ok(Trajectory {
        interaction: times.iter().map(|&t| ramp.value_at(t)).collect(),
        times,
        states: run.snapshots,
        max_norm_drift: run.max_norm_drift,
        stats: run.stats,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FidelityPoint {
    pub ramp_time: f64,
    /// Fidelity with the NOON state maximized over its phase.
    pub fidelity: f64,
    pub noon_phase: f64,
    pub final_variance: f64,
    pub norm_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelitySweep {
    pub points: Vec<FidelityPoint>,
    /// Ground state at `u_end` compared with the NOON state.
    pub reference_fidelity: f64,
}

/// Final-state NOON fidelity for each ramp time; ramps run in parallel.
pub fn fidelity_vs_ramp(
    total_atoms: usize,
    kappa: f64,
    u_start: f64,
    u_end: f64,
    ramp_times: &[f64],
    config: &RampConfig,
) -> Result<FidelitySweep> {
    if ramp_times.is_empty() {
        return invalid("ramp_times must not be empty");
    }
    let endpoints_only = RampConfig {
        samples: 2,
        ..*config
    };
    let points = ramp_times
        .par_iter()
        .map(|&ramp_time| {
            let traj = ramp_run(
                total_atoms,
                kappa,
                u_start,
                u_end,
                ramp_time,
                &endpoints_only,
            )?;
            let (fidelity, noon_phase) = noon_fidelity(traj.final_state());
            Ok(FidelityPoint {
                ramp_time,
                fidelity,
                noon_phase,
                final_variance: diff_variance(traj.final_state()),
                norm_drift: traj.max_norm_drift,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = ground_state_with(
        &SystemParams::symmetric(kappa, u_end).with_convention(config.convention),
        total_atoms,
        &config.ground_state,
    )?;
    Ok(FidelitySweep {
        points,
        reference_fidelity: noon_fidelity(&reference.state).0,
    })
}

/// Mean NOON fidelity while `state` is held at constant `params` for
/// `hold_time`, sampled at `samples` uniform instants (exact propagation).
///
/// The end-of-ramp fidelity oscillates once the ramp stops; this average is a
/// steadier figure of merit for comparing ramps.
pub fn hold_mean_fidelity(
    state: &FockVector,
    params: &SystemParams,
    hold_time: f64,
    samples: usize,
) -> Result<f64> {
    if samples == 0 || !(hold_time >= 0.0) {
        return invalid("hold needs samples > 0 and hold_time >= 0");
    }
    let eig = hamiltonian_matrix(params, state.total_atoms())?.eigensystem();
    let total: f64 = (0..samples)
        .map(|k| {
            let t = if samples == 1 {
                0.0
            } else {
                hold_time * k as f64 / (samples - 1) as f64
            };
            let s = FockVector::from_raw(apply_dense(&eig.propagator(t), state.amplitudes()));
            noon_fidelity(&s).0
        })
        .sum();
    Ok(total / samples as f64)
}
