//! Virtual Ramsey interferometer: instantaneous phase imprint, a tunneling
//! beam splitter, then a number measurement.
//!
//! Angle convention: the public `theta` is the quadrature angle. With
//! `u_interference = 0` and the default `pi/(4 kappa_bs)` splitter, the
//! moments of `N_L - N_R` at the output equal `<X_theta^k>` of the input, and
//! a one-atom NOON state gives the mean fringe `cos(theta - phi)`. Internally
//! the accrued phase is `theta + pi/2` on the right well (or the mirror image
//! for [`PhaseSign::Left`]).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolve::apply_dense;
use crate::hamiltonian::{hamiltonian_matrix, InteractionConvention, SystemParams};
use crate::observables::{difference_moments, distribution_parity, MAX_MOMENT_ORDER};
use crate::state::{FockVector, QuantumState};
use crate::table::Table;
use crate::C64;

/// Grid size used when none is given: resolves frequencies up to 255.
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Which well accrues the imprinted phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSign {
    /// `c_n -> c_n e^{-i n theta}`.
    #[default]
    Right,
    /// `c_n -> c_n e^{-i (N-n) theta}`.
    Left,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RamseyConfig {
    /// Tunneling rate during the beam splitter (rad/s).
    pub kappa_bs: f64,
    /// Interaction rate during the beam splitter (rad/s).
    #[serde(default)]
    pub u_interference: f64,
    /// Defaults to `pi / (4 kappa_bs)`.
    #[serde(default)]
    pub bs_duration: Option<f64>,
    #[serde(default)]
    pub phase_sign: PhaseSign,
    #[serde(default)]
    pub convention: InteractionConvention,
}

impl Default for RamseyConfig {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl RamseyConfig {
    pub fn new(kappa_bs: f64) -> Self {
        Self {
            kappa_bs,
            u_interference: 0.0,
            bs_duration: None,
            phase_sign: PhaseSign::Right,
            convention: InteractionConvention::default(),
        }
    }

    pub fn with_interaction(mut self, u_interference: f64) -> Self {
        self.u_interference = u_interference;
        self
    }

    pub fn duration(&self) -> f64 {
        self.bs_duration.unwrap_or(FRAC_PI_4 / self.kappa_bs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_bs > 0.0 && self.kappa_bs.is_finite()) {
            return invalid(format!("kappa_bs must be > 0 (got {})", self.kappa_bs));
        }
        if !self.u_interference.is_finite() {
            return invalid("u_interference must be finite");
        }
        let d = self.duration();
        if !(d > 0.0 && d.is_finite()) {
            return invalid(format!("bs_duration must be > 0 (got {d})"));
        }
        Ok(())
    }

    /// Phase actually imprinted for quadrature angle `theta`.
    fn accrued_phase(&self, theta: f64) -> f64 {
        match self.phase_sign {
            PhaseSign::Right => theta + FRAC_PI_2,
            PhaseSign::Left => -theta - FRAC_PI_2,
        }
    }

    fn splitter_params(&self) -> SystemParams {
        SystemParams::symmetric(self.kappa_bs, self.u_interference).with_convention(self.convention)
    }
}

/// Diagonal phase imprint `c_n -> c_n e^{-i n theta}` (right well) or
/// `c_n -> c_n e^{-i (N-n) theta}` (left well).
pub fn phase_stage(state: &FockVector, theta: f64, sign: PhaseSign) -> FockVector {
    let n_tot = state.total_atoms();
    let amps = state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let k = match sign {
                PhaseSign::Right => n,
                PhaseSign::Left => n_tot - n,
            };
            c * C64::from_polar(1.0, -(k as f64) * theta)
        })
        .collect();
    FockVector::from_raw(amps)
}

/// The interferometer for a fixed `N`, with the splitter propagator cached.
#[derive(Debug, Clone)]
pub struct RamseyChannel {
    config: RamseyConfig,
    total_atoms: usize,
    splitter: DMatrix<C64>,
}

impl RamseyChannel {
    pub fn new(total_atoms: usize, config: &RamseyConfig) -> Result<Self> {
        config.validate()?;
        let h = hamiltonian_matrix(&config.splitter_params(), total_atoms)?;
        Ok(Self {
            config: *config,
            total_atoms,
            splitter: h.eigensystem().propagator(config.duration()),
        })
    }

    pub fn total_atoms(&self) -> usize {
        self.total_atoms
    }

    pub fn config(&self) -> &RamseyConfig {
        &self.config
    }

    /// Output amplitudes for a pure input at quadrature angle `theta`.
    pub fn output(&self, state: &FockVector, theta: f64) -> Vec<C64> {
        let shifted = phase_stage(
            state,
            self.config.accrued_phase(theta),
            self.config.phase_sign,
        );
        apply_dense(&self.splitter, shifted.amplitudes())
    }

    /// Ensemble-averaged output number distribution.
    pub fn distribution<S: QuantumState + ?Sized>(&self, state: &S, theta: f64) -> Vec<f64> {
        let mut p = vec![0.0; self.total_atoms + 1];
        for (w, s) in state.components() {
            for (pn, c) in p.iter_mut().zip(self.output(s, theta)) {
                *pn += w * c.norm_sqr();
            }
        }
        p
    }

    pub fn record<S: QuantumState + ?Sized>(
        &self,
        state: &S,
        theta: f64,
        max_moment: usize,
    ) -> Result<RamseyRecord> {
        self.check_atoms(state)?;
        Ok(RamseyRecord::from_distribution(
            theta,
            self.distribution(state, theta),
            max_moment,
        ))
    }

    fn check_atoms<S: QuantumState + ?Sized>(&self, state: &S) -> Result<()> {
        if state.total_atoms() != self.total_atoms {
            return invalid(format!(
                "channel built for N = {} but state has N = {}",
                self.total_atoms,
                state.total_atoms()
            ));
        }
        Ok(())
    }
}

/// Measurement statistics at one angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamseyRecord {
    pub theta: f64,
    /// Output `|c_n|^2`, `n` atoms in the right well.
    pub distribution: Vec<f64>,
    /// `<N_L - N_R>`.
    pub mean_diff: f64,
    pub var_diff: f64,
    /// `<(N_L - N_R)^k>` for `k = 1..=max_moment`.
    pub moments: Vec<f64>,
    pub parity: f64,
}

impl RamseyRecord {
    fn from_distribution(theta: f64, distribution: Vec<f64>, max_moment: usize) -> Self {
        let low = difference_moments(&distribution, 2);
        let moments = difference_moments(&distribution, max_moment);
        Self {
            theta,
            mean_diff: low[0],
            var_diff: low[1] - low[0] * low[0],
            moments,
            parity: distribution_parity(&distribution),
            distribution,
        }
    }
}

fn moment_cap(total_atoms: usize) -> usize {
    total_atoms.min(MAX_MOMENT_ORDER as usize)
}

/// One interferometer shot at `theta`; moments are recorded up to
/// `min(N, 64)`.
pub fn ramsey_run<S: QuantumState + ?Sized>(
    state: &S,
    theta: f64,
    config: &RamseyConfig,
) -> Result<RamseyRecord> {
    let channel = RamseyChannel::new(state.total_atoms(), config)?;
    channel.record(state, theta, moment_cap(state.total_atoms()))
}

/// `points` uniform angles over `[0, 2 pi)`.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|j| 2.0 * PI * j as f64 / points as f64)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FringeData {
    pub total_atoms: usize,
    pub theta_grid: Vec<f64>,
    pub records: Vec<RamseyRecord>,
}

impl FringeData {
    pub fn parity(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.parity).collect()
    }

    pub fn mean_diff(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.mean_diff).collect()
    }

    pub fn var_diff(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.var_diff).collect()
    }

    /// `k`-th moment series, `k >= 1`.
    pub fn moment(&self, k: usize) -> Option<Vec<f64>> {
        self.records
            .iter()
            .map(|r| r.moments.get(k.checked_sub(1)?).copied())
            .collect()
    }

    /// Columns `theta, mean_diff, var_diff, parity`, then `p_0..p_N` when
    /// `with_distribution` is set.
    pub fn to_table(&self, with_distribution: bool) -> Table {
        let mut columns: Vec<String> = ["theta", "mean_diff", "var_diff", "parity"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        if with_distribution {
            columns.extend((0..=self.total_atoms).map(|n| format!("p_{n}")));
        }
        let mut table = Table::new(columns);
        for r in &self.records {
            let mut row = vec![r.theta, r.mean_diff, r.var_diff, r.parity];
            if with_distribution {
                row.extend_from_slice(&r.distribution);
            }
            table.push(row);
        }
        table
    }
}

/// Runs the interferometer at every grid angle (in parallel); records keep
/// the grid order.
pub fn fringe_sweep<S: QuantumState + ?Sized>(
    state: &S,
    theta_grid: &[f64],
    config: &RamseyConfig,
    max_moment: usize,
) -> Result<FringeData> {
    if theta_grid.is_empty() {
        return invalid("theta grid must not be empty");
    }
    if theta_grid.iter().any(|t| !t.is_finite()) {
        return invalid("theta grid must be finite");
    }
    if max_moment > MAX_MOMENT_ORDER as usize {
        return invalid(format!(
            "max_moment {max_moment} exceeds cap {MAX_MOMENT_ORDER}"
        ));
    }
    let channel = RamseyChannel::new(state.total_atoms(), config)?;
    channel.check_atoms(state)?;
    let records = theta_grid
        .par_iter()
        .map(|&theta| {
            RamseyRecord::from_distribution(theta, channel.distribution(state, theta), max_moment)
        })
        .collect();
    Ok(FringeData {
        total_atoms: state.total_atoms(),
        theta_grid: theta_grid.to_vec(),
        records,
    })
}
