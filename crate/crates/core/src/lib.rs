//! Exact Fock-space simulation of a Bose-Einstein condensate in a double well.
//!
//! The crate covers the whole pipeline used to create and certify NOON-like
//! superpositions of `N` atoms:
//!
//! * [`state`], [`hamiltonian`] and [`observables`]: the fixed-number basis
//!   `|N-n, n>` (`n` atoms in the right well), the two-mode Bose-Hubbard
//!   Hamiltonian and static expectation values.
//! * [`evolve`]: real-time propagation (adaptive Dormand-Prince 8(5,3) or exact
//!   eigen-propagation), imaginary-time ground states and interaction ramps.
//! * [`ramsey`]: the phase-accumulation plus beam-splitter interferometer and
//!   its fringe records.
//! * [`coherence`]: parity-fringe Fourier analysis and its mapping onto
//!   density-matrix coherences.
//! * [`physical`]: trap and scattering-length estimates of the interaction rate.
//!
//! All Hamiltonian parameters are angular frequencies (rad/s) with `hbar`
//! divided out.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coherence;
pub mod error;
pub mod evolve;
pub mod hamiltonian;
pub mod observables;
pub mod physical;
pub mod ramsey;
mod rk;
pub mod state;
pub mod table;

pub use num_complex::Complex64 as C64;

pub use coherence::{
    calibrate_b, coherence_sums, parity_fourier, verify_decomposition, verify_decomposition_with,
    BTable, CoherenceSpectrum, DecompositionReport,
};
pub use error::{Error, Result};
pub use evolve::{
    fidelity_vs_ramp, ground_state, ground_state_with, hold_mean_fidelity, propagate_exact,
    ramp_run, real_evolve, real_evolve_report, FidelityPoint, FidelitySweep, GroundState,
    ImaginaryTimeConfig, IntegratorConfig, Method, ParamSchedule, PiecewiseLinear, RampConfig,
    Trajectory,
};
pub use hamiltonian::{hamiltonian_matrix, HamiltonianMatrix, InteractionConvention, SystemParams};
pub use observables::{
    diff_variance, fidelity, mean_left, noon_fidelity, parity, quadrature_moment,
};
pub use physical::{
    feshbach_ramp, gaussian_widths, interaction_strength, FrequencyUnits, TrapSpec,
};
pub use ramsey::{
    fringe_sweep, phase_stage, ramsey_run, uniform_grid, FringeData, PhaseSign, RamseyChannel,
    RamseyConfig, RamseyRecord,
};
pub use state::{make_mixture, make_noon, FockVector, MixedEnsemble, QuantumState, State};
pub use table::Table;

/// Normalization tolerance shared by every state constructor.
pub const NORM_TOLERANCE: f64 = 1e-9;
