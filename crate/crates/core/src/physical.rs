//! Interaction rate of a trapped condensate from lab parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolve::PiecewiseLinear;

/// Reduced Planck constant (J s), CODATA 2018.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit (kg), CODATA 2018.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Bohr radius (m), CODATA 2018.
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
/// Mass of rubidium-85 in atomic mass units.
pub const RB85_MASS_AMU: f64 = 84.911_789_738;

/// How user-supplied trap frequencies should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyUnits {
    /// Already in rad/s.
    #[default]
    Angular,
    /// Cycles per second; multiplied by `2 pi`.
    Hertz,
}

impl FrequencyUnits {
    pub fn to_angular(self, value: f64) -> f64 {
        match self {
            FrequencyUnits::Angular => value,
            FrequencyUnits::Hertz => 2.0 * PI * value,
        }
    }
}

/// Harmonic trap and atomic species, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    /// rad/s.
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    /// Meters; negative for attractive interactions.
    pub scattering_length: f64,
    /// kg.
    pub mass: f64,
}

impl TrapSpec {
    pub fn new(omega: [f64; 3], scattering_length: f64, mass: f64) -> Result<Self> {
        let spec = Self {
            omega_x: omega[0],
            omega_y: omega[1],
            omega_z: omega[2],
            scattering_length,
            mass,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from atomic mass units, Bohr radii and frequencies in
    /// the given units.
    pub fn from_lab_units(
        mass_amu: f64,
        omega: [f64; 3],
        units: FrequencyUnits,
        scattering_length_a0: f64,
    ) -> Result<Self> {
        Self::new(
            omega.map(|w| units.to_angular(w)),
            scattering_length_a0 * BOHR_RADIUS,
            mass_amu * ATOMIC_MASS_UNIT,
        )
    }

    pub fn with_scattering_length(mut self, a: f64) -> Self {
        self.scattering_length = a;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let omegas = [self.omega_x, self.omega_y, self.omega_z];
        if omegas.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return invalid(format!("trap frequencies must be > 0 (got {omegas:?})"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return invalid(format!("mass must be > 0 (got {})", self.mass));
        }
        if !self.scattering_length.is_finite() {
            return invalid("scattering length must be finite");
        }
        Ok(())
    }
}

/// Oscillator ground-state widths `sqrt(hbar / (m omega_i))` (m).
pub fn gaussian_widths(spec: &TrapSpec) -> Result<(f64, f64, f64)> {
    spec.validate()?;
    let w = |omega: f64| (HBAR / (spec.mass * omega)).sqrt();
    Ok((w(spec.omega_x), w(spec.omega_y), w(spec.omega_z)))
}

/// `U = (4 pi a hbar / m) * (2 pi)^{-3/2} / (sigma_x sigma_y sigma_z)` in rad/s:
/// the contact coupling integrated over the normalized Gaussian mode.
pub fn interaction_strength(spec: &TrapSpec) -> Result<f64> {
    let (sx, sy, sz) = gaussian_widths(spec)?;
    let u0 = 4.0 * PI * spec.scattering_length * HBAR / spec.mass;
    Ok(u0 * (2.0 * PI).powf(-1.5) / (sx * sy * sz))
}

/// Linear scattering-length ramp mapped to the matching linear `U(t)`.
pub fn feshbach_ramp(
    a_start: f64,
    a_end: f64,
    ramp_time: f64,
    spec: &TrapSpec,
) -> Result<PiecewiseLinear> {
    let u_start = interaction_strength(&spec.with_scattering_length(a_start))?;
    let u_end = interaction_strength(&spec.with_scattering_length(a_end))?;
    PiecewiseLinear::linear(u_start, u_end, ramp_time)
}
