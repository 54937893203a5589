//! Parity-fringe spectroscopy of number-basis coherences.
//!
//! With a linear splitter (`u_interference = 0`) the output parity is
//!
//! ```text
//! P(theta) = sum_{n,m} B_{n,m} e^{i m theta} rho_{n,n+m} + c.c.
//! ```
//!
//! so the Fourier component of `P` at frequency `m` only sees coherences
//! between number states `m` atoms apart. The real weights `B_{n,m}` are
//! obtained numerically by pushing basis dyads through the interferometer.

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::ramsey::{fringe_sweep, uniform_grid, FringeData, RamseyChannel, RamseyConfig};
use crate::state::{FockVector, QuantumState};
use crate::table::Table;
use crate::C64;

/// Largest single-frequency fit residual accepted by [`calibrate_b`].
pub const CALIBRATION_TOLERANCE: f64 = 1e-8;
/// Largest reconstruction error accepted by [`verify_decomposition`].
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-8;
/// Lower clamp on the reported Fourier noise floor.
pub const MIN_NOISE_FLOOR: f64 = 1e-14;

/// `S_m = sum_n rho_{n,n+m}` for `m = 0..=N`, with `rho_{i,j} = sum_k w_k c_i conj(c_j)`.
pub fn coherence_sums<S: QuantumState + ?Sized>(state: &S) -> Vec<C64> {
    let n_tot = state.total_atoms();
    let mut sums = vec![C64::new(0.0, 0.0); n_tot + 1];
    for (w, s) in state.components() {
        let c = s.amplitudes();
        for (m, sum) in sums.iter_mut().enumerate() {
            *sum += (0..=n_tot - m).map(|n| c[n] * c[n + m].conj()).sum::<C64>() * w;
        }
    }
    sums
}

/// One-sided Fourier analysis of a parity fringe plus, optionally, the
/// coherence sums it should be compared with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherenceSpectrum {
    pub total_atoms: usize,
    /// `F_m = (1/G) sum_j P(theta_j) e^{-i m theta_j}` for `m = 0..=G/2`.
    pub fourier: Vec<C64>,
    /// `S_m` for `m = 0..=N`, when attached.
    pub coherence: Option<Vec<C64>>,
}

impl CoherenceSpectrum {
    pub fn amplitude(&self, m: usize) -> C64 {
        self.fourier.get(m).copied().unwrap_or_default()
    }

    /// Largest `|F_m|` above the physical band `m > N`, floored at
    /// [`MIN_NOISE_FLOOR`]. For a linear splitter these bins are pure
    /// round-off.
    pub fn noise_floor(&self) -> f64 {
        self.fourier
            .iter()
            .skip(self.total_atoms + 1)
            .map(|f| f.norm())
            .fold(MIN_NOISE_FLOOR, f64::max)
    }

    /// Share of the non-DC fringe power at frequency `m`.
    pub fn power_fraction(&self, m: usize) -> f64 {
        let total: f64 = self.fourier.iter().skip(1).map(|f| f.norm_sqr()).sum();
        if m == 0 || total == 0.0 {
            return 0.0;
        }
        self.amplitude(m).norm_sqr() / total
    }

    pub fn with_coherence<S: QuantumState + ?Sized>(mut self, state: &S) -> Result<Self> {
        if state.total_atoms() != self.total_atoms {
            return invalid("state and fringe have different N");
        }
        self.coherence = Some(coherence_sums(state));
        Ok(self)
    }

    /// Columns `m, fourier_re, fourier_im, coherence_re, coherence_im` for
    /// `m = 0..=N`; coherence columns are NaN when none is attached.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new([
            "m",
            "fourier_re",
            "fourier_im",
            "coherence_re",
            "coherence_im",
        ]);
        for m in 0..=self.total_atoms {
            let f = self.amplitude(m);
            let s = self
                .coherence
                .as_ref()
                .map_or(C64::new(f64::NAN, f64::NAN), |c| c[m]);
            t.push(vec![m as f64, f.re, f.im, s.re, s.im]);
        }
        t
    }
}

/// Checks that `grid` is `theta_0 + 2 pi j / G` and returns `theta_0`.
fn uniform_offset(grid: &[f64]) -> Result<f64> {
    let g = grid.len() as f64;
    let step = 2.0 * std::f64::consts::PI / g;
    let theta0 = grid[0];
    let uniform = grid
        .iter()
        .enumerate()
        .all(|(j, t)| (t - theta0 - step * j as f64).abs() < 1e-9);
    if !uniform {
        return invalid("fringe Fourier analysis needs a uniform grid covering one period");
    }
    Ok(theta0)
}

/// Discrete Fourier transform of the parity fringe over one period.
pub fn parity_fourier(fringe: &FringeData) -> Result<CoherenceSpectrum> {
    let points = fringe.theta_grid.len();
    let n_tot = fringe.total_atoms;
    let required = 2 * n_tot + 2;
    if points < required {
        return Err(Error::Aliasing {
            points,
            max_frequency: n_tot,
            required,
        });
    }
    let theta0 = uniform_offset(&fringe.theta_grid)?;
    let mut buffer: Vec<C64> = fringe
        .parity()
        .into_iter()
        .map(|p| C64::new(p, 0.0))
        .collect();
    FftPlanner::new()
        .plan_fft_forward(points)
        .process(&mut buffer);
    let fourier = buffer
        .iter()
        .take(points / 2 + 1)
        .enumerate()
        .map(|(m, f)| f / points as f64 * C64::from_polar(1.0, -(m as f64) * theta0))
        .collect();
    Ok(CoherenceSpectrum {
        total_atoms: n_tot,
        fourier,
        coherence: None,
    })
}

/// Calibrated weights `B_{n,m}` of the parity decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BTable {
    pub total_atoms: usize,
    /// `values[m][n]` for `n = 0..=N-m`.
    values: Vec<Vec<f64>>,
    /// Largest `|Im B|` seen before discarding the imaginary part.
    pub max_imaginary: f64,
    /// Largest single-frequency fit residual.
    pub max_residual: f64,
}

impl BTable {
    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.values[m][n]
    }

    /// `P(theta)` predicted from the density-matrix coherences of `state`.
    pub fn reconstruct_parity<S: QuantumState + ?Sized>(&self, state: &S, theta: f64) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for (m, row) in self.values.iter().enumerate() {
            let rot = C64::from_polar(1.0, m as f64 * theta);
            for (n, b) in row.iter().enumerate() {
                acc += rot * (b * state.density_element(n, n + m));
            }
        }
        2.0 * acc.re
    }
}

/// Pushes every dyad `|n><n+m|` through the interferometer on a uniform grid
/// and fits its parity contribution to `beta e^{i m theta}`.
pub fn calibrate_b(total_atoms: usize, config: &RamseyConfig) -> Result<BTable> {
    if config.u_interference != 0.0 {
        return invalid("B calibration is defined only for u_interference = 0");
    }
    let channel = RamseyChannel::new(total_atoms, config)?;
    let grid = uniform_grid(4 * (total_atoms + 1));
    let g = grid.len() as f64;
    let basis: Vec<FockVector> = (0..=total_atoms)
        .map(|n| FockVector::number_state(total_atoms, n))
        .collect::<Result<_>>()?;
    // outputs[j][n]: output amplitudes for input |n> at grid angle j.
    let outputs: Vec<Vec<Vec<C64>>> = grid
        .par_iter()
        .map(|&theta| basis.iter().map(|b| channel.output(b, theta)).collect())
        .collect();
    let parity_overlap = |a: &[C64], b: &[C64]| -> C64 {
        a.iter()
            .zip(b)
            .enumerate()
            .map(|(k, (x, y))| {
                if k % 2 == 0 {
                    x.conj() * y
                } else {
                    -(x.conj() * y)
                }
            })
            .sum()
    };
    let fits: Vec<(usize, usize, C64, f64)> = (0..=total_atoms)
        .into_par_iter()
        .flat_map_iter(|m| (0..=total_atoms - m).map(move |n| (m, n)))
        .map(|(m, n)| {
            // Tr[Pi V|n><n+m|V^dag] = <out_{n+m}|Pi|out_n>.
            let samples: Vec<(f64, C64)> = grid
                .iter()
                .zip(&outputs)
                .map(|(&theta, out)| (theta, parity_overlap(&out[n + m], &out[n])))
                .collect();
            let beta: C64 = samples
                .iter()
                .map(|(theta, f)| f * C64::from_polar(1.0, -(m as f64) * theta))
                .sum::<C64>()
                / g;
            let residual = samples
                .iter()
                .map(|(theta, f)| (f - beta * C64::from_polar(1.0, m as f64 * theta)).norm())
                .fold(0.0, f64::max);
            (m, n, beta, residual)
        })
        .collect();
    let mut values: Vec<Vec<f64>> = (0..=total_atoms)
        .map(|m| vec![0.0; total_atoms + 1 - m])
        .collect();
    let (mut max_imaginary, mut max_residual) = (0.0f64, 0.0f64);
    for (m, n, beta, residual) in fits {
        if residual > CALIBRATION_TOLERANCE {
            return Err(Error::CalibrationFailure {
                row: n,
                col: m,
                residual,
            });
        }
        // The m = 0 term is counted twice by "+ c.c.".
        let b = if m == 0 { beta * 0.5 } else { beta };
        max_imaginary = max_imaginary.max(b.im.abs());
        max_residual = max_residual.max(residual);
        values[m][n] = b.re;
    }
    Ok(BTable {
        total_atoms,
        values,
        max_imaginary,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub max_error: f64,
    pub grid_points: usize,
    pub max_b_imaginary: f64,
}

/// Compares the simulated parity fringe with its reconstruction from the
/// calibrated `B` and the state's coherences over the default grid.
pub fn verify_decomposition<S: QuantumState + ?Sized>(
    state: &S,
    config: &RamseyConfig,
) -> Result<DecompositionReport> {
    let b = calibrate_b(state.total_atoms(), config)?;
    verify_decomposition_with(
        state,
        &b,
        config,
        &uniform_grid(crate::ramsey::DEFAULT_GRID_POINTS),
    )
}

/// [`verify_decomposition`] with a precomputed table and explicit grid.
pub fn verify_decomposition_with<S: QuantumState + ?Sized>(
    state: &S,
    b: &BTable,
    config: &RamseyConfig,
    grid: &[f64],
) -> Result<DecompositionReport> {
    if b.total_atoms != state.total_atoms() {
        return invalid("B table and state have different N");
    }
    let fringe = fringe_sweep(state, grid, config, 1)?;
    let max_error = fringe
        .records
        .iter()
        .map(|r| (r.parity - b.reconstruct_parity(state, r.theta)).abs())
        .fold(0.0, f64::max);
    if max_error > DECOMPOSITION_TOLERANCE {
        return Err(Error::DecompositionViolation {
            max_error,
            threshold: DECOMPOSITION_TOLERANCE,
        });
    }
    Ok(DecompositionReport {
        max_error,
        grid_points: grid.len(),
        max_b_imaginary: b.max_imaginary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_mixture, make_noon};

    #[test]
    fn noon_coherence_sums() {
        let phi = 0.6;
        let s = coherence_sums(&make_noon(6, phi).unwrap());
        assert!((s[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(s[1..6].iter().all(|v| v.norm() < 1e-15));
        assert!((s[6] - C64::from_polar(0.5, -phi)).norm() < 1e-15);
        let mix = coherence_sums(&make_mixture(6).unwrap());
        assert!(mix[1..].iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn binomial_state_has_positive_coherences() {
        let amps = (0..=4).map(|k| C64::new([1.0, 2.0, 2.449489742783178, 2.0, 1.0][k] / 4.0, 0.0));
        let s = FockVector::new(amps.collect()).unwrap();
        assert!(coherence_sums(&s)
            .iter()
            .all(|v| v.re > 0.0 && v.im.abs() < 1e-15));
    }

    #[test]
    fn two_level_table_reproduces_cosine_parity() {
        let cfg = RamseyConfig::default();
        let b = calibrate_b(1, &cfg).unwrap();
        assert!(b.max_imaginary < 1e-10);
        let s = make_noon(1, 0.0).unwrap();
        for theta in uniform_grid(32) {
            // One atom: parity equals the mean number difference.
            assert!((b.reconstruct_parity(&s, theta) - theta.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_part_reproduces_diagonal_parity() {
        let cfg = RamseyConfig::default();
        let b = calibrate_b(5, &cfg).unwrap();
        let s = FockVector::number_state(5, 2).unwrap();
        let r = crate::ramsey::ramsey_run(&s, 1.3, &cfg).unwrap();
        assert!((b.reconstruct_parity(&s, 1.3) - r.parity).abs() < 1e-10);
    }

    #[test]
    fn noon_spectrum_has_only_dc_and_n() {
        let n = 8;
        let fringe = fringe_sweep(
            &make_noon(n, 0.0).unwrap(),
            &uniform_grid(64),
            &RamseyConfig::default(),
            1,
        )
        .unwrap();
        let spec = parity_fourier(&fringe).unwrap();
        for m in 1..n {
            assert!(spec.amplitude(m).norm() < 1e-12, "m={m}");
        }
        assert!(spec.amplitude(n).norm() > 0.1);
        assert!(spec.noise_floor() < 1e-12);
        assert!((spec.power_fraction(n) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_is_aliasing_error() {
        let fringe = fringe_sweep(
            &make_noon(8, 0.0).unwrap(),
            &uniform_grid(17),
            &RamseyConfig::default(),
            1,
        )
        .unwrap();
        assert!(matches!(
            parity_fourier(&fringe),
            Err(Error::Aliasing {
                points: 17,
                required: 18,
                ..
            })
        ));
    }

    #[test]
    fn shifted_grid_gives_same_spectrum() {
        let s = make_noon(3, 0.4).unwrap();
        let cfg = RamseyConfig::default();
        let base = uniform_grid(16);
        let shifted: Vec<f64> = base.iter().map(|t| t + 0.3).collect();
        let a = parity_fourier(&fringe_sweep(&s, &base, &cfg, 1).unwrap()).unwrap();
        let b = parity_fourier(&fringe_sweep(&s, &shifted, &cfg, 1).unwrap()).unwrap();
        for m in 0..=3 {
            assert!((a.amplitude(m) - b.amplitude(m)).norm() < 1e-12);
        }
        let nonuniform = vec![0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0];
        let f = fringe_sweep(&s, &nonuniform, &cfg, 1).unwrap();
        assert!(parity_fourier(&f).is_err());
    }

    #[test]
    fn calibration_requires_linear_splitter() {
        assert!(calibrate_b(4, &RamseyConfig::default().with_interaction(-0.1)).is_err());
    }

    #[test]
    fn verification_of_noon_and_mixture() {
        let cfg = RamseyConfig::default();
        let report = verify_decomposition(&make_noon(8, 0.0).unwrap(), &cfg).unwrap();
        assert!(report.max_error < 1e-8);
        let report = verify_decomposition(&make_mixture(10).unwrap(), &cfg).unwrap();
        assert!(report.max_error < 1e-8);
    }

    #[test]
    fn wrong_table_is_a_violation() {
        let cfg = RamseyConfig::default();
        let mut b = calibrate_b(4, &cfg).unwrap();
        b.values[4][0] += 0.1;
        let err =
            verify_decomposition_with(&make_noon(4, 0.0).unwrap(), &b, &cfg, &uniform_grid(32));
        assert!(matches!(err, Err(Error::DecompositionViolation { .. })));
    }

    #[test]
    fn table_columns() {
        let s = make_noon(2, 0.0).unwrap();
        let f = fringe_sweep(&s, &uniform_grid(8), &RamseyConfig::default(), 1).unwrap();
        let t = parity_fourier(&f)
            .unwrap()
            .with_coherence(&s)
            .unwrap()
            .to_table();
        assert_eq!(
            t.columns,
            [
                "m",
                "fourier_re",
                "fourier_im",
                "coherence_re",
                "coherence_im"
            ]
        );
        assert_eq!(t.rows.len(), 3);
        assert!((t.rows[2][3] - 0.5).abs() < 1e-15);
    }
}
