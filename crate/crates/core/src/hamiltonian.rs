//! Two-mode Bose-Hubbard Hamiltonian in the fixed-number basis.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::state::FockVector;
use crate::C64;

/// Prefactor attached to the on-site interaction `U a^dag a^dag a a`.
///
/// `Half` uses `U/2` (the second-quantized form); `Full` drops the `1/2`, as in
/// the number-state equations of motion. `Full` is the convention that
/// reproduces the reference ground-state and ramp variances, so it is the
/// default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionConvention {
    Half,
    #[default]
    Full,
}

impl InteractionConvention {
    pub fn factor(self) -> f64 {
        match self {
            InteractionConvention::Half => 0.5,
            InteractionConvention::Full => 1.0,
        }
    }
}

/// Model parameters, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub kappa: f64,
    pub u_left: f64,
    pub u_right: f64,
    pub e_left: f64,
    pub e_right: f64,
    #[serde(default)]
    pub interaction_convention: InteractionConvention,
}

impl SystemParams {
    /// Symmetric double well: `E_L = E_R = 0`, `U_L = U_R = u`.
    pub fn symmetric(kappa: f64, u: f64) -> Self {
        Self {
            kappa,
            u_left: u,
            u_right: u,
            e_left: 0.0,
            e_right: 0.0,
            interaction_convention: InteractionConvention::default(),
        }
    }

    pub fn with_convention(mut self, convention: InteractionConvention) -> Self {
        self.interaction_convention = convention;
        self
    }

    pub fn with_u(mut self, u: f64) -> Self {
        self.u_left = u;
        self.u_right = u;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.e_left == self.e_right && self.u_left == self.u_right
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.kappa,
            self.u_left,
            self.u_right,
            self.e_left,
            self.e_right,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return invalid("system parameters must be finite");
        }
        if self.kappa < 0.0 {
            return invalid(format!("kappa must be >= 0 (got {})", self.kappa));
        }
        Ok(())
    }
}

/// Real symmetric tridiagonal Hamiltonian (rad/s).
///
/// `diagonal[n]` is the on-site energy of `|N-n, n>`; `off_diagonal[n]`
/// couples `n` and `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

pub fn hamiltonian_matrix(params: &SystemParams, total_atoms: usize) -> Result<HamiltonianMatrix> {
    if total_atoms < 1 {
        return invalid("N must be at least 1");
    }
    params.validate()?;
    let n_tot = total_atoms as f64;
    let chi = params.interaction_convention.factor();
    let diagonal = (0..=total_atoms)
        .map(|n| {
            let right = n as f64;
            let left = n_tot - right;
            params.e_left * left
                + params.e_right * right
                + chi * params.u_left * left * (left - 1.0)
                + chi * params.u_right * right * (right - 1.0)
        })
        .collect();
    let off_diagonal = (0..total_atoms)
        .map(|n| {
            let n = n as f64;
            -params.kappa * ((n + 1.0) * (n_tot - n)).sqrt()
        })
        .collect();
    Ok(HamiltonianMatrix {
        diagonal,
        off_diagonal,
    })
}

impl HamiltonianMatrix {
    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    /// Matrix element `H[i][j]`.
    pub fn entry(&self, i: usize, j: usize) -> C64 {
        let value = if i == j {
            self.diagonal[i]
        } else if i + 1 == j {
            self.off_diagonal[i]
        } else if j + 1 == i {
            self.off_diagonal[j]
        } else {
            0.0
        };
        C64::new(value, 0.0)
    }

    /// `out = H c`.
    pub fn apply_into(&self, c: &[C64], out: &mut [C64]) {
        let d = self.diagonal.len();
        debug_assert_eq!(c.len(), d);
        debug_assert_eq!(out.len(), d);
        for n in 0..d {
            let mut acc = c[n] * self.diagonal[n];
            if n > 0 {
                acc += c[n - 1] * self.off_diagonal[n - 1];
            }
            if n + 1 < d {
                acc += c[n + 1] * self.off_diagonal[n];
            }
            out[n] = acc;
        }
    }

    pub fn apply(&self, c: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); c.len()];
        self.apply_into(c, &mut out);
        out
    }

    /// `<c|H|c>` for a normalized state.
    pub fn expectation(&self, state: &FockVector) -> f64 {
        let hc = self.apply(state.amplitudes());
        state
            .amplitudes()
            .iter()
            .zip(&hc)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    /// Gershgorin bound on the spectral radius.
    pub fn spectral_radius_bound(&self) -> f64 {
        let d = self.diagonal.len();
        (0..d)
            .map(|n| {
                let mut r = self.diagonal[n].abs();
                if n > 0 {
                    r += self.off_diagonal[n - 1].abs();
                }
                if n + 1 < d {
                    r += self.off_diagonal[n].abs();
                }
                r
            })
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let d = self.dimension();
        DMatrix::from_fn(d, d, |i, j| self.entry(i, j).re)
    }

    /// Full eigendecomposition, eigenvalues ascending.
    pub fn eigensystem(&self) -> Eigensystem {
        let eig = SymmetricEigen::new(self.to_dense());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dimension(), order.len(), |i, k| {
            eig.eigenvectors[(i, order[k])]
        });
        Eigensystem { values, vectors }
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors stored as columns.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigensystem {
    /// Dense unitary `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> DMatrix<C64> {
        let d = self.values.len();
        let phases: Vec<C64> = self
            .values
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * t))
            .collect();
        DMatrix::from_fn(d, d, |i, j| {
            (0..d)
                .map(|k| phases[k] * (self.vectors[(i, k)] * self.vectors[(j, k)]))
                .sum()
        })
    }

    /// Eigenvector `k` as a state with a non-negative first nonzero amplitude.
    pub fn state(&self, k: usize) -> FockVector {
        let col = self.vectors.column(k);
        let sign = col
            .iter()
            .find(|v| v.abs() > 1e-12)
            .map_or(1.0, |v| v.signum());
        FockVector::from_raw(col.iter().map(|&v| C64::new(sign * v, 0.0)).collect())
    }
}
