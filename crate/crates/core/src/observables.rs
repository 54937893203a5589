//! Static expectation values over pure states and ensembles.

use crate::error::{invalid, Result};
use crate::state::{FockVector, QuantumState};
use crate::C64;

/// Largest quadrature moment order accepted by [`quadrature_moment`].
///
/// Moments are bounded by `N^k`; with `N <= 10^4` and `k <= 64` they stay
/// below `1e256`, inside f64 range.
pub const MAX_MOMENT_ORDER: u32 = 64;

/// `<N_L> = sum (N-n)|c_n|^2`, weight-averaged over components.
pub fn mean_left<S: QuantumState + ?Sized>(state: &S) -> f64 {
    let n_tot = state.total_atoms() as f64;
    state
        .components()
        .into_iter()
        .map(|(w, s)| {
            w * s
                .amplitudes()
                .iter()
                .enumerate()
                .map(|(n, c)| (n_tot - n as f64) * c.norm_sqr())
                .sum::<f64>()
        })
        .sum()
}

/// Ensemble distribution of the right-well count.
pub fn number_distribution<S: QuantumState + ?Sized>(state: &S) -> Vec<f64> {
    let mut p = vec![0.0; state.total_atoms() + 1];
    for (w, s) in state.components() {
        for (pn, c) in p.iter_mut().zip(s.amplitudes()) {
            *pn += w * c.norm_sqr();
        }
    }
    p
}

/// Raw moments `sum (N-2n)^k p_n` for `k = 1..=max_order`.
pub fn difference_moments(distribution: &[f64], max_order: usize) -> Vec<f64> {
    let n_tot = (distribution.len() - 1) as f64;
    (1..=max_order)
        .map(|k| {
            distribution
                .iter()
                .enumerate()
                .map(|(n, p)| p * (n_tot - 2.0 * n as f64).powi(k as i32))
                .sum()
        })
        .collect()
}

/// Variance of `N_L - N_R`, from ensemble-averaged first and second moments.
pub fn diff_variance<S: QuantumState + ?Sized>(state: &S) -> f64 {
    let m = difference_moments(&number_distribution(state), 2);
    m[1] - m[0] * m[0]
}

/// `sum (-1)^n |c_n|^2` with `n` the right-well count.
pub fn parity<S: QuantumState + ?Sized>(state: &S) -> f64 {
    distribution_parity(&number_distribution(state))
}

pub fn distribution_parity(distribution: &[f64]) -> f64 {
    distribution
        .iter()
        .enumerate()
        .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
        .sum()
}

/// `<b|a><a|b>` averaged over the components of `b`.
pub fn fidelity<S: QuantumState + ?Sized>(a: &FockVector, b: &S) -> Result<f64> {
    if a.total_atoms() != b.total_atoms() {
        return invalid(format!(
            "fidelity between states with N = {} and N = {}",
            a.total_atoms(),
            b.total_atoms()
        ));
    }
    Ok(b.components()
        .into_iter()
        .map(|(w, s)| w * a.inner(s).norm_sqr())
        .sum())
}

/// Fidelity with the NOON state maximized over its relative phase.
///
/// Returns `(fidelity, phi*)`. The overlap only involves `c_0` and `c_N`, so
/// the optimum is closed form: `F(phi) = A + Re(e^{-i phi} B)` with
/// `B = sum_k w_k conj(c_0) c_N`.
pub fn noon_fidelity<S: QuantumState + ?Sized>(state: &S) -> (f64, f64) {
    let n = state.total_atoms();
    let mut a = 0.0;
    let mut b = C64::new(0.0, 0.0);
    for (w, s) in state.components() {
        let (c0, cn) = (s.amplitudes()[0], s.amplitudes()[n]);
        a += w * 0.5 * (c0.norm_sqr() + cn.norm_sqr());
        b += c0.conj() * cn * w;
    }
    (a + b.norm(), if b.norm() > 0.0 { b.arg() } else { 0.0 })
}

/// `X_theta c` for `X_theta = a_L^dag a_R e^{-i theta} + h.c.`.
fn apply_quadrature(c: &[C64], theta: f64) -> Vec<C64> {
    let n_tot = c.len() - 1;
    let up = C64::from_polar(1.0, -theta);
    let mut out = vec![C64::new(0.0, 0.0); c.len()];
    for m in 0..n_tot {
        let g = (((m + 1) * (n_tot - m)) as f64).sqrt();
        // a_L^dag a_R moves one atom right -> left: index m+1 -> m.
        out[m] += up * g * c[m + 1];
        out[m + 1] += up.conj() * g * c[m];
    }
    out
}

/// `<X_theta^k>` by direct operator algebra: `X_theta` is applied `k` times
/// to each component before taking the overlap.
pub fn quadrature_moment<S: QuantumState + ?Sized>(state: &S, theta: f64, k: u32) -> Result<f64> {
    if k > MAX_MOMENT_ORDER {
        return invalid(format!("moment order {k} exceeds cap {MAX_MOMENT_ORDER}"));
    }
    Ok(state
        .components()
        .into_iter()
        .map(|(w, s)| {
            let mut v = s.amplitudes().to_vec();
            for _ in 0..k {
                v = apply_quadrature(&v, theta);
            }
            w * s
                .amplitudes()
                .iter()
                .zip(&v)
                .map(|(a, b)| (a.conj() * b).re)
                .sum::<f64>()
        })
        .sum())
}
