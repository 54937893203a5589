//! Pure and mixed states in the fixed-total-number basis.
//!
//! Amplitude `c_n` multiplies `|N-n, n>`: `N-n` atoms in the left well and
//! `n` atoms in the right well.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::{C64, NORM_TOLERANCE};

/// Pure state of `N` atoms as `N + 1` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<C64>,
}

impl FockVector {
    /// Wraps already normalized amplitudes.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return invalid(format!(
                "a Fock vector needs N >= 1 (got {} amplitudes)",
                amplitudes.len()
            ));
        }
        if amplitudes
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return invalid("amplitudes must be finite");
        }
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return invalid(format!("state is not normalized (sum |c_n|^2 = {norm})"));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return invalid("cannot normalize a zero or non-finite vector");
        }
        for c in &mut amplitudes {
            *c /= norm;
        }
        Self::new(amplitudes)
    }

    /// Number state `|N-n, n>`.
    pub fn number_state(total_atoms: usize, n: usize) -> Result<Self> {
        if total_atoms < 1 {
            return invalid("N must be at least 1");
        }
        if n > total_atoms {
            return invalid(format!("right-well count {n} exceeds N = {total_atoms}"));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); total_atoms + 1];
        amplitudes[n] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_raw(amplitudes: Vec<C64>) -> Self {
        debug_assert!(amplitudes.len() >= 2);
        Self { amplitudes }
    }

    pub fn total_atoms(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    /// `|c_n|^2` for every `n`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Swaps the wells: `c_n -> c_{N-n}`.
    pub fn reversed(&self) -> FockVector {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.reverse();
        Self { amplitudes }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FockVectorRepr {
    #[serde(rename = "N")]
    total_atoms: usize,
    amplitudes: Vec<[f64; 2]>,
}

impl Serialize for FockVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FockVectorRepr {
            total_atoms: self.total_atoms(),
            amplitudes: self.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FockVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = FockVectorRepr::deserialize(deserializer)?;
        if repr.amplitudes.len() != repr.total_atoms + 1 {
            return Err(serde::de::Error::custom(format!(
                "expected {} amplitudes for N = {}, found {}",
                repr.total_atoms + 1,
                repr.total_atoms,
                repr.amplitudes.len()
            )));
        }
        let amplitudes = repr
            .amplitudes
            .iter()
            .map(|&[re, im]| C64::new(re, im))
            .collect();
        FockVector::new(amplitudes).map_err(serde::de::Error::custom)
    }
}

/// Statistical mixture of pure states sharing the same `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedEnsemble {
    components: Vec<(f64, FockVector)>,
}

impl MixedEnsemble {
    pub fn new(components: Vec<(f64, FockVector)>) -> Result<Self> {
        let Some((_, first)) = components.first() else {
            return invalid("an ensemble needs at least one component");
        };
        let n = first.total_atoms();
        let mut total = 0.0;
        for (w, s) in &components {
            if !(*w > 0.0 && *w <= 1.0) {
                return invalid(format!("ensemble weight {w} outside (0, 1]"));
            }
            if s.total_atoms() != n {
                return invalid("ensemble components must share the same N");
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("ensemble weights sum to {total}, not 1"));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[(f64, FockVector)] {
        &self.components
    }

    pub fn total_atoms(&self) -> usize {
        self.components[0].1.total_atoms()
    }
}

/// Anything whose expectation values are weight averages over pure components.
pub trait QuantumState: Sync {
    fn total_atoms(&self) -> usize;

    /// `(weight, pure state)` pairs; weights sum to one.
    fn components(&self) -> Vec<(f64, &FockVector)>;

    /// Density-matrix element `<N-row,row| rho |N-col,col>`.
    fn density_element(&self, row: usize, col: usize) -> C64 {
        self.components()
            .into_iter()
            .map(|(w, s)| s.amplitudes()[row] * s.amplitudes()[col].conj() * w)
            .sum()
    }
}

impl QuantumState for FockVector {
    fn total_atoms(&self) -> usize {
        FockVector::total_atoms(self)
    }

    fn components(&self) -> Vec<(f64, &FockVector)> {
        vec![(1.0, self)]
    }
}

impl QuantumState for MixedEnsemble {
    fn total_atoms(&self) -> usize {
        MixedEnsemble::total_atoms(self)
    }

    fn components(&self) -> Vec<(f64, &FockVector)> {
        self.components.iter().map(|(w, s)| (*w, s)).collect()
    }
}

/// Either kind of state, for callers that decide at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(FockVector),
    Mixed(MixedEnsemble),
}

impl QuantumState for State {
    fn total_atoms(&self) -> usize {
        match self {
            State::Pure(s) => s.total_atoms(),
            State::Mixed(m) => m.total_atoms(),
        }
    }

    fn components(&self) -> Vec<(f64, &FockVector)> {
        match self {
            State::Pure(s) => QuantumState::components(s),
            State::Mixed(m) => QuantumState::components(m),
        }
    }
}

impl From<FockVector> for State {
    fn from(s: FockVector) -> Self {
        State::Pure(s)
    }
}

impl From<MixedEnsemble> for State {
    fn from(m: MixedEnsemble) -> Self {
        State::Mixed(m)
    }
}

/// `(|N,0> + e^{i phi}|0,N>)/sqrt(2)`; the phase sits on the all-right
/// component `c_N`.
pub fn make_noon(total_atoms: usize, phi: f64) -> Result<FockVector> {
    if total_atoms < 1 {
        return invalid("NOON state needs N >= 1");
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); total_atoms + 1];
    amplitudes[0] = C64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[total_atoms] = C64::from_polar(FRAC_1_SQRT_2, phi);
    Ok(FockVector::from_raw(amplitudes))
}

/// Equal-weight incoherent mixture of `|N,0>` and `|0,N>`.
pub fn make_mixture(total_atoms: usize) -> Result<MixedEnsemble> {
    if total_atoms < 1 {
        return invalid("mixture needs N >= 1");
    }
    MixedEnsemble::new(vec![
        (0.5, FockVector::number_state(total_atoms, 0)?),
        (0.5, FockVector::number_state(total_atoms, total_atoms)?),
    ])
}
