use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Pure bipartite state in Schmidt form, `Σ αᵢ |ii⟩` with nonincreasing
/// nonnegative `αᵢ` and `Σ αᵢ² = 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "StateRepr", into = "StateRepr"))]
pub struct SchmidtState {
    alphas: Vec<f64>,
}

#[cfg(feature = "serde")]
#[derive(serde::Serialize, serde::Deserialize)]
struct StateRepr {
    alphas: Vec<f64>,
}

#[cfg(feature = "serde")]
impl TryFrom<StateRepr> for SchmidtState {
    type Error = Error;
    fn try_from(r: StateRepr) -> Result<Self> {
        SchmidtState::from_coefficients(&r.alphas)
    }
}

#[cfg(feature = "serde")]
impl From<SchmidtState> for StateRepr {
    fn from(s: SchmidtState) -> Self {
        StateRepr { alphas: s.alphas }
    }
}

/// How a state is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum StateProfile {
    /// Arbitrary nonnegative coefficients; normalized and sorted.
    Explicit(Vec<f64>),
    /// `α|11⟩ + √(1−α²)/√n Σ_{i=2}^{n+1} |ii⟩` in dimension `n + 1`.
    AlphaTop { alpha: f64, n: usize },
    /// Uniform coefficients `1/√d`.
    MaximallyEntangled(usize),
}

impl SchmidtState {
    /// Normalizes and sorts nonnegative coefficients.
    pub fn from_coefficients(coeffs: &[f64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidState("empty coefficient list".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(Error::InvalidState("coefficients must be finite and nonnegative".into()));
        }
        let norm = libm::sqrt(coeffs.iter().map(|c| c * c).sum());
        if norm == 0.0 {
            return Err(Error::InvalidState("all-zero profile".into()));
        }
        let mut alphas: Vec<f64> = coeffs.iter().map(|c| c / norm).collect();
        alphas.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { alphas })
    }

    pub fn maximally_entangled(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidState("dimension must be positive".into()));
        }
        let v = 1.0 / libm::sqrt(dim as f64);
        Ok(Self {
            alphas: alloc::vec![v; dim],
        })
    }

    pub fn product(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidState("dimension must be positive".into()));
        }
        let mut alphas = alloc::vec![0.0; dim];
        alphas[0] = 1.0;
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn dim(&self) -> usize {
        self.alphas.len()
    }

    /// Number of nonzero coefficients.
    pub fn schmidt_rank(&self) -> usize {
        self.alphas.iter().filter(|&&a| a > 0.0).count()
    }

    /// The coefficient vector in `ℝ^{d²}` (index `i·d + j`).
    pub fn to_vector(&self) -> Vec<f64> {
        let d = self.dim();
        let mut v = alloc::vec![0.0; d * d];
        for (i, a) in self.alphas.iter().enumerate() {
            v[i * d + i] = *a;
        }
        v
    }
}

/// Builds a state from a profile.
pub fn build_state(profile: &StateProfile) -> Result<SchmidtState> {
    match profile {
        StateProfile::Explicit(c) => SchmidtState::from_coefficients(c),
        StateProfile::MaximallyEntangled(d) => SchmidtState::maximally_entangled(*d),
        StateProfile::AlphaTop { alpha, n } => {
            if !(0.0..=1.0).contains(alpha) || *n == 0 {
                return Err(Error::InvalidState(alloc::format!(
                    "alpha_top {alpha} must lie in [0, 1] and n must be positive"
                )));
            }
            let rest = libm::sqrt((1.0 - alpha * alpha).max(0.0) / *n as f64);
            let mut c = alloc::vec![rest; n + 1];
            c[0] = *alpha;
            SchmidtState::from_coefficients(&c)
        }
    }
}
