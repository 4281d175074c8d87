use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{herm_eig, SymMatrix};

/// Per-input POVMs on a `dim`-dimensional real space. `elements[x][a]` is
/// the effect for input `x`, outcome `a`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PovmFamily {
    dim: usize,
    elements: Vec<Vec<SymMatrix>>,
}

/// Outcome of [`validate_povm`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PovmReport {
    /// Minimum eigenvalue of each element, indexed `[x][a]`.
    pub min_eigenvalues: Vec<Vec<f64>>,
    /// Frobenius norm of `Σ_a E_x^a − I` per input.
    pub completeness_residuals: Vec<f64>,
    pub worst_eigenvalue: f64,
    pub worst_residual: f64,
    pub passed: bool,
}

impl PovmFamily {
    /// Wraps elements without checking positivity or completeness (see
    /// [`validate_povm`]); shapes must be consistent.
    pub fn new(elements: Vec<Vec<SymMatrix>>) -> Result<Self> {
        let first = elements
            .first()
            .and_then(|e| e.first())
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let dim = first.dim();
        let k = elements[0].len();
        for (x, row) in elements.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidPovm(alloc::format!(
                    "input {x} has {} outcomes, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|e| e.dim() != dim) {
                return Err(Error::InvalidPovm(alloc::format!("input {x} has mixed dimensions")));
            }
        }
        Ok(Self { dim, elements })
    }

    /// Every input measured with the single effect `I`.
    pub fn trivial(n_inputs: usize, dim: usize) -> Self {
        Self {
            dim,
            elements: (0..n_inputs).map(|_| alloc::vec![SymMatrix::identity(dim)]).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_inputs(&self) -> usize {
        self.elements.len()
    }

    pub fn n_outputs(&self) -> usize {
        self.elements[0].len()
    }

    pub fn element(&self, x: usize, a: usize) -> &SymMatrix {
        &self.elements[x][a]
    }

    pub fn input(&self, x: usize) -> &[SymMatrix] {
        &self.elements[x]
    }

    pub fn elements(&self) -> &[Vec<SymMatrix>] {
        &self.elements
    }

    pub fn set_input(&mut self, x: usize, effects: Vec<SymMatrix>) {
        debug_assert_eq!(effects.len(), self.n_outputs());
        self.elements[x] = effects;
    }

    /// Applies `E ↦ Tᵀ E T` to every element.
    pub fn rotated(&self, t: &crate::linalg::Matrix) -> Self {
        Self {
            dim: self.dim,
            elements: self
                .elements
                .iter()
                .map(|row| row.iter().map(|e| e.congruence(t)).collect())
                .collect(),
        }
    }
}

/// Checks positivity and completeness of every input's POVM.
pub fn validate_povm(p: &PovmFamily, tol: f64) -> Result<PovmReport> {
    let id = SymMatrix::identity(p.dim());
    let mut min_eigenvalues = Vec::with_capacity(p.n_inputs());
    let mut completeness_residuals = Vec::with_capacity(p.n_inputs());
    for row in p.elements() {
        let mut sum = SymMatrix::zeros(p.dim());
        let mut mins = Vec::with_capacity(row.len());
        for e in row {
            mins.push(herm_eig(e)?.min_value());
            sum.add_scaled(1.0, e);
        }
        completeness_residuals.push((&sum - &id).frobenius_norm());
        min_eigenvalues.push(mins);
    }
    let worst_eigenvalue = min_eigenvalues
        .iter()
        .flatten()
        .fold(f64::INFINITY, |m, &v| m.min(v));
    let worst_residual = completeness_residuals.iter().fold(0.0f64, |m, &v| m.max(v));
    Ok(PovmReport {
        passed: worst_eigenvalue >= -tol && worst_residual <= tol,
        min_eigenvalues,
        completeness_residuals,
        worst_eigenvalue,
        worst_residual,
    })
}
