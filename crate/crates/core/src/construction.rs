//! Random-sign Bell functionals with matching POVMs and states.
//!
//! Given signs `ε_{x,a}^k` (`x, a, k < n`):
//!
//! * `M̃_{x,y}^{a,b} = n⁻² Σ_k ε_{x,a}^k ε_{y,b}^k` for `a, b < n`, zero on the
//!   extra outcome `n`;
//! * `E_x^a = (nK)⁻¹ u uᵀ` with `u = (1, ε_{x,a}^1, …, ε_{x,a}^n)` on
//!   `ℝ^{n+1}`, and `E_x^n = I − Σ_{a<n} E_x^a`;
//! * `K = 2K₂²` where `K₂` is the largest spectral norm of the per-input sign
//!   matrices `(ε_{x,a}^k / √n)_{a,k}`, which makes the completion element
//!   positive.
//!
//! The quantum value of `M̃` on `Σ αᵢ|ii⟩` splits into three nonnegative
//! sums `I + II + III` computed by [`explicit_quantum_value`].

use alloc::vec;
use alloc::vec::Vec;

use crate::bell::{BellFunctional, Scenario};
use crate::classical::{self, ClassicalResult};
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, spectral_norm, Matrix, SymMatrix};
use crate::povm::{validate_povm, PovmFamily};
use crate::rng;
use crate::state::{build_state, SchmidtState, StateProfile};

/// Tolerance below which the completion element counts as non-positive.
pub const COMPLETION_TOL: f64 = 1e-10;

/// Default top Schmidt coefficient: maximizes `α√(1−α²)`, the
/// state-dependent factor of the guaranteed lower bound.
pub const DEFAULT_ALPHA_TOP: f64 = core::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SignDistribution {
    Bernoulli,
    Gaussian,
}

/// The sign family `ε_{x,a}^k`, stored at `(x·n + a)·n + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignTensor {
    n: usize,
    eps: Vec<f64>,
    seed: u64,
    distribution: SignDistribution,
}

impl SignTensor {
    pub fn from_values(n: usize, eps: Vec<f64>, seed: u64, distribution: SignDistribution) -> Result<Self> {
        if n == 0 || eps.len() != n * n * n {
            return Err(Error::InvalidInput(alloc::format!(
                "sign tensor for n = {n} needs {} entries, got {}",
                n * n * n,
                eps.len()
            )));
        }
        if distribution == SignDistribution::Bernoulli && eps.iter().any(|&e| e != 1.0 && e != -1.0) {
            return Err(Error::InvalidInput("Bernoulli entries must be exactly ±1".into()));
        }
        if eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidInput("non-finite sign entry".into()));
        }
        Ok(Self {
            n,
            eps,
            seed,
            distribution,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distribution(&self) -> SignDistribution {
        self.distribution
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize, k: usize) -> f64 {
        self.eps[(x * self.n + a) * self.n + k]
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }

    /// The row `(ε_{x,a}^k)_k`.
    pub fn row(&self, x: usize, a: usize) -> &[f64] {
        let start = (x * self.n + a) * self.n;
        &self.eps[start..start + self.n]
    }

    /// Bernoulli entries packed LSB-first, bit set for `+1`. `None` for the
    /// Gaussian variant.
    pub fn to_packed_bits(&self) -> Option<Vec<u8>> {
        if self.distribution != SignDistribution::Bernoulli {
            return None;
        }
        let mut out = vec![0u8; self.eps.len().div_ceil(8)];
        for (i, &e) in self.eps.iter().enumerate() {
            if e > 0.0 {
                out[i / 8] |= 1 << (i % 8);
            }
        }
        Some(out)
    }

    pub fn from_packed_bits(n: usize, seed: u64, bits: &[u8]) -> Result<Self> {
        let len = n * n * n;
        if bits.len() != len.div_ceil(8) {
            return Err(Error::InvalidInput(alloc::format!(
                "expected {} bytes of sign bits, got {}",
                len.div_ceil(8),
                bits.len()
            )));
        }
        let eps = (0..len)
            .map(|i| if bits[i / 8] >> (i % 8) & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        Self::from_values(n, eps, seed, SignDistribution::Bernoulli)
    }

    /// The same tensor with `ε_{·,·}^k` negated for one `k`.
    pub fn flip_slice(&self, k: usize) -> Self {
        let mut out = self.clone();
        for x in 0..self.n {
            for a in 0..self.n {
                out.eps[(x * self.n + a) * self.n + k] *= -1.0;
            }
        }
        out
    }
}

/// Draws `n³` i.i.d. entries from ChaCha8 keyed by `derive_seed(seed, [n])`.
/// Bernoulli signs use the top bit of each 64-bit output.
pub fn gen_signs(n: usize, seed: u64, distribution: SignDistribution) -> Result<SignTensor> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    use rand::RngCore;
    let mut g = rng::rng_from(rng::derive_seed(seed, &[n as u64]));
    let eps = (0..n * n * n)
        .map(|_| match distribution {
            SignDistribution::Bernoulli => {
                if g.next_u64() >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            SignDistribution::Gaussian => rng::gaussian(&mut g),
        })
        .collect();
    SignTensor::from_values(n, eps, seed, distribution)
}

/// `M̃` on the scenario `(N, K) = (n, n + 1)`.
pub fn build_bell(signs: &SignTensor) -> BellFunctional {
    let n = signs.n();
    let scenario = Scenario {
        n_inputs: n,
        n_outputs: n + 1,
    };
    let inv = 1.0 / (n * n) as f64;
    BellFunctional::from_fn(scenario, |x, y, a, b| {
        if a == n || b == n {
            return 0.0;
        }
        let s: f64 = signs.row(x, a).iter().zip(signs.row(y, b)).map(|(p, q)| p * q).sum();
        s * inv
    })
}

/// `K₂ = max_x ‖(ε_{x,a}^k / √n)_{a,k}‖`.
pub fn row_spectral_bound(signs: &SignTensor) -> f64 {
    let n = signs.n();
    let scale = 1.0 / libm::sqrt(n as f64);
    (0..n)
        .map(|x| spectral_norm(&Matrix::from_fn(n, n, |a, k| signs.get(x, a, k) * scale)))
        .fold(0.0, f64::max)
}

/// The POVMs on `ℝ^{n+1}` for constant `K`.
pub fn build_povms(signs: &SignTensor, constant: f64) -> Result<PovmFamily> {
    let n = signs.n();
    let scale = 1.0 / (n as f64 * constant);
    let id = SymMatrix::identity(n + 1);
    let mut elements = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = Vec::with_capacity(n + 1);
        let mut rest = id.clone();
        for a in 0..n {
            let mut u = Vec::with_capacity(n + 1);
            u.push(1.0);
            u.extend_from_slice(signs.row(x, a));
            let e = SymMatrix::outer(&u, scale);
            rest.add_scaled(-1.0, &e);
            row.push(e);
        }
        let witness = herm_eig(&rest)?.min_value();
        if witness < -COMPLETION_TOL {
            return Err(Error::InvalidConstant { constant, witness });
        }
        row.push(rest);
        elements.push(row);
    }
    PovmFamily::new(elements)
}

/// Closed-form quantum value and its three parts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuantumTerms {
    pub total: f64,
    pub term_i: f64,
    pub term_ii: f64,
    pub term_iii: f64,
    /// `(2/K²)·α₁·Σ_{i≥2} αᵢ`, guaranteed `≤ term_ii`.
    pub lower_bound: f64,
}

/// Recovers `(ε, K)` from a family built by [`build_povms`].
fn recover_signs(povm: &PovmFamily) -> Result<(usize, Vec<f64>, f64)> {
    let n = povm.n_inputs();
    if povm.n_outputs() != n + 1 || povm.dim() != n + 1 {
        return Err(Error::ProvenanceMismatch);
    }
    let top = povm.element(0, 0).get(0, 0);
    if top <= 0.0 {
        return Err(Error::ProvenanceMismatch);
    }
    let constant = 1.0 / (n as f64 * top);
    let mut eps = vec![0.0; n * n * n];
    for x in 0..n {
        for a in 0..n {
            let e = povm.element(x, a);
            if libm::fabs(e.get(0, 0) - top) > 1e-12 * top {
                return Err(Error::ProvenanceMismatch);
            }
            for k in 0..n {
                eps[(x * n + a) * n + k] = e.get(0, k + 1) / top;
            }
        }
    }
    Ok((n, eps, constant))
}

/// `⟨φ_α| Σ M̃ E_x^a ⊗ E_y^b |φ_α⟩ = I + II + III` with
/// `S₀(k) = Σ ε^k`, `S(k,p) = Σ ε^k ε^p`, `T(k,p,q) = Σ ε^k ε^p ε^q`
/// (sums over `(x, a)`):
///
/// * `I = α₁²/(K²n⁴) Σ_k S₀(k)²`
/// * `II = 2α₁/(K²n⁴) Σ_{i≥2} αᵢ Σ_k S(k, i−1)²`
/// * `III = 1/(K²n⁴) Σ_k Σ_{i,j≥2} αᵢαⱼ T(k, i−1, j−1)²`
///
/// The signs and `K` are read back from the POVMs; `M` must be the
/// functional built from the same signs.
pub fn explicit_quantum_value(m: &BellFunctional, povm: &PovmFamily, state: &SchmidtState) -> Result<QuantumTerms> {
    let (n, eps, constant) = recover_signs(povm)?;
    if state.dim() != n + 1 {
        return Err(Error::DimensionMismatch(alloc::format!(
            "state dim {} vs POVM dim {}",
            state.dim(),
            n + 1
        )));
    }
    if m.scenario() != (Scenario { n_inputs: n, n_outputs: n + 1 }) {
        return Err(Error::ProvenanceMismatch);
    }
    let tensor = SignTensor {
        n,
        eps,
        seed: 0,
        distribution: SignDistribution::Gaussian,
    };
    let rebuilt = build_bell(&tensor);
    let scale = m.max_abs().max(1e-300);
    if m.coeffs().iter().zip(rebuilt.coeffs()).any(|(p, q)| libm::fabs(p - q) > 1e-9 * scale) {
        return Err(Error::ProvenanceMismatch);
    }
    Ok(closed_form(&tensor, constant, state.alphas()))
}

fn closed_form(signs: &SignTensor, constant: f64, alphas: &[f64]) -> QuantumTerms {
    let n = signs.n();
    let rows: Vec<&[f64]> = (0..n).flat_map(|x| (0..n).map(move |a| (x, a))).map(|(x, a)| signs.row(x, a)).collect();
    let s0: Vec<f64> = (0..n).map(|k| rows.iter().map(|r| r[k]).sum()).collect();
    let mut s = vec![0.0; n * n];
    for k in 0..n {
        for p in k..n {
            let v: f64 = rows.iter().map(|r| r[k] * r[p]).sum();
            s[k * n + p] = v;
            s[p * n + k] = v;
        }
    }
    let a1 = alphas[0];
    let tail = &alphas[1..];
    let norm = 1.0 / (constant * constant * libm::pow(n as f64, 4.0));

    let term_i = a1 * a1 * norm * s0.iter().map(|v| v * v).sum::<f64>();

    let mut ii = 0.0;
    for (p, &ap) in tail.iter().enumerate() {
        let col: f64 = (0..n).map(|k| s[k * n + p] * s[k * n + p]).sum();
        ii += ap * col;
    }
    let term_ii = 2.0 * a1 * norm * ii;

    let mut iii = 0.0;
    let mut prod = vec![0.0; rows.len()];
    for k in 0..n {
        for p in 0..n {
            for (dst, r) in prod.iter_mut().zip(&rows) {
                *dst = r[k] * r[p];
            }
            for q in 0..n {
                let t: f64 = prod.iter().zip(&rows).map(|(kp, r)| kp * r[q]).sum();
                iii += tail[p] * tail[q] * t * t;
            }
        }
    }
    let term_iii = norm * iii;

    let lower_bound = 2.0 / (constant * constant) * a1 * tail.iter().sum::<f64>();
    QuantumTerms {
        total: term_i + term_ii + term_iii,
        term_i,
        term_ii,
        term_iii,
        lower_bound,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructOptions {
    pub distribution: SignDistribution,
    /// Replaces the default `(alpha_top, n)` profile when set.
    pub state: Option<StateProfile>,
    pub classical_budget: u128,
    pub local_restarts: usize,
    /// Maximum number of draws (the first one included).
    pub retry_cap: usize,
    pub povm_tol: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            distribution: SignDistribution::Bernoulli,
            state: None,
            classical_budget: classical::DEFAULT_BUDGET,
            local_restarts: classical::FALLBACK_RESTARTS,
            retry_cap: 4,
            povm_tol: 1e-9,
        }
    }
}

/// One full instantiation of the construction.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConstructionReport {
    pub n: usize,
    /// Seed requested by the caller.
    pub seed: u64,
    /// Seed of the accepted draw (`seed + attempts − 1`).
    pub seed_used: u64,
    pub attempts: usize,
    pub distribution: SignDistribution,
    pub k2: f64,
    /// `2·K₂²`.
    pub k: f64,
    pub state: Vec<f64>,
    pub classical: ClassicalResult,
    pub quantum_lb: f64,
    pub term_i: f64,
    pub term_ii: f64,
    pub term_iii: f64,
    pub step3_bound: f64,
    pub ratio: f64,
    pub povm_min_eigenvalue: f64,
    pub povm_completeness_residual: f64,
    pub accepted: bool,
}

/// Signs → `K₂` → POVMs (re-drawing with `seed + 1, …` while validation
/// fails) → `M̃` → state → closed-form value → classical value → ratio.
pub fn construct_report(n: usize, seed: u64, alpha_top: f64, options: &ConstructOptions) -> Result<ConstructionReport> {
    construct_report_with(n, seed, alpha_top, options, |m, seed_used| {
        match classical::classical_value_exact(m, options.classical_budget) {
            Err(Error::BudgetExceeded { .. }) => Ok(classical::classical_value_local(
                m,
                options.local_restarts,
                rng::derive_seed(seed_used, &[n as u64, 1]),
            )),
            other => other,
        }
    })
}

/// [`construct_report`] with a caller-supplied classical solver, called with
/// the functional and the accepted draw's seed.
pub fn construct_report_with<F>(
    n: usize,
    seed: u64,
    alpha_top: f64,
    options: &ConstructOptions,
    mut classical_solver: F,
) -> Result<ConstructionReport>
where
    F: FnMut(&BellFunctional, u64) -> Result<ClassicalResult>,
{
    let profile = options
        .state
        .clone()
        .unwrap_or(StateProfile::AlphaTop { alpha: alpha_top, n });
    let state = build_state(&profile)?;
    if state.dim() != n + 1 {
        return Err(Error::DimensionMismatch(alloc::format!(
            "state dim {} but construction needs {}",
            state.dim(),
            n + 1
        )));
    }
    for attempt in 0..options.retry_cap.max(1) {
        let seed_used = seed.wrapping_add(attempt as u64);
        let signs = gen_signs(n, seed_used, options.distribution)?;
        let k2 = row_spectral_bound(&signs);
        let k = 2.0 * k2 * k2;
        let povm = match build_povms(&signs, k) {
            Ok(p) => p,
            Err(Error::InvalidConstant { .. }) => continue,
            Err(e) => return Err(e),
        };
        let check = validate_povm(&povm, options.povm_tol)?;
        if !check.passed {
            continue;
        }
        let m = build_bell(&signs);
        let terms = closed_form(&signs, k, state.alphas());
        let classical = classical_solver(&m, seed_used)?;
        let ratio = crate::bell::zeta1(terms.total, classical.value)?;
        return Ok(ConstructionReport {
            n,
            seed,
            seed_used,
            attempts: attempt + 1,
            distribution: options.distribution,
            k2,
            k,
            state: state.alphas().to_vec(),
            classical,
            quantum_lb: terms.total,
            term_i: terms.term_i,
            term_ii: terms.term_ii,
            term_iii: terms.term_iii,
            step3_bound: terms.lower_bound,
            ratio,
            povm_min_eigenvalue: check.worst_eigenvalue,
            povm_completeness_residual: check.worst_residual,
            accepted: true,
        });
    }
    Err(Error::RetryCapExhausted {
        attempts: options.retry_cap.max(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::{pair, quantum_prob_pure};
    use crate::classical::{classical_value_exact, DEFAULT_BUDGET};

    fn explicit(n: usize, eps: &[f64]) -> SignTensor {
        SignTensor::from_values(n, eps.to_vec(), 0, SignDistribution::Bernoulli).unwrap()
    }

    #[test]
    fn gen_signs_is_deterministic() {
        let a = gen_signs(1, 0, SignDistribution::Bernoulli).unwrap();
        assert!(a.values()[0] == 1.0 || a.values()[0] == -1.0);
        assert_eq!(a, gen_signs(1, 0, SignDistribution::Bernoulli).unwrap());
        let b = gen_signs(8, 99, SignDistribution::Gaussian).unwrap();
        let c = gen_signs(8, 99, SignDistribution::Gaussian).unwrap();
        assert_eq!(
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            c.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn sign_mean_within_clt_band() {
        // 3 standard deviations of the mean of 512 fair signs
        let band = 3.0 / libm::sqrt(512.0);
        let inside = (0..50)
            .filter(|&seed| {
                let s = gen_signs(8, seed, SignDistribution::Bernoulli).unwrap();
                let mean: f64 = s.values().iter().sum::<f64>() / 512.0;
                libm::fabs(mean) <= band
            })
            .count();
        assert!(inside >= 45, "{inside}");
    }

    #[test]
    fn packed_bits_roundtrip() {
        let s = gen_signs(5, 3, SignDistribution::Bernoulli).unwrap();
        let bits = s.to_packed_bits().unwrap();
        assert_eq!(bits.len(), 16);
        assert_eq!(SignTensor::from_packed_bits(5, 3, &bits).unwrap(), s);
        assert!(gen_signs(2, 1, SignDistribution::Gaussian).unwrap().to_packed_bits().is_none());
    }

    #[test]
    fn bell_n1() {
        let m = build_bell(&explicit(1, &[1.0]));
        assert_eq!(m.scenario(), Scenario { n_inputs: 1, n_outputs: 2 });
        assert_eq!(m.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn bell_n2_by_hand() {
        // x=0: a=0 (+,+), a=1 (+,−); x=1: a=0 (−,+), a=1 (−,−)
        let s = explicit(2, &[1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0]);
        let m = build_bell(&s);
        assert_eq!(m.get(0, 0, 0, 0), 0.5);
        assert_eq!(m.get(0, 0, 0, 1), 0.0);
        assert_eq!(m.get(0, 1, 0, 0), 0.0);
        assert_eq!(m.get(0, 1, 0, 1), -0.5);
        assert_eq!(m.get(0, 1, 1, 0), -0.5);
        assert_eq!(m.get(1, 1, 1, 1), 0.5);
        assert_eq!(m.get(1, 0, 0, 1), -0.5);
        for x in 0..2 {
            for y in 0..2 {
                for c in 0..3 {
                    assert_eq!(m.get(x, y, 2, c), 0.0);
                    assert_eq!(m.get(x, y, c, 2), 0.0);
                }
            }
        }
    }

    #[test]
    fn bell_entries_bounded() {
        for n in [2, 5, 9] {
            let m = build_bell(&gen_signs(n, 4, SignDistribution::Bernoulli).unwrap());
            assert!(m.max_abs() <= 1.0 / n as f64 + 1e-15);
        }
    }

    #[test]
    fn k2_cases() {
        assert_eq!(row_spectral_bound(&explicit(1, &[-1.0])), 1.0);
        let s = gen_signs(6, 12, SignDistribution::Bernoulli).unwrap();
        let k2 = row_spectral_bound(&s);
        // transposing every per-input block leaves singular values alone
        let n = 6;
        let mut t = vec![0.0; n * n * n];
        for x in 0..n {
            for a in 0..n {
                for k in 0..n {
                    t[(x * n + k) * n + a] = s.get(x, a, k);
                }
            }
        }
        let k2t = row_spectral_bound(&explicit(n, &t));
        assert!(libm::fabs(k2 - k2t) < 1e-12);
    }

    #[test]
    fn k2_square_sign_matrix_edge() {
        let mut vals: Vec<f64> = (0..15)
            .map(|seed| row_spectral_bound(&gen_signs(32, seed, SignDistribution::Bernoulli).unwrap()))
            .collect();
        vals.sort_by(f64::total_cmp);
        let median = vals[7];
        // max over 32 inputs of the top singular value of a 32x32 sign/√n
        // matrix: sits just above the asymptotic edge 2
        assert!((1.9..2.4).contains(&median), "{median}");
    }

    #[test]
    fn povm_n1_by_hand() {
        let p = build_povms(&explicit(1, &[1.0]), 2.0).unwrap();
        let e1 = p.element(0, 0);
        let e2 = p.element(0, 1);
        for i in 0..2 {
            for j in 0..2 {
                assert!(libm::fabs(e1.get(i, j) - 0.5) < 1e-15);
                let want = if i == j { 0.5 } else { -0.5 };
                assert!(libm::fabs(e2.get(i, j) - want) < 1e-15);
            }
        }
    }

    #[test]
    fn povm_rank_one_structure() {
        let s = gen_signs(5, 8, SignDistribution::Bernoulli).unwrap();
        let k2 = row_spectral_bound(&s);
        let k = 2.0 * k2 * k2;
        let p = build_povms(&s, k).unwrap();
        let n = 5.0;
        for x in 0..5 {
            for a in 0..5 {
                let e = p.element(x, a);
                assert!(libm::fabs(e.trace() - (n + 1.0) / (n * k)) < 1e-14);
                let eig = herm_eig(e).unwrap();
                assert!(eig.values[..5].iter().all(|v| libm::fabs(*v) < 1e-12));
                let sq = SymMatrix::from_dmatrix(&(e.to_dmatrix() * e.to_dmatrix()));
                let want = e.scaled((n + 1.0) / (n * k));
                assert!((&sq - &want).max_abs() < 1e-10);
            }
            let sum = p.input(x).iter().fold(SymMatrix::zeros(6), |acc, e| &acc + e);
            assert!((&sum - &SymMatrix::identity(6)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn povm_valid_at_threshold() {
        for seed in 0..5 {
            let s = gen_signs(16, seed, SignDistribution::Bernoulli).unwrap();
            let k2 = row_spectral_bound(&s);
            let p = build_povms(&s, 2.0 * k2 * k2).unwrap();
            let r = validate_povm(&p, 1e-9).unwrap();
            assert!(r.worst_eigenvalue >= -1e-10);
        }
    }

    #[test]
    fn povm_rejects_small_constant() {
        let s = gen_signs(6, 1, SignDistribution::Bernoulli).unwrap();
        match build_povms(&s, 0.1) {
            Err(Error::InvalidConstant { constant, witness }) => {
                assert_eq!(constant, 0.1);
                assert!(witness < -COMPLETION_TOL);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn quantum_value_n1_by_hand() {
        let s = explicit(1, &[1.0]);
        let m = build_bell(&s);
        let p = build_povms(&s, 2.0).unwrap();
        let st = SchmidtState::maximally_entangled(2).unwrap();
        let t = explicit_quantum_value(&m, &p, &st).unwrap();
        assert!(libm::fabs(t.total - 0.5) < 1e-15);
        assert!(libm::fabs(t.lower_bound - 0.25) < 1e-15);
        assert!(libm::fabs(t.term_i - 0.125) < 1e-15);
        assert!(libm::fabs(t.term_ii - 0.25) < 1e-15);
        assert!(libm::fabs(t.term_iii - 0.125) < 1e-15);
        let direct = pair(&m, &quantum_prob_pure(&p, &p, &st).unwrap()).unwrap();
        assert!(libm::fabs(direct - 0.5) < 1e-15);
    }

    #[test]
    fn product_state_only_first_term() {
        let s = gen_signs(4, 2, SignDistribution::Bernoulli).unwrap();
        let k2 = row_spectral_bound(&s);
        let p = build_povms(&s, 2.0 * k2 * k2).unwrap();
        let t = explicit_quantum_value(&build_bell(&s), &p, &SchmidtState::product(5).unwrap()).unwrap();
        assert!(t.term_i >= 0.0);
        assert_eq!(t.term_ii, 0.0);
        assert_eq!(t.term_iii, 0.0);
        assert_eq!(t.total, t.term_i);
    }

    #[test]
    fn provenance_mismatch_rejected() {
        let s1 = gen_signs(3, 1, SignDistribution::Bernoulli).unwrap();
        let s2 = gen_signs(3, 2, SignDistribution::Bernoulli).unwrap();
        assert_ne!(s1, s2);
        let k2 = row_spectral_bound(&s1);
        let p = build_povms(&s1, 2.0 * k2 * k2).unwrap();
        let st = SchmidtState::maximally_entangled(4).unwrap();
        assert_eq!(explicit_quantum_value(&build_bell(&s2), &p, &st), Err(Error::ProvenanceMismatch));
    }

    #[test]
    fn sign_flip_equivariance() {
        let s = gen_signs(4, 6, SignDistribution::Bernoulli).unwrap();
        let st = build_state(&StateProfile::AlphaTop { alpha: 0.6, n: 4 }).unwrap();
        let k2 = row_spectral_bound(&s);
        let k = 2.0 * k2 * k2;
        let base = closed_form(&s, k, st.alphas());
        let flipped = s.flip_slice(2);
        assert_eq!(build_bell(&s), build_bell(&flipped));
        let f = closed_form(&flipped, k, st.alphas());
        assert!(libm::fabs(base.term_i - f.term_i) < 1e-15);
        assert!(libm::fabs(base.term_ii - f.term_ii) < 1e-15);
        assert!(libm::fabs(base.term_iii - f.term_iii) < 1e-15);
    }

    #[test]
    fn report_n1_has_no_violation() {
        let r = construct_report(1, 0, DEFAULT_ALPHA_TOP, &ConstructOptions::default()).unwrap();
        assert!(r.accepted);
        assert!(r.ratio <= 1.0);
        assert_eq!(r.classical.value, 1.0);
    }

    #[test]
    fn report_n5_respects_step3_bound() {
        let r = construct_report(5, 11, DEFAULT_ALPHA_TOP, &ConstructOptions::default()).unwrap();
        assert!(r.quantum_lb >= r.step3_bound);
        assert!(r.term_ii >= r.step3_bound - 1e-12);
        assert!(libm::fabs(r.k - 2.0 * r.k2 * r.k2) < 1e-15);
        assert!(libm::fabs(r.quantum_lb - (r.term_i + r.term_ii + r.term_iii)) < 1e-9);
        assert!(r.classical.exact);
        let exact = classical_value_exact(&build_bell(&gen_signs(5, r.seed_used, SignDistribution::Bernoulli).unwrap()), DEFAULT_BUDGET).unwrap();
        assert_eq!(exact.value, r.classical.value);
    }

    #[test]
    fn report_is_reproducible() {
        let a = construct_report(4, 7, DEFAULT_ALPHA_TOP, &ConstructOptions::default()).unwrap();
        let b = construct_report(4, 7, DEFAULT_ALPHA_TOP, &ConstructOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn report_falls_back_to_local_search() {
        let opts = ConstructOptions {
            classical_budget: 10,
            local_restarts: 8,
            ..ConstructOptions::default()
        };
        let r = construct_report(4, 3, DEFAULT_ALPHA_TOP, &opts).unwrap();
        assert!(!r.classical.exact);
    }
}
