//! Entanglement measures and block decompositions of Schmidt vectors.
//!
//! Logarithms are base 2. Schmidt indices are zero-based, so the dyadic
//! interval `I_k = [2^{k−1}, 2^k − 1]` of one-based indices covers the
//! zero-based range `[2^{k−1} − 1, 2^k − 2]`.

use alloc::vec;
use alloc::vec::Vec;

use crate::bell::BellFunctional;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, SymMatrix};
use crate::povm::PovmFamily;
use crate::quantum::bell_operator;
use crate::state::SchmidtState;

/// Positivity slack for the Bell operator.
pub const PSD_TOL: f64 = 1e-8;

fn xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * libm::log2(p)
    }
}

/// `−Σ αᵢ² log₂ αᵢ²`.
pub fn entropy_of_entanglement(state: &SchmidtState) -> f64 {
    let h: f64 = -state.alphas().iter().map(|a| xlog2x(a * a)).sum::<f64>();
    h.max(0.0)
}

/// `α² log₂(1/α²) + (1 − α²) log₂(n/(1 − α²))`.
pub fn f_alpha(n: usize, alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let rest = 1.0 - a2;
    let top = -xlog2x(a2);
    let tail = if rest <= 0.0 { 0.0 } else { rest * libm::log2(n as f64 / rest) };
    top + tail
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum DeltaKind {
    MaxEntangled,
    NonEntangled,
    Neither,
}

/// Both flags of the `δ` classification. For tiny dimensions both may hold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DeltaClass {
    /// `log₂ d − E < δ`.
    pub delta_max_entangled: bool,
    /// `E < δ`.
    pub delta_non_entangled: bool,
    pub entropy: f64,
}

impl DeltaClass {
    /// `MaxEntangled` wins when both flags hold.
    pub fn kind(&self) -> DeltaKind {
        if self.delta_max_entangled {
            DeltaKind::MaxEntangled
        } else if self.delta_non_entangled {
            DeltaKind::NonEntangled
        } else {
            DeltaKind::Neither
        }
    }
}

pub fn delta_classify(state: &SchmidtState, delta: f64) -> Result<DeltaClass> {
    if !(delta > 0.0) {
        return Err(Error::InvalidInput(alloc::format!("delta must be positive, got {delta}")));
    }
    let e = entropy_of_entanglement(state);
    Ok(DeltaClass {
        delta_max_entangled: libm::log2(state.dim() as f64) - e < delta,
        delta_non_entangled: e < delta,
        entropy: e,
    })
}

/// `α₁ · Σ αᵢ`.
pub fn iviol(state: &SchmidtState) -> f64 {
    state.alphas()[0] * state.alphas().iter().sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicTerm {
    pub beta: f64,
    /// Zero-based, increasing.
    pub indices: Vec<usize>,
}

/// `a = Σ_s β_s φ_s` with `φ_s = |A_s|^{-1/2} 1_{A_s}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DyadicDecomposition {
    pub terms: Vec<DyadicTerm>,
    pub source_dim: usize,
}

impl DyadicDecomposition {
    pub fn beta_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.beta).sum()
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.source_dim];
        for t in &self.terms {
            let w = t.beta / libm::sqrt(t.indices.len() as f64);
            for &i in &t.indices {
                out[i] += w;
            }
        }
        out
    }
}

/// The `k ≥ 1` with zero-based index `i` in `I_k`.
pub fn dyadic_block(i: usize) -> u32 {
    usize::BITS - (i + 1).leading_zeros()
}

/// Zero-based range of `I_k` truncated to `n`.
pub fn dyadic_range(k: u32, n: usize) -> core::ops::Range<usize> {
    let lo = (1usize << (k - 1)) - 1;
    let hi = ((1usize << k) - 1).min(n);
    lo..hi
}

/// Per dyadic block, writes the sorted values `v₁ ≥ … ≥ v_m` as the
/// staircase `Σ_j (v_j − v_{j+1}) 1_{first j}`, so `β_j = (v_j − v_{j+1})√j`.
pub fn dyadic_decompose(coeffs: &[f64]) -> Result<DyadicDecomposition> {
    if coeffs.is_empty() {
        return Err(Error::InvalidInput("empty coefficient vector".into()));
    }
    if coeffs.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return Err(Error::InvalidInput("coefficients must be finite and nonnegative".into()));
    }
    if coeffs.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidInput("coefficients must be nonincreasing".into()));
    }
    let norm2: f64 = coeffs.iter().map(|a| a * a).sum();
    if norm2 > 1.0 + 1e-12 {
        return Err(Error::InvalidInput(alloc::format!("squared norm {norm2} exceeds 1")));
    }
    let n = coeffs.len();
    let mut terms = Vec::new();
    let mut k = 1;
    loop {
        let range = dyadic_range(k, n);
        if range.start >= n {
            break;
        }
        let block = &coeffs[range.clone()];
        for (j, &v) in block.iter().enumerate() {
            let next = block.get(j + 1).copied().unwrap_or(0.0);
            let step = v - next;
            if step > 0.0 {
                terms.push(DyadicTerm {
                    beta: step * libm::sqrt((j + 1) as f64),
                    indices: (range.start..range.start + j + 1).collect(),
                });
            }
        }
        k += 1;
    }
    Ok(DyadicDecomposition { terms, source_dim: n })
}

/// Output of [`extract_max_entangled`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Extraction {
    /// `|A_s|`, the dimension on which the witness is maximally entangled.
    pub k: usize,
    pub support: Vec<usize>,
    /// Coefficients `cᵢ` of `Σ cᵢ |ii⟩`, uniform on `support`.
    pub witness: Vec<f64>,
    /// `⟨φ|B|φ⟩` for the witness.
    pub value: f64,
    /// `⟨ψ|B|ψ⟩` for the input state.
    pub c: f64,
    /// `C / (4 log₂ d)`.
    pub guarantee: f64,
    /// Cross term `⟨φ_q|B|φ_p⟩` of the selected pair.
    pub cross_term: f64,
}

/// `R[i][j] = ⟨ii|B|jj⟩`.
fn diagonal_block(b: &SymMatrix, d: usize) -> SymMatrix {
    SymMatrix::from_fn(d, |i, j| b.get(i * d + i, j * d + j))
}

/// `⟨φ_p|B|φ_q⟩` for all pairs of decomposition terms.
fn pair_terms(r: &SymMatrix, dec: &DyadicDecomposition) -> Vec<Vec<f64>> {
    let t = &dec.terms;
    let mut out = vec![vec![0.0; t.len()]; t.len()];
    for p in 0..t.len() {
        for q in p..t.len() {
            let mut s = 0.0;
            for &i in &t[p].indices {
                for &j in &t[q].indices {
                    s += r.get(i, j);
                }
            }
            let v = s / libm::sqrt((t[p].indices.len() * t[q].indices.len()) as f64);
            out[p][q] = v;
            out[q][p] = v;
        }
    }
    out
}

fn uniform_on(support: &[usize], d: usize) -> Vec<f64> {
    let mut w = vec![0.0; d];
    let v = 1.0 / libm::sqrt(support.len() as f64);
    for &i in support {
        w[i] = v;
    }
    w
}

fn diag_quad(r: &SymMatrix, c: &[f64]) -> f64 {
    r.quad_form(c)
}

/// Finds a block state, uniform on one `A_s` of the dyadic decomposition of
/// `state`, with `⟨φ|B|φ⟩ ≥ C / (4 log₂ d)` for the positive semidefinite
/// Bell operator `B`.
pub fn extract_max_entangled(
    m: &BellFunctional,
    povm_a: &PovmFamily,
    povm_b: &PovmFamily,
    state: &SchmidtState,
) -> Result<Extraction> {
    let d = state.dim();
    if povm_a.dim() != d || povm_b.dim() != d {
        return Err(Error::DimensionMismatch(alloc::format!(
            "POVM dims {}/{} vs state dim {d}",
            povm_a.dim(),
            povm_b.dim()
        )));
    }
    let b = bell_operator(m, povm_a, povm_b)?;
    let min_eigenvalue = herm_eig(&b)?.min_value();
    if min_eigenvalue < -PSD_TOL {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    let r = diagonal_block(&b, d);
    let c = diag_quad(&r, state.alphas());
    if !(c > 0.0) {
        return Err(Error::InvalidInput(alloc::format!("state value {c} must be positive")));
    }
    let guarantee = if d > 1 { c / (4.0 * libm::log2(d as f64)) } else { c };
    let support: Vec<usize> = (0..d).filter(|&i| state.alphas()[i] > 0.0).collect();
    let nz: Vec<f64> = support.iter().map(|&i| state.alphas()[i]).collect();
    let (lo, hi) = nz.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    if hi - lo <= 1e-15 {
        return Ok(Extraction {
            k: support.len(),
            witness: state.alphas().to_vec(),
            support,
            value: c,
            c,
            guarantee,
            cross_term: c,
        });
    }
    let dec = dyadic_decompose(state.alphas())?;
    let pairs = pair_terms(&r, &dec);
    let (mut bp, mut bq, mut best) = (0, 0, f64::NEG_INFINITY);
    for (p, row) in pairs.iter().enumerate() {
        for (q, &v) in row.iter().enumerate() {
            if v > best {
                (bp, bq, best) = (p, q, v);
            }
        }
    }
    // ⟨φ_q|B|φ_p⟩ ≤ √(⟨φ_p|B|φ_p⟩⟨φ_q|B|φ_q⟩) ≤ the larger diagonal term
    let pick = if pairs[bp][bp] >= pairs[bq][bq] { bp } else { bq };
    let support = dec.terms[pick].indices.clone();
    let witness = uniform_on(&support, d);
    Ok(Extraction {
        k: support.len(),
        value: diag_quad(&r, &witness),
        witness,
        support,
        c,
        guarantee,
        cross_term: best,
    })
}

/// Output of [`polarization_select`]: `ξ = φ_A + i^k φ_B` (not normalized).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Polarization {
    pub k: u8,
    pub support_a: Vec<usize>,
    pub support_b: Vec<usize>,
    /// Real and imaginary parts of the coefficients of `ξ` on `|ii⟩`.
    pub xi_re: Vec<f64>,
    pub xi_im: Vec<f64>,
    /// `⟨ξ|B|ξ⟩` (real because `B` is real symmetric).
    pub value: f64,
    /// `⟨ξ|B|ξ⟩` for `k = 0, 1, 2, 3`.
    pub values: [f64; 4],
    /// `|⟨ψ|B|ψ⟩|`.
    pub c: f64,
    /// `C / (16 log₂ d)`.
    pub guarantee: f64,
}

/// For the pair of dyadic blocks with the largest `|⟨φ_A|B|φ_B⟩|`, picks the
/// `k ∈ {0, 1, 2, 3}` maximizing `|⟨ξ|B|ξ⟩|` (lowest `k` on ties). No
/// positivity of `B` is required.
pub fn polarization_select(
    m: &BellFunctional,
    povm_a: &PovmFamily,
    povm_b: &PovmFamily,
    state: &SchmidtState,
) -> Result<Polarization> {
    let d = state.dim();
    if povm_a.dim() != d || povm_b.dim() != d {
        return Err(Error::DimensionMismatch(alloc::format!(
            "POVM dims {}/{} vs state dim {d}",
            povm_a.dim(),
            povm_b.dim()
        )));
    }
    let b = bell_operator(m, povm_a, povm_b)?;
    let r = diagonal_block(&b, d);
    let c = libm::fabs(diag_quad(&r, state.alphas()));
    if !(c > 0.0) {
        return Err(Error::InvalidInput("state value must be nonzero".into()));
    }
    let dec = dyadic_decompose(state.alphas())?;
    let pairs = pair_terms(&r, &dec);
    let (mut bp, mut bq, mut best) = (0, 0, f64::NEG_INFINITY);
    for (p, row) in pairs.iter().enumerate() {
        for (q, &v) in row.iter().enumerate() {
            if libm::fabs(v) > best {
                (bp, bq, best) = (p, q, libm::fabs(v));
            }
        }
    }
    let (a, bb, cross) = (pairs[bp][bp], pairs[bq][bq], pairs[bp][bq]);
    // Re(i^k) for k = 0..3
    let re = [1.0, 0.0, -1.0, 0.0];
    let values = re.map(|w| a + bb + 2.0 * w * cross);
    let mut k = 0;
    for j in 1..4 {
        if libm::fabs(values[j]) > libm::fabs(values[k]) {
            k = j;
        }
    }
    let phi_a = uniform_on(&dec.terms[bp].indices, d);
    let phi_b = uniform_on(&dec.terms[bq].indices, d);
    let (wr, wi) = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)][k];
    let xi_re: Vec<f64> = phi_a.iter().zip(&phi_b).map(|(x, y)| x + wr * y).collect();
    let xi_im: Vec<f64> = phi_b.iter().map(|y| wi * y).collect();
    let guarantee = if d > 1 { c / (16.0 * libm::log2(d as f64)) } else { c };
    Ok(Polarization {
        k: k as u8,
        support_a: dec.terms[bp].indices.clone(),
        support_b: dec.terms[bq].indices.clone(),
        value: diag_quad(&r, &xi_re) + diag_quad(&r, &xi_im),
        values,
        xi_re,
        xi_im,
        c,
        guarantee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::Scenario;
    use crate::rng;
    use crate::state::{build_state, StateProfile};

    fn random_povm(n: usize, k: usize, d: usize, g: &mut rng::Rng) -> PovmFamily {
        // Gaussian PSD elements normalized by S^{-1/2}
        let rows = (0..n)
            .map(|_| {
                let raw: Vec<SymMatrix> = (0..k)
                    .map(|_| {
                        let mut acc = SymMatrix::zeros(d);
                        for _ in 0..d {
                            let v: Vec<f64> = (0..d).map(|_| rng::gaussian(g)).collect();
                            acc.add_scaled(1.0, &SymMatrix::outer(&v, 1.0));
                        }
                        acc
                    })
                    .collect();
                let mut s = SymMatrix::zeros(d);
                for e in &raw {
                    s.add_scaled(1.0, e);
                }
                let w = crate::linalg::Matrix::from_sym(&crate::linalg::inv_sqrt_psd(&s, 1e-300).unwrap());
                raw.iter().map(|e| e.congruence(&w)).collect()
            })
            .collect();
        PovmFamily::new(rows).unwrap()
    }

    fn random_state(d: usize, g: &mut rng::Rng) -> SchmidtState {
        let c: Vec<f64> = (0..d).map(|_| libm::fabs(rng::gaussian(g))).collect();
        SchmidtState::from_coefficients(&c).unwrap()
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(entropy_of_entanglement(&SchmidtState::maximally_entangled(4).unwrap()), 2.0);
        assert_eq!(entropy_of_entanglement(&SchmidtState::product(5).unwrap()), 0.0);
        for n in [2usize, 3, 7, 64, 1000] {
            let e = entropy_of_entanglement(&SchmidtState::maximally_entangled(n).unwrap());
            assert!(libm::fabs(e - libm::log2(n as f64)) < 1e-12);
        }
    }

    #[test]
    fn f_alpha_closed_forms() {
        for n in 1..=64usize {
            let l = libm::log2(n as f64);
            assert!(libm::fabs(f_alpha(n, 1.0)) < 1e-12);
            assert!(libm::fabs(f_alpha(n, 0.0) - l) < 1e-12);
            let top = 1.0 / libm::sqrt((n + 1) as f64);
            assert!(libm::fabs(f_alpha(n, top) - libm::log2((n + 1) as f64)) < 1e-12);
        }
    }

    #[test]
    fn f_alpha_unique_maximum() {
        for n in [1usize, 3, 10, 64] {
            let top = 1.0 / libm::sqrt((n + 1) as f64);
            let peak = f_alpha(n, top);
            for i in 0..=1000 {
                let a = i as f64 / 1000.0;
                if libm::fabs(a - top) > 1e-3 {
                    assert!(f_alpha(n, a) < peak, "n={n} a={a}");
                }
            }
        }
    }

    #[test]
    fn f_alpha_matches_built_state() {
        for n in 1..=64usize {
            for i in 0..=10 {
                let a = i as f64 / 10.0;
                let s = build_state(&StateProfile::AlphaTop { alpha: a, n }).unwrap();
                assert!(libm::fabs(f_alpha(n, a) - entropy_of_entanglement(&s)) < 1e-12);
            }
        }
    }

    #[test]
    fn f_alpha_endpoint_bounds() {
        for n in 4..=64usize {
            let l = libm::log2(n as f64);
            for eps in [0.1, 0.5, 1.0] {
                let mu = libm::sqrt(eps / l);
                assert!(f_alpha(n, mu) >= l - eps - 1.0 / (n as f64 * core::f64::consts::LN_2));
                for p in [1i32, 2] {
                    let delta = eps * eps;
                    if 2.0 * delta > libm::pow(l, p as f64) {
                        continue;
                    }
                    let nu = libm::sqrt(1.0 - delta / libm::pow(l, p as f64));
                    let bound = 4.0 * (delta * libm::pow(l, 1.0 - p as f64) + libm::sqrt(delta) * libm::pow(l, -(p as f64) / 2.0));
                    assert!(f_alpha(n, nu) <= bound);
                }
            }
        }
    }

    #[test]
    fn delta_classification() {
        for d in [2, 5, 16] {
            let c = delta_classify(&SchmidtState::maximally_entangled(d).unwrap(), 1e-6).unwrap();
            assert_eq!(c.kind(), DeltaKind::MaxEntangled);
            let p = delta_classify(&SchmidtState::product(d).unwrap(), 1e-6).unwrap();
            assert_eq!(p.kind(), DeltaKind::NonEntangled);
        }
        // dimension 1: gap and entropy are both 0
        let both = delta_classify(&SchmidtState::product(1).unwrap(), 0.5).unwrap();
        assert!(both.delta_max_entangled && both.delta_non_entangled);
        assert!(delta_classify(&SchmidtState::product(2).unwrap(), 0.0).is_err());
    }

    #[test]
    fn skewed_state_is_delta_max_entangled() {
        // log₂(n+1) − f(μ_n) ≤ ε + log₂(1 + 1/n) + 1/(n ln 2)
        for n in [4usize, 16, 64] {
            let l = libm::log2(n as f64);
            for eps in [0.1, 0.5, 1.0] {
                let mu = libm::sqrt(eps / l);
                let s = build_state(&StateProfile::AlphaTop { alpha: mu, n }).unwrap();
                let delta = eps + libm::log2(1.0 + 1.0 / n as f64) + 1.0 / (n as f64 * core::f64::consts::LN_2) + 1e-12;
                assert!(delta_classify(&s, delta).unwrap().delta_max_entangled);
            }
        }
    }

    #[test]
    fn iviol_cases() {
        for d in [1, 4, 9] {
            assert!(libm::fabs(iviol(&SchmidtState::maximally_entangled(d).unwrap()) - 1.0) < 1e-12);
            assert_eq!(iviol(&SchmidtState::product(d).unwrap()), 1.0);
        }
        let mut g = rng::rng_from(3);
        for _ in 0..50 {
            assert!(iviol(&random_state(7, &mut g)) >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn dyadic_blocks() {
        assert_eq!(dyadic_block(0), 1);
        assert_eq!(dyadic_block(1), 2);
        assert_eq!(dyadic_block(2), 2);
        assert_eq!(dyadic_block(3), 3);
        assert_eq!(dyadic_block(6), 3);
        assert_eq!(dyadic_block(7), 4);
        assert_eq!(dyadic_range(3, 100), 3..7);
        assert_eq!(dyadic_range(3, 5), 3..5);
    }

    #[test]
    fn dyadic_point_mass() {
        let d = dyadic_decompose(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(d.terms, vec![DyadicTerm { beta: 1.0, indices: vec![0] }]);
    }

    #[test]
    fn dyadic_uniform_four() {
        let d = dyadic_decompose(&[0.5; 4]).unwrap();
        let idx: Vec<Vec<usize>> = d.terms.iter().map(|t| t.indices.clone()).collect();
        assert_eq!(idx, vec![vec![0], vec![1, 2], vec![3]]);
        assert!(d.reconstruct().iter().all(|v| libm::fabs(v - 0.5) < 1e-15));
        assert!(d.beta_sum() <= 2.0 * libm::sqrt(2.0));
    }

    #[test]
    fn dyadic_rejects_bad_input() {
        assert!(dyadic_decompose(&[0.1, 0.5]).is_err());
        assert!(dyadic_decompose(&[0.5, -0.1]).is_err());
        assert!(dyadic_decompose(&[1.0, 1.0]).is_err());
        assert!(dyadic_decompose(&[]).is_err());
    }

    #[test]
    fn dyadic_terms_stay_in_one_block() {
        let mut g = rng::rng_from(12);
        for _ in 0..50 {
            let n = 2 + rng::below(&mut g, 300);
            let s = random_state(n, &mut g);
            let d = dyadic_decompose(s.alphas()).unwrap();
            assert!(d.terms.len() <= n);
            for t in &d.terms {
                let k = dyadic_block(t.indices[0]);
                assert!(t.indices.iter().all(|&i| dyadic_block(i) == k));
            }
            let rec = d.reconstruct();
            for (x, y) in rec.iter().zip(s.alphas()) {
                assert!(libm::fabs(x - y) <= 1e-12);
            }
            assert!(d.beta_sum() <= 2.0 * libm::sqrt(libm::log2(n as f64)) + 1e-9);
        }
    }

    fn positive_instance(d: usize, seed: u64) -> (BellFunctional, PovmFamily, PovmFamily, SchmidtState) {
        let mut g = rng::rng_from(seed);
        let m = BellFunctional::from_fn(Scenario { n_inputs: 2, n_outputs: 2 }, |_, _, _, _| rng::uniform(&mut g));
        let pa = random_povm(2, 2, d, &mut g);
        let pb = random_povm(2, 2, d, &mut g);
        let st = random_state(d, &mut g);
        (m, pa, pb, st)
    }

    #[test]
    fn extraction_meets_guarantee() {
        for seed in 0..30 {
            let d = 2 + (seed as usize % 5);
            let (m, pa, pb, st) = positive_instance(d, seed);
            let e = extract_max_entangled(&m, &pa, &pb, &st).unwrap();
            assert!(e.value >= e.guarantee - 1e-9, "{e:?}");
            let nz: Vec<f64> = e.witness.iter().copied().filter(|v| *v > 0.0).collect();
            assert_eq!(nz.len(), e.k);
            assert!(nz.iter().all(|v| libm::fabs(v - nz[0]) <= 1e-15));
        }
    }

    #[test]
    fn extraction_of_uniform_state_is_identity() {
        let (m, pa, pb, _) = positive_instance(3, 4);
        let st = SchmidtState::maximally_entangled(3).unwrap();
        let e = extract_max_entangled(&m, &pa, &pb, &st).unwrap();
        assert_eq!(e.k, 3);
        assert_eq!(e.value, e.c);
    }

    #[test]
    fn extraction_two_blocks_is_best_block() {
        for seed in 0..20 {
            let (m, pa, pb, _) = positive_instance(2, 50 + seed);
            let st = SchmidtState::from_coefficients(&[0.9, 0.3]).unwrap();
            let e = extract_max_entangled(&m, &pa, &pb, &st).unwrap();
            let b = bell_operator(&m, &pa, &pb).unwrap();
            let brute = b.get(0, 0).max(b.get(3, 3));
            assert!(libm::fabs(e.value - brute) < 1e-12);
        }
    }

    #[test]
    fn extraction_rejects_indefinite_operator() {
        let (m, pa, pb, st) = positive_instance(3, 9);
        let neg = m.scaled(-1.0);
        assert!(matches!(extract_max_entangled(&neg, &pa, &pb, &st), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn polarization_equal_blocks() {
        let (m, pa, pb, _) = positive_instance(2, 1);
        // single block: only the pair (A, A) exists
        let st = SchmidtState::product(2).unwrap();
        let p = polarization_select(&m, &pa, &pb, &st).unwrap();
        assert_eq!(p.k, 0);
        assert_eq!(p.support_a, p.support_b);
        let b = bell_operator(&m, &pa, &pb).unwrap();
        assert!(libm::fabs(p.value - 4.0 * b.get(0, 0)) < 1e-12);
    }

    #[test]
    fn polarization_real_operator_needs_only_even_k() {
        let mut g = rng::rng_from(31);
        for seed in 0..20 {
            let d = 2 + seed % 5;
            let m = BellFunctional::from_fn(Scenario { n_inputs: 2, n_outputs: 3 }, |_, _, _, _| rng::gaussian(&mut g));
            let pa = random_povm(2, 3, d, &mut g);
            let pb = random_povm(2, 3, d, &mut g);
            let st = random_state(d, &mut g);
            let p = polarization_select(&m, &pa, &pb, &st).unwrap();
            assert!(libm::fabs(p.values[1] - p.values[3]) < 1e-12);
            let even = libm::fabs(p.values[0]).max(libm::fabs(p.values[2]));
            assert!(even >= libm::fabs(p.values[1]) - 1e-12);
            assert!(p.k % 2 == 0);
            assert!(libm::fabs(p.value - p.values[p.k as usize]) < 1e-10);
            assert!(libm::fabs(p.value) >= p.guarantee - 1e-9);
        }
    }
}
