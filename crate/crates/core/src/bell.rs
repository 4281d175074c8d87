//! Bell scenarios, functionals and probability tables.
//!
//! Tensors are indexed `(x, y, a, b)`: Alice's input, Bob's input, Alice's
//! output, Bob's output. Both parties share the same number of inputs `N`
//! and outputs `K`. Indices are zero-based throughout.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::povm::{validate_povm, PovmFamily};
use crate::state::SchmidtState;

/// Tolerance used when a POVM argument is checked on entry.
pub const POVM_ENTRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub n_inputs: usize,
    pub n_outputs: usize,
}

impl Scenario {
    pub fn new(n_inputs: usize, n_outputs: usize) -> Result<Self> {
        if n_inputs == 0 || n_outputs == 0 {
            return Err(Error::InvalidInput("scenario needs N >= 1 and K >= 1".into()));
        }
        Ok(Self { n_inputs, n_outputs })
    }

    /// Number of `(x, y, a, b)` entries.
    pub fn len(&self) -> usize {
        let (n, k) = (self.n_inputs, self.n_outputs);
        n * n * k * k
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        let (n, k) = (self.n_inputs, self.n_outputs);
        ((x * n + y) * k + a) * k + b
    }

    fn ensure_same(&self, other: &Scenario) -> Result<()> {
        if self != other {
            return Err(Error::ScenarioMismatch {
                left_inputs: self.n_inputs,
                left_outputs: self.n_outputs,
                right_inputs: other.n_inputs,
                right_outputs: other.n_outputs,
            });
        }
        Ok(())
    }
}

/// Real coefficient tensor `M[x][y][a][b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BellFunctional {
    scenario: Scenario,
    coeffs: Vec<f64>,
}

impl BellFunctional {
    pub fn zeros(scenario: Scenario) -> Self {
        Self {
            scenario,
            coeffs: vec![0.0; scenario.len()],
        }
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(scenario);
        let (n, k) = (scenario.n_inputs, scenario.n_outputs);
        for x in 0..n {
            for y in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        m.coeffs[scenario.index(x, y, a, b)] = f(x, y, a, b);
                    }
                }
            }
        }
        m
    }

    /// Wraps flat coefficients in `(x, y, a, b)` order.
    pub fn from_flat(scenario: Scenario, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != scenario.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "expected {} coefficients, got {}",
                scenario.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { scenario, coeffs })
    }

    /// The CHSH game: weight 1/4 on every `(x, y, a, b)` with `a ⊕ b = x ∧ y`.
    pub fn chsh_game() -> Self {
        let s = Scenario { n_inputs: 2, n_outputs: 2 };
        Self::from_fn(s, |x, y, a, b| if (a ^ b) == (x & y) { 0.25 } else { 0.0 })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.coeffs[self.scenario.index(x, y, a, b)]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            scenario: self.scenario,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Swaps the roles of Alice and Bob.
    pub fn swap_parties(&self) -> Self {
        Self::from_fn(self.scenario, |x, y, a, b| self.get(y, x, b, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(libm::fabs(*c)))
    }
}

/// Probability table `p[x][y][a][b] = P(a, b | x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    scenario: Scenario,
    p: Vec<f64>,
}

impl ProbabilityTable {
    /// Validates entries (`≥ −1e−12`) and per-`(x, y)` normalization
    /// (within 1e−9). Slightly negative entries are clamped to zero.
    pub fn new(scenario: Scenario, mut p: Vec<f64>) -> Result<Self> {
        if p.len() != scenario.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "expected {} probabilities, got {}",
                scenario.len(),
                p.len()
            )));
        }
        if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < -1e-12) {
            return Err(Error::InvalidInput(alloc::format!("invalid probability {v}")));
        }
        let (n, k) = (scenario.n_inputs, scenario.n_outputs);
        for x in 0..n {
            for y in 0..n {
                let start = scenario.index(x, y, 0, 0);
                let s: f64 = p[start..start + k * k].iter().sum();
                if libm::fabs(s - 1.0) > 1e-9 {
                    return Err(Error::InvalidInput(alloc::format!(
                        "P(.,.|{x},{y}) sums to {s}"
                    )));
                }
            }
        }
        for v in p.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(Self { scenario, p })
    }

    pub fn uniform(scenario: Scenario) -> Self {
        let k = scenario.n_outputs as f64;
        Self {
            scenario,
            p: vec![1.0 / (k * k); scenario.len()],
        }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.p[self.scenario.index(x, y, a, b)]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// `λ·self + (1 − λ)·other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        self.scenario.ensure_same(&other.scenario)?;
        Ok(Self {
            scenario: self.scenario,
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
                .collect(),
        })
    }
}

/// One output per input, for a single party.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DeterministicStrategy {
    pub choice: Vec<usize>,
}

impl DeterministicStrategy {
    pub fn new(choice: Vec<usize>, n_outputs: usize) -> Result<Self> {
        if let Some(c) = choice.iter().find(|&&c| c >= n_outputs) {
            return Err(Error::InvalidInput(alloc::format!(
                "output {c} out of range for K = {n_outputs}"
            )));
        }
        Ok(Self { choice })
    }

    pub fn constant(n_inputs: usize, output: usize) -> Self {
        Self {
            choice: vec![output; n_inputs],
        }
    }
}

/// `⟨M, P⟩ = Σ M_{x,y}^{a,b} P(a, b | x, y)`.
pub fn pair(m: &BellFunctional, p: &ProbabilityTable) -> Result<f64> {
    m.scenario.ensure_same(&p.scenario)?;
    Ok(m.coeffs.iter().zip(&p.p).map(|(a, b)| a * b).sum())
}

/// Non-signalling check. Returns whether both parties' marginals are
/// independent of the other party's input within `tol`, and the largest
/// spread observed.
pub fn check_nonsignalling(p: &ProbabilityTable, tol: f64) -> (bool, f64) {
    let s = p.scenario;
    let (n, k) = (s.n_inputs, s.n_outputs);
    let mut worst = 0.0f64;
    // Alice: Σ_b P(a,b|x,y) independent of y
    for x in 0..n {
        for a in 0..k {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for y in 0..n {
                let m: f64 = (0..k).map(|b| p.get(x, y, a, b)).sum();
                lo = lo.min(m);
                hi = hi.max(m);
            }
            worst = worst.max(hi - lo);
        }
    }
    // Bob: Σ_a P(a,b|x,y) independent of x
    for y in 0..n {
        for b in 0..k {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for x in 0..n {
                let m: f64 = (0..k).map(|a| p.get(x, y, a, b)).sum();
                lo = lo.min(m);
                hi = hi.max(m);
            }
            worst = worst.max(hi - lo);
        }
    }
    (worst <= tol, worst)
}

/// Statistics of measuring `povm_a ⊗ povm_b` on `Σ αᵢ|ii⟩`:
/// `p = Σ_{i,j} αᵢ αⱼ E(i,j) F(i,j) = tr(E · D F D)`, `D = diag(α)`.
pub fn quantum_prob_pure(
    povm_a: &PovmFamily,
    povm_b: &PovmFamily,
    state: &SchmidtState,
) -> Result<ProbabilityTable> {
    let d = state.dim();
    if povm_a.dim() != d || povm_b.dim() != d {
        return Err(Error::DimensionMismatch(alloc::format!(
            "POVM dims {}/{} vs state dim {d}",
            povm_a.dim(),
            povm_b.dim()
        )));
    }
    if povm_a.n_inputs() != povm_b.n_inputs() || povm_a.n_outputs() != povm_b.n_outputs() {
        return Err(Error::DimensionMismatch("parties have different scenarios".into()));
    }
    for p in [povm_a, povm_b] {
        let r = validate_povm(p, POVM_ENTRY_TOL)?;
        if !r.passed {
            return Err(Error::InvalidPovm(alloc::format!(
                "min eigenvalue {:e}, completeness residual {:e}",
                r.worst_eigenvalue,
                r.worst_residual
            )));
        }
    }
    let scenario = Scenario::new(povm_a.n_inputs(), povm_a.n_outputs())?;
    let alphas = state.alphas();
    let sandwiched: Vec<Vec<_>> = povm_b
        .elements()
        .iter()
        .map(|row| row.iter().map(|f| f.diag_sandwich(alphas)).collect())
        .collect();
    let (n, k) = (scenario.n_inputs, scenario.n_outputs);
    let mut p = vec![0.0; scenario.len()];
    for x in 0..n {
        for y in 0..n {
            for a in 0..k {
                let e = povm_a.element(x, a);
                for b in 0..k {
                    p[scenario.index(x, y, a, b)] = e.dot(&sandwiched[y][b]);
                }
            }
        }
    }
    for v in p.iter_mut() {
        if *v < 0.0 && *v > -1e-12 {
            *v = 0.0;
        }
    }
    ProbabilityTable::new(scenario, p)
}

/// Point-mass table of a pair of deterministic strategies.
pub fn deterministic_prob(
    s_a: &DeterministicStrategy,
    s_b: &DeterministicStrategy,
    n_outputs: usize,
) -> Result<ProbabilityTable> {
    if s_a.choice.len() != s_b.choice.len() {
        return Err(Error::DimensionMismatch("strategies cover different input sets".into()));
    }
    let scenario = Scenario::new(s_a.choice.len(), n_outputs)?;
    DeterministicStrategy::new(s_a.choice.clone(), n_outputs)?;
    DeterministicStrategy::new(s_b.choice.clone(), n_outputs)?;
    let mut p = vec![0.0; scenario.len()];
    for (x, &a) in s_a.choice.iter().enumerate() {
        for (y, &b) in s_b.choice.iter().enumerate() {
            p[scenario.index(x, y, a, b)] = 1.0;
        }
    }
    Ok(ProbabilityTable { scenario, p })
}

/// Violation ratio `|quantum| / classical`.
pub fn zeta1(quantum_value: f64, classical_value: f64) -> Result<f64> {
    if classical_value <= 1e-15 {
        return Err(Error::UndefinedRatio(classical_value));
    }
    Ok(libm::fabs(quantum_value) / classical_value)
}

#[cfg(feature = "serde")]
mod serde_impl {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    type Nested = Vec<Vec<Vec<Vec<f64>>>>;

    fn nest(s: Scenario, flat: &[f64]) -> Nested {
        let (n, k) = (s.n_inputs, s.n_outputs);
        (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        (0..k)
                            .map(|a| (0..k).map(|b| flat[s.index(x, y, a, b)]).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    fn flatten(n: usize, k: usize, nested: &Nested, field: &str) -> core::result::Result<Vec<f64>, alloc::string::String> {
        let mut out = Vec::with_capacity(n * n * k * k);
        if nested.len() != n {
            return Err(alloc::format!("{field}: expected {n} entries at depth 0"));
        }
        for (x, lx) in nested.iter().enumerate() {
            if lx.len() != n {
                return Err(alloc::format!("{field}[{x}]: expected {n} entries"));
            }
            for (y, ly) in lx.iter().enumerate() {
                if ly.len() != k {
                    return Err(alloc::format!("{field}[{x}][{y}]: expected {k} entries"));
                }
                for (a, la) in ly.iter().enumerate() {
                    if la.len() != k {
                        return Err(alloc::format!("{field}[{x}][{y}][{a}]: expected {k} entries"));
                    }
                    out.extend_from_slice(la);
                }
            }
        }
        Ok(out)
    }

    #[derive(Serialize, Deserialize)]
    struct FunctionalRepr {
        n_inputs: usize,
        n_outputs: usize,
        coeffs: Nested,
    }

    #[derive(Serialize, Deserialize)]
    struct TableRepr {
        n_inputs: usize,
        n_outputs: usize,
        p: Nested,
    }

    impl Serialize for BellFunctional {
        fn serialize<S: Serializer>(&self, ser: S) -> core::result::Result<S::Ok, S::Error> {
            FunctionalRepr {
                n_inputs: self.scenario.n_inputs,
                n_outputs: self.scenario.n_outputs,
                coeffs: nest(self.scenario, &self.coeffs),
            }
            .serialize(ser)
        }
    }

    impl<'de> Deserialize<'de> for BellFunctional {
        fn deserialize<D: Deserializer<'de>>(de: D) -> core::result::Result<Self, D::Error> {
            let r = FunctionalRepr::deserialize(de)?;
            let s = Scenario::new(r.n_inputs, r.n_outputs).map_err(D::Error::custom)?;
            let flat = flatten(r.n_inputs, r.n_outputs, &r.coeffs, "coeffs").map_err(D::Error::custom)?;
            BellFunctional::from_flat(s, flat).map_err(D::Error::custom)
        }
    }

    impl Serialize for ProbabilityTable {
        fn serialize<S: Serializer>(&self, ser: S) -> core::result::Result<S::Ok, S::Error> {
            TableRepr {
                n_inputs: self.scenario.n_inputs,
                n_outputs: self.scenario.n_outputs,
                p: nest(self.scenario, &self.p),
            }
            .serialize(ser)
        }
    }

    impl<'de> Deserialize<'de> for ProbabilityTable {
        fn deserialize<D: Deserializer<'de>>(de: D) -> core::result::Result<Self, D::Error> {
            let r = TableRepr::deserialize(de)?;
            let s = Scenario::new(r.n_inputs, r.n_outputs).map_err(D::Error::custom)?;
            let flat = flatten(r.n_inputs, r.n_outputs, &r.p, "p").map_err(D::Error::custom)?;
            ProbabilityTable::new(s, flat).map_err(D::Error::custom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    #[test]
    fn chsh_against_uniform() {
        let m = BellFunctional::chsh_game();
        let p = ProbabilityTable::uniform(m.scenario());
        assert!(libm::fabs(pair(&m, &p).unwrap() - 0.5) < 1e-15);
    }

    #[test]
    fn pair_rejects_mismatch() {
        let m = BellFunctional::chsh_game();
        let p = ProbabilityTable::uniform(Scenario::new(3, 2).unwrap());
        assert!(matches!(pair(&m, &p), Err(Error::ScenarioMismatch { .. })));
    }

    #[test]
    fn pair_with_zero_extended_table() {
        // M lives on outputs {0}; the table puts all mass on output 1.
        let s = Scenario::new(2, 2).unwrap();
        let m = BellFunctional::from_fn(s, |_, _, a, b| if a == 0 && b == 0 { 0.7 } else { 0.0 });
        let p = deterministic_prob(&DeterministicStrategy::constant(2, 1), &DeterministicStrategy::constant(2, 1), 2).unwrap();
        assert_eq!(pair(&m, &p).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_single_entry() {
        let p = deterministic_prob(&DeterministicStrategy::constant(1, 0), &DeterministicStrategy::constant(1, 0), 1).unwrap();
        assert_eq!(p.as_slice(), &[1.0]);
        let (ok, r) = check_nonsignalling(&p, 0.0);
        assert!(ok);
        assert_eq!(r, 0.0);
    }

    #[test]
    fn deterministic_is_nonsignalling() {
        let a = DeterministicStrategy::new(alloc::vec![0, 2, 1], 3).unwrap();
        let b = DeterministicStrategy::new(alloc::vec![1, 1, 0], 3).unwrap();
        let p = deterministic_prob(&a, &b, 3).unwrap();
        assert_eq!(check_nonsignalling(&p, 0.0), (true, 0.0));
    }

    #[test]
    fn signalling_table_detected() {
        // Alice's marginal for x=0 shifts by 0.1 between y=0 and y=1.
        let s = Scenario::new(2, 2).unwrap();
        let mut p = alloc::vec![0.25; s.len()];
        p[s.index(0, 1, 0, 0)] = 0.30;
        p[s.index(0, 1, 0, 1)] = 0.30;
        p[s.index(0, 1, 1, 0)] = 0.20;
        p[s.index(0, 1, 1, 1)] = 0.20;
        let t = ProbabilityTable::new(s, p).unwrap();
        let (ok, r) = check_nonsignalling(&t, 1e-9);
        assert!(!ok);
        assert!(libm::fabs(r - 0.1) < 1e-12);
    }

    #[test]
    fn single_outcome_povms_give_ones() {
        let st = SchmidtState::from_coefficients(&[0.8, 0.6]).unwrap();
        let f = PovmFamily::trivial(3, 2);
        let p = quantum_prob_pure(&f, &f, &st).unwrap();
        assert!(p.as_slice().iter().all(|v| libm::fabs(v - 1.0) < 1e-14));
    }

    #[test]
    fn product_state_factorizes() {
        let e0 = SymMatrix::from_fn(2, |i, j| [[0.7, 0.2], [0.2, 0.4]][i][j]);
        let id = SymMatrix::identity(2);
        let e1 = &id - &e0;
        let f = PovmFamily::new(alloc::vec![alloc::vec![e0.clone(), e1.clone()]]).unwrap();
        let st = SchmidtState::product(2).unwrap();
        let p = quantum_prob_pure(&f, &f, &st).unwrap();
        for (a, ea) in [&e0, &e1].iter().enumerate() {
            for (b, fb) in [&e0, &e1].iter().enumerate() {
                assert!(libm::fabs(p.get(0, 0, a, b) - ea.get(0, 0) * fb.get(0, 0)) < 1e-15);
            }
        }
    }

    #[test]
    fn quantum_prob_rejects_bad_povm() {
        let st = SchmidtState::maximally_entangled(2).unwrap();
        let bad = PovmFamily::new(alloc::vec![alloc::vec![SymMatrix::diag(&[2.0, 1.0]), SymMatrix::diag(&[-1.0, 0.0])]]).unwrap();
        assert!(matches!(quantum_prob_pure(&bad, &bad, &st), Err(Error::InvalidPovm(_))));
        let wrong_dim = PovmFamily::trivial(1, 3);
        assert!(matches!(quantum_prob_pure(&wrong_dim, &wrong_dim, &st), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn zeta1_cases() {
        assert_eq!(zeta1(2.0, 1.0).unwrap(), 2.0);
        assert_eq!(zeta1(0.0, 0.3).unwrap(), 0.0);
        assert!(libm::fabs(zeta1(0.85355, 0.75).unwrap() - 1.138_066_666_666_666_7) < 1e-12);
        assert!(matches!(zeta1(1.0, 0.0), Err(Error::UndefinedRatio(_))));
    }

    #[test]
    fn table_validation() {
        let s = Scenario::new(1, 2).unwrap();
        assert!(ProbabilityTable::new(s, alloc::vec![0.5, 0.5, 0.0, 0.1]).is_err());
        assert!(ProbabilityTable::new(s, alloc::vec![0.5, 0.5, -0.1, 0.1]).is_err());
        let t = ProbabilityTable::new(s, alloc::vec![0.5, 0.5, -1e-13, 1e-13]).unwrap();
        assert_eq!(t.get(0, 0, 1, 0), 0.0);
    }
}
