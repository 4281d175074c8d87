//! Variational lower bounds on quantum values.
//!
//! The shared state is kept as a `d × d` coefficient matrix `Ψ`
//! (`|ψ⟩ = Σ Ψᵢⱼ |ij⟩`), so that
//! `⟨ψ|E ⊗ F|ψ⟩ = tr(E · Ψ F Ψᵀ) = tr(F · Ψᵀ E Ψ)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::bell::BellFunctional;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, inv_sqrt_psd, kron, psd_project, svd, top_eigenpair, Matrix, SymMatrix};
use crate::povm::{validate_povm, PovmFamily};
use crate::rng;
use crate::state::SchmidtState;

/// Absolute duality gap accepted for a best response, relative to
/// `1 + Σ_a ‖C_a‖_F`.
pub const BEST_RESPONSE_GAP: f64 = 1e-7;

const ADMM_MAX_ITER: usize = 5_000;
const GAP_CHECK_EVERY: usize = 25;
const PG_STEPS: usize = 300;
const DYKSTRA_STEPS: usize = 100;
const STALL_ROUNDS: usize = 3;

/// `Σ M_{x,y}^{a,b} E_x^a ⊗ F_y^b` on `ℝ^{dA·dB}`.
pub fn bell_operator(m: &BellFunctional, povm_a: &PovmFamily, povm_b: &PovmFamily) -> Result<SymMatrix> {
    check_shapes(m, povm_a)?;
    check_shapes(m, povm_b)?;
    let s = m.scenario();
    let db = povm_b.dim();
    let mut out = SymMatrix::zeros(povm_a.dim() * db);
    for x in 0..s.n_inputs {
        for a in 0..s.n_outputs {
            let mut g = SymMatrix::zeros(db);
            for y in 0..s.n_inputs {
                for b in 0..s.n_outputs {
                    let c = m.get(x, y, a, b);
                    if c != 0.0 {
                        g.add_scaled(c, povm_b.element(y, b));
                    }
                }
            }
            if g.max_abs() == 0.0 {
                continue;
            }
            out.add_scaled(1.0, &kron(povm_a.element(x, a), &g)?);
        }
    }
    Ok(out)
}

fn check_shapes(m: &BellFunctional, p: &PovmFamily) -> Result<()> {
    let s = m.scenario();
    if p.n_inputs() != s.n_inputs || p.n_outputs() != s.n_outputs {
        return Err(Error::ScenarioMismatch {
            left_inputs: s.n_inputs,
            left_outputs: s.n_outputs,
            right_inputs: p.n_inputs(),
            right_outputs: p.n_outputs(),
        });
    }
    Ok(())
}

/// Which solver produced a best response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BestResponseMethod {
    /// Single outcome: `E = I`.
    Forced,
    Admm,
    ProjectedGradient,
    /// Neither solver beat the incumbent.
    Incumbent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    pub effects: Vec<SymMatrix>,
    /// `Σ_a tr(E_a C_a)`.
    pub objective: f64,
    /// `tr Y` for a dual-feasible `Y ⪰ C_a`; an upper bound on the optimum.
    pub dual_bound: f64,
    pub method: BestResponseMethod,
}

/// `max Σ_a tr(E_a C_a)` over POVMs `{E_a}`, starting from `incumbent`.
///
/// Block ADMM on `{E_a ⪰ 0} ∩ {Σ E_a = I}` with a certified duality gap;
/// falls back to projected-gradient ascent (Dykstra projection) when the gap
/// does not close. The returned objective is never below the incumbent's.
pub fn maximize_povm_objective(costs: &[SymMatrix], incumbent: &[SymMatrix]) -> Result<BestResponse> {
    let k = costs.len();
    if k == 0 || incumbent.len() != k {
        return Err(Error::InvalidInput("costs and incumbent must share a nonempty outcome count".into()));
    }
    let d = costs[0].dim();
    if k == 1 {
        let e = vec![SymMatrix::identity(d)];
        let obj = costs[0].trace();
        return Ok(BestResponse {
            objective: obj,
            dual_bound: obj,
            effects: e,
            method: BestResponseMethod::Forced,
        });
    }
    let scale = 1.0 + costs.iter().map(|c| c.frobenius_norm()).sum::<f64>();
    let gap_tol = BEST_RESPONSE_GAP * scale;
    let inc_obj = objective(costs, incumbent);

    let (admm, upper) = admm_best_response(costs, incumbent, gap_tol)?;
    let mut best = (admm, BestResponseMethod::Admm);
    if upper - objective(costs, &best.0) > gap_tol {
        let start = &best.0;
        let pg = projected_gradient(costs, start)?;
        if objective(costs, &pg) > objective(costs, &best.0) {
            best = (pg, BestResponseMethod::ProjectedGradient);
        }
    }
    let (mut effects, mut method) = best;
    let mut obj = objective(costs, &effects);
    if obj < inc_obj {
        effects = incumbent.to_vec();
        obj = inc_obj;
        method = BestResponseMethod::Incumbent;
    }
    let dual_bound = dual_bound(costs, &effects)?.min(upper).max(obj);
    Ok(BestResponse {
        effects,
        objective: obj,
        dual_bound,
        method,
    })
}

fn objective(costs: &[SymMatrix], effects: &[SymMatrix]) -> f64 {
    costs.iter().zip(effects).map(|(c, e)| c.dot(e)).sum()
}

/// `tr Y` for `Y = sym(Σ C_a E_a) + t·I`, `t` the smallest shift making
/// `Y ⪰ C_a` for every `a`.
fn dual_bound(costs: &[SymMatrix], effects: &[SymMatrix]) -> Result<f64> {
    let d = costs[0].dim();
    let mut acc = nalgebra::DMatrix::<f64>::zeros(d, d);
    for (c, e) in costs.iter().zip(effects) {
        acc += c.to_dmatrix() * e.to_dmatrix();
    }
    shifted_trace(costs, &SymMatrix::from_dmatrix(&acc))
}

/// `tr(Y₀ + t·I)` with `t = max_a λ_max(C_a − Y₀)`: the dual objective of
/// the smallest feasible shift of `Y₀`.
fn shifted_trace(costs: &[SymMatrix], y0: &SymMatrix) -> Result<f64> {
    let mut shift = f64::NEG_INFINITY;
    for c in costs {
        shift = shift.max(herm_eig(&(c - y0))?.max_value());
    }
    Ok(y0.trace() + shift * y0.dim() as f64)
}

/// Dual candidate from the ADMM multipliers: `Y₀ = mean_a (C_a − ρU_a)`.
fn multiplier_bound(costs: &[SymMatrix], u: &[SymMatrix], rho: f64) -> Result<f64> {
    let mut y0 = SymMatrix::zeros(costs[0].dim());
    for (c, ua) in costs.iter().zip(u) {
        y0.add_scaled(1.0, c);
        y0.add_scaled(-rho, ua);
    }
    shifted_trace(costs, &y0.scaled(1.0 / costs.len() as f64))
}

/// `E_a ↦ S^{-1/2} E_a S^{-1/2}` with `S = Σ E_a`, restoring completeness.
fn repair(effects: &[SymMatrix]) -> Result<Vec<SymMatrix>> {
    let d = effects[0].dim();
    let k = effects.len();
    let mut s = SymMatrix::zeros(d);
    for e in effects {
        s.add_scaled(1.0, e);
    }
    if herm_eig(&s)?.min_value() <= 1e-12 {
        // rank-deficient sum: blend with the uniform POVM first
        let blended: Vec<SymMatrix> = effects
            .iter()
            .map(|e| {
                let mut b = e.scaled(1.0 - 1e-9);
                b.add_scaled(1e-9 / k as f64, &SymMatrix::identity(d));
                b
            })
            .collect();
        return repair_full_rank(&blended);
    }
    repair_full_rank(effects)
}

fn repair_full_rank(effects: &[SymMatrix]) -> Result<Vec<SymMatrix>> {
    let d = effects[0].dim();
    let mut s = SymMatrix::zeros(d);
    for e in effects {
        s.add_scaled(1.0, e);
    }
    let w = Matrix::from_sym(&inv_sqrt_psd(&s, 1e-300)?);
    Ok(effects.iter().map(|e| e.congruence(&w)).collect())
}

fn project_affine(y: &mut [SymMatrix]) {
    let d = y[0].dim();
    let k = y.len() as f64;
    let mut excess = SymMatrix::identity(d).scaled(-1.0);
    for e in y.iter() {
        excess.add_scaled(1.0, e);
    }
    for e in y.iter_mut() {
        e.add_scaled(-1.0 / k, &excess);
    }
}

/// Returns the best repaired iterate and the smallest dual bound seen.
fn admm_best_response(costs: &[SymMatrix], start: &[SymMatrix], gap_tol: f64) -> Result<(Vec<SymMatrix>, f64)> {
    let k = costs.len();
    let d = costs[0].dim();
    let cmax = costs.iter().map(|c| c.max_abs()).fold(0.0, f64::max);
    let mut rho = cmax.max(1e-12);
    let mut z: Vec<SymMatrix> = start.to_vec();
    let mut u: Vec<SymMatrix> = vec![SymMatrix::zeros(d); k];
    let mut best = repair(&z)?;
    let mut best_obj = objective(costs, &best);
    let mut upper = dual_bound(costs, &best)?;
    if upper - best_obj <= gap_tol {
        return Ok((best, upper));
    }
    for it in 1..=ADMM_MAX_ITER {
        let mut x: Vec<SymMatrix> = (0..k)
            .map(|a| {
                let mut y = &z[a] - &u[a];
                y.add_scaled(1.0 / rho, &costs[a]);
                y
            })
            .collect();
        project_affine(&mut x);
        let mut primal = 0.0;
        let mut dual = 0.0;
        for a in 0..k {
            let znew = psd_project(&(&x[a] + &u[a]))?;
            let r = &x[a] - &znew;
            primal += r.dot(&r);
            let dz = &znew - &z[a];
            dual += dz.dot(&dz);
            u[a].add_scaled(1.0, &r);
            z[a] = znew;
        }
        let primal = libm::sqrt(primal);
        let dual = rho * libm::sqrt(dual);
        if it % GAP_CHECK_EVERY == 0 {
            let cand = repair(&z)?;
            let obj = objective(costs, &cand);
            upper = upper.min(dual_bound(costs, &cand)?).min(multiplier_bound(costs, &u, rho)?);
            if obj > best_obj {
                best = cand;
                best_obj = obj;
            }
            if upper - best_obj <= gap_tol {
                break;
            }
            if primal > 10.0 * dual {
                rho *= 2.0;
                for ua in u.iter_mut() {
                    *ua = ua.scaled(0.5);
                }
            } else if dual > 10.0 * primal {
                rho *= 0.5;
                for ua in u.iter_mut() {
                    *ua = ua.scaled(2.0);
                }
            }
        }
    }
    Ok((best, upper))
}

/// Nearest point of `{E_a ⪰ 0, Σ E_a = I}` by Dykstra's alternating
/// projections.
pub fn dykstra_project(y: &[SymMatrix]) -> Result<Vec<SymMatrix>> {
    let k = y.len();
    let d = y[0].dim();
    let mut x: Vec<SymMatrix> = y.to_vec();
    let mut p = vec![SymMatrix::zeros(d); k];
    let mut q = vec![SymMatrix::zeros(d); k];
    for _ in 0..DYKSTRA_STEPS {
        let mut aff: Vec<SymMatrix> = (0..k).map(|a| &x[a] + &p[a]).collect();
        project_affine(&mut aff);
        let mut moved = 0.0;
        for a in 0..k {
            p[a] = &(&x[a] + &p[a]) - &aff[a];
            let nx = psd_project(&(&aff[a] + &q[a]))?;
            q[a] = &(&aff[a] + &q[a]) - &nx;
            let dx = &nx - &x[a];
            moved += dx.dot(&dx);
            x[a] = nx;
        }
        if moved < 1e-30 {
            break;
        }
    }
    Ok(x)
}

fn projected_gradient(costs: &[SymMatrix], start: &[SymMatrix]) -> Result<Vec<SymMatrix>> {
    let cmax = costs.iter().map(|c| c.frobenius_norm()).fold(0.0, f64::max).max(1e-300);
    let step = 1.0 / cmax;
    let mut e = start.to_vec();
    let mut best = repair(&e)?;
    let mut best_obj = objective(costs, &best);
    for _ in 0..PG_STEPS {
        let y: Vec<SymMatrix> = e
            .iter()
            .zip(costs)
            .map(|(ea, c)| {
                let mut n = ea.clone();
                n.add_scaled(step, c);
                n
            })
            .collect();
        let next = dykstra_project(&y)?;
        let moved: f64 = next.iter().zip(&e).map(|(a, b)| (a - b).frobenius_norm()).sum();
        e = next;
        let cand = repair(&e)?;
        let obj = objective(costs, &cand);
        if obj > best_obj {
            best = cand;
            best_obj = obj;
        }
        if moved < 1e-14 {
            break;
        }
    }
    Ok(best)
}

/// Costs `C_x^a = Σ_{y,b} M_{x,y}^{a,b} Ψ F_y^b Ψᵀ` for Alice's input `x`.
fn alice_costs(m: &BellFunctional, povm_b: &PovmFamily, psi: &Matrix, x: usize) -> Vec<SymMatrix> {
    let s = m.scenario();
    let psi_t = psi.transpose();
    let w: Vec<Vec<SymMatrix>> = povm_b
        .elements()
        .iter()
        .map(|row| row.iter().map(|f| f.congruence(&psi_t)).collect())
        .collect();
    costs_from(m, &w, s.n_inputs, s.n_outputs, x, false)
}

/// Costs `C_y^b = Σ_{x,a} M_{x,y}^{a,b} Ψᵀ E_x^a Ψ` for Bob's input `y`.
fn bob_costs(m: &BellFunctional, povm_a: &PovmFamily, psi: &Matrix, y: usize) -> Vec<SymMatrix> {
    let s = m.scenario();
    let w: Vec<Vec<SymMatrix>> = povm_a
        .elements()
        .iter()
        .map(|row| row.iter().map(|e| e.congruence(psi)).collect())
        .collect();
    costs_from(m, &w, s.n_inputs, s.n_outputs, y, true)
}

fn costs_from(m: &BellFunctional, w: &[Vec<SymMatrix>], n: usize, k: usize, fixed: usize, bob: bool) -> Vec<SymMatrix> {
    let d = w[0][0].dim();
    (0..k)
        .map(|c| {
            let mut acc = SymMatrix::zeros(d);
            for (o, row) in w.iter().enumerate().take(n) {
                for (b, wm) in row.iter().enumerate() {
                    let coef = if bob { m.get(o, fixed, b, c) } else { m.get(fixed, o, c, b) };
                    if coef != 0.0 {
                        acc.add_scaled(coef, wm);
                    }
                }
            }
            acc
        })
        .collect()
}

fn diag_matrix(alphas: &[f64]) -> Matrix {
    let d = alphas.len();
    Matrix::from_fn(d, d, |i, j| if i == j { alphas[i] } else { 0.0 })
}

/// Best response for Alice's input `x` against Bob's POVMs on the state.
pub fn povm_best_response(
    m: &BellFunctional,
    povm_b: &PovmFamily,
    state: &SchmidtState,
    incumbent: &PovmFamily,
    x: usize,
) -> Result<BestResponse> {
    check_shapes(m, povm_b)?;
    check_shapes(m, incumbent)?;
    if povm_b.dim() != state.dim() || incumbent.dim() != state.dim() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "POVM dims {}/{} vs state dim {}",
            incumbent.dim(),
            povm_b.dim(),
            state.dim()
        )));
    }
    let costs = alice_costs(m, povm_b, &diag_matrix(state.alphas()), x);
    maximize_povm_objective(&costs, incumbent.input(x))
}

/// `Σ M ⟨ψ|E ⊗ F|ψ⟩` for a state given by its coefficient matrix.
pub fn strategy_value(m: &BellFunctional, povm_a: &PovmFamily, povm_b: &PovmFamily, psi: &Matrix) -> f64 {
    let s = m.scenario();
    (0..s.n_inputs)
        .map(|x| objective(&alice_costs(m, povm_b, psi, x), povm_a.input(x)))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateMode {
    /// Updated to the top eigenvector of the Bell operator each round.
    Free,
    Fixed(SchmidtState),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeesawConfig {
    /// Local dimension; ignored in fixed mode (the state's dimension is used).
    pub dim: usize,
    pub max_rounds: usize,
    pub restarts: usize,
    pub seed: u64,
    pub state_mode: StateMode,
    pub tol: f64,
}

impl SeesawConfig {
    pub fn free(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            max_rounds: 200,
            restarts: 8,
            seed,
            state_mode: StateMode::Free,
            tol: 1e-10,
        }
    }

    pub fn fixed(state: SchmidtState, seed: u64) -> Self {
        Self {
            dim: state.dim(),
            state_mode: StateMode::Fixed(state),
            ..Self::free(1, seed)
        }
    }

    fn local_dim(&self) -> usize {
        match &self.state_mode {
            StateMode::Free => self.dim,
            StateMode::Fixed(s) => s.dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.local_dim() == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidInput("at least one restart is required".into()));
        }
        Ok(())
    }
}

/// Outcome of a see-saw run, with the state in Schmidt form and the POVMs
/// expressed in the matching local bases.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SeesawResult {
    pub value: f64,
    pub povm_a: PovmFamily,
    pub povm_b: PovmFamily,
    pub state: SchmidtState,
    pub rounds: usize,
    pub converged: bool,
    pub restart: usize,
    /// Value after every best-response or state step.
    pub history: Vec<f64>,
    pub fallback_steps: usize,
}

fn random_povm(n_inputs: usize, k: usize, d: usize, g: &mut rng::Rng) -> Result<PovmFamily> {
    let r = d.div_ceil(k).max(1);
    let mix = 0.9;
    let mut rows = Vec::with_capacity(n_inputs);
    for _ in 0..n_inputs {
        let raw: Vec<SymMatrix> = (0..k)
            .map(|_| {
                let mut acc = SymMatrix::zeros(d);
                for _ in 0..r {
                    let v: Vec<f64> = (0..d).map(|_| rng::gaussian(g)).collect();
                    acc.add_scaled(1.0, &SymMatrix::outer(&v, 1.0));
                }
                acc
            })
            .collect();
        let rank_one = repair(&raw)?;
        rows.push(
            rank_one
                .iter()
                .map(|e| {
                    let mut m = e.scaled(mix);
                    m.add_scaled((1.0 - mix) / k as f64, &SymMatrix::identity(d));
                    m
                })
                .collect(),
        );
    }
    PovmFamily::new(rows)
}

/// One see-saw restart. Restarts are independent, so callers may run them
/// in any order or in parallel and reduce with [`best_of`].
pub fn seesaw_restart(m: &BellFunctional, cfg: &SeesawConfig, restart: usize) -> Result<SeesawResult> {
    cfg.validate()?;
    let s = m.scenario();
    let d = cfg.local_dim();
    let (n, k) = (s.n_inputs, s.n_outputs);
    let mut g = rng::rng_from(rng::derive_seed(cfg.seed, &[restart as u64]));
    let mut povm_a = random_povm(n, k, d, &mut g)?;
    let mut povm_b = random_povm(n, k, d, &mut g)?;
    let mut psi = match &cfg.state_mode {
        StateMode::Free => diag_matrix(&vec![1.0 / libm::sqrt(d as f64); d]),
        StateMode::Fixed(st) => diag_matrix(st.alphas()),
    };
    let mut value = strategy_value(m, &povm_a, &povm_b, &psi);
    let mut history = vec![value];
    let mut stall = 0;
    let mut rounds = 0;
    let mut converged = false;
    let mut fallback_steps = 0;
    while rounds < cfg.max_rounds {
        rounds += 1;
        let start = value;
        for x in 0..n {
            let costs = alice_costs(m, &povm_b, &psi, x);
            let br = maximize_povm_objective(&costs, povm_a.input(x))?;
            fallback_steps += usize::from(br.method == BestResponseMethod::ProjectedGradient);
            povm_a.set_input(x, br.effects);
            value = strategy_value(m, &povm_a, &povm_b, &psi);
            history.push(value);
        }
        for y in 0..n {
            let costs = bob_costs(m, &povm_a, &psi, y);
            let br = maximize_povm_objective(&costs, povm_b.input(y))?;
            fallback_steps += usize::from(br.method == BestResponseMethod::ProjectedGradient);
            povm_b.set_input(y, br.effects);
            value = strategy_value(m, &povm_a, &povm_b, &psi);
            history.push(value);
        }
        if cfg.state_mode == StateMode::Free {
            let op = bell_operator(m, &povm_a, &povm_b)?;
            let (top, v) = top_eigenpair(&op)?;
            if top > value {
                psi = Matrix::from_fn(d, d, |i, j| v[i * d + j]);
                value = strategy_value(m, &povm_a, &povm_b, &psi);
            }
            history.push(value);
        }
        if value - start < cfg.tol {
            stall += 1;
            if stall >= STALL_ROUNDS {
                converged = true;
                break;
            }
        } else {
            stall = 0;
        }
    }
    let (povm_a, povm_b, state) = match &cfg.state_mode {
        StateMode::Fixed(st) => (povm_a, povm_b, st.clone()),
        StateMode::Free => {
            let (u, sv, v) = svd(&psi);
            let state = SchmidtState::from_coefficients(&sv)?;
            (povm_a.rotated(&u), povm_b.rotated(&v), state)
        }
    };
    let value = strategy_value(m, &povm_a, &povm_b, &diag_matrix(state.alphas()));
    Ok(SeesawResult {
        value,
        povm_a,
        povm_b,
        state,
        rounds,
        converged,
        restart,
        history,
        fallback_steps,
    })
}

/// Higher value wins; ties go to the lower restart index.
pub fn best_of(a: SeesawResult, b: SeesawResult) -> SeesawResult {
    if b.value > a.value || (b.value == a.value && b.restart < a.restart) {
        b
    } else {
        a
    }
}

/// Best of `cfg.restarts` independent see-saw runs.
pub fn seesaw(m: &BellFunctional, cfg: &SeesawConfig) -> Result<SeesawResult> {
    let mut best = seesaw_restart(m, cfg, 0)?;
    for r in 1..cfg.restarts {
        best = best_of(best, seesaw_restart(m, cfg, r)?);
    }
    Ok(best)
}

/// See-saw with the state fixed to `ψ_k` for each `k` in `dims`.
pub fn max_entangled_value(m: &BellFunctional, dims: &[usize], cfg: &SeesawConfig) -> Result<(usize, SeesawResult)> {
    let mut best: Option<(usize, SeesawResult)> = None;
    for &k in dims {
        let fixed = SeesawConfig {
            state_mode: StateMode::Fixed(SchmidtState::maximally_entangled(k)?),
            dim: k,
            ..cfg.clone()
        };
        let r = seesaw(m, &fixed)?;
        if best.as_ref().is_none_or(|(_, b)| r.value > b.value) {
            best = Some((k, r));
        }
    }
    best.ok_or_else(|| Error::InvalidInput("dims must be nonempty".into()))
}

/// `validate_povm` on both families at `tol`.
pub fn strategy_is_valid(r: &SeesawResult, tol: f64) -> Result<bool> {
    Ok(validate_povm(&r.povm_a, tol)?.passed && validate_povm(&r.povm_b, tol)?.passed)
}
