//! Gram-matrix relaxation of the quantum value and a first-order SDP solver.
//!
//! The relaxation optimizes `Σ M_{x,y}^{a,b} ⟨u_x^a, v_y^b⟩` over vectors with
//! `‖z‖ = 1`, `Σ_a u_x^a = Σ_b v_y^b = z` and `⟨u_x^a, u_x^{a'}⟩ = 0`
//! (likewise for `v`) for `a ≠ a'`. Gram index `0` is `z`, then `u_x^a` at
//! `1 + xK + a`, then `v_y^b` at `1 + NK + yK + b`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::bell::BellFunctional;
use crate::construction::SignTensor;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, psd_project, SymMatrix};

/// `(i, j, v)` with `i ≤ j`, meaning `A_ij = A_ji = v`.
pub type Triplet = (usize, usize, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Constraint {
    #[cfg_attr(feature = "serde", serde(rename = "A"))]
    pub a: Vec<Triplet>,
    pub b: f64,
}

/// Optimize `⟨Obj, G⟩` subject to `⟨A_i, G⟩ = b_i` and `G ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GramProblem {
    pub m: usize,
    pub obj: Vec<Triplet>,
    pub constraints: Vec<Constraint>,
    pub sense: Sense,
}

/// Adds `v` at `(i, j)` and returns canonical sorted triplets with zero
/// entries dropped.
#[derive(Default)]
struct TripletBuilder(BTreeMap<(usize, usize), f64>);

impl TripletBuilder {
    fn add(&mut self, i: usize, j: usize, v: f64) {
        let key = if i <= j { (i, j) } else { (j, i) };
        *self.0.entry(key).or_insert(0.0) += v;
    }

    fn finish(self) -> Vec<Triplet> {
        self.0.into_iter().filter(|(_, v)| *v != 0.0).map(|((i, j), v)| (i, j, v)).collect()
    }
}

/// `⟨A, G⟩ = Σ_ij A_ij G_ij` for a triplet-encoded `A`.
pub fn triplet_dot(t: &[Triplet], g: &SymMatrix) -> f64 {
    t.iter()
        .map(|&(i, j, v)| if i == j { v * g.get(i, i) } else { 2.0 * v * g.get(i, j) })
        .sum()
}

fn triplet_matrix(t: &[Triplet], m: usize) -> SymMatrix {
    let mut out = SymMatrix::zeros(m);
    for &(i, j, v) in t {
        out.set(i, j, out.get(i, j) + v);
    }
    out
}

#[cfg(test)]
fn triplet_inner(p: &[Triplet], q: &[Triplet]) -> f64 {
    // both sorted by (i, j)
    let (mut a, mut b, mut acc) = (0, 0, 0.0);
    while a < p.len() && b < q.len() {
        let (ka, kb) = ((p[a].0, p[a].1), (q[b].0, q[b].1));
        match ka.cmp(&kb) {
            core::cmp::Ordering::Less => a += 1,
            core::cmp::Ordering::Greater => b += 1,
            core::cmp::Ordering::Equal => {
                let w = if ka.0 == ka.1 { 1.0 } else { 2.0 };
                acc += w * p[a].2 * q[b].2;
                a += 1;
                b += 1;
            }
        }
    }
    acc
}

impl GramProblem {
    pub fn objective_matrix(&self) -> SymMatrix {
        triplet_matrix(&self.obj, self.m)
    }

    pub fn objective(&self, g: &SymMatrix) -> f64 {
        triplet_dot(&self.obj, g)
    }

    /// `max_i |⟨A_i, G⟩ − b_i|`.
    pub fn max_violation(&self, g: &SymMatrix) -> f64 {
        self.constraints
            .iter()
            .map(|c| libm::fabs(triplet_dot(&c.a, g) - c.b))
            .fold(0.0, f64::max)
    }

    pub fn with_sense(&self, sense: Sense) -> Self {
        Self { sense, ..self.clone() }
    }

    fn validate(&self) -> Result<()> {
        let bad = |t: &[Triplet]| t.iter().any(|&(i, j, v)| i > j || j >= self.m || !v.is_finite());
        if self.m == 0 || bad(&self.obj) || self.constraints.iter().any(|c| bad(&c.a) || !c.b.is_finite()) {
            return Err(Error::InvalidInput("triplets must satisfy i ≤ j < m with finite values".into()));
        }
        Ok(())
    }
}

pub fn alice_index(k: usize, x: usize, a: usize) -> usize {
    1 + x * k + a
}

pub fn bob_index(n: usize, k: usize, y: usize, b: usize) -> usize {
    1 + n * k + y * k + b
}

/// The relaxation of `M` as a maximization.
pub fn build_op_gram(m: &BellFunctional) -> GramProblem {
    let s = m.scenario();
    let (n, k) = (s.n_inputs, s.n_outputs);
    let size = 1 + 2 * n * k;
    let mut obj = TripletBuilder::default();
    for x in 0..n {
        for y in 0..n {
            for a in 0..k {
                for b in 0..k {
                    let c = m.get(x, y, a, b);
                    if c != 0.0 {
                        obj.add(alice_index(k, x, a), bob_index(n, k, y, b), 0.5 * c);
                    }
                }
            }
        }
    }
    let mut constraints = vec![Constraint {
        a: vec![(0, 0, 1.0)],
        b: 1.0,
    }];
    for party in 0..2 {
        let idx = |x: usize, a: usize| if party == 0 { alice_index(k, x, a) } else { bob_index(n, k, x, a) };
        for x in 0..n {
            let mut sum = TripletBuilder::default();
            sum.add(0, 0, 1.0);
            for a in 0..k {
                sum.add(idx(x, a), 0, -1.0);
                for a2 in a..k {
                    sum.add(idx(x, a), idx(x, a2), 1.0);
                }
            }
            constraints.push(Constraint { a: sum.finish(), b: 0.0 });
            for a in 0..k {
                for a2 in a + 1..k {
                    constraints.push(Constraint {
                        a: vec![(idx(x, a), idx(x, a2), 1.0)],
                        b: 0.0,
                    });
                }
            }
        }
    }
    GramProblem {
        m: size,
        obj: obj.finish(),
        constraints,
        sense: Sense::Max,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SdpSolution {
    /// Objective at the PSD iterate `G`.
    pub value: f64,
    #[cfg_attr(feature = "serde", serde(rename = "G"))]
    pub g: SymMatrix,
    /// `max_i |⟨A_i, G⟩ − b_i|` at the reported `G`.
    pub primal_residual: f64,
    /// `ρ‖Zₖ − Zₖ₋₁‖_F` at the last iteration.
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 50_000,
        }
    }
}

/// Face of the PSD cone containing every feasible point: `G = V H Vᵀ` where
/// the columns of `V` span the common kernel of all PSD constraints with
/// `b = 0`. Without this step the relaxation has no interior point and
/// splitting methods stall.
fn feasible_face(p: &GramProblem) -> Result<Option<DMatrix<f64>>> {
    let mut s = SymMatrix::zeros(p.m);
    let mut any = false;
    for c in p.constraints.iter().filter(|c| c.b == 0.0 && !c.a.is_empty()) {
        let a = triplet_matrix(&c.a, p.m);
        let eig = herm_eig(&a)?;
        if eig.min_value() >= -1e-12 * a.max_abs() {
            s.add_scaled(1.0 / a.max_abs(), &a);
            any = true;
        }
    }
    if !any {
        return Ok(None);
    }
    let eig = herm_eig(&s)?;
    let cutoff = 1e-10 * eig.max_value().max(1.0);
    let keep: Vec<usize> = (0..p.m).filter(|&k| eig.values[k] <= cutoff).collect();
    if keep.len() == p.m {
        return Ok(None);
    }
    Ok(Some(DMatrix::from_fn(p.m, keep.len(), |i, j| eig.vectors.get(i, keep[j]))))
}

fn reduce(a: &SymMatrix, face: &Option<DMatrix<f64>>) -> SymMatrix {
    match face {
        None => a.clone(),
        Some(v) => SymMatrix::from_dmatrix(&(v.transpose() * a.to_dmatrix() * v)),
    }
}

/// Projection onto `{X : ⟨A_i, X⟩ = b_i}` through the Gram system of the
/// row-normalized constraints.
struct AffineProjector {
    rows: DMatrix<f64>,
    rhs: nalgebra::DVector<f64>,
    solver: GramSolve,
}

enum GramSolve {
    None,
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Pseudo(DMatrix<f64>),
}

impl AffineProjector {
    fn new(constraints: &[(SymMatrix, f64)], dim: usize) -> Result<Self> {
        let mut flat: Vec<f64> = Vec::new();
        let mut rhs = Vec::new();
        for (a, b) in constraints {
            let norm = a.frobenius_norm();
            if norm <= 1e-12 {
                if libm::fabs(*b) > 1e-12 {
                    return Err(Error::InvalidInput("constraint reduces to 0 = b with b ≠ 0".into()));
                }
                continue;
            }
            flat.extend(a.as_slice().iter().map(|v| v / norm));
            rhs.push(b / norm);
        }
        let r = rhs.len();
        let rows = DMatrix::from_row_slice(r, dim * dim, &flat);
        let gram = &rows * rows.transpose();
        let solver = if r == 0 {
            GramSolve::None
        } else {
            match gram.clone().cholesky() {
                Some(ch) if ch.l_dirty().diagonal().iter().all(|d| *d > 1e-7) => GramSolve::Cholesky(ch),
                _ => {
                    let eig = nalgebra::SymmetricEigen::new(gram);
                    let cutoff = 1e-10 * eig.eigenvalues.iter().fold(1.0f64, |m, v| m.max(libm::fabs(*v)));
                    let inv = eig.eigenvalues.map(|v| if libm::fabs(v) > cutoff { 1.0 / v } else { 0.0 });
                    GramSolve::Pseudo(&eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose())
                }
            }
        };
        Ok(Self {
            rows,
            rhs: nalgebra::DVector::from_vec(rhs),
            solver,
        })
    }

    fn project(&self, y: &SymMatrix) -> SymMatrix {
        let v = nalgebra::DVector::from_column_slice(y.as_slice());
        let resid = &self.rows * &v - &self.rhs;
        let lambda = match &self.solver {
            GramSolve::None => return y.clone(),
            GramSolve::Cholesky(ch) => ch.solve(&resid),
            GramSolve::Pseudo(p) => p * resid,
        };
        let out = v - self.rows.transpose() * lambda;
        let d = y.dim();
        SymMatrix::from_fn(d, |i, j| 0.5 * (out[i * d + j] + out[j * d + i]))
    }
}

/// ADMM on `max ⟨C, X⟩ s.t. A(X) = b, X = Z, Z ⪰ 0` after restricting to
/// the face found by [`feasible_face`]:
/// `X ← Π_aff(Z − U ± C/ρ)`, `Z ← Π_psd(X + U)`, `U ← U + X − Z`, with
/// `ρ` doubled or halved when one residual dominates the other by 10×.
pub fn solve_sdp(p: &GramProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    p.validate()?;
    let sign = match p.sense {
        Sense::Max => 1.0,
        Sense::Min => -1.0,
    };
    let face = feasible_face(p)?;
    let dim = face.as_ref().map_or(p.m, |v| v.ncols());
    let c = reduce(&triplet_matrix(&p.obj, p.m), &face).scaled(sign);
    let reduced: Vec<(SymMatrix, f64)> = p
        .constraints
        .iter()
        .map(|k| (reduce(&triplet_matrix(&k.a, p.m), &face), k.b))
        .collect();
    let proj = AffineProjector::new(&reduced, dim)?;
    let scale = 1.0 + c.frobenius_norm();
    let mut rho = 1.0;
    let mut z = psd_project(&proj.project(&SymMatrix::zeros(dim)))?;
    let mut u = SymMatrix::zeros(dim);
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        let mut y = &z - &u;
        y.add_scaled(1.0 / rho, &c);
        let x = proj.project(&y);
        let znew = psd_project(&(&x + &u))?;
        let r = &x - &znew;
        let primal = r.frobenius_norm();
        dual = rho * (&znew - &z).frobenius_norm();
        u.add_scaled(1.0, &r);
        z = znew;
        if primal <= opts.tol && dual <= opts.tol * scale {
            converged = true;
            break;
        }
        if iterations % 10 == 0 {
            if primal > 10.0 * dual / scale {
                rho *= 2.0;
                u = u.scaled(0.5);
            } else if dual / scale > 10.0 * primal {
                rho *= 0.5;
                u = u.scaled(2.0);
            }
        }
    }
    let g = match &face {
        None => z,
        Some(v) => SymMatrix::from_dmatrix(&(v * z.to_dmatrix() * v.transpose())),
    };
    Ok(SdpSolution {
        value: p.objective(&g),
        primal_residual: p.max_violation(&g),
        dual_residual: dual,
        iterations,
        converged,
        g,
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OmegaOp {
    pub value: f64,
    pub max: SdpSolution,
    pub min: SdpSolution,
}

/// `max(|max ⟨Obj, G⟩|, |min ⟨Obj, G⟩|)` over the relaxation.
pub fn omega_op(m: &BellFunctional, opts: &SdpOptions) -> Result<OmegaOp> {
    let p = build_op_gram(m);
    let max = solve_sdp(&p, opts)?;
    let min = solve_sdp(&p.with_sense(Sense::Min), opts)?;
    Ok(omega_from(max, min))
}

/// Combines independently solved max and min senses.
pub fn omega_from(max: SdpSolution, min: SdpSolution) -> OmegaOp {
    OmegaOp {
        value: libm::fabs(max.value).max(libm::fabs(min.value)),
        max,
        min,
    }
}

/// Explicit vectors `u_x^a`, `v_y^b` in `ℝ^dim`, indexed `[x][a]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VectorStrategy {
    pub dim: usize,
    pub u: Vec<Vec<Vec<f64>>>,
    pub v: Vec<Vec<Vec<f64>>>,
}

impl VectorStrategy {
    pub fn new(dim: usize, u: Vec<Vec<Vec<f64>>>, v: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let shape_ok = |f: &Vec<Vec<Vec<f64>>>| {
            f.iter().all(|row| row.iter().all(|w| w.len() == dim && w.iter().all(|x| x.is_finite())))
        };
        if !shape_ok(&u) || !shape_ok(&v) {
            return Err(Error::InvalidInput(alloc::format!("vectors must be finite with length {dim}")));
        }
        Ok(Self { dim, u, v })
    }
}

/// `u_x^a = v_x^a = Σ_p ε_{x,a}^p e_p` on the first `n` outcomes; the extra
/// outcome gets the zero vector.
pub fn sign_vectors(signs: &SignTensor) -> VectorStrategy {
    let n = signs.n();
    let fam: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|x| {
            let mut row: Vec<Vec<f64>> = (0..n).map(|a| signs.row(x, a).to_vec()).collect();
            row.push(vec![0.0; n]);
            row
        })
        .collect();
    VectorStrategy {
        dim: n,
        u: fam.clone(),
        v: fam,
    }
}

/// `max_x max_{s ∈ {±1}^K} ‖Σ_a s_a w_x^a‖`, walking sign vectors in Gray
/// code order with `s_0 = +1` fixed.
pub fn map_norm(family: &[Vec<Vec<f64>>], dim: usize) -> f64 {
    let mut best = 0.0f64;
    for row in family {
        let k = row.len();
        if k == 0 {
            continue;
        }
        let mut acc: Vec<f64> = vec![0.0; dim];
        for w in row {
            for (a, b) in acc.iter_mut().zip(w) {
                *a += b;
            }
        }
        let mut signs = vec![1.0f64; k];
        best = best.max(norm2(&acc));
        let steps: u64 = 1u64 << (k - 1);
        for g in 1..steps {
            // bit flipped between Gray codes g-1 and g
            let bit = g.trailing_zeros() as usize + 1;
            signs[bit] = -signs[bit];
            let s2 = 2.0 * signs[bit];
            for (a, b) in acc.iter_mut().zip(&row[bit]) {
                *a += s2 * b;
            }
            best = best.max(norm2(&acc));
        }
    }
    best
}

fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// `max_{s ∈ {±1}^K} sᵀ G s` for a positive semidefinite `K×K` Gram matrix
/// (row-major), by depth-first search over suffix problems solved from the
/// last index down. With `p` the partial sum over assigned indices and
/// `Q_i` the exact optimum over indices `≥ i`, a node at depth `i` is cut
/// when `‖p‖² + 2 Σ_{a ≥ i} |⟨p, w_a⟩| + Q_i` cannot beat the incumbent.
fn max_sign_quadratic(g: &[f64], k: usize) -> f64 {
    struct Search<'a> {
        g: &'a [f64],
        k: usize,
        suffix: Vec<f64>,
        cross: Vec<f64>,
        best: f64,
    }
    impl Search<'_> {
        fn dfs(&mut self, i: usize, val: f64) {
            if i == self.k {
                self.best = self.best.max(val);
                return;
            }
            let slack: f64 = self.cross[i..].iter().map(|c| libm::fabs(*c)).sum();
            if val + self.suffix[i] + 2.0 * slack <= self.best {
                return;
            }
            let first = if self.cross[i] >= 0.0 { 1.0 } else { -1.0 };
            for sign in [first, -first] {
                let next = val + 2.0 * sign * self.cross[i] + self.g[i * self.k + i];
                self.shift(i, sign);
                self.dfs(i + 1, next);
                self.shift(i, -sign);
            }
        }

        fn shift(&mut self, i: usize, sign: f64) {
            let row = &self.g[i * self.k..(i + 1) * self.k];
            for (c, gv) in self.cross.iter_mut().zip(row) {
                *c += sign * gv;
            }
        }
    }
    let mut st = Search {
        g,
        k,
        suffix: vec![0.0; k + 1],
        cross: vec![0.0; k],
        best: 0.0,
    };
    for j in (0..k).rev() {
        // s_j = +1 by the global sign symmetry
        st.cross.iter_mut().for_each(|c| *c = 0.0);
        st.shift(j, 1.0);
        st.best = g[j * k + j] + st.suffix[j + 1];
        st.dfs(j + 1, g[j * k + j]);
        st.suffix[j] = st.best;
    }
    st.suffix[0]
}

/// Same value as [`map_norm`], computed exactly by branch and bound on each
/// input's Gram matrix instead of full enumeration.
pub fn map_norm_exact(family: &[Vec<Vec<f64>>]) -> f64 {
    let mut best = 0.0f64;
    for row in family {
        let k = row.len();
        let g: Vec<f64> = (0..k * k)
            .map(|ab| row[ab / k].iter().zip(&row[ab % k]).map(|(p, q)| p * q).sum())
            .collect();
        best = best.max(libm::sqrt(max_sign_quadratic(&g, k).max(0.0)));
    }
    best
}

/// Default budget on `N · 2^{K−1}` sign vectors.
pub const CERTIFICATE_BUDGET: u128 = 100_000_000;

/// `Σ M ⟨u_x^a, v_y^b⟩ / (‖u‖_map · ‖v‖_map)`.
pub fn vector_certificate_value(m: &BellFunctional, vs: &VectorStrategy, budget: u128) -> Result<f64> {
    check_shape(m, vs)?;
    let s = m.scenario();
    let (n, k) = (s.n_inputs, s.n_outputs);
    let required = (n as u128) << (k.saturating_sub(1) as u32).min(120);
    if k >= 64 || required > budget {
        return Err(Error::BudgetExceeded {
            required: if k >= 64 { u128::MAX } else { required },
            budget,
        });
    }
    certificate_ratio(m, vs, map_norm(&vs.u, vs.dim), map_norm(&vs.v, vs.dim))
}

/// [`vector_certificate_value`] with map norms from [`map_norm_exact`]; no
/// enumeration budget applies.
pub fn vector_certificate_value_exact(m: &BellFunctional, vs: &VectorStrategy) -> Result<f64> {
    check_shape(m, vs)?;
    certificate_ratio(m, vs, map_norm_exact(&vs.u), map_norm_exact(&vs.v))
}

fn check_shape(m: &BellFunctional, vs: &VectorStrategy) -> Result<()> {
    let s = m.scenario();
    let (n, k) = (s.n_inputs, s.n_outputs);
    let shape = |f: &Vec<Vec<Vec<f64>>>| f.len() == n && f.iter().all(|r| r.len() == k);
    if !shape(&vs.u) || !shape(&vs.v) {
        return Err(Error::ScenarioMismatch {
            left_inputs: n,
            left_outputs: k,
            right_inputs: vs.u.len(),
            right_outputs: vs.u.first().map_or(0, |r| r.len()),
        });
    }
    Ok(())
}

fn certificate_ratio(m: &BellFunctional, vs: &VectorStrategy, nu: f64, nv: f64) -> Result<f64> {
    let s = m.scenario();
    let (n, k) = (s.n_inputs, s.n_outputs);
    let mut pairing = 0.0;
    for x in 0..n {
        for y in 0..n {
            for a in 0..k {
                for b in 0..k {
                    let c = m.get(x, y, a, b);
                    if c != 0.0 {
                        let ip: f64 = vs.u[x][a].iter().zip(&vs.v[y][b]).map(|(p, q)| p * q).sum();
                        pairing += c * ip;
                    }
                }
            }
        }
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::UndefinedRatio(0.0));
    }
    Ok(pairing / (nu * nv))
}

/// Smallest eigenvalue of a Gram candidate, for reporting.
pub fn min_eigenvalue(g: &SymMatrix) -> Result<f64> {
    Ok(herm_eig(g)?.min_value())
}
