//! Seeded parameter sweeps over the construction.
//!
//! Seeds are derived hierarchically: the row with seed index `i` at size `n`
//! uses `derive_seed(root, [n, i])`, so every row can be replayed on its own
//! with `construct --n n --seed <row seed>` and no row depends on the pool
//! size or on completion order.

use std::collections::BTreeMap;
use std::sync::mpsc;
use std::time::Instant;

use bellforge_core::construction::{build_bell, construct_report_with, gen_signs, ConstructOptions};
use bellforge_core::rng::derive_seed;
use bellforge_core::sdp::SdpOptions;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::parallel;

/// CSV header, in contract order.
pub const COLUMNS: [&str; 11] = [
    "n",
    "seed",
    "K2",
    "classical_value",
    "classical_exact",
    "quantum_lb",
    "ratio",
    "ratio_over_sqrtn_logn",
    "omega_op",
    "wall_time_ms",
    "error",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub n_list: Vec<usize>,
    pub seeds: usize,
    pub alpha: f64,
    pub budget: u64,
    pub restarts: usize,
    pub root_seed: u64,
    pub omega: bool,
    pub sdp_tol: f64,
    /// Worker threads; 0 lets rayon decide.
    #[serde(skip)]
    pub jobs: usize,
}

impl SweepSpec {
    /// Checks the spec and sorts `n_list` (duplicates removed).
    pub fn normalized(mut self) -> CliResult<Self> {
        if self.n_list.is_empty() {
            return Err(CliError::Usage("n list must be nonempty".into()));
        }
        if self.n_list.contains(&0) {
            return Err(CliError::Usage("n must be at least 1".into()));
        }
        if self.seeds == 0 {
            return Err(CliError::Usage("at least one seed per n is required".into()));
        }
        if self.budget == 0 || self.restarts == 0 {
            return Err(CliError::Usage("budgets must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(CliError::Usage(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.sdp_tol > 0.0) {
            return Err(CliError::Usage("tolerance must be positive".into()));
        }
        self.n_list.sort_unstable();
        self.n_list.dedup();
        Ok(self)
    }
}

pub fn row_seed(root: u64, n: usize, index: usize) -> u64 {
    derive_seed(root, &[n as u64, index as u64])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub seed: u64,
    #[serde(rename = "K2")]
    pub k2: Option<f64>,
    pub classical_value: Option<f64>,
    pub classical_exact: Option<bool>,
    pub quantum_lb: Option<f64>,
    pub ratio: Option<f64>,
    pub ratio_over_sqrtn_logn: Option<f64>,
    pub omega_op: Option<f64>,
    pub wall_time_ms: u64,
    pub error: Option<String>,
}

fn error_text(e: &CliError) -> String {
    format!("{}: {e}", e.kind())
}

pub fn compute_row(spec: &SweepSpec, n: usize, seed: u64) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        n,
        seed,
        k2: None,
        classical_value: None,
        classical_exact: None,
        quantum_lb: None,
        ratio: None,
        ratio_over_sqrtn_logn: None,
        omega_op: None,
        wall_time_ms: 0,
        error: None,
    };
    let opts = ConstructOptions {
        classical_budget: spec.budget as u128,
        local_restarts: spec.restarts,
        ..ConstructOptions::default()
    };
    let budget = spec.budget as u128;
    let report = construct_report_with(n, seed, spec.alpha, &opts, |m, s| {
        Ok(parallel::classical_auto(m, budget, spec.restarts, derive_seed(s, &[n as u64, 1])))
    });
    match report {
        Ok(r) => {
            row.k2 = Some(r.k2);
            row.classical_value = Some(r.classical.value);
            row.classical_exact = Some(r.classical.exact);
            row.quantum_lb = Some(r.quantum_lb);
            row.ratio = Some(r.ratio);
            if n >= 2 {
                let nf = n as f64;
                row.ratio_over_sqrtn_logn = Some(r.ratio / (nf.sqrt() / nf.ln()));
            }
            if spec.omega {
                let omega = gen_signs(n, r.seed_used, opts.distribution).and_then(|signs| {
                    let m = build_bell(&signs);
                    parallel::omega_op(
                        &m,
                        &SdpOptions {
                            tol: spec.sdp_tol,
                            ..SdpOptions::default()
                        },
                    )
                });
                match omega {
                    Ok(o) => row.omega_op = Some(o.value),
                    Err(e) => row.error = Some(error_text(&e.into())),
                }
            }
        }
        Err(e) => row.error = Some(error_text(&e.into())),
    }
    row.wall_time_ms = start.elapsed().as_millis() as u64;
    row
}

/// Runs every `(n, seed index)` row on a pool of `spec.jobs` workers and
/// hands finished rows to `sink` in `(n, seed index)` order as soon as all
/// earlier rows are done.
pub fn run<F>(spec: &SweepSpec, mut sink: F) -> CliResult<Vec<SweepRow>>
where
    F: FnMut(&SweepRow) -> CliResult<()>,
{
    let tasks: Vec<(usize, u64)> = spec
        .n_list
        .iter()
        .flat_map(|&n| (0..spec.seeds).map(move |i| (n, row_seed(spec.root_seed, n, i))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (tx, rx) = mpsc::channel();
    let mut rows = Vec::with_capacity(tasks.len());
    std::thread::scope(|s| {
        s.spawn(|| {
            pool.install(|| {
                tasks.par_iter().enumerate().for_each_with(tx, |tx, (i, &(n, seed))| {
                    let _ = tx.send((i, compute_row(spec, n, seed)));
                })
            })
        });
        let mut pending = BTreeMap::new();
        for (i, row) in rx {
            pending.insert(i, row);
            while let Some(r) = pending.remove(&rows.len()) {
                sink(&r)?;
                rows.push(r);
            }
        }
        Ok::<(), CliError>(())
    })?;
    Ok(rows)
}
