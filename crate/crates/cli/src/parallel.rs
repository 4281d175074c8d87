//! Rayon drivers for the embarrassingly parallel parts of the core crate.
//! Every function here returns exactly what its sequential core counterpart
//! returns, whatever the pool size.

use bellforge_core::bell::BellFunctional;
use bellforge_core::classical::{
    classical_scan, classical_value_local, enumeration_cost, finish_scan, strategy_count, ClassicalPartial,
    ClassicalResult,
};
use bellforge_core::quantum::{best_of, seesaw_restart, SeesawConfig, SeesawResult};
use bellforge_core::sdp::{build_op_gram, omega_from, solve_sdp, OmegaOp, SdpOptions, Sense};
use bellforge_core::{Error, Result};
use rayon::prelude::*;

const CHUNK: u64 = 1 << 12;

/// Exact classical value with the Alice strategies split into chunks.
pub fn classical_exact(m: &BellFunctional, budget: u128) -> Result<ClassicalResult> {
    let cost = enumeration_cost(m);
    if cost > budget {
        return Err(Error::BudgetExceeded { required: cost, budget });
    }
    let count = strategy_count(m) as u64;
    let partial = (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| classical_scan(m, c * CHUNK..((c + 1) * CHUNK).min(count)))
        .reduce(|| ClassicalPartial::EMPTY, ClassicalPartial::merge);
    Ok(finish_scan(m, partial))
}

/// Exact value within `budget`, else local search with `restarts` starts.
pub fn classical_auto(m: &BellFunctional, budget: u128, restarts: usize, seed: u64) -> ClassicalResult {
    match classical_exact(m, budget) {
        Ok(r) => r,
        Err(_) => classical_value_local(m, restarts, seed),
    }
}

/// Both senses of the relaxation solved concurrently.
pub fn omega_op(m: &BellFunctional, opts: &SdpOptions) -> Result<OmegaOp> {
    let p = build_op_gram(m);
    let q = p.with_sense(Sense::Min);
    let (max, min) = rayon::join(|| solve_sdp(&p, opts), || solve_sdp(&q, opts));
    Ok(omega_from(max?, min?))
}

/// See-saw restarts run concurrently, reduced in restart order.
pub fn seesaw(m: &BellFunctional, cfg: &SeesawConfig) -> Result<SeesawResult> {
    let runs: Vec<Result<SeesawResult>> = (0..cfg.restarts.max(1))
        .into_par_iter()
        .map(|r| seesaw_restart(m, cfg, r))
        .collect();
    let mut best: Option<SeesawResult> = None;
    for r in runs {
        let r = r?;
        best = Some(match best {
            None => r,
            Some(b) => best_of(b, r),
        });
    }
    Ok(best.expect("at least one restart"))
}
