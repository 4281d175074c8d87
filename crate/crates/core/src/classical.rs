//! Classical (local hidden variable) values.
//!
//! The local polytope's extreme points are pairs of deterministic
//! strategies, so the sup and inf of `⟨M, P⟩` over it are attained there.
//! Exact evaluation enumerates Alice's `K^N` strategies; for each, Bob's best
//! response decouples per input: with `c_y(b) = Σ_x M_{x,y}^{a(x),b}` the
//! maximum is `Σ_y max_b c_y(b)` and the minimum `Σ_y min_b c_y(b)`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use crate::bell::{BellFunctional, DeterministicStrategy};
use crate::error::{Error, Result};
use crate::rng;

/// Default cap on `strategies · N · K` inner evaluations.
pub const DEFAULT_BUDGET: u128 = 100_000_000;

/// Restarts used when the exact solver is out of budget.
pub const FALLBACK_RESTARTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassicalResult {
    /// `max(|max_value|, |min_value|)`.
    pub value: f64,
    pub max_value: f64,
    pub min_value: f64,
    /// Strategy pair attaining `max_value`.
    pub argmax: (DeterministicStrategy, DeterministicStrategy),
    /// Strategy pair attaining `min_value`.
    pub argmin: (DeterministicStrategy, DeterministicStrategy),
    pub exact: bool,
}

/// Coefficients re-laid out as `[x][a][y][b]` so that Alice's choice for
/// input `x` selects one contiguous `N·K` slab.
struct Slabs {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl Slabs {
    fn new(m: &BellFunctional) -> Self {
        let s = m.scenario();
        let (n, k) = (s.n_inputs, s.n_outputs);
        let mut data = vec![0.0; s.len()];
        for x in 0..n {
            for a in 0..k {
                for y in 0..n {
                    for b in 0..k {
                        data[((x * k + a) * n + y) * k + b] = m.get(x, y, a, b);
                    }
                }
            }
        }
        Self { n, k, data }
    }

    #[inline]
    fn slab(&self, x: usize, a: usize) -> &[f64] {
        let w = self.n * self.k;
        let start = (x * self.k + a) * w;
        &self.data[start..start + w]
    }
}

fn checked_pow(base: u128, exp: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Number of Alice strategies `K^N`, saturating.
pub fn strategy_count(m: &BellFunctional) -> u128 {
    let s = m.scenario();
    checked_pow(s.n_outputs as u128, s.n_inputs).unwrap_or(u128::MAX)
}

/// Inner evaluations needed by [`classical_value_exact`].
pub fn enumeration_cost(m: &BellFunctional) -> u128 {
    let s = m.scenario();
    strategy_count(m).saturating_mul((s.n_inputs * s.n_outputs) as u128)
}

/// Inner evaluations needed by [`epsilon_norm_exact`].
pub fn epsilon_enumeration_cost(m: &BellFunctional) -> u128 {
    let s = m.scenario();
    checked_pow(2 * s.n_outputs as u128, s.n_inputs)
        .map(|c| c / 2)
        .unwrap_or(u128::MAX)
        .saturating_mul((s.n_inputs * s.n_outputs) as u128)
}

/// Best values found over a block of Alice strategies, with the lowest
/// strategy index attaining each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalPartial {
    pub max: (f64, u64),
    pub min: (f64, u64),
}

impl ClassicalPartial {
    pub const EMPTY: Self = Self {
        max: (f64::NEG_INFINITY, u64::MAX),
        min: (f64::INFINITY, u64::MAX),
    };

    /// Associative, commutative reduction; ties go to the lower index.
    pub fn merge(self, other: Self) -> Self {
        let max = if other.max.0 > self.max.0 || (other.max.0 == self.max.0 && other.max.1 < self.max.1) {
            other.max
        } else {
            self.max
        };
        let min = if other.min.0 < self.min.0 || (other.min.0 == self.min.0 && other.min.1 < self.min.1) {
            other.min
        } else {
            self.min
        };
        Self { max, min }
    }
}

/// Mixed-radix odometer over per-input digits with a cached partial sum of
/// the slabs for inputs `1..N`, rebuilt whenever a higher digit changes.
/// Each inner value is therefore a fresh sum in a fixed order, so results do
/// not depend on how the index range is split.
struct Odometer<'a> {
    slabs: &'a Slabs,
    radix: usize,
    digits: Vec<usize>,
    base: Vec<f64>,
    current: Vec<f64>,
    select: fn(usize, usize) -> (usize, f64),
}

impl<'a> Odometer<'a> {
    fn new(slabs: &'a Slabs, radix: usize, start: u64, select: fn(usize, usize) -> (usize, f64)) -> Self {
        let mut digits = vec![0; slabs.n];
        let mut rem = start;
        for d in digits.iter_mut() {
            *d = (rem % radix as u64) as usize;
            rem /= radix as u64;
        }
        let w = slabs.n * slabs.k;
        let mut o = Self {
            slabs,
            radix,
            digits,
            base: vec![0.0; w],
            current: vec![0.0; w],
            select,
        };
        o.rebuild_base();
        o.refresh_current();
        o
    }

    fn add_digit(&self, x: usize, out: &mut [f64]) {
        let (a, sign) = (self.select)(self.digits[x], self.slabs.k);
        for (o, v) in out.iter_mut().zip(self.slabs.slab(x, a)) {
            *o += sign * v;
        }
    }

    fn rebuild_base(&mut self) {
        let mut base = core::mem::take(&mut self.base);
        base.iter_mut().for_each(|v| *v = 0.0);
        for x in (1..self.slabs.n).rev() {
            self.add_digit(x, &mut base);
        }
        self.base = base;
    }

    fn refresh_current(&mut self) {
        let mut cur = core::mem::take(&mut self.current);
        cur.copy_from_slice(&self.base);
        self.add_digit(0, &mut cur);
        self.current = cur;
    }

    fn advance(&mut self) {
        let mut x = 0;
        loop {
            self.digits[x] += 1;
            if self.digits[x] < self.radix {
                break;
            }
            self.digits[x] = 0;
            x += 1;
            if x == self.digits.len() {
                break;
            }
        }
        if x > 0 {
            self.rebuild_base();
        }
        self.refresh_current();
    }
}

fn plain_select(digit: usize, _k: usize) -> (usize, f64) {
    (digit, 1.0)
}

fn signed_select(digit: usize, k: usize) -> (usize, f64) {
    if digit < k {
        (digit, 1.0)
    } else {
        (digit - k, -1.0)
    }
}

/// Scans Alice strategies with indices in `range` (digit of input `x` is
/// `(index / K^x) mod K`).
pub fn classical_scan(m: &BellFunctional, range: Range<u64>) -> ClassicalPartial {
    let slabs = Slabs::new(m);
    scan_with(&slabs, range)
}

fn scan_with(slabs: &Slabs, range: Range<u64>) -> ClassicalPartial {
    let mut acc = ClassicalPartial::EMPTY;
    if range.is_empty() {
        return acc;
    }
    let (n, k) = (slabs.n, slabs.k);
    let mut odo = Odometer::new(slabs, k, range.start, plain_select);
    for idx in range.clone() {
        let mut hi = 0.0;
        let mut lo = 0.0;
        for y in 0..n {
            let row = &odo.current[y * k..(y + 1) * k];
            let (mut rmax, mut rmin) = (row[0], row[0]);
            for &v in &row[1..] {
                rmax = rmax.max(v);
                rmin = rmin.min(v);
            }
            hi += rmax;
            lo += rmin;
        }
        if hi > acc.max.0 {
            acc.max = (hi, idx);
        }
        if lo < acc.min.0 {
            acc.min = (lo, idx);
        }
        if idx + 1 < range.end {
            odo.advance();
        }
    }
    acc
}

fn alice_from_index(index: u64, n: usize, k: usize) -> DeterministicStrategy {
    let mut rem = index;
    let choice = (0..n)
        .map(|_| {
            let d = (rem % k as u64) as usize;
            rem /= k as u64;
            d
        })
        .collect();
    DeterministicStrategy { choice }
}

/// Bob's per-input best response; the lowest output index wins ties.
fn bob_response(m: &BellFunctional, alice: &DeterministicStrategy, maximize: bool) -> DeterministicStrategy {
    let s = m.scenario();
    let choice = (0..s.n_inputs)
        .map(|y| {
            let mut best = 0;
            let mut best_v = f64::NAN;
            for b in 0..s.n_outputs {
                let v: f64 = alice.choice.iter().enumerate().map(|(x, &a)| m.get(x, y, a, b)).sum();
                let better = if maximize { v > best_v } else { v < best_v };
                if b == 0 || better {
                    best = b;
                    best_v = v;
                }
            }
            best
        })
        .collect();
    DeterministicStrategy { choice }
}

/// `⟨M, P⟩` at a deterministic pair.
pub fn strategy_value(m: &BellFunctional, a: &DeterministicStrategy, b: &DeterministicStrategy) -> f64 {
    let mut v = 0.0;
    for (x, &ax) in a.choice.iter().enumerate() {
        for (y, &by) in b.choice.iter().enumerate() {
            v += m.get(x, y, ax, by);
        }
    }
    v
}

/// Turns a full-range scan into a [`ClassicalResult`].
pub fn finish_scan(m: &BellFunctional, partial: ClassicalPartial) -> ClassicalResult {
    let s = m.scenario();
    let a_max = alice_from_index(partial.max.1, s.n_inputs, s.n_outputs);
    let a_min = alice_from_index(partial.min.1, s.n_inputs, s.n_outputs);
    let b_max = bob_response(m, &a_max, true);
    let b_min = bob_response(m, &a_min, false);
    ClassicalResult {
        value: libm::fabs(partial.max.0).max(libm::fabs(partial.min.0)),
        max_value: partial.max.0,
        min_value: partial.min.0,
        argmax: (a_max, b_max),
        argmin: (a_min, b_min),
        exact: true,
    }
}

/// Exact sup/inf of `⟨M, P⟩` over the local polytope.
pub fn classical_value_exact(m: &BellFunctional, budget: u128) -> Result<ClassicalResult> {
    let cost = enumeration_cost(m);
    if cost > budget {
        return Err(Error::BudgetExceeded { required: cost, budget });
    }
    let count = strategy_count(m) as u64;
    Ok(finish_scan(m, classical_scan(m, 0..count)))
}

/// Alternating best-response ascent from random starts. Never exceeds the
/// exact value; deterministic for a given seed.
pub fn classical_value_local(m: &BellFunctional, restarts: usize, seed: u64) -> ClassicalResult {
    let s = m.scenario();
    let (n, k) = (s.n_inputs, s.n_outputs);
    let swapped = m.swap_parties();
    let mut best_max: Option<(f64, DeterministicStrategy, DeterministicStrategy)> = None;
    let mut best_min: Option<(f64, DeterministicStrategy, DeterministicStrategy)> = None;
    for r in 0..restarts.max(1) {
        let mut g = rng::rng_from(rng::derive_seed(seed, &[r as u64]));
        let start = DeterministicStrategy {
            choice: (0..n).map(|_| rng::below(&mut g, k)).collect(),
        };
        for maximize in [true, false] {
            let mut alice = start.clone();
            let mut bob = bob_response(m, &alice, maximize);
            let mut value = strategy_value(m, &alice, &bob);
            loop {
                let next_alice = bob_response(&swapped, &bob, maximize);
                let next_bob = bob_response(m, &next_alice, maximize);
                let next_value = strategy_value(m, &next_alice, &next_bob);
                let improved = if maximize { next_value > value } else { next_value < value };
                if !improved {
                    break;
                }
                alice = next_alice;
                bob = next_bob;
                value = next_value;
            }
            let slot = if maximize { &mut best_max } else { &mut best_min };
            let replace = match slot {
                None => true,
                Some((v, _, _)) => {
                    if maximize {
                        value > *v
                    } else {
                        value < *v
                    }
                }
            };
            if replace {
                *slot = Some((value, alice, bob));
            }
        }
    }
    let (max_value, a_max, b_max) = best_max.expect("at least one restart");
    let (min_value, a_min, b_min) = best_min.expect("at least one restart");
    ClassicalResult {
        value: libm::fabs(max_value).max(libm::fabs(min_value)),
        max_value,
        min_value,
        argmax: (a_max, b_max),
        argmin: (a_min, b_min),
        exact: false,
    }
}

/// Exact value when within `budget`, local search otherwise.
pub fn classical_value_auto(m: &BellFunctional, budget: u128, seed: u64) -> ClassicalResult {
    classical_value_exact(m, budget).unwrap_or_else(|_| classical_value_local(m, FALLBACK_RESTARTS, seed))
}

/// Number of signed Alice extreme points scanned by [`epsilon_norm_exact`]
/// (the sign of input 0 is fixed by the global `±` symmetry).
pub fn epsilon_point_count(m: &BellFunctional) -> u128 {
    let s = m.scenario();
    checked_pow(2 * s.n_outputs as u128, s.n_inputs)
        .map(|c| c / 2)
        .unwrap_or(u128::MAX)
}

/// Scans signed Alice extreme points `index ∈ range` and returns the best
/// `Σ_y max_b |c_y(b)|`.
pub fn epsilon_scan(m: &BellFunctional, range: Range<u64>) -> f64 {
    let slabs = Slabs::new(m);
    epsilon_scan_with(&slabs, range)
}

fn epsilon_scan_with(slabs: &Slabs, range: Range<u64>) -> f64 {
    let (n, k) = (slabs.n, slabs.k);
    let mut best = 0.0f64;
    if range.is_empty() {
        return best;
    }
    // Input 0 ranges over K unsigned digits; the others over 2K signed ones.
    // Index layout: idx = d0 + K·(d1 + 2K·(d2 + ...)).
    let to_odometer = |idx: u64| -> u64 {
        let d0 = idx % k as u64;
        let rest = idx / k as u64;
        d0 + 2 * k as u64 * rest
    };
    let radix = 2 * k;
    let mut odo = Odometer::new(slabs, radix, to_odometer(range.start), signed_select);
    for idx in range.clone() {
        let mut total = 0.0;
        for y in 0..n {
            let row = &odo.current[y * k..(y + 1) * k];
            total += row.iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
        }
        best = best.max(total);
        if idx + 1 < range.end {
            odo.advance();
            if odo.digits[0] >= k {
                // skip the negated half for input 0
                odo.digits[0] = radix - 1;
                odo.advance();
            }
        }
    }
    best
}

/// Injective tensor norm of `M` in `ℓ₁^N(ℓ_∞^K) ⊗_ε ℓ₁^N(ℓ_∞^K)`, by
/// enumeration of signed extreme points of the dual ball.
pub fn epsilon_norm_exact(m: &BellFunctional, budget: u128) -> Result<f64> {
    let cost = epsilon_enumeration_cost(m);
    if cost > budget {
        return Err(Error::BudgetExceeded { required: cost, budget });
    }
    let count = epsilon_point_count(m) as u64;
    Ok(epsilon_scan(m, 0..count))
}
