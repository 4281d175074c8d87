//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are still evaluated and printed as
//! FAIL; they do not change the exit status. See the README for why they
//! cannot pass at desk scale.

use std::time::{Duration, Instant};

use bellforge::parallel;
use bellforge_core::bell::{BellFunctional, Scenario};
use bellforge_core::classical::{classical_value_exact, classical_value_local, DEFAULT_BUDGET};
use bellforge_core::construction::{
    build_bell, build_povms, construct_report, explicit_quantum_value, gen_signs, row_spectral_bound,
    ConstructOptions, SignDistribution, DEFAULT_ALPHA_TOP,
};
use bellforge_core::entanglement::{
    dyadic_decompose, extract_max_entangled, f_alpha, polarization_select,
};
use bellforge_core::linalg::{inv_sqrt_psd, SymMatrix};
use bellforge_core::povm::{validate_povm, PovmFamily};
use bellforge_core::quantum::SeesawConfig;
use bellforge_core::rng::{self, Rng};
use bellforge_core::sdp::{sign_vectors, vector_certificate_value_exact, SdpOptions};
use bellforge_core::state::{build_state, SchmidtState, StateProfile};

const KNOWN_FAILURES: &[u32] = &[5];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Quantum/classical ratios seen anywhere in the run, with their ceilings.
#[derive(Default)]
struct Ceiling {
    seen: Vec<(String, f64, f64)>,
}

impl Ceiling {
    fn record(&mut self, label: impl Into<String>, ratio: f64, n: usize, k: usize, d: usize) {
        self.seen.push((label.into(), ratio, 4.0 * n.min(k).min(d) as f64));
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn c1_povm_validity() -> Outcome {
    let mut worst_attempts = 0;
    let mut draws = 0;
    let mut failures = 0;
    for n in [2usize, 4, 8, 16, 32] {
        for seed in 0..20u64 {
            let mut accepted = false;
            for attempt in 0..4u64 {
                let signs = gen_signs(n, seed + attempt, SignDistribution::Bernoulli).unwrap();
                let k2 = row_spectral_bound(&signs);
                let Ok(povm) = build_povms(&signs, 2.0 * k2 * k2) else { continue };
                if validate_povm(&povm, 1e-9).unwrap().passed {
                    worst_attempts = worst_attempts.max(attempt);
                    accepted = true;
                    break;
                }
            }
            draws += 1;
            failures += usize::from(!accepted);
        }
    }
    outcome(
        failures == 0 && worst_attempts <= 3,
        format!("{draws} draws, {failures} without an accepted POVM, max retries {worst_attempts}"),
    )
}

/// `⟨φ|Σ M E⊗E|φ⟩` by direct summation over `(x, y, a, b, i, j)`.
fn direct_contraction(m: &BellFunctional, povm: &PovmFamily, alphas: &[f64]) -> f64 {
    let s = m.scenario();
    let d = alphas.len();
    let weighted: Vec<Vec<Vec<f64>>> = povm
        .elements()
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| (0..d * d).map(|ij| e.get(ij / d, ij % d) * alphas[ij / d] * alphas[ij % d]).collect())
                .collect()
        })
        .collect();
    let mut total = 0.0;
    for x in 0..s.n_inputs {
        for y in 0..s.n_inputs {
            for a in 0..s.n_outputs {
                for b in 0..s.n_outputs {
                    let c = m.get(x, y, a, b);
                    if c == 0.0 {
                        continue;
                    }
                    let f = povm.element(y, b);
                    let mut t = 0.0;
                    for i in 0..d {
                        for j in 0..d {
                            t += weighted[x][a][i * d + j] * f.get(i, j);
                        }
                    }
                    total += c * t;
                }
            }
        }
    }
    total
}

fn c2_step3_identity() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut violations = 0;
    for n in 1..=8usize {
        let state = build_state(&StateProfile::AlphaTop {
            alpha: DEFAULT_ALPHA_TOP,
            n,
        })
        .unwrap();
        let alphas = state.alphas();
        for seed in 0..10u64 {
            let signs = gen_signs(n, seed, SignDistribution::Bernoulli).unwrap();
            let k2 = row_spectral_bound(&signs);
            let k = 2.0 * k2 * k2;
            let povm = build_povms(&signs, k).unwrap();
            let m = build_bell(&signs);
            let terms = explicit_quantum_value(&m, &povm, &state).unwrap();
            let direct = direct_contraction(&m, &povm, alphas);
            worst_rel = worst_rel.max((terms.total - direct).abs() / direct.abs().max(f64::MIN_POSITIVE));
            let bound = 2.0 / (k * k) * alphas[0] * alphas[1..].iter().sum::<f64>();
            if terms.term_i < -1e-12 || terms.term_iii < -1e-12 || terms.term_ii < bound - 1e-12 {
                violations += 1;
            }
        }
    }
    outcome(
        worst_rel <= 1e-9 && violations == 0,
        format!("worst relative gap {worst_rel:.2e}, sign/bound violations {violations}"),
    )
}

fn c3_classical_oracle() -> Outcome {
    let mut g = rng::rng_from(3);
    let (mut equal, mut exceed) = (0, 0);
    for i in 0..100u64 {
        let n = 1 + rng::below(&mut g, 4);
        let k = 1 + rng::below(&mut g, 4);
        let m = BellFunctional::from_fn(Scenario::new(n, k).unwrap(), |_, _, _, _| rng::gaussian(&mut g));
        let exact = classical_value_exact(&m, DEFAULT_BUDGET).unwrap();
        let local = classical_value_local(&m, 50, i);
        let tol = 1e-12 * exact.value.max(1.0);
        if (local.value - exact.value).abs() <= tol {
            equal += 1;
        }
        if local.max_value > exact.max_value + tol || local.min_value < exact.min_value - tol {
            exceed += 1;
        }
    }
    outcome(
        equal >= 95 && exceed == 0,
        format!("{equal}/100 equal, {exceed} exceed the exact value"),
    )
}

fn c4_chsh(ceiling: &mut Ceiling) -> Outcome {
    let m = BellFunctional::chsh_game();
    let classical = parallel::classical_exact(&m, DEFAULT_BUDGET).unwrap();
    let seesaw = parallel::seesaw(&m, &SeesawConfig::free(2, 0)).unwrap();
    let omega = parallel::omega_op(&m, &SdpOptions::default()).unwrap();
    let (c, q, w) = (classical.value, seesaw.value, omega.value);
    ceiling.record("CHSH see-saw", q / c, 2, 2, 2);
    let pass = c == 0.75 && q >= 0.853553 - 1e-4 && (w - 0.853553).abs() <= 1e-3 && c <= q && q <= w;
    outcome(pass, format!("classical {c}, see-saw {q:.9}, omega_op {w:.9}"))
}

fn c5_violation_growth(ceiling: &mut Ceiling) -> Outcome {
    let sizes = [3usize, 4, 5, 6];
    let opts = ConstructOptions::default();
    let mut ratios = vec![Vec::new(); sizes.len()];
    let mut monotone = 0;
    let mut inexact = 0;
    for seed in 0..20u64 {
        let mut row = Vec::new();
        for (i, &n) in sizes.iter().enumerate() {
            let r = construct_report(n, seed, DEFAULT_ALPHA_TOP, &opts).unwrap();
            inexact += usize::from(!r.classical.exact);
            ceiling.record(format!("construction n={n} seed={seed}"), r.ratio, n, n + 1, n + 1);
            ratios[i].push(r.ratio);
            row.push(r.ratio);
        }
        monotone += usize::from(row.windows(2).all(|w| w[1] >= w[0]));
    }
    let meds: Vec<f64> = ratios.into_iter().map(median).collect();
    let growth = meds[3] / meds[0];
    outcome(
        inexact == 0 && monotone >= 14 && growth >= 1.25,
        format!(
            "{monotone}/20 monotone sweeps; medians n=3..6: {:.4} {:.4} {:.4} {:.4}; n=6/n=3 = {growth:.3}",
            meds[0], meds[1], meds[2], meds[3]
        ),
    )
}

fn c6_omega_growth(ceiling: &mut Ceiling) -> Outcome {
    let cert = |n: usize| {
        median(
            (0..21u64)
                .map(|seed| {
                    let s = gen_signs(n, seed, SignDistribution::Bernoulli).unwrap();
                    vector_certificate_value_exact(&build_bell(&s), &sign_vectors(&s)).unwrap()
                })
                .collect(),
        )
    };
    let meds: Vec<f64> = [4usize, 8, 16, 32].iter().map(|&n| cert(n)).collect();
    let growth: Vec<f64> = meds.windows(2).map(|w| w[1] / w[0]).collect();
    let mut worst_gap = f64::INFINITY;
    for seed in 0..5u64 {
        let s = gen_signs(3, seed, SignDistribution::Bernoulli).unwrap();
        let m = build_bell(&s);
        let q = parallel::seesaw(&m, &SeesawConfig::free(4, seed)).unwrap();
        let w = parallel::omega_op(&m, &SdpOptions::default()).unwrap();
        let c = classical_value_exact(&m, DEFAULT_BUDGET).unwrap();
        ceiling.record(format!("M~ n=3 seed={seed} see-saw"), q.value.abs() / c.value, 3, 4, 4);
        worst_gap = worst_gap.min(w.value - (q.value - 1e-4));
    }
    outcome(
        growth.iter().all(|&g| g >= 1.5) && worst_gap >= 0.0,
        format!(
            "median certificate n=4,8,16,32: {:.3} {:.3} {:.3} {:.3}; ratios {:.3} {:.3} {:.3}; min omega_op - (see-saw - 1e-4) at n=3: {worst_gap:.2e}",
            meds[0], meds[1], meds[2], meds[3], growth[0], growth[1], growth[2]
        ),
    )
}

fn c7_entropy() -> Outcome {
    let mut worst = 0.0f64;
    for n in 1..=64usize {
        let nf = n as f64;
        worst = worst
            .max(f_alpha(n, 1.0).abs())
            .max((f_alpha(n, 0.0) - nf.log2()).abs())
            .max((f_alpha(n, 1.0 / (nf + 1.0).sqrt()) - (nf + 1.0).log2()).abs());
    }
    outcome(worst <= 1e-12, format!("worst deviation {worst:.2e} over n = 1..64"))
}

fn random_sorted_unit(n: usize, g: &mut Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng::gaussian(g).abs()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `k` with `2^{k−1} − 1 ≤ i ≤ 2^k − 2`.
fn block_of(i: usize) -> u32 {
    usize::BITS - (i + 1).leading_zeros()
}

fn c8_dyadic() -> Outcome {
    let mut g = rng::rng_from(8);
    let (mut worst_rec, mut over_bound, mut split) = (0.0f64, 0, 0);
    for _ in 0..1000 {
        let n = 2 + rng::below(&mut g, 4095);
        let v = random_sorted_unit(n, &mut g);
        let dec = dyadic_decompose(&v).unwrap();
        let mut rec = vec![0.0; n];
        for t in &dec.terms {
            let w = t.beta / (t.indices.len() as f64).sqrt();
            t.indices.iter().for_each(|&i| rec[i] += w);
            let k = block_of(t.indices[0]);
            split += usize::from(t.indices.iter().any(|&i| block_of(i) != k));
        }
        worst_rec = rec.iter().zip(&v).fold(worst_rec, |m, (a, b)| m.max((a - b).abs()));
        let beta_sum: f64 = dec.terms.iter().map(|t| t.beta).sum();
        over_bound += usize::from(beta_sum > 2.0 * (n as f64).log2().sqrt());
    }
    outcome(
        worst_rec <= 1e-12 && over_bound == 0 && split == 0,
        format!("max reconstruction error {worst_rec:.2e}, {over_bound} above 2√log₂n, {split} terms across blocks"),
    )
}

fn random_povm_family(n: usize, k: usize, d: usize, g: &mut Rng) -> PovmFamily {
    let rows = (0..n)
        .map(|_| {
            let raw: Vec<SymMatrix> = (0..k)
                .map(|_| {
                    let v: Vec<f64> = (0..d).map(|_| rng::gaussian(g)).collect();
                    let mut e = SymMatrix::outer(&v, 1.0);
                    e.add_scaled(0.05, &SymMatrix::identity(d));
                    e
                })
                .collect();
            let mut sum = SymMatrix::zeros(d);
            raw.iter().for_each(|e| sum.add_scaled(1.0, e));
            let t = inv_sqrt_psd(&sum, 1e-12).unwrap();
            let t = bellforge_core::linalg::Matrix::from_sym(&t);
            raw.iter().map(|e| e.congruence(&t)).collect()
        })
        .collect();
    PovmFamily::new(rows).unwrap()
}

fn c9_positive_extraction() -> Outcome {
    let mut g = rng::rng_from(9);
    let (mut ext_bad, mut pol_bad) = (0, 0);
    let (mut ext_margin, mut pol_margin) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..50 {
        let d = 2 + rng::below(&mut g, 5);
        let n = 1 + rng::below(&mut g, 3);
        let k = 2 + rng::below(&mut g, 2);
        let s = Scenario::new(n, k).unwrap();
        let pa = random_povm_family(n, k, d, &mut g);
        let pb = random_povm_family(n, k, d, &mut g);
        let st = SchmidtState::from_coefficients(&random_sorted_unit(d, &mut g)).unwrap();
        let positive = BellFunctional::from_fn(s, |_, _, _, _| rng::uniform(&mut g));
        let e = extract_max_entangled(&positive, &pa, &pb, &st).unwrap();
        let target = e.c / (4.0 * (d as f64).log2());
        ext_margin = ext_margin.min(e.value - target);
        ext_bad += usize::from(e.value < target - 1e-9);
        let general = BellFunctional::from_fn(s, |_, _, _, _| rng::gaussian(&mut g));
        let p = polarization_select(&general, &pa, &pb, &st).unwrap();
        let target = p.c / (16.0 * (d as f64).log2());
        pol_margin = pol_margin.min(p.value.abs() - target);
        pol_bad += usize::from(p.value.abs() < target - 1e-9);
    }
    outcome(
        ext_bad == 0 && pol_bad == 0,
        format!(
            "extraction misses {ext_bad}/50 (min margin {ext_margin:.3e}), polarization misses {pol_bad}/50 (min margin {pol_margin:.3e})"
        ),
    )
}

fn c10_ceiling(ceiling: &Ceiling) -> Outcome {
    let worst = ceiling
        .seen
        .iter()
        .max_by(|a, b| (a.1 / a.2).total_cmp(&(b.1 / b.2)))
        .expect("ratios were recorded");
    let over: Vec<&(String, f64, f64)> = ceiling.seen.iter().filter(|(_, r, c)| r > c).collect();
    outcome(
        over.is_empty(),
        format!(
            "{} ratios checked, {} over the ceiling; closest: {} at {:.4} of {}",
            ceiling.seen.len(),
            over.len(),
            worst.0,
            worst.1,
            worst.2
        ),
    )
}

fn main() {
    let mut ceiling = Ceiling::default();
    let mut unexpected = 0;
    let mut report = |id: u32, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let pass = o.pass && took <= limit;
        let tag = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && KNOWN_FAILURES.contains(&id) { " [known failure]" } else { "" };
        println!("{tag} criterion {id}: {name}: {} ({:.1}s, limit {}s){note}", o.detail, took.as_secs_f64(), limit.as_secs());
        if !pass && !KNOWN_FAILURES.contains(&id) {
            unexpected += 1;
        }
    };
    let min = |m: u64| Duration::from_secs(60 * m);
    report(1, "POVM validity", min(1), &mut c1_povm_validity);
    report(2, "closed-form quantum value", min(1), &mut c2_step3_identity);
    report(3, "classical oracle agreement", min(1), &mut c3_classical_oracle);
    report(4, "CHSH sandwich", min(2), &mut || c4_chsh(&mut ceiling));
    report(5, "violation growth", min(10), &mut || c5_violation_growth(&mut ceiling));
    report(6, "omega_op growth", min(10), &mut || c6_omega_growth(&mut ceiling));
    report(7, "entropy closed forms", min(1), &mut c7_entropy);
    report(8, "dyadic decomposition", min(1), &mut c8_dyadic);
    report(9, "positive-coefficient extraction", min(2), &mut c9_positive_extraction);
    report(10, "violation ceiling", min(10), &mut || c10_ceiling(&ceiling));
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
