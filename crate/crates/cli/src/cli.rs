//! Argument parsing and the subcommands.

use std::path::{Path, PathBuf};

use bellforge_core::bell::BellFunctional;
use bellforge_core::classical::{classical_value_local, ClassicalResult, DEFAULT_BUDGET, FALLBACK_RESTARTS};
use bellforge_core::construction::{
    build_bell, construct_report_with, gen_signs, ConstructOptions, SignDistribution, DEFAULT_ALPHA_TOP,
};
use bellforge_core::entanglement::{
    delta_classify, dyadic_decompose, entropy_of_entanglement, f_alpha, iviol, DeltaClass, DeltaKind,
    DyadicDecomposition,
};
use bellforge_core::quantum::{SeesawConfig, SeesawResult, StateMode};
use bellforge_core::rng::{self, derive_seed};
use bellforge_core::sdp::{
    build_op_gram, sign_vectors, solve_sdp, vector_certificate_value, vector_certificate_value_exact, GramProblem, SdpOptions, SdpSolution,
    CERTIFICATE_BUDGET,
};
use bellforge_core::state::{build_state, SchmidtState, StateProfile};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::formats::{emit, parse_json, read_functional, Envelope, FunctionalJson, SignsJson};
use crate::parallel;
use crate::sweep::{self, SweepRow, SweepSpec};

/// Slack allowed when checking `classical ≤ see-saw`.
pub const ORDER_TOL: f64 = 1e-9;
/// Slack allowed when comparing against the first-order SDP value.
pub const SDP_ORDER_TOL: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(name = "bellforge", version, about = "Bell-violation constructions, solvers and sweeps")]
pub struct Cli {
    /// Root seed for every random choice
    #[arg(long, global = true, env = "BELLFORGE_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format; csv is only meaningful for sweep
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Distribution {
    Bernoulli,
    Gaussian,
}

impl From<Distribution> for SignDistribution {
    fn from(d: Distribution) -> Self {
        match d {
            Distribution::Bernoulli => SignDistribution::Bernoulli,
            Distribution::Gaussian => SignDistribution::Gaussian,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build one instance of the random-sign construction
    Construct(ConstructArgs),
    /// Run the construction over a grid of sizes and seeds
    Sweep(SweepArgs),
    /// Compare classical, see-saw and SDP values on a functional
    Bench(BenchArgs),
    /// Entropy and violation indicators of a Schmidt state
    Entropy(EntropyArgs),
    /// Dyadic decomposition of a sorted coefficient vector
    Decompose(DecomposeArgs),
    /// Solve the Gram relaxation of a functional or a triplet problem
    Sdp(SdpArgs),
    /// Certificate value of the explicit sign vectors
    Certify(CertifyArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Construct(_) => "construct",
            Command::Sweep(_) => "sweep",
            Command::Bench(_) => "bench",
            Command::Entropy(_) => "entropy",
            Command::Decompose(_) => "decompose",
            Command::Sdp(_) => "sdp",
            Command::Certify(_) => "certify",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    #[arg(long)]
    pub n: usize,
    /// Top Schmidt coefficient of the state
    #[arg(long, default_value_t = DEFAULT_ALPHA_TOP)]
    pub alpha: f64,
    /// Largest exact classical enumeration allowed
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
    pub budget: u64,
    /// Local-search restarts when over budget
    #[arg(long, default_value_t = FALLBACK_RESTARTS)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = Distribution::Bernoulli)]
    pub distribution: Distribution,
    /// Also write the accepted sign tensor here
    #[arg(long)]
    pub signs_out: Option<PathBuf>,
    /// Also write the functional here
    #[arg(long)]
    pub functional_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SweepArgs {
    /// Comma-separated sizes
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Seeds per size
    #[arg(long, default_value_t = 5)]
    pub seeds: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA_TOP)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
    pub budget: u64,
    #[arg(long, default_value_t = FALLBACK_RESTARTS)]
    pub restarts: usize,
    /// Fill the omega_op column (one SDP pair per row)
    #[arg(long)]
    pub omega: bool,
    /// SDP tolerance for the omega_op column
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct BenchArgs {
    /// Functional JSON
    #[arg(long)]
    pub input: PathBuf,
    /// Local dimension for the see-saw (defaults to the number of outputs)
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
    pub budget: u64,
    /// Restarts for both the classical local search and the see-saw
    #[arg(long, default_value_t = 8)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_rounds: usize,
    /// SDP tolerance
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    /// Explicit Schmidt coefficients (normalized and sorted)
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n", "dim"])]
    pub alphas: Option<Vec<f64>>,
    /// Tail size of the profile `α|11⟩ + √(1−α²)/√n Σ|ii⟩`
    #[arg(long, requires = "alpha", conflicts_with = "dim")]
    pub n: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Maximally entangled state of this dimension
    #[arg(long)]
    pub dim: Option<usize>,
    /// Threshold for the δ-classification
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct DecomposeArgs {
    /// Nonincreasing nonnegative coefficients with norm at most 1
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["input", "random"])]
    pub coeffs: Option<Vec<f64>>,
    /// JSON array of coefficients
    #[arg(long, conflicts_with = "random")]
    pub input: Option<PathBuf>,
    /// Random sorted unit vector of this length
    #[arg(long)]
    pub random: Option<usize>,
}

#[derive(Args, Debug, Serialize)]
pub struct SdpArgs {
    /// Functional JSON
    #[arg(long, required_unless_present = "problem", conflicts_with = "problem")]
    pub input: Option<PathBuf>,
    /// Triplet-form Gram problem JSON
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Write the triplet-form problem built from --input here
    #[arg(long, requires = "input")]
    pub export: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 50_000)]
    pub max_iter: usize,
    /// Include the Gram matrices in the output
    #[arg(long)]
    pub gram: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct CertifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Distribution::Bernoulli)]
    pub distribution: Distribution,
    /// Largest number of sign vectors enumerated; larger instances use
    /// branch and bound
    #[arg(long, default_value_t = CERTIFICATE_BUDGET as u64)]
    pub budget: u64,
}

/// Global flags plus the subcommand's own, as echoed in every output.
#[derive(Serialize)]
struct Config<'a, A: Serialize> {
    jobs: usize,
    format: Format,
    out: Option<&'a Path>,
    #[serde(flatten)]
    args: &'a A,
}

impl Cli {
    fn config<'a, A: Serialize>(&'a self, args: &'a A) -> Config<'a, A> {
        Config {
            jobs: self.jobs,
            format: self.format,
            out: self.out.as_deref(),
            args,
        }
    }

    fn write<A: Serialize, R: Serialize>(&self, seed: Option<u64>, args: &A, result: &R) -> CliResult<()> {
        let cfg = self.config(args);
        let text = Envelope::new(self.command.name(), seed, &cfg, result).to_json()?;
        emit(self.out.as_deref(), &text)
    }

    fn json_only(&self) -> CliResult<()> {
        if self.format != Format::Json {
            return Err(CliError::Usage(format!("{} only writes json", self.command.name())));
        }
        Ok(())
    }
}

/// Entry point shared by the binary and the tests.
pub fn run(cli: &Cli) -> CliResult<()> {
    if cli.jobs > 0 {
        // a second call (tests) keeps the first pool, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    match &cli.command {
        Command::Construct(a) => construct(cli, a),
        Command::Sweep(a) => sweep_cmd(cli, a),
        Command::Bench(a) => bench(cli, a),
        Command::Entropy(a) => entropy(cli, a),
        Command::Decompose(a) => decompose(cli, a),
        Command::Sdp(a) => sdp(cli, a),
        Command::Certify(a) => certify(cli, a),
    }
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn json_line<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

fn construct(cli: &Cli, a: &ConstructArgs) -> CliResult<()> {
    cli.json_only()?;
    let opts = ConstructOptions {
        distribution: a.distribution.into(),
        classical_budget: a.budget as u128,
        local_restarts: a.restarts,
        ..ConstructOptions::default()
    };
    let n = a.n;
    let report = construct_report_with(n, cli.seed, a.alpha, &opts, |m, s| {
        Ok(parallel::classical_auto(m, a.budget as u128, a.restarts, derive_seed(s, &[n as u64, 1])))
    })?;
    if a.signs_out.is_some() || a.functional_out.is_some() {
        let signs = gen_signs(n, report.seed_used, opts.distribution)?;
        if let Some(p) = &a.signs_out {
            emit(Some(p), &json_line(&SignsJson::from_tensor(&signs))?)?;
        }
        if let Some(p) = &a.functional_out {
            emit(Some(p), &json_line(&FunctionalJson::from_functional(&build_bell(&signs)))?)?;
        }
    }
    cli.write(Some(cli.seed), a, &report)
}

#[derive(Serialize)]
struct SweepManifest {
    rows: usize,
    errors: usize,
    columns: &'static [&'static str],
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> CliResult<()> {
    let spec = SweepSpec {
        n_list: a.n.clone(),
        seeds: a.seeds,
        alpha: a.alpha,
        budget: a.budget,
        restarts: a.restarts,
        root_seed: cli.seed,
        omega: a.omega,
        sdp_tol: a.tol,
        jobs: cli.jobs,
    }
    .normalized()?;
    match cli.format {
        Format::Json => {
            let rows = sweep::run(&spec, |_| Ok(()))?;
            cli.write(Some(cli.seed), &spec, &rows)
        }
        Format::Csv => {
            let sink: Box<dyn std::io::Write> = match &cli.out {
                Some(p) => Box::new(std::fs::File::create(p)?),
                None => Box::new(std::io::stdout()),
            };
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
            w.write_record(sweep::COLUMNS)?;
            w.flush()?;
            let rows = sweep::run(&spec, |r: &SweepRow| {
                w.serialize(r)?;
                w.flush()?;
                Ok(())
            })?;
            let manifest = SweepManifest {
                rows: rows.len(),
                errors: rows.iter().filter(|r| r.error.is_some()).count(),
                columns: &sweep::COLUMNS,
            };
            let cfg = cli.config(&spec);
            let env = Envelope::new("sweep", Some(cli.seed), &cfg, &manifest);
            match &cli.out {
                Some(p) => {
                    let mut meta = p.clone().into_os_string();
                    meta.push(".meta.json");
                    emit(Some(Path::new(&meta)), &env.to_json()?)
                }
                None => {
                    eprintln!("{}", serde_json::to_string(&env)?);
                    Ok(())
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicalSummary {
    pub value: f64,
    pub max_value: f64,
    pub min_value: f64,
    pub exact: bool,
}

impl From<&ClassicalResult> for ClassicalSummary {
    fn from(r: &ClassicalResult) -> Self {
        Self {
            value: r.value,
            max_value: r.max_value,
            min_value: r.min_value,
            exact: r.exact,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeesawSummary {
    pub value: f64,
    pub dim: usize,
    pub state: Vec<f64>,
    pub rounds: usize,
    pub converged: bool,
    pub restart: usize,
}

impl From<&SeesawResult> for SeesawSummary {
    fn from(r: &SeesawResult) -> Self {
        Self {
            value: r.value,
            dim: r.state.dim(),
            state: r.state.alphas().to_vec(),
            rounds: r.rounds,
            converged: r.converged,
            restart: r.restart,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<f64>>,
}

impl SolveSummary {
    fn new(s: &SdpSolution, with_gram: bool) -> Self {
        Self {
            value: s.value,
            primal_residual: s.primal_residual,
            dual_residual: s.dual_residual,
            iterations: s.iterations,
            converged: s.converged,
            g: with_gram.then(|| s.g.as_slice().to_vec()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OmegaSummary {
    pub value: f64,
    pub max: SolveSummary,
    pub min: SolveSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedSummary {
    /// Dimension of the best maximally entangled state.
    pub k: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub n_inputs: usize,
    pub n_outputs: usize,
    pub classical_exact: Option<ClassicalSummary>,
    pub classical_local: ClassicalSummary,
    pub seesaw: SeesawSummary,
    pub seesaw_max_entangled: FixedSummary,
    pub omega_op: OmegaSummary,
    /// Best quantum value over classical value, when the latter is nonzero.
    pub ratio: Option<f64>,
    /// `4 · min{N, K, d}`.
    pub ceiling: f64,
    pub anomalies: Vec<String>,
}

/// Classical, see-saw (free and maximally entangled) and SDP values of `m`,
/// with ordering violations listed in `anomalies`.
pub fn bench_functional(m: &BellFunctional, a: &BenchArgs, seed: u64) -> CliResult<BenchReport> {
    let s = m.scenario();
    let (n, k) = (s.n_inputs, s.n_outputs);
    let d = a.dim.unwrap_or(k);
    if d == 0 {
        return Err(CliError::Usage("dimension must be at least 1".into()));
    }
    let exact = match parallel::classical_exact(m, a.budget as u128) {
        Ok(r) => Some(r),
        Err(bellforge_core::Error::BudgetExceeded { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let local = classical_value_local(m, a.restarts, derive_seed(seed, &[0]));
    let cfg = SeesawConfig {
        restarts: a.restarts,
        max_rounds: a.max_rounds,
        ..SeesawConfig::free(d, derive_seed(seed, &[1]))
    };
    let free = parallel::seesaw(m, &cfg)?;
    let mut fixed = FixedSummary {
        k: 0,
        value: f64::NEG_INFINITY,
    };
    for dim in 1..=d {
        let c = SeesawConfig {
            dim,
            state_mode: StateMode::Fixed(SchmidtState::maximally_entangled(dim)?),
            ..cfg.clone()
        };
        let r = parallel::seesaw(m, &c)?;
        if r.value > fixed.value {
            fixed = FixedSummary { k: dim, value: r.value };
        }
    }
    let opts = SdpOptions {
        tol: a.tol,
        ..SdpOptions::default()
    };
    let omega = parallel::omega_op(m, &opts)?;

    let classical = exact.as_ref().unwrap_or(&local);
    let quantum = free.value.max(fixed.value);
    let ceiling = 4.0 * n.min(k).min(d) as f64;
    let mut anomalies = Vec::new();
    if let Some(e) = &exact {
        if local.max_value > e.max_value + ORDER_TOL || local.min_value < e.min_value - ORDER_TOL {
            anomalies.push(format!("local search {} beyond exact {}", local.max_value, e.max_value));
        }
    }
    if classical.max_value > free.value + ORDER_TOL {
        anomalies.push(format!("classical {} above see-saw {}", classical.max_value, free.value));
    }
    if free.value > omega.max.value + SDP_ORDER_TOL {
        anomalies.push(format!("see-saw {} above omega_op {}", free.value, omega.max.value));
    }
    if fixed.value > omega.max.value + SDP_ORDER_TOL {
        anomalies.push(format!("max-entangled see-saw {} above omega_op {}", fixed.value, omega.max.value));
    }
    let ratio = (classical.value > 0.0).then(|| quantum.abs() / classical.value);
    if let Some(r) = ratio {
        if r > ceiling {
            anomalies.push(format!("ratio {r} exceeds ceiling {ceiling}"));
        }
    }
    Ok(BenchReport {
        n_inputs: n,
        n_outputs: k,
        classical_exact: exact.as_ref().map(Into::into),
        classical_local: (&local).into(),
        seesaw: (&free).into(),
        seesaw_max_entangled: fixed,
        omega_op: OmegaSummary {
            value: omega.value,
            max: SolveSummary::new(&omega.max, false),
            min: SolveSummary::new(&omega.min, false),
        },
        ratio,
        ceiling,
        anomalies,
    })
}

fn bench(cli: &Cli, a: &BenchArgs) -> CliResult<()> {
    cli.json_only()?;
    let m = read_functional(&read_text(&a.input)?)?;
    let report = bench_functional(&m, a, cli.seed)?;
    cli.write(Some(cli.seed), a, &report)
}

#[derive(Serialize)]
struct EntropyReport {
    alphas: Vec<f64>,
    dim: usize,
    schmidt_rank: usize,
    entropy: f64,
    iviol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<DeltaClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta_kind: Option<DeltaKind>,
}

fn entropy(cli: &Cli, a: &EntropyArgs) -> CliResult<()> {
    cli.json_only()?;
    let profile = match (&a.alphas, a.n, a.alpha, a.dim) {
        (Some(c), None, None, None) => StateProfile::Explicit(c.clone()),
        (None, Some(n), Some(alpha), None) => StateProfile::AlphaTop { alpha, n },
        (None, None, None, Some(d)) => StateProfile::MaximallyEntangled(d),
        _ => {
            return Err(CliError::Usage(
                "give exactly one of --alphas, --n with --alpha, or --dim".into(),
            ))
        }
    };
    let state = build_state(&profile)?;
    let f = match profile {
        StateProfile::AlphaTop { alpha, n } => Some(f_alpha(n, alpha)),
        _ => None,
    };
    let delta = a.delta.map(|d| delta_classify(&state, d)).transpose()?;
    let report = EntropyReport {
        alphas: state.alphas().to_vec(),
        dim: state.dim(),
        schmidt_rank: state.schmidt_rank(),
        entropy: entropy_of_entanglement(&state),
        iviol: iviol(&state),
        f_alpha: f,
        delta_kind: delta.map(|d| d.kind()),
        delta,
    };
    cli.write(None, a, &report)
}

#[derive(Serialize)]
struct DecomposeReport {
    #[serde(flatten)]
    decomposition: DyadicDecomposition,
    beta_sum: f64,
    /// `2√(log₂ n)`; not a bound for `n = 1`.
    beta_bound: f64,
    reconstruction_error: f64,
}

/// A uniformly random unit vector with entries sorted in decreasing order
/// of absolute value, made nonnegative.
pub fn random_sorted_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut g = rng::rng_from(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng::gaussian(&mut g).abs()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn decompose(cli: &Cli, a: &DecomposeArgs) -> CliResult<()> {
    cli.json_only()?;
    let (coeffs, seed) = match (&a.coeffs, &a.input, a.random) {
        (Some(c), None, None) => (c.clone(), None),
        (None, Some(p), None) => (parse_json::<Vec<f64>>(&read_text(p)?)?, None),
        (None, None, Some(n)) if n > 0 => (random_sorted_unit(n, cli.seed), Some(cli.seed)),
        _ => return Err(CliError::Usage("give exactly one of --coeffs, --input or --random n (n ≥ 1)".into())),
    };
    let dec = dyadic_decompose(&coeffs)?;
    let err = dec
        .reconstruct()
        .iter()
        .zip(&coeffs)
        .fold(0.0f64, |m, (r, c)| m.max((r - c).abs()));
    let report = DecomposeReport {
        beta_sum: dec.beta_sum(),
        beta_bound: 2.0 * (coeffs.len() as f64).log2().sqrt(),
        reconstruction_error: err,
        decomposition: dec,
    };
    cli.write(seed, a, &report)
}

#[derive(Serialize)]
#[serde(untagged)]
enum SdpReport {
    Functional(OmegaSummary),
    Problem(SolveSummary),
}

fn sdp(cli: &Cli, a: &SdpArgs) -> CliResult<()> {
    cli.json_only()?;
    let opts = SdpOptions {
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let report = match (&a.input, &a.problem) {
        (Some(p), None) => {
            let m = read_functional(&read_text(p)?)?;
            if let Some(out) = &a.export {
                emit(Some(out), &json_line(&build_op_gram(&m))?)?;
            }
            let o = parallel::omega_op(&m, &opts)?;
            SdpReport::Functional(OmegaSummary {
                value: o.value,
                max: SolveSummary::new(&o.max, a.gram),
                min: SolveSummary::new(&o.min, a.gram),
            })
        }
        (None, Some(p)) => {
            let problem: GramProblem = parse_json(&read_text(p)?)?;
            SdpReport::Problem(SolveSummary::new(&solve_sdp(&problem, &opts)?, a.gram))
        }
        _ => return Err(CliError::Usage("give exactly one of --input or --problem".into())),
    };
    cli.write(None, a, &report)
}

#[derive(Serialize)]
struct CertifyReport {
    n: usize,
    map_norm: &'static str,
    value: f64,
    value_over_n: f64,
}

fn certify(cli: &Cli, a: &CertifyArgs) -> CliResult<()> {
    cli.json_only()?;
    let signs = gen_signs(a.n, cli.seed, a.distribution.into())?;
    let m = build_bell(&signs);
    let vs = sign_vectors(&signs);
    let (value, map_norm) = match vector_certificate_value(&m, &vs, a.budget as u128) {
        Err(bellforge_core::Error::BudgetExceeded { .. }) => (vector_certificate_value_exact(&m, &vs)?, "branch_and_bound"),
        other => (other?, "enumerated"),
    };
    let report = CertifyReport {
        n: a.n,
        map_norm,
        value,
        value_over_n: value / a.n as f64,
    };
    cli.write(Some(cli.seed), a, &report)
}
