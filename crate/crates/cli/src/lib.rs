//! Command-line front end for `hullfacets`: kernels, expected facet counts,
//! Monte Carlo runs, comparisons and sample-complexity tables.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod grid;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hullfacets::complexity::{complexity_table_with, TableFamily, DEFAULT_MARGIN};
use hullfacets::expectation::{asymptotic_for_model, default_w_floor, HTable, Regime};
use hullfacets::kernels::{self, KernelKind};
use hullfacets::montecarlo::{empirical_kernel, estimate_expected_facets, estimate_outside_probability};
use hullfacets::{BuiltinFamily, Error, ModelSpec, Parallelism, QuadratureConfig, RadialModel};

use output::{Format, RunManifest, Table, DEFAULT_PRECISION};

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Parser)]
#[command(name = "hullfacets", version, about = "Expected facet counts of random convex hulls")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the survival kernels on a grid.
    Kernels(KernelsArgs),
    /// Expected facet count by quadrature and/or asymptotics.
    Expect(ExpectArgs),
    /// Monte Carlo estimates from sampled hulls.
    Mc(McArgs),
    /// Exact, asymptotic and Monte Carlo side by side.
    Compare(CompareArgs),
    /// Minimal sample size meeting the high-dimensional conditions.
    Table(TableArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Spec file (JSON) or family name: gaussian, t, uniform_ball, beta_type.
    #[arg(long)]
    model: String,
    #[arg(long)]
    d: Option<usize>,
    /// Degrees of freedom for `t`.
    #[arg(long)]
    k: Option<f64>,
    /// Exponent for `beta_type`.
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    out: Format,
    /// Significant digits of numeric cells.
    #[arg(long, default_value_t = DEFAULT_PRECISION)]
    precision: usize,
    /// Write here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QuadArgs {
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
}

impl QuadArgs {
    fn config(&self) -> Result<QuadratureConfig, CliError> {
        let cfg = QuadratureConfig::default().with_rel_tol(self.rel_tol).with_abs_tol(self.abs_tol);
        cfg.validate().map_err(CliError::from)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    #[value(name = "G")]
    G,
    #[value(name = "K")]
    K,
    #[value(name = "H")]
    H,
    #[value(name = "F0")]
    F0,
    #[value(name = "kappa")]
    Kappa,
    #[value(name = "lambda")]
    Lambda,
}

#[derive(Debug, Args)]
struct KernelsArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum)]
    kernel: KernelArg,
    /// `start:stop:step` or a comma-separated list.
    #[arg(long)]
    x: String,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Exact,
    Asymptotic,
    Both,
}

#[derive(Debug, Args)]
struct ExpectArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sample size or comma-separated list.
    #[arg(long = "N")]
    n: String,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    #[arg(long, default_value = "fixed-d")]
    regime: Regime,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct McArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "N", default_value_t = 0)]
    n: usize,
    /// Replicates, trials or kernel samples.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, env = "HULLFACETS_SEED", default_value_t = 0)]
    seed: u64,
    /// Estimate the probability that one more point lands outside the hull.
    #[arg(long)]
    p_outside: bool,
    /// Empirical kernel instead of facet counts.
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Grid for `--kernel`.
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long = "N")]
    n: u64,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, env = "HULLFACETS_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "fixed-d")]
    regime: Regime,
    /// Allowed |MC - exact| in standard errors.
    #[arg(long, default_value_t = 3.0)]
    se_tolerance: f64,
    /// Allowed relative gap between asymptotic and exact.
    #[arg(long, default_value_t = 0.1)]
    asymptotic_tolerance: f64,
    /// Exit with status 3 when the Monte Carlo estimate disagrees.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Poly,
    Exp,
    Trunc,
    Gaussian,
    UniformBall,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// One or more families, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    family: Vec<FamilyArg>,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Comma-separated dimensions.
    #[arg(long)]
    d: String,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Failure of a subcommand, mapped onto the exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(Error),
    Library(Error),
    Io(String),
    Disagreement(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e)
        } else {
            CliError::Library(e)
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Library(_) | CliError::Io(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Disagreement(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Numeric(_) => "numeric",
            CliError::Library(_) => "invalid_input",
            CliError::Io(_) => "io",
            CliError::Disagreement(_) => "disagreement",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Disagreement(m) => m.clone(),
            CliError::Numeric(e) | CliError::Library(e) => e.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.message(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

/// Parse `argv`, run the subcommand, and return the exit status.
pub fn run(argv: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let err = CliError::Usage(e.to_string().lines().next().unwrap_or("usage error").to_string());
            eprintln!("{}", err.to_json());
            return err.exit_code();
        }
    };
    match dispatch(cli.command, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, argv: &[String]) -> Result<(), CliError> {
    match command {
        Command::Kernels(a) => cmd_kernels(a, argv),
        Command::Expect(a) => cmd_expect(a, argv),
        Command::Mc(a) => with_threads(a.threads, || cmd_mc(a, argv)),
        Command::Compare(a) => with_threads(a.threads, || cmd_compare(a, argv)),
        Command::Table(a) => with_threads(a.threads, || cmd_table(a, argv)),
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Result<T, CliError> + Send) -> Result<T, CliError> {
    match threads {
        None => f(),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
            pool.install(f)
        }
    }
}

fn family_from_name(name: &str) -> Option<BuiltinFamily> {
    match name {
        "gaussian" | "normal" => Some(BuiltinFamily::Gaussian),
        "t" | "student_t" | "student-t" => Some(BuiltinFamily::T),
        "uniform_ball" | "uniform-ball" | "uniform" => Some(BuiltinFamily::UniformBall),
        "beta_type" | "beta-type" | "beta" => Some(BuiltinFamily::BetaType),
        _ => None,
    }
}

/// Model plus the canonical JSON of its spec, for hashing.
fn load_model(args: &ModelArgs) -> Result<(RadialModel, String), CliError> {
    let path = Path::new(&args.model);
    let spec = if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let spec = ModelSpec::from_json(&text)?;
        if let Some(d) = args.d {
            if d != spec.d {
                return Err(CliError::Usage(format!("--d {d} contradicts d = {} in {}", spec.d, path.display())));
            }
        }
        spec
    } else {
        let family = family_from_name(&args.model)
            .ok_or_else(|| CliError::Usage(format!("`{}` is neither a spec file nor a known family", args.model)))?;
        let d = args
            .d
            .ok_or_else(|| CliError::Usage("--d is required when --model names a family".into()))?;
        ModelSpec {
            family,
            d,
            k: args.k,
            q: args.q,
        }
    };
    let model = spec.build()?;
    Ok((model, spec.to_json()))
}

fn emit(table: &Table, manifest: &RunManifest, out: &OutputArgs) -> Result<(), CliError> {
    if out.precision == 0 || out.precision > 40 {
        return Err(CliError::Usage("--precision must lie in 1..=40".into()));
    }
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &out.output {
        Some(p) => {
            let mut f = fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            table.write(manifest, out.out, out.precision, &mut f).map_err(io)?;
            f.flush().map_err(io)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(manifest, out.out, out.precision, &mut lock).map_err(io)?;
            lock.flush().map_err(io)
        }
    }
}

fn cmd_kernels(a: KernelsArgs, argv: &[String]) -> Result<(), CliError> {
    let (model, spec) = load_model(&a.model)?;
    let cfg = a.quad.config()?;
    let xs = grid::parse_grid(&a.x).map_err(CliError::Usage)?;
    let d = model.dim();
    let mut table = Table::new(vec!["x", "value", "abs_error"]);
    for x in xs {
        let (value, err) = match a.kernel {
            KernelArg::Kappa => (kernels::kappa(d, x)?, 0.0),
            KernelArg::Lambda => (kernels::lambda_d(d, x)?, 0.0),
            k => {
                let v = kernels::evaluate(kernel_kind(k), &model, x, &cfg)?;
                (v.value, v.abs_error_estimate)
            }
        };
        table.push(vec![x.into(), value.into(), err.into()]);
    }
    emit(&table, &RunManifest::new(argv, &spec, None), &a.output)
}

fn kernel_kind(k: KernelArg) -> KernelKind {
    match k {
        KernelArg::G => KernelKind::G,
        KernelArg::K => KernelKind::K,
        KernelArg::H => KernelKind::H,
        KernelArg::F0 | KernelArg::Kappa | KernelArg::Lambda => KernelKind::F0,
    }
}

fn cmd_expect(a: ExpectArgs, argv: &[String]) -> Result<(), CliError> {
    let (model, spec) = load_model(&a.model)?;
    let cfg = a.quad.config()?;
    let ns = grid::parse_int_list(&a.n).map_err(CliError::Usage)?;
    let d = model.dim();
    if let Some(&bad) = ns.iter().find(|&&n| n <= d as u64) {
        return Err(CliError::Usage(format!("need N > d = {d}, got {bad}")));
    }
    let want_exact = a.method != Method::Asymptotic;
    let want_asym = a.method != Method::Exact;
    let htable = if want_exact {
        let n_max = ns.iter().copied().max().unwrap_or(d as u64 + 1);
        Some(HTable::build(&model, &cfg, default_w_floor(n_max), Parallelism::Sequential)?)
    } else {
        None
    };
    let mut table = Table::new(vec!["N", "d", "exact", "exact_error", "asymptotic", "ratio", "regime"]);
    for n in ns {
        let exact = match &htable {
            Some(t) => Some(t.expected_facets(n, &cfg)?),
            None => None,
        };
        let asym = if want_asym {
            Some(asymptotic_for_model(&model, n as f64, a.regime)?.value)
        } else {
            None
        };
        let ratio = match (&exact, asym) {
            (Some(e), Some(v)) => Some(v / e.value),
            _ => None,
        };
        table.push(vec![
            n.into(),
            d.into(),
            exact.as_ref().map(|e| e.value).into(),
            exact.as_ref().map(|e| e.quadrature_error).into(),
            asym.into(),
            ratio.into(),
            a.regime.to_string().into(),
        ]);
    }
    emit(&table, &RunManifest::new(argv, &spec, None), &a.output)
}

fn cmd_mc(a: McArgs, argv: &[String]) -> Result<(), CliError> {
    let (model, spec) = load_model(&a.model)?;
    let d = model.dim();
    let mode = Parallelism::Parallel;
    let manifest = RunManifest::new(argv, &spec, Some(a.seed));
    if let Some(k) = a.kernel {
        if matches!(k, KernelArg::Kappa | KernelArg::Lambda) {
            return Err(CliError::Usage("Monte Carlo kernels are G, K, H and F0".into()));
        }
        let xs = grid::parse_grid(a.x.as_deref().ok_or_else(|| CliError::Usage("--kernel needs --x".into()))?)
            .map_err(CliError::Usage)?;
        let est = empirical_kernel(&model, d, kernel_kind(k), &xs, a.reps, a.seed, mode)?;
        let mut table = Table::new(vec!["x", "p_hat", "std_error"]);
        for e in est {
            table.push(vec![e.x.into(), e.p_hat.into(), e.std_error.into()]);
        }
        return emit(&table, &manifest, &a.output);
    }
    if a.n == 0 {
        return Err(CliError::Usage("--N is required for facet and membership runs".into()));
    }
    if a.p_outside {
        let m = estimate_outside_probability(&model, a.n, d, a.reps, a.seed, mode)?;
        let mut table = Table::new(vec![
            "model",
            "N",
            "d",
            "trials",
            "seed",
            "p_hat",
            "std_error",
            "vertex_estimate",
            "vertex_std_error",
            "paired_std_error",
        ]);
        table.push(vec![
            model.id().into(),
            a.n.into(),
            d.into(),
            m.trials.into(),
            a.seed.into(),
            m.p_hat.into(),
            m.std_error.into(),
            m.vertex_estimate.into(),
            m.vertex_std_error.into(),
            m.paired_std_error.into(),
        ]);
        return emit(&table, &manifest, &a.output);
    }
    let e = estimate_expected_facets(&model, a.n, d, a.reps, a.seed, mode)?;
    let mut table = Table::new(vec![
        "model",
        "N",
        "d",
        "replicates",
        "seed",
        "mean",
        "std_error",
        "vertex_mean",
        "vertex_std_error",
    ]);
    table.push(vec![
        e.model_id.clone().into(),
        e.n_points.into(),
        d.into(),
        e.replicates.into(),
        e.seed.into(),
        e.mean.into(),
        e.std_error.into(),
        e.vertex_mean().into(),
        e.vertex_std_error().into(),
    ]);
    emit(&table, &manifest, &a.output)
}

fn cmd_compare(a: CompareArgs, argv: &[String]) -> Result<(), CliError> {
    let (model, spec) = load_model(&a.model)?;
    let cfg = a.quad.config()?;
    let d = model.dim();
    let n = usize::try_from(a.n).map_err(|_| CliError::Usage("N too large".into()))?;
    let exact = hullfacets::expectation::expected_facets_exact(&model, a.n, d, &cfg)?;
    let asym = asymptotic_for_model(&model, a.n as f64, a.regime)?;
    let mc = estimate_expected_facets(&model, n, d, a.reps, a.seed, Parallelism::Parallel)?;
    let z = if mc.std_error > 0.0 {
        (mc.mean - exact.value) / mc.std_error
    } else if (mc.mean - exact.value).abs() <= 1e-6 * exact.value.abs() {
        0.0
    } else {
        f64::INFINITY
    };
    let mc_agrees = z.abs() <= a.se_tolerance;
    let ratio = asym.value / exact.value;
    let asym_agrees = (ratio - 1.0).abs() <= a.asymptotic_tolerance;
    let mut table = Table::new(vec![
        "model",
        "N",
        "d",
        "exact",
        "exact_error",
        "asymptotic",
        "asymptotic_ratio",
        "mc_mean",
        "mc_std_error",
        "mc_ci99_low",
        "mc_ci99_high",
        "mc_z",
        "mc_agrees",
        "asymptotic_agrees",
    ]);
    table.push(vec![
        model.id().into(),
        a.n.into(),
        d.into(),
        exact.value.into(),
        exact.quadrature_error.into(),
        asym.value.into(),
        ratio.into(),
        mc.mean.into(),
        mc.std_error.into(),
        (mc.mean - Z99 * mc.std_error).into(),
        (mc.mean + Z99 * mc.std_error).into(),
        z.into(),
        mc_agrees.into(),
        asym_agrees.into(),
    ]);
    emit(&table, &RunManifest::new(argv, &spec, Some(a.seed)), &a.output)?;
    if a.strict && !mc_agrees {
        return Err(CliError::Disagreement(format!(
            "Monte Carlo mean {} is {z:.2} standard errors from the exact value {}",
            mc.mean, exact.value
        )));
    }
    Ok(())
}

fn cmd_table(a: TableArgs, argv: &[String]) -> Result<(), CliError> {
    let dims: Vec<usize> = grid::parse_int_list(&a.d)
        .map_err(CliError::Usage)?
        .into_iter()
        .map(|d| d as usize)
        .collect();
    let families: Vec<TableFamily> = a
        .family
        .iter()
        .map(|f| match f {
            FamilyArg::Poly => TableFamily::Poly { k: a.k },
            FamilyArg::Exp => TableFamily::Exp { k: a.k },
            FamilyArg::Trunc => TableFamily::Trunc { k: a.k },
            FamilyArg::Gaussian => TableFamily::Gaussian,
            FamilyArg::UniformBall => TableFamily::UniformBall,
        })
        .collect();
    let rows = complexity_table_with(&families, &dims, a.margin, Parallelism::Parallel)?;
    let mut table = Table::new(vec!["family", "d", "log10_min_N", "lhs", "rhs", "ratio", "ln_lhs", "ln_rhs", "p_bound"]);
    for r in &rows {
        let rep = r.report.as_ref();
        table.push(vec![
            r.family.clone().into(),
            r.d.into(),
            r.log10_min_n().into(),
            rep.map(|x| x.lhs).into(),
            rep.map(|x| x.rhs).into(),
            rep.map(|x| x.ratio()).into(),
            rep.map(|x| x.ln_lhs).into(),
            rep.map(|x| x.ln_rhs).into(),
            rep.map(|x| x.p_bound).into(),
        ]);
    }
    let label: Vec<String> = families.iter().map(|f| f.label()).collect();
    emit(&table, &RunManifest::new(argv, &label.join(","), None), &a.output)
}
