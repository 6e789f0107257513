//! Command-line front end: argument parsing, run configuration, dispatch and output.
//!
//! Exit codes: 0 success, 1 a check evaluated and failed, 2 usage or input error,
//! 3 budget or resource limit.

pub mod schema;
pub mod suite;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use tauwork::fock::{
    oscillator_commutator_check, target_commutator_report, CohomologyData, FockError, OscillatorParams,
};
use tauwork::kdv::{assemble_free_energy, kdv_residual, string_residual};
use tauwork::kp::{kp_hirota_residual, kp_pde_residual, poly_layout, schur_lambda, KpError, Partition};
use tauwork::matrix_models::{
    gaussian_normalization_check, genus_expansion, hciz_check, kontsevich_match, wick_moment_budget, GaussianSpec,
    MatrixError, TraceWord, DEFAULT_MATCHING_BUDGET,
};
use tauwork::ribbon::{
    build_table, enumerate_trivalent, extract_intersection_numbers, stable_range, ExtractOptions, IntersectionTable,
    RibbonError, DEFAULT_MAX_DARTS,
};
use tauwork::scalar::{format_rational, int, parse_rational, rat};
use tauwork::torsion::{torsion, torsion_order_check, BasedChainComplex, TorsionError};
use tauwork::Rational;

pub const CONFIG_ENV: &str = "TAUWORK_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "tauwork", version, about = "Exact intersection numbers, integrable-hierarchy checks, Virasoro representations, matrix models and torsion")]
pub struct Cli {
    /// Seed for every randomized path.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// JSON config file with budgets and defaults; flags override it.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Adds a delta to one intersection-table entry before it is used: `g:d1,d2,..[:delta]`.
    #[arg(long, global = true, hide = true)]
    pub inject_perturbation: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trivalent ribbon graphs with labeled faces.
    Graphs {
        #[command(subcommand)]
        action: GraphsAction,
    },
    /// Intersection numbers ⟨τ_{d_1}⋯τ_{d_n}⟩_g extracted from the graph sum.
    Intersect(GenusArgs),
    /// KdV or string residual of the assembled free energy.
    Verify(VerifyArgs),
    /// Schur polynomial of a partition, with KP checks.
    Schur(SchurArgs),
    /// Virasoro operators on Fock spaces.
    Virasoro {
        #[command(subcommand)]
        action: VirasoroAction,
    },
    /// Gaussian matrix models.
    Matrix {
        #[command(subcommand)]
        action: MatrixAction,
    },
    /// Torsion of a based chain complex read from JSON.
    Torsion(TorsionArgs),
    /// Runs every acceptance criterion.
    Suite {
        #[arg(value_enum)]
        level: suite::Level,
    },
}

#[derive(Debug, Args)]
pub struct GenusArgs {
    #[arg(short = 'g', long, allow_negative_numbers = true)]
    pub genus: u32,
    #[arg(short = 'n', long)]
    pub n: u32,
    #[arg(long)]
    pub max_darts: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum GraphsAction {
    /// Isomorphism classes with automorphism orders.
    Enumerate(GenusArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Residual {
    Kdv,
    String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub residual: Residual,
    /// Table covers every stable (g, n) with n + 2g − 2 ≤ range.
    #[arg(long, default_value_t = 2)]
    pub range: u32,
    #[arg(long, default_value_t = 1)]
    pub max_genus: u32,
    /// Number of times t_0, t_1, ...
    #[arg(long, default_value_t = 3)]
    pub times: usize,
    /// Total-degree truncation of F.
    #[arg(long)]
    pub cap: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SchurArgs {
    /// Comma-separated parts, e.g. 2,1.
    #[arg(long, value_delimiter = ',')]
    pub partition: Vec<u32>,
    #[arg(long)]
    pub check_kp: bool,
    #[arg(long)]
    pub check_hirota: bool,
}

#[derive(Debug, Subcommand)]
pub enum VirasoroAction {
    /// Oscillator representation with central charge 1 + 12λ².
    Oscillator(OscillatorArgs),
    /// Operators L_n built from cohomology data, with the commutator report.
    Target(TargetArgs),
}

#[derive(Debug, Args)]
pub struct OscillatorArgs {
    /// Run the commutator check on every |m|, |n| ≤ range.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value = "0")]
    pub lambda: String,
    #[arg(long, default_value = "0")]
    pub mu: String,
    #[arg(long)]
    pub cap: Option<u32>,
    #[arg(long, default_value_t = 3)]
    pub range: i64,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Cohomology data file, or one of the built-ins `point`, `two-class`.
    #[arg(long)]
    pub data: String,
    /// Full report destination.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Brackets [L_{n1}, L_n] for −1 ≤ n1 < n ≤ max-n.
    #[arg(long, default_value_t = 2)]
    pub max_n: i64,
    #[arg(long, default_value_t = 3)]
    pub window_levels: usize,
    #[arg(long, default_value_t = 2)]
    pub window_degree: u32,
}

#[derive(Debug, Subcommand)]
pub enum MatrixAction {
    /// Exact Gaussian moment by Wick contraction.
    Moment {
        #[arg(long = "N")]
        size: Option<usize>,
        /// Diagonal Λ; omitted means the scalar model with a Laurent answer in N.
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<String>>,
        #[arg(long)]
        word: String,
    },
    /// Pairing counts of a trace word by genus.
    Genus {
        #[arg(long)]
        word: String,
    },
    /// Perturbative cubic integral against the colored graph sum.
    Match {
        #[arg(long, default_value_t = 2)]
        order: u32,
        #[arg(long, value_delimiter = ',', default_values_t = ["2".to_string(), "3".to_string(), "5".to_string()])]
        lambda: Vec<String>,
    },
    /// Gaussian normalization by quadrature, N ≤ 2.
    Normalization {
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<String>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Rank-2 unitary integral by Monte Carlo against the closed form.
    Hciz {
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        y: Vec<f64>,
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
    },
}

#[derive(Debug, Args)]
pub struct TorsionArgs {
    #[arg(long)]
    pub complex: PathBuf,
}

/// Budgets and defaults from the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub max_darts: Option<usize>,
    pub max_matchings: Option<u128>,
    pub fock_cap: Option<u32>,
    pub kdv_cap: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub max_darts: usize,
    pub max_matchings: u128,
    pub fock_cap: u32,
    pub kdv_cap: u32,
    pub format: Format,
    pub perturbation: Option<Perturbation>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            max_darts: DEFAULT_MAX_DARTS,
            max_matchings: DEFAULT_MATCHING_BUDGET,
            fock_cap: 10,
            kdv_cap: 7,
            format: Format::Json,
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub genus: u32,
    pub tuple: Vec<u32>,
    pub delta: Rational,
}

impl Perturbation {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("perturbation {s:?} is not g:d1,d2,..[:delta]"));
        let mut parts = s.split(':');
        let genus = parts.next().and_then(|g| g.trim().parse().ok()).ok_or_else(bad)?;
        let tuple = parts
            .next()
            .ok_or_else(bad)?
            .split(',')
            .map(|d| d.trim().parse::<u32>().map_err(|_| bad()))
            .collect::<Result<Vec<_>, _>>()?;
        let delta = match parts.next() {
            Some(d) => parse_rational(d.trim()).map_err(|_| bad())?,
            None => int(1),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(Self { genus, tuple, delta })
    }

    /// Adds the delta, treating an absent entry as zero.
    pub fn apply(&self, table: &mut IntersectionTable) {
        let v = table.value(self.genus, &self.tuple).unwrap_or_default();
        table.insert(self.genus, &self.tuple, v + self.delta.clone());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("verification failed: {0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<RibbonError> for CliError {
    fn from(e: RibbonError) -> Self {
        match e {
            RibbonError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            RibbonError::Unstable { .. } | RibbonError::Arity { .. } | RibbonError::PoleError { .. } | RibbonError::Invalid(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::BudgetError { .. } => CliError::Budget(e.to_string()),
            MatrixError::Ribbon(r) => r.into(),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<FockError> for CliError {
    fn from(e: FockError) -> Self {
        match e {
            FockError::TruncationError { .. } | FockError::InsufficientCap(_) => CliError::Budget(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<KpError> for CliError {
    fn from(e: KpError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<TorsionError> for CliError {
    fn from(e: TorsionError) -> Self {
        CliError::Usage(e.to_string())
    }
}

/// A finished command: the report and whether its checks passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    pub csv: Option<String>,
    pub pass: bool,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Self { report, csv: None, pass: true }
    }

    fn checked(report: Value, pass: bool) -> Self {
        Self { report, csv: None, pass }
    }
}

fn rationals(items: &[String]) -> Result<Vec<Rational>, CliError> {
    items
        .iter()
        .map(|s| parse_rational(s.trim()).map_err(|e| CliError::Usage(format!("{s:?}: {e}"))))
        .collect()
}

fn one_rational(s: &str) -> Result<Rational, CliError> {
    parse_rational(s.trim()).map_err(|e| CliError::Usage(format!("{s:?}: {e}")))
}

fn csv_table(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}

fn read_file(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn extract_options(cfg: &RunConfig) -> ExtractOptions {
    ExtractOptions { max_darts: cfg.max_darts, ..ExtractOptions::default() }
}

fn intersect(args: &GenusArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let opts = ExtractOptions { max_darts: args.max_darts.unwrap_or(cfg.max_darts), ..ExtractOptions::default() };
    let mut table = extract_intersection_numbers(args.genus, args.n, &opts)?.table;
    if let Some(p) = &cfg.perturbation {
        p.apply(&mut table);
    }
    let numbers = table.fragment_numbers(args.genus, args.n);
    let csv = csv_table(
        &["genus", "n", "tuple", "value"],
        numbers.iter().map(|(k, v)| vec![args.genus.to_string(), args.n.to_string(), k.clone(), v.clone()]).collect(),
    );
    Ok(Outcome { report: json!({ "genus": args.genus, "n": args.n, "numbers": numbers }), csv: Some(csv), pass: true })
}

fn graphs(args: &GenusArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let classes = enumerate_trivalent(args.genus, args.n, args.max_darts.unwrap_or(cfg.max_darts))?;
    let darts = classes.first().map_or(0, |c| c.canonical.darts);
    let list: Vec<Value> = classes.iter().map(|c| c.to_json()).collect();
    Ok(Outcome::ok(json!({
        "genus": args.genus,
        "n": args.n,
        "darts": darts,
        "count": classes.len(),
        "classes": list,
    })))
}

/// The table over every stable `(g, n)` with `n + 2g − 2 ≤ range`, with the configured perturbation.
pub fn pipeline_table(range: u32, cfg: &RunConfig) -> Result<IntersectionTable, CliError> {
    let mut t = build_table(&stable_range(range), &extract_options(cfg))?;
    if let Some(p) = &cfg.perturbation {
        p.apply(&mut t);
    }
    Ok(t)
}

fn verify(args: &VerifyArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let table = pipeline_table(args.range, cfg)?;
    let f = assemble_free_energy(&table, args.max_genus, args.times, args.cap.unwrap_or(cfg.kdv_cap));
    let report = match args.residual {
        Residual::Kdv => kdv_residual(&f),
        Residual::String => string_residual(&f),
    };
    let pass = report.passes();
    let mut v = report.to_json();
    v["range"] = json!(args.range);
    v["pass"] = json!(pass);
    Ok(Outcome::checked(v, pass))
}

/// Values substituted for `x_4, x_5, ..` when restricting to the `(x, y, t)` slice.
pub fn kp_slice_values() -> Vec<Rational> {
    vec![int(1), rat(-2, 3), int(3), rat(1, 2), int(-1), rat(5, 4)]
}

fn schur(args: &SchurArgs) -> Result<Outcome, CliError> {
    let p = Partition::new(args.partition.clone())?;
    let layout = poly_layout((p.size() as usize).max(3));
    let s = schur_lambda::<Rational>(&p, &layout);
    let mut report = json!({ "partition": p.parts(), "variables": layout.len(), "polynomial": s.to_json() });
    let mut pass = true;
    if args.check_hirota {
        let r = kp_hirota_residual(&s);
        pass &= r.is_zero();
        report["hirota"] = json!({ "zero": r.is_zero(), "residual": r.to_json() });
    }
    if args.check_kp {
        let r = kp_pde_residual(&s, &kp_slice_values())?;
        pass &= r.vanishes();
        report["kp_pde"] = json!({
            "zero": r.vanishes(),
            "denominator_power": r.denominator_power,
            "numerator": r.numerator.to_json(),
        });
    }
    report["pass"] = json!(pass);
    Ok(Outcome::checked(report, pass))
}

fn oscillator(args: &OscillatorArgs, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let params = OscillatorParams::new(one_rational(&args.mu)?, one_rational(&args.lambda)?);
    let cap = args.cap.unwrap_or(cfg.fock_cap);
    let mut report = json!({
        "lambda": format_rational(&params.lambda),
        "mu": format_rational(&params.mu),
        "central_charge": format_rational(&params.central_charge()),
        "cap": cap,
    });
    if !args.check {
        return Ok(Outcome::ok(report));
    }
    let mut pairs = Vec::new();
    let mut pass = true;
    for m in -args.range..=args.range {
        for n in -args.range..=args.range {
            let r = oscillator_commutator_check(m, n, &params, cap)?;
            pass &= r.passes();
            pairs.push(json!({
                "m": m,
                "n": n,
                "window_weight": r.window_weight,
                "monomials_checked": r.monomials_checked,
                "failures": r.failures.len(),
                "pass": r.passes(),
            }));
        }
    }
    report["pairs"] = json!(pairs);
    report["pass"] = json!(pass);
    Ok(Outcome::checked(report, pass))
}

fn cohomology(spec: &str) -> Result<CohomologyData, CliError> {
    match spec {
        "point" => Ok(CohomologyData::point()),
        "two-class" => Ok(CohomologyData::two_class_sample()),
        path => Ok(CohomologyData::from_json(&read_file(path.as_ref())?)?),
    }
}

fn target(args: &TargetArgs) -> Result<Outcome, CliError> {
    let data = cohomology(&args.data)?;
    let mut summary = Vec::new();
    let mut full = Vec::new();
    for n1 in -1..=args.max_n {
        for n in n1 + 1..=args.max_n {
            let r = target_commutator_report(n1, n, &data, args.window_levels, args.window_degree)?;
            summary.push(json!({
                "n1": n1,
                "n": n,
                "monomials": r.entries.len(),
                "printed_holds": r.printed_holds(),
                "standard_holds": r.standard_holds(),
            }));
            full.push(serde_json::to_value(&r).expect("report serializes"));
        }
    }
    let mut report = json!({
        "data": data.to_json(),
        "window_levels": args.window_levels,
        "window_degree": args.window_degree,
        "brackets": summary,
    });
    if let Some(path) = &args.report {
        let text = serde_json::to_string(&json!({ "data": data.to_json(), "reports": full })).expect("json") + "\n";
        std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        report["report"] = json!(path.display().to_string());
    }
    Ok(Outcome::ok(report))
}

fn matrix(action: &MatrixAction, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match action {
        MatrixAction::Moment { size, lambda, word } => {
            let w: TraceWord = word.parse()?;
            let spec = match lambda {
                Some(l) => {
                    let l = rationals(l)?;
                    if size.is_some_and(|n| n != l.len()) {
                        return Err(CliError::Usage(format!("--N {} disagrees with {} λ values", size.unwrap(), l.len())));
                    }
                    GaussianSpec::diagonal(l)?
                }
                None => GaussianSpec::Scalar,
            };
            let m = wick_moment_budget(&spec, &w, cfg.max_matchings)?;
            let mode = if lambda.is_some() { "diagonal" } else { "scalar" };
            let mut report = json!({ "word": w.to_string(), "mode": mode, "moment": m.to_json() });
            if let (None, Some(n)) = (lambda, size) {
                if let tauwork::matrix_models::Moment::Laurent(l) = &m {
                    let nq = int(*n as i64);
                    let v: Rational = l.iter().map(|(e, c)| c.clone() * num_traits::pow::Pow::pow(&nq, *e as i32)).sum();
                    report["at_N"] = json!({ "N": n, "value": format_rational(&v) });
                }
            }
            Ok(Outcome::ok(report))
        }
        MatrixAction::Genus { word } => {
            let w: TraceWord = word.parse()?;
            let g = genus_expansion(&w)?;
            let counts: serde_json::Map<String, Value> =
                g.iter().map(|(k, v)| (format!("g{k}"), json!(format_rational(v)))).collect();
            let csv = csv_table(
                &["word", "genus", "pairings"],
                g.iter().map(|(k, v)| vec![w.to_string(), k.to_string(), format_rational(v)]).collect(),
            );
            Ok(Outcome { report: json!({ "word": w.to_string(), "genus": counts }), csv: Some(csv), pass: true })
        }
        MatrixAction::Match { order, lambda } => {
            let r = kontsevich_match(&rationals(lambda)?, *order)?;
            let pass = r.equal;
            Ok(Outcome::checked(serde_json::to_value(&r).expect("report serializes"), pass))
        }
        MatrixAction::Normalization { lambda, tol } => {
            let r = gaussian_normalization_check(&rationals(lambda)?, *tol)?;
            let pass = r.pass;
            Ok(Outcome::checked(serde_json::to_value(&r).expect("report serializes"), pass))
        }
        MatrixAction::Hciz { x, y, samples } => {
            let pair = |v: &[f64], name: &str| -> Result<[f64; 2], CliError> {
                <[f64; 2]>::try_from(v).map_err(|_| CliError::Usage(format!("--{name} needs exactly two values")))
            };
            if *samples < 2 {
                return Err(CliError::Usage("--samples must be at least 2".into()));
            }
            let r = hciz_check(pair(x, "x")?, pair(y, "y")?, *samples, cfg.seed);
            Ok(Outcome::checked(r.to_json(), r.pass))
        }
    }
}

fn torsion_cmd(args: &TorsionArgs) -> Result<Outcome, CliError> {
    let c = BasedChainComplex::from_json(&read_file(&args.complex)?)?;
    let acyclic = c.is_acyclic();
    let mut report = json!({ "ranks": c.ranks(), "acyclic": acyclic });
    if !acyclic {
        report["torsion"] = Value::Null;
        return Ok(Outcome::checked(report, false));
    }
    report["torsion"] = json!(format_rational(&torsion(&c)?));
    let mut pass = true;
    report["order_check"] = match torsion_order_check(&c) {
        Ok(r) => {
            pass = r.pass;
            serde_json::to_value(&r).expect("report serializes")
        }
        // rational boundaries have no integral homology to compare with
        Err(TorsionError::InvalidComplex(_)) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome::checked(report, pass))
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let file: ConfigFile = match &cli.config {
        Some(p) => serde_json::from_str(&read_file(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?,
        None => ConfigFile::default(),
    };
    let d = RunConfig::default();
    Ok(RunConfig {
        seed: cli.seed.or(file.seed).unwrap_or(d.seed),
        threads: cli.threads.or(file.threads),
        max_darts: file.max_darts.unwrap_or(d.max_darts),
        max_matchings: file.max_matchings.unwrap_or(d.max_matchings),
        fock_cap: file.fock_cap.unwrap_or(d.fock_cap),
        kdv_cap: file.kdv_cap.unwrap_or(d.kdv_cap),
        format: cli.format,
        perturbation: cli.inject_perturbation.as_deref().map(Perturbation::parse).transpose()?,
    })
}

/// Runs a parsed command.
pub fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Graphs { action: GraphsAction::Enumerate(a) } => graphs(a, cfg),
        Command::Intersect(a) => intersect(a, cfg),
        Command::Verify(a) => verify(a, cfg),
        Command::Schur(a) => schur(a),
        Command::Virasoro { action: VirasoroAction::Oscillator(a) } => oscillator(a, cfg),
        Command::Virasoro { action: VirasoroAction::Target(a) } => target(a),
        Command::Matrix { action } => matrix(action, cfg),
        Command::Torsion(a) => torsion_cmd(a),
        Command::Suite { level } => {
            let report = suite::run_suite(*level, cfg);
            let pass = report.failed().is_empty();
            let csv = csv_table(
                &["id", "name", "pass"],
                report.criteria.iter().map(|c| vec![c.id.to_string(), c.name.to_string(), c.pass.to_string()]).collect(),
            );
            Ok(Outcome { report: report.to_json(), csv: Some(csv), pass })
        }
    }
}

/// Parses `args`, runs, writes the report and returns the exit code. Output is a single
/// line of compact JSON (keys sorted) or a CSV table.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = load_config(&cli).and_then(|cfg| {
        if let Some(t) = cfg.threads {
            // the global pool can only be set once per process; later calls keep the first size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
        }
        execute(&cli, &cfg)
    });
    match outcome {
        Ok(o) => {
            let text = match (cli.format, &o.csv) {
                (Format::Json, _) => serde_json::to_string(&o.report).expect("json") + "\n",
                (Format::Csv, Some(c)) => c.clone(),
                (Format::Csv, None) => {
                    eprintln!("error: this command has no CSV form; use --format json");
                    return 2;
                }
            };
            if let Err(code) = emit(&cli.output, &text) {
                return code;
            }
            if o.pass {
                0
            } else {
                eprintln!("verification failed");
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<(), i32> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            eprintln!("error: {}: {e}", p.display());
            2
        }),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|_| 2)
        }
    }
}
