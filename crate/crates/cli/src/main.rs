//! `cvdecay`: thresholds, sweeps, single evolutions, the discrepancy report
//! and the Fock oracle check from the command line.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use cvdecay_core::analysis::{
    discrepancy_report, r_critical_global, r_critical_local, r_transition_global,
    r_transition_local, sweep, tau_a, tau_b, tau_c, tau_d,
};
use cvdecay_core::channels::{
    run_scenario, BathSpec, ChannelVariant, GlobalBathSpec, LocalBathSpec, Scenario, TauTime,
};
use cvdecay_core::fock::{run_oracle_check, OracleCheckConfig};
use cvdecay_core::gaussian::min_quadrature_variance;
use cvdecay_core::measures::entanglement_report;
use cvdecay_core::Execution;

use config::FileConfig;
use output::{emit, fmt9, to_rounded_json};

const MAX_STEPS: usize = 1_000_000;
const MAX_DIM: usize = 64;
const DEFAULT_REPORT_GRID: [f64; 6] = [0.1, 0.2, 0.4, 0.6, 1.0, 1.6];
const DEFAULT_ORACLE_TAUS: [f64; 3] = [0.2, 0.5, 0.8];

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    OracleFailed(String),
    Core(cvdecay_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use cvdecay_core::Error as E;
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::OracleFailed(_) => 4,
            CliError::Core(E::StepSize(_) | E::Drift(_)) => 4,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::OracleFailed(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<cvdecay_core::Error> for CliError {
    fn from(e: cvdecay_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "cvdecay",
    version,
    about = "Squeezing vs entanglement of two-mode Gaussian states in thermal baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON file whose keys mirror the long flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write data here (plus a `<output>.meta.json` sidecar) instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct BathArgs {
    /// Decay rate; default for gamma1/gamma2 in local scenarios.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma1: Option<f64>,
    /// Set to 0 for a single local bath on mode 1.
    #[arg(long, allow_hyphen_values = true)]
    gamma2: Option<f64>,
    /// Bath mean photon number; default for nbar1/nbar2 in local scenarios.
    #[arg(long, allow_hyphen_values = true)]
    nbar: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nbar1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    nbar2: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form thresholds, disentanglement times and the resource table.
    Thresholds {
        #[arg(long, allow_hyphen_values = true)]
        nbar: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// E_N, smallest quadrature variance and Simon expression over τ ∈ [0, 1].
    Sweep {
        /// local-case1, local-case2, global-case1 or global-case2.
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        r: Option<f64>,
        #[command(flatten)]
        bath: BathArgs,
        /// paper-literal, lindblad-derived or threshold-consistent.
        #[arg(long)]
        variant: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Final covariance matrix of one scenario at one τ.
    Evolve {
        #[arg(long)]
        scenario: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        r: Option<f64>,
        #[command(flatten)]
        bath: BathArgs,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        tau: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Numeric sudden-death boundaries against every closed form (JSON).
    Report {
        #[arg(long, allow_hyphen_values = true)]
        nbar: Option<f64>,
        /// Comma-separated squeezing grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        r: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Fock-space integration of both master equations vs the Gaussian maps.
    OracleCheck {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        r: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        nbar: Vec<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long)]
        dim: Option<usize>,
        /// Comparison points as τ values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        tau: Vec<f64>,
        /// Compare at this single time instead of the τ grid.
        #[arg(long, allow_hyphen_values = true)]
        total_t: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

fn non_negative(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be a finite number >= 0, got {x}"
        )))
    }
}

fn parse_format(flag: Option<Format>, file: Option<&str>) -> Result<Option<Format>, CliError> {
    if flag.is_some() {
        return Ok(flag);
    }
    file.map(|s| {
        Format::from_str(s, true)
            .map_err(|_| CliError::Usage(format!("unknown format `{s}` (csv or json)")))
    })
    .transpose()
}

fn parse_scenario(flag: Option<String>, file: Option<String>) -> Result<Scenario, CliError> {
    let s = flag
        .or(file)
        .ok_or_else(|| CliError::Usage("--scenario is required".into()))?;
    s.parse().map_err(CliError::Usage)
}

fn parse_variant(flag: Option<String>, file: Option<String>) -> Result<ChannelVariant, CliError> {
    match flag.or(file) {
        Some(s) => s.parse().map_err(CliError::Usage),
        None => Ok(ChannelVariant::default()),
    }
}

fn single(
    flag: Option<f64>,
    file: Option<config::OneOrMany>,
    key: &str,
) -> Result<Option<f64>, CliError> {
    match flag {
        Some(x) => Ok(Some(x)),
        None => file.map(|v| v.single(key)).transpose(),
    }
}

fn list(flag: Vec<f64>, file: Option<config::OneOrMany>, default: &[f64]) -> Vec<f64> {
    if !flag.is_empty() {
        flag
    } else {
        file.map_or_else(|| default.to_vec(), config::OneOrMany::into_vec)
    }
}

/// Local scenarios default to identical baths; `--gamma2 0` gives the
/// single-bath setting.
fn resolve_bath(
    scenario: Scenario,
    args: BathArgs,
    file: &FileConfig,
) -> Result<BathSpec, CliError> {
    let gamma = non_negative("gamma", args.gamma.or(file.gamma).unwrap_or(1.0))?;
    let nbar = non_negative(
        "nbar",
        single(args.nbar, file.nbar.clone(), "nbar")?.unwrap_or(0.0),
    )?;
    if scenario.is_local() {
        let g1 = non_negative("gamma1", args.gamma1.or(file.gamma1).unwrap_or(gamma))?;
        let g2 = non_negative("gamma2", args.gamma2.or(file.gamma2).unwrap_or(gamma))?;
        let n1 = non_negative("nbar1", args.nbar1.or(file.nbar1).unwrap_or(nbar))?;
        let n2 = non_negative("nbar2", args.nbar2.or(file.nbar2).unwrap_or(nbar))?;
        if g1 == 0.0 && g2 == 0.0 {
            return Err(CliError::Usage(
                "at least one of --gamma1/--gamma2 must be positive".into(),
            ));
        }
        Ok(BathSpec::Local(LocalBathSpec::new(g1, g2, n1, n2)?))
    } else {
        if gamma == 0.0 {
            return Err(CliError::Usage("--gamma must be positive".into()));
        }
        Ok(BathSpec::Global(GlobalBathSpec::new(gamma, nbar)?))
    }
}

fn cmd_thresholds(nbar: Option<f64>, common: Common) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let n = non_negative("nbar", single(nbar, file.nbar, "nbar")?.unwrap_or(4.0))?;
    let format = parse_format(common.format, file.format.as_deref())?;
    let output = common.output.or(file.output);

    let (rcl, rtl, rcg, rtg) = (
        r_critical_local(n)?,
        r_transition_local(n)?,
        r_critical_global(n)?,
        r_transition_global(n)?,
    );
    let (tb, td) = (tau_b(n)?, tau_d(n)?);
    // At N = 0 every threshold collapses to r = 0 and the identities are vacuous.
    let residuals = if n > 0.0 {
        let t = |x: Option<f64>| x.unwrap_or(f64::NAN);
        vec![
            ("tau_a(r_c^L) - 1", t(tau_a(rcl, n)?) - 1.0),
            ("tau_c(r_c^G) - 1", t(tau_c(rcg, n)?) - 1.0),
            ("tau_a(r_t^L) - tau_b", t(tau_a(rtl, n)?) - tb),
            ("tau_c(r_t^G) - tau_d", t(tau_c(rtg, n)?) - td),
        ]
    } else {
        Vec::new()
    };
    let values = [
        ("r_c^L", rcl),
        ("r_t^L", rtl),
        ("r_c^G", rcg),
        ("r_t^G", rtg),
        ("tau_b", tb),
        ("tau_d", td),
    ];
    let bands = [
        (
            "identical local baths",
            "any r".to_string(),
            "squeezing = entanglement",
        ),
        (
            "single local bath",
            format!("|r| < {}", fmt9(rtl)),
            "entanglement better",
        ),
        (
            "single local bath",
            format!("|r| > {}", fmt9(rtl)),
            "squeezing better",
        ),
        (
            "global bath",
            format!("|r| < {}", fmt9(rtg)),
            "squeezing better",
        ),
        (
            "global bath",
            format!("|r| > {}", fmt9(rtg)),
            "entanglement better",
        ),
    ];

    let text = match format {
        Some(Format::Json) => to_rounded_json(&json!({
            "nbar": n,
            "thresholds": values.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
            "classification": bands.iter().map(|(env, range, res)| json!({"environment": env, "range": range, "result": res})).collect::<Vec<_>>(),
            "identity_residuals": residuals.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        })),
        Some(Format::Csv) => {
            let mut s = String::from("quantity,value\n");
            s += &format!("nbar,{}\n", fmt9(n));
            for (k, v) in values.iter().chain(&residuals) {
                s += &format!("{k},{}\n", fmt9(*v));
            }
            s
        }
        None => {
            let mut s = format!("nbar = {}\n\n", fmt9(n));
            for (k, v) in values {
                s += &format!("{k:<7} {}\n", fmt9(v));
            }
            s += "\nresource classification (closed-form r_t)\n";
            for (env, range, res) in &bands {
                s += &format!("  {env:<22} {range:<18} {res}\n");
            }
            if residuals.is_empty() {
                s += "\nidentity residuals: degenerate at nbar = 0\n";
            } else {
                s += "\nidentity residuals\n";
                for (k, v) in &residuals {
                    s += &format!("  {k:<22} {v:.3e}\n");
                }
            }
            s
        }
    };
    emit(
        output.as_deref(),
        &text,
        json!({"command": "thresholds", "nbar": n}),
    )
}

struct ScenarioArgs {
    scenario: Option<String>,
    r: Option<f64>,
    bath: BathArgs,
    variant: Option<String>,
}

struct ResolvedScenario {
    scenario: Scenario,
    r: f64,
    bath: BathSpec,
    variant: ChannelVariant,
}

fn resolve_scenario(args: ScenarioArgs, file: &FileConfig) -> Result<ResolvedScenario, CliError> {
    let scenario = parse_scenario(args.scenario, file.scenario.clone())?;
    let r = non_negative("r", single(args.r, file.r.clone(), "r")?.unwrap_or(0.0))?;
    let bath = resolve_bath(scenario, args.bath, file)?;
    let variant = parse_variant(args.variant, file.variant.clone())?;
    Ok(ResolvedScenario {
        scenario,
        r,
        bath,
        variant,
    })
}

fn cmd_sweep(args: ScenarioArgs, steps: Option<usize>, common: Common) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let sc = resolve_scenario(args, &file)?;
    let steps = steps.or(file.steps).unwrap_or(201);
    if !(2..=MAX_STEPS).contains(&steps) {
        return Err(CliError::Usage(format!(
            "--steps must lie in [2, {MAX_STEPS}], got {steps}"
        )));
    }
    let format = parse_format(common.format, file.format.as_deref())?.unwrap_or(Format::Csv);
    let output = common.output.or(file.output);

    let curve = sweep(sc.scenario, sc.r, &sc.bath, sc.variant, steps)?;
    let text = match format {
        Format::Csv => {
            let mut s = String::from("tau,e_n,lambda_min,simon_lhs\n");
            for p in &curve.samples {
                s += &format!(
                    "{},{},{},{}\n",
                    fmt9(p.tau),
                    fmt9(p.e_n),
                    fmt9(p.lambda_min),
                    fmt9(p.simon_lhs)
                );
            }
            s
        }
        Format::Json => to_rounded_json(&curve),
    };
    let meta = json!({
        "command": "sweep",
        "scenario": sc.scenario.name(),
        "r": sc.r,
        "bath": sc.bath,
        "variant": sc.variant.name(),
        "steps": steps,
    });
    emit(output.as_deref(), &text, meta)
}

fn cmd_evolve(args: ScenarioArgs, tau: Option<f64>, common: Common) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let sc = resolve_scenario(args, &file)?;
    let tau = single(tau, file.tau.clone(), "tau")?.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&tau) {
        return Err(CliError::Usage(format!(
            "--tau must lie in [0, 1], got {tau}"
        )));
    }
    let format = parse_format(common.format, file.format.as_deref())?.unwrap_or(Format::Json);
    let output = common.output.or(file.output);

    let state = run_scenario(sc.scenario, sc.r, &sc.bath, TauTime::new(tau)?, sc.variant)?;
    let rep = entanglement_report(&state.cov)?;
    let v = state.cov.matrix();
    let labels = ["q1", "p1", "q2", "p2"];
    let text = match format {
        Format::Csv => {
            let mut s = String::from("row,q1,p1,q2,p2\n");
            for (i, label) in labels.iter().enumerate() {
                let row: Vec<String> = (0..4).map(|j| fmt9(v[(i, j)])).collect();
                s += &format!("{label},{}\n", row.join(","));
            }
            s
        }
        Format::Json => to_rounded_json(&json!({
            "scenario": sc.scenario.name(),
            "r": sc.r,
            "tau": tau,
            "variant": sc.variant.name(),
            "bath": sc.bath,
            "cov": (0..4).map(|i| (0..4).map(|j| v[(i, j)]).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "mean": state.mean.iter().collect::<Vec<_>>(),
            "e_n": rep.log_negativity,
            "n_minus": rep.n_minus,
            "simon_lhs": rep.simon_lhs,
            "separable": rep.separable,
            "lambda_min": min_quadrature_variance(&state.cov),
        })),
    };
    let meta = json!({
        "command": "evolve",
        "scenario": sc.scenario.name(),
        "r": sc.r,
        "tau": tau,
        "bath": sc.bath,
        "variant": sc.variant.name(),
    });
    emit(output.as_deref(), &text, meta)
}

fn cmd_report(nbar: Option<f64>, r: Vec<f64>, common: Common) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let n = non_negative(
        "nbar",
        single(nbar, file.nbar.clone(), "nbar")?.unwrap_or(4.0),
    )?;
    let grid = list(r, file.r.clone(), &DEFAULT_REPORT_GRID);
    for &x in &grid {
        non_negative("r", x)?;
    }
    let format = parse_format(common.format, file.format.as_deref())?.unwrap_or(Format::Json);
    let output = common.output.or(file.output);

    let report = discrepancy_report(n, &grid)?;
    let text = match format {
        Format::Json => to_rounded_json(&report),
        Format::Csv => {
            let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), fmt9);
            let mut s = String::from(
                "variant,scenario,nbar,r,closed_form,numeric,closed_form_value,abs_diff,matches\n",
            );
            for row in &report.rows {
                s += &format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    row.variant.map_or("none", |v| v.name()),
                    row.scenario.name(),
                    fmt9(row.nbar),
                    fmt9(row.r),
                    serde_json::to_value(row.closed_form_name)
                        .expect("serializable")
                        .as_str()
                        .unwrap_or(""),
                    opt(row.numeric),
                    opt(row.closed_form),
                    opt(row.abs_diff),
                    row.matches
                );
            }
            s
        }
    };
    emit(
        output.as_deref(),
        &text,
        json!({"command": "report", "nbar": n, "r_grid": grid}),
    )
}

struct OracleArgs {
    r: Vec<f64>,
    nbar: Vec<f64>,
    gamma: Option<f64>,
    dim: Option<usize>,
    tau: Vec<f64>,
    total_t: Option<f64>,
}

fn cmd_oracle_check(args: OracleArgs, common: Common) -> Result<(), CliError> {
    let file = FileConfig::load(common.config.as_deref())?;
    let r_values = list(args.r, file.r.clone(), &[0.3]);
    let nbar_values = list(args.nbar, file.nbar.clone(), &[1.0]);
    for &x in &r_values {
        non_negative("r", x)?;
    }
    for &x in &nbar_values {
        non_negative("nbar", x)?;
    }
    let gamma = non_negative("gamma", args.gamma.or(file.gamma).unwrap_or(1.0))?;
    if gamma == 0.0 {
        return Err(CliError::Usage("--gamma must be positive".into()));
    }
    let dim = args.dim.or(file.dim).unwrap_or(25);
    if dim > MAX_DIM {
        return Err(CliError::Usage(format!(
            "--dim must be at most {MAX_DIM}, got {dim}"
        )));
    }
    let times = match args.total_t.or(file.total_t) {
        Some(t) => vec![non_negative("total-t", t)?],
        None => {
            let taus = list(args.tau, file.tau.clone(), &DEFAULT_ORACLE_TAUS);
            if let Some(bad) = taus.iter().find(|t| !(0.0..1.0).contains(*t)) {
                return Err(CliError::Usage(format!(
                    "--tau values must lie in [0, 1), got {bad}"
                )));
            }
            OracleCheckConfig::times_for_taus(gamma, &taus)?
        }
    };
    let format = parse_format(common.format, file.format.as_deref())?;
    let output = common.output.or(file.output);

    let cfg = OracleCheckConfig {
        r_values,
        nbar_values,
        gamma,
        times,
        dim,
    };
    let start = Instant::now();
    let report = run_oracle_check(&cfg, Execution::default())?;
    let verdict = |x: f64| {
        if x <= report.tolerance {
            "PASS"
        } else {
            "FAIL"
        }
    };
    let summary = format!(
        "oracle-check dim={} comparisons={} tol={:e}\nlocal  max |dV| = {:.3e} {}\nglobal max |dV| = {:.3e} {}\n",
        report.dim,
        report.entries.len(),
        report.tolerance,
        report.max_deviation_local,
        verdict(report.max_deviation_local),
        report.max_deviation_global,
        verdict(report.max_deviation_global),
    );
    match (format, &output) {
        (Some(Format::Json), _) | (_, Some(_)) => {
            if output.is_some() {
                print!("{summary}");
            }
            let meta = json!({
                "command": "oracle-check",
                "config": cfg,
                "elapsed_s": start.elapsed().as_secs_f64(),
            });
            emit(output.as_deref(), &to_rounded_json(&report), meta)?;
        }
        _ => print!("{summary}"),
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::OracleFailed(format!(
            "oracle deviation above {:e} (local {:e}, global {:e})",
            report.tolerance, report.max_deviation_local, report.max_deviation_global
        )))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CVDECAY_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "CVDECAY_THREADS must be a positive integer, got `{raw}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Thresholds { nbar, common } => cmd_thresholds(nbar, common),
        Command::Sweep {
            scenario,
            r,
            bath,
            variant,
            steps,
            common,
        } => cmd_sweep(
            ScenarioArgs {
                scenario,
                r,
                bath,
                variant,
            },
            steps,
            common,
        ),
        Command::Evolve {
            scenario,
            r,
            bath,
            variant,
            tau,
            common,
        } => cmd_evolve(
            ScenarioArgs {
                scenario,
                r,
                bath,
                variant,
            },
            tau,
            common,
        ),
        Command::Report { nbar, r, common } => cmd_report(nbar, r, common),
        Command::OracleCheck {
            r,
            nbar,
            gamma,
            dim,
            tau,
            total_t,
            common,
        } => cmd_oracle_check(
            OracleArgs {
                r,
                nbar,
                gamma,
                dim,
                tau,
                total_t,
            },
            common,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cvdecay: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
