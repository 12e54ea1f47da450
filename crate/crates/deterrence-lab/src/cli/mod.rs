//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration error, 2 no equilibrium,
//! 3 verification failure, 4 non-convergence.

mod config;
mod output;

pub use config::{RunConfig, KEYS};
pub use output::{
    fmt_num, monte_carlo_csv, sweep_csv, write_atomic, SimulateRecord, SolveRecord, VerifyRecord, SCHEMA_VERSION,
    SWEEP_HEADER,
};

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgMatches, Command};

use crate::equilibrium::{solve, solve_app_complements, Regime};
use crate::error::LabError;
use crate::game_model::{judge_app, judge_dpp, Decision, PrincipalStrategy, StrategyProfile};
use crate::sweeps::{compare_n, parse_grid, sweep_l, ComparisonStatus};
use crate::verification::{best_response_residuals, monte_carlo};

pub const THREADS_ENV: &str = "DETERRENCE_LAB_THREADS";

fn keyed(cmd: Command) -> Command {
    let cmd = cmd.arg(Arg::new("config").long("config").value_name("PATH").help("key=value config file"));
    KEYS.iter().fold(cmd, |cmd, k| cmd.arg(Arg::new(*k).long(*k).value_name("VALUE")))
}

fn command() -> Command {
    Command::new("deterrence-lab")
        .about("Equilibria of the offender-witnesses-judge game under aggregate and distinct adjudication")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommand(keyed(Command::new("solve").about("Solve one regime and print the equilibrium as JSON")))
        .subcommand(keyed(Command::new("verify").about("Recompute best-response residuals of a saved profile")))
        .subcommand(keyed(Command::new("simulate").about("Monte Carlo simulation of a saved profile")))
        .subcommand(keyed(Command::new("sweep").about("Solve along a punishment grid and emit CSV")))
        .subcommand(keyed(Command::new("compare-n").about("Compare equilibria at two population sizes")))
        .subcommand(Command::new("demo-intro").about("Worked two-defendant examples"))
}

/// Config file first, then flags on top.
fn run_config(m: &ArgMatches) -> Result<RunConfig, LabError> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(path) => RunConfig::load(Path::new(path))?,
        None => RunConfig::default(),
    };
    for k in KEYS {
        if let Some(v) = m.get_one::<String>(k) {
            cfg.set(k, v)?;
        }
    }
    Ok(cfg)
}

fn configure_threads() -> Result<(), LabError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| LabError::invalid(THREADS_ENV, format!("expected a thread count, got {raw:?}")))?;
    if n > 0 {
        // a pool may already exist when called twice in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn emit(cfg: &RunConfig, bytes: &[u8]) -> Result<(), LabError> {
    match cfg.raw("output") {
        Some(path) => write_atomic(Path::new(path), bytes),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| LabError::Io { path: "<stdout>".into(), source }),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Vec<u8>, LabError> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s.into_bytes())
}

/// Read a strategy profile from a solve record, an equilibrium or a bare profile.
pub fn load_profile(path: &Path) -> Result<StrategyProfile, LabError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.display().to_string(), source })?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let inner = if let Some(eq) = value.get("equilibrium") {
        eq.get("profile").cloned().unwrap_or(serde_json::Value::Null)
    } else if let Some(p) = value.get("profile") {
        p.clone()
    } else {
        value
    };
    let profile: StrategyProfile = serde_json::from_value(inner)?;
    profile.validate()?;
    Ok(profile)
}

fn cmd_solve(cfg: &RunConfig) -> Result<i32, LabError> {
    let params = cfg.game_params()?;
    let solver = cfg.solver()?;
    let regime = cfg.regime()?;
    let q_target: Option<f64> = cfg.get("q_target")?;
    let result = match (regime, q_target) {
        (Regime::AppComplements, Some(q)) => solve_app_complements(&params, q, &solver),
        (_, Some(_)) => return Err(LabError::invalid("q_target", "only used by the app-complements regime")),
        _ => solve(regime, &params, &solver),
    };
    match result {
        Ok(eq) => {
            emit(cfg, &to_json(&SolveRecord::solved(eq))?)?;
            Ok(0)
        }
        Err(e @ (LabError::NoEquilibrium(_) | LabError::NonConvergence(_))) => {
            emit(cfg, &to_json(&SolveRecord::failed(regime.cli_name(), &e))?)?;
            eprintln!("{e}");
            Ok(e.exit_code())
        }
        Err(e) => Err(e),
    }
}

fn profile_path(cfg: &RunConfig) -> Result<PathBuf, LabError> {
    cfg.raw("profile").map(PathBuf::from).ok_or_else(|| LabError::invalid("profile", "required"))
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32, LabError> {
    let profile = load_profile(&profile_path(cfg)?)?;
    let tol = cfg.solver()?.tol;
    let diagnostics = best_response_residuals(&profile)?;
    let max_gap = diagnostics.max_gap();
    let pass = diagnostics.passes(tol);
    emit(cfg, &to_json(&VerifyRecord { schema_version: SCHEMA_VERSION, tol, pass, max_gap, diagnostics })?)?;
    if pass {
        Ok(0)
    } else {
        eprintln!("largest best-response gap {max_gap:e} exceeds {tol:e}");
        Ok(3)
    }
}

fn cmd_simulate(cfg: &RunConfig) -> Result<i32, LabError> {
    let profile = load_profile(&profile_path(cfg)?)?;
    let seed: u64 = cfg.get("seed")?.ok_or_else(|| LabError::invalid("seed", "simulate requires an explicit seed"))?;
    let draws: u64 = cfg.get("draws")?.unwrap_or(1_000_000);
    let report = monte_carlo(&profile, draws, seed)?;
    let csv = monte_carlo_csv(&report)?;
    let record = SimulateRecord { schema_version: SCHEMA_VERSION, max_z: report.max_z(), report };
    emit(cfg, &to_json(&record)?)?;
    if let Some(out) = cfg.raw("output") {
        write_atomic(&Path::new(out).with_extension("csv"), &csv)?;
    }
    Ok(0)
}

fn cmd_sweep(cfg: &RunConfig) -> Result<i32, LabError> {
    let params = cfg.game_params()?;
    let solver = cfg.solver()?;
    let regime = cfg.regime()?;
    let grid = parse_grid(cfg.raw("grid").ok_or_else(|| LabError::invalid("grid", "required"))?)?;
    let rows = sweep_l(&params, &grid, regime, &solver)?;
    emit(cfg, &sweep_csv(&rows)?)?;
    Ok(0)
}

fn cmd_compare_n(cfg: &RunConfig) -> Result<i32, LabError> {
    let params = cfg.game_params()?;
    let solver = cfg.solver()?;
    let regime = if cfg.raw("regime").is_some() { cfg.regime()? } else { Regime::AppOneType };
    let n_small: usize = cfg.require("n_small")?;
    let n_large: usize = cfg.require("n_large")?;
    let cmp = compare_n(&params, n_small, n_large, params.l, regime, &solver)?;
    emit(cfg, &sweep_csv(&[cmp.small.clone(), cmp.large.clone()])?)?;
    for o in &cmp.orderings {
        eprintln!("{}: n={} {} vs n={} {} -> {}", o.name, n_small, o.small, n_large, o.large, if o.holds { "ok" } else { "violated" });
    }
    eprintln!("status: {:?}", cmp.status);
    Ok(match cmp.status {
        ComparisonStatus::Ordered | ComparisonStatus::Incomparable => 0,
        ComparisonStatus::Violated => 3,
    })
}

fn decision(d: Decision) -> &'static str {
    match d {
        Decision::Convict => "convict",
        Decision::Acquit => "acquit",
        Decision::Indifferent => "indifferent",
    }
}

/// The two-defendant comparisons, as printed text.
pub fn demo_intro_text() -> String {
    let mut out = String::new();
    let indep = PrincipalStrategy::Full { probs: vec![0.2 * 0.2, 0.8 * 0.2, 0.2 * 0.8, 0.8 * 0.8] };
    let agg = indep.aggregate_guilt_prior(2);
    out += "Two independent charges, each 80% likely, threshold 0.9\n";
    out += &format!("  aggregate probability of guilt: 1 - 0.2 x 0.2 = {agg:.2}\n");
    out += &format!("  aggregate rule: {}\n", decision(judge_app(&[agg], 0.9)[0]));
    out += &format!("  distinct rule:  {}\n\n", decision(judge_dpp(&[vec![0.8, 0.8]], 0.9)[0]));

    let d1 = PrincipalStrategy::Full { probs: vec![0.01, 0.495, 0.495, 0.0] };
    let agg1 = d1.aggregate_guilt_prior(2);
    let d2 = 0.51;
    out += "Threshold 0.5\n";
    out += &format!("  defendant 1: two charges at 49.5% each, never both; aggregate {agg1:.2}\n");
    out += &format!("  defendant 2: one charge at {:.0}%\n", d2 * 100.0);
    let app = judge_app(&[agg1, d2], 0.5);
    let dpp = judge_dpp(&[vec![0.495, 0.495], vec![d2]], 0.5);
    out += &format!("  aggregate rule: defendant 1 {}, defendant 2 {}\n", decision(app[0]), decision(app[1]));
    out += &format!("  distinct rule:  defendant 1 {}, defendant 2 {}\n", decision(dpp[0]), decision(dpp[1]));
    out
}

fn dispatch(m: &ArgMatches) -> Result<i32, LabError> {
    configure_threads()?;
    let (name, sub) = m.subcommand().expect("subcommand required");
    if name == "demo-intro" {
        print!("{}", demo_intro_text());
        return Ok(0);
    }
    let cfg = run_config(sub)?;
    match name {
        "solve" => cmd_solve(&cfg),
        "verify" => cmd_verify(&cfg),
        "simulate" => cmd_simulate(&cfg),
        "sweep" => cmd_sweep(&cfg),
        "compare-n" => cmd_compare_n(&cfg),
        _ => unreachable!("unknown subcommand {name}"),
    }
}

/// Parse arguments, run the command and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let m = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&m) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_text() {
        let t = demo_intro_text();
        assert!(t.contains("= 0.96"));
        assert!(t.contains("aggregate rule: convict"));
        assert!(t.contains("distinct rule:  acquit"));
        assert!(t.contains("aggregate 0.99"));
        assert!(t.contains("distinct rule:  defendant 1 acquit, defendant 2 convict"));
    }

    #[test]
    fn unknown_flag_is_config_error() {
        assert_eq!(run(["deterrence-lab", "solve", "--bogus", "1"]), 1);
        assert_eq!(run(["deterrence-lab", "solve", "--regime", "single", "--delta", "1.5"]), 1);
        assert_eq!(run(["deterrence-lab", "simulate", "--profile", "x.json"]), 1);
    }

    #[test]
    fn all_commands_listed() {
        let names: Vec<String> = command().get_subcommands().map(|c| c.get_name().to_string()).collect();
        assert_eq!(names, ["solve", "verify", "simulate", "sweep", "compare-n", "demo-intro"]);
    }
}
