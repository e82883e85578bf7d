//! Command-line front end: run verification scenarios, sweep parameters,
//! list the check registry, and export curve/patch data.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
//! 3 numerical failure during construction (a partial report is written).

use clap::{Parser, Subcommand};
use parangle::checks::{self, BuiltObject, VerificationReport, CHECKS};
use parangle::config::{parse_number, ConfigMap, ScenarioConfig};
use parangle::error::Error;
use parangle::export;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "parangle", version, about = "constant-angle geometry laboratory")]
struct Cli {
    /// worker threads for patch construction (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the configured object, run its checks, write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// output directory (default: value of output.dir or `out`)
        #[arg(long)]
        out: Option<PathBuf>,
        /// tolerance override, repeatable: --tol lancret=1e-6
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tols: Vec<String>,
    },
    /// Re-run the scenario over a list of values for one numeric key.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// numeric configuration key to vary, e.g. manifold.radius
        #[arg(long)]
        param: String,
        /// comma-separated values
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "tol", value_name = "NAME=VALUE")]
        tols: Vec<String>,
    },
    /// Print the check registry with default tolerances.
    ListChecks,
    /// Build the configured object and write CSV/OBJ artifacts only.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let code = match cli.command {
        Command::Run { config, out, tols } => cmd_run(&config, out, &tols),
        Command::Sweep { config, param, values, out, tols } => {
            cmd_sweep(&config, &param, &values, out, &tols)
        }
        Command::ListChecks => {
            cmd_list_checks();
            0
        }
        Command::Export { config, out } => cmd_export(&config, out),
    };
    ExitCode::from(code)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::ConfigError(_) | Error::InvalidInput(_) => 2,
        _ => 3,
    }
}

fn apply_tols(map: &mut ConfigMap, tols: &[String]) -> Result<(), Error> {
    for t in tols {
        let (name, value) = t.split_once('=').ok_or_else(|| {
            Error::ConfigError(format!("--tol expects NAME=VALUE, got `{t}`"))
        })?;
        parse_number(value)
            .ok_or_else(|| Error::ConfigError(format!("--tol value `{value}` is not a number")))?;
        map.set(&format!("tol.{name}"), value);
    }
    Ok(())
}

fn load_scenario(path: &Path, tols: &[String]) -> Result<ScenarioConfig, Error> {
    let mut map = ConfigMap::load(path)?;
    apply_tols(&mut map, tols)?;
    ScenarioConfig::from_map(map)
}

fn out_dir(cfg: &ScenarioConfig, cli_out: Option<PathBuf>) -> PathBuf {
    cli_out.unwrap_or_else(|| PathBuf::from(cfg.raw.get("output.dir").unwrap_or("out")))
}

fn print_reports(reports: &[VerificationReport]) {
    for r in reports {
        println!(
            "{} {:<28} sup {:>12.4e}  mean {:>12.4e}  tol {:>9.1e}  [{:.1} ms]",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.sup_residual,
            r.mean_residual,
            r.tolerance,
            r.wall_time_ms
        );
    }
}

fn write_artifacts(
    dir: &Path,
    cfg: &ScenarioConfig,
    scenario: &checks::BuiltScenario,
    reports: &[VerificationReport],
) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let report_name = cfg.raw.get("output.report").unwrap_or("report.txt").to_string();
    std::fs::write(dir.join(report_name), export::report_text(reports))?;
    let want_csv = cfg.raw.bool_or("output.csv", true)?;
    let want_obj = cfg.raw.bool_or("output.obj", false)?;
    match &scenario.object {
        BuiltObject::Curve { path, frenet, axis, .. } => {
            if want_csv {
                let mut annotated = path.clone();
                annotated.attach_field("V", axis.v.clone());
                std::fs::write(dir.join("curve.csv"), export::path_csv(&annotated))?;
                std::fs::write(dir.join("frenet.csv"), export::frenet_csv(frenet))?;
            }
        }
        BuiltObject::Surface { patch, axis, directrix } => {
            if want_csv {
                std::fs::write(
                    dir.join("patch.csv"),
                    export::patch_csv(patch, axis.as_ref())?,
                )?;
                if let Some((path, frenet)) = directrix {
                    std::fs::write(dir.join("directrix.csv"), export::path_csv(path))?;
                    std::fs::write(dir.join("directrix_frenet.csv"), export::frenet_csv(frenet))?;
                }
            }
            if want_obj {
                std::fs::write(dir.join("patch.obj"), export::patch_obj(patch))?;
            }
        }
    }
    Ok(())
}

fn cmd_run(config: &Path, out: Option<PathBuf>, tols: &[String]) -> u8 {
    let cfg = match load_scenario(config, tols) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return 2;
        }
    };
    let dir = out_dir(&cfg, out);
    match checks::run_scenario(cfg.clone()) {
        Ok((scenario, reports)) => {
            print_reports(&reports);
            if let Err(e) = write_artifacts(&dir, &cfg, &scenario, &reports) {
                eprintln!("write error: {e}");
                return 3;
            }
            if reports.iter().all(|r| r.pass) {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let code = exit_code_for(&e);
            eprintln!(
                "{}: {e}",
                if code == 2 { "configuration error" } else { "numerical failure" }
            );
            if code == 3 {
                // partial report records the failure itself
                let _ = std::fs::create_dir_all(&dir);
                let text =
                    format!("report.checks = 0\nreport.pass = false\nreport.error = {e}\n");
                let _ = std::fs::write(dir.join("report.txt"), text);
            }
            code
        }
    }
}

fn cmd_sweep(config: &Path, param: &str, values: &str, out: Option<PathBuf>, tols: &[String]) -> u8 {
    let parsed: Vec<f64> = match values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| parse_number(v).ok_or(()))
        .collect::<Result<Vec<_>, ()>>()
    {
        Ok(v) => v,
        Err(()) => {
            eprintln!("configuration error: sweep values must be numbers");
            return 2;
        }
    };
    if parsed.is_empty() {
        eprintln!("configuration error: empty sweep value list");
        return 2;
    }
    let mut base = match ConfigMap::load(config) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return 2;
        }
    };
    if let Err(e) = apply_tols(&mut base, tols) {
        eprintln!("configuration error: {e}");
        return 2;
    }
    // the swept key must be numeric in the base configuration too
    if let Some(existing) = base.get(param) {
        if parse_number(existing).is_none() {
            eprintln!("configuration error: key `{param}` is not numeric");
            return 2;
        }
    }

    let mut rows = Vec::new();
    let mut dir_cfg: Option<ScenarioConfig> = None;
    for &value in &parsed {
        let mut map = base.clone();
        map.set(param, &format!("{value}"));
        let cfg = match ScenarioConfig::from_map(map) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("configuration error at {param} = {value}: {e}");
                return 2;
            }
        };
        if dir_cfg.is_none() {
            dir_cfg = Some(cfg.clone());
        }
        match checks::run_scenario(cfg) {
            Ok((_scenario, reports)) => {
                println!("{param} = {value}");
                print_reports(&reports);
                rows.push((value, reports));
            }
            Err(e) => {
                let code = exit_code_for(&e);
                eprintln!("failure at {param} = {value}: {e}");
                return code;
            }
        }
    }
    let dir = out_dir(dir_cfg.as_ref().unwrap(), out);
    if let Err(e) = std::fs::create_dir_all(&dir).map_err(Error::from).and_then(|_| {
        std::fs::write(dir.join("sweep.csv"), export::sweep_csv(param, &rows)).map_err(Error::from)
    }) {
        eprintln!("write error: {e}");
        return 3;
    }
    if rows.iter().all(|(_, rs)| rs.iter().all(|r| r.pass)) {
        0
    } else {
        1
    }
}

fn cmd_list_checks() {
    println!("{:<28} {:>9}  property", "check", "tol");
    for c in CHECKS {
        println!("{:<28} {:>9.1e}  {}", c.name, c.default_tol, c.property);
    }
}

fn cmd_export(config: &Path, out: Option<PathBuf>) -> u8 {
    let cfg = match load_scenario(config, &[]) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return 2;
        }
    };
    let dir = out_dir(&cfg, out);
    match checks::build_scenario(cfg.clone()) {
        Ok(scenario) => {
            // force OBJ output for surfaces on export unless disabled
            let mut cfg2 = cfg.clone();
            if cfg2.raw.get("output.obj").is_none() {
                cfg2.raw.set("output.obj", "true");
            }
            if let Err(e) = write_artifacts(&dir, &cfg2, &scenario, &[]) {
                eprintln!("write error: {e}");
                return 3;
            }
            println!("wrote artifacts to {}", dir.display());
            0
        }
        Err(e) => {
            let code = exit_code_for(&e);
            eprintln!("{e}");
            code
        }
    }
}
