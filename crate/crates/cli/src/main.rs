//! `anomalab`: command-line front end for the singular-product experiments.

mod commands;
mod config;
mod error;
mod output;
mod plot;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Value};

use config::{OutputOptions, RunConfig, Task};
use error::CliError;

const AFTER_HELP: &str = "\
Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 failed assertion or golden mismatch.

With --out DIR each run writes DIR/<command>.json (command, params, result, checks),
DIR/<command>.csv and, with --plot, DIR/<command>.svg. CSV columns per command:
  identities   id,statement,exact  (speed-family: a,b,c,on_family,residual_zero,residual)
  fourier      k,transform
  pair         exact: eps,re,im,richardson_re,richardson_im,abs_error
               trichotomy: p,eps,re,im
               model-product: mollifier,part,eps,re,im,relative_error
  blowup       eps,t_measured,t_pred,ratio,location,fitted_slope
  evolve       x,re,im  (final level)
  wave         h,tau,steps,sup_deviation,u0_sup,relative_deviation,energy_drift
  pseudofun    example,residual,testfn,value,quad_error
  weakasym     kind,example,testfn,m,eps,value
  growth       region,order,b,stderr,residual
  forecast     lines: generation,x0,t0,speed; anomaly: net,t,forecast,measured,distance
  report       criterion,title,pass,invocation

Floats are written with 17 significant digits. ANOMALAB_QUAD_TOL overrides the
quadrature tolerances. A JSON run config (--config FILE) has the form
{\"subcommand\": ..., \"params\": {...}, \"output\": {...}}.";

#[derive(Debug, Parser)]
#[command(name = "anomalab", version, about = "Products of singular distributions in nonlinear PDEs", after_help = AFTER_HELP)]
pub struct Cli {
    /// JSON run configuration (instead of a subcommand)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputOptions,
    #[command(subcommand)]
    pub command: Option<Task>,
}

fn resolve(cli: Cli) -> Result<(Task, OutputOptions), CliError> {
    match (cli.command, cli.config) {
        (Some(_), Some(_)) => Err(CliError::Validation("give either a subcommand or --config, not both".into())),
        (None, None) => Err(CliError::Validation(format!(
            "missing subcommand (one of {})",
            config::SUBCOMMANDS.join(", ")
        ))),
        (Some(task), None) => Ok((task, cli.output)),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
            let (task, file_opts) = RunConfig::parse(&text)?;
            Ok((task, merge(file_opts, cli.output)))
        }
    }
}

/// Flags given on the command line win over the config file.
fn merge(file: OutputOptions, flags: OutputOptions) -> OutputOptions {
    OutputOptions {
        dir: flags.dir.or(file.dir),
        plot: flags.plot || file.plot,
        assert: flags.assert || file.assert,
        golden: flags.golden.or(file.golden),
        write_golden: flags.write_golden.or(file.write_golden),
        golden_rtol: flags.golden_rtol.or(file.golden_rtol),
        format: flags.format.or(file.format),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    output::write_atomic(path, contents).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn execute(task: Task, opts: OutputOptions) -> Result<(), CliError> {
    if opts.plot && opts.dir.is_none() {
        return Err(CliError::Validation("--plot needs --out".into()));
    }
    if let Some(f) = opts.format.as_deref() {
        if !["json", "csv", "text"].contains(&f) {
            return Err(CliError::Validation(format!("unknown format `{f}` (json, csv, text)")));
        }
    }
    if opts.golden_rtol.is_some_and(|r| !(r >= 0.0)) {
        return Err(CliError::Validation("--golden-rtol must be non-negative".into()));
    }
    let ctx = commands::Context::from_env()?;
    let name = task.name();
    let outcome = commands::run(&task, &ctx)?;
    let doc = json!({
        "command": name,
        "params": task.params_json(),
        "result": outcome.result,
        "checks": outcome.checks,
    });
    let json_text = output::to_json_string(&doc);
    let csv = outcome.table.as_ref().map(|t| t.to_csv());

    if let Some(dir) = &opts.dir {
        write(&dir.join(format!("{name}.json")), &json_text)?;
        if let Some(csv) = &csv {
            write(&dir.join(format!("{name}.csv")), csv)?;
        }
        if opts.plot {
            if let Some(p) = &outcome.plot {
                write(&dir.join(format!("{name}.svg")), &plot::render(p))?;
            }
        }
    }

    let text = outcome.text.iter().map(|l| format!("{l}\n")).collect::<String>();
    let stdout = match opts.format.as_deref() {
        Some("json") => json_text.clone(),
        Some("csv") => csv.unwrap_or_default(),
        Some(_) => text,
        None if outcome.text.is_empty() => json_text.clone(),
        None => text,
    };
    print!("{stdout}");

    if let Some(path) = &opts.write_golden {
        write(path, &json_text)?;
    }
    if let Some(path) = &opts.golden {
        let want: Value = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
            .and_then(|t| {
                serde_json::from_str(&t).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
            })?;
        // Compare the reparsed output so both sides went through the same formatter.
        let got: Value = serde_json::from_str(&json_text).expect("own output parses");
        if let Some(diff) = output::golden_diff(&got, &want, opts.golden_rtol.unwrap_or(1e-10), 1e-13) {
            return Err(CliError::Check(format!("golden mismatch at {diff}")));
        }
    }
    if opts.assert {
        let failed: Vec<String> = outcome
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{} ({})", c.name, c.detail))
            .collect();
        if !failed.is_empty() {
            return Err(CliError::Check(failed.join("; ")));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match resolve(cli).and_then(|(task, opts)| execute(task, opts)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("anomalab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
