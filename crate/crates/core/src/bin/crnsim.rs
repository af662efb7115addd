use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crnsim::access::p_grid;
use crnsim::fountain::{measure_dep, packets_for_overhead, SolitonParams};
use crnsim::montecarlo::{agreement_check, TrialConfig, GENERATOR};
use crnsim::output::to_csv;
use crnsim::scenario::{load_scenario, ModelKind, Scenario, LAMBDA_HIGH, LAMBDA_LOW, LAMBDA_MODERATE};
use crnsim::sweep::{sweep_p, sweep_subchannels, SweepResult};
use crnsim::{Error, Result};

#[derive(Parser)]
#[command(name = "crnsim", version, about = "Secondary-link success probability and spectral efficiency under Markovian and Poissonian primary traffic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a scenario file over S (default) or p.
    Run {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = SweepKind::S)]
        sweep: SweepKind,
        #[command(flatten)]
        opts: SweepOpts,
    },
    /// P_success versus S, low primary arrival rates.
    Fig5(PresetOpts),
    /// P_success versus S, high primary arrival rates.
    Fig6(PresetOpts),
    /// P_success versus S, moderate primary arrival rates.
    Fig7(PresetOpts),
    /// Spectral efficiency versus p, low primary arrival rates.
    Fig8(PresetOpts),
    /// Spectral efficiency versus p, high primary arrival rates.
    Fig9(PresetOpts),
    /// Empirical LT decoding error probability.
    LtDep {
        #[arg(long, default_value_t = 3000)]
        k: usize,
        #[arg(long, default_value_t = 0.05)]
        overhead: f64,
        #[arg(long, default_value_t = 0.1)]
        c: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    S,
    P,
}

#[derive(Args)]
struct SweepOpts {
    /// Monte-Carlo trials per point.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Largest S for S sweeps, link size for p sweeps.
    #[arg(long)]
    subchannels: Option<usize>,
    #[arg(long, default_value_t = 0.005)]
    grid_step: f64,
}

#[derive(Args)]
struct PresetOpts {
    /// Base scenario; the bundled baseline when absent.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[command(flatten)]
    opts: SweepOpts,
}

struct Job {
    name: String,
    scenario: Scenario,
    lambdas: Vec<f64>,
    kind: SweepKind,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (job, opts) = match cli.command {
        Command::Run { scenario, sweep, opts } => {
            let base = load_scenario(&scenario)?;
            let job = Job {
                name: format!("run {}", scenario.display()),
                lambdas: base.lambdas(),
                scenario: base,
                kind: sweep,
            };
            (job, opts)
        }
        Command::Fig5(p) => preset("fig5", p, &LAMBDA_LOW, SweepKind::S)?,
        Command::Fig6(p) => preset("fig6", p, &LAMBDA_HIGH, SweepKind::S)?,
        Command::Fig7(p) => preset("fig7", p, &LAMBDA_MODERATE, SweepKind::S)?,
        Command::Fig8(p) => preset("fig8", p, &LAMBDA_LOW, SweepKind::P)?,
        Command::Fig9(p) => preset("fig9", p, &LAMBDA_HIGH, SweepKind::P)?,
        Command::LtDep {
            k,
            overhead,
            c,
            delta,
            trials,
            seed,
        } => return lt_dep(k, overhead, c, delta, trials, seed),
    };
    execute(job, opts)
}

fn preset(name: &str, p: PresetOpts, lambdas: &[f64], kind: SweepKind) -> Result<(Job, SweepOpts)> {
    let scenario = match &p.scenario {
        Some(path) => load_scenario(path)?,
        None => Scenario::baseline(),
    };
    let job = Job {
        name: name.to_string(),
        scenario,
        lambdas: lambdas.to_vec(),
        kind,
    };
    Ok((job, p.opts))
}

fn execute(job: Job, opts: SweepOpts) -> Result<()> {
    let cfg = TrialConfig::new(opts.trials, opts.seed)?;
    let mut scenario = job.scenario;
    if let Some(s) = opts.subchannels {
        scenario = scenario.with_subchannels(s)?;
    }
    let pool = scenario.pool().len();
    if job.lambdas.len() != pool {
        return Err(Error::invalid("lambda", job.lambdas.len(), format!("preset needs a {}-entry pool", job.lambdas.len())));
    }

    let mut summary = serde_json::Map::new();
    let result = match job.kind {
        SweepKind::S => {
            let hi = opts.subchannels.unwrap_or(pool);
            let result = sweep_subchannels(&scenario, &job.lambdas, 1..=hi, &cfg)?;
            report_subchannel_sweep(&result, opts.trials, &mut summary);
            result
        }
        SweepKind::P => {
            let grid = p_grid(opts.grid_step)?;
            let result = sweep_p(&scenario, &grid, &job.lambdas, &cfg)?;
            report_p_sweep(&result, &mut summary);
            result
        }
    };

    let csv = to_csv(&result);
    let meta = json!({
        "command": job.name,
        "generator": GENERATOR,
        "master_seed": opts.seed,
        "trials": opts.trials,
        "grid_step": opts.grid_step,
        "subchannels": scenario.subchannels(),
        "lambda": job.lambdas,
        "summary": summary,
    });
    let meta = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    match &opts.out {
        Some(path) => {
            write_file(path, &csv)?;
            write_file(&meta_path(path), &meta)?;
        }
        None => {
            io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| Error::Io { path: "<stdout>".into(), source: e })?;
            eprint!("{meta}");
        }
    }
    Ok(())
}

fn meta_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    csv.with_file_name(name)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn report_subchannel_sweep(result: &SweepResult, trials: u64, summary: &mut serde_json::Map<String, serde_json::Value>) {
    let mut disagreements = Vec::new();
    for row in &result.rows {
        if !agreement_check(row.p_success, &row.mc_estimate(trials), 4.0) {
            eprintln!(
                "warning: S={} {}: analytic {} vs MC {} ± {}",
                row.sweep_var, row.model, row.p_success, row.mc_mean, row.mc_stderr
            );
            disagreements.push(json!({"S": row.sweep_var, "model": row.model.as_str()}));
        }
    }
    let markov: Vec<_> = result.rows_for(ModelKind::Markov).collect();
    let poisson: Vec<_> = result.rows_for(ModelKind::Poisson).collect();
    let markov_wins: Vec<f64> = markov
        .iter()
        .zip(&poisson)
        .filter(|(m, p)| m.p_success >= p.p_success)
        .map(|(m, _)| m.sweep_var)
        .collect();
    eprintln!("markov >= poisson at S = {markov_wins:?}");
    summary.insert("markov_at_least_poisson_at".into(), json!(markov_wins));
    summary.insert("mc_disagreements".into(), json!(disagreements));
}

fn report_p_sweep(result: &SweepResult, summary: &mut serde_json::Map<String, serde_json::Value>) {
    for model in ModelKind::ALL {
        if let Some(best) = result.best(model) {
            eprintln!("argmax {model}: p = {} SE = {:.6}", best.sweep_var, best.se);
            summary.insert(format!("argmax_{model}"), json!({"p": best.sweep_var, "se": best.se}));
        }
    }
}

fn lt_dep(k: usize, overhead: f64, c: f64, delta: f64, trials: u64, seed: u64) -> Result<()> {
    let params = SolitonParams::new(k, c, delta)?;
    let dep = measure_dep(&params, overhead, trials, seed)?;
    let n = packets_for_overhead(k, overhead);
    println!("k={k} n={n} overhead={overhead} c={c} delta={delta} trials={trials} seed={seed} dep={dep}");
    Ok(())
}
