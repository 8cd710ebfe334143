//! squarefall: simulate the random-squares process, count pseudosmooths
//! through the k-large-prime witness machinery, and evaluate the limit
//! theory. All outputs are machine-readable (JSON / JSONL / CSV) and every
//! file written is paired with a run manifest for reproducibility.

mod manifest;
mod output;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;
use squarefall::arith::PrimeTable;
use squarefall::limit::{
    estimate_theta_mc, eta_table, theta, threshold_eta, EtaMode, LimitParams,
};
use squarefall::process::{
    run_trial, simulate_stream, size_window_report, ClassParams, ProcessConfig,
};
use squarefall::smooth::{
    find_params, psi_dickman, psi_exact, psi_ht, saddle_alpha, tune_factor_base, PsiMode,
    PSI_EXACT_MAX_X,
};
use squarefall::witness::{count_pseudosmooths_detailed, count_singleton_hits, ChiParams};
use squarefall::KBound;

#[derive(Parser)]
#[command(
    name = "squarefall",
    version,
    about = "Laboratory for the random-squares stopping problem",
    propagate_version = true
)]
struct Cli {
    /// Worker threads (overrides SQUAREFALL_THREADS; default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path prefix; files are written as <out>.<ext> plus
    /// <out>.manifest.json. Without it, results go to stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Output format where a choice exists (table: csv|json).
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute y0, J0, u0 and the saddle point for a given x.
    Params(ParamsArgs),
    /// Run seeded trials of the process until the first square dependence.
    Simulate(SimulateArgs),
    /// Count pseudosmooths (Z), singleton hits (Y) and the GF(2) rank
    /// deficiency over one simulated class stream.
    Pseudo(PseudoArgs),
    /// The eta threshold table (k = 0..5 by M = inf, 100, 10).
    Table(TableArgs),
    /// Analytic theta next to its Monte-Carlo estimate.
    Limit(LimitArgs),
    /// Solve the factor-base tuning equation for y1.
    Tune(TuneArgs),
    /// Exact and estimated smooth counts at (x, y).
    Psi(PsiArgs),
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long)]
    x: u64,
    /// exact (x <= 10^9) or ht.
    #[arg(long, default_value = "exact")]
    mode: PsiMode,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Truncate a trial after this many draws.
    #[arg(long, default_value_t = 10_000_000)]
    max_samples: u64,
    /// Psi evaluator for J0 (exact needs x <= 10^9).
    #[arg(long, default_value = "exact")]
    mode: PsiMode,
}

#[derive(Args)]
struct PseudoArgs {
    #[arg(long)]
    x: u64,
    /// Smoothness cutoff; defaults to y0(x).
    #[arg(long)]
    y: Option<u64>,
    /// Large-prime window ratio M (may be "inf").
    #[arg(long, default_value_t = 10.0)]
    multiplier: f64,
    /// Class size cutoff k (integer or "inf").
    #[arg(long, default_value = "2")]
    k: KBound,
    /// Witness neighborhood radius m.
    #[arg(long, default_value_t = 2)]
    levels: u32,
    /// Stream length; defaults to ceil(J0).
    #[arg(long)]
    j: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "exact")]
    mode: PsiMode,
}

#[derive(Args)]
struct TableArgs {
    /// table (calibrated count factor), theorem (literal recursion), or both.
    #[arg(long, default_value = "table")]
    mode: String,
    /// Finite recursion depth for theorem mode (default: fixed point).
    #[arg(long)]
    levels: Option<u32>,
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = 3)]
    levels: u32,
    #[arg(long, default_value_t = 10.0)]
    multiplier: f64,
    #[arg(long, default_value = "3")]
    k: KBound,
    #[arg(long, default_value_t = 0.5)]
    eta: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    x: u64,
    /// The constant c in the tuning equation.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value = "ht")]
    mode: PsiMode,
}

#[derive(Args)]
struct PsiArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    y: u64,
}

fn main() {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("SQUAREFALL_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        });
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("thread pool: {e}");
    }
    let code = match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            println!("{}", json!({ "error": e.to_string() }));
            1
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<(), Box<dyn std::error::Error>> {
    match &cli.command {
        Command::Params(a) => {
            let params = find_params(a.x, a.mode)?;
            let mani = manifest::Manifest::new(
                "params",
                json!({"x": a.x, "mode": a.mode}),
                None,
            );
            output::emit_json(cli.out.as_deref(), &serde_json::to_value(&params)?, &mani)?;
        }
        Command::Simulate(a) => simulate_cmd(cli, a)?,
        Command::Pseudo(a) => pseudo_cmd(cli, a)?,
        Command::Table(a) => table_cmd(cli, a)?,
        Command::Limit(a) => {
            let params = LimitParams {
                m: a.levels,
                multiplier: a.multiplier,
                k: a.k,
                eta: a.eta,
                rho: a.rho,
            };
            let analytic = theta(&params)?;
            let (mc, stderr) = estimate_theta_mc(&params, a.samples, a.seed)?;
            let mani = manifest::Manifest::new(
                "limit",
                serde_json::to_value(&params)?,
                Some(a.seed),
            );
            output::emit_json(
                cli.out.as_deref(),
                &json!({
                    "schema": manifest::SCHEMA,
                    "params": params,
                    "theta_analytic": analytic,
                    "theta_mc": mc,
                    "stderr": stderr,
                    "samples": a.samples,
                }),
                &mani,
            )?;
        }
        Command::Tune(a) => {
            let result = tune_factor_base(a.x, a.c, a.mode)?;
            let mani = manifest::Manifest::new(
                "tune",
                json!({"x": a.x, "c": a.c, "mode": a.mode}),
                None,
            );
            output::emit_json(cli.out.as_deref(), &serde_json::to_value(&result)?, &mani)?;
        }
        Command::Psi(a) => {
            let table = PrimeTable::sieve(a.y.max(3) + 64)?;
            let exact = if a.x <= PSI_EXACT_MAX_X {
                Some(psi_exact(a.x, a.y, &table)?)
            } else {
                None
            };
            let ht = psi_ht(a.x, a.y, &table)?;
            let dickman = psi_dickman(a.x, a.y)?;
            let alpha = saddle_alpha(a.x, a.y, &table)?;
            let mani = manifest::Manifest::new("psi", json!({"x": a.x, "y": a.y}), None);
            output::emit_json(
                cli.out.as_deref(),
                &json!({
                    "schema": manifest::SCHEMA,
                    "x": a.x,
                    "y": a.y,
                    "u": (a.x as f64).ln() / (a.y as f64).ln(),
                    "alpha": alpha,
                    "psi_exact": exact,
                    "psi_ht": {"ln": ht.ln, "value": ht.value()},
                    "psi_dickman": {"ln": dickman.ln, "value": dickman.value()},
                }),
                &mani,
            )?;
        }
    }
    Ok(())
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> Result<(), Box<dyn std::error::Error>> {
    let params = find_params(a.x, a.mode)?;
    let table = PrimeTable::sieve(100_000.max(params.y0 + 64))?;
    let cfg = ProcessConfig {
        x: a.x,
        seed: a.seed,
        max_samples: a.max_samples,
        class_params: None,
    };
    let results: Vec<squarefall::process::TrialResult> = (0..a.trials)
        .into_par_iter()
        .map(|t| run_trial(&cfg, t, &table, Some(params.j0)))
        .collect::<squarefall::Result<Vec<_>>>()?;
    let summary = if results.is_empty() {
        json!({
            "schema": manifest::SCHEMA,
            "x": a.x,
            "trials": 0,
            "params": params,
            "report": null,
        })
    } else {
        let report = size_window_report(&results, &params)?;
        json!({
            "schema": manifest::SCHEMA,
            "x": a.x,
            "trials": a.trials,
            "params": params,
            "report": report,
        })
    };
    let mani = manifest::Manifest::new(
        "simulate",
        json!({
            "x": a.x, "trials": a.trials, "seed": a.seed,
            "max_samples": a.max_samples, "mode": a.mode,
        }),
        Some(a.seed),
    );
    output::emit_trials(cli.out.as_deref(), &results, &summary, &mani)?;
    Ok(())
}

fn pseudo_cmd(cli: &Cli, a: &PseudoArgs) -> Result<(), Box<dyn std::error::Error>> {
    let params = find_params(a.x, a.mode)?;
    let y = a.y.unwrap_or(params.y0);
    let j = a.j.unwrap_or(params.j0.ceil() as u64);
    let sieve_to = if a.multiplier.is_finite() {
        ((a.multiplier * y as f64) as u64 + 64).max(100_000)
    } else {
        100_000.max(y + 64)
    };
    let table = PrimeTable::sieve(sieve_to)?;
    let cfg = ProcessConfig {
        x: a.x,
        seed: a.seed,
        max_samples: 1,
        class_params: Some(ClassParams { y, m_ratio: a.multiplier, k: a.k }),
    };
    let stream = simulate_stream(&cfg, j, &table)?;
    let chi_params = ChiParams { m: a.levels, k: a.k, m_ratio: a.multiplier };
    let counts = count_pseudosmooths_detailed(&stream, &chi_params);
    let y_hits = count_singleton_hits(&stream, &chi_params, (1, stream.len()));
    let deficiency = squarefall::witness::class_rank_deficiency(&stream);
    let pi_y = table.prime_pi(y)?;
    let smooth = stream
        .iter()
        .filter(|c| matches!(c, squarefall::process::ExponentClass::Smooth))
        .count();
    let delta = stream
        .iter()
        .filter(|c| matches!(c, squarefall::process::ExponentClass::Delta))
        .count();
    let mani = manifest::Manifest::new(
        "pseudo",
        json!({
            "x": a.x, "y": y, "multiplier": format_mult(a.multiplier), "k": a.k,
            "levels": a.levels, "j": j, "seed": a.seed,
        }),
        Some(a.seed),
    );
    output::emit_json(
        cli.out.as_deref(),
        &json!({
            "schema": manifest::SCHEMA,
            "x": a.x,
            "y": y,
            "multiplier": format_mult(a.multiplier),
            "k": a.k,
            "levels": a.levels,
            "j": j,
            "z": counts.z,
            "y_singleton_hits": y_hits,
            "rank_deficiency": deficiency,
            "z_over_deficiency": if deficiency > 0 {
                Some(counts.z as f64 / deficiency as f64)
            } else {
                None
            },
            "pi_y": pi_y,
            "z_over_pi_y": counts.z as f64 / pi_y as f64,
            "chi_evaluations": counts.chi_evaluations,
            "tree_like_failures": counts.non_tree_like,
            "tree_like_failure_rate": if counts.chi_evaluations > 0 {
                counts.non_tree_like as f64 / counts.chi_evaluations as f64
            } else {
                0.0
            },
            "smooth_count": smooth,
            "delta_count": delta,
        }),
        &mani,
    )?;
    Ok(())
}

fn format_mult(m: f64) -> serde_json::Value {
    if m.is_infinite() {
        json!("inf")
    } else {
        json!(m)
    }
}

fn table_cmd(cli: &Cli, a: &TableArgs) -> Result<(), Box<dyn std::error::Error>> {
    let multipliers = [f64::INFINITY, 100.0, 10.0];
    let want_table = a.mode == "table" || a.mode == "both";
    let want_theorem = a.mode == "theorem" || a.mode == "both";
    if !want_table && !want_theorem {
        return Err(format!("unknown table mode '{}'", a.mode).into());
    }
    let mut rows = Vec::new();
    for k in 0..=5u32 {
        let mut row = json!({"k": k});
        for (label, &m) in ["inf", "100", "10"].iter().zip(&multipliers) {
            if want_table {
                let eta = threshold_eta(m, KBound::Finite(k), EtaMode::Table, None)?;
                row[format!("table_M_{label}")] = json!(eta);
            }
            if want_theorem {
                let eta = threshold_eta(m, KBound::Finite(k), EtaMode::Theorem, a.levels)?;
                row[format!("theorem_M_{label}")] = json!(eta);
            }
        }
        rows.push(row);
    }
    let mani = manifest::Manifest::new(
        "table",
        json!({"mode": a.mode, "levels": a.levels}),
        None,
    );
    if cli.format == "json" && cli.out.is_none() {
        // keep CSV as the canonical format when writing files
    }
    let csv = {
        let mut header = vec!["k".to_string()];
        if want_table {
            header.extend(["table_M_inf", "table_M_100", "table_M_10"].map(String::from));
        }
        if want_theorem {
            header.extend(["theorem_M_inf", "theorem_M_100", "theorem_M_10"].map(String::from));
        }
        let mut lines = vec![header.join(",")];
        for row in &rows {
            let mut cells = vec![row["k"].to_string()];
            for h in &header[1..] {
                cells.push(format!("{:.4}", row[h].as_f64().unwrap()));
            }
            lines.push(cells.join(","));
        }
        lines.join("\n") + "\n"
    };
    if cli.format == "csv" || cli.out.is_some() {
        output::emit_csv(cli.out.as_deref(), &csv, &mani)?;
    } else {
        output::emit_json(
            cli.out.as_deref(),
            &json!({"schema": manifest::SCHEMA, "rows": rows}),
            &mani,
        )?;
    }
    // quick sanity: eta_table() and the CSV path share the same solver
    let _ = eta_table;
    Ok(())
}
