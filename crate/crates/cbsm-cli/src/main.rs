//! Command-line driver for the CBSM simulator.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical fault, 4 I/O error.

mod config;
mod oracle_check;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cbsm::montecarlo::{estimate, run_trials, EstimateSet};
use cbsm::physbsm::exact_physical_rates;
use cbsm::povm::build_povm_table;
use cbsm::repeater::{
    performance, station_loss, sweep, PerfMetrics, RepeaterParams, SweepGrid, SweepResult,
};
use cbsm::types::{CodeParams, LossParams};
use config::{parse_f64_list, parse_usize_list, FileConfig};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "cbsm",
    version,
    about = "Concatenated Bell-state measurement of coherent-state qubits: exact rates, Monte Carlo, repeater sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact single-BSM success/error/failure probabilities over ranges.
    BsmProbs(BsmProbsArgs),
    /// Monte Carlo simulation of the hardware-efficient CBSM.
    CbsmSim(SimArgs),
    /// Repeater-chain metrics at one parameter point.
    Repeater(RepeaterArgs),
    /// Grid sweep of repeater metrics with optimum records.
    Sweep(SweepArgs),
    /// Brute-force validation suite (nonzero exit on any violation).
    OracleCheck(OracleArgs),
}

#[derive(Args)]
struct CommonIo {
    /// Config file (flat key=value or a JSON object); CLI flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path, or "-" for stdout.
    #[arg(long)]
    out: Option<String>,
    /// Output format.
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Worker threads for the Monte Carlo engine (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct BsmProbsArgs {
    #[command(flatten)]
    io: CommonIo,
    /// Coherent amplitudes: single value, comma list, or start:stop:count.
    #[arg(long)]
    alpha: Option<String>,
    /// Internal survival rates, same syntax as --alpha.
    #[arg(long)]
    eta0: Option<String>,
    /// Loss geometry: fig2 (eta1 = eta0, eta2 = eta0 e^{-L/Latt}),
    /// symmetric (eta1 = eta2 = eta0), or explicit (--eta1/--eta2).
    #[arg(long, value_parser = ["fig2", "symmetric", "explicit"])]
    geometry: Option<String>,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    /// Travel distance (km) of the second system in the fig2 geometry.
    #[arg(long = "L")]
    l_travel: Option<f64>,
    /// Attenuation length in km.
    #[arg(long = "Latt")]
    l_att: Option<f64>,
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    io: CommonIo,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    j: Option<usize>,
    /// Symmetric survival rate (used when --eta1/--eta2 are not given).
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    eta1: Option<f64>,
    #[arg(long)]
    eta2: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RepeaterArgs {
    #[command(flatten)]
    io: CommonIo,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    j: Option<usize>,
    /// Total distance in km.
    #[arg(long = "L")]
    l_total: Option<f64>,
    /// Station interval in km.
    #[arg(long = "L0")]
    l0: Option<f64>,
    #[arg(long = "Latt")]
    l_att: Option<f64>,
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    io: CommonIo,
    /// Comma lists per grid dimension.
    #[arg(long = "n-list")]
    n_list: Option<String>,
    #[arg(long = "m-list")]
    m_list: Option<String>,
    #[arg(long = "alpha-list")]
    alpha_list: Option<String>,
    #[arg(long = "j-list")]
    j_list: Option<String>,
    #[arg(long = "L0-list")]
    l0_list: Option<String>,
    #[arg(long = "L")]
    l_total: Option<f64>,
    #[arg(long = "Latt")]
    l_att: Option<f64>,
    #[arg(long)]
    eta0: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON optimum record (default: <out>.optimum.json,
    /// or stderr when the table goes to stdout).
    #[arg(long = "optimum-out")]
    optimum_out: Option<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    io: CommonIo,
    /// Validation depth.
    #[arg(long, value_parser = ["quick", "full"])]
    level: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = classify_error(&err);
            let message = json!({ "error": format!("{err:#}"), "kind": kind.0 });
            eprintln!("{message}");
            ExitCode::from(kind.1)
        }
    }
}

fn classify_error(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<cbsm::Error>() {
            return match e {
                cbsm::Error::Domain(_) | cbsm::Error::Range(_) => ("validation", 2),
                cbsm::Error::Numerical(_) | cbsm::Error::Truncation(_) => ("numerical", 3),
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return ("io", 4);
        }
    }
    ("validation", 2)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BsmProbs(args) => cmd_bsm_probs(args),
        Command::CbsmSim(args) => cmd_cbsm_sim(args),
        Command::Repeater(args) => cmd_repeater(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    }
}

fn install_pool<T>(threads: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T>
where
    T: Send,
{
    if threads == 0 {
        f()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .context("building thread pool")?;
        pool.install(f)
    }
}

fn write_output(out: &str, content: &str) -> Result<()> {
    if out == "-" {
        std::io::stdout().write_all(content.as_bytes())?;
    } else {
        std::fs::write(out, content).with_context(|| format!("writing {out}"))?;
    }
    Ok(())
}

/// Stable `# key=value` header lines embedding the effective config.
fn csv_header(config: &BTreeMap<String, Value>) -> String {
    let mut s = format!("# cbsm v{VERSION}\n");
    for (k, v) in config {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x}"),
        _ => "inf".to_string(),
    }
}

// ---------------------------------------------------------------- bsm-probs

fn cmd_bsm_probs(args: BsmProbsArgs) -> Result<()> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    let alphas = match args.alpha.or(file.string("alpha")?) {
        Some(spec) => parse_f64_list(&spec)?,
        None => parse_f64_list("0.2:2.0:46")?,
    };
    let eta0s = match args.eta0.or(file.string("eta0")?) {
        Some(spec) => parse_f64_list(&spec)?,
        None => vec![0.99],
    };
    let geometry = args.geometry.or(file.string("geometry")?).unwrap_or_else(|| "fig2".into());
    let l_travel = args.l_travel.or(file.f64("L")?).unwrap_or(1.0);
    let l_att = args.l_att.or(file.f64("Latt")?).unwrap_or(22.0);
    let eta1 = args.eta1.or(file.f64("eta1")?);
    let eta2 = args.eta2.or(file.f64("eta2")?);
    let out = args.io.out.or(file.string("out")?).unwrap_or_else(|| "-".into());
    let format = args.io.format.or(file.string("format")?).unwrap_or_else(|| "csv".into());

    let mut config: BTreeMap<String, Value> = BTreeMap::new();
    config.insert("command".into(), json!("bsm-probs"));
    config.insert("alpha".into(), json!(alphas));
    config.insert("geometry".into(), json!(geometry));
    config.insert("L".into(), json!(l_travel));
    config.insert("Latt".into(), json!(l_att));

    let mut rows = Vec::new();
    let points: Vec<(f64, LossParams)> = match geometry.as_str() {
        "fig2" => {
            config.insert("eta0".into(), json!(eta0s));
            eta0s
                .iter()
                .map(|&e| Ok((e, LossParams::new(e, e * (-l_travel / l_att).exp())?)))
                .collect::<Result<_>>()?
        }
        "symmetric" => {
            config.insert("eta0".into(), json!(eta0s));
            eta0s.iter().map(|&e| Ok((e, LossParams::new(e, e)?))).collect::<Result<_>>()?
        }
        "explicit" => {
            let (Some(e1), Some(e2)) = (eta1, eta2) else {
                bail!("geometry=explicit requires --eta1 and --eta2");
            };
            config.insert("eta1".into(), json!(e1));
            config.insert("eta2".into(), json!(e2));
            vec![(e1, LossParams::new(e1, e2)?)]
        }
        other => bail!("unknown geometry {other}"),
    };
    for &alpha in &alphas {
        for &(eta0, loss) in &points {
            let table = build_povm_table(alpha, loss)?;
            let r = exact_physical_rates(&table);
            rows.push((alpha, eta0, r));
        }
    }

    let content = if format == "csv" {
        let mut s = csv_header(&config);
        s.push_str("alpha,eta0,p_i,p_fail,p_x,p_y,p_z\n");
        for (alpha, eta0, r) in &rows {
            s.push_str(&format!(
                "{alpha},{eta0},{},{},{},{},{}\n",
                r.p_i, r.p_fail, r.p_x, r.p_y, r.p_z
            ));
        }
        s
    } else {
        let data: Vec<Value> = rows
            .iter()
            .map(|(alpha, eta0, r)| {
                json!({"alpha": alpha, "eta0": eta0, "p_i": r.p_i, "p_fail": r.p_fail,
                       "p_x": r.p_x, "p_y": r.p_y, "p_z": r.p_z})
            })
            .collect();
        let report = json!({"version": VERSION, "config": config, "rows": data});
        serde_json::to_string_pretty(&report)? + "\n"
    };
    write_output(&out, &content)
}

// ----------------------------------------------------------------- cbsm-sim

struct SimResolved {
    params: CodeParams,
    loss: LossParams,
    trials: u64,
    seed: u64,
    threads: usize,
    out: String,
    format: String,
}

fn resolve_sim(args: SimArgs) -> Result<SimResolved> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    let n = args.n.or(file.usize("n")?).unwrap_or(1);
    let m = args.m.or(file.usize("m")?).unwrap_or(1);
    let alpha = args.alpha.or(file.f64("alpha")?).unwrap_or(1.0);
    let j = args.j.or(file.usize("j")?).unwrap_or(1);
    let eta0 = args.eta0.or(file.f64("eta0")?).unwrap_or(0.99);
    let eta1 = args.eta1.or(file.f64("eta1")?);
    let eta2 = args.eta2.or(file.f64("eta2")?);
    let trials = args.trials.or(file.u64("trials")?).unwrap_or(1_000_000);
    let seed = args.seed.or(file.u64("seed")?).unwrap_or(2024);
    let threads = args.io.threads.or(file.usize("threads")?).unwrap_or(0);
    let out = args.io.out.or(file.string("out")?).unwrap_or_else(|| "-".into());
    let format = args.io.format.or(file.string("format")?).unwrap_or_else(|| "json".into());
    let params = CodeParams::new(n, m, alpha, j)?;
    let loss = match (eta1, eta2) {
        (Some(e1), Some(e2)) => LossParams::new(e1, e2)?,
        (None, None) => LossParams::new(eta0, eta0)?,
        _ => bail!("--eta1 and --eta2 must be given together"),
    };
    Ok(SimResolved { params, loss, trials, seed, threads, out, format })
}

fn sim_config_json(r: &SimResolved) -> BTreeMap<String, Value> {
    let mut c: BTreeMap<String, Value> = BTreeMap::new();
    c.insert("n".into(), json!(r.params.n));
    c.insert("m".into(), json!(r.params.m));
    c.insert("alpha".into(), json!(r.params.alpha));
    c.insert("j".into(), json!(r.params.j));
    c.insert("eta1".into(), json!(r.loss.eta1));
    c.insert("eta2".into(), json!(r.loss.eta2));
    c.insert("trials".into(), json!(r.trials));
    c.insert("seed".into(), json!(r.seed));
    c
}

fn estimates_json(est: &EstimateSet) -> Value {
    serde_json::to_value(est).unwrap()
}

fn cmd_cbsm_sim(args: SimArgs) -> Result<()> {
    let r = resolve_sim(args)?;
    let t0 = Instant::now();
    let tally = install_pool(r.threads, || {
        run_trials(&r.params, r.loss, r.trials, r.seed).map_err(Into::into)
    })?;
    let wall_ms = t0.elapsed().as_millis() as u64;
    let est = estimate(&tally);
    if est.undersampled {
        eprintln!("warning: only {} trials; estimates are under-sampled", est.n_trials);
    }
    let mut config = sim_config_json(&r);
    config.insert("command".into(), json!("cbsm-sim"));

    let content = if r.format == "csv" {
        let mut s = csv_header(&config);
        s.push_str(
            "p_i,p_i_ci,p_x,p_x_ci,p_y,p_y_ci,p_z,p_z_ci,p_fail,p_fail_ci,c_exp,c_exp_ci,n_trials\n",
        );
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            est.p_i.value,
            est.p_i.ci95,
            est.p_x.value,
            est.p_x.ci95,
            est.p_y.value,
            est.p_y.ci95,
            est.p_z.value,
            est.p_z.ci95,
            est.p_fail.value,
            est.p_fail.ci95,
            est.c_exp.value,
            est.c_exp.ci95,
            est.n_trials
        ));
        s
    } else {
        let report = json!({
            "version": VERSION,
            "config": config,
            "tally": tally,
            "estimates": estimates_json(&est),
            "wall_time_ms": wall_ms,
        });
        serde_json::to_string_pretty(&report)? + "\n"
    };
    write_output(&r.out, &content)
}

// ----------------------------------------------------------------- repeater

fn cmd_repeater(args: RepeaterArgs) -> Result<()> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    let n = args.n.or(file.usize("n")?).unwrap_or(3);
    let m = args.m.or(file.usize("m")?).unwrap_or(31);
    let alpha = args.alpha.or(file.f64("alpha")?).unwrap_or(1.9);
    let j = args.j.or(file.usize("j")?).unwrap_or(1);
    let l_total = args.l_total.or(file.f64("L")?).unwrap_or(1000.0);
    let l0 = args.l0.or(file.f64("L0")?).unwrap_or(0.7);
    let l_att = args.l_att.or(file.f64("Latt")?).unwrap_or(22.0);
    let eta0 = args.eta0.or(file.f64("eta0")?).unwrap_or(0.99);
    let trials = args.trials.or(file.u64("trials")?).unwrap_or(1_000_000);
    let seed = args.seed.or(file.u64("seed")?).unwrap_or(2024);
    let threads = args.io.threads.or(file.usize("threads")?).unwrap_or(0);
    let out = args.io.out.or(file.string("out")?).unwrap_or_else(|| "-".into());

    let params = CodeParams::new(n, m, alpha, j)?;
    let rp = RepeaterParams::new(l_total, l0, eta0, l_att)?;
    let loss = station_loss(&rp);

    let t0 = Instant::now();
    let tally =
        install_pool(threads, || run_trials(&params, loss, trials, seed).map_err(Into::into))?;
    let wall_ms = t0.elapsed().as_millis() as u64;
    let est = estimate(&tally);
    let metrics = performance(&est, &rp);

    let mut config: BTreeMap<String, Value> = BTreeMap::new();
    config.insert("command".into(), json!("repeater"));
    config.insert("n".into(), json!(n));
    config.insert("m".into(), json!(m));
    config.insert("alpha".into(), json!(alpha));
    config.insert("j".into(), json!(j));
    config.insert("L".into(), json!(l_total));
    config.insert("L0".into(), json!(l0));
    config.insert("Latt".into(), json!(l_att));
    config.insert("eta0".into(), json!(eta0));
    config.insert("eta1".into(), json!(loss.eta1));
    config.insert("eta2".into(), json!(loss.eta2));
    config.insert("trials".into(), json!(trials));
    config.insert("seed".into(), json!(seed));

    let report = json!({
        "version": VERSION,
        "config": config,
        "estimates": estimates_json(&est),
        "metrics": metrics_json(&metrics),
        "wall_time_ms": wall_ms,
    });
    write_output(&out, &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn metrics_json(m: &PerfMetrics) -> Value {
    json!({
        "p_s": m.p_s,
        "q_x": m.q_x,
        "q_z": m.q_z,
        "q": m.q,
        "rt0": m.rt0,
        "rt0_ci95": m.rt0_ci95,
        "q_tot": m.q_tot,
        "q_tot_ci95": m.q_tot_ci95,
        "q_tot_finite": m.q_tot.is_some(),
    })
}

// -------------------------------------------------------------------- sweep

fn sweep_csv(result: &SweepResult, config: &BTreeMap<String, Value>) -> String {
    let mut s = csv_header(config);
    s.push_str("n,m,alpha,j,L0,eta1,eta2,seed,p_i,p_i_ci,p_x,p_y,p_z,p_z_ci,p_fail,p_fail_ci,c_exp,c_exp_ci,p_s,q_x,q_z,q,rt0,rt0_ci,q_tot,q_tot_ci,qtot_ci_overlaps_optimum,status\n");
    for row in &result.rows {
        let (est_cols, perf_cols) = match (&row.estimates, &row.metrics) {
            (Some(e), Some(p)) => (
                format!(
                    "{},{},{},{},{},{},{},{},{},{}",
                    e.p_i.value,
                    e.p_i.ci95,
                    e.p_x.value,
                    e.p_y.value,
                    e.p_z.value,
                    e.p_z.ci95,
                    e.p_fail.value,
                    e.p_fail.ci95,
                    e.c_exp.value,
                    e.c_exp.ci95
                ),
                format!(
                    "{},{},{},{},{},{},{},{}",
                    p.p_s,
                    p.q_x,
                    p.q_z,
                    p.q,
                    p.rt0,
                    p.rt0_ci95,
                    fmt_opt(p.q_tot),
                    fmt_opt(p.q_tot_ci95)
                ),
            ),
            _ => (",,,,,,,,,".to_string(), ",,,,,,,".to_string()),
        };
        let status = row.error.clone().unwrap_or_else(|| "ok".into());
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.n,
            row.m,
            row.alpha,
            row.j,
            row.l0,
            fmt_opt(Some(row.eta1)),
            fmt_opt(Some(row.eta2)),
            row.seed,
            est_cols,
            perf_cols,
            row.qtot_ci_overlaps_optimum,
            status.replace(',', ";")
        ));
    }
    s
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    let lists = |cli: Option<String>, key: &str, default: &str| -> Result<Vec<f64>> {
        match cli {
            Some(s) => parse_f64_list(&s),
            None => match file.f64_list(key)? {
                Some(v) => Ok(v),
                None => parse_f64_list(default),
            },
        }
    };
    let ulists = |cli: Option<String>, key: &str, default: &str| -> Result<Vec<usize>> {
        match cli {
            Some(s) => parse_usize_list(&s),
            None => match file.usize_list(key)? {
                Some(v) => Ok(v),
                None => parse_usize_list(default),
            },
        }
    };
    let grid = SweepGrid {
        n: ulists(args.n_list, "n-list", "3")?,
        m: ulists(args.m_list, "m-list", "31")?,
        alpha: lists(args.alpha_list, "alpha-list", "1.9")?,
        j: ulists(args.j_list, "j-list", "1")?,
        l0: lists(args.l0_list, "L0-list", "0.5,0.7,0.9")?,
    };
    let l_total = args.l_total.or(file.f64("L")?).unwrap_or(1000.0);
    let l_att = args.l_att.or(file.f64("Latt")?).unwrap_or(22.0);
    let eta0 = args.eta0.or(file.f64("eta0")?).unwrap_or(0.99);
    let trials = args.trials.or(file.u64("trials")?).unwrap_or(1_000_000);
    let seed = args.seed.or(file.u64("seed")?).unwrap_or(2024);
    let threads = args.io.threads.or(file.usize("threads")?).unwrap_or(0);
    let out = args.io.out.or(file.string("out")?).unwrap_or_else(|| "-".into());

    let mut config: BTreeMap<String, Value> = BTreeMap::new();
    config.insert("command".into(), json!("sweep"));
    config.insert("n-list".into(), json!(grid.n));
    config.insert("m-list".into(), json!(grid.m));
    config.insert("alpha-list".into(), json!(grid.alpha));
    config.insert("j-list".into(), json!(grid.j));
    config.insert("L0-list".into(), json!(grid.l0));
    config.insert("L".into(), json!(l_total));
    config.insert("Latt".into(), json!(l_att));
    config.insert("eta0".into(), json!(eta0));
    config.insert("trials".into(), json!(trials));
    config.insert("seed".into(), json!(seed));

    let result = install_pool(threads, || {
        sweep(&grid, l_total, eta0, l_att, trials, seed).map_err(Into::into)
    })?;

    let csv = sweep_csv(&result, &config);
    write_output(&out, &csv)?;

    let row_json = |idx: Option<usize>| -> Value {
        match idx {
            Some(i) => serde_json::to_value(&result.rows[i]).unwrap(),
            None => Value::Null,
        }
    };
    let optimum = json!({
        "version": VERSION,
        "config": config,
        "argmin_q_tot": row_json(result.argmin_qtot),
        "argmax_rt0": row_json(result.argmax_rt0),
    });
    let optimum_text = serde_json::to_string_pretty(&optimum)? + "\n";
    match args.optimum_out.or(file.string("optimum-out")?) {
        Some(path) => write_output(&path, &optimum_text)?,
        None if out == "-" => eprintln!("{optimum_text}"),
        None => write_output(&format!("{out}.optimum.json"), &optimum_text)?,
    }
    Ok(())
}

// ------------------------------------------------------------- oracle-check

fn cmd_oracle_check(args: OracleArgs) -> Result<()> {
    let file = FileConfig::load(args.io.config.as_deref())?;
    let level = args.level.or(file.string("level")?).unwrap_or_else(|| "quick".into());
    let seed = args.seed.or(file.u64("seed")?).unwrap_or(2024);
    let out = args.io.out.or(file.string("out")?).unwrap_or_else(|| "-".into());

    let report = oracle_check::run(&level, seed)?;
    let mut text = format!(
        "oracle-check level={} checks={} violations={}\n",
        report.level,
        report.checks_run,
        report.violations.len()
    );
    for v in report.violations.iter().take(10) {
        text.push_str(&format!(
            "VIOLATION {}: {} got={:.15e} want={:.15e}\n",
            v.check, v.tuple, v.got, v.want
        ));
    }
    if report.violations.len() > 10 {
        text.push_str(&format!("... and {} more\n", report.violations.len() - 10));
    }
    write_output(&out, &text)?;
    if !report.violations.is_empty() {
        return Err(anyhow::Error::new(cbsm::Error::Numerical(format!(
            "{} oracle violations",
            report.violations.len()
        ))));
    }
    Ok(())
}
