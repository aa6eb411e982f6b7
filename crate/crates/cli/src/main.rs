use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use zl_core::ladder::{self, DEFAULT_TKA_DELTAS};
use zl_core::oscillation;
use zl_core::quad::{PanelPolicy, QuadConfig};
use zl_core::sweep::{self, SweepPlan, SweepRow, SWEEP_HEADER};
use zl_core::zeta::EvalConfig;
use zl_core::{AreaMode, Engine, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_TOLERANCE: u8 = 2;
const EXIT_CHECKPOINT: u8 = 3;

/// Areas of Z²(t) above and below its mean level, Jacob's ladder and
/// the moments they rest on.
#[derive(Parser, Debug)]
#[command(name = "zl", version)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct ConfigArgs {
    /// Relative tolerance of the prefix integrals
    #[arg(long, global = true, env = "ZL_REL_TOL", default_value_t = QuadConfig::default().rel_tol)]
    rel_tol: f64,

    /// Relative tolerance of the exponentially weighted integrals
    #[arg(long, global = true, env = "ZL_WEIGHTED_REL_TOL", default_value_t = QuadConfig::weighted().rel_tol)]
    weighted_rel_tol: f64,

    /// Maximum bisection depth per panel
    #[arg(long, global = true, env = "ZL_MAX_DEPTH", default_value_t = QuadConfig::default().max_depth)]
    max_depth: u32,

    /// Largest panel width
    #[arg(long, global = true, env = "ZL_PANEL_CAP", default_value_t = PanelPolicy::default().cap)]
    panel_cap: f64,

    /// Panel width as a fraction of the local oscillation scale
    #[arg(long, global = true, env = "ZL_PANEL_FRACTION", default_value_t = PanelPolicy::default().fraction)]
    panel_fraction: f64,

    /// Riemann–Siegel correction terms beyond the first (0..=4)
    #[arg(long, global = true, env = "ZL_RS_ORDER", default_value_t = EvalConfig::default().rs_correction_order)]
    rs_order: usize,

    /// Below this t Euler–Maclaurin is used
    #[arg(long, global = true, env = "ZL_EM_THRESHOLD", default_value_t = EvalConfig::default().em_threshold)]
    em_threshold: f64,

    /// Minimum directly summed terms for Euler–Maclaurin
    #[arg(long, global = true, env = "ZL_EM_TERMS", default_value_t = EvalConfig::default().em_terms)]
    em_terms: usize,

    /// Absolute error goal per Z evaluation
    #[arg(long, global = true, env = "ZL_TARGET_ABS_ERROR", default_value_t = EvalConfig::default().target_abs_error)]
    target_abs_error: f64,

    /// Additive constant of the main term: a number, or `auto` for the value
    /// saved by `zl c0 --fit`
    #[arg(long, global = true, env = "ZL_C0", default_value = "0")]
    c0: String,

    /// Where `c0 --fit` stores its estimate
    #[arg(long, global = true, env = "ZL_C0_STORE", default_value = "zl_c0.json")]
    c0_store: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Area report at one T
    Areas {
        #[arg(long = "t")]
        t: f64,
        /// moser, balasubramanian or level=<value>
        #[arg(long, default_value = "moser")]
        mode: String,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Largest accepted relative identity residual
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Table of every quantity on a grid of T
    Sweep {
        #[arg(long)]
        t_min: f64,
        #[arg(long)]
        t_max: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        log_grid: bool,
        /// Checkpoint CSV; the sweep resumes from it when present
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stop after this many new rows
        #[arg(long)]
        max_rows: Option<usize>,
        /// Write one two-column `T value` file per metric here
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// φ(T), σ(T) and σ₁(T)
    Ladder {
        #[arg(long = "t")]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// I₂(T) and I₄(T)
    Moments {
        #[arg(long = "t")]
        t: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Weighted second moment against its leading term
    Tka {
        /// Comma-separated δ values
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TKA_DELTAS)]
        delta_list: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate c₀ (with --fit) or show the stored estimate
    C0 {
        #[arg(long)]
        fit: bool,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TKA_DELTAS)]
        delta_list: Vec<f64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Serialize, Deserialize)]
struct C0Store {
    c0_estimate: f64,
    deltas: Vec<f64>,
}

#[derive(Serialize)]
struct LadderOut {
    #[serde(rename = "T")]
    t: f64,
    phi: f64,
    phi_over_2t: f64,
    sigma: f64,
    sigma1: f64,
    i2: f64,
    c0: f64,
    solve_residual: f64,
}

#[derive(Serialize)]
struct MomentsOut {
    #[serde(rename = "T")]
    t: f64,
    i2: f64,
    i4: f64,
    est_error_i2: f64,
    est_error_i4: f64,
    panels: usize,
    evals: usize,
    fourth_moment_ratio: f64,
}

enum Failure {
    Usage(String),
    Tolerance(String),
    Checkpoint(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::CheckpointMismatch { .. } | Error::CheckpointLocked(_) => {
                Failure::Checkpoint(e.to_string())
            }
            Error::Tolerance { .. } | Error::Accuracy { .. } | Error::NoConvergence { .. } => {
                Failure::Tolerance(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, m),
                Failure::Tolerance(m) => (EXIT_TOLERANCE, m),
                Failure::Checkpoint(m) => (EXIT_CHECKPOINT, m),
            };
            eprintln!("zl: {msg}");
            ExitCode::from(code)
        }
    }
}

fn engine(cfg: &ConfigArgs) -> Result<Engine, Failure> {
    let eval = EvalConfig {
        rs_correction_order: cfg.rs_order,
        em_threshold: cfg.em_threshold,
        em_terms: cfg.em_terms,
        target_abs_error: cfg.target_abs_error,
    };
    let prefix = QuadConfig {
        rel_tol: cfg.rel_tol,
        max_depth: cfg.max_depth,
        policy: PanelPolicy {
            cap: cfg.panel_cap,
            fraction: cfg.panel_fraction,
        },
    };
    let weighted = QuadConfig {
        rel_tol: cfg.weighted_rel_tol,
        ..prefix
    };
    weighted.validate()?;
    let mut e = Engine::new(eval, prefix)?;
    e.weighted = weighted;
    e.c0 = resolve_c0(cfg)?;
    Ok(e)
}

fn resolve_c0(cfg: &ConfigArgs) -> Result<f64, Failure> {
    if cfg.c0 == "auto" {
        let text = fs::read_to_string(&cfg.c0_store).map_err(|e| {
            Failure::Usage(format!(
                "--c0 auto needs {} (run `zl c0 --fit` first): {e}",
                cfg.c0_store.display()
            ))
        })?;
        let store: C0Store = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("bad c0 store {}: {e}", cfg.c0_store.display())))?;
        return Ok(store.c0_estimate);
    }
    cfg.c0
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Failure::Usage(format!("--c0 must be a number or `auto`, got {:?}", cfg.c0)))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Areas {
            t,
            mode,
            format,
            tol,
            out,
        } => {
            let mode: AreaMode = mode.parse()?;
            let e = engine(&cli.config)?;
            let r = e.area_report(t, mode)?;
            let text = match format {
                Format::Json => json(&r),
                Format::Csv => area_csv(&r)?,
            };
            emit(out.as_deref(), &text)?;
            let failed = r.failed_identities(tol);
            if !failed.is_empty() {
                return Err(Failure::Tolerance(format!(
                    "identity residuals above {tol:e}: {}",
                    failed.join(", ")
                )));
            }
        }
        Command::Sweep {
            t_min,
            t_max,
            points,
            log_grid,
            checkpoint,
            out,
            max_rows,
            plot_dir,
        } => {
            let e = engine(&cli.config)?;
            let plan = SweepPlan {
                t_min,
                t_max,
                points,
                log_grid,
            };
            let o = sweep::run_sweep(&e, &plan, out.as_deref(), checkpoint.as_deref(), max_rows)?;
            if out.is_none() {
                emit(None, &csv_of(&o.rows)?)?;
            }
            if let Some(dir) = plot_dir {
                write_plot_data(&dir, &o.rows)?;
            }
            if let Some(f) = o.resumed_from {
                eprintln!("resumed from T = {f}");
            }
            if !o.complete {
                eprintln!("stopped after {} new rows; rerun to continue", o.computed);
            }
        }
        Command::Ladder { t, out } => {
            let e = engine(&cli.config)?;
            let pt = e.ladder(t)?;
            let o = LadderOut {
                t,
                phi: pt.phi,
                phi_over_2t: pt.phi / (2.0 * t),
                sigma: pt.sigma,
                sigma1: pt.sigma1,
                i2: pt.i2,
                c0: pt.c0_used,
                solve_residual: pt.solve_residual,
            };
            emit(out.as_deref(), &json(&o))?;
        }
        Command::Moments { t, out } => {
            let e = engine(&cli.config)?;
            let [i2, i4] = e.moments(t)?;
            let o = MomentsOut {
                t,
                i2: i2.value,
                i4: i4.value,
                est_error_i2: i2.est_error,
                est_error_i4: i4.est_error,
                panels: i2.panels,
                evals: i2.evals,
                fourth_moment_ratio: oscillation::fourth_moment_ratio(i4.value, t)?,
            };
            emit(out.as_deref(), &json(&o))?;
        }
        Command::Tka {
            delta_list,
            format,
            out,
        } => {
            let e = engine(&cli.config)?;
            let reps = e.tka(&delta_list)?;
            let text = match format {
                Format::Json => json(&reps),
                Format::Csv => csv_of(&reps)?,
            };
            emit(out.as_deref(), &text)?;
        }
        Command::C0 { fit, delta_list } => {
            let store_path = &cli.config.c0_store;
            if fit {
                let e = engine(&ConfigArgs {
                    c0: "0".into(),
                    ..cli.config.clone()
                })?;
                let reps = e.tka(&delta_list)?;
                let c0 = reps
                    .first()
                    .map(|r| r.c0_estimate)
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| {
                        Failure::Usage("c0 --fit needs at least two distinct deltas".into())
                    })?;
                let store = C0Store {
                    c0_estimate: c0,
                    deltas: delta_list,
                };
                fs::write(store_path, json(&store))?;
                if let Some((small, large)) = ladder::c0_pair_estimates(&reps) {
                    eprintln!(
                        "pair estimates: {small} (smallest deltas), {large} (largest deltas)"
                    );
                }
                println!("{c0}");
            } else {
                let text = fs::read_to_string(store_path).map_err(|e| {
                    Failure::Usage(format!(
                        "no c0 estimate at {} ({e}); run `zl c0 --fit`",
                        store_path.display()
                    ))
                })?;
                let store: C0Store = serde_json::from_str(&text)
                    .map_err(|e| Failure::Usage(format!("bad c0 store: {e}")))?;
                println!("{}", store.c0_estimate);
            }
        }
    }
    Ok(())
}

/// Flat CSV form of a report: scalar fields only.
fn area_csv(r: &zl_core::AreaReport) -> Result<String, Failure> {
    let v = serde_json::to_value(r).expect("report serializes");
    let obj = v.as_object().expect("report is an object");
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut head = Vec::new();
    let mut vals = Vec::new();
    for (k, x) in obj {
        match x {
            serde_json::Value::Number(n) => {
                head.push(k.clone());
                vals.push(n.to_string());
            }
            serde_json::Value::String(s) => {
                head.push(k.clone());
                vals.push(s.clone());
            }
            serde_json::Value::Null => {
                head.push(k.clone());
                vals.push(String::new());
            }
            _ => {}
        }
    }
    let e = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(&head).map_err(e)?;
    w.write_record(&vals).map_err(e)?;
    Ok(
        String::from_utf8(w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?)
            .expect("utf-8"),
    )
}

fn write_plot_data(dir: &Path, rows: &[SweepRow]) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let cols: Vec<(&str, fn(&SweepRow) -> f64)> = vec![
        ("i2", |r| r.i2),
        ("i4", |r| r.i4),
        ("phi", |r| r.phi),
        ("sigma", |r| r.sigma),
        ("sigma1", |r| r.sigma1),
        ("m_plus", |r| r.m_plus),
        ("m_minus", |r| r.m_minus),
        ("diff_moser", |r| r.diff_moser),
        ("diff_bala", |r| r.diff_bala),
        ("eta1", |r| r.eta1),
        ("eta2", |r| r.eta2),
        ("eta_gap_over_ln3T", |r| r.eta_gap_over_ln3t),
        ("fourth_moment_ratio", |r| r.fourth_moment_ratio),
    ];
    debug_assert_eq!(cols.len() + 1, SWEEP_HEADER.len());
    for (name, get) in cols {
        let mut s = String::new();
        for r in rows {
            s.push_str(&format!("{:e} {:e}\n", r.t, get(r)));
        }
        fs::write(dir.join(format!("{name}.dat")), s)?;
    }
    Ok(())
}
