//! `moran-asg`: command-line front end for generators, dualities,
//! ancestral type distributions and event-level simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use moran_core::ancestral::{
    fig7_configs, fig7_scan, h_inf_via_l, h_inf_via_recursion, h_inf_via_ytilde, h_r_via_l,
    log_grid, write_fig7_csv, Fig7Config,
};
use moran_core::ctmc::{stationary, stationary_on_class, Dist, DEFAULT_TOL};
use moran_core::diffusion::{
    check_diffusion_duality, diffusion_duality_table, h_inf_diffusion, self_consistent,
    write_duality_csv, write_h_inf_csv, DEFAULT_N_MAX,
};
use moran_core::dualities::{
    check_conjugation, check_descendant_equality, check_factorial_duality, check_siegmund_duality,
    check_ytilde_l_duality, DualityReport,
};
use moran_core::generators::{build_q_l, build_q_r, build_q_y_ftw};
use moran_core::graphical::{
    descendant_counts, extract_pld_path, extract_r_path, sample_event_log,
};
use moran_core::haldane::{haldane_scan, write_haldane_csv};
use moran_core::rng::{run_replicates, StreamRng};
use moran_core::{DiffusionParams, Error, ModelParams};

#[derive(Parser, Debug)]
#[command(
    name = "moran-asg",
    version,
    about = "Ancestral selection graphs for the two-type Moran model"
)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "MORAN_ASG_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Model parameter file (JSON).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Diffusion parameter file (JSON).
    #[arg(long)]
    dparams: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Process {
    Y,
    R,
    L,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Recursion,
    Pld,
    Ytilde,
    All,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Which {
    Factorial,
    Ytilde,
    Siegmund,
    Conjugation,
    Descendant,
    Diffusion,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Extract {
    #[value(name = "R")]
    R,
    #[value(name = "L")]
    L,
    Descendant,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Stationary law of Y, R or L as CSV.
    Stationary {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "y", ignore_case = true)]
        process: Process,
    },
    /// Stationary ancestral type distribution h_inf.
    Hinf {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "recursion")]
        method: Method,
        /// Cross-route tolerance for --method all.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Ancestral type distribution h_r at finite r.
    Hr {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        r: f64,
    },
    /// Residual report for a duality identity.
    Duality {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        /// Residual tolerance (default 1e-10; 1e-12 for conjugation;
        /// 2e-3 for diffusion).
        #[arg(long)]
        tol: Option<f64>,
        /// Truncation level for the diffusion duality.
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        /// CSV table `n,lhs,rhs,residual` for the diffusion duality.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Stationary proportions of unfit individuals and unfit ancestors
    /// over a u/b grid.
    Fig7 {
        #[command(flatten)]
        common: Common,
        /// JSON list of {"label", "rates"} objects (default: genic,
        /// order-3 and mixture).
        #[arg(long)]
        configs: Option<PathBuf>,
        /// `lo:hi:n` (log-spaced) or a comma-separated list of u/b values.
        #[arg(long, default_value = "0.1:10:41")]
        ugrid: String,
        #[arg(long = "N", default_value_t = 10_000)]
        n: usize,
        #[arg(long, default_value_t = 0.005)]
        nu0: f64,
        /// Effective branching rate shared by all configs.
        #[arg(long, default_value_t = 0.005)]
        b: f64,
    },
    /// Exact fixation probabilities against m sigma / N^alpha.
    Haldane {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(
            long = "N-list",
            value_delimiter = ',',
            default_value = "10000,100000,1000000,10000000"
        )]
        n_list: Vec<usize>,
    },
    /// Diffusion-limit ancestral type distribution on a y grid.
    DiffusionHinf {
        #[command(flatten)]
        common: Common,
        /// `lo:hi:n` (linear) or a comma-separated list.
        #[arg(long, default_value = "0:1:21")]
        ygrid: String,
        #[arg(long, default_value_t = DEFAULT_N_MAX)]
        n_max: usize,
        /// Self-consistency tolerance between n_max and 2 n_max.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Event-level simulation with backward or forward extraction.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long)]
        horizon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        extract: Extract,
        /// Sample size for R, or initial unfit count for descendant.
        #[arg(long, default_value_t = 1)]
        start: usize,
        /// Write the event log of replicate 0 as JSON lines.
        #[arg(long)]
        events: Option<PathBuf>,
    },
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::TrivialNeutral
            | Error::NonIncreasing { .. }
            | Error::CapExceeded { .. }
            | Error::Dimension(_)
            | Error::NonIntegrable(_)
            | Error::EventLog(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::Json(_) => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn model(common: &Common) -> Result<ModelParams, Failure> {
    let path = common
        .params
        .as_ref()
        .ok_or_else(|| Failure::Validation("--params is required".into()))?;
    Ok(ModelParams::from_json_file(path)?)
}

fn diffusion(common: &Common) -> Result<DiffusionParams, Failure> {
    let path = common
        .dparams
        .as_ref()
        .ok_or_else(|| Failure::Validation("--dparams is required".into()))?;
    Ok(DiffusionParams::from_json_file(path)?)
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => {
            Box::new(BufWriter::new(File::create(p).map_err(|e| {
                Failure::Validation(format!("{}: {e}", p.display()))
            })?))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn parse_grid(spec: &str, log: bool) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Validation(format!("bad grid {spec:?}"));
    let num = |s: &str| moran_core::params::parse_number(s.trim()).map_err(|_| bad());
    if let [lo, hi, n] = spec.split(':').collect::<Vec<_>>()[..] {
        let (lo, hi) = (num(lo)?, num(hi)?);
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if n == 0 || hi < lo || (log && lo <= 0.0) {
            return Err(bad());
        }
        return Ok(if log {
            log_grid(lo, hi, n)
        } else if n == 1 {
            vec![lo]
        } else {
            (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect()
        });
    }
    spec.split(',').map(num).collect()
}

fn print_json(v: &Value, out: &Option<PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(v).expect("serialisable");
    println!("{text}");
    if let Some(p) = out {
        std::fs::write(p, format!("{text}\n"))
            .map_err(|e| Failure::Validation(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn write_h_csv(out: &Option<PathBuf>, header: &str, cols: &[&[f64]]) -> Result<(), Failure> {
    let mut w = sink(out)?;
    writeln!(w, "{header}")?;
    for k in 0..cols[0].len() {
        write!(w, "{k}")?;
        for c in cols {
            write!(w, ",{:.17e}", c[k])?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn report_outcome(rep: &DualityReport, tol: f64, out: &Option<PathBuf>) -> Outcome {
    let mut v = rep.to_json();
    v["tol"] = json!(tol);
    v["pass"] = json!(rep.passes(tol));
    print_json(&v, out)?;
    Ok(rep.passes(tol))
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Stationary { common, process } => {
            let p = model(&common)?;
            let dist: Dist = match process {
                Process::Y => stationary(&build_q_y_ftw(&p)?)?,
                Process::L => stationary(&build_q_l(&p)?)?,
                Process::R => {
                    if p.u > 0.0 {
                        return Err(Failure::Validation(
                            "R is absorbed for u > 0; a stationary law exists only for u = 0"
                                .into(),
                        ));
                    }
                    let r = build_q_r(&p)?;
                    stationary_on_class(&r, &(1..=p.n).collect::<Vec<_>>())?
                }
            };
            let mut w = sink(&common.out)?;
            dist.write_csv(&mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Hinf {
            common,
            method,
            tol,
        } => {
            let p = model(&common)?;
            match method {
                Method::Recursion => {
                    write_h_csv(&common.out, "k,h", &[&h_inf_via_recursion(&p)?.h])?
                }
                Method::Pld => write_h_csv(&common.out, "k,h", &[&h_inf_via_l(&p)?.h])?,
                Method::Ytilde => write_h_csv(&common.out, "k,h", &[&h_inf_via_ytilde(&p)?.h])?,
                Method::All => {
                    let rec = h_inf_via_recursion(&p)?;
                    let pld = h_inf_via_l(&p)?;
                    let yt = h_inf_via_ytilde(&p)?;
                    let pairs = [
                        ("pld_vs_recursion", pld.max_diff(&rec)),
                        ("recursion_vs_ytilde", rec.max_diff(&yt)),
                        ("pld_vs_ytilde", pld.max_diff(&yt)),
                    ];
                    let worst = pairs.iter().fold(0.0f64, |a, &(_, v)| a.max(v));
                    if let Some(out) = &common.out {
                        write_h_csv(
                            &Some(out.clone()),
                            "k,recursion,pld,ytilde",
                            &[&rec.h, &pld.h, &yt.h],
                        )?;
                    }
                    let mut v = json!({ "N": p.n, "max_pairwise_discrepancy": worst, "tol": tol });
                    for (name, d) in pairs {
                        v[name] = json!(d);
                    }
                    v["pass"] = json!(worst <= tol);
                    let text = serde_json::to_string_pretty(&v).expect("serialisable");
                    println!("{text}");
                    return Ok(worst <= tol);
                }
            }
            Ok(true)
        }
        Command::Hr { common, r } => {
            let p = model(&common)?;
            write_h_csv(&common.out, "k,h", &[&h_r_via_l(&p, r, DEFAULT_TOL)?.h])?;
            Ok(true)
        }
        Command::Duality {
            common,
            which,
            t,
            tol,
            n_max,
            table,
        } => {
            if !(t >= 0.0) {
                return Err(Failure::Validation(format!("--t {t} must be >= 0")));
            }
            let (rep, default_tol) = match which {
                Which::Diffusion => {
                    let dp = diffusion(&common)?;
                    if table.is_some() {
                        let mut w = sink(&table)?;
                        write_duality_csv(&diffusion_duality_table(&dp, n_max)?, &mut w)?;
                        w.flush()?;
                    }
                    (check_diffusion_duality(&dp, n_max)?, 2e-3)
                }
                _ => {
                    let p = model(&common)?;
                    match which {
                        Which::Factorial => (check_factorial_duality(&p, t, DEFAULT_TOL)?, 1e-10),
                        Which::Ytilde => (check_ytilde_l_duality(&p, t, DEFAULT_TOL)?, 1e-10),
                        Which::Siegmund => (check_siegmund_duality(&p, t, DEFAULT_TOL)?, 1e-10),
                        Which::Conjugation => (check_conjugation(&p)?, 1e-12),
                        Which::Descendant => {
                            (check_descendant_equality(&p, t, DEFAULT_TOL)?, 1e-10)
                        }
                        Which::Diffusion => unreachable!(),
                    }
                }
            };
            report_outcome(&rep, tol.unwrap_or(default_tol), &common.out)
        }
        Command::Fig7 {
            common,
            configs,
            ugrid,
            n,
            nu0,
            b,
        } => {
            let configs: Vec<Fig7Config> = match configs {
                Some(path) => {
                    let text = read(&path)?;
                    serde_json::from_str(&text)
                        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
                }
                None => fig7_configs(b),
            };
            let grid = parse_grid(&ugrid, true)?;
            let rows = fig7_scan(n, nu0, b, &grid, &configs)?;
            let mut w = sink(&common.out)?;
            write_fig7_csv(&rows, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Haldane {
            common,
            sigma,
            m,
            alpha,
            n_list,
        } => {
            let rows = haldane_scan(sigma, m, alpha, &n_list)?;
            let mut w = sink(&common.out)?;
            write_haldane_csv(&rows, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::DiffusionHinf {
            common,
            ygrid,
            n_max,
            tol,
        } => {
            let dp = diffusion(&common)?;
            let grid = parse_grid(&ygrid, false)?;
            let sc = self_consistent(n_max, tol, |n| h_inf_diffusion(&dp, &grid, n))?;
            eprintln!(
                "n_max = {}, leaked mass bound = {:e}",
                sc.n_max, sc.leaked_mass_bound
            );
            let mut w = sink(&common.out)?;
            write_h_inf_csv(&grid, &sc.values, &mut w)?;
            w.flush()?;
            Ok(true)
        }
        Command::Simulate {
            common,
            replicates,
            horizon,
            seed,
            extract,
            start,
            events,
        } => {
            let p = model(&common)?;
            if start > p.n || (start == 0 && !matches!(extract, Extract::Descendant)) {
                return Err(Failure::Validation(format!(
                    "--start {start} outside 1..={}",
                    p.n
                )));
            }
            if let Some(path) = &events {
                let log = sample_event_log(&p, horizon, &mut StreamRng::new(seed, 0))?;
                let f = File::create(path)
                    .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
                log.write_jsonl(BufWriter::new(f))?;
            }
            let sites: Vec<u32> = (0..start as u32).collect();
            let mut colouring = vec![0u8; p.n];
            for &s in &sites {
                colouring[s as usize] = 1;
            }
            let values: Vec<moran_core::Result<String>> =
                run_replicates(seed, replicates, |_, rng| {
                    let log = sample_event_log(&p, horizon, rng)?;
                    Ok(match extract {
                        Extract::R => extract_r_path(&log, &sites)?.path.last().to_string(),
                        Extract::L => extract_pld_path(&log, &[0])?.l.last().to_string(),
                        Extract::Descendant => {
                            let path = descendant_counts(&log, &sites, &colouring)?;
                            let s = path.states.last().expect("non-empty path");
                            format!("{};{};{}", s.k, s.d, s.b)
                        }
                    })
                });
            let mut w = sink(&common.out)?;
            writeln!(w, "replicate,value")?;
            for (i, v) in values.into_iter().enumerate() {
                writeln!(w, "{i},{}", v?)?;
            }
            w.flush()?;
            Ok(true)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
