use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cylmin_core::campaign::{run_campaign, CampaignSettings};
use cylmin_core::flow::write_trace_csv;
use cylmin_core::fmt::sig_trimmed;
use cylmin_core::oracle::write_sweep_csv;
use cylmin_core::planner::solve_documents;
use cylmin_core::switching::{race_profile, write_race_csv};
use cylmin_core::{
    find_tie_instance, normalize_system, pmp_certificate, sweep, trace, CylinderPoint, Error,
    InducedSystemParams, OracleConfig, PlanDocument, PlanKind, SystemParams,
};
use log::info;

const DIGITS: usize = 12;

#[derive(Parser)]
#[command(
    name = "cylmin",
    version,
    about = "Minimal-time bang-bang planning on the cylinder x' = u, y' = e^x - 1"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print its optimal plan(s).
    Solve {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Print plan documents as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write a sampled trajectory of the optimal plan as CSV.
    Trace {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the planner with the brute-force oracle on random instances.
    Verify {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = OracleConfig::DEFAULT_STEP)]
        h: f64,
        #[arg(long, default_value_t = 1)]
        max_switches: usize,
        #[arg(long, default_value_t = OracleConfig::DEFAULT_HIT_TOLERANCE)]
        hit_tolerance: f64,
        #[arg(long, default_value_t = OracleConfig::DEFAULT_SHAPE_DIVISIONS)]
        shape_divisions: usize,
    },
    /// Tabulate the race functions F, G, f, g as CSV.
    Race {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, allow_hyphen_values = true)]
        x1: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimal time from one point to every cell of a grid, as CSV.
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0")]
        from: CylinderPoint,
        /// `lo,hi,n`
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "-2,2,41")]
        x_range: (f64, f64, usize),
        /// `lo,hi,n`
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true, default_value = "0,1,41")]
        y_range: (f64, f64, usize),
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate a point pair joined by two distinct minimal-time plans.
    Tie {
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    /// Start point `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    from: CylinderPoint,
    /// Target point `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    to: CylinderPoint,
    /// Induced-system parameters; when given, rho is rescaled by normalization.
    #[arg(long, allow_hyphen_values = true, requires_all = ["beta", "a_param"])]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["alpha", "a_param"])]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires_all = ["alpha", "beta"])]
    a_param: Option<f64>,
}

impl InstanceArgs {
    fn params(&self) -> Result<SystemParams> {
        let params = match (self.alpha, self.beta, self.a_param) {
            (Some(alpha), Some(beta), Some(a_param)) => normalize_system(&InducedSystemParams {
                alpha,
                beta,
                a_param,
                rho: self.rho,
            })?,
            _ => SystemParams::new(self.rho)?,
        };
        info!("effective rho = {}", params.rho());
        Ok(params)
    }
}

fn parse_numbers(s: &str, n: usize) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got `{s}`"));
    }
    parts
        .iter()
        .map(|p| {
            let v: f64 = p.parse().map_err(|_| format!("`{p}` is not a number"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("`{p}` is not finite"))
            }
        })
        .collect()
}

fn parse_point(s: &str) -> std::result::Result<CylinderPoint, String> {
    let v = parse_numbers(s, 2)?;
    CylinderPoint::new(v[0], v[1]).map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.rsplitn(2, ',').collect();
    let [count, bounds] = parts[..] else {
        return Err(format!("expected `lo,hi,n`, got `{s}`"));
    };
    let v = parse_numbers(bounds, 2)?;
    let n = count
        .trim()
        .parse()
        .map_err(|_| format!("`{count}` is not a sample count"))?;
    Ok((v[0], v[1], n))
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn suffixed(path: &Path, tag: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn print_document(w: &mut impl Write, doc: &PlanDocument) -> io::Result<()> {
    let s = |x: f64| sig_trimmed(x, DIGITS);
    writeln!(
        w,
        "plan {}: ({}, {}) -> ({}, {}), rho = {}",
        doc.kind,
        s(doc.from.x),
        s(doc.from.y),
        s(doc.to.x),
        s(doc.to.y),
        s(doc.rho)
    )?;
    writeln!(w, "  total_time = {}", s(doc.total_time))?;
    writeln!(w, "  switches = {}", doc.segments.len().saturating_sub(1))?;
    for seg in &doc.segments {
        writeln!(w, "  segment u = {:>4} for {}", s(seg.u), s(seg.duration))?;
    }
    if let Some(c) = &doc.certificate {
        writeln!(
            w,
            "  certificate: p0 = {}, q0 = {}, min H = {}",
            s(c.p0),
            s(c.q0),
            s(c.hamiltonian_min)
        )?;
    }
    if doc.tie {
        writeln!(w, "  tie: another plan has the same total time")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve { instance, json } => {
            let params = instance.params()?;
            let docs = solve_documents(instance.from, instance.to, &params)?;
            let mut out = io::stdout().lock();
            if json {
                serde_json::to_writer_pretty(&mut out, &docs)?;
                writeln!(out)?;
            } else {
                for doc in &docs {
                    print_document(&mut out, doc)?;
                }
            }
        }
        Command::Trace {
            instance,
            samples,
            out,
        } => {
            let params = instance.params()?;
            let solution = cylmin_core::solve_min_time(instance.from, instance.to, &params)?;
            let tie = solution.is_tie();
            for plan in &solution.plans {
                pmp_certificate(plan, instance.from, &params)?;
                let path = match (tie, plan.kind) {
                    (true, PlanKind::Dip) => suffixed(&out, "dip"),
                    (true, PlanKind::Hump) => suffixed(&out, "hump"),
                    _ => out.clone(),
                };
                let points = trace(&plan.schedule, instance.from, samples, &params)?;
                let mut w = output(Some(&path))?;
                write_trace_csv(&mut w, &points)?;
                w.flush()?;
                info!("wrote {} rows to {}", points.len(), path.display());
            }
        }
        Command::Verify {
            n,
            seed,
            h,
            max_switches,
            hit_tolerance,
            shape_divisions,
        } => {
            if n == 0 {
                return Err(Error::InvalidParam("--n must be at least 1".into()).into());
            }
            let settings = CampaignSettings {
                max_switches,
                time_step: h,
                hit_tolerance,
                shape_divisions,
            };
            let report = run_campaign(n, seed, &settings)?;
            let mut out = io::stdout().lock();
            report.write_text(&mut out)?;
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Race {
            a,
            x0,
            x1,
            rho,
            grid,
            out,
        } => {
            let params = SystemParams::new(rho)?;
            let rows = race_profile(a, x0, x1, &params, grid)?;
            let mut w = output(out.as_deref())?;
            write_race_csv(&mut w, &rows)?;
            w.flush()?;
        }
        Command::Sweep {
            rho,
            from,
            x_range,
            y_range,
            out,
        } => {
            let params = SystemParams::new(rho)?;
            let cells = sweep(from, &params, x_range, y_range)?;
            let mut w = output(out.as_deref())?;
            write_sweep_csv(&mut w, &cells)?;
            w.flush()?;
        }
        Command::Tie { delta, rho, json } => {
            let params = SystemParams::new(rho)?;
            let tie = find_tie_instance(delta, &params)?;
            let docs = tie
                .plans
                .iter()
                .map(|plan| {
                    let cert = pmp_certificate(plan, tie.from, &params)?;
                    Ok(PlanDocument::from_plan(
                        plan,
                        tie.from,
                        &params,
                        Some(cert),
                        true,
                    ))
                })
                .collect::<cylmin_core::Result<Vec<_>>>()?;
            let mut out = io::stdout().lock();
            if json {
                serde_json::to_writer_pretty(&mut out, &docs)?;
                writeln!(out)?;
            } else {
                writeln!(
                    out,
                    "tie at x = {} (|m_dip - m_hump| = {:.3e})",
                    sig_trimmed(tie.x, DIGITS),
                    tie.gap.abs()
                )?;
                for doc in &docs {
                    print_document(&mut out, doc)?;
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<io::Error>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::InvalidParam(_)
            | Error::NonFinite { .. }
            | Error::Inadmissible { .. }
            | Error::Larc(_),
        ) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CYLMIN_LOG", "off")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
