//! Command-line front end: solve optimal profiles, trace rays, evaluate
//! resistance, build zigzag and chain bodies, and emit comparison tables.
//!
//! Exit codes: 0 success, 2 input error, 3 regime or precondition error,
//! 4 regularity violation. Diagnostics go to standard error; data files are
//! byte-reproducible (fixed 17-digit formatting, no timestamps).

use clap::{Args, Parser, Subcommand, ValueEnum};
use minres::billiard::{Body2D, ResistanceSpec};
use minres::error::Error;
use minres::kernels::Kernel;
use minres::quad::QuadratureSpec;
use minres::solver::{self, ProfileSolution};
use minres::zigzag::{self, NodeStrategy};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "resist",
    about = "Minimal aerodynamic resistance of axisymmetric bodies",
    long_about = "Solves minimal-resistance profiles, traces billiard rays through \
                  generator-curve bodies, and constructs zigzag and parabolic-chain bodies.\n\
                  The RESIST_THREADS environment variable caps parallel quadrature workers."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    /// Kernel selector: nonconvex | newton | single-impact | custom:FILE
    #[arg(long)]
    case: String,
    /// Body height (cylinder radius is 1)
    #[arg(long)]
    height: f64,
    /// Profile sample count for the CSV
    #[arg(long, default_value_t = 512)]
    samples: usize,
    /// Output base path; writes OUT.csv and OUT.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on standard output
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    case: String,
    /// Sample count for the kernel/envelope CSV (0 = summary only)
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct TraceArgs {
    /// Body JSON file
    #[arg(long)]
    body: PathBuf,
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long = "bounce-cap", default_value_t = 1000)]
    bounce_cap: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ResistArgs {
    #[arg(long)]
    body: PathBuf,
    /// Base quadrature panels
    #[arg(long, default_value_t = 256)]
    panels: usize,
    #[arg(long = "bounce-cap", default_value_t = 1000)]
    bounce_cap: u32,
    /// Lower integration bound
    #[arg(long, default_value_t = 0.0)]
    from: f64,
    /// Upper integration bound
    #[arg(long, default_value_t = 1.0)]
    to: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ZigzagArgs {
    /// Hull kernel: nonconvex | newton
    #[arg(long, default_value = "nonconvex")]
    case: String,
    #[arg(long)]
    height: f64,
    /// Chord count of the piecewise-affine hull
    #[arg(long)]
    segments: usize,
    #[arg(long)]
    delta: f64,
    /// Node placement: equid | uniform
    #[arg(long, default_value = "uniform")]
    nodes: String,
    /// Body JSON output path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional cell-audit JSON path
    #[arg(long)]
    cells: Option<PathBuf>,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    height: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated heights
    #[arg(long, value_delimiter = ',')]
    heights: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the optimal profile for a kernel and height
    Solve(SolveArgs),
    /// Report kernel and envelope data
    Kernel(KernelArgs),
    /// Trace vertical rays through a body and dump the exits
    Trace(TraceArgs),
    /// Evaluate the resistance of a body by ray-traced quadrature
    Resist(ResistArgs),
    /// Construct a zigzag body over an optimal hull
    Zigzag(ZigzagArgs),
    /// Construct a single-impact parabolic-chain body
    Chain(ChainArgs),
    /// Tabulate the three kernels' profiles across heights
    Compare(CompareArgs),
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Regime(_) | Error::Parameter(_) => 3,
        Error::RegularityViolation { .. } => 4,
        _ => 2,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Kernel(a) => cmd_kernel(a),
        Command::Trace(a) => cmd_trace(a),
        Command::Resist(a) => cmd_resist(a),
        Command::Zigzag(a) => cmd_zigzag(a),
        Command::Chain(a) => cmd_chain(a),
        Command::Compare(a) => cmd_compare(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}

fn parse_kernel(case: &str) -> Result<Kernel, Error> {
    match case {
        "nonconvex" => Ok(Kernel::Nonconvex),
        "newton" => Ok(Kernel::Newton),
        "single-impact" | "single_impact" => Ok(Kernel::SingleImpact),
        other => {
            if let Some(path) = other.strip_prefix("custom:") {
                Kernel::from_json_file(Path::new(path))
            } else {
                Err(Error::InvalidKernel(format!(
                    "unknown case '{other}' (expected nonconvex, newton, single-impact, or custom:<file>)"
                )))
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

fn with_extension(base: &Path, ext: &str) -> PathBuf {
    let mut p = base.to_path_buf();
    p.set_extension(ext);
    p
}

fn cmd_solve(a: SolveArgs) -> Result<(), Error> {
    let kernel = parse_kernel(&a.case)?;
    let sol = ProfileSolution::solve(&kernel, a.height)?;
    let mut csv = Vec::new();
    sol.write_profile_csv(a.samples.max(2), &mut csv)?;
    let summary = serde_json::to_string_pretty(&sol.summary())?;
    if let Some(base) = &a.out {
        write_file(&with_extension(base, "csv"), &csv)?;
        write_file(&with_extension(base, "json"), summary.as_bytes())?;
    }
    match a.format {
        Format::Json => println!("{summary}"),
        Format::Csv => print!("{}", String::from_utf8_lossy(&csv)),
    }
    Ok(())
}

fn cmd_kernel(a: KernelArgs) -> Result<(), Error> {
    let kernel = parse_kernel(&a.case)?;
    let env = kernel.convexify()?;
    let tail = kernel.tail();
    let summary = serde_json::json!({
        "kernel": kernel.name(),
        "p0": kernel.eval(0.0)?,
        "u0": env.u0(),
        "xi0": env.xi0(),
        "tail_c": tail.c,
        "tail_alpha": tail.alpha,
    });
    let summary = serde_json::to_string_pretty(&summary)?;
    let mut csv = Vec::new();
    if a.samples > 0 {
        writeln!(csv, "u,p,envelope")?;
        let u_max = 8.0;
        for k in 0..a.samples {
            let u = u_max * k as f64 / (a.samples - 1).max(1) as f64;
            writeln!(
                csv,
                "{},{},{}",
                minres::export::fmt17(u),
                minres::export::fmt17(kernel.eval(u)?),
                minres::export::fmt17(env.value(u)?)
            )?;
        }
    }
    if let Some(base) = &a.out {
        write_file(&with_extension(base, "json"), summary.as_bytes())?;
        if a.samples > 0 {
            write_file(&with_extension(base, "csv"), &csv)?;
        }
    }
    match a.format {
        Format::Json => println!("{summary}"),
        Format::Csv => print!("{}", String::from_utf8_lossy(&csv)),
    }
    Ok(())
}

fn cmd_trace(a: TraceArgs) -> Result<(), Error> {
    let body = Body2D::from_json_file(&a.body)?;
    let mut csv = Vec::new();
    body.write_trace_csv(a.samples, a.bounce_cap, &mut csv)?;
    match &a.out {
        Some(p) => write_file(p, &csv)?,
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    Ok(())
}

fn cmd_resist(a: ResistArgs) -> Result<(), Error> {
    let body = Body2D::from_json_file(&a.body)?;
    let spec = ResistanceSpec {
        quad: QuadratureSpec {
            base_panels: a.panels.max(1),
            ..QuadratureSpec::default()
        },
        bounce_cap: a.bounce_cap,
    };
    let r = body.resistance_over(a.from, a.to, &spec)?;
    let out = serde_json::json!({
        "resistance": r.value,
        "error_estimate": r.error_estimate,
        "three_dimensional": r.three_dimensional(),
        "interval": [a.from, a.to],
        "rays": r.rays,
        "max_bounces": r.max_bounces,
        "resampled": r.resampled,
        "failed": r.failed,
    });
    let text = serde_json::to_string_pretty(&out)?;
    if let Some(p) = &a.out {
        write_file(p, text.as_bytes())?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_zigzag(a: ZigzagArgs) -> Result<(), Error> {
    let kernel = parse_kernel(&a.case)?;
    let sol = ProfileSolution::solve(&kernel, a.height)?;
    let strategy = match a.nodes.as_str() {
        "uniform" => NodeStrategy::Uniform,
        "equid" | "equidistributed" => NodeStrategy::SlopeEquidistributed,
        other => {
            return Err(Error::Parameter(format!(
                "unknown node strategy '{other}' (expected uniform or equid)"
            )))
        }
    };
    let pp = zigzag::approximate_profile_with(&sol, a.segments, strategy)?;
    let (body, cells) = zigzag::assemble_zigzag_with_cells(&pp, a.delta)?;
    let json = body.to_json_string()?;
    if let Some(p) = &a.cells {
        write_file(p, serde_json::to_string_pretty(&cells)?.as_bytes())?;
    }
    match &a.out {
        Some(p) => {
            write_file(p, json.as_bytes())?;
            println!(
                "{}",
                serde_json::json!({
                    "body": p,
                    "segments": pp.segment_count(),
                    "delta": a.delta,
                    "hull_modified_resistance": pp.modified_resistance(),
                })
            );
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_chain(a: ChainArgs) -> Result<(), Error> {
    let chain = zigzag::chain_body(a.height, None)?;
    let json = chain.body.to_json_string()?;
    match &a.out {
        Some(p) => {
            write_file(p, json.as_bytes())?;
            println!(
                "{}",
                serde_json::json!({
                    "body": p,
                    "first_node": chain.first_node(),
                    "last_node": chain.last_node(),
                    "interval_integral_closed_form": chain.interval_integral_closed_form(),
                })
            );
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Error> {
    if a.heights.is_empty() {
        return Err(Error::Parameter("need at least one height".into()));
    }
    let f = minres::export::fmt17;
    let mut csv = String::new();
    csv.push_str("h,R_nc,R_si,R_N,x0_nc,x0_si,x0_N,ratio_R_nc_N,ratio_x0_si_N\n");
    for &h in &a.heights {
        let nc = ProfileSolution::solve(&Kernel::Nonconvex, h)?;
        let nw = ProfileSolution::solve(&Kernel::Newton, h)?;
        let si = if h > solver::SINGLE_IMPACT_THRESHOLD_HEIGHT {
            Some(ProfileSolution::solve(&Kernel::SingleImpact, h)?)
        } else {
            None
        };
        let (r_si, x0_si, ratio_si) = match &si {
            Some(s) => (
                f(s.resistance()),
                f(s.flat_radius()),
                f(s.flat_radius() / nw.flat_radius()),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            f(h),
            f(nc.resistance()),
            r_si,
            f(nw.resistance()),
            f(nc.flat_radius()),
            x0_si,
            f(nw.flat_radius()),
            f(nc.resistance() / nw.resistance()),
            ratio_si,
        ));
    }
    match &a.out {
        Some(p) => write_file(p, csv.as_bytes())?,
        None => print!("{csv}"),
    }
    Ok(())
}
