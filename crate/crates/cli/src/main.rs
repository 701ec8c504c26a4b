use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use filiform::algebra::GradedLieAlgebra;
use filiform::cochain::HomogeneousCochain;
use filiform::cohomology::{cohomology, family, CohomologyReport, TruncationWindow};
use filiform::deform::{prolong, DeformationSeries, DeformationStatus, Gauge};
use filiform::error::{Error, Result};
use filiform::suite::{run_suite, SuiteReport};

const EXIT_USAGE: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;
const EXIT_OBSTRUCTED: u8 = 3;
const EXIT_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "filiform", version, about = "Weight-graded cohomology and deformations of filiform Lie algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dimensions of Z, B and H over a range of weights.
    Dims(DimsArgs),
    /// Order-by-order prolongation of a 2-cocycle.
    Deform(DeformArgs),
    /// Reproduce the cohomology tables and deformation statements for m2.
    VerifyPaper(VerifyArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// Preset (m0, m2, L1) or path to a JSON algebra document.
    #[arg(long, default_value = "m2")]
    algebra: String,
    /// Largest basis index N kept in the truncated systems.
    #[arg(long, env = "FILIFORM_CUTOFF", default_value_t = 60)]
    cutoff: u32,
    /// Second cutoff N + delta used to confirm stability.
    #[arg(long, default_value_t = 5)]
    stability_delta: u32,
    /// Results are read on indices up to N - margin.
    #[arg(long, default_value_t = 5)]
    margin: u32,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

impl Common {
    fn window(&self) -> Result<TruncationWindow> {
        TruncationWindow::new(self.cutoff, self.stability_delta, self.margin)
    }

    fn algebra(&self) -> Result<GradedLieAlgebra> {
        GradedLieAlgebra::resolve(&self.algebra, self.cutoff)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct DimsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Inclusive weight range `A..B`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    weights: (i64, i64),
}

#[derive(Args)]
struct DeformArgs {
    #[command(flatten)]
    common: Common,
    /// Start from the m-family of the given weight.
    #[arg(long, conflicts_with = "cocycle", value_parser = clap::value_parser!(u32).range(2..=4))]
    family: Option<u32>,
    /// Weight of the leading cocycle.
    #[arg(long, allow_hyphen_values = true, required_unless_present = "cocycle")]
    weight: Option<i64>,
    /// JSON cochain document of a 2-cocycle.
    #[arg(long)]
    cocycle: Option<PathBuf>,
    /// Highest order of the parameter t to solve for.
    #[arg(long, default_value_t = 8)]
    max_order: usize,
    #[arg(long, value_enum, default_value_t = GaugeArg::Particular)]
    gauge: GaugeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum GaugeArg {
    Particular,
    ColumnRestricted,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Run only these criteria (1 to 11).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
}

fn parse_range(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got {s:?}"))?;
    let a: i64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: i64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a > b {
        return Err(format!("empty weight range {a}..{b}"));
    }
    Ok((a, b))
}

fn init_pool(jobs: Option<usize>) -> Result<()> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn dims(args: &DimsArgs) -> Result<u8> {
    let alg = args.common.algebra()?;
    let window = args.common.window()?;
    if !(1..=2).contains(&args.degree) {
        return Err(Error::Usage(format!("degree must be 1 or 2, got {}", args.degree)));
    }
    let (a, b) = args.weights;
    let reports: Vec<CohomologyReport> =
        (a..=b).collect::<Vec<_>>().into_par_iter().map(|l| cohomology(&alg, args.degree, l, &window)).collect::<Result<_>>()?;
    match args.common.format {
        Format::Json => print_json(&reports)?,
        Format::Table => {
            println!("{} H^{} at cutoff {}, interior {}", alg.name(), args.degree, window.cutoff, window.interior());
            println!("{:>5} {:>7} {:>7} {:>6}  stable", "l", "dim_Z", "dim_B", "dim_H");
            for r in &reports {
                let mark = if r.stable { "yes" } else { "NO" };
                println!("{:>5} {:>7} {:>7} {:>6}  {mark}", r.weight, r.dim_z, r.dim_b, r.dim_h);
            }
        }
    }
    Ok(if reports.iter().all(|r| r.stable) { 0 } else { EXIT_UNSTABLE })
}

fn print_series(s: &DeformationSeries) {
    let w = &s.window;
    println!(
        "{} weight {} gauge {:?}, cutoff {} delta {} margin {}",
        s.algebra, s.weight, s.gauge, w.cutoff, w.stability_delta, w.margin
    );
    println!("{:>5} {:>9} {:>9}", "order", "nonzero", "residual");
    for (k, alpha) in s.corrections.iter().enumerate() {
        println!("{:>5} {:>9} {:>9}", k + 1, alpha.len(), s.residuals.get(k).copied().unwrap_or(0));
    }
    match &s.status {
        DeformationStatus::TrueFinite { last_nonzero_order } => {
            println!("status: true_finite, corrections vanish after order {last_nonzero_order}")
        }
        DeformationStatus::Formal { verified_order } => println!("status: formal, verified through order {verified_order}"),
        DeformationStatus::Obstructed { order } => println!("status: obstructed at order {order}"),
    }
    if s.window_limited {
        println!("warning: the window ran out before order {}; raise --cutoff", s.effective_order);
    }
    if let Some(o) = &s.obstruction {
        println!("certificate: rank {} against augmented rank {}", o.system_rank, o.augmented_rank);
        if let Some(t) = o.inconsistent_below {
            println!("certificate: the equations on triples with indices up to {t} are already inconsistent");
        }
        println!("residual R_{}: {} nonzero interior components", o.order, o.residual.len());
    }
}

fn deform(args: &DeformArgs) -> Result<u8> {
    let alg = args.common.algebra()?;
    let window = args.common.window()?;
    let omega: HomogeneousCochain = match (&args.cocycle, args.family) {
        (Some(path), _) => serde_json::from_str(&fs::read_to_string(path)?)?,
        (None, Some(m)) => family(&alg, m, args.weight.expect("required by clap"), &window)?,
        (None, None) => return Err(Error::Usage("give --family with --weight, or --cocycle".into())),
    };
    if let (Some(l), Some(_)) = (args.weight, &args.cocycle) {
        if l != omega.weight() {
            return Err(Error::Usage(format!("--weight {l} but the cocycle has weight {}", omega.weight())));
        }
    }
    let gauge = match args.gauge {
        GaugeArg::Particular => Gauge::Particular,
        GaugeArg::ColumnRestricted => Gauge::ColumnRestricted,
    };
    let series = prolong(&alg, &omega, args.max_order, &window, gauge)?;
    match args.common.format {
        Format::Json => print_json(&series)?,
        Format::Table => print_series(&series),
    }
    Ok(if matches!(series.status, DeformationStatus::Obstructed { .. }) {
        EXIT_OBSTRUCTED
    } else if series.window_limited {
        EXIT_UNSTABLE
    } else {
        0
    })
}

fn print_suite(r: &SuiteReport) {
    for c in &r.criteria {
        println!("{:>2} {} {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.anchor);
        for x in &c.checks {
            let mark = if x.passed { "ok  " } else { "FAIL" };
            if x.detail.is_empty() {
                println!("     {mark} {}", x.name);
            } else {
                println!("     {mark} {}: {}", x.name, x.detail);
            }
        }
    }
    let passed = r.criteria.iter().filter(|c| c.passed).count();
    println!("{passed}/{} criteria passed", r.criteria.len());
    if r.unstable {
        println!("warning: some results did not stabilise at cutoff {}", r.window.cutoff);
    }
}

fn verify(args: &VerifyArgs) -> Result<u8> {
    let alg = args.common.algebra()?;
    if alg.name() != "m2" {
        return Err(Error::Usage(format!("the verification suite is specific to m2, got {}", alg.name())));
    }
    if let Some(bad) = args.only.iter().find(|&&id| !(1..=11).contains(&id)) {
        return Err(Error::Usage(format!("no criterion {bad}")));
    }
    let report = run_suite(&args.common.window()?, &args.only)?;
    match args.common.format {
        Format::Json => print_json(&report)?,
        Format::Table => print_suite(&report),
    }
    Ok(if report.unstable {
        EXIT_UNSTABLE
    } else if report.passed() {
        0
    } else {
        EXIT_FAILED
    })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unstable(_) => EXIT_UNSTABLE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => e.exit(),
    };
    let jobs = match &cli.command {
        Command::Dims(a) => a.common.jobs,
        Command::Deform(a) => a.common.jobs,
        Command::VerifyPaper(a) => a.common.jobs,
    };
    let outcome = init_pool(jobs).and_then(|()| match &cli.command {
        Command::Dims(a) => dims(a),
        Command::Deform(a) => deform(a),
        Command::VerifyPaper(a) => verify(a),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    use super::*;

    #[test]
    fn weight_ranges() {
        assert_eq!(parse_range("-5..5"), Ok((-5, 5)));
        assert_eq!(parse_range(" -3 .. -3 "), Ok((-3, -3)));
        assert!(parse_range("2..1").is_err());
        assert!(parse_range("2").is_err());
        assert!(parse_range("a..1").is_err());
    }

    #[test]
    fn unstable_errors_map_to_exit_two() {
        assert_eq!(exit_code(&Error::Unstable("x".into())), EXIT_UNSTABLE);
        assert_eq!(exit_code(&Error::Usage("x".into())), EXIT_USAGE);
    }

    #[test]
    fn arguments_parse() {
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["filiform", "deform", "--family", "3", "--weight", "-2"]).unwrap();
        let Command::Deform(d) = cli.command else { panic!("not deform") };
        assert_eq!((d.family, d.weight, d.max_order), (Some(3), Some(-2), 8));
        assert!(Cli::try_parse_from(["filiform", "deform", "--family", "3"]).is_err());
    }
}
