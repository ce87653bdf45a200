//! `chaoslab`: run the chaos-calculus experiments and write their reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chaoslab::experiments::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "chaoslab", version, about = "Wiener chaos and time-change experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integral of sign(W) against W and its bracket.
    SignDds(Opts),
    /// Sum of B^i/|B| dB^i for a d-dimensional Brownian motion.
    Bessel(Opts),
    /// W(h1) sign W(h2): normal law, random unbounded clock.
    Counterexample(Opts),
    /// Truncated chaos expansions of sign(W(h)).
    SignChaos(Opts),
    /// Karhunen-Loeve construction and coefficient recovery.
    KlReconstruct(Opts),
    /// Analytic and Monte Carlo fourth moments.
    FourthMoment(Opts),
    /// Moment identities at a bounded stopping time.
    ItoIdentities(Opts),
    /// G_X and the Stein residual.
    Gx(Opts),
    /// Every experiment in turn.
    All(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Debug, Clone, Args)]
struct Opts {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Monte Carlo paths (per-experiment default when omitted).
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long, default_value_t = 4096)]
    steps: usize,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Chaos truncation index (per-experiment default when omitted).
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    kl_terms: usize,
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Directory for reports; nothing is written when omitted.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Scale paths and steps down tenfold.
    #[arg(long)]
    quick: bool,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    jobs: Option<usize>,
}

impl Command {
    fn split(&self) -> (Vec<ExperimentKind>, &Opts) {
        use ExperimentKind as K;
        let one = |k| vec![k];
        match self {
            Command::SignDds(o) => (one(K::SignDds), o),
            Command::Bessel(o) => (one(K::Bessel), o),
            Command::Counterexample(o) => (one(K::Counterexample), o),
            Command::SignChaos(o) => (one(K::SignChaos), o),
            Command::KlReconstruct(o) => (one(K::KlReconstruct), o),
            Command::FourthMoment(o) => (one(K::FourthMoment), o),
            Command::ItoIdentities(o) => (one(K::ItoIdentities), o),
            Command::Gx(o) => (one(K::Gx), o),
            Command::All(o) => (K::ALL.to_vec(), o),
        }
    }
}

impl Opts {
    fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            seed: self.seed,
            paths: self.paths,
            steps: self.steps,
            grid: self.grid,
            trunc: self.trunc,
            kl_terms: self.kl_terms,
            dim: self.dim,
            alpha: self.alpha,
            quick: self.quick,
            output: self.out.clone(),
        }
    }
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or_default()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(contents)?;
    f.sync_all()?;
    fs::rename(&tmp, path)
}

/// One row per sample index, one column per sample series.
fn samples_csv(report: &ExperimentReport) -> Result<Vec<u8>, Box<dyn std::error::Error>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let keys: Vec<&String> = report.samples.keys().collect();
    let mut header = vec!["index"];
    header.extend(keys.iter().map(|k| k.as_str()));
    w.write_record(&header)?;
    let rows = report.samples.values().map(Vec::len).max().unwrap_or(0);
    for i in 0..rows {
        let mut rec = vec![i.to_string()];
        rec.extend(report.samples.values().map(|s| s.get(i).map(f64::to_string).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    Ok(w.into_inner()?)
}

fn write_report(report: &ExperimentReport, dir: &Path, format: Format) -> Result<(), Box<dyn std::error::Error>> {
    if matches!(format, Format::Json | Format::Both) {
        let mut json = report.to_json();
        json.push('\n');
        write_atomic(&dir.join(format!("{}.json", report.name)), json.as_bytes())?;
    }
    if matches!(format, Format::Csv | Format::Both) {
        write_atomic(&dir.join(format!("{}.csv", report.name)), &samples_csv(report)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> ExitCode {
    let (kinds, opts) = cli.command.split();
    let config = opts.config();
    if let Err(e) = config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Some(dir) = &opts.out {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("error: cannot create {}: {e}", dir.display());
            return ExitCode::from(3);
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = opts.jobs {
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(3);
        }
    };
    let mut all_pass = true;
    for kind in kinds {
        let report = match pool.install(|| run_experiment(kind, &config)) {
            Ok(r) => r,
            Err(e) => {
                eprintln!("error: {}: {e}", kind.name());
                return ExitCode::from(2);
            }
        };
        println!("{}", report.summary_line());
        all_pass &= report.all_pass();
        if let Some(dir) = &opts.out {
            if let Err(e) = write_report(&report, dir, opts.format) {
                eprintln!("error: writing {} report: {e}", report.name);
                return ExitCode::from(3);
            }
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("chaoslab").chain(args.iter().copied()))
    }

    #[test]
    fn subcommand_with_overrides() {
        let cli = parse(&["sign-dds", "--seed", "42", "--paths", "10000"]).unwrap();
        let (kinds, opts) = cli.command.split();
        assert_eq!(kinds, vec![ExperimentKind::SignDds]);
        let c = opts.config();
        assert_eq!(c.seed, 42);
        assert_eq!(c.paths, Some(10_000));
        let d = ExperimentConfig::default();
        assert_eq!((c.steps, c.grid, c.kl_terms, c.dim, c.alpha), (d.steps, d.grid, d.kl_terms, d.dim, d.alpha));
        assert_eq!(opts.format, Format::Json);
    }

    #[test]
    fn run_all_with_output() {
        let cli = parse(&["all", "--out", "reports/"]).unwrap();
        let (kinds, opts) = cli.command.split();
        assert_eq!(kinds, ExperimentKind::ALL.to_vec());
        assert_eq!(opts.out.as_deref(), Some(Path::new("reports/")));
    }

    #[test]
    fn usage_errors() {
        assert!(parse(&["bogus"]).is_err());
        assert!(parse(&["gx", "--seed", "minus-one"]).is_err());
        assert!(parse(&["gx", "--format", "xml"]).is_err());
        assert!(parse(&["gx", "--frobnicate"]).is_err());
        assert!(parse(&[]).is_err());
    }

    #[test]
    fn subcommand_names_match_experiments() {
        for kind in ExperimentKind::ALL {
            let cli = parse(&[kind.name()]).unwrap();
            assert_eq!(cli.command.split().0, vec![kind]);
        }
    }
}
