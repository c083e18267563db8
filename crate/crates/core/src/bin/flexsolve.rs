use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flexsolve::apps::{self, FLOW_ALPHA, ROF_ALPHA, SEGMENT_ALPHA};
use flexsolve::io::{read_pgm, write_flo, write_flow_csv, write_pgm, PgmImage};
use flexsolve::{Error, RunSummary, StopConfig};

#[derive(Parser)]
#[command(name = "flexsolve", version, about = "Variational image processing with a primal-dual solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StopFlags {
    /// Iteration budget
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    /// Iterations between residual checks
    #[arg(long, default_value_t = 100)]
    check_every: usize,
    /// Tolerance on the scaled primal-dual residual
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Total-variation denoising
    Rof {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = ROF_ALPHA)]
        alpha: f64,
        #[command(flatten)]
        stop: StopFlags,
    },
    /// TV-L1 optical flow between two frames
    Flow {
        first: PathBuf,
        second: PathBuf,
        output: PathBuf,
        #[arg(long, default_value_t = FLOW_ALPHA)]
        alpha1: f64,
        #[arg(long, default_value_t = FLOW_ALPHA)]
        alpha2: f64,
        /// Write `u,v` lines instead of a .flo file
        #[arg(long)]
        csv: bool,
        #[command(flatten)]
        stop: StopFlags,
    },
    /// Multi-label segmentation; writes <prefix>_<i>.pgm masks and <prefix>_labels.pgm
    Segment {
        input: PathBuf,
        prefix: PathBuf,
        /// Number of labels
        #[arg(short, long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = SEGMENT_ALPHA)]
        alpha: f64,
        /// Label intensities in [0, 1]; drawn at random when omitted
        #[arg(long, value_delimiter = ',')]
        labels: Option<Vec<f64>>,
        /// Seed for random labels
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        stop: StopFlags,
    },
}

fn report(summary: &RunSummary) {
    let r = summary.final_report;
    println!(
        "iterations={} converged={} primal={:e} dual={:e} scaled={:e}",
        r.at_iteration, summary.converged, r.primal, r.dual, r.scaled_total
    );
}

fn with_suffix(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn run(command: Command) -> flexsolve::Result<()> {
    let stop = |s: &StopFlags| StopConfig::new(s.max_iters, s.check_every, s.tol);
    match command {
        Command::Rof {
            input,
            output,
            alpha,
            stop: flags,
        } => {
            let img = read_pgm(&input)?;
            let (out, summary) = apps::denoise(&img, alpha, &stop(&flags)?)?;
            write_pgm(&out, &output)?;
            report(&summary);
        }
        Command::Flow {
            first,
            second,
            output,
            alpha1,
            alpha2,
            csv,
            stop: flags,
        } => {
            let (f1, f2) = (read_pgm(&first)?, read_pgm(&second)?);
            let (flow, summary) = apps::estimate_flow(&f1, &f2, alpha1, alpha2, &stop(&flags)?)?;
            if csv {
                write_flow_csv(&flow, &output)?;
            } else {
                write_flo(&flow, &output)?;
            }
            report(&summary);
        }
        Command::Segment {
            input,
            prefix,
            k,
            alpha,
            labels,
            seed,
            stop: flags,
        } => {
            let labels = match labels {
                Some(l) if l.len() != k => {
                    return Err(Error::Parameter(format!("{} labels given for k = {k}", l.len())));
                }
                Some(l) => l,
                None if k < 1 => return Err(Error::Parameter("k must be at least 1".into())),
                None => apps::random_labels(k, seed),
            };
            let img = read_pgm(&input)?;
            let seg = apps::segment(&img, &labels, alpha, &stop(&flags)?)?;
            for (i, mask) in seg.masks.iter().enumerate() {
                let out = PgmImage::from_samples(img.width, img.height, 255, mask.clone())?;
                write_pgm(&out, with_suffix(&prefix, &format!("_{i}.pgm")))?;
            }
            let map = apps::label_map_image(img.width, img.height, &seg.label_map, k)?;
            write_pgm(&map, with_suffix(&prefix, "_labels.pgm"))?;
            report(&seg.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Divergence { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
