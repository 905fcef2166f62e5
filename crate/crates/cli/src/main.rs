use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use lptv::builtin::{run_example, Example};
use lptv::format::{self, analysis_report, ToleranceSet};
use lptv::simulation::Waveform;
use lptv::{Error, SignalSpec, Verdict};
use nalgebra::DVector;

const EXIT_FAILURE: u8 = 1;
const EXIT_UNSTABLE: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lptv",
    version,
    about = "Stable inversion of periodically time-varying state-space systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Commands,
}

#[derive(Args, Clone, Copy)]
struct TolArgs {
    /// Nonsingularity threshold for D_k and Markov parameters
    #[arg(long = "tol-sv", default_value_t = lptv::DEFAULT_SV_TOL)]
    sv: f64,

    /// Width of the marginal band around the unit circle
    #[arg(long = "tol-stab", default_value_t = lptv::DEFAULT_STAB_TOL)]
    stab: f64,
}

impl TolArgs {
    fn to_set(self) -> ToleranceSet {
        ToleranceSet {
            sv_tol: self.sv,
            stab_tol: self.stab,
            ..ToleranceSet::default()
        }
    }
}

#[derive(Subcommand)]
enum Commands {
    /// Detect relative degree, invert and classify stability (JSON report)
    Analyze {
        system: PathBuf,

        /// Also run the dense cycled construction and report its deviation
        #[arg(long)]
        oracle: bool,

        #[command(flatten)]
        tol: TolArgs,

        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the periodic inverse system as JSON
    Invert {
        system: PathBuf,

        #[command(flatten)]
        tol: TolArgs,

        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Drive the plant, run the inverse on its output and write a CSV trace
    Reconstruct {
        system: PathBuf,

        /// sine:amp,freq,phase | step:level[,onset] | impulse:level[,time] | constant:level
        /// (freq in cycles per step, phase in radians)
        #[arg(long, default_value = "sine:1,0.05,0")]
        signal: String,

        /// Plant initial state, comma separated (default zero)
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,

        /// Inverse initial state, comma separated (default zero)
        #[arg(long, allow_hyphen_values = true)]
        zeta0: Option<String>,

        #[arg(long, default_value_t = 200)]
        horizon: usize,

        #[command(flatten)]
        tol: TolArgs,

        /// Write the CSV here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a bundled example (scalar, two-state, unit-delay or all) and check its reference numbers
    Examples {
        #[arg(default_value = "all")]
        which: String,

        /// Directory for per-example system, report and trace files
        #[arg(long = "out-dir")]
        out_dir: Option<PathBuf>,
    },
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn parse_vector(text: Option<&str>, len: usize, what: &str) -> anyhow::Result<DVector<f64>> {
    let Some(text) = text else {
        return Ok(DVector::zeros(len));
    };
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("parsing --{what}"))?;
    if values.len() != len {
        bail!(
            "--{what} has {} entries, the system has {len} states",
            values.len()
        );
    }
    Ok(DVector::from_vec(values))
}

fn exit_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::UnsupportedStructure { .. }) => EXIT_UNSUPPORTED,
        _ => EXIT_FAILURE,
    }
}

fn analyze(system: &Path, oracle: bool, tol: TolArgs, out: Option<&Path>) -> anyhow::Result<u8> {
    let file = format::read_system_file(system)?;
    let report = analysis_report(&file.name, &file.system, tol.to_set(), oracle)?;
    emit(&report.to_json(), out)?;
    if let Some(err) = &report.error {
        eprintln!("error: {err}");
        return Ok(EXIT_UNSUPPORTED);
    }
    if let Some(o) = &report.oracle {
        match (o.max_deviation, &o.error) {
            (Some(dev), _) => eprintln!("oracle deviation: {dev:.3e}"),
            (None, Some(e)) => eprintln!("oracle failed: {e}"),
            _ => {}
        }
    }
    let stability = report
        .stability
        .as_ref()
        .expect("set when inversion succeeds");
    Ok(match stability.verdict {
        Verdict::Stable => 0,
        Verdict::Marginal | Verdict::Unstable => {
            eprintln!(
                "inverse is {:?} (spectral radius {:.6e})",
                stability.verdict, stability.spectral_radius
            );
            EXIT_UNSTABLE
        }
    })
}

fn invert(system: &Path, tol: TolArgs, out: Option<&Path>) -> anyhow::Result<u8> {
    let file = format::read_system_file(system)?;
    let inv = lptv::inversion::invert_with(&file.system, tol.sv)?;
    emit(&format::inverse_to_json(&file.name, &inv), out)?;
    Ok(0)
}

struct ReconstructArgs<'a> {
    system: &'a Path,
    signal: &'a str,
    x0: Option<&'a str>,
    zeta0: Option<&'a str>,
    horizon: usize,
    tol: TolArgs,
    out: Option<&'a Path>,
}

fn reconstruct(args: ReconstructArgs<'_>) -> anyhow::Result<u8> {
    let file = format::read_system_file(args.system)?;
    let sys = &file.system;
    let waveform: Waveform = args.signal.parse()?;
    let x0 = parse_vector(args.x0, sys.states(), "x0")?;
    let zeta0 = parse_vector(args.zeta0, sys.states(), "zeta0")?;
    let inv = lptv::inversion::invert_with(sys, args.tol.sv)?;
    if args.horizon < inv.delay + 1 {
        return Err(Error::InsufficientHorizon {
            horizon: args.horizon,
            delay: inv.delay,
        }
        .into());
    }
    let u = SignalSpec::uniform(waveform, sys.inputs());
    let trace = lptv::reconstruct(sys, &inv, &u, &x0, &zeta0, args.horizon)?;
    let report = lptv::stability_report(&inv, args.tol.stab);
    emit(&format::trace_to_csv(&trace), args.out)?;
    let summary = format!(
        "delay {}, spectral radius {:.6e}, max error after first period {:.3e}",
        inv.delay,
        report.spectral_radius,
        trace.max_error_from(sys.period()).unwrap_or(f64::NAN)
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(0)
}

fn examples(which: &str, out_dir: Option<&Path>) -> anyhow::Result<u8> {
    let selected: Vec<Example> = if which == "all" {
        Example::ALL.to_vec()
    } else {
        vec![which.parse()?]
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let mut failed = 0;
    for ex in selected {
        let run = run_example(ex)?;
        println!("example {ex} ({})", ex.name());
        for check in &run.checks {
            println!("  {check}");
        }
        failed += run.checks.iter().filter(|c| !c.passed).count();
        if let Some(dir) = out_dir {
            let stem = ex.name();
            std::fs::write(
                dir.join(format!("{stem}.json")),
                format::system_to_json(&stem, &run.system),
            )?;
            let report = analysis_report(&stem, &run.system, ToleranceSet::default(), true)?;
            std::fs::write(dir.join(format!("{stem}.report.json")), report.to_json())?;
            std::fs::write(
                dir.join(format!("{stem}.trace.csv")),
                format::trace_to_csv(&run.trace),
            )?;
        }
    }
    if failed > 0 {
        println!("{failed} check(s) failed");
        Ok(EXIT_FAILURE)
    } else {
        Ok(0)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Commands::Analyze {
            system,
            oracle,
            tol,
            out,
        } => analyze(system, *oracle, *tol, out.as_deref()),
        Commands::Invert { system, tol, out } => invert(system, *tol, out.as_deref()),
        Commands::Reconstruct {
            system,
            signal,
            x0,
            zeta0,
            horizon,
            tol,
            out,
        } => reconstruct(ReconstructArgs {
            system,
            signal,
            x0: x0.as_deref(),
            zeta0: zeta0.as_deref(),
            horizon: *horizon,
            tol: *tol,
            out: out.as_deref(),
        }),
        Commands::Examples { which, out_dir } => examples(which, out_dir.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_for(&err))
        }
    }
}
