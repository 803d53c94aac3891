//! `postselect` command-line front end.
//!
//! Exit status: 0 on success, 1 for I/O or parse failures, 2 for errors
//! reported by the library (with `{"error": code, "detail": text}` on
//! standard output), 64 for usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use postselect::channel::{apply_channel, build_kraus, postselect_branch, DensityMatrix};
use postselect::json::{self, RiemannShorthand};
use postselect::montecarlo::{estimate_fractions, fit_scaling, ScalingReport, PIPELINE_RESTARTS};
use postselect::projective::{cross_ratio, tetrad_configuration, RiemannPoint};
use postselect::realize::{exact_realize, DilationResult, Scaling};
use postselect::suites::{
    classify_single_qubit, exact_realize_suite, fit_suite, FitOptions, Suite,
};
use postselect::ComplexMatrix;
use serde::{Deserialize, Serialize};
use serde_json::json;

const SEED_ENV: &str = "POSTSELECT_SEED";

#[derive(Parser)]
#[command(name = "postselect", version, about = "Post-selected realizations and PL suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// Input JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Output path; `-` for standard output. Defaults to `<stem>.<command>.json`
    /// next to the input.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Dilate an operator to a one-ancilla unitary.
    Realize {
        #[command(flatten)]
        io: Io,
        /// Scale by 1/sqrt(lambda_max) for the best success probability (default).
        #[arg(long, conflicts_with = "literal")]
        optimal: bool,
        /// Keep `L` unscaled when it is already weakly contracting.
        #[arg(long)]
        literal: bool,
    },
    /// Single-qubit infinite-approximability verdict for a suite.
    SuiteClassify {
        #[command(flatten)]
        io: Io,
    },
    /// Search for a PL suite close to the input suite.
    SuiteFit {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        iters: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Also report whether the fit is closer than this.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Exact realization of a suite, if one exists.
    SuiteExact {
        #[command(flatten)]
        io: Io,
    },
    /// Monte Carlo estimate of the approximable fraction and its scaling.
    McScaling {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        ell: usize,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        eps: Vec<f64>,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = PIPELINE_RESTARTS)]
        restarts: usize,
        /// Output path; `-` for standard output. Defaults to `mc-scaling.json`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// CSV of (eps, fraction). Defaults to the output path with a `.csv`
        /// extension; omitted when writing to standard output.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Kraus channel of a unitary or of a dilation result.
    Channel {
        #[command(flatten)]
        io: Io,
        /// Density matrix to push through the channel.
        #[arg(long)]
        rho: Option<PathBuf>,
    },
    /// Cross-ratio of four points of the Riemann sphere.
    CrossRatio {
        #[command(flatten)]
        io: Io,
    },
}

enum Failure {
    Usage(String),
    Io(String),
    Parse(String),
    Domain(postselect::Error),
}

impl From<postselect::Error> for Failure {
    fn from(e: postselect::Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome<T> = Result<T, Failure>;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Outcome<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome<()> {
    if path == Path::new("-") {
        let mut out = std::io::stdout().lock();
        writeln!(out, "{text}").map_err(|e| Failure::Io(e.to_string()))
    } else {
        fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
    }
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Outcome<()> {
    let text = json::to_string(value).map_err(|e| Failure::Io(e.to_string()))?;
    write_text(path, &text)
}

fn default_output(io: &Io, command: &str) -> PathBuf {
    io.output.clone().unwrap_or_else(|| {
        let stem = io.input.file_stem().map_or_else(|| OsString::from("out"), |s| s.to_owned());
        let mut name = stem;
        name.push(format!(".{command}.json"));
        io.input.with_file_name(name)
    })
}

fn resolve_seed(flag: Option<u64>) -> Outcome<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Err(Failure::Usage(format!(
            "this command is randomized: pass --seed or set {SEED_ENV}"
        ))),
    }
}

/// A unitary given either as a bare matrix or inside a dilation result.
#[derive(Deserialize)]
#[serde(untagged)]
enum UnitaryInput {
    Dilation(DilationResult),
    Matrix(ComplexMatrix),
}

#[derive(Deserialize)]
struct CrossRatioInput {
    points: [RiemannShorthand; 4],
}

#[derive(Serialize)]
struct CrossRatioOutput {
    value: RiemannPoint,
    #[serde(with = "option_pair")]
    finite: Option<postselect::C64>,
    configuration: postselect::projective::TetradConfiguration,
}

mod option_pair {
    use serde::{Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Option<postselect::C64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(|z| [z.re, z.im]).serialize(s)
    }
}

fn run(command: Command) -> Outcome<()> {
    match command {
        Command::Realize { io, literal, .. } => {
            let l: ComplexMatrix = read_json(&io.input)?;
            let scaling = if literal { Scaling::Literal } else { Scaling::Optimal };
            let result = exact_realize(&l, scaling)?;
            write_json(&default_output(&io, "realize"), &result)
        }
        Command::SuiteClassify { io } => {
            let sigma: Suite = read_json(&io.input)?;
            let verdict = classify_single_qubit(&sigma)?;
            write_json(&default_output(&io, "suite-classify"), &json!({ "verdict": verdict }))
        }
        Command::SuiteFit { io, restarts, iters, seed, eps } => {
            let seed = resolve_seed(seed)?;
            if let Some(e) = eps {
                if !(e > 0.0) {
                    return Err(Failure::Usage(format!("--eps must be positive, got {e}")));
                }
            }
            let sigma: Suite = read_json(&io.input)?;
            let opts = FitOptions { restarts, max_iters: iters, seed };
            let fit = fit_suite(&sigma, &opts)?;
            let mut out = serde_json::to_value(&fit).map_err(|e| Failure::Io(e.to_string()))?;
            if let Some(e) = eps {
                out["eps"] = json!(e);
                out["verdict"] = json!(if fit.max_fs < e { "yes" } else { "unknown" });
            }
            write_json(&default_output(&io, "suite-fit"), &out)
        }
        Command::SuiteExact { io } => {
            let sigma: Suite = read_json(&io.input)?;
            let l = exact_realize_suite(&sigma);
            write_json(
                &default_output(&io, "suite-exact"),
                &json!({ "realizable": l.is_some(), "L": l }),
            )
        }
        Command::McScaling { n, ell, eps, samples, seed, restarts, output, csv } => {
            let seed = resolve_seed(seed)?;
            if samples == 0 || restarts == 0 {
                return Err(Failure::Usage("--samples and --restarts must be positive".into()));
            }
            let fractions = estimate_fractions(n, ell, &eps, samples, seed, restarts)?;
            let output = output.unwrap_or_else(|| PathBuf::from("mc-scaling.json"));
            let csv = csv.or_else(|| (output != Path::new("-")).then(|| output.with_extension("csv")));
            if let Some(csv) = &csv {
                let mut text = String::from("eps,fraction");
                for (e, f) in eps.iter().zip(&fractions) {
                    text.push_str(&format!("\n{e:.16e},{f:.16e}"));
                }
                write_text(csv, &text)?;
            }
            let report: ScalingReport = fit_scaling(n, ell, &eps, &fractions, samples, seed)?;
            write_json(&output, &report)
        }
        Command::Channel { io, rho } => {
            let u = match read_json::<UnitaryInput>(&io.input)? {
                UnitaryInput::Dilation(d) => d.u,
                UnitaryInput::Matrix(m) => m,
            };
            let ch = build_kraus(&u)?;
            let path = default_output(&io, "channel");
            match rho {
                None => write_json(&path, &ch),
                Some(rho_path) => {
                    let rho = DensityMatrix::new(read_json(&rho_path)?)?;
                    let out = apply_channel(&ch, &rho)?;
                    let probs = (0..ch.kraus.len())
                        .map(|i| postselect_branch(&ch, i, &rho).map(|b| b.1))
                        .collect::<postselect::Result<Vec<f64>>>()?;
                    write_json(
                        &path,
                        &json!({ "channel": ch, "output": out.matrix(), "branch_probabilities": probs }),
                    )
                }
            }
        }
        Command::CrossRatio { io } => {
            let input: CrossRatioInput = read_json(&io.input)?;
            let [a, b, c, d] = input.points.map(|p| p.0);
            let value = cross_ratio(&a, &b, &c, &d)?;
            write_json(
                &default_output(&io, "cross-ratio"),
                &CrossRatioOutput {
                    value,
                    finite: value.value(),
                    configuration: tetrad_configuration(&a, &b, &c, &d),
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(64)
        }
        Err(Failure::Io(msg)) | Err(Failure::Parse(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(e)) => {
            let report = json!({ "error": e.code(), "detail": e.to_string() });
            println!("{report}");
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
