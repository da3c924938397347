use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use twqkd::attack::{identity_attack, phase_covariant_attack, symmetric_attack, AncillaOverlaps};
use twqkd::bounds::{bound_curve, format_sig12, linear_grid, thresholds, to_csv};
use twqkd::gram::{ensembles, spectrum_of, GramEngine};
use twqkd::protocol::{NoiseModel, ProtocolSpec};
use twqkd::search::{search_max_holevo, HolevoTarget};
use twqkd::simulator::{run, SimulationConfig, DEFAULT_EM_SAMPLE_FRACTION};
use twqkd::verify::{all_passed, CheckStatus, Verifier, DEFAULT_QF_SWEEP};

/// Security bounds, spectra and Monte-Carlo simulation for two-way QKD.
#[derive(Parser)]
#[command(name = "twqkd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Writes the bound and key-rate curves as CSV and reports their zero crossings.
    Curves {
        #[arg(long, default_value_t = 0.0)]
        qf_min: f64,
        #[arg(long, default_value_t = 0.5)]
        qf_max: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// `equal-forward` or `qb=<value>`.
        #[arg(long, default_value = "equal-forward")]
        noise: String,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the protocol loop and prints the report as JSON.
    Simulate {
        #[arg(long)]
        protocol: String,
        /// `identity`, `symmetric:<qf>`, `phase:<d>` or `file:<path>`.
        #[arg(long)]
        attack: String,
        #[arg(long, default_value_t = 100_000)]
        rounds: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Control-mode probability.
        #[arg(long)]
        pc: Option<f64>,
        /// Backward flip probability; without it the overall noise equals the forward noise.
        #[arg(long)]
        qb: Option<f64>,
        /// Fraction of encoding-mode rounds sacrificed to estimate the error rate.
        #[arg(long, default_value_t = DEFAULT_EM_SAMPLE_FRACTION)]
        em_fraction: f64,
    },
    /// Checks the analytic results against the numerics.
    Verify {
        /// Forward-noise values to check (repeatable).
        #[arg(long)]
        qf: Vec<f64>,
    },
    /// Prints the Gram matrix, spectrum and entropy of a named ensemble.
    Spectrum {
        #[arg(long)]
        ensemble: String,
        #[arg(long)]
        attack: String,
    },
    /// Searches depolarizing attacks for the largest Holevo quantity.
    Search {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long)]
        qf: f64,
        #[arg(long, default_value_t = 10_000)]
        candidates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Simple,
    ModifiedLm05Prime,
    Lm05Prime,
    SixState,
}

impl From<Target> for HolevoTarget {
    fn from(t: Target) -> Self {
        match t {
            Target::Simple => HolevoTarget::Simple,
            Target::ModifiedLm05Prime => HolevoTarget::ModifiedLm05Prime,
            Target::Lm05Prime => HolevoTarget::Lm05Prime,
            Target::SixState => HolevoTarget::SixState,
        }
    }
}

enum Failure {
    Usage(String),
    Input(String),
    Verification,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification => 1,
            Failure::Usage(_) => 2,
            Failure::Input(_) => 3,
        }
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> Result<(), Failure> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            Err(Failure::Input(format!("writing output: {e}")))
        }
        _ => Ok(()),
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn parse_attack(spec: &str) -> Result<AncillaOverlaps, Failure> {
    let number = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| usage(format!("bad number {v:?} in attack {spec:?}")))
    };
    match spec.split_once(':') {
        None if spec == "identity" => Ok(identity_attack()),
        Some(("symmetric", v)) => symmetric_attack(number(v)?).map_err(usage),
        Some(("phase", v)) => phase_covariant_attack(number(v)?).map_err(usage),
        Some(("file", path)) => read_attack(Path::new(path)),
        _ => Err(usage(format!(
            "attack must be identity, symmetric:<qf>, phase:<d> or file:<path>, got {spec:?}"
        ))),
    }
}

fn read_attack(path: &Path) -> Result<AncillaOverlaps, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let attack = AncillaOverlaps::from_json(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let report = attack.validate();
    if !report.passed() {
        return Err(Failure::Input(format!(
            "{}: attack violates {}",
            path.display(),
            report.failures().join(", ")
        )));
    }
    Ok(attack)
}

fn curves(
    qf_min: f64,
    qf_max: f64,
    steps: usize,
    noise: &str,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let noise: NoiseModel = noise.parse().map_err(usage)?;
    let grid = linear_grid(qf_min, qf_max, steps).map_err(usage)?;
    let csv = to_csv(&bound_curve(&grid, &noise).map_err(usage)?);
    let mut report = String::new();
    for (curve, q) in thresholds(&noise) {
        let value = q.map(format_sig12).unwrap_or_else(|| "none".into());
        report.push_str(&format!("threshold {} {value}\n", curve.name()));
    }
    match out {
        Some(path) => {
            fs::write(path, csv).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            emit(&report)?;
        }
        None => {
            emit(&csv)?;
            eprint!("{report}");
        }
    }
    Ok(())
}

fn simulate(
    protocol: &str,
    attack: &str,
    rounds: u64,
    seed: u64,
    pc: Option<f64>,
    qb: Option<f64>,
    em_fraction: f64,
) -> Result<(), Failure> {
    let mut spec = ProtocolSpec::by_name(protocol)
        .ok_or_else(|| usage(format!("unknown protocol {protocol:?}")))?;
    if let Some(pc) = pc {
        spec = spec.with_control_probability(pc).map_err(usage)?;
    }
    let noise = match qb {
        Some(qb) => NoiseModel::independent_backward(qb).map_err(usage)?,
        None => NoiseModel::EqualForward,
    };
    let mut cfg = SimulationConfig::new(spec, parse_attack(attack)?, noise, rounds, seed);
    cfg.em_sample_fraction = em_fraction;
    let report = run(&cfg).map_err(usage)?;
    emit(&format!("{}\n", report.to_json()))
}

fn verify(qf: &[f64]) -> Result<(), Failure> {
    let values = if qf.is_empty() {
        &DEFAULT_QF_SWEEP[..]
    } else {
        qf
    };
    let results = Verifier::default().run(values);
    let mut text: String = results.iter().map(|r| format!("{r}\n")).collect();
    let count = |s| results.iter().filter(|r| r.status == s).count();
    text.push_str(&format!(
        "{} passed, {} failed, {} skipped\n",
        count(CheckStatus::Pass),
        count(CheckStatus::Fail),
        count(CheckStatus::Skipped)
    ));
    emit(&text)?;
    if all_passed(&results) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn spectrum(ensemble: &str, attack: &str) -> Result<(), Failure> {
    let e = ensembles::by_name(ensemble).ok_or_else(|| {
        usage(format!(
            "unknown ensemble {ensemble:?}; expected one of {}",
            ensembles::NAMES.join(", ")
        ))
    })?;
    let a = parse_attack(attack)?;
    let engine = GramEngine::default();
    let gram = engine.gram_matrix(&a, &e);
    let spec = spectrum_of(&a, &e).map_err(usage)?;
    let entropy = spec.entropy().map_err(usage)?;
    let out = json!({
        "ensemble": ensemble,
        "gram": gram.to_pairs(),
        "spectrum": spec.eigenvalues(),
        "entropy": entropy,
    });
    emit(&format!(
        "{}\n",
        serde_json::to_string_pretty(&out).expect("JSON value serializes")
    ))
}

fn search(target: Target, qf: f64, candidates: usize, seed: u64) -> Result<(), Failure> {
    let report = search_max_holevo(target.into(), qf, candidates, seed).map_err(usage)?;
    emit(&format!("{}\n", report.to_json()))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Curves {
            qf_min,
            qf_max,
            steps,
            noise,
            out,
        } => curves(qf_min, qf_max, steps, &noise, out.as_deref()),
        Command::Simulate {
            protocol,
            attack,
            rounds,
            seed,
            pc,
            qb,
            em_fraction,
        } => simulate(&protocol, &attack, rounds, seed, pc, qb, em_fraction),
        Command::Verify { qf } => verify(&qf),
        Command::Spectrum { ensemble, attack } => spectrum(&ensemble, &attack),
        Command::Search {
            target,
            qf,
            candidates,
            seed,
        } => search(target, qf, candidates, seed),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Input(msg) => eprintln!("error: {msg}"),
                Failure::Verification => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
