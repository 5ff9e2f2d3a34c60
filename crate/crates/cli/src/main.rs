use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};
use qnd_core::auth::{security_sweep, AttackerModel, NoiseModel, NoiseSpec, SweepConfig, SweepRow};
use qnd_core::bell::{run_bell_qnd, BellLabel};
use qnd_core::bell_operator::{bell_operator, ghz_overlaps, BellOperatorSpec};
use qnd_core::ghz::{ghz_state, run_ghz_qnd, GhzLabel};
use qnd_core::{HadamardConvention, StateDump, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Tolerance for normalization of hand-written state files.
const FILE_NORM_TOLERANCE: f64 = 1e-8;

#[derive(Parser)]
#[command(
    name = "qnd",
    version,
    about = "Non-demolition Bell and GHZ measurements, Bell operators and authentication simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure a two-qubit state with the Bell-basis network.
    Bell(BellArgs),
    /// Measure an n-qubit state with the GHZ-basis network.
    Ghz(GhzArgs),
    /// Spectrum of the Bell operator for n particles.
    Bellop(BellopArgs),
    /// Authentication protocol simulation.
    Auth {
        #[command(subcommand)]
        command: AuthCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Paper,
    Standard,
}

impl From<Convention> for HadamardConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Paper => HadamardConvention::Paper,
            Convention::Standard => HadamardConvention::Standard,
        }
    }
}

#[derive(Clone, Debug)]
enum BellInput {
    Label(BellLabel),
    File(PathBuf),
}

fn parse_bell_input(s: &str) -> Result<BellInput, String> {
    if let Ok(label) = s.parse::<BellLabel>() {
        return Ok(BellInput::Label(label));
    }
    let path = PathBuf::from(s);
    if path.is_file() {
        Ok(BellInput::File(path))
    } else {
        Err(format!("`{s}` is neither phi+, phi-, psi+, psi- nor an existing state file"))
    }
}

#[derive(Args)]
struct BellArgs {
    /// phi+, phi-, psi+, psi-, or a JSON state dump.
    #[arg(long, value_parser = parse_bell_input)]
    input: BellInput,
    /// Hadamard matrix used by the network.
    #[arg(long, value_enum, default_value = "paper")]
    convention: Convention,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GhzArgs {
    /// Number of data qubits (2 to 8).
    #[arg(long)]
    n: usize,
    /// Canonical label such as "+:10110".
    #[arg(long, allow_hyphen_values = true, required_unless_present = "random_input", conflicts_with = "random_input")]
    label: Option<String>,
    /// Measure a Haar-random state drawn from the seed.
    #[arg(long)]
    random_input: bool,
    /// Hadamard matrix used by the network.
    #[arg(long, value_enum, default_value = "standard")]
    convention: Convention,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BellopArgs {
    /// Number of particles (2 to 8).
    #[arg(long)]
    n: usize,
    /// JSON file with measurement directions; the canonical setting otherwise.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Print the full spectrum and the GHZ overlaps of the top eigenvector.
    #[arg(long)]
    eigen: bool,
}

#[derive(Subcommand)]
enum AuthCommand {
    /// Acceptance rate of seeded sessions next to its exact value.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Pretty,
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of pairs per account.
    #[arg(long)]
    pairs: usize,
    /// Report every account size from 1 up to --pairs.
    #[arg(long)]
    sweep: bool,
    /// Sessions simulated per account size.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Who fills the card slot.
    #[arg(
        long,
        default_value = "legitimate",
        value_parser = PossibleValuesParser::new(AttackerModel::ALL.map(|m| m.name()))
            .map(|s| s.parse::<AttackerModel>().expect("listed name")),
    )]
    attacker: AttackerModel,
    /// Channel applied to both qubits of every stored pair.
    #[arg(
        long,
        default_value = "none",
        value_parser = PossibleValuesParser::new(["none", "depolarizing", "dephasing"])
            .map(|s| s.parse::<NoiseModel>().expect("listed name")),
    )]
    noise: NoiseModel,
    /// Per-qubit error probability.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Minimum fraction of matching pairs for acceptance.
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hadamard matrix used by the network.
    #[arg(long, value_enum, default_value = "paper")]
    convention: Convention,
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    out: OutputFormat,
}

#[derive(Serialize)]
struct BellReport {
    parity: u8,
    phase: u8,
    label: String,
    probability: f64,
}

#[derive(Serialize)]
struct GhzReport {
    part_parity: Vec<u8>,
    global_parity: u8,
    label: String,
    probability: f64,
}

#[derive(Serialize)]
struct Overlap {
    label: String,
    probability: f64,
}

#[derive(Serialize)]
struct BellopReport {
    n: usize,
    spectral_radius: f64,
    max_eigenvalue: f64,
    min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    top_eigenvector_overlaps: Option<Vec<Overlap>>,
}

/// Round-off below this is printed as zero.
const PRINT_FLOOR: f64 = 1e-12;

fn clean(v: f64) -> f64 {
    if v.abs() < PRINT_FLOOR {
        0.0
    } else {
        v
    }
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    Ok(serde_json::to_string(value)? + "\n")
}

fn bell(args: BellArgs) -> anyhow::Result<String> {
    let input = match &args.input {
        BellInput::Label(label) => label.state(),
        BellInput::File(path) => load_state(path)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let draws = [rng.random(), rng.random()];
    let out = run_bell_qnd(&input, args.convention.into(), draws)?;
    to_json(&BellReport {
        parity: out.parity_bit,
        phase: out.phase_bit,
        label: out.label.to_string(),
        probability: out.probability,
    })
}

fn load_state(path: &PathBuf) -> anyhow::Result<StateVector> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let state =
        StateDump::from_json(&text, FILE_NORM_TOLERANCE).with_context(|| format!("loading {}", path.display()))?;
    Ok(state)
}

fn ghz(args: GhzArgs) -> anyhow::Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let input = match &args.label {
        Some(text) => {
            let label: GhzLabel = text.parse()?;
            if label.n() != args.n {
                bail!("label {label} has {} qubits but --n is {}", label.n(), args.n);
            }
            ghz_state(&label)?
        }
        None => StateVector::random(args.n, &mut rng)?,
    };
    let draws: Vec<f64> = (0..args.n).map(|_| rng.random()).collect();
    let out = run_ghz_qnd(&input, args.convention.into(), &draws)?;
    to_json(&GhzReport {
        part_parity: out.part_parity_bits,
        global_parity: out.global_parity_bit,
        label: out.label.to_string(),
        probability: out.probability,
    })
}

fn bellop(args: BellopArgs) -> anyhow::Result<String> {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            BellOperatorSpec::from_json(&text)?
        }
        None => BellOperatorSpec::canonical(args.n)?,
    };
    if spec.num_particles() != args.n {
        bail!("spec has {} particles but --n is {}", spec.num_particles(), args.n);
    }
    let spectrum = bell_operator(&spec)?.spectrum();
    let values: Vec<f64> = spectrum.eigenvalues.iter().map(|&v| clean(v)).collect();
    let mut report = BellopReport {
        n: args.n,
        spectral_radius: values.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
        max_eigenvalue: values[0],
        min_eigenvalue: values[values.len() - 1],
        eigenvalues: None,
        top_eigenvector_overlaps: None,
    };
    if args.eigen {
        let overlaps = ghz_overlaps(&spectrum.eigenvectors[0])?
            .into_iter()
            .map(|(label, probability)| Overlap { label: label.to_string(), probability: clean(probability) })
            .collect();
        report.eigenvalues = Some(values);
        report.top_eigenvector_overlaps = Some(overlaps);
    }
    to_json(&report)
}

const CSV_HEADER: &str = "n,attacker,noise,p,trials,accept_rate,analytic_rate,wilson_low,wilson_high";

fn render_rows(rows: &[SweepRow], format: OutputFormat) -> anyhow::Result<String> {
    let mut out = String::new();
    match format {
        OutputFormat::Json => return to_json(&rows),
        OutputFormat::Csv => {
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.n,
                    r.attacker,
                    r.noise,
                    r.p,
                    r.trials,
                    r.accept_rate,
                    r.analytic_rate,
                    r.wilson_low,
                    r.wilson_high
                ));
            }
        }
        OutputFormat::Pretty => {
            out.push_str(&format!(
                "{:>3}  {:<10}  {:<12}  {:>6}  {:>9}  {:>12}  {:>12}  {:>24}\n",
                "n", "attacker", "noise", "p", "trials", "accept", "analytic", "wilson 99.7%"
            ));
            for r in rows {
                out.push_str(&format!(
                    "{:>3}  {:<10}  {:<12}  {:>6.3}  {:>9}  {:>12.6e}  {:>12.6e}  [{:.4e}, {:.4e}]\n",
                    r.n,
                    r.attacker,
                    r.noise,
                    r.p,
                    r.trials,
                    r.accept_rate,
                    r.analytic_rate,
                    r.wilson_low,
                    r.wilson_high
                ));
            }
        }
    }
    Ok(out)
}

fn simulate(args: SimulateArgs) -> anyhow::Result<String> {
    if args.pairs == 0 {
        bail!("--pairs must be at least 1");
    }
    let pairs = if args.sweep { (1..=args.pairs).collect() } else { vec![args.pairs] };
    let config = SweepConfig {
        pairs,
        attacker: args.attacker,
        noise: NoiseSpec::new(args.noise, args.p)?,
        threshold: args.threshold,
        trials: args.trials,
        seed: args.seed,
        convention: args.convention.into(),
    };
    if !(0.0..=1.0).contains(&config.threshold) {
        bail!("--threshold must lie in [0, 1]");
    }
    render_rows(&security_sweep(&config)?, args.out)
}

fn run(cli: Cli) -> anyhow::Result<String> {
    match cli.command {
        Command::Bell(args) => bell(args),
        Command::Ghz(args) => ghz(args),
        Command::Bellop(args) => bellop(args),
        Command::Auth { command: AuthCommand::Simulate(args) } => simulate(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
