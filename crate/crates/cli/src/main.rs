mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{Recorder, EXIT_CHECK, EXIT_PASS};

#[derive(Parser, Debug)]
#[command(name = "qsa", version, about = "Compile and verify attachment pulse schedules")]
struct Cli {
    /// Seed for oracle state sampling and random offsets.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compile a Pauli string into an attachment schedule.
    Compile(CompileArgs),
    /// Validate a schedule file and check it against the dense oracle.
    Verify(VerifyArgs),
    /// Lattice Hamiltonian, ground state and digital sequence.
    Toric {
        #[command(subcommand)]
        action: ToricCmd,
    },
    /// String operators, braiding, memory and hole logic.
    Anyon {
        #[command(subcommand)]
        action: AnyonCmd,
    },
    /// Effective strengths and pulse-error scaling.
    Analyze {
        #[command(subcommand)]
        action: AnalyzeCmd,
    },
}

#[derive(Args, Debug)]
pub struct CompileArgs {
    /// Pauli literal, e.g. XZZX or -XIZY.
    #[arg(long)]
    pub target: String,
    /// Graph JSON file, or one of complete, path, path_nnn.
    #[arg(long, default_value = "complete")]
    pub graph: String,
    #[arg(long, default_value = "auto")]
    pub strategy: String,
    #[arg(long, default_value_t = 0.3)]
    pub tg: f64,
    /// Where to write the schedule JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub schedule: PathBuf,
    /// Overrides the seed angle stored in the schedule.
    #[arg(long)]
    pub tg: Option<f64>,
    #[arg(long, default_value = "complete")]
    pub graph: String,
    /// Random states used when the full unitary is too large.
    #[arg(long, default_value_t = 4)]
    pub states: usize,
}

#[derive(Args, Debug)]
pub struct SpecArg {
    /// LatticeSpec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum ToricCmd {
    /// Terms, commutation and per-term schedules.
    Build(SpecArg),
    /// Sweep-prepared ground state vs the projected state.
    Ground(SpecArg),
    /// Group-by-group digital evolution vs the exact one.
    Digital {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long = "j-tau", default_value_t = 0.3)]
        j_tau: f64,
        #[arg(long, default_value_t = 20)]
        states: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum AnyonCmd {
    /// Excitations left by a string path.
    Syndrome {
        #[command(flatten)]
        spec: SpecArg,
        /// StringPath JSON file.
        #[arg(long)]
        path: PathBuf,
    },
    /// Phase picked up by an e anyon inside an m loop.
    Braid {
        #[command(flatten)]
        spec: SpecArg,
        /// Closed StringPath JSON file; defaults to the six-spin loop at --at.
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long, default_value = "0,0")]
        at: String,
        /// Spin hit by the Z creating the e pair; defaults to the first loop spin.
        #[arg(long)]
        site: Option<String>,
    },
    /// Loop-memory basis and encodings on a periodic lattice.
    Memory {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long)]
        tg: Option<f64>,
        /// Four amplitudes as "re:im,re:im,re:im,re:im".
        #[arg(long)]
        amplitudes: Option<String>,
    },
    /// (|0> + e^{i theta}|1>)/sqrt 2 on a hole qubit.
    Magic {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0)]
        hole: usize,
        #[arg(long)]
        exit: Option<String>,
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Loop CNOT truth table between a smooth and a rough hole.
    Cnot {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 0)]
        control: usize,
        #[arg(long, default_value_t = 1)]
        target: usize,
        #[arg(long = "prep-tg", default_value_t = 0.4)]
        prep_tg: f64,
    },
}

#[derive(Subcommand, Debug)]
pub enum AnalyzeCmd {
    /// Effective strength after the pulse overhead.
    Strength {
        #[arg(long)]
        g: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, requires = "tau_prime", conflicts_with_all = ["omega", "omega_prime"])]
        tau: Option<f64>,
        #[arg(long = "tau-prime", requires = "tau")]
        tau_prime: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "omega_prime")]
        omega: Option<f64>,
        #[arg(long = "omega-prime", requires = "omega")]
        omega_prime: Option<f64>,
    },
    /// Distance vs common pulse-angle offset, with a log-log slope.
    ErrorScaling {
        #[arg(long, conflicts_with = "spec")]
        schedule: Option<PathBuf>,
        #[arg(long, requires = "plaquette")]
        spec: Option<PathBuf>,
        /// Plaquette "i,j" of --spec.
        #[arg(long)]
        plaquette: Option<String>,
        #[arg(long)]
        tg: Option<f64>,
        #[arg(long, default_value = "1e-2,1e-3,1e-4")]
        deltas: String,
        /// Independent random offsets per pulse, drawn from --seed.
        #[arg(long)]
        random: bool,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    let mut rec = Recorder::new(&argv);
    let outcome = commands::run(&cli.command, cli.seed, &mut rec);
    let err = outcome.err();
    let report = rec.finish(argv, cli.seed, err.as_ref());
    match serde_json::to_string_pretty(&report) {
        Ok(text) => println!("{text}"),
        Err(e) => eprintln!("cannot serialize report: {e}"),
    }
    let code = match &err {
        Some(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        None if report.pass => EXIT_PASS,
        None => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("check failed: {}", c.name);
            }
            EXIT_CHECK
        }
    };
    ExitCode::from(code)
}
