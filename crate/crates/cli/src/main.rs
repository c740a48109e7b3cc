//! `qdo`: file-based front end for the qdo-core pipeline.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "qdo", version, about = "Quantum Drude oscillator models on qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Where the Hamiltonian comes from: a JSON spec file or inline flags.
#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    /// HamiltonianSpec JSON file.
    #[arg(long, conflicts_with_all = ["n", "gamma", "alpha", "r"])]
    pub spec: Option<PathBuf>,
    /// Fock levels per oscillator (power of two).
    #[arg(long, default_value_t = 4)]
    pub d: usize,
    /// Oscillator count; every pair is coupled with `gamma`.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["alpha", "r"])]
    pub gamma: Option<f64>,
    /// Polarisability (A^3) for an end-on pair at separation `r`.
    #[arg(long, requires = "r")]
    pub alpha: Option<f64>,
    /// Separation in A, or `inf`.
    #[arg(long, requires = "alpha")]
    pub r: Option<String>,
    /// Add the anharmonic and non-linear demo terms.
    #[arg(long)]
    pub extended: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SeedArg {
    /// RNG seed; falls back to QDO_SEED.
    #[arg(long, env = "QDO_SEED")]
    pub seed: u64,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ShotModel {
    Spherical,
    Uncoupled,
    Both,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum OracleTable {
    /// Normal-mode and London dispersion per separation.
    Spectrum,
    /// Truncated against analytic pair energies.
    Truncated,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pauli decomposition of a Hamiltonian.
    Decompose {
        #[command(flatten)]
        model: ModelArgs,
        /// PauliSum JSON output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measurement-group counts: exact cover versus greedy colouring.
    Group {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated oscillator counts (overrides --n).
        #[arg(long, value_delimiter = ',')]
        n_list: Vec<usize>,
        /// Comma-separated dimensions (overrides --d).
        #[arg(long, value_delimiter = ',')]
        d_list: Vec<usize>,
        /// Exact groups as JSON (single model only).
        #[arg(long)]
        groups_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Shot budgets from direct variances and the closed-form bounds.
    Shots {
        #[arg(long, value_delimiter = ',', default_value = "2")]
        n_list: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "4")]
        d_list: Vec<usize>,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
        /// Target error in hbar*omega/2.
        #[arg(long, default_value_t = 1e-3, conflicts_with = "eps_rel")]
        eps: f64,
        /// Target error as a fraction of the pair binding energy at `--r-vdw`.
        #[arg(long, requires_all = ["r_vdw", "alpha"])]
        eps_rel: Option<f64>,
        #[arg(long)]
        r_vdw: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value = "both")]
        model: ShotModel,
        /// Skip direct variances above this many qubits.
        #[arg(long, default_value_t = 16)]
        direct_max_qubits: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One VQE optimisation.
    Vqe {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Shots per group; 0 uses exact expectations.
        #[arg(long, default_value_t = 0)]
        shots: u64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.25)]
        lr: f64,
        /// JSON run record.
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// CSV energy trace (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dispersion curve over a separation grid with noise subtraction.
    Dispersion {
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 14.5)]
        alpha: f64,
        #[arg(long, default_value_t = 9.61)]
        hbar_omega: f64,
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Separations in A; `inf` is the separated pair.
        #[arg(long, default_value = "3.344,3.5,3.75,4,4.5,5,6,inf")]
        grid: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// Depolarising rate for the noisy re-measurement; omit for none.
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 8192)]
        shots: u64,
        #[arg(long, default_value_t = 200)]
        reps: usize,
        #[arg(long)]
        json_out: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated pair energies against the normal-mode result.
    Truncation {
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,1.55,1.9")]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        ds: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reference curves from the closed forms.
    Oracle {
        #[arg(long, value_enum, default_value = "spectrum")]
        table: OracleTable,
        #[arg(long, default_value_t = 14.5)]
        alpha: f64,
        #[arg(long, default_value_t = 9.61)]
        hbar_omega: f64,
        #[arg(long, default_value = "3.344,3.5,3.75,4,4.5,5,6,8,10,inf")]
        grid: String,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,1.55,1.9")]
        gammas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "2,4,8,16")]
        ds: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose { model, out } => commands::decompose(&model, out.as_deref()),
        Command::Group { model, n_list, d_list, groups_out, out } => {
            commands::group(&model, &n_list, &d_list, groups_out.as_deref(), out.as_deref())
        }
        Command::Shots { n_list, d_list, gamma, eps, eps_rel, r_vdw, alpha, model, direct_max_qubits, out } => {
            commands::shots(commands::ShotsArgs {
                n_list,
                d_list,
                gamma,
                eps,
                eps_rel: eps_rel.zip(r_vdw).zip(alpha).map(|((f, r), a)| (f, r, a)),
                model,
                direct_max_qubits,
                out,
            })
        }
        Command::Vqe { model, seed, steps, shots, lambda, lr, json_out, out } => commands::vqe(
            &model,
            seed.seed,
            steps,
            shots,
            lambda,
            lr,
            json_out.as_deref(),
            out.as_deref(),
        ),
        Command::Dispersion { seed, alpha, hbar_omega, d, grid, steps, lambda, shots, reps, json_out, out } => {
            commands::dispersion(commands::DispersionArgs {
                seed: seed.seed,
                alpha,
                hbar_omega,
                d,
                grid,
                steps,
                lambda,
                shots,
                reps,
                json_out,
                out,
            })
        }
        Command::Truncation { gammas, ds, out } => commands::truncation(&gammas, &ds, out.as_deref()),
        Command::Oracle { table, alpha, hbar_omega, grid, gammas, ds, out } => match table {
            OracleTable::Spectrum => commands::spectrum(alpha, hbar_omega, &grid, out.as_deref()),
            OracleTable::Truncated => commands::truncation(&gammas, &ds, out.as_deref()),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
