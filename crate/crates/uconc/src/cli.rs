use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Universal entanglement concentration experiments.
///
/// Spectra are comma-separated probabilities: rationals such as `3/4,1/4` select
/// exact arithmetic, decimals such as `0.75,0.25` floating point; `@FILE` reads
/// the list from a file. Copy ladders are `50,100,200` or `10..=100:10`.
#[derive(Debug, Parser, Serialize)]
#[command(name = "uconc", version, propagate_version = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Output file; defaults to `$UCONC_OUTPUT_DIR/<command>.<ext>` when that
    /// variable is set, else standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Worker threads for ladder sweeps (default: all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,

    /// Seed for every randomised step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Json => "json",
            Self::Csv => "csv",
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Young indices with dim V (both formulas), dim U and log2(dim V)/n.
    ///
    /// CSV `dims`: index, dim_v, dim_v_determinant, dim_u, log2_dim_v, yield.
    Dims(DimsArgs),
    /// Outcome law of the Young-index measurement.
    ///
    /// CSV `outcomes`: index, probability, exact_probability, log2_probability, dim_v, log2_dim_v, yield.
    Measure(MeasureArgs),
    /// Failure, strong-converse and infidelity exponents against D(R‖p).
    ///
    /// CSV `exponents`: n, failure, strong_converse, total_fidelity, infidelity, failure_exponent,
    /// strong_converse_exponent, infidelity_exponent, rate_target, branch, mc_failure, mc_std_error.
    Exponents(ExponentsArgs),
    /// Average yields of the universal, known-basis, estimation-based and known-state protocols.
    ///
    /// CSV `yields`: n, universal, bbps, bbps_expansion, bbps_residual_n, gap_n, analytic_c,
    /// estimation_copies, estimation_bound, hardy, hardy_expansion, hardy_residual_n.
    Compare(CompareArgs),
    /// Optimal classical relabeling of the claimed yield.
    ///
    /// CSV `summary`: quantity, value. CSV `moves`: input, output, probability (non-identity entries).
    Postproc(PostprocArgs),
    /// The Young index as an entropy estimator: tail exponents and scaled MSE.
    ///
    /// CSV `estimation`: n, lower_exponent, lower_target, upper_exponent, upper_target,
    /// n_mse_primary, n_mse_type, bound, bound_literal.
    Estimate(EstimateArgs),
    /// Dense-matrix verification of the outcome law and the extracted state.
    ///
    /// CSV `outcomes`: index, formula, dense, deviation. Exit status 3 on any failed check.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct DimsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub d: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct MeasureArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, short = 'p')]
    pub spectrum: String,
    /// Largest n evaluated in exact rational arithmetic.
    #[arg(long, default_value_t = 30)]
    pub exact_max_n: u32,
    /// Refuse to enumerate more outcomes than this.
    #[arg(long, default_value_t = 2_000_000)]
    pub max_partitions: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ExponentsArgs {
    #[arg(long, short = 'p')]
    pub spectrum: String,
    /// Target rate R in bits per copy.
    #[arg(long)]
    pub rate: f64,
    #[arg(long, default_value = "50,100,200,400")]
    pub n: String,
    /// Also estimate the failure probability from this many seeded samples.
    #[arg(long)]
    pub monte_carlo: Option<u64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[arg(long, short = 'p')]
    pub spectrum: String,
    #[arg(long, default_value = "100,200,500,1000")]
    pub n: String,
    /// Copies spent on estimation by the estimation-based scheme (default floor(sqrt n)).
    #[arg(long)]
    pub estimation_copies: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    /// Maximise E[f] - λ·(average distortion); `--level` is λ > 1.
    Weighted,
    /// Worst-case distortion at most `--level`.
    Worst,
    /// Average distortion at most `--level`.
    Average,
    /// Apply the kernel given by `--kernel-in`.
    Apply,
}

#[derive(Debug, Args, Serialize)]
pub struct PostprocArgs {
    #[arg(long, short = 'p')]
    pub spectrum: String,
    #[arg(long)]
    pub n: u32,
    /// Figure of merit: `linear`, `step@R` or `table:PATH`.
    #[arg(long, default_value = "linear")]
    pub f: String,
    #[arg(long, value_enum, default_value_t = Constraint::Weighted)]
    pub constraint: Constraint,
    /// λ for `weighted`, the distortion budget r for `worst` and `average`.
    #[arg(long, default_value_t = 1.001)]
    pub level: f64,
    /// Offset c in the average-constraint lower bound, evaluated at H(p) + c.
    #[arg(long, default_value_t = 0.05)]
    pub offset: f64,
    /// c in the shift-tail bound Pr{Δ ≥ c/n} ≤ r/(1 - 2^-c).
    #[arg(long, default_value_t = 1.0)]
    pub tail_c: f64,
    #[arg(long)]
    pub kernel_in: Option<PathBuf>,
    #[arg(long)]
    pub kernel_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EstimateArgs {
    #[arg(long, short = 'p')]
    pub spectrum: String,
    #[arg(long, default_value = "50,100,200")]
    pub n: String,
    /// Deviation δ of the tail events |Ĥ - H| ≥ δ.
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long, short = 'p')]
    pub spectrum: String,
    #[arg(long)]
    pub n: u32,
    /// Random local-unitary trials (seeded by `--seed`).
    #[arg(long, default_value_t = 20)]
    pub unitaries: u32,
}
