use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qentropy::EntropyFunctional;
use qentropy_cli::campaigns::{self, counterexample_povm};
use qentropy_cli::{CampaignConfig, CliError, Format, Report, Units};

/// Seeded checks of entropy inequalities for decoherence and observation.
#[derive(Debug, Parser)]
#[command(name = "qentropy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Object dimension; repeatable. Defaults depend on the subcommand.
    #[arg(long = "dim", global = true)]
    dims: Vec<usize>,

    /// Trials per dimension.
    #[arg(long, global = true, default_value_t = 500)]
    trials: usize,

    /// Entropy selector: von-neumann | linear | renyi:<alpha> | log-det; repeatable.
    #[arg(long = "entropy", global = true, value_parser = parse_functional)]
    entropy: Vec<EntropyFunctional>,

    /// Slack allowed on every inequality.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    #[arg(long, global = true, value_enum, default_value_t)]
    format: Format,

    /// Response (perception) dimension of random probings and Gram matrices.
    #[arg(long, global = true)]
    response_dim: Option<usize>,

    /// Display units for logarithmic entropies; verdicts are always in nats.
    #[arg(long, global = true, value_enum, default_value_t)]
    units: Units,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Expected entropy after observation ≤ entropy ≤ entropy after decoherence.
    VerifySTheorems,
    /// Schur, pinching and Fan majorization.
    Majorization,
    /// Reproduce one of the two measurement counterexamples.
    Counterexample {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        /// Also write the counterexample's POVM as JSON to this path.
        #[arg(long)]
        emit_povm: Option<PathBuf>,
    },
    /// Mixing never lowers entropy on average.
    Holevo {
        /// Fixed ensemble size; random in 2–5 when omitted.
        #[arg(long)]
        ensemble_size: Option<usize>,
    },
    /// Lüders projection equals decoherence by the block Gram matrix.
    LudersEquiv,
    /// Classify a POVM file as purity-preserving or general.
    PovmClassify { povm_file: PathBuf },
}

fn parse_functional(s: &str) -> Result<EntropyFunctional, String> {
    s.parse().map_err(|e: qentropy::Error| e.to_string())
}

impl Cli {
    fn config(&self, default_dims: &[usize]) -> CampaignConfig {
        CampaignConfig {
            seed: self.seed,
            dims: if self.dims.is_empty() {
                default_dims.to_vec()
            } else {
                self.dims.clone()
            },
            trials: self.trials,
            functionals: if self.entropy.is_empty() {
                EntropyFunctional::builtins()
            } else {
                self.entropy.clone()
            },
            tol: self.tol,
            response_dim: self.response_dim,
            ensemble_size: None,
        }
    }

    fn run(&self) -> Result<Report, CliError> {
        let all_dims: Vec<usize> = (2..=8).collect();
        match &self.command {
            Command::VerifySTheorems => campaigns::verify_s_theorems(&self.config(&[2, 3, 4, 8])),
            Command::Majorization => campaigns::majorization(&self.config(&all_dims)),
            Command::Holevo { ensemble_size } => campaigns::holevo(&CampaignConfig {
                ensemble_size: *ensemble_size,
                ..self.config(&all_dims)
            }),
            Command::LudersEquiv => campaigns::luders_equiv(&self.config(&all_dims)),
            Command::Counterexample { which, emit_povm } => {
                if let Some(path) = emit_povm {
                    let (m, _) = counterexample_povm(*which)?;
                    let text = serde_json::to_string_pretty(&m).expect("measurements serialize");
                    std::fs::write(path, text + "\n")?;
                }
                let functionals = if self.entropy.is_empty() {
                    vec![EntropyFunctional::VonNeumann]
                } else {
                    self.entropy.clone()
                };
                campaigns::counterexample(*which, &functionals)
            }
            Command::PovmClassify { povm_file } => campaigns::povm_classify(&std::fs::read_to_string(povm_file)?),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.run() {
        Ok(report) => {
            let report = report.into_units(cli.units);
            println!("{}", report.render(cli.format).trim_end());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} hard violation(s)", report.hard_violations);
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
