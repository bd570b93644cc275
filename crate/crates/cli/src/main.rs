mod commands;
mod inputs;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bchodge", version, about = "Bott-Chern and Aeppli Hodge theory on Lie-algebra models")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Model JSON file or built-in name (torus1..3, iwasawa, kodaira_thurston, affine)
    #[arg(long, global = true)]
    model: Option<String>,

    /// Metric JSON file, `identity` or `random` (seeded)
    #[arg(long, global = true, default_value = "identity")]
    metric: String,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Relative rank threshold factor (default: dim · machine epsilon)
    #[arg(long, global = true, value_parser = positive)]
    tol_rank: Option<f64>,

    /// Relative residual tolerance for equations
    #[arg(long, global = true, value_parser = positive, default_value_t = 1e-9)]
    tol_eq: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write the JSON report to the golden directory as `<model>.<command>.json`
    #[arg(long, global = true)]
    bless: bool,

    #[arg(long, global = true)]
    golden_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check d² = 0 and integrability
    Validate,
    /// Bott-Chern, Aeppli, Dolbeault and de Rham dimensions by two routes
    Cohomology,
    /// Kähler, balanced, Gauduchon, strongly Gauduchon, SKT and Hermitian-symplectic flags
    Classify {
        /// Also search for a real Hermitian-symplectic (2,0)+(1,1)+(0,2) completion
        #[arg(long)]
        strict: bool,
    },
    /// Lefschetz-type splitting of a Bott-Chern (n−1,n−1)-class
    Decompose {
        /// Form JSON or one of omega, -omega, omega_n1, -omega_n1
        #[arg(long, allow_hyphen_values = true, default_value = "omega_n1")]
        class: String,
    },
    /// Cone membership searches
    Cone {
        #[command(subcommand)]
        which: ConeCommand,
    },
    /// Re-run the numerical lemma checks on the model and metric
    CheckLemmas,
}

#[derive(Subcommand, Debug)]
enum ConeCommand {
    /// Search the Aeppli class for a positive SKT representative
    Skt {
        #[arg(long, allow_hyphen_values = true, default_value = "omega")]
        class: String,
    },
    /// Pair a Bott-Chern (n−1,n−1)-class against SKT probe metrics
    Copsef {
        #[arg(long, allow_hyphen_values = true)]
        class: String,
        /// JSON file `{"probes": [{"name": ..., "h": ...}]}`
        #[arg(long)]
        probes: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Table,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("tolerance must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate => commands::validate(&cli.common),
        Command::Cohomology => commands::cohomology(&cli.common),
        Command::Classify { strict } => commands::classify(&cli.common, *strict),
        Command::Decompose { class } => commands::decompose(&cli.common, class),
        Command::Cone { which: ConeCommand::Skt { class } } => commands::cone_skt(&cli.common, class),
        Command::Cone { which: ConeCommand::Copsef { class, probes } } => {
            commands::cone_copsef(&cli.common, class, probes)
        }
        Command::CheckLemmas => commands::check_lemmas(&cli.common),
    };
    match result.and_then(|out| out.emit(&cli.common)) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
