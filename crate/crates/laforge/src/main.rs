use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use laforge::commands::{self, Outcome};
use laforge::scenario::{Overrides, Scenario};

#[derive(Parser)]
#[command(name = "laforge", version, about = "Build and verify LA-groups and LA-matched pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the catalog families, their parameters and the mutations.
    ListExamples,
    /// Run the scenario's suites and write a report.
    Check(Common),
    /// Assemble the LA-group of the scenario's pair and dump it.
    Assemble(Common),
    /// Re-read the assembled LA-group in another splitting.
    Extract {
        #[command(flatten)]
        common: Common,
        /// canonical, shifted:<z0,z1,…> or constant:<z0,z1,…>
        #[arg(long)]
        splitting: Option<String>,
    },
    /// Run the suites before and after a mutation and report what moved.
    MutateCheck(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Rank threshold for subspace decisions.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    mutation: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    magnitude: Option<f64>,
    /// Add wall-clock time to the report (makes reports run-dependent).
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn overrides(&self, splitting: Option<String>) -> Result<Overrides, String> {
        let env_tol = match std::env::var("LAFORGE_TOL") {
            Ok(s) => Some(s.trim().parse::<f64>().map_err(|e| format!("LAFORGE_TOL={s:?}: {e}"))?),
            Err(_) => None,
        };
        Ok(Overrides {
            tol: self.tol,
            fd_step: self.fd_step,
            samples: self.samples,
            seed: self.seed,
            report: self.report.clone(),
            mutation: self.mutation.clone(),
            magnitude: self.magnitude,
            splitting,
            env_tol,
        })
    }

    fn load(&self, splitting: Option<String>) -> Result<Scenario, String> {
        let ov = self.overrides(splitting)?;
        Scenario::load(&self.scenario, &ov).map_err(|e| format!("{}: {e}", self.scenario.display()))
    }
}

fn emit(out: Outcome, path: Option<&PathBuf>) -> ExitCode {
    let text = out.report.render();
    match path {
        Some(p) => {
            if let Err(e) = std::fs::write(p, text) {
                eprintln!("laforge: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(out.code as u8)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let (common, splitting) = match &cli.command {
        Command::ListExamples => {
            print!("{}", commands::list_examples().render());
            return Ok(ExitCode::SUCCESS);
        }
        Command::Check(c) | Command::Assemble(c) | Command::MutateCheck(c) => (c, None),
        Command::Extract { common, splitting } => (common, splitting.clone()),
    };
    let sc = common.load(splitting)?;
    let t = common.timing;
    let out = match &cli.command {
        Command::Check(_) => commands::check(&sc, t),
        Command::Assemble(_) => commands::assemble(&sc, t),
        Command::Extract { .. } => commands::extract(&sc, sc.splitting.as_deref().unwrap_or("canonical"), t),
        Command::MutateCheck(_) => commands::mutate_check(&sc, t),
        Command::ListExamples => unreachable!(),
    }
    .map_err(|e| e.to_string())?;
    Ok(emit(out, sc.report_path.as_ref()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("laforge: {e}");
            ExitCode::from(2)
        }
    }
}
