use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use qthermo::sweep::figures::{write_figure, FIGURE_NAMES};
use qthermo::sweep::{run_sweep, sweep_table, verify, ExperimentConfig};
use qthermo::Error;

#[derive(Parser)]
#[command(name = "qthermo", version, about = "Temperature-estimation precision and diagonal discord of Gibbs states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a model over a temperature grid and write CSV.
    Compute {
        #[arg(long)]
        config: PathBuf,
        /// Output file; overrides `output` in the config. Defaults to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Omit the generation timestamp so identical configs give identical bytes.
        #[arg(long)]
        reproducible: bool,
    },
    /// Write the CSV behind one of the reproduced figures.
    Figure {
        /// fig2a | fig2b | fig3a | fig3b | fig4a | fig4b
        name: String,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run the acceptance checks; exit status 1 if any fails.
    Verify {
        /// Also write a CSV report here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn compute(config: PathBuf, out: Option<PathBuf>, jobs: usize, reproducible: bool) -> Result<(), Error> {
    let cfg = ExperimentConfig::load(&config)?;
    let (schema, records) = run_sweep(&cfg, jobs)?;
    let failed = records.iter().filter(|r| r.values.is_err()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} grid points failed; see the status column", records.len());
    }
    let table = sweep_table(&schema, &records)?;
    let mut comment = Vec::new();
    if !reproducible {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        comment.push(format!("qthermo {} generated_unix={now}", env!("CARGO_PKG_VERSION")));
    }
    match out.or(cfg.output) {
        Some(path) => {
            let file = std::fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            table.write_csv(std::io::BufWriter::new(file), &comment)
        }
        None => table.write_csv(std::io::stdout().lock(), &comment),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Compute { config, out, jobs, reproducible } => {
            compute(config, out, jobs, reproducible)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Figure { name, out_dir, jobs } => {
            if !FIGURE_NAMES.contains(&name.as_str()) {
                return Err(Error::Usage(format!("unknown figure {name:?}; expected one of {}", FIGURE_NAMES.join(", "))));
            }
            let path = write_figure(&name, &out_dir, jobs)?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { report, jobs } => {
            let r = verify::run_all(jobs, |c| {
                println!("{}", c.line());
                let _ = std::io::stdout().flush();
            });
            if let Some(path) = report {
                let file = std::fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                r.to_table().write_csv(std::io::BufWriter::new(file), &[])?;
            }
            let passed = r.checks.iter().filter(|c| c.pass).count();
            println!("{passed}/{} criteria passed", r.checks.len());
            Ok(if r.all_pass() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
