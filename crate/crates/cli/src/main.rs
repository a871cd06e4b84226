use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use regulim_cli::commands::{self, AlgebraMode, Emit, PathMode};
use regulim_cli::{read_file, Outcome, Result, EXIT_INPUT};

#[derive(Parser)]
#[command(
    name = "regulim",
    version,
    about = "Regulated limits of graphs and their stage algebras"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the vertex classes of a graph file.
    Classify { file: String },
    /// List the finite paths that survive in a limit.
    Boundary {
        file: String,
        #[arg(long, value_enum, default_value_t = PathMode::Perfect)]
        mode: PathMode,
        /// Comma-separated regulating vertices for `--mode custom`.
        #[arg(long)]
        vertices: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        /// Members `b[0]` to `b[k-1]` of each bundle are enumerated.
        #[arg(long, default_value_t = 3)]
        bundle_bound: u64,
    },
    /// Build the stage tower and print it as a report or a Bratteli diagram.
    Core {
        file: String,
        #[arg(long, value_enum, default_value_t = AlgebraMode::Toeplitz)]
        mode: AlgebraMode,
        #[arg(long)]
        vertices: Option<String>,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(long, value_enum, default_value_t = Emit::Json)]
        emit: Emit,
    },
    /// Check the tower against the Fock space. Exit 1 on any mismatch.
    Verify {
        file: String,
        #[arg(long, value_enum, default_value_t = AlgebraMode::Toeplitz)]
        mode: AlgebraMode,
        #[arg(long)]
        vertices: Option<String>,
        #[arg(long, default_value_t = 3)]
        stages: usize,
        #[arg(long, hide = true)]
        inject_fault: Option<usize>,
    },
    /// Decide whether a parametrised sequence of paths converges to a target.
    Converge {
        file: String,
        #[arg(long, value_enum, default_value_t = PathMode::Unified)]
        mode: PathMode,
        #[arg(long)]
        vertices: Option<String>,
        #[arg(long)]
        seq: String,
        #[arg(long)]
        target: String,
    },
    /// Compare the spectrum of the algebra of a finite map with its unified space.
    Duality { mapfile: String },
}

fn run(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Classify { file } => commands::classify_cmd(&read_file(&file)?),
        Command::Boundary {
            file,
            mode,
            vertices,
            max_len,
            bundle_bound,
        } => commands::boundary(&read_file(&file)?, mode, vertices.as_deref(), max_len, bundle_bound),
        Command::Core {
            file,
            mode,
            vertices,
            stages,
            emit,
        } => commands::core(&read_file(&file)?, mode, vertices.as_deref(), stages, emit),
        Command::Verify {
            file,
            mode,
            vertices,
            stages,
            inject_fault,
        } => commands::verify(&read_file(&file)?, mode, vertices.as_deref(), stages, inject_fault),
        Command::Converge {
            file,
            mode,
            vertices,
            seq,
            target,
        } => commands::converge(&read_file(&file)?, mode, vertices.as_deref(), &seq, &target),
        Command::Duality { mapfile } => commands::duality(&read_file(&mapfile)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(o) => {
            print!("{}", o.stdout);
            eprint!("{}", o.stderr);
            let _ = std::io::stdout().flush();
            ExitCode::from(o.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
