//! Front end for `regulim`: text formats, the JSON report, DOT emission and
//! one function per subcommand. `main.rs` only parses flags and maps
//! [`Outcome`]s and [`CliError`]s to exit codes.

pub mod commands;
pub mod graph_file;
pub mod map_file;
pub mod report;
pub mod seq_spec;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

/// Anything that makes the input unusable. Always exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Input(String),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn input(msg: impl ToString) -> Self {
        CliError::Input(msg.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// What a command prints and how it exits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    pub fn ok(stdout: String) -> Self {
        Self {
            stdout,
            stderr: String::new(),
            code: EXIT_OK,
        }
    }
}

pub fn read_file(path: &str) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}
