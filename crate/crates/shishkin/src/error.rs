use std::io;
use std::path::{Path, PathBuf};

use shishkin_core::harness::HarnessError;
use shishkin_core::interp::InterpError;
use shishkin_core::mesh::MeshError;
use shishkin_core::problem::ProblemError;
use shishkin_core::solver::SolveError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Interp(#[from] InterpError),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for numerical breakdown, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        let breakdown = match self {
            CliError::Solve(e) | CliError::Harness(HarnessError::Solve(e)) => e.is_breakdown(),
            _ => false,
        };
        if breakdown {
            2
        } else {
            1
        }
    }
}
