//! Convergence tables with the `(eps, N)` cells spread over a thread pool.

use rayon::prelude::*;
use shishkin_core::harness::{two_mesh_cell, CellOptions, ConvergenceTable, HarnessError};
use shishkin_core::problem::ProblemSpec;

use crate::error::CliError;

/// Same table as `harness::build_table`, computed cell by cell in parallel. Results are keyed
/// by `(eps index, size index)`, so the output does not depend on scheduling.
pub fn build_table_parallel(
    p: &ProblemSpec,
    eps_list: &[f64],
    sizes: &[(usize, usize)],
    opts: CellOptions,
    threads: Option<usize>,
) -> Result<ConvergenceTable, CliError> {
    if eps_list.is_empty() || sizes.is_empty() {
        return Err(HarnessError::Empty.into());
    }
    let problems = eps_list
        .iter()
        .map(|&eps| p.with_eps(eps))
        .collect::<Result<Vec<_>, _>>()?;
    // Largest cells first so the tail of the queue is short.
    let cells: Vec<(usize, usize)> = (0..sizes.len())
        .rev()
        .flat_map(|k| (0..eps_list.len()).map(move |e| (e, k)))
        .collect();
    let run = || {
        cells
            .par_iter()
            .map(|&(e, k)| {
                let (n, m) = sizes[k];
                ((e, k), two_mesh_cell(&problems[e], n, m, opts))
            })
            .collect::<Vec<_>>()
    };
    let results = match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let mut d = vec![vec![0.0; sizes.len()]; eps_list.len()];
    for ((e, k), r) in results {
        d[e][k] = r?;
    }
    Ok(ConvergenceTable::from_rows(
        eps_list.to_vec(),
        sizes.to_vec(),
        d,
    ))
}
