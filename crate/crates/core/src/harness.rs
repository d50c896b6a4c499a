//! Two-mesh convergence experiments and their tabulation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::interp::{self, InterpError};
use crate::mesh::{self, MeshError, TensorMesh};
use crate::problem::{ProblemError, ProblemSpec, YProblem};
use crate::solver::{self, GridFunction, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("empty epsilon or size list")]
    Empty,
}

/// Which discrete function the two-mesh difference is measured on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Target {
    /// The smooth remainder `Y`.
    #[default]
    Y,
    /// The reconstructed `U = A0 z0 + Y`.
    U,
}

/// How the `(2N, 2M)` comparison mesh is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FineMesh {
    /// A Shishkin space mesh with `2N` cells and its own `sigma`; the coarse time steps halved,
    /// keeping `tau`.
    #[default]
    KeepTau,
    /// Every cell of the coarse mesh halved, so both meshes share `sigma` and `tau`.
    Bisected,
    /// A fresh Shishkin mesh with its own transition points.
    Shishkin,
}

/// Options shared by every cell of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellOptions {
    pub target: Target,
    pub fine: FineMesh,
}

/// `2^-k` for `k = 0..=kmax`.
pub fn eps_ladder(kmax: u32) -> Vec<f64> {
    (0..=kmax).map(|k| libm::ldexp(1.0, -(k as i32))).collect()
}

/// `(N, N/4)` for `N = n_min, 2 n_min, ..., n_max`.
pub fn paired_sizes(n_min: usize, n_max: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut n = n_min;
    while n <= n_max && n > 0 {
        out.push((n, n / 4));
        n *= 2;
    }
    out
}

fn coarse_mesh(p: &ProblemSpec, n: usize, m: usize) -> Result<TensorMesh, HarnessError> {
    Ok(TensorMesh::shishkin(n, m, p.eps(), p.beta(), p.t_final())?)
}

fn fine_mesh(
    p: &ProblemSpec,
    coarse: &TensorMesh,
    fine: FineMesh,
) -> Result<TensorMesh, HarnessError> {
    match fine {
        FineMesh::KeepTau => Ok(TensorMesh::new(
            mesh::space_mesh(2 * coarse.n(), p.eps(), p.beta())?,
            coarse.time().bisect(),
        )),
        FineMesh::Bisected => Ok(coarse.bisect()),
        FineMesh::Shishkin => coarse_mesh(p, 2 * coarse.n(), 2 * coarse.m()),
    }
}

/// Discrete solution on `mesh`, reconstructed to `U` if requested.
pub fn solve_target(
    p: &ProblemSpec,
    mesh: &TensorMesh,
    target: Target,
) -> Result<GridFunction, HarnessError> {
    let y = solver::solve_y(p, mesh)?;
    Ok(match target {
        Target::Y => y,
        Target::U => {
            let data = YProblem::new(p)?;
            solver::reconstruct_u(&y, data.a0(), data.params())?
        }
    })
}

/// Coarse `(N, M)` Shishkin solution and its `(2N, 2M)` comparison solution.
pub fn solution_pair(
    p: &ProblemSpec,
    n: usize,
    m: usize,
    opts: CellOptions,
) -> Result<(GridFunction, GridFunction), HarnessError> {
    let coarse = coarse_mesh(p, n, m)?;
    let fine = fine_mesh(p, &coarse, opts.fine)?;
    Ok((
        solve_target(p, &coarse, opts.target)?,
        solve_target(p, &fine, opts.target)?,
    ))
}

/// `D^{N,M}`: the two-mesh difference between the `(N, M)` and `(2N, 2M)` solutions.
pub fn two_mesh_cell(
    p: &ProblemSpec,
    n: usize,
    m: usize,
    opts: CellOptions,
) -> Result<f64, HarnessError> {
    let (coarse, fine) = solution_pair(p, n, m, opts)?;
    Ok(interp::max_diff(&coarse, &fine)?)
}

/// Differences for every size of one problem. With independent Shishkin fine meshes a fine
/// solution is reused as the next coarse one.
pub fn eps_row(
    p: &ProblemSpec,
    sizes: &[(usize, usize)],
    opts: CellOptions,
) -> Result<Vec<f64>, HarnessError> {
    let mut cached: Option<GridFunction> = None;
    let mut row = Vec::with_capacity(sizes.len());
    for &(n, m) in sizes {
        let coarse = match cached.take() {
            Some(g) if (g.mesh().n(), g.mesh().m()) == (n, m) => g,
            _ => solve_target(p, &coarse_mesh(p, n, m)?, opts.target)?,
        };
        let fine = solve_target(p, &fine_mesh(p, coarse.mesh(), opts.fine)?, opts.target)?;
        row.push(interp::max_diff(&coarse, &fine)?);
        drop(coarse);
        if opts.fine == FineMesh::Shishkin {
            cached = Some(fine);
        }
    }
    Ok(row)
}

/// `log2(D_k / D_{k+1})` for consecutive entries.
pub fn orders(d: &[f64]) -> Vec<f64> {
    d.windows(2).map(|w| libm::log2(w[0] / w[1])).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub eps_list: Vec<f64>,
    pub sizes: Vec<(usize, usize)>,
    pub d: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
    pub uniform_d: Vec<f64>,
    pub uniform_q: Vec<f64>,
}

impl ConvergenceTable {
    /// Assembles a table from per-epsilon difference rows, in `eps_list` order.
    pub fn from_rows(eps_list: Vec<f64>, sizes: Vec<(usize, usize)>, d: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(eps_list.len(), d.len());
        let q = d.iter().map(|row| orders(row)).collect();
        let uniform_d: Vec<f64> = (0..sizes.len())
            .map(|k| d.iter().map(|row| row[k]).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let uniform_q = if d.is_empty() {
            Vec::new()
        } else {
            orders(&uniform_d)
        };
        let uniform_d = if d.is_empty() { Vec::new() } else { uniform_d };
        Self {
            eps_list,
            sizes,
            d,
            q,
            uniform_d,
            uniform_q,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.eps_list.is_empty()
    }
}

/// Runs every `(eps, N)` cell sequentially.
pub fn build_table(
    p: &ProblemSpec,
    eps_list: &[f64],
    sizes: &[(usize, usize)],
    opts: CellOptions,
) -> Result<ConvergenceTable, HarnessError> {
    if eps_list.is_empty() || sizes.is_empty() {
        return Err(HarnessError::Empty);
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        rows.push(eps_row(&p.with_eps(eps)?, sizes, opts)?);
    }
    Ok(ConvergenceTable::from_rows(
        eps_list.to_vec(),
        sizes.to_vec(),
        rows,
    ))
}

/// Scientific notation with three decimals and a signed two-digit exponent: `7.360E-02`.
pub fn format_d(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.3E}");
    let (mantissa, exp) = s.split_once('E').unwrap_or((&s, "0"));
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}E{sign}{digits:0>2}")
}

/// Three decimals, rounding the shortest decimal representation half to even: `1.2815 -> 1.282`.
pub fn format_q(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{}", v.abs());
    let (int_part, frac) = s.split_once('.').unwrap_or((&s, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let int_len = digits.len();
    let frac: Vec<u8> = frac.bytes().map(|b| b - b'0').collect();
    digits.extend(frac.iter().take(3));
    digits.resize(int_len + 3, 0);
    let rest = frac.get(3..).unwrap_or(&[]);
    let round_up = match rest.first() {
        None => false,
        Some(&d) if d > 5 => true,
        Some(&d) if d < 5 => false,
        Some(_) => rest[1..].iter().any(|&d| d != 0) || digits[digits.len() - 1] % 2 == 1,
    };
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 3;
    let mut out = String::new();
    if v < 0.0 && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.extend(digits[..split].iter().map(|&d| (b'0' + d) as char));
    out.push('.');
    out.extend(digits[split..].iter().map(|&d| (b'0' + d) as char));
    out
}

/// `2^-k` when `eps` is an exact power of two, its shortest decimal otherwise.
pub fn eps_label(eps: f64) -> String {
    if eps > 0.0 && eps <= 1.0 {
        let (m, e) = libm::frexp(eps);
        if m == 0.5 {
            return format!("2^{}", e - 1);
        }
    }
    format!("{eps}")
}

/// Rows are epsilons plus `uniform`; columns alternate `D_N` and `Q_N`.
pub fn emit_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("eps");
    for &(n, _) in &table.sizes {
        let _ = write!(out, ",D_{n},Q_{n}");
    }
    out.push('\n');
    if table.is_empty() {
        return out;
    }
    let mut line = |label: &str, d: &[f64], q: &[f64]| {
        out.push_str(label);
        for (k, v) in d.iter().enumerate() {
            let qs = q.get(k).map(|&x| format_q(x)).unwrap_or_default();
            let _ = write!(out, ",{},{}", format_d(*v), qs);
        }
        out.push('\n');
    };
    for ((eps, d), q) in table.eps_list.iter().zip(&table.d).zip(&table.q) {
        line(&eps_label(*eps), d, q);
    }
    line("uniform", &table.uniform_d, &table.uniform_q);
    out
}

/// A D line and a Q line per epsilon, sizes across.
pub fn emit_pretty(table: &ConvergenceTable) -> String {
    const W: usize = 11;
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "eps");
    for &(n, m) in &table.sizes {
        let _ = write!(out, "{:>W$}", format!("{n},{m}"));
    }
    out.push('\n');
    if table.is_empty() {
        return out;
    }
    let mut block = |label: &str, d: &[f64], q: &[f64]| {
        let _ = write!(out, "{:<8}D ", label);
        for v in d {
            let _ = write!(out, "{:>W$}", format_d(*v));
        }
        out.push('\n');
        let _ = write!(out, "{:<8}Q ", "");
        for v in q {
            let _ = write!(out, "{:>W$}", format_q(*v));
        }
        out.push('\n');
    };
    for ((eps, d), q) in table.eps_list.iter().zip(&table.d).zip(&table.q) {
        block(&eps_label(*eps), d, q);
    }
    block("uniform", &table.uniform_d, &table.uniform_q);
    out
}
