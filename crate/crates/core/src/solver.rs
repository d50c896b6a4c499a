//! Backward Euler in time and central differences in space on a tensor mesh:
//!
//! ```text
//! (eps D_t^- - eps delta_x^2 + b(x_i, t_j)) Y_i^j = rhs(x_i, t_j)
//! delta_x^2 Y_i = ((Y_{i+1} - Y_i)/h_{i+1} - (Y_i - Y_{i-1})/h_i) / hbar_i
//! ```
//!
//! Each time level is a tridiagonal M-matrix system solved by the Thomas algorithm.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::EvalError;
use crate::mesh::TensorMesh;
use crate::problem::{ProblemError, ProblemSpec, YProblem};
use crate::specfun::{self, SingularParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("nonpositive pivot {pivot} in row {row}")]
    NumericalBreakdown { row: usize, pivot: f64 },
    #[error("time level {level} lost the M-matrix sign pattern")]
    NotMMatrix { level: usize },
    #[error("system dimensions do not match")]
    Dimension,
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

impl SolveError {
    /// True for failures of the linear algebra rather than of the problem data.
    pub fn is_breakdown(&self) -> bool {
        matches!(
            self,
            SolveError::NumericalBreakdown { .. } | SolveError::NotMMatrix { .. }
        )
    }
}

impl From<EvalError> for SolveError {
    fn from(e: EvalError) -> Self {
        SolveError::Problem(ProblemError::Eval(e))
    }
}

/// A mesh node `(x_i, t_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub i: usize,
    pub j: usize,
    pub x: f64,
    pub t: f64,
}

/// Coefficients and data of a discrete problem, sampled node by node.
pub trait LevelData {
    /// Reaction coefficient `b` at an interior node.
    fn reaction(&self, node: Node) -> Result<f64, SolveError>;
    /// Right-hand side at an interior node; `reaction` is the value returned for the same node.
    fn source(&self, node: Node, reaction: f64) -> Result<f64, SolveError>;
    /// Value on `x = 0`, `j >= 1`.
    fn left(&self, node: Node) -> Result<f64, SolveError>;
    /// Value on `x = 1`, `j >= 1`.
    fn right(&self, node: Node) -> Result<f64, SolveError>;
    /// Value on `t = 0`, all `i`.
    fn initial(&self, node: Node) -> Result<f64, SolveError>;
}

impl LevelData for YProblem<'_> {
    fn reaction(&self, node: Node) -> Result<f64, SolveError> {
        Ok(self.problem().b(node.x, node.t)?)
    }

    fn source(&self, node: Node, reaction: f64) -> Result<f64, SolveError> {
        Ok(self.rhs_with_b(node.x, node.t, reaction)?)
    }

    fn left(&self, node: Node) -> Result<f64, SolveError> {
        Ok(YProblem::left(self, node.t)?)
    }

    fn right(&self, node: Node) -> Result<f64, SolveError> {
        Ok(YProblem::right(self, node.t)?)
    }

    fn initial(&self, node: Node) -> Result<f64, SolveError> {
        Ok(YProblem::initial(self, node.x)?)
    }
}

/// Nodal values on a tensor mesh; level `j` (time `t_j`) is stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    mesh: TensorMesh,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(mesh: TensorMesh) -> Self {
        let len = mesh.node_count();
        GridFunction {
            mesh,
            values: vec![0.0; len],
        }
    }

    /// Samples `g(x, t)` at every node.
    pub fn from_fn(mesh: TensorMesh, mut g: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(mesh.node_count());
        for &t in mesh.ts() {
            for &x in mesh.xs() {
                values.push(g(x, t));
            }
        }
        GridFunction { mesh, values }
    }

    pub fn from_values(mesh: TensorMesh, values: Vec<f64>) -> Result<Self, SolveError> {
        if values.len() != mesh.node_count() {
            return Err(SolveError::Dimension);
        }
        Ok(GridFunction { mesh, values })
    }

    pub fn mesh(&self) -> &TensorMesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at `(x_i, t_j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * (self.mesh.n() + 1) + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let stride = self.mesh.n() + 1;
        self.values[j * stride + i] = v;
    }

    /// All values at time level `j`.
    pub fn level(&self, j: usize) -> &[f64] {
        let stride = self.mesh.n() + 1;
        &self.values[j * stride..(j + 1) * stride]
    }

    fn level_mut(&mut self, j: usize) -> &mut [f64] {
        let stride = self.mesh.n() + 1;
        &mut self.values[j * stride..(j + 1) * stride]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `sub[r] x[r-1] + diag[r] x[r] + sup[r] x[r+1] = rhs[r]`; `sub[0]` and `sup[last]` are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn with_len(n: usize) -> Self {
        TridiagonalSystem {
            sub: vec![0.0; n],
            diag: vec![0.0; n],
            sup: vec![0.0; n],
            rhs: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Nonpositive off-diagonals, positive diagonal, strict row dominance.
    pub fn has_m_matrix_sign_pattern(&self) -> bool {
        (0..self.len()).all(|r| {
            let (s, d, u) = (self.sub[r], self.diag[r], self.sup[r]);
            s <= 0.0 && u <= 0.0 && d > 0.0 && d + s + u > 0.0
        })
    }

    /// `max_r |(A x - rhs)_r| / max(|rhs|, |A| |x|)`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 0.0;
        for r in 0..n {
            let mut ax = self.diag[r] * x[r];
            let mut mag = (self.diag[r] * x[r]).abs();
            if r > 0 {
                ax += self.sub[r] * x[r - 1];
                mag += (self.sub[r] * x[r - 1]).abs();
            }
            if r + 1 < n {
                ax += self.sup[r] * x[r + 1];
                mag += (self.sup[r] * x[r + 1]).abs();
            }
            worst = worst.max((ax - self.rhs[r]).abs());
            scale = scale.max(mag).max(self.rhs[r].abs());
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// Solves the system by forward elimination and back substitution.
pub fn thomas_solve(sys: &TridiagonalSystem) -> Result<Vec<f64>, SolveError> {
    let n = sys.len();
    if sys.sub.len() != n || sys.sup.len() != n || sys.rhs.len() != n {
        return Err(SolveError::Dimension);
    }
    let mut x = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    thomas_into(sys, &mut x, &mut scratch)?;
    Ok(x)
}

fn thomas_into(sys: &TridiagonalSystem, x: &mut [f64], c: &mut [f64]) -> Result<(), SolveError> {
    let n = sys.len();
    if n == 0 {
        return Ok(());
    }
    let mut pivot = sys.diag[0];
    if !(pivot > 0.0) {
        return Err(SolveError::NumericalBreakdown { row: 0, pivot });
    }
    c[0] = sys.sup[0] / pivot;
    x[0] = sys.rhs[0] / pivot;
    for r in 1..n {
        pivot = sys.diag[r] - sys.sub[r] * c[r - 1];
        if !(pivot > 0.0) {
            return Err(SolveError::NumericalBreakdown { row: r, pivot });
        }
        c[r] = sys.sup[r] / pivot;
        x[r] = (sys.rhs[r] - sys.sub[r] * x[r - 1]) / pivot;
    }
    for r in (0..n - 1).rev() {
        x[r] -= c[r] * x[r + 1];
    }
    Ok(())
}

/// A level system together with the boundary values it was assembled with.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledLevel {
    pub system: TridiagonalSystem,
    pub left: f64,
    pub right: f64,
}

/// Assembles the equations for the interior unknowns of level `j >= 1` given level `j - 1`.
pub fn assemble_level<D: LevelData + ?Sized>(
    data: &D,
    mesh: &TensorMesh,
    eps: f64,
    j: usize,
    prev: &[f64],
) -> Result<AssembledLevel, SolveError> {
    let n = mesh.n();
    if j == 0 || j > mesh.m() || prev.len() != n + 1 || n < 2 {
        return Err(SolveError::Dimension);
    }
    let mut system = TridiagonalSystem::with_len(n - 1);
    let (left, right) = assemble_into(data, mesh, eps, j, prev, &mut system)?;
    Ok(AssembledLevel {
        system,
        left,
        right,
    })
}

fn assemble_into<D: LevelData + ?Sized>(
    data: &D,
    mesh: &TensorMesh,
    eps: f64,
    j: usize,
    prev: &[f64],
    sys: &mut TridiagonalSystem,
) -> Result<(f64, f64), SolveError> {
    let n = mesh.n();
    let xs = mesh.xs();
    let t = mesh.ts()[j];
    let mass = eps / mesh.k(j);
    let left = data.left(Node {
        i: 0,
        j,
        x: xs[0],
        t,
    })?;
    let right = data.right(Node {
        i: n,
        j,
        x: xs[n],
        t,
    })?;
    for i in 1..n {
        let r = i - 1;
        let node = Node { i, j, x: xs[i], t };
        let hbar = mesh.hbar(i);
        let lower = eps / (mesh.h(i) * hbar);
        let upper = eps / (mesh.h(i + 1) * hbar);
        let b = data.reaction(node)?;
        let mut rhs = data.source(node, b)? + mass * prev[i];
        sys.diag[r] = mass + lower + upper + b;
        sys.sub[r] = -lower;
        sys.sup[r] = -upper;
        if i == 1 {
            rhs += lower * left;
            sys.sub[r] = 0.0;
        }
        if i == n - 1 {
            rhs += upper * right;
            sys.sup[r] = 0.0;
        }
        sys.rhs[r] = rhs;
    }
    Ok((left, right))
}

/// Marches all time levels; `inspect` sees each assembled system before it is solved.
pub fn solve_with<D: LevelData + ?Sized>(
    data: &D,
    mesh: &TensorMesh,
    eps: f64,
    mut inspect: impl FnMut(usize, &TridiagonalSystem),
) -> Result<GridFunction, SolveError> {
    let n = mesh.n();
    let m = mesh.m();
    if n < 2 {
        return Err(SolveError::Dimension);
    }
    let mut grid = GridFunction::zeros(mesh.clone());
    {
        let xs = mesh.xs();
        let first = grid.level_mut(0);
        for (i, slot) in first.iter_mut().enumerate() {
            *slot = data.initial(Node {
                i,
                j: 0,
                x: xs[i],
                t: 0.0,
            })?;
        }
    }
    let mut sys = TridiagonalSystem::with_len(n - 1);
    let mut interior = vec![0.0; n - 1];
    let mut scratch = vec![0.0; n - 1];
    let stride = n + 1;
    for j in 1..=m {
        let (done, rest) = grid.values.split_at_mut(j * stride);
        let prev = &done[(j - 1) * stride..];
        let (left, right) = assemble_into(data, mesh, eps, j, prev, &mut sys)?;
        if !sys.has_m_matrix_sign_pattern() {
            return Err(SolveError::NotMMatrix { level: j });
        }
        inspect(j, &sys);
        thomas_into(&sys, &mut interior, &mut scratch)?;
        let level = &mut rest[..stride];
        level[0] = left;
        level[1..n].copy_from_slice(&interior);
        level[n] = right;
    }
    Ok(grid)
}

/// Solves the discrete problem for `y = u - A0 z0`.
pub fn solve_y(p: &ProblemSpec, mesh: &TensorMesh) -> Result<GridFunction, SolveError> {
    let data = YProblem::new(p)?;
    solve_with(&data, mesh, p.eps(), |_, _| {})
}

/// `U = A0 z0 + Y` at every node.
pub fn reconstruct_u(
    y: &GridFunction,
    a0: f64,
    params: &SingularParams,
) -> Result<GridFunction, SolveError> {
    let mesh = y.mesh();
    let mut u = y.clone();
    if a0 == 0.0 {
        return Ok(u);
    }
    for (j, &t) in mesh.ts().iter().enumerate() {
        for (i, &x) in mesh.xs().iter().enumerate() {
            let z = specfun::z0(x, t, params).map_err(ProblemError::from)?;
            u.set(i, j, a0 * z + y.get(i, j));
        }
    }
    Ok(u)
}

/// Nonnegative data drawn at random, with the reaction coefficient of a problem.
struct RandomData<'a> {
    problem: &'a ProblemSpec,
    stride: usize,
    source: Vec<f64>,
    boundary: Vec<f64>,
    initial: Vec<f64>,
}

impl LevelData for RandomData<'_> {
    fn reaction(&self, node: Node) -> Result<f64, SolveError> {
        Ok(self.problem.b(node.x, node.t)?)
    }
    fn source(&self, node: Node, _: f64) -> Result<f64, SolveError> {
        Ok(self.source[node.j * self.stride + node.i])
    }
    fn left(&self, node: Node) -> Result<f64, SolveError> {
        Ok(self.boundary[2 * node.j])
    }
    fn right(&self, node: Node) -> Result<f64, SolveError> {
        Ok(self.boundary[2 * node.j + 1])
    }
    fn initial(&self, node: Node) -> Result<f64, SolveError> {
        Ok(self.initial[node.i])
    }
}

/// Solves with 20 random nonnegative data sets using the problem's `b` and `eps`, and
/// reports whether every discrete solution stayed nonnegative (down to `-1e-13`).
pub fn max_principle_probe(p: &ProblemSpec, mesh: &TensorMesh) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let stride = mesh.n() + 1;
    for _ in 0..20 {
        // Sparse data exercise the strict-positivity edge.
        let density: f64 = rng.gen_range(0.05..1.0);
        let mut draw = |len: usize| -> Vec<f64> {
            (0..len)
                .map(|_| {
                    if rng.gen_bool(density) {
                        rng.gen_range(0.0..1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        let data = RandomData {
            problem: p,
            stride,
            source: draw(mesh.node_count()),
            boundary: draw(2 * (mesh.m() + 1)),
            initial: draw(stride),
        };
        match solve_with(&data, mesh, p.eps(), |_, _| {}) {
            Ok(grid) if grid.values().iter().all(|&v| v >= -1e-13) => {}
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Mesh1D, MeshKind};
    use crate::problem::Coefficients;

    fn uniform_mesh(n: usize, m: usize) -> TensorMesh {
        TensorMesh::new(
            Mesh1D::uniform(n, 0.0, 1.0, MeshKind::Space).unwrap(),
            Mesh1D::uniform(m, 0.0, 1.0, MeshKind::Time).unwrap(),
        )
    }

    struct Fixed {
        b: f64,
        f: f64,
        init: Vec<f64>,
    }

    impl LevelData for Fixed {
        fn reaction(&self, _: Node) -> Result<f64, SolveError> {
            Ok(self.b)
        }
        fn source(&self, _: Node, _: f64) -> Result<f64, SolveError> {
            Ok(self.f)
        }
        fn left(&self, _: Node) -> Result<f64, SolveError> {
            Ok(0.0)
        }
        fn right(&self, _: Node) -> Result<f64, SolveError> {
            Ok(0.0)
        }
        fn initial(&self, node: Node) -> Result<f64, SolveError> {
            Ok(self.init[node.i])
        }
    }

    #[test]
    fn single_equation_by_hand() {
        // h = 1/2, eps = 1, k = 1, b = 1: (1 + 4 + 4 + 1) Y = 1 * 1.
        let mesh = uniform_mesh(2, 1);
        let data = Fixed {
            b: 1.0,
            f: 0.0,
            init: vec![0.0, 1.0, 0.0],
        };
        let level = assemble_level(&data, &mesh, 1.0, 1, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(level.system.diag, vec![10.0]);
        assert_eq!(level.system.rhs, vec![1.0]);
        assert_eq!(thomas_solve(&level.system).unwrap(), vec![0.1]);
        let grid = solve_with(&data, &mesh, 1.0, |_, _| {}).unwrap();
        assert_eq!(grid.get(1, 1), 0.1);
    }

    #[test]
    fn assembly_coefficients_on_graded_mesh() {
        let mesh = TensorMesh::shishkin(8, 4, 1e-4, 1.0, 1.0).unwrap();
        let data = Fixed {
            b: 2.0,
            f: 0.5,
            init: vec![1.0; 9],
        };
        let eps = 1e-4;
        let level = assemble_level(&data, &mesh, eps, 1, &[1.0; 9]).unwrap();
        let s = &level.system;
        for i in 2..7 {
            let r = i - 1;
            let hb = mesh.hbar(i);
            assert_eq!(s.sub[r], -eps / (mesh.h(i) * hb));
            assert_eq!(s.sup[r], -eps / (mesh.h(i + 1) * hb));
            let d = eps / mesh.k(1) + eps / (mesh.h(i) * hb) + eps / (mesh.h(i + 1) * hb) + 2.0;
            assert_eq!(s.diag[r], d);
            assert_eq!(s.rhs[r], 0.5 + eps / mesh.k(1));
        }
        assert_eq!(s.sub[0], 0.0);
        assert_eq!(s.sup[6], 0.0);
        assert!(assemble_level(&data, &mesh, eps, 0, &[1.0; 9]).is_err());
    }

    #[test]
    fn identity_system() {
        let mut sys = TridiagonalSystem::with_len(4);
        sys.diag = vec![1.0; 4];
        sys.rhs = vec![1.0, -2.0, 3.5, 0.25];
        assert_eq!(thomas_solve(&sys).unwrap(), sys.rhs);
    }

    #[test]
    fn breakdown_is_reported() {
        let mut sys = TridiagonalSystem::with_len(2);
        sys.diag = vec![1.0, 0.0];
        sys.rhs = vec![1.0, 1.0];
        assert!(!sys.has_m_matrix_sign_pattern());
        assert!(matches!(
            thomas_solve(&sys),
            Err(SolveError::NumericalBreakdown { row: 1, .. })
        ));
    }

    #[test]
    fn constants_are_reproduced() {
        let c = Coefficients::parse("1", "1", "1", "1", "1").unwrap();
        let p = ProblemSpec::new(1e-3, Some(1.0), 1.0, c).unwrap();
        let mesh = TensorMesh::shishkin(32, 8, 1e-3, 1.0, 1.0).unwrap();
        let y = solve_y(&p, &mesh).unwrap();
        assert!(y.values().iter().all(|&v| (v - 1.0).abs() <= 1e-12));
    }

    #[test]
    fn boundary_is_recovered_after_reconstruction() {
        let eps = 1.0 / 4096.0;
        let p = ProblemSpec::example23(eps).unwrap();
        let mesh = TensorMesh::shishkin(16, 8, eps, 1.0, 1.0).unwrap();
        let y = solve_y(&p, &mesh).unwrap();
        let params = p.singular_params().unwrap();
        let u = reconstruct_u(&y, -1.0, &params).unwrap();
        assert_eq!(u.get(0, 0), 0.0);
        for (j, &t) in mesh.ts().iter().enumerate() {
            assert!((u.get(0, j) - p.gl(t).unwrap()).abs() <= 1e-15);
            assert!((u.get(16, j) - p.gr(t).unwrap()).abs() <= 1e-15);
        }
        let same = reconstruct_u(&y, 0.0, &params).unwrap();
        assert_eq!(same, y);
    }

    #[test]
    fn grid_layout() {
        let mesh = uniform_mesh(4, 2);
        let g = GridFunction::from_fn(mesh, |x, t| x + 10.0 * t);
        assert_eq!(g.get(2, 1), 0.5 + 5.0);
        assert_eq!(g.level(2)[4], 11.0);
        assert_eq!(g.max_abs(), 11.0);
    }

    #[test]
    fn probe_with_trivial_data() {
        let c = Coefficients::parse("1", "0", "0", "0", "0").unwrap();
        let p = ProblemSpec::new(1.0, Some(1.0), 1.0, c).unwrap();
        let mesh = uniform_mesh(8, 4);
        let y = solve_y(&p, &mesh).unwrap();
        assert!(y.values().iter().all(|&v| v == 0.0));

        let c = Coefficients::parse("1", "1", "0", "0", "0").unwrap();
        let p = ProblemSpec::new(1.0, Some(1.0), 1.0, c).unwrap();
        let y = solve_y(&p, &mesh).unwrap();
        for j in 1..=4 {
            for i in 1..8 {
                assert!(y.get(i, j) > 0.0);
            }
        }
        assert!(max_principle_probe(&p, &mesh));
    }

    fn dense_solve(sys: &TridiagonalSystem) -> Vec<f64> {
        let n = sys.len();
        let mut a = vec![vec![0.0; n + 1]; n];
        for r in 0..n {
            a[r][r] = sys.diag[r];
            if r > 0 {
                a[r][r - 1] = sys.sub[r];
            }
            if r + 1 < n {
                a[r][r + 1] = sys.sup[r];
            }
            a[r][n] = sys.rhs[r];
        }
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&p, &q| a[p][col].abs().total_cmp(&a[q][col].abs()))
                .unwrap();
            a.swap(col, piv);
            let (top, below) = a.split_at_mut(col + 1);
            let pivot_row = &top[col];
            for row in below {
                let factor = row[col] / pivot_row[col];
                for (v, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= factor * p;
                }
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let tail: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
            x[r] = (a[r][n] - tail) / a[r][r];
        }
        x
    }

    #[test]
    fn thomas_matches_dense_elimination() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for _ in 0..5 {
            let mut sys = TridiagonalSystem::with_len(50);
            for r in 0..50 {
                sys.sub[r] = if r > 0 { rng.gen_range(-1.0..1.0) } else { 0.0 };
                sys.sup[r] = if r < 49 {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                };
                sys.diag[r] = sys.sub[r].abs() + sys.sup[r].abs() + rng.gen_range(0.1..2.0);
                sys.rhs[r] = rng.gen_range(-10.0..10.0);
            }
            let x = thomas_solve(&sys).unwrap();
            let oracle = dense_solve(&sys);
            for (a, b) in x.iter().zip(&oracle) {
                assert!((a - b).abs() <= 1e-11);
            }
            assert!(sys.relative_residual(&x) <= 1e-12);
        }
    }

    #[test]
    fn negative_reaction_is_reported() {
        let mesh = uniform_mesh(4, 2);
        let data = Fixed {
            b: -1e6,
            f: 0.0,
            init: vec![0.0; 5],
        };
        let err = solve_with(&data, &mesh, 1.0, |_, _| {}).unwrap_err();
        assert_eq!(err, SolveError::NotMMatrix { level: 1 });
        assert!(err.is_breakdown());
        assert!(!SolveError::Dimension.is_breakdown());
    }

    #[test]
    fn dimension_mismatch() {
        let mut sys = TridiagonalSystem::with_len(3);
        sys.rhs.pop();
        assert_eq!(thomas_solve(&sys), Err(SolveError::Dimension));
        assert!(TridiagonalSystem::with_len(0).is_empty());
    }

    fn smooth_problem() -> ProblemSpec {
        // u = exp(-t) (1 + x^2) with eps = 1.
        let c = Coefficients::parse(
            "1 + x^2 + t",
            "exp(-t) * ((1 + x^2 + t) * (1 + x^2) - (1 + x^2) - 2)",
            "exp(-t)",
            "2 * exp(-t)",
            "1 + x^2",
        )
        .unwrap();
        ProblemSpec::new(1.0, Some(1.0), 1.0, c).unwrap()
    }

    #[test]
    fn time_stepping_is_first_order() {
        let p = smooth_problem();
        let at_final = |m: usize| {
            let mesh = TensorMesh::new(
                Mesh1D::uniform(32, 0.0, 1.0, MeshKind::Space).unwrap(),
                Mesh1D::uniform(m, 0.0, 1.0, MeshKind::Time).unwrap(),
            );
            let y = solve_y(&p, &mesh).unwrap();
            y.level(m).to_vec()
        };
        let (a, b, c) = (at_final(16), at_final(32), at_final(64));
        let d1 = a
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        let d2 = b
            .iter()
            .zip(&c)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        let ratio = d1 / d2;
        assert!(ratio > 1.8 && ratio < 2.2, "ratio {ratio}");
        let exact = |x: f64| libm::exp(-1.0) * (1.0 + x * x);
        let mesh_x = Mesh1D::uniform(32, 0.0, 1.0, MeshKind::Space).unwrap();
        for (v, &x) in c.iter().zip(mesh_x.nodes()) {
            assert!((v - exact(x)).abs() < 5e-3);
        }
    }

    struct Arrays {
        stride: usize,
        b: Vec<f64>,
        source: Vec<f64>,
        boundary: Vec<f64>,
        initial: Vec<f64>,
    }

    impl LevelData for Arrays {
        fn reaction(&self, node: Node) -> Result<f64, SolveError> {
            Ok(self.b[node.j * self.stride + node.i])
        }
        fn source(&self, node: Node, _: f64) -> Result<f64, SolveError> {
            Ok(self.source[node.j * self.stride + node.i])
        }
        fn left(&self, node: Node) -> Result<f64, SolveError> {
            Ok(self.boundary[2 * node.j])
        }
        fn right(&self, node: Node) -> Result<f64, SolveError> {
            Ok(self.boundary[2 * node.j + 1])
        }
        fn initial(&self, node: Node) -> Result<f64, SolveError> {
            Ok(self.initial[node.i])
        }
    }

    fn random_arrays(rng: &mut ChaCha8Rng, mesh: &TensorMesh, beta: f64) -> Arrays {
        let stride = mesh.n() + 1;
        let mut draw = |len: usize, lo: f64, hi: f64| -> Vec<f64> {
            (0..len).map(|_| rng.gen_range(lo..hi)).collect()
        };
        Arrays {
            stride,
            b: draw(mesh.node_count(), beta, 3.0),
            source: draw(mesh.node_count(), -5.0, 5.0),
            boundary: draw(2 * (mesh.m() + 1), -2.0, 2.0),
            initial: draw(stride, -2.0, 2.0),
        }
    }

    fn sup(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn stability_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let eps = libm::ldexp(1.0, -10);
        let mesh = TensorMesh::shishkin(32, 16, eps, 1.0, 1.0).unwrap();
        for _ in 0..10 {
            let beta = rng.gen_range(0.5..2.0);
            let data = random_arrays(&mut rng, &mesh, beta);
            let y = solve_with(&data, &mesh, eps, |_, _| {}).unwrap();
            let bound = sup(&data.boundary).max(sup(&data.initial)) + sup(&data.source) / beta;
            assert!(y.max_abs() <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sign_pattern_on_fine_layer_mesh() {
        let eps = libm::ldexp(1.0, -20);
        let p = ProblemSpec::example23(eps).unwrap();
        let mesh = TensorMesh::shishkin(128, 32, eps, 1.0, 1.0).unwrap();
        let data = YProblem::new(&p).unwrap();
        let mut levels = 0;
        solve_with(&data, &mesh, eps, |_, sys| {
            assert!(sys.has_m_matrix_sign_pattern());
            levels += 1;
        })
        .unwrap();
        assert_eq!(levels, 32);
        assert!(max_principle_probe(&p, &mesh));

        let eps = libm::ldexp(1.0, -12);
        let p = ProblemSpec::example23(eps).unwrap();
        let mesh = TensorMesh::shishkin(64, 16, eps, 1.0, 1.0).unwrap();
        let data = YProblem::new(&p).unwrap();
        solve_with(&data, &mesh, eps, |_, sys| {
            assert!(sys.has_m_matrix_sign_pattern())
        })
        .unwrap();
    }

    #[test]
    fn reruns_are_bit_identical() {
        let eps = libm::ldexp(1.0, -6);
        let p = ProblemSpec::example23(eps).unwrap();
        let mesh = TensorMesh::shishkin(32, 8, eps, 1.0, 1.0).unwrap();
        assert_eq!(solve_y(&p, &mesh).unwrap(), solve_y(&p, &mesh).unwrap());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn larger_data_give_larger_solutions(seed in proptest::prelude::any::<u64>(), k in 0i32..24) {
            let eps = libm::ldexp(1.0, -k);
            let mesh = TensorMesh::shishkin(16, 8, eps, 1.0, 1.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let low = random_arrays(&mut rng, &mesh, 1.0);
            let bump = |v: &[f64], rng: &mut ChaCha8Rng| -> Vec<f64> {
                v.iter().map(|x| x + rng.gen_range(0.0..1.0)).collect()
            };
            let high = Arrays {
                stride: low.stride,
                b: low.b.clone(),
                source: bump(&low.source, &mut rng),
                boundary: bump(&low.boundary, &mut rng),
                initial: bump(&low.initial, &mut rng),
            };
            let y1 = solve_with(&high, &mesh, eps, |_, _| {}).unwrap();
            let y2 = solve_with(&low, &mesh, eps, |_, _| {}).unwrap();
            for (a, b) in y1.values().iter().zip(y2.values()) {
                proptest::prop_assert!(*a >= *b - 1e-13);
            }
        }
    }
}
