//! Piecewise-uniform Shishkin meshes in space and time.

use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("space mesh needs N >= 8 divisible by 4, got {0}")]
    InvalidN(usize),
    #[error("time mesh needs M >= 4 and even, got {0}")]
    InvalidM(usize),
    #[error("invalid mesh parameter: {0}")]
    Parameter(&'static str),
    #[error("mesh nodes must be finite and strictly increasing")]
    NotIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Space,
    Time,
}

/// A one-dimensional mesh with its transition coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    transitions: Vec<f64>,
    kind: MeshKind,
}

impl Mesh1D {
    /// Builds a mesh from explicit nodes (at least two, strictly increasing).
    pub fn from_nodes(nodes: Vec<f64>, kind: MeshKind) -> Result<Self, MeshError> {
        if nodes.len() < 2
            || nodes.iter().any(|v| !v.is_finite())
            || nodes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(MeshError::NotIncreasing);
        }
        Ok(Mesh1D {
            nodes,
            transitions: Vec::new(),
            kind,
        })
    }

    /// `cells` equal cells on `[a, b]`.
    pub fn uniform(cells: usize, a: f64, b: f64, kind: MeshKind) -> Result<Self, MeshError> {
        if cells == 0 || !(b > a) {
            return Err(MeshError::Parameter(
                "uniform mesh needs cells > 0 and b > a",
            ));
        }
        let mut nodes = Vec::with_capacity(cells + 1);
        fill_uniform(&mut nodes, a, b, cells);
        nodes.push(b);
        Self::from_nodes(nodes, kind)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn transitions(&self) -> &[f64] {
        &self.transitions
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Halves every cell; transition coordinates are kept.
    pub fn bisect(&self) -> Self {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0]);
            nodes.push(0.5 * (w[0] + w[1]));
        }
        nodes.push(self.end());
        Mesh1D {
            nodes,
            transitions: self.transitions.clone(),
            kind: self.kind,
        }
    }

    /// Cell spacings `nodes[i] - nodes[i-1]`, `i = 1..=cells`.
    pub fn spacings(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Pushes `cells` nodes `a + (b-a) k / cells`, `k = 0..cells`; the endpoint `b` is left to the caller.
fn fill_uniform(nodes: &mut Vec<f64>, a: f64, b: f64, cells: usize) {
    let width = b - a;
    nodes.push(a);
    for k in 1..cells {
        nodes.push(a + width * (k as f64) / (cells as f64));
    }
}

/// Spatial transition point `min(1/4, 2 sqrt(eps/beta) ln N)`.
pub fn space_transition(n: usize, eps: f64, beta: f64) -> f64 {
    let layer = 2.0 * libm::sqrt(eps / beta) * libm::log(n as f64);
    layer.min(0.25)
}

/// Temporal transition point `min(T/2, (eps/beta) ln M)`.
pub fn time_transition(m: usize, eps: f64, beta: f64, t_final: f64) -> f64 {
    let layer = eps / beta * libm::log(m as f64);
    layer.min(0.5 * t_final)
}

fn check_positive(eps: f64, beta: f64) -> Result<(), MeshError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(MeshError::Parameter("eps must be positive"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(MeshError::Parameter("beta must be positive"));
    }
    Ok(())
}

/// Space mesh on `[0, 1]` with `N/4 : N/2 : N/4` cells on `[0,s] u [s,1-s] u [1-s,1]`.
pub fn space_mesh(n: usize, eps: f64, beta: f64) -> Result<Mesh1D, MeshError> {
    if n < 8 || !n.is_multiple_of(4) {
        return Err(MeshError::InvalidN(n));
    }
    check_positive(eps, beta)?;
    let sigma = space_transition(n, eps, beta);
    let right = 1.0 - sigma;
    let quarter = n / 4;
    let mut nodes = Vec::with_capacity(n + 1);
    fill_uniform(&mut nodes, 0.0, sigma, quarter);
    fill_uniform(&mut nodes, sigma, right, n / 2);
    fill_uniform(&mut nodes, right, 1.0, quarter);
    nodes.push(1.0);
    Ok(Mesh1D {
        nodes,
        transitions: alloc::vec![sigma, right],
        kind: MeshKind::Space,
    })
}

/// Time mesh on `[0, T]` with `M/2` cells on each of `[0, tau]` and `[tau, T]`.
pub fn time_mesh(m: usize, eps: f64, beta: f64, t_final: f64) -> Result<Mesh1D, MeshError> {
    if m < 4 || !m.is_multiple_of(2) {
        return Err(MeshError::InvalidM(m));
    }
    check_positive(eps, beta)?;
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(MeshError::Parameter("final time must be positive"));
    }
    let tau = time_transition(m, eps, beta, t_final);
    let mut nodes = Vec::with_capacity(m + 1);
    fill_uniform(&mut nodes, 0.0, tau, m / 2);
    fill_uniform(&mut nodes, tau, t_final, m / 2);
    nodes.push(t_final);
    Ok(Mesh1D {
        nodes,
        transitions: alloc::vec![tau],
        kind: MeshKind::Time,
    })
}

/// Tensor product of a space and a time mesh with the spacings the scheme uses.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMesh {
    space: Mesh1D,
    time: Mesh1D,
    h: Vec<f64>,
    hbar: Vec<f64>,
    k: Vec<f64>,
}

impl TensorMesh {
    pub fn new(space: Mesh1D, time: Mesh1D) -> Self {
        let h = space.spacings();
        let hbar = h.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let k = time.spacings();
        TensorMesh {
            space,
            time,
            h,
            hbar,
            k,
        }
    }

    /// Shishkin tensor mesh on `[0,1] x [0,T]`.
    pub fn shishkin(
        n: usize,
        m: usize,
        eps: f64,
        beta: f64,
        t_final: f64,
    ) -> Result<Self, MeshError> {
        Ok(Self::new(
            space_mesh(n, eps, beta)?,
            time_mesh(m, eps, beta, t_final)?,
        ))
    }

    /// The `(2N, 2M)` mesh obtained by halving every cell in both directions.
    pub fn bisect(&self) -> Self {
        Self::new(self.space.bisect(), self.time.bisect())
    }

    pub fn space(&self) -> &Mesh1D {
        &self.space
    }

    pub fn time(&self) -> &Mesh1D {
        &self.time
    }

    pub fn xs(&self) -> &[f64] {
        self.space.nodes()
    }

    pub fn ts(&self) -> &[f64] {
        self.time.nodes()
    }

    /// Number of space cells `N`.
    pub fn n(&self) -> usize {
        self.space.cells()
    }

    /// Number of time steps `M`.
    pub fn m(&self) -> usize {
        self.time.cells()
    }

    /// `h_i = x_i - x_{i-1}` for `i = 1..=N`.
    pub fn h(&self, i: usize) -> f64 {
        self.h[i - 1]
    }

    /// `(h_i + h_{i+1}) / 2` for interior `i = 1..N`.
    pub fn hbar(&self, i: usize) -> f64 {
        self.hbar[i - 1]
    }

    /// `k_j = t_j - t_{j-1}` for `j = 1..=M`.
    pub fn k(&self, j: usize) -> f64 {
        self.k[j - 1]
    }

    /// Space transition `sigma`, or `None` for meshes not built as Shishkin meshes.
    pub fn sigma(&self) -> Option<f64> {
        self.space.transitions().first().copied()
    }

    pub fn tau(&self) -> Option<f64> {
        self.time.transitions().first().copied()
    }

    pub fn node_count(&self) -> usize {
        (self.n() + 1) * (self.m() + 1)
    }
}

/// Tensor product of two meshes.
pub fn tensor(space: Mesh1D, time: Mesh1D) -> TensorMesh {
    TensorMesh::new(space, time)
}
