//! Bilinear interpolation of grid functions and two-mesh differences.

use alloc::vec::Vec;

use thiserror::Error;

use crate::mesh::TensorMesh;
use crate::solver::GridFunction;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum InterpError {
    #[error("point ({x}, {t}) lies outside the mesh")]
    OutOfDomain { x: f64, t: f64 },
    #[error("meshes cover different domains")]
    DomainMismatch,
}

/// Coordinates closer than this are merged in a union grid.
pub const DEDUP_TOL: f64 = 1e-13;

/// Cell index and local weight of `v` in `nodes`; cells are `[n_i, n_{i+1})`, the last one closed.
fn locate(nodes: &[f64], v: f64) -> Option<(usize, f64)> {
    let last = nodes.len() - 1;
    if !(v >= nodes[0] && v <= nodes[last]) {
        return None;
    }
    let cell = (nodes.partition_point(|&n| n <= v) - 1).min(last - 1);
    let (a, b) = (nodes[cell], nodes[cell + 1]);
    Some((cell, (v - a) / (b - a)))
}

#[inline]
fn blend(y: &GridFunction, (i, wx): (usize, f64), (j, wt): (usize, f64)) -> f64 {
    let lower = (1.0 - wx) * y.get(i, j) + wx * y.get(i + 1, j);
    let upper = (1.0 - wx) * y.get(i, j + 1) + wx * y.get(i + 1, j + 1);
    (1.0 - wt) * lower + wt * upper
}

/// Bilinear interpolant of `y` at `(x, t)`; reproduces nodal values exactly.
pub fn bilinear_eval(y: &GridFunction, x: f64, t: f64) -> Result<f64, InterpError> {
    let mesh = y.mesh();
    let cx = locate(mesh.xs(), x).ok_or(InterpError::OutOfDomain { x, t })?;
    let ct = locate(mesh.ts(), t).ok_or(InterpError::OutOfDomain { x, t })?;
    Ok(blend(y, cx, ct))
}

/// Per-axis union of the node coordinates of two meshes.
#[derive(Debug, Clone, PartialEq)]
pub struct UnionGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
}

fn merge(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for v in all {
        match out.last() {
            Some(&last) if v - last <= DEDUP_TOL => {}
            _ => out.push(v),
        }
    }
    out
}

fn same_end(a: f64, b: f64) -> bool {
    (a - b).abs() <= DEDUP_TOL
}

pub fn union_grid(a: &TensorMesh, b: &TensorMesh) -> Result<UnionGrid, InterpError> {
    let (sa, sb) = (a.space(), b.space());
    let (ta, tb) = (a.time(), b.time());
    if !(same_end(sa.start(), sb.start())
        && same_end(sa.end(), sb.end())
        && same_end(ta.start(), tb.start())
        && same_end(ta.end(), tb.end()))
    {
        return Err(InterpError::DomainMismatch);
    }
    Ok(UnionGrid {
        xs: merge(a.xs(), b.xs()),
        ts: merge(a.ts(), b.ts()),
    })
}

/// Cell locations of every coordinate of `coords` in `nodes`, clamped into the domain.
fn locate_all(nodes: &[f64], coords: &[f64]) -> Vec<(usize, f64)> {
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    coords
        .iter()
        .map(|&v| locate(nodes, v.clamp(lo, hi)).unwrap_or((0, 0.0)))
        .collect()
}

/// `max |Ya_bar - Yb_bar|` over the tensor product of the union coordinates, which is where the
/// maximum of a difference of two bilinear interpolants is attained.
pub fn max_diff(ya: &GridFunction, yb: &GridFunction) -> Result<f64, InterpError> {
    let grid = union_grid(ya.mesh(), yb.mesh())?;
    let ax = locate_all(ya.mesh().xs(), &grid.xs);
    let bx = locate_all(yb.mesh().xs(), &grid.xs);
    let at = locate_all(ya.mesh().ts(), &grid.ts);
    let bt = locate_all(yb.mesh().ts(), &grid.ts);
    let mut worst: f64 = 0.0;
    for (&ca, &cb) in at.iter().zip(bt.iter()) {
        for (&xa, &xb) in ax.iter().zip(bx.iter()) {
            let d = (blend(ya, xa, ca) - blend(yb, xb, cb)).abs();
            if d > worst || d.is_nan() {
                worst = d;
            }
        }
    }
    Ok(worst)
}

/// `|Ya - Yb_bar|` at the nodes of `ya`'s mesh.
pub fn nodal_diff(ya: &GridFunction, yb: &GridFunction) -> Result<GridFunction, InterpError> {
    let mesh = ya.mesh();
    union_grid(mesh, yb.mesh())?;
    let bx = locate_all(yb.mesh().xs(), mesh.xs());
    let bt = locate_all(yb.mesh().ts(), mesh.ts());
    let mut out = ya.clone();
    for (j, &ct) in bt.iter().enumerate() {
        for (i, &cx) in bx.iter().enumerate() {
            out.set(i, j, (ya.get(i, j) - blend(yb, cx, ct)).abs());
        }
    }
    Ok(out)
}
