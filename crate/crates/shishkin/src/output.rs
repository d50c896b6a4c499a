//! CSV and JSON artifacts. Numbers are written in shortest round-trip form, so identical
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use shishkin_core::mesh::TensorMesh;
use shishkin_core::solver::GridFunction;

use crate::error::CliError;

/// Shortest round-trip scientific form, e.g. `-2.5e-1`.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Header row of x-nodes, first column of t-nodes, one value per node.
pub fn grid_csv(g: &GridFunction) -> String {
    let mesh = g.mesh();
    window_csv(g, mesh.n() + 1, mesh.m() + 1)
}

/// Only nodes with `x <= x_max` and `t <= t_max`.
pub fn zoom_csv(g: &GridFunction, x_max: f64, t_max: f64) -> String {
    let mesh = g.mesh();
    let nx = mesh.xs().iter().take_while(|&&x| x <= x_max).count().max(1);
    let nt = mesh.ts().iter().take_while(|&&t| t <= t_max).count().max(1);
    window_csv(g, nx, nt)
}

fn window_csv(g: &GridFunction, nx: usize, nt: usize) -> String {
    let mesh = g.mesh();
    let mut out = String::from("t\\x");
    for &x in &mesh.xs()[..nx] {
        let _ = write!(out, ",{}", num(x));
    }
    out.push('\n');
    for (j, &t) in mesh.ts()[..nt].iter().enumerate() {
        out.push_str(&num(t));
        for i in 0..nx {
            let _ = write!(out, ",{}", num(g.get(i, j)));
        }
        out.push('\n');
    }
    out
}

/// One row per node: `axis,index,coordinate,spacing` (spacing to the previous node, empty at 0).
pub fn mesh_csv(mesh: &TensorMesh) -> String {
    let mut out = String::from("axis,index,coordinate,spacing\n");
    for (axis, nodes) in [("x", mesh.xs()), ("t", mesh.ts())] {
        for (i, &v) in nodes.iter().enumerate() {
            let spacing = if i == 0 {
                String::new()
            } else {
                num(v - nodes[i - 1])
            };
            let _ = writeln!(out, "{axis},{i},{},{spacing}", num(v));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub problem: String,
    pub eps: f64,
    pub beta: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub sigma: Option<f64>,
    pub tau: Option<f64>,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub target: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl Metadata {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
