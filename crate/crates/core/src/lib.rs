//! Reaction-diffusion with small diffusion and initial data that jump against the boundary
//! data at `(0, 0)`. The jump is subtracted with an erfc profile, the smooth remainder is
//! solved by backward Euler and central differences on Shishkin meshes, and two-mesh
//! differences estimate the convergence rate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod expr;
pub mod harness;
pub mod interp;
pub mod mesh;
pub mod problem;
pub mod solver;
pub mod specfun;
