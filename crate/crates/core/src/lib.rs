#![no_std]
//! Relative pose of a calibrated multi-camera rig from affine correspondences.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constraints;
pub mod error;
pub mod geometry;
pub mod polysolver;
pub mod robust;
pub mod solvers;
pub mod synthbench;

pub use error::{Error, Result};
