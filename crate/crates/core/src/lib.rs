//! Sphere-inscribability of combinatorial polytopes by rank minimization of
//! a bordered Gram matrix.

pub mod bench;
pub mod error;
pub mod families;
pub mod io;
pub mod numerics;
pub mod pipeline;
pub mod polytope;
pub mod sdp;

pub use error::{Error, Result};
