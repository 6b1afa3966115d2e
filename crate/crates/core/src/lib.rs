//! Genus expansion and Weingarten calculus for traces of words in Haar
//! orthogonal matrices and deterministic matrices.

pub mod error;
pub mod expansion;
pub mod exec;
pub mod expr;
pub mod matrix;
pub mod noncross;
pub mod scalar;
pub mod perm;
pub mod poly;
pub mod setpart;
pub mod verify;
pub mod weingarten;

pub use error::{Error, Result};
