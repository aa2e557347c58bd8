//! Exact analysis of Segre-Veronese tensors: centroid algebras, finest
//! direct-sum decompositions, nilpotent normal forms and explicit
//! degenerations to direct sums.

pub mod apolar;
pub mod centroid;
pub mod degeneration;
pub mod error;
pub mod field;
pub mod generate;
pub mod matrix;
pub mod normalform;
pub mod poly;
pub mod splitter;
pub mod tensor;

pub use error::{Error, Result};
pub use field::{Field, Scalar};
pub use matrix::Matrix;
pub use poly::UniPoly;
pub use tensor::{Factor, Format, Monomial, SVTensor};
