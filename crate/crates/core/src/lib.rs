//! Eigenvalue analysis of Laplacian matrices of directed signed graphs.
//!
//! Edges follow the sensing convention: a stored weight `a_ij` means node
//! `j` influences node `i`. The crate provides
//!
//! - [`graph`]: signed digraphs, Laplacians, superposition and parsing;
//! - [`reach`]: reach sets and the exclusive/common decomposition;
//! - [`spectral`]: the reduced Laplacian, spectra and zero-eigenvalue bases;
//! - [`robustness`]: the largest tolerable negative weight on a node pair
//!   from a frequency sweep, and effective resistance;
//! - [`perturbation`]: first-order analysis of the zero eigenvalue and
//!   sensitive node pairs;
//! - [`consensus`]: fixed-step simulation of `x' = -L x`.

pub mod consensus;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod perturbation;
pub mod reach;
pub mod report;
pub mod robustness;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{
    induced_subgraph, laplacian, parse_edge_list, split_signs, superpose, DenseMatrix,
    EdgePerturbation, SignedDigraph,
};
pub use num_complex::Complex64;
pub use reach::{reach_decomposition, reachable_set, ReachDecomposition, ReachMode};
pub use spectral::{
    eigenvalues, null_basis, projection_basis, reduced_laplacian, zero_multiplicity, NullBasis,
    ProjectionBasis, Spectrum,
};
