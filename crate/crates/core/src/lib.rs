//! Uniform hypergraph toolkit: degree and density audits, spectral mixing
//! checks, rooted embedding counts, absorber gadgets, perfect packing
//! pipelines and an exact-cover oracle.

pub mod audit;
pub mod certificate;
pub mod combinatorics;
pub mod embedding;
mod error;
pub mod generators;
mod hypergraph;
pub mod io;
pub mod oracle;
pub mod packing;
pub mod rng;
pub mod spectral;
mod vertex_set;

pub use error::{Error, Result};
pub use hypergraph::{DegreeProfile, Hypergraph};
pub use vertex_set::VertexSet;
