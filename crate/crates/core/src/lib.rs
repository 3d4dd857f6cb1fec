//! Cell-centred, hybrid and dual finite volume schemes for
//! `-div(Λ ∇u) = f` on polygonal meshes of a 2D domain, with Dirichlet data.
//!
//! The crate is organised bottom-up: [`mesh`] and [`problem`] describe the
//! data, [`sparse`] solves the linear systems, the scheme modules
//! ([`tpfa`], [`mpfa`], [`hmm`], [`ddfv`], [`nonlinear`]) assemble them and
//! [`diagnostics`] checks the discrete properties of the result.

pub mod ddfv;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod hmm;
pub mod mesh;
pub mod mpfa;
pub mod nonlinear;
pub mod problem;
pub mod scheme;
pub mod sparse;
pub mod tolerances;
pub mod tpfa;

pub use error::Error;
pub use geometry::{Point, Tensor};
pub use mesh::Mesh;
pub use problem::{ManufacturedCase, Problem, TensorField};
pub use scheme::{AssembledSystem, SchemeKind, SolutionField};
pub use sparse::{LinearSystem, SparseMatrix};
