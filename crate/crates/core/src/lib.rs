//! Fibrewise compactifications and regulated limits, computed exactly.
//!
//! * [`discrete_top`]: unified spaces of maps between discrete spaces.
//! * [`graph_paths`]: path spaces and boundary path spaces of directed graphs.
//! * [`findim_cstar`]: block algebras, Pimsner and Katsura ideals, quotient
//!   fibrewise compactifications.
//! * [`graph_correspondence`]: stage algebras and Bratteli diagrams for graph
//!   correspondences.
//! * [`fock_oracle`]: the same stage algebras, recomputed on a truncated Fock
//!   space.

pub mod corpus;
pub mod discrete_top;
pub mod findim_cstar;
pub mod fock_oracle;
pub mod graph;
pub mod graph_correspondence;
pub mod graph_paths;
pub mod linalg;
pub mod scalar;

pub use discrete_top::{DefinableSet, DiscreteSpace, Point, TameMap};
pub use findim_cstar::{BlockIdeal, FinDimAlgebra, StarMorphism};
pub use graph::{EdgeRef, Graph, GraphError, Path, VertexId};
pub use graph_correspondence::{BratteliDiagram, Mode, RegulatingChoice, StageTower};
pub use graph_paths::{PathPoint, Regulation, VertexClassification};
pub use scalar::GaussRational;
