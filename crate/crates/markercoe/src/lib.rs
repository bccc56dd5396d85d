//! Combinatorics of marker continuous orbit equivalences on one-sided edge
//! shifts.
//!
//! A finite directed graph `E` ([`graph`]) defines the shift of one-sided
//! infinite paths. Finite paths, cycles and rotation classes of primitive
//! cycles live in [`words`]. [`marker`] validates marker data against the
//! overlap conditions and applies the resulting involutions to points and to
//! cyclic classes. [`measures`] evaluates periodic measures on cylinders with
//! exact rationals. [`dynamics`] builds transitivity chains and the
//! proximality family, and [`homology`] computes `Coker(I - A^t)`,
//! `Ker(I - A^t)` and the derived invariants.

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod homology;
pub mod marker;
pub mod measures;
pub mod slp;
pub mod words;

pub use error::{Error, Result};
pub use graph::{EdgeId, Graph, VertexId};
