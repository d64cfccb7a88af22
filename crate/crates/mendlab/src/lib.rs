//! Mending volume of locally checkable labeling problems.
//!
//! A partial labeling with a hole is *mended* by relabeling a set of vertices
//! so that every vertex is happy again. This crate builds LCL problems on
//! bounded-degree graphs, computes minimum mends exactly, runs exploration
//! policies (menders) and measures how much of the graph they touch.

pub mod error;
pub mod graph;
pub mod labeling;
pub mod lcl;
pub mod search;
pub(crate) mod dp;
pub mod propagation;
pub mod menders;
pub mod families;
pub mod harness;
pub mod io;
pub mod cli;

pub use error::{Error, Result};
pub use graph::{Graph, RootedTree, Vertex};
pub use labeling::{Alphabet, Label, PartialLabeling};
pub use lcl::LclProblem;
