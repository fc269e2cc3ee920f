//! Certified graph partitions driven by edge-distribution arguments for
//! graphs with few induced copies of a small pattern.
//!
//! Start from [`Graph`], count with [`count::count_cliques`] and
//! [`count::count_induced`], check pairs with [`uniformity::check_pair`] and
//! build partitions with the procedures in [`partition`] and [`pipeline`].

mod bits;
pub mod bipartition;
pub mod constants;
pub mod count;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod partition;
pub mod params;
pub mod pipeline;
pub mod pattern;
pub mod ratio;
pub mod regularize;
pub mod scoop;
pub mod uniformity;

pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
pub use pattern::PatternGraph;
pub use ratio::Rational;
