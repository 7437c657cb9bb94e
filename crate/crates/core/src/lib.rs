//! Exact dynamics of piecewise-linear maps on finite metric trees.

pub mod analysis;
pub mod entropy;
pub mod error;
pub mod hyperspace;
pub mod io;
pub mod map;
pub mod rational;
pub mod sample;
pub mod tree;

pub use error::{Error, Result};
pub use map::{PeriodicOrbit, PlMap};
pub use rational::Rational;
pub use tree::{EdgeId, MetricTree, PointKind, Quotient, Subtree, TreePoint, VertexId};
