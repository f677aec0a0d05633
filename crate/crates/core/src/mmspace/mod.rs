//! The discrete metric measure space: a finite graph whose edges carry a
//! length (the metric, through shortest paths) and a measure.

mod curve;
mod family;
mod function;
mod graph;
mod location;

pub mod generate;
pub mod io;

pub use curve::{line_integral, Curve, Step};
pub use family::{enumerate_curves, for_each_simple_path, Axis, Budget, Connector, CurveFamily, EdgeRestriction};
pub use function::VertexFunction;
pub use generate::{generate, Generated, GeneratorKind};
pub use graph::{Edge, GraphBuilder, MetricGraph, Vertex};
pub use location::{Granularity, Location};
