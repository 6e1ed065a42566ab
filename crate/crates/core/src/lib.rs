//! Chain recurrence and mixing analysis for closed relations on finite
//! metric spaces.
//!
//! The crate computes barrier functions of chains (`m`, `ℓ` and their
//! anchored variants), the chain and strong chain relations they define,
//! product-system pseudo-metrics `ρ` and pseudo-ultrametrics `θ`, periods of
//! epsilon-chain graphs, and the cyclic or isometric factors that explain a
//! failure of mixing. Grid discretizations of circle maps supply continuum
//! examples.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the crate root fix `f64`.

pub mod chains;
pub mod digraph;
pub mod discretization;
mod error;
pub mod metric;
pub mod mixing;
pub mod relation;
mod scalar;
pub mod transitivity;
mod unionfind;

pub use chains::{
    barrier, barrier_with_jumps, epsilon_chain_graph, eval_chain, witness_chain, BarrierField, Chain,
    ChainCost, JumpGraph, JumpPolicy, Sources,
};
pub use digraph::Digraph;
pub use error::{Error, Result};
pub use metric::{
    check_metric, power_metric, quotient_by_zero_set, DistanceTable, FiniteMetricSpace, MetricReport,
    PseudoMetricTable, SizeCap,
};
pub use relation::{compose, invert, power, product, reach, FiniteRelation, Surjectivity};
pub use scalar::{format_scalar, parse_scalar, serde_scalar, Mode, Scalar};

pub type MetricSpace = FiniteMetricSpace<f64>;
pub type PseudoMetric = PseudoMetricTable<f64>;
pub type Barrier = BarrierField<f64>;
pub type Classification = mixing::Classification<f64>;
pub type QuotientSystem = mixing::QuotientSystem<f64>;
pub type DiscreteSystem = discretization::DiscreteSystem<f64>;
