//! Chains, barrier functions and epsilon-chain graphs.
//!
//! A chain `C = [(a_1, b_1), ..., (a_n, b_n)]` of relation edges is evaluated
//! between endpoints `x` and `y` through its gaps
//! `d(x, a_1), d(b_1, a_2), ..., d(b_n, y)`: the chain-bound is their maximum
//! and the chain-length their sum. Barrier values are the infimum of either
//! cost over all chains with at least one edge.

mod barrier;
mod epsilon;
pub(crate) mod search;

use serde::{Deserialize, Serialize};

pub use barrier::{
    barrier, barrier_with_jumps, witness_chain, witness_chain_with, BarrierField, Sources,
};
pub use epsilon::{epsilon_chain_graph, epsilon_reach_within};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::relation::FiniteRelation;
use crate::scalar::{Mode, Scalar};

/// Whether a chain may open with a jump away from its starting point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JumpPolicy {
    /// `m`, `ℓ`: the first gap `d(x, a_1)` is charged like any other.
    FreeInitial,
    /// `M`, `L`: the chain must start with an edge out of `x`.
    Anchored,
}

impl JumpPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            JumpPolicy::FreeInitial => "free-initial",
            JumpPolicy::Anchored => "anchored",
        }
    }
}

impl std::fmt::Display for JumpPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for JumpPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free-initial" | "free" => Ok(JumpPolicy::FreeInitial),
            "anchored" => Ok(JumpPolicy::Anchored),
            other => Err(Error::Parse(format!("unknown jump policy '{other}'"))),
        }
    }
}

/// Which gaps a search may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JumpGraph {
    /// Every pair of points (exact infimum).
    Complete,
    /// Each point may jump to itself and to its `k` nearest neighbours. Values
    /// are upper bounds of the exact ones.
    Knn(usize),
}

impl std::fmt::Display for JumpGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JumpGraph::Complete => f.write_str("complete"),
            JumpGraph::Knn(k) => write!(f, "knn({k})"),
        }
    }
}

impl std::str::FromStr for JumpGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "complete" {
            return Ok(JumpGraph::Complete);
        }
        let inner = s
            .strip_prefix("knn(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("knn:"))
            .or_else(|| s.strip_prefix("knn"));
        match inner.map(str::parse::<usize>) {
            Some(Ok(k)) => Ok(JumpGraph::Knn(k)),
            _ => Err(Error::Parse(format!("unknown jump graph '{s}'"))),
        }
    }
}

/// Costs of one chain between fixed endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainCost<T> {
    pub bound: T,
    pub length: T,
}

impl<T: Scalar> ChainCost<T> {
    pub fn get(&self, mode: Mode) -> T {
        match mode {
            Mode::Bound => self.bound,
            Mode::Length => self.length,
        }
    }
}

/// A nonempty sequence of relation edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Chain {
    edges: Vec<(usize, usize)>,
}

impl Chain {
    /// Checks that the chain is nonempty and that every edge belongs to `f`.
    pub fn new(edges: Vec<(usize, usize)>, f: &FiniteRelation) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidParameter("a chain needs at least one edge".into()));
        }
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| !f.contains(a, b)) {
            return Err(Error::InvalidParameter(format!("({a},{b}) is not an edge of the relation")));
        }
        Ok(Chain { edges })
    }

    pub(crate) fn from_edges_unchecked(edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(!edges.is_empty());
        Chain { edges }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `#C`.
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `C⁻¹`, a chain of the inverse relation.
    pub fn reversed(&self) -> Chain {
        Chain {
            edges: self.edges.iter().rev().map(|&(a, b)| (b, a)).collect(),
        }
    }

    /// `C · D`.
    pub fn concat(&self, other: &Chain) -> Chain {
        let mut edges = self.edges.clone();
        edges.extend_from_slice(&other.edges);
        Chain { edges }
    }
}

/// Chain-bound `|xCy|` and chain-length `||xCy||`.
pub fn eval_chain<T: Scalar>(c: &Chain, x: usize, y: usize, d: &FiniteMetricSpace<T>) -> ChainCost<T> {
    let mut bound = T::zero();
    let mut length = T::zero();
    let mut prev = x;
    let mut gap = |from: usize, to: usize| {
        let g = d.dist(from, to);
        bound = bound.max(g);
        length = length + g;
    };
    for &(a, b) in &c.edges {
        gap(prev, a);
        prev = b;
    }
    gap(prev, y);
    ChainCost { bound, length }
}
