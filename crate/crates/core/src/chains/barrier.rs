use std::io::{Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::relation::FiniteRelation;
use crate::scalar::{format_scalar, parse_scalar, Mode, Scalar};

use super::search::{search, JumpLists, SingleSystem};
use super::{eval_chain, Chain, JumpGraph, JumpPolicy};

/// Source points of a barrier computation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sources {
    All,
    Points(Vec<usize>),
}

impl Sources {
    fn resolve(&self, n: usize) -> Result<Vec<usize>> {
        match self {
            Sources::All => Ok((0..n).collect()),
            Sources::Points(p) => {
                if let Some(&bad) = p.iter().find(|&&x| x >= n) {
                    return Err(Error::Shape(format!("source {bad} out of range for {n} points")));
                }
                Ok(p.clone())
            }
        }
    }
}

/// Barrier values `m`, `ℓ`, `M` or `L` from a set of source points.
#[derive(Clone, Debug, PartialEq)]
pub struct BarrierField<T> {
    pub mode: Mode,
    pub policy: JumpPolicy,
    pub jump_graph: JumpGraph,
    n: usize,
    sources: Vec<usize>,
    rows: Vec<Vec<T>>,
    /// Free-form identifiers of the relation and metric the values belong to.
    pub relation_id: String,
    pub metric_id: String,
}

impl<T: Scalar> BarrierField<T> {
    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    /// Value for a computed source, `None` when `x` was not a source.
    pub fn get(&self, x: usize, y: usize) -> Option<T> {
        self.row(x).map(|r| r[y])
    }

    pub fn row(&self, x: usize) -> Option<&[T]> {
        self.sources
            .iter()
            .position(|&s| s == x)
            .map(|k| self.rows[k].as_slice())
    }

    /// Largest value over all computed pairs.
    pub fn max_value(&self) -> T {
        self.rows
            .iter()
            .flat_map(|r| r.iter().copied())
            .fold(T::zero(), T::max)
    }

    /// Pairs whose value is at most `eps`.
    pub fn threshold(&self, eps: T) -> Vec<(usize, usize)> {
        self.sources
            .iter()
            .zip(&self.rows)
            .flat_map(|(&x, r)| {
                r.iter()
                    .enumerate()
                    .filter(move |&(_, &v)| v <= eps)
                    .map(move |(y, _)| (x, y))
            })
            .collect()
    }

    /// `{(x, y) : value = 0}` as a relation (`𝒞` for bound, `𝒜` for length).
    pub fn zero_relation(&self) -> Result<FiniteRelation> {
        FiniteRelation::new(self.n, self.threshold(T::zero()))
    }

    /// CSV with columns `from,to,value,mode,policy`; `+∞` is written `inf`.
    pub fn to_csv<W: Write>(&self, w: W, labels: &[String]) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["from", "to", "value", "mode", "policy"])?;
        for (&x, r) in self.sources.iter().zip(&self.rows) {
            for (y, &v) in r.iter().enumerate() {
                wtr.write_record([
                    labels[x].as_str(),
                    labels[y].as_str(),
                    &format_scalar(v),
                    self.mode.as_str(),
                    self.policy.as_str(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the CSV written by [`BarrierField::to_csv`].
    pub fn from_csv<R: Read>(r: R, labels: &[String]) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let n = labels.len();
        let index = |s: &str| {
            labels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| Error::Parse(format!("unknown point label '{s}'")))
        };
        let mut sources: Vec<usize> = Vec::new();
        let mut rows: Vec<Vec<T>> = Vec::new();
        let mut mode = None;
        let mut policy = None;
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 5 {
                return Err(Error::Parse("barrier CSV rows need 5 columns".into()));
            }
            let (x, y) = (index(&rec[0])?, index(&rec[1])?);
            let v: T = parse_scalar(&rec[2])?;
            mode = Some(rec[3].parse::<Mode>()?);
            policy = Some(rec[4].parse::<JumpPolicy>()?);
            let k = match sources.iter().position(|&s| s == x) {
                Some(k) => k,
                None => {
                    sources.push(x);
                    rows.push(vec![T::infinity(); n]);
                    rows.len() - 1
                }
            };
            rows[k][y] = v;
        }
        Ok(BarrierField {
            mode: mode.ok_or_else(|| Error::Parse("empty barrier CSV".into()))?,
            policy: policy.unwrap_or(JumpPolicy::FreeInitial),
            jump_graph: JumpGraph::Complete,
            n,
            sources,
            rows,
            relation_id: String::new(),
            metric_id: String::new(),
        })
    }
}

fn check_compatible<T: Scalar>(f: &FiniteRelation, d: &FiniteMetricSpace<T>) -> Result<()> {
    if f.n_points() != d.len() {
        return Err(Error::Shape(format!(
            "relation on {} points, metric on {}",
            f.n_points(),
            d.len()
        )));
    }
    Ok(())
}

/// Exact barrier field (complete jump graph).
pub fn barrier<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    mode: Mode,
    policy: JumpPolicy,
    sources: &Sources,
) -> Result<BarrierField<T>> {
    barrier_with_jumps(f, d, mode, policy, sources, JumpGraph::Complete)
}

/// Barrier field over a chosen jump graph. Sparse jump graphs give upper bounds.
pub fn barrier_with_jumps<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    mode: Mode,
    policy: JumpPolicy,
    sources: &Sources,
    jump_graph: JumpGraph,
) -> Result<BarrierField<T>> {
    check_compatible(f, d)?;
    let n = d.len();
    let sources = sources.resolve(n)?;
    let jumps = JumpLists::build(d, jump_graph);
    let sys = SingleSystem { f, jumps: &jumps };
    let rows = sources
        .par_iter()
        .map(|&x| search(&sys, x, mode, policy).value)
        .collect();
    Ok(BarrierField {
        mode,
        policy,
        jump_graph,
        n,
        sources,
        rows,
        relation_id: format!("relation(n={},edges={})", f.n_points(), f.len()),
        metric_id: format!("metric(n={n})"),
    })
}

/// An optimal chain from `x` to `y` (free initial jump).
pub fn witness_chain<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    x: usize,
    y: usize,
    mode: Mode,
) -> Result<Chain> {
    witness_chain_with(f, d, x, y, mode, JumpPolicy::FreeInitial)
}

pub fn witness_chain_with<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    x: usize,
    y: usize,
    mode: Mode,
    policy: JumpPolicy,
) -> Result<Chain> {
    check_compatible(f, d)?;
    if x >= d.len() || y >= d.len() {
        return Err(Error::Shape(format!("point out of range for {} points", d.len())));
    }
    let jumps = JumpLists::build(d, JumpGraph::Complete);
    let tree = search(&SingleSystem { f, jumps: &jumps }, x, mode, policy);
    let edges = tree.chain_to(y).ok_or(Error::NoWitness { from: x, to: y })?;
    let chain = Chain::from_edges_unchecked(edges);
    debug_assert!(
        (eval_chain(&chain, x, y, d).get(mode) - tree.value[y]).abs() <= T::witness_tolerance()
    );
    Ok(chain)
}
