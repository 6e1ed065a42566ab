//! Epsilon-chain graphs at a fixed scale: chain transitivity, period and the
//! uniform chain length.

use serde::Serialize;

use crate::chains::epsilon_chain_graph;
use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::relation::FiniteRelation;
use crate::scalar::Scalar;

/// Everything the classifier needs from `G_ε`.
#[derive(Clone, Debug, Serialize)]
pub struct ScaleAnalysis {
    pub epsilon: f64,
    pub scc_count: usize,
    /// Nodes reachable from every node, when they form one cyclic terminal component.
    pub core: Option<Vec<usize>>,
    pub period: Option<usize>,
    /// Every point's `G_ε` reach set comes within `ε` of every point.
    pub chain_transitive: bool,
    /// Smallest `n₀` with every `n ≥ n₀`-step reach set `ε`-dense, when the
    /// reach sets stabilise within the iteration limit.
    pub uniform_chain_length: Option<usize>,
}

/// Strict `ε`-balls as bitsets.
fn balls<T: Scalar>(d: &FiniteMetricSpace<T>, eps: T, words: usize) -> Vec<u64> {
    let n = d.len();
    let mut out = vec![0u64; n * words];
    for u in 0..n {
        for v in 0..n {
            if d.dist(u, v) < eps {
                out[u * words + v / 64] |= 1 << (v % 64);
            }
        }
    }
    out
}

fn full_mask(n: usize, words: usize) -> Vec<u64> {
    let mut m = vec![u64::MAX; words];
    if !n.is_multiple_of(64) {
        m[words - 1] = (1u64 << (n % 64)) - 1;
    }
    m
}

/// `S_{k+1}(x) = ∪_{u ∈ succ(x)} S_k(u)`.
fn step_sets(g: &Digraph, cur: &[u64], words: usize) -> Vec<u64> {
    let n = g.len();
    let mut next = vec![0u64; n * words];
    for x in 0..n {
        let row = &mut next[x * words..(x + 1) * words];
        for &u in g.successors(x) {
            for (r, c) in row.iter_mut().zip(&cur[u * words..(u + 1) * words]) {
                *r |= c;
            }
        }
    }
    next
}

/// Smallest `n₀ ≥ 1` such that for every `n ≥ n₀` and every `x`, the points
/// reachable from `x` in exactly `n` steps of `g` come within `ε` of every point.
///
/// Exact-step reach sets are eventually periodic; the answer is certain only
/// once they stop changing, so `None` is returned if that does not happen
/// within `max_len` steps.
pub fn uniform_chain_length<T: Scalar>(
    g: &Digraph,
    d: &FiniteMetricSpace<T>,
    eps: T,
    max_len: usize,
) -> Option<usize> {
    let n = g.len();
    if n == 0 {
        return Some(1);
    }
    let words = n.div_ceil(64);
    let full = full_mask(n, words);
    // S_1 and C_1, the ε-neighbourhood of S_1
    let ball = balls(d, eps, words);
    let mut reach = vec![0u64; n * words];
    for x in 0..n {
        for &v in g.successors(x) {
            reach[x * words + v / 64] |= 1 << (v % 64);
        }
    }
    let mut cover = step_sets(g, &ball, words);
    let mut last_fail = 0usize;
    for k in 1..=max_len {
        let dense = (0..n).all(|x| cover[x * words..(x + 1) * words] == full[..]);
        if !dense {
            last_fail = k;
        }
        let next = step_sets(g, &reach, words);
        if next == reach {
            return Some(last_fail + 1);
        }
        reach = next;
        cover = step_sets(g, &cover, words);
    }
    None
}

fn covers<T: Scalar>(set: &[usize], d: &FiniteMetricSpace<T>, eps: T) -> bool {
    (0..d.len()).all(|y| set.iter().any(|&v| d.dist(v, y) < eps))
}

/// Analyse `G_ε(f, d)`.
pub fn analyze_scale<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    eps: T,
    max_len: usize,
) -> ScaleAnalysis {
    let g = epsilon_chain_graph(f, d, eps);
    analyze_graph(&g, d, eps, max_len)
}

pub(crate) fn analyze_graph<T: Scalar>(
    g: &Digraph,
    d: &FiniteMetricSpace<T>,
    eps: T,
    max_len: usize,
) -> ScaleAnalysis {
    let scc_count = g.scc().count();
    let core = g.core();
    let chain_transitive = match &core {
        // every reach set contains the core, and core points reach exactly the core
        Some(k) => covers(k, d, eps),
        None => (0..g.len()).all(|x| {
            let seen = g.reachable(&[x]);
            let set: Vec<usize> = (0..g.len()).filter(|&v| seen[v]).collect();
            covers(&set, d, eps)
        }),
    };
    let period = core.as_ref().and_then(|k| g.period_of(k)).map(|(p, _)| p);
    let uniform_chain_length = if chain_transitive && period == Some(1) {
        uniform_chain_length(g, d, eps, max_len)
    } else {
        None
    };
    ScaleAnalysis {
        epsilon: eps.as_f64(),
        scc_count,
        core,
        period,
        chain_transitive,
        uniform_chain_length,
    }
}

/// Period of `G_ε(f, d)`: the gcd of cycle lengths in its core.
///
/// Fails with [`Error::NotChainTransitive`] if there is no single cyclic
/// terminal component reachable from everywhere.
pub fn period<T: Scalar>(f: &FiniteRelation, d: &FiniteMetricSpace<T>, eps: T) -> Result<usize> {
    let g = epsilon_chain_graph(f, d, eps);
    let core = g.core().ok_or_else(|| not_ct(&g, eps))?;
    g.period_of(&core)
        .map(|(p, _)| p)
        .ok_or_else(|| not_ct(&g, eps))
}

pub(crate) fn not_ct<T: Scalar>(g: &Digraph, eps: T) -> Error {
    let c = g.scc();
    Error::NotChainTransitive {
        epsilon: eps.as_f64(),
        scc_count: c.count(),
        components: c.sorted(),
    }
}
