use crate::digraph::Digraph;
use crate::metric::FiniteMetricSpace;
use crate::relation::FiniteRelation;
use crate::scalar::Scalar;

/// `G_ε`: `u → v` iff some `(a, v) ∈ f` has `d(u, a) < ε`.
///
/// Paths `x → … → v` in `G_ε` are exactly the chains from `x` whose gaps,
/// except the final one, are below `ε`.
pub fn epsilon_chain_graph<T: Scalar>(f: &FiniteRelation, d: &FiniteMetricSpace<T>, eps: T) -> Digraph {
    let n = f.n_points();
    let sources: Vec<usize> = (0..n).filter(|&a| !f.successors(a).is_empty()).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for &a in &sources {
            if d.dist(u, a) < eps {
                edges.extend(f.successors(a).iter().map(|&v| (u, v)));
            }
        }
    }
    Digraph::from_edges(n, edges)
}

/// For each `x`, the set of `y` with an ε-chain from `x` to `y`: some `v`
/// reachable from `x` in `G_ε` with `d(v, y) < ε`. Equals `{m(x, ·) < ε}`.
pub fn epsilon_reach_within<T: Scalar>(g: &Digraph, d: &FiniteMetricSpace<T>, eps: T) -> Vec<Vec<bool>> {
    let n = g.len();
    (0..n)
        .map(|x| {
            let reach = g.reachable(&[x]);
            let hit: Vec<usize> = (0..n).filter(|&v| reach[v]).collect();
            (0..n).map(|y| hit.iter().any(|&v| d.dist(v, y) < eps)).collect()
        })
        .collect()
}
