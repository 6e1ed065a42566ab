//! Label-setting search over the gap/step graph of a chain system.
//!
//! Nodes come in two kinds. `R(a)` is "a gap just ended at `a`"; the next move
//! must be a relation edge out of `a`. `B(b)` is "a relation edge just ended
//! at `b`"; the next move is a gap (a single jump, possibly of length zero).
//! Alternation forbids two consecutive jumps, so a bound-mode search cannot
//! split one gap into several smaller ones. The final gap to every target is
//! evaluated after the search from the settled `B` labels.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::metric::FiniteMetricSpace;
use crate::relation::FiniteRelation;
use crate::scalar::{Mode, Scalar};

use super::{JumpGraph, JumpPolicy};

pub(crate) const NO_PRED: u32 = u32::MAX;
pub(crate) const START: u32 = u32::MAX - 1;

/// Implicit graph of a chain system.
pub(crate) trait ChainGraph<T: Scalar>: Sync {
    fn points(&self) -> usize;
    fn for_each_successor(&self, a: usize, f: impl FnMut(usize));
    /// Every point `a` the gap out of `b` may land on, with cost `d(b, a)`.
    /// Must include `b` itself at cost zero.
    fn for_each_jump(&self, b: usize, f: impl FnMut(usize, T));
}

/// Per-point jump targets with their distances.
#[derive(Clone, Debug)]
pub(crate) struct JumpLists<T> {
    lists: Vec<Vec<(u32, T)>>,
}

impl<T: Scalar> JumpLists<T> {
    pub fn build(d: &FiniteMetricSpace<T>, graph: JumpGraph) -> Self {
        let n = d.len();
        let lists = match graph {
            JumpGraph::Complete => (0..n)
                .map(|u| (0..n).map(|v| (v as u32, d.dist(u, v))).collect())
                .collect(),
            JumpGraph::Knn(k) => d
                .nearest_neighbors(k)
                .into_iter()
                .enumerate()
                .map(|(u, nn)| {
                    let mut l: Vec<(u32, T)> = Vec::with_capacity(nn.len() + 1);
                    l.push((u as u32, T::zero()));
                    l.extend(nn.into_iter().map(|v| (v as u32, d.dist(u, v))));
                    l.sort_by_key(|&(v, _)| v);
                    l
                })
                .collect(),
        };
        JumpLists { lists }
    }

    #[inline]
    pub fn of(&self, u: usize) -> &[(u32, T)] {
        &self.lists[u]
    }
}

/// One relation on one metric space.
pub(crate) struct SingleSystem<'a, T> {
    pub f: &'a FiniteRelation,
    pub jumps: &'a JumpLists<T>,
}

impl<T: Scalar> ChainGraph<T> for SingleSystem<'_, T> {
    fn points(&self) -> usize {
        self.f.n_points()
    }

    #[inline]
    fn for_each_successor(&self, a: usize, mut f: impl FnMut(usize)) {
        for &b in self.f.successors(a) {
            f(b);
        }
    }

    #[inline]
    fn for_each_jump(&self, b: usize, mut f: impl FnMut(usize, T)) {
        for &(a, w) in self.jumps.of(b) {
            f(a as usize, w);
        }
    }
}

/// `f × f` on `(X × X, d × d)` with `d × d` the coordinatewise maximum.
/// Pair `(u1, u2)` is node `u1 * n + u2`.
pub(crate) struct ProductSystem<'a, T> {
    pub f: &'a FiniteRelation,
    pub jumps: &'a JumpLists<T>,
}

impl<T: Scalar> ChainGraph<T> for ProductSystem<'_, T> {
    fn points(&self) -> usize {
        let n = self.f.n_points();
        n * n
    }

    #[inline]
    fn for_each_successor(&self, a: usize, mut f: impl FnMut(usize)) {
        let n = self.f.n_points();
        let (a1, a2) = (a / n, a % n);
        let s2 = self.f.successors(a2);
        for &b1 in self.f.successors(a1) {
            for &b2 in s2 {
                f(b1 * n + b2);
            }
        }
    }

    #[inline]
    fn for_each_jump(&self, b: usize, mut f: impl FnMut(usize, T)) {
        let n = self.f.n_points();
        let (b1, b2) = (b / n, b % n);
        let j2 = self.jumps.of(b2);
        for &(a1, w1) in self.jumps.of(b1) {
            let base = a1 as usize * n;
            for &(a2, w2) in j2 {
                f(base + a2 as usize, w1.max(w2));
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key<T>(T, u32);

impl<T: Scalar> Eq for Key<T> {}

impl<T: Scalar> PartialOrd for Key<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Key<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .partial_cmp(&other.0)
            .unwrap_or(Ordering::Equal)
            .then(self.1.cmp(&other.1))
    }
}

/// Settled labels of one single-source search.
pub(crate) struct SearchTree<T> {
    /// Predecessor of `R(a)`: a `B` index, or [`START`].
    pub gap_pred: Vec<u32>,
    /// Predecessor of `B(b)`: the `R` index whose relation edge was taken.
    pub step_pred: Vec<u32>,
    /// Barrier value to every target (after the final gap).
    pub value: Vec<T>,
    /// `B` node from which the final gap to each target was taken.
    pub value_pred: Vec<u32>,
}

impl<T: Scalar> SearchTree<T> {
    /// Relation edges of an optimal chain to `y`, first edge first.
    pub fn chain_to(&self, y: usize) -> Option<Vec<(usize, usize)>> {
        let mut b = self.value_pred[y];
        if b == NO_PRED {
            return None;
        }
        let mut edges = Vec::new();
        loop {
            let a = self.step_pred[b as usize];
            edges.push((a as usize, b as usize));
            let p = self.gap_pred[a as usize];
            if p == START {
                break;
            }
            b = p;
        }
        edges.reverse();
        Some(edges)
    }
}

pub(crate) fn search<T: Scalar, G: ChainGraph<T>>(
    g: &G,
    source: usize,
    mode: Mode,
    policy: JumpPolicy,
) -> SearchTree<T> {
    let n = g.points();
    let inf = T::infinity();
    let mut gap_end = vec![inf; n];
    let mut step_end = vec![inf; n];
    let mut gap_pred = vec![NO_PRED; n];
    let mut step_pred = vec![NO_PRED; n];
    let mut heap: BinaryHeap<Reverse<Key<T>>> = BinaryHeap::new();

    // node ids: R(a) = a, B(b) = n + b
    let n32 = n as u32;
    match policy {
        JumpPolicy::FreeInitial => g.for_each_jump(source, |a, w| {
            if w < gap_end[a] {
                gap_end[a] = w;
                gap_pred[a] = START;
                heap.push(Reverse(Key(w, a as u32)));
            }
        }),
        JumpPolicy::Anchored => {
            gap_end[source] = T::zero();
            gap_pred[source] = START;
            heap.push(Reverse(Key(T::zero(), source as u32)));
        }
    }

    while let Some(Reverse(Key(cost, id))) = heap.pop() {
        if id < n32 {
            let a = id as usize;
            if cost > gap_end[a] {
                continue;
            }
            g.for_each_successor(a, |b| {
                if cost < step_end[b] {
                    step_end[b] = cost;
                    step_pred[b] = id;
                    heap.push(Reverse(Key(cost, n32 + b as u32)));
                }
            });
        } else {
            let b = (id - n32) as usize;
            if cost > step_end[b] {
                continue;
            }
            g.for_each_jump(b, |a, w| {
                let c = mode.compose(cost, w);
                if c < gap_end[a] {
                    gap_end[a] = c;
                    gap_pred[a] = b as u32;
                    heap.push(Reverse(Key(c, a as u32)));
                }
            });
        }
    }

    let mut value = vec![inf; n];
    let mut value_pred = vec![NO_PRED; n];
    for b in 0..n {
        let cb = step_end[b];
        if cb == inf {
            continue;
        }
        g.for_each_jump(b, |y, w| {
            let c = mode.compose(cb, w);
            if c < value[y] {
                value[y] = c;
                value_pred[y] = b as u32;
            }
        });
    }

    SearchTree {
        gap_pred,
        step_pred,
        value,
        value_pred,
    }
}
