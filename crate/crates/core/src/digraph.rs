//! Compact directed graphs: strongly connected components, reachability and
//! cyclicity (period) of a strongly connected core.

use std::collections::VecDeque;

use crate::relation::FiniteRelation;

/// Directed graph on `0..n` in forward-star form. Parallel edges are removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Digraph {
    pub fn from_edges(n: usize, mut edges: Vec<(usize, usize)>) -> Self {
        edges.sort_unstable();
        edges.dedup();
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &edges {
            offsets[a + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Digraph {
            n,
            offsets,
            targets: edges.into_iter().map(|(_, b)| b).collect(),
        }
    }

    pub fn from_relation(f: &FiniteRelation) -> Self {
        Self::from_edges(f.n_points(), f.edges().to_vec())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn successors(&self, u: usize) -> &[usize] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.successors(u).binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.successors(u).iter().map(move |&v| (u, v)))
    }

    /// Nodes reachable from `sources` in at least one step.
    pub fn reachable(&self, sources: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            for &v in self.successors(s) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        while let Some(u) = queue.pop_front() {
            for &v in self.successors(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Strongly connected components (iterative Tarjan). Components are listed
    /// in reverse topological order; members ascending.
    pub fn scc(&self) -> Components {
        const UNVISITED: usize = usize::MAX;
        let n = self.n;
        let mut index = vec![UNVISITED; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack = Vec::new();
        let mut comp_of = vec![UNVISITED; n];
        let mut comps: Vec<Vec<usize>> = Vec::new();
        let mut next = 0usize;
        let mut call: Vec<(usize, usize)> = Vec::new();

        for root in 0..n {
            if index[root] != UNVISITED {
                continue;
            }
            call.push((root, 0));
            index[root] = next;
            low[root] = next;
            next += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&mut (u, ref mut pos)) = call.last_mut() {
                let succ = self.successors(u);
                if *pos < succ.len() {
                    let v = succ[*pos];
                    *pos += 1;
                    if index[v] == UNVISITED {
                        index[v] = next;
                        low[v] = next;
                        next += 1;
                        stack.push(v);
                        on_stack[v] = true;
                        call.push((v, 0));
                    } else if on_stack[v] {
                        low[u] = low[u].min(index[v]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[u]);
                    }
                    if low[u] == index[u] {
                        let id = comps.len();
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            comp_of[w] = id;
                            comp.push(w);
                            if w == u {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        Components { comps, comp_of }
    }

    /// The unique terminal strongly connected component containing a cycle, if
    /// every node reaches it. It equals the set of nodes reachable from every node.
    pub fn core(&self) -> Option<Vec<usize>> {
        let c = self.scc();
        let mut terminal = Vec::new();
        for (id, comp) in c.comps.iter().enumerate() {
            let leaves = comp
                .iter()
                .any(|&u| self.successors(u).iter().any(|&v| c.comp_of[v] != id));
            if !leaves {
                terminal.push(id);
            }
        }
        if terminal.len() != 1 {
            return None;
        }
        let comp = &c.comps[terminal[0]];
        let cyclic = comp.len() > 1 || self.has_edge(comp[0], comp[0]);
        cyclic.then(|| comp.clone())
    }

    /// BFS levels from `root` using only edges inside `members`.
    fn levels_within(&self, root: usize, members: &[bool]) -> Vec<Option<usize>> {
        let mut level = vec![None; self.n];
        level[root] = Some(0);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            let lu = level[u].unwrap();
            for &v in self.successors(u) {
                if members[v] && level[v].is_none() {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
            }
        }
        level
    }

    /// Period (gcd of cycle lengths) of a strongly connected node set, together
    /// with BFS levels from its smallest member. `None` if the set is not
    /// strongly connected or has no cycle.
    pub fn period_of(&self, nodes: &[usize]) -> Option<(usize, Vec<Option<usize>>)> {
        let root = *nodes.iter().min()?;
        let mut members = vec![false; self.n];
        for &u in nodes {
            members[u] = true;
        }
        let level = self.levels_within(root, &members);
        if nodes.iter().any(|&u| level[u].is_none()) {
            return None;
        }
        let mut p = 0usize;
        for &u in nodes {
            let lu = level[u].unwrap();
            for &v in self.successors(u) {
                if members[v] {
                    let lv = level[v].unwrap();
                    p = gcd(p, (lu + 1).abs_diff(lv));
                }
            }
        }
        if p == 0 {
            return None;
        }
        // strong connectivity: every member must also reach the root
        let back = self.transpose().levels_within(root, &members);
        if nodes.iter().any(|&u| back[u].is_none()) {
            return None;
        }
        Some((p, level))
    }

    pub fn transpose(&self) -> Digraph {
        Digraph::from_edges(self.n, self.edges().map(|(u, v)| (v, u)).collect())
    }
}

/// Strongly connected components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub comps: Vec<Vec<usize>>,
    pub comp_of: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.comps.len()
    }

    /// Components sorted by smallest member.
    pub fn sorted(&self) -> Vec<Vec<usize>> {
        let mut c = self.comps.clone();
        c.sort();
        c
    }
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
