//! Brute-force oracles and small-instance enumerators shared by the
//! integration tests. Nothing here calls the search engine.

#![allow(dead_code)]

use chainscope::{FiniteMetricSpace, FiniteRelation};

pub const INF: f64 = f64::INFINITY;

/// Dense copy of a metric.
pub fn dense(d: &FiniteMetricSpace<f64>) -> Vec<f64> {
    let n = d.len();
    (0..n * n).map(|u| d.dist(u / n, u % n)).collect()
}

fn combine(length: bool, acc: f64, step: f64) -> f64 {
    if length {
        acc + step
    } else {
        acc.max(step)
    }
}

/// Minimum chain cost from `x` to every `y` over chains with `1..=max_len`
/// edges, by dynamic programming on the number of edges.
///
/// `best[b]` holds the cheapest cost of a chain of exactly `k` edges whose last
/// edge ends at `b`, before the closing gap.
pub fn dp_barrier(
    n: usize,
    d: &[f64],
    edges: &[(usize, usize)],
    x: usize,
    length: bool,
    anchored: bool,
    max_len: usize,
) -> Vec<f64> {
    let mut best = vec![INF; n];
    for &(a, b) in edges {
        let c = if anchored {
            if a == x {
                0.0
            } else {
                INF
            }
        } else {
            d[x * n + a]
        };
        if c < best[b] {
            best[b] = c;
        }
    }
    let mut out = vec![INF; n];
    for k in 1..=max_len {
        for b in 0..n {
            if best[b] < INF {
                for y in 0..n {
                    let c = combine(length, best[b], d[b * n + y]);
                    if c < out[y] {
                        out[y] = c;
                    }
                }
            }
        }
        if k == max_len {
            break;
        }
        let mut next = vec![INF; n];
        for &(a, b) in edges {
            for p in 0..n {
                if best[p] < INF {
                    let c = combine(length, best[p], d[p * n + a]);
                    if c < next[b] {
                        next[b] = c;
                    }
                }
            }
        }
        best = next;
    }
    out
}

/// Minimum over every edge sequence of length `1..=max_len`, listed one by one.
pub fn enumerate_barrier(
    n: usize,
    d: &[f64],
    edges: &[(usize, usize)],
    x: usize,
    y: usize,
    length: bool,
    anchored: bool,
    max_len: usize,
) -> f64 {
    fn rec(
        n: usize,
        d: &[f64],
        edges: &[(usize, usize)],
        seq: &mut Vec<(usize, usize)>,
        x: usize,
        y: usize,
        length: bool,
        anchored: bool,
        left: usize,
        best: &mut f64,
    ) {
        if !seq.is_empty() {
            if !(anchored && seq[0].0 != x) {
                let mut cost = if anchored { 0.0 } else { d[x * n + seq[0].0] };
                for w in seq.windows(2) {
                    cost = combine(length, cost, d[w[0].1 * n + w[1].0]);
                }
                cost = combine(length, cost, d[seq[seq.len() - 1].1 * n + y]);
                if cost < *best {
                    *best = cost;
                }
            }
        }
        if left == 0 {
            return;
        }
        for &e in edges {
            seq.push(e);
            rec(n, d, edges, seq, x, y, length, anchored, left - 1, best);
            seq.pop();
        }
    }
    let mut best = INF;
    rec(n, d, edges, &mut Vec::new(), x, y, length, anchored, max_len, &mut best);
    best
}

/// `f × f` with the max metric, materialized, for product oracles.
pub fn product_instance(n: usize, d: &[f64], edges: &[(usize, usize)]) -> (usize, Vec<f64>, Vec<(usize, usize)>) {
    let m = n * n;
    let mut pd = vec![0.0; m * m];
    for u in 0..m {
        for v in 0..m {
            pd[u * m + v] = d[(u / n) * n + v / n].max(d[(u % n) * n + v % n]);
        }
    }
    let mut pe = Vec::new();
    for &(a1, b1) in edges {
        for &(a2, b2) in edges {
            pe.push((a1 * n + a2, b1 * n + b2));
        }
    }
    (m, pd, pe)
}

/// `ρ` (length) or `θ` (bound) from the diagonal base `(z, z)`, by product DP.
pub fn product_oracle(n: usize, d: &[f64], edges: &[(usize, usize)], z: usize, length: bool) -> Vec<f64> {
    let (m, pd, pe) = product_instance(n, d, edges);
    dp_barrier(m, &pd, &pe, z * n + z, length, false, 2 * m + 1)
}

/// Nodes reachable from `sources` in one step or more, by bitmask iteration.
pub fn reach_mask(n: usize, edges: &[(usize, usize)], sources: u64) -> u64 {
    let mut succ = vec![0u64; n];
    for &(a, b) in edges {
        succ[a] |= 1 << b;
    }
    let step = |s: u64| -> u64 { (0..n).filter(|&u| s >> u & 1 == 1).fold(0, |acc, u| acc | succ[u]) };
    let mut seen = step(sources);
    loop {
        let next = seen | step(seen);
        if next == seen {
            return seen;
        }
        seen = next;
    }
}

/// Strong connectivity by reachability.
pub fn strongly_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let all = (1u64 << n) - 1;
    (0..n).all(|x| reach_mask(n, edges, 1 << x) == all)
}

/// Period of a strongly connected digraph: gcd of `k ≤ n` with a closed walk of length `k`.
pub fn period_oracle(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a][b] = true;
    }
    let mut pow = adj.clone();
    let mut g = 0;
    for k in 1..=n {
        if (0..n).any(|i| pow[i][i]) {
            g = gcd(g, k);
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if pow[i][j] {
                    for l in 0..n {
                        if adj[j][l] {
                            next[i][l] = true;
                        }
                    }
                }
            }
        }
        pow = next;
    }
    g
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Every metric on `n` points with off-diagonal values from `values`.
pub fn all_metrics(n: usize, values: &[f64]) -> Vec<Vec<f64>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    let total = values.len().pow(pairs.len() as u32);
    for code in 0..total {
        let mut d = vec![0.0; n * n];
        let mut c = code;
        for &(i, j) in &pairs {
            let v = values[c % values.len()];
            c /= values.len();
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
        let ok = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| d[i * n + k] <= d[i * n + j] + d[j * n + k] + 1e-12)));
        if ok {
            out.push(d);
        }
    }
    out
}

pub fn edges_of(n: usize, mask: u64) -> Vec<(usize, usize)> {
    (0..n * n).filter(|&u| mask >> u & 1 == 1).map(|u| (u / n, u % n)).collect()
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Masks over `n²` bits with popcount in `1..=max_edges`, in increasing order.
pub fn masks(n: usize, max_edges: u32) -> impl Iterator<Item = u64> {
    let bits = n * n;
    let mut out = Vec::new();
    fn rec(start: usize, bits: usize, left: u32, cur: u64, out: &mut Vec<u64>) {
        if cur != 0 {
            out.push(cur);
        }
        if left == 0 {
            return;
        }
        for b in start..bits {
            rec(b + 1, bits, left - 1, cur | 1 << b, out);
        }
    }
    rec(0, bits, max_edges, 0, &mut out);
    out.sort_unstable();
    out.into_iter()
}

fn permute_mask(n: usize, mask: u64, p: &[usize]) -> u64 {
    let mut out = 0;
    let mut m = mask;
    while m != 0 {
        let u = m.trailing_zeros() as usize;
        m &= m - 1;
        out |= 1 << (p[u / n] * n + p[u % n]);
    }
    out
}

/// One representative (the smallest mask) per relabelling class.
pub fn canonical_masks(n: usize, max_edges: u32) -> Vec<u64> {
    let perms = permutations(n);
    masks(n, max_edges)
        .filter(|&m| perms.iter().all(|p| permute_mask(n, m, p) >= m))
        .collect()
}

pub fn relation(n: usize, edges: &[(usize, usize)]) -> FiniteRelation {
    FiniteRelation::new(n, edges.iter().copied()).unwrap()
}

pub fn space(n: usize, d: &[f64]) -> FiniteMetricSpace<f64> {
    FiniteMetricSpace::from_fn_unchecked(n, |i, j| d[i * n + j])
}

/// All maps `0..n → 0..n`.
pub fn all_maps(n: usize) -> Vec<Vec<usize>> {
    let total = n.pow(n as u32);
    (0..total)
        .map(|mut c| {
            (0..n)
                .map(|_| {
                    let v = c % n;
                    c /= n;
                    v
                })
                .collect()
        })
        .collect()
}

/// `𝒩` of a relation as an `n × n` boolean table, by transitive closure.
pub fn closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

pub fn same(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}
