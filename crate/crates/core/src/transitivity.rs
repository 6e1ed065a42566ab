//! Proximality, regional proximality, `R_n` and weak mixing for total
//! relations on finite sets.
//!
//! Closures are trivial on finite sets, so every object here is a
//! reachability question in the product digraph `f × f`. Reachability always
//! means one step or more.

use std::collections::VecDeque;

use serde::Serialize;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::metric::SizeCap;
use crate::relation::{reach, FiniteRelation};

fn product_digraph(f: &FiniteRelation, cap: SizeCap) -> Result<Digraph> {
    let n = f.n_points();
    SizeCap::check("product digraph", (n as u128) * (n as u128), cap.materialized)?;
    let mut edges = Vec::new();
    for x1 in 0..n {
        for x2 in 0..n {
            for &y1 in f.successors(x1) {
                for &y2 in f.successors(x2) {
                    edges.push((x1 * n + x2, y1 * n + y2));
                }
            }
        }
    }
    Ok(Digraph::from_edges(n * n, edges))
}

fn require_total(f: &FiniteRelation) -> Result<()> {
    if let Some(x) = (0..f.n_points()).find(|&x| f.successors(x).is_empty()) {
        return Err(Error::Hypothesis(format!("relation is not total: point {x} has no successor")));
    }
    Ok(())
}

fn require_transitive(f: &FiniteRelation) -> Result<()> {
    require_total(f)?;
    if !reach(f).nonwandering.is_total() {
        return Err(Error::Hypothesis("relation is not topologically transitive".into()));
    }
    Ok(())
}

fn pairs_to_relation(n: usize, marks: &[bool]) -> Result<FiniteRelation> {
    FiniteRelation::new(n, (0..n * n).filter(|&u| marks[u]).map(|u| (u / n, u % n)))
}

/// Nodes with a path of length at least one into `targets`.
fn reaching(g: &Digraph, targets: &[usize]) -> Vec<bool> {
    let back = g.transpose();
    let mut seen = vec![false; g.len()];
    let mut queue = VecDeque::new();
    for &t in targets {
        for &u in back.successors(t) {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in back.successors(v) {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen
}

/// `(Prox, Q)`: pairs whose product orbit meets the diagonal.
///
/// `Q` is computed by backward search from the diagonal, `Prox` from forward
/// orbit sets of every pair. They agree on finite sets.
pub fn prox_and_q(f: &FiniteRelation) -> Result<(FiniteRelation, FiniteRelation)> {
    prox_and_q_with_cap(f, SizeCap::from_env())
}

pub fn prox_and_q_with_cap(f: &FiniteRelation, cap: SizeCap) -> Result<(FiniteRelation, FiniteRelation)> {
    require_total(f)?;
    let n = f.n_points();
    let g = product_digraph(f, cap)?;
    let diagonal: Vec<usize> = (0..n).map(|x| x * n + x).collect();
    let q = reaching(&g, &diagonal);
    let prox: Vec<bool> = (0..n * n)
        .map(|u| {
            let seen = g.reachable(&[u]);
            diagonal.iter().any(|&v| seen[v])
        })
        .collect();
    Ok((pairs_to_relation(n, &prox)?, pairs_to_relation(n, &q)?))
}

/// Result of [`rn`].
#[derive(Clone, Debug, Serialize)]
pub struct RnResult {
    pub r_n: FiniteRelation,
    /// A point whose orbit set is everything, used as the single source.
    pub transitive_point: Option<usize>,
}

/// Pairs reachable from every diagonal pair.
pub fn rn(f: &FiniteRelation) -> Result<FiniteRelation> {
    Ok(rn_detailed(f, SizeCap::from_env())?.r_n)
}

pub fn rn_detailed(f: &FiniteRelation, cap: SizeCap) -> Result<RnResult> {
    require_transitive(f)?;
    let n = f.n_points();
    let g = product_digraph(f, cap)?;
    let orbits = reach(f).orbit_sets;
    let transitive_point = (0..n).find(|&x| orbits[x].len() == n);
    let marks = match (transitive_point, f.is_functional()) {
        (Some(x), true) => g.reachable(&[x * n + x]),
        _ => {
            let mut acc = vec![true; n * n];
            for x in 0..n {
                let r = g.reachable(&[x * n + x]);
                for (a, b) in acc.iter_mut().zip(r) {
                    *a &= b;
                }
            }
            acc
        }
    };
    Ok(RnResult {
        r_n: pairs_to_relation(n, &marks)?,
        transitive_point,
    })
}

/// Weak mixing verdict with the smallest missing pair as witness.
pub fn weak_mixing(f: &FiniteRelation) -> Result<(bool, Option<(usize, usize)>)> {
    let r = rn(f)?;
    let n = f.n_points();
    let witness = (0..n)
        .flat_map(|x| (0..n).map(move |y| (x, y)))
        .find(|&(x, y)| !r.contains(x, y));
    Ok((witness.is_none(), witness))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QInvariance {
    pub q_transitive: bool,
    pub q_invariant: bool,
    pub consistent: bool,
}

/// Compare "`Q` is transitive" with "`𝒩(f×f)(Q) = Q`".
pub fn q_invariance_check(f: &FiniteRelation) -> Result<QInvariance> {
    require_transitive(f)?;
    let cap = SizeCap::from_env();
    let (_, q) = prox_and_q_with_cap(f, cap)?;
    let n = f.n_points();
    let g = product_digraph(f, cap)?;
    let sources: Vec<usize> = q.edges().iter().map(|&(a, b)| a * n + b).collect();
    let image = pairs_to_relation(n, &g.reachable(&sources));
    let q_transitive = q.is_transitive();
    let q_invariant = image.map(|r| r == q).unwrap_or(false);
    Ok(QInvariance {
        q_transitive,
        q_invariant,
        consistent: q_transitive == q_invariant,
    })
}

/// Everything above in one report.
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct Section4Report {
    pub transitive: bool,
    /// Whether `f` is a map; several fields below are stated for maps only.
    pub functional: bool,
    pub prox: FiniteRelation,
    pub q: FiniteRelation,
    pub r_n: Option<FiniteRelation>,
    pub weak_mixing: Option<bool>,
    pub witness: Option<(usize, usize)>,
    pub q_transitive: Option<bool>,
    pub q_invariant: Option<bool>,
    pub consistent: Option<bool>,
}

impl Section4Report {
    /// Builds the report. Fails only if `f` is not total; the `R_n` fields are
    /// left empty when `f` is not transitive.
    pub fn compute(f: &FiniteRelation) -> Result<Self> {
        let (prox, q) = prox_and_q(f)?;
        let transitive = reach(f).nonwandering.is_total();
        let mut report = Section4Report {
            transitive,
            functional: f.is_functional(),
            prox,
            q,
            r_n: None,
            weak_mixing: None,
            witness: None,
            q_transitive: None,
            q_invariant: None,
            consistent: None,
        };
        if transitive {
            let r = rn(f)?;
            let (wm, witness) = weak_mixing(f)?;
            let inv = q_invariance_check(f)?;
            report.r_n = Some(r);
            report.weak_mixing = Some(wm);
            report.witness = witness;
            report.q_transitive = Some(inv.q_transitive);
            report.q_invariant = Some(inv.q_invariant);
            report.consistent = Some(inv.consistent);
        }
        Ok(report)
    }

    /// Like [`Section4Report::compute`] but a non-transitive relation is an error.
    pub fn compute_strict(f: &FiniteRelation) -> Result<Self> {
        require_transitive(f)?;
        Self::compute(f)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap() -> FiniteRelation {
        FiniteRelation::from_map(&[1, 0]).unwrap()
    }

    #[test]
    fn swap_examples() {
        let (prox, q) = prox_and_q(&swap()).unwrap();
        assert_eq!(q, FiniteRelation::identity(2).unwrap());
        assert_eq!(prox, q);
        assert_eq!(rn(&swap()).unwrap(), FiniteRelation::identity(2).unwrap());
        assert_eq!(weak_mixing(&swap()).unwrap(), (false, Some((0, 1))));
        let c = q_invariance_check(&swap()).unwrap();
        assert!(c.q_transitive && c.q_invariant && c.consistent);
    }

    #[test]
    fn complete_examples() {
        let f = FiniteRelation::complete(2).unwrap();
        let (_, q) = prox_and_q(&f).unwrap();
        assert!(q.is_total());
        assert!(rn(&f).unwrap().is_total());
        assert_eq!(weak_mixing(&f).unwrap(), (true, None));
        assert!(q_invariance_check(&f).unwrap().consistent);
    }

    #[test]
    fn identity_and_cycle() {
        let id = FiniteRelation::identity(3).unwrap();
        assert_eq!(prox_and_q(&id).unwrap().1, id);
        assert!(matches!(rn(&id), Err(Error::Hypothesis(_))));
        let c3 = FiniteRelation::from_map(&[1, 2, 0]).unwrap();
        assert_eq!(rn(&c3).unwrap(), id);
        assert_eq!(weak_mixing(&c3).unwrap().1, Some((0, 1)));
    }

    #[test]
    fn non_total_is_rejected() {
        let f = FiniteRelation::new(2, [(0, 1)]).unwrap();
        assert!(matches!(prox_and_q(&f), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn report_json() {
        let r = Section4Report::compute(&swap()).unwrap();
        let j = r.to_json().unwrap();
        assert!(j.contains("\"weak_mixing\": false"));
        assert!(j.contains("\"witness\": [\n    0,\n    1\n  ]"));
    }
}
