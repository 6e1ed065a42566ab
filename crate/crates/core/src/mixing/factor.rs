//! Cyclic and isometric factors that explain a failure of mixing.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::chains::epsilon_chain_graph;
use crate::error::{Error, Result};
use crate::metric::{quotient_by_zero_set, DistanceTable, FiniteMetricSpace, PseudoMetricTable};
use crate::relation::FiniteRelation;
use crate::scalar::{serde_scalar, Scalar};

use super::period::not_ct;
use super::pseudo::isometry_defect;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    /// Rotation of `Z/p` read off the period of `G_ε`.
    Cyclic,
    /// Collapse of the zero set of `ρ` or `θ`; the induced map is a bijection.
    Isometric,
    /// Everything collapsed to one class.
    Trivial,
}

/// A factor system on a partition of the points.
#[derive(Clone, Debug, Serialize)]
pub struct QuotientSystem<T: Scalar> {
    pub factor_kind: FactorKind,
    /// Classes ordered by smallest member (by residue for cyclic factors).
    pub partition: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    #[serde(skip)]
    pub quotient_distances: PseudoMetricTable<T>,
    pub induced_relation: FiniteRelation,
    #[serde(with = "serde_scalar::option")]
    pub isometry_defect: Option<T>,
    /// Smallest distance between points of different classes.
    #[serde(with = "serde_scalar::option")]
    pub min_interclass: Option<T>,
}

impl<T: Scalar> QuotientSystem<T> {
    pub fn class_count(&self) -> usize {
        self.partition.len()
    }

    pub fn to_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Out<'a, T: Scalar> {
            #[serde(flatten)]
            sys: &'a QuotientSystem<T>,
            #[serde(with = "serde_scalar::table")]
            quotient_distances: Vec<Vec<T>>,
            quotient_is_ultrametric: bool,
        }
        Ok(serde_json::to_string_pretty(&Out {
            sys: self,
            quotient_distances: self.quotient_distances.table.rows(),
            quotient_is_ultrametric: self.quotient_distances.is_ultrametric,
        })?)
    }

    /// Reads the form written by [`QuotientSystem::to_json`].
    pub fn from_json(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct In<T: Scalar> {
            factor_kind: FactorKind,
            partition: Vec<Vec<usize>>,
            class_of: Vec<usize>,
            induced_relation: FiniteRelation,
            #[serde(with = "serde_scalar::option")]
            isometry_defect: Option<T>,
            #[serde(with = "serde_scalar::option")]
            min_interclass: Option<T>,
            #[serde(with = "serde_scalar::table")]
            quotient_distances: Vec<Vec<T>>,
            #[serde(default)]
            quotient_is_ultrametric: bool,
        }
        let r: In<T> = serde_json::from_str(s)?;
        let k = r.partition.len();
        if r.quotient_distances.len() != k || r.induced_relation.n_points() != k {
            return Err(Error::Shape(format!("{k} classes but tables of another size")));
        }
        Ok(QuotientSystem {
            factor_kind: r.factor_kind,
            partition: r.partition,
            class_of: r.class_of,
            quotient_distances: PseudoMetricTable::new(
                DistanceTable::from_rows(&r.quotient_distances)?,
                r.quotient_is_ultrametric,
            ),
            induced_relation: r.induced_relation,
            isometry_defect: r.isometry_defect,
            min_interclass: r.min_interclass,
        })
    }
}

/// `Z/p` factor of `f` at scale `ε`, with `p` the period of `G_ε`.
///
/// Residues are BFS levels modulo `p` on the core; points outside the core take
/// the residue one less than that of their successors. Quotient distances are
/// the minimum of `d` between classes.
pub fn cyclic_factor<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    eps: T,
) -> Result<QuotientSystem<T>> {
    let n = d.len();
    if f.n_points() != n {
        return Err(Error::Shape(format!("relation on {} points, metric on {n}", f.n_points())));
    }
    let g = epsilon_chain_graph(f, d, eps);
    let core = g.core().ok_or_else(|| not_ct(&g, eps))?;
    let (p, levels) = g.period_of(&core).ok_or_else(|| not_ct(&g, eps))?;
    if p == 1 {
        return Err(Error::NoFactor);
    }
    let mut residue: Vec<Option<usize>> = vec![None; n];
    let mut queue = VecDeque::new();
    for &u in &core {
        residue[u] = levels[u].map(|l| l % p);
        queue.push_back(u);
    }
    let back = g.transpose();
    while let Some(v) = queue.pop_front() {
        let rv = residue[v].expect("queued nodes are labelled");
        for &u in back.successors(v) {
            if residue[u].is_none() {
                residue[u] = Some((rv + p - 1) % p);
                queue.push_back(u);
            }
        }
    }
    let residue: Vec<usize> = residue
        .into_iter()
        .enumerate()
        .map(|(u, r)| r.ok_or_else(|| Error::InconsistentQuotient(format!("point {u} does not reach the core"))))
        .collect::<Result<_>>()?;
    for (u, v) in g.edges() {
        if residue[v] != (residue[u] + 1) % p {
            return Err(Error::InconsistentQuotient(format!(
                "edge {u} -> {v} does not advance the residue mod {p}"
            )));
        }
    }
    let mut partition = vec![Vec::new(); p];
    for (u, &r) in residue.iter().enumerate() {
        partition[r].push(u);
    }
    let mut q = vec![vec![T::infinity(); p]; p];
    for x in 0..n {
        for y in 0..n {
            let (a, b) = (residue[x], residue[y]);
            q[a][b] = q[a][b].min(d.dist(x, y));
        }
    }
    let min_interclass = (0..p)
        .flat_map(|a| (0..p).filter(move |&b| b != a).map(move |b| (a, b)))
        .map(|(a, b)| q[a][b])
        .reduce(T::min);
    let table = DistanceTable::from_fn(p, |a, b| if a == b { T::zero() } else { q[a][b] });
    let quotient_distances = PseudoMetricTable::new(table, false);
    let induced_relation = FiniteRelation::new(p, (0..p).map(|r| (r, (r + 1) % p)))?;
    let defect = isometry_defect(&induced_relation, &quotient_distances);
    Ok(QuotientSystem {
        factor_kind: FactorKind::Cyclic,
        partition,
        class_of: residue,
        quotient_distances,
        induced_relation,
        isometry_defect: Some(defect),
        min_interclass,
    })
}

/// Factor of `f` by the zero set of a pseudo-metric (`ρ` or `θ`).
///
/// The induced relation must be single valued on classes, and a bijection
/// whenever more than one class remains.
pub fn quotient_factor<T: Scalar>(
    f: &FiniteRelation,
    pseudo: &PseudoMetricTable<T>,
    numerical_zero: T,
) -> Result<QuotientSystem<T>> {
    let n = pseudo.len();
    if f.n_points() != n {
        return Err(Error::Shape(format!("relation on {} points, pseudo-metric on {n}", f.n_points())));
    }
    let z = quotient_by_zero_set(pseudo, numerical_zero);
    let k = z.partition.len();
    let mut image: Vec<Option<usize>> = vec![None; k];
    for &(a, b) in f.edges() {
        let (ca, cb) = (z.class_of[a], z.class_of[b]);
        match image[ca] {
            None => image[ca] = Some(cb),
            Some(c) if c == cb => {}
            Some(c) => {
                return Err(Error::InconsistentQuotient(format!(
                    "class {ca} maps to both {c} and {cb}"
                )))
            }
        }
    }
    let image: Vec<usize> = image
        .into_iter()
        .enumerate()
        .map(|(c, i)| i.ok_or_else(|| Error::InconsistentQuotient(format!("class {c} has no image"))))
        .collect::<Result<_>>()?;
    let kind = if k == 1 {
        FactorKind::Trivial
    } else {
        let mut hit = vec![false; k];
        for &c in &image {
            if std::mem::replace(&mut hit[c], true) {
                return Err(Error::InconsistentQuotient(format!("induced map is not injective at class {c}")));
            }
        }
        FactorKind::Isometric
    };
    let induced_relation = FiniteRelation::from_map(&image)?;
    let defect = isometry_defect(&induced_relation, &z.quotient);
    Ok(QuotientSystem {
        factor_kind: kind,
        partition: z.partition,
        class_of: z.class_of,
        quotient_distances: z.quotient,
        induced_relation,
        isometry_defect: Some(defect),
        min_interclass: z.min_interclass,
    })
}
