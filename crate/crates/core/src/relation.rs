//! Closed relations on finite point sets.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::SizeCap;

/// A nonempty relation `f ⊆ X × X` on points `0..n`.
///
/// Edges are kept as a sorted pair list and as a forward star.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteRelation {
    n: usize,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl std::fmt::Debug for FiniteRelation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteRelation")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

impl Serialize for FiniteRelation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RelationFile {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FiniteRelation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RelationFile::deserialize(d)?;
        FiniteRelation::new(raw.n, raw.edges.into_iter().map(|[a, b]| (a, b))).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct RelationFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Surjectivity {
    /// Every point has an outgoing edge.
    pub dom_full: bool,
    /// Every point has an incoming edge.
    pub codom_full: bool,
}

impl FiniteRelation {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut edges: Vec<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
            return Err(Error::Shape(format!("edge ({a},{b}) out of range for {n} points")));
        }
        if edges.is_empty() {
            return Err(Error::EmptyRelation("relation has no edges".into()));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Self::from_sorted(n, edges))
    }

    fn from_sorted(n: usize, edges: Vec<(usize, usize)>) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(a, _) in &edges {
            offsets[a + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let targets = edges.iter().map(|&(_, b)| b).collect();
        FiniteRelation {
            n,
            edges,
            offsets,
            targets,
        }
    }

    /// The identity relation `1_X`.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, (0..n).map(|i| (i, i)))
    }

    /// All of `X × X`.
    pub fn complete(n: usize) -> Result<Self> {
        Self::new(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))))
    }

    /// Graph of a map given as an image table.
    pub fn from_map(map: &[usize]) -> Result<Self> {
        Self::new(map.len(), map.iter().copied().enumerate())
    }

    #[inline]
    pub fn n_points(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    /// Always false: relations are nonempty by construction.
    #[inline]
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    #[inline]
    pub fn successors(&self, a: usize) -> &[usize] {
        &self.targets[self.offsets[a]..self.offsets[a + 1]]
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        a < self.n && self.successors(a).binary_search(&b).is_ok()
    }

    /// Every point has exactly one successor.
    pub fn is_functional(&self) -> bool {
        (0..self.n).all(|a| self.successors(a).len() == 1)
    }

    /// Image table of a functional relation.
    pub fn as_map(&self) -> Result<Vec<usize>> {
        (0..self.n)
            .map(|a| match self.successors(a) {
                [b] => Ok(*b),
                s => Err(Error::NotFunctional(format!(
                    "point {a} has {} successors",
                    s.len()
                ))),
            })
            .collect()
    }

    pub fn is_subset_of(&self, other: &FiniteRelation) -> bool {
        self.n == other.n && self.edges.iter().all(|&(a, b)| other.contains(a, b))
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges.iter().all(|&(a, b)| self.contains(b, a))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.n).all(|a| self.contains(a, a))
    }

    pub fn is_transitive(&self) -> bool {
        self.edges
            .iter()
            .all(|&(a, b)| self.successors(b).iter().all(|&c| self.contains(a, c)))
    }

    /// `X × X`.
    pub fn is_total(&self) -> bool {
        self.edges.len() == self.n * self.n
    }

    pub fn surjectivity(&self) -> Surjectivity {
        let mut has_in = vec![false; self.n];
        for &(_, b) in &self.edges {
            has_in[b] = true;
        }
        Surjectivity {
            dom_full: (0..self.n).all(|a| !self.successors(a).is_empty()),
            codom_full: has_in.into_iter().all(|x| x),
        }
    }

    /// `f(A)` for a set of points.
    pub fn image(&self, set: &[usize]) -> Vec<usize> {
        let mut mark = vec![false; self.n];
        for &a in set {
            for &b in self.successors(a) {
                mark[b] = true;
            }
        }
        (0..self.n).filter(|&b| mark[b]).collect()
    }

    pub fn union(&self, other: &FiniteRelation) -> Result<FiniteRelation> {
        check_same_space(self, other)?;
        FiniteRelation::new(self.n, self.edges.iter().chain(&other.edges).copied())
    }

    pub fn intersection(&self, other: &FiniteRelation) -> Result<FiniteRelation> {
        check_same_space(self, other)?;
        FiniteRelation::new(
            self.n,
            self.edges.iter().copied().filter(|&(a, b)| other.contains(a, b)),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let file = RelationFile {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: RelationFile = serde_json::from_str(s)?;
        Self::new(file.n, file.edges.into_iter().map(|[a, b]| (a, b)))
    }

    /// Edge list with header `from,to`. The point count is one more than the
    /// largest index unless given explicitly.
    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["from", "to"])?;
        for &(a, b) in &self.edges {
            wtr.write_record([a.to_string(), b.to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn from_csv<R: Read>(r: R, n: Option<usize>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "from" || &headers[1] != "to" {
            return Err(Error::Parse("edge-list CSV must have header 'from,to'".into()));
        }
        let mut edges = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad point index '{s}'")))
            };
            edges.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        let inferred = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Self::new(n.unwrap_or(inferred), edges)
    }

    /// Loads `.json` or `.csv` by extension.
    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::from_csv(std::fs::File::open(path)?, None),
            _ => Self::from_json(&std::fs::read_to_string(path)?),
        }
    }
}

fn check_same_space(a: &FiniteRelation, b: &FiniteRelation) -> Result<()> {
    if a.n != b.n {
        return Err(Error::Shape(format!(
            "relations live on {} and {} points",
            a.n, b.n
        )));
    }
    Ok(())
}

/// `g ∘ f = {(x, z) : ∃y, (x, y) ∈ f, (y, z) ∈ g}`.
pub fn compose(g: &FiniteRelation, f: &FiniteRelation) -> Result<FiniteRelation> {
    check_same_space(g, f)?;
    let mut out = Vec::new();
    for x in 0..f.n {
        let mut seen = vec![false; f.n];
        for &y in f.successors(x) {
            for &z in g.successors(y) {
                if !seen[z] {
                    seen[z] = true;
                    out.push((x, z));
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyRelation("composition is empty".into()));
    }
    FiniteRelation::new(f.n, out)
}

/// `f⁻¹`.
pub fn invert(f: &FiniteRelation) -> FiniteRelation {
    let mut edges: Vec<(usize, usize)> = f.edges.iter().map(|&(a, b)| (b, a)).collect();
    edges.sort_unstable();
    FiniteRelation::from_sorted(f.n, edges)
}

/// `f × g` on the product set, pair `(x1, x2)` encoded as `x1 * |g| + x2`.
pub fn product(f: &FiniteRelation, g: &FiniteRelation, cap: SizeCap) -> Result<FiniteRelation> {
    let points = f.n as u128 * g.n as u128;
    SizeCap::check("product relation", points, cap.materialized)?;
    let mut edges = Vec::with_capacity(f.len() * g.len());
    for &(x1, y1) in &f.edges {
        for &(x2, y2) in &g.edges {
            edges.push((x1 * g.n + x2, y1 * g.n + y2));
        }
    }
    edges.sort_unstable();
    Ok(FiniteRelation::from_sorted(points as usize, edges))
}

/// `f^(n)`, the n-fold product with itself.
pub fn power(f: &FiniteRelation, n: usize, cap: SizeCap) -> Result<FiniteRelation> {
    if n == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    let points = (f.n as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    SizeCap::check("power relation", points, cap.materialized)?;
    let mut acc = f.clone();
    for _ in 1..n {
        acc = product(&acc, f, cap)?;
    }
    Ok(acc)
}

/// Points reachable from `x` in at least one step.
pub fn orbit_set(f: &FiniteRelation, x: usize) -> Vec<usize> {
    reachable_from(f, &[x])
}

/// Points reachable in at least one step from some point of `sources`.
pub fn reachable_from(f: &FiniteRelation, sources: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; f.n];
    let mut queue = VecDeque::new();
    for &s in sources {
        for &b in f.successors(s) {
            if !seen[b] {
                seen[b] = true;
                queue.push_back(b);
            }
        }
    }
    while let Some(u) = queue.pop_front() {
        for &v in f.successors(u) {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    (0..f.n).filter(|&v| seen[v]).collect()
}

/// Result of [`reach`]: the nonwandering relation and per-point orbit sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Reach {
    pub nonwandering: FiniteRelation,
    pub orbit_sets: Vec<Vec<usize>>,
}

/// `𝒩f = ∪_{n≥1} fⁿ` and `ℛf(x) = ∪_{n≥1} fⁿ(x)`. The identity is not added.
pub fn reach(f: &FiniteRelation) -> Reach {
    let orbit_sets: Vec<Vec<usize>> = (0..f.n).into_par_iter().map(|x| orbit_set(f, x)).collect();
    let edges: Vec<(usize, usize)> = orbit_sets
        .iter()
        .enumerate()
        .flat_map(|(x, s)| s.iter().map(move |&y| (x, y)))
        .collect();
    Reach {
        nonwandering: FiniteRelation::from_sorted(f.n, edges),
        orbit_sets,
    }
}
