//! Finite metric and pseudo-metric spaces.
//!
//! Distances are stored row-major in a dense table. Every comparison that
//! could be affected by rounding takes an explicit tolerance.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{format_scalar, parse_scalar, Scalar};

/// Magic prefix of the binary distance-table container.
pub const BINARY_MAGIC: &[u8; 5] = b"CSMS1";

/// Default cap on the number of points of a materialized power space.
pub const DEFAULT_SIZE_CAP: usize = 250_000;

/// Default cap on the number of points of an implicit product graph search.
pub const DEFAULT_PRODUCT_SEARCH_CAP: usize = 1 << 22;

/// Environment variable overriding both size caps.
pub const SIZE_CAP_ENV: &str = "CHAINSCOPE_SIZE_CAP";

/// Point-count limits for product constructions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SizeCap {
    /// Materialized spaces and relations (tables are N² entries).
    pub materialized: usize,
    /// Implicit product graphs explored by single-source searches.
    pub product_search: usize,
}

impl Default for SizeCap {
    fn default() -> Self {
        SizeCap {
            materialized: DEFAULT_SIZE_CAP,
            product_search: DEFAULT_PRODUCT_SEARCH_CAP,
        }
    }
}

impl SizeCap {
    /// Defaults, overridden by `CHAINSCOPE_SIZE_CAP` when it is set to a positive integer.
    pub fn from_env() -> Self {
        match std::env::var(SIZE_CAP_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
            Some(cap) if cap > 0 => SizeCap {
                materialized: cap,
                product_search: cap,
            },
            _ => SizeCap::default(),
        }
    }

    pub fn uniform(cap: usize) -> Self {
        SizeCap {
            materialized: cap,
            product_search: cap,
        }
    }

    pub(crate) fn check(what: &str, needed: u128, cap: usize) -> Result<()> {
        if needed > cap as u128 {
            Err(Error::Capacity {
                what: what.to_string(),
                needed,
                cap,
            })
        } else {
            Ok(())
        }
    }
}

/// Dense symmetric N×N table.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceTable<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DistanceTable<T> {
    /// Builds a table from rows, checking shape and finiteness only.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::Shape(format!(
                    "row {i} has {} entries, expected {n}",
                    r.len()
                )));
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Shape(format!("entry ({i},{j}) is not finite")));
                }
            }
            data.extend_from_slice(r);
        }
        Ok(DistanceTable { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T + Sync) -> Self {
        let data = (0..n * n).into_par_iter().map(|k| f(k / n, k % n)).collect();
        DistanceTable { n, data }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest entry.
    pub fn max_value(&self) -> T {
        self.data.iter().copied().fold(T::zero(), T::max)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DistanceTable {
            n: self.n,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// Validation report for a distance table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricReport<T: Scalar> {
    pub is_pseudo_metric: bool,
    pub is_metric: bool,
    pub is_ultrametric: bool,
    /// Largest violation of any pseudo-metric axiom (0 when all hold).
    #[serde(with = "crate::scalar::serde_scalar")]
    pub worst_violation: T,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub diagonal_violation: T,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub symmetry_violation: T,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub negativity_violation: T,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub triangle_violation: T,
    #[serde(with = "crate::scalar::serde_scalar")]
    pub ultrametric_violation: T,
    /// Smallest off-diagonal entry, `None` for a one-point space.
    #[serde(with = "crate::scalar::serde_scalar::option")]
    pub min_off_diagonal: Option<T>,
}

/// Checks the (pseudo-/ultra-)metric axioms with a full N³ sweep.
pub fn check_metric<T: Scalar>(table: &DistanceTable<T>, tol: T) -> MetricReport<T> {
    let n = table.len();
    let zero = T::zero();
    #[derive(Clone, Copy)]
    struct Acc<T> {
        diag: T,
        sym: T,
        neg: T,
        tri: T,
        ultra: T,
        min_off: Option<T>,
    }
    let row_acc = |i: usize| {
        let mut a = Acc {
            diag: table.get(i, i).abs(),
            sym: zero,
            neg: zero,
            tri: zero,
            ultra: zero,
            min_off: None,
        };
        let ri = table.row(i);
        for j in 0..n {
            let dij = ri[j];
            a.sym = a.sym.max((dij - table.get(j, i)).abs());
            a.neg = a.neg.max(-dij);
            if i != j {
                a.min_off = Some(a.min_off.map_or(dij, |m: T| m.min(dij)));
            }
            let rj = table.row(j);
            for k in 0..n {
                let dik = ri[k];
                let djk = rj[k];
                a.tri = a.tri.max(dik - dij - djk);
                a.ultra = a.ultra.max(dik - dij.max(djk));
            }
        }
        a
    };
    let merged = (0..n).into_par_iter().map(row_acc).reduce_with(|a, b| Acc {
        diag: a.diag.max(b.diag),
        sym: a.sym.max(b.sym),
        neg: a.neg.max(b.neg),
        tri: a.tri.max(b.tri),
        ultra: a.ultra.max(b.ultra),
        min_off: match (a.min_off, b.min_off) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        },
    });
    let acc = merged.unwrap_or(Acc {
        diag: zero,
        sym: zero,
        neg: zero,
        tri: zero,
        ultra: zero,
        min_off: None,
    });
    let worst = acc.diag.max(acc.sym).max(acc.neg).max(acc.tri);
    let is_pseudo = worst <= tol;
    MetricReport {
        is_pseudo_metric: is_pseudo,
        is_metric: is_pseudo && acc.min_off.is_none_or(|m| m > zero),
        is_ultrametric: is_pseudo && acc.ultra <= tol,
        worst_violation: worst,
        diagonal_violation: acc.diag,
        symmetry_violation: acc.sym,
        negativity_violation: acc.neg,
        triangle_violation: acc.tri,
        ultrametric_violation: acc.ultra,
        min_off_diagonal: acc.min_off,
    }
}

/// A finite pseudo-metric space `(X, d)` with labeled points.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace<T> {
    labels: Vec<String>,
    table: DistanceTable<T>,
}

impl<T: Scalar> FiniteMetricSpace<T> {
    /// Validating constructor: the table must be a pseudo-metric within
    /// [`Scalar::triangle_tolerance`].
    pub fn new(labels: Vec<String>, rows: &[Vec<T>]) -> Result<Self> {
        Self::with_tolerance(labels, rows, T::triangle_tolerance())
    }

    pub fn with_tolerance(labels: Vec<String>, rows: &[Vec<T>], tol: T) -> Result<Self> {
        let table = DistanceTable::from_rows(rows)?;
        if labels.len() != table.len() {
            return Err(Error::Shape(format!(
                "{} labels for {} points",
                labels.len(),
                table.len()
            )));
        }
        if table.is_empty() {
            return Err(Error::Shape("metric space has no points".into()));
        }
        let report = check_metric(&table, tol);
        if !report.is_pseudo_metric {
            return Err(Error::InvalidParameter(format!(
                "distance table is not a pseudo-metric (worst violation {})",
                report.worst_violation
            )));
        }
        Ok(FiniteMetricSpace { labels, table })
    }

    /// Wraps a table produced by a closed-form metric. Callers vouch for the axioms.
    pub fn from_table_unchecked(labels: Vec<String>, table: DistanceTable<T>) -> Self {
        assert_eq!(labels.len(), table.len(), "label count must match table size");
        FiniteMetricSpace { labels, table }
    }

    pub fn from_fn_unchecked(n: usize, f: impl Fn(usize, usize) -> T + Sync) -> Self {
        Self::from_table_unchecked(default_labels(n), DistanceTable::from_fn(n, f))
    }

    /// Discrete metric on `n` points: 1 between distinct points.
    pub fn discrete(n: usize) -> Self {
        Self::from_fn_unchecked(n, |i, j| if i == j { T::zero() } else { T::one() })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> T {
        self.table.get(i, j)
    }

    pub fn table(&self) -> &DistanceTable<T> {
        &self.table
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn report(&self) -> MetricReport<T> {
        check_metric(&self.table, T::triangle_tolerance())
    }

    /// Multiplies every distance by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Self {
        FiniteMetricSpace {
            labels: self.labels.clone(),
            table: self.table.map(|x| x * factor),
        }
    }

    /// `k` nearest other points of each point, ties broken by index.
    pub fn nearest_neighbors(&self, k: usize) -> Vec<Vec<usize>> {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
                others.sort_by(|&a, &b| {
                    self.dist(i, a)
                        .partial_cmp(&self.dist(i, b))
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(a.cmp(&b))
                });
                others.truncate(k);
                others.sort_unstable();
                others
            })
            .collect()
    }

    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(&self.labels)?;
        for i in 0..self.len() {
            wtr.write_record(self.table.row(i).iter().map(|&x| format_scalar(x)))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let labels: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec.iter().map(parse_scalar::<T>).collect::<Result<Vec<T>>>()?;
            rows.push(row);
        }
        Self::new(labels, &rows)
    }

    pub fn write_csv_file(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_csv(std::fs::File::create(path)?)
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    /// Binary container: `CSMS1`, little-endian `u32` N, then N² `f64` row-major.
    /// Labels are not stored; loading assigns `0..N`.
    pub fn to_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let n = u32::try_from(self.len())
            .map_err(|_| Error::Shape("too many points for the binary container".into()))?;
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&n.to_le_bytes())?;
        for i in 0..self.len() {
            for &x in self.table.row(i) {
                w.write_all(&x.as_f64().to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn from_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Parse("bad magic in binary distance table".into()));
        }
        let mut nb = [0u8; 4];
        r.read_exact(&mut nb)?;
        let n = u32::from_le_bytes(nb) as usize;
        let mut rows = vec![Vec::with_capacity(n); n];
        let mut buf = [0u8; 8];
        for row in rows.iter_mut() {
            for _ in 0..n {
                r.read_exact(&mut buf)?;
                let v = f64::from_le_bytes(buf);
                row.push(T::from_f64(v).ok_or_else(|| Error::Parse("value not representable".into()))?);
            }
        }
        Self::new(default_labels(n), &rows)
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// `d^(n)` on the n-fold product: coordinatewise maximum.
///
/// Tuples are indexed row-major, first coordinate most significant.
pub fn power_metric<T: Scalar>(
    d: &FiniteMetricSpace<T>,
    n: usize,
    cap: SizeCap,
) -> Result<FiniteMetricSpace<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    let base = d.len();
    let points = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    SizeCap::check("power metric", points, cap.materialized)?;
    if n == 1 {
        return Ok(d.clone());
    }
    let m = points as usize;
    let decode = |mut k: usize| {
        let mut coords = vec![0usize; n];
        for slot in coords.iter_mut().rev() {
            *slot = k % base;
            k /= base;
        }
        coords
    };
    let tuples: Vec<Vec<usize>> = (0..m).map(decode).collect();
    let labels = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t.iter().map(|&c| d.labels[c].as_str()).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let table = DistanceTable::from_fn(m, |i, j| {
        tuples[i]
            .iter()
            .zip(&tuples[j])
            .fold(T::zero(), |acc, (&a, &b)| acc.max(d.dist(a, b)))
    });
    Ok(FiniteMetricSpace::from_table_unchecked(labels, table))
}

/// A pseudo-metric table, optionally claimed to be a pseudo-ultrametric.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoMetricTable<T> {
    pub table: DistanceTable<T>,
    pub is_ultrametric: bool,
}

impl<T: Scalar> PseudoMetricTable<T> {
    pub fn new(table: DistanceTable<T>, is_ultrametric: bool) -> Self {
        PseudoMetricTable {
            table,
            is_ultrametric,
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.table.get(i, j)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn max_value(&self) -> T {
        self.table.max_value()
    }

    /// Checks the axioms, including the ultrametric inequality when claimed.
    pub fn validate(&self, tol: T) -> MetricReport<T> {
        check_metric(&self.table, tol)
    }

    /// Pairs at distance `< eps` (open ball relation).
    pub fn ball_open(&self, eps: T) -> Vec<(usize, usize)> {
        self.pairs_where(|v| v < eps)
    }

    /// Pairs at distance `<= eps` (closed ball relation).
    pub fn ball_closed(&self, eps: T) -> Vec<(usize, usize)> {
        self.pairs_where(|v| v <= eps)
    }

    fn pairs_where(&self, keep: impl Fn(T) -> bool) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| keep(self.get(i, j)))
            .collect()
    }

    pub fn to_space(&self) -> FiniteMetricSpace<T> {
        FiniteMetricSpace::from_table_unchecked(default_labels(self.len()), self.table.clone())
    }
}

/// Result of collapsing the zero set of a pseudo-metric.
#[derive(Clone, Debug)]
pub struct ZeroSetQuotient<T> {
    /// Classes in order of their smallest member; members ascending.
    pub partition: Vec<Vec<usize>>,
    pub class_of: Vec<usize>,
    /// Distance between classes: minimum over representatives.
    pub quotient: PseudoMetricTable<T>,
    /// Smallest distance between points in different classes. A value close to
    /// `numerical_zero` means the partition is under-resolved.
    pub min_interclass: Option<T>,
}

/// Connected components of `{(i, j) : rho(i, j) <= numerical_zero}` and the
/// induced quotient distances.
pub fn quotient_by_zero_set<T: Scalar>(
    rho: &PseudoMetricTable<T>,
    numerical_zero: T,
) -> ZeroSetQuotient<T> {
    let n = rho.len();
    let mut uf = crate::unionfind::UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rho.get(i, j) <= numerical_zero || rho.get(j, i) <= numerical_zero {
                uf.union(i, j);
            }
        }
    }
    let (partition, class_of) = uf.classes();
    let k = partition.len();
    let mut q = vec![vec![T::infinity(); k]; k];
    let mut min_inter: Option<T> = None;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (class_of[i], class_of[j]);
            if a == b {
                continue;
            }
            let v = rho.get(i, j);
            if v < q[a][b] {
                q[a][b] = v;
            }
            min_inter = Some(min_inter.map_or(v, |m: T| m.min(v)));
        }
    }
    for (a, row) in q.iter_mut().enumerate() {
        row[a] = T::zero();
    }
    let table = DistanceTable::from_fn(k, |a, b| q[a][b].min(q[b][a]));
    ZeroSetQuotient {
        partition,
        class_of,
        quotient: PseudoMetricTable::new(table, rho.is_ultrametric),
        min_interclass: min_inter,
    }
}

/// Arc-length metric of the unit circle at grid spacing `1/n`.
pub(crate) fn arc_steps(i: usize, j: usize, n: usize) -> usize {
    let diff = i.abs_diff(j) % n;
    diff.min(n - diff)
}
