//! Grid discretizations of circle maps, `d_f` estimation, distortion ratios
//! and refinement studies.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::metric::{arc_steps, DistanceTable, FiniteMetricSpace, PseudoMetricTable};
use crate::mixing::{
    analyze_scale, classify_instances, product_pseudometric, resolving_epsilon, Classification,
    ClassifyOptions, ProductOptions, ScaleInstance, Trend,
};
use crate::relation::FiniteRelation;
use crate::scalar::{format_scalar, Mode, Scalar};

/// `(√5 − 1) / 2`.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Default `ε` for a grid, in grid steps.
pub const DEFAULT_EPS_FACTOR: f64 = 2.0;

/// Default numerical zero for a grid, in grid steps.
pub const DEFAULT_ZERO_FACTOR: f64 = 3.0;

/// Slack added to the outer-scheme radius.
const OUTER_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Alpha {
    Golden,
    Value(f64),
}

impl Alpha {
    pub fn value(self) -> f64 {
        match self {
            Alpha::Golden => GOLDEN,
            Alpha::Value(a) => a,
        }
    }
}

impl std::str::FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "golden" {
            return Ok(Alpha::Golden);
        }
        s.parse::<f64>()
            .map(Alpha::Value)
            .map_err(|_| Error::Parse(format!("alpha must be a number or 'golden', got '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemKind {
    /// `x ↦ x + α`. With `minimal`, the grid shift is the integer nearest
    /// `αN` that is coprime to `N`, so the discrete map is a single cycle.
    Rotation { alpha: Alpha, minimal: bool },
    /// `x ↦ 2x`.
    Doubling,
    /// Image positions in `[0, 1)` of the grid nodes.
    GridMap { images: Vec<f64>, source: Option<PathBuf> },
    /// A finite instance passed through unchanged.
    FiniteRelation { relation: FiniteRelation, source: Option<PathBuf> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MetricKind {
    Arc,
    SqrtDistorted,
    Discrete,
    Table(PathBuf),
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arc" => Ok(MetricKind::Arc),
            "sqrt_distorted" | "sqrt-distorted" => Ok(MetricKind::SqrtDistorted),
            "discrete" => Ok(MetricKind::Discrete),
            other => Err(Error::Parse(format!("unknown metric '{other}'"))),
        }
    }
}

impl MetricKind {
    fn name(&self) -> &'static str {
        match self {
            MetricKind::Arc => "arc",
            MetricKind::SqrtDistorted => "sqrt_distorted",
            MetricKind::Discrete => "discrete",
            MetricKind::Table(_) => "table",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Scheme {
    Nearest,
    /// Relate each node to every node within `L·h/2 + h/2` of its image.
    Outer { lipschitz: f64 },
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    /// `nearest`, `outer:L` or `outer(L)`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "nearest" {
            return Ok(Scheme::Nearest);
        }
        let inner = s
            .strip_prefix("outer:")
            .or_else(|| s.strip_prefix("outer(").and_then(|r| r.strip_suffix(')')))
            .ok_or_else(|| Error::Parse(format!("unknown scheme '{s}'")))?;
        let lipschitz = inner
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad Lipschitz bound '{inner}'")))?;
        Ok(Scheme::Outer { lipschitz })
    }
}

/// A parametric system plus the discretization to apply.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub n: usize,
    pub metric: MetricKind,
    pub scheme: Scheme,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    kind: String,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    minimal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scheme: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric_table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    map: Option<Vec<f64>>,
}

impl SystemSpec {
    pub fn rotation(alpha: Alpha, n: usize) -> Self {
        SystemSpec {
            kind: SystemKind::Rotation {
                alpha,
                minimal: alpha == Alpha::Golden,
            },
            n,
            metric: MetricKind::Arc,
            scheme: Scheme::Nearest,
        }
    }

    pub fn golden_rotation(n: usize) -> Self {
        Self::rotation(Alpha::Golden, n)
    }

    pub fn doubling(n: usize) -> Self {
        SystemSpec {
            kind: SystemKind::Doubling,
            n,
            metric: MetricKind::Arc,
            scheme: Scheme::Nearest,
        }
    }

    pub fn finite(relation: FiniteRelation, metric: MetricKind) -> Self {
        SystemSpec {
            n: relation.n_points(),
            kind: SystemKind::FiniteRelation { relation, source: None },
            metric,
            scheme: Scheme::Nearest,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        if !matches!(self.kind, SystemKind::FiniteRelation { .. }) {
            self.n = n;
        }
        self
    }

    pub fn with_metric(mut self, metric: MetricKind) -> Self {
        self.metric = metric;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn is_grid(&self) -> bool {
        !matches!(self.kind, SystemKind::FiniteRelation { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_grid() && self.n < 3 {
            return Err(Error::InvalidParameter(format!("grid size must be at least 3, got {}", self.n)));
        }
        match &self.kind {
            SystemKind::Rotation { alpha, .. } => {
                let a = alpha.value();
                if !(a > 0.0 && a < 1.0) {
                    return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {a}")));
                }
            }
            SystemKind::GridMap { images, .. } => {
                if images.len() != self.n {
                    return Err(Error::Shape(format!("map has {} images for {} nodes", images.len(), self.n)));
                }
                if images.iter().any(|y| !y.is_finite()) {
                    return Err(Error::InvalidParameter("map images must be finite".into()));
                }
            }
            SystemKind::Doubling | SystemKind::FiniteRelation { .. } => {}
        }
        if let Scheme::Outer { lipschitz } = self.scheme {
            if !(lipschitz >= 0.0 && lipschitz.is_finite()) {
                return Err(Error::InvalidParameter(format!("Lipschitz bound must be finite and >= 0, got {lipschitz}")));
            }
        }
        if !self.is_grid() && matches!(self.metric, MetricKind::Arc | MetricKind::SqrtDistorted) {
            return Err(Error::InvalidParameter("finite relations need a discrete or table metric".into()));
        }
        Ok(())
    }

    /// Parses the JSON form. Relative paths are resolved against `base_dir`.
    pub fn from_json(s: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawSpec = serde_json::from_str(s)?;
        let resolve = |p: &str| match base_dir {
            Some(b) if Path::new(p).is_relative() => b.join(p),
            _ => PathBuf::from(p),
        };
        let metric = match raw.metric.as_deref() {
            Some("table") => {
                let p = raw
                    .metric_table
                    .as_deref()
                    .ok_or_else(|| Error::Parse("metric 'table' needs a 'metric_table' path".into()))?;
                MetricKind::Table(resolve(p))
            }
            Some(m) => m.parse()?,
            None if raw.kind == "finite_relation" => MetricKind::Discrete,
            None => MetricKind::Arc,
        };
        let scheme = match &raw.scheme {
            None => Scheme::Nearest,
            Some(Value::String(s)) => s.parse()?,
            Some(Value::Object(o)) => match o.get("outer").and_then(Value::as_f64) {
                Some(l) => Scheme::Outer { lipschitz: l },
                None => return Err(Error::Parse("scheme object must be {\"outer\": L}".into())),
            },
            Some(other) => return Err(Error::Parse(format!("bad scheme {other}"))),
        };
        let alpha = match &raw.alpha {
            None => None,
            Some(Value::String(s)) => Some(s.parse::<Alpha>()?),
            Some(Value::Number(x)) => Some(Alpha::Value(x.as_f64().unwrap_or(f64::NAN))),
            Some(other) => return Err(Error::Parse(format!("bad alpha {other}"))),
        };
        let need_n = || raw.n.ok_or_else(|| Error::Parse("missing 'N'".into()));
        let (kind, n) = match raw.kind.as_str() {
            "rotation" | "circle_rotation" => {
                let alpha = alpha.unwrap_or(Alpha::Golden);
                let minimal = raw.minimal.unwrap_or(alpha == Alpha::Golden);
                (SystemKind::Rotation { alpha, minimal }, need_n()?)
            }
            "doubling" => (SystemKind::Doubling, need_n()?),
            "grid_map" => {
                let (images, source) = match (&raw.map, &raw.table) {
                    (Some(m), _) => (m.clone(), None),
                    (None, Some(p)) => {
                        let path = resolve(p);
                        (read_images(&path)?, Some(path))
                    }
                    (None, None) => return Err(Error::Parse("grid_map needs 'map' or 'table'".into())),
                };
                let n = raw.n.unwrap_or(images.len());
                (SystemKind::GridMap { images, source }, n)
            }
            "finite_relation" => {
                let p = raw
                    .table
                    .as_deref()
                    .ok_or_else(|| Error::Parse("finite_relation needs a 'table' path".into()))?;
                let path = resolve(p);
                let relation = FiniteRelation::read_file(&path)?;
                let n = relation.n_points();
                (SystemKind::FiniteRelation { relation, source: Some(path) }, n)
            }
            other => return Err(Error::Parse(format!("unknown system kind '{other}'"))),
        };
        let spec = SystemSpec { kind, n, metric, scheme };
        spec.validate()?;
        Ok(spec)
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path)?, path.parent())
    }

    /// JSON form. Inline data is written inline; loaded files by path.
    pub fn to_json_value(&self) -> Value {
        let mut raw = RawSpec {
            kind: String::new(),
            n: Some(self.n),
            alpha: None,
            minimal: None,
            metric: Some(self.metric.name().to_string()),
            scheme: Some(match self.scheme {
                Scheme::Nearest => Value::from("nearest"),
                Scheme::Outer { lipschitz } => serde_json::json!({ "outer": lipschitz }),
            }),
            table: None,
            metric_table: match &self.metric {
                MetricKind::Table(p) => Some(p.display().to_string()),
                _ => None,
            },
            map: None,
        };
        match &self.kind {
            SystemKind::Rotation { alpha, minimal } => {
                raw.kind = "rotation".into();
                raw.alpha = Some(match alpha {
                    Alpha::Golden => Value::from("golden"),
                    Alpha::Value(a) => Value::from(*a),
                });
                raw.minimal = Some(*minimal);
            }
            SystemKind::Doubling => raw.kind = "doubling".into(),
            SystemKind::GridMap { images, source } => {
                raw.kind = "grid_map".into();
                match source {
                    Some(p) => raw.table = Some(p.display().to_string()),
                    None => raw.map = Some(images.clone()),
                }
            }
            SystemKind::FiniteRelation { source, .. } => {
                raw.kind = "finite_relation".into();
                raw.table = source.as_ref().map(|p| p.display().to_string());
            }
        }
        serde_json::to_value(raw).expect("spec serializes")
    }
}

/// Image positions: a JSON array, or numbers separated by whitespace or commas.
fn read_images(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(v) = serde_json::from_str::<Vec<f64>>(&text) {
        return Ok(v);
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad image value '{s}'"))))
        .collect()
}

/// A relation on a metric space produced by [`discretize`].
#[derive(Clone, Debug)]
pub struct DiscreteSystem<T> {
    pub space: FiniteMetricSpace<T>,
    pub relation: FiniteRelation,
    /// Grid step `1/N`; `None` for finite instances.
    pub h: Option<T>,
    /// Largest arc distance between an exact image and its nearest-scheme node.
    pub max_rounding_error: T,
    /// Grid shift of a nearest-scheme rotation.
    pub shift: Option<usize>,
}

impl<T: Scalar> DiscreteSystem<T> {
    /// `2h` on grids, otherwise half the smallest distance.
    pub fn default_epsilon(&self) -> T {
        match self.h {
            Some(h) => h * T::lit(DEFAULT_EPS_FACTOR),
            None => resolving_epsilon(&self.space),
        }
    }

    /// `3h` on grids, otherwise zero.
    pub fn default_numerical_zero(&self) -> T {
        self.h.map_or(T::zero(), |h| h * T::lit(DEFAULT_ZERO_FACTOR))
    }

    pub fn scale_instance(&self, epsilon: Option<T>, numerical_zero: Option<T>) -> ScaleInstance<T> {
        let eps = epsilon.unwrap_or_else(|| self.default_epsilon());
        ScaleInstance {
            relation: self.relation.clone(),
            space: self.space.clone(),
            scale: self.h.unwrap_or(eps),
            epsilon: eps,
            numerical_zero: numerical_zero.unwrap_or_else(|| self.default_numerical_zero()),
        }
    }
}

/// Which closed-form circle metric to tabulate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CircleMetric {
    Arc,
    SqrtDistorted,
    Discrete,
}

/// Representative of node `i` in `[−1/2, 1/2]`.
fn centered(i: usize, n: usize) -> f64 {
    if 2 * i <= n {
        i as f64 / n as f64
    } else {
        i as f64 / n as f64 - 1.0
    }
}

/// Grid nodes `i/N` with the chosen metric.
pub fn circle_metrics<T: Scalar>(kind: CircleMetric, n: usize) -> Result<FiniteMetricSpace<T>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("grid size must be at least 3, got {n}")));
    }
    let nf = n as f64;
    let table = DistanceTable::from_fn(n, |i, j| {
        let arc = arc_steps(i, j, n) as f64 / nf;
        let v = match kind {
            CircleMetric::Arc => arc,
            CircleMetric::SqrtDistorted => {
                let s = (centered(i, n).abs().sqrt() - centered(j, n).abs().sqrt()).abs();
                arc.max(s)
            }
            CircleMetric::Discrete => {
                if i == j {
                    0.0
                } else {
                    1.0
                }
            }
        };
        T::lit(v)
    });
    let labels = (0..n).map(|i| format!("{i}/{n}")).collect();
    Ok(FiniteMetricSpace::from_table_unchecked(labels, table))
}

fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

fn nearest_node(y: f64, n: usize) -> usize {
    ((y.rem_euclid(1.0) * n as f64).round() as usize) % n
}

fn gcd(a: usize, b: usize) -> usize {
    crate::digraph::gcd(a, b)
}

/// Integer shift nearest `αN`; with `minimal`, restricted to shifts coprime to `N`.
pub fn rotation_shift(alpha: f64, n: usize, minimal: bool) -> usize {
    let target = alpha * n as f64;
    let base = target.round() as i64;
    if !minimal {
        return base.rem_euclid(n as i64) as usize;
    }
    let mut best: Option<(f64, i64)> = None;
    for off in 0..=(n as i64) {
        for k in [base - off, base + off] {
            let s = k.rem_euclid(n as i64) as usize;
            if gcd(s, n) == 1 {
                let err = (k as f64 - target).abs();
                if best.is_none_or(|(e, bk)| err < e || (err == e && k < bk)) {
                    best = Some((err, k));
                }
            }
        }
        if best.is_some() {
            break;
        }
    }
    best.map_or(1, |(_, k)| k.rem_euclid(n as i64) as usize)
}

/// Turn a spec into a metric space and relation.
pub fn discretize<T: Scalar>(spec: &SystemSpec) -> Result<DiscreteSystem<T>> {
    spec.validate()?;
    let n = spec.n;
    let space = match &spec.metric {
        MetricKind::Arc => circle_metrics(CircleMetric::Arc, n)?,
        MetricKind::SqrtDistorted => circle_metrics(CircleMetric::SqrtDistorted, n)?,
        MetricKind::Discrete => FiniteMetricSpace::discrete(n),
        MetricKind::Table(p) => {
            let s = FiniteMetricSpace::read_csv_file(p)?;
            if s.len() != n {
                return Err(Error::Shape(format!("metric table has {} points, system has {n}", s.len())));
            }
            s
        }
    };
    if let SystemKind::FiniteRelation { relation, .. } = &spec.kind {
        return Ok(DiscreteSystem {
            space,
            relation: relation.clone(),
            h: None,
            max_rounding_error: T::zero(),
            shift: None,
        });
    }
    let nf = n as f64;
    let images: Vec<f64> = match &spec.kind {
        SystemKind::Rotation { alpha, .. } => (0..n).map(|i| (i as f64 / nf + alpha.value()).rem_euclid(1.0)).collect(),
        SystemKind::Doubling => (0..n).map(|i| ((2 * i) % n) as f64 / nf).collect(),
        SystemKind::GridMap { images, .. } => images.iter().map(|y| y.rem_euclid(1.0)).collect(),
        SystemKind::FiniteRelation { .. } => unreachable!(),
    };
    let (nearest, shift): (Vec<usize>, Option<usize>) = match &spec.kind {
        SystemKind::Rotation { alpha, minimal } => {
            let s = rotation_shift(alpha.value(), n, *minimal);
            ((0..n).map(|i| (i + s) % n).collect(), Some(s))
        }
        _ => (images.iter().map(|&y| nearest_node(y, n)).collect(), None),
    };
    let max_rounding_error = (0..n)
        .map(|i| circle_dist(nearest[i] as f64 / nf, images[i]))
        .fold(0.0, f64::max);
    let relation = match spec.scheme {
        Scheme::Nearest => FiniteRelation::from_map(&nearest)?,
        Scheme::Outer { lipschitz } => {
            let h = 1.0 / nf;
            let r = lipschitz * h / 2.0 + h / 2.0 + OUTER_SLACK;
            let mut edges = Vec::new();
            for (i, &y) in images.iter().enumerate() {
                for j in 0..n {
                    if circle_dist(j as f64 / nf, y) <= r {
                        edges.push((i, j));
                    }
                }
                edges.push((i, nearest[i]));
            }
            FiniteRelation::new(n, edges)?
        }
    };
    Ok(DiscreteSystem {
        space,
        relation,
        h: Some(T::lit(1.0 / nf)),
        max_rounding_error: T::lit(max_rounding_error),
        shift,
    })
}

/// `d_f(x, y) = max_{0 ≤ k ≤ iterations} d(fᵏx, fᵏy)` for a map `f`.
///
/// Windows of length `2ʲ` are combined by doubling, so the cost is
/// `O(N² log iterations)`.
pub fn estimate_df<T: Scalar>(
    d: &FiniteMetricSpace<T>,
    f_map: &FiniteRelation,
    iterations: usize,
) -> Result<PseudoMetricTable<T>> {
    let n = d.len();
    if f_map.n_points() != n {
        return Err(Error::Shape(format!("map on {} points, metric on {n}", f_map.n_points())));
    }
    let map = f_map.as_map()?;
    let compose = |g: &[usize], h: &[usize]| -> Vec<usize> { h.iter().map(|&x| g[x]).collect() };
    // window[x*n+y] = max over k in [0, len) of d(fᵏx, fᵏy), with jump = f^len
    let mut window: Vec<T> = (0..n * n).map(|u| d.dist(u / n, u % n)).collect();
    let mut jump = map.clone();
    let mut acc: Option<(Vec<T>, Vec<usize>)> = None;
    let mut remaining = iterations + 1;
    loop {
        if remaining & 1 == 1 {
            acc = Some(match acc {
                None => (window.clone(), jump.clone()),
                Some((a, shift)) => {
                    let merged = (0..n * n)
                        .into_par_iter()
                        .map(|u| {
                            let (x, y) = (shift[u / n], shift[u % n]);
                            a[u].max(window[x * n + y])
                        })
                        .collect();
                    (merged, compose(&jump, &shift))
                }
            });
        }
        remaining >>= 1;
        if remaining == 0 {
            break;
        }
        window = (0..n * n)
            .into_par_iter()
            .map(|u| {
                let (x, y) = (jump[u / n], jump[u % n]);
                window[u].max(window[x * n + y])
            })
            .collect();
        jump = compose(&jump, &jump);
    }
    let (data, _) = acc.expect("at least one window");
    let table = DistanceTable::from_fn(n, |x, y| data[x * n + y]);
    Ok(PseudoMetricTable::new(table, false))
}

/// Extremes of `d1 / d2` over off-diagonal pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub argmin: (usize, usize),
    pub argmax: (usize, usize),
}

pub fn bilipschitz_ratio<T: Scalar>(d1: &DistanceTable<T>, d2: &DistanceTable<T>) -> Result<RatioReport> {
    let n = d1.len();
    if d2.len() != n {
        return Err(Error::Shape(format!("tables have {n} and {} points", d2.len())));
    }
    if n < 2 {
        return Err(Error::Shape("need at least two points".into()));
    }
    let mut r = RatioReport {
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        argmin: (0, 1),
        argmax: (0, 1),
    };
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let den = d2.get(i, j).as_f64();
            if den <= 0.0 {
                return Err(Error::ZeroDenominator(i, j));
            }
            let q = d1.get(i, j).as_f64() / den;
            if q < r.min_ratio {
                r.min_ratio = q;
                r.argmin = (i, j);
            }
            if q > r.max_ratio {
                r.max_ratio = q;
                r.argmax = (i, j);
            }
        }
    }
    Ok(r)
}

/// Quantities a refinement study can track.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    ThetaMax,
    RhoMax,
    Period,
    SccCount,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::ThetaMax, Quantity::RhoMax, Quantity::Period, Quantity::SccCount];

    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::ThetaMax => "theta_max",
            Quantity::RhoMax => "rho_max",
            Quantity::Period => "period",
            Quantity::SccCount => "scc_count",
        }
    }
}

impl std::str::FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Quantity::ALL
            .into_iter()
            .find(|q| q.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown quantity '{s}'")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StudyRow {
    pub n: usize,
    pub h: Option<f64>,
    pub epsilon: f64,
    pub theta_max: Option<f64>,
    pub rho_max: Option<f64>,
    pub period: Option<usize>,
    pub scc_count: Option<usize>,
    pub wall_time_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrendTable {
    pub quantities: Vec<Quantity>,
    pub rows: Vec<StudyRow>,
    pub trends: Vec<(Quantity, Trend)>,
}

impl TrendTable {
    pub fn trend(&self, q: Quantity) -> Option<Trend> {
        self.trends.iter().find(|(k, _)| *k == q).map(|(_, t)| *t)
    }

    pub fn column(&self, q: Quantity) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .map(|r| match q {
                Quantity::ThetaMax => r.theta_max,
                Quantity::RhoMax => r.rho_max,
                Quantity::Period => r.period.map(|p| p as f64),
                Quantity::SccCount => r.scc_count.map(|p| p as f64),
            })
            .collect()
    }

    /// One row per grid size, then one `trend` row.
    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["N".to_string(), "h".to_string(), "epsilon".to_string()];
        header.extend(self.quantities.iter().map(|q| q.as_str().to_string()));
        header.push("wall_time_ms".into());
        out.write_record(&header)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), format_scalar);
        for (i, r) in self.rows.iter().enumerate() {
            let mut rec = vec![r.n.to_string(), opt(r.h), format_scalar(r.epsilon)];
            rec.extend(self.quantities.iter().map(|&q| opt(self.column(q)[i])));
            rec.push(format!("{:.3}", r.wall_time_ms));
            out.write_record(&rec)?;
        }
        let mut rec = vec!["trend".to_string(), String::new(), String::new()];
        rec.extend(self.quantities.iter().map(|&q| self.trend(q).map_or("", Trend::as_str).to_string()));
        rec.push(String::new());
        out.write_record(&rec)?;
        out.flush()?;
        Ok(())
    }
}

/// Run `spec` at each grid size and tabulate the requested quantities.
pub fn refine_study<T: Scalar>(
    spec: &SystemSpec,
    n_list: &[usize],
    quantities: &[Quantity],
    opts: &ClassifyOptions,
) -> Result<TrendTable> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("grid list is empty".into()));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("grid sizes must be strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let start = Instant::now();
        let sys = discretize::<T>(&spec.clone().with_n(n))?;
        let eps = sys.default_epsilon();
        let mut popts = ProductOptions::fast(sys.space.len());
        if let Some(g) = opts.jump_graph {
            popts.jump_graph = g;
        }
        let want = |q| quantities.contains(&q);
        let theta_max = if want(Quantity::ThetaMax) {
            Some(product_pseudometric(&sys.relation, &sys.space, Mode::Bound, &popts)?.table.max_value().as_f64())
        } else {
            None
        };
        let rho_max = if want(Quantity::RhoMax) {
            Some(product_pseudometric(&sys.relation, &sys.space, Mode::Length, &popts)?.table.max_value().as_f64())
        } else {
            None
        };
        let (period, scc_count) = if want(Quantity::Period) || want(Quantity::SccCount) {
            let a = analyze_scale(&sys.relation, &sys.space, eps, 0);
            (
                a.period.filter(|_| want(Quantity::Period)),
                want(Quantity::SccCount).then_some(a.scc_count),
            )
        } else {
            (None, None)
        };
        rows.push(StudyRow {
            n: sys.space.len(),
            h: sys.h.map(Scalar::as_f64),
            epsilon: eps.as_f64(),
            theta_max,
            rho_max,
            period,
            scc_count,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        });
    }
    let mut table = TrendTable {
        quantities: quantities.to_vec(),
        rows,
        trends: Vec::new(),
    };
    table.trends = quantities
        .iter()
        .map(|&q| {
            let col: Vec<f64> = table.column(q).into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
            (q, Trend::of(&col))
        })
        .collect();
    Ok(table)
}

/// Classify `spec` along a grid refinement, coarse to fine.
pub fn classify_refinement<T: Scalar>(
    spec: &SystemSpec,
    n_list: &[usize],
    opts: &ClassifyOptions,
) -> Result<Classification<T>> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if !spec.is_grid() {
        ns.truncate(1);
    }
    let instances = ns
        .iter()
        .map(|&n| Ok(discretize::<T>(&spec.clone().with_n(n))?.scale_instance(None, None)))
        .collect::<Result<Vec<_>>>()?;
    classify_instances(&instances, opts)
}
