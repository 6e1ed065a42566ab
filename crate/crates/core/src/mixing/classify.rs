//! Transitivity and mixing verdicts across a schedule of scales.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::JumpGraph;
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::relation::FiniteRelation;
use crate::scalar::{format_scalar, serde_scalar, Mode, Scalar};

use super::period::analyze_scale;
use super::pseudo::{
    barrier_max, default_single_jumps, product_pseudometric, ProductFlag, ProductOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Undetermined => "undetermined",
        }
    }

    fn unanimous(values: impl IntoIterator<Item = bool>) -> Verdict {
        let (mut yes, mut no) = (false, false);
        for v in values {
            if v {
                yes = true;
            } else {
                no = true;
            }
        }
        match (yes, no) {
            (true, false) => Verdict::Yes,
            (false, true) => Verdict::No,
            _ => Verdict::Undetermined,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Monotonicity of a quantity along a schedule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Single,
    /// Spread within 10% of the largest value.
    Stable,
    Decreasing,
    Increasing,
    Mixed,
}

impl Trend {
    pub const STABLE_SPREAD: f64 = 0.1;

    pub fn of(values: &[f64]) -> Trend {
        if values.len() < 2 {
            return Trend::Single;
        }
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi.is_finite() && hi - lo <= Self::STABLE_SPREAD * hi.abs() {
            return Trend::Stable;
        }
        if values.windows(2).all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else if values.windows(2).all(|w| w[1] > w[0]) {
            Trend::Increasing
        } else {
            Trend::Mixed
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Single => "single",
            Trend::Stable => "stable",
            Trend::Decreasing => "decreasing",
            Trend::Increasing => "increasing",
            Trend::Mixed => "mixed",
        }
    }
}

/// One relation and metric analysed at one scale.
#[derive(Clone, Debug)]
pub struct ScaleInstance<T> {
    pub relation: FiniteRelation,
    pub space: FiniteMetricSpace<T>,
    /// Scale label: `ε` for fixed instances, the grid step for refinements.
    pub scale: T,
    pub epsilon: T,
    pub numerical_zero: T,
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    /// Product jump graph; `None` picks by size.
    pub jump_graph: Option<JumpGraph>,
    /// Single-system jump graph for `ℓ_max`; `None` picks by size.
    pub single_jump_graph: Option<JumpGraph>,
    /// Run the base-point and reverse-direction diagnostics on `ρ`.
    pub diagnostics: bool,
    /// Step limit for the uniform chain length.
    pub max_chain_len: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            jump_graph: None,
            single_jump_graph: None,
            diagnostics: false,
            max_chain_len: 4096,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
pub struct EvidenceRow<T: Scalar> {
    #[serde(with = "serde_scalar")]
    pub scale: T,
    pub n_points: usize,
    #[serde(with = "serde_scalar")]
    pub epsilon: T,
    #[serde(with = "serde_scalar")]
    pub numerical_zero: T,
    #[serde(with = "serde_scalar")]
    pub theta_max: T,
    #[serde(with = "serde_scalar")]
    pub rho_max: T,
    #[serde(with = "serde_scalar")]
    pub ell_max: T,
    pub period: Option<usize>,
    pub scc_count: usize,
    pub chain_transitive: bool,
    pub uniform_chain_length: Option<usize>,
    pub jump_graph: String,
    #[serde(with = "serde_scalar::option")]
    pub rho_base_dependence: Option<T>,
    #[serde(with = "serde_scalar::option")]
    pub rho_reverse_asymmetry: Option<T>,
    pub rho_flags: Vec<ProductFlag>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trends {
    pub theta_max: Trend,
    pub rho_max: Trend,
    pub ell_max: Trend,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
pub struct Classification<T: Scalar> {
    pub chain_transitive: Verdict,
    pub chain_mixing: Verdict,
    pub strong_chain_transitive: Verdict,
    pub strong_chain_mixing: Verdict,
    /// Period at the finest scale, when that scale is chain transitive.
    pub period: Option<usize>,
    pub trends: Trends,
    pub evidence: Vec<EvidenceRow<T>>,
    pub notes: Vec<String>,
}

impl<T: Scalar> Classification<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Evidence table as CSV.
    pub fn evidence_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "scale",
            "theta_max",
            "rho_max",
            "period",
            "scc_count",
            "n_points",
            "epsilon",
            "ell_max",
            "chain_transitive",
            "uniform_chain_length",
        ])?;
        for r in &self.evidence {
            out.write_record([
                format_scalar(r.scale),
                format_scalar(r.theta_max),
                format_scalar(r.rho_max),
                r.period.map_or(String::new(), |p| p.to_string()),
                r.scc_count.to_string(),
                r.n_points.to_string(),
                format_scalar(r.epsilon),
                format_scalar(r.ell_max),
                r.chain_transitive.to_string(),
                r.uniform_chain_length.map_or(String::new(), |p| p.to_string()),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

struct Measured<T> {
    theta_max: T,
    rho_max: T,
    ell_max: T,
    jump_graph: JumpGraph,
    base_dependence: Option<T>,
    reverse_asymmetry: Option<T>,
    flags: Vec<ProductFlag>,
}

fn measure<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    opts: &ClassifyOptions,
) -> Result<Measured<T>> {
    let n = d.len();
    let mut popts = if opts.diagnostics {
        ProductOptions::checked(n)
    } else {
        ProductOptions::fast(n)
    };
    if let Some(g) = opts.jump_graph {
        popts.jump_graph = g;
    }
    let rho = product_pseudometric(f, d, Mode::Length, &popts)?;
    let theta = product_pseudometric(f, d, Mode::Bound, &ProductOptions { check_base: None, reverse_check: false, ..popts.clone() })?;
    let single = opts.single_jump_graph.unwrap_or_else(|| default_single_jumps(n));
    let ell_max = barrier_max(f, d, Mode::Length, single);
    Ok(Measured {
        theta_max: theta.table.max_value(),
        rho_max: rho.table.max_value(),
        ell_max,
        jump_graph: popts.jump_graph,
        base_dependence: rho.base_dependence,
        reverse_asymmetry: rho.reverse_asymmetry,
        flags: rho.flags,
    })
}

/// Verdict on "this quantity is zero in the limit".
///
/// All values at numerical zero gives yes. Along a refinement (scales
/// strictly decreasing) a strictly decreasing sequence that shrinks at least
/// like the square root of the scale also gives yes, while a final value above
/// zero and at least half the first value gives no. A fixed instance with
/// every value above zero gives no. Anything else is undetermined.
pub fn vanishing_verdict(values: &[f64], zeros: &[f64], scales: &[f64]) -> Verdict {
    let at_zero: Vec<bool> = values.iter().zip(zeros).map(|(v, z)| v <= z).collect();
    if at_zero.iter().all(|&b| b) {
        return Verdict::Yes;
    }
    let refinement = scales.len() >= 2 && scales.windows(2).all(|w| w[1] < w[0]);
    if refinement {
        let (first, last) = (values[0], values[values.len() - 1]);
        let (h0, h1) = (scales[0], scales[scales.len() - 1]);
        let decreasing = values.windows(2).all(|w| w[1] < w[0]);
        if decreasing && last <= first * (h1 / h0).sqrt() {
            return Verdict::Yes;
        }
        if !at_zero[at_zero.len() - 1] && last >= 0.5 * first {
            return Verdict::No;
        }
        return Verdict::Undetermined;
    }
    if at_zero.iter().all(|&b| !b) {
        Verdict::No
    } else {
        Verdict::Undetermined
    }
}

/// Classify a schedule of instances (one row each).
///
/// Rows should be ordered from coarse to fine.
pub fn classify_instances<T: Scalar>(
    instances: &[ScaleInstance<T>],
    opts: &ClassifyOptions,
) -> Result<Classification<T>> {
    if instances.is_empty() {
        return Err(Error::InvalidParameter("scale schedule is empty".into()));
    }
    let rows: Vec<EvidenceRow<T>> = instances
        .par_iter()
        .map(|inst| {
            let m = measure(&inst.relation, &inst.space, opts)?;
            Ok(row(inst, &m, opts))
        })
        .collect::<Result<_>>()?;
    Ok(summarize(rows))
}

fn row<T: Scalar>(inst: &ScaleInstance<T>, m: &Measured<T>, opts: &ClassifyOptions) -> EvidenceRow<T> {
    let a = analyze_scale(&inst.relation, &inst.space, inst.epsilon, opts.max_chain_len);
    EvidenceRow {
        scale: inst.scale,
        n_points: inst.space.len(),
        epsilon: inst.epsilon,
        numerical_zero: inst.numerical_zero,
        theta_max: m.theta_max,
        rho_max: m.rho_max,
        ell_max: m.ell_max,
        period: a.period.filter(|_| a.chain_transitive),
        scc_count: a.scc_count,
        chain_transitive: a.chain_transitive,
        uniform_chain_length: a.uniform_chain_length,
        jump_graph: m.jump_graph.to_string(),
        rho_base_dependence: m.base_dependence,
        rho_reverse_asymmetry: m.reverse_asymmetry,
        rho_flags: m.flags.clone(),
    }
}

/// Classify one relation and metric over a list of `ε`.
///
/// `ρ`, `θ` and `ℓ` do not depend on `ε`, so they are computed once.
pub fn classify<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    schedule: &[T],
    numerical_zero: T,
    opts: &ClassifyOptions,
) -> Result<Classification<T>> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("scale schedule is empty".into()));
    }
    if f.n_points() != d.len() {
        return Err(Error::Shape(format!("relation on {} points, metric on {}", f.n_points(), d.len())));
    }
    let m = measure(f, d, opts)?;
    let rows = schedule
        .par_iter()
        .map(|&eps| {
            let inst = ScaleInstance {
                relation: f.clone(),
                space: d.clone(),
                scale: eps,
                epsilon: eps,
                numerical_zero,
            };
            row(&inst, &m, opts)
        })
        .collect();
    Ok(summarize(rows))
}

/// Half the smallest positive off-diagonal distance: the scale at which
/// `G_ε` is `f` itself.
pub fn resolving_epsilon<T: Scalar>(d: &FiniteMetricSpace<T>) -> T {
    let n = d.len();
    let mut min = T::infinity();
    for i in 0..n {
        for j in 0..n {
            let v = d.dist(i, j);
            if i != j && v > T::zero() && v < min {
                min = v;
            }
        }
    }
    if min.is_finite() {
        min / T::lit(2.0)
    } else {
        T::one()
    }
}

fn summarize<T: Scalar>(rows: Vec<EvidenceRow<T>>) -> Classification<T> {
    let scales: Vec<f64> = rows.iter().map(|r| r.scale.as_f64()).collect();
    let zeros: Vec<f64> = rows.iter().map(|r| r.numerical_zero.as_f64()).collect();
    let col = |g: fn(&EvidenceRow<T>) -> T| -> Vec<f64> { rows.iter().map(|r| g(r).as_f64()).collect() };
    let (theta, rho, ell) = (col(|r| r.theta_max), col(|r| r.rho_max), col(|r| r.ell_max));
    let mut notes = Vec::new();

    let ct = Verdict::unanimous(rows.iter().map(|r| r.chain_transitive));
    let mut cm = Verdict::unanimous(rows.iter().map(|r| r.chain_transitive && r.period == Some(1)));
    let theta_v = vanishing_verdict(&theta, &zeros, &scales);
    if cm != Verdict::Undetermined && theta_v != Verdict::Undetermined && cm != theta_v {
        notes.push(format!("period says chain mixing {cm}, theta_max says {theta_v}"));
        cm = Verdict::Undetermined;
    }
    let mut sct = vanishing_verdict(&ell, &zeros, &scales);
    let mut scm = vanishing_verdict(&rho, &zeros, &scales);

    if cm == Verdict::Yes && ct != Verdict::Yes {
        notes.push("chain mixing without chain transitivity".into());
        cm = Verdict::Undetermined;
    }
    if sct == Verdict::Yes && ct != Verdict::Yes {
        notes.push("strong chain transitivity without chain transitivity".into());
        sct = Verdict::Undetermined;
    }
    if scm == Verdict::Yes && (sct != Verdict::Yes || cm != Verdict::Yes) {
        notes.push("strong chain mixing without strong chain transitivity and chain mixing".into());
        scm = Verdict::Undetermined;
    }
    if rows.iter().any(|r| !r.rho_flags.is_empty()) {
        notes.push("rho diagnostics flagged at some scale".into());
    }
    let period = rows.last().and_then(|r| r.period);
    Classification {
        chain_transitive: ct,
        chain_mixing: cm,
        strong_chain_transitive: sct,
        strong_chain_mixing: scm,
        period,
        trends: Trends {
            theta_max: Trend::of(&theta),
            rho_max: Trend::of(&rho),
            ell_max: Trend::of(&ell),
        },
        evidence: rows,
        notes,
    }
}
