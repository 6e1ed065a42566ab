//! Product-system distances `ρ` (additive) and `θ` (minimax) measured from
//! the diagonal of `X × X`.

use serde::Serialize;

use crate::chains::search::{search, JumpLists, ProductSystem, SingleSystem};
use crate::chains::{JumpGraph, JumpPolicy};
use crate::error::{Error, Result};
use crate::metric::{DistanceTable, FiniteMetricSpace, PseudoMetricTable, SizeCap};
use crate::relation::{invert, FiniteRelation};
use crate::scalar::{Mode, Scalar};

/// Largest grid for which product searches use the complete jump graph by default.
pub const COMPLETE_PRODUCT_LIMIT: usize = 64;

/// Largest grid for which single-system barrier sweeps use complete jumps by default.
pub const COMPLETE_SINGLE_LIMIT: usize = 256;

/// Default neighbour count for sparse jump graphs.
pub const DEFAULT_KNN: usize = 8;

pub fn default_product_jumps(n: usize) -> JumpGraph {
    if n <= COMPLETE_PRODUCT_LIMIT {
        JumpGraph::Complete
    } else {
        JumpGraph::Knn(DEFAULT_KNN)
    }
}

pub fn default_single_jumps(n: usize) -> JumpGraph {
    if n <= COMPLETE_SINGLE_LIMIT {
        JumpGraph::Complete
    } else {
        JumpGraph::Knn(DEFAULT_KNN)
    }
}

/// Options for [`product_pseudometric`].
#[derive(Clone, Debug)]
pub struct ProductOptions<T> {
    pub jump_graph: JumpGraph,
    /// Diagonal base point `z` of the main search.
    pub base: usize,
    /// Second base point used to measure dependence on `z`.
    pub check_base: Option<usize>,
    /// Also search the inverse system to compare `ℓ((z,z),(x,y))` with `ℓ((x,y),(z,z))`.
    pub reverse_check: bool,
    /// Diagnostics above this are flagged.
    pub tolerance: T,
    pub cap: SizeCap,
}

impl<T: Scalar> ProductOptions<T> {
    /// Main search only, no diagnostics.
    pub fn fast(n: usize) -> Self {
        ProductOptions {
            jump_graph: default_product_jumps(n),
            base: 0,
            check_base: None,
            reverse_check: false,
            tolerance: T::witness_tolerance(),
            cap: SizeCap::from_env(),
        }
    }

    /// Main search plus base-point and reverse-direction diagnostics.
    pub fn checked(n: usize) -> Self {
        ProductOptions {
            check_base: (n > 1).then_some(1),
            reverse_check: true,
            ..Self::fast(n)
        }
    }

    pub fn with_jump_graph(mut self, g: JumpGraph) -> Self {
        self.jump_graph = g;
        self
    }
}

/// `ρ` or `θ` with diagnostics.
#[derive(Clone, Debug)]
pub struct ProductPseudo<T> {
    pub table: PseudoMetricTable<T>,
    pub mode: Mode,
    pub base: usize,
    pub jump_graph: JumpGraph,
    /// `max |value_z − value_z'|` over all pairs.
    pub base_dependence: Option<T>,
    /// `max |ℓ((z,z),(x,y)) − ℓ((x,y),(z,z))|` over all pairs.
    pub reverse_asymmetry: Option<T>,
    /// Largest value on the diagonal; nonzero only when the system is not
    /// (strongly) chain transitive at this resolution.
    pub diagonal_max: T,
    pub flags: Vec<ProductFlag>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductFlag {
    BaseDependent,
    Asymmetric,
    NonzeroDiagonal,
    Unreachable,
}

fn product_values<T: Scalar>(
    f: &FiniteRelation,
    jumps: &JumpLists<T>,
    base: usize,
    mode: Mode,
) -> Vec<T> {
    let n = f.n_points();
    let sys = ProductSystem { f, jumps };
    search(&sys, base * n + base, mode, JumpPolicy::FreeInitial).value
}

fn max_abs_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (&x, &y)| {
        let d = if x == y { T::zero() } else { (x - y).abs() };
        if d.is_nan() {
            T::infinity()
        } else {
            m.max(d)
        }
    })
}

/// Barrier of `f × f` from the diagonal point `(z, z)`, as a table on `X`.
///
/// `Mode::Length` gives `ρ`, `Mode::Bound` gives `θ`. The result is symmetrized
/// by taking the smaller of the two orientations; the diagnostics report how
/// far the raw values were from the exact symmetry and base independence.
pub fn product_pseudometric<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    mode: Mode,
    opts: &ProductOptions<T>,
) -> Result<ProductPseudo<T>> {
    let n = d.len();
    if f.n_points() != n {
        return Err(Error::Shape(format!("relation on {} points, metric on {n}", f.n_points())));
    }
    SizeCap::check("product search", (n as u128) * (n as u128), opts.cap.product_search)?;
    if opts.base >= n || opts.check_base.is_some_and(|z| z >= n) {
        return Err(Error::InvalidParameter("diagonal base point out of range".into()));
    }
    let jumps = JumpLists::build(d, opts.jump_graph);
    let main = product_values(f, &jumps, opts.base, mode);

    let base_dependence = opts.check_base.map(|z| {
        let other = product_values(f, &jumps, z, mode);
        max_abs_diff(&main, &other)
    });
    let reverse_asymmetry = opts.reverse_check.then(|| {
        // ℓ^{f×f}((x,y),(z,z)) = ℓ^{f⁻¹×f⁻¹}((z,z),(x,y))
        let inv = invert(f);
        let back = product_values(&inv, &jumps, opts.base, mode);
        max_abs_diff(&main, &back)
    });

    let table = DistanceTable::from_fn(n, |x, y| main[x * n + y].min(main[y * n + x]));
    let diagonal_max = (0..n).map(|x| table.get(x, x)).fold(T::zero(), T::max);
    let mut flags = Vec::new();
    if base_dependence.is_some_and(|v| !(v <= opts.tolerance)) {
        flags.push(ProductFlag::BaseDependent);
    }
    if reverse_asymmetry.is_some_and(|v| !(v <= opts.tolerance)) {
        flags.push(ProductFlag::Asymmetric);
    }
    if diagonal_max > opts.tolerance {
        flags.push(ProductFlag::NonzeroDiagonal);
    }
    if table.max_value().is_infinite() {
        flags.push(ProductFlag::Unreachable);
    }
    Ok(ProductPseudo {
        table: PseudoMetricTable::new(table, mode == Mode::Bound),
        mode,
        base: opts.base,
        jump_graph: opts.jump_graph,
        base_dependence,
        reverse_asymmetry,
        diagonal_max,
        flags,
    })
}

/// `ρ(x, y) = ℓ^{f×f}((z,z),(x,y))`.
pub fn rho_pseudometric<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    jump_graph: JumpGraph,
) -> Result<PseudoMetricTable<T>> {
    let opts = ProductOptions::fast(d.len()).with_jump_graph(jump_graph);
    Ok(product_pseudometric(f, d, Mode::Length, &opts)?.table)
}

/// `θ(x, y) = m^{f×f}((z,z),(x,y))`, flagged as an ultrametric.
pub fn theta_pseudoultrametric<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    jump_graph: JumpGraph,
) -> Result<PseudoMetricTable<T>> {
    let opts = ProductOptions::fast(d.len()).with_jump_graph(jump_graph);
    Ok(product_pseudometric(f, d, Mode::Bound, &opts)?.table)
}

/// `max |p(x1, x2) − p(y1, y2)|` over pairs of edges `(x1, y1), (x2, y2)` of `g`.
pub fn isometry_defect<T: Scalar>(g: &FiniteRelation, pseudo: &PseudoMetricTable<T>) -> T {
    let edges = g.edges();
    let mut worst = T::zero();
    for &(x1, y1) in edges {
        for &(x2, y2) in edges {
            let (a, b) = (pseudo.get(x1, x2), pseudo.get(y1, y2));
            if a != b {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

/// Largest single-system barrier value over all pairs.
pub fn barrier_max<T: Scalar>(
    f: &FiniteRelation,
    d: &FiniteMetricSpace<T>,
    mode: Mode,
    jump_graph: JumpGraph,
) -> T {
    use rayon::prelude::*;
    let jumps = JumpLists::build(d, jump_graph);
    let sys = SingleSystem { f, jumps: &jumps };
    (0..d.len())
        .into_par_iter()
        .map(|x| {
            search(&sys, x, mode, JumpPolicy::FreeInitial)
                .value
                .into_iter()
                .fold(T::zero(), T::max)
        })
        .reduce(T::zero, T::max)
}

/// `∩_i {ℓ^f_{d_i} ≤ ε}` for a finite family of metrics on the same points.
///
/// Every admissible metric contributes a superset of the generalized
/// recurrence relation, so the intersection over a finite family
/// over-approximates it from above.
pub fn strong_chain_over_metrics<T: Scalar>(
    f: &FiniteRelation,
    metrics: &[FiniteMetricSpace<T>],
    eps: T,
) -> Result<FiniteRelation> {
    let first = metrics
        .first()
        .ok_or_else(|| Error::InvalidParameter("metric family is empty".into()))?;
    if metrics.iter().any(|d| d.len() != first.len()) {
        return Err(Error::Shape("metrics live on different point sets".into()));
    }
    let mut acc: Option<FiniteRelation> = None;
    for d in metrics {
        let b = crate::chains::barrier(f, d, Mode::Length, JumpPolicy::FreeInitial, &crate::Sources::All)?;
        let r = FiniteRelation::new(d.len(), b.threshold(eps))?;
        acc = Some(match acc {
            None => r,
            Some(a) => a.intersection(&r)?,
        });
    }
    Ok(acc.expect("nonempty family"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle3() -> FiniteRelation {
        FiniteRelation::new(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn period3_rho_and_theta() {
        let d = FiniteMetricSpace::<f64>::discrete(3);
        let rho = rho_pseudometric(&cycle3(), &d, JumpGraph::Complete).unwrap();
        let theta = theta_pseudoultrametric(&cycle3(), &d, JumpGraph::Complete).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let e = if x == y { 0.0 } else { 1.0 };
                assert_eq!(rho.get(x, y), e);
                assert_eq!(theta.get(x, y), e);
            }
        }
        assert!(theta.is_ultrametric);
        assert_eq!(isometry_defect(&cycle3(), &theta), 0.0);
    }

    #[test]
    fn diagnostics_on_exact_instance() {
        let d = FiniteMetricSpace::<f64>::discrete(3);
        let p = product_pseudometric(&cycle3(), &d, Mode::Length, &ProductOptions::checked(3)).unwrap();
        assert_eq!(p.base_dependence, Some(0.0));
        assert_eq!(p.reverse_asymmetry, Some(0.0));
        assert!(p.flags.is_empty());
    }

    #[test]
    fn fixed_point_collapses_theta() {
        // 0 is fixed, 1 -> 0, 2 -> 1, with small distances
        let f = FiniteRelation::new(3, [(0, 0), (1, 0), (2, 1), (0, 2)]).unwrap();
        let pts = [0.0f64, 0.1, 0.2];
        let d = FiniteMetricSpace::from_fn_unchecked(3, |i, j| (pts[i] - pts[j]).abs());
        let theta = theta_pseudoultrametric(&f, &d, JumpGraph::Complete).unwrap();
        assert!(theta.max_value() <= 0.1 + 1e-12);
    }

    #[test]
    fn capacity_guard() {
        let d = FiniteMetricSpace::<f64>::discrete(3);
        let mut opts = ProductOptions::fast(3);
        opts.cap = SizeCap::uniform(8);
        assert!(matches!(
            product_pseudometric(&cycle3(), &d, Mode::Length, &opts),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn metric_family_scaling() {
        let f = FiniteRelation::new(4, [(0, 1), (1, 0), (2, 2), (3, 0)]).unwrap();
        let pts = [0.0f64, 0.3, 0.5, 0.9];
        let d = FiniteMetricSpace::from_fn_unchecked(4, |i, j| (pts[i] - pts[j]).abs());
        let eps = 0.25;
        let one = strong_chain_over_metrics(&f, std::slice::from_ref(&d), eps).unwrap();
        let both = strong_chain_over_metrics(&f, &[d.clone(), d.scaled(2.0)], eps).unwrap();
        // {ℓ_{2d} ≤ ε} = {ℓ_d ≤ ε/2}
        let half = strong_chain_over_metrics(&f, std::slice::from_ref(&d), eps / 2.0).unwrap();
        assert_eq!(both, half);
        assert!(both.is_subset_of(&one));
    }
}
