//! Product-system pseudo-metrics, periods, verdicts and factors.

mod classify;
mod factor;
mod period;
mod pseudo;

pub use classify::{
    classify, classify_instances, resolving_epsilon, vanishing_verdict, Classification,
    ClassifyOptions, EvidenceRow, ScaleInstance, Trend, Trends, Verdict,
};
pub use factor::{cyclic_factor, quotient_factor, FactorKind, QuotientSystem};
pub use period::{analyze_scale, period, uniform_chain_length, ScaleAnalysis};
pub use pseudo::{
    barrier_max, default_product_jumps, default_single_jumps, isometry_defect, product_pseudometric,
    rho_pseudometric, strong_chain_over_metrics, theta_pseudoultrametric, ProductFlag, ProductOptions,
    ProductPseudo, COMPLETE_PRODUCT_LIMIT, COMPLETE_SINGLE_LIMIT, DEFAULT_KNN,
};
