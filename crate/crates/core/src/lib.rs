// Validation guards use the negated form `!(x > 0.0)` on purpose: it
// rejects NaN, which the suggested `x <= 0.0` would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Confidence bands for kernel density estimates.
//!
//! The crate builds the full pipeline behind simultaneous confidence bands
//! for a probability density on a compact evaluation region:
//!
//! - [`kernels`]: evaluable kernels with the constants the band widths need;
//! - [`estimator`]: kernel density estimates on points and grids;
//! - [`schedules`]: symbolic `c * n^p (log n)^q (log log n)^r` rate sequences
//!   and mechanical checking of the asymptotic conditions each band-level
//!   theorem imposes;
//! - [`bands`]: the band constructions themselves — the plain and truncated
//!   interval families, the classical sup-norm band, and its translated,
//!   simplified, and truncated refinements;
//! - [`density`] and [`coverage`]: ground-truth densities with exact
//!   samplers, plus seeded Monte Carlo machinery that measures non-coverage
//!   probabilities, fits logarithmic levels, and probes almost-sure
//!   coverage along a single growing sample path.

pub mod bands;
pub mod coverage;
pub mod density;
pub mod error;
pub mod estimator;
pub mod kernels;
pub mod quad;
pub mod schedules;

pub use bands::{
    band_bickel_rosenblatt, band_check, band_contains, band_hat, band_simplified,
    band_translated, band_truncated, interval_hat, truncate_sup, truncate_tilde, u_n, z_alpha,
    BandFamily, ConfidenceBand, Containment, ConstructionTag, PointwiseInterval, TruncationMode,
};
pub use coverage::{
    almost_sure_probe, build_band, fit_log_level, simulate_noncoverage, AlmostSurePath,
    BandSpec, CoverageEntry, CoverageReport, GridSpec, LogLevelFit, ZeroCorrection,
};
pub use density::Density;
pub use error::{Error, Result};
pub use estimator::{
    kde_at_point, kde_on_grid, sup_on_grid, DensityEstimate, EvaluationGrid, GridMax, Sample,
};
pub use kernels::{A1Report, BaseKernel, CustomKernel, Holder, Kernel};
pub use schedules::{
    check_theorem1_conditions, check_theorem2_conditions, check_translation_conditions,
    check_truncation_conditions, preset_bickel_rosenblatt, preset_thinner_mse,
    preset_thinner_sup, preset_translated, ConditionCheck, ConditionReport, LimitClass,
    RateSequence, ScheduleSet, Verdict,
};
