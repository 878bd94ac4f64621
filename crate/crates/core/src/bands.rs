//! Confidence interval and band constructions.
//!
//! Two families are built here. The MDP-style intervals center at the
//! `h*`-bandwidth estimate `f*` with half-width `delta * sqrt(f_n kappa) / v`,
//! optionally flooring the variance proxy `f_n` by a truncation. The
//! classical sup-norm family centers at `f_n` itself with the
//! `sqrt(2) + u_n + z_alpha / (sqrt(2) log(1/h))` bracket; its translated,
//! simplified, and truncated refinements keep that width scale while moving
//! the center to `f*` and simplifying the bracket.
//!
//! An untruncated interval where `f_n(x) = 0` degenerates to a single point
//! and registers a miss whenever the center is off the truth. That behavior
//! is deliberate: it is exactly what the truncations exist to repair, so it
//! is surfaced rather than masked.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{grids_compatible, sup_on_grid, DensityEstimate, EvaluationGrid};
use crate::kernels::Kernel;
use crate::schedules::ScheduleSet;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// How the variance proxy is floored before entering the width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruncationMode {
    None,
    Tilde,
    Sup,
}

impl std::str::FromStr for TruncationMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<TruncationMode> {
        match s {
            "none" => Ok(TruncationMode::None),
            "tilde" => Ok(TruncationMode::Tilde),
            "sup" => Ok(TruncationMode::Sup),
            other => Err(Error::UnknownName {
                kind: "truncation mode",
                name: other.to_string(),
            }),
        }
    }
}

/// Band construction families exposed to configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandFamily {
    Hat,
    Check,
    #[serde(rename = "br")]
    BickelRosenblatt,
    Translated,
    Simplified,
    Truncated,
}

impl std::str::FromStr for BandFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<BandFamily> {
        match s {
            "hat" => Ok(BandFamily::Hat),
            "check" => Ok(BandFamily::Check),
            "br" => Ok(BandFamily::BickelRosenblatt),
            "translated" => Ok(BandFamily::Translated),
            "simplified" => Ok(BandFamily::Simplified),
            "truncated" => Ok(BandFamily::Truncated),
            other => Err(Error::UnknownName {
                kind: "band family",
                name: other.to_string(),
            }),
        }
    }
}

impl BandFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            BandFamily::Hat => "hat",
            BandFamily::Check => "check",
            BandFamily::BickelRosenblatt => "br",
            BandFamily::Translated => "translated",
            BandFamily::Simplified => "simplified",
            BandFamily::Truncated => "truncated",
        }
    }
}

/// Which construction produced a band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionTag {
    Hat,
    CheckTilde,
    CheckSup,
    Br,
    Translated,
    Simplified,
    Truncated,
}

/// A closed interval `[center - half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseInterval {
    pub center: f64,
    pub half_width: f64,
}

impl PointwiseInterval {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    /// Closed-interval membership; the boundary counts as covered. The
    /// comparison uses the computed endpoints so that a value equal to
    /// `upper()` or `lower()` is always inside.
    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower() && value <= self.upper()
    }
}

/// Parameters recorded with a constructed band.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandParams {
    pub n: Option<u64>,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub kappa: f64,
    pub v_n: Option<f64>,
    pub h_n: Option<f64>,
    pub h_star_n: Option<f64>,
    pub eps_n: Option<f64>,
    pub trunc: TruncationMode,
    pub c_bounds: Option<(f64, f64)>,
}

impl BandParams {
    fn bare(kappa: f64) -> BandParams {
        BandParams {
            n: None,
            delta: None,
            alpha: None,
            kappa,
            v_n: None,
            h_n: None,
            h_star_n: None,
            eps_n: None,
            trunc: TruncationMode::None,
            c_bounds: None,
        }
    }
}

/// A union of pointwise intervals over a grid.
#[derive(Debug, Clone)]
pub struct ConfidenceBand {
    pub grid: Arc<EvaluationGrid>,
    pub intervals: Vec<PointwiseInterval>,
    pub tag: ConstructionTag,
    pub params: BandParams,
    /// Per-point truncation flags; empty when no truncation applies.
    pub truncation_triggered: Vec<bool>,
}

impl ConfidenceBand {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn max_half_width(&self) -> f64 {
        self.intervals
            .iter()
            .map(|i| i.half_width)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_half_width(&self) -> f64 {
        self.intervals
            .iter()
            .map(|i| i.half_width)
            .fold(f64::INFINITY, f64::min)
    }

    /// Fraction of grid points at which the truncation floor was active.
    pub fn truncation_fraction(&self) -> f64 {
        if self.truncation_triggered.is_empty() {
            0.0
        } else {
            let hits = self.truncation_triggered.iter().filter(|&&t| t).count();
            hits as f64 / self.truncation_triggered.len() as f64
        }
    }

    /// CSV export: grid coordinates, center, lower, upper, half_width,
    /// truncation flag.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.grid.dimension();
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        header.extend(
            ["center", "lower", "upper", "half_width", "truncated"]
                .iter()
                .map(|s| s.to_string()),
        );
        writeln!(w, "{}", header.join(","))?;
        for (i, interval) in self.intervals.iter().enumerate() {
            for coord in self.grid.point(i) {
                write!(w, "{coord},")?;
            }
            let triggered = self.truncation_triggered.get(i).copied().unwrap_or(false);
            writeln!(
                w,
                "{},{},{},{},{}",
                interval.center,
                interval.lower(),
                interval.upper(),
                interval.half_width,
                u8::from(triggered)
            )?;
        }
        Ok(())
    }
}

/// Pointwise minimum-width floor: `max(f_n(x), eps_n)`, assigning the
/// boundary `f_n(x) = eps_n` to the untruncated branch.
pub fn truncate_tilde(values: &DensityEstimate, eps_n: f64) -> Result<Vec<f64>> {
    if !(eps_n > 0.0) || !eps_n.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "eps_n",
            value: eps_n,
            requirement: "positive and finite".into(),
        });
    }
    Ok(values.values.iter().map(|&f| f.max(eps_n)).collect())
}

/// Supremum-scaled floor: `max(f_n(x), eps_n * sup f_n)` with
/// `eps_n` in (0, 1]. Undefined for an estimate that vanishes everywhere.
pub fn truncate_sup(values: &DensityEstimate, eps_n: f64) -> Result<Vec<f64>> {
    if !(eps_n > 0.0 && eps_n <= 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "eps_n",
            value: eps_n,
            requirement: "interval (0, 1]".into(),
        });
    }
    let sup = sup_on_grid(values)?.value;
    if !(sup > 0.0) {
        return Err(Error::AllZeroEstimate);
    }
    let threshold = eps_n * sup;
    Ok(values.values.iter().map(|&f| f.max(threshold)).collect())
}

/// The interval `[f*(x) - delta sqrt(f_n(x) kappa) / v_n,
/// f*(x) + delta sqrt(f_n(x) kappa) / v_n]`.
pub fn interval_hat(
    fstar: f64,
    fn_value: f64,
    kappa: f64,
    v_n: f64,
    delta: f64,
) -> PointwiseInterval {
    PointwiseInterval {
        center: fstar,
        half_width: delta * (fn_value * kappa).sqrt() / v_n,
    }
}

fn validate_pair(fstar: &DensityEstimate, fdens: &DensityEstimate) -> Result<()> {
    if !grids_compatible(&fstar.grid, &fdens.grid) {
        return Err(Error::GridMismatch(
            "center and variance-proxy estimates use different grids".into(),
        ));
    }
    Ok(())
}

fn validate_width_scale(v_n: f64, delta: f64) -> Result<()> {
    if !(v_n > 0.0) || !v_n.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "v_n",
            value: v_n,
            requirement: "positive and finite".into(),
        });
    }
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "delta",
            value: delta,
            requirement: "nonnegative and finite".into(),
        });
    }
    Ok(())
}

/// Untruncated band: per-point [`interval_hat`] with the raw variance proxy.
pub fn band_hat(
    fstar: &DensityEstimate,
    fdens: &DensityEstimate,
    kappa: f64,
    v_n: f64,
    delta: f64,
) -> Result<ConfidenceBand> {
    validate_pair(fstar, fdens)?;
    validate_width_scale(v_n, delta)?;
    let intervals = fstar
        .values
        .iter()
        .zip(&fdens.values)
        .map(|(&fs, &fv)| interval_hat(fs, fv, kappa, v_n, delta))
        .collect();
    Ok(ConfidenceBand {
        grid: Arc::clone(&fstar.grid),
        intervals,
        tag: ConstructionTag::Hat,
        params: BandParams {
            delta: Some(delta),
            v_n: Some(v_n),
            h_n: Some(fdens.bandwidth),
            h_star_n: Some(fstar.bandwidth),
            ..BandParams::bare(kappa)
        },
        truncation_triggered: Vec::new(),
    })
}

/// Truncated band: [`interval_hat`] with the variance proxy floored by the
/// selected truncation.
pub fn band_check(
    fstar: &DensityEstimate,
    fdens: &DensityEstimate,
    kappa: f64,
    v_n: f64,
    delta: f64,
    eps_n: f64,
    mode: TruncationMode,
) -> Result<ConfidenceBand> {
    validate_pair(fstar, fdens)?;
    validate_width_scale(v_n, delta)?;
    let (floored, tag) = match mode {
        TruncationMode::Tilde => (truncate_tilde(fdens, eps_n)?, ConstructionTag::CheckTilde),
        TruncationMode::Sup => (truncate_sup(fdens, eps_n)?, ConstructionTag::CheckSup),
        TruncationMode::None => {
            return Err(Error::FamilyPrecondition(
                "check band requires truncation mode tilde or sup".into(),
            ))
        }
    };
    let triggered: Vec<bool> = fdens
        .values
        .iter()
        .zip(&floored)
        .map(|(&f, &t)| t > f)
        .collect();
    let intervals = fstar
        .values
        .iter()
        .zip(&floored)
        .map(|(&fs, &t)| interval_hat(fs, t, kappa, v_n, delta))
        .collect();
    Ok(ConfidenceBand {
        grid: Arc::clone(&fstar.grid),
        intervals,
        tag,
        params: BandParams {
            delta: Some(delta),
            v_n: Some(v_n),
            h_n: Some(fdens.bandwidth),
            h_star_n: Some(fstar.bandwidth),
            eps_n: Some(eps_n),
            trunc: mode,
            ..BandParams::bare(kappa)
        },
        truncation_triggered: triggered,
    })
}

/// The quantile transform `z_alpha` solving
/// `exp(-2 exp(-z_alpha)) = 1 - alpha`.
pub fn z_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            requirement: "open interval (0, 1)".into(),
        });
    }
    Ok(-(-(1.0 - alpha).ln() / 2.0).ln())
}

/// The centering constant of the classical sup-norm band:
/// `u_n = (log[(1/2pi) sqrt(int K'^2 / kappa)] + log[(c2 - c1)/pi])
/// / (sqrt(2) log(1/h_n))`.
pub fn u_n(kernel: &Kernel, c_bounds: (f64, f64), h_n: f64) -> Result<f64> {
    if kernel.dimension() != 1 {
        return Err(Error::FamilyPrecondition(format!(
            "u_n is one-dimensional; kernel has d={}",
            kernel.dimension()
        )));
    }
    let (c1, c2) = c_bounds;
    if !(c2 > c1) {
        return Err(Error::ParameterOutOfRange {
            name: "c2",
            value: c2,
            requirement: format!("greater than c1 = {c1}"),
        });
    }
    if !(h_n > 0.0 && h_n < 1.0) {
        return Err(Error::BandwidthNotSubunit(h_n));
    }
    let deriv_sq = kernel.deriv_sq_integral()?;
    let kappa = kernel.kappa()?;
    let log_inv_h = -h_n.ln();
    let kernel_term = ((deriv_sq / kappa).sqrt() / (2.0 * std::f64::consts::PI)).ln();
    let length_term = ((c2 - c1) / std::f64::consts::PI).ln();
    Ok((kernel_term + length_term) / (SQRT_2 * log_inv_h))
}

struct SupNormScale {
    h_n: f64,
    bracket: f64,
    log_inv_h: f64,
    n_h: f64,
}

/// Validates the classical band preconditions and evaluates the width
/// bracket shared by the classical and translated constructions.
fn sup_norm_scale(
    kernel: &Kernel,
    alpha: f64,
    c_bounds: (f64, f64),
    schedule: &ScheduleSet,
    n: u64,
) -> Result<SupNormScale> {
    if schedule.d != 1 {
        return Err(Error::FamilyPrecondition(format!(
            "classical sup-norm band is one-dimensional; schedule has d={}",
            schedule.d
        )));
    }
    if schedule.h.log_exp != 0.0 || schedule.h.loglog_exp != 0.0 {
        return Err(Error::FamilyPrecondition(
            "classical sup-norm band requires h = n^-a without log factors".into(),
        ));
    }
    let a = -schedule.h.n_exp;
    if !(a > 0.2 && a < 0.5) {
        return Err(Error::FamilyPrecondition(format!(
            "a must lie in (1/5, 1/2), got a = {a}"
        )));
    }
    let h_n = schedule.h.eval(n)?;
    if !(h_n < 1.0) {
        return Err(Error::BandwidthNotSubunit(h_n));
    }
    let z = z_alpha(alpha)?;
    let u = u_n(kernel, c_bounds, h_n)?;
    let log_inv_h = -h_n.ln();
    let bracket = SQRT_2 + u + z / (SQRT_2 * log_inv_h);
    if !(bracket > 0.0) {
        return Err(Error::BandConstruction(format!(
            "width bracket sqrt(2) + u_n + z_alpha/(sqrt(2) log(1/h)) = {bracket} is not positive \
             at n = {n}"
        )));
    }
    Ok(SupNormScale {
        h_n,
        bracket,
        log_inv_h,
        n_h: n as f64 * h_n,
    })
}

fn sup_norm_half_width(fn_value: f64, kappa: f64, scale: &SupNormScale) -> f64 {
    (fn_value * kappa).sqrt() / scale.n_h.sqrt() * scale.log_inv_h.sqrt() * scale.bracket
}

/// Classical sup-norm band: centers at the variance-bandwidth estimate
/// `f_n` with half-width
/// `sqrt(f_n kappa) / sqrt(n h) * sqrt(log(1/h)) *
/// (sqrt(2) + u_n + z_alpha / (sqrt(2) log(1/h)))`.
pub fn band_bickel_rosenblatt(
    fdens: &DensityEstimate,
    kernel: &Kernel,
    alpha: f64,
    c_bounds: (f64, f64),
    schedule: &ScheduleSet,
    n: u64,
) -> Result<ConfidenceBand> {
    if fdens.grid.dimension() != 1 || kernel.dimension() != 1 {
        return Err(Error::FamilyPrecondition(
            "classical sup-norm band is one-dimensional".into(),
        ));
    }
    let kappa = kernel.kappa()?;
    let scale = sup_norm_scale(kernel, alpha, c_bounds, schedule, n)?;
    let intervals = fdens
        .values
        .iter()
        .map(|&f| PointwiseInterval {
            center: f,
            half_width: sup_norm_half_width(f, kappa, &scale),
        })
        .collect();
    Ok(ConfidenceBand {
        grid: Arc::clone(&fdens.grid),
        intervals,
        tag: ConstructionTag::Br,
        params: BandParams {
            n: Some(n),
            alpha: Some(alpha),
            h_n: Some(scale.h_n),
            c_bounds: Some(c_bounds),
            ..BandParams::bare(kappa)
        },
        truncation_triggered: Vec::new(),
    })
}

/// The translated band: identical half-widths to the classical band, with
/// every interval recentered at `f*(x)`.
pub fn band_translated(
    fstar: &DensityEstimate,
    fdens: &DensityEstimate,
    kernel: &Kernel,
    alpha: f64,
    c_bounds: (f64, f64),
    schedule: &ScheduleSet,
    n: u64,
) -> Result<ConfidenceBand> {
    validate_pair(fstar, fdens)?;
    if fdens.grid.dimension() != 1 || kernel.dimension() != 1 {
        return Err(Error::FamilyPrecondition(
            "translated sup-norm band is one-dimensional".into(),
        ));
    }
    let kappa = kernel.kappa()?;
    let scale = sup_norm_scale(kernel, alpha, c_bounds, schedule, n)?;
    let intervals = fstar
        .values
        .iter()
        .zip(&fdens.values)
        .map(|(&fs, &f)| PointwiseInterval {
            center: fs,
            half_width: sup_norm_half_width(f, kappa, &scale),
        })
        .collect();
    Ok(ConfidenceBand {
        grid: Arc::clone(&fstar.grid),
        intervals,
        tag: ConstructionTag::Translated,
        params: BandParams {
            n: Some(n),
            alpha: Some(alpha),
            h_n: Some(scale.h_n),
            h_star_n: Some(fstar.bandwidth),
            c_bounds: Some(c_bounds),
            ..BandParams::bare(kappa)
        },
        truncation_triggered: Vec::new(),
    })
}

fn simplified_scale(schedule: &ScheduleSet, n: u64, delta: f64) -> Result<(f64, f64)> {
    let h_n = schedule.h.eval(n)?;
    if !(h_n > 0.0 && h_n < 1.0) {
        return Err(Error::BandwidthNotSubunit(h_n));
    }
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "delta",
            value: delta,
            requirement: "nonnegative and finite".into(),
        });
    }
    // implied normalization v = sqrt(n h^d / log(1/h))
    let v_n = (n as f64 * h_n.powi(schedule.d as i32) / (-h_n.ln())).sqrt();
    Ok((h_n, v_n))
}

/// Simplified band: centers at `f*` with half-width
/// `delta * sqrt(f_n kappa / (n h^d)) * sqrt(log(1/h))`. The bracket terms
/// `u_n` and `z_alpha` are dropped; `delta = sqrt(2)` reproduces the
/// published width. Valid in any dimension.
pub fn band_simplified(
    fstar: &DensityEstimate,
    fdens: &DensityEstimate,
    kernel: &Kernel,
    schedule: &ScheduleSet,
    n: u64,
    delta: f64,
) -> Result<ConfidenceBand> {
    validate_pair(fstar, fdens)?;
    if kernel.dimension() != schedule.d || fstar.grid.dimension() != schedule.d {
        return Err(Error::DimensionMismatch {
            expected: schedule.d,
            got: fstar.grid.dimension(),
        });
    }
    let kappa = kernel.kappa()?;
    let (h_n, v_n) = simplified_scale(schedule, n, delta)?;
    let intervals = fstar
        .values
        .iter()
        .zip(&fdens.values)
        .map(|(&fs, &f)| interval_hat(fs, f, kappa, v_n, delta))
        .collect();
    Ok(ConfidenceBand {
        grid: Arc::clone(&fstar.grid),
        intervals,
        tag: ConstructionTag::Simplified,
        params: BandParams {
            n: Some(n),
            delta: Some(delta),
            v_n: Some(v_n),
            h_n: Some(h_n),
            h_star_n: Some(fstar.bandwidth),
            ..BandParams::bare(kappa)
        },
        truncation_triggered: Vec::new(),
    })
}

/// Truncated band: the simplified width with the variance proxy floored by
/// the selected truncation; centers at `f*`. Valid in any dimension.
pub fn band_truncated(
    fstar: &DensityEstimate,
    fdens: &DensityEstimate,
    kernel: &Kernel,
    schedule: &ScheduleSet,
    n: u64,
    mode: TruncationMode,
    delta: f64,
) -> Result<ConfidenceBand> {
    validate_pair(fstar, fdens)?;
    if kernel.dimension() != schedule.d || fstar.grid.dimension() != schedule.d {
        return Err(Error::DimensionMismatch {
            expected: schedule.d,
            got: fstar.grid.dimension(),
        });
    }
    let kappa = kernel.kappa()?;
    let (h_n, v_n) = simplified_scale(schedule, n, delta)?;
    let eps_n = schedule.eps.eval(n)?;
    let floored = match mode {
        TruncationMode::Tilde => truncate_tilde(fdens, eps_n)?,
        TruncationMode::Sup => truncate_sup(fdens, eps_n)?,
        TruncationMode::None => {
            return Err(Error::FamilyPrecondition(
                "truncated band requires truncation mode tilde or sup".into(),
            ))
        }
    };
    let triggered: Vec<bool> = fdens
        .values
        .iter()
        .zip(&floored)
        .map(|(&f, &t)| t > f)
        .collect();
    let intervals = fstar
        .values
        .iter()
        .zip(&floored)
        .map(|(&fs, &t)| interval_hat(fs, t, kappa, v_n, delta))
        .collect();
    Ok(ConfidenceBand {
        grid: Arc::clone(&fstar.grid),
        intervals,
        tag: ConstructionTag::Truncated,
        params: BandParams {
            n: Some(n),
            delta: Some(delta),
            v_n: Some(v_n),
            h_n: Some(h_n),
            h_star_n: Some(fstar.bandwidth),
            eps_n: Some(eps_n),
            trunc: mode,
            ..BandParams::bare(kappa)
        },
        truncation_triggered: triggered,
    })
}

/// Result of checking a band against ground truth on its grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Containment {
    pub contained: bool,
    pub first_violation: Option<usize>,
}

/// True when the truth lies inside the closed interval at every grid point;
/// otherwise reports the first violating point in grid order.
pub fn band_contains(band: &ConfidenceBand, truth: &[f64]) -> Result<Containment> {
    if truth.len() != band.intervals.len() {
        return Err(Error::GridMismatch(format!(
            "truth has {} values for a {}-point band",
            truth.len(),
            band.intervals.len()
        )));
    }
    for (i, (interval, &t)) in band.intervals.iter().zip(truth).enumerate() {
        if !interval.contains(t) {
            return Ok(Containment {
                contained: false,
                first_violation: Some(i),
            });
        }
    }
    Ok(Containment {
        contained: true,
        first_violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::EvaluationGrid;
    use crate::schedules::{preset_bickel_rosenblatt, preset_translated, RateSequence};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn estimate_on(grid: &Arc<EvaluationGrid>, values: Vec<f64>, h: f64) -> DensityEstimate {
        DensityEstimate {
            grid: Arc::clone(grid),
            values,
            bandwidth: h,
            kernel_id: "test".into(),
        }
    }

    fn grid_1d(count: usize) -> Arc<EvaluationGrid> {
        EvaluationGrid::new(&[(0.0, (count - 1) as f64)], &[1.0]).unwrap()
    }

    #[test]
    fn truncate_tilde_branches() {
        let grid = grid_1d(3);
        let est = estimate_on(&grid, vec![0.5, 0.0, 0.1], 0.2);
        let t = truncate_tilde(&est, 0.1).unwrap();
        assert_eq!(t, vec![0.5, 0.1, 0.1]);
        assert!(truncate_tilde(&est, 0.0).is_err());
    }

    #[test]
    fn truncate_sup_threshold_arithmetic() {
        let grid = grid_1d(3);
        let est = estimate_on(&grid, vec![0.8, 2.0, 0.0], 0.2);
        // M = 2, eps = 0.5 -> threshold 1.0
        let t = truncate_sup(&est, 0.5).unwrap();
        assert_eq!(t, vec![1.0, 2.0, 1.0]);
        // eps = 1 floors everything at M
        let t = truncate_sup(&est, 1.0).unwrap();
        assert_eq!(t, vec![2.0, 2.0, 2.0]);
        let zeros = estimate_on(&grid, vec![0.0, 0.0, 0.0], 0.2);
        assert!(matches!(
            truncate_sup(&zeros, 0.5),
            Err(Error::AllZeroEstimate)
        ));
        assert!(truncate_sup(&est, 1.5).is_err());
    }

    #[test]
    fn interval_hat_frozen_arithmetic() {
        // direct arithmetic oracle: 2 sqrt(0.36 * 0.6) / 10
        let iv = interval_hat(0.4, 0.36, 0.6, 10.0, 2.0);
        let expected_hw = 2.0 * (0.36f64 * 0.6).sqrt() / 10.0;
        assert_abs_diff_eq!(iv.half_width, expected_hw, epsilon = 1e-15);
        assert_abs_diff_eq!(iv.half_width, 0.09295160030897806, epsilon = 1e-12);
        assert_abs_diff_eq!(iv.lower(), 0.30704839969102196, epsilon = 1e-12);
        assert_abs_diff_eq!(iv.upper(), 0.4929516003089781, epsilon = 1e-12);

        assert_eq!(interval_hat(0.4, 0.36, 0.6, 10.0, 0.0).half_width, 0.0);
        assert_eq!(interval_hat(0.4, 0.0, 0.6, 10.0, 2.0).half_width, 0.0);
    }

    #[test]
    fn z_alpha_round_trips() {
        for alpha in [0.01, 0.05, 0.1, 1.0 - (-2.0f64).exp()] {
            let z = z_alpha(alpha).unwrap();
            let back = (-2.0 * (-z).exp()).exp();
            assert_abs_diff_eq!(back, 1.0 - alpha, epsilon = 1e-10);
        }
        // closed-form arithmetic: -log(-log(0.95)/2)
        let z = z_alpha(0.05).unwrap();
        assert_abs_diff_eq!(z, -((-(0.95f64.ln())) / 2.0).ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(z, 3.663342429602109, epsilon = 1e-10);
        // inversion at zero
        assert_eq!(z_alpha(1.0 - (-2.0f64).exp()).unwrap(), 0.0);
        // monotone increasing as alpha shrinks
        assert!(z_alpha(0.01).unwrap() > z_alpha(0.05).unwrap());
        assert!(z_alpha(1e-12).unwrap() > z_alpha(0.01).unwrap());
        assert!(z_alpha(0.0).is_err());
        assert!(z_alpha(1.0).is_err());
    }

    #[test]
    fn u_n_direct_arithmetic() {
        let k = Kernel::epanechnikov(1);
        let h = 1000f64.powf(-0.3);
        let got = u_n(&k, (0.0, 1.0), h).unwrap();
        // independent composition of the published expression
        let log_inv_h = 0.3 * 1000f64.ln();
        let term1 = ((1.5f64 / 0.6).sqrt() / (2.0 * std::f64::consts::PI)).ln();
        let term2 = (1.0 / std::f64::consts::PI).ln();
        let expected = (term1 + term2) / (std::f64::consts::SQRT_2 * log_inv_h);
        assert_abs_diff_eq!(got, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(got, -0.8613, epsilon = 1e-4);
    }

    #[test]
    fn u_n_cancellation_kernel() {
        // kappa = 1 and int K'^2 = 4 pi^4 make
        // (1/2pi) sqrt(int K'^2 / kappa) = pi, cancelling log[(c2-c1)/pi]
        // for C = [0, 1]
        let custom = crate::kernels::CustomKernel {
            name: "cancel".into(),
            eval: Arc::new(|_| 0.0),
            support_radius: Some(1.0),
            kappa: Some(1.0),
            deriv_sq_integral: Some(4.0 * std::f64::consts::PI.powi(4)),
            holder: None,
            covering_number: true,
        };
        let k = Kernel::product(vec![crate::kernels::BaseKernel::Custom(custom)]).unwrap();
        let u = u_n(&k, (0.0, 1.0), 0.1).unwrap();
        assert_abs_diff_eq!(u, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn u_n_vanishes_as_h_shrinks() {
        // u_n scales as 1/log(1/h), so |u_n| decreases toward 0 along any
        // sequence h -> 0
        let k = Kernel::epanechnikov(1);
        let coarse = u_n(&k, (0.0, 1.0), 0.2).unwrap().abs();
        let mid = u_n(&k, (0.0, 1.0), 1e-6).unwrap().abs();
        let fine = u_n(&k, (0.0, 1.0), 1e-60).unwrap().abs();
        assert!(mid < coarse);
        assert!(fine < mid);
        assert!(fine < 0.02);
    }

    #[test]
    fn u_n_rejections() {
        let k = Kernel::epanechnikov(1);
        assert!(matches!(u_n(&k, (0.0, 1.0), 1.0), Err(Error::BandwidthNotSubunit(_))));
        assert!(matches!(u_n(&k, (1.0, 0.0), 0.1), Err(Error::ParameterOutOfRange { .. })));
        assert!(u_n(&Kernel::uniform(1), (0.0, 1.0), 0.1).is_err());
        assert!(u_n(&Kernel::epanechnikov(2), (0.0, 1.0), 0.1).is_err());
    }

    fn sample_grid_and_estimates() -> (Arc<EvaluationGrid>, DensityEstimate, DensityEstimate) {
        let grid = EvaluationGrid::new(&[(-1.0, 1.0)], &[1.0]).unwrap();
        let fstar = estimate_on(&grid, vec![0.30, 0.42, 0.28], 0.2);
        let fdens = estimate_on(&grid, vec![0.25, 0.40, 0.31], 0.1);
        (grid, fstar, fdens)
    }

    #[test]
    fn br_band_composes_from_sub_operations() {
        let kernel = Kernel::epanechnikov(1);
        let schedule = preset_bickel_rosenblatt(0.3, None).unwrap();
        let n = 5000u64;
        let (_grid, _fstar, fdens) = sample_grid_and_estimates();
        let alpha = 0.05;
        let band =
            band_bickel_rosenblatt(&fdens, &kernel, alpha, (-1.0, 1.0), &schedule, n).unwrap();
        let h_n = (n as f64).powf(-0.3);
        let log_inv_h = -(h_n.ln());
        let z = z_alpha(alpha).unwrap();
        let u = u_n(&kernel, (-1.0, 1.0), h_n).unwrap();
        let bracket = std::f64::consts::SQRT_2 + u + z / (std::f64::consts::SQRT_2 * log_inv_h);
        for (i, interval) in band.intervals.iter().enumerate() {
            let f = fdens.values[i];
            assert_eq!(interval.center, f, "centers sit at the variance estimate");
            let expected = (f * 0.6).sqrt() / (n as f64 * h_n).sqrt() * log_inv_h.sqrt() * bracket;
            assert_abs_diff_eq!(interval.half_width, expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn br_band_monotone_in_alpha() {
        let kernel = Kernel::epanechnikov(1);
        let schedule = preset_bickel_rosenblatt(0.3, None).unwrap();
        let (_g, _fs, fdens) = sample_grid_and_estimates();
        let wide = band_bickel_rosenblatt(&fdens, &kernel, 0.01, (-1.0, 1.0), &schedule, 4000)
            .unwrap();
        let narrow = band_bickel_rosenblatt(&fdens, &kernel, 0.10, (-1.0, 1.0), &schedule, 4000)
            .unwrap();
        for (w, n) in wide.intervals.iter().zip(&narrow.intervals) {
            assert!(w.half_width > n.half_width);
        }
    }

    #[test]
    fn br_band_rejects_bad_exponent() {
        let kernel = Kernel::epanechnikov(1);
        let h = RateSequence::power(1.0, -0.1);
        let v = RateSequence::power(1.0, 0.45);
        let schedule =
            crate::schedules::ScheduleSet::new(h, h, v, RateSequence::constant(0.5), 1).unwrap();
        let (_g, _fs, fdens) = sample_grid_and_estimates();
        match band_bickel_rosenblatt(&fdens, &kernel, 0.05, (-1.0, 1.0), &schedule, 4000) {
            Err(Error::FamilyPrecondition(msg)) => assert!(msg.contains("(1/5, 1/2)")),
            other => panic!("expected family precondition error, got {other:?}"),
        }
    }

    #[test]
    fn translated_band_shares_widths_and_shifts_centers() {
        let kernel = Kernel::epanechnikov(1);
        let schedule = preset_translated(0.3, 1, None).unwrap();
        let (_g, fstar, fdens) = sample_grid_and_estimates();
        let br = band_bickel_rosenblatt(&fdens, &kernel, 0.05, (-1.0, 1.0), &schedule, 4000)
            .unwrap();
        let tr = band_translated(&fstar, &fdens, &kernel, 0.05, (-1.0, 1.0), &schedule, 4000)
            .unwrap();
        for (i, (b, t)) in br.intervals.iter().zip(&tr.intervals).enumerate() {
            assert_eq!(b.half_width, t.half_width, "width differs at {i}");
            assert_eq!(t.center, fstar.values[i]);
            assert_eq!(t.center - b.center, fstar.values[i] - fdens.values[i]);
        }
    }

    #[test]
    fn translated_equals_br_when_bandwidths_agree() {
        let kernel = Kernel::epanechnikov(1);
        let schedule = preset_bickel_rosenblatt(0.3, None).unwrap();
        let (_g, _fs, fdens) = sample_grid_and_estimates();
        let br = band_bickel_rosenblatt(&fdens, &kernel, 0.05, (-1.0, 1.0), &schedule, 4000)
            .unwrap();
        // h* = h means f* = f_n: pass the same estimate twice
        let tr = band_translated(&fdens, &fdens, &kernel, 0.05, (-1.0, 1.0), &schedule, 4000)
            .unwrap();
        for (b, t) in br.intervals.iter().zip(&tr.intervals) {
            assert_eq!(b, t);
        }
    }

    #[test]
    fn simplified_band_ratio_to_translated() {
        let kernel = Kernel::epanechnikov(1);
        let schedule = preset_translated(0.3, 1, None).unwrap();
        let (_g, fstar, fdens) = sample_grid_and_estimates();
        let n = 4000u64;
        let alpha = 0.05;
        let tr =
            band_translated(&fstar, &fdens, &kernel, alpha, (-1.0, 1.0), &schedule, n).unwrap();
        let simple =
            band_simplified(&fstar, &fdens, &kernel, &schedule, n, SQRT_2).unwrap();
        let h_n = schedule.h.eval(n).unwrap();
        let log_inv_h = -h_n.ln();
        let bracket = SQRT_2
            + u_n(&kernel, (-1.0, 1.0), h_n).unwrap()
            + z_alpha(alpha).unwrap() / (SQRT_2 * log_inv_h);
        let expected_ratio = SQRT_2 / bracket;
        for (s, t) in simple.intervals.iter().zip(&tr.intervals) {
            if t.half_width > 0.0 {
                assert_abs_diff_eq!(
                    s.half_width / t.half_width,
                    expected_ratio,
                    epsilon = 1e-12
                );
            }
            assert_eq!(s.center, t.center);
        }
    }

    #[test]
    fn simplified_equals_hat_with_implied_normalization() {
        let kernel = Kernel::epanechnikov(1);
        let schedule = preset_translated(0.3, 1, None).unwrap();
        let (_g, fstar, fdens) = sample_grid_and_estimates();
        let n = 4000u64;
        let simple = band_simplified(&fstar, &fdens, &kernel, &schedule, n, SQRT_2).unwrap();
        let h_n = schedule.h.eval(n).unwrap();
        let v_n = (n as f64 * h_n / (-h_n.ln())).sqrt();
        let hat = band_hat(&fstar, &fdens, 0.6, v_n, SQRT_2).unwrap();
        for (s, h) in simple.intervals.iter().zip(&hat.intervals) {
            assert_eq!(s, h);
        }
    }

    #[test]
    fn truncated_band_2d_per_point_oracle() {
        let kernel = Kernel::from_name("product:epanechnikov,epanechnikov", 2).unwrap();
        let schedule = preset_translated(0.25, 2, None).unwrap();
        let grid = EvaluationGrid::new(&[(0.0, 1.0), (0.0, 1.0)], &[0.5, 0.5]).unwrap();
        let n = 2000u64;
        let fstar = estimate_on(&grid, (0..9).map(|i| 0.1 + 0.02 * i as f64).collect(), 0.3);
        let fdens = estimate_on(&grid, (0..9).map(|i| 0.05 + 0.03 * i as f64).collect(), 0.2);
        let band = band_truncated(
            &fstar,
            &fdens,
            &kernel,
            &schedule,
            n,
            TruncationMode::Sup,
            SQRT_2,
        )
        .unwrap();
        let kappa = 0.36; // 0.6^2
        let h_n = schedule.h.eval(n).unwrap();
        let eps_n = schedule.eps.eval(n).unwrap();
        let sup = 0.05 + 0.03 * 8.0;
        let log_inv_h = -h_n.ln();
        for (i, interval) in band.intervals.iter().enumerate() {
            let t = fdens.values[i].max(eps_n * sup);
            // direct arithmetic with the n h^2 normalization
            let expected =
                SQRT_2 * (t * kappa).sqrt() / (n as f64 * h_n * h_n).sqrt() * log_inv_h.sqrt();
            assert_abs_diff_eq!(interval.half_width, expected, epsilon = 1e-13);
            assert_eq!(interval.center, fstar.values[i]);
            assert_eq!(band.truncation_triggered[i], fdens.values[i] < eps_n * sup);
        }
    }

    #[test]
    fn hat_band_composes_from_pointwise_intervals() {
        let (_g, fstar, fdens) = sample_grid_and_estimates();
        let band = band_hat(&fstar, &fdens, 0.6, 12.5, 1.7).unwrap();
        assert_eq!(band.len(), 3);
        for i in 0..3 {
            let expected = interval_hat(fstar.values[i], fdens.values[i], 0.6, 12.5, 1.7);
            assert_eq!(band.intervals[i], expected);
        }
    }

    #[test]
    fn check_band_matches_hat_when_floor_never_triggers() {
        let (_g, fstar, fdens) = sample_grid_and_estimates();
        let hat = band_hat(&fstar, &fdens, 0.6, 12.0, 1.5).unwrap();
        // every value exceeds eps -> identical to the untruncated band
        let check =
            band_check(&fstar, &fdens, 0.6, 12.0, 1.5, 0.01, TruncationMode::Tilde).unwrap();
        for (h, c) in hat.intervals.iter().zip(&check.intervals) {
            assert_eq!(h, c);
        }
        assert_eq!(check.truncation_fraction(), 0.0);
    }

    #[test]
    fn band_contains_boundary_conventions() {
        let (_g, fstar, fdens) = sample_grid_and_estimates();
        let band = band_hat(&fstar, &fdens, 0.6, 10.0, 1.0).unwrap();
        let centers: Vec<f64> = band.intervals.iter().map(|iv| iv.center).collect();
        assert!(band_contains(&band, &centers).unwrap().contained);

        // boundary point is covered (closed interval)
        let mut at_edge = centers.clone();
        at_edge[1] = band.intervals[1].upper();
        assert!(band_contains(&band, &at_edge).unwrap().contained);

        // a 1e-9 exceedance is a miss, reported at the first violation
        let mut outside = centers.clone();
        outside[1] = band.intervals[1].upper() + 1e-9;
        let c = band_contains(&band, &outside).unwrap();
        assert!(!c.contained);
        assert_eq!(c.first_violation, Some(1));

        assert!(band_contains(&band, &centers[..2]).is_err());
    }

    #[test]
    fn grid_mismatch_detected() {
        let grid_a = EvaluationGrid::new(&[(-1.0, 1.0)], &[1.0]).unwrap();
        let grid_b = EvaluationGrid::new(&[(-1.0, 1.0)], &[0.5]).unwrap();
        let fstar = estimate_on(&grid_a, vec![0.1, 0.2, 0.3], 0.2);
        let fdens = estimate_on(&grid_b, vec![0.1; 5], 0.1);
        assert!(matches!(
            band_hat(&fstar, &fdens, 0.6, 10.0, 1.0),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn csv_export_shape() {
        let (_g, fstar, fdens) = sample_grid_and_estimates();
        let band =
            band_check(&fstar, &fdens, 0.6, 10.0, 1.0, 0.35, TruncationMode::Tilde).unwrap();
        let mut buf = Vec::new();
        band.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x1,center,lower,upper,half_width,truncated");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",1") || lines[1].ends_with(",0"));
    }

    proptest! {
        #[test]
        fn delta_monotonicity(
            values in proptest::collection::vec((0.0f64..2.0, 0.0f64..2.0), 2..40),
            d1 in 0.0f64..3.0,
            extra in 0.0f64..3.0,
            v_n in 0.5f64..50.0,
        ) {
            let grid = EvaluationGrid::new(&[(0.0, (values.len() - 1) as f64)], &[1.0]).unwrap();
            let fstar = estimate_on(&grid, values.iter().map(|p| p.0).collect(), 0.2);
            let fdens = estimate_on(&grid, values.iter().map(|p| p.1).collect(), 0.1);
            let d2 = d1 + extra;
            let narrow = band_hat(&fstar, &fdens, 0.6, v_n, d1).unwrap();
            let wide = band_hat(&fstar, &fdens, 0.6, v_n, d2).unwrap();
            for (n, w) in narrow.intervals.iter().zip(&wide.intervals) {
                prop_assert!(w.lower() <= n.lower());
                prop_assert!(w.upper() >= n.upper());
            }
        }

        #[test]
        fn truncation_dominance(
            values in proptest::collection::vec((0.0f64..2.0, 0.0f64..2.0), 2..40),
            eps in 0.01f64..1.0,
            v_n in 0.5f64..50.0,
        ) {
            let grid = EvaluationGrid::new(&[(0.0, (values.len() - 1) as f64)], &[1.0]).unwrap();
            let fstar = estimate_on(&grid, values.iter().map(|p| p.0).collect(), 0.2);
            let fdens = estimate_on(&grid, values.iter().map(|p| p.1).collect(), 0.1);
            let plain = band_hat(&fstar, &fdens, 0.6, v_n, 1.0).unwrap();
            let floored = band_check(&fstar, &fdens, 0.6, v_n, 1.0, eps, TruncationMode::Tilde)
                .unwrap();
            for (i, (p, f)) in plain.intervals.iter().zip(&floored.intervals).enumerate() {
                prop_assert!(f.half_width >= p.half_width);
                if fdens.values[i] >= eps {
                    prop_assert_eq!(f.half_width, p.half_width);
                }
            }
        }

        #[test]
        fn sup_mode_with_eps_one_gives_constant_width(
            values in proptest::collection::vec(0.0f64..2.0, 2..40),
            v_n in 0.5f64..50.0,
        ) {
            prop_assume!(values.iter().any(|&v| v > 0.0));
            let grid = EvaluationGrid::new(&[(0.0, (values.len() - 1) as f64)], &[1.0]).unwrap();
            let fstar = estimate_on(&grid, values.clone(), 0.2);
            let fdens = estimate_on(&grid, values, 0.1);
            let band = band_check(&fstar, &fdens, 0.6, v_n, 1.0, 1.0, TruncationMode::Sup)
                .unwrap();
            let w0 = band.intervals[0].half_width;
            for iv in &band.intervals {
                prop_assert_eq!(iv.half_width, w0);
            }
        }
    }
}
