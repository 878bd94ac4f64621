//! Monte Carlo measurement of band coverage.
//!
//! Replications are seeded by a documented splitting rule: replication `r`
//! at sample size `n` under master seed `s` draws from the ChaCha12 stream
//! `n * 2^24 + r + 1` of the cipher keyed by `s` (stream 0 is reserved for
//! single-path probes). Each replication is self-contained, so parallel and
//! serial runs produce bit-identical reports, and results are aggregated in
//! replication order regardless of scheduling.
//!
//! Coverage is assessed on the evaluation grid, an explicit
//! under-approximation of the continuous containment event; the default
//! grid spacing is a quarter of the smaller bandwidth.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::bands::{
    band_bickel_rosenblatt, band_check, band_contains, band_hat, band_simplified,
    band_translated, band_truncated, BandFamily, ConfidenceBand, TruncationMode,
};
use crate::density::Density;
use crate::error::{Error, Result};
use crate::estimator::{kde_on_grid, DensityEstimate, EvaluationGrid};
use crate::kernels::Kernel;
use crate::schedules::ScheduleSet;

const MAX_REPLICATIONS: u32 = 1 << 24;

/// Band configuration for an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandSpec {
    pub family: BandFamily,
    /// Width multiplier for the delta-parameterized families; `sqrt(2)`
    /// reproduces the published simplified/truncated widths.
    pub delta: f64,
    /// Level parameter, required by the classical and translated families.
    pub alpha: Option<f64>,
    pub trunc: TruncationMode,
    /// Interval for the classical normalization constant; defaults to the
    /// grid bounds.
    pub c_bounds: Option<(f64, f64)>,
}

impl BandSpec {
    pub fn new(family: BandFamily) -> BandSpec {
        BandSpec {
            family,
            delta: std::f64::consts::SQRT_2,
            alpha: None,
            trunc: match family {
                BandFamily::Check | BandFamily::Truncated => TruncationMode::Sup,
                _ => TruncationMode::None,
            },
            c_bounds: None,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> BandSpec {
        self.delta = delta;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> BandSpec {
        self.alpha = Some(alpha);
        self
    }

    pub fn with_trunc(mut self, trunc: TruncationMode) -> BandSpec {
        self.trunc = trunc;
        self
    }

    pub fn with_c_bounds(mut self, c_bounds: (f64, f64)) -> BandSpec {
        self.c_bounds = Some(c_bounds);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            BandFamily::BickelRosenblatt | BandFamily::Translated => {
                if self.alpha.is_none() {
                    return Err(Error::FamilyPrecondition(format!(
                        "family '{}' requires alpha",
                        self.family.as_str()
                    )));
                }
                if self.trunc != TruncationMode::None {
                    return Err(Error::FamilyPrecondition(format!(
                        "family '{}' does not take a truncation mode",
                        self.family.as_str()
                    )));
                }
            }
            BandFamily::Hat | BandFamily::Simplified => {
                if self.trunc != TruncationMode::None {
                    return Err(Error::FamilyPrecondition(format!(
                        "family '{}' is untruncated; use check or truncated instead",
                        self.family.as_str()
                    )));
                }
                if self.alpha.is_some() {
                    return Err(Error::FamilyPrecondition(format!(
                        "family '{}' is parameterized by delta, not alpha",
                        self.family.as_str()
                    )));
                }
            }
            BandFamily::Check | BandFamily::Truncated => {
                if self.trunc == TruncationMode::None {
                    return Err(Error::FamilyPrecondition(format!(
                        "family '{}' requires truncation mode tilde or sup",
                        self.family.as_str()
                    )));
                }
                if self.alpha.is_some() {
                    return Err(Error::FamilyPrecondition(format!(
                        "family '{}' is parameterized by delta, not alpha",
                        self.family.as_str()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether the center estimate `f*` enters the construction.
    fn needs_fstar(&self) -> bool {
        !matches!(self.family, BandFamily::BickelRosenblatt)
    }
}

/// Evaluation-grid configuration; unset fields fall back to the density's
/// default region and quarter-bandwidth spacing.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Option<Vec<(f64, f64)>>,
    pub spacing: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn resolve(
        &self,
        density: &Density,
        h_n: f64,
        h_star_n: f64,
    ) -> Result<Arc<EvaluationGrid>> {
        let d = density.dimension();
        let bounds = match &self.bounds {
            Some(b) => {
                if b.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: b.len(),
                    });
                }
                b.clone()
            }
            None => density.default_region(),
        };
        let spacing = match &self.spacing {
            Some(s) => {
                if s.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: s.len(),
                    });
                }
                s.clone()
            }
            None => vec![h_n.min(h_star_n) / 4.0; d],
        };
        EvaluationGrid::new(&bounds, &spacing)
    }
}

/// Builds the configured band from the two estimates.
pub fn build_band(
    spec: &BandSpec,
    fstar: &DensityEstimate,
    fdens: &DensityEstimate,
    kernel: &Kernel,
    schedule: &ScheduleSet,
    n: u64,
) -> Result<ConfidenceBand> {
    spec.validate()?;
    let c_bounds = match spec.c_bounds {
        Some(b) => b,
        None => {
            let bounds = fdens.grid.bounds();
            (bounds[0].0, bounds[0].1)
        }
    };
    match spec.family {
        BandFamily::Hat => {
            let v_n = schedule.v.eval(n)?;
            band_hat(fstar, fdens, kernel.kappa()?, v_n, spec.delta)
        }
        BandFamily::Check => {
            let v_n = schedule.v.eval(n)?;
            let eps_n = schedule.eps.eval(n)?;
            band_check(
                fstar,
                fdens,
                kernel.kappa()?,
                v_n,
                spec.delta,
                eps_n,
                spec.trunc,
            )
        }
        BandFamily::BickelRosenblatt => {
            let alpha = spec.alpha.expect("validated");
            band_bickel_rosenblatt(fdens, kernel, alpha, c_bounds, schedule, n)
        }
        BandFamily::Translated => {
            let alpha = spec.alpha.expect("validated");
            band_translated(fstar, fdens, kernel, alpha, c_bounds, schedule, n)
        }
        BandFamily::Simplified => band_simplified(fstar, fdens, kernel, schedule, n, spec.delta),
        BandFamily::Truncated => {
            band_truncated(fstar, fdens, kernel, schedule, n, spec.trunc, spec.delta)
        }
    }
}

/// Per-sample-size Monte Carlo summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub n: u64,
    #[serde(rename = "R")]
    pub reps: u32,
    #[serde(rename = "miss")]
    pub misses: u32,
    pub phat: f64,
    pub se: f64,
    pub w_n: f64,
}

/// Monte Carlo non-coverage estimates across sample sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub seed: u64,
    pub density: String,
    pub kernel: String,
    pub band: BandSpec,
    pub entries: Vec<CoverageEntry>,
}

/// The stream for replication `rep` at sample size `n`: every `(n, rep)`
/// pair maps to a distinct ChaCha12 stream of the master-seeded cipher.
fn replication_rng(seed: u64, n: u64, rep: u32) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(n.wrapping_shl(24) + rep as u64 + 1);
    rng
}

/// Stream 0, reserved for single-path (one seed = one sample path) probes.
fn path_rng(seed: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

fn validate_increasing(name: &'static str, ns: &[u64]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidSchedule(format!("{name} must be nonempty")));
    }
    if !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidSchedule(format!(
            "{name} must be strictly increasing"
        )));
    }
    Ok(())
}

fn validate_experiment(
    density: &Density,
    kernel: &Kernel,
    schedule: &ScheduleSet,
    band: &BandSpec,
) -> Result<()> {
    band.validate()?;
    let d = density.dimension();
    if kernel.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: kernel.dimension(),
        });
    }
    if schedule.d != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: schedule.d,
        });
    }
    Ok(())
}

/// Runs one replication: draw, estimate, build, check.
#[allow(clippy::too_many_arguments)]
fn replicate_once(
    density: &Density,
    kernel: &Kernel,
    schedule: &ScheduleSet,
    band_spec: &BandSpec,
    grid: &Arc<EvaluationGrid>,
    truth: &[f64],
    n: u64,
    h_n: f64,
    h_star_n: f64,
    seed: u64,
    rep: u32,
) -> Result<bool> {
    let mut rng = replication_rng(seed, n, rep);
    let sample = density.sample_n(&mut rng, n as usize);
    let fdens = kde_on_grid(&sample, kernel, h_n, grid)?;
    let fstar = if band_spec.needs_fstar() {
        kde_on_grid(&sample, kernel, h_star_n, grid)?
    } else {
        fdens.clone()
    };
    let band = build_band(band_spec, &fstar, &fdens, kernel, schedule, n)?;
    Ok(band_contains(&band, truth)?.contained)
}

/// Estimates the non-coverage probability of the configured band at each
/// sample size. Deterministic given `(seed, configuration)` regardless of
/// worker count.
#[allow(clippy::too_many_arguments)]
pub fn simulate_noncoverage(
    density: &Density,
    kernel: &Kernel,
    schedule: &ScheduleSet,
    band_spec: &BandSpec,
    grid_spec: &GridSpec,
    n_list: &[u64],
    reps: u32,
    seed: u64,
) -> Result<CoverageReport> {
    validate_experiment(density, kernel, schedule, band_spec)?;
    validate_increasing("n_list", n_list)?;
    if reps == 0 || reps >= MAX_REPLICATIONS {
        return Err(Error::ParameterOutOfRange {
            name: "reps",
            value: reps as f64,
            requirement: format!("between 1 and {}", MAX_REPLICATIONS - 1),
        });
    }
    let mut entries = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let h_n = schedule.h.eval(n)?;
        let h_star_n = schedule.h_star.eval(n)?;
        let grid = grid_spec.resolve(density, h_n, h_star_n)?;
        let truth: Vec<f64> = grid.iter_points().map(|x| density.evaluate(x)).collect();
        let outcomes: Vec<Result<bool>> = (0..reps)
            .into_par_iter()
            .map(|rep| {
                replicate_once(
                    density, kernel, schedule, band_spec, &grid, &truth, n, h_n, h_star_n,
                    seed, rep,
                )
                .map_err(|source| Error::Replication {
                    n,
                    replication: rep,
                    source: Box::new(source),
                })
            })
            .collect();
        let mut misses = 0u32;
        for outcome in outcomes {
            if !outcome? {
                misses += 1;
            }
        }
        let phat = misses as f64 / reps as f64;
        let se = (phat * (1.0 - phat) / reps as f64).sqrt();
        entries.push(CoverageEntry {
            n,
            reps,
            misses,
            phat,
            se,
            w_n: schedule.speed().eval(n)?,
        });
    }
    Ok(CoverageReport {
        seed,
        density: density.id(),
        kernel: kernel.name(),
        band: band_spec.clone(),
        entries,
    })
}

/// Zero-miss handling for the logarithmic fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroCorrection {
    None,
    Half,
}

/// Least-squares fit of `log phat` against the speed `w_n`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogLevelFit {
    /// Estimate of the negated logarithmic level (the slope).
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
    /// Whether the `(miss + 1/2) / (R + 1)` correction was applied.
    pub corrected: bool,
    /// Standard error of the slope; needs at least 3 points.
    pub slope_se: Option<f64>,
}

/// Fits the logarithmic asymptotic level from a coverage report. With
/// `ZeroCorrection::Half`, a zero miss count anywhere switches every entry
/// to `(miss + 1/2) / (R + 1)`; with `None`, zero-miss entries are dropped.
pub fn fit_log_level(report: &CoverageReport, correction: ZeroCorrection) -> Result<LogLevelFit> {
    let any_zero = report.entries.iter().any(|e| e.misses == 0);
    let corrected = correction == ZeroCorrection::Half && any_zero;
    let points: Vec<(f64, f64)> = report
        .entries
        .iter()
        .filter_map(|e| {
            let p = if corrected {
                (e.misses as f64 + 0.5) / (e.reps as f64 + 1.0)
            } else {
                e.phat
            };
            (p > 0.0).then(|| (e.w_n, p.ln()))
        })
        .collect();
    if points.len() < 2 {
        return Err(Error::InsufficientFitPoints(points.len()));
    }
    let k = points.len() as f64;
    let mean_w = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_w).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidSchedule(
            "all speeds w_n coincide; slope undefined".into(),
        ));
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_w) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_w;
    let slope_se = if points.len() >= 3 {
        let rss: f64 = points
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        Some((rss / (k - 2.0) / sxx).sqrt())
    } else {
        None
    };
    Ok(LogLevelFit {
        slope,
        intercept,
        points_used: points.len(),
        corrected,
        slope_se,
    })
}

/// Coverage indicators along one nested sample path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlmostSurePath {
    pub n_grid: Vec<u64>,
    pub covered: Vec<bool>,
    /// Largest n in the grid at which the band missed; `None` when every
    /// band on the path covered the truth.
    pub last_miss: Option<u64>,
}

/// Builds bands from the prefixes of a single i.i.d. stream (one seed = one
/// sample path) and records per-n coverage.
pub fn almost_sure_probe(
    density: &Density,
    kernel: &Kernel,
    schedule: &ScheduleSet,
    band_spec: &BandSpec,
    grid_spec: &GridSpec,
    n_grid: &[u64],
    seed: u64,
) -> Result<AlmostSurePath> {
    validate_experiment(density, kernel, schedule, band_spec)?;
    validate_increasing("n_grid", n_grid)?;
    let max_n = *n_grid.last().expect("nonempty") as usize;
    let mut rng = path_rng(seed);
    let full_sample = density.sample_n(&mut rng, max_n);
    let mut covered = Vec::with_capacity(n_grid.len());
    let mut last_miss = None;
    for &n in n_grid {
        let h_n = schedule.h.eval(n)?;
        let h_star_n = schedule.h_star.eval(n)?;
        let grid = grid_spec.resolve(density, h_n, h_star_n)?;
        let truth: Vec<f64> = grid.iter_points().map(|x| density.evaluate(x)).collect();
        let sample = full_sample.prefix(n as usize)?;
        let fdens = kde_on_grid(&sample, kernel, h_n, &grid)?;
        let fstar = if band_spec.needs_fstar() {
            kde_on_grid(&sample, kernel, h_star_n, &grid)?
        } else {
            fdens.clone()
        };
        let band = build_band(band_spec, &fstar, &fdens, kernel, schedule, n)?;
        let ok = band_contains(&band, &truth)?.contained;
        if !ok {
            last_miss = Some(n);
        }
        covered.push(ok);
    }
    Ok(AlmostSurePath {
        n_grid: n_grid.to_vec(),
        covered,
        last_miss,
    })
}
