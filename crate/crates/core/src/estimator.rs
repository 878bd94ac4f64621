//! Kernel density estimation on points and evaluation grids.
//!
//! The same estimator form serves both bandwidths used by the band
//! constructions: the center estimate and the variance-proxy estimate are
//! one implementation parameterized by `h`. Summation is direct (no tree or
//! FFT acceleration) in a fixed order per evaluation point, so grid
//! evaluation may be partitioned across threads with results identical to a
//! sequential run.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::Kernel;

/// An i.i.d. sample of points in R^d, stored row-major.
#[derive(Debug, Clone)]
pub struct Sample {
    data: Vec<f64>,
    d: usize,
}

impl Sample {
    /// Builds a sample from observation rows; all rows must share one
    /// dimension and there must be at least one row.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Sample> {
        let first = rows.first().ok_or(Error::EmptySample)?;
        let d = first.len();
        if d == 0 {
            return Err(Error::EmptySample);
        }
        let mut data = Vec::with_capacity(rows.len() * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Sample { data, d })
    }

    /// One-dimensional convenience constructor.
    pub fn from_slice(values: &[f64]) -> Result<Sample> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Sample {
            data: values.to_vec(),
            d: 1,
        })
    }

    pub(crate) fn from_flat(data: Vec<f64>, d: usize) -> Sample {
        debug_assert!(d >= 1 && !data.is_empty() && data.len().is_multiple_of(d));
        Sample { data, d }
    }

    /// Reads one observation per row, `d` numeric columns. A non-numeric
    /// first row is treated as a header and skipped.
    pub fn from_csv_reader<R: BufRead>(reader: R) -> Result<Sample> {
        let mut data = Vec::new();
        let mut d = 0usize;
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(row) => {
                    if d == 0 {
                        d = row.len();
                    } else if row.len() != d {
                        return Err(Error::Csv {
                            line: line_no,
                            message: format!("expected {} columns, found {}", d, row.len()),
                        });
                    }
                    data.extend_from_slice(&row);
                }
                Err(_) => {
                    // header rows are only tolerated before any data
                    if data.is_empty() && d == 0 {
                        continue;
                    }
                    return Err(Error::Csv {
                        line: line_no,
                        message: format!("non-numeric field in row '{trimmed}'"),
                    });
                }
            }
        }
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        Ok(Sample { data, d })
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P) -> Result<Sample> {
        let file = std::fs::File::open(path)?;
        Sample::from_csv_reader(BufReader::new(file))
    }

    pub fn n(&self) -> usize {
        self.data.len() / self.d
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    /// The first `n` observations, used for nested sample paths.
    pub fn prefix(&self, n: usize) -> Result<Sample> {
        if n == 0 || n > self.n() {
            return Err(Error::EmptySample);
        }
        Ok(Sample {
            data: self.data[..n * self.d].to_vec(),
            d: self.d,
        })
    }

    /// Coordinate-wise min and max of the observations.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); self.d];
        for i in 0..self.n() {
            for (k, &x) in self.point(i).iter().enumerate() {
                bounds[k].0 = bounds[k].0.min(x);
                bounds[k].1 = bounds[k].1.max(x);
            }
        }
        bounds
    }
}

/// One axis of a regular evaluation grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub count: usize,
}

/// Regular grid of points covering a box region, row-major with the last
/// axis fastest.
#[derive(Debug, Clone)]
pub struct EvaluationGrid {
    axes: Vec<GridAxis>,
    points: Vec<f64>,
}

impl EvaluationGrid {
    /// Builds the grid for per-axis `(lo, hi)` bounds and spacings. Each
    /// axis must end up with at least 2 points.
    pub fn new(bounds: &[(f64, f64)], spacing: &[f64]) -> Result<Arc<EvaluationGrid>> {
        if bounds.is_empty() || bounds.len() != spacing.len() {
            return Err(Error::InvalidGrid(format!(
                "bounds ({}) and spacing ({}) must agree and be nonempty",
                bounds.len(),
                spacing.len()
            )));
        }
        let mut axes = Vec::with_capacity(bounds.len());
        for (&(lo, hi), &step) in bounds.iter().zip(spacing) {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::InvalidGrid(format!("spacing {step} must be positive")));
            }
            if !(hi > lo) {
                return Err(Error::InvalidGrid(format!(
                    "axis bounds [{lo}, {hi}] must satisfy lo < hi"
                )));
            }
            let count = ((hi - lo) / step * (1.0 + 1e-12) + 1e-12).floor() as usize + 1;
            if count < 2 {
                return Err(Error::InvalidGrid(format!(
                    "axis [{lo}, {hi}] with spacing {step} yields fewer than 2 points"
                )));
            }
            axes.push(GridAxis { lo, hi, step, count });
        }
        let d = axes.len();
        let total: usize = axes.iter().map(|a| a.count).product();
        let mut points = Vec::with_capacity(total * d);
        let mut index = vec![0usize; d];
        for _ in 0..total {
            for (k, axis) in axes.iter().enumerate() {
                let coord = (axis.lo + index[k] as f64 * axis.step).min(axis.hi);
                points.push(coord);
            }
            // odometer increment, last axis fastest
            for k in (0..d).rev() {
                index[k] += 1;
                if index[k] < axes[k].count {
                    break;
                }
                index[k] = 0;
            }
        }
        Ok(Arc::new(EvaluationGrid { axes, points }))
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dimension()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dimension();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a.lo, a.hi)).collect()
    }

    pub fn iter_points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }
}

pub(crate) fn grids_compatible(a: &Arc<EvaluationGrid>, b: &Arc<EvaluationGrid>) -> bool {
    Arc::ptr_eq(a, b) || a.axes == b.axes
}

/// A kernel density estimate evaluated on a grid.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    pub grid: Arc<EvaluationGrid>,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub kernel_id: String,
}

impl DensityEstimate {
    /// Writes the grid coordinates and the value column as CSV.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let d = self.grid.dimension();
        let mut header: Vec<String> = (1..=d).map(|k| format!("x{k}")).collect();
        header.push("value".into());
        writeln!(w, "{}", header.join(","))?;
        for (i, value) in self.values.iter().enumerate() {
            for coord in self.grid.point(i) {
                write!(w, "{coord},")?;
            }
            writeln!(w, "{value}")?;
        }
        Ok(())
    }
}

fn validate_kde_inputs(sample: &Sample, kernel: &Kernel, h: f64, point_dim: usize) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidBandwidth(h));
    }
    if kernel.dimension() != sample.dimension() {
        return Err(Error::DimensionMismatch {
            expected: sample.dimension(),
            got: kernel.dimension(),
        });
    }
    if point_dim != sample.dimension() {
        return Err(Error::DimensionMismatch {
            expected: sample.dimension(),
            got: point_dim,
        });
    }
    Ok(())
}

#[inline]
fn kde_sum(sample: &Sample, kernel: &Kernel, inv_h: f64, x: &[f64], buf: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    for j in 0..sample.n() {
        let obs = sample.point(j);
        for k in 0..buf.len() {
            buf[k] = (x[k] - obs[k]) * inv_h;
        }
        sum += kernel.eval_unchecked(buf);
    }
    sum
}

/// Evaluates the kernel density estimate
/// `(1 / (n h^d)) * sum_j K((x - X_j) / h)` at a single point.
pub fn kde_at_point(sample: &Sample, kernel: &Kernel, h: f64, x: &[f64]) -> Result<f64> {
    validate_kde_inputs(sample, kernel, h, x.len())?;
    let d = sample.dimension();
    let mut buf = vec![0.0; d];
    let sum = kde_sum(sample, kernel, 1.0 / h, x, &mut buf);
    Ok(sum / (sample.n() as f64 * h.powi(d as i32)))
}

/// Evaluates the estimate at every grid point. Each point's sum runs in
/// sample order, so the result is identical however the grid is partitioned.
pub fn kde_on_grid(
    sample: &Sample,
    kernel: &Kernel,
    h: f64,
    grid: &Arc<EvaluationGrid>,
) -> Result<DensityEstimate> {
    validate_kde_inputs(sample, kernel, h, grid.dimension())?;
    let d = sample.dimension();
    // same division as kde_at_point, so grid and pointwise evaluation agree
    // bit for bit
    let denom = sample.n() as f64 * h.powi(d as i32);
    let inv_h = 1.0 / h;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut buf = vec![0.0; d];
            kde_sum(sample, kernel, inv_h, grid.point(i), &mut buf) / denom
        })
        .collect();
    Ok(DensityEstimate {
        grid: Arc::clone(grid),
        values,
        bandwidth: h,
        kernel_id: kernel.name(),
    })
}

/// The grid maximum of an estimate, ties broken by first grid index.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMax {
    pub index: usize,
    pub point: Vec<f64>,
    pub value: f64,
}

/// Locates the supremum of the estimate over its grid.
pub fn sup_on_grid(estimate: &DensityEstimate) -> Result<GridMax> {
    if estimate.values.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut index = 0;
    let mut value = estimate.values[0];
    for (i, &v) in estimate.values.iter().enumerate().skip(1) {
        if v > value {
            index = i;
            value = v;
        }
    }
    Ok(GridMax {
        index,
        point: estimate.grid.point(index).to_vec(),
        value,
    })
}
