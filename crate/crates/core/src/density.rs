//! Ground-truth densities with exact evaluators and exact seeded samplers.
//!
//! Every built-in is twice differentiable on all of R^d with bounded first
//! and second derivatives, and `||z||^q f(z)` stays bounded for every
//! `q > 0` (compact support or super-polynomial decay), so each one
//! satisfies the smoothness and tail assumptions the coverage experiments
//! rely on.

use std::sync::OnceLock;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimator::Sample;
use crate::quad;

/// Standard normal quantile at 1 - 1e-6; the default evaluation region for
/// Gaussian-tailed densities is the box covering the central 1 - 2e-6 mass.
const GAUSSIAN_QUANTILE_1E6: f64 = 4.753424308822899;

/// One component of a univariate Gaussian mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// A ground-truth density paired with an exact sampler.
#[derive(Debug, Clone)]
pub enum Density {
    /// Standard normal in `d` dimensions.
    Gaussian { d: usize },
    /// Univariate Gaussian mixture.
    GaussianMixture { components: Vec<MixtureComponent> },
    /// Beta(4,4) rescaled to `[lo, hi]`: compactly supported, twice
    /// differentiable across the support boundary.
    BetaSmooth { lo: f64, hi: f64 },
    /// `exp(-1/(1-x^2)) / Z` on (-1, 1): a compactly supported smooth bump,
    /// sampled by rejection from the uniform envelope.
    SmoothBump,
}

fn phi(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn bump_unnormalized(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

fn bump_normalizer() -> f64 {
    static Z: OnceLock<f64> = OnceLock::new();
    *Z.get_or_init(|| {
        quad::integrate(bump_unnormalized, -1.0, 1.0, 1e-12)
            .expect("bump normalizer quadrature converges")
    })
}

impl Density {
    /// Resolves a density identifier. `gaussian` replicates to dimension
    /// `d`; `bimodal` is the mixture `0.5 N(-2,1) + 0.5 N(2,1)`; custom
    /// mixtures use `mixture:w,mean,sd;w,mean,sd;...`.
    pub fn by_name(name: &str, d: usize) -> Result<Density> {
        if d == 0 {
            return Err(Error::InvalidSchedule("dimension must be at least 1".into()));
        }
        let one_dimensional = |density: Density| {
            if d == 1 {
                Ok(density)
            } else {
                Err(Error::DimensionMismatch { expected: 1, got: d })
            }
        };
        if let Some(spec) = name.strip_prefix("beta_smooth:") {
            let fields: Vec<&str> = spec.split(',').map(str::trim).collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::UnknownName {
                    kind: "density",
                    name: format!("{name} (cannot parse '{s}')"),
                })
            };
            if fields.len() != 2 {
                return Err(Error::UnknownName {
                    kind: "density",
                    name: format!("{name} (expected beta_smooth:lo,hi)"),
                });
            }
            return one_dimensional(Density::beta_smooth(parse(fields[0])?, parse(fields[1])?)?);
        }
        if let Some(spec) = name.strip_prefix("mixture:") {
            let mut components = Vec::new();
            for part in spec.split(';') {
                let fields: Vec<&str> = part.split(',').map(str::trim).collect();
                if fields.len() != 3 {
                    return Err(Error::UnknownName {
                        kind: "density",
                        name: format!("{name} (component '{part}' needs weight,mean,sd)"),
                    });
                }
                let parse = |s: &str| {
                    s.parse::<f64>().map_err(|_| Error::UnknownName {
                        kind: "density",
                        name: format!("{name} (cannot parse '{s}')"),
                    })
                };
                components.push(MixtureComponent {
                    weight: parse(fields[0])?,
                    mean: parse(fields[1])?,
                    sd: parse(fields[2])?,
                });
            }
            return one_dimensional(Density::mixture(components)?);
        }
        match name {
            "gaussian" => Ok(Density::Gaussian { d }),
            "bimodal" => one_dimensional(
                Density::mixture(vec![
                    MixtureComponent {
                        weight: 0.5,
                        mean: -2.0,
                        sd: 1.0,
                    },
                    MixtureComponent {
                        weight: 0.5,
                        mean: 2.0,
                        sd: 1.0,
                    },
                ])
                .expect("builtin mixture is valid"),
            ),
            "beta_smooth" => one_dimensional(Density::beta_smooth(0.0, 1.0).expect("valid")),
            "bump" => one_dimensional(Density::SmoothBump),
            other => Err(Error::UnknownName {
                kind: "density",
                name: other.to_string(),
            }),
        }
    }

    pub fn beta_smooth(lo: f64, hi: f64) -> Result<Density> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "hi",
                value: hi,
                requirement: format!("greater than lo = {lo} and finite"),
            });
        }
        Ok(Density::BetaSmooth { lo, hi })
    }

    pub fn mixture(components: Vec<MixtureComponent>) -> Result<Density> {
        if components.is_empty() {
            return Err(Error::UnknownName {
                kind: "density",
                name: "mixture with no components".into(),
            });
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::ParameterOutOfRange {
                name: "weights",
                value: total,
                requirement: "mixture weights must sum to 1".into(),
            });
        }
        for c in &components {
            if !(c.weight > 0.0) || !(c.sd > 0.0) {
                return Err(Error::ParameterOutOfRange {
                    name: "component",
                    value: c.weight.min(c.sd),
                    requirement: "weights and standard deviations must be positive".into(),
                });
            }
        }
        Ok(Density::GaussianMixture { components })
    }

    /// The catalog of named built-ins.
    pub fn builtin_names() -> Vec<(&'static str, &'static str)> {
        vec![
            ("gaussian", "standard normal, any dimension"),
            ("bimodal", "0.5 N(-2,1) + 0.5 N(2,1)"),
            (
                "beta_smooth",
                "Beta(4,4) rescaled to [lo,hi] (default [0,1]); vanishes outside its support",
            ),
            ("bump", "smooth compactly supported bump on (-1,1)"),
        ]
    }

    /// Canonical identifier accepted back by [`Density::by_name`].
    pub fn id(&self) -> String {
        match self {
            Density::Gaussian { .. } => "gaussian".into(),
            Density::GaussianMixture { components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| format!("{},{},{}", c.weight, c.mean, c.sd))
                    .collect();
                format!("mixture:{}", parts.join(";"))
            }
            Density::BetaSmooth { lo, hi } => format!("beta_smooth:{lo},{hi}"),
            Density::SmoothBump => "bump".into(),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Density::Gaussian { d } => *d,
            _ => 1,
        }
    }

    /// Evaluates the density at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dimension(), "density evaluated at wrong dimension");
        match self {
            Density::Gaussian { .. } => x.iter().map(|&u| phi(u)).product(),
            Density::GaussianMixture { components } => components
                .iter()
                .map(|c| c.weight * phi((x[0] - c.mean) / c.sd) / c.sd)
                .sum(),
            Density::BetaSmooth { lo, hi } => {
                let t = (x[0] - lo) / (hi - lo);
                if !(0.0..=1.0).contains(&t) {
                    0.0
                } else {
                    140.0 * t.powi(3) * (1.0 - t).powi(3) / (hi - lo)
                }
            }
            Density::SmoothBump => bump_unnormalized(x[0]) / bump_normalizer(),
        }
    }

    /// Draws `n` i.i.d. observations from the stream `rng`. Draws are
    /// consumed sequentially, so the size-m sample is a prefix of the
    /// size-n sample taken from the same stream state for m < n.
    pub fn sample_n<R: Rng>(&self, rng: &mut R, n: usize) -> Sample {
        let d = self.dimension();
        let mut data = Vec::with_capacity(n * d);
        for _ in 0..n {
            self.draw_into(rng, &mut data);
        }
        Sample::from_flat(data, d)
    }

    fn draw_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        match self {
            Density::Gaussian { d } => {
                for _ in 0..*d {
                    out.push(rng.sample(StandardNormal));
                }
            }
            Density::GaussianMixture { components } => {
                let u: f64 = rng.random();
                let mut cumulative = 0.0;
                let mut chosen = components[components.len() - 1];
                for c in components {
                    cumulative += c.weight;
                    if u < cumulative {
                        chosen = *c;
                        break;
                    }
                }
                let z: f64 = rng.sample(StandardNormal);
                out.push(chosen.mean + chosen.sd * z);
            }
            Density::BetaSmooth { lo, hi } => {
                let beta = Beta::new(4.0, 4.0).expect("valid shape parameters");
                out.push(lo + (hi - lo) * beta.sample(rng));
            }
            Density::SmoothBump => {
                let peak = bump_unnormalized(0.0);
                loop {
                    let x = rng.random::<f64>() * 2.0 - 1.0;
                    let y = rng.random::<f64>() * peak;
                    if y <= bump_unnormalized(x) {
                        out.push(x);
                        break;
                    }
                }
            }
        }
    }

    /// Default evaluation box: the 1e-6 quantile range for Gaussian tails,
    /// the support for compactly supported densities.
    pub fn default_region(&self) -> Vec<(f64, f64)> {
        match self {
            Density::Gaussian { d } => {
                vec![(-GAUSSIAN_QUANTILE_1E6, GAUSSIAN_QUANTILE_1E6); *d]
            }
            Density::GaussianMixture { components } => {
                let lo = components
                    .iter()
                    .map(|c| c.mean - GAUSSIAN_QUANTILE_1E6 * c.sd)
                    .fold(f64::INFINITY, f64::min);
                let hi = components
                    .iter()
                    .map(|c| c.mean + GAUSSIAN_QUANTILE_1E6 * c.sd)
                    .fold(f64::NEG_INFINITY, f64::max);
                vec![(lo, hi)]
            }
            Density::BetaSmooth { lo, hi } => vec![(*lo, *hi)],
            Density::SmoothBump => vec![(-1.0, 1.0)],
        }
    }

    /// Support box, where compact; `None` for full-support densities.
    pub fn support(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            Density::BetaSmooth { lo, hi } => Some(vec![(*lo, *hi)]),
            Density::SmoothBump => Some(vec![(-1.0, 1.0)]),
            _ => None,
        }
    }

    /// All built-ins are twice differentiable on R^d with bounded
    /// derivatives.
    pub fn a3_twice_differentiable(&self) -> bool {
        true
    }

    /// Returns infinity: `||z||^q f(z)` is bounded for every `q > 0` for
    /// each built-in.
    pub fn a4_tail_exponent(&self) -> f64 {
        f64::INFINITY
    }
}
