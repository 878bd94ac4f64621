//! Kernel functions with the constants every band formula needs.
//!
//! A [`Kernel`] is a product of one-dimensional factors, covering the
//! univariate built-ins (`gaussian`, `epanechnikov`, `biweight`, `uniform`)
//! and their d-dimensional tensor products. Each kernel carries:
//!
//! - `kappa`, the squared-kernel integral that scales every interval width,
//! - the squared-derivative integral needed by the classical sup-norm band
//!   normalization (d = 1 only),
//! - Hölder-continuity and covering-number metadata. The covering-number
//!   condition is a declared boolean, never computed: all built-ins have
//!   bounded variation, and products of bounded-variation factors inherit
//!   the property.
//!
//! Conventions: `epanechnikov` and `biweight` live on [-1, 1]; `uniform` is
//! the indicator of [-1/2, 1/2] (so its squared integral is exactly 1);
//! `gaussian` is the standard normal density.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quad::{self, QUAD_TOL, UNBOUNDED_DOMAIN_RADIUS};

/// Tolerance for the moment checks on (A1).
pub const A1_TOL: f64 = 1e-8;

/// Hölder-continuity metadata: |K(x) - K(y)| <= constant * |x - y|^exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Holder {
    pub exponent: f64,
    pub constant: f64,
}

/// A user-supplied one-dimensional kernel factor.
///
/// Metadata overrides (`kappa`, `deriv_sq_integral`) take precedence over
/// quadrature; this is how test kernels with prescribed constants are built.
#[derive(Clone)]
pub struct CustomKernel {
    pub name: String,
    pub eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub support_radius: Option<f64>,
    pub kappa: Option<f64>,
    pub deriv_sq_integral: Option<f64>,
    pub holder: Option<Holder>,
    pub covering_number: bool,
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("name", &self.name)
            .field("support_radius", &self.support_radius)
            .field("kappa", &self.kappa)
            .field("deriv_sq_integral", &self.deriv_sq_integral)
            .finish()
    }
}

/// One-dimensional kernel factor.
#[derive(Debug, Clone)]
pub enum BaseKernel {
    Gaussian,
    Epanechnikov,
    Biweight,
    Uniform,
    Custom(CustomKernel),
}

impl BaseKernel {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            BaseKernel::Gaussian => {
                (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt()
            }
            BaseKernel::Epanechnikov => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    0.75 * (1.0 - u * u)
                }
            }
            BaseKernel::Biweight => {
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let t = 1.0 - u * u;
                    (15.0 / 16.0) * t * t
                }
            }
            BaseKernel::Uniform => {
                if u.abs() <= 0.5 {
                    1.0
                } else {
                    0.0
                }
            }
            BaseKernel::Custom(c) => (c.eval)(u),
        }
    }

    /// Radius beyond which the factor vanishes; `None` for unbounded support.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            BaseKernel::Gaussian => None,
            BaseKernel::Epanechnikov | BaseKernel::Biweight => Some(1.0),
            BaseKernel::Uniform => Some(0.5),
            BaseKernel::Custom(c) => c.support_radius,
        }
    }

    /// Integration domain half-width used for quadrature on this factor.
    fn quad_radius(&self) -> f64 {
        self.support_radius().unwrap_or(UNBOUNDED_DOMAIN_RADIUS)
    }

    /// Squared-kernel integral of the factor; closed form where known.
    pub fn kappa(&self) -> Result<f64> {
        match self {
            BaseKernel::Gaussian => Ok(0.5 / std::f64::consts::PI.sqrt()),
            BaseKernel::Epanechnikov => Ok(0.6),
            BaseKernel::Biweight => Ok(5.0 / 7.0),
            BaseKernel::Uniform => Ok(1.0),
            BaseKernel::Custom(c) => match c.kappa {
                Some(k) => Ok(k),
                None => {
                    let r = self.quad_radius();
                    quad::integrate(|u| self.eval(u) * self.eval(u), -r, r, QUAD_TOL)
                }
            },
        }
    }

    /// Integral of the squared derivative, where the factor is absolutely
    /// continuous with square-integrable derivative.
    pub fn deriv_sq_integral(&self) -> Result<f64> {
        match self {
            // K'(u) = -u K(u); int u^2 e^{-u^2} / (2 pi) du = 1/(4 sqrt(pi))
            BaseKernel::Gaussian => Ok(0.25 / std::f64::consts::PI.sqrt()),
            // K'(u) = -1.5 u on (-1, 1)
            BaseKernel::Epanechnikov => Ok(1.5),
            // K'(u) = -(15/4) u (1 - u^2); integral is 15/7
            BaseKernel::Biweight => Ok(15.0 / 7.0),
            BaseKernel::Uniform => Err(Error::DerivSquareUndefined(
                "uniform kernel derivative is not square-integrable".into(),
            )),
            BaseKernel::Custom(c) => c.deriv_sq_integral.ok_or_else(|| {
                Error::DerivSquareUndefined(format!(
                    "custom kernel '{}' declares no squared-derivative integral",
                    c.name
                ))
            }),
        }
    }

    pub fn holder(&self) -> Option<Holder> {
        match self {
            // max |K'| = K(1) * 1 = e^{-1/2} / sqrt(2 pi)
            BaseKernel::Gaussian => Some(Holder {
                exponent: 1.0,
                constant: (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            }),
            BaseKernel::Epanechnikov => Some(Holder {
                exponent: 1.0,
                constant: 1.5,
            }),
            // max |K'| at u = 1/sqrt(3): 5 sqrt(3) / 6
            BaseKernel::Biweight => Some(Holder {
                exponent: 1.0,
                constant: 5.0 * 3.0f64.sqrt() / 6.0,
            }),
            BaseKernel::Uniform => None,
            BaseKernel::Custom(c) => c.holder,
        }
    }

    pub fn covering_number_condition(&self) -> bool {
        match self {
            BaseKernel::Custom(c) => c.covering_number,
            // bounded variation in one dimension
            _ => true,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            BaseKernel::Gaussian => "gaussian",
            BaseKernel::Epanechnikov => "epanechnikov",
            BaseKernel::Biweight => "biweight",
            BaseKernel::Uniform => "uniform",
            BaseKernel::Custom(c) => &c.name,
        }
    }

    fn from_name(name: &str) -> Result<BaseKernel> {
        match name {
            "gaussian" => Ok(BaseKernel::Gaussian),
            "epanechnikov" => Ok(BaseKernel::Epanechnikov),
            "biweight" => Ok(BaseKernel::Biweight),
            "uniform" => Ok(BaseKernel::Uniform),
            other => Err(Error::UnknownName {
                kind: "kernel",
                name: other.to_string(),
            }),
        }
    }

    /// Moments (m0, m1, m2) = (int K, int u K, int u^2 K) by quadrature.
    fn moments(&self) -> Result<(f64, f64, f64)> {
        let r = self.quad_radius();
        let m0 = quad::integrate(|u| self.eval(u), -r, r, QUAD_TOL)?;
        let m1 = quad::integrate(|u| u * self.eval(u), -r, r, QUAD_TOL)?;
        let m2 = quad::integrate(|u| u * u * self.eval(u), -r, r, QUAD_TOL)?;
        Ok((m0, m1, m2))
    }

    fn min_on_grid(&self) -> f64 {
        let r = self.quad_radius();
        let steps = 2000;
        (0..=steps)
            .map(|k| self.eval(-r + 2.0 * r * k as f64 / steps as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Product kernel on R^d.
#[derive(Debug, Clone)]
pub struct Kernel {
    components: Vec<BaseKernel>,
}

impl Kernel {
    pub fn product(components: Vec<BaseKernel>) -> Result<Kernel> {
        if components.is_empty() {
            return Err(Error::InvalidGrid("kernel needs at least one factor".into()));
        }
        Ok(Kernel { components })
    }

    pub fn gaussian(d: usize) -> Kernel {
        Kernel::replicated(BaseKernel::Gaussian, d)
    }

    pub fn epanechnikov(d: usize) -> Kernel {
        Kernel::replicated(BaseKernel::Epanechnikov, d)
    }

    pub fn biweight(d: usize) -> Kernel {
        Kernel::replicated(BaseKernel::Biweight, d)
    }

    pub fn uniform(d: usize) -> Kernel {
        Kernel::replicated(BaseKernel::Uniform, d)
    }

    fn replicated(base: BaseKernel, d: usize) -> Kernel {
        assert!(d >= 1, "kernel dimension must be at least 1");
        Kernel {
            components: vec![base; d],
        }
    }

    /// Resolves a string identifier. Plain names (`"gaussian"`) are
    /// replicated to dimension `d`; `"product:k1,k2,..."` lists one factor
    /// per axis and must match `d`.
    pub fn from_name(name: &str, d: usize) -> Result<Kernel> {
        if let Some(list) = name.strip_prefix("product:") {
            let components = list
                .split(',')
                .map(|part| BaseKernel::from_name(part.trim()))
                .collect::<Result<Vec<_>>>()?;
            if components.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: components.len(),
                });
            }
            Kernel::product(components)
        } else {
            Ok(Kernel::replicated(BaseKernel::from_name(name)?, d))
        }
    }

    /// Canonical identifier: the base name when all factors agree, else the
    /// explicit product form.
    pub fn name(&self) -> String {
        let first = self.components[0].name();
        if self.components.iter().all(|c| c.name() == first) {
            first.to_string()
        } else {
            let parts: Vec<&str> = self.components.iter().map(|c| c.name()).collect();
            format!("product:{}", parts.join(","))
        }
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[BaseKernel] {
        &self.components
    }

    /// Evaluates the kernel at `z`.
    pub fn evaluate(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: z.len(),
            });
        }
        Ok(self.eval_unchecked(z))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, z: &[f64]) -> f64 {
        let mut value = 1.0;
        for (component, &u) in self.components.iter().zip(z) {
            value *= component.eval(u);
            if value == 0.0 {
                return 0.0;
            }
        }
        value
    }

    /// Radius of a ball outside which the kernel vanishes, when every factor
    /// has compact support. If `||z||^2 > sum r_i^2` then some `|z_i| > r_i`.
    pub fn support_radius(&self) -> Option<f64> {
        let mut sum = 0.0;
        for component in &self.components {
            sum += component.support_radius()?.powi(2);
        }
        Some(sum.sqrt())
    }

    /// `int K^2`. Factorizes over the product structure.
    pub fn kappa(&self) -> Result<f64> {
        let mut k = 1.0;
        for component in &self.components {
            k *= component.kappa()?;
        }
        Ok(k)
    }

    /// `int K'^2`, defined for one-dimensional kernels only.
    pub fn deriv_sq_integral(&self) -> Result<f64> {
        if self.dimension() != 1 {
            return Err(Error::DerivSquareUndefined(format!(
                "squared-derivative integral is one-dimensional; kernel has d={}",
                self.dimension()
            )));
        }
        self.components[0].deriv_sq_integral()
    }

    /// Hölder metadata for the product: the weakest factor exponent with the
    /// summed factor constants. Stored for documentation; never used in any
    /// numeric formula.
    pub fn holder(&self) -> Option<Holder> {
        let mut exponent = f64::INFINITY;
        let mut constant = 0.0;
        for component in &self.components {
            let h = component.holder()?;
            exponent = exponent.min(h.exponent);
            constant += h.constant;
        }
        Some(Holder { exponent, constant })
    }

    /// Declared covering-number (VC-type) condition; products inherit it
    /// from their factors.
    pub fn covering_number_condition(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.covering_number_condition())
    }

    /// Checks the moment clauses of assumption (A1) by quadrature, using the
    /// product factorization: with per-factor moments (m0_i, m1_i, m2_i),
    /// int K = prod m0_i, int z_j K = m1_j prod_{i != j} m0_i, and
    /// int ||z||^2 K = sum_j m2_j prod_{i != j} m0_i.
    pub fn validate_a1(&self) -> Result<A1Report> {
        let moments = self
            .components
            .iter()
            .map(|c| c.moments())
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = moments.iter().map(|m| m.0).product();
        let mut first_moments = Vec::with_capacity(self.dimension());
        let mut second_moment = 0.0;
        for j in 0..self.dimension() {
            let others: f64 = moments
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != j)
                .map(|(_, m)| m.0)
                .product();
            first_moments.push(ClauseCheck {
                value: moments[j].1 * others,
                pass: (moments[j].1 * others).abs() <= A1_TOL,
            });
            second_moment += moments[j].2 * others;
        }
        let min_value = self
            .components
            .iter()
            .map(|c| c.min_on_grid())
            .fold(f64::INFINITY, f64::min);
        Ok(A1Report {
            integrates_to_one: ClauseCheck {
                value: total,
                pass: (total - 1.0).abs() <= A1_TOL,
            },
            first_moments,
            second_moment: ClauseCheck {
                value: second_moment,
                pass: second_moment.is_finite(),
            },
            nonnegative: ClauseCheck {
                value: min_value,
                pass: min_value >= 0.0,
            },
        })
    }
}

/// One clause of the (A1) validation report.
#[derive(Debug, Clone, Copy)]
pub struct ClauseCheck {
    pub value: f64,
    pub pass: bool,
}

/// Pass/fail per clause of (A1): unit mass, vanishing first moments,
/// finite second moment, nonnegativity.
#[derive(Debug, Clone)]
pub struct A1Report {
    pub integrates_to_one: ClauseCheck,
    pub first_moments: Vec<ClauseCheck>,
    pub second_moment: ClauseCheck,
    pub nonnegative: ClauseCheck,
}

impl A1Report {
    pub fn pass(&self) -> bool {
        self.integrates_to_one.pass
            && self.first_moments.iter().all(|c| c.pass)
            && self.second_moment.pass
            && self.nonnegative.pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn epanechnikov_values() {
        let k = Kernel::epanechnikov(1);
        assert_eq!(k.evaluate(&[0.0]).unwrap(), 0.75);
        assert_eq!(k.evaluate(&[2.0]).unwrap(), 0.0);
        assert_eq!(k.evaluate(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_matches_direct_formula() {
        let k = Kernel::gaussian(1);
        // independent arithmetic: (2 pi)^{-1/2} e^{-1/2}
        let expected = (2.0 * std::f64::consts::PI).powf(-0.5) * (-0.5f64).exp();
        assert_abs_diff_eq!(k.evaluate(&[1.0]).unwrap(), expected, epsilon = 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let k = Kernel::gaussian(2);
        assert!(matches!(
            k.evaluate(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn kappa_closed_forms() {
        assert_abs_diff_eq!(Kernel::uniform(1).kappa().unwrap(), 1.0, epsilon = 1e-15);
        // analytic: int (0.75 (1 - u^2))^2 du = 3/5
        assert_abs_diff_eq!(Kernel::epanechnikov(1).kappa().unwrap(), 0.6, epsilon = 1e-15);
        // analytic Gaussian product integral: 1 / (2 sqrt(pi))
        assert_abs_diff_eq!(
            Kernel::gaussian(1).kappa().unwrap(),
            0.5 / std::f64::consts::PI.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Kernel::biweight(1).kappa().unwrap(),
            5.0 / 7.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn kappa_agrees_with_quadrature() {
        for k in [
            Kernel::gaussian(1),
            Kernel::epanechnikov(1),
            Kernel::biweight(1),
            Kernel::uniform(1),
        ] {
            let base = &k.components()[0];
            let r = base.support_radius().unwrap_or(UNBOUNDED_DOMAIN_RADIUS);
            let quad_value =
                quad::integrate(|u| base.eval(u) * base.eval(u), -r, r, QUAD_TOL).unwrap();
            assert_abs_diff_eq!(k.kappa().unwrap(), quad_value, epsilon = 1e-8);
        }
    }

    #[test]
    fn product_kappa_is_multiplicative() {
        let k = Kernel::from_name("product:epanechnikov,gaussian", 2).unwrap();
        let expected = 0.6 * 0.5 / std::f64::consts::PI.sqrt();
        assert_abs_diff_eq!(k.kappa().unwrap(), expected, epsilon = 1e-10);
    }

    #[test]
    fn deriv_sq_integrals() {
        // K'(u) = -1.5 u, so int_{-1}^{1} 2.25 u^2 du = 3/2
        assert_abs_diff_eq!(
            Kernel::epanechnikov(1).deriv_sq_integral().unwrap(),
            1.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            Kernel::gaussian(1).deriv_sq_integral().unwrap(),
            0.25 / std::f64::consts::PI.sqrt(),
            epsilon = 1e-15
        );
        assert!(matches!(
            Kernel::uniform(1).deriv_sq_integral(),
            Err(Error::DerivSquareUndefined(_))
        ));
        assert!(matches!(
            Kernel::gaussian(2).deriv_sq_integral(),
            Err(Error::DerivSquareUndefined(_))
        ));
    }

    #[test]
    fn deriv_sq_closed_forms_match_quadrature_of_derivative() {
        // independent check of the frozen constants from the analytic K'
        let epan = quad::integrate(|u: f64| (1.5 * u).powi(2), -1.0, 1.0, QUAD_TOL).unwrap();
        assert_abs_diff_eq!(epan, 1.5, epsilon = 1e-10);
        let gauss = quad::integrate(
            |u: f64| {
                let phi = (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
                (u * phi).powi(2)
            },
            -UNBOUNDED_DOMAIN_RADIUS,
            UNBOUNDED_DOMAIN_RADIUS,
            QUAD_TOL,
        )
        .unwrap();
        assert_abs_diff_eq!(gauss, 0.25 / std::f64::consts::PI.sqrt(), epsilon = 1e-10);
        let biweight = quad::integrate(
            |u: f64| ((15.0 / 4.0) * u * (1.0 - u * u)).powi(2),
            -1.0,
            1.0,
            QUAD_TOL,
        )
        .unwrap();
        assert_abs_diff_eq!(biweight, 15.0 / 7.0, epsilon = 1e-10);
    }

    #[test]
    fn a1_passes_for_builtins() {
        for k in [
            Kernel::gaussian(1),
            Kernel::epanechnikov(1),
            Kernel::biweight(1),
            Kernel::uniform(1),
            Kernel::gaussian(2),
            Kernel::from_name("product:uniform,epanechnikov", 2).unwrap(),
        ] {
            let report = k.validate_a1().unwrap();
            assert!(report.pass(), "kernel {} failed A1: {:?}", k.name(), report);
            assert_abs_diff_eq!(report.integrates_to_one.value, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn a1_detects_improper_normalization() {
        // K(u) = u on [0, 1]: integrates to 1/2 and has nonzero first moment
        let custom = CustomKernel {
            name: "ramp".into(),
            eval: Arc::new(|u| if (0.0..=1.0).contains(&u) { u } else { 0.0 }),
            support_radius: Some(1.0),
            kappa: None,
            deriv_sq_integral: None,
            holder: None,
            covering_number: false,
        };
        let k = Kernel::product(vec![BaseKernel::Custom(custom)]).unwrap();
        let report = k.validate_a1().unwrap();
        assert!(!report.pass());
        assert!(!report.integrates_to_one.pass);
        assert_abs_diff_eq!(report.integrates_to_one.value, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn gaussian_2d_a1_against_tensor_quadrature_oracle() {
        // independent 2-d oracle: tensor-grid Simpson over [-8, 8]^2
        let k = Kernel::gaussian(2);
        let n = 400;
        let (a, b) = (-UNBOUNDED_DOMAIN_RADIUS, UNBOUNDED_DOMAIN_RADIUS);
        let h = (b - a) / n as f64;
        let weight = |i: usize| -> f64 {
            if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            }
        };
        let mut total = 0.0;
        for i in 0..=n {
            for j in 0..=n {
                let z = [a + i as f64 * h, a + j as f64 * h];
                total += weight(i) * weight(j) * k.evaluate(&z).unwrap();
            }
        }
        total *= (h / 3.0) * (h / 3.0);
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-8);
        assert!(k.validate_a1().unwrap().pass());
    }

    #[test]
    fn support_radius_of_products() {
        assert_eq!(Kernel::epanechnikov(1).support_radius(), Some(1.0));
        assert_eq!(Kernel::gaussian(2).support_radius(), None);
        let k = Kernel::from_name("product:epanechnikov,uniform", 2).unwrap();
        assert_abs_diff_eq!(
            k.support_radius().unwrap(),
            (1.0f64 + 0.25).sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn names_round_trip() {
        assert_eq!(Kernel::from_name("biweight", 3).unwrap().name(), "biweight");
        let k = Kernel::from_name("product:gaussian,uniform", 2).unwrap();
        assert_eq!(k.name(), "product:gaussian,uniform");
        assert!(matches!(
            Kernel::from_name("tricube", 1),
            Err(Error::UnknownName { .. })
        ));
        assert!(matches!(
            Kernel::from_name("product:gaussian", 2),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn covering_and_holder_metadata() {
        assert!(Kernel::gaussian(2).covering_number_condition());
        assert!(Kernel::uniform(1).covering_number_condition());
        assert!(Kernel::uniform(1).holder().is_none());
        let h = Kernel::epanechnikov(2).holder().unwrap();
        assert_eq!(h.exponent, 1.0);
        assert_eq!(h.constant, 3.0);
    }
}
