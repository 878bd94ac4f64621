//! Symbolic rate sequences and mechanical checking of asymptotic conditions.
//!
//! Every bandwidth, normalization, and truncation sequence used by the band
//! constructions lives in the three-level lattice
//! `c * n^p * (log n)^q * (log log n)^r`. Products, quotients, and real
//! powers stay inside the lattice, so each asymptotic condition reduces to a
//! lexicographic sign test on the combined exponent triple.
//!
//! Combined exponents within `1e-12` of zero are snapped to zero before
//! classification; a triple that is exactly zero is reported as a
//! `Boundary` verdict and never passes, because the conditions are strict
//! limits. The factor `log(1/h)` of a polynomially decaying sequence is
//! represented by its dominant term `b * log n`, which is exact at the
//! limit-class level.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EXPONENT_EPS: f64 = 1e-12;

fn snap(x: f64) -> f64 {
    if x.abs() < EXPONENT_EPS {
        0.0
    } else {
        x
    }
}

/// The sequence `coeff * n^n_exp * (log n)^log_exp * (log log n)^loglog_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSequence {
    pub coeff: f64,
    pub n_exp: f64,
    pub log_exp: f64,
    pub loglog_exp: f64,
}

impl RateSequence {
    pub fn new(coeff: f64, n_exp: f64, log_exp: f64, loglog_exp: f64) -> Result<RateSequence> {
        if !(coeff > 0.0) || !coeff.is_finite() {
            return Err(Error::InvalidRateSequence(format!(
                "coefficient {coeff} must be positive and finite"
            )));
        }
        for (name, e) in [("n", n_exp), ("log", log_exp), ("loglog", loglog_exp)] {
            if !e.is_finite() {
                return Err(Error::InvalidRateSequence(format!(
                    "{name} exponent {e} must be finite"
                )));
            }
        }
        Ok(RateSequence {
            coeff,
            n_exp,
            log_exp,
            loglog_exp,
        })
    }

    pub fn constant(c: f64) -> RateSequence {
        RateSequence::new(c, 0.0, 0.0, 0.0).expect("positive constant")
    }

    /// `c * n^p`.
    pub fn power(c: f64, p: f64) -> RateSequence {
        RateSequence::new(c, p, 0.0, 0.0).expect("positive coefficient")
    }

    /// Evaluates at `n`; requires `n >= 3` so that `log log n > 0`.
    pub fn eval(&self, n: u64) -> Result<f64> {
        if n < 3 {
            return Err(Error::RateEvalBelowMinimum(n));
        }
        let nf = n as f64;
        let ln = nf.ln();
        Ok(self.coeff * nf.powf(self.n_exp) * ln.powf(self.log_exp) * ln.ln().powf(self.loglog_exp))
    }

    /// Product of two sequences: coefficients multiply, exponents add.
    pub fn mul(&self, other: &RateSequence) -> RateSequence {
        RateSequence {
            coeff: self.coeff * other.coeff,
            n_exp: self.n_exp + other.n_exp,
            log_exp: self.log_exp + other.log_exp,
            loglog_exp: self.loglog_exp + other.loglog_exp,
        }
    }

    pub fn div(&self, other: &RateSequence) -> RateSequence {
        self.mul(&other.recip())
    }

    /// The sequence raised to a real power.
    pub fn pow(&self, e: f64) -> RateSequence {
        RateSequence {
            coeff: self.coeff.powf(e),
            n_exp: self.n_exp * e,
            log_exp: self.log_exp * e,
            loglog_exp: self.loglog_exp * e,
        }
    }

    pub fn recip(&self) -> RateSequence {
        RateSequence {
            coeff: 1.0 / self.coeff,
            n_exp: -self.n_exp,
            log_exp: -self.log_exp,
            loglog_exp: -self.loglog_exp,
        }
    }

    /// Multiplies by `n^s`.
    pub fn times_n(&self, s: f64) -> RateSequence {
        RateSequence {
            n_exp: self.n_exp + s,
            ..*self
        }
    }

    /// Lexicographic limit classification on the snapped exponent triple.
    pub fn limit_class(&self) -> LimitClass {
        for e in [snap(self.n_exp), snap(self.log_exp), snap(self.loglog_exp)] {
            if e > 0.0 {
                return LimitClass::ToInfinity;
            }
            if e < 0.0 {
                return LimitClass::ToZero;
            }
        }
        LimitClass::BoundedPositive
    }

    /// Dominant-term representation of `log(1 / self)` for a polynomially
    /// decaying sequence `c * n^{-b} ...` with `b > 0`: the class-(0,1,0)
    /// sequence `b * log n`.
    pub fn log_of_reciprocal(&self) -> Result<RateSequence> {
        if snap(self.n_exp) >= 0.0 {
            return Err(Error::InvalidRateSequence(format!(
                "log(1/seq) needs a strictly negative n exponent, got {}",
                self.n_exp
            )));
        }
        RateSequence::new(-self.n_exp, 0.0, 1.0, 0.0)
    }

    /// Parses the grammar `c*n^p*log^q*loglog^r`; every factor is optional,
    /// e.g. `n^-0.3`, `log^-0.5`, `2.5*n^0.35*log^-0.5`.
    pub fn parse(text: &str) -> Result<RateSequence> {
        let mut coeff = 1.0;
        let mut n_exp = 0.0;
        let mut log_exp = 0.0;
        let mut loglog_exp = 0.0;
        let bad = |part: &str| {
            Error::InvalidRateSequence(format!("cannot parse factor '{part}' in '{text}'"))
        };
        if text.trim().is_empty() {
            return Err(Error::InvalidRateSequence("empty rate expression".into()));
        }
        for part in text.split('*') {
            let part = part.trim();
            let (base, exp) = match part.split_once('^') {
                Some((b, e)) => (b.trim(), e.trim().parse::<f64>().map_err(|_| bad(part))?),
                None => (part, 1.0),
            };
            match base {
                "n" => n_exp += exp,
                "log" => log_exp += exp,
                "loglog" => loglog_exp += exp,
                _ => {
                    if part.contains('^') {
                        return Err(bad(part));
                    }
                    let c: f64 = part.parse().map_err(|_| bad(part))?;
                    coeff *= c;
                }
            }
        }
        RateSequence::new(coeff, n_exp, log_exp, loglog_exp)
    }
}

impl fmt::Display for RateSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.coeff != 1.0 {
            parts.push(format!("{}", self.coeff));
        }
        for (name, e) in [
            ("n", self.n_exp),
            ("log", self.log_exp),
            ("loglog", self.loglog_exp),
        ] {
            if e == 1.0 {
                parts.push(name.to_string());
            } else if e != 0.0 {
                parts.push(format!("{name}^{e}"));
            }
        }
        if parts.is_empty() {
            parts.push(format!("{}", self.coeff));
        }
        write!(f, "{}", parts.join("*"))
    }
}

/// Limit behavior of a rate sequence as `n` grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitClass {
    ToZero,
    ToInfinity,
    BoundedPositive,
}

impl fmt::Display for LimitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LimitClass::ToZero => "-> 0",
            LimitClass::ToInfinity => "-> inf",
            LimitClass::BoundedPositive => "bounded-positive",
        };
        write!(f, "{s}")
    }
}

/// The parameter quadruple `(h, h*, v, eps)` plus the dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSet {
    pub h: RateSequence,
    pub h_star: RateSequence,
    pub v: RateSequence,
    pub eps: RateSequence,
    pub d: usize,
}

impl ScheduleSet {
    pub fn new(
        h: RateSequence,
        h_star: RateSequence,
        v: RateSequence,
        eps: RateSequence,
        d: usize,
    ) -> Result<ScheduleSet> {
        if d == 0 {
            return Err(Error::InvalidSchedule("dimension must be at least 1".into()));
        }
        Ok(ScheduleSet {
            h,
            h_star,
            v,
            eps,
            d,
        })
    }

    /// Speed `n h*^d / v^2` at which non-coverage log-probabilities are
    /// normalized.
    pub fn speed(&self) -> RateSequence {
        self.h_star.pow(self.d as f64).times_n(1.0).div(&self.v.pow(2.0))
    }
}

/// Outcome of one limit condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Boundary,
}

/// Role of a check inside a report: sanity gates on the raw sequences, the
/// theorem's core limit set, or the strengthened almost-sure addendum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Gate,
    Core,
    Addendum,
}

/// A single verified limit with its combined rate sequence.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub kind: CheckKind,
    pub sequence: RateSequence,
    pub required: LimitClass,
    pub observed: LimitClass,
    pub verdict: Verdict,
}

fn check(name: &str, kind: CheckKind, sequence: RateSequence, required: LimitClass) -> ConditionCheck {
    let observed = sequence.limit_class();
    let verdict = if observed == required {
        Verdict::Holds
    } else if observed == LimitClass::BoundedPositive {
        Verdict::Boundary
    } else {
        Verdict::Fails
    };
    ConditionCheck {
        name: name.to_string(),
        kind,
        sequence,
        required,
        observed,
        verdict,
    }
}

/// Per-condition verdicts for one hypothesis set.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub label: String,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionReport {
    /// True when every gate and core condition holds.
    pub fn holds(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.kind != CheckKind::Addendum)
            .all(|c| c.verdict == Verdict::Holds)
    }

    /// True when the addendum (where present) also holds.
    pub fn almost_sure_holds(&self) -> bool {
        self.holds() && self.checks.iter().all(|c| c.verdict == Verdict::Holds)
    }

    pub fn check(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn gates(s: &ScheduleSet) -> Vec<ConditionCheck> {
    vec![
        check("h -> 0", CheckKind::Gate, s.h, LimitClass::ToZero),
        check("h* -> 0", CheckKind::Gate, s.h_star, LimitClass::ToZero),
        check("v -> inf", CheckKind::Gate, s.v, LimitClass::ToInfinity),
    ]
}

fn require_decaying_h_star(s: &ScheduleSet) -> Result<()> {
    if snap(s.h_star.n_exp) >= 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "h* must decay polynomially (negative n exponent), got n^{}",
            s.h_star.n_exp
        )));
    }
    Ok(())
}

/// Limits `n h*^d / v^2 -> inf`, `v h*^2 -> 0`, `v^2 h^d / h*^d -> inf`,
/// plus the almost-sure addendum `n h*^d / (v^2 log(1/h*)) -> inf`.
pub fn check_theorem1_conditions(s: &ScheduleSet) -> Result<ConditionReport> {
    require_decaying_h_star(s)?;
    let d = s.d as f64;
    let mut checks = gates(s);
    checks.push(check(
        "n*h*^d/v^2 -> inf",
        CheckKind::Core,
        s.speed(),
        LimitClass::ToInfinity,
    ));
    checks.push(check(
        "v*h*^2 -> 0",
        CheckKind::Core,
        s.v.mul(&s.h_star.pow(2.0)),
        LimitClass::ToZero,
    ));
    checks.push(check(
        "v^2*h^d/h*^d -> inf",
        CheckKind::Core,
        s.v.pow(2.0).mul(&s.h.pow(d)).div(&s.h_star.pow(d)),
        LimitClass::ToInfinity,
    ));
    checks.push(check(
        "n*h*^d/(v^2*log(1/h*)) -> inf",
        CheckKind::Addendum,
        s.speed().div(&s.h_star.log_of_reciprocal()?),
        LimitClass::ToInfinity,
    ));
    Ok(ConditionReport {
        label: "theorem1".into(),
        checks,
    })
}

/// The strengthened set: `n h*^d / (v^2 log(1/h*)) -> inf`, `v h*^2 -> 0`,
/// `v^2 h^d / h*^d -> inf`.
pub fn check_theorem2_conditions(s: &ScheduleSet) -> Result<ConditionReport> {
    require_decaying_h_star(s)?;
    let d = s.d as f64;
    let mut checks = gates(s);
    checks.push(check(
        "n*h*^d/(v^2*log(1/h*)) -> inf",
        CheckKind::Core,
        s.speed().div(&s.h_star.log_of_reciprocal()?),
        LimitClass::ToInfinity,
    ));
    checks.push(check(
        "v*h*^2 -> 0",
        CheckKind::Core,
        s.v.mul(&s.h_star.pow(2.0)),
        LimitClass::ToZero,
    ));
    checks.push(check(
        "v^2*h^d/h*^d -> inf",
        CheckKind::Core,
        s.v.pow(2.0).mul(&s.h.pow(d)).div(&s.h_star.pow(d)),
        LimitClass::ToInfinity,
    ));
    Ok(ConditionReport {
        label: "theorem2".into(),
        checks,
    })
}

/// The seven limits required by the truncated-band theorems.
pub fn check_truncation_conditions(s: &ScheduleSet) -> Result<ConditionReport> {
    require_decaying_h_star(s)?;
    let d = s.d as f64;
    let mut checks = gates(s);
    checks.push(check("eps -> 0", CheckKind::Core, s.eps, LimitClass::ToZero));
    checks.push(check(
        "h*/eps -> 0",
        CheckKind::Core,
        s.h_star.div(&s.eps),
        LimitClass::ToZero,
    ));
    checks.push(check(
        "h^2/eps -> 0",
        CheckKind::Core,
        s.h.pow(2.0).div(&s.eps),
        LimitClass::ToZero,
    ));
    checks.push(check(
        "v*eps^1.5 -> inf",
        CheckKind::Core,
        s.v.mul(&s.eps.pow(1.5)),
        LimitClass::ToInfinity,
    ));
    checks.push(check(
        "v*h*^2/eps^0.5 -> 0",
        CheckKind::Core,
        s.v.mul(&s.h_star.pow(2.0)).div(&s.eps.pow(0.5)),
        LimitClass::ToZero,
    ));
    checks.push(check(
        "n*h*^d/(v^2*log(1/h*)) -> inf",
        CheckKind::Core,
        s.speed().div(&s.h_star.log_of_reciprocal()?),
        LimitClass::ToInfinity,
    ));
    checks.push(check(
        "v^2*h^d*eps^2/h*^d -> inf",
        CheckKind::Core,
        s.v.pow(2.0)
            .mul(&s.h.pow(d))
            .mul(&s.eps.pow(2.0))
            .div(&s.h_star.pow(d)),
        LimitClass::ToInfinity,
    ));
    Ok(ConditionReport {
        label: "truncation".into(),
        checks,
    })
}

/// The translation requirements on `h*` for `h = n^{-a}`:
/// `n^a h* -> inf` and `n^{1-a} h*^4 / log n -> 0`.
pub fn check_translation_conditions(s: &ScheduleSet) -> Result<ConditionReport> {
    if snap(s.h.log_exp) != 0.0 || snap(s.h.loglog_exp) != 0.0 {
        return Err(Error::InvalidSchedule(
            "translation conditions are stated for h = n^-a without log factors".into(),
        ));
    }
    let a = -s.h.n_exp;
    if snap(a) <= 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "translation conditions need h = n^-a with a > 0, got a = {a}"
        )));
    }
    let checks = vec![
        check(
            "n^a*h* -> inf",
            CheckKind::Core,
            s.h_star.times_n(a),
            LimitClass::ToInfinity,
        ),
        check(
            "n^(1-a)*h*^4/log -> 0",
            CheckKind::Core,
            s.h_star
                .pow(4.0)
                .times_n(1.0 - a)
                .div(&RateSequence::new(1.0, 0.0, 1.0, 0.0)?),
            LimitClass::ToZero,
        ),
    ];
    Ok(ConditionReport {
        label: "translation".into(),
        checks,
    })
}

fn require_in_open_interval(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(value > lo && value < hi) {
        return Err(Error::ParameterOutOfRange {
            name,
            value,
            requirement: format!("open interval ({lo}, {hi})"),
        });
    }
    Ok(())
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name,
            value,
            requirement: "positive and finite".into(),
        });
    }
    Ok(())
}

/// `v = sqrt(n h^d / log(1/h))`, the normalization implied by the classical
/// sup-norm band width.
fn sup_norm_velocity(h: &RateSequence, d: usize) -> Result<RateSequence> {
    Ok(h.pow(d as f64)
        .times_n(1.0)
        .div(&h.log_of_reciprocal()?)
        .pow(0.5))
}

const DEFAULT_EPS_EXPONENT: f64 = 0.5;

fn log_power_eps(e: f64) -> Result<RateSequence> {
    require_in_open_interval("e", e, 0.0, 1.0)?;
    RateSequence::new(1.0, 0.0, -e, 0.0)
}

/// Classical one-dimensional schedule: `h = h* = n^-a` with
/// `a` in (1/5, 1/2) and `v = sqrt(n h / log(1/h))`.
pub fn preset_bickel_rosenblatt(a: f64, eps_exponent: Option<f64>) -> Result<ScheduleSet> {
    require_in_open_interval("a", a, 0.2, 0.5)?;
    let h = RateSequence::power(1.0, -a);
    let v = sup_norm_velocity(&h, 1)?;
    let eps = log_power_eps(eps_exponent.unwrap_or(DEFAULT_EPS_EXPONENT))?;
    ScheduleSet::new(h, h, v, eps, 1)
}

/// Translated schedule: `h = n^-a`, `h* = n^{-(1 - a d)/4}` (the choice that
/// maximizes the speed `h*^d log(1/h) / h^d` among power bandwidths),
/// `v = sqrt(n h^d / log(1/h))`, and `eps = (log n)^-e` with `e` in (0, 1).
/// For d = 1 the parameter `a` lives in (1/5, 1/2); in higher dimension in
/// (1/(d+4), (d+4)/(d(d+8))).
pub fn preset_translated(a: f64, d: usize, eps_exponent: Option<f64>) -> Result<ScheduleSet> {
    if d == 0 {
        return Err(Error::InvalidSchedule("dimension must be at least 1".into()));
    }
    let df = d as f64;
    if d == 1 {
        require_in_open_interval("a", a, 0.2, 0.5)?;
    } else {
        require_in_open_interval("a", a, 1.0 / (df + 4.0), (df + 4.0) / (df * (df + 8.0)))?;
    }
    let h = RateSequence::power(1.0, -a);
    let h_star = RateSequence::power(1.0, -(1.0 - a * df) / 4.0);
    let v = sup_norm_velocity(&h, d)?;
    let eps = log_power_eps(eps_exponent.unwrap_or(DEFAULT_EPS_EXPONENT))?;
    ScheduleSet::new(h, h_star, v, eps, d)
}

/// Thinner band centered at the MSE-optimal estimator:
/// `h* = c* n^{-1/(d+4)}`, `v = v* n^{2/(d+4)} (log n)^-a` with `a > 1/2`,
/// `eps = (log n)^-e` with `0 < e < 2a`. `h` equals `h*` unless
/// `h_log_coeff` selects `c [n / log n]^{-1/(d+4)}`.
pub fn preset_thinner_mse(
    d: usize,
    c_star: f64,
    v_star: f64,
    a: f64,
    e: f64,
    h_log_coeff: Option<f64>,
) -> Result<ScheduleSet> {
    if d == 0 {
        return Err(Error::InvalidSchedule("dimension must be at least 1".into()));
    }
    require_positive("c*", c_star)?;
    require_positive("v*", v_star)?;
    if !(a > 0.5) {
        return Err(Error::ParameterOutOfRange {
            name: "a",
            value: a,
            requirement: "a > 1/2".into(),
        });
    }
    require_in_open_interval("e", e, 0.0, 2.0 * a)?;
    let df = d as f64;
    let h_star = RateSequence::power(c_star, -1.0 / (df + 4.0));
    let v = RateSequence::new(v_star, 2.0 / (df + 4.0), -a, 0.0)?;
    let eps = RateSequence::new(1.0, 0.0, -e, 0.0)?;
    let h = match h_log_coeff {
        None => h_star,
        Some(c) => {
            require_positive("c", c)?;
            // c * [n / log n]^{-1/(d+4)}
            RateSequence::new(c, -1.0 / (df + 4.0), 1.0 / (df + 4.0), 0.0)?
        }
    };
    ScheduleSet::new(h, h_star, v, eps, d)
}

/// Thinner band centered at the sup-norm-optimal estimator:
/// `h = h* = c* [n / log n]^{-1/(d+4)}`,
/// `v = v* [n / log n]^{2/(d+4)} (log log n)^-a` with `a > 0`, and
/// `eps = (log log n)^-e` with `0 < e < 2a`.
pub fn preset_thinner_sup(
    d: usize,
    c_star: f64,
    v_star: f64,
    a: f64,
    e: f64,
) -> Result<ScheduleSet> {
    if d == 0 {
        return Err(Error::InvalidSchedule("dimension must be at least 1".into()));
    }
    require_positive("c*", c_star)?;
    require_positive("v*", v_star)?;
    if !(a > 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "a",
            value: a,
            requirement: "a > 0".into(),
        });
    }
    require_in_open_interval("e", e, 0.0, 2.0 * a)?;
    let df = d as f64;
    let h_star = RateSequence::new(c_star, -1.0 / (df + 4.0), 1.0 / (df + 4.0), 0.0)?;
    let v = RateSequence::new(v_star, 2.0 / (df + 4.0), -2.0 / (df + 4.0), -a)?;
    let eps = RateSequence::new(1.0, 0.0, 0.0, -e)?;
    ScheduleSet::new(h_star, h_star, v, eps, d)
}
