//! The double sine function `S2(x | w1, w2)` for real positive periods.
//!
//! Normalization: zeros on `w1 Z<=0 + w2 Z<=0`, poles on `w1 Z>=1 + w2 Z>=1`,
//!
//! ```text
//! S2(x + w1) / S2(x) = 1 / (2 sin(pi x / w2))
//! S2(x) S2(-x)       = -4 sin(pi x / w1) sin(pi x / w2)
//! S2(x)              = 2 pi / sqrt(w1 w2) * x + O(x^2)
//! ```
//!
//! Inside the strip `0 < Re x < w1 + w2` the logarithm is
//!
//! ```text
//! log S2(x) = -int_0^inf ( sinh(a t) / (2 sinh(w1 t) sinh(w2 t)) - a / (2 w1 w2 t) ) dt / t,
//! a = w1 + w2 - 2x.
//! ```
//!
//! The algebraic tail `a / (2 w1 w2 t^2)` is traded for a Gaussian-damped copy
//! whose difference integrates in closed form, which leaves an even integrand
//! decaying exponentially in both directions. The trapezoidal rule on the full
//! line is then spectrally accurate; its step is chosen from the distance to
//! the nearest singularity (`t = i pi / max(w1, w2)`) and the oscillation rate
//! `2 |Im x|`. Arguments outside the strip are moved into a window around the
//! strip centre with the shift law.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default proximity guard to the zero/pole lattice, in units of the smaller period.
pub const DEFAULT_GUARD: f64 = 1e-8;

/// Upper bound on the number of period shifts used to reach the strip.
const MAX_SHIFTS: u32 = 100_000;

/// `-ln(eps)` for the truncation and discretization errors of the strip integral.
const DECADES_LN: f64 = 40.0;

/// Pair of real positive periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Periods {
    omega1: f64,
    omega2: f64,
}

impl Periods {
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        if !omega1.is_finite() || !omega2.is_finite() {
            return Err(Error::NonFinite(format!("periods ({omega1}, {omega2})")));
        }
        if omega1 <= 0.0 || omega2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "periods must be positive, got ({omega1}, {omega2})"
            )));
        }
        Ok(Self { omega1, omega2 })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn swapped(&self) -> Self {
        Self {
            omega1: self.omega2,
            omega2: self.omega1,
        }
    }

    fn ordered(&self) -> (f64, f64) {
        if self.omega1 <= self.omega2 {
            (self.omega1, self.omega2)
        } else {
            (self.omega2, self.omega1)
        }
    }
}

/// Position of an argument relative to the zero/pole lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum S2Status {
    Regular,
    /// Within the guard distance of the zero `a w1 + b w2` (`a, b <= 0`).
    NearZero { a: i64, b: i64 },
    /// Within the guard distance of the pole `a w1 + b w2` (`a, b >= 1`).
    NearPole { a: i64, b: i64 },
}

/// Result of a double sine evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S2Value {
    pub value: Complex64,
    /// A logarithm of `value` (branch unspecified); finite even when `value` over/underflows.
    pub log: Complex64,
    pub status: S2Status,
    /// Number of period shifts applied to reach the integration strip.
    pub shifts: u32,
}

impl S2Value {
    pub fn is_regular(&self) -> bool {
        self.status == S2Status::Regular
    }
}

/// Evaluator for `S2(. | w1, w2)` with a configurable lattice guard.
#[derive(Debug, Clone, Copy)]
pub struct DoubleSine {
    periods: Periods,
    guard: f64,
}

impl DoubleSine {
    pub fn new(periods: Periods) -> Self {
        Self {
            periods,
            guard: DEFAULT_GUARD,
        }
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard.abs();
        self
    }

    pub fn periods(&self) -> Periods {
        self.periods
    }

    pub fn eval(&self, x: Complex64) -> Result<S2Value> {
        if !x.re.is_finite() || !x.im.is_finite() {
            return Err(Error::NonFinite(format!("double sine argument {x}")));
        }
        let status = self.classify(x);
        let (log, shifts) = ln_s2(x, self.periods)?;
        Ok(S2Value {
            value: log.exp(),
            log,
            status,
            shifts,
        })
    }

    /// Value at a point required to be clear of the lattice.
    pub fn regular(&self, x: Complex64) -> Result<Complex64> {
        Ok(self.regular_log(x)?.exp())
    }

    /// Logarithm at a point required to be clear of the lattice.
    pub fn regular_log(&self, x: Complex64) -> Result<Complex64> {
        let v = self.eval(x)?;
        match v.status {
            S2Status::Regular => Ok(v.log),
            S2Status::NearZero { a, b } => Err(Error::LatticeProximity {
                x: x.to_string(),
                kind: "zero",
                a,
                b,
            }),
            S2Status::NearPole { a, b } => Err(Error::LatticeProximity {
                x: x.to_string(),
                kind: "pole",
                a,
                b,
            }),
        }
    }

    fn classify(&self, x: Complex64) -> S2Status {
        let (w1, w2) = (self.periods.omega1, self.periods.omega2);
        let tol = self.guard * w1.min(w2);
        if x.im.abs() > tol {
            return S2Status::Regular;
        }
        let reach = (x.re.abs() / w1).ceil() as i64 + 1;
        for a in -reach..=reach {
            let b = ((x.re - a as f64 * w1) / w2).round() as i64;
            let site = Complex64::new(a as f64 * w1 + b as f64 * w2, 0.0);
            if (x - site).norm() <= tol {
                if a <= 0 && b <= 0 {
                    return S2Status::NearZero { a, b };
                }
                if a >= 1 && b >= 1 {
                    return S2Status::NearPole { a, b };
                }
            }
        }
        S2Status::Regular
    }
}

/// `S2(x | w1, w2)` with the default guard.
pub fn s2(x: Complex64, periods: Periods) -> Result<S2Value> {
    DoubleSine::new(periods).eval(x)
}

/// Slope `2 pi / sqrt(w1 w2)` of `S2` at the origin.
pub fn s2_slope_at_zero(periods: Periods) -> f64 {
    2.0 * PI / (periods.omega1 * periods.omega2).sqrt()
}

/// Leading large-`|Im x|` behaviour of `log S2(x)`; the sign follows `Im x`.
///
/// `+- pi i (x^2/(2 w1 w2) - (w1 + w2) x/(2 w1 w2) + (w1/w2 + w2/w1 + 3)/12)`. The
/// constant term is the one compatible with `S2(x) ~ 2 pi x / sqrt(w1 w2)`; with the
/// opposite sign the remainder tends to `2 pi i (w1/w2 + w2/w1 + 3)/12` instead of zero.
pub fn s2_asymptotic_log(x: Complex64, periods: Periods) -> Result<Complex64> {
    if x.im == 0.0 {
        return Err(Error::InvalidParameter(
            "asymptotic direction undefined for real x".into(),
        ));
    }
    let (w1, w2) = (periods.omega1, periods.omega2);
    let prod = w1 * w2;
    let poly = x * x / (2.0 * prod) - x * ((w1 + w2) / (2.0 * prod))
        + (w1 / w2 + w2 / w1 + 3.0) / 12.0;
    let sign = x.im.signum();
    Ok(Complex64::new(0.0, sign * PI) * poly)
}

/// `log S2(x)` and the number of shifts used.
fn ln_s2(x: Complex64, periods: Periods) -> Result<(Complex64, u32)> {
    let (w_lo, w_hi) = periods.ordered();
    let centre = 0.5 * (w_lo + w_hi);
    let (lo, hi) = (centre - 0.5 * w_lo, centre + 0.5 * w_lo);
    let mut y = x;
    let mut log_factor = Complex64::new(0.0, 0.0);
    let mut shifts = 0u32;
    // S2(y) = S2(y - w_lo) / (2 sin(pi (y - w_lo) / w_hi))
    while y.re >= hi {
        y -= w_lo;
        log_factor -= ln_two_sin(y * (PI / w_hi));
        shifts += 1;
        if shifts > MAX_SHIFTS {
            return Err(Error::InvalidParameter(format!(
                "double sine argument {x} needs more than {MAX_SHIFTS} shifts"
            )));
        }
    }
    // S2(y) = S2(y + w_lo) * 2 sin(pi y / w_hi)
    while y.re < lo {
        log_factor += ln_two_sin(y * (PI / w_hi));
        y += w_lo;
        shifts += 1;
        if shifts > MAX_SHIFTS {
            return Err(Error::InvalidParameter(format!(
                "double sine argument {x} needs more than {MAX_SHIFTS} shifts"
            )));
        }
    }
    Ok((ln_s2_strip(y, w_lo, w_hi) + log_factor, shifts))
}

/// A logarithm of `2 sin z`, stable for large `|Im z|`.
fn ln_two_sin(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im > 20.0 {
        // 2 sin z = i e^{-iz} (1 - e^{2iz})
        i * (PI / 2.0) - i * z + (-(2.0 * i * z).exp()).ln_1p()
    } else if z.im < -20.0 {
        // 2 sin z = -i e^{iz} (1 - e^{-2iz})
        -i * (PI / 2.0) + i * z + (-(-2.0 * i * z).exp()).ln_1p()
    } else {
        (2.0 * z.sin()).ln()
    }
}

trait Ln1p {
    fn ln_1p(self) -> Self;
}

impl Ln1p for Complex64 {
    fn ln_1p(self) -> Self {
        if self.norm() < 1e-4 {
            // z - z^2/2 + z^3/3
            self - self * self / 2.0 + self * self * self / 3.0
        } else {
            (1.0 + self).ln()
        }
    }
}

/// Strip integral for `log S2(x)`, `|Re x - (w_lo + w_hi)/2| <= w_lo / 2`.
fn ln_s2_strip(x: Complex64, w_lo: f64, w_hi: f64) -> Complex64 {
    let w = w_lo + w_hi;
    let a = Complex64::new(w, 0.0) - 2.0 * x;
    let prod = w_lo * w_hi;
    // exponential decay rate of the sinh ratio
    let kappa = w - a.re.abs();
    let damping = 0.25 * kappa;
    let t_max = DECADES_LN / kappa;
    // trapezoid step from a strip of half-width u free of singularities
    let u = 0.5 * PI / w_hi;
    let step = 2.0 * PI * u / (DECADES_LN + a.im.abs() * u);
    let nodes = (t_max / step).ceil() as usize;

    let scale = a.norm().max(w_hi).max(damping);
    let series_limit = 1e-3 / scale;
    let p1 = (a * a - w_lo * w_lo - w_hi * w_hi) / 6.0;
    let p2 = a.powi(4) / 120.0 + 7.0 * (w_lo.powi(4) + w_hi.powi(4)) / 360.0
        - a * a * (w_lo * w_lo + w_hi * w_hi) / 36.0
        + w_lo * w_lo * w_hi * w_hi / 36.0;
    let s2 = damping * damping;
    let series = |t: f64| a / (2.0 * prod) * ((p1 + s2) + (p2 - s2 * s2 / 2.0) * t * t);

    let integrand = |t: f64| -> Complex64 {
        if t < series_limit {
            return series(t);
        }
        let up = ((a - w) * t).exp();
        let down = ((-a - w) * t).exp();
        let den = (-2.0 * w_lo * t).exp_m1() * (-2.0 * w_hi * t).exp_m1() * t;
        let sinh_part = (up - down) / den;
        let tail = a * ((-s2 * t * t).exp() / (2.0 * prod * t * t));
        sinh_part - tail
    };

    let mut sum = 0.5 * integrand(0.0);
    for k in 1..=nodes {
        sum += integrand(k as f64 * step);
    }
    let integral = sum * step - a * (damping * PI.sqrt() / (2.0 * prod));
    -integral
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn p(w1: f64, w2: f64) -> Periods {
        Periods::new(w1, w2).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn rejects_bad_periods() {
        assert!(Periods::new(0.0, 1.0).is_err());
        assert!(Periods::new(-1.0, 1.0).is_err());
        assert!(Periods::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn rejects_non_finite_argument() {
        assert!(matches!(
            s2(c(f64::INFINITY, 0.0), p(2.0, 3.0)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn period_swap_is_exact() {
        for x in [c(0.3, 0.2), c(1.7, -2.0), c(-4.1, 0.5), c(9.0, 3.0)] {
            let a = s2(x, p(1.0, 2.0)).unwrap().value;
            let b = s2(x, p(2.0, 1.0)).unwrap().value;
            assert_eq!(a, b);
        }
    }

    #[test]
    fn half_period_shift_gives_one_half() {
        // S2(w2/2 + w1) / S2(w2/2) = 1 / (2 sin(pi/2))
        let per = p(2.0, 3.0);
        let x = c(1.5, 0.0);
        let ratio = s2(x + 2.0, per).unwrap().value / s2(x, per).unwrap().value;
        assert!(rel(ratio, c(0.5, 0.0)) < 1e-12, "{ratio}");
    }

    #[test]
    fn reflection_at_point_seven() {
        let per = p(2.0, 3.0);
        let prod = s2(c(0.7, 0.0), per).unwrap().value * s2(c(-0.7, 0.0), per).unwrap().value;
        let expect = -4.0 * (0.7 * PI / 2.0).sin() * (0.7 * PI / 3.0).sin();
        assert!(rel(prod, c(expect, 0.0)) < 1e-12, "{prod} vs {expect}");
    }

    #[test]
    fn slope_examples() {
        assert!((s2_slope_at_zero(p(PI, PI)) - 2.0).abs() < 1e-15);
        assert!((s2_slope_at_zero(p(1.0, 4.0)) - PI).abs() < 1e-15);
        let per = p(2.0, 3.0);
        let x = 1e-4;
        let ratio = s2(c(x, 0.0), per).unwrap().value / x;
        let slope = s2_slope_at_zero(per);
        assert!((ratio.re - slope).abs() / slope < 1e-3);
    }

    #[test]
    fn lattice_statuses() {
        let per = p(2.0, 3.0);
        assert_eq!(s2(c(0.0, 0.0), per).unwrap().status, S2Status::NearZero { a: 0, b: 0 });
        assert_eq!(s2(c(-5.0, 0.0), per).unwrap().status, S2Status::NearZero { a: -1, b: -1 });
        assert_eq!(s2(c(5.0, 1e-10), per).unwrap().status, S2Status::NearPole { a: 1, b: 1 });
        assert_eq!(s2(c(5.0, 1e-3), per).unwrap().status, S2Status::Regular);
        // 2 = 1 * w1 + 0 * w2 is neither a zero nor a pole
        assert_eq!(s2(c(2.0, 0.0), per).unwrap().status, S2Status::Regular);
        let guarded = DoubleSine::new(per).with_guard(1e-2);
        assert!(matches!(
            guarded.regular(c(5.001, 0.0)),
            Err(Error::LatticeProximity { kind: "pole", .. })
        ));
    }

    #[test]
    fn zero_is_exact() {
        let v = s2(c(0.0, 0.0), p(2.0, 3.0)).unwrap();
        assert_eq!(v.value.norm(), 0.0);
    }

    #[test]
    fn asymptotic_requires_imaginary_part() {
        assert!(s2_asymptotic_log(c(1.0, 0.0), p(2.0, 3.0)).is_err());
    }

    #[test]
    fn asymptotic_conjugation() {
        let per = p(2.0, 3.0);
        let x = c(0.8, 7.0);
        let a = s2_asymptotic_log(x, per).unwrap();
        let b = s2_asymptotic_log(x.conj(), per).unwrap();
        assert!((a.conj() - b).norm() < 1e-12);
    }

    #[test]
    fn asymptotic_residual_at_five_i() {
        let per = p(2.0, 3.0);
        let x = c(0.0, 5.0);
        let v = s2(x, per).unwrap().value;
        let asym = s2_asymptotic_log(x, per).unwrap();
        let resid = (v * (-asym).exp()).ln().norm();
        assert!(resid < 1e-3, "{resid}");
    }

    #[test]
    fn shift_law_far_from_real_axis() {
        let per = p(2.0, 3.0);
        for x in [c(0.4, 30.0), c(-1.3, -45.0)] {
            let lhs = s2(x + 2.0, per).unwrap().log + ln_two_sin(x * (PI / 3.0));
            let rhs = s2(x, per).unwrap().log;
            assert!(((lhs - rhs).exp() - 1.0).norm() < 1e-10, "{x}");
        }
    }

    #[test]
    fn shift_count_reported() {
        let per = p(2.0, 3.0);
        assert_eq!(s2(c(2.5, 0.0), per).unwrap().shifts, 0);
        assert!(s2(c(-20.0, 0.3), per).unwrap().shifts >= 10);
    }
}
