//! Closed form of the determinant of the fundamental matrix
//!
//! Products with large integer exponents are accumulated in log space; powers of the
//! unit-modulus prefactors are taken as `exponent * phase`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::double_sine::{DoubleSine, Periods};
use crate::error::{Error, Result};
use crate::multi_index::{binomial, count_compositions, enumerate, MultiIndex};
use crate::params::{ModelParams, QPhase};
use crate::quantum_algebra::det_k_closed_at;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `prod z_k^{e_k}` kept as a log plus an exact-zero flag.
#[derive(Debug, Clone, Copy)]
struct Product {
    log: Complex64,
    zero: bool,
}

impl Product {
    fn one() -> Self {
        Self {
            log: c(0.0),
            zero: false,
        }
    }

    fn mul_pow(&mut self, z: Complex64, exponent: u64) {
        if exponent == 0 {
            return;
        }
        if z == c(0.0) {
            self.zero = true;
        } else {
            self.log += z.ln() * exponent as f64;
        }
    }

    fn mul_log(&mut self, log: Complex64, exponent: u64) {
        self.log += log * exponent as f64;
    }

    fn phase(&mut self, angle: f64) {
        self.log += Complex64::new(0.0, angle);
    }

    fn value(self) -> Complex64 {
        if self.zero {
            c(0.0)
        } else {
            let im = self.log.im.rem_euclid(2.0 * PI);
            Complex64::new(self.log.re, im).exp()
        }
    }
}

/// `C(n + j - 1, n - 1)`, counted as compositions so that every `n >= 1` is covered.
fn count(total: i64, parts: i64) -> u64 {
    count_compositions(total, parts)
}

/// `S2` with periods `(rho, lambda)` bound to the model parameters.
#[derive(Debug, Clone)]
pub struct ClosedFormContext {
    pub params: ModelParams,
    s2: DoubleSine,
}

impl ClosedFormContext {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            params: params.clone(),
            s2: DoubleSine::new(params.periods()),
        }
    }

    fn ln_s2(&self, x: Complex64) -> Result<Complex64> {
        self.s2.regular_log(x)
    }

    /// `(q^(rho) q^(lambda))^x`.
    fn qq_angle(&self, x: f64) -> f64 {
        let (rho, lambda) = (self.params.rho(), self.params.lambda());
        -(PI * PI / rho + PI * PI / lambda) * x
    }
}

/// `E_l` at the spectral parameters of `params`.
pub fn e_l(params: &ModelParams) -> Result<Complex64> {
    let betas: Vec<Complex64> = params.betas().iter().map(|&b| c(b)).collect();
    e_l_at(params, &betas)
}

/// `E_l = (e^{mu sum beta})^{C(n+l-1,n)} prod_{j<l} prod_{m<m'}
/// (S2(i(b_m - b_m') + (L_m + L_m' - j) pi) / S2(i(b_m - b_m') - (L_m + L_m' - j) pi))^{C(n+l-j-2,n-1)}`.
pub fn e_l_at(params: &ModelParams, betas: &[Complex64]) -> Result<Complex64> {
    let n = params.n();
    if betas.len() != n {
        return Err(Error::InvalidParameter(format!("{} betas for n = {n}", betas.len())));
    }
    let l = params.l() as i64;
    let ctx = ClosedFormContext::new(params);
    let w = params.weights();
    let mut acc = Product::one();
    let sum: Complex64 = betas.iter().sum();
    acc.mul_log(sum * params.mu(), count(l - 1, n as i64 + 1));
    for j in 0..l {
        let e = count(l - j - 1, n as i64);
        if e == 0 {
            continue;
        }
        for m in 0..n {
            for mp in m + 1..n {
                let a = (w[m] + w[mp] - j as f64) * PI;
                let d = Complex64::i() * (betas[m] - betas[mp]);
                let ratio = ctx.ln_s2(d + a)? - ctx.ln_s2(d - a)?;
                acc.mul_log(ratio, e);
            }
        }
    }
    Ok(acc.value())
}

/// Shift direction of a ratio law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioStep {
    /// `beta_m -> beta_m - lambda i`, compared with `det K_m(rho, lambda)`.
    Lambda,
    /// `beta_m -> beta_m - rho i`, compared with `det K_m(lambda, rho)`.
    Rho,
}

/// `(E_l(.., beta_m - step i, ..) / E_l, det K_m)` for the chosen step.
pub fn e_l_ratio_check(params: &ModelParams, m: usize, step: RatioStep) -> Result<(Complex64, Complex64)> {
    if m >= params.n() {
        return Err(Error::InvalidParameter(format!("site {m} for n = {}", params.n())));
    }
    let betas: Vec<Complex64> = params.betas().iter().map(|&b| c(b)).collect();
    let (shift, kparams) = match step {
        RatioStep::Lambda => (params.lambda(), params.clone()),
        RatioStep::Rho => (params.rho(), params.swapped()),
    };
    let mut shifted = betas.clone();
    shifted[m] -= Complex64::new(0.0, shift);
    let ratio = e_l_at(params, &shifted)? / e_l_at(params, &betas)?;
    let det = det_k_closed_at(m, &kparams, &betas)?;
    Ok((ratio, det))
}

/// `G_l^Lambda(x) = prod_{k<l} 1 / (S2(c_k - rho lambda x / 2pi) S2(c_k + rho lambda x / 2pi))`,
/// `c_k = (rho + lambda)/2 - pi (k - Lambda)`.
pub fn g_l_closed(l: usize, weight: f64, x: Complex64, periods: Periods) -> Result<Complex64> {
    let s2 = DoubleSine::new(periods);
    let (rho, lambda) = (periods.omega1(), periods.omega2());
    let y = x * (rho * lambda / (2.0 * PI));
    let mut log = c(0.0);
    for k in 0..l {
        let ck = c((rho + lambda) / 2.0 - PI * (k as f64 - weight));
        log -= s2.regular_log(ck - y)? + s2.regular_log(ck + y)?;
    }
    Ok(log.exp())
}

fn ln_q_factorial(theta: f64, k: usize) -> Result<Option<Complex64>> {
    let q = QPhase::generic_to_degree(theta, 1)?;
    let f = q.q_factorial(k)?;
    Ok(if f == c(0.0) { None } else { Some(f.ln()) })
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|j| (j as f64).ln()).sum()
}

/// `c~_l = [l]_{q(rho)}! [l]_{q(lambda)}! / (4^{C(l,2)} l!) prod_{k=1}^{l} S2(pi) sqrt(rho lambda) / (S2(k pi) S2((k - 2 Lambda - 1) pi))`.
pub fn c_tilde(l: usize, weight: f64, periods: Periods) -> Result<Complex64> {
    let s2 = DoubleSine::new(periods);
    let (rho, lambda) = (periods.omega1(), periods.omega2());
    let mut acc = Product::one();
    for theta in [-PI * PI / rho, -PI * PI / lambda] {
        match ln_q_factorial(theta, l)? {
            Some(lf) => acc.mul_log(lf, 1),
            None => acc.zero = true,
        }
    }
    acc.mul_log(c(-(4f64.ln()) * binomial(l as i64, 2) as f64 - ln_factorial(l)), 1);
    let ln_unit = s2.regular_log(c(PI))? + 0.5 * (rho * lambda).ln();
    for k in 1..=l {
        acc.mul_log(ln_unit, 1);
        acc.mul_log(
            -(s2.regular_log(c(k as f64 * PI))? + s2.regular_log(c((k as f64 - 2.0 * weight - 1.0) * PI))?),
            1,
        );
    }
    Ok(acc.value())
}

/// Argument of `F_{l_m}^{Lambda_m}` in the product formula for `c_l`:
/// `mu + 2pi^2/(rho lambda) (sum_{j<m} (l_j - L_j) - sum_{j>m} (l_j - L_j)) - (rho + lambda) pi/(rho lambda)`.
pub fn shifted_argument(params: &ModelParams, index: &MultiIndex, m: usize) -> f64 {
    let (rho, lambda) = (params.rho(), params.lambda());
    let e = index.entries();
    let w = params.weights();
    let mut s = 0.0;
    for j in 0..e.len() {
        let t = e[j] as f64 - w[j];
        if j < m {
            s += t;
        } else if j > m {
            s -= t;
        }
    }
    params.mu() + 2.0 * PI * PI / (rho * lambda) * s - (rho + lambda) * PI / (rho * lambda)
}

/// `c_l` assembled per multi-index with `F = c~ G`.
pub fn c_l_constant(params: &ModelParams) -> Result<Complex64> {
    let (n, l) = (params.n() as i64, params.l() as i64);
    let ctx = ClosedFormContext::new(params);
    let periods = params.periods();
    let mut acc = Product::one();
    let q_exp = binomial(n, 2) as f64 * count(l - 2, n + 2) as f64 + count(l - 1, n + 1) as f64 * params.weight_sum();
    acc.phase(ctx.qq_angle(q_exp));
    let four = n * (n - 1) * count(l - 1, n + 1) as i64 + binomial(n, 2) as i64 * count(l - 2, n + 2) as i64;
    acc.mul_log(c(-(4f64.ln()) * four as f64 - ln_factorial(l as usize) * count(l, n) as f64), 1);
    for j in 1..=l {
        acc.mul_log(c(ln_factorial(j as usize)), n as u64 * count(l - j, n - 1));
    }
    let w = params.weights();
    for index in enumerate(params.n(), params.l()) {
        for (m, &lm) in index.entries().iter().enumerate() {
            if lm == 0 {
                continue;
            }
            let x = shifted_argument(params, &index, m);
            acc.mul_pow(c_tilde(lm, w[m], periods)?, 1);
            acc.mul_pow(g_l_closed(lm, w[m], c(x), periods)?, 1);
        }
    }
    Ok(acc.value())
}

/// Closed form of `D_l = det [I(w_L^(rho), w_L'^(lambda))]`.
pub fn theorem_rhs(params: &ModelParams) -> Result<Complex64> {
    let (n, l) = (params.n() as i64, params.l() as i64);
    let ctx = ClosedFormContext::new(params);
    let (rho, lambda) = (params.rho(), params.lambda());
    let w = params.weights();
    let sum_w = params.weight_sum();
    let mut acc = Product::one();

    let q_exp = binomial(n, 2) as f64 * count(l - 2, n + 2) as f64 + count(l - 1, n + 1) as f64 * sum_w;
    acc.phase(ctx.qq_angle(q_exp));
    let ln_unit = ctx.ln_s2(c(PI))? + 0.5 * (rho * lambda).ln();
    acc.mul_log(ln_unit, n as u64 * count(l - 1, n + 1));
    let four = n * (n - 1) * count(l - 1, n + 1) as i64 + binomial(n + 1, 2) as i64 * count(l - 2, n + 2) as i64;
    acc.mul_log(c(-(4f64.ln()) * four as f64 - ln_factorial(l as usize) * count(l, n) as f64), 1);

    for j in 1..=l {
        let e = count(l - j, n - 1);
        if e == 0 {
            continue;
        }
        let mut factorials = Product::one();
        for theta in [-PI * PI / rho, -PI * PI / lambda] {
            match ln_q_factorial(theta, j as usize)? {
                Some(lf) => factorials.mul_log(lf, 1),
                None => factorials.zero = true,
            }
        }
        for &wm in w {
            let mut den = c(0.0);
            for k in 1..=j {
                let k = k as f64;
                den += ctx.ln_s2(c(k * PI))? + ctx.ln_s2(c((k - 2.0 * wm - 1.0) * PI))?;
            }
            acc.mul_log(factorials.log - den, e);
            acc.zero |= factorials.zero;
        }
    }

    let y = rho * lambda * params.mu() / (2.0 * PI);
    for j in 0..l {
        let a = (sum_w - j as f64) * PI;
        let ratio = ctx.ln_s2(c(y - a))? - ctx.ln_s2(c(y + a))?;
        acc.mul_log(ratio, count(j, n));
    }
    acc.mul_pow(e_l(params)?, 1);
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn trivial_levels() {
        for n in 1..=3 {
            let p = ModelParams::desk(n, 0).unwrap();
            assert!((e_l(&p).unwrap() - 1.0).norm() < 1e-14);
            assert!((theorem_rhs(&p).unwrap() - 1.0).norm() < 1e-14);
            assert!((c_l_constant(&p).unwrap() - 1.0).norm() < 1e-14);
        }
        let per = Periods::new(2.0 * PI, 2.0 * PI).unwrap();
        assert_eq!(c_tilde(0, -0.3, per).unwrap(), c(1.0));
        assert_eq!(g_l_closed(0, -0.3, c(0.7), per).unwrap(), c(1.0));
    }

    #[test]
    fn single_site_e() {
        let p = ModelParams::desk(1, 3).unwrap().with_betas(vec![0.7]).unwrap();
        let expect = (c(0.5 * 0.7 * 3.0)).exp();
        assert!(rel(e_l(&p).unwrap(), expect) < 1e-14);
    }

    #[test]
    fn c_tilde_one() {
        let per = Periods::new(2.0 * PI, 3.0 * PI).unwrap();
        let s2 = DoubleSine::new(per);
        let expect = c((6.0 * PI * PI).sqrt()) / s2.regular(c(0.6 * PI)).unwrap();
        assert!(rel(c_tilde(1, -0.3, per).unwrap(), expect) < 1e-13);
    }

    #[test]
    fn g_is_even() {
        let per = Periods::new(4.0 * PI, 3.0 * PI).unwrap();
        for x in [0.1, 0.25, -0.4] {
            let a = g_l_closed(2, -0.3, c(x), per).unwrap();
            let b = g_l_closed(2, -0.3, c(-x), per).unwrap();
            assert!(rel(a, b) < 1e-13);
        }
    }

    #[test]
    fn single_site_ratio() {
        let p = ModelParams::desk(1, 2).unwrap().with_periods(4.0 * PI, 4.0 * PI).unwrap();
        let (r, d) = e_l_ratio_check(&p, 0, RatioStep::Lambda).unwrap();
        assert!(rel(r, d) < 1e-12);
        let expect = Complex64::from_polar(1.0, -0.5 * 4.0 * PI * 2.0);
        assert!(rel(d, expect) < 1e-12);
    }

    #[test]
    fn assemblies_agree() {
        for (n, l) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2)] {
            let p = ModelParams::desk(n, l).unwrap().with_periods(4.0 * PI, 3.5 * PI).unwrap();
            let a = theorem_rhs(&p).unwrap();
            let b = c_l_constant(&p).unwrap() * e_l(&p).unwrap();
            assert!(rel(a, b) < 1e-10, "n={n} l={l}: {a} vs {b}");
        }
    }
}
