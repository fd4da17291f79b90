//! Phases `q = e^{i theta}` and the model parameter pack.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::double_sine::Periods;
use crate::error::{Error, Result};

/// Largest denominator rejected by the strict root-of-unity guard.
pub const ROOT_OF_UNITY_MAX_DENOMINATOR: u32 = 64;
const ROOT_OF_UNITY_TOL: f64 = 1e-12;
/// Smallest admissible `|1 - q^{2k}|` for the degree-bounded guard.
pub const GENERIC_GUARD: f64 = 1e-8;

/// `q = e^{i theta}`; powers `q^x` are always `exp(i theta x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPhase {
    theta: f64,
}

impl QPhase {
    /// Strict constructor: rejects `theta / pi` within `1e-12` of a rational with
    /// denominator at most 64.
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite(format!("phase {theta}")));
        }
        let t = theta / PI;
        for den in 1..=ROOT_OF_UNITY_MAX_DENOMINATOR {
            let scaled = t * den as f64;
            if (scaled - scaled.round()).abs() < ROOT_OF_UNITY_TOL * den as f64 {
                return Err(Error::RootOfUnity {
                    theta,
                    denominator: den,
                });
            }
        }
        Ok(Self { theta })
    }

    /// Constructor that only excludes `q^{2k} = 1` for `1 <= k <= degree`, which is all
    /// a computation on weight blocks up to `degree` divides by.
    pub fn generic_to_degree(theta: f64, degree: usize) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::NonFinite(format!("phase {theta}")));
        }
        let q = Self { theta };
        for k in 1..=degree.max(1) {
            if (1.0 - q.pow_real(2.0 * k as f64)).norm() < GENERIC_GUARD {
                return Err(Error::RootOfUnity {
                    theta,
                    denominator: 2 * k as u32,
                });
            }
        }
        Ok(q)
    }

    /// `q = exp(-pi^2 i / period)`.
    pub fn from_period(period: f64, degree: usize) -> Result<Self> {
        Self::generic_to_degree(-PI * PI / period, degree)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn pow(&self, x: Complex64) -> Complex64 {
        (Complex64::i() * self.theta * x).exp()
    }

    pub fn pow_real(&self, x: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.theta * x)
    }

    /// `[a]_q = (q^a - q^{-a}) / (q - q^{-1})`.
    pub fn q_integer(&self, a: Complex64) -> Result<Complex64> {
        let den = self.pow_real(1.0) - self.pow_real(-1.0);
        if den.norm() < GENERIC_GUARD {
            return Err(Error::VanishingDenominator("q - q^-1".into()));
        }
        Ok((self.pow(a) - self.pow(-a)) / den)
    }

    /// `[k]_q! = [1]_q ... [k]_q`.
    pub fn q_factorial(&self, k: usize) -> Result<Complex64> {
        (1..=k).try_fold(Complex64::new(1.0, 0.0), |acc, m| {
            Ok(acc * self.q_integer(Complex64::new(m as f64, 0.0))?)
        })
    }
}

/// Model parameters `(rho, lambda, mu, l, Lambda_1..n, beta_1..n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    rho: f64,
    lambda: f64,
    mu: f64,
    l: usize,
    weights: Vec<f64>,
    betas: Vec<f64>,
}

impl ModelParams {
    pub fn new(
        rho: f64,
        lambda: f64,
        mu: f64,
        l: usize,
        weights: Vec<f64>,
        betas: Vec<f64>,
    ) -> Result<Self> {
        for (name, v) in [("rho", rho), ("lambda", lambda), ("mu", mu)] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
            if v <= 0.0 {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if weights.is_empty() {
            return Err(Error::InvalidParameter("at least one site is required".into()));
        }
        if weights.len() != betas.len() {
            return Err(Error::InvalidParameter(format!(
                "{} highest weights but {} spectral parameters",
                weights.len(),
                betas.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "highest weights must be negative, got {w}"
            )));
        }
        if let Some(b) = betas.iter().find(|b| !b.is_finite()) {
            return Err(Error::NonFinite(format!("beta = {b}")));
        }
        Ok(Self {
            rho,
            lambda,
            mu,
            l,
            weights,
            betas,
        })
    }

    /// Desk-scale defaults: `rho = lambda = 2 pi`, `mu = 0.5`, `Lambda_m = -0.3`,
    /// `beta = (0, 0.4, 0.9, ...)`.
    pub fn desk(n: usize, l: usize) -> Result<Self> {
        let betas = (0..n).map(default_beta).collect();
        Self::new(2.0 * PI, 2.0 * PI, 0.5, l, vec![-0.3; n], betas)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn l(&self) -> usize {
        self.l
    }
    pub fn n(&self) -> usize {
        self.weights.len()
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn with_l(&self, l: usize) -> Self {
        Self { l, ..self.clone() }
    }

    pub fn with_mu(&self, mu: f64) -> Result<Self> {
        Self::new(self.rho, self.lambda, mu, self.l, self.weights.clone(), self.betas.clone())
    }

    pub fn with_periods(&self, rho: f64, lambda: f64) -> Result<Self> {
        Self::new(rho, lambda, self.mu, self.l, self.weights.clone(), self.betas.clone())
    }

    pub fn with_betas(&self, betas: Vec<f64>) -> Result<Self> {
        Self::new(self.rho, self.lambda, self.mu, self.l, self.weights.clone(), betas)
    }

    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.rho, self.lambda, self.mu, self.l, weights, self.betas.clone())
    }

    /// The same parameters with `rho` and `lambda` interchanged.
    pub fn swapped(&self) -> Self {
        Self {
            rho: self.lambda,
            lambda: self.rho,
            ..self.clone()
        }
    }

    pub fn periods(&self) -> Periods {
        Periods::new(self.rho, self.lambda).expect("validated periods")
    }

    /// `q^{(rho)}`, guarded up to the block degree.
    pub fn q_rho(&self) -> Result<QPhase> {
        QPhase::from_period(self.rho, self.l)
    }

    /// `q^{(lambda)}`, guarded up to the block degree.
    pub fn q_lambda(&self) -> Result<QPhase> {
        QPhase::from_period(self.lambda, self.l)
    }

    /// `z_m = exp(2 pi beta_m / rho)`.
    pub fn z(&self, m: usize) -> f64 {
        (2.0 * PI * self.betas[m] / self.rho).exp()
    }

    /// `p = exp(-2 pi i lambda / rho)`.
    pub fn p(&self) -> Complex64 {
        Complex64::from_polar(1.0, -2.0 * PI * self.lambda / self.rho)
    }

    /// `r = exp(-mu lambda i / 2)`.
    pub fn r(&self) -> Complex64 {
        Complex64::from_polar(1.0, -0.5 * self.mu * self.lambda)
    }
}

/// Default spectral parameter of site `m`.
pub fn default_beta(m: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 0.4,
        2 => 0.9,
        _ => 0.5 * m as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_guard_rejects_rational_phases() {
        assert!(matches!(QPhase::new(PI / 3.0), Err(Error::RootOfUnity { denominator: 3, .. })));
        assert!(QPhase::new(-PI / 2.0).is_err());
        assert!(QPhase::new(-PI * PI / 2.7).is_ok());
    }

    #[test]
    fn degree_guard_admits_quarter_turn_at_degree_one() {
        assert!(QPhase::from_period(2.0 * PI, 1).is_ok());
        assert!(QPhase::from_period(2.0 * PI, 2).is_err());
        assert!(QPhase::from_period(4.0 * PI, 3).is_ok());
        assert!(QPhase::from_period(4.0 * PI, 4).is_err());
    }

    #[test]
    fn q_integer_examples() {
        let q = QPhase::new(-PI * PI / 3.0).unwrap();
        let one = q.q_integer(Complex64::new(1.0, 0.0)).unwrap();
        assert!((one - 1.0).norm() < 1e-15);
        assert_eq!(q.q_integer(Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
        let two = q.q_integer(Complex64::new(2.0, 0.0)).unwrap();
        assert!((two - Complex64::new(-1.978_054_633_107_49, 0.0)).norm() < 1e-12, "{two}");
        assert!((two - 2.0 * q.theta().cos()).norm() < 1e-14);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(1.0, 1.0, 0.5, 1, vec![-0.3], vec![0.0]).is_ok());
        assert!(ModelParams::new(1.0, 1.0, 0.5, 1, vec![0.3], vec![0.0]).is_err());
        assert!(ModelParams::new(1.0, -1.0, 0.5, 1, vec![-0.3], vec![0.0]).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.5, 1, vec![-0.3], vec![]).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 1, vec![-0.3], vec![0.0]).is_err());
    }

    #[test]
    fn derived_quantities() {
        let p = ModelParams::desk(2, 1).unwrap();
        assert!((p.z(1) - (0.4f64).exp()).abs() < 1e-15);
        assert!((p.p() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let s = p.swapped();
        assert_eq!(s.rho(), p.lambda());
    }
}
