//! JSON-lines check records.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Cplx {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Record {
    pub suite: &'static str,
    pub check: String,
    pub anchor: &'static str,
    pub inputs: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Cplx>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl Record {
    /// Relative comparison of two complex numbers.
    pub fn compare(
        suite: &'static str,
        check: impl Into<String>,
        anchor: &'static str,
        inputs: Value,
        lhs: Complex64,
        rhs: Complex64,
        tolerance: f64,
    ) -> Self {
        let abs = (lhs - rhs).norm();
        let rel = if rhs.norm() > 0.0 { abs / rhs.norm() } else { abs };
        Self {
            suite,
            check: check.into(),
            anchor,
            inputs,
            lhs: Some(lhs.into()),
            rhs: Some(rhs.into()),
            abs_err: Some(abs),
            rel_err: Some(rel),
            tolerance: Some(tolerance),
            pass: rel.is_finite() && rel < tolerance,
            diagnostic: None,
        }
    }

    /// Comparison of norms with a precomputed difference norm.
    pub fn compare_norms(
        suite: &'static str,
        check: impl Into<String>,
        anchor: &'static str,
        inputs: Value,
        lhs: f64,
        rhs: f64,
        diff: f64,
        tolerance: f64,
    ) -> Self {
        let rel = if rhs > 0.0 { diff / rhs } else { diff };
        Self {
            suite,
            check: check.into(),
            anchor,
            inputs,
            lhs: Some(Cplx { re: lhs, im: 0.0 }),
            rhs: Some(Cplx { re: rhs, im: 0.0 }),
            abs_err: Some(diff),
            rel_err: Some(rel),
            tolerance: Some(tolerance),
            pass: rel.is_finite() && rel < tolerance,
            diagnostic: None,
        }
    }

    /// A check that could not run because a parameter guard failed.
    pub fn guard(suite: &'static str, check: impl Into<String>, anchor: &'static str, inputs: Value, why: String) -> Self {
        Self {
            suite,
            check: check.into(),
            anchor,
            inputs,
            lhs: None,
            rhs: None,
            abs_err: None,
            rel_err: None,
            tolerance: None,
            pass: false,
            diagnostic: Some(why),
        }
    }

    pub fn is_guard(&self) -> bool {
        self.diagnostic.is_some() && self.lhs.is_none()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub suites: Vec<&'static str>,
    pub passed: usize,
    pub failed: usize,
    pub guard_failures: usize,
}

#[derive(Debug, Clone, Serialize)]
struct SummaryLine<'a> {
    summary: &'a Summary,
}

impl Summary {
    pub fn of(suites: Vec<&'static str>, records: &[Record]) -> Self {
        let guard_failures = records.iter().filter(|r| r.is_guard()).count();
        let passed = records.iter().filter(|r| r.pass).count();
        Self {
            suites,
            passed,
            failed: records.len() - passed - guard_failures,
            guard_failures,
        }
    }
}

/// One JSON object per line, summary last.
pub fn render(records: &[Record], summary: &Summary) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out.push_str(&serde_json::to_string(&SummaryLine { summary }).expect("summary serializes"));
    out.push('\n');
    out
}
