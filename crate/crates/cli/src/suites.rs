//! Verification suites.

use std::f64::consts::PI;

use num_complex::Complex64;
use qkz_core::determinant_formula::{c_tilde, e_l_ratio_check, g_l_closed, theorem_rhs, RatioStep};
use qkz_core::double_sine::{s2, s2_asymptotic_log, s2_slope_at_zero, Periods};
use qkz_core::hypergeometric::{
    convergence_check, exchange_relation, f_convergence_check, f_integral, fundamental_matrix, pairing_integral,
    pairing_integral_shifted_beta, BetaShift, Flavor, WeightFunction,
};
use qkz_core::multi_index::enumerate;
use qkz_core::params::QPhase;
use qkz_core::quantum_algebra::{det_k_closed, k_operator, r_matrix, r_matrix_oracle};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::Record;

pub const SUITES: [&str; 7] = ["s2", "algebra", "detk", "exchange", "shift", "fint", "determinant"];

pub fn expand(name: &str) -> Option<Vec<&'static str>> {
    if name == "all" {
        return Some(SUITES.to_vec());
    }
    SUITES.iter().find(|s| **s == name).map(|s| vec![*s])
}

pub fn run(name: &'static str, cfg: &RunConfig) -> Vec<Record> {
    match name {
        "s2" => s2_suite(cfg),
        "algebra" => algebra_suite(cfg),
        "detk" => detk_suite(cfg),
        "exchange" => exchange_suite(cfg),
        "shift" => shift_suite(cfg),
        "fint" => fint_suite(cfg),
        "determinant" => determinant_suite(cfg),
        _ => unreachable!("unknown suite {name}"),
    }
}

fn cx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn model_inputs(cfg: &RunConfig) -> Value {
    let p = &cfg.params;
    json!({
        "n": p.n(), "l": p.l(), "rho": p.rho(), "lambda": p.lambda(), "mu": p.mu(),
        "weights": p.weights(), "betas": p.betas(),
    })
}

fn with(mut base: Value, extra: Value) -> Value {
    if let (Some(b), Some(e)) = (base.as_object_mut(), extra.as_object()) {
        for (k, v) in e {
            b.insert(k.clone(), v.clone());
        }
    }
    base
}

const GOLDEN_S2: &str = include_str!("../../../golden/s2.csv");

fn s2_suite(cfg: &RunConfig) -> Vec<Record> {
    const SUITE: &str = "s2";
    let tol = cfg.tolerance(SUITE, 1e-10);
    let (w1, w2) = (cfg.params.rho(), cfg.params.lambda());
    let per = cfg.params.periods();
    let span = w1 + w2;
    let mut out = Vec::new();
    let eval = |x: Complex64, p: Periods| s2(x, p).map(|v| v.value);
    for k in 0..50 {
        let x = cx(
            span * (-1.0 + 2.0 * k as f64 / 49.0),
            0.1 * span * (0.3 + 0.7 * (k as f64).sin().abs()),
        );
        let inputs = json!({ "x": [x.re, x.im], "omega1": w1, "omega2": w2 });
        let base = match eval(x, per) {
            Ok(v) => v,
            Err(e) => {
                out.push(Record::guard(SUITE, format!("point_{k:02}"), "double sine", inputs, e.to_string()));
                continue;
            }
        };
        let laws = [
            ("shift_omega1", "shift law", eval(x + w1, per).map(|v| v * 2.0 * (x * PI / w2).sin()), base),
            ("shift_omega2", "shift law", eval(x + w2, per).map(|v| v * 2.0 * (x * PI / w1).sin()), base),
            (
                "reflection",
                "reflection law",
                eval(-x, per).map(|v| v * base),
                -4.0 * (x * PI / w1).sin() * (x * PI / w2).sin(),
            ),
            ("period_swap", "period symmetry", eval(x, per.swapped()), base),
        ];
        for (name, anchor, lhs, rhs) in laws {
            let check = format!("{name}_{k:02}");
            out.push(match lhs {
                Ok(lhs) => Record::compare(SUITE, check, anchor, inputs.clone(), lhs, rhs, tol),
                Err(e) => Record::guard(SUITE, check, anchor, inputs.clone(), e.to_string()),
            });
        }
    }

    let eps = 1e-8 * w1.min(w2);
    if let Ok(v) = eval(cx(eps, 0.0), per) {
        out.push(Record::compare(
            SUITE,
            "slope_at_zero",
            "slope at the origin",
            json!({ "x": eps, "omega1": w1, "omega2": w2 }),
            v / eps,
            cx(s2_slope_at_zero(per), 0.0),
            tol.max(1e-6),
        ));
    }

    let heights = [5.0, 10.0, 20.0, 40.0];
    let residuals: Vec<f64> = heights
        .iter()
        .map(|&t| {
            let x = cx(0.4, t);
            match (eval(x, per), s2_asymptotic_log(x, per)) {
                (Ok(v), Ok(a)) => (v * (-a).exp() - 1.0).norm(),
                _ => f64::NAN,
            }
        })
        .collect();
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0] || w[1] < 1e-11);
    let last = residuals[residuals.len() - 1];
    let mut trend = Record::compare(
        SUITE,
        "asymptotic_trend",
        "vertical asymptotics",
        json!({ "im_x": heights, "residuals": residuals, "omega1": w1, "omega2": w2 }),
        cx(last, 0.0),
        cx(0.0, 0.0),
        1e-6,
    );
    trend.pass &= decreasing;
    out.push(trend);

    for (row, line) in GOLDEN_S2.lines().skip(1).enumerate() {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().expect("golden table")).collect();
        let x = cx(f[0], f[1]);
        let inputs = json!({ "x": [f[0], f[1]], "omega1": f[2], "omega2": f[3] });
        let check = format!("golden_{row:02}");
        let per = Periods::new(f[2], f[3]).expect("golden periods");
        out.push(match eval(x, per) {
            Ok(v) => Record::compare(SUITE, check, "reference table", inputs, v, cx(f[4], f[5]), tol),
            Err(e) => Record::guard(SUITE, check, "reference table", inputs, e.to_string()),
        });
    }
    out
}

/// Seeded draws: 20 generic parameter sets, blocks 0..=2.
fn algebra_suite(cfg: &RunConfig) -> Vec<Record> {
    const SUITE: &str = "algebra";
    let tol = cfg.tolerance(SUITE, 1e-10);
    let mut rng = StdRng::seed_from_u64(20);
    let mut out = Vec::new();
    for draw in 0..20 {
        let theta = -rng.random_range(0.2..1.4);
        let w1 = -rng.random_range(0.05..0.95);
        let w2 = -rng.random_range(0.05..0.95);
        let z = Complex64::from_polar(rng.random_range(0.3..2.0), rng.random_range(-PI..PI));
        for l in 0..=2 {
            let inputs = json!({ "theta": theta, "weights": [w1, w2], "z": [z.re, z.im], "l": l });
            let check = format!("r_matrix_{draw:02}_l{l}");
            let anchor = "R-matrix intertwining";
            let result = QPhase::generic_to_degree(theta, 2).and_then(|q| {
                Ok((
                    r_matrix(cx(w1, 0.0), cx(w2, 0.0), z, &q, l)?,
                    r_matrix_oracle(cx(w1, 0.0), cx(w2, 0.0), z, cx(1.0, 0.0), &q, l)?,
                ))
            });
            out.push(match result {
                Ok((a, b)) => {
                    Record::compare_norms(SUITE, check, anchor, inputs, a.norm(), b.norm(), (&a - &b).norm(), tol)
                }
                Err(e) => Record::guard(SUITE, check, anchor, inputs, e.to_string()),
            });
        }
    }
    out
}

fn detk_suite(cfg: &RunConfig) -> Vec<Record> {
    const SUITE: &str = "detk";
    let tol = cfg.tolerance(SUITE, 1e-8);
    let p = &cfg.params;
    let mut out = Vec::new();
    for m in 0..p.n() {
        let inputs = with(model_inputs(cfg), json!({ "site": m }));
        let check = format!("det_k_site{m}");
        let anchor = "determinant of the difference operator";
        out.push(match (k_operator(m, p), det_k_closed(m, p)) {
            (Ok(k), Ok(closed)) => Record::compare(SUITE, check, anchor, inputs, k.determinant(), closed, tol),
            (Err(e), _) | (_, Err(e)) => Record::guard(SUITE, check, anchor, inputs, e.to_string()),
        });
        for (step, name) in [(RatioStep::Lambda, "lambda"), (RatioStep::Rho, "rho")] {
            let inputs = with(model_inputs(cfg), json!({ "site": m, "step": name }));
            let check = format!("ratio_site{m}_{name}");
            let anchor = "ratio law of E_l";
            out.push(match e_l_ratio_check(p, m, step) {
                Ok((ratio, det)) => Record::compare(SUITE, check, anchor, inputs, ratio, det, tol),
                Err(e) => Record::guard(SUITE, check, anchor, inputs, e.to_string()),
            });
        }
    }
    out
}

fn exchange_suite(cfg: &RunConfig) -> Vec<Record> {
    const SUITE: &str = "exchange";
    const ANCHOR: &str = "exchange relation";
    let tol = cfg.tolerance(SUITE, 1e-8);
    let p = &cfg.params;
    if p.n() < 2 {
        return vec![Record::guard(
            SUITE,
            "exchange",
            ANCHOR,
            model_inputs(cfg),
            "the exchange relation needs at least two sites".into(),
        )];
    }
    let mut rng = StdRng::seed_from_u64(7);
    let mut out = Vec::new();
    for sample in 0..10 {
        let alphas: Vec<Complex64> = (0..p.l()).map(|_| cx(rng.random_range(-2.0..2.0), 0.0)).collect();
        for m in 0..p.n() - 1 {
            let a: Vec<f64> = alphas.iter().map(|z| z.re).collect();
            let inputs = with(model_inputs(cfg), json!({ "sites": [m, m + 1], "alphas": a }));
            let check = format!("exchange_{sample:02}_sites{m}");
            out.push(match exchange_relation(p, m, &alphas) {
                Ok((lhs, rhs)) => {
                    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    let diff: Vec<Complex64> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
                    Record::compare_norms(SUITE, check, ANCHOR, inputs, norm(&lhs), norm(&rhs), norm(&diff), tol)
                }
                Err(e) => Record::guard(SUITE, check, ANCHOR, inputs, e.to_string()),
            });
        }
    }
    out
}

fn window_guard(suite: &'static str, check: &str, anchor: &'static str, cfg: &RunConfig) -> Option<Record> {
    if cfg.params.l() == 0 {
        return None;
    }
    let report = convergence_check(&cfg.params, 0.0);
    report.diagnostic.map(|d| {
        let inputs = with(model_inputs(cfg), json!({ "window": [report.lower, report.upper] }));
        Record::guard(suite, check, anchor, inputs, d)
    })
}

fn shift_suite(cfg: &RunConfig) -> Vec<Record> {
    const SUITE: &str = "shift";
    const ANCHOR: &str = "shift relation";
    let tol = cfg.tolerance(SUITE, 1e-6);
    let p = &cfg.params;
    if let Some(g) = window_guard(SUITE, "shift", ANCHOR, cfg) {
        return vec![g];
    }
    let n = p.n();
    let basis = enumerate(n, p.l());
    let fs: Vec<_> = basis.iter().filter(|b| b.entries()[n - 1] == 0).collect();
    if fs.is_empty() {
        return vec![Record::guard(
            SUITE,
            "shift",
            ANCHOR,
            model_inputs(cfg),
            "no multi-index with l_n = 0; the shifted contour needs deformation".into(),
        )];
    }
    let mut out = Vec::new();
    for f_index in fs {
        for g_index in &basis {
            let inputs = with(
                model_inputs(cfg),
                json!({ "f": f_index.entries(), "g": g_index.entries(), "shift": "+lambda i", "site": n - 1 }),
            );
            let check = format!("shift_{f_index}_{g_index}");
            let f = WeightFunction::plain(Flavor::Rho, f_index.clone());
            let g = WeightFunction::skew(Flavor::Lambda, g_index.clone());
            let mut moved = f_index.entries().to_vec();
            moved.rotate_right(1);
            let f_moved = WeightFunction::plain(Flavor::Rho, qkz_core::multi_index::MultiIndex::new(moved))
                .last_site_first();
            let result = pairing_integral_shifted_beta(&f, &g, p, n - 1, BetaShift::PlusLambda, &cfg.quad)
                .and_then(|lhs| Ok((lhs, pairing_integral(&f_moved, &g, p, &cfg.quad)?)));
            out.push(match result {
                Ok((lhs, rhs)) => {
                    let inputs = with(inputs, json!({ "quadrature_error": lhs.error.max(rhs.error) }));
                    Record::compare(SUITE, check, ANCHOR, inputs, lhs.value, rhs.value, tol)
                }
                Err(e) => Record::guard(SUITE, check, ANCHOR, inputs, e.to_string()),
            });
        }
    }
    out
}

fn fint_suite(cfg: &RunConfig) -> Vec<Record> {
    const SUITE: &str = "fint";
    let p = &cfg.params;
    let l = p.l();
    let tol = cfg.tolerance(SUITE, if l <= 1 { 1e-6 } else { 1e-4 });
    let weight = p.weights()[0];
    let per = p.periods();
    let (rho, lambda) = (p.rho(), p.lambda());
    let base = json!({ "l": l, "weight": weight, "rho": rho, "lambda": lambda });
    let bound = f_convergence_check(l, weight, 0.0, per).upper;
    let step = (PI / rho).max(PI / lambda);
    let mut out = Vec::new();

    let f = |x: f64| f_integral(l, weight, cx(x, 0.0), per, &cfg.quad);
    for (k, x) in [-0.35 * bound, 0.0, 0.35 * bound].into_iter().enumerate() {
        let inputs = with(base.clone(), json!({ "x": x }));
        let check = format!("closed_form_{k}");
        let anchor = "F = c~ G";
        let result = f(x).and_then(|fv| {
            Ok((fv, c_tilde(l, weight, per)? * g_l_closed(l, weight, cx(x, 0.0), per)?))
        });
        out.push(match result {
            Ok((fv, closed)) => {
                let inputs = with(inputs, json!({ "quadrature_error": fv.error }));
                Record::compare(SUITE, check, anchor, inputs, fv.value, closed, tol)
            }
            Err(e) => Record::guard(SUITE, check, anchor, inputs, e.to_string()),
        });
    }

    let anchor = "difference equation";
    if bound - step <= 0.0 {
        out.push(Record::guard(
            SUITE,
            "difference_equations",
            anchor,
            base,
            format!("shift {step:.4} leaves the convergence region |Re x| < {bound:.4}"),
        ));
        return out;
    }
    let x = 0.25 * (bound - step);
    for (name, shift_period, other) in [("lambda_step", lambda, rho), ("rho_step", rho, lambda)] {
        let inputs = with(base.clone(), json!({ "x": x, "step": PI / shift_period }));
        let result = f(x + PI / shift_period).and_then(|a| Ok((a, f(x - PI / shift_period)?)));
        out.push(match result {
            Ok((a, b)) => {
                let rhs: Complex64 = (0..l)
                    .map(|k| {
                        let u = cx(0.0, other * x / 2.0);
                        let v = cx(0.0, PI * PI * (k as f64 - weight) / shift_period);
                        (u - v).cosh() / (u + v).cosh()
                    })
                    .product();
                let inputs = with(inputs, json!({ "quadrature_error": a.error.max(b.error) }));
                Record::compare(SUITE, name, anchor, inputs, a.value / b.value, rhs, tol)
            }
            Err(e) => Record::guard(SUITE, name, anchor, inputs, e.to_string()),
        });
    }
    out
}

/// Default tolerance of the headline comparison by size.
pub fn determinant_tolerance(n: usize, l: usize) -> f64 {
    match (n, l) {
        (_, 0) | (1, 1) => 1e-5,
        (1, 2) | (2, 1) => 1e-4,
        _ => 1e-3,
    }
}

fn determinant_suite(cfg: &RunConfig) -> Vec<Record> {
    const SUITE: &str = "determinant";
    const ANCHOR: &str = "determinant formula";
    let p = &cfg.params;
    let tol = cfg.tolerance(SUITE, determinant_tolerance(p.n(), p.l()));
    if let Some(g) = window_guard(SUITE, "determinant", ANCHOR, cfg) {
        return vec![g];
    }
    let result = fundamental_matrix(p, &cfg.quad).and_then(|fm| Ok((fm.determinant(), theorem_rhs(p)?)));
    vec![match result {
        Ok(((d, err), rhs)) => {
            let inputs = with(model_inputs(cfg), json!({ "quadrature_error": err }));
            Record::compare(SUITE, "determinant", ANCHOR, inputs, d, rhs, tol)
        }
        Err(e) => Record::guard(SUITE, "determinant", ANCHOR, model_inputs(cfg), e.to_string()),
    }]
}
