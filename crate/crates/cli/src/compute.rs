//! Single-quantity calculator.

use clap::{Args, ValueEnum};
use num_complex::Complex64;
use qkz_core::determinant_formula::{c_l_constant, c_tilde, e_l, g_l_closed, theorem_rhs};
use qkz_core::double_sine::{s2, Periods};
use qkz_core::hypergeometric::{f_integral, fundamental_matrix, pairing_integral, Flavor, WeightFunction};
use qkz_core::multi_index::MultiIndex;
use qkz_core::quantum_algebra::{det_k_closed, k_operator, r_matrix, CMatrix};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::report::Cplx;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    S2,
    Rmatrix,
    Kdet,
    #[value(name = "E")]
    E,
    #[value(name = "G")]
    G,
    Ctilde,
    Crhs,
    #[value(name = "F")]
    F,
    #[value(name = "I")]
    I,
    #[value(name = "Psi")]
    Psi,
    #[value(name = "D")]
    D,
}

/// Flags specific to `compute`.
#[derive(Debug, Default, Clone, Args)]
pub struct ComputeArgs {
    /// argument (real part)
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// argument (imaginary part)
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub x_im: f64,
    /// periods for s2 (default: rho, lambda)
    #[arg(long)]
    pub omega1: Option<f64>,
    #[arg(long)]
    pub omega2: Option<f64>,
    /// site (counted from 0)
    #[arg(long, default_value_t = 0)]
    pub site: usize,
    /// spectral ratio z1/z2 for rmatrix (default: from the betas of sites 0 and 1)
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub z_im: f64,
    /// multi-index of the rho-flavour weight for I, comma separated
    #[arg(long, value_delimiter = ',')]
    pub index: Option<Vec<usize>>,
    /// multi-index of the lambda-flavour weight for I (default: same as --index)
    #[arg(long, value_delimiter = ',')]
    pub index2: Option<Vec<usize>>,
}

fn value(z: Complex64) -> Value {
    json!(Cplx::from(z))
}

fn matrix(m: &CMatrix) -> Value {
    let rows: Vec<Vec<Cplx>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect();
    json!(rows)
}

fn multi_index(entries: Option<Vec<usize>>, n: usize, l: usize) -> Result<MultiIndex, CliError> {
    let entries = entries.unwrap_or_else(|| {
        let mut e = vec![0; n];
        e[0] = l;
        e
    });
    if entries.len() != n || entries.iter().sum::<usize>() != l {
        return Err(CliError::Usage(format!("multi-index {entries:?} is not in Z_{l}^{n}")));
    }
    Ok(MultiIndex::new(entries))
}

pub fn compute(quantity: Quantity, args: &ComputeArgs, cfg: &RunConfig) -> Result<Value, CliError> {
    let p = &cfg.params;
    let x = Complex64::new(args.x.unwrap_or(0.0), args.x_im);
    let weight = p.weights()[0];
    let per = p.periods();
    let model = json!({
        "n": p.n(), "l": p.l(), "rho": p.rho(), "lambda": p.lambda(), "mu": p.mu(),
        "weights": p.weights(), "betas": p.betas(),
    });
    let doc = match quantity {
        Quantity::S2 => {
            let w1 = args.omega1.unwrap_or(p.rho());
            let w2 = args.omega2.unwrap_or(p.lambda());
            let periods = Periods::new(w1, w2)?;
            let v = s2(x, periods)?;
            json!({
                "inputs": { "x": [x.re, x.im], "omega1": w1, "omega2": w2 },
                "value": value(v.value),
                "status": format!("{:?}", v.status),
                "shifts": v.shifts,
            })
        }
        Quantity::Rmatrix => {
            if p.n() < 2 {
                return Err(CliError::Usage("rmatrix needs two sites".into()));
            }
            let z = match args.z {
                Some(re) => Complex64::new(re, args.z_im),
                None => Complex64::new(p.z(0) / p.z(1), 0.0),
            };
            let q = p.q_rho()?;
            let w = p.weights();
            let r = r_matrix(w[0].into(), w[1].into(), z, &q, p.l())?;
            json!({ "inputs": with_model(&model, json!({ "z": [z.re, z.im] })), "value": matrix(&r) })
        }
        Quantity::Kdet => {
            let det = k_operator(args.site, p)?.determinant();
            let closed = det_k_closed(args.site, p)?;
            json!({
                "inputs": with_model(&model, json!({ "site": args.site })),
                "value": value(det),
                "closed_form": value(closed),
            })
        }
        Quantity::E => json!({ "inputs": model, "value": value(e_l(p)?) }),
        Quantity::G => json!({
            "inputs": { "l": p.l(), "weight": weight, "x": [x.re, x.im], "rho": p.rho(), "lambda": p.lambda() },
            "value": value(g_l_closed(p.l(), weight, x, per)?),
        }),
        Quantity::Ctilde => json!({
            "inputs": { "l": p.l(), "weight": weight, "rho": p.rho(), "lambda": p.lambda() },
            "value": value(c_tilde(p.l(), weight, per)?),
        }),
        Quantity::Crhs => json!({
            "inputs": model,
            "c_l": value(c_l_constant(p)?),
            "e_l": value(e_l(p)?),
            "value": value(theorem_rhs(p)?),
        }),
        Quantity::F => {
            let r = f_integral(p.l(), weight, x, per, &cfg.quad)?;
            json!({
                "inputs": { "l": p.l(), "weight": weight, "x": [x.re, x.im], "rho": p.rho(), "lambda": p.lambda() },
                "value": value(r.value),
                "error": r.error,
                "flagged": r.flagged,
            })
        }
        Quantity::I => {
            let f = multi_index(args.index.clone(), p.n(), p.l())?;
            let g = multi_index(args.index2.clone().or_else(|| args.index.clone()), p.n(), p.l())?;
            let r = pairing_integral(
                &WeightFunction::skew(Flavor::Rho, f.clone()),
                &WeightFunction::skew(Flavor::Lambda, g.clone()),
                p,
                &cfg.quad,
            )?;
            json!({
                "inputs": with_model(&model, json!({ "index": f.entries(), "index2": g.entries() })),
                "value": value(r.value),
                "error": r.error,
                "flagged": r.flagged,
            })
        }
        Quantity::Psi => {
            let fm = fundamental_matrix(p, &cfg.quad)?;
            let basis: Vec<&[usize]> = fm.basis.iter().map(|b| b.entries()).collect();
            let errors: Vec<Vec<f64>> = (0..fm.errors.nrows())
                .map(|i| (0..fm.errors.ncols()).map(|j| fm.errors[(i, j)]).collect())
                .collect();
            json!({
                "inputs": model,
                "basis": basis,
                "value": matrix(&fm.entries),
                "errors": errors,
                "flagged": fm.flagged,
            })
        }
        Quantity::D => {
            let fm = fundamental_matrix(p, &cfg.quad)?;
            let (d, err) = fm.determinant();
            json!({ "inputs": model, "value": value(d), "error": err, "flagged": fm.flagged })
        }
    };
    let name = quantity.to_possible_value().expect("named").get_name().to_string();
    Ok(with_model(&json!({ "quantity": name }), doc))
}

fn with_model(base: &Value, extra: Value) -> Value {
    let mut out = base.clone();
    if let (Some(b), Some(e)) = (out.as_object_mut(), extra.as_object()) {
        for (k, v) in e {
            b.insert(k.clone(), v.clone());
        }
    }
    out
}
