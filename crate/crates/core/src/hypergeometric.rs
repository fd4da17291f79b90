//! Weight functions, kernels and the hypergeometric pairing
//!
//! ```text
//! I(f, g) = int_{R^l} e^{mu sum alpha_j} prod_j phi(alpha_j) prod_{j<j'} psi(alpha_j - alpha_j') f g
//! ```
//!
//! with `phi(x) = prod_m varphi(x - beta_m; Lambda_m)`, `psi(x) = varphi(x; -1)` and
//! `varphi(x; Lambda) = 1 / (S2(ix - Lambda pi) S2(-ix - Lambda pi))`, periods `(rho, lambda)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::double_sine::{DoubleSine, Periods};
use crate::error::{Error, Result};
use crate::multi_index::{enumerate, MultiIndex};
use crate::params::ModelParams;
use crate::quadrature::{
    integrate_matrix, skew_permutations, tabulate, Grid, IntegralResult, LatticeMeasure, LatticeWeight,
    QuadratureSpec,
};
use crate::quantum_algebra::{embedded_r_matrix, CMatrix};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Access to `varphi`, `psi` for periods `(rho, lambda)`.
#[derive(Debug, Clone, Copy)]
pub struct KernelContext {
    s2: DoubleSine,
}

impl KernelContext {
    /// Requires `rho + lambda > pi`, which keeps `psi` free of poles on the real line.
    pub fn new(periods: Periods) -> Result<Self> {
        if periods.omega1() + periods.omega2() <= PI {
            return Err(Error::InvalidParameter(format!(
                "rho + lambda = {} must exceed pi",
                periods.omega1() + periods.omega2()
            )));
        }
        Ok(Self {
            s2: DoubleSine::new(periods),
        })
    }

    pub fn from_params(params: &ModelParams) -> Result<Self> {
        Self::new(params.periods())
    }

    pub fn periods(&self) -> Periods {
        self.s2.periods()
    }

    /// `log varphi(x; Lambda)`.
    pub fn ln_phi(&self, x: Complex64, weight: Complex64) -> Result<Complex64> {
        let a = I * x - weight * PI;
        let b = -I * x - weight * PI;
        let context = || format!("varphi({x}; {weight})");
        let la = self.s2.regular_log(a).map_err(|e| e.in_context(context()))?;
        let lb = self.s2.regular_log(b).map_err(|e| e.in_context(context()))?;
        Ok(-(la + lb))
    }

    pub fn phi(&self, x: Complex64, weight: Complex64) -> Result<Complex64> {
        Ok(self.ln_phi(x, weight)?.exp())
    }

    pub fn psi(&self, x: Complex64) -> Result<Complex64> {
        self.phi(x, c(-1.0))
    }

    /// `prod_m varphi(x - beta_m; Lambda_m)`.
    pub fn phi_total(&self, x: Complex64, betas: &[Complex64], weights: &[f64]) -> Result<Complex64> {
        let mut log = Complex64::new(0.0, 0.0);
        for (b, w) in betas.iter().zip(weights) {
            log += self.ln_phi(x - b, c(*w))?;
        }
        Ok(log.exp())
    }
}

/// `varphi(x; Lambda)` with periods `(rho, lambda)`.
pub fn phi(x: Complex64, weight: Complex64, ctx: &KernelContext) -> Result<Complex64> {
    ctx.phi(x, weight)
}

/// `psi(x) = varphi(x; -1)`.
pub fn psi(x: Complex64, ctx: &KernelContext) -> Result<Complex64> {
    ctx.psi(x)
}

/// Which period plays the role of `rho` in a weight function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    Rho,
    Lambda,
}

impl Flavor {
    pub fn period(self, params: &ModelParams) -> f64 {
        match self {
            Flavor::Rho => params.rho(),
            Flavor::Lambda => params.lambda(),
        }
    }

    pub fn other(self) -> Self {
        match self {
            Flavor::Rho => Flavor::Lambda,
            Flavor::Lambda => Flavor::Rho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    /// `g_L`.
    Plain,
    /// `w_L = Skew(g_L)`.
    Skew,
}

/// `g_L` or `w_L` of a given flavor. `site_order` relabels the spectral parameters
/// and highest weights: site `k` of the weight function uses `beta_{order[k]}`,
/// `Lambda_{order[k]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightFunction {
    pub flavor: Flavor,
    pub index: MultiIndex,
    pub kind: WeightKind,
    site_order: Vec<usize>,
}

impl WeightFunction {
    pub fn plain(flavor: Flavor, index: MultiIndex) -> Self {
        let n = index.n();
        Self {
            flavor,
            index,
            kind: WeightKind::Plain,
            site_order: (0..n).collect(),
        }
    }

    pub fn skew(flavor: Flavor, index: MultiIndex) -> Self {
        Self {
            kind: WeightKind::Skew,
            ..Self::plain(flavor, index)
        }
    }

    pub fn with_site_order(mut self, order: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; self.index.n()];
        if order.len() != seen.len() || order.iter().any(|&k| k >= seen.len() || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidParameter(format!("{order:?} is not a permutation of the sites")));
        }
        self.site_order = order;
        Ok(self)
    }

    /// Sites relabelled as `(n, 1, ..., n-1)`.
    pub fn last_site_first(self) -> Self {
        let n = self.index.n();
        let order = std::iter::once(n - 1).chain(0..n - 1).collect();
        Self {
            site_order: order,
            ..self
        }
    }

    pub fn site_order(&self) -> &[usize] {
        &self.site_order
    }

    fn relabel(&self, betas: &[Complex64], weights: &[f64]) -> (Vec<Complex64>, Vec<f64>) {
        (
            self.site_order.iter().map(|&k| betas[k]).collect(),
            self.site_order.iter().map(|&k| weights[k]).collect(),
        )
    }

    /// Pointwise value at integration variables `alphas`.
    pub fn eval(&self, alphas: &[Complex64], betas: &[Complex64], params: &ModelParams) -> Complex64 {
        let (b, w) = self.relabel(betas, params.weights());
        let period = self.flavor.period(params);
        match self.kind {
            WeightKind::Plain => g_raw(&self.index, alphas, &b, &w, period),
            WeightKind::Skew => skew(alphas, |a| g_raw(&self.index, a, &b, &w, period)),
        }
    }

    /// Tables of the factors of `g_L` on a grid.
    fn lattice(&self, grid: &Grid, betas: &[Complex64], params: &ModelParams) -> Result<LatticeWeight> {
        let (b, w) = self.relabel(betas, params.weights());
        let period = self.flavor.period(params);
        let n = self.index.n();
        let scale = PI / period;
        let sites = (0..n)
            .map(|site| tabulate(grid.nodes().collect(), |x| Ok(site_factor(c(x), site, &b, &w, scale))))
            .collect::<Result<Vec<_>>>()?;
        let pair = if self.index.l() >= 2 {
            tabulate(grid.differences().collect(), |d| Ok(((c(d) - I * PI) * scale).sinh()))?
        } else {
            Vec::new()
        };
        Ok(LatticeWeight {
            pref: q_prefactor(&self.index, period),
            pair,
            sites,
            gamma: self.index.gamma(),
            skew: self.kind == WeightKind::Skew,
        })
    }
}

/// `q^{sum_{m<m'} l_m l_m'}` with `q = exp(-pi^2 i / period)`.
fn q_prefactor(index: &MultiIndex, period: f64) -> Complex64 {
    let e = index.entries();
    let mut s = 0usize;
    for m in 0..e.len() {
        for mp in m + 1..e.len() {
            s += e[m] * e[mp];
        }
    }
    Complex64::from_polar(1.0, -PI * PI / period * s as f64)
}

/// `e^{-s(a - b_c + L_c pi i)} prod_{m<c} sh(s(a - b_m + L_m pi i)) prod_{m>c} sh(s(a - b_m - L_m pi i))`.
fn site_factor(alpha: Complex64, site: usize, betas: &[Complex64], weights: &[f64], scale: f64) -> Complex64 {
    let mut v = (-(alpha - betas[site] + I * weights[site] * PI) * scale).exp();
    for m in 0..betas.len() {
        if m < site {
            v *= ((alpha - betas[m] + I * weights[m] * PI) * scale).sinh();
        } else if m > site {
            v *= ((alpha - betas[m] - I * weights[m] * PI) * scale).sinh();
        }
    }
    v
}

fn g_raw(index: &MultiIndex, alphas: &[Complex64], betas: &[Complex64], weights: &[f64], period: f64) -> Complex64 {
    let scale = PI / period;
    let mut v = q_prefactor(index, period);
    let l = alphas.len();
    for j in 0..l {
        for jp in j + 1..l {
            v *= ((alphas[jp] - alphas[j] - I * PI) * scale).sinh();
        }
    }
    for (j, &site) in index.gamma().iter().enumerate() {
        v *= site_factor(alphas[j], site, betas, weights, scale);
    }
    v
}

/// `(1/l!) sum_sigma sgn(sigma) f(alpha_sigma(1), ..., alpha_sigma(l))`.
pub fn skew<F>(alphas: &[Complex64], f: F) -> Complex64
where
    F: Fn(&[Complex64]) -> Complex64,
{
    let mut buf = alphas.to_vec();
    skew_permutations(alphas.len())
        .iter()
        .map(|(p, s)| {
            for (j, &k) in p.iter().enumerate() {
                buf[j] = alphas[k];
            }
            f(&buf) * *s
        })
        .sum()
}

fn check_lengths(index: &MultiIndex, alphas: &[Complex64], betas: &[Complex64], params: &ModelParams) -> Result<()> {
    if index.l() != alphas.len() || index.n() != betas.len() || betas.len() != params.n() {
        return Err(Error::InvalidParameter(format!(
            "multi-index {index} needs {} integration variables and {} sites",
            index.l(),
            params.n()
        )));
    }
    Ok(())
}

/// `g_L^{(flavor)}(alphas; betas)`.
pub fn g_weight(
    flavor: Flavor,
    index: &MultiIndex,
    alphas: &[Complex64],
    betas: &[Complex64],
    params: &ModelParams,
) -> Result<Complex64> {
    check_lengths(index, alphas, betas, params)?;
    Ok(WeightFunction::plain(flavor, index.clone()).eval(alphas, betas, params))
}

/// `w_L^{(flavor)} = Skew(g_L^{(flavor)})`.
pub fn w_weight(
    flavor: Flavor,
    index: &MultiIndex,
    alphas: &[Complex64],
    betas: &[Complex64],
    params: &ModelParams,
) -> Result<Complex64> {
    check_lengths(index, alphas, betas, params)?;
    Ok(WeightFunction::skew(flavor, index.clone()).eval(alphas, betas, params))
}

/// Position of a value relative to an open interval `(lower, upper)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub converges: bool,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub margin_lower: f64,
    pub margin_upper: f64,
    pub diagnostic: Option<String>,
}

impl ConvergenceReport {
    fn new(value: f64, lower: f64, upper: f64, what: &str) -> Self {
        let (ml, mu) = (value - lower, upper - value);
        let diagnostic = if lower >= upper {
            Some(format!("{what}: region ({lower:.6}, {upper:.6}) is empty"))
        } else if ml <= 0.0 || mu <= 0.0 {
            Some(format!("{what}: {value:.6} outside ({lower:.6}, {upper:.6})"))
        } else {
            None
        };
        Self {
            converges: diagnostic.is_none(),
            value,
            lower,
            upper,
            margin_lower: ml,
            margin_upper: mu,
            diagnostic,
        }
    }

    fn require(self) -> Result<Self> {
        match &self.diagnostic {
            None => Ok(self),
            Some(d) => Err(Error::Divergent(d.clone())),
        }
    }
}

/// Region `2 pi^2 (l-1-sum Lambda)/(rho lambda) < mu + shift_mu < 2 pi/lambda - 2 pi^2 (l-1-sum Lambda)/(rho lambda)`.
pub fn convergence_check(params: &ModelParams, shift_mu: f64) -> ConvergenceReport {
    let (rho, lambda) = (params.rho(), params.lambda());
    let bound = 2.0 * PI * PI * (params.l() as f64 - 1.0 - params.weight_sum()) / (rho * lambda);
    ConvergenceReport::new(params.mu() + shift_mu, bound, 2.0 * PI / lambda - bound, "mu")
}

/// Region `|Re x| < pi/rho + pi/lambda - 2 pi^2 (l-1-Lambda)/(rho lambda)` of the one-site integral.
pub fn f_convergence_check(l: usize, weight: f64, x_re: f64, periods: Periods) -> ConvergenceReport {
    let b = f_decay_base(l, weight, periods);
    ConvergenceReport::new(x_re, -b, b, "Re x")
}

fn f_decay_base(l: usize, weight: f64, periods: Periods) -> f64 {
    let (rho, lambda) = (periods.omega1(), periods.omega2());
    PI / rho + PI / lambda - 2.0 * PI * PI * (l as f64 - 1.0 - weight) / (rho * lambda)
}

/// Decay rates of the pairing integrand in one variable towards `+inf` and `-inf`.
fn pairing_decay_rates(params: &ModelParams) -> (f64, f64) {
    let (rho, lambda) = (params.rho(), params.lambda());
    let n = params.n() as f64;
    let phi_rate: f64 = params
        .weights()
        .iter()
        .map(|w| PI * (rho + lambda + 2.0 * w * PI) / (rho * lambda))
        .sum();
    let s = PI / rho + PI / lambda;
    let pairs = (params.l() as f64 - 1.0).max(0.0) * 2.0 * PI * PI / (rho * lambda);
    let up = phi_rate - params.mu() - (n - 2.0) * s - pairs;
    let down = phi_rate + params.mu() - n * s - pairs;
    (up, down)
}

fn pairing_grid(params: &ModelParams, betas: &[Complex64], quad: &QuadratureSpec) -> Result<Grid> {
    let (up, down) = pairing_decay_rates(params);
    if up <= 0.0 || down <= 0.0 {
        return Err(Error::Divergent(format!(
            "integrand decay rates ({up:.4}, {down:.4}) are not positive"
        )));
    }
    let lo = betas.iter().map(|b| b.re).fold(f64::INFINITY, f64::min);
    let hi = betas.iter().map(|b| b.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Grid::covering(
        lo - quad.truncation_radius(down),
        hi + quad.truncation_radius(up),
        quad,
    ))
}

fn pairing_measure(
    ctx: &KernelContext,
    grid: &Grid,
    params: &ModelParams,
    betas: &[Complex64],
) -> Result<LatticeMeasure> {
    let mu = params.mu();
    let weights = params.weights();
    let single = tabulate(grid.nodes().collect(), |x| {
        Ok(ctx.phi_total(c(x), betas, weights)? * (mu * x).exp())
    })?;
    let pair = if params.l() >= 2 {
        tabulate(grid.differences().collect(), |d| ctx.psi(c(d)))?
    } else {
        Vec::new()
    };
    Ok(LatticeMeasure { single, pair })
}

fn check_weight(w: &WeightFunction, params: &ModelParams) -> Result<()> {
    if w.index.n() != params.n() || w.index.l() != params.l() {
        return Err(Error::InvalidParameter(format!(
            "weight function {} does not belong to Z_{}^{}",
            w.index,
            params.l(),
            params.n()
        )));
    }
    Ok(())
}

fn pair_matrix(
    rows: &[WeightFunction],
    cols: &[WeightFunction],
    params: &ModelParams,
    betas: &[Complex64],
    quad: &QuadratureSpec,
) -> Result<(CMatrix, DMatrix<f64>, Vec<Vec<bool>>)> {
    quad.validate()?;
    for w in rows.iter().chain(cols) {
        check_weight(w, params)?;
    }
    let l = params.l();
    if l > quad.max_dimension {
        return Err(Error::DimensionTooLarge {
            dim: l,
            max: quad.max_dimension,
        });
    }
    let ctx = KernelContext::from_params(params)?;
    let grid = if l == 0 {
        Grid {
            start: 0.0,
            step: 1.0,
            len: 1,
        }
    } else {
        pairing_grid(params, betas, quad)?
    };
    let measure = if l == 0 {
        LatticeMeasure {
            single: Vec::new(),
            pair: Vec::new(),
        }
    } else {
        pairing_measure(&ctx, &grid, params, betas)?
    };
    let rows = rows
        .iter()
        .map(|w| w.lattice(&grid, betas, params))
        .collect::<Result<Vec<_>>>()?;
    let cols = cols
        .iter()
        .map(|w| w.lattice(&grid, betas, params))
        .collect::<Result<Vec<_>>>()?;
    integrate_matrix(&grid, l, &measure, &rows, &cols, quad)
}

fn real_betas(params: &ModelParams) -> Vec<Complex64> {
    params.betas().iter().map(|&b| c(b)).collect()
}

/// `I(f, g)` over the real contour.
pub fn pairing_integral(
    f: &WeightFunction,
    g: &WeightFunction,
    params: &ModelParams,
    quad: &QuadratureSpec,
) -> Result<IntegralResult> {
    if params.l() > 0 {
        convergence_check(params, 0.0).require()?;
    }
    let (v, e, flags) = pair_matrix(
        std::slice::from_ref(f),
        std::slice::from_ref(g),
        params,
        &real_betas(params),
        quad,
    )?;
    Ok(IntegralResult {
        value: v[(0, 0)],
        error: e[(0, 0)],
        flagged: flags[0][0],
    })
}

/// Imaginary shift of one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaShift {
    PlusRho,
    MinusRho,
    PlusLambda,
    MinusLambda,
}

impl BetaShift {
    pub fn amount(self, params: &ModelParams) -> Complex64 {
        match self {
            BetaShift::PlusRho => I * params.rho(),
            BetaShift::MinusRho => -I * params.rho(),
            BetaShift::PlusLambda => I * params.lambda(),
            BetaShift::MinusLambda => -I * params.lambda(),
        }
    }
}

/// `I(f, g)` with `beta_site` moved by `shift` and the contour kept on the real line.
///
/// This is valid only when no pole crosses the contour: `f` is a plain `g_L` with
/// `l_site = 0`, `site` is the last one, and the shift is `+lambda i` for a `rho`-flavor
/// `f` (`+rho i` for a `lambda`-flavor `f`). Every other case needs a deformed contour.
pub fn pairing_integral_shifted_beta(
    f: &WeightFunction,
    g: &WeightFunction,
    params: &ModelParams,
    site: usize,
    shift: BetaShift,
    quad: &QuadratureSpec,
) -> Result<IntegralResult> {
    let n = params.n();
    let required = match f.flavor {
        Flavor::Rho => BetaShift::PlusLambda,
        Flavor::Lambda => BetaShift::PlusRho,
    };
    let refuse = |why: String| Err(Error::ContourDeformationRequired(why));
    if site + 1 != n {
        return refuse(format!("shift of site {site}; only the last site keeps the real contour"));
    }
    if shift != required {
        return refuse(format!("shift {shift:?} for a {:?}-flavor weight", f.flavor));
    }
    if f.kind != WeightKind::Plain || f.site_order() != (0..n).collect::<Vec<_>>().as_slice() {
        return refuse("the shifted pairing needs a plain, unpermuted weight".into());
    }
    if f.index.entries()[site] != 0 {
        return refuse(format!("l_{} = {} > 0", site + 1, f.index.entries()[site]));
    }
    if params.l() > 0 {
        convergence_check(params, 0.0).require()?;
    }
    let mut betas = real_betas(params);
    betas[site] += shift.amount(params);
    let (v, e, flags) = pair_matrix(std::slice::from_ref(f), std::slice::from_ref(g), params, &betas, quad)?;
    Ok(IntegralResult {
        value: v[(0, 0)],
        error: e[(0, 0)],
        flagged: flags[0][0],
    })
}

/// `Psi_l`: entries `I(w_L^{(rho)}, w_{L'}^{(lambda)})` in the lexicographic basis.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    pub basis: Vec<MultiIndex>,
    pub entries: CMatrix,
    pub errors: DMatrix<f64>,
    pub error_estimate: f64,
    pub flagged: bool,
    pub params: ModelParams,
    pub quad: QuadratureSpec,
}

impl FundamentalMatrix {
    /// `D_l = det Psi_l` with a first-order bound `sum |cofactor_ij| err_ij`.
    pub fn determinant(&self) -> (Complex64, f64) {
        let det = self.entries.determinant();
        let bound = match self.entries.clone().try_inverse() {
            Some(inv) => {
                let mut s = 0.0;
                for i in 0..self.entries.nrows() {
                    for j in 0..self.entries.ncols() {
                        s += (det * inv[(j, i)]).norm() * self.errors[(i, j)];
                    }
                }
                s
            }
            None => f64::INFINITY,
        };
        (det, bound)
    }
}

pub fn fundamental_matrix(params: &ModelParams, quad: &QuadratureSpec) -> Result<FundamentalMatrix> {
    if params.l() > 0 {
        convergence_check(params, 0.0).require()?;
    }
    let basis = enumerate(params.n(), params.l());
    let rows: Vec<_> = basis.iter().map(|b| WeightFunction::skew(Flavor::Rho, b.clone())).collect();
    let cols: Vec<_> = basis.iter().map(|b| WeightFunction::skew(Flavor::Lambda, b.clone())).collect();
    let (entries, errors, flags) = pair_matrix(&rows, &cols, params, &real_betas(params), quad)?;
    let error_estimate = errors.iter().copied().fold(0.0, f64::max);
    let flagged = flags.iter().flatten().any(|&f| f);
    Ok(FundamentalMatrix {
        basis,
        entries,
        errors,
        error_estimate,
        flagged,
        params: params.clone(),
        quad: *quad,
    })
}

/// `F_l^Lambda(x) = int e^{x sum alpha} prod varphi(alpha_j; Lambda) prod psi(alpha_j - alpha_j')
/// Skew(prod sh(pi/rho (alpha_j' - alpha_j - pi i))) prod sh(pi/lambda (alpha_j' - alpha_j - pi i))`.
pub fn f_integral(
    l: usize,
    weight: f64,
    x: Complex64,
    periods: Periods,
    quad: &QuadratureSpec,
) -> Result<IntegralResult> {
    quad.validate()?;
    if l == 0 {
        return Ok(IntegralResult {
            value: c(1.0),
            error: 0.0,
            flagged: false,
        });
    }
    if l > quad.max_dimension {
        return Err(Error::DimensionTooLarge {
            dim: l,
            max: quad.max_dimension,
        });
    }
    if !(weight < 0.0) {
        return Err(Error::InvalidParameter(format!("highest weight must be negative, got {weight}")));
    }
    let report = f_convergence_check(l, weight, x.re, periods).require()?;
    let ctx = KernelContext::new(periods)?;
    let grid = Grid::covering(
        -quad.truncation_radius(report.margin_lower),
        quad.truncation_radius(report.margin_upper),
        quad,
    );
    let single = tabulate(grid.nodes().collect(), |a| Ok(ctx.phi(c(a), c(weight))? * (x * a).exp()))?;
    let pair = if l >= 2 {
        tabulate(grid.differences().collect(), |d| ctx.psi(c(d)))?
    } else {
        Vec::new()
    };
    let measure = LatticeMeasure { single, pair };
    let sh_pairs = |period: f64, skew: bool| -> Result<LatticeWeight> {
        let pair = if l >= 2 {
            tabulate(grid.differences().collect(), |d| Ok(((c(d) - I * PI) * (PI / period)).sinh()))?
        } else {
            Vec::new()
        };
        Ok(LatticeWeight {
            pref: c(1.0),
            pair,
            sites: vec![vec![c(1.0); grid.len]],
            gamma: vec![0; l],
            skew,
        })
    };
    let rows = [sh_pairs(periods.omega1(), true)?];
    let cols = [sh_pairs(periods.omega2(), false)?];
    let (v, e, flags) = integrate_matrix(&grid, l, &measure, &rows, &cols, quad)?;
    Ok(IntegralResult {
        value: v[(0, 0)],
        error: e[(0, 0)],
        flagged: flags[0][0],
    })
}

/// Both sides of the exchange relation for sites `m`, `m+1` at fixed `alphas`:
/// `w_{L^(m)}(.., beta_{m+1}, beta_m, ..)` (highest weights relabelled with the sites)
/// and `sum_{L'} R_{m,m+1}(z_m/z_{m+1})_{L,L'} w_{L'}(.., beta_m, beta_{m+1}, ..)`,
/// indexed by the lexicographic basis.
pub fn exchange_relation(
    params: &ModelParams,
    m: usize,
    alphas: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = params.n();
    if m + 1 >= n {
        return Err(Error::InvalidParameter(format!("no site pair ({m}, {}) for n = {n}", m + 1)));
    }
    if alphas.len() != params.l() {
        return Err(Error::InvalidParameter(format!("{} alphas for l = {}", alphas.len(), params.l())));
    }
    let basis = enumerate(n, params.l());
    let betas = real_betas(params);
    let mut order: Vec<usize> = (0..n).collect();
    order.swap(m, m + 1);
    let values: Vec<Complex64> = basis
        .iter()
        .map(|b| WeightFunction::skew(Flavor::Rho, b.clone()).eval(alphas, &betas, params))
        .collect();
    let r = embedded_r_matrix(
        &basis,
        m,
        m + 1,
        params.weights(),
        c(params.z(m) / params.z(m + 1)),
        &params.q_rho()?,
    )?;
    let rhs = &r * nalgebra::DVector::from_vec(values);
    let lhs = basis
        .iter()
        .map(|b| {
            let swapped = b.permuted(&order);
            WeightFunction::skew(Flavor::Rho, swapped)
                .with_site_order(order.clone())
                .map(|w| w.eval(alphas, &betas, params))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((lhs, rhs.iter().copied().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn desk(n: usize, l: usize) -> ModelParams {
        ModelParams::desk(n, l).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn kernel_requires_large_periods() {
        assert!(KernelContext::new(Periods::new(1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn phi_is_even() {
        let ctx = KernelContext::from_params(&desk(1, 1)).unwrap();
        for x in [0.3, 1.7, -4.2] {
            let a = ctx.phi(c(x), c(-0.3)).unwrap();
            let b = ctx.phi(c(-x), c(-0.3)).unwrap();
            assert!(rel(a, b) < 1e-13);
        }
    }

    #[test]
    fn phi_decay_rate() {
        let ctx = KernelContext::from_params(&desk(1, 1)).unwrap();
        let (rho, lambda, w) = (2.0 * PI, 2.0 * PI, -0.3);
        let rate = PI * (rho + lambda + 2.0 * w * PI) / (rho * lambda);
        let a = ctx.phi(c(40.0), c(w)).unwrap().norm().ln();
        let b = ctx.phi(c(50.0), c(w)).unwrap().norm().ln();
        assert!(((a - b) / 10.0 - rate).abs() < 1e-6);
    }

    #[test]
    fn phi_near_lattice_names_factor() {
        let ctx = KernelContext::from_params(&desk(1, 1)).unwrap();
        // ix - Lambda pi = 0 at x = -i Lambda pi
        let err = ctx.phi(Complex64::new(0.0, -0.3 * PI), c(-0.3)).unwrap_err();
        assert!(matches!(err, Error::Kernel { .. }));
        assert!(err.to_string().contains("varphi"));
    }

    #[test]
    fn g_single_site() {
        let p = desk(1, 1);
        let a = Complex64::new(0.4, 0.1);
        let g = g_weight(Flavor::Rho, &MultiIndex::new(vec![1]), &[a], &[c(0.0)], &p).unwrap();
        let expect = (-(PI / p.rho()) * (a + I * (-0.3) * PI)).exp();
        assert!(rel(g, expect) < 1e-15);
        let g0 = g_weight(Flavor::Rho, &MultiIndex::new(vec![0]), &[], &[c(0.0)], &p).unwrap();
        assert_eq!(g0, c(1.0));
    }

    #[test]
    fn w_is_antisymmetric_and_reduces_to_g() {
        let p = desk(2, 2).with_periods(4.0 * PI, 4.0 * PI).unwrap();
        let betas = real_betas(&p);
        let idx = MultiIndex::new(vec![1, 1]);
        let (a1, a2) = (Complex64::new(0.3, 0.2), Complex64::new(-1.1, 0.0));
        let w12 = w_weight(Flavor::Rho, &idx, &[a1, a2], &betas, &p).unwrap();
        let w21 = w_weight(Flavor::Rho, &idx, &[a2, a1], &betas, &p).unwrap();
        assert!((w12 + w21).norm() < 1e-14 * w12.norm());
        let p1 = desk(2, 1);
        let idx1 = MultiIndex::new(vec![0, 1]);
        let w = w_weight(Flavor::Lambda, &idx1, &[a1], &real_betas(&p1), &p1).unwrap();
        let g = g_weight(Flavor::Lambda, &idx1, &[a1], &real_betas(&p1), &p1).unwrap();
        assert_eq!(w, g);
    }

    #[test]
    fn convergence_examples() {
        let p = desk(1, 1);
        let r = convergence_check(&p, 0.0);
        assert!(r.converges);
        assert!((r.lower - 0.15).abs() < 1e-12 && (r.upper - 0.85).abs() < 1e-12);
        assert!(!convergence_check(&p, 0.35).converges);
        let small = ModelParams::new(2.0, 2.0, 0.5, 2, vec![-0.3], vec![0.0]).unwrap();
        let r = convergence_check(&small, 0.0);
        assert!(!r.converges);
        assert!(r.diagnostic.unwrap().contains("empty"));
    }

    #[test]
    fn empty_pairing_is_one() {
        let p = desk(2, 0);
        let idx = MultiIndex::new(vec![0, 0]);
        let r = pairing_integral(
            &WeightFunction::skew(Flavor::Rho, idx.clone()),
            &WeightFunction::skew(Flavor::Lambda, idx),
            &p,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert_eq!(r.value, c(1.0));
        let d = fundamental_matrix(&desk(3, 0), &QuadratureSpec::default()).unwrap();
        assert_eq!(d.determinant().0, c(1.0));
    }

    #[test]
    fn shifted_pairing_refuses_deformation_cases() {
        let p = desk(2, 1);
        let q = QuadratureSpec::default();
        let f = WeightFunction::plain(Flavor::Rho, MultiIndex::new(vec![0, 1]));
        let g = WeightFunction::skew(Flavor::Lambda, MultiIndex::new(vec![1, 0]));
        let e = pairing_integral_shifted_beta(&f, &g, &p, 1, BetaShift::PlusLambda, &q).unwrap_err();
        assert!(matches!(e, Error::ContourDeformationRequired(_)));
        let f = WeightFunction::plain(Flavor::Rho, MultiIndex::new(vec![1, 0]));
        let e = pairing_integral_shifted_beta(&f, &g, &p, 1, BetaShift::MinusLambda, &q).unwrap_err();
        assert!(matches!(e, Error::ContourDeformationRequired(_)));
        let e = pairing_integral_shifted_beta(&f, &g, &p, 0, BetaShift::PlusLambda, &q).unwrap_err();
        assert!(matches!(e, Error::ContourDeformationRequired(_)));
    }

    #[test]
    fn exchange_relation_n2() {
        let p = ModelParams::new(2.0 * PI * 1.1, 2.0 * PI, 0.5, 1, vec![-0.3, -0.45], vec![0.2, -0.35]).unwrap();
        let (lhs, rhs) = exchange_relation(&p, 0, &[Complex64::new(0.37, 0.0)]).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            assert!(rel(*a, *b) < 1e-10);
        }
    }

    #[test]
    fn f_integral_trivial_and_region() {
        let per = Periods::new(2.0 * PI, 2.0 * PI).unwrap();
        let q = QuadratureSpec::default();
        assert_eq!(f_integral(0, -0.3, c(5.0), per, &q).unwrap().value, c(1.0));
        assert!(matches!(f_integral(1, -0.3, c(0.9), per, &q), Err(Error::Divergent(_))));
    }
}
