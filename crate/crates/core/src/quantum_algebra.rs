//! `U_q(sl2)` evaluation Verma modules on truncated weight blocks, the R-matrix,
//! and the qKZ shift operators `K_m`.
//!
//! Single site, basis `v^(k)`:
//!
//! ```text
//! e1 v^(k) = [2 Lambda - k + 1] v^(k-1)    f1 v^(k) = [k + 1] v^(k+1)
//! q^{h1} v^(k) = q^{2(Lambda - k)} v^(k)   e0 = z f1, f0 = z^-1 e1, q^{h0} = q^{-h1}
//! ```
//!
//! Two sites: the weight-`k` block has basis `v^(a) (x) v^(k-a)`, `a = 0..=k`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multi_index::{count_compositions, enumerate, position, MultiIndex};
use crate::params::{ModelParams, QPhase, GENERIC_GUARD};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Chevalley generators of `U_q(sl2^)`; `QH1`, `QH0` stand for `q^{h1}`, `q^{h0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    E1,
    F1,
    QH1,
    E0,
    F0,
    QH0,
}

impl Generator {
    pub const ALL: [Generator; 6] = [
        Generator::E1,
        Generator::F1,
        Generator::QH1,
        Generator::E0,
        Generator::F0,
        Generator::QH0,
    ];

    /// Change of the `f`-degree produced by the generator.
    pub fn degree_shift(self) -> i64 {
        match self {
            Generator::E1 | Generator::F0 => -1,
            Generator::F1 | Generator::E0 => 1,
            Generator::QH1 | Generator::QH0 => 0,
        }
    }
}

/// `Delta` or `Delta^op = sigma . Delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coproduct {
    Standard,
    Opposite,
}

/// A single-site Verma evaluation module `V_Lambda(z)`.
#[derive(Debug, Clone, Copy)]
pub struct VermaSite {
    pub weight: Complex64,
    pub z: Complex64,
}

/// Result of a generator on a basis vector: `coeff * v^(index)`; the zero vector is
/// reported as `coeff = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VermaTerm {
    pub index: usize,
    pub coeff: Complex64,
}

/// Elementary single-site operators appearing in the coproducts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SiteOp {
    Id,
    E,
    F,
    K,
    KInv,
    E0,
    F0,
}

/// `gen` applied to `v^(k)` of `V_Lambda(z)`.
pub fn verma_action(
    gen: Generator,
    k: usize,
    weight: Complex64,
    z: Complex64,
    q: &QPhase,
) -> Result<VermaTerm> {
    let site = VermaSite { weight, z };
    let op = match gen {
        Generator::E1 => SiteOp::E,
        Generator::F1 => SiteOp::F,
        Generator::QH1 => SiteOp::K,
        Generator::E0 => SiteOp::E0,
        Generator::F0 => SiteOp::F0,
        Generator::QH0 => SiteOp::KInv,
    };
    let (index, coeff) = site_op(op, site, k, q)?;
    Ok(match index {
        Some(index) => VermaTerm { index, coeff },
        None => VermaTerm { index: 0, coeff: ZERO },
    })
}

fn site_op(op: SiteOp, site: VermaSite, k: usize, q: &QPhase) -> Result<(Option<usize>, Complex64)> {
    let kf = k as f64;
    let lowering = |scale: Complex64| -> Result<(Option<usize>, Complex64)> {
        if k == 0 {
            Ok((None, ZERO))
        } else {
            Ok((Some(k - 1), scale * q.q_integer(2.0 * site.weight - kf + 1.0)?))
        }
    };
    match op {
        SiteOp::Id => Ok((Some(k), ONE)),
        SiteOp::E => lowering(ONE),
        SiteOp::F0 => lowering(site.z.inv()),
        SiteOp::F => Ok((Some(k + 1), q.q_integer(c(kf + 1.0))?)),
        SiteOp::E0 => Ok((Some(k + 1), site.z * q.q_integer(c(kf + 1.0))?)),
        SiteOp::K => Ok((Some(k), q.pow(2.0 * (site.weight - kf)))),
        SiteOp::KInv => Ok((Some(k), q.pow(-2.0 * (site.weight - kf)))),
    }
}

/// `Delta(gen)` as a sum of `first (x) second`.
fn coproduct_terms(gen: Generator) -> &'static [(SiteOp, SiteOp)] {
    use SiteOp::*;
    match gen {
        Generator::E1 => &[(E, Id), (K, E)],
        Generator::F1 => &[(F, KInv), (Id, F)],
        Generator::QH1 => &[(K, K)],
        Generator::E0 => &[(E0, Id), (KInv, E0)],
        Generator::F0 => &[(F0, K), (Id, F0)],
        Generator::QH0 => &[(KInv, KInv)],
    }
}

/// Tensor product `V_{Lambda1}(z1) (x) V_{Lambda2}(z2)`.
#[derive(Debug, Clone, Copy)]
pub struct TwoSite {
    pub first: VermaSite,
    pub second: VermaSite,
    pub q: QPhase,
}

/// Vector in `V1 (x) V2` truncated to degrees `<= max_degree` on each factor;
/// component `(j, k)` is stored at `j * (max_degree + 1) + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorVector {
    pub max_degree: usize,
    pub coeffs: Vec<Complex64>,
}

impl TensorVector {
    pub fn zeros(max_degree: usize) -> Self {
        Self {
            max_degree,
            coeffs: vec![ZERO; (max_degree + 1) * (max_degree + 1)],
        }
    }

    pub fn basis(max_degree: usize, j: usize, k: usize) -> Self {
        let mut v = Self::zeros(max_degree);
        *v.get_mut(j, k) = ONE;
        v
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.coeffs[j * (self.max_degree + 1) + k]
    }

    pub fn get_mut(&mut self, j: usize, k: usize) -> &mut Complex64 {
        &mut self.coeffs[j * (self.max_degree + 1) + k]
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl TwoSite {
    pub fn new(weight1: Complex64, weight2: Complex64, z1: Complex64, z2: Complex64, q: QPhase) -> Self {
        Self {
            first: VermaSite { weight: weight1, z: z1 },
            second: VermaSite { weight: weight2, z: z2 },
            q,
        }
    }

    /// Image of `v^(j) (x) v^(k)` under the coproduct, as `(j', k', coeff)` terms.
    fn act_on_basis(
        &self,
        gen: Generator,
        coproduct: Coproduct,
        j: usize,
        k: usize,
    ) -> Result<Vec<(usize, usize, Complex64)>> {
        let mut out = Vec::with_capacity(2);
        for &(a, b) in coproduct_terms(gen) {
            let (op1, op2) = match coproduct {
                Coproduct::Standard => (a, b),
                Coproduct::Opposite => (b, a),
            };
            let (j2, c1) = site_op(op1, self.first, j, &self.q)?;
            let (k2, c2) = site_op(op2, self.second, k, &self.q)?;
            if let (Some(j2), Some(k2)) = (j2, k2) {
                out.push((j2, k2, c1 * c2));
            }
        }
        Ok(out)
    }

    /// Coproduct action on a truncated tensor vector. A nonzero component pushed
    /// beyond `max_degree` is an error.
    pub fn coproduct_action(
        &self,
        gen: Generator,
        coproduct: Coproduct,
        x: &TensorVector,
    ) -> Result<TensorVector> {
        let d = x.max_degree;
        let mut out = TensorVector::zeros(d);
        for j in 0..=d {
            for k in 0..=d {
                let xc = x.get(j, k);
                if xc == ZERO {
                    continue;
                }
                for (j2, k2, coeff) in self.act_on_basis(gen, coproduct, j, k)? {
                    let val = coeff * xc;
                    if j2 > d || k2 > d {
                        if val != ZERO {
                            return Err(Error::TruncationOverflow { max_degree: d });
                        }
                        continue;
                    }
                    *out.get_mut(j2, k2) += val;
                }
            }
        }
        Ok(out)
    }

    /// Matrix of the coproduct of `gen` from weight block `from` to block
    /// `from + gen.degree_shift()`.
    pub fn block_map(&self, gen: Generator, coproduct: Coproduct, from: usize) -> Result<CMatrix> {
        let to = from as i64 + gen.degree_shift();
        if to < 0 {
            return Ok(CMatrix::zeros(0, from + 1));
        }
        let to = to as usize;
        let mut m = CMatrix::zeros(to + 1, from + 1);
        for a in 0..=from {
            for (j2, k2, coeff) in self.act_on_basis(gen, coproduct, a, from - a)? {
                debug_assert_eq!(j2 + k2, to);
                m[(j2, a)] += coeff;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
fn embed_block(v: &[Complex64], block: usize, max_degree: usize) -> TensorVector {
    let mut out = TensorVector::zeros(max_degree);
    for (a, &val) in v.iter().enumerate() {
        *out.get_mut(a, block - a) = val;
    }
    out
}

/// Highest weight vector of weight `Lambda1 + Lambda2 - j` in the block `j`, with the
/// coefficient of `v^(j) (x) v^(0)` equal to one. Returned in the block basis.
pub fn singular_vector(weight1: Complex64, weight2: Complex64, j: usize, q: &QPhase) -> Result<Vec<Complex64>> {
    // Delta(e1) u = 0 is bidiagonal:
    // c_a [2L1 - a + 1] + c_{a-1} q^{2(L1 - a + 1)} [2L2 - j + a] = 0
    let mut coeffs = vec![ZERO; j + 1];
    coeffs[j] = ONE;
    for a in (1..=j).rev() {
        let af = a as f64;
        let top = q.q_integer(2.0 * weight1 - af + 1.0)?;
        let bottom = q.pow(2.0 * (weight1 - af + 1.0)) * q.q_integer(2.0 * weight2 - j as f64 + af)?;
        if top.norm() < GENERIC_GUARD || bottom.norm() < GENERIC_GUARD {
            return Err(Error::Degenerate(format!(
                "kernel of Delta(e1) on block {j} is not one-dimensional"
            )));
        }
        coeffs[a - 1] = -coeffs[a] * top / bottom;
    }
    Ok(coeffs)
}

/// Block-`l` matrix of `Delta(f1)^{l-j} u_j`, one column per `j = 0..=l`.
fn highest_weight_basis(weight1: Complex64, weight2: Complex64, l: usize, q: &QPhase) -> Result<CMatrix> {
    let pair = TwoSite::new(weight1, weight2, ONE, ONE, *q);
    let lowering: Vec<CMatrix> = (0..l)
        .map(|k| pair.block_map(Generator::F1, Coproduct::Standard, k))
        .collect::<Result<_>>()?;
    let mut basis = CMatrix::zeros(l + 1, l + 1);
    for j in 0..=l {
        let mut v = CMatrix::from_column_slice(j + 1, 1, &singular_vector(weight1, weight2, j, q)?);
        for f in &lowering[j..l] {
            v = f * v;
        }
        basis.set_column(j, &v.column(0));
    }
    Ok(basis)
}

fn invert(m: &CMatrix, what: &str) -> Result<CMatrix> {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd.singular_values.min();
    if !(min > GENERIC_GUARD * max) {
        return Err(Error::Degenerate(format!("{what} is singular (condition {:.3e})", max / min)));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate(format!("{what} is singular")))
}

/// All projectors `Pi_0 .. Pi_l` onto the irreducible components on block `l`.
pub fn projectors(weight1: Complex64, weight2: Complex64, l: usize, q: &QPhase) -> Result<Vec<CMatrix>> {
    let basis = highest_weight_basis(weight1, weight2, l, q)?;
    let inverse = invert(&basis, "highest weight basis")?;
    Ok((0..=l)
        .map(|j| basis.column(j) * inverse.row(j))
        .collect())
}

/// The projector `Pi_j` on block `l`.
pub fn projector(weight1: Complex64, weight2: Complex64, j: usize, l: usize, q: &QPhase) -> Result<CMatrix> {
    if j > l {
        return Err(Error::InvalidParameter(format!("component {j} exceeds block {l}")));
    }
    Ok(projectors(weight1, weight2, l, q)?.swap_remove(j))
}

/// `R(0)` on block `l`: a diagonal phase times the terminating series in
/// `q^{-h} e (x) q^{h} f`.
pub fn r_matrix_at_zero(weight1: Complex64, weight2: Complex64, l: usize, q: &QPhase) -> Result<CMatrix> {
    let mut x = CMatrix::zeros(l + 1, l + 1);
    for a in 1..=l {
        let b = l - a;
        let (af, bf) = (a as f64, b as f64);
        let e = q.q_integer(2.0 * weight1 - af + 1.0)? * q.pow(-2.0 * (weight1 - af + 1.0));
        let f = q.q_integer(c(bf + 1.0))? * q.pow(2.0 * (weight2 - bf - 1.0));
        x[(a - 1, a)] = e * f;
    }
    let one_minus_q2 = ONE - q.pow_real(2.0);
    let mut series = CMatrix::identity(l + 1, l + 1);
    let mut power = CMatrix::identity(l + 1, l + 1);
    let mut denom = ONE;
    for k in 1..=l {
        power = &power * &x;
        denom *= ONE - q.pow_real(2.0 * k as f64);
        if denom.norm() < GENERIC_GUARD {
            return Err(Error::VanishingDenominator(format!("(q^2; q^2)_{k}")));
        }
        let coef = q.pow_real(k as f64) * one_minus_q2.powi(2 * k as i32) / denom;
        series += &power * coef;
    }
    let diag = CMatrix::from_fn(l + 1, l + 1, |i, j| {
        if i == j {
            let (af, bf) = (i as f64, (l - i) as f64);
            q.pow(2.0 * weight1 * weight2 - 2.0 * (weight1 - af) * (weight2 - bf))
        } else {
            ZERO
        }
    });
    Ok(diag * series)
}

/// The R-matrix `R_{V1,V2}(z)` on block `l`, normalized on `v^(0) (x) v^(0)`.
pub fn r_matrix(weight1: Complex64, weight2: Complex64, zratio: Complex64, q: &QPhase, l: usize) -> Result<CMatrix> {
    let r0 = r_matrix_at_zero(weight1, weight2, l, q)?;
    let pis = projectors(weight1, weight2, l, q)?;
    let total = weight1 + weight2;
    let mut scalar = ONE;
    let mut sum = CMatrix::zeros(l + 1, l + 1);
    for (j, pi) in pis.iter().enumerate() {
        if j > 0 {
            let i = (j - 1) as f64;
            let num = ONE - q.pow(-2.0 * (total - i)) * zratio;
            let den = ONE - q.pow(2.0 * (total - i)) * zratio;
            if den.norm() < GENERIC_GUARD {
                return Err(Error::RMatrixPole { j: j - 1 });
            }
            scalar *= num / den;
        }
        sum += pi * scalar;
    }
    Ok(r0 * sum)
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// The R-matrix on block `l` obtained by solving `R Delta(x) = Delta^op(x) R` for
/// `x in {e1, f1, e0, f0}` level by level from `R = 1` on block 0.
pub fn r_matrix_oracle(
    weight1: Complex64,
    weight2: Complex64,
    z1: Complex64,
    z2: Complex64,
    q: &QPhase,
    l: usize,
) -> Result<CMatrix> {
    let pair = TwoSite::new(weight1, weight2, z1, z2, *q);
    let mut prev = CMatrix::identity(1, 1);
    for k in 1..=l {
        let d = k + 1;
        let mut rows: Vec<CMatrix> = Vec::new();
        let mut rhs: Vec<CMatrix> = Vec::new();
        for gen in [Generator::E1, Generator::F0] {
            // Delta^op(x) R_k = R_{k-1} Delta(x)   (block k -> k-1)
            let a = pair.block_map(gen, Coproduct::Opposite, k)?;
            let b = pair.block_map(gen, Coproduct::Standard, k)?;
            rows.push(kron(&CMatrix::identity(d, d), &a));
            rhs.push(vectorize(&(&prev * b)));
        }
        for gen in [Generator::F1, Generator::E0] {
            // R_k Delta(x) = Delta^op(x) R_{k-1}   (block k-1 -> k)
            let a = pair.block_map(gen, Coproduct::Standard, k - 1)?;
            let b = pair.block_map(gen, Coproduct::Opposite, k - 1)?;
            rows.push(kron(&a.transpose(), &CMatrix::identity(d, d)));
            rhs.push(vectorize(&(b * &prev)));
        }
        let system = stack(&rows);
        let target = stack(&rhs);
        let svd = system.clone().svd(true, true);
        let max = svd.singular_values.max();
        let min = svd.singular_values.min();
        if !(min > 1e-10 * max) {
            return Err(Error::Degenerate(format!(
                "intertwining system on block {k} has no unique solution"
            )));
        }
        let sol = svd
            .solve(&target, 0.0)
            .map_err(|e| Error::Degenerate(e.to_string()))?;
        let resid = (&system * &sol - &target).norm();
        if resid > 1e-8 * target.norm().max(1.0) {
            return Err(Error::Degenerate(format!(
                "intertwining system on block {k} is inconsistent (residual {resid:.3e})"
            )));
        }
        prev = CMatrix::from_column_slice(d, d, sol.as_slice());
    }
    Ok(prev)
}

fn vectorize(m: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(m.len(), 1, m.as_slice())
}

fn stack(blocks: &[CMatrix]) -> CMatrix {
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(b);
        r += b.nrows();
    }
    out
}

/// `R_{a,b}(zratio)` acting on sites `a` (first factor) and `b` of `W_l`.
pub(crate) fn embedded_r_matrix(
    basis: &[MultiIndex],
    a: usize,
    b: usize,
    weights: &[f64],
    zratio: Complex64,
    q: &QPhase,
) -> Result<CMatrix> {
    let dim = basis.len();
    let mut out = CMatrix::zeros(dim, dim);
    let mut blocks: Vec<Option<CMatrix>> = Vec::new();
    for (col, idx) in basis.iter().enumerate() {
        let e = idx.entries();
        let s = e[a] + e[b];
        if blocks.len() <= s {
            blocks.resize(s + 1, None);
        }
        if blocks[s].is_none() {
            blocks[s] = Some(r_matrix(c(weights[a]), c(weights[b]), zratio, q, s)?);
        }
        let r = blocks[s].as_ref().expect("block computed");
        for jout in 0..=s {
            let mut target = e.to_vec();
            target[a] = jout;
            target[b] = s - jout;
            let row = position(basis, &MultiIndex::new(target)).expect("target in basis");
            out[(row, col)] += r[(jout, e[a])];
        }
    }
    Ok(out)
}

/// Matrix of `K_m` on `W_l` in the lexicographic basis (`m` counted from 0):
/// `R_{m,m-1}(p z_m/z_{m-1}) .. R_{m,0}(p z_m/z_0) r^{2Lambda_m - H_m} R_{m,n-1}(z_m/z_{n-1}) .. R_{m,m+1}(z_m/z_{m+1})`.
pub fn k_operator(m: usize, params: &ModelParams) -> Result<CMatrix> {
    let n = params.n();
    if m >= n {
        return Err(Error::InvalidParameter(format!("site {m} out of range for n = {n}")));
    }
    let l = params.l();
    let q = params.q_rho()?;
    let basis = enumerate(n, l);
    let weights = params.weights();
    let p = params.p();
    let mut k = CMatrix::identity(basis.len(), basis.len());
    for other in (0..m).rev() {
        let zr = p * (params.z(m) / params.z(other));
        k *= embedded_r_matrix(&basis, m, other, weights, zr, &q)?;
    }
    let phase = -params.mu() * params.lambda();
    k *= CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        basis.len(),
        basis
            .iter()
            .map(|idx| Complex64::from_polar(1.0, phase * idx.entries()[m] as f64)),
    ));
    for other in (m + 1..n).rev() {
        let zr = c(params.z(m) / params.z(other));
        k *= embedded_r_matrix(&basis, m, other, weights, zr, &q)?;
    }
    Ok(k)
}

/// Closed form of `det K_m` on `W_l` at real spectral parameters.
pub fn det_k_closed(m: usize, params: &ModelParams) -> Result<Complex64> {
    let betas: Vec<Complex64> = params.betas().iter().map(|&b| c(b)).collect();
    det_k_closed_at(m, params, &betas)
}

/// Closed form of `det K_m` with explicit (possibly complex) spectral parameters:
///
/// ```text
/// e^{-mu lambda i C(n+l-1, n)} prod_{j<l} ( prod_{k<m} sh(pi/rho (b_m - b_k - lambda i + A)) / sh(.. - A)
///                                        prod_{k>m} sh(pi/rho (b_m - b_k + A)) / sh(.. - A) )^{C(n+l-j-2, n-1)}
/// A = (Lambda_m + Lambda_k - j) pi i
/// ```
pub fn det_k_closed_at(m: usize, params: &ModelParams, betas: &[Complex64]) -> Result<Complex64> {
    let n = params.n();
    let l = params.l() as i64;
    if m >= n || betas.len() != n {
        return Err(Error::InvalidParameter(format!("site {m} / {} betas for n = {n}", betas.len())));
    }
    let (rho, lambda) = (params.rho(), params.lambda());
    let w = params.weights();
    let scale = std::f64::consts::PI / rho;
    let shift = Complex64::new(0.0, -lambda);
    let count = count_compositions(l - 1, n as i64 + 1) as f64;
    let mut value = Complex64::from_polar(1.0, -params.mu() * lambda * count);
    for j in 0..l {
        let exponent = count_compositions(l - j - 1, n as i64);
        if exponent == 0 {
            continue;
        }
        let mut factor = ONE;
        for k in 0..n {
            if k == m {
                continue;
            }
            let a = Complex64::new(0.0, (w[m] + w[k] - j as f64) * std::f64::consts::PI);
            let base = if k < m { betas[m] - betas[k] + shift } else { betas[m] - betas[k] };
            let num = ((base + a) * scale).sinh();
            let den = ((base - a) * scale).sinh();
            if den.norm() < GENERIC_GUARD {
                return Err(Error::VanishingDenominator(format!("sh factor for sites ({m}, {k}), j = {j}")));
            }
            factor *= num / den;
        }
        value *= factor.powu(exponent as u32);
    }
    Ok(value)
}
