//! Uniform-lattice quadrature for the `l`-dimensional integrals over `R^l`.
//!
//! Every integrand handled here factorizes into one-variable factors and factors
//! depending on a difference `alpha_j - alpha_j'`. On a uniform grid those are
//! tables indexed by a node or by a node difference, so each kernel is evaluated
//! `O(N)` times regardless of the dimension. The trapezoidal rule is spectrally
//! accurate for these analytic, exponentially decaying integrands; the grid with
//! twice the step (the even nodes) gives the error estimate.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantum_algebra::CMatrix;

/// Discretization and truncation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Nodes per unit length of the coarse grid; the reported value uses twice as many.
    pub nodes_per_unit: usize,
    /// Decades the decay envelope must drop at the truncation points.
    pub truncation_margin: f64,
    /// Relative error above which a result is flagged.
    pub tolerance: f64,
    pub max_dimension: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_unit: 5,
            truncation_margin: 14.0,
            tolerance: 1e-7,
            max_dimension: 2,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_per_unit == 0 {
            return Err(Error::InvalidParameter("nodes_per_unit must be positive".into()));
        }
        if !(self.truncation_margin > 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::InvalidParameter(
                "truncation margin and tolerance must be positive".into(),
            ));
        }
        if self.max_dimension > 3 {
            return Err(Error::DimensionTooLarge {
                dim: self.max_dimension,
                max: 3,
            });
        }
        Ok(())
    }

    /// Distance from the envelope peak to the truncation point for decay rate `rate`.
    pub fn truncation_radius(&self, rate: f64) -> f64 {
        self.truncation_margin * std::f64::consts::LN_10 / rate
    }
}

/// Value of an integral with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralResult {
    pub value: Complex64,
    pub error: f64,
    /// Set when `error` exceeds the requested relative tolerance.
    pub flagged: bool,
}

/// Fine grid `start + k step`, `k = 0..len`; `len` is odd so both ends lie on the coarse grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Grid {
    pub fn covering(lo: f64, hi: f64, spec: &QuadratureSpec) -> Self {
        let step = 0.5 / spec.nodes_per_unit as f64;
        let mut intervals = ((hi - lo) / step).ceil().max(2.0) as usize;
        if intervals % 2 == 1 {
            intervals += 1;
        }
        Self {
            start: lo,
            step,
            len: intervals + 1,
        }
    }

    pub fn node(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(|k| self.node(k))
    }

    /// Values `alpha_j' - alpha_j = d step` for `d = -(len-1)..=len-1`, stored at `d + len - 1`.
    pub fn differences(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.len as i64;
        (-(n - 1)..n).map(|d| d as f64 * self.step)
    }
}

/// Evaluate `f` at every point in parallel, keeping the input order.
pub(crate) fn tabulate<F>(points: Vec<f64>, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(f64) -> Result<Complex64> + Sync + Send,
{
    points.into_par_iter().map(f).collect()
}

/// Symmetric part of the integrand: `prod_j single[k_j] prod_{j<j'} pair[k_j - k_j']`.
pub(crate) struct LatticeMeasure {
    pub single: Vec<Complex64>,
    pub pair: Vec<Complex64>,
}

/// `pref prod_{j<j'} pair[k_j' - k_j] prod_j sites[gamma[j]][k_j]`, skew-symmetrized if `skew`.
#[derive(Clone)]
pub(crate) struct LatticeWeight {
    pub pref: Complex64,
    pub pair: Vec<Complex64>,
    pub sites: Vec<Vec<Complex64>>,
    pub gamma: Vec<usize>,
    pub skew: bool,
}

/// Permutations of `0..l` with their signs divided by `l!`.
fn signed_permutations(l: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; l], &mut perms);
    let fact: f64 = (1..=l).map(|k| k as f64).product();
    perms
        .into_iter()
        .map(|p| {
            let inversions = (0..l)
                .flat_map(|i| (i + 1..l).map(move |j| (i, j)))
                .filter(|&(i, j)| p[i] > p[j])
                .count();
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign / fact)
        })
        .collect()
}

/// Public view of the permutation table used by `Skew`.
pub fn skew_permutations(l: usize) -> Vec<(Vec<usize>, f64)> {
    signed_permutations(l)
}

impl LatticeWeight {
    fn eval_plain(&self, idx: &[usize], order: &[usize], offset: usize) -> Complex64 {
        let mut v = self.pref;
        for j in 0..idx.len() {
            let kj = idx[order[j]];
            v *= self.sites[self.gamma[j]][kj];
            for jp in j + 1..idx.len() {
                let kjp = idx[order[jp]];
                v *= self.pair[kjp + offset - kj];
            }
        }
        v
    }

    fn eval(&self, idx: &[usize], perms: &[(Vec<usize>, f64)], identity: &[usize], offset: usize) -> Complex64 {
        if self.skew {
            perms
                .iter()
                .map(|(p, s)| self.eval_plain(idx, p, offset) * *s)
                .sum()
        } else {
            self.eval_plain(idx, identity, offset)
        }
    }
}

struct Partial {
    fine: Vec<Complex64>,
    coarse: Vec<Complex64>,
    magnitude: f64,
}

impl Partial {
    fn zeros(n: usize) -> Self {
        Self {
            fine: vec![Complex64::new(0.0, 0.0); n],
            coarse: vec![Complex64::new(0.0, 0.0); n],
            magnitude: 0.0,
        }
    }

    fn add(&mut self, other: &Partial) {
        for (a, b) in self.fine.iter_mut().zip(&other.fine) {
            *a += b;
        }
        for (a, b) in self.coarse.iter_mut().zip(&other.coarse) {
            *a += b;
        }
        self.magnitude += other.magnitude;
    }
}

/// Matrix of integrals `int measure * rows[a] * cols[b]` over the `dim`-fold grid.
pub(crate) fn integrate_matrix(
    grid: &Grid,
    dim: usize,
    measure: &LatticeMeasure,
    rows: &[LatticeWeight],
    cols: &[LatticeWeight],
    spec: &QuadratureSpec,
) -> Result<(CMatrix, DMatrix<f64>, Vec<Vec<bool>>)> {
    if dim > spec.max_dimension {
        return Err(Error::DimensionTooLarge {
            dim,
            max: spec.max_dimension,
        });
    }
    let (nr, nc) = (rows.len(), cols.len());
    let perms = signed_permutations(dim);
    let identity: Vec<usize> = (0..dim).collect();
    let offset = grid.len - 1;

    let accumulate = |idx: &[usize], acc: &mut Partial, fvals: &mut [Complex64], gvals: &mut [Complex64]| {
        let mut m = Complex64::new(1.0, 0.0);
        for j in 0..dim {
            m *= measure.single[idx[j]];
            for jp in j + 1..dim {
                m *= measure.pair[idx[j] + offset - idx[jp]];
            }
        }
        if m == Complex64::new(0.0, 0.0) {
            return;
        }
        for (a, w) in rows.iter().enumerate() {
            fvals[a] = w.eval(idx, &perms, &identity, offset);
        }
        for (b, w) in cols.iter().enumerate() {
            gvals[b] = w.eval(idx, &perms, &identity, offset);
        }
        let coarse = idx.iter().all(|k| k % 2 == 0);
        for a in 0..nr {
            let mf = m * fvals[a];
            for b in 0..nc {
                let term = mf * gvals[b];
                acc.fine[a * nc + b] += term;
                acc.magnitude += term.norm();
                if coarse {
                    acc.coarse[a * nc + b] += term;
                }
            }
        }
    };

    let total = if dim == 0 {
        let mut acc = Partial::zeros(nr * nc);
        let mut f = vec![Complex64::new(0.0, 0.0); nr];
        let mut g = vec![Complex64::new(0.0, 0.0); nc];
        accumulate(&[], &mut acc, &mut f, &mut g);
        acc
    } else {
        let partials: Vec<Partial> = (0..grid.len)
            .into_par_iter()
            .map(|k0| {
                let mut acc = Partial::zeros(nr * nc);
                let mut f = vec![Complex64::new(0.0, 0.0); nr];
                let mut g = vec![Complex64::new(0.0, 0.0); nc];
                let mut idx = vec![0usize; dim];
                idx[0] = k0;
                // odometer over the remaining indices
                loop {
                    accumulate(&idx, &mut acc, &mut f, &mut g);
                    let mut pos = dim;
                    loop {
                        if pos == 1 {
                            return acc;
                        }
                        pos -= 1;
                        idx[pos] += 1;
                        if idx[pos] < grid.len {
                            break;
                        }
                        idx[pos] = 0;
                    }
                }
            })
            .collect();
        let mut total = Partial::zeros(nr * nc);
        for p in &partials {
            total.add(p);
        }
        total
    };

    let (hf, hc) = if dim == 0 {
        (1.0, 1.0)
    } else {
        (grid.step.powi(dim as i32), (2.0 * grid.step).powi(dim as i32))
    };
    let mut values = CMatrix::zeros(nr, nc);
    let mut errors = DMatrix::<f64>::zeros(nr, nc);
    let mut flags = vec![vec![false; nc]; nr];
    let floor = 1e-14 * total.magnitude * hf;
    for a in 0..nr {
        for b in 0..nc {
            let fine = total.fine[a * nc + b] * hf;
            let coarse = total.coarse[a * nc + b] * hc;
            let err = if dim == 0 { 0.0 } else { (fine - coarse).norm() + floor };
            values[(a, b)] = fine;
            errors[(a, b)] = err;
            flags[a][b] = !fine.is_finite() || err > spec.tolerance * fine.norm();
        }
    }
    Ok((values, errors, flags))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian_measure(grid: &Grid) -> LatticeMeasure {
        LatticeMeasure {
            single: grid.nodes().map(|x| Complex64::new((-x * x).exp(), 0.0)).collect(),
            pair: grid.differences().map(|_| Complex64::new(1.0, 0.0)).collect(),
        }
    }

    fn unit_weight(grid: &Grid, dim: usize) -> LatticeWeight {
        LatticeWeight {
            pref: Complex64::new(1.0, 0.0),
            pair: grid.differences().map(|_| Complex64::new(1.0, 0.0)).collect(),
            sites: vec![vec![Complex64::new(1.0, 0.0); grid.len]],
            gamma: vec![0; dim],
            skew: false,
        }
    }

    #[test]
    fn grid_is_odd_and_covers() {
        let g = Grid::covering(-1.0, 1.05, &QuadratureSpec::default());
        assert_eq!(g.len % 2, 1);
        assert!(g.node(g.len - 1) >= 1.05);
    }

    #[test]
    fn gaussian_integrals() {
        let spec = QuadratureSpec::default();
        let grid = Grid::covering(-7.0, 7.0, &spec);
        let m = gaussian_measure(&grid);
        for dim in 0..=2 {
            let w = unit_weight(&grid, dim);
            let (v, e, flags) = integrate_matrix(&grid, dim, &m, &[w.clone()], &[w], &spec).unwrap();
            let exact = std::f64::consts::PI.powf(dim as f64 / 2.0);
            assert!((v[(0, 0)].re - exact).abs() < 1e-12, "dim {dim}");
            assert!(e[(0, 0)] < 1e-10);
            assert!(!flags[0][0]);
        }
    }

    #[test]
    fn skew_of_symmetric_vanishes() {
        let spec = QuadratureSpec::default();
        let grid = Grid::covering(-6.0, 6.0, &spec);
        let m = gaussian_measure(&grid);
        let mut w = unit_weight(&grid, 2);
        w.skew = true;
        let (v, _, _) = integrate_matrix(&grid, 2, &m, &[w.clone()], &[unit_weight(&grid, 2)], &spec).unwrap();
        assert!(v[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn permutation_signs() {
        let p = signed_permutations(3);
        assert_eq!(p.len(), 6);
        let total: f64 = p.iter().map(|(_, s)| s).sum();
        assert!(total.abs() < 1e-15);
    }

    #[test]
    fn dimension_limit() {
        let spec = QuadratureSpec::default();
        let grid = Grid::covering(-1.0, 1.0, &spec);
        let m = gaussian_measure(&grid);
        let w = unit_weight(&grid, 3);
        assert!(matches!(
            integrate_matrix(&grid, 3, &m, &[w.clone()], &[w], &spec),
            Err(Error::DimensionTooLarge { dim: 3, max: 2 })
        ));
    }
}
