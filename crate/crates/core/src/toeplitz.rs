//! Berezin–Toeplitz quantization of the sphere through spin coherent states.
//!
//! At level `m` the Hilbert space is `C^{m+1}` (polynomials of degree `≤ m`
//! in the monomial basis) and the coherent state at `(t, φ)` has components
//! `c_k = √C(m,k) sin(θ/2)^k cos(θ/2)^{m−k} e^{ikφ}`. Operators are
//! `T(f) = (m+1) Σ_nodes w f c c*` on a product quadrature grid.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operator::HermitianMatrix;
use crate::par;
use crate::povm::FinitePovm;
use crate::sphere::{
    poisson_bracket, sup_norm, PartitionOfUnity, SphereFunction, SphereGrid, SpherePoint,
};

/// Quantization level, grid and tabulated coherent-state amplitudes.
#[derive(Clone, Debug)]
pub struct ToeplitzContext {
    m: usize,
    grid: SphereGrid,
    /// `amps[i][k] = |c_k|` on ring `i`.
    amps: Vec<Vec<f64>>,
    /// `(cos, sin)` of `2πr / n_phi`.
    twiddles: Vec<(f64, f64)>,
}

/// `ln C(m, k)` for `k = 0..=m`.
fn ln_binomials(m: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(m + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=m {
        acc += ((m - k + 1) as f64 / k as f64).ln();
        out.push(acc);
    }
    out
}

/// `|c_k|` at height `t`, computed in log space.
fn amplitudes(m: usize, t: f64, ln_binom: &[f64]) -> Vec<f64> {
    let s2 = ((1.0 - t) / 2.0).clamp(0.0, 1.0);
    let c2 = ((1.0 + t) / 2.0).clamp(0.0, 1.0);
    if s2 == 0.0 {
        return (0..=m).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
    }
    if c2 == 0.0 {
        return (0..=m).map(|k| if k == m { 1.0 } else { 0.0 }).collect();
    }
    let (ls, lc) = (0.5 * s2.ln(), 0.5 * c2.ln());
    (0..=m)
        .map(|k| (0.5 * ln_binom[k] + k as f64 * ls + (m - k) as f64 * lc).exp())
        .collect()
}

impl ToeplitzContext {
    /// Context on the default grid for level `m`.
    pub fn new(m: usize) -> Result<Self> {
        Self::with_grid(m, SphereGrid::for_level(m))
    }

    /// Context on an explicit grid; it must have `n_t ≥ m+1`, `n_phi ≥ 2m+2`.
    pub fn with_grid(m: usize, grid: SphereGrid) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("quantization level must be positive".into()));
        }
        let (need_t, need_phi) = (m + 1, 2 * m + 2);
        if grid.n_t() < need_t || grid.n_phi() < need_phi {
            return Err(Error::ContextUnderresolved {
                m,
                n_t: grid.n_t(),
                n_phi: grid.n_phi(),
                need_t,
                need_phi,
            });
        }
        let lb = ln_binomials(m);
        let amps = grid
            .t_nodes()
            .iter()
            .map(|&t| amplitudes(m, t, &lb))
            .collect();
        let n_phi = grid.n_phi();
        let twiddles = (0..n_phi)
            .map(|r| {
                let a = 2.0 * std::f64::consts::PI * r as f64 / n_phi as f64;
                (a.cos(), a.sin())
            })
            .collect();
        Ok(Self {
            m,
            grid,
            amps,
            twiddles,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// `m + 1`.
    pub fn hilbert_dim(&self) -> usize {
        self.m + 1
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    /// The normalized coherent state at an arbitrary point.
    pub fn coherent_state(&self, p: SpherePoint) -> Vec<Complex64> {
        amplitudes(self.m, p.t, &ln_binomials(self.m))
            .into_iter()
            .enumerate()
            .map(|(k, a)| Complex64::from_polar(a, k as f64 * p.phi))
            .collect()
    }

    /// Tabulated `|c_k|` on ring `i`.
    pub fn ring_amplitudes(&self, i: usize) -> &[f64] {
        &self.amps[i]
    }

    /// `F_i(n) = Σ_l f(t_i, φ_l) e^{inφ_l}` for `n = 0..=m`.
    fn ring_modes(&self, f: &SphereFunction, i: usize) -> Result<Vec<Complex64>> {
        let n_phi = self.grid.n_phi();
        let vals = (0..n_phi)
            .map(|l| f.eval_checked(self.grid.point(i, l)))
            .collect::<Result<Vec<f64>>>()?;
        Ok((0..=self.m)
            .map(|n| {
                let (mut re, mut im) = (0.0, 0.0);
                for (l, v) in vals.iter().enumerate() {
                    let (c, s) = self.twiddles[(n * l) % n_phi];
                    re += v * c;
                    im += v * s;
                }
                Complex64::new(re, im)
            })
            .collect())
    }

    /// `T(f) = (m+1) Σ w f c c*`.
    ///
    /// Rings are transformed in parallel and summed in ring order, so the
    /// result does not depend on the number of workers.
    pub fn toeplitz(&self, f: &SphereFunction) -> Result<HermitianMatrix> {
        let d = self.hilbert_dim();
        let modes = par::map(self.grid.n_t(), |i| self.ring_modes(f, i))?;
        let mut t = DMatrix::<Complex64>::zeros(d, d);
        for (i, fi) in modes.iter().enumerate() {
            let w = (self.m + 1) as f64 * self.grid.ring_weight(i);
            let a = &self.amps[i];
            for k in 0..d {
                let wak = w * a[k];
                if wak == 0.0 {
                    continue;
                }
                for j in k..d {
                    t[(j, k)] += fi[j - k] * (wak * a[j]);
                }
            }
        }
        for k in 0..d {
            t[(k, k)].im = 0.0;
            for j in k + 1..d {
                t[(k, j)] = t[(j, k)].conj();
            }
        }
        Ok(HermitianMatrix::from_hermitian_unchecked(t))
    }

    /// The POVM `{T(f_j)}` of a partition of unity.
    pub fn quantize_partition(&self, p: &PartitionOfUnity) -> Result<FinitePovm> {
        let elements = p
            .functions()
            .iter()
            .map(|f| self.toeplitz(f))
            .collect::<Result<Vec<_>>>()?;
        FinitePovm::new(elements)
    }

    /// Toeplitz operator of an indicator. Convergence in the grid is only
    /// first order because the integrand jumps across the boundary.
    pub fn region_operator(
        &self,
        indicator: impl Fn(SpherePoint) -> bool + Send + Sync + 'static,
    ) -> Result<HermitianMatrix> {
        self.toeplitz(&SphereFunction::indicator(indicator))
    }

    /// `‖i m [T(f), T(g)] − T({f, g})‖`.
    pub fn correspondence_defect(&self, f: &SphereFunction, g: &SphereFunction) -> Result<f64> {
        let bracket = poisson_bracket(f, g)?;
        let lhs = self
            .toeplitz(f)?
            .commutator_i(&self.toeplitz(g)?)?
            .scale(self.m as f64);
        lhs.sub(&self.toeplitz(&bracket)?)?.op_norm()
    }

    /// `‖T(f²) − T(f)²‖`.
    pub fn sharpness_defect(&self, f: &SphereFunction) -> Result<f64> {
        let tf = self.toeplitz(f)?;
        self.toeplitz(&f.square())?.sub(&tf.square())?.op_norm()
    }

    /// `|‖T(f)‖ − sup |f||`.
    pub fn norm_defect(&self, f: &SphereFunction) -> Result<f64> {
        Ok((self.toeplitz(f)?.op_norm()? - sup_norm(f, &self.grid)?).abs())
    }
}
