//! Markov kernels, smearing of POVMs, commutative unsmearing and the
//! systematic-noise bracket.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::HermitianMatrix;
use crate::povm::{FinitePovm, OutcomeVector};
use crate::search::{self, NoiseEstimate, NoncommutativityEstimate, SearchBudget};

/// Row-sum tolerance for kernels.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Relative commutativity tolerance used when none is given.
pub const COMMUTATIVITY_REL_TOL: f64 = 1e-8;

/// Stochastic matrix `gamma[w][j] = γ_w({j})` from `L` source outcomes to `N`
/// target outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelJson", into = "KernelJson")]
pub struct MarkovKernel {
    rows: Vec<Vec<f64>>,
    target: usize,
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "N")]
    n: usize,
    rows: Vec<Vec<f64>>,
}

impl From<MarkovKernel> for KernelJson {
    fn from(k: MarkovKernel) -> Self {
        KernelJson {
            l: k.rows.len(),
            n: k.target,
            rows: k.rows,
        }
    }
}

impl TryFrom<KernelJson> for MarkovKernel {
    type Error = Error;

    fn try_from(j: KernelJson) -> Result<Self> {
        if j.rows.len() != j.l {
            return Err(Error::InvalidKernel(format!(
                "L = {} but {} rows given",
                j.l,
                j.rows.len()
            )));
        }
        let k = MarkovKernel::new(j.rows)?;
        if k.target != j.n {
            return Err(Error::InvalidKernel(format!(
                "N = {} but rows have length {}",
                j.n, k.target
            )));
        }
        Ok(k)
    }
}

impl MarkovKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let target = rows
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidKernel("no rows".into()))?;
        if target == 0 {
            return Err(Error::InvalidKernel("empty rows".into()));
        }
        for (w, row) in rows.iter().enumerate() {
            if row.len() != target {
                return Err(Error::InvalidKernel(format!(
                    "row {w} has length {}, expected {target}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidKernel(format!(
                    "entry ({w}, {j}) = {} is not a probability",
                    row[j]
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidKernel(format!("row {w} sums to {sum}")));
            }
        }
        Ok(Self { rows, target })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|w| (0..n).map(|j| if w == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { rows, target: n }
    }

    /// Rows drawn uniformly from the simplex, deterministic per seed.
    pub fn random(l: usize, n: usize, seed: u64) -> Result<Self> {
        if l == 0 || n == 0 {
            return Err(Error::InvalidKernel(format!(
                "sizes must be positive, got {l}x{n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..l)
            .map(|_| {
                let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                normalize_row(e)
            })
            .collect();
        Self::new(rows)
    }

    /// Source size `L`.
    pub fn source_size(&self) -> usize {
        self.rows.len()
    }

    /// Target size `N`.
    pub fn target_size(&self) -> usize {
        self.target
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Kernel of smearing by `self` and then by `next` (the matrix product).
    pub fn compose(&self, next: &MarkovKernel) -> Result<Self> {
        if next.source_size() != self.target {
            return Err(Error::DimensionMismatch {
                expected: self.target,
                got: next.source_size(),
            });
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let r = (0..next.target)
                    .map(|i| row.iter().zip(&next.rows).map(|(a, nr)| a * nr[i]).sum())
                    .collect();
                normalize_row(r)
            })
            .collect();
        Self::new(rows)
    }

    /// `(Γx)(w) = Σ_j γ_w({j}) x_j`.
    pub fn pushforward(&self, x: &OutcomeVector) -> Result<OutcomeVector> {
        if x.len() != self.target {
            return Err(Error::DimensionMismatch {
                expected: self.target,
                got: x.len(),
            });
        }
        let gx = self
            .rows
            .iter()
            .map(|row| row.iter().zip(x.as_slice()).map(|(g, v)| g * v).sum())
            .collect();
        Ok(OutcomeVector::clamped(gx))
    }
}

/// Rescales a nonnegative row so that it sums to one exactly up to rounding.
fn normalize_row(mut row: Vec<f64>) -> Vec<f64> {
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= s);
    row
}

/// `A_j = Σ_w γ_w({j}) B_w`.
pub fn smear(b: &FinitePovm, k: &MarkovKernel) -> Result<FinitePovm> {
    if k.source_size() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            got: k.source_size(),
        });
    }
    let d = b.dim();
    let elements = (0..k.target_size())
        .map(|j| {
            let mut acc = DMatrix::<Complex64>::zeros(d, d);
            for (w, bw) in b.elements().iter().enumerate() {
                let g = k.rows()[w][j];
                if g != 0.0 {
                    acc += bw.matrix().scale(g);
                }
            }
            HermitianMatrix::new(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    FinitePovm::new(elements)
}

/// A projection-valued POVM and a kernel that smears it back to the input.
#[derive(Clone, Debug)]
pub struct Unsmearing {
    pub sharp: FinitePovm,
    pub kernel: MarkovKernel,
    /// `max_ij |smear(P, k)_j − A_j|` entrywise.
    pub residual: f64,
}

/// Default commutativity tolerance, `1e-8 · max_j ‖A_j‖`.
pub fn default_commutativity_tol(a: &FinitePovm) -> Result<f64> {
    let mut scale = 0.0f64;
    for e in a.elements() {
        scale = scale.max(e.op_norm()?);
    }
    Ok(COMMUTATIVITY_REL_TOL * scale.max(f64::MIN_POSITIVE))
}

/// Joint spectral resolution of a commutative POVM.
///
/// One projector per joint eigenspace; the kernel row of eigenspace `w` holds
/// the joint eigenvalues of `A_1, …, A_N` there.
pub fn unsmear_commutative(a: &FinitePovm, tol: Option<f64>) -> Result<Unsmearing> {
    const ATTEMPTS: u64 = 3;
    let tol = match tol {
        Some(t) => t,
        None => default_commutativity_tol(a)?,
    };
    let max_commutator = a.max_pairwise_commutator()?;
    if max_commutator > tol {
        return Err(Error::NotCommutative {
            max_commutator,
            tol,
        });
    }
    let mut last_residual = f64::INFINITY;
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        rng.set_stream(attempt);
        let r: Vec<f64> = (0..a.len()).map(|_| rng.random_range(0.5..1.5)).collect();
        let combo = a.contract(&OutcomeVector::clamped(r.iter().map(|v| v / 1.5).collect()))?;
        let decomp = combo.spectral_decomp()?;
        let d = a.dim();

        let mut reps: Vec<Vec<f64>> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        let mut sums: Vec<Vec<f64>> = Vec::new();
        for k in 0..d {
            let v = decomp.eigenvectors.column(k);
            let e: Vec<f64> = a
                .elements()
                .iter()
                .map(|aj| v.dotc(&(aj.matrix() * v)).re)
                .collect();
            let hit = reps
                .iter()
                .position(|rep| rep.iter().zip(&e).all(|(p, q)| (p - q).abs() <= 10.0 * tol));
            match hit {
                Some(c) => {
                    members[c].push(k);
                    sums[c].iter_mut().zip(&e).for_each(|(s, v)| *s += v);
                }
                None => {
                    members.push(vec![k]);
                    sums.push(e.clone());
                    reps.push(e);
                }
            }
        }

        let projectors = members
            .iter()
            .map(|ks| {
                let mut p = DMatrix::<Complex64>::zeros(d, d);
                for &k in ks {
                    let v = decomp.eigenvectors.column(k);
                    p += v * v.adjoint();
                }
                HermitianMatrix::new(p)
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = members
            .iter()
            .zip(&sums)
            .map(|(ks, s)| {
                let row = s.iter().map(|v| (v / ks.len() as f64).max(0.0)).collect();
                normalize_row(row)
            })
            .collect();
        let kernel = MarkovKernel::new(rows)?;
        let sharp = FinitePovm::new(projectors)?;
        let back = smear(&sharp, &kernel)?;
        let mut residual = 0.0f64;
        for (x, y) in back.elements().iter().zip(a.elements()) {
            residual = residual.max(x.max_abs_diff(y)?);
        }
        if residual <= d as f64 * tol {
            return Ok(Unsmearing {
                sharp,
                kernel,
                residual,
            });
        }
        last_residual = residual;
    }
    Err(Error::JointDiagonalization(format!(
        "round-trip residual {last_residual:e} exceeds {:e} after {ATTEMPTS} attempts",
        a.dim() as f64 * tol
    )))
}

/// Two-sided bound `lower ≤ 𝒩_s(A) ≤ upper`.
#[derive(Clone, Debug, Serialize)]
pub struct NoiseBracket {
    pub lower: f64,
    pub upper: f64,
    /// True when `upper` comes from a sharp unsmearing.
    pub commutative: bool,
    pub nu_q: NoncommutativityEstimate,
    /// The noise search on `A` itself, present when `A` is not commutative.
    pub noise: Option<NoiseEstimate>,
}

/// `lower = ½ν_q(A)`; `upper = 0` for commutative `A` (sharp unsmearing),
/// else the noise of `A` itself (identity kernel).
pub fn systematic_noise_bracket(a: &FinitePovm, budget: &SearchBudget) -> Result<NoiseBracket> {
    let nu_q = search::noncommutativity(a, budget)?;
    let lower = 0.5 * nu_q.value;
    match unsmear_commutative(a, None) {
        Ok(u) => {
            // Δ_P vanishes identically for a projection-valued P.
            debug_assert!(u.sharp.is_projection_valued(1e-8));
            Ok(NoiseBracket {
                lower,
                upper: 0.0,
                commutative: true,
                nu_q,
                noise: None,
            })
        }
        Err(Error::NotCommutative { .. }) | Err(Error::JointDiagonalization(_)) => {
            let extra = [nu_q.witness_x.clone(), nu_q.witness_y.clone()];
            let noise = search::noise_magnitude_with(a, budget, &extra)?;
            Ok(NoiseBracket {
                lower,
                upper: noise.value,
                commutative: false,
                nu_q,
                noise: Some(noise),
            })
        }
        Err(e) => Err(e),
    }
}
