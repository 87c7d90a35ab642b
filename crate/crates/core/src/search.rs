//! Lower-bound searches for the magnitude of noise `𝒩(A)` and the
//! non-commutativity `ν_q(A)` over the cube `[-1, 1]^N`.
//!
//! Both maxima are hard in general, so every result is a value actually
//! attained at the returned witness: a certified lower bound on the true
//! supremum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::operator::HermitianMatrix;
use crate::par;
use crate::povm::{FinitePovm, OutcomeVector};

/// Knobs for the cube searches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchBudget {
    /// Enumerate all `2^(N-1)` sign classes of vertices for `𝒩` up to this N.
    pub noise_exhaustive_max_n: usize,
    /// Enumerate all pairs of vertex sign classes for `ν_q` up to this N.
    pub commutator_exhaustive_max_n: usize,
    /// Number of random starts above the exhaustive cutoffs.
    pub starts: usize,
    /// Iterations per start (ascent steps or flip sweeps).
    pub iterations: usize,
    /// Step size of the projected-gradient ascent for `𝒩`.
    pub step: f64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            noise_exhaustive_max_n: 14,
            commutator_exhaustive_max_n: 8,
            starts: 64,
            iterations: 200,
            step: 0.1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NoiseEstimate {
    pub value: f64,
    pub witness: OutcomeVector,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoncommutativityEstimate {
    pub value: f64,
    pub witness_x: OutcomeVector,
    pub witness_y: OutcomeVector,
}

fn noise_at(povm: &FinitePovm, x: &OutcomeVector) -> Result<f64> {
    povm.noise_operator(x)?.op_norm()
}

/// Lower bound on `𝒩(A) = max_x ‖Δ_A(x)‖`.
pub fn noise_magnitude(povm: &FinitePovm, budget: &SearchBudget) -> Result<NoiseEstimate> {
    noise_magnitude_with(povm, budget, &[])
}

/// As [`noise_magnitude`], additionally scoring caller-supplied candidates.
pub fn noise_magnitude_with(
    povm: &FinitePovm,
    budget: &SearchBudget,
    extra: &[OutcomeVector],
) -> Result<NoiseEstimate> {
    let n = povm.len();
    let mut candidates: Vec<OutcomeVector> = Vec::new();
    let exhaustive = n <= budget.noise_exhaustive_max_n;
    if exhaustive {
        // Δ(−x) = Δ(x): fix the first sign.
        let classes = 1u64 << (n - 1);
        candidates.extend((0..classes).map(|b| OutcomeVector::vertex(n, b << 1)));
    }
    candidates.extend((0..n).map(|j| OutcomeVector::basis(n, j)));
    candidates.extend(extra.iter().cloned());

    let (best_idx, best_val) = par::argmax(candidates.len(), |i| noise_at(povm, &candidates[i]))?;
    let mut best = NoiseEstimate {
        value: best_val,
        witness: candidates[best_idx].clone(),
    };

    if !exhaustive {
        let ascents = par::map(budget.starts, |s| {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            rng.set_stream(s as u64);
            let x0: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
            gradient_ascent(povm, OutcomeVector::clamped(x0), budget)
        })?;
        for a in ascents {
            if a.value > best.value {
                best = a;
            }
        }
    }
    Ok(best)
}

/// Projected gradient ascent on `⟨v, Δ(x) v⟩` with `v` the running top eigenvector.
fn gradient_ascent(
    povm: &FinitePovm,
    start: OutcomeVector,
    budget: &SearchBudget,
) -> Result<NoiseEstimate> {
    let n = povm.len();
    let mut x = start;
    let mut best = NoiseEstimate {
        value: f64::NEG_INFINITY,
        witness: x.clone(),
    };
    for _ in 0..budget.iterations {
        let delta = povm.noise_operator(&x)?;
        let dec = delta.spectral_decomp()?;
        let top = dec.eigenvalues.len() - 1;
        let value = dec.eigenvalues[top];
        if value > best.value {
            best = NoiseEstimate {
                value,
                witness: x.clone(),
            };
        }
        let v = dec.eigenvectors.column(top);
        let ax = povm.contract(&x)?;
        let axv = ax.matrix() * v;
        let grad: Vec<f64> = (0..n)
            .map(|j| {
                let ajv = povm.element(j).matrix() * v;
                let expect = v.dotc(&ajv).re;
                let cross = axv.dotc(&ajv).re;
                2.0 * x.as_slice()[j] * expect - 2.0 * cross
            })
            .collect();
        let next: Vec<f64> = x
            .as_slice()
            .iter()
            .zip(&grad)
            .map(|(xi, g)| xi + budget.step * g)
            .collect();
        let next = OutcomeVector::clamped(next);
        if next == x {
            break;
        }
        x = next;
    }
    // The recorded value must be the exact norm at the witness.
    best.value = noise_at(povm, &best.witness)?;
    Ok(best)
}

/// Precomputed `i[A_j, A_k]` for `j < k`, so that
/// `i[A(x), A(y)] = Σ_{j<k} (x_j y_k − x_k y_j) · i[A_j, A_k]`.
struct CommutatorTable {
    dim: usize,
    pairs: Vec<(usize, usize, HermitianMatrix)>,
}

impl CommutatorTable {
    fn new(povm: &FinitePovm) -> Result<Self> {
        let n = povm.len();
        let mut pairs = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                let c = povm.element(j).commutator_i(povm.element(k))?;
                if c.max_abs() > 0.0 {
                    pairs.push((j, k, c));
                }
            }
        }
        Ok(Self {
            dim: povm.dim(),
            pairs,
        })
    }

    fn value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if self.pairs.is_empty() {
            return Ok(0.0);
        }
        let mut acc = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (j, k, c) in &self.pairs {
            let w = x[*j] * y[*k] - x[*k] * y[*j];
            if w != 0.0 {
                acc += c.matrix().scale(w);
            }
        }
        HermitianMatrix::from_hermitian_unchecked(acc).op_norm()
    }
}

/// Lower bound on `ν_q(A) = max_{x,y} ‖[A(x), A(y)]‖`, attained at cube vertices.
pub fn noncommutativity(
    povm: &FinitePovm,
    budget: &SearchBudget,
) -> Result<NoncommutativityEstimate> {
    let n = povm.len();
    let table = CommutatorTable::new(povm)?;
    let zero = NoncommutativityEstimate {
        value: 0.0,
        witness_x: OutcomeVector::ones(n),
        witness_y: OutcomeVector::ones(n),
    };
    if n < 2 || table.pairs.is_empty() {
        return Ok(zero);
    }

    if n <= budget.commutator_exhaustive_max_n {
        // Sign flips of x or y and swapping x, y leave the norm unchanged.
        let classes = 1usize << (n - 1);
        let pairs: Vec<(usize, usize)> = (0..classes)
            .flat_map(|a| (a + 1..classes).map(move |b| (a, b)))
            .collect();
        let vertices: Vec<OutcomeVector> = (0..classes)
            .map(|b| OutcomeVector::vertex(n, (b as u64) << 1))
            .collect();
        let (i, value) = par::argmax(pairs.len(), |i| {
            let (a, b) = pairs[i];
            table.value(vertices[a].as_slice(), vertices[b].as_slice())
        })?;
        let (a, b) = pairs[i];
        return Ok(NoncommutativityEstimate {
            value,
            witness_x: vertices[a].clone(),
            witness_y: vertices[b].clone(),
        });
    }

    let results = par::map(budget.starts, |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(s as u64);
        let mut x: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let mut y: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        let mut value = table.value(&x, &y)?;
        for _ in 0..budget.iterations {
            let mut best: Option<(usize, f64)> = None;
            for idx in 0..2 * n {
                let (v, i) = if idx < n {
                    (&mut x, idx)
                } else {
                    (&mut y, idx - n)
                };
                v[i] = -v[i];
                let cand = table.value(&x, &y)?;
                let (v, i) = if idx < n {
                    (&mut x, idx)
                } else {
                    (&mut y, idx - n)
                };
                v[i] = -v[i];
                if cand > value && best.is_none_or(|(_, b)| cand > b) {
                    best = Some((idx, cand));
                }
            }
            match best {
                Some((idx, cand)) => {
                    if idx < n {
                        x[idx] = -x[idx];
                    } else {
                        y[idx - n] = -y[idx - n];
                    }
                    value = cand;
                }
                None => break,
            }
        }
        Ok(NoncommutativityEstimate {
            value,
            witness_x: OutcomeVector::clamped(x),
            witness_y: OutcomeVector::clamped(y),
        })
    })?;
    let mut best = zero;
    for r in results {
        if r.value > best.value {
            best = r;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sigma_x() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn sigma_z() -> HermitianMatrix {
        HermitianMatrix::from_real_diagonal(&[1.0, -1.0])
    }

    fn qubit_povm() -> FinitePovm {
        let id = HermitianMatrix::identity(2);
        let a1 = id.add(&sigma_x().scale(0.5)).unwrap().scale(1.0 / 3.0);
        let a2 = id.add(&sigma_z().scale(0.5)).unwrap().scale(1.0 / 3.0);
        let a3 = id.sub(&a1).unwrap().sub(&a2).unwrap();
        FinitePovm::new(vec![a1, a2, a3]).unwrap()
    }

    #[test]
    fn trivial_povm_has_full_noise_and_no_commutator() {
        let p = FinitePovm::trivial(3, 4);
        let b = SearchBudget::default();
        let noise = noise_magnitude(&p, &b).unwrap();
        assert_eq!(noise.value, 1.0);
        assert_eq!(noncommutativity(&p, &b).unwrap().value, 0.0);
    }

    #[test]
    fn single_element_povm_is_noiseless() {
        let p = FinitePovm::new(vec![HermitianMatrix::identity(2)]).unwrap();
        let b = SearchBudget::default();
        assert_eq!(noise_magnitude(&p, &b).unwrap().value, 0.0);
        assert_eq!(noncommutativity(&p, &b).unwrap().value, 0.0);
    }

    #[test]
    fn qubit_povm_matches_full_enumeration() {
        let p = qubit_povm();
        let mut oracle = 0.0f64;
        for bx in 0..8u64 {
            for by in 0..8u64 {
                let x = OutcomeVector::vertex(3, bx);
                let y = OutcomeVector::vertex(3, by);
                let c = p
                    .contract(&x)
                    .unwrap()
                    .comm_norm(&p.contract(&y).unwrap())
                    .unwrap();
                oracle = oracle.max(c);
            }
        }
        let est = noncommutativity(&p, &SearchBudget::default()).unwrap();
        assert!(
            (est.value - oracle).abs() < 1e-12,
            "{} vs {}",
            est.value,
            oracle
        );
        let direct = p
            .contract(&est.witness_x)
            .unwrap()
            .comm_norm(&p.contract(&est.witness_y).unwrap())
            .unwrap();
        assert!((direct - est.value).abs() < 1e-12);
    }

    #[test]
    fn local_search_reaches_exhaustive_value_on_small_case() {
        let p = qubit_povm();
        let exhaustive = noncommutativity(&p, &SearchBudget::default()).unwrap();
        let local = SearchBudget {
            commutator_exhaustive_max_n: 0,
            noise_exhaustive_max_n: 0,
            starts: 16,
            ..SearchBudget::default()
        };
        let est = noncommutativity(&p, &local).unwrap();
        assert!((est.value - exhaustive.value).abs() < 1e-12);
        let noise = noise_magnitude(&p, &local).unwrap();
        let exact = noise_magnitude(&p, &SearchBudget::default()).unwrap();
        assert!(noise.value > 0.0 && noise.value <= 1.0 + 1e-12);
        assert!(exact.value > 0.0);
    }

    #[test]
    fn witness_value_is_exact_norm() {
        let p = FinitePovm::random(3, 5, 17).unwrap();
        let local = SearchBudget {
            noise_exhaustive_max_n: 2,
            starts: 4,
            iterations: 50,
            ..SearchBudget::default()
        };
        let est = noise_magnitude(&p, &local).unwrap();
        let direct = p.noise_operator(&est.witness).unwrap().op_norm().unwrap();
        assert_eq!(est.value, direct);
        assert!(est.value <= 1.0 + 1e-12);
    }

    #[test]
    fn projector_povm_is_sharp_and_commutative() {
        let p = FinitePovm::new(vec![
            HermitianMatrix::from_real_diagonal(&[1.0, 0.0, 0.0]),
            HermitianMatrix::from_real_diagonal(&[0.0, 1.0, 1.0]),
        ])
        .unwrap();
        let b = SearchBudget::default();
        assert_eq!(noise_magnitude(&p, &b).unwrap().value, 0.0);
        assert_eq!(noncommutativity(&p, &b).unwrap().value, 0.0);
    }
}
