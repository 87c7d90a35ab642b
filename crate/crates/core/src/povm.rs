//! Finite POVMs on `{1, …, N}`: contractions, the noise operator, the
//! Janssens residual and the Naimark dilation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{max_abs_diff, HermitianMatrix};

/// Eigenvalues in `[-PSD_CLAMP, 0)` count as zero during validation.
pub const PSD_CLAMP: f64 = 1e-10;
/// Entrywise tolerance on `Σ A_j = id`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// A POVM on a finite outcome set: PSD elements summing to the identity.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PovmJson", into = "PovmJson")]
pub struct FinitePovm {
    dim: usize,
    elements: Vec<HermitianMatrix>,
}

/// A point of the cube `[-1, 1]^N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OutcomeVector(Vec<f64>);

impl OutcomeVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        for (index, &value) in x.iter().enumerate() {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::OutsideCube { index, value });
            }
        }
        Ok(Self(x))
    }

    /// Projects each component onto `[-1, 1]`.
    pub fn clamped(x: Vec<f64>) -> Self {
        Self(x.into_iter().map(|v| v.clamp(-1.0, 1.0)).collect())
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn basis(n: usize, j: usize) -> Self {
        let mut x = vec![0.0; n];
        x[j] = 1.0;
        Self(x)
    }

    /// Vertex of the cube whose bit `i` of `bits` selects `-1` for coordinate `i`.
    pub fn vertex(n: usize, bits: u64) -> Self {
        Self(
            (0..n)
                .map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Compact text form, e.g. `+1;-1;0.25`.
    pub fn to_compact(&self) -> String {
        self.0
            .iter()
            .map(|v| match *v {
                1.0 => "+1".to_string(),
                -1.0 => "-1".to_string(),
                v => format!("{v}"),
            })
            .collect::<Vec<_>>()
            .join(";")
    }
}

impl TryFrom<Vec<f64>> for OutcomeVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OutcomeVector> for Vec<f64> {
    fn from(v: OutcomeVector) -> Self {
        v.0
    }
}

impl FinitePovm {
    /// Validates positivity and normalization.
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let povm = Self::new_unchecked(elements)?;
        povm.validate()?;
        Ok(povm)
    }

    /// Checks only that the dimensions agree.
    pub fn new_unchecked(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let dim = first.dim();
        for e in &elements {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.dim(),
                });
            }
        }
        Ok(Self { dim, elements })
    }

    /// The trivial POVM `A_j = id / N`.
    pub fn trivial(dim: usize, n: usize) -> Self {
        let e = HermitianMatrix::identity(dim).scale(1.0 / n as f64);
        Self {
            dim,
            elements: vec![e; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (j, a) in self.elements.iter().enumerate() {
            let min = a.min_eigenvalue()?;
            if min < -PSD_CLAMP {
                return Err(Error::InvalidPovm(format!(
                    "element {j} has eigenvalue {min:e}"
                )));
            }
        }
        let dev = self.normalization_defect();
        if dev > NORMALIZATION_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements sum to identity only within {dev:e}"
            )));
        }
        Ok(())
    }

    /// Entrywise distance of `Σ A_j` from the identity.
    pub fn normalization_defect(&self) -> f64 {
        let sum = self.sum();
        max_abs_diff(&sum, &DMatrix::identity(self.dim, self.dim))
    }

    fn sum(&self) -> DMatrix<Complex64> {
        self.elements
            .iter()
            .fold(DMatrix::zeros(self.dim, self.dim), |acc, e| {
                acc + e.matrix()
            })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn element(&self, j: usize) -> &HermitianMatrix {
        &self.elements[j]
    }

    fn check_len(&self, x: &OutcomeVector) -> Result<()> {
        if x.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn weighted_sum(&self, w: impl Iterator<Item = f64>) -> HermitianMatrix {
        let mut acc = DMatrix::zeros(self.dim, self.dim);
        for (c, e) in w.zip(&self.elements) {
            if c != 0.0 {
                acc += e.matrix().scale(c);
            }
        }
        HermitianMatrix::from_hermitian_unchecked(acc)
    }

    /// `A(x) = Σ x_j A_j`.
    pub fn contract(&self, x: &OutcomeVector) -> Result<HermitianMatrix> {
        self.check_len(x)?;
        Ok(self.weighted_sum(x.0.iter().copied()))
    }

    /// `Δ_A(x) = Σ x_j² A_j − A(x)²`.
    pub fn noise_operator(&self, x: &OutcomeVector) -> Result<HermitianMatrix> {
        self.check_len(x)?;
        let second = self.weighted_sum(x.0.iter().map(|v| v * v));
        let ax = self.weighted_sum(x.0.iter().copied());
        second.sub(&ax.square())
    }

    /// The manifestly PSD form `Σ (A(x) − x_j) A_j (A(x) − x_j)`.
    pub fn noise_operator_sandwich(&self, x: &OutcomeVector) -> Result<HermitianMatrix> {
        let ax = self.contract(x)?;
        let id = DMatrix::<Complex64>::identity(self.dim, self.dim);
        let mut acc = DMatrix::zeros(self.dim, self.dim);
        for (xj, a) in x.0.iter().zip(&self.elements) {
            let shift = ax.matrix() - id.scale(*xj);
            acc += &shift * a.matrix() * &shift;
        }
        HermitianMatrix::new(acc)
    }

    /// `‖Δ(x)‖^{1/2} ‖Δ(y)‖^{1/2} − ½‖[A(x), A(y)]‖`; nonnegative for every POVM.
    pub fn janssens_residual(&self, x: &OutcomeVector, y: &OutcomeVector) -> Result<f64> {
        let dx = self.noise_operator(x)?.op_norm()?;
        let dy = self.noise_operator(y)?.op_norm()?;
        let c = self.contract(x)?.comm_norm(&self.contract(y)?)?;
        Ok(dx.sqrt() * dy.sqrt() - 0.5 * c)
    }

    /// Largest pairwise commutator norm between elements.
    pub fn max_pairwise_commutator(&self) -> Result<f64> {
        let mut max = 0.0f64;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                max = max.max(self.elements[i].comm_norm(&self.elements[j])?);
            }
        }
        Ok(max)
    }

    /// True when every element is an orthogonal projector within `tol`.
    pub fn is_projection_valued(&self, tol: f64) -> bool {
        self.elements.iter().all(|e| {
            let sq = e.square();
            sq.max_abs_diff(e).map(|d| d <= tol).unwrap_or(false)
        })
    }

    /// Naimark dilation through the stacked square roots `V = [√A_1; …; √A_N]`.
    pub fn naimark_dilate(&self) -> Result<NaimarkDilation> {
        let n = self.len();
        let d = self.dim;
        let mut v = DMatrix::zeros(n * d, d);
        for (j, a) in self.elements.iter().enumerate() {
            let tol = PSD_CLAMP.max(a.default_psd_tol()?);
            let root = a.psd_sqrt(tol)?;
            v.view_mut((j * d, 0), (d, d)).copy_from(root.matrix());
        }
        let projectors = (0..n)
            .map(|j| {
                let mut p = DMatrix::zeros(n * d, n * d);
                for i in 0..d {
                    p[(j * d + i, j * d + i)] = Complex64::new(1.0, 0.0);
                }
                HermitianMatrix::from_hermitian_unchecked(p)
            })
            .collect();
        Ok(NaimarkDilation {
            dim: d,
            isometry: v,
            projectors,
        })
    }

    /// Random POVM `S^{-1/2} G_j S^{-1/2}` with `G_j = M_j M_j*`, deterministic per seed.
    pub fn random(dim: usize, n: usize, seed: u64) -> Result<Self> {
        const ATTEMPTS: usize = 16;
        if dim == 0 || n < 2 {
            return Err(Error::InvalidPovm(format!(
                "random POVM needs dim >= 1 and N >= 2, got dim {dim}, N {n}"
            )));
        }
        for attempt in 0..ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(attempt as u64);
            let gs: Vec<DMatrix<Complex64>> = (0..n)
                .map(|_| {
                    let m = DMatrix::from_fn(dim, dim, |_, _| {
                        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                    });
                    &m * m.adjoint()
                })
                .collect();
            let s = gs.iter().fold(DMatrix::zeros(dim, dim), |acc, g| acc + g);
            let s = HermitianMatrix::new(s)?;
            let dec = s.spectral_decomp()?;
            let top = *dec.eigenvalues.last().unwrap();
            if dec.eigenvalues[0] <= 1e-8 * top {
                continue;
            }
            let inv_root = crate::operator::SpectralDecomposition {
                eigenvalues: dec.eigenvalues.iter().map(|l| 1.0 / l.sqrt()).collect(),
                eigenvectors: dec.eigenvectors,
            }
            .recompose();
            let elements = gs
                .iter()
                .map(|g| HermitianMatrix::new(&inv_root * g * &inv_root))
                .collect::<Result<Vec<_>>>()?;
            let povm = Self::new_unchecked(elements)?;
            povm.validate()?;
            return Ok(povm);
        }
        Err(Error::GeneratorExhausted { attempts: ATTEMPTS })
    }
}

/// A POVM realized as the compression of a projection valued measure.
#[derive(Clone, Debug)]
pub struct NaimarkDilation {
    dim: usize,
    isometry: DMatrix<Complex64>,
    projectors: Vec<HermitianMatrix>,
}

/// Worst-case residuals of the dilation identities.
#[derive(Clone, Copy, Debug)]
pub struct NaimarkResiduals {
    /// `‖V*V − id‖_max`
    pub isometry: f64,
    /// `max_j ‖P_j² − P_j‖_max`
    pub idempotent: f64,
    /// `max_{i≠j} ‖P_i P_j‖_max`
    pub orthogonal: f64,
    /// `‖Σ P_j − id‖_max`
    pub completeness: f64,
    /// `max_j ‖V* P_j V − A_j‖_max`
    pub compression: f64,
}

impl NaimarkDilation {
    pub fn isometry(&self) -> &DMatrix<Complex64> {
        &self.isometry
    }

    pub fn projectors(&self) -> &[HermitianMatrix] {
        &self.projectors
    }

    pub fn dilated_dim(&self) -> usize {
        self.isometry.nrows()
    }

    /// `Ψ(B) = V* B V`.
    pub fn compress(&self, b: &HermitianMatrix) -> Result<HermitianMatrix> {
        if b.dim() != self.dilated_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dilated_dim(),
                got: b.dim(),
            });
        }
        HermitianMatrix::new(self.isometry.adjoint() * b.matrix() * &self.isometry)
    }

    /// `Σ x_i P_i` on the dilated space.
    pub fn lift(&self, x: &OutcomeVector) -> Result<HermitianMatrix> {
        if x.len() != self.projectors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.projectors.len(),
                got: x.len(),
            });
        }
        let diag: Vec<f64> = x
            .as_slice()
            .iter()
            .flat_map(|&xi| std::iter::repeat_n(xi, self.dim))
            .collect();
        Ok(HermitianMatrix::from_real_diagonal(&diag))
    }

    pub fn residuals(&self, povm: &FinitePovm) -> Result<NaimarkResiduals> {
        let nd = self.dilated_dim();
        let id_small = DMatrix::<Complex64>::identity(self.dim, self.dim);
        let id_big = DMatrix::<Complex64>::identity(nd, nd);
        let isometry = max_abs_diff(&(self.isometry.adjoint() * &self.isometry), &id_small);
        let mut idempotent = 0.0f64;
        let mut orthogonal = 0.0f64;
        let mut compression = 0.0f64;
        let mut sum = DMatrix::zeros(nd, nd);
        for (i, p) in self.projectors.iter().enumerate() {
            idempotent = idempotent.max(max_abs_diff(&(p.matrix() * p.matrix()), p.matrix()));
            for q in &self.projectors[i + 1..] {
                let prod = p.matrix() * q.matrix();
                orthogonal = orthogonal.max(prod.iter().fold(0.0f64, |a, z| a.max(z.norm())));
            }
            sum += p.matrix();
            compression = compression.max(self.compress(p)?.max_abs_diff(povm.element(i))?);
        }
        Ok(NaimarkResiduals {
            isometry,
            idempotent,
            orthogonal,
            completeness: max_abs_diff(&sum, &id_big),
            compression,
        })
    }
}

/// Wire form `{dim, N, elements}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PovmJson {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub elements: Vec<HermitianMatrix>,
}

impl From<FinitePovm> for PovmJson {
    fn from(p: FinitePovm) -> Self {
        PovmJson {
            dim: p.dim,
            n: p.elements.len(),
            elements: p.elements,
        }
    }
}

impl TryFrom<PovmJson> for FinitePovm {
    type Error = Error;
    fn try_from(j: PovmJson) -> Result<Self> {
        if j.elements.len() != j.n {
            return Err(Error::InvalidPovm(format!(
                "N = {} but {} elements given",
                j.n,
                j.elements.len()
            )));
        }
        let p = FinitePovm::new(j.elements)?;
        if p.dim != j.dim {
            return Err(Error::DimensionMismatch {
                expected: j.dim,
                got: p.dim,
            });
        }
        Ok(p)
    }
}
