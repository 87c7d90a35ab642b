//! Covers of the sphere, subordinated partitions of unity and the classical
//! non-commutativity `ν_c`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

#[cfg(test)]
use super::function::bracket_at;
use super::function::{SphereFunction, BRACKET_KAPPA};
use super::grid::{SphereGrid, SpherePoint};
use crate::error::{Error, Result};
use crate::par;
use crate::povm::OutcomeVector;

/// Enumerate sign classes per point up to this many active members.
const NU_C_EXHAUSTIVE_MAX: usize = 20;

/// One element of a cover.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoverSet {
    /// `{q₃ ∈ (lo, hi)}`; the end bands include the poles.
    Band { lo: f64, hi: f64 },
    /// Open geodesic disc.
    Cap { center: SpherePoint, radius: f64 },
}

impl CoverSet {
    pub fn contains(&self, p: SpherePoint) -> bool {
        match *self {
            CoverSet::Band { lo, hi } => {
                (p.t > lo || (lo <= -1.0 && p.t >= -1.0)) && (p.t < hi || (hi >= 1.0 && p.t <= 1.0))
            }
            CoverSet::Cap { center, radius } => center.angle_to(&p) < radius,
        }
    }

    /// Normalized area (total sphere area 1).
    pub fn area_fraction(&self) -> f64 {
        match *self {
            CoverSet::Band { lo, hi } => (hi.min(1.0) - lo.max(-1.0)) / 2.0,
            CoverSet::Cap { radius, .. } => (1.0 - radius.cos()) / 2.0,
        }
    }
}

/// `N` equal-width `t`-intervals covering `[-1, 1]`, consecutive ones
/// overlapping by `overlap`.
pub fn band_cover(n: usize, overlap: f64) -> Result<Vec<CoverSet>> {
    if n < 2 {
        return Err(Error::InvalidCover(format!(
            "need at least 2 bands, got {n}"
        )));
    }
    let width = (2.0 + (n as f64 - 1.0) * overlap) / n as f64;
    if !(overlap > 0.0 && overlap < width) {
        return Err(Error::InvalidCover(format!(
            "overlap {overlap} must lie in (0, {width})"
        )));
    }
    Ok((0..n)
        .map(|j| {
            let lo = -1.0 + j as f64 * (width - overlap);
            let hi = if j == n - 1 { 1.0 } else { lo + width };
            CoverSet::Band { lo, hi }
        })
        .collect())
}

/// Normalized bumps `f_j = b_j / Σ b_k` together with their cover.
#[derive(Clone, Debug)]
pub struct PartitionOfUnity {
    functions: Vec<SphereFunction>,
    cover: Vec<CoverSet>,
}

/// Witnessed lower bound on `ν_c`.
#[derive(Clone, Debug, Serialize)]
pub struct NuC {
    pub value: f64,
    pub witness_x: OutcomeVector,
    pub witness_y: OutcomeVector,
    pub point: SpherePoint,
}

/// A bump with its chart partials, evaluated together.
type Bump = Arc<dyn Fn(SpherePoint) -> (f64, f64, f64) + Send + Sync>;

impl PartitionOfUnity {
    /// Normalizes bumps into a partition, `f_j = b_j / Σ b`.
    fn from_bumps(bumps: Vec<Bump>, cover: Vec<CoverSet>) -> Self {
        let bumps = Arc::new(bumps);
        let functions = (0..bumps.len())
            .map(|j| {
                let (b0, b1, b2) = (bumps.clone(), bumps.clone(), bumps.clone());
                SphereFunction::with_partials(
                    move |p| normalized(&b0, j, p).0,
                    move |p| normalized(&b1, j, p).1,
                    move |p| normalized(&b2, j, p).2,
                )
            })
            .collect();
        Self { functions, cover }
    }

    /// Wraps explicit functions; call [`validate`](Self::validate) to check them.
    pub fn from_functions(functions: Vec<SphereFunction>, cover: Vec<CoverSet>) -> Result<Self> {
        if functions.len() != cover.len() || functions.is_empty() {
            return Err(Error::InvalidPartition(format!(
                "{} functions for {} cover sets",
                functions.len(),
                cover.len()
            )));
        }
        Ok(Self { functions, cover })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn functions(&self) -> &[SphereFunction] {
        &self.functions
    }

    pub fn function(&self, j: usize) -> &SphereFunction {
        &self.functions[j]
    }

    pub fn cover(&self) -> &[CoverSet] {
        &self.cover
    }

    pub fn area_fractions(&self) -> Vec<f64> {
        self.cover.iter().map(CoverSet::area_fraction).collect()
    }

    /// Nonnegativity, sum to one and support subordination on `grid`.
    pub fn validate(&self, grid: &SphereGrid) -> Result<()> {
        for p in grid.points() {
            let mut sum = 0.0;
            for (j, (f, u)) in self.functions.iter().zip(&self.cover).enumerate() {
                let v = f.eval_checked(p)?;
                if v < -1e-12 {
                    return Err(Error::InvalidPartition(format!(
                        "f_{j} = {v:e} at t = {}, phi = {}",
                        p.t, p.phi
                    )));
                }
                if v > 1e-10 && !u.contains(p) {
                    return Err(Error::InvalidPartition(format!(
                        "f_{j} = {v:e} outside its cover set at t = {}, phi = {}",
                        p.t, p.phi
                    )));
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidPartition(format!(
                    "sum = {sum} at t = {}, phi = {}",
                    p.t, p.phi
                )));
            }
        }
        Ok(())
    }

    /// Values and chart partials of every member at `p`.
    fn jet(&self, p: SpherePoint) -> Result<Vec<(f64, f64, f64)>> {
        let p = SpherePoint {
            t: p.t.clamp(-1.0 + 1e-9, 1.0 - 1e-9),
            phi: p.phi,
        };
        self.functions
            .iter()
            .map(|f| Ok((f.eval_checked(p)?, f.partial_t(p)?, f.partial_phi(p)?)))
            .collect()
    }

    /// Classical non-commutativity on the grid:
    /// `max_p max_{x,y ∈ {±1}^N} |Σ x_j y_k {f_j, f_k}(p)|`.
    pub fn nu_c(&self, grid: &SphereGrid) -> Result<NuC> {
        let n = self.len();
        let rings = par::map(grid.n_t(), |i| {
            let mut best: Option<(f64, Vec<f64>, Vec<f64>, SpherePoint)> = None;
            for j in 0..grid.n_phi() {
                let p = grid.point(i, j);
                let jet = self.jet(p)?;
                let active: Vec<usize> = (0..n)
                    .filter(|&k| jet[k].1 != 0.0 || jet[k].2 != 0.0)
                    .collect();
                if active.len() < 2 {
                    continue;
                }
                let b: Vec<Vec<f64>> = active
                    .iter()
                    .map(|&a| {
                        active
                            .iter()
                            .map(|&c| BRACKET_KAPPA * (jet[a].1 * jet[c].2 - jet[a].2 * jet[c].1))
                            .collect()
                    })
                    .collect();
                let (value, xs) = bilinear_vertex_max(&b);
                if best.as_ref().is_none_or(|bst| value > bst.0) {
                    let mut x = vec![1.0; n];
                    let mut y = vec![1.0; n];
                    for (ai, &a) in active.iter().enumerate() {
                        x[a] = xs[ai];
                    }
                    for (ci, &c) in active.iter().enumerate() {
                        let col: f64 = (0..active.len()).map(|ai| xs[ai] * b[ai][ci]).sum();
                        y[c] = if col < 0.0 { -1.0 } else { 1.0 };
                    }
                    best = Some((value, x, y, p));
                }
            }
            Ok(best)
        })?;
        let mut out = NuC {
            value: 0.0,
            witness_x: OutcomeVector::ones(n),
            witness_y: OutcomeVector::ones(n),
            point: grid.point(0, 0),
        };
        for (value, x, y, point) in rings.into_iter().flatten() {
            if value > out.value {
                out = NuC {
                    value,
                    witness_x: OutcomeVector::clamped(x),
                    witness_y: OutcomeVector::clamped(y),
                    point,
                };
            }
        }
        Ok(out)
    }

    /// Sampled values as CSV with header `t,phi,f_1,…,f_N`.
    pub fn to_csv(&self, grid: &SphereGrid) -> Result<String> {
        let mut s = String::from("t,phi");
        for j in 1..=self.len() {
            write!(s, ",f_{j}").unwrap();
        }
        s.push('\n');
        for p in grid.points() {
            write!(s, "{},{}", p.t, p.phi).unwrap();
            for f in &self.functions {
                write!(s, ",{}", f.eval_checked(p)?).unwrap();
            }
            s.push('\n');
        }
        Ok(s)
    }
}

fn normalized(bumps: &[Bump], j: usize, p: SpherePoint) -> (f64, f64, f64) {
    let (mut s, mut st, mut sp) = (0.0, 0.0, 0.0);
    let mut own = (0.0, 0.0, 0.0);
    for (k, b) in bumps.iter().enumerate() {
        let v = b(p);
        s += v.0;
        st += v.1;
        sp += v.2;
        if k == j {
            own = v;
        }
    }
    if own.0 == 0.0 && own.1 == 0.0 && own.2 == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = own.0 / s;
    (f, (own.1 - f * st) / s, (own.2 - f * sp) / s)
}

/// `max_{x,y ∈ {±1}^n} xᵀ B y = max_x ‖Bᵀ x‖₁`, returning the maximizing `x`.
///
/// Exact by enumeration of sign classes for small `n`, greedy flips above.
pub(crate) fn bilinear_vertex_max(b: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = b.len();
    let score = |x: &[f64]| -> f64 {
        (0..n)
            .map(|c| (0..n).map(|r| x[r] * b[r][c]).sum::<f64>().abs())
            .sum()
    };
    if n <= NU_C_EXHAUSTIVE_MAX {
        let mut best = (f64::NEG_INFINITY, vec![1.0; n]);
        for bits in 0..1u64 << (n - 1) {
            let x: Vec<f64> = (0..n)
                .map(|i| {
                    if i > 0 && bits >> (i - 1) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let v = score(&x);
            if v > best.0 {
                best = (v, x);
            }
        }
        return best;
    }
    let mut x = vec![1.0; n];
    let mut value = score(&x);
    loop {
        let mut improved = false;
        for i in 0..n {
            x[i] = -x[i];
            let v = score(&x);
            if v > value {
                value = v;
                improved = true;
            } else {
                x[i] = -x[i];
            }
        }
        if !improved {
            return (value, x);
        }
    }
}

/// `cos²` bump on `(c − h, c + h)`, optionally flat on one side.
fn taper_t(c: f64, h: f64, flat_below: bool, flat_above: bool) -> Bump {
    Arc::new(move |p: SpherePoint| {
        let d = p.t - c;
        if (flat_below && d <= 0.0) || (flat_above && d >= 0.0) {
            return (1.0, 0.0, 0.0);
        }
        if d.abs() >= h {
            return (0.0, 0.0, 0.0);
        }
        let u = PI * d / (2.0 * h);
        let v = u.cos().powi(2);
        let dv = -(2.0 * u).sin() * PI / (2.0 * h);
        (v, dv, 0.0)
    })
}

/// Partition of unity by functions of `t` only, subordinated to a band cover.
pub fn band_partition(cover: &[CoverSet]) -> Result<PartitionOfUnity> {
    let mut bands = Vec::with_capacity(cover.len());
    for c in cover {
        match *c {
            CoverSet::Band { lo, hi } => bands.push((lo, hi)),
            CoverSet::Cap { .. } => {
                return Err(Error::InvalidCover(
                    "band partition needs band cover sets".into(),
                ))
            }
        }
    }
    if bands.len() < 2 {
        return Err(Error::InvalidCover("need at least two bands".into()));
    }
    if bands[0].0 > -1.0 || bands[bands.len() - 1].1 < 1.0 {
        return Err(Error::InvalidCover("bands do not reach both poles".into()));
    }
    let mut min_overlap = f64::INFINITY;
    for w in bands.windows(2) {
        let ov = w[0].1 - w[1].0;
        if ov <= 0.0 {
            return Err(Error::InvalidCover(format!(
                "gap between {} and {}",
                w[0].1, w[1].0
            )));
        }
        min_overlap = min_overlap.min(ov);
    }
    // Shrink every band by a margin so supports sit strictly inside.
    let margin = 0.1 * min_overlap;
    let last = bands.len() - 1;
    let bumps = bands
        .iter()
        .enumerate()
        .map(|(j, &(lo, hi))| {
            let (a, b) = (lo + margin, hi - margin);
            taper_t((a + b) / 2.0, (b - a) / 2.0, j == 0, j == last)
        })
        .collect();
    Ok(PartitionOfUnity::from_bumps(bumps, cover.to_vec()))
}

/// `b(θ) = cos(πθ / 2r)^p` for `θ < r`.
fn cap_bump(center: SpherePoint, radius: f64, p: f64) -> Bump {
    let c = center.cartesian();
    let k = PI / (2.0 * radius);
    Arc::new(move |pt: SpherePoint| {
        let q = pt.cartesian();
        let dot = (q[0] * c[0] + q[1] * c[1] + q[2] * c[2]).clamp(-1.0, 1.0);
        let theta = dot.acos();
        if theta >= radius {
            return (0.0, 0.0, 0.0);
        }
        let u = k * theta;
        let v = u.cos().powf(p);
        // b'(θ)/sin θ, with its limit at the center.
        let ratio = if theta < 1e-6 {
            -p * k * k
        } else {
            -p * k * u.cos().powf(p - 1.0) * u.sin() / theta.sin()
        };
        let p = pt;
        let rho = p.rho();
        let (cp, sp) = (p.phi.cos(), p.phi.sin());
        let ddot_t = if rho > 0.0 {
            -p.t / rho * (c[0] * cp + c[1] * sp) + c[2]
        } else {
            c[2]
        };
        let ddot_phi = rho * (-c[0] * sp + c[1] * cp);
        // ∂θ = −∂(p·c) / sin θ
        (v, -ratio * ddot_t, -ratio * ddot_phi)
    })
}

/// Smallest total bump mass over `grid` and where it occurs.
fn coverage_floor(centers: &[SpherePoint], radius: f64, grid: &SphereGrid) -> (SpherePoint, f64) {
    let bumps: Vec<Bump> = centers.iter().map(|c| cap_bump(*c, radius, 1.0)).collect();
    let mut worst = (grid.point(0, 0), f64::INFINITY);
    for p in grid.sup_sample() {
        let mass: f64 = bumps.iter().map(|b| b(p).0).sum();
        if mass < worst.1 {
            worst = (p, mass);
        }
    }
    worst
}

/// Partition by normalized cosine-tapered cap bumps with the default taper.
pub fn cap_partition(centers: &[SpherePoint], radius: f64) -> Result<PartitionOfUnity> {
    cap_partition_with_taper(centers, radius, CAP_TAPER_EXPONENT)
}

/// Partition by normalized bumps `cos(πθ / 2r)^p`; `p > 1` keeps them `C¹`.
pub fn cap_partition_with_taper(
    centers: &[SpherePoint],
    radius: f64,
    taper: f64,
) -> Result<PartitionOfUnity> {
    if centers.is_empty() || !(radius > 0.0 && radius < PI) {
        return Err(Error::InvalidCover(format!(
            "need centers and a radius in (0, π), got {} centers, radius {radius}",
            centers.len()
        )));
    }
    if !(taper > 1.0 && taper.is_finite()) {
        return Err(Error::InvalidCover(format!(
            "taper exponent {taper} must exceed 1"
        )));
    }
    let (point, mass) = coverage_floor(centers, radius, &SphereGrid::standard());
    if mass <= 1e-6 {
        return Err(Error::CoverageGap { point, mass });
    }
    let bumps = centers
        .iter()
        .map(|c| cap_bump(*c, radius, taper))
        .collect();
    let cover = centers
        .iter()
        .map(|&center| CoverSet::Cap { center, radius })
        .collect();
    Ok(PartitionOfUnity::from_bumps(bumps, cover))
}

/// Largest geodesic distance from a grid point to the nearest center.
pub fn covering_radius(centers: &[SpherePoint], grid: &SphereGrid) -> f64 {
    grid.sup_sample()
        .map(|p| {
            centers
                .iter()
                .map(|c| c.angle_to(&p))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Vertices of the Platonic solid with `n` vertices (4, 6, 8, 12 or 20).
pub fn platonic_centers(n: usize) -> Result<Vec<SpherePoint>> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw: Vec<[f64; 3]> = match n {
        4 => vec![
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ],
        6 => vec![
            [1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ],
        8 => (0..8)
            .map(|b| {
                let s = |i: usize| if b >> i & 1 == 1 { -1.0 } else { 1.0 };
                [s(0), s(1), s(2)]
            })
            .collect(),
        12 => {
            let mut v = Vec::new();
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    v.push([0.0, s1, s2 * phi]);
                    v.push([s1, s2 * phi, 0.0]);
                    v.push([s2 * phi, 0.0, s1]);
                }
            }
            v
        }
        20 => {
            let mut v: Vec<[f64; 3]> = (0..8)
                .map(|b| {
                    let s = |i: usize| if b >> i & 1 == 1 { -1.0 } else { 1.0 };
                    [s(0), s(1), s(2)]
                })
                .collect();
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    v.push([0.0, s1 / phi, s2 * phi]);
                    v.push([s1 / phi, s2 * phi, 0.0]);
                    v.push([s2 * phi, 0.0, s1 / phi]);
                }
            }
            v
        }
        _ => {
            return Err(Error::InvalidCover(format!(
                "no Platonic vertex set with {n} vertices"
            )))
        }
    };
    Ok(raw.into_iter().map(SpherePoint::from_cartesian).collect())
}

/// Default cap radius for the tetrahedral cover (area fraction 0.49).
pub const TETRAHEDRAL_RADIUS: f64 = 1.55;

/// Default exponent of the cap taper `cos(πθ / 2r)^p`.
pub const CAP_TAPER_EXPONENT: f64 = 1.5;

/// Config form of a partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum PartitionSpec {
    Bands {
        #[serde(rename = "N")]
        n: usize,
        overlap: f64,
    },
    Caps {
        /// Number of caps; selects a Platonic vertex set when `centers` is absent.
        #[serde(rename = "N", default)]
        n: Option<usize>,
        #[serde(default)]
        centers: Option<Vec<SpherePoint>>,
        /// Angular radius; defaults to `radius_factor ×` the covering radius
        /// (or the tetrahedral default for four caps).
        #[serde(default)]
        radius: Option<f64>,
        #[serde(default)]
        radius_factor: Option<f64>,
        /// Taper exponent `p` of `cos(πθ / 2r)^p`.
        #[serde(default)]
        taper: Option<f64>,
    },
}

impl PartitionSpec {
    pub fn bands(n: usize, overlap: f64) -> Self {
        PartitionSpec::Bands { n, overlap }
    }

    pub fn tetrahedral() -> Self {
        PartitionSpec::Caps {
            n: Some(4),
            centers: None,
            radius: Some(TETRAHEDRAL_RADIUS),
            radius_factor: None,
            taper: None,
        }
    }

    pub fn build(&self) -> Result<PartitionOfUnity> {
        match self {
            PartitionSpec::Bands { n, overlap } => band_partition(&band_cover(*n, *overlap)?),
            PartitionSpec::Caps {
                n,
                centers,
                radius,
                radius_factor,
                taper,
            } => {
                let centers = match (centers, n) {
                    (Some(c), _) => c.clone(),
                    (None, Some(n)) => platonic_centers(*n)?,
                    (None, None) => {
                        return Err(Error::Config("caps need N or explicit centers".into()))
                    }
                };
                let radius = match (radius, radius_factor) {
                    (Some(r), _) => *r,
                    (None, Some(f)) => f * covering_radius(&centers, &SphereGrid::standard()),
                    (None, None) if centers.len() == 4 => TETRAHEDRAL_RADIUS,
                    (None, None) => {
                        DEFAULT_RADIUS_FACTOR * covering_radius(&centers, &SphereGrid::standard())
                    }
                };
                cap_partition_with_taper(&centers, radius, taper.unwrap_or(CAP_TAPER_EXPONENT))
            }
        }
    }
}

/// Cap radius relative to the covering radius when none is given.
pub const DEFAULT_RADIUS_FACTOR: f64 = 1.15;
