use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A point of the unit sphere in the `(t, φ)` chart, `t = q₃ = cos θ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub t: f64,
    pub phi: f64,
}

impl SpherePoint {
    /// Builds a point, wrapping `phi` into `[0, 2π)` and clamping `t`.
    pub fn new(t: f64, phi: f64) -> Self {
        Self {
            t: t.clamp(-1.0, 1.0),
            phi: phi.rem_euclid(2.0 * PI),
        }
    }

    pub fn from_cartesian(q: [f64; 3]) -> Self {
        let r = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
        Self::new(q[2] / r, q[1].atan2(q[0]))
    }

    /// `sin θ = √(1 − t²)`.
    pub fn rho(&self) -> f64 {
        (1.0 - self.t * self.t).max(0.0).sqrt()
    }

    /// `(q₁, q₂, q₃)`.
    pub fn cartesian(&self) -> [f64; 3] {
        let rho = self.rho();
        [rho * self.phi.cos(), rho * self.phi.sin(), self.t]
    }

    /// Geodesic angle to another point.
    pub fn angle_to(&self, other: &SpherePoint) -> f64 {
        let a = self.cartesian();
        let b = other.cartesian();
        (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
            .clamp(-1.0, 1.0)
            .acos()
    }
}

/// Product quadrature: Gauss–Legendre in `t`, uniform in `φ`.
///
/// Weights are normalized so the total mass is 1 (the uniform probability
/// measure on the sphere).
#[derive(Clone, Debug)]
pub struct SphereGrid {
    t_nodes: Vec<f64>,
    t_weights: Vec<f64>,
    n_phi: usize,
}

impl SphereGrid {
    pub fn new(n_t: usize, n_phi: usize) -> Self {
        assert!(
            n_t >= 1 && n_phi >= 1,
            "grid needs at least one node per axis"
        );
        let (t_nodes, t_weights) = gauss_legendre(n_t);
        Self {
            t_nodes,
            t_weights,
            n_phi,
        }
    }

    /// The default 64 × 128 grid.
    pub fn standard() -> Self {
        Self::new(64, 128)
    }

    /// Default grid paired with quantization level `m`.
    pub fn for_level(m: usize) -> Self {
        Self::new(64.max(m + 1), 128.max(2 * m + 2))
    }

    pub fn n_t(&self) -> usize {
        self.t_nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_t() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t_nodes
    }

    /// Gauss–Legendre weights on `[-1, 1]` (summing to 2).
    pub fn t_weights(&self) -> &[f64] {
        &self.t_weights
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    /// Normalized weight of every node on ring `i`.
    pub fn ring_weight(&self, i: usize) -> f64 {
        self.t_weights[i] / (2.0 * self.n_phi as f64)
    }

    pub fn point(&self, i: usize, j: usize) -> SpherePoint {
        SpherePoint {
            t: self.t_nodes[i],
            phi: self.phi(j),
        }
    }

    /// Nodes ring by ring, `φ` fastest.
    pub fn points(&self) -> impl Iterator<Item = SpherePoint> + '_ {
        (0..self.n_t()).flat_map(move |i| (0..self.n_phi).map(move |j| self.point(i, j)))
    }

    /// `(point, weight)` pairs in node order.
    pub fn nodes(&self) -> impl Iterator<Item = (SpherePoint, f64)> + '_ {
        (0..self.n_t()).flat_map(move |i| {
            let w = self.ring_weight(i);
            (0..self.n_phi).map(move |j| (self.point(i, j), w))
        })
    }

    pub fn integrate(&self, f: impl Fn(SpherePoint) -> f64) -> f64 {
        self.nodes().map(|(p, w)| w * f(p)).sum()
    }

    /// Nodes plus both poles and an equatorial ring, used for sup-norm
    /// sampling where Gauss nodes stay away from `t = ±1` and `t = 0`.
    pub fn sup_sample(&self) -> impl Iterator<Item = SpherePoint> + '_ {
        let poles = [
            SpherePoint { t: 1.0, phi: 0.0 },
            SpherePoint { t: -1.0, phi: 0.0 },
        ];
        let equator = (0..self.n_phi).map(move |j| SpherePoint {
            t: 0.0,
            phi: self.phi(j),
        });
        self.points().chain(poles).chain(equator)
    }
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
