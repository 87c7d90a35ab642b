//! Classical observables on the sphere and their Poisson bracket.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::grid::{SphereGrid, SpherePoint};
use crate::error::{Error, Result};

/// Normalization of the bracket, `{f, g} = κ (∂_t f ∂_φ g − ∂_φ f ∂_t g)`.
///
/// Pinned so that `i m [T(f), T(g)] → T({f, g})` for the coherent-state
/// quantization in [`crate::toeplitz`]; for the coordinate functions this
/// gives `{q₁, q₂} = −2 q₃`.
pub const BRACKET_KAPPA: f64 = 2.0;

/// Finite-difference step in both chart coordinates.
pub const FD_STEP: f64 = 1e-5;

/// Chart points closer than this to a pole are evaluated just inside it.
const POLE_GUARD: f64 = 1e-9;

type Scalar = Arc<dyn Fn(SpherePoint) -> f64 + Send + Sync>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    /// Analytic partials are attached.
    Analytic,
    /// Smooth; partials come from finite differences.
    Smooth,
    /// Not differentiable (indicators and the like).
    Discontinuous,
}

/// A real function on the sphere, optionally carrying its chart partials.
#[derive(Clone)]
pub struct SphereFunction {
    eval: Scalar,
    dt: Option<Scalar>,
    dphi: Option<Scalar>,
    smoothness: Smoothness,
    band_limit: Option<usize>,
}

impl fmt::Debug for SphereFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SphereFunction")
            .field("smoothness", &self.smoothness)
            .field("band_limit", &self.band_limit)
            .finish()
    }
}

impl SphereFunction {
    /// A smooth function; partials will be taken by finite differences.
    pub fn new(f: impl Fn(SpherePoint) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            dt: None,
            dphi: None,
            smoothness: Smoothness::Smooth,
            band_limit: None,
        }
    }

    pub fn with_partials(
        f: impl Fn(SpherePoint) -> f64 + Send + Sync + 'static,
        dt: impl Fn(SpherePoint) -> f64 + Send + Sync + 'static,
        dphi: impl Fn(SpherePoint) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(f),
            dt: Some(Arc::new(dt)),
            dphi: Some(Arc::new(dphi)),
            smoothness: Smoothness::Analytic,
            band_limit: None,
        }
    }

    /// A non-differentiable function (e.g. an indicator).
    pub fn discontinuous(f: impl Fn(SpherePoint) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            smoothness: Smoothness::Discontinuous,
            ..Self::new(f)
        }
    }

    pub fn indicator(region: impl Fn(SpherePoint) -> bool + Send + Sync + 'static) -> Self {
        Self::discontinuous(move |p| if region(p) { 1.0 } else { 0.0 })
    }

    /// Attach a band-limit hint (largest polynomial degree in ambient coordinates).
    pub fn with_band_limit(mut self, degree: usize) -> Self {
        self.band_limit = Some(degree);
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::with_partials(move |_| c, |_| 0.0, |_| 0.0).with_band_limit(0)
    }

    /// `g(t)` with derivative `dg`.
    pub fn of_t(
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::with_partials(move |p| g(p.t), move |p| dg(p.t), |_| 0.0)
    }

    /// `q₁ = √(1 − t²) cos φ`.
    pub fn q1() -> Self {
        Self::with_partials(
            |p| p.rho() * p.phi.cos(),
            |p| -p.t / p.rho() * p.phi.cos(),
            |p| -p.rho() * p.phi.sin(),
        )
        .with_band_limit(1)
    }

    /// `q₂ = √(1 − t²) sin φ`.
    pub fn q2() -> Self {
        Self::with_partials(
            |p| p.rho() * p.phi.sin(),
            |p| -p.t / p.rho() * p.phi.sin(),
            |p| p.rho() * p.phi.cos(),
        )
        .with_band_limit(1)
    }

    /// `q₃ = t`.
    pub fn q3() -> Self {
        Self::of_t(|t| t, |_| 1.0).with_band_limit(1)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn band_limit(&self) -> Option<usize> {
        self.band_limit
    }

    pub fn is_differentiable(&self) -> bool {
        self.smoothness != Smoothness::Discontinuous
    }

    pub fn eval(&self, p: SpherePoint) -> f64 {
        (self.eval)(p)
    }

    /// Evaluates, rejecting non-finite values.
    pub fn eval_checked(&self, p: SpherePoint) -> Result<f64> {
        let v = self.eval(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteFunction { t: p.t, phi: p.phi })
        }
    }

    pub fn partial_t(&self, p: SpherePoint) -> Result<f64> {
        if let Some(dt) = &self.dt {
            return Ok(dt(p));
        }
        self.require_differentiable()?;
        let h = FD_STEP;
        let f = |t: f64| self.eval(SpherePoint { t, phi: p.phi });
        Ok(if p.t + h > 1.0 {
            (3.0 * f(p.t) - 4.0 * f(p.t - h) + f(p.t - 2.0 * h)) / (2.0 * h)
        } else if p.t - h < -1.0 {
            (-3.0 * f(p.t) + 4.0 * f(p.t + h) - f(p.t + 2.0 * h)) / (2.0 * h)
        } else {
            (f(p.t + h) - f(p.t - h)) / (2.0 * h)
        })
    }

    pub fn partial_phi(&self, p: SpherePoint) -> Result<f64> {
        if let Some(dphi) = &self.dphi {
            return Ok(dphi(p));
        }
        self.require_differentiable()?;
        let h = FD_STEP;
        let f = |phi: f64| self.eval(SpherePoint { t: p.t, phi });
        Ok((f(p.phi + h) - f(p.phi - h)) / (2.0 * h))
    }

    fn require_differentiable(&self) -> Result<()> {
        if self.is_differentiable() {
            Ok(())
        } else {
            Err(Error::NotDifferentiable)
        }
    }

    /// Checks `f(t, 0) ≈ f(t, 2π⁻)` on `samples` values of `t`.
    pub fn is_periodic(&self, samples: usize) -> bool {
        (0..samples).all(|i| {
            let t = -1.0 + 2.0 * (i as f64 + 0.5) / samples as f64;
            let a = self.eval(SpherePoint { t, phi: 0.0 });
            let b = self.eval(SpherePoint {
                t,
                phi: 2.0 * PI - 1e-12,
            });
            (a - b).abs() < 1e-8
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        let (f, dt, dphi) = (self.eval.clone(), self.dt.clone(), self.dphi.clone());
        Self {
            eval: Arc::new(move |p| c * f(p)),
            dt: dt.map(|d| Arc::new(move |p| c * d(p)) as Scalar),
            dphi: dphi.map(|d| Arc::new(move |p| c * d(p)) as Scalar),
            smoothness: self.smoothness,
            band_limit: self.band_limit,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let combine = |a: &Option<Scalar>, b: &Option<Scalar>| match (a, b) {
            (Some(a), Some(b)) => {
                let (a, b) = (a.clone(), b.clone());
                Some(Arc::new(move |p| a(p) + b(p)) as Scalar)
            }
            _ => None,
        };
        Self {
            eval: Arc::new(move |p| f(p) + g(p)),
            dt: combine(&self.dt, &other.dt),
            dphi: combine(&self.dphi, &other.dphi),
            smoothness: join(self.smoothness, other.smoothness),
            band_limit: self.band_limit.zip(other.band_limit).map(|(a, b)| a.max(b)),
        }
    }

    /// Pointwise product, with partials by the product rule when available.
    pub fn mul(&self, other: &Self) -> Self {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let leibniz = |a: &Option<Scalar>, b: &Option<Scalar>| match (a, b) {
            (Some(da), Some(db)) => {
                let (f, g, da, db) = (f.clone(), g.clone(), da.clone(), db.clone());
                Some(Arc::new(move |p| da(p) * g(p) + f(p) * db(p)) as Scalar)
            }
            _ => None,
        };
        let dt = leibniz(&self.dt, &other.dt);
        let dphi = leibniz(&self.dphi, &other.dphi);
        Self {
            eval: Arc::new(move |p| f(p) * g(p)),
            dt,
            dphi,
            smoothness: join(self.smoothness, other.smoothness),
            band_limit: self.band_limit.zip(other.band_limit).map(|(a, b)| a + b),
        }
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    /// `p ↦ f(t, φ + α)`.
    pub fn rotate_phi(&self, alpha: f64) -> Self {
        let shift = move |p: SpherePoint| SpherePoint {
            t: p.t,
            phi: p.phi + alpha,
        };
        let f = self.eval.clone();
        Self {
            eval: Arc::new(move |p| f(shift(p))),
            dt: self
                .dt
                .clone()
                .map(|d| Arc::new(move |p| d(shift(p))) as Scalar),
            dphi: self
                .dphi
                .clone()
                .map(|d| Arc::new(move |p| d(shift(p))) as Scalar),
            smoothness: self.smoothness,
            band_limit: self.band_limit,
        }
    }
}

fn join(a: Smoothness, b: Smoothness) -> Smoothness {
    use Smoothness::*;
    match (a, b) {
        (Discontinuous, _) | (_, Discontinuous) => Discontinuous,
        (Analytic, Analytic) => Analytic,
        _ => Smooth,
    }
}

/// Keeps chart evaluation off the poles, where `∂_t` is singular.
fn off_pole(p: SpherePoint) -> SpherePoint {
    SpherePoint {
        t: p.t.clamp(-1.0 + POLE_GUARD, 1.0 - POLE_GUARD),
        phi: p.phi,
    }
}

/// `{f, g}(p)` at a single point.
pub fn bracket_at(f: &SphereFunction, g: &SphereFunction, p: SpherePoint) -> Result<f64> {
    let p = off_pole(p);
    Ok(BRACKET_KAPPA
        * (f.partial_t(p)? * g.partial_phi(p)? - f.partial_phi(p)? * g.partial_t(p)?))
}

/// The Poisson bracket as a new (finite-difference differentiable) function.
pub fn poisson_bracket(f: &SphereFunction, g: &SphereFunction) -> Result<SphereFunction> {
    f.require_differentiable()?;
    g.require_differentiable()?;
    let (f, g) = (f.clone(), g.clone());
    Ok(SphereFunction::new(move |p| {
        bracket_at(&f, &g, p).expect("differentiability checked at construction")
    }))
}

/// Grid approximation of `max |f|` (a lower bound on the true sup).
pub fn sup_norm(f: &SphereFunction, grid: &SphereGrid) -> Result<f64> {
    grid.sup_sample()
        .try_fold(0.0f64, |acc, p| Ok(acc.max(f.eval_checked(p)?.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts() -> Vec<SpherePoint> {
        vec![
            SpherePoint::new(0.3, 1.1),
            SpherePoint::new(-0.8, 4.0),
            SpherePoint::new(0.95, 0.2),
            SpherePoint::new(0.0, 3.0),
        ]
    }

    fn smooth_a() -> SphereFunction {
        SphereFunction::new(|p| {
            let q = p.cartesian();
            (q[0] + 0.5 * q[1] * q[2]).sin()
        })
    }

    fn smooth_b() -> SphereFunction {
        SphereFunction::new(|p| {
            let q = p.cartesian();
            q[1] * q[1] - 0.3 * q[0] + q[2].powi(3)
        })
    }

    #[test]
    fn bracket_of_coordinates() {
        let b = poisson_bracket(&SphereFunction::q1(), &SphereFunction::q2()).unwrap();
        for p in pts() {
            assert!((b.eval(p) + 2.0 * p.t).abs() < 1e-12);
        }
        let g = SphereGrid::standard();
        assert!((sup_norm(&b, &g).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn bracket_vanishes_on_self_and_t_functions() {
        let f = smooth_a();
        let ff = poisson_bracket(&f, &f).unwrap();
        let u = SphereFunction::of_t(|t| t * t, |t| 2.0 * t);
        let v = SphereFunction::new(|p| (3.0 * p.t).cos());
        let uv = poisson_bracket(&u, &v).unwrap();
        for p in pts() {
            assert_eq!(ff.eval(p), 0.0);
            assert!(uv.eval(p).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_differences_match_analytic_partials() {
        let q1 = SphereFunction::q1();
        let fd = SphereFunction::new(|p| p.rho() * p.phi.cos());
        for p in pts() {
            assert!((q1.partial_t(p).unwrap() - fd.partial_t(p).unwrap()).abs() < 1e-7);
            assert!((q1.partial_phi(p).unwrap() - fd.partial_phi(p).unwrap()).abs() < 1e-8);
        }
        // one-sided stencil near the pole
        let near = SpherePoint::new(1.0 - 2e-6, 0.5);
        let t3 = SphereFunction::new(|p| p.t * p.t);
        assert!((t3.partial_t(near).unwrap() - 2.0 * near.t).abs() < 1e-8);
    }

    #[test]
    fn antisymmetry_and_leibniz() {
        let (f, g) = (smooth_a(), smooth_b());
        let h = SphereFunction::new(|p| p.t + 0.2 * p.phi.sin() * p.rho());
        let fg = f.mul(&g);
        for p in pts() {
            let a = bracket_at(&f, &g, p).unwrap();
            let b = bracket_at(&g, &f, p).unwrap();
            assert!((a + b).abs() < 1e-12);
            let lhs = bracket_at(&fg, &h, p).unwrap();
            let rhs = f.eval(p) * bracket_at(&g, &h, p).unwrap()
                + g.eval(p) * bracket_at(&f, &h, p).unwrap();
            assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn indicator_is_not_differentiable() {
        let chi = SphereFunction::indicator(|p| p.t > 0.0);
        assert!(matches!(
            poisson_bracket(&chi, &SphereFunction::q3()),
            Err(Error::NotDifferentiable)
        ));
    }

    #[test]
    fn sup_norm_cases() {
        let g = SphereGrid::standard();
        assert_eq!(sup_norm(&SphereFunction::constant(1.0), &g).unwrap(), 1.0);
        let t = sup_norm(&SphereFunction::q3(), &g).unwrap();
        assert!((t - 1.0).abs() < 5e-3);
        let bad = SphereFunction::new(|p| if p.t > 0.9 { f64::NAN } else { 0.0 });
        assert!(matches!(
            sup_norm(&bad, &g),
            Err(Error::NonFiniteFunction { .. })
        ));
    }

    #[test]
    fn periodicity_check() {
        assert!(SphereFunction::q1().is_periodic(16));
        assert!(!SphereFunction::new(|p| p.phi).is_periodic(16));
    }
}
