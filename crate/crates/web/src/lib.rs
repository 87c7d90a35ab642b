//! Browser demo. The pure functions return JSON strings so they can be
//! tested natively; the `#[wasm_bindgen]` wrappers only convert errors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use unsharp_core::search::noncommutativity;
use unsharp_core::sphere::{
    cap_partition_with_taper, covering_radius, platonic_centers, SphereFunction, SphereGrid,
};
use unsharp_core::{FinitePovm, OutcomeVector, SearchBudget, ToeplitzContext};
use wasm_bindgen::prelude::*;

pub const MAX_LEVEL: usize = 96;

#[derive(Serialize)]
struct Spectrum {
    m: usize,
    observable: String,
    eigenvalues: Vec<f64>,
    norm: f64,
}

#[derive(Serialize)]
struct CapRow {
    m: usize,
    nu_q: f64,
    m_times_nu_q: f64,
}

#[derive(Serialize)]
struct CapScan {
    n: usize,
    radius: f64,
    area_fraction: f64,
    rows: Vec<CapRow>,
}

#[derive(Serialize)]
struct ScatterPoint {
    half_comm: f64,
    sqrt_noise_product: f64,
    dim: usize,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn observable(name: &str) -> Result<SphereFunction, String> {
    match name {
        "q1" => Ok(SphereFunction::q1()),
        "q2" => Ok(SphereFunction::q2()),
        "q3" => Ok(SphereFunction::q3()),
        "q3^2" => Ok(SphereFunction::q3().square()),
        "cap" => Ok(
            cap_partition_with_taper(&platonic_centers(4).map_err(err)?, 1.55, 1.5)
                .map_err(err)?
                .function(0)
                .clone(),
        ),
        other => Err(format!(
            "unknown observable {other:?}; use q1, q2, q3, q3^2 or cap"
        )),
    }
}

/// Eigenvalues of `T_m(f)` in ascending order.
pub fn toeplitz_spectrum_json(m: usize, name: &str) -> Result<String, String> {
    if m > MAX_LEVEL {
        return Err(format!("m is capped at {MAX_LEVEL} in the browser"));
    }
    let f = observable(name)?;
    let t = ToeplitzContext::new(m)
        .map_err(err)?
        .toeplitz(&f)
        .map_err(err)?;
    let mut eigenvalues = t.eigenvalues().map_err(err)?;
    eigenvalues.sort_by(f64::total_cmp);
    let norm = t.op_norm().map_err(err)?;
    serde_json::to_string(&Spectrum {
        m,
        observable: name.to_string(),
        eigenvalues,
        norm,
    })
    .map_err(err)
}

/// `ν_q` and `m·ν_q` for Platonic caps of radius `radius_factor × covering radius`.
pub fn cap_scan_json(n: usize, radius_factor: f64, m_list: &[usize]) -> Result<String, String> {
    if let Some(m) = m_list.iter().find(|&&m| m > MAX_LEVEL) {
        return Err(format!("m = {m} exceeds the browser cap {MAX_LEVEL}"));
    }
    let centers = platonic_centers(n).map_err(err)?;
    let radius = radius_factor * covering_radius(&centers, &SphereGrid::new(48, 96));
    let p = cap_partition_with_taper(&centers, radius, 1.5).map_err(err)?;
    let budget = SearchBudget::default();
    let rows = m_list
        .iter()
        .map(|&m| {
            let a = ToeplitzContext::new(m)
                .and_then(|c| c.quantize_partition(&p))
                .map_err(err)?;
            let nu_q = noncommutativity(&a, &budget).map_err(err)?.value;
            Ok(CapRow {
                m,
                nu_q,
                m_times_nu_q: m as f64 * nu_q,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&CapScan {
        n,
        radius,
        area_fraction: p.area_fractions()[0],
        rows,
    })
    .map_err(err)
}

/// Points `(½‖[A(x),A(y)]‖, √(‖Δ(x)‖‖Δ(y)‖))` for random POVMs and cube points.
pub fn janssens_scatter_json(seed: u32, count: usize) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(u64::from(seed));
    let points = (0..count.min(2000))
        .map(|_| {
            let dim = rng.random_range(2..=5);
            let n = rng.random_range(2..=4);
            let a = FinitePovm::random(dim, n, rng.random()).map_err(err)?;
            let x = OutcomeVector::clamped((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
            let y = OutcomeVector::clamped((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
            let dx = a
                .noise_operator(&x)
                .and_then(|d| d.op_norm())
                .map_err(err)?;
            let dy = a
                .noise_operator(&y)
                .and_then(|d| d.op_norm())
                .map_err(err)?;
            let comm = a
                .contract(&x)
                .and_then(|ax| ax.comm_norm(&a.contract(&y)?))
                .map_err(err)?;
            Ok(ScatterPoint {
                half_comm: 0.5 * comm,
                sqrt_noise_product: (dx * dy).sqrt(),
                dim,
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    serde_json::to_string(&points).map_err(err)
}

#[wasm_bindgen]
pub fn toeplitz_spectrum(m: usize, observable: &str) -> Result<String, JsError> {
    toeplitz_spectrum_json(m, observable).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cap_scan(n: usize, radius_factor: f64, m_list: Vec<usize>) -> Result<String, JsError> {
    cap_scan_json(n, radius_factor, &m_list).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn janssens_scatter(seed: u32, count: usize) -> Result<String, JsError> {
    janssens_scatter_json(seed, count).map_err(|e| JsError::new(&e))
}
