//! Order-preserving fan-out. Results are always reduced in index order, so
//! outputs do not depend on the worker count.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..n).map(f).collect()
}

/// Index and value of the first maximum of `f` over `0..n`.
#[cfg(feature = "parallel")]
pub fn argmax<F>(n: usize, f: F) -> Result<(usize, f64)>
where
    F: Fn(usize) -> Result<f64> + Sync + Send,
{
    first_max(map(n, f)?)
}

#[cfg(not(feature = "parallel"))]
pub fn argmax<F>(n: usize, f: F) -> Result<(usize, f64)>
where
    F: Fn(usize) -> Result<f64>,
{
    first_max(map(n, f)?)
}

fn first_max(values: Vec<f64>) -> Result<(usize, f64)> {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    Ok(best)
}
