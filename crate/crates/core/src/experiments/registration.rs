//! Classical registration: multiplication operators on a grid-discretized
//! sphere.

use crate::error::Result;
use crate::operator::HermitianMatrix;
use crate::povm::FinitePovm;
use crate::smearing::MarkovKernel;
use crate::sphere::{PartitionOfUnity, SphereGrid};

/// `f_j` at every grid node, node-major.
fn node_values(p: &PartitionOfUnity, grid: &SphereGrid) -> Result<Vec<Vec<f64>>> {
    grid.points()
        .map(|q| p.functions().iter().map(|f| f.eval_checked(q)).collect())
        .collect()
}

/// Diagonal POVM `A_j = diag(f_j(node))` on `C^{#nodes}`.
pub fn classical_registration_povm(p: &PartitionOfUnity, grid: &SphereGrid) -> Result<FinitePovm> {
    let vals = node_values(p, grid)?;
    let elements = (0..p.len())
        .map(|j| {
            let d: Vec<f64> = vals.iter().map(|row| row[j].max(0.0)).collect();
            HermitianMatrix::from_real_diagonal(&d)
        })
        .collect();
    FinitePovm::new(elements)
}

/// Kernel `γ_node({j}) = f_j(node)` smearing the node projectors to the
/// registration POVM.
pub fn canonical_kernel(p: &PartitionOfUnity, grid: &SphereGrid) -> Result<MarkovKernel> {
    let rows = node_values(p, grid)?
        .into_iter()
        .map(|row| {
            let row: Vec<f64> = row.into_iter().map(|v| v.max(0.0)).collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|v| v / s).collect()
        })
        .collect();
    MarkovKernel::new(rows)
}
