use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::fourier::fourier_coefficients;
use super::kernel::KernelSet;
use super::ReconstructionParams;
use crate::measurement::OutcomeDistribution;
use crate::state::{CyclotronDensityMatrix, Spin};
use crate::{Complex, Error, Result};

/// One reconstructed diagonal block with per-band fit residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockReconstruction {
    pub rho: CyclotronDensityMatrix,
    /// `|G x - P^(s)|_2` per band `s`.
    pub residuals: Vec<f64>,
}

/// Inverts every band `s = 0..=nc` of one spin branch.
///
/// `<m+s|rho|m> = sum_k M^(s)[m][k] P^(s)(k)`; the lower triangle is filled by
/// Hermitian conjugation and the diagonal is taken real.
pub fn reconstruct_block_with(
    dists: &[OutcomeDistribution],
    spin: Spin,
    params: &ReconstructionParams,
    kernels: &KernelSet,
) -> Result<BlockReconstruction> {
    params.validate()?;
    if dists.iter().all(|d| d.weight(spin) == 0.0) {
        return Err(Error::EmptyBranch(spin));
    }
    if let Some(d) = dists.first() {
        if d.branch(spin).len() < params.n + 1 {
            return Err(Error::RangeBelowReconstruction {
                n: d.branch(spin).len().saturating_sub(1),
                nc: params.n,
            });
        }
    }
    let nc = params.nc;
    let mut rho = DMatrix::<Complex>::zeros(nc + 1, nc + 1);
    let mut residuals = Vec::with_capacity(nc + 1);
    for s in 0..=nc {
        let band = fourier_coefficients(dists, spin, s, nc)?;
        let p =
            DVector::from_iterator(params.n + 1, band.values.iter().take(params.n + 1).copied());
        let m = kernels.inverses[s].m.map(|x| Complex::new(x, 0.0));
        let g = kernels.kernels[s].g.map(|x| Complex::new(x, 0.0));
        let x = &m * &p;
        residuals.push((&g * &x - &p).norm());
        for (i, value) in x.iter().enumerate() {
            if s == 0 {
                rho[(i, i)] = Complex::new(value.re, 0.0);
            } else {
                rho[(i + s, i)] = *value;
                rho[(i, i + s)] = value.conj();
            }
        }
    }
    let rho = CyclotronDensityMatrix::from_matrix(rho)?;
    let rho = if params.psd_projection {
        rho.project_psd()
    } else {
        rho
    };
    Ok(BlockReconstruction { rho, residuals })
}

/// [`reconstruct_block_with`] building its own kernels.
pub fn reconstruct_block(
    dists: &[OutcomeDistribution],
    spin: Spin,
    params: &ReconstructionParams,
) -> Result<CyclotronDensityMatrix> {
    let kernels = params.kernels()?;
    Ok(reconstruct_block_with(dists, spin, params, &kernels)?.rho)
}
