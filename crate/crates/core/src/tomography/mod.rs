//! Inversion of phase-swept statistics into the blocks of the total density
//! matrix, plus recovery of the spin coefficients and relative phase.

mod amplitudes;
mod block;
mod fourier;
mod kernel;
mod spin;

use alloc::vec::Vec;

pub use amplitudes::{
    anchor_gauge, anchor_index, extract_amplitudes, reconstruct_offdiagonal, OffDiagonal,
    DIAGONAL_THRESHOLD, OVERLAP_THRESHOLD,
};
pub use block::{reconstruct_block, reconstruct_block_with, BlockReconstruction};
pub use fourier::{fourier_coefficients, validate_phase_grid, FourierBand};
pub use kernel::{
    build_kernel, pseudo_invert, KernelMatrix, KernelSet, PseudoInverse, BINOMIAL_FLOOR,
    DEFAULT_COND_LIMIT,
};
pub use spin::{
    pulse_probability, recover_spin_parameters, recover_spin_parameters_with, wrap_angle,
    PulseObservation, SpinParameters, CONSISTENCY_TOLERANCE,
};

use crate::fock::FockVector;
use crate::measurement::{check_eta, OutcomeDistribution};
use crate::state::{CyclotronDensityMatrix, Spin};
use crate::{Complex, Error, Result};

/// Settings shared by every band inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionParams {
    /// Reconstruction cutoff `Nc`.
    pub nc: usize,
    /// Highest measured count `N` used in the fit (`N >= Nc`).
    pub n: usize,
    pub alpha_mod: f64,
    pub eta: f64,
    /// Bound on `cond(G^T G)`.
    pub cond_limit: f64,
    pub psd_projection: bool,
    /// Allowed excess of the fitted `|sin|`, `|cos|` over 1 in spin-phase recovery.
    pub spin_tolerance: f64,
}

impl ReconstructionParams {
    pub fn new(nc: usize, n: usize, alpha_mod: f64, eta: f64) -> Self {
        Self {
            nc,
            n,
            alpha_mod,
            eta,
            cond_limit: DEFAULT_COND_LIMIT,
            psd_projection: false,
            spin_tolerance: CONSISTENCY_TOLERANCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < self.nc {
            return Err(Error::RangeBelowReconstruction {
                n: self.n,
                nc: self.nc,
            });
        }
        check_eta(self.eta)?;
        if !self.alpha_mod.is_finite() || self.alpha_mod < 0.0 {
            return Err(Error::NonFinite("alpha_mod"));
        }
        Ok(())
    }

    pub fn kernels(&self) -> Result<KernelSet> {
        self.validate()?;
        KernelSet::new(self.alpha_mod, self.eta, self.n, self.nc, self.cond_limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// `|<psi1|psi2>|` is below [`OVERLAP_THRESHOLD`]; the coherence block
    /// comes from the outer product alone.
    QuotientIllPosed,
    /// No pulse data, so `theta` was not estimated.
    NoPulseData,
    /// No events in this spin branch: its block, amplitudes and the coherence
    /// block are zero and `theta` is undefined.
    EmptyBranch(Spin),
    /// The pulse fit was inconsistent with the recovered overlap (a fitted
    /// sine or cosine of this size); `theta` was not estimated.
    SpinPhaseInconsistent(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// `cond(G^T G)` per band `s`.
    pub condition_numbers: Vec<f64>,
    pub residuals_up: Vec<f64>,
    pub residuals_down: Vec<f64>,
    /// Eigenvalues of each diagonal block, descending.
    pub eigenvalues_up: Vec<f64>,
    pub eigenvalues_down: Vec<f64>,
    pub imag_max_rho11: f64,
    pub imag_max_rho22: f64,
    pub imag_max_rho12: f64,
    pub quotient_deviation: Option<f64>,
    pub warnings: Vec<Warning>,
}

/// All recovered quantities of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub rho11: CyclotronDensityMatrix,
    pub rho22: CyclotronDensityMatrix,
    pub rho12: CyclotronDensityMatrix,
    pub psi1: FockVector,
    pub psi2: FockVector,
    /// Anchor indices of the amplitude extraction for `psi1`, `psi2`.
    pub anchors: (usize, usize),
    pub overlap: Complex,
    pub c1_est: f64,
    pub c2_est: f64,
    pub theta_est: Option<f64>,
    pub diagnostics: Diagnostics,
}

/// Mean spin-up weight over phases (equal events per phase).
pub fn spin_up_fraction(dists: &[OutcomeDistribution]) -> f64 {
    if dists.is_empty() {
        return f64::NAN;
    }
    dists.iter().map(|d| d.w_up).sum::<f64>() / dists.len() as f64
}

/// Full reconstruction: both diagonal blocks, the coherence block and, when
/// pulse data are present, the relative phase.
pub fn reconstruct(
    dists: &[OutcomeDistribution],
    pulses: &[PulseObservation],
    params: &ReconstructionParams,
) -> Result<ReconstructionReport> {
    let kernels = params.kernels()?;
    let block = |spin: Spin| match reconstruct_block_with(dists, spin, params, &kernels) {
        Err(Error::EmptyBranch(_)) => Ok(None),
        other => other.map(Some),
    };
    let (up, down) = (block(Spin::Up)?, block(Spin::Down)?);
    let mut warnings = Vec::new();
    let p_up = spin_up_fraction(dists);
    let (up, down, off) = match (up, down) {
        (Some(up), Some(down)) => {
            let off = reconstruct_offdiagonal(&up.rho, &down.rho)?;
            (up, down, off)
        }
        (Some(present), None) => {
            warnings.push(Warning::EmptyBranch(Spin::Down));
            let (empty, off) = single_branch(&present, params.nc, true)?;
            (present, empty, off)
        }
        (None, Some(present)) => {
            warnings.push(Warning::EmptyBranch(Spin::Up));
            let (empty, off) = single_branch(&present, params.nc, false)?;
            (empty, present, off)
        }
        (None, None) => return Err(Error::NoEvents),
    };
    if off.quotient_ill_posed() && warnings.is_empty() {
        warnings.push(Warning::QuotientIllPosed);
    }

    let both = warnings.is_empty() || warnings == [Warning::QuotientIllPosed];
    let (c1_est, c2_est, theta_est) = if pulses.is_empty() || !both {
        if pulses.is_empty() {
            warnings.push(Warning::NoPulseData);
        }
        (libm::sqrt(p_up), libm::sqrt(1.0 - p_up), None)
    } else {
        let fit = recover_spin_parameters_with(
            p_up,
            pulses,
            off.overlap.norm(),
            off.overlap.arg(),
            params.spin_tolerance,
        );
        match fit {
            Ok(sp) => (sp.c1, sp.c2_mod, Some(sp.theta)),
            // Small overlaps leave the phase buried in pulse noise; the blocks are still valid.
            Err(Error::InconsistentSpinData(v)) => {
                warnings.push(Warning::SpinPhaseInconsistent(v));
                (libm::sqrt(p_up), libm::sqrt(1.0 - p_up), None)
            }
            Err(e) => return Err(e),
        }
    };

    let diagnostics = Diagnostics {
        condition_numbers: kernels.condition_numbers(),
        residuals_up: up.residuals,
        residuals_down: down.residuals,
        eigenvalues_up: up.rho.eigenvalues(),
        eigenvalues_down: down.rho.eigenvalues(),
        imag_max_rho11: up.rho.max_abs_imag(),
        imag_max_rho22: down.rho.max_abs_imag(),
        imag_max_rho12: off.rho12.max_abs_imag(),
        quotient_deviation: off.quotient_deviation,
        warnings,
    };
    Ok(ReconstructionReport {
        anchors: (anchor_index(&up.rho), anchor_index(&down.rho)),
        rho11: up.rho,
        rho22: down.rho,
        rho12: off.rho12,
        psi1: off.psi1,
        psi2: off.psi2,
        overlap: off.overlap,
        c1_est,
        c2_est,
        theta_est,
        diagnostics,
    })
}

/// A product state: the missing branch gets zero blocks and amplitudes, and the
/// coherence block vanishes.
fn single_branch(
    present: &BlockReconstruction,
    nc: usize,
    present_is_up: bool,
) -> Result<(BlockReconstruction, OffDiagonal)> {
    let psi = extract_amplitudes(&present.rho)?;
    let zero = FockVector::new(alloc::vec![Complex::new(0.0, 0.0); nc + 1])?;
    let empty = BlockReconstruction {
        rho: CyclotronDensityMatrix::zeros(nc),
        residuals: Vec::new(),
    };
    let (psi1, psi2) = if present_is_up {
        (psi, zero)
    } else {
        (zero, psi)
    };
    let off = OffDiagonal {
        rho12: CyclotronDensityMatrix::zeros(nc),
        psi1,
        psi2,
        overlap: Complex::new(0.0, 0.0),
        quotient_deviation: None,
    };
    Ok((empty, off))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::tail_cutoff;
    use crate::measurement::{analytic_outcomes, Drive};
    use crate::state::build_entangled_state;

    #[test]
    fn vacuum_block_from_exact_input() {
        let s = build_entangled_state(0.6, 0.8, 0.0, 0.0, 0.0, 6).unwrap();
        let params = ReconstructionParams::new(6, 8, 0.7, 0.9);
        let n_max = tail_cutoff(6, 0.7);
        let dists: Vec<_> = (0..14)
            .map(|j| analytic_outcomes(&s, Drive::on_grid(0.7, j, 14), 0.9, n_max).unwrap())
            .collect();
        let rho = reconstruct_block(&dists, Spin::Up, &params).unwrap();
        let target = CyclotronDensityMatrix::pure(&FockVector::basis(6, 0));
        assert!(rho.max_abs_diff(&target) < 1e-10);
    }

    #[test]
    fn empty_branch_is_reported() {
        let s = build_entangled_state(1.0, 0.0, 0.0, 0.5, 0.0, 4).unwrap();
        let params = ReconstructionParams::new(4, 6, 0.7, 1.0);
        let dists: Vec<_> = (0..10)
            .map(|j| analytic_outcomes(&s, Drive::on_grid(0.7, j, 10), 1.0, 20).unwrap())
            .collect();
        assert_eq!(
            reconstruct_block(&dists, Spin::Down, &params),
            Err(Error::EmptyBranch(Spin::Down))
        );

        let report = reconstruct(&dists, &[], &params).unwrap();
        assert!(report
            .diagnostics
            .warnings
            .contains(&Warning::EmptyBranch(Spin::Down)));
        assert_eq!(report.rho22, CyclotronDensityMatrix::zeros(4));
        assert_eq!(report.theta_est, None);
        assert_eq!(report.c1_est, 1.0);
        let want = crate::fock::coherent_amplitudes(Complex::new(0.5, 0.0), 4);
        assert!(
            report
                .rho11
                .max_abs_diff(&CyclotronDensityMatrix::pure(&want))
                < 1e-10
        );
    }
}
