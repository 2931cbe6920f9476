use alloc::vec::Vec;

use crate::fock::FockVector;
use crate::state::{overlap, CyclotronDensityMatrix};
use crate::{Complex, Error, Result};

/// Largest diagonal element below which no amplitude can be extracted.
pub const DIAGONAL_THRESHOLD: f64 = 1e-6;

/// Overlap modulus below which the quotient form of the coherence block is
/// ill-posed.
pub const OVERLAP_THRESHOLD: f64 = 1e-6;

/// Diagonal entries within this relative distance of the maximum count as tied;
/// the lowest tied index wins.
const ANCHOR_TIE: f64 = 1e-9;

/// Index of the largest diagonal element (lowest index among near-ties).
pub fn anchor_index(rho: &CyclotronDensityMatrix) -> usize {
    let diag: Vec<f64> = (0..=rho.cutoff()).map(|n| rho.get(n, n).re).collect();
    let max = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    diag.iter()
        .position(|&d| d >= max - ANCHOR_TIE * libm::fabs(max))
        .unwrap_or(0)
}

/// Pure-state amplitudes from a rank-1 block.
///
/// The anchor `a = argmax rho_nn` gets the real amplitude `sqrt(rho_aa)`, and
/// every other amplitude is read off the anchor column,
/// `a_n = rho_{n,a} / a_a`. For an exact rank-1 block this equals the
/// consecutive-ratio chain but never divides by a vanishing amplitude. A noisy
/// block whose extracted norm exceeds one is scaled back to unit norm.
pub fn extract_amplitudes(rho: &CyclotronDensityMatrix) -> Result<FockVector> {
    let anchor = anchor_index(rho);
    let top = rho.get(anchor, anchor).re;
    if !(top >= DIAGONAL_THRESHOLD) {
        return Err(Error::VanishingDiagonal(top));
    }
    let a0 = libm::sqrt(top);
    let amps: Vec<Complex> = (0..=rho.cutoff())
        .map(|n| {
            if n == anchor {
                Complex::new(a0, 0.0)
            } else {
                rho.get(n, anchor) / a0
            }
        })
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm > 1.0 {
        FockVector::normalized(amps)
    } else {
        FockVector::new(amps)
    }
}

/// Off-diagonal block `|psi1><psi2|` under the purity assumption.
#[derive(Debug, Clone, PartialEq)]
pub struct OffDiagonal {
    pub rho12: CyclotronDensityMatrix,
    pub psi1: FockVector,
    pub psi2: FockVector,
    /// `<psi1|psi2>`
    pub overlap: Complex,
    /// `max |rho11 rho22 / <psi1|psi2> - rho12|`; `None` when the overlap is
    /// below [`OVERLAP_THRESHOLD`].
    pub quotient_deviation: Option<f64>,
}

impl OffDiagonal {
    pub fn quotient_ill_posed(&self) -> bool {
        self.quotient_deviation.is_none()
    }
}

/// Builds `rho12 = |psi1><psi2|` from the amplitudes of both diagonal blocks
/// and cross-checks it against `rho11 rho22 / <psi1|psi2>`.
pub fn reconstruct_offdiagonal(
    rho11: &CyclotronDensityMatrix,
    rho22: &CyclotronDensityMatrix,
) -> Result<OffDiagonal> {
    if rho11.cutoff() != rho22.cutoff() {
        return Err(Error::CutoffMismatch {
            left: rho11.cutoff(),
            right: rho22.cutoff(),
        });
    }
    let psi1 = extract_amplitudes(rho11)?;
    let psi2 = extract_amplitudes(rho22)?;
    let z = overlap(&psi1, &psi2)?;
    let rho12 = CyclotronDensityMatrix::outer(&psi1, &psi2)?;
    let quotient_deviation = if z.norm() < OVERLAP_THRESHOLD {
        None
    } else {
        let q = rho11.entries() * rho22.entries() / z;
        Some(
            (q - rho12.entries())
                .iter()
                .map(|d| d.norm())
                .fold(0.0, f64::max),
        )
    };
    Ok(OffDiagonal {
        rho12,
        psi1,
        psi2,
        overlap: z,
        quotient_deviation,
    })
}

/// Reference amplitudes expressed in the anchor convention used by
/// [`extract_amplitudes`]: the global phase makes entry `anchor` real and
/// non-negative. Returns the vector and the removed phase.
pub fn anchor_gauge(psi: &FockVector, anchor: usize) -> (FockVector, f64) {
    let a = psi.amplitudes().get(anchor).copied().unwrap_or_default();
    let phase = if a.norm() > 0.0 { a.arg() } else { 0.0 };
    (psi.with_global_phase(-phase), phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::coherent_amplitudes;

    fn max_diff(a: &FockVector, b: &FockVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn coherent_state_round_trip() {
        let psi = coherent_amplitudes(Complex::new(1.0, 0.0), 12);
        let got = extract_amplitudes(&CyclotronDensityMatrix::pure(&psi)).unwrap();
        assert!(max_diff(&got, &psi) < 1e-15);

        let psi = coherent_amplitudes(Complex::new(-1.5, 0.0), 16);
        let rho = CyclotronDensityMatrix::pure(&psi);
        assert_eq!(anchor_index(&rho), 2);
        let got = extract_amplitudes(&rho).unwrap();
        assert!(max_diff(&got, &psi) < 1e-15);
        assert!(got.amplitudes()[1].re < 0.0 && got.amplitudes()[3].re < 0.0);
    }

    #[test]
    fn number_state_round_trip() {
        let e3 = FockVector::basis(6, 3);
        let got = extract_amplitudes(&CyclotronDensityMatrix::pure(&e3)).unwrap();
        assert_eq!(got, e3);
    }

    #[test]
    fn zero_block_is_refused() {
        assert!(matches!(
            extract_amplitudes(&CyclotronDensityMatrix::zeros(4)),
            Err(Error::VanishingDiagonal(_))
        ));
    }

    #[test]
    fn equal_branches_give_equal_blocks() {
        let psi = coherent_amplitudes(Complex::new(0.4, 0.9), 10);
        let rho = CyclotronDensityMatrix::pure(&psi);
        let off = reconstruct_offdiagonal(&rho, &rho).unwrap();
        assert!(off.rho12.max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn cat_coherence_block() {
        let p1 = coherent_amplitudes(Complex::new(1.0, 0.0), 12);
        let p2 = coherent_amplitudes(Complex::new(-1.0, 0.0), 12);
        let off = reconstruct_offdiagonal(
            &CyclotronDensityMatrix::pure(&p1),
            &CyclotronDensityMatrix::pure(&p2),
        )
        .unwrap();
        assert!((off.rho12.get(0, 0) - Complex::new(0.367_879_441_171_442_3, 0.0)).norm() < 1e-14);
        assert!(off.quotient_deviation.unwrap() < 1e-8);
    }

    #[test]
    fn orthogonal_branches_flag_the_quotient() {
        let off = reconstruct_offdiagonal(
            &CyclotronDensityMatrix::pure(&FockVector::basis(3, 0)),
            &CyclotronDensityMatrix::pure(&FockVector::basis(3, 2)),
        )
        .unwrap();
        assert!(off.quotient_ill_posed());
        assert_eq!(off.rho12.get(0, 2), Complex::new(1.0, 0.0));
    }

    #[test]
    fn gauge_fixes_anchor_phase() {
        let psi = coherent_amplitudes(Complex::new(0.0, 1.2), 8);
        let (g, phase) = anchor_gauge(&psi, 1);
        assert!((phase - core::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(g.amplitudes()[1].im.abs() < 1e-15 && g.amplitudes()[1].re > 0.0);
    }
}
