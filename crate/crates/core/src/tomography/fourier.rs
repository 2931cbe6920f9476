use alloc::vec::Vec;

use crate::measurement::OutcomeDistribution;
use crate::state::Spin;
use crate::{Complex, Error, Result};

/// Absolute tolerance on the drive phases of a uniform grid.
const PHASE_TOLERANCE: f64 = 1e-9;

/// `s`-th phase Fourier coefficient of the measured distribution, one value per
/// count `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierBand {
    pub s: usize,
    pub values: Vec<Complex>,
}

/// Checks a phase-swept measurement: at least `2 nc + 1` phases, phase `j` at
/// `2 pi j / K`, and a common `|alpha|`, `eta` and histogram length.
pub fn validate_phase_grid(dists: &[OutcomeDistribution], nc: usize) -> Result<()> {
    let k = dists.len();
    let required = 2 * nc + 1;
    if k < required {
        return Err(Error::TooFewPhases {
            required,
            got: k,
            nc,
        });
    }
    let first = &dists[0];
    for (j, d) in dists.iter().enumerate() {
        let expected = core::f64::consts::TAU * j as f64 / k as f64;
        let delta = libm::remainder(d.drive.phase - expected, core::f64::consts::TAU);
        if !(libm::fabs(delta) <= PHASE_TOLERANCE) {
            return Err(Error::NonUniformPhases {
                index: j,
                phase: d.drive.phase,
                expected,
            });
        }
        if d.drive.alpha_mod != first.drive.alpha_mod
            || d.eta != first.eta
            || d.up.len() != first.up.len()
            || d.down.len() != first.down.len()
        {
            return Err(Error::InconsistentPhases);
        }
    }
    Ok(())
}

/// `P^(s)(k) = (1/K) sum_j P(k, |alpha| e^{i phi_j}) e^{i s phi_j}`.
///
/// On `K >= 2 nc + 1` uniform phases this quadrature is exact, since the
/// integrand carries harmonics of order at most `nc + s <= 2 nc`.
pub fn fourier_coefficients(
    dists: &[OutcomeDistribution],
    spin: Spin,
    s: usize,
    nc: usize,
) -> Result<FourierBand> {
    if s > nc {
        return Err(Error::BandOutOfRange { s, nc });
    }
    validate_phase_grid(dists, nc)?;
    let len = dists[0].branch(spin).len();
    let mut values = alloc::vec![Complex::new(0.0, 0.0); len];
    let inv_k = 1.0 / dists.len() as f64;
    for d in dists {
        let w = Complex::from_polar(inv_k, s as f64 * d.drive.phase);
        for (v, &p) in values.iter_mut().zip(d.branch(spin)) {
            *v += w * p;
        }
    }
    Ok(FourierBand { s, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Drive;

    fn flat(k: usize, p: &[f64]) -> Vec<OutcomeDistribution> {
        (0..k)
            .map(|j| OutcomeDistribution {
                drive: Drive::on_grid(0.7, j, k),
                eta: 1.0,
                w_up: 1.0,
                w_down: 0.0,
                up: p.to_vec(),
                down: alloc::vec![0.0; p.len()],
            })
            .collect()
    }

    #[test]
    fn phase_independent_input() {
        let p = [0.5, 0.3, 0.2];
        let dists = flat(7, &p);
        let b1 = fourier_coefficients(&dists, Spin::Up, 1, 3).unwrap();
        assert!(b1.values.iter().all(|v| v.norm() < 1e-16));
        let b0 = fourier_coefficients(&dists, Spin::Up, 0, 3).unwrap();
        for (v, &x) in b0.values.iter().zip(&p) {
            assert!((v - Complex::new(x, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn too_few_phases_is_aliasing() {
        let dists = flat(6, &[1.0]);
        assert_eq!(
            fourier_coefficients(&dists, Spin::Up, 0, 3),
            Err(Error::TooFewPhases {
                required: 7,
                got: 6,
                nc: 3
            })
        );
    }

    #[test]
    fn shuffled_phases_are_rejected() {
        let mut dists = flat(7, &[1.0]);
        dists.swap(1, 2);
        assert!(matches!(
            fourier_coefficients(&dists, Spin::Up, 0, 3),
            Err(Error::NonUniformPhases { index: 1, .. })
        ));
    }
}
