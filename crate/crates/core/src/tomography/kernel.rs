use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::fock::{displacement_matrix, tail_cutoff};
use crate::linalg::left_pseudoinverse;
use crate::measurement::{binomial_weight, check_eta};
use crate::{Complex, Error, Result};

/// Binomial weights below this are dropped from the efficiency-corrected kernel.
pub const BINOMIAL_FLOOR: f64 = 1e-14;

/// Default bound on `cond(G^T G)` before a band is refused.
pub const DEFAULT_COND_LIMIT: f64 = 1e10;

/// Linear map from band `s` of the density matrix,
/// `<m+s|rho|m>` for `m = 0..=nc-s`, to the `s`-th phase Fourier coefficient
/// of the measured distribution at `k = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    pub g: DMatrix<f64>,
    pub s: usize,
    pub alpha_mod: f64,
    pub eta: f64,
    pub n: usize,
    pub nc: usize,
}

/// Builds the band-`s` kernel.
///
/// With a perfect detector, `G[k][m] = <m+s|D|k> <m|D|k>` at real `|alpha|`
/// (the phase factors of the printed form reduce to signs, which the
/// displacement elements carry). For `eta < 1` the rows are mixed by the
/// binomial loss matrix, `sum_{n >= k} B_{k,n}(eta) G[n][m]`, summed up to
/// `max(n, tail_cutoff(nc, |alpha|))` and skipping weights below
/// [`BINOMIAL_FLOOR`].
pub fn build_kernel(
    s: usize,
    alpha_mod: f64,
    eta: f64,
    n: usize,
    nc: usize,
) -> Result<KernelMatrix> {
    if s > nc {
        return Err(Error::BandOutOfRange { s, nc });
    }
    if n < nc {
        return Err(Error::RangeBelowReconstruction { n, nc });
    }
    check_eta(eta)?;
    if !alpha_mod.is_finite() || alpha_mod < 0.0 {
        return Err(Error::NonFinite("alpha_mod"));
    }
    let n_hi = n.max(tail_cutoff(nc, alpha_mod));
    let d = displacement_matrix(nc, n_hi, Complex::new(alpha_mod, 0.0));
    let cols = nc + 1 - s;
    let ideal = DMatrix::from_fn(n_hi + 1, cols, |row, m| {
        (d[(m + s, row)].conj() * d[(m, row)]).re
    });
    let g = if eta == 1.0 {
        ideal.rows(0, n + 1).into_owned()
    } else {
        let mut g = DMatrix::<f64>::zeros(n + 1, cols);
        for k in 0..=n {
            for row in k..=n_hi {
                let b = binomial_weight(row, k, eta);
                if b < BINOMIAL_FLOOR {
                    continue;
                }
                for m in 0..cols {
                    g[(k, m)] += b * ideal[(row, m)];
                }
            }
        }
        g
    };
    Ok(KernelMatrix {
        g,
        s,
        alpha_mod,
        eta,
        n,
        nc,
    })
}

/// Left inverse `M = (G^T G)^{-1} G^T` of one band kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoInverse {
    pub m: DMatrix<f64>,
    pub s: usize,
    /// `cond(G^T G)`
    pub condition: f64,
}

impl PseudoInverse {
    /// `max |M G - I|`
    pub fn completeness_residual(&self, kernel: &KernelMatrix) -> f64 {
        let prod = &self.m * &kernel.g;
        let eye = DMatrix::<f64>::identity(prod.nrows(), prod.ncols());
        (prod - eye).amax()
    }
}

/// Inverts a band kernel, refusing when `cond(G^T G)` exceeds `cond_limit`
/// (rank deficiency reports an infinite condition number).
pub fn pseudo_invert(kernel: &KernelMatrix, cond_limit: f64) -> Result<PseudoInverse> {
    if kernel.g.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("kernel entry"));
    }
    let (m, condition) = left_pseudoinverse(&kernel.g);
    if !(condition <= cond_limit) {
        return Err(Error::IllConditioned {
            s: kernel.s,
            cond: condition,
            limit: cond_limit,
        });
    }
    Ok(PseudoInverse {
        m,
        s: kernel.s,
        condition,
    })
}

/// Kernels and their inverses for every band `s = 0..=nc`.
#[derive(Debug, Clone)]
pub struct KernelSet {
    pub kernels: Vec<KernelMatrix>,
    pub inverses: Vec<PseudoInverse>,
}

impl KernelSet {
    pub fn new(alpha_mod: f64, eta: f64, n: usize, nc: usize, cond_limit: f64) -> Result<Self> {
        let mut kernels = Vec::with_capacity(nc + 1);
        let mut inverses = Vec::with_capacity(nc + 1);
        for s in 0..=nc {
            let k = build_kernel(s, alpha_mod, eta, n, nc)?;
            inverses.push(pseudo_invert(&k, cond_limit)?);
            kernels.push(k);
        }
        Ok(Self { kernels, inverses })
    }

    pub fn condition_numbers(&self) -> Vec<f64> {
        self.inverses.iter().map(|p| p.condition).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn undisplaced_perfect_detector_is_identity() {
        let k = build_kernel(0, 0.0, 1.0, 6, 4).unwrap();
        for r in 0..=6 {
            for c in 0..=4 {
                assert_eq!(k.g[(r, c)], if r == c { 1.0 } else { 0.0 });
            }
        }
        let p = pseudo_invert(&k, DEFAULT_COND_LIMIT).unwrap();
        assert!((p.m.columns(0, 5) - DMatrix::<f64>::identity(5, 5)).amax() < 1e-15);
    }

    #[test]
    fn vacuum_entry_at_point_seven() {
        let k = build_kernel(0, 0.7, 1.0, 12, 8).unwrap();
        assert_abs_diff_eq!(k.g[(0, 0)], 0.612_626_394_184_416_1, epsilon = 1e-14);
    }

    #[test]
    fn completeness_at_preset_settings() {
        let k = build_kernel(2, 0.7, 0.9, 12, 10).unwrap();
        let p = pseudo_invert(&k, DEFAULT_COND_LIMIT).unwrap();
        assert_eq!(p.m.shape(), (9, 13));
        assert!(p.completeness_residual(&k) < 1e-10);
    }

    #[test]
    fn duplicated_rows_are_refused() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let k = KernelMatrix {
            g,
            s: 3,
            alpha_mod: 0.5,
            eta: 1.0,
            n: 2,
            nc: 4,
        };
        assert!(matches!(
            pseudo_invert(&k, DEFAULT_COND_LIMIT),
            Err(Error::IllConditioned { s: 3, .. })
        ));
    }

    #[test]
    fn rejects_bad_band_and_range() {
        assert!(matches!(
            build_kernel(5, 0.7, 1.0, 6, 4),
            Err(Error::BandOutOfRange { .. })
        ));
        assert!(matches!(
            build_kernel(0, 0.7, 1.0, 3, 4),
            Err(Error::RangeBelowReconstruction { .. })
        ));
        assert!(matches!(
            build_kernel(0, 0.7, 0.0, 6, 4),
            Err(Error::EfficiencyOutOfRange(_))
        ));
    }
}
