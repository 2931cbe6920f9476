//! Number-basis kernel: Laguerre polynomials, displacement-operator matrix
//! elements and coherent-state amplitudes.
//!
//! The Gaussian factor of `<m|D(alpha)|n>` is `exp(-|alpha|^2 / 2)`, so the
//! columns of the displacement matrix are unit vectors. Some printed forms of
//! the element carry `exp(-|alpha|^2)`; that form is not unitary and is only
//! consistent with the usual photon-counting probability if it is read as the
//! Gaussian factor of a *product* of two elements.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::{Complex, Error, Result};

/// Associated Laguerre polynomial `L_nu^k(x)` by upward recurrence in `nu`.
///
/// `(j + 1) L_{j+1} = (2j + 1 + k - x) L_j - (j + k) L_{j-1}`
pub fn assoc_laguerre(nu: usize, k: usize, x: f64) -> f64 {
    let kf = k as f64;
    let mut prev = 1.0;
    if nu == 0 {
        return prev;
    }
    let mut cur = 1.0 + kf - x;
    for j in 1..nu {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * cur - (jf + kf) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `ln(hi! / lo!)` for `lo <= hi`.
pub(crate) fn ln_factorial_ratio(lo: usize, hi: usize) -> f64 {
    ((lo + 1)..=hi).map(|i| libm::log(i as f64)).sum()
}

/// `ln n!`
pub(crate) fn ln_factorial(n: usize) -> f64 {
    ln_factorial_ratio(0, n)
}

/// `<m|D(alpha)|n>` without a cutoff check.
pub(crate) fn displacement_unchecked(m: usize, n: usize, alpha: Complex) -> Complex {
    let x = alpha.norm_sqr();
    let (mu, nu) = if m >= n { (m, n) } else { (n, m) };
    let d = mu - nu;
    if x == 0.0 {
        return if d == 0 {
            Complex::new(1.0, 0.0)
        } else {
            Complex::new(0.0, 0.0)
        };
    }
    // sqrt(nu!/mu!) |alpha|^(mu-nu) exp(-|alpha|^2/2), in log space
    let ln_mod = -0.5 * ln_factorial_ratio(nu, mu) + d as f64 * 0.5 * libm::log(x) - 0.5 * x;
    let magnitude = libm::exp(ln_mod) * assoc_laguerre(nu, d, x);
    // m >= n carries the phase of alpha^(m-n), m < n that of (-alpha*)^(n-m)
    let phi = alpha.arg();
    if m >= n {
        Complex::from_polar(magnitude, d as f64 * phi)
    } else {
        let sign = if d % 2 == 1 { -1.0 } else { 1.0 };
        Complex::from_polar(sign * magnitude, -(d as f64) * phi)
    }
}

/// Matrix element `<m|D(alpha)|n>` of the displacement operator.
///
/// Both indices must lie within `cutoff`.
pub fn displacement_element(m: usize, n: usize, alpha: Complex, cutoff: usize) -> Result<Complex> {
    if m > cutoff || n > cutoff {
        return Err(Error::IndexOutOfRange { m, n, cutoff });
    }
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(Error::NonFinite("alpha"));
    }
    Ok(displacement_unchecked(m, n, alpha))
}

/// Rectangular block `D[m][n] = <m|D(alpha)|n>` for `m <= rows_cutoff`,
/// `n <= cols_cutoff`.
pub fn displacement_matrix(
    rows_cutoff: usize,
    cols_cutoff: usize,
    alpha: Complex,
) -> DMatrix<Complex> {
    DMatrix::from_fn(rows_cutoff + 1, cols_cutoff + 1, |m, n| {
        displacement_unchecked(m, n, alpha)
    })
}

/// Extra levels added to the margin for any nonzero drive. The `6|alpha|` term
/// alone leaves about 1e-5 of weight behind at small `|alpha|` and cutoff.
pub const TAIL_PAD: usize = 10;

/// Number-basis range that keeps the displaced image of a state with support
/// `0..=cutoff` to negligible tail weight:
/// `cutoff + ceil(6|alpha|(sqrt(cutoff) + |alpha|)) + TAIL_PAD`, and just
/// `cutoff` without a drive.
pub fn tail_cutoff(cutoff: usize, alpha_mod: f64) -> usize {
    let a = libm::fabs(alpha_mod);
    if a == 0.0 {
        return cutoff;
    }
    cutoff + libm::ceil(6.0 * a * (libm::sqrt(cutoff as f64) + a)) as usize + TAIL_PAD
}

/// Truncated amplitude vector of a cyclotron pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    amplitudes: Vec<Complex>,
    truncation_mass: f64,
}

impl FockVector {
    /// Wraps amplitudes; the truncation mass is `1 - sum |a_n|^2`.
    ///
    /// Fails if the amplitudes carry more than unit norm or are not finite.
    pub fn new(amplitudes: Vec<Complex>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::NonFinite("empty amplitude vector"));
        }
        if amplitudes
            .iter()
            .any(|a| !(a.re.is_finite() && a.im.is_finite()))
        {
            return Err(Error::NonFinite("amplitude"));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm > 1.0 + 1e-12 {
            return Err(Error::Normalization(norm));
        }
        Ok(Self {
            amplitudes,
            truncation_mass: 1.0 - norm,
        })
    }

    /// Rescales to unit norm within the basis (truncation mass becomes zero).
    pub fn normalized(amplitudes: Vec<Complex>) -> Result<Self> {
        let norm = libm::sqrt(amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NonFinite("zero-norm amplitude vector"));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn basis(cutoff: usize, n: usize) -> Self {
        let mut amplitudes = alloc::vec![Complex::new(0.0, 0.0); cutoff + 1];
        amplitudes[n.min(cutoff)] = Complex::new(1.0, 0.0);
        Self {
            amplitudes,
            truncation_mass: 0.0,
        }
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    /// Probability weight lost by cutting the basis at `cutoff()`.
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Copy multiplied by a global phase `e^{i phase}`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let f = Complex::from_polar(1.0, phase);
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * f).collect(),
            truncation_mass: self.truncation_mass,
        }
    }
}

/// Coherent-state amplitudes `exp(-|gamma|^2/2) gamma^n / sqrt(n!)`, `n <= cutoff`.
///
/// The vector is truncated, not renormalized; the lost weight is reported by
/// [`FockVector::truncation_mass`].
pub fn coherent_amplitudes(gamma: Complex, cutoff: usize) -> FockVector {
    let mut amplitudes = Vec::with_capacity(cutoff + 1);
    let mut a = Complex::new(libm::exp(-0.5 * gamma.norm_sqr()), 0.0);
    amplitudes.push(a);
    for n in 1..=cutoff {
        a = a * gamma / libm::sqrt(n as f64);
        amplitudes.push(a);
    }
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    FockVector {
        amplitudes,
        truncation_mass: (1.0 - norm).max(0.0),
    }
}
