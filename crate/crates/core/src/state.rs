//! The entangled cyclotron/spin state, its density-matrix blocks and resonant
//! spin pulses.

use alloc::vec::Vec;
use core::fmt;

use nalgebra::DMatrix;

use crate::fock::{coherent_amplitudes, FockVector};
use crate::linalg;
use crate::{Complex, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn as_str(self) -> &'static str {
        match self {
            Spin::Up => "up",
            Spin::Down => "down",
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `c1 |psi1>|up> + c2 e^{i theta} |psi2>|down>` with `c1, c2 >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledState {
    c1: f64,
    c2_mod: f64,
    theta: f64,
    psi1: FockVector,
    psi2: FockVector,
}

impl EntangledState {
    /// `c1^2 + c2^2` must be 1 within `1e-9`; the coefficients are then
    /// rescaled onto the unit circle exactly.
    pub fn new(
        c1: f64,
        c2_mod: f64,
        theta: f64,
        psi1: FockVector,
        psi2: FockVector,
    ) -> Result<Self> {
        for c in [c1, c2_mod] {
            if !c.is_finite() || c < 0.0 {
                return Err(Error::InvalidCoefficient(c));
            }
        }
        if !theta.is_finite() {
            return Err(Error::NonFinite("theta"));
        }
        let norm = c1 * c1 + c2_mod * c2_mod;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::Normalization(norm));
        }
        if psi1.cutoff() != psi2.cutoff() {
            return Err(Error::CutoffMismatch {
                left: psi1.cutoff(),
                right: psi2.cutoff(),
            });
        }
        let scale = libm::sqrt(norm);
        Ok(Self {
            c1: c1 / scale,
            c2_mod: c2_mod / scale,
            theta,
            psi1,
            psi2,
        })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2_mod(&self) -> f64 {
        self.c2_mod
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn psi1(&self) -> &FockVector {
        &self.psi1
    }

    pub fn psi2(&self) -> &FockVector {
        &self.psi2
    }

    pub fn cutoff(&self) -> usize {
        self.psi1.cutoff()
    }

    pub fn branch_weight(&self, spin: Spin) -> f64 {
        match spin {
            Spin::Up => self.c1 * self.c1,
            Spin::Down => self.c2_mod * self.c2_mod,
        }
    }

    pub fn branch_state(&self, spin: Spin) -> &FockVector {
        match spin {
            Spin::Up => &self.psi1,
            Spin::Down => &self.psi2,
        }
    }

    /// Unnormalized spinor components `(c1 psi1, c2 e^{i theta} psi2)`.
    pub fn spinor(&self) -> (Vec<Complex>, Vec<Complex>) {
        let c2 = Complex::from_polar(self.c2_mod, self.theta);
        let up = self.psi1.amplitudes().iter().map(|a| a * self.c1).collect();
        let down = self.psi2.amplitudes().iter().map(|b| b * c2).collect();
        (up, down)
    }

    /// Rebuilds a state from spinor components, normalizing the full spinor.
    ///
    /// The phase of each branch is carried by its cyclotron vector, so the
    /// result has `theta = 0`. An empty branch keeps the zero vector.
    pub fn from_spinor(up: Vec<Complex>, down: Vec<Complex>) -> Result<Self> {
        if up.len() != down.len() {
            return Err(Error::CutoffMismatch {
                left: up.len().saturating_sub(1),
                right: down.len().saturating_sub(1),
            });
        }
        let nu: f64 = up.iter().map(|a| a.norm_sqr()).sum();
        let nd: f64 = down.iter().map(|a| a.norm_sqr()).sum();
        let total = nu + nd;
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::NonFinite("zero-norm spinor"));
        }
        let branch = |v: Vec<Complex>, n: f64| -> Result<FockVector> {
            if n > 0.0 {
                FockVector::normalized(v)
            } else {
                FockVector::new(v)
            }
        };
        let c1 = libm::sqrt(nu / total);
        let c2 = libm::sqrt(nd / total);
        Ok(Self {
            c1,
            c2_mod: c2,
            theta: 0.0,
            psi1: branch(up, nu)?,
            psi2: branch(down, nd)?,
        })
    }
}

/// State `c1 |gamma>|up> + c2 e^{i theta} |gamma e^{i xi}>|down>` with both
/// coherent states truncated at `cutoff`.
pub fn build_entangled_state(
    c1: f64,
    c2_mod: f64,
    theta: f64,
    gamma: f64,
    xi: f64,
    cutoff: usize,
) -> Result<EntangledState> {
    if !gamma.is_finite() || !xi.is_finite() {
        return Err(Error::NonFinite("gamma/xi"));
    }
    let psi1 = coherent_amplitudes(Complex::new(gamma, 0.0), cutoff);
    let psi2 = coherent_amplitudes(Complex::from_polar(gamma, xi), cutoff);
    EntangledState::new(c1, c2_mod, theta, psi1, psi2)
}

/// `(P(up), P(down)) = (c1^2, c2^2)`.
pub fn spin_probabilities(state: &EntangledState) -> (f64, f64) {
    (
        state.branch_weight(Spin::Up),
        state.branch_weight(Spin::Down),
    )
}

/// `<psi1|psi2> = sum_n conj(a_n) b_n`.
pub fn overlap(psi1: &FockVector, psi2: &FockVector) -> Result<Complex> {
    if psi1.cutoff() != psi2.cutoff() {
        return Err(Error::CutoffMismatch {
            left: psi1.cutoff(),
            right: psi2.cutoff(),
        });
    }
    Ok(psi1
        .amplitudes()
        .iter()
        .zip(psi2.amplitudes())
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Net action of a resonant drive pulse on the spin:
/// `cos(chi/2) I - i sin(chi/2) (cos(phi_d) sigma_x + sin(phi_d) sigma_y)`.
///
/// `chi = pi/2`, `phi_d = 0` is the quarter-period pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinRotation {
    pub chi: f64,
    pub phi_d: f64,
}

impl SpinRotation {
    pub fn new(chi: f64, phi_d: f64) -> Self {
        Self { chi, phi_d }
    }

    /// `[[u00, u01], [u10, u11]]` acting on `(up, down)`.
    pub fn matrix(&self) -> [[Complex; 2]; 2] {
        let (s, c) = libm::sincos(0.5 * self.chi);
        let i_sin = Complex::new(0.0, -s);
        [
            [
                Complex::new(c, 0.0),
                i_sin * Complex::from_polar(1.0, -self.phi_d),
            ],
            [
                i_sin * Complex::from_polar(1.0, self.phi_d),
                Complex::new(c, 0.0),
            ],
        ]
    }
}

/// Applies a spin pulse; the cyclotron vectors are untouched.
pub fn apply_spin_rotation(state: &EntangledState, rot: SpinRotation) -> Result<EntangledState> {
    if !(rot.chi.is_finite() && rot.phi_d.is_finite()) {
        return Err(Error::NonFinite("spin rotation"));
    }
    let [[u00, u01], [u10, u11]] = rot.matrix();
    let (up, down) = state.spinor();
    let new_up = up
        .iter()
        .zip(&down)
        .map(|(u, d)| u00 * u + u01 * d)
        .collect();
    let new_down = up
        .iter()
        .zip(&down)
        .map(|(u, d)| u10 * u + u11 * d)
        .collect();
    EntangledState::from_spinor(new_up, new_down)
}

/// `(N+1) x (N+1)` block of the total density matrix in the number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclotronDensityMatrix {
    entries: DMatrix<Complex>,
}

impl CyclotronDensityMatrix {
    pub fn from_matrix(entries: DMatrix<Complex>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        if entries
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite("density matrix entry"));
        }
        Ok(Self { entries })
    }

    /// `|a><b|`.
    pub fn outer(a: &FockVector, b: &FockVector) -> Result<Self> {
        if a.cutoff() != b.cutoff() {
            return Err(Error::CutoffMismatch {
                left: a.cutoff(),
                right: b.cutoff(),
            });
        }
        let n = a.cutoff() + 1;
        let (aa, bb) = (a.amplitudes(), b.amplitudes());
        Ok(Self {
            entries: DMatrix::from_fn(n, n, |i, j| aa[i] * bb[j].conj()),
        })
    }

    pub fn pure(psi: &FockVector) -> Self {
        Self::outer(psi, psi).expect("equal cutoffs")
    }

    /// Matrix with entry `(m, n) = f(m, n)` for `m, n <= cutoff`.
    pub fn from_fn(cutoff: usize, f: impl FnMut(usize, usize) -> Complex) -> Result<Self> {
        Self::from_matrix(DMatrix::from_fn(cutoff + 1, cutoff + 1, f))
    }

    pub fn zeros(cutoff: usize) -> Self {
        Self {
            entries: DMatrix::zeros(cutoff + 1, cutoff + 1),
        }
    }

    pub fn cutoff(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn entries(&self) -> &DMatrix<Complex> {
        &self.entries
    }

    pub fn get(&self, m: usize, n: usize) -> Complex {
        self.entries[(m, n)]
    }

    pub fn trace(&self) -> Complex {
        self.entries.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            entries: self.entries.adjoint(),
        }
    }

    pub fn hermitian_deviation(&self) -> f64 {
        linalg::hermitian_deviation(&self.entries)
    }

    /// Eigenvalues of the Hermitian part, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.entries)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.entries.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Largest `|self - other|` entry over the common leading block.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.entries.nrows().min(other.entries.nrows());
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[(i, j)] - other.entries[(i, j)]).norm());
            }
        }
        worst
    }

    /// Mean `|self - other|` over the common leading block.
    pub fn mean_abs_diff(&self, other: &Self) -> f64 {
        let n = self.entries.nrows().min(other.entries.nrows());
        let mut total = 0.0;
        for i in 0..n {
            for j in 0..n {
                total += (self.entries[(i, j)] - other.entries[(i, j)]).norm();
            }
        }
        total / (n * n) as f64
    }

    pub fn project_psd(&self) -> Self {
        Self {
            entries: linalg::project_psd(&self.entries),
        }
    }
}

/// Normalized branch projection `|psi_i><psi_i|`; the weight `|c_i|^2` is not
/// folded in. A branch with zero weight carries no information and is an error.
pub fn projected_density(state: &EntangledState, spin: Spin) -> Result<CyclotronDensityMatrix> {
    if state.branch_weight(spin) == 0.0 {
        return Err(Error::EmptyBranch(spin));
    }
    Ok(CyclotronDensityMatrix::pure(state.branch_state(spin)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use core::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn fig1() -> EntangledState {
        build_entangled_state(0.5, 3f64.sqrt() / 2.0, PI, 1.0, PI, 12).unwrap()
    }

    fn fig3() -> EntangledState {
        build_entangled_state(SQRT_2 / 2.0, SQRT_2 / 2.0, 0.0, 1.5, PI, 16).unwrap()
    }

    #[test]
    fn builds_preset_states() {
        let s = fig1();
        assert_eq!(s.cutoff(), 12);
        let (pu, pd) = spin_probabilities(&s);
        assert_abs_diff_eq!(pu, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(pd, 0.75, epsilon = 1e-15);

        let (pu, pd) = spin_probabilities(&fig3());
        assert_abs_diff_eq!(pu, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(pd, 0.5, epsilon = 1e-15);

        let product = build_entangled_state(1.0, 0.0, 0.0, 0.0, 0.0, 4).unwrap();
        assert_eq!(spin_probabilities(&product), (1.0, 0.0));
    }

    #[test]
    fn rejects_unnormalized_coefficients() {
        assert!(matches!(
            build_entangled_state(0.5, 0.5, 0.0, 1.0, 0.0, 4),
            Err(Error::Normalization(_))
        ));
        assert!(matches!(
            build_entangled_state(-0.6, 0.8, 0.0, 1.0, 0.0, 4),
            Err(Error::InvalidCoefficient(_))
        ));
    }

    #[test]
    fn projected_density_examples() {
        let rho = projected_density(&fig1(), Spin::Up).unwrap();
        let target = coherent_amplitudes(Complex::new(1.0, 0.0), 12);
        assert!(rho.max_abs_diff(&CyclotronDensityMatrix::pure(&target)) < 1e-15);

        let rho = projected_density(&fig3(), Spin::Down).unwrap();
        let target = coherent_amplitudes(Complex::new(-1.5, 0.0), 16);
        assert!(rho.max_abs_diff(&CyclotronDensityMatrix::pure(&target)) < 1e-14);

        let product = build_entangled_state(1.0, 0.0, 0.0, 0.0, 0.0, 4).unwrap();
        assert_eq!(
            projected_density(&product, Spin::Down),
            Err(Error::EmptyBranch(Spin::Down))
        );
    }

    #[test]
    fn projected_density_is_rank_one_with_unit_trace() {
        let s = fig3();
        for spin in Spin::BOTH {
            let rho = projected_density(&s, spin).unwrap();
            let ev = rho.eigenvalues();
            assert!(ev[1].abs() < 1e-10);
            assert_abs_diff_eq!(
                rho.trace().re,
                1.0,
                epsilon = s.branch_state(spin).truncation_mass() + 1e-14
            );
            assert!(rho.hermitian_deviation() < 1e-15);
        }
    }

    #[test]
    fn overlap_examples() {
        let one = coherent_amplitudes(Complex::new(1.0, 0.0), 30);
        let self_overlap = overlap(&one, &one).unwrap();
        assert_abs_diff_eq!(
            self_overlap.re,
            1.0,
            epsilon = one.truncation_mass() + 1e-15
        );

        let minus = coherent_amplitudes(Complex::new(-1.0, 0.0), 30);
        let z = overlap(&one, &minus).unwrap();
        assert_abs_diff_eq!(z.norm(), 0.135_335_283_236_612_7, epsilon = 1e-14);
        assert_abs_diff_eq!(z.arg(), 0.0, epsilon = 1e-14);

        let i = coherent_amplitudes(Complex::new(0.0, 1.0), 30);
        let z = overlap(&one, &i).unwrap();
        assert_abs_diff_eq!(z.norm(), 0.367_879_441_171_442_3, epsilon = 1e-14);
        assert_abs_diff_eq!(z.arg(), 1.0, epsilon = 1e-13);

        let short = coherent_amplitudes(Complex::new(1.0, 0.0), 10);
        assert!(matches!(
            overlap(&one, &short),
            Err(Error::CutoffMismatch { .. })
        ));
    }

    #[test]
    fn zero_rotation_is_identity() {
        let s = build_entangled_state(0.5, 3f64.sqrt() / 2.0, PI, 1.0, PI, 30).unwrap();
        let r = apply_spin_rotation(&s, SpinRotation::new(0.0, 0.3)).unwrap();
        let (u0, d0) = s.spinor();
        let (u1, d1) = r.spinor();
        for (a, b) in u0.iter().chain(&d0).zip(u1.iter().chain(&d1)) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn quarter_pulse_matches_closed_form() {
        // r = e^{-2}, beta = 0, sin(theta + beta) = sin(pi) = 0
        let s = build_entangled_state(0.5, 3f64.sqrt() / 2.0, PI, 1.0, PI, 30).unwrap();
        let r = apply_spin_rotation(&s, SpinRotation::new(FRAC_PI_2, 0.0)).unwrap();
        assert_abs_diff_eq!(spin_probabilities(&r).0, 0.5, epsilon = 1e-12);

        let z = overlap(s.psi1(), s.psi2()).unwrap();
        let closed =
            0.5 * (1.0 + 2.0 * z.norm() * 0.5 * (3f64.sqrt() / 2.0) * (PI + z.arg()).sin());
        assert_abs_diff_eq!(spin_probabilities(&r).0, closed, epsilon = 1e-12);
    }

    #[test]
    fn quarter_pulse_spinor_layout() {
        let s = build_entangled_state(0.6, 0.8, 0.4, 0.7, 1.1, 30).unwrap();
        let r = apply_spin_rotation(&s, SpinRotation::new(FRAC_PI_2, 0.0)).unwrap();
        let (u, d) = s.spinor();
        let (ru, rd) = r.spinor();
        let minus_i = Complex::new(0.0, -1.0);
        for n in 0..u.len() {
            let up = (u[n] + minus_i * d[n]) / SQRT_2;
            let down = (minus_i * u[n] + d[n]) / SQRT_2;
            assert!((ru[n] - up).norm() < 1e-12);
            assert!((rd[n] - down).norm() < 1e-12);
        }
    }
}
