//! Phase-swept displacement tomography of an entangled cyclotron/spin state.
//!
//! An electron in a Penning trap is prepared in
//! `c1 |psi1>|up> + c2 e^{i theta} |psi2>|down>`. Each run displaces the
//! cyclotron oscillator by `|alpha| e^{i phi}` and then measures the spin and
//! the cyclotron excitation number jointly. Sweeping `phi` and taking Fourier
//! coefficients of the measured distributions turns every superdiagonal band
//! of the cyclotron density matrix into a small linear least-squares problem.
//!
//! The crate is `no_std` (with `alloc`); file formats, the CLI and parallel
//! fan-out live in the `pentomo` companion crate.
//!
//! Modules, bottom-up:
//!
//! * [`fock`]: Laguerre polynomials, displacement-operator matrix elements and
//!   coherent-state amplitudes in a truncated number basis.
//! * [`state`]: the entangled state, its density-matrix blocks and spin pulses.
//! * [`measurement`]: analytic outcome distributions, detector efficiency and
//!   seeded Monte-Carlo sampling.
//! * [`tomography`]: kernel matrices, pseudoinverses, block reconstruction,
//!   amplitude extraction and spin-phase recovery.
//! * [`wigner`]: the Wigner-function matrix on a phase-space grid.

#![cfg_attr(not(test), no_std)]
// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod fock;
pub mod linalg;
pub mod measurement;
pub mod state;
pub mod tomography;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{assoc_laguerre, coherent_amplitudes, displacement_element, FockVector};
pub use measurement::{
    analytic_outcomes, displaced_distribution, efficiency_convolve, empirical_distributions,
    sample_events, sample_pulse, Drive, MeasurementRecord, OutcomeDistribution, PulseRecord,
    RngSpec,
};
pub use state::{
    apply_spin_rotation, build_entangled_state, overlap, projected_density, spin_probabilities,
    CyclotronDensityMatrix, EntangledState, Spin, SpinRotation,
};
pub use tomography::{ReconstructionParams, ReconstructionReport};

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;
