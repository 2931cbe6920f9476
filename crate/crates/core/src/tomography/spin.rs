//! Recovery of `c1`, `|c2|` and the relative phase `theta`.
//!
//! After a resonant pulse `(chi, phi_d)` the spin-up probability is
//!
//! ```text
//! P(up) = cos^2(chi/2) c1^2 + sin^2(chi/2) c2^2 + sin(chi) c1 c2 r sin(theta + beta - phi_d)
//! ```
//!
//! with `r e^{i beta} = <psi1|psi2>`. A quarter pulse about `x` measures
//! `sin(theta + beta)`; one about `y` measures `cos(theta + beta)`. Fitting both
//! and taking `atan2` leaves no branch ambiguity.

use crate::state::SpinRotation;
use crate::{Error, Result};

/// Largest tolerated excess of a normalized sine/cosine estimate over 1.
pub const CONSISTENCY_TOLERANCE: f64 = 1.0;

/// Spin-up probability measured after one pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseObservation {
    pub rotation: SpinRotation,
    pub pbar_up: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinParameters {
    pub c1: f64,
    pub c2_mod: f64,
    /// Wrapped to `(-pi, pi]`.
    pub theta: f64,
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    let y = libm::remainder(x, TAU);
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// Expected spin-up probability after `rot` for the given parameters.
pub fn pulse_probability(
    c1: f64,
    c2_mod: f64,
    theta: f64,
    r: f64,
    beta: f64,
    rot: SpinRotation,
) -> f64 {
    let (s, c) = libm::sincos(0.5 * rot.chi);
    c * c * c1 * c1
        + s * s * c2_mod * c2_mod
        + libm::sin(rot.chi) * c1 * c2_mod * r * libm::sin(theta + beta - rot.phi_d)
}

/// Least-squares fit of `(sin(theta + beta), cos(theta + beta))` from the
/// pulse data, followed by `theta = atan2(sin, cos) - beta`.
pub fn recover_spin_parameters(
    p_up: f64,
    pulses: &[PulseObservation],
    r: f64,
    beta: f64,
) -> Result<SpinParameters> {
    recover_spin_parameters_with(p_up, pulses, r, beta, CONSISTENCY_TOLERANCE)
}

/// [`recover_spin_parameters`] with an explicit bound on how far the fitted
/// sine or cosine may exceed 1 in magnitude.
pub fn recover_spin_parameters_with(
    p_up: f64,
    pulses: &[PulseObservation],
    r: f64,
    beta: f64,
    tolerance: f64,
) -> Result<SpinParameters> {
    if !(p_up > 0.0 && p_up < 1.0) {
        return Err(Error::SpinProbability(p_up));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::ZeroOverlap);
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    let c1 = libm::sqrt(p_up);
    let c2 = libm::sqrt(1.0 - p_up);
    let amp = c1 * c2 * r;

    // y_j = a_j S + b_j C
    let (mut aa, mut ab, mut bb, mut ay, mut by) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in pulses {
        let rot = p.rotation;
        let (s, c) = libm::sincos(0.5 * rot.chi);
        let y = p.pbar_up - c * c * c1 * c1 - s * s * c2 * c2;
        let k = libm::sin(rot.chi) * amp;
        let a = k * libm::cos(rot.phi_d);
        let b = -k * libm::sin(rot.phi_d);
        aa += a * a;
        ab += a * b;
        bb += b * b;
        ay += a * y;
        by += b * y;
    }
    let det = aa * bb - ab * ab;
    let scale = aa.max(bb);
    if pulses.len() < 2 || !(scale > 0.0) || !(det > 1e-12 * scale * scale) {
        return Err(Error::InsufficientPulses);
    }
    let sin_part = (bb * ay - ab * by) / det;
    let cos_part = (aa * by - ab * ay) / det;
    for v in [sin_part, cos_part] {
        if libm::fabs(v) > 1.0 + tolerance {
            return Err(Error::InconsistentSpinData(v));
        }
    }
    Ok(SpinParameters {
        c1,
        c2_mod: c2,
        theta: wrap_angle(libm::atan2(sin_part, cos_part) - beta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn quarter(phi_d: f64, pbar_up: f64) -> PulseObservation {
        PulseObservation {
            rotation: SpinRotation::new(FRAC_PI_2, phi_d),
            pbar_up,
        }
    }

    #[test]
    fn extremal_sine() {
        let got =
            recover_spin_parameters(0.5, &[quarter(0.0, 1.0), quarter(FRAC_PI_2, 0.5)], 1.0, 0.0)
                .unwrap();
        assert!((got.theta - FRAC_PI_2).abs() < 1e-12);
        assert!((got.c1 - got.c2_mod).abs() < 1e-15);
    }

    #[test]
    fn resolves_the_arcsin_branch() {
        // theta = pi - 0.3 and theta = 0.3 share sin(theta); the cosine pulse separates them
        for theta in [0.3, PI - 0.3, -2.0, PI] {
            let (c1, c2, r, beta) = (0.5, 0.75f64.sqrt(), (-2.0f64).exp(), 0.1);
            let pulses = [
                quarter(
                    0.0,
                    pulse_probability(c1, c2, theta, r, beta, SpinRotation::new(FRAC_PI_2, 0.0)),
                ),
                quarter(
                    FRAC_PI_2,
                    pulse_probability(
                        c1,
                        c2,
                        theta,
                        r,
                        beta,
                        SpinRotation::new(FRAC_PI_2, FRAC_PI_2),
                    ),
                ),
            ];
            let got = recover_spin_parameters(0.25, &pulses, r, beta).unwrap();
            assert!(
                wrap_angle(got.theta - theta).abs() < 1e-12,
                "theta {theta} -> {}",
                got.theta
            );
        }
    }

    #[test]
    fn error_paths() {
        let pulses = [quarter(0.0, 0.5), quarter(FRAC_PI_2, 0.5)];
        assert_eq!(
            recover_spin_parameters(1.0, &pulses, 0.5, 0.0),
            Err(Error::SpinProbability(1.0))
        );
        assert_eq!(
            recover_spin_parameters(0.5, &pulses, 0.0, 0.0),
            Err(Error::ZeroOverlap)
        );
        assert_eq!(
            recover_spin_parameters(0.5, &pulses[..1], 0.5, 0.0),
            Err(Error::InsufficientPulses)
        );
        let same_axis = [quarter(0.0, 0.5), quarter(0.0, 0.6)];
        assert_eq!(
            recover_spin_parameters(0.5, &same_axis, 0.5, 0.0),
            Err(Error::InsufficientPulses)
        );
        let wild = [quarter(0.0, 1.0), quarter(FRAC_PI_2, 0.5)];
        assert!(matches!(
            recover_spin_parameters(0.5, &wild, 0.1, 0.0),
            Err(Error::InconsistentSpinData(_))
        ));
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
    }
}
