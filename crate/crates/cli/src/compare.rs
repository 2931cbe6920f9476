//! Errors of a reconstruction against the true state of its config.
//!
//! Reconstructed amplitudes are real and positive at their anchor index, so
//! the true amplitudes are put in the same gauge before `rho12` and `theta`
//! are compared.

use pentomo_core::state::{CyclotronDensityMatrix, Spin};
use pentomo_core::tomography::{anchor_gauge, wrap_angle};
use serde::{Deserialize, Serialize};

use crate::config::TomographyConfig;
use crate::report::{ImagMaxima, ReportDoc};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockError {
    pub max_abs: f64,
    pub mean_abs: f64,
}

impl BlockError {
    fn between(got: &CyclotronDensityMatrix, want: &CyclotronDensityMatrix) -> Self {
        Self {
            max_abs: got.max_abs_diff(want),
            mean_abs: got.mean_abs_diff(want),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinComparison {
    pub c1_est: f64,
    pub c1_true: f64,
    pub c1_rel_err: f64,
    pub c2_est: f64,
    pub c2_true: f64,
    pub c2_rel_err: f64,
    pub theta_est: Option<f64>,
    /// True phase in the gauge of the reconstructed amplitudes.
    pub theta_target: f64,
    pub theta_abs_err: Option<f64>,
    /// Absolute error over `|theta|` of the config; `None` when that is 0 or
    /// no phase was estimated.
    pub theta_rel_err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rho11: BlockError,
    pub rho22: BlockError,
    pub rho12: BlockError,
    pub imag_max: ImagMaxima,
    pub spin: SpinComparison,
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn relative(est: f64, truth: f64) -> f64 {
    if truth == 0.0 {
        est.abs()
    } else {
        (est - truth).abs() / truth.abs()
    }
}

pub fn compare(doc: &ReportDoc, config: &TomographyConfig) -> Result<ComparisonReport> {
    let [rho11, rho22, rho12] = doc.blocks()?;
    let nc = rho11.cutoff();
    if nc != doc.settings.nc {
        return Err(Error::MalformedReport(format!(
            "blocks have cutoff {nc}, settings say {}",
            doc.settings.nc
        )));
    }
    let truth = config.state_at(nc)?;
    let (g1, d1) = anchor_gauge(truth.psi1(), doc.anchors[0]);
    let (g2, d2) = anchor_gauge(truth.psi2(), doc.anchors[1]);
    // A branch without weight is not observed; its blocks are expected to be zero.
    let observed = |spin| truth.branch_weight(spin) > 0.0;
    let zero = CyclotronDensityMatrix::zeros(nc);
    let t11 = if observed(Spin::Up) {
        CyclotronDensityMatrix::pure(truth.psi1())
    } else {
        zero.clone()
    };
    let t22 = if observed(Spin::Down) {
        CyclotronDensityMatrix::pure(truth.psi2())
    } else {
        zero.clone()
    };
    let t12 = if observed(Spin::Up) && observed(Spin::Down) {
        CyclotronDensityMatrix::outer(&g1, &g2)?
    } else {
        zero
    };

    let theta_target = wrap_angle(truth.theta() + d2 - d1);
    let theta_abs_err = doc.theta_est.map(|t| wrap_angle(t - theta_target).abs());
    let spin = SpinComparison {
        c1_est: doc.c1_est,
        c1_true: truth.c1(),
        c1_rel_err: relative(doc.c1_est, truth.c1()),
        c2_est: doc.c2_est,
        c2_true: truth.c2_mod(),
        c2_rel_err: relative(doc.c2_est, truth.c2_mod()),
        theta_est: doc.theta_est,
        theta_target,
        theta_abs_err,
        theta_rel_err: theta_abs_err
            .filter(|_| truth.theta() != 0.0)
            .map(|e| e / truth.theta().abs()),
    };
    let (e11, e22, e12) = (
        BlockError::between(&rho11, &t11),
        BlockError::between(&rho22, &t22),
        BlockError::between(&rho12, &t12),
    );
    let imag_max = ImagMaxima {
        rho11: rho11.max_abs_imag(),
        rho22: rho22.max_abs_imag(),
        rho12: rho12.max_abs_imag(),
    };

    let tol = &config.tolerances;
    let mut checks = Vec::new();
    let mut check = |name: &str, value: Option<f64>, limit: Option<f64>| {
        if let Some(limit) = limit {
            let value = value.unwrap_or(f64::INFINITY);
            checks.push(Check {
                name: name.to_owned(),
                value,
                limit,
                pass: value < limit,
            });
        }
    };
    check("rho11_max_abs", Some(e11.max_abs), tol.rho11_max_abs);
    check("rho22_max_abs", Some(e22.max_abs), tol.rho22_max_abs);
    check("rho12_max_abs", Some(e12.max_abs), tol.rho12_max_abs);
    check("rho12_imag_max", Some(imag_max.rho12), tol.rho12_imag_max);
    check("c1_rel", Some(spin.c1_rel_err), tol.c1_rel);
    check("c2_rel", Some(spin.c2_rel_err), tol.c2_rel);
    check("theta_abs", spin.theta_abs_err, tol.theta_abs);
    let pass = checks.iter().all(|c| c.pass);
    Ok(ComparisonReport {
        rho11: e11,
        rho22: e22,
        rho12: e12,
        imag_max,
        spin,
        checks,
        pass,
    })
}
