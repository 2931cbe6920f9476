//! JSON form of a reconstruction: blocks as nested `re`/`im` arrays, scalar
//! estimates and a `diagnostics` object.

use pentomo_core::fock::FockVector;
use pentomo_core::state::CyclotronDensityMatrix;
use pentomo_core::tomography::{ReconstructionReport, Warning};
use pentomo_core::Complex;
use serde::{Deserialize, Serialize};

use crate::config::TomographyConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixDoc {
    pub fn from_density(rho: &CyclotronDensityMatrix) -> Self {
        let n = rho.cutoff() + 1;
        let rows = |f: fn(Complex) -> f64| {
            (0..n)
                .map(|i| (0..n).map(|j| f(rho.get(i, j))).collect())
                .collect()
        };
        Self {
            re: rows(|z| z.re),
            im: rows(|z| z.im),
        }
    }

    pub fn to_density(&self, name: &str) -> Result<CyclotronDensityMatrix> {
        let n = self.re.len();
        let square = |m: &Vec<Vec<f64>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if n == 0 || !square(&self.re) || !square(&self.im) {
            return Err(Error::MalformedReport(format!(
                "`{name}` is not a square matrix"
            )));
        }
        Ok(CyclotronDensityMatrix::from_fn(n - 1, |i, j| {
            Complex::new(self.re[i][j], self.im[i][j])
        })?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorDoc {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorDoc {
    pub fn from_fock(psi: &FockVector) -> Self {
        Self {
            re: psi.amplitudes().iter().map(|z| z.re).collect(),
            im: psi.amplitudes().iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexDoc {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagMaxima {
    pub rho11: f64,
    pub rho22: f64,
    pub rho12: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsDoc {
    /// `cond(G^T G)` per band.
    pub condition_numbers: Vec<f64>,
    pub residuals_up: Vec<f64>,
    pub residuals_down: Vec<f64>,
    /// Purity diagnostic: eigenvalues of each diagonal block, descending.
    pub eigenvalues_rho11: Vec<f64>,
    pub eigenvalues_rho22: Vec<f64>,
    pub imag_max: ImagMaxima,
    pub quotient_deviation: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SettingsDoc {
    pub nc: usize,
    pub n: usize,
    pub alpha_mod: f64,
    pub eta: f64,
    pub phases: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub settings: SettingsDoc,
    pub rho11: MatrixDoc,
    pub rho22: MatrixDoc,
    pub rho12: MatrixDoc,
    pub psi1: VectorDoc,
    pub psi2: VectorDoc,
    pub anchors: [usize; 2],
    pub overlap: ComplexDoc,
    pub c1_est: f64,
    pub c2_est: f64,
    pub theta_est: Option<f64>,
    pub diagnostics: DiagnosticsDoc,
}

fn warning_name(w: Warning) -> String {
    match w {
        Warning::QuotientIllPosed => "quotient_ill_posed".to_owned(),
        Warning::NoPulseData => "no_pulse_data".to_owned(),
        Warning::EmptyBranch(spin) => format!("empty_branch_{spin}"),
        Warning::SpinPhaseInconsistent(v) => format!("spin_phase_inconsistent({v:.3})"),
    }
}

impl ReportDoc {
    pub fn new(report: &ReconstructionReport, config: &TomographyConfig) -> Self {
        let d = &report.diagnostics;
        Self {
            settings: SettingsDoc {
                nc: config.nc,
                n: config.n,
                alpha_mod: config.alpha_mod,
                eta: config.eta,
                phases: config.phases(),
            },
            rho11: MatrixDoc::from_density(&report.rho11),
            rho22: MatrixDoc::from_density(&report.rho22),
            rho12: MatrixDoc::from_density(&report.rho12),
            psi1: VectorDoc::from_fock(&report.psi1),
            psi2: VectorDoc::from_fock(&report.psi2),
            anchors: [report.anchors.0, report.anchors.1],
            overlap: ComplexDoc {
                re: report.overlap.re,
                im: report.overlap.im,
            },
            c1_est: report.c1_est,
            c2_est: report.c2_est,
            theta_est: report.theta_est,
            diagnostics: DiagnosticsDoc {
                condition_numbers: d.condition_numbers.clone(),
                residuals_up: d.residuals_up.clone(),
                residuals_down: d.residuals_down.clone(),
                eigenvalues_rho11: d.eigenvalues_up.clone(),
                eigenvalues_rho22: d.eigenvalues_down.clone(),
                imag_max: ImagMaxima {
                    rho11: d.imag_max_rho11,
                    rho22: d.imag_max_rho22,
                    rho12: d.imag_max_rho12,
                },
                quotient_deviation: d.quotient_deviation,
                warnings: d.warnings.iter().copied().map(warning_name).collect(),
            },
        }
    }

    /// `rho11`, `rho22`, `rho12`, checked for a common size.
    pub fn blocks(&self) -> Result<[CyclotronDensityMatrix; 3]> {
        let blocks = [
            self.rho11.to_density("rho11")?,
            self.rho22.to_density("rho22")?,
            self.rho12.to_density("rho12")?,
        ];
        if blocks.iter().any(|b| b.cutoff() != blocks[0].cutoff()) {
            return Err(Error::MalformedReport("blocks differ in size".to_owned()));
        }
        Ok(blocks)
    }
}
