//! Wigner-function matrix files: `W11.csv`, `W22.csv`, `W12.csv` with columns
//! `x,y,re,im`, and `wigner.json` with the grid and per-block metadata.

use std::fmt::Write as _;
use std::path::Path;

use pentomo_core::wigner::{wigner_from_density, GridSpec, WignerGrid};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::GridConfig;
use crate::fsio::{write_atomic, write_json};
use crate::report::ReportDoc;
use crate::Result;

pub const BLOCK_NAMES: [&str; 3] = ["W11", "W22", "W12"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockMeta {
    pub name: String,
    pub file: String,
    pub hermitian: bool,
    pub max_spurious_imag: f64,
    pub min_re: f64,
    pub integral_re: f64,
    pub integral_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerMeta {
    pub grid: GridConfig,
    pub blocks: Vec<BlockMeta>,
}

/// `W11`, `W22` and `W12` of a report, evaluated in parallel.
pub fn wigner_blocks(doc: &ReportDoc, spec: &GridSpec) -> Result<Vec<WignerGrid>> {
    spec.validate()?;
    let blocks = doc.blocks()?;
    Ok(blocks
        .par_iter()
        .map(|rho| wigner_from_density(rho, spec))
        .collect::<Result<Vec<_>, _>>()?)
}

pub fn grid_csv(grid: &WignerGrid) -> String {
    let mut out = String::from("x,y,re,im\n");
    for i in 0..grid.spec.nx {
        for j in 0..grid.spec.ny {
            let w = grid.get(i, j);
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?}",
                grid.spec.x(i),
                grid.spec.y(j),
                w.re,
                w.im
            );
        }
    }
    out
}

pub fn write_wigner(dir: &Path, grids: &[WignerGrid]) -> Result<WignerMeta> {
    let mut blocks = Vec::with_capacity(grids.len());
    for (name, grid) in BLOCK_NAMES.iter().zip(grids) {
        let file = format!("{name}.csv");
        write_atomic(&dir.join(&file), grid_csv(grid).as_bytes())?;
        let integral = grid.integrate();
        blocks.push(BlockMeta {
            name: (*name).to_owned(),
            file,
            hermitian: grid.hermitian,
            max_spurious_imag: grid.max_spurious_imag,
            min_re: grid.min_re(),
            integral_re: integral.re,
            integral_im: integral.im,
        });
    }
    let meta = WignerMeta {
        grid: grids
            .first()
            .map(|g| g.spec.into())
            .unwrap_or(GridSpec::default().into()),
        blocks,
    };
    write_json(&dir.join("wigner.json"), &meta)?;
    Ok(meta)
}
