//! Wigner-function matrix on a phase-space grid, `z = x + i y`.

use alloc::vec::Vec;

use crate::fock::{assoc_laguerre, displacement_unchecked, ln_factorial_ratio, tail_cutoff};
use crate::state::CyclotronDensityMatrix;
use crate::{Complex, Error, Result};

const TWO_OVER_PI: f64 = core::f64::consts::FRAC_2_PI;

/// Hermitian deviation below which a block is treated as Hermitian.
const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Uniform rectangular grid, `nx` points on `[x_min, x_max]` and `ny` on
/// `[y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(4.0, 81)
    }
}

impl GridSpec {
    /// `[-half_width, half_width]^2` with `points` per axis.
    pub fn square(half_width: f64, points: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            nx: points,
            ny: points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidGrid("zero-size grid"));
        }
        let bounds = [self.x_min, self.x_max, self.y_min, self.y_max];
        if bounds.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds"));
        }
        if (self.nx > 1 && !(self.x_max > self.x_min))
            || (self.ny > 1 && !(self.y_max > self.y_min))
        {
            return Err(Error::InvalidGrid("empty range"));
        }
        Ok(())
    }

    fn step(lo: f64, hi: f64, n: usize) -> f64 {
        if n > 1 {
            (hi - lo) / (n - 1) as f64
        } else {
            0.0
        }
    }

    pub fn dx(&self) -> f64 {
        Self::step(self.x_min, self.x_max, self.nx)
    }

    pub fn dy(&self) -> f64 {
        Self::step(self.y_min, self.y_max, self.ny)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.dy()
    }
}

/// One block `W_ij` sampled on a grid; `values[i * ny + j]` sits at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub spec: GridSpec,
    pub values: Vec<Complex>,
    /// Whether the source block was Hermitian (values then have zero
    /// imaginary part).
    pub hermitian: bool,
    /// Largest imaginary part discarded for a Hermitian block.
    pub max_spurious_imag: f64,
}

impl WignerGrid {
    pub fn get(&self, i: usize, j: usize) -> Complex {
        self.values[i * self.spec.ny + j]
    }

    /// Trapezoid-rule integral over the grid.
    pub fn integrate(&self) -> Complex {
        let (nx, ny) = (self.spec.nx, self.spec.ny);
        let weight = |i: usize, n: usize| {
            if n > 1 && (i == 0 || i == n - 1) {
                0.5
            } else {
                1.0
            }
        };
        let mut total = Complex::new(0.0, 0.0);
        for i in 0..nx {
            for j in 0..ny {
                total += self.get(i, j) * (weight(i, nx) * weight(j, ny));
            }
        }
        total * (self.spec.dx() * self.spec.dy())
    }

    pub fn min_re(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.re)
            .fold(f64::INFINITY, f64::min)
    }
}

/// `<m|D(z) P D^dag(z)|n>` for `m >= n`:
/// `(-1)^n sqrt(n!/m!) (2z)^(m-n) e^{-2|z|^2} L_n^(m-n)(4|z|^2)`.
fn parity_element(m: usize, n: usize, z: Complex) -> Complex {
    let r2 = z.norm_sqr();
    let d = m - n;
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    if r2 == 0.0 {
        return Complex::new(if d == 0 { sign } else { 0.0 }, 0.0);
    }
    let ln_mod =
        -0.5 * ln_factorial_ratio(n, m) + d as f64 * libm::log(2.0 * libm::sqrt(r2)) - 2.0 * r2;
    let magnitude = sign * libm::exp(ln_mod) * assoc_laguerre(n, d, 4.0 * r2);
    Complex::from_polar(magnitude, d as f64 * z.arg())
}

/// Laguerre-series value of the Wigner function of `rho` at `(x, y)`.
///
/// The diagonal and `m > n` terms use the closed form above; `m < n` terms use
/// its conjugate, which is how a non-Hermitian block (a coherence `rho12`)
/// picks up both triangles.
pub fn wigner_point(rho: &CyclotronDensityMatrix, x: f64, y: f64) -> Complex {
    let z = Complex::new(x, y);
    let n_top = rho.cutoff();
    let mut total = Complex::new(0.0, 0.0);
    for n in 0..=n_top {
        total += rho.get(n, n) * parity_element(n, n, z);
        for m in (n + 1)..=n_top {
            let t = parity_element(m, n, z);
            total += rho.get(n, m) * t + rho.get(m, n) * t.conj();
        }
    }
    total * TWO_OVER_PI
}

/// Evaluates a block on a grid. For a Hermitian block the real part is kept
/// and the largest discarded imaginary part is reported.
pub fn wigner_from_density(rho: &CyclotronDensityMatrix, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let hermitian = rho.hermitian_deviation() <= HERMITIAN_TOLERANCE;
    let mut values = Vec::with_capacity(spec.nx * spec.ny);
    let mut max_spurious_imag: f64 = 0.0;
    for i in 0..spec.nx {
        for j in 0..spec.ny {
            let w = wigner_point(rho, spec.x(i), spec.y(j));
            if hermitian {
                max_spurious_imag = max_spurious_imag.max(w.im.abs());
                values.push(Complex::new(w.re, 0.0));
            } else {
                values.push(w);
            }
        }
    }
    Ok(WignerGrid {
        spec: *spec,
        values,
        hermitian,
        max_spurious_imag,
    })
}

/// Displaced-parity value `(2/pi) sum_n (-1)^n <n|D^dag(z) rho D(z)|n>`,
/// computed from displacement elements alone with the sum over `n` running to
/// `tail_cutoff(cutoff, |z|)`.
pub fn wigner_oracle_point(rho: &CyclotronDensityMatrix, x: f64, y: f64) -> Complex {
    let z = Complex::new(x, y);
    let top = rho.cutoff();
    let n_max = tail_cutoff(top, z.norm());
    let mut total = Complex::new(0.0, 0.0);
    let mut column = Vec::with_capacity(top + 1);
    for n in 0..=n_max {
        column.clear();
        column.extend((0..=top).map(|k| displacement_unchecked(k, n, z)));
        let mut value = Complex::new(0.0, 0.0);
        for k in 0..=top {
            for m in 0..=top {
                value += column[k].conj() * rho.get(k, m) * column[m];
            }
        }
        if n % 2 == 1 {
            total -= value;
        } else {
            total += value;
        }
    }
    total * TWO_OVER_PI
}
