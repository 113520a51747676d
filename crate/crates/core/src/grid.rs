//! Grid geometry and the dense per-cell field types shared by the whole
//! pipeline.
//!
//! Fields are immutable after construction; constructors enforce the grid
//! invariants (matching sizes, finite entries, sign constraints) so that
//! downstream operations can rely on them.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Sensor grid geometry: cell counts plus the physical pitch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDims {
    /// Cells along x.
    pub width: usize,
    /// Cells along y.
    pub height: usize,
    /// Physical cell pitch in mm per pixel.
    pub pitch: f64,
}

impl GridDims {
    pub fn new(width: usize, height: usize, pitch: f64) -> Result<Self> {
        let dims = Self {
            width,
            height,
            pitch,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidDims(format!(
                "width and height must be at least 1, got {}x{}",
                self.width, self.height
            )));
        }
        if !self.pitch.is_finite() || self.pitch <= 0.0 {
            return Err(Error::InvalidDims(format!(
                "pitch must be a positive finite mm/pixel value, got {}",
                self.pitch
            )));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// Physical coordinates (mm) of a cell center relative to the grid center.
    #[inline]
    pub fn cell_center(&self, x: usize, y: usize) -> (f64, f64) {
        let cx = (self.width as f64 - 1.0) / 2.0;
        let cy = (self.height as f64 - 1.0) / 2.0;
        ((x as f64 - cx) * self.pitch, (y as f64 - cy) * self.pitch)
    }
}

/// Dense row-major scalar grid aligned with a [`GridDims`] geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    dims: GridDims,
    data: Vec<f64>,
}

impl ScalarGrid {
    pub fn zeros(dims: GridDims) -> Result<Self> {
        dims.validate()?;
        Ok(Self {
            dims,
            data: vec![0.0; dims.cell_count()],
        })
    }

    pub fn from_vec(dims: GridDims, data: Vec<f64>) -> Result<Self> {
        dims.validate()?;
        if data.len() != dims.cell_count() {
            return Err(Error::GridMismatch(format!(
                "expected {} cells for {}x{}, got {}",
                dims.cell_count(),
                dims.width,
                dims.height,
                data.len()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[self.dims.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        let i = self.dims.index(x, y);
        self.data[i] = value;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Box-mean smoothing with a `kernel`x`kernel` window; edge cells
    /// average only their in-bounds neighbors. `kernel` must be odd;
    /// `kernel == 1` is the identity.
    pub fn box_mean(&self, kernel: usize) -> Result<ScalarGrid> {
        if kernel == 0 || kernel.is_multiple_of(2) {
            return Err(Error::param(
                "filter_kernel",
                format!("must be an odd positive integer, got {kernel}"),
            ));
        }
        if kernel == 1 {
            return Ok(self.clone());
        }
        let half = kernel / 2;
        let (w, h) = (self.dims.width, self.dims.height);
        let mut out = ScalarGrid::zeros(self.dims)?;
        for y in 0..h {
            let y0 = y.saturating_sub(half);
            let y1 = (y + half).min(h - 1);
            for x in 0..w {
                let x0 = x.saturating_sub(half);
                let x1 = (x + half).min(w - 1);
                let mut acc = 0.0;
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        acc += self.get(xx, yy);
                    }
                }
                let count = ((y1 - y0 + 1) * (x1 - x0 + 1)) as f64;
                out.set(x, y, acc / count);
            }
        }
        Ok(out)
    }

    /// Per-mm spatial gradient: central differences inside, one-sided at
    /// the borders. Returns (d/dx, d/dy) grids.
    pub fn gradient(&self) -> (ScalarGrid, ScalarGrid) {
        let (w, h) = (self.dims.width, self.dims.height);
        let pitch = self.dims.pitch;
        let mut gx = ScalarGrid {
            dims: self.dims,
            data: vec![0.0; self.data.len()],
        };
        let mut gy = gx.clone();
        for y in 0..h {
            for x in 0..w {
                let dx = if w == 1 {
                    0.0
                } else if x == 0 {
                    (self.get(1, y) - self.get(0, y)) / pitch
                } else if x == w - 1 {
                    (self.get(w - 1, y) - self.get(w - 2, y)) / pitch
                } else {
                    (self.get(x + 1, y) - self.get(x - 1, y)) / (2.0 * pitch)
                };
                let dy = if h == 1 {
                    0.0
                } else if y == 0 {
                    (self.get(x, 1) - self.get(x, 0)) / pitch
                } else if y == h - 1 {
                    (self.get(x, h - 1) - self.get(x, h - 2)) / pitch
                } else {
                    (self.get(x, y + 1) - self.get(x, y - 1)) / (2.0 * pitch)
                };
                gx.set(x, y, dx);
                gy.set(x, y, dy);
            }
        }
        (gx, gy)
    }
}

/// Dense 3-component marker displacement field observed by the sensor.
///
/// `dz` is the normal indentation of the gel surface (mm, non-negative);
/// `dx`/`dy` are tangential marker displacements (mm).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    dx: ScalarGrid,
    dy: ScalarGrid,
    dz: ScalarGrid,
}

impl DisplacementField {
    pub fn new(dx: ScalarGrid, dy: ScalarGrid, dz: ScalarGrid) -> Result<Self> {
        if dx.dims() != dy.dims() || dx.dims() != dz.dims() {
            return Err(Error::GridMismatch(
                "dx, dy, dz must share the same dims".into(),
            ));
        }
        for (name, grid) in [("dx", &dx), ("dy", &dy), ("dz", &dz)] {
            if !grid.all_finite() {
                return Err(Error::NonFinite(match name {
                    "dx" => "dx",
                    "dy" => "dy",
                    _ => "dz",
                }));
            }
        }
        if dz.data().iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeDz);
        }
        Ok(Self { dx, dy, dz })
    }

    /// All-zero field for the given dims.
    pub fn zeros(dims: GridDims) -> Result<Self> {
        let z = ScalarGrid::zeros(dims)?;
        Ok(Self {
            dx: z.clone(),
            dy: z.clone(),
            dz: z,
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dx.dims()
    }

    pub fn dx(&self) -> &ScalarGrid {
        &self.dx
    }

    pub fn dy(&self) -> &ScalarGrid {
        &self.dy
    }

    pub fn dz(&self) -> &ScalarGrid {
        &self.dz
    }
}

/// Dense 3-component force-density field in relative units.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    fx: ScalarGrid,
    fy: ScalarGrid,
    fz: ScalarGrid,
}

impl ForceField {
    pub fn new(fx: ScalarGrid, fy: ScalarGrid, fz: ScalarGrid) -> Result<Self> {
        if fx.dims() != fy.dims() || fx.dims() != fz.dims() {
            return Err(Error::GridMismatch(
                "fx, fy, fz must share the same dims".into(),
            ));
        }
        for (name, grid) in [("fx", &fx), ("fy", &fy), ("fz", &fz)] {
            if !grid.all_finite() {
                return Err(Error::NonFinite(match name {
                    "fx" => "fx",
                    "fy" => "fy",
                    _ => "fz",
                }));
            }
        }
        if fz.data().iter().any(|&v| v < 0.0) {
            return Err(Error::NegativeFz);
        }
        Ok(Self { fx, fy, fz })
    }

    pub fn dims(&self) -> GridDims {
        self.fx.dims()
    }

    pub fn fx(&self) -> &ScalarGrid {
        &self.fx
    }

    pub fn fy(&self) -> &ScalarGrid {
        &self.fy
    }

    pub fn fz(&self) -> &ScalarGrid {
        &self.fz
    }
}
