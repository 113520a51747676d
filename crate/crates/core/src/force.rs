//! Displacement-to-force decomposition, contact-region segmentation, and
//! the per-frame force metrics.
//!
//! The contact region is the set of cells whose *filtered* normal force
//! strictly exceeds the threshold `tau`; the filter is an in-bounds
//! box mean. Forces are in relative units throughout.

use serde::{Deserialize, Serialize};

use crate::grid::{DisplacementField, ForceField, GridDims, ScalarGrid};
use crate::{Error, Result};

/// Linear per-cell displacement-to-force gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionCalib {
    /// Maps dz (mm) to fz (ru): ru/mm.
    pub normal_gain: f64,
    /// Maps dx/dy (mm) to fx/fy (ru): ru/mm.
    pub shear_gain: f64,
}

impl Default for DecompositionCalib {
    fn default() -> Self {
        Self {
            normal_gain: 1.0,
            shear_gain: 1.0,
        }
    }
}

impl DecompositionCalib {
    pub fn validate(&self) -> Result<()> {
        if !self.normal_gain.is_finite() || self.normal_gain <= 0.0 {
            return Err(Error::param("normal_gain", "must be positive"));
        }
        if !self.shear_gain.is_finite() || self.shear_gain <= 0.0 {
            return Err(Error::param("shear_gain", "must be positive"));
        }
        Ok(())
    }
}

/// Contact segmentation parameters: filter kernel and threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentationConfig {
    /// Contact threshold (ru); cells pass on strictly greater filtered force.
    pub tau: f64,
    /// Odd box-mean window size; 1 is the identity.
    pub filter_kernel: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            filter_kernel: 3,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() || self.tau < 0.0 {
            return Err(Error::param("tau", "must be non-negative"));
        }
        if self.filter_kernel == 0 || self.filter_kernel.is_multiple_of(2) {
            return Err(Error::param(
                "filter_kernel",
                "must be an odd positive integer",
            ));
        }
        Ok(())
    }
}

/// Set of in-contact cells, stored sorted in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactRegion {
    cells: Vec<(usize, usize)>,
    dims: GridDims,
}

impl ContactRegion {
    pub fn new(mut cells: Vec<(usize, usize)>, dims: GridDims) -> Result<Self> {
        dims.validate()?;
        for &(x, y) in &cells {
            if x >= dims.width || y >= dims.height {
                return Err(Error::GridMismatch(format!(
                    "cell ({x}, {y}) outside {}x{}",
                    dims.width, dims.height
                )));
            }
        }
        cells.sort_unstable_by_key(|&(x, y)| (y, x));
        cells.dedup();
        Ok(Self { cells, dims })
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.cells
            .binary_search_by_key(&(y, x), |&(cx, cy)| (cy, cx))
            .is_ok()
    }
}

/// Scalar aggregate over a contact region; `empty` flags a vacuous region
/// (value is zero in that case).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMetric {
    pub value: f64,
    pub empty: bool,
}

/// Mean shear vector over a contact region plus its magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearMetric {
    pub mean_fx: f64,
    pub mean_fy: f64,
    pub magnitude: f64,
    pub empty: bool,
}

/// Per-cell linear decomposition: `fz = normal_gain * dz`,
/// `fx/fy = shear_gain * dx/dy`.
pub fn decompose(disp: &DisplacementField, calib: &DecompositionCalib) -> Result<ForceField> {
    calib.validate()?;
    let fx = disp.dx().map(|v| calib.shear_gain * v);
    let fy = disp.dy().map(|v| calib.shear_gain * v);
    let fz = disp.dz().map(|v| calib.normal_gain * v);
    ForceField::new(fx, fy, fz)
}

/// Box-mean smoothing of a normal-force grid per the segmentation config.
pub fn filter_field(fz: &ScalarGrid, config: &SegmentationConfig) -> Result<ScalarGrid> {
    config.validate()?;
    fz.box_mean(config.filter_kernel)
}

/// Cells whose filtered normal force strictly exceeds `tau`.
pub fn segment_contact(fz: &ScalarGrid, config: &SegmentationConfig) -> Result<ContactRegion> {
    let filtered = filter_field(fz, config)?;
    let dims = fz.dims();
    let mut cells = Vec::new();
    for y in 0..dims.height {
        for x in 0..dims.width {
            if filtered.get(x, y) > config.tau {
                cells.push((x, y));
            }
        }
    }
    ContactRegion::new(cells, dims)
}

fn check_region(field: &ForceField, region: &ContactRegion) -> Result<()> {
    if field.dims() != region.dims() {
        return Err(Error::GridMismatch(
            "contact region dims do not match the force field".into(),
        ));
    }
    Ok(())
}

/// Arithmetic mean of |fz| over the region.
pub fn mean_normal(field: &ForceField, region: &ContactRegion) -> Result<RegionMetric> {
    check_region(field, region)?;
    if region.is_empty() {
        return Ok(RegionMetric {
            value: 0.0,
            empty: true,
        });
    }
    let sum: f64 = region
        .cells()
        .iter()
        .map(|&(x, y)| field.fz().get(x, y).abs())
        .sum();
    Ok(RegionMetric {
        value: sum / region.len() as f64,
        empty: false,
    })
}

/// Maximum of |fz| over the region.
pub fn max_normal(field: &ForceField, region: &ContactRegion) -> Result<RegionMetric> {
    check_region(field, region)?;
    if region.is_empty() {
        return Ok(RegionMetric {
            value: 0.0,
            empty: true,
        });
    }
    let max = region
        .cells()
        .iter()
        .map(|&(x, y)| field.fz().get(x, y).abs())
        .fold(0.0, f64::max);
    Ok(RegionMetric {
        value: max,
        empty: false,
    })
}

/// Component-wise mean of (fx, fy) over the region and the Euclidean
/// magnitude of that mean vector.
pub fn mean_shear(field: &ForceField, region: &ContactRegion) -> Result<ShearMetric> {
    check_region(field, region)?;
    if region.is_empty() {
        return Ok(ShearMetric {
            mean_fx: 0.0,
            mean_fy: 0.0,
            magnitude: 0.0,
            empty: true,
        });
    }
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(x, y) in region.cells() {
        sx += field.fx().get(x, y);
        sy += field.fy().get(x, y);
    }
    let n = region.len() as f64;
    let (mx, my) = (sx / n, sy / n);
    Ok(ShearMetric {
        mean_fx: mx,
        mean_fy: my,
        magnitude: mx.hypot(my),
        empty: false,
    })
}

/// Scalar metrics for one frame: the full decompose/filter/segment
/// pipeline applied to a displacement field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMetrics {
    pub mean_normal: f64,
    pub max_normal: f64,
    pub mean_shear: f64,
    pub contact_area: usize,
}

pub fn frame_metrics(
    disp: &DisplacementField,
    calib: &DecompositionCalib,
    seg: &SegmentationConfig,
) -> Result<FrameMetrics> {
    let field = decompose(disp, calib)?;
    let region = segment_contact(field.fz(), seg)?;
    let mean = mean_normal(&field, &region)?;
    let max = max_normal(&field, &region)?;
    let shear = mean_shear(&field, &region)?;
    Ok(FrameMetrics {
        mean_normal: mean.value,
        max_normal: max.value,
        mean_shear: shear.magnitude,
        contact_area: region.len(),
    })
}
