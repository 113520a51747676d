//! Per-frame scalar metrics and the grasp time series built from them.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on frame spacing when validating a trace (seconds).
pub const TIME_SPACING_TOL: f64 = 1e-9;

/// One frame worth of scalar contact metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    /// Time since the start of the run (s).
    pub t: f64,
    /// Gripper closure past first detected contact (mm).
    pub delta: f64,
    /// Average |fz| over the contact region (ru).
    pub mean_normal: f64,
    /// Maximum |fz| over the contact region (ru).
    pub max_normal: f64,
    /// Magnitude of the mean shear vector over the contact region (ru).
    pub mean_shear: f64,
    /// Number of cells in the contact region.
    pub contact_area: usize,
}

impl TraceSample {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("t", self.t),
            ("delta", self.delta),
            ("mean_normal", self.mean_normal),
            ("max_normal", self.max_normal),
            ("mean_shear", self.mean_shear),
        ] {
            if !v.is_finite() {
                return Err(Error::param("trace_sample", format!("{name} is not finite")));
            }
        }
        if self.t < 0.0 {
            return Err(Error::param("t", "must be non-negative"));
        }
        if self.delta < 0.0 {
            return Err(Error::param("delta", "must be non-negative"));
        }
        if self.mean_normal < 0.0 {
            return Err(Error::param("mean_normal", "must be non-negative"));
        }
        if self.contact_area > 0 && self.max_normal < self.mean_normal {
            return Err(Error::param(
                "max_normal",
                "must be >= mean_normal over a non-empty contact region",
            ));
        }
        if self.contact_area == 0 && (self.mean_normal != 0.0 || self.max_normal != 0.0) {
            return Err(Error::param(
                "contact_area",
                "empty contact region must report zero mean and max normal force",
            ));
        }
        Ok(())
    }
}

/// Ordered per-frame metric series sampled at a fixed frame rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspTrace {
    samples: Vec<TraceSample>,
    frame_rate: f64,
}

impl GraspTrace {
    /// Validates frame-rate positivity, per-sample invariants, and strict
    /// 1/frame_rate spacing (to [`TIME_SPACING_TOL`]).
    pub fn new(samples: Vec<TraceSample>, frame_rate: f64) -> Result<Self> {
        if !frame_rate.is_finite() || frame_rate <= 0.0 {
            return Err(Error::param("frame_rate", "must be positive"));
        }
        let dt = 1.0 / frame_rate;
        for (i, s) in samples.iter().enumerate() {
            s.validate()?;
            if i > 0 {
                let spacing = s.t - samples[i - 1].t;
                if spacing <= 0.0 {
                    return Err(Error::param("t", "timestamps must be strictly increasing"));
                }
                if (spacing - dt).abs() > TIME_SPACING_TOL {
                    return Err(Error::param(
                        "t",
                        format!(
                            "sample spacing {spacing} differs from 1/frame_rate {dt} by more than {TIME_SPACING_TOL}"
                        ),
                    ));
                }
            }
        }
        Ok(Self {
            samples,
            frame_rate,
        })
    }

    pub fn samples(&self) -> &[TraceSample] {
        &self.samples
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples with `t` in `[t_start, t_end]` (inclusive, with a small
    /// absolute tolerance at both ends).
    pub fn window(&self, t_start: f64, t_end: f64) -> Vec<&TraceSample> {
        const EPS: f64 = 1e-12;
        self.samples
            .iter()
            .filter(|s| s.t >= t_start - EPS && s.t <= t_end + EPS)
            .collect()
    }

    /// Contiguous sub-trace of samples with `t` in `[t_start, t_end]`.
    pub fn slice(&self, t_start: f64, t_end: f64) -> Result<GraspTrace> {
        let samples: Vec<TraceSample> = self
            .window(t_start, t_end)
            .into_iter()
            .copied()
            .collect();
        GraspTrace::new(samples, self.frame_rate)
    }
}

/// Frame timestamps `0, 1/rate, ..., (n-1)/rate`.
pub fn frame_times(n: usize, frame_rate: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("n", "need at least one frame"));
    }
    if !frame_rate.is_finite() || frame_rate <= 0.0 {
        return Err(Error::param("frame_rate", "must be positive"));
    }
    Ok((0..n).map(|i| i as f64 / frame_rate).collect())
}
