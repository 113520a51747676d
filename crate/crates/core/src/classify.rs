//! Downstream analytics over hardness reports: banded classification,
//! multi-day ripeness trends, and stiffness-escalation onset detection.

use serde::{Deserialize, Serialize};

use crate::hardness::{ols_slope, slope_profile_spans, HardnessReport, SlopeConfig};
use crate::trace::GraspTrace;
use crate::{Error, Result};

/// Ascending hardness boundaries partitioning H into labeled bands.
/// Boundaries are right-exclusive: band `i` covers `[b[i-1], b[i])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierConfig {
    boundaries: Vec<f64>,
    labels: Vec<String>,
}

impl ClassifierConfig {
    pub fn new(boundaries: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if labels.len() != boundaries.len() + 1 {
            return Err(Error::param(
                "labels",
                format!(
                    "need {} labels for {} boundaries, got {}",
                    boundaries.len() + 1,
                    boundaries.len(),
                    labels.len()
                ),
            ));
        }
        for w in boundaries.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::param("boundaries", "must be strictly ascending"));
            }
        }
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::param("boundaries", "must be finite"));
        }
        let mut sorted = labels.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != labels.len() {
            return Err(Error::param("labels", "must be distinct"));
        }
        Ok(Self { boundaries, labels })
    }

    /// Builds band boundaries from measured (label, hardness) pairs:
    /// midpoints between adjacent hardness values, softest band first.
    pub fn from_calibration(pairs: &[(String, f64)]) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::TooFewSamples {
                need: 2,
                got: pairs.len(),
            });
        }
        if pairs.iter().any(|(_, h)| !h.is_finite()) {
            return Err(Error::param("hardness", "must be finite"));
        }
        let mut sorted: Vec<(String, f64)> = pairs.to_vec();
        sorted.sort_by(|a, b| a.1.total_cmp(&b.1));
        let boundaries = sorted
            .windows(2)
            .map(|w| (w[0].1 + w[1].1) / 2.0)
            .collect();
        let labels = sorted.into_iter().map(|(l, _)| l).collect();
        Self::new(boundaries, labels)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Label of the band containing `h` (right-exclusive boundaries).
pub fn classify_hardness(h: f64, config: &ClassifierConfig) -> &str {
    let band = config.boundaries.iter().filter(|&&b| h >= b).count();
    &config.labels[band]
}

/// One day's hardness measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub day: f64,
    pub h: f64,
    pub peak_force: f64,
}

/// Day-indexed hardness measurements with fitted per-day trends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipenessTrajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Fitted change in h per day.
    pub slope_trend: f64,
    /// Fitted change in peak force per day.
    pub peak_trend: f64,
}

/// Least-squares linear trends of hardness and peak force across days.
pub fn track_ripeness(reports: &[(f64, HardnessReport)]) -> Result<RipenessTrajectory> {
    if reports.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: reports.len(),
        });
    }
    for w in reports.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::param("days", "must be strictly increasing"));
        }
    }
    let points: Vec<TrajectoryPoint> = reports
        .iter()
        .map(|(day, r)| TrajectoryPoint {
            day: *day,
            h: r.h,
            peak_force: r.peak_force,
        })
        .collect();
    let h_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.day, p.h)).collect();
    let f_pts: Vec<(f64, f64)> = points.iter().map(|p| (p.day, p.peak_force)).collect();
    Ok(RipenessTrajectory {
        slope_trend: ols_slope(&h_pts)?,
        peak_trend: ols_slope(&f_pts)?,
        points,
    })
}

/// A detected shell-to-core escalation within a grasp trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Escalation {
    /// Start time of the first escalated subwindow (s).
    pub t_onset: f64,
    /// Ratio of the escalated slope to the first subwindow's slope.
    pub slope_ratio: f64,
}

/// Scans the slope profile for the first subwindow whose slope reaches
/// twice the first subwindow's slope; absent when the trace stays linear.
pub fn detect_escalation(
    trace: &GraspTrace,
    config: &SlopeConfig,
) -> Result<Option<Escalation>> {
    let spans = slope_profile_spans(trace, config)?;
    let first = spans[0].1;
    if first <= 0.0 {
        return Ok(None);
    }
    for &(t_start, slope) in spans.iter().skip(1) {
        if slope >= 2.0 * first {
            return Ok(Some(Escalation {
                t_onset: t_start,
                slope_ratio: slope / first,
            }));
        }
    }
    Ok(None)
}
