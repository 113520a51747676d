//! Slope and curvature estimation over force traces, rate-condition
//! classification, and the two hardness mappings.
//!
//! Under a constant closing speed the indentation depth is proportional
//! to time, so the temporal force slope divided by the closing speed is
//! the force-per-indentation hardness. The distance-differential mapping
//! recovers the same quantity from two (force, closure) readings.

use serde::{Deserialize, Serialize};

use crate::trace::{GraspTrace, TraceSample};
use crate::{Error, Result};

/// Where the initial-slope window is placed within the closing span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopePlacement {
    /// First window after contact detection.
    FirstWindow,
    /// Last window before the closing span ends.
    LastWindow,
}

/// Regression-window parameters for slope estimation and rate profiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlopeConfig {
    /// Trailing regression window (s).
    pub window: f64,
    /// Number of subwindows for rate profiling.
    pub subwindows: usize,
    /// Relative-deviation tolerance separating constant from variable rate.
    pub rate_tolerance: f64,
    /// Placement of the initial-slope window within the closing span.
    pub placement: SlopePlacement,
}

impl Default for SlopeConfig {
    fn default() -> Self {
        Self {
            window: 0.25,
            subwindows: 4,
            rate_tolerance: 0.2,
            placement: SlopePlacement::FirstWindow,
        }
    }
}

impl SlopeConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.window.is_finite() || self.window <= 0.0 {
            return Err(Error::param("window", "must be positive"));
        }
        if self.subwindows < 2 {
            return Err(Error::param("subwindows", "must be at least 2"));
        }
        if !self.rate_tolerance.is_finite() || self.rate_tolerance <= 0.0 {
            return Err(Error::param("rate_tolerance", "must be positive"));
        }
        Ok(())
    }
}

/// Whether the force rate dF/dt stayed within tolerance of a single value
/// across the profiled subwindows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateCondition {
    Constant { c: f64 },
    Variable { slopes: Vec<f64>, max_rel_dev: f64 },
}

/// Hardness summary for one grasp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardnessReport {
    /// Initial temporal slope of the mean normal force (ru/s).
    pub c: f64,
    /// Quantified hardness (ru/mm).
    pub h: f64,
    pub rate: RateCondition,
    /// Curvature of the mean normal force over the closing span (ru/s^2).
    pub d2: f64,
    /// Maximum indentation reached (mm).
    pub delta_max: f64,
    /// Peak of the mean normal force over the grasp (ru).
    pub peak_force: f64,
}

pub(crate) fn ols_slope(points: &[(f64, f64)]) -> Result<f64> {
    let n = points.len();
    if n < 2 {
        return Err(Error::TooFewSamples { need: 2, got: n });
    }
    let nf = n as f64;
    let (mut st, mut sy) = (0.0, 0.0);
    for &(t, y) in points {
        st += t;
        sy += y;
    }
    let (tbar, ybar) = (st / nf, sy / nf);
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, y) in points {
        let dt = t - tbar;
        sxx += dt * dt;
        sxy += dt * (y - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::param("window", "degenerate time values"));
    }
    Ok(sxy / sxx)
}

/// Ordinary least-squares slope of mean normal force vs time over the
/// samples inside `[t_start, t_end]`.
pub fn estimate_slope(trace: &GraspTrace, t_start: f64, t_end: f64) -> Result<f64> {
    if !(t_start.is_finite() && t_end.is_finite()) || t_end < t_start {
        return Err(Error::BadWindow {
            start: t_start,
            end: t_end,
        });
    }
    let points: Vec<(f64, f64)> = trace
        .window(t_start, t_end)
        .into_iter()
        .map(|s| (s.t, s.mean_normal))
        .collect();
    ols_slope(&points)
}

fn post_contact(trace: &GraspTrace) -> Vec<&TraceSample> {
    trace.samples().iter().filter(|s| s.delta > 0.0).collect()
}

/// Per-subwindow slopes with each subwindow's starting time, over the
/// post-contact portion of the trace split into equal sample counts.
pub fn slope_profile_spans(trace: &GraspTrace, config: &SlopeConfig) -> Result<Vec<(f64, f64)>> {
    config.validate()?;
    let pc = post_contact(trace);
    let w = config.subwindows;
    if pc.len() < 2 * w {
        return Err(Error::TooFewSamples {
            need: 2 * w,
            got: pc.len(),
        });
    }
    let mut out = Vec::with_capacity(w);
    for k in 0..w {
        let start = k * pc.len() / w;
        let end = (k + 1) * pc.len() / w;
        let chunk: Vec<(f64, f64)> = pc[start..end].iter().map(|s| (s.t, s.mean_normal)).collect();
        out.push((pc[start].t, ols_slope(&chunk)?));
    }
    Ok(out)
}

/// Per-subwindow least-squares slopes over the post-contact portion of
/// the trace.
pub fn slope_profile(trace: &GraspTrace, config: &SlopeConfig) -> Result<Vec<f64>> {
    Ok(slope_profile_spans(trace, config)?
        .into_iter()
        .map(|(_, slope)| slope)
        .collect())
}

/// Constant iff the maximum relative deviation from the mean slope is
/// within the configured tolerance.
pub fn classify_rate(slopes: &[f64], config: &SlopeConfig) -> Result<RateCondition> {
    config.validate()?;
    if slopes.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    if mean == 0.0 {
        return Err(Error::ZeroMeanSlope);
    }
    let max_rel_dev = slopes
        .iter()
        .map(|s| (s - mean).abs() / mean.abs())
        .fold(0.0, f64::max);
    if max_rel_dev <= config.rate_tolerance {
        Ok(RateCondition::Constant { c: mean })
    } else {
        Ok(RateCondition::Variable {
            slopes: slopes.to_vec(),
            max_rel_dev,
        })
    }
}

/// Second derivative (2a) from the least-squares quadratic fit
/// `mean_normal ~ a t^2 + b t + c` over the window.
pub fn second_derivative(trace: &GraspTrace, t_start: f64, t_end: f64) -> Result<f64> {
    if !(t_start.is_finite() && t_end.is_finite()) || t_end < t_start {
        return Err(Error::BadWindow {
            start: t_start,
            end: t_end,
        });
    }
    let samples = trace.window(t_start, t_end);
    if samples.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: samples.len(),
        });
    }
    // Center times for conditioning; curvature is shift-invariant.
    let tbar = samples.iter().map(|s| s.t).sum::<f64>() / samples.len() as f64;
    let (mut m0, mut m1, mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
    for s in &samples {
        let t = s.t - tbar;
        let y = s.mean_normal;
        let t2 = t * t;
        m0 += 1.0;
        m1 += t;
        m2 += t2;
        m3 += t2 * t;
        m4 += t2 * t2;
        b0 += y;
        b1 += t * y;
        b2 += t2 * y;
    }
    let det = m4 * (m2 * m0 - m1 * m1) - m3 * (m3 * m0 - m1 * m2) + m2 * (m3 * m1 - m2 * m2);
    if det.abs() < 1e-30 {
        return Err(Error::param("window", "degenerate time values"));
    }
    let det_a = b2 * (m2 * m0 - m1 * m1) - m3 * (b1 * m0 - b0 * m1) + m2 * (b1 * m1 - b0 * m2);
    Ok(2.0 * det_a / det)
}

/// Hardness from the temporal slope: H = c / closing_speed, the
/// force-per-indentation slope under the constant-speed kinematics.
pub fn hardness_from_slope(c: f64, closing_speed: f64) -> Result<f64> {
    if !closing_speed.is_finite() || closing_speed <= 0.0 {
        return Err(Error::param("closing_speed", "must be positive"));
    }
    Ok(c / closing_speed)
}

/// Hardness from the force/distance differential between the contact
/// reading and the threshold reading.
pub fn hardness_from_distance(
    f_thresh: f64,
    f_contact: f64,
    d_thresh: f64,
    d_contact: f64,
) -> Result<f64> {
    let dd = d_thresh - d_contact;
    if !dd.is_finite() || dd <= 0.0 {
        return Err(Error::NonPositiveDifferential { what: "distance" });
    }
    let df = f_thresh - f_contact;
    if !df.is_finite() || df <= 0.0 {
        return Err(Error::NonPositiveDifferential { what: "force" });
    }
    Ok(df / dd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    pub(crate) fn trace_from(rate: f64, means: &[f64], delta_per_frame: f64) -> GraspTrace {
        let samples: Vec<TraceSample> = means
            .iter()
            .enumerate()
            .map(|(i, &m)| TraceSample {
                t: i as f64 / rate,
                delta: (i + 1) as f64 * delta_per_frame,
                mean_normal: m,
                max_normal: m,
                mean_shear: 0.0,
                contact_area: 1,
            })
            .collect();
        GraspTrace::new(samples, rate).unwrap()
    }

    #[test]
    fn exact_line_slope() {
        let trace = trace_from(1.0, &[0.0, 5.0, 10.0], 0.1);
        assert_relative_eq!(estimate_slope(&trace, 0.0, 2.0).unwrap(), 5.0);
    }

    #[test]
    fn flat_series_slope_zero() {
        let trace = trace_from(10.0, &[3.0; 20], 0.1);
        assert_eq!(estimate_slope(&trace, 0.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn too_few_samples_in_window() {
        let trace = trace_from(1.0, &[0.0, 5.0, 10.0], 0.1);
        assert!(estimate_slope(&trace, 0.4, 0.6).is_err());
        assert!(estimate_slope(&trace, 2.0, 1.0).is_err());
    }

    #[test]
    fn noisy_line_matches_normal_equations() {
        // Independent oracle: raw (uncentered) normal equations.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rate = 120.0;
        let means: Vec<f64> = (0..30)
            .map(|i| 3.7 * (i as f64 / rate) + 0.5 + rng.gen_range(-0.01..0.01))
            .collect();
        let trace = trace_from(rate, &means, 0.1);
        let n = means.len() as f64;
        let (mut st, mut sy, mut stt, mut sty) = (0.0, 0.0, 0.0, 0.0);
        for (i, &y) in means.iter().enumerate() {
            let t = i as f64 / rate;
            st += t;
            sy += y;
            stt += t * t;
            sty += t * y;
        }
        let oracle = (n * sty - st * sy) / (n * stt - st * st);
        let got = estimate_slope(&trace, 0.0, 1.0).unwrap();
        assert!((got - oracle).abs() < 1e-9);
    }

    #[test]
    fn profile_of_global_line_is_flat() {
        let rate = 120.0;
        let means: Vec<f64> = (0..48).map(|i| 2.0 * i as f64 / rate).collect();
        let trace = trace_from(rate, &means, 0.1);
        let profile = slope_profile(&trace, &SlopeConfig::default()).unwrap();
        assert_eq!(profile.len(), 4);
        for s in profile {
            assert_relative_eq!(s, 2.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn profile_of_piecewise_trace() {
        let rate = 120.0;
        let mut means = Vec::new();
        let mut v = 0.0;
        for i in 0..40 {
            let slope = if i < 20 { 1.0 } else { 4.0 };
            v += slope / rate;
            means.push(v);
        }
        let trace = trace_from(rate, &means, 0.1);
        let profile = slope_profile(&trace, &SlopeConfig::default()).unwrap();
        assert_relative_eq!(profile[0], 1.0, max_relative = 1e-6);
        assert_relative_eq!(profile[3], 4.0, max_relative = 1e-6);
    }

    #[test]
    fn profile_needs_enough_samples() {
        let trace = trace_from(120.0, &[0.0, 1.0, 2.0], 0.1);
        let cfg = SlopeConfig {
            subwindows: 4,
            ..SlopeConfig::default()
        };
        assert!(matches!(
            slope_profile(&trace, &cfg),
            Err(Error::TooFewSamples { need: 8, got: 3 })
        ));
    }

    #[test]
    fn classify_constant_slopes() {
        let cfg = SlopeConfig::default();
        match classify_rate(&[5.0, 5.0, 5.0, 5.0], &cfg).unwrap() {
            RateCondition::Constant { c } => assert_eq!(c, 5.0),
            other => panic!("expected constant, got {other:?}"),
        }
    }

    #[test]
    fn classify_variable_with_outlier() {
        // mean 1.75, max deviation |4 - 1.75| / 1.75 = 9/7
        let cfg = SlopeConfig::default();
        match classify_rate(&[1.0, 1.0, 1.0, 4.0], &cfg).unwrap() {
            RateCondition::Variable { max_rel_dev, .. } => {
                assert_relative_eq!(max_rel_dev, 9.0 / 7.0, max_relative = 1e-12);
            }
            other => panic!("expected variable, got {other:?}"),
        }
    }

    #[test]
    fn classify_nearly_constant() {
        // mean 5.1, max deviation 0.3/5.1 ~ 0.0588
        let cfg = SlopeConfig::default();
        match classify_rate(&[5.4, 4.8, 5.0, 5.2], &cfg).unwrap() {
            RateCondition::Constant { c } => {
                assert_relative_eq!(c, 5.1, max_relative = 1e-12);
            }
            other => panic!("expected constant, got {other:?}"),
        }
    }

    #[test]
    fn classify_zero_mean_is_error() {
        let cfg = SlopeConfig::default();
        assert!(matches!(
            classify_rate(&[1.0, -1.0], &cfg),
            Err(Error::ZeroMeanSlope)
        ));
    }

    #[test]
    fn quadratic_curvature_recovered() {
        let rate = 60.0;
        let means: Vec<f64> = (0..40)
            .map(|i| {
                let t = i as f64 / rate;
                2.0 * t * t
            })
            .collect();
        let trace = trace_from(rate, &means, 0.1);
        let d2 = second_derivative(&trace, 0.0, 1.0).unwrap();
        assert!((d2 - 4.0).abs() < 1e-9, "d2 = {d2}");
    }

    #[test]
    fn line_has_zero_curvature() {
        let rate = 60.0;
        let means: Vec<f64> = (0..40).map(|i| 3.0 * i as f64 / rate + 1.0).collect();
        let trace = trace_from(rate, &means, 0.1);
        let d2 = second_derivative(&trace, 0.0, 1.0).unwrap();
        assert!(d2.abs() < 1e-9, "d2 = {d2}");
    }

    #[test]
    fn curvature_needs_three_samples() {
        let trace = trace_from(1.0, &[0.0, 1.0, 2.0], 0.1);
        assert!(second_derivative(&trace, 0.0, 1.0).is_err());
    }

    #[test]
    fn hardness_from_slope_examples() {
        assert_relative_eq!(hardness_from_slope(5.0, 10.0).unwrap(), 0.5);
        assert_eq!(hardness_from_slope(0.0, 10.0).unwrap(), 0.0);
        assert!(hardness_from_slope(5.0, 0.0).is_err());
        assert!(hardness_from_slope(5.0, -1.0).is_err());
    }

    #[test]
    fn hardness_from_distance_examples() {
        let h = hardness_from_distance(20.0, 0.5, 6.0, 1.5).unwrap();
        assert_relative_eq!(h, 19.5 / 4.5, max_relative = 1e-12);
        assert!(hardness_from_distance(20.0, 0.5, 1.5, 1.5).is_err());
        // doubling the force differential doubles H
        let h2 = hardness_from_distance(0.5 + 2.0 * 19.5, 0.5, 6.0, 1.5).unwrap();
        assert_relative_eq!(h2, 2.0 * h, max_relative = 1e-12);
    }

    #[test]
    fn slope_invariant_under_time_translation() {
        let rate = 120.0;
        let means: Vec<f64> = (0..40).map(|i| 1.3 * i as f64 / rate + 0.2).collect();
        let base = trace_from(rate, &means, 0.1);
        let shift = 7.0;
        let shifted_samples: Vec<TraceSample> = base
            .samples()
            .iter()
            .map(|s| TraceSample {
                t: s.t + shift,
                ..*s
            })
            .collect();
        let shifted = GraspTrace::new(shifted_samples, rate).unwrap();
        let a = estimate_slope(&base, 0.0, 0.3).unwrap();
        let b = estimate_slope(&shifted, shift, shift + 0.3).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn scaling_forces_scales_estimates(a in 0.1f64..10.0) {
            let rate = 120.0;
            let means: Vec<f64> = (0..40)
                .map(|i| {
                    let t = i as f64 / rate;
                    2.0 * t * t + 3.0 * t + 0.5
                })
                .collect();
            let scaled: Vec<f64> = means.iter().map(|m| a * m).collect();
            let t1 = trace_from(rate, &means, 0.1);
            let t2 = trace_from(rate, &scaled, 0.1);
            let s1 = estimate_slope(&t1, 0.0, 0.3).unwrap();
            let s2 = estimate_slope(&t2, 0.0, 0.3).unwrap();
            prop_assert!((a * s1 - s2).abs() < 1e-9 * (1.0 + s2.abs()));
            let d1 = second_derivative(&t1, 0.0, 0.3).unwrap();
            let d2 = second_derivative(&t2, 0.0, 0.3).unwrap();
            prop_assert!((a * d1 - d2).abs() < 1e-9 * (1.0 + d2.abs()));
            let h1 = hardness_from_slope(s1, 10.0).unwrap();
            let h2 = hardness_from_slope(s2, 10.0).unwrap();
            prop_assert!((a * h1 - h2).abs() < 1e-9 * (1.0 + h2.abs()));
        }

        #[test]
        fn linear_traces_always_classify_constant(
            slope in 0.1f64..50.0,
            eps in 0.001f64..2.0,
            subwindows in 2usize..6,
        ) {
            let rate = 120.0;
            let means: Vec<f64> = (0..60).map(|i| slope * i as f64 / rate).collect();
            let trace = trace_from(rate, &means, 0.1);
            let cfg = SlopeConfig { subwindows, rate_tolerance: eps, ..SlopeConfig::default() };
            let profile = slope_profile(&trace, &cfg).unwrap();
            let is_constant = matches!(
                classify_rate(&profile, &cfg).unwrap(),
                RateCondition::Constant { .. }
            );
            prop_assert!(is_constant);
        }
    }
}
