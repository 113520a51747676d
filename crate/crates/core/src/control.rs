//! Closed-loop grasp controller.
//!
//! Two modes mirror the two measurement criteria:
//!
//! * **Fixed distance** – close continuously at the configured speed to a
//!   predetermined displacement past contact, hold, and read hardness off
//!   the temporal force slope.
//! * **Force threshold** – after contact, close in discrete steps with a
//!   settle pause after each, stop at the force threshold, and read
//!   hardness off the force/distance differential.
//!
//! The loop is a strict command/observe cycle with the simulator, one
//! frame in flight at a time. Phases only progress forward
//! (Approaching, Contacted, Closing, Holding), except that a slip
//! response re-enters Holding through SlipRecovery.

use serde::{Deserialize, Serialize};

use crate::force::{frame_metrics, DecompositionCalib, SegmentationConfig};
use crate::hardness::{
    classify_rate, estimate_slope, hardness_from_distance, hardness_from_slope, second_derivative,
    slope_profile, HardnessReport, SlopeConfig, SlopePlacement,
};
use crate::grid::DisplacementField;
use crate::sim::{FruitModel, SimConfig, SimState, SlipInjection};
use crate::trace::{GraspTrace, TraceSample};
use crate::{Error, Result};

const CLOSURE_EPS: f64 = 1e-9;
const TIME_EPS: f64 = 1e-12;
/// Hard cap on simulated frames per run; trips only on degenerate configs.
const FRAME_GUARD: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedDistanceMode {
    /// Closure past contact to reach (mm).
    pub target: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForceThresholdMode {
    /// Mean normal force to stop at (ru).
    pub threshold: f64,
    /// Closure increment per step (mm).
    pub step: f64,
    /// Frames to wait after each step before stepping again.
    pub settle_frames: usize,
}

/// Grasp termination criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspMode {
    FixedDistance(FixedDistanceMode),
    ForceThreshold(ForceThresholdMode),
}

impl GraspMode {
    pub fn validate(&self) -> Result<()> {
        match self {
            GraspMode::FixedDistance(m) => {
                if !m.target.is_finite() || m.target <= 0.0 {
                    return Err(Error::param("target", "must be positive"));
                }
            }
            GraspMode::ForceThreshold(m) => {
                if !m.threshold.is_finite() || m.threshold <= 0.0 {
                    return Err(Error::param("threshold", "must be positive"));
                }
                if !m.step.is_finite() || m.step <= 0.0 {
                    return Err(Error::param("step", "must be positive"));
                }
                if m.settle_frames == 0 {
                    return Err(Error::param("settle_frames", "must be at least 1"));
                }
            }
        }
        Ok(())
    }
}

/// Slip detector and response parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SlipConfig {
    /// Mean-shear first-difference that counts as a rise (ru/frame).
    pub shear_rise_threshold: f64,
    /// Consecutive rising frames required to call a slip.
    pub consecutive_frames: usize,
    /// Extra closure applied on a detected slip (mm).
    pub response_step: f64,
}

impl Default for SlipConfig {
    fn default() -> Self {
        Self {
            shear_rise_threshold: 0.5,
            consecutive_frames: 3,
            response_step: 1.0,
        }
    }
}

impl SlipConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.shear_rise_threshold.is_finite() || self.shear_rise_threshold <= 0.0 {
            return Err(Error::param("shear_rise_threshold", "must be positive"));
        }
        if self.consecutive_frames < 2 {
            return Err(Error::param("consecutive_frames", "must be at least 2"));
        }
        if !self.response_step.is_finite() || self.response_step <= 0.0 {
            return Err(Error::param("response_step", "must be positive"));
        }
        Ok(())
    }
}

/// Controller parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerConfig {
    /// Mean normal force that counts as first contact (ru).
    pub contact_threshold: f64,
    pub mode: GraspMode,
    /// Safety bound on total closure (mm).
    pub max_closure: f64,
    /// Hold time at target before the slope readout (s), fixed-distance mode.
    pub hold_duration: f64,
    pub slip: SlipConfig,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            contact_threshold: 0.5,
            mode: GraspMode::FixedDistance(FixedDistanceMode { target: 10.0 }),
            max_closure: 30.0,
            hold_duration: 0.5,
            slip: SlipConfig::default(),
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.contact_threshold.is_finite() || self.contact_threshold <= 0.0 {
            return Err(Error::param("contact_threshold", "must be positive"));
        }
        self.mode.validate()?;
        if !self.max_closure.is_finite() || self.max_closure <= 0.0 {
            return Err(Error::param("max_closure", "must be positive"));
        }
        if !self.hold_duration.is_finite() || self.hold_duration < 0.0 {
            return Err(Error::param("hold_duration", "must be non-negative"));
        }
        self.slip.validate()
    }
}

/// Sensing-side configuration shared by both controller modes.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub decomposition: DecompositionCalib,
    pub segmentation: SegmentationConfig,
    pub slope: SlopeConfig,
}

impl PipelineConfig {
    /// Pipeline whose decomposition gains match the simulator's gel
    /// constant, so recovered forces equal the internal ones.
    pub fn calibrated(sim: &SimConfig) -> Self {
        Self {
            decomposition: DecompositionCalib {
                normal_gain: sim.gel_stiffness,
                shear_gain: sim.gel_stiffness,
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.decomposition.validate()?;
        self.segmentation.validate()?;
        self.slope.validate()
    }
}

/// Controller phase assigned to each recorded frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraspPhase {
    Approaching,
    Contacted,
    Closing,
    Holding,
    SlipRecovery,
}

/// A (time, closure) landmark within a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactPoint {
    pub t: f64,
    pub closure: f64,
}

/// A detected slip and the closure adjustment applied in response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipEvent {
    /// Detection time (s).
    pub t: f64,
    /// Extra closure actually applied (mm); clamped at max_closure.
    pub response_applied: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TargetReached,
    ThresholdReached,
    MaxClosure,
}

/// Full record of one grasp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraspOutcome {
    pub trace: GraspTrace,
    pub report: Option<HardnessReport>,
    pub contact_at: Option<ContactPoint>,
    /// Present iff the mode is force-threshold and the threshold was reached.
    pub threshold_at: Option<ContactPoint>,
    pub steps_taken: usize,
    pub slip_events: Vec<SlipEvent>,
    pub terminated_by: Termination,
    /// Per-frame controller phases, aligned with `trace.samples()`.
    pub phases: Vec<GraspPhase>,
}

/// Index of the first sample whose mean normal force reaches the contact
/// threshold, if any.
pub fn detect_contact(samples: &[TraceSample], contact_threshold: f64) -> Option<usize> {
    samples
        .iter()
        .position(|s| s.mean_normal >= contact_threshold)
}

/// Indices where the mean-shear first difference exceeds the rise
/// threshold for at least `consecutive_frames` frames while the mean
/// normal force stays within +/-20% (a tangential rise without a matching
/// normal rise). Detected events are at least one frame apart.
pub fn detect_slip(samples: &[TraceSample], slip: &SlipConfig) -> Vec<usize> {
    let m = slip.consecutive_frames;
    let mut events = Vec::new();
    let mut run = 0usize;
    for i in 1..samples.len() {
        let diff = samples[i].mean_shear - samples[i - 1].mean_shear;
        if diff > slip.shear_rise_threshold {
            run += 1;
        } else {
            run = 0;
        }
        if run >= m {
            let base = &samples[i - m];
            let normal_steady =
                (samples[i].mean_normal - base.mean_normal).abs() <= 0.20 * base.mean_normal.abs();
            if normal_steady {
                events.push(i);
            }
            run = 0;
        }
    }
    events
}

/// Runs the fixed-grasping-distance criterion.
pub fn run_fixed_distance(
    model: &FruitModel,
    sim: &SimConfig,
    ctrl: &ControllerConfig,
    pipe: &PipelineConfig,
    slip_injection: Option<SlipInjection>,
) -> Result<GraspOutcome> {
    let mode = match ctrl.mode {
        GraspMode::FixedDistance(m) => m,
        GraspMode::ForceThreshold(_) => {
            return Err(Error::param("mode", "expected fixed_distance"));
        }
    };
    if mode.target > ctrl.max_closure {
        return Err(Error::param("target", "must not exceed max_closure"));
    }
    run_grasp(model, sim, ctrl, pipe, slip_injection)
}

/// Runs the normal-force-threshold criterion.
pub fn run_force_threshold(
    model: &FruitModel,
    sim: &SimConfig,
    ctrl: &ControllerConfig,
    pipe: &PipelineConfig,
    slip_injection: Option<SlipInjection>,
) -> Result<GraspOutcome> {
    let mode = match ctrl.mode {
        GraspMode::ForceThreshold(m) => m,
        GraspMode::FixedDistance(_) => {
            return Err(Error::param("mode", "expected force_threshold"));
        }
    };
    if mode.threshold <= ctrl.contact_threshold {
        return Err(Error::param(
            "threshold",
            "must exceed contact_threshold",
        ));
    }
    run_grasp(model, sim, ctrl, pipe, slip_injection)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stage {
    Approach,
    Close,
    Step,
    Settle(usize),
    Hold,
    Respond { detected_at: f64 },
}

fn run_grasp(
    model: &FruitModel,
    sim: &SimConfig,
    ctrl: &ControllerConfig,
    pipe: &PipelineConfig,
    slip_injection: Option<SlipInjection>,
) -> Result<GraspOutcome> {
    model.validate()?;
    sim.validate()?;
    ctrl.validate()?;
    pipe.validate()?;

    let dt = 1.0 / sim.frame_rate;
    let closure_per_frame = sim.closing_speed * dt;
    let mut state = SimState::new(model.clone(), sim.clone())?;
    if let Some(inj) = slip_injection {
        state = state.inject_slip(inj.t_slip, inj.drift)?;
    }

    let mut samples: Vec<TraceSample> = Vec::new();
    let mut phases: Vec<GraspPhase> = Vec::new();

    // Resting observation at t = 0 before any motion.
    let zero = DisplacementField::zeros(sim.dims)?;
    let m0 = frame_metrics(&zero, &pipe.decomposition, &pipe.segmentation)?;
    samples.push(TraceSample {
        t: 0.0,
        delta: 0.0,
        mean_normal: m0.mean_normal,
        max_normal: m0.max_normal,
        mean_shear: m0.mean_shear,
        contact_area: m0.contact_area,
    });
    phases.push(GraspPhase::Approaching);

    let mut contact: Option<ContactPoint> = None;
    let mut contact_force = 0.0;
    let mut threshold_at: Option<ContactPoint> = None;
    let mut threshold_force = 0.0;
    let mut steps_taken = 0usize;
    let mut slip_events: Vec<SlipEvent> = Vec::new();
    let mut closing_end_t: Option<f64> = None;
    let mut hold_end = 0.0;
    let mut hold_window: Vec<TraceSample> = Vec::new();
    let mut stage = Stage::Approach;
    let terminated_by;

    loop {
        if samples.len() > FRAME_GUARD {
            return Err(Error::param("run", "exceeded the frame guard"));
        }
        let room = ctrl.max_closure - state.closure();

        // Plan the command for this frame.
        let cmd = match stage {
            Stage::Approach => {
                if room <= CLOSURE_EPS {
                    terminated_by = Termination::MaxClosure;
                    break;
                }
                closure_per_frame.min(room)
            }
            Stage::Close => {
                let c = contact.expect("closing requires contact");
                let target = match ctrl.mode {
                    GraspMode::FixedDistance(m) => m.target,
                    GraspMode::ForceThreshold(_) => unreachable!("step mode never closes continuously"),
                };
                let stop = (c.closure + target).min(ctrl.max_closure);
                closure_per_frame.min(stop - state.closure()).max(0.0)
            }
            Stage::Step => {
                let m = match ctrl.mode {
                    GraspMode::ForceThreshold(m) => m,
                    GraspMode::FixedDistance(_) => unreachable!(),
                };
                if room <= CLOSURE_EPS {
                    terminated_by = Termination::MaxClosure;
                    break;
                }
                steps_taken += 1;
                m.step.min(room)
            }
            Stage::Settle(_) | Stage::Hold => 0.0,
            Stage::Respond { .. } => {
                state = state.reset_slip();
                ctrl.slip.response_step.min(room).max(0.0)
            }
        };

        let (next, field) = state.step(cmd)?;
        state = next;
        let metrics = frame_metrics(&field, &pipe.decomposition, &pipe.segmentation)?;
        let delta = contact
            .map(|c| (state.closure() - c.closure).max(0.0))
            .unwrap_or(0.0);
        let sample = TraceSample {
            t: state.t(),
            delta,
            mean_normal: metrics.mean_normal,
            max_normal: metrics.max_normal,
            mean_shear: metrics.mean_shear,
            contact_area: metrics.contact_area,
        };

        // Transition on the new observation.
        let mut done: Option<Termination> = None;
        let phase = match stage {
            Stage::Approach => {
                if sample.mean_normal >= ctrl.contact_threshold {
                    contact = Some(ContactPoint {
                        t: sample.t,
                        closure: state.closure(),
                    });
                    contact_force = sample.mean_normal;
                    stage = match ctrl.mode {
                        GraspMode::FixedDistance(_) => Stage::Close,
                        GraspMode::ForceThreshold(_) => Stage::Step,
                    };
                    GraspPhase::Contacted
                } else {
                    GraspPhase::Approaching
                }
            }
            Stage::Close => {
                let c = contact.expect("closing requires contact");
                let target = match ctrl.mode {
                    GraspMode::FixedDistance(m) => m.target,
                    GraspMode::ForceThreshold(_) => unreachable!(),
                };
                let target_closure = c.closure + target;
                if state.closure() >= target_closure.min(ctrl.max_closure) - CLOSURE_EPS {
                    closing_end_t = Some(sample.t);
                    if target_closure <= ctrl.max_closure + CLOSURE_EPS {
                        hold_end = sample.t + ctrl.hold_duration;
                        hold_window.clear();
                        stage = Stage::Hold;
                    } else {
                        done = Some(Termination::MaxClosure);
                    }
                }
                GraspPhase::Closing
            }
            Stage::Step => {
                let m = match ctrl.mode {
                    GraspMode::ForceThreshold(m) => m,
                    GraspMode::FixedDistance(_) => unreachable!(),
                };
                stage = Stage::Settle(m.settle_frames);
                GraspPhase::Closing
            }
            Stage::Settle(left) => {
                stage = if left <= 1 {
                    Stage::Step
                } else {
                    Stage::Settle(left - 1)
                };
                GraspPhase::Closing
            }
            Stage::Hold => {
                if sample.t >= hold_end - TIME_EPS {
                    done = Some(Termination::TargetReached);
                } else {
                    hold_window.push(sample);
                    let events = detect_slip(&hold_window, &ctrl.slip);
                    if events.last() == Some(&(hold_window.len() - 1)) {
                        stage = Stage::Respond {
                            detected_at: sample.t,
                        };
                    }
                }
                GraspPhase::Holding
            }
            Stage::Respond { detected_at } => {
                slip_events.push(SlipEvent {
                    t: detected_at,
                    response_applied: cmd,
                });
                hold_window.clear();
                stage = Stage::Hold;
                GraspPhase::SlipRecovery
            }
        };

        // Threshold crossing can happen on any post-contact frame,
        // including the contact frame itself.
        if let GraspMode::ForceThreshold(m) = ctrl.mode {
            if contact.is_some()
                && threshold_at.is_none()
                && sample.mean_normal >= m.threshold
            {
                threshold_at = Some(ContactPoint {
                    t: sample.t,
                    closure: state.closure(),
                });
                threshold_force = sample.mean_normal;
                closing_end_t = Some(sample.t);
                done = Some(Termination::ThresholdReached);
            }
        }

        // In step mode, running out of closure without crossing ends the
        // run once the final (clamped) step has settled out.
        if done.is_none()
            && matches!(ctrl.mode, GraspMode::ForceThreshold(_))
            && matches!(stage, Stage::Step)
            && ctrl.max_closure - state.closure() <= CLOSURE_EPS
        {
            done = Some(Termination::MaxClosure);
        }

        samples.push(sample);
        phases.push(phase);

        if let Some(t) = done {
            terminated_by = t;
            break;
        }
    }

    let trace = GraspTrace::new(samples, sim.frame_rate)?;
    let report = match ctrl.mode {
        GraspMode::FixedDistance(_) => match (contact, closing_end_t) {
            (Some(c), Some(end_t)) => build_report(
                &trace,
                &c,
                end_t,
                &pipe.slope,
                HardnessSource::Slope {
                    closing_speed: sim.closing_speed,
                },
            )
            .ok(),
            _ => None,
        },
        GraspMode::ForceThreshold(_) => match (contact, threshold_at) {
            (Some(c), Some(th)) => build_report(
                &trace,
                &c,
                th.t,
                &pipe.slope,
                HardnessSource::Distance {
                    f_thresh: threshold_force,
                    f_contact: contact_force,
                    d_thresh: th.closure,
                    d_contact: c.closure,
                },
            )
            .ok(),
            _ => None,
        },
    };

    Ok(GraspOutcome {
        trace,
        report,
        contact_at: contact,
        threshold_at,
        steps_taken,
        slip_events,
        terminated_by,
        phases,
    })
}

enum HardnessSource {
    Slope { closing_speed: f64 },
    Distance {
        f_thresh: f64,
        f_contact: f64,
        d_thresh: f64,
        d_contact: f64,
    },
}

fn build_report(
    trace: &GraspTrace,
    contact: &ContactPoint,
    closing_end_t: f64,
    slope_cfg: &SlopeConfig,
    source: HardnessSource,
) -> Result<HardnessReport> {
    let (w_start, w_end) = match slope_cfg.placement {
        SlopePlacement::FirstWindow => {
            (contact.t, (contact.t + slope_cfg.window).min(closing_end_t))
        }
        SlopePlacement::LastWindow => {
            ((closing_end_t - slope_cfg.window).max(contact.t), closing_end_t)
        }
    };
    let c = estimate_slope(trace, w_start, w_end)?;
    let closing = trace.slice(contact.t, closing_end_t)?;
    let profile = slope_profile(&closing, slope_cfg)?;
    let rate = classify_rate(&profile, slope_cfg)?;
    let d2 = second_derivative(trace, contact.t, closing_end_t)?;
    let h = match source {
        HardnessSource::Slope { closing_speed } => hardness_from_slope(c, closing_speed)?,
        HardnessSource::Distance {
            f_thresh,
            f_contact,
            d_thresh,
            d_contact,
        } => hardness_from_distance(f_thresh, f_contact, d_thresh, d_contact)?,
    };
    let delta_max = trace.samples().iter().map(|s| s.delta).fold(0.0, f64::max);
    let peak_force = trace
        .samples()
        .iter()
        .map(|s| s.mean_normal)
        .fold(0.0, f64::max);
    Ok(HardnessReport {
        c,
        h,
        rate,
        d2,
        delta_max,
        peak_force,
    })
}
