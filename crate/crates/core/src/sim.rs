//! Deterministic forward contact model.
//!
//! The gel is an elastic foundation: independent per-cell springs of
//! stiffness `gel_stiffness`, so the per-cell normal force density is
//! proportional to the local penetration of the (rigid) reference
//! geometry into the gel plane. Fruit compliance enters as a spring in
//! series with the gel; layered bodies ramp from shell to core stiffness
//! over [`CORE_RAMP_WIDTH`] mm past `core_onset`.
//!
//! The emitted displacement field is scaled so that decomposing it with
//! the gel constant recovers the internal per-cell force exactly:
//! `dz = (k_eff / k_gel) * overlap`, hence `k_gel * dz = k_eff * overlap`.
//!
//! Stepping is a pure function from (state, command) to (state, frame);
//! identical seeds and command sequences produce bit-identical frames.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::grid::{DisplacementField, GridDims, ScalarGrid};
use crate::{Error, Result};

/// Width of the linear shell-to-core stiffness ramp (mm).
pub const CORE_RAMP_WIDTH: f64 = 1.0;

/// Gain applied to the (negated) gradient of the smoothed indentation to
/// produce the outward marker-spreading tangential pattern.
const TANGENTIAL_GAIN: f64 = 0.3;

/// Kernel used to smooth dz before taking its gradient.
const SMOOTHING_KERNEL: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereGeometry {
    /// Radius (mm).
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CylinderGeometry {
    /// Radius (mm).
    pub radius: f64,
    /// In-plane axis angle (rad) measured from +x.
    pub axis: f64,
}

/// Rigid reference geometry pressed into the gel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FruitGeometry {
    Sphere(SphereGeometry),
    Cylinder(CylinderGeometry),
}

impl FruitGeometry {
    pub fn sphere(radius: f64) -> Self {
        FruitGeometry::Sphere(SphereGeometry { radius })
    }

    pub fn cylinder(radius: f64, axis: f64) -> Self {
        FruitGeometry::Cylinder(CylinderGeometry { radius, axis })
    }

    pub fn radius(&self) -> f64 {
        match self {
            FruitGeometry::Sphere(s) => s.radius,
            FruitGeometry::Cylinder(c) => c.radius,
        }
    }
}

/// Geometry plus the layered stiffness and ripeness-decay parameters
/// that drive the simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FruitModel {
    pub name: String,
    pub geometry: FruitGeometry,
    /// Shell stiffness (ru/mm).
    pub shell_stiffness: f64,
    /// Closure (mm) beyond which the stiff core engages, if layered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_onset: Option<f64>,
    /// Core stiffness (ru/mm); required iff `core_onset` is present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core_stiffness: Option<f64>,
    /// Per-day exponential stiffness decay rate.
    #[serde(default)]
    pub ripeness_decay: f64,
}

impl FruitModel {
    pub fn validate(&self) -> Result<()> {
        let r = self.geometry.radius();
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::param("radius", "must be positive"));
        }
        if let FruitGeometry::Cylinder(c) = self.geometry {
            if !c.axis.is_finite() {
                return Err(Error::param("axis", "must be finite"));
            }
        }
        if !self.shell_stiffness.is_finite() || self.shell_stiffness <= 0.0 {
            return Err(Error::param("shell_stiffness", "must be positive"));
        }
        match (self.core_onset, self.core_stiffness) {
            (None, None) => {}
            (Some(onset), Some(core)) => {
                if !onset.is_finite() || onset <= 0.0 {
                    return Err(Error::param("core_onset", "must be positive"));
                }
                if !core.is_finite() || core <= self.shell_stiffness {
                    return Err(Error::param(
                        "core_stiffness",
                        "must exceed shell_stiffness",
                    ));
                }
            }
            (Some(_), None) => {
                return Err(Error::param(
                    "core_stiffness",
                    "required when core_onset is present",
                ));
            }
            (None, Some(_)) => {
                return Err(Error::param(
                    "core_onset",
                    "required when core_stiffness is present",
                ));
            }
        }
        if !self.ripeness_decay.is_finite() || self.ripeness_decay < 0.0 {
            return Err(Error::param("ripeness_decay", "must be non-negative"));
        }
        Ok(())
    }

    /// Softened copy of the model after `days` days of ripening: shell
    /// (and core, if present) stiffness scaled by `exp(-decay * days)`.
    pub fn ripen(&self, days: f64) -> Result<FruitModel> {
        if !days.is_finite() || days < 0.0 {
            return Err(Error::param("days", "must be non-negative"));
        }
        let factor = (-self.ripeness_decay * days).exp();
        Ok(FruitModel {
            shell_stiffness: self.shell_stiffness * factor,
            core_stiffness: self.core_stiffness.map(|k| k * factor),
            ..self.clone()
        })
    }
}

/// Simulator parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub dims: GridDims,
    /// Gel foundation stiffness (ru/mm).
    pub gel_stiffness: f64,
    /// Gripper closing speed (mm/s).
    pub closing_speed: f64,
    /// Sensor frame rate (Hz).
    pub frame_rate: f64,
    /// Per-cell Gaussian displacement noise sigma (mm).
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    /// Desk-scale defaults: a 64x48 grid at 0.5 mm pitch covers the same
    /// 32x24 mm area as the full 320x240 sensor at 0.1 mm pitch.
    fn default() -> Self {
        Self {
            dims: GridDims {
                width: 64,
                height: 48,
                pitch: 0.5,
            },
            gel_stiffness: 25.0,
            closing_speed: 10.0,
            frame_rate: 120.0,
            noise_sigma: 0.002,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        if !self.gel_stiffness.is_finite() || self.gel_stiffness <= 0.0 {
            return Err(Error::param("gel_stiffness", "must be positive"));
        }
        if !self.closing_speed.is_finite() || self.closing_speed <= 0.0 {
            return Err(Error::param("closing_speed", "must be positive"));
        }
        if !self.frame_rate.is_finite() || self.frame_rate <= 0.0 {
            return Err(Error::param("frame_rate", "must be positive"));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::param("noise_sigma", "must be non-negative"));
        }
        Ok(())
    }
}

/// A slip event scheduled for injection: from `t_slip` on, every frame
/// accumulates `drift` mm of uniform tangential displacement per frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlipInjection {
    /// Onset time (s).
    pub t_slip: f64,
    /// Tangential drift per frame (mm/frame).
    pub drift: f64,
}

/// Immutable simulation state; stepping returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    model: FruitModel,
    config: SimConfig,
    closure: f64,
    frame_index: u64,
    slip: Option<SlipInjection>,
    slip_accum: f64,
}

impl SimState {
    pub fn new(model: FruitModel, config: SimConfig) -> Result<Self> {
        model.validate()?;
        config.validate()?;
        Ok(Self {
            model,
            config,
            closure: 0.0,
            frame_index: 0,
            slip: None,
            slip_accum: 0.0,
        })
    }

    pub fn model(&self) -> &FruitModel {
        &self.model
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    /// Total commanded closure past first geometric touch (mm).
    pub fn closure(&self) -> f64 {
        self.closure
    }

    /// Simulation time (s); frame `i` is emitted at `i/frame_rate`.
    pub fn t(&self) -> f64 {
        self.frame_index as f64 / self.config.frame_rate
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    /// Schedules a slip event; `t_slip` must not be in the past.
    pub fn inject_slip(&self, t_slip: f64, drift: f64) -> Result<SimState> {
        if !t_slip.is_finite() || t_slip < self.t() - 1e-12 {
            return Err(Error::SlipInPast {
                t_slip,
                now: self.t(),
            });
        }
        if !drift.is_finite() || drift <= 0.0 {
            return Err(Error::param("drift", "must be positive"));
        }
        Ok(SimState {
            slip: Some(SlipInjection { t_slip, drift }),
            ..self.clone()
        })
    }

    /// Clears any active slip event and accumulated drift (the grasp has
    /// been re-secured).
    pub fn reset_slip(&self) -> SimState {
        SimState {
            slip: None,
            slip_accum: 0.0,
            ..self.clone()
        }
    }

    /// Ground-truth per-cell normal force density at the current closure.
    pub fn internal_force(&self) -> Result<ScalarGrid> {
        let overlap = geometric_overlap(&self.model, self.closure, self.config.dims)?;
        let ke = effective_stiffness(&self.model, self.config.gel_stiffness, self.closure);
        Ok(overlap.map(|v| ke * v))
    }

    /// Advances one frame: closure changes by `delta_closure` (small
    /// negative values release, down to zero), time by 1/frame_rate, and
    /// the observed displacement field is emitted.
    pub fn step(&self, delta_closure: f64) -> Result<(SimState, DisplacementField)> {
        if !delta_closure.is_finite() {
            return Err(Error::param("delta_closure", "must be finite"));
        }
        let new_closure = self.closure + delta_closure;
        if new_closure < -1e-12 {
            return Err(Error::NegativeClosure);
        }
        let new_closure = new_closure.max(0.0);
        let frame_index = self.frame_index + 1;
        let t = frame_index as f64 / self.config.frame_rate;

        let overlap = geometric_overlap(&self.model, new_closure, self.config.dims)?;
        let ke = effective_stiffness(&self.model, self.config.gel_stiffness, new_closure);
        let scale = ke / self.config.gel_stiffness;
        let mut dz = overlap.map(|v| scale * v);

        // Markers spread outward, away from the indentation peak.
        let smoothed = dz.box_mean(SMOOTHING_KERNEL)?;
        let (gx, gy) = smoothed.gradient();
        let mut dx = gx.map(|v| -TANGENTIAL_GAIN * v);
        let mut dy = gy.map(|v| -TANGENTIAL_GAIN * v);

        let slip_accum = match self.slip {
            Some(s) if t >= s.t_slip - 1e-12 => self.slip_accum + s.drift,
            _ => self.slip_accum,
        };
        if slip_accum != 0.0 {
            for v in dx.data_mut() {
                *v += slip_accum;
            }
        }

        let sigma = self.config.noise_sigma;
        if sigma > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
            rng.set_stream(frame_index);
            let dist = StandardNormal;
            let n = self.config.dims.cell_count();
            let (xs, ys, zs) = (dx.data_mut(), dy.data_mut(), dz.data_mut());
            for i in 0..n {
                let nx: f64 = dist.sample(&mut rng);
                let ny: f64 = dist.sample(&mut rng);
                let nz: f64 = dist.sample(&mut rng);
                xs[i] += sigma * nx;
                ys[i] += sigma * ny;
                zs[i] = (zs[i] + sigma * nz).max(0.0);
            }
        }

        let field = DisplacementField::new(dx, dy, dz)?;
        let state = SimState {
            closure: new_closure,
            frame_index,
            slip_accum,
            ..self.clone()
        };
        Ok((state, field))
    }
}

/// Per-cell penetration (mm) of the rigid reference geometry into the gel
/// plane at the given closure, clipped at zero. The grid is centered on
/// the sensor.
pub fn geometric_overlap(model: &FruitModel, closure: f64, dims: GridDims) -> Result<ScalarGrid> {
    if !closure.is_finite() || closure < 0.0 {
        return Err(Error::param("closure", "must be non-negative"));
    }
    let mut grid = ScalarGrid::zeros(dims)?;
    if closure == 0.0 {
        return Ok(grid);
    }
    match model.geometry {
        FruitGeometry::Sphere(SphereGeometry { radius }) => {
            for y in 0..dims.height {
                for x in 0..dims.width {
                    let (px, py) = dims.cell_center(x, y);
                    let pen = closure - (px * px + py * py) / (2.0 * radius);
                    grid.set(x, y, pen.max(0.0));
                }
            }
        }
        FruitGeometry::Cylinder(CylinderGeometry { radius, axis }) => {
            let (sin, cos) = axis.sin_cos();
            for y in 0..dims.height {
                for x in 0..dims.width {
                    let (px, py) = dims.cell_center(x, y);
                    // perpendicular distance from the axis line through the center
                    let s = (py * cos - px * sin).abs();
                    let pen = closure - s * s / (2.0 * radius);
                    grid.set(x, y, pen.max(0.0));
                }
            }
        }
    }
    Ok(grid)
}

/// Series-spring combination of the gel with the (possibly layered) fruit
/// stiffness at the given closure.
pub fn effective_stiffness(model: &FruitModel, gel_stiffness: f64, closure: f64) -> f64 {
    let fruit = match (model.core_onset, model.core_stiffness) {
        (Some(onset), Some(core)) if closure > onset => {
            let ramp = ((closure - onset) / CORE_RAMP_WIDTH).min(1.0);
            model.shell_stiffness + (core - model.shell_stiffness) * ramp
        }
        _ => model.shell_stiffness,
    };
    gel_stiffness * fruit / (gel_stiffness + fruit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sphere_model(radius: f64, shell: f64) -> FruitModel {
        FruitModel {
            name: "test-sphere".into(),
            geometry: FruitGeometry::sphere(radius),
            shell_stiffness: shell,
            core_onset: None,
            core_stiffness: None,
            ripeness_decay: 0.0,
        }
    }

    fn cylinder_model(radius: f64, axis: f64, shell: f64) -> FruitModel {
        FruitModel {
            name: "test-cylinder".into(),
            geometry: FruitGeometry::cylinder(radius, axis),
            shell_stiffness: shell,
            core_onset: None,
            core_stiffness: None,
            ripeness_decay: 0.0,
        }
    }

    fn noise_free_config() -> SimConfig {
        SimConfig {
            noise_sigma: 0.0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn overlap_zero_closure_is_zero_grid() {
        let dims = GridDims::new(16, 12, 0.5).unwrap();
        let grid = geometric_overlap(&sphere_model(10.0, 2.0), 0.0, dims).unwrap();
        assert!(grid.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sphere_contact_disk_radius() {
        // closure 2 mm on R=10 mm -> contact disk radius sqrt(2*10*2) ~ 6.325 mm
        let dims = GridDims::new(64, 48, 0.5).unwrap();
        let model = sphere_model(10.0, 2.0);
        let grid = geometric_overlap(&model, 2.0, dims).unwrap();
        let a = (2.0_f64 * 10.0 * 2.0).sqrt();
        assert_relative_eq!(a, 6.324555, max_relative = 1e-6);
        for y in 0..48 {
            for x in 0..64 {
                let (px, py) = dims.cell_center(x, y);
                let r = (px * px + py * py).sqrt();
                // independent recomputation of the clipped parabola
                let expected = (2.0 - (px * px + py * py) / 20.0).max(0.0);
                assert_eq!(grid.get(x, y), expected);
                if r >= 6.4 {
                    assert_eq!(grid.get(x, y), 0.0);
                }
                if r <= 6.2 {
                    assert!(grid.get(x, y) > 0.0);
                }
            }
        }
    }

    #[test]
    fn cylinder_strip_invariant_along_axis() {
        // axis along +x: the strip is invariant under shifts along x
        let dims = GridDims::new(64, 48, 0.5).unwrap();
        let model = cylinder_model(10.0, 0.0, 2.0);
        let grid = geometric_overlap(&model, 2.0, dims).unwrap();
        for y in 0..48 {
            let v = grid.get(0, y);
            for x in 1..64 {
                assert_eq!(grid.get(x, y), v);
            }
        }
        // strip half-width sqrt(2*R*closure) ~ 6.325 mm
        let half = (2.0_f64 * 10.0 * 2.0).sqrt();
        for y in 0..48 {
            let (_, py) = dims.cell_center(0, y);
            if py.abs() >= half + 1e-9 {
                assert_eq!(grid.get(0, y), 0.0);
            } else {
                assert!(grid.get(0, y) > 0.0);
            }
        }
    }

    #[test]
    fn equal_series_springs_halve_stiffness() {
        let model = sphere_model(10.0, 2.0);
        let ke = effective_stiffness(&model, 2.0, 1.0);
        assert_relative_eq!(ke, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn rigid_fruit_limit_approaches_gel() {
        let gel = 25.0;
        let model = sphere_model(10.0, 1e6 * gel);
        let ke = effective_stiffness(&model, gel, 1.0);
        assert_relative_eq!(ke, gel, max_relative = 1e-5);
    }

    #[test]
    fn layered_stiffness_escalates_past_onset() {
        let model = FruitModel {
            core_onset: Some(20.0),
            core_stiffness: Some(150.0),
            ..cylinder_model(4.5, std::f64::consts::FRAC_PI_2, 8.0)
        };
        let gel = 25.0;
        let k15 = effective_stiffness(&model, gel, 15.0);
        let k25 = effective_stiffness(&model, gel, 25.0);
        assert!(
            k25 > 3.0 * k15,
            "expected escalation > 3x, got {k25} vs {k15}"
        );
        // at exactly the onset the shell still governs
        assert_eq!(effective_stiffness(&model, gel, 20.0), k15);
    }

    #[test]
    fn step_without_contact_is_zero_field() {
        let state = SimState::new(sphere_model(10.0, 2.0), noise_free_config()).unwrap();
        let (next, field) = state.step(0.0).unwrap();
        assert_relative_eq!(next.t(), 1.0 / 120.0, max_relative = 1e-12);
        assert!(field.dz().data().iter().all(|&v| v == 0.0));
        assert!(field.dx().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn stepping_is_deterministic() {
        let cfg = SimConfig::default(); // noise on
        let mk = || SimState::new(sphere_model(10.0, 2.0), cfg.clone()).unwrap();
        let mut a = mk();
        let mut b = mk();
        for _ in 0..10 {
            let (na, fa) = a.step(0.1).unwrap();
            let (nb, fb) = b.step(0.1).unwrap();
            assert_eq!(fa, fb);
            a = na;
            b = nb;
        }
    }

    #[test]
    fn sphere_total_force_matches_foundation_integral() {
        // Oracle: fine-grid midpoint integration of k_eff * (delta - r^2/2R)
        // over the contact disk. For the elastic foundation this equals
        // pi * k_eff * R * delta^2 (31.4159... for R=10, k_eff=1, delta=1).
        fn oracle(radius: f64, ke: f64, delta: f64) -> f64 {
            let a = (2.0 * radius * delta).sqrt();
            let n = 2000usize;
            let h = 2.0 * a / n as f64;
            let mut total = 0.0;
            for iy in 0..n {
                let y = -a + (iy as f64 + 0.5) * h;
                for ix in 0..n {
                    let x = -a + (ix as f64 + 0.5) * h;
                    let pen = delta - (x * x + y * y) / (2.0 * radius);
                    if pen > 0.0 {
                        total += ke * pen * h * h;
                    }
                }
            }
            total
        }

        // gel and fruit springs both 2 ru/mm -> k_eff = 1
        let cfg = SimConfig {
            gel_stiffness: 2.0,
            noise_sigma: 0.0,
            ..SimConfig::default()
        };
        let state = SimState::new(sphere_model(10.0, 2.0), cfg.clone()).unwrap();
        let (state, _) = state.step(1.0).unwrap();
        let ke = effective_stiffness(state.model(), cfg.gel_stiffness, 1.0);
        assert_relative_eq!(ke, 1.0, max_relative = 1e-12);

        let expected = oracle(10.0, ke, 1.0);
        assert_relative_eq!(expected, std::f64::consts::PI * 10.0, max_relative = 1e-3);

        let pitch2 = cfg.dims.pitch * cfg.dims.pitch;
        let total = state.internal_force().unwrap().sum() * pitch2;
        assert_relative_eq!(total, expected, max_relative = 0.02);
    }

    #[test]
    fn emitted_dz_reproduces_internal_force_through_gel_constant() {
        let cfg = noise_free_config();
        let state = SimState::new(sphere_model(10.0, 2.0), cfg.clone()).unwrap();
        let (state, field) = state.step(1.5).unwrap();
        let internal = state.internal_force().unwrap();
        for (dz, f) in field.dz().data().iter().zip(internal.data()) {
            assert_relative_eq!(dz * cfg.gel_stiffness, *f, max_relative = 1e-12);
        }
    }

    #[test]
    fn total_force_nondecreasing_in_closure() {
        let cfg = noise_free_config();
        let mut state = SimState::new(sphere_model(8.0, 3.0), cfg).unwrap();
        let mut last = -1.0;
        for _ in 0..60 {
            let (next, _) = state.step(0.1).unwrap();
            let total = next.internal_force().unwrap().sum();
            assert!(total >= last);
            last = total;
            state = next;
        }
    }

    #[test]
    fn stiffer_shell_gives_strictly_greater_force() {
        let cfg = noise_free_config();
        let soft = SimState::new(sphere_model(8.0, 2.0), cfg.clone()).unwrap();
        let stiff = SimState::new(sphere_model(8.0, 4.0), cfg).unwrap();
        let (soft, _) = soft.step(2.0).unwrap();
        let (stiff, _) = stiff.step(2.0).unwrap();
        assert!(stiff.internal_force().unwrap().sum() > soft.internal_force().unwrap().sum());
    }

    #[test]
    fn release_below_zero_closure_is_rejected() {
        let state = SimState::new(sphere_model(10.0, 2.0), noise_free_config()).unwrap();
        let (state, _) = state.step(0.5).unwrap();
        assert!(state.step(-0.6).is_err());
        assert!(state.step(-0.5).is_ok());
    }

    #[test]
    fn ripen_no_decay_is_identity() {
        let model = sphere_model(10.0, 2.0);
        let aged = model.ripen(3.0).unwrap();
        assert_eq!(model, aged);
    }

    #[test]
    fn ripen_halving_rate() {
        let model = FruitModel {
            ripeness_decay: std::f64::consts::LN_2,
            ..sphere_model(10.0, 2.0)
        };
        let aged = model.ripen(1.0).unwrap();
        assert_relative_eq!(aged.shell_stiffness, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn ripen_strictly_decreasing_sequence() {
        let model = FruitModel {
            ripeness_decay: 0.3,
            core_onset: Some(21.0),
            core_stiffness: Some(150.0),
            ..sphere_model(10.0, 2.0)
        };
        let mut last_shell = f64::INFINITY;
        let mut last_core = f64::INFINITY;
        for day in 0..=4 {
            let aged = model.ripen(day as f64).unwrap();
            assert!(aged.shell_stiffness < last_shell);
            assert!(aged.core_stiffness.unwrap() < last_core);
            last_shell = aged.shell_stiffness;
            last_core = aged.core_stiffness.unwrap();
        }
        assert!(model.ripen(-1.0).is_err());
    }

    #[test]
    fn slip_injection_in_past_rejected() {
        let state = SimState::new(sphere_model(10.0, 2.0), noise_free_config()).unwrap();
        let (state, _) = state.step(0.1).unwrap();
        assert!(state.inject_slip(0.0, 0.05).is_err());
        assert!(state.inject_slip(state.t(), 0.05).is_ok());
        assert!(state.inject_slip(1.0, 0.0).is_err());
    }

    #[test]
    fn slip_drift_accumulates_then_resets() {
        let cfg = noise_free_config();
        let state = SimState::new(sphere_model(10.0, 2.0), cfg).unwrap();
        let mut state = state.inject_slip(0.0, 0.05).unwrap();
        let mut means = Vec::new();
        for _ in 0..4 {
            let (next, field) = state.step(0.1).unwrap();
            let n = field.dx().data().len() as f64;
            means.push(field.dx().sum() / n);
            state = next;
        }
        for w in means.windows(2) {
            assert!(w[1] > w[0], "drift should accumulate: {means:?}");
        }
        let state = state.reset_slip();
        let (_, field) = state.step(0.0).unwrap();
        let n = field.dx().data().len() as f64;
        let mean_after = field.dx().sum() / n;
        assert!(mean_after.abs() < 1e-9);
    }

    #[test]
    fn invalid_models_rejected() {
        assert!(sphere_model(0.0, 2.0).validate().is_err());
        assert!(sphere_model(10.0, 0.0).validate().is_err());
        let missing_core = FruitModel {
            core_onset: Some(5.0),
            ..sphere_model(10.0, 2.0)
        };
        assert!(missing_core.validate().is_err());
        let weak_core = FruitModel {
            core_onset: Some(5.0),
            core_stiffness: Some(1.0),
            ..sphere_model(10.0, 2.0)
        };
        assert!(weak_core.validate().is_err());
    }
}
