//! Cross-module checks that chain the simulator, controller, and
//! analytics together.

use tactile_core::classify::detect_escalation;
use tactile_core::control::{
    run_fixed_distance, ControllerConfig, FixedDistanceMode, GraspMode, PipelineConfig,
};
use tactile_core::hardness::SlopeConfig;
use tactile_core::presets;
use tactile_core::sim::{effective_stiffness, SimConfig};

fn fixed(target: f64) -> ControllerConfig {
    ControllerConfig {
        mode: GraspMode::FixedDistance(FixedDistanceMode { target }),
        ..ControllerConfig::default()
    }
}

#[test]
fn slope_hardness_tracks_the_sphere_foundation_law() {
    // For a sphere on the elastic foundation the mean normal force over
    // the contact disk is k_eff * delta / 2, so dF/ddelta = k_eff / 2.
    let sim = SimConfig {
        noise_sigma: 0.0,
        ..SimConfig::default()
    };
    let model = presets::strawberry();
    let ke = effective_stiffness(&model, sim.gel_stiffness, 5.0);
    let analytic = ke / 2.0;

    // With the identity kernel the segmented region is the contact disk
    // itself, so the estimate lands on the law almost exactly.
    let mut pipe = PipelineConfig::calibrated(&sim);
    pipe.segmentation.filter_kernel = 1;
    let outcome = run_fixed_distance(&model, &sim, &fixed(10.0), &pipe, None).unwrap();
    let h = outcome.report.unwrap().h;
    let rel = (h - analytic).abs() / analytic;
    assert!(rel <= 0.10, "H {h} vs analytic {analytic} differs {rel:.3}");

    // The default 3x3 filter widens the region past the disk rim and
    // dilutes the mean; over the full closing span it stays within 10%.
    let pipe = PipelineConfig::calibrated(&sim);
    let outcome = run_fixed_distance(&model, &sim, &fixed(10.0), &pipe, None).unwrap();
    let contact = outcome.contact_at.unwrap();
    let slope = tactile_core::hardness::estimate_slope(
        &outcome.trace,
        contact.t,
        contact.t + 10.0 / sim.closing_speed,
    )
    .unwrap();
    let h_full = tactile_core::hardness::hardness_from_slope(slope, sim.closing_speed).unwrap();
    let rel = (h_full - analytic).abs() / analytic;
    assert!(
        rel <= 0.10,
        "full-span H {h_full} vs analytic {analytic} differs {rel:.3}"
    );
}

#[test]
fn escalation_onset_localizes_the_core() {
    let sim = SimConfig::default();
    let pipe = PipelineConfig::calibrated(&sim);
    let cucumber = presets::cucumber();
    let outcome = run_fixed_distance(&cucumber, &sim, &fixed(25.0), &pipe, None).unwrap();
    let contact = outcome.contact_at.unwrap();
    let end_t = contact.t + 25.0 / sim.closing_speed;
    let closing = outcome.trace.slice(contact.t, end_t).unwrap();

    // 20 subwindows over the 2.5 s closing span give 1.25 mm resolution
    let cfg = SlopeConfig {
        subwindows: 20,
        ..SlopeConfig::default()
    };
    let found = detect_escalation(&closing, &cfg)
        .unwrap()
        .expect("layered model escalates");
    assert!(found.slope_ratio >= 3.0, "ratio {}", found.slope_ratio);

    let onset_closure = contact.closure + (found.t_onset - contact.t) * sim.closing_speed;
    let core_onset = cucumber.core_onset.unwrap();
    assert!(
        (onset_closure - core_onset).abs() <= 2.0,
        "detected onset at {onset_closure} mm, core at {core_onset} mm"
    );
}

#[test]
fn slope_window_placement_selects_the_regime() {
    // On a layered fruit grasped past the core onset, the first window
    // sees the soft shell and the last window the escalated core.
    let sim = SimConfig::default();
    let mut pipe = PipelineConfig::calibrated(&sim);
    let first =
        run_fixed_distance(&presets::cucumber(), &sim, &fixed(25.0), &pipe, None)
            .unwrap()
            .report
            .unwrap()
            .c;
    pipe.slope.placement = tactile_core::hardness::SlopePlacement::LastWindow;
    let last = run_fixed_distance(&presets::cucumber(), &sim, &fixed(25.0), &pipe, None)
        .unwrap()
        .report
        .unwrap()
        .c;
    assert!(
        last > 3.0 * first,
        "last-window slope {last} should dwarf first-window slope {first}"
    );
}

#[test]
fn constant_stiffness_never_escalates_in_a_grasp() {
    let sim = SimConfig::default();
    let pipe = PipelineConfig::calibrated(&sim);
    let outcome =
        run_fixed_distance(&presets::strawberry(), &sim, &fixed(10.0), &pipe, None).unwrap();
    let contact = outcome.contact_at.unwrap();
    let closing = outcome
        .trace
        .slice(contact.t, contact.t + 1.0)
        .unwrap();
    let found = detect_escalation(&closing, &SlopeConfig::default()).unwrap();
    assert!(found.is_none());
}
