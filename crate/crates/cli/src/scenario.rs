//! JSON scenario format: one fruit plus the simulator, controller, and
//! sensing parameters for a run. Unknown keys are rejected; absent
//! optional sections fall back to the documented defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tactile_core::control::{ControllerConfig, GraspMode, PipelineConfig};
use tactile_core::force::{DecompositionCalib, SegmentationConfig};
use tactile_core::hardness::SlopeConfig;
use tactile_core::sim::{FruitModel, SimConfig, SlipInjection};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub fruit: FruitModel,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub controller: ControllerConfig,
    /// Defaults to gains equal to the gel stiffness, so recovered forces
    /// match the simulator's internal ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionCalib>,
    #[serde(default)]
    pub segmentation: SegmentationConfig,
    #[serde(default)]
    pub slope: SlopeConfig,
    /// Ripeness schedule (days since day zero), for the ripeness command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub days: Option<Vec<f64>>,
    /// Scheduled slip, for the slip command. Zero drift injects nothing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slip_injection: Option<SlipInjection>,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), String> {
        self.fruit.validate().map_err(|e| format!("fruit: {e}"))?;
        self.sim.validate().map_err(|e| format!("sim: {e}"))?;
        self.controller
            .validate()
            .map_err(|e| format!("controller: {e}"))?;
        self.decomposition()
            .validate()
            .map_err(|e| format!("decomposition: {e}"))?;
        self.segmentation
            .validate()
            .map_err(|e| format!("segmentation: {e}"))?;
        self.slope.validate().map_err(|e| format!("slope: {e}"))?;
        match self.controller.mode {
            GraspMode::FixedDistance(m) => {
                if m.target > self.controller.max_closure {
                    return Err(
                        "controller.mode.target: must not exceed controller.max_closure".into()
                    );
                }
            }
            GraspMode::ForceThreshold(m) => {
                if m.threshold <= self.controller.contact_threshold {
                    return Err(
                        "controller.mode.threshold: must exceed controller.contact_threshold"
                            .into(),
                    );
                }
            }
        }
        if let Some(inj) = &self.slip_injection {
            if !inj.t_slip.is_finite() || inj.t_slip < 0.0 {
                return Err("slip_injection.t_slip: must be non-negative".into());
            }
            if !inj.drift.is_finite() || inj.drift < 0.0 {
                return Err("slip_injection.drift: must be non-negative".into());
            }
        }
        if let Some(days) = &self.days {
            if days.iter().any(|d| !d.is_finite() || *d < 0.0) {
                return Err("days: entries must be non-negative".into());
            }
            if days.windows(2).any(|w| w[0] >= w[1]) {
                return Err("days: must be strictly increasing".into());
            }
        }
        Ok(())
    }

    /// Effective decomposition gains; absent gains calibrate to the gel.
    pub fn decomposition(&self) -> DecompositionCalib {
        self.decomposition.unwrap_or(DecompositionCalib {
            normal_gain: self.sim.gel_stiffness,
            shear_gain: self.sim.gel_stiffness,
        })
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            decomposition: self.decomposition(),
            segmentation: self.segmentation,
            slope: self.slope,
        }
    }

    /// Slip injection to apply, if any; zero drift means none.
    pub fn effective_slip(&self) -> Option<SlipInjection> {
        self.slip_injection.filter(|inj| inj.drift > 0.0)
    }

    /// Digest of the effective scenario, recorded in every output header.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scenario serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in hasher.finalize() {
            hex.push_str(&format!("{byte:02x}"));
        }
        format!("sha256:{hex}")
    }
}

pub fn parse_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let scenario: Scenario = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    scenario
        .validate()
        .map_err(|msg| CliError::Validation(format!("{}: {msg}", path.display())))?;
    Ok(scenario)
}

pub fn serialize_scenario(scenario: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(scenario).expect("scenario serializes");
    text.push('\n');
    text
}
