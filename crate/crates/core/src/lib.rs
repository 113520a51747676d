//! Simulated vision-based tactile sensing for grasp-force control and
//! hardness estimation of soft, fruit-like bodies.
//!
//! The toolkit models a gel-surfaced tactile sensor pressed against a
//! parameterized rigid-core/soft-shell body and runs the full perception
//! and control stack on the simulated observations:
//!
//! 1. **grid / trace** – dense per-cell field types (marker displacement,
//!    force density) and per-frame scalar trace records.
//! 2. **sim** – deterministic forward contact model: elastic-foundation
//!    (independent per-cell spring) geometry overlap, layered shell/core
//!    stiffness, ripeness decay, seeded sensor noise, and slip injection.
//! 3. **force** – displacement-to-force decomposition, box-mean filtering,
//!    contact-region segmentation, and the mean/max normal and mean shear
//!    metrics evaluated over the contact region.
//! 4. **hardness** – least-squares slope and curvature estimators over
//!    force traces, constant/variable rate classification, and the two
//!    hardness mappings (temporal slope over closing speed, or the
//!    force/distance differential).
//! 5. **control** – the closed-loop grasp controller with two modes
//!    (fixed grasping distance, step-wise normal-force threshold),
//!    contact detection, and slip detection with closure adjustment.
//! 6. **classify** – hardness-band classification, multi-day ripeness
//!    trend tracking, and stiffness-escalation onset detection.
//!
//! All types are plain values; every operation is a pure function of its
//! inputs, so simulations are bit-reproducible given a seed and may run
//! concurrently without shared state.

pub mod classify;
pub mod control;
mod error;
pub mod force;
pub mod grid;
pub mod hardness;
pub mod presets;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
pub use grid::{DisplacementField, ForceField, GridDims, ScalarGrid};
pub use trace::{frame_times, GraspTrace, TraceSample};
