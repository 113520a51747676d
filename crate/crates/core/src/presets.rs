//! Default fruit models spanning the soft-to-hard spectrum, calibrated so
//! that default scenarios cross the 20 ru force threshold within a
//! Table-style step-wise grasp on the desk-scale grid.

use std::f64::consts::FRAC_PI_2;

use crate::sim::{FruitGeometry, FruitModel};

/// Soft end of the spectrum.
pub fn grape() -> FruitModel {
    FruitModel {
        name: "grape".into(),
        geometry: FruitGeometry::sphere(4.0),
        shell_stiffness: 3.0,
        core_onset: None,
        core_stiffness: None,
        ripeness_decay: 0.3,
    }
}

/// Middle of the spectrum.
pub fn strawberry() -> FruitModel {
    FruitModel {
        name: "strawberry".into(),
        geometry: FruitGeometry::sphere(6.0),
        shell_stiffness: 5.0,
        core_onset: None,
        core_stiffness: None,
        ripeness_decay: 0.3,
    }
}

/// Hard end of the spectrum; layered, with a stiff core that engages
/// deep into the grasp and sharply escalates the force.
pub fn cucumber() -> FruitModel {
    FruitModel {
        name: "cucumber".into(),
        geometry: FruitGeometry::cylinder(4.5, FRAC_PI_2),
        shell_stiffness: 8.0,
        core_onset: Some(21.0),
        core_stiffness: Some(150.0),
        ripeness_decay: 0.3,
    }
}
