//! Published characterization data for two module designs, kept for
//! side-by-side comparison in reports. Measured values are physical results
//! and are never recomputed.

use serde::Serialize;

use crate::geometry::HelicoidSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    /// One standard deviation, when reported.
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StiffnessPair<T> {
    /// N/m
    pub k_ax: T,
    /// N·m/rad
    pub k_bend: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceModule {
    pub name: &'static str,
    pub spec: HelicoidSpec,
    /// Modulus the closed-form values correspond to, Pa.
    pub fitted_modulus: f64,
    pub experiment: StiffnessPair<Measured>,
    pub analytical: StiffnessPair<f64>,
    pub fem: StiffnessPair<f64>,
    /// Number of physical samples tested.
    pub samples: u32,
}

pub const SMALL_FLEXIBLE: ReferenceModule = ReferenceModule {
    name: "small-flexible",
    spec: HelicoidSpec {
        height: 0.12,
        diameter: 0.06,
        width: 0.008,
        thickness: 0.004,
        helices: 3,
    },
    fitted_modulus: 2.00e6,
    experiment: StiffnessPair {
        k_ax: Measured {
            value: 124.4,
            spread: Some(11.1),
        },
        k_bend: Measured {
            value: 0.0321,
            spread: Some(0.006),
        },
    },
    analytical: StiffnessPair {
        k_ax: 99.0,
        k_bend: 0.0326,
    },
    fem: StiffnessPair {
        k_ax: 112.4,
        k_bend: 0.0223,
    },
    samples: 6,
};

pub const LARGE_STIFF: ReferenceModule = ReferenceModule {
    name: "large-stiff",
    spec: HelicoidSpec {
        height: 0.17,
        diameter: 0.08,
        width: 0.012,
        thickness: 0.005,
        helices: 4,
    },
    fitted_modulus: 2.28e6,
    experiment: StiffnessPair {
        k_ax: Measured {
            value: 410.2,
            spread: None,
        },
        k_bend: Measured {
            value: 0.1452,
            spread: None,
        },
    },
    analytical: StiffnessPair {
        k_ax: 354.6,
        k_bend: 0.185,
    },
    fem: StiffnessPair {
        k_ax: 393.1,
        k_bend: 0.130,
    },
    samples: 1,
};

pub const MODULES: [ReferenceModule; 2] = [SMALL_FLEXIBLE, LARGE_STIFF];

/// Reference entry whose geometry equals `spec`, if any.
pub fn lookup(spec: &HelicoidSpec) -> Option<&'static ReferenceModule> {
    MODULES.iter().find(|m| m.spec == *spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs_match_presets() {
        assert_eq!(SMALL_FLEXIBLE.spec, HelicoidSpec::small_module());
        assert_eq!(LARGE_STIFF.spec, HelicoidSpec::large_module());
        assert_eq!(lookup(&HelicoidSpec::small_module()).unwrap().name, "small-flexible");
        assert!(lookup(&HelicoidSpec::literature_base()).is_none());
    }
}
