//! Linear elastic material description and the Gent hardness conversion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_POISSON: f64 = 0.48;
pub const DEFAULT_SHORE_A: f64 = 45.0;
/// Upper end of the accepted Shore A range. The Gent expression has a pole
/// at 100.
pub const MAX_SHORE_A: f64 = 95.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MaterialError {
    #[error("Shore A hardness {0} outside (0, {MAX_SHORE_A})")]
    ShoreOutOfRange(f64),
    #[error("Young's modulus must be positive, got {0}")]
    NonPositiveModulus(f64),
    #[error("Poisson ratio must lie in [0, 0.5), got {0}")]
    PoissonOutOfRange(f64),
    #[error("modulus {0} Pa is outside the range reachable from Shore A (0, {MAX_SHORE_A})")]
    ModulusNotInvertible(f64),
    #[error("modulus {modulus} Pa disagrees with Shore A {shore_a} and no override is set")]
    ShoreModulusMismatch { shore_a: f64, modulus: f64 },
}

/// Young's modulus in Pa from Shore A hardness (Gent).
pub fn modulus_from_shore_a(shore_a: f64) -> Result<f64, MaterialError> {
    if !(shore_a > 0.0 && shore_a < MAX_SHORE_A) {
        return Err(MaterialError::ShoreOutOfRange(shore_a));
    }
    let mpa = 0.0981 * (56.0 + 7.62336 * shore_a) / (0.137505 * (254.0 - 2.54 * shore_a));
    Ok(mpa * 1e6)
}

/// Inverse of [`modulus_from_shore_a`] by bisection. The map is strictly
/// increasing, so bisection on (0, 95) always brackets the root.
pub fn shore_a_from_modulus(e_pa: f64) -> Result<f64, MaterialError> {
    let lo_e = modulus_from_shore_a(f64::MIN_POSITIVE)?;
    let hi_e = modulus_from_shore_a(MAX_SHORE_A - 1e-12)?;
    if !(e_pa > lo_e && e_pa < hi_e) {
        return Err(MaterialError::ModulusNotInvertible(e_pa));
    }
    let (mut lo, mut hi) = (0.0_f64, MAX_SHORE_A);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if modulus_from_shore_a(mid)? < e_pa {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub shore_a: Option<f64>,
    /// Young's modulus, Pa.
    pub youngs_modulus: f64,
    pub poisson: f64,
    /// Set when `youngs_modulus` was given explicitly while `shore_a` is
    /// also present.
    pub modulus_overridden: bool,
}

impl Material {
    pub fn from_shore_a(name: impl Into<String>, shore_a: f64) -> Result<Self, MaterialError> {
        let e = modulus_from_shore_a(shore_a)?;
        Ok(Self {
            name: name.into(),
            shore_a: Some(shore_a),
            youngs_modulus: e,
            poisson: DEFAULT_POISSON,
            modulus_overridden: false,
        })
    }

    pub fn from_modulus(
        name: impl Into<String>,
        youngs_modulus: f64,
        poisson: f64,
    ) -> Result<Self, MaterialError> {
        let m = Self {
            name: name.into(),
            shore_a: None,
            youngs_modulus,
            poisson,
            modulus_overridden: false,
        };
        m.check()?;
        Ok(m)
    }

    /// Keeps the hardness label but replaces the modulus.
    pub fn with_modulus_override(mut self, youngs_modulus: f64) -> Result<Self, MaterialError> {
        self.youngs_modulus = youngs_modulus;
        self.modulus_overridden = self.shore_a.is_some();
        self.check()?;
        Ok(self)
    }

    pub fn with_poisson(mut self, poisson: f64) -> Result<Self, MaterialError> {
        self.poisson = poisson;
        self.check()?;
        Ok(self)
    }

    pub fn check(&self) -> Result<(), MaterialError> {
        if !(self.youngs_modulus > 0.0) || !self.youngs_modulus.is_finite() {
            return Err(MaterialError::NonPositiveModulus(self.youngs_modulus));
        }
        if !(0.0..0.5).contains(&self.poisson) {
            return Err(MaterialError::PoissonOutOfRange(self.poisson));
        }
        if let Some(s) = self.shore_a {
            let e = modulus_from_shore_a(s)?;
            if !self.modulus_overridden && (e - self.youngs_modulus).abs() > 1e-9 * e {
                return Err(MaterialError::ShoreModulusMismatch {
                    shore_a: s,
                    modulus: self.youngs_modulus,
                });
            }
        }
        Ok(())
    }

    pub fn shear_modulus(&self) -> f64 {
        shear_modulus(self)
    }

    /// Shore A 45 silicone, used when a design file names no material.
    pub fn default_silicone() -> Self {
        Self::from_shore_a("shore-a-45", DEFAULT_SHORE_A).expect("45 is in range")
    }

    /// Modulus back-fitted to the small module's analytical axial stiffness.
    pub fn small_module_fit() -> Self {
        Self::from_modulus("small-module-fit", 2.00e6, DEFAULT_POISSON).expect("valid")
    }

    /// Modulus back-fitted to the large module's analytical axial stiffness.
    pub fn large_module_fit() -> Self {
        Self::from_modulus("large-module-fit", 2.28e6, DEFAULT_POISSON).expect("valid")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "shore-a-45" | "default" => Some(Self::default_silicone()),
            "small-module-fit" => Some(Self::small_module_fit()),
            "large-module-fit" => Some(Self::large_module_fit()),
            _ => None,
        }
    }

    pub const PRESETS: [&'static str; 3] = ["shore-a-45", "small-module-fit", "large-module-fit"];
}

pub fn shear_modulus(mat: &Material) -> f64 {
    mat.youngs_modulus / (2.0 * (1.0 + mat.poisson))
}
