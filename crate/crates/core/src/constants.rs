//! CODATA 2018 physical constants and the electron reference scales.
//!
//! Values are hard-coded so every run compares against the same numbers.
//! The fine-structure constant is stored as published and can also be
//! recomputed from the electromagnetic constants; [`PhysicalConstants::check`]
//! compares the two.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance on `mu0 * eps0 * c^2 = 1`.
pub const VACUUM_IDENTITY_TOLERANCE: f64 = 1e-12;
/// Tolerance between stored alpha and `e^2 / (4 pi eps0 hbar c)`.
pub const ALPHA_TOLERANCE: f64 = 1e-9;

/// SI constants used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Speed of light in vacuum (m/s), exact.
    pub c: f64,
    /// Vacuum permittivity (F/m).
    pub eps0: f64,
    /// Vacuum permeability (H/m).
    pub mu0: f64,
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Elementary charge magnitude (C), exact.
    #[serde(rename = "e")]
    pub e_charge: f64,
    /// Electron mass (kg).
    pub m_e: f64,
    /// Fine-structure constant.
    pub alpha: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: Self = Self {
        c: 299_792_458.0,
        eps0: 8.854_187_812_8e-12,
        mu0: 1.256_637_062_12e-6,
        hbar: 1.054_571_817e-34,
        e_charge: 1.602_176_634e-19,
        m_e: 9.109_383_701_5e-31,
        alpha: 7.297_352_569_3e-3,
    };

    /// `e^2 / (4 pi eps0 hbar c)`, independent of the stored `alpha`.
    pub fn alpha_from_definition(&self) -> f64 {
        self.e_charge * self.e_charge / (4.0 * PI * self.eps0 * self.hbar * self.c)
    }

    /// Relative deviation of `mu0 eps0 c^2` from one.
    pub fn vacuum_identity_deviation(&self) -> f64 {
        self.mu0 * self.eps0 * self.c * self.c - 1.0
    }

    /// Relative deviation of the stored alpha from its definition.
    pub fn alpha_deviation(&self) -> f64 {
        self.alpha_from_definition() / self.alpha - 1.0
    }

    /// Verifies both transcription invariants.
    pub fn check(&self) -> Result<(), ConstantsError> {
        let vac = self.vacuum_identity_deviation();
        if !(vac.abs() <= VACUUM_IDENTITY_TOLERANCE) {
            return Err(ConstantsError::VacuumIdentity(vac));
        }
        let da = self.alpha_deviation();
        if !(da.abs() <= ALPHA_TOLERANCE) {
            return Err(ConstantsError::FineStructure(da));
        }
        Ok(())
    }

    pub fn derived(&self) -> DerivedScales {
        derived_scales(self)
    }

    /// Schwinger anomalous-moment factor `1 + alpha / (2 pi)`.
    pub fn schwinger_factor(&self) -> f64 {
        1.0 + self.alpha / (2.0 * PI)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstantsError {
    #[error("mu0*eps0*c^2 deviates from 1 by {0:e}")]
    VacuumIdentity(f64),
    #[error("stored alpha deviates from e^2/(4 pi eps0 hbar c) by {0:e} relative")]
    FineStructure(f64),
}

/// Electron reference scales derived from [`PhysicalConstants`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    /// Reduced Compton wavelength `hbar / (m_e c)` (m).
    pub r_c: f64,
    /// Schwinger critical field `m_e^2 c^3 / (e hbar)` (V/m).
    #[serde(rename = "E_S")]
    pub e_schwinger: f64,
    /// Bohr magneton `e hbar / (2 m_e)` (A m^2).
    #[serde(rename = "mu_B")]
    pub mu_b: f64,
    /// Dirac (zitterbewegung) angular frequency `2 m_e c^2 / hbar` (rad/s).
    #[serde(rename = "omega_D")]
    pub omega_dirac: f64,
    /// Rest energy `m_e c^2` (J).
    pub rest_energy: f64,
}

impl DerivedScales {
    pub fn all_positive(&self) -> bool {
        [
            self.r_c,
            self.e_schwinger,
            self.mu_b,
            self.omega_dirac,
            self.rest_energy,
        ]
        .iter()
        .all(|v| v.is_finite() && *v > 0.0)
    }
}

pub fn codata_constants() -> PhysicalConstants {
    PhysicalConstants::CODATA_2018
}

pub fn derived_scales(k: &PhysicalConstants) -> DerivedScales {
    let c = k.c;
    DerivedScales {
        r_c: k.hbar / (k.m_e * c),
        e_schwinger: k.m_e * k.m_e * c * c * c / (k.e_charge * k.hbar),
        mu_b: k.e_charge * k.hbar / (2.0 * k.m_e),
        omega_dirac: 2.0 * k.m_e * c * c / k.hbar,
        rest_energy: k.m_e * c * c,
    }
}

/// Joules per MeV.
pub fn joules_per_mev(k: &PhysicalConstants) -> f64 {
    k.e_charge * 1e6
}
