//! Electron observables of the ansatz: RMS charge, magnetic moment, spin
//! angular momentum, total energy and phase velocity.
//!
//! Each quadrature value is computed from pointwise field quantities on a
//! [`QuadratureGrid`]; the time averages at each node are taken numerically
//! over one period. The closed forms are evaluated independently so the two
//! routes can be compared.

use crate::constants::PhysicalConstants;
use crate::fields::{period_mean, period_rms, Ansatz, AnsatzParams, FieldModel};
use crate::geometry::{build_grid, integrate, GeometryError, QuadratureGrid, Resolution};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};

/// Relative tolerance for `omega R0 = 2c` when reporting the phase velocity.
pub const FARADAY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservablePair {
    pub closed_form: f64,
    pub quadrature: f64,
    /// `quadrature / closed_form - 1`.
    pub rel_difference: f64,
}

impl ObservablePair {
    pub fn new(closed_form: f64, quadrature: f64) -> Self {
        let rel_difference = if closed_form == 0.0 {
            if quadrature == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            quadrature / closed_form - 1.0
        };
        Self {
            closed_form,
            quadrature,
            rel_difference,
        }
    }
}

/// Closed-form moment and the `1/2 int R x J dV` diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticMoment {
    pub closed_form: f64,
    pub quadrature_diagnostic: f64,
    /// `quadrature_diagnostic / closed_form`; recorded, not asserted.
    pub diagnostic_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularMomentum {
    /// Magnitudes of `L_z`.
    pub magnitude: ObservablePair,
    /// Signed quadrature `L_z`; negative because the averaged momentum
    /// flows along `-a_phi`.
    pub signed_quadrature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseVelocity {
    /// `omega R0` (m/s).
    pub value: f64,
    pub faraday_consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    pub q_rms: ObservablePair,
    pub mu_z: MagneticMoment,
    pub l_z: AngularMomentum,
    #[serde(rename = "U")]
    pub energy: ObservablePair,
    pub v_phase: PhaseVelocity,
    pub resolution: Resolution,
}

/// RMS charge: integral of the pointwise time-RMS of `rho`, against
/// `sqrt(2) pi^2 eps0 E0 r0^2`.
pub fn q_rms(ansatz: &Ansatz, grid: &QuadratureGrid) -> Result<ObservablePair, GeometryError> {
    let p = ansatz.params();
    let period = p.period();
    let quadrature = integrate(|n| period_rms(period, |t| ansatz.charge_density(n.position, t)), grid)?;
    let closed = SQRT_2 * PI * PI * ansatz.constants().eps0 * p.e0() * p.minor_radius().powi(2);
    Ok(ObservablePair::new(closed, quadrature))
}

/// `sqrt(2) eps0 pi c E0 R0 r0^2 (1 + r0^2 / (2 R0^2))`.
pub fn magnetic_moment_closed(p: &AnsatzParams, k: &PhysicalConstants) -> f64 {
    let (big, small) = (p.major_radius(), p.minor_radius());
    SQRT_2 * k.eps0 * PI * k.c * p.e0() * big * small * small * (1.0 + small * small / (2.0 * big * big))
}

/// `1/2 int (x_vec x J)_z dV = 1/2 int R J_phi dV` with `J_phi` replaced by
/// its pointwise time-RMS.
pub fn magnetic_moment_quadrature_diagnostic(
    ansatz: &Ansatz,
    grid: &QuadratureGrid,
) -> Result<MagneticMoment, GeometryError> {
    let period = ansatz.params().period();
    let quadrature = 0.5
        * integrate(
            |n| n.position.radius * period_rms(period, |t| ansatz.current_density(n.position, t)[1]),
            grid,
        )?;
    let closed = magnetic_moment_closed(ansatz.params(), ansatz.constants());
    Ok(MagneticMoment {
        closed_form: closed,
        quadrature_diagnostic: quadrature,
        diagnostic_ratio: quadrature / closed,
    })
}

/// `(1/c) eps0 E0^2 pi^2 R0^2 r0^2 (1 + r0^2 / (4 R0^2))`.
pub fn angular_momentum_closed(p: &AnsatzParams, k: &PhysicalConstants) -> f64 {
    let (big, small) = (p.major_radius(), p.minor_radius());
    k.eps0 * p.e0() * p.e0() * PI * PI * big * big * small * small * (1.0 + small * small / (4.0 * big * big)) / k.c
}

pub fn angular_momentum(ansatz: &Ansatz, grid: &QuadratureGrid) -> Result<AngularMomentum, GeometryError> {
    let signed = integrate(|n| ansatz.angular_momentum_density_avg(n.position)[2], grid)?;
    let closed = angular_momentum_closed(ansatz.params(), ansatz.constants());
    Ok(AngularMomentum {
        magnitude: ObservablePair::new(closed, signed.abs()),
        signed_quadrature: signed,
    })
}

/// `eps0 pi^2 R0 r0^2 E0^2 (5/2 + r0^2 / (8 R0^2))`.
pub fn total_energy_closed(p: &AnsatzParams, k: &PhysicalConstants) -> f64 {
    let (big, small) = (p.major_radius(), p.minor_radius());
    k.eps0 * PI * PI * big * small * small * p.e0() * p.e0() * (2.5 + small * small / (8.0 * big * big))
}

pub fn total_energy(ansatz: &Ansatz, grid: &QuadratureGrid) -> Result<ObservablePair, GeometryError> {
    let quadrature = integrate(|n| ansatz.energy_density_closed(n.position), grid)?;
    Ok(ObservablePair::new(
        total_energy_closed(ansatz.params(), ansatz.constants()),
        quadrature,
    ))
}

/// Time average of the textbook energy density integrated over the torus.
/// Diagnostic only; it does not reproduce the closed-form total energy.
pub fn total_energy_convention_diagnostic(ansatz: &Ansatz, grid: &QuadratureGrid) -> Result<f64, GeometryError> {
    let period = ansatz.params().period();
    integrate(
        |n| period_mean(period, |t| ansatz.energy_density_convention(n.position, t)),
        grid,
    )
}

/// Phase velocity `omega R0` of the circulating wavefront.
pub fn phase_velocity(p: &AnsatzParams, k: &PhysicalConstants) -> PhaseVelocity {
    PhaseVelocity {
        value: p.omega() * p.major_radius(),
        faraday_consistent: p.faraday_detuning(k).abs() < FARADAY_TOLERANCE,
    }
}

pub fn evaluate(ansatz: &Ansatz, grid: &QuadratureGrid) -> Result<ObservableSet, GeometryError> {
    Ok(ObservableSet {
        q_rms: q_rms(ansatz, grid)?,
        mu_z: magnetic_moment_quadrature_diagnostic(ansatz, grid)?,
        l_z: angular_momentum(ansatz, grid)?,
        energy: total_energy(ansatz, grid)?,
        v_phase: phase_velocity(ansatz.params(), ansatz.constants()),
        resolution: grid.resolution(),
    })
}

/// Builds the grid for `ansatz` at `resolution` and evaluates every observable.
pub fn evaluate_at(ansatz: &Ansatz, resolution: Resolution) -> Result<ObservableSet, GeometryError> {
    evaluate(ansatz, &build_grid(ansatz.geometry(), resolution)?)
}
