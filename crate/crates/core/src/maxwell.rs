//! Residual checks of the four Maxwell equations for a [`FieldModel`].
//!
//! Spatial derivatives are second-order central differences in cylindrical
//! coordinates. Time derivatives are taken two ways: by a quarter-period
//! phase shift (exact for a monochromatic field, `dF/dt = -omega F(t - T/4)`)
//! and by a central difference in `t`. Each sample keeps the worse of the
//! two. When the model is the bare ansatz the closed-form derivatives in
//! [`analytic`] give a third, independent residual.
//!
//! Samples are drawn uniformly over the tube cross-section, keeping at
//! least `10 h R0` away from the surface where the mask makes derivatives
//! undefined.

use crate::constants::PhysicalConstants;
use crate::fields::{AnsatzParams, FieldModel, Vec3};
use crate::geometry::{toroidal_to_cylindrical, Cylindrical, ToroidalPoint, TorusGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Mul, Sub};

/// Maximum normalized residual for a check to pass.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Default relative finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-5;
/// Sample points keep this many steps (times `R0`) away from the surface.
pub const BOUNDARY_MARGIN_STEPS: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaxwellError {
    #[error("point at tube distance {distance:e} m is within {margin:e} m of the torus surface")]
    TooCloseToBoundary { distance: f64, margin: f64 },
    #[error("boundary margin {margin:e} m leaves no interior in a tube of radius {minor:e} m")]
    NoInterior { margin: f64, minor: f64 },
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("sample count must be positive")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub n_points: usize,
    pub seed: u64,
    /// Relative step: `h R0` in `R` and `z`, `h` radians in `phi`.
    pub step: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            n_points: 1000,
            seed: 42,
            step: DEFAULT_STEP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Equation {
    #[serde(rename = "gauss_B")]
    GaussB,
    #[serde(rename = "gauss_E")]
    GaussE,
    #[serde(rename = "faraday")]
    Faraday,
    #[serde(rename = "ampere_continuity")]
    AmpereContinuity,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Equation::GaussB => "gauss_B",
            Equation::GaussE => "gauss_E",
            Equation::Faraday => "faraday",
            Equation::AmpereContinuity => "ampere_continuity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: Equation,
    pub n_points: usize,
    pub seed: u64,
    pub step: f64,
    /// Worst normalized residual over all samples and all derivative routes.
    pub max_rel_residual: f64,
    pub mean_rel_residual: f64,
    /// Worst residual of the finite-difference route alone.
    pub fd_max_rel_residual: f64,
    /// Worst residual of the closed-form route, when the model has one.
    pub analytic_max_rel_residual: Option<f64>,
    /// Ampere-Maxwell residual `|curl B / mu0 - eps0 dE/dt - J|` normalized
    /// by `eps0 omega E0`; only for `ampere_continuity`.
    pub ampere_max_rel_residual: Option<f64>,
    pub normalization: f64,
    pub normalization_label: String,
    /// The normalization scale vanished (null field); residuals are absolute.
    pub zero_normalization: bool,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    pub reports: Vec<ResidualReport>,
    pub all_passed: bool,
}

impl Verification {
    pub fn report(&self, equation: Equation) -> Option<&ResidualReport> {
        self.reports.iter().find(|r| r.equation == equation)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ResidualReport> {
        self.reports.iter().filter(|r| !r.passed)
    }
}

/// Unique Faraday-consistent angular frequency `2c / R0`.
pub fn faraday_omega(major_radius: f64, k: &PhysicalConstants) -> f64 {
    2.0 * k.c / major_radius
}

fn check_step(h: f64) -> Result<(), MaxwellError> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(MaxwellError::InvalidStep(h))
    }
}

fn check_margin(x: Cylindrical, g: &TorusGeometry, h: f64) -> Result<(), MaxwellError> {
    check_step(h)?;
    let margin = BOUNDARY_MARGIN_STEPS * h * g.major_radius();
    let distance = g.tube_distance(x.radius, x.z);
    if distance + margin >= g.minor_radius() {
        return Err(MaxwellError::TooCloseToBoundary { distance, margin });
    }
    Ok(())
}

/// Central-difference partial derivatives of a vector field along R, phi, z.
struct Partials {
    d_radius: [Vec3; 2],
    d_phi: [Vec3; 2],
    d_z: [Vec3; 2],
    dr: f64,
    dphi: f64,
    dz: f64,
}

impl Partials {
    fn sample<F: Fn(Cylindrical) -> Vec3>(field: &F, x: Cylindrical, g: &TorusGeometry, h: f64) -> Self {
        let dr = h * g.major_radius();
        let dz = dr;
        let dphi = h;
        let at = |radius, phi, z| field(Cylindrical::new(radius, phi, z));
        Self {
            d_radius: [at(x.radius - dr, x.phi, x.z), at(x.radius + dr, x.phi, x.z)],
            d_phi: [at(x.radius, x.phi - dphi, x.z), at(x.radius, x.phi + dphi, x.z)],
            d_z: [at(x.radius, x.phi, x.z - dz), at(x.radius, x.phi, x.z + dz)],
            dr,
            dphi,
            dz,
        }
    }
}

/// `(1/R) d_R(R F_R) + (1/R) d_phi F_phi + d_z F_z` by central differences.
pub fn fd_div_cylindrical<F>(field: F, x: Cylindrical, g: &TorusGeometry, h: f64) -> Result<f64, MaxwellError>
where
    F: Fn(Cylindrical) -> Vec3,
{
    check_margin(x, g, h)?;
    let p = Partials::sample(&field, x, g, h);
    let (rm, rp) = (x.radius - p.dr, x.radius + p.dr);
    let d_radius = (rp * p.d_radius[1][0] - rm * p.d_radius[0][0]) / (2.0 * p.dr);
    let d_phi = (p.d_phi[1][1] - p.d_phi[0][1]) / (2.0 * p.dphi);
    let d_z = (p.d_z[1][2] - p.d_z[0][2]) / (2.0 * p.dz);
    Ok((d_radius + d_phi) / x.radius + d_z)
}

/// Cylindrical curl by central differences.
pub fn fd_curl_cylindrical<F>(field: F, x: Cylindrical, g: &TorusGeometry, h: f64) -> Result<Vec3, MaxwellError>
where
    F: Fn(Cylindrical) -> Vec3,
{
    check_margin(x, g, h)?;
    let p = Partials::sample(&field, x, g, h);
    let diff = |pair: &[Vec3; 2], i: usize, step: f64| (pair[1][i] - pair[0][i]) / (2.0 * step);
    let (rm, rp) = (x.radius - p.dr, x.radius + p.dr);
    let d_radius_r_fphi = (rp * p.d_radius[1][1] - rm * p.d_radius[0][1]) / (2.0 * p.dr);
    Ok(Vec3::new(
        diff(&p.d_phi, 2, p.dphi) / x.radius - diff(&p.d_z, 1, p.dz),
        diff(&p.d_z, 0, p.dz) - diff(&p.d_radius, 2, p.dr),
        (d_radius_r_fphi - diff(&p.d_phi, 0, p.dphi)) / x.radius,
    ))
}

/// Central difference in time.
pub fn fd_time_derivative<T, F>(f: F, t: f64, dt: f64) -> T
where
    T: Sub<Output = T> + Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    (f(t + dt) - f(t - dt)) * (0.5 / dt)
}

/// Exact time derivative of a monochromatic `Re[A e^{i(phi - omega t)}]`
/// via a quarter-period shift.
pub fn phase_shift_time_derivative<T, F>(f: F, t: f64, omega: f64) -> T
where
    T: Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    if omega == 0.0 {
        return f(t) * 0.0;
    }
    f(t - PI / (2.0 * omega)) * (-omega)
}

/// Closed-form derivatives of the bare ansatz, zero outside the tube.
pub mod analytic {
    use super::*;

    struct Local {
        sin: f64,
        cos: f64,
        inside: bool,
    }

    fn local(p: &AnsatzParams, x: Cylindrical, t: f64) -> Local {
        let (sin, cos) = (x.phi - p.omega() * t).sin_cos();
        Local {
            sin,
            cos,
            inside: p.geometry().contains(x.radius, x.z),
        }
    }

    fn masked<T: Default>(l: &Local, v: T) -> T {
        if l.inside {
            v
        } else {
            T::default()
        }
    }

    pub fn div_e(p: &AnsatzParams, x: Cylindrical, t: f64) -> f64 {
        let l = local(p, x, t);
        masked(&l, p.e0() * l.sin / p.major_radius())
    }

    pub fn div_b(_p: &AnsatzParams, _x: Cylindrical, _t: f64) -> f64 {
        0.0
    }

    pub fn curl_e(p: &AnsatzParams, x: Cylindrical, t: f64) -> Vec3 {
        let l = local(p, x, t);
        masked(&l, Vec3::new(0.0, 0.0, -2.0 * p.e0() / p.major_radius() * l.cos))
    }

    pub fn curl_b(p: &AnsatzParams, x: Cylindrical, t: f64) -> Vec3 {
        let l = local(p, x, t);
        masked(&l, Vec3::new(-p.b0() / x.radius * l.cos, 0.0, 0.0))
    }

    pub fn dt_e(p: &AnsatzParams, x: Cylindrical, t: f64) -> Vec3 {
        let l = local(p, x, t);
        let w = p.omega();
        let profile = 1.0 + x.radius / p.major_radius();
        masked(&l, Vec3::new(p.e0() * w * l.cos, -p.e0() * w * profile * l.sin, 0.0))
    }

    pub fn dt_b(p: &AnsatzParams, x: Cylindrical, t: f64) -> Vec3 {
        let l = local(p, x, t);
        masked(&l, Vec3::new(0.0, 0.0, p.b0() * p.omega() * l.cos))
    }

    pub fn div_j(p: &AnsatzParams, k: &PhysicalConstants, x: Cylindrical, t: f64) -> f64 {
        let l = local(p, x, t);
        masked(&l, k.eps0 * p.e0() * p.omega() * l.cos / p.major_radius())
    }

    pub fn dt_rho(p: &AnsatzParams, k: &PhysicalConstants, x: Cylindrical, t: f64) -> f64 {
        -div_j(p, k, x, t)
    }
}

/// Seeded interior `(point, t)` samples at least `10 h R0` from the surface.
pub fn sample_interior(
    p: &AnsatzParams,
    k: &PhysicalConstants,
    sampling: &Sampling,
) -> Result<Vec<(Cylindrical, f64)>, MaxwellError> {
    check_step(sampling.step)?;
    if sampling.n_points == 0 {
        return Err(MaxwellError::NoSamples);
    }
    let g = p.geometry();
    // Slightly inflated so accepted points clear the strict check in `check_margin`.
    let margin = BOUNDARY_MARGIN_STEPS * sampling.step * g.major_radius() * (1.0 + 1e-9);
    let usable = g.minor_radius() - margin;
    if usable <= 0.0 {
        return Err(MaxwellError::NoInterior {
            margin,
            minor: g.minor_radius(),
        });
    }
    let horizon = time_horizon(p, k);
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    Ok((0..sampling.n_points)
        .map(|_| {
            let tp = ToroidalPoint {
                r: usable * rng.gen::<f64>().sqrt(),
                theta: rng.gen_range(0.0..2.0 * PI),
                phi: rng.gen_range(0.0..2.0 * PI),
            };
            (toroidal_to_cylindrical(tp, &g), rng.gen_range(0.0..horizon))
        })
        .collect())
}

/// One period, or the light-crossing time `R0/c` for a static field.
fn time_horizon(p: &AnsatzParams, k: &PhysicalConstants) -> f64 {
    if p.omega() > 0.0 {
        p.period()
    } else {
        p.major_radius() / k.c
    }
}

fn time_step(p: &AnsatzParams, k: &PhysicalConstants, h: f64) -> f64 {
    if p.omega() > 0.0 {
        h / p.omega()
    } else {
        h * p.major_radius() / k.c
    }
}

fn relative(abs: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        abs / scale
    } else if abs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Per-sample absolute residuals along each route.
struct PointResidual {
    fd: f64,
    analytic: Option<f64>,
    ampere: Option<f64>,
}

struct CheckSpec<'a> {
    equation: Equation,
    normalization: f64,
    label: &'a str,
    ampere_normalization: f64,
}

fn run_check<M, F>(
    model: &M,
    sampling: &Sampling,
    spec: CheckSpec<'_>,
    residual: F,
) -> Result<ResidualReport, MaxwellError>
where
    M: FieldModel + ?Sized,
    F: Fn(Cylindrical, f64) -> Result<PointResidual, MaxwellError>,
{
    let points = sample_interior(model.params(), model.constants(), sampling)?;
    let mut fd_max: f64 = 0.0;
    let mut analytic_max: Option<f64> = None;
    let mut ampere_max: Option<f64> = None;
    let mut worst: f64 = 0.0;
    let mut sum = 0.0;
    for &(x, t) in &points {
        let r = residual(x, t)?;
        let fd = relative(r.fd, spec.normalization);
        let an = r.analytic.map(|v| relative(v, spec.normalization));
        let am = r.ampere.map(|v| relative(v, spec.ampere_normalization));
        fd_max = fd_max.max(fd);
        if let Some(v) = an {
            analytic_max = Some(analytic_max.unwrap_or(0.0).max(v));
        }
        if let Some(v) = am {
            ampere_max = Some(ampere_max.unwrap_or(0.0).max(v));
        }
        let point_worst = fd.max(an.unwrap_or(0.0)).max(am.unwrap_or(0.0));
        worst = worst.max(point_worst);
        sum += point_worst;
    }
    let mean = sum / points.len() as f64;
    Ok(ResidualReport {
        equation: spec.equation,
        n_points: points.len(),
        seed: sampling.seed,
        step: sampling.step,
        max_rel_residual: worst,
        mean_rel_residual: mean,
        fd_max_rel_residual: fd_max,
        analytic_max_rel_residual: analytic_max,
        ampere_max_rel_residual: ampere_max,
        normalization: spec.normalization,
        normalization_label: spec.label.to_string(),
        zero_normalization: !(spec.normalization > 0.0),
        tolerance: RESIDUAL_TOLERANCE,
        passed: worst < RESIDUAL_TOLERANCE,
    })
}

/// `|div B|` normalized by `E0 / (c R0)`.
pub fn check_gauss_b<M: FieldModel + ?Sized>(model: &M, sampling: &Sampling) -> Result<ResidualReport, MaxwellError> {
    let p = *model.params();
    let k = *model.constants();
    let g = p.geometry();
    let spec = CheckSpec {
        equation: Equation::GaussB,
        normalization: p.e0() / (k.c * p.major_radius()),
        label: "E0/(c*R0)",
        ampere_normalization: 0.0,
    };
    run_check(model, sampling, spec, |x, t| {
        let fd = fd_div_cylindrical(|y| model.magnetic(y, t), x, &g, sampling.step)?;
        Ok(PointResidual {
            fd: fd.abs(),
            analytic: model
                .has_closed_form_derivatives()
                .then(|| analytic::div_b(&p, x, t).abs()),
            ampere: None,
        })
    })
}

/// `|div E - rho/eps0|` normalized by `E0 / R0`.
pub fn check_gauss_e<M: FieldModel + ?Sized>(model: &M, sampling: &Sampling) -> Result<ResidualReport, MaxwellError> {
    let p = *model.params();
    let k = *model.constants();
    let g = p.geometry();
    let spec = CheckSpec {
        equation: Equation::GaussE,
        normalization: p.e0() / p.major_radius(),
        label: "E0/R0",
        ampere_normalization: 0.0,
    };
    run_check(model, sampling, spec, |x, t| {
        let source = model.charge_density(x, t) / k.eps0;
        let fd = fd_div_cylindrical(|y| model.electric(y, t), x, &g, sampling.step)?;
        Ok(PointResidual {
            fd: (fd - source).abs(),
            analytic: model
                .has_closed_form_derivatives()
                .then(|| (analytic::div_e(&p, x, t) - source).abs()),
            ampere: None,
        })
    })
}

/// `|curl E + dB/dt|` normalized by `E0 / R0`.
pub fn check_faraday<M: FieldModel + ?Sized>(model: &M, sampling: &Sampling) -> Result<ResidualReport, MaxwellError> {
    let p = *model.params();
    let k = *model.constants();
    let g = p.geometry();
    let dt = time_step(&p, &k, sampling.step);
    let spec = CheckSpec {
        equation: Equation::Faraday,
        normalization: p.e0() / p.major_radius(),
        label: "E0/R0",
        ampere_normalization: 0.0,
    };
    run_check(model, sampling, spec, |x, t| {
        let curl = fd_curl_cylindrical(|y| model.electric(y, t), x, &g, sampling.step)?;
        let db_shift = phase_shift_time_derivative(|s| model.magnetic(x, s), t, p.omega());
        let db_fd = fd_time_derivative(|s| model.magnetic(x, s), t, dt);
        Ok(PointResidual {
            fd: (curl + db_shift).norm().max((curl + db_fd).norm()),
            analytic: model
                .has_closed_form_derivatives()
                .then(|| (analytic::curl_e(&p, x, t) + analytic::dt_b(&p, x, t)).norm()),
            ampere: None,
        })
    })
}

/// Continuity `|div J + d rho/dt|` normalized by `eps0 omega E0 / R0`, plus
/// the Ampere-Maxwell consistency of `J` normalized by `eps0 omega E0`.
pub fn check_continuity<M: FieldModel + ?Sized>(
    model: &M,
    sampling: &Sampling,
) -> Result<ResidualReport, MaxwellError> {
    let p = *model.params();
    let k = *model.constants();
    let g = p.geometry();
    let dt = time_step(&p, &k, sampling.step);
    let scale = k.eps0 * p.omega() * p.e0();
    let spec = CheckSpec {
        equation: Equation::AmpereContinuity,
        normalization: scale / p.major_radius(),
        label: "eps0*omega*E0/R0",
        ampere_normalization: scale,
    };
    run_check(model, sampling, spec, |x, t| {
        let div_j = fd_div_cylindrical(|y| model.current_density(y, t), x, &g, sampling.step)?;
        let drho_shift = phase_shift_time_derivative(|s| model.charge_density(x, s), t, p.omega());
        let drho_fd = fd_time_derivative(|s| model.charge_density(x, s), t, dt);
        let fd = (div_j + drho_shift).abs().max((div_j + drho_fd).abs());

        let curl_b = fd_curl_cylindrical(|y| model.magnetic(y, t), x, &g, sampling.step)?;
        let de_shift = phase_shift_time_derivative(|s| model.electric(x, s), t, p.omega());
        let de_fd = fd_time_derivative(|s| model.electric(x, s), t, dt);
        let j = model.current_density(x, t);
        let ampere = |de: Vec3| (curl_b / k.mu0 - de * k.eps0 - j).norm();

        Ok(PointResidual {
            fd,
            analytic: model
                .has_closed_form_derivatives()
                .then(|| (analytic::div_j(&p, &k, x, t) + analytic::dt_rho(&p, &k, x, t)).abs()),
            ampere: Some(ampere(de_shift).max(ampere(de_fd))),
        })
    })
}

/// Runs all four checks.
pub fn full_verification<M: FieldModel + ?Sized>(model: &M, sampling: &Sampling) -> Result<Verification, MaxwellError> {
    let reports = vec![
        check_gauss_b(model, sampling)?,
        check_gauss_e(model, sampling)?,
        check_faraday(model, sampling)?,
        check_continuity(model, sampling)?,
    ];
    let all_passed = reports.iter().all(|r| r.passed);
    Ok(Verification { reports, all_passed })
}

/// Worst normalized disagreement between finite-difference and closed-form
/// operators of the ansatz over a set of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorDiscrepancy {
    pub step: f64,
    pub div_e: f64,
    pub curl_e: f64,
    pub curl_b: f64,
    pub div_j: f64,
}

impl OperatorDiscrepancy {
    pub fn max(&self) -> f64 {
        self.div_e.max(self.curl_e).max(self.curl_b).max(self.div_j)
    }
}

pub fn operator_discrepancy(
    ansatz: &crate::fields::Ansatz,
    points: &[(Cylindrical, f64)],
    h: f64,
) -> Result<OperatorDiscrepancy, MaxwellError> {
    let p = *ansatz.params();
    let k = *ansatz.constants();
    let g = p.geometry();
    let e_scale = p.e0() / p.major_radius();
    let b_scale = p.b0() / p.major_radius();
    let j_scale = k.eps0 * p.omega() * p.e0() / p.major_radius();
    let mut out = OperatorDiscrepancy {
        step: h,
        div_e: 0.0,
        curl_e: 0.0,
        curl_b: 0.0,
        div_j: 0.0,
    };
    for &(x, t) in points {
        let div_e = fd_div_cylindrical(|y| ansatz.electric(y, t), x, &g, h)?;
        let curl_e = fd_curl_cylindrical(|y| ansatz.electric(y, t), x, &g, h)?;
        let curl_b = fd_curl_cylindrical(|y| ansatz.magnetic(y, t), x, &g, h)?;
        let div_j = fd_div_cylindrical(|y| ansatz.current_density(y, t), x, &g, h)?;
        out.div_e = out.div_e.max((div_e - analytic::div_e(&p, x, t)).abs() / e_scale);
        out.curl_e = out.curl_e.max((curl_e - analytic::curl_e(&p, x, t)).norm() / e_scale);
        out.curl_b = out.curl_b.max((curl_b - analytic::curl_b(&p, x, t)).norm() / b_scale);
        out.div_j = out.div_j.max((div_j - analytic::div_j(&p, &k, x, t)).abs() / j_scale);
    }
    Ok(out)
}
