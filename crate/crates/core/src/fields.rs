//! The toroidal field ansatz and its pointwise derived quantities.
//!
//! Inside the tube the complex phasors are
//!
//! ```text
//! E = i E0 e^{i psi} [ a_R + i (1 + R/R0) a_phi ],   B = i B0 e^{i psi} a_z,
//! ```
//!
//! with `psi = phi - omega t` and `B0 = E0 / c`. Outside the tube every
//! field is zero. Physical (real) fields are the componentwise real part
//! of the phasors, so `E_R = -E0 sin psi`, `E_phi = -E0 (1 + R/R0) cos psi`
//! and `B_z = -B0 sin psi`.
//!
//! All vectors are in cylindrical components `(R, phi, z)`.

use crate::constants::PhysicalConstants;
use crate::geometry::{Cylindrical, GeometryError, TorusGeometry};
use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Real vector in cylindrical components `(R, phi, z)`.
pub type Vec3 = Vector3<f64>;
/// Complex phasor vector in cylindrical components.
pub type PhasorVec3 = Vector3<Complex64>;

/// Samples per period used for time averages. Exact for harmonics below 32.
pub const AVERAGING_SAMPLES: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("amplitude E0 must be finite and non-negative, got {0}")]
    InvalidAmplitude(f64),
    #[error("angular frequency must be finite and non-negative, got {0}")]
    InvalidFrequency(f64),
}

/// The four free parameters of the ansatz plus `B0 = E0 / c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    #[serde(rename = "E0")]
    e0: f64,
    #[serde(rename = "R0")]
    major_radius: f64,
    #[serde(rename = "r0")]
    minor_radius: f64,
    omega: f64,
    #[serde(rename = "B0")]
    b0: f64,
}

impl AnsatzParams {
    /// Parameters with the Faraday-consistent frequency `omega = 2c/R0`.
    pub fn faraday(e0: f64, major_radius: f64, minor_radius: f64, k: &PhysicalConstants) -> Result<Self, FieldsError> {
        Self::with_omega(e0, major_radius, minor_radius, 2.0 * k.c / major_radius, k)
    }

    /// Parameters with an arbitrary frequency, for residual experiments.
    pub fn with_omega(
        e0: f64,
        major_radius: f64,
        minor_radius: f64,
        omega: f64,
        k: &PhysicalConstants,
    ) -> Result<Self, FieldsError> {
        TorusGeometry::new(major_radius, minor_radius)?;
        if !(e0.is_finite() && e0 >= 0.0) {
            return Err(FieldsError::InvalidAmplitude(e0));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(FieldsError::InvalidFrequency(omega));
        }
        Ok(Self {
            e0,
            major_radius,
            minor_radius,
            omega,
            b0: e0 / k.c,
        })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn major_radius(&self) -> f64 {
        self.major_radius
    }

    pub fn minor_radius(&self) -> f64 {
        self.minor_radius
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn geometry(&self) -> TorusGeometry {
        TorusGeometry::new(self.major_radius, self.minor_radius).expect("validated at construction")
    }

    /// Oscillation period `2 pi / omega`; infinite for a static field.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }

    /// `omega R0 / (2c) - 1`.
    pub fn faraday_detuning(&self, k: &PhysicalConstants) -> f64 {
        self.omega * self.major_radius / (2.0 * k.c) - 1.0
    }

    pub fn scale_amplitude(&self, factor: f64, k: &PhysicalConstants) -> Result<Self, FieldsError> {
        Self::with_omega(self.e0 * factor, self.major_radius, self.minor_radius, self.omega, k)
    }

    pub fn scale_omega(&self, factor: f64, k: &PhysicalConstants) -> Result<Self, FieldsError> {
        Self::with_omega(self.e0, self.major_radius, self.minor_radius, self.omega * factor, k)
    }
}

/// Pointwise field values at one `(point, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealFieldSample {
    pub position: Cylindrical,
    pub t: f64,
    pub e: Vec3,
    pub b: Vec3,
    pub rho: f64,
    pub j: Vec3,
    pub s: Vec3,
    /// Energy density from the closed form `eps0 E0^2 (1 + R/(4 R0))`.
    pub u: f64,
}

/// Source of real electromagnetic fields and sources for Maxwell checks.
///
/// The ansatz is the only production implementor; tests wrap it to knock
/// out individual terms.
pub trait FieldModel {
    fn params(&self) -> &AnsatzParams;
    fn constants(&self) -> &PhysicalConstants;
    fn electric(&self, x: Cylindrical, t: f64) -> Vec3;
    fn magnetic(&self, x: Cylindrical, t: f64) -> Vec3;
    fn charge_density(&self, x: Cylindrical, t: f64) -> f64;
    fn current_density(&self, x: Cylindrical, t: f64) -> Vec3;

    /// Whether the closed-form derivatives in [`crate::maxwell::analytic`]
    /// describe this model.
    fn has_closed_form_derivatives(&self) -> bool {
        false
    }
}

/// The toroidal ansatz bound to a set of constants.
#[derive(Debug, Clone, Copy)]
pub struct Ansatz {
    params: AnsatzParams,
    constants: PhysicalConstants,
    geometry: TorusGeometry,
}

impl Ansatz {
    pub fn new(params: AnsatzParams, constants: PhysicalConstants) -> Self {
        Self {
            params,
            constants,
            geometry: params.geometry(),
        }
    }

    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    fn inside(&self, x: Cylindrical) -> bool {
        self.geometry.contains(x.radius, x.z)
    }

    fn phase(&self, x: Cylindrical, t: f64) -> f64 {
        x.phi - self.params.omega * t
    }

    /// `1 + R/R0`, the azimuthal profile of `E`.
    fn azimuthal_profile(&self, radius: f64) -> f64 {
        1.0 + radius / self.params.major_radius
    }

    pub fn e_phasor(&self, x: Cylindrical, t: f64) -> PhasorVec3 {
        if !self.inside(x) {
            return PhasorVec3::zeros();
        }
        let i = Complex64::i();
        let carrier = Complex64::from_polar(self.params.e0, self.phase(x, t));
        PhasorVec3::new(
            i * carrier,
            i * carrier * i * self.azimuthal_profile(x.radius),
            Complex64::new(0.0, 0.0),
        )
    }

    pub fn b_phasor(&self, x: Cylindrical, t: f64) -> PhasorVec3 {
        if !self.inside(x) {
            return PhasorVec3::zeros();
        }
        let carrier = Complex64::from_polar(self.params.b0, self.phase(x, t));
        PhasorVec3::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::i() * carrier,
        )
    }

    /// Real instantaneous `(E, B)`.
    pub fn real_fields(&self, x: Cylindrical, t: f64) -> (Vec3, Vec3) {
        if !self.inside(x) {
            return (Vec3::zeros(), Vec3::zeros());
        }
        let (s, c) = self.phase(x, t).sin_cos();
        let e0 = self.params.e0;
        (
            Vec3::new(-e0 * s, -e0 * self.azimuthal_profile(x.radius) * c, 0.0),
            Vec3::new(0.0, 0.0, -self.params.b0 * s),
        )
    }

    /// `rho = (eps0 E0 / R0) sin psi`, the real part of `-i eps0 (E0/R0) e^{i psi}`.
    pub fn charge_density(&self, x: Cylindrical, t: f64) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        self.charge_amplitude() * self.phase(x, t).sin()
    }

    /// Peak charge density `eps0 E0 / R0`.
    pub fn charge_amplitude(&self) -> f64 {
        self.constants.eps0 * self.params.e0 / self.params.major_radius
    }

    /// `J = curl B / mu0 - eps0 dE/dt` in closed form.
    pub fn current_density(&self, x: Cylindrical, t: f64) -> Vec3 {
        if !self.inside(x) {
            return Vec3::zeros();
        }
        let (s, c) = self.phase(x, t).sin_cos();
        let k = &self.constants;
        let p = &self.params;
        let scale = k.eps0 * p.e0;
        Vec3::new(
            -scale * c * (k.c / x.radius + p.omega),
            scale * p.omega * self.azimuthal_profile(x.radius) * s,
            0.0,
        )
    }

    /// Instantaneous Poynting vector `E x B / mu0`.
    pub fn poynting(&self, x: Cylindrical, t: f64) -> Vec3 {
        let (e, b) = self.real_fields(x, t);
        e.cross(&b) / self.constants.mu0
    }

    /// Time-averaged Poynting vector, closed form: `-1/2 eps0 c E0^2 a_phi`.
    pub fn poynting_avg(&self, x: Cylindrical) -> Vec3 {
        if !self.inside(x) {
            return Vec3::zeros();
        }
        let k = &self.constants;
        Vec3::new(0.0, -0.5 * k.eps0 * k.c * self.params.e0 * self.params.e0, 0.0)
    }

    /// Time-averaged momentum density `<S> / c^2`.
    pub fn momentum_density_avg(&self, x: Cylindrical) -> Vec3 {
        let c = self.constants.c;
        self.poynting_avg(x) / (c * c)
    }

    /// Time-averaged angular momentum density `x_vec x <p>`, where the
    /// position vector is `R a_R + z a_z`.
    pub fn angular_momentum_density_avg(&self, x: Cylindrical) -> Vec3 {
        let position = Vec3::new(x.radius, 0.0, x.z);
        position.cross(&self.momentum_density_avg(x))
    }

    /// Closed-form energy density `eps0 E0^2 (1 + R/(4 R0))`; independent of time.
    pub fn energy_density_closed(&self, x: Cylindrical) -> f64 {
        if !self.inside(x) {
            return 0.0;
        }
        let e0 = self.params.e0;
        self.constants.eps0 * e0 * e0 * (1.0 + x.radius / (4.0 * self.params.major_radius))
    }

    /// Textbook `1/2 eps0 |E|^2 + |B|^2 / (2 mu0)` on the real fields. Diagnostic.
    pub fn energy_density_convention(&self, x: Cylindrical, t: f64) -> f64 {
        let (e, b) = self.real_fields(x, t);
        0.5 * self.constants.eps0 * e.norm_squared() + b.norm_squared() / (2.0 * self.constants.mu0)
    }

    pub fn sample(&self, x: Cylindrical, t: f64) -> RealFieldSample {
        let (e, b) = self.real_fields(x, t);
        RealFieldSample {
            position: x,
            t,
            e,
            b,
            rho: self.charge_density(x, t),
            j: self.current_density(x, t),
            s: self.poynting(x, t),
            u: self.energy_density_closed(x),
        }
    }
}

impl FieldModel for Ansatz {
    fn params(&self) -> &AnsatzParams {
        &self.params
    }

    fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    fn electric(&self, x: Cylindrical, t: f64) -> Vec3 {
        self.real_fields(x, t).0
    }

    fn magnetic(&self, x: Cylindrical, t: f64) -> Vec3 {
        self.real_fields(x, t).1
    }

    fn charge_density(&self, x: Cylindrical, t: f64) -> f64 {
        Ansatz::charge_density(self, x, t)
    }

    fn current_density(&self, x: Cylindrical, t: f64) -> Vec3 {
        Ansatz::current_density(self, x, t)
    }

    fn has_closed_form_derivatives(&self) -> bool {
        true
    }
}

/// Mean of `f` over one period using [`AVERAGING_SAMPLES`] uniform samples.
pub fn period_mean<F>(period: f64, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let dt = period / AVERAGING_SAMPLES as f64;
    (0..AVERAGING_SAMPLES).map(|n| f(n as f64 * dt)).sum::<f64>() / AVERAGING_SAMPLES as f64
}

/// Root mean square of `f` over one period.
pub fn period_rms<F>(period: f64, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    period_mean(period, |t| {
        let v = f(t);
        v * v
    })
    .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::codata_constants;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_ansatz() -> Ansatz {
        let k = codata_constants();
        let p = AnsatzParams::faraday(3.0, 2.0, 0.5, &k).unwrap();
        Ansatz::new(p, k)
    }

    fn axis(phi: f64) -> Cylindrical {
        Cylindrical::new(2.0, phi, 0.0)
    }

    /// Uniform samples inside (or outside) the tube.
    fn random_point(rng: &mut ChaCha8Rng, g: &TorusGeometry, inside: bool) -> Cylindrical {
        loop {
            let x = Cylindrical::new(
                rng.gen_range(0.0..2.0 * g.major_radius()),
                rng.gen_range(0.0..2.0 * PI),
                rng.gen_range(-2.0 * g.minor_radius()..2.0 * g.minor_radius()),
            );
            if g.contains(x.radius, x.z) == inside {
                return x;
            }
        }
    }

    #[test]
    fn params_invariants() {
        let k = codata_constants();
        let p = AnsatzParams::faraday(3.783e17, 6.073e-13, 5.854e-14, &k).unwrap();
        assert_relative_eq!(p.b0() * k.c, p.e0(), max_relative = 1e-12);
        assert!(p.faraday_detuning(&k).abs() < 1e-15);
        assert!(AnsatzParams::faraday(-1.0, 2.0, 0.5, &k).is_err());
        assert!(AnsatzParams::faraday(1.0, 2.0, 2.5, &k).is_err());
        assert!(AnsatzParams::with_omega(1.0, 2.0, 0.5, f64::NAN, &k).is_err());
    }

    #[test]
    fn e_phasor_on_axis() {
        let a = unit_ansatz();
        let e = a.e_phasor(axis(0.0), 0.0);
        assert_eq!(e[0], Complex64::new(0.0, 3.0));
        assert_relative_eq!(e[1].re, -6.0, epsilon = 1e-15);
        assert!(e[1].im.abs() < 1e-15);
        assert_eq!(e[2], Complex64::new(0.0, 0.0));

        let e = a.e_phasor(axis(PI / 2.0), 0.0);
        assert_relative_eq!(e[0].re, -3.0, epsilon = 1e-14);
        assert!(e[0].im.abs() < 1e-14);
        assert!(e[1].re.abs() < 1e-14);
        assert_relative_eq!(e[1].im, -6.0, epsilon = 1e-14);
    }

    #[test]
    fn b_phasor_examples() {
        let a = unit_ansatz();
        let k = codata_constants();
        let b = a.b_phasor(axis(0.0), 0.0);
        assert_relative_eq!(b[2].im, 3.0 / k.c, max_relative = 1e-15);
        assert_eq!(b[0], Complex64::new(0.0, 0.0));
        let t = 1.234e-9;
        let omega = a.params().omega();
        let b = a.b_phasor(axis(omega * t), t);
        assert_relative_eq!(b[2].im, 3.0 / k.c, max_relative = 1e-12);
        assert!(b[2].re.abs() < 1e-12 * 3.0 / k.c);
        assert_eq!(a.b_phasor(Cylindrical::new(3.0, 0.0, 0.0), 0.0), PhasorVec3::zeros());
    }

    #[test]
    fn real_fields_at_quarter_phases() {
        let a = unit_ansatz();
        let c = a.constants().c;
        let (e, b) = a.real_fields(axis(0.0), 0.0);
        assert_eq!(e, Vec3::new(0.0, -6.0, 0.0));
        assert_eq!(b, Vec3::zeros());
        let (e, b) = a.real_fields(axis(PI / 2.0), 0.0);
        assert_relative_eq!(e[0], -3.0, epsilon = 1e-15);
        assert!(e[1].abs() < 1e-14);
        assert_relative_eq!(b[2], -3.0 / c, max_relative = 1e-15);
    }

    #[test]
    fn time_average_of_radial_field_squared() {
        let a = unit_ansatz();
        let x = Cylindrical::new(2.1, 0.4, 0.1);
        // Oracle: midpoint rule with many more samples than the helper uses.
        let n = 10_000;
        let period = a.params().period();
        let dense: f64 = (0..n)
            .map(|i| a.electric(x, (i as f64 + 0.5) * period / n as f64)[0].powi(2))
            .sum::<f64>()
            / n as f64;
        assert_relative_eq!(dense, 4.5, max_relative = 1e-10);
        assert_relative_eq!(
            period_mean(period, |t| a.electric(x, t)[0].powi(2)),
            4.5,
            max_relative = 1e-12
        );
    }

    #[test]
    fn charge_density_examples() {
        let a = unit_ansatz();
        assert_eq!(a.charge_density(axis(0.0), 0.0), 0.0);
        let rho0 = a.constants().eps0 * 3.0 / 2.0;
        assert_relative_eq!(a.charge_density(axis(PI / 2.0), 0.0), rho0, max_relative = 1e-15);
    }

    #[test]
    fn current_density_vanishes_radially_at_quarter_phase() {
        let a = unit_ansatz();
        for r in [1.6, 2.0, 2.3] {
            let j = a.current_density(Cylindrical::new(r, PI / 2.0, 0.0), 0.0);
            assert!(j[0].abs() < 1e-12 * j[1].abs());
        }
    }

    #[test]
    fn poynting_examples() {
        let a = unit_ansatz();
        let k = codata_constants();
        assert_eq!(a.poynting(axis(0.0), 0.0), Vec3::zeros());
        assert_eq!(a.poynting(Cylindrical::new(2.0, 0.0, 0.6), 0.3), Vec3::zeros());

        let x = Cylindrical::new(2.2, 0.7, -0.2);
        let period = a.params().period();
        let avg_r = period_mean(period, |t| a.poynting(x, t)[0]);
        let avg_phi = period_mean(period, |t| a.poynting(x, t)[1]);
        let expected = -0.5 * k.eps0 * k.c * 9.0;
        assert_relative_eq!(avg_phi, expected, max_relative = 1e-10);
        assert!(avg_r.abs() < 1e-10 * expected.abs());
        assert_relative_eq!(a.poynting_avg(x)[1], expected, max_relative = 1e-15);
    }

    #[test]
    fn momentum_density_examples() {
        let a = unit_ansatz();
        let k = codata_constants();
        let x = Cylindrical::new(1.8, 0.1, 0.2);
        let p = a.momentum_density_avg(x);
        assert_relative_eq!(p[1], -0.5 * k.eps0 * 9.0 / k.c, max_relative = 1e-14);
        assert_relative_eq!(p.norm() * k.c * k.c, a.poynting_avg(x).norm(), max_relative = 1e-14);
        assert_eq!(a.momentum_density_avg(Cylindrical::new(4.0, 0.0, 0.0)), Vec3::zeros());
    }

    #[test]
    fn angular_momentum_density_points_down() {
        let a = unit_ansatz();
        let l = a.angular_momentum_density_avg(Cylindrical::new(2.1, 0.0, 0.1));
        assert!(l[2] < 0.0);
        assert_relative_eq!(l[2], 2.1 * a.momentum_density_avg(axis(0.0))[1], max_relative = 1e-14);
    }

    #[test]
    fn energy_density_closed_form() {
        let a = unit_ansatz();
        let eps0 = a.constants().eps0;
        assert_relative_eq!(
            a.energy_density_closed(axis(0.0)),
            1.25 * eps0 * 9.0,
            max_relative = 1e-15
        );
        let inner = a.energy_density_closed(Cylindrical::new(1.5 + 1e-9, 0.0, 0.0));
        let outer = a.energy_density_closed(Cylindrical::new(2.5 - 1e-9, 0.0, 0.0));
        assert_relative_eq!(outer - inner, eps0 * 9.0 * 0.5 / (2.0 * 2.0), max_relative = 1e-7);
    }

    #[test]
    fn energy_density_convention_diagnostic() {
        let a = unit_ansatz();
        let eps0 = a.constants().eps0;
        assert_eq!(a.energy_density_convention(Cylindrical::new(3.0, 0.0, 0.0), 0.0), 0.0);
        assert_relative_eq!(
            a.energy_density_convention(axis(0.0), 0.0),
            2.0 * eps0 * 9.0,
            max_relative = 1e-14
        );
        let avg = period_mean(a.params().period(), |t| a.energy_density_convention(axis(0.3), t));
        assert_relative_eq!(avg, 1.5 * eps0 * 9.0, max_relative = 1e-12);
    }

    #[test]
    fn everything_vanishes_outside() {
        let a = unit_ansatz();
        let g = *a.geometry();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let x = random_point(&mut rng, &g, false);
            let t = rng.gen_range(0.0..1e-8);
            let s = a.sample(x, t);
            assert_eq!(s.e, Vec3::zeros());
            assert_eq!(s.b, Vec3::zeros());
            assert_eq!(s.j, Vec3::zeros());
            assert_eq!(s.s, Vec3::zeros());
            assert_eq!((s.rho, s.u), (0.0, 0.0));
            assert_eq!(a.e_phasor(x, t), PhasorVec3::zeros());
            assert_eq!(a.momentum_density_avg(x), Vec3::zeros());
        }
    }

    #[test]
    fn real_fields_are_real_part_of_phasors() {
        let a = unit_ansatz();
        let g = *a.geometry();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let close = |x: f64, y: f64, scale: f64| (x - y).abs() <= 1e-14 * scale;
        for _ in 0..1_000 {
            let x = random_point(&mut rng, &g, true);
            let t = rng.gen_range(0.0..1e-8);
            let (e, b) = a.real_fields(x, t);
            let (ep, bp) = (a.e_phasor(x, t), a.b_phasor(x, t));
            let e_scale = 3.0 * 3.0;
            for i in 0..3 {
                assert!(close(e[i], ep[i].re, e_scale), "E[{i}] {} vs {}", e[i], ep[i].re);
                assert!(close(b[i], bp[i].re, a.params().b0()));
            }
        }
    }
}
