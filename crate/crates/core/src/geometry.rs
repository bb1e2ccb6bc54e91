//! Torus geometry, the Heaviside mask and volume quadrature grids.
//!
//! Points inside the tube are addressed in toroidal coordinates
//! `(r, theta, phi)`: `r` is the distance from the tube centre circle,
//! `theta` the poloidal angle and `phi` the azimuth. Vector components
//! elsewhere in the crate are always cylindrical `(R, phi, z)`.

use crate::quadrature::{gauss_legendre_interval, periodic_trapezoid};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Smallest node count accepted along any grid axis.
pub const MIN_NODES: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid torus: need 0 < r0 < R0, got R0 = {major}, r0 = {minor}")]
    InvalidTorus { major: f64, minor: f64 },
    #[error("grid resolution {0:?} has an axis with fewer than {MIN_NODES} nodes")]
    ResolutionTooSmall(Resolution),
    #[error("integrand is not finite at grid node {index}")]
    NonFiniteIntegrand { index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry {
    major_radius: f64,
    minor_radius: f64,
}

impl TorusGeometry {
    pub fn new(major_radius: f64, minor_radius: f64) -> Result<Self, GeometryError> {
        let ok =
            major_radius.is_finite() && minor_radius.is_finite() && minor_radius > 0.0 && minor_radius < major_radius;
        if !ok {
            return Err(GeometryError::InvalidTorus {
                major: major_radius,
                minor: minor_radius,
            });
        }
        Ok(Self {
            major_radius,
            minor_radius,
        })
    }

    pub fn major_radius(&self) -> f64 {
        self.major_radius
    }

    pub fn minor_radius(&self) -> f64 {
        self.minor_radius
    }

    /// Closed-form volume `2 pi^2 R0 r0^2`.
    pub fn volume(&self) -> f64 {
        2.0 * PI * PI * self.major_radius * self.minor_radius * self.minor_radius
    }

    /// Distance of a cylindrical point from the tube centre circle.
    pub fn tube_distance(&self, radius: f64, z: f64) -> f64 {
        (radius - self.major_radius).hypot(z)
    }

    /// The field mask: strictly inside the tube. The surface `r = r0` is outside.
    pub fn contains(&self, radius: f64, z: f64) -> bool {
        let dr = radius - self.major_radius;
        dr * dr + z * z < self.minor_radius * self.minor_radius
    }
}

/// Point in toroidal coordinates relative to a [`TorusGeometry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToroidalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Point in cylindrical coordinates `(R, phi, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylindrical {
    #[serde(rename = "R")]
    pub radius: f64,
    pub phi: f64,
    pub z: f64,
}

impl Cylindrical {
    pub fn new(radius: f64, phi: f64, z: f64) -> Self {
        Self { radius, phi, z }
    }
}

pub fn toroidal_to_cylindrical(p: ToroidalPoint, g: &TorusGeometry) -> Cylindrical {
    Cylindrical {
        radius: g.major_radius + p.r * p.theta.cos(),
        phi: p.phi,
        z: p.r * p.theta.sin(),
    }
}

pub fn inside_torus(radius: f64, z: f64, g: &TorusGeometry) -> bool {
    g.contains(radius, z)
}

/// Volume element factor: `dV = r (R0 + r cos theta) dr dtheta dphi`.
pub fn jacobian(p: ToroidalPoint, g: &TorusGeometry) -> f64 {
    p.r * (g.major_radius + p.r * p.theta.cos())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    pub n_r: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Resolution {
    pub const DEFAULT: Self = Self::new(32, 64, 64);

    pub const fn new(n_r: usize, n_theta: usize, n_phi: usize) -> Self {
        Self { n_r, n_theta, n_phi }
    }

    pub fn doubled(self) -> Self {
        Self::new(2 * self.n_r, 2 * self.n_theta, 2 * self.n_phi)
    }

    pub fn node_count(&self) -> usize {
        self.n_r * self.n_theta * self.n_phi
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Self::DEFAULT
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNode {
    pub toroidal: ToroidalPoint,
    pub position: Cylindrical,
    /// Quadrature weight times Jacobian (m^3).
    pub weight: f64,
}

/// Tensor-product quadrature over the torus volume: Gauss-Legendre in `r`,
/// periodic trapezoid in `theta` and `phi`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    geometry: TorusGeometry,
    resolution: Resolution,
    nodes: Vec<GridNode>,
}

impl QuadratureGrid {
    pub fn geometry(&self) -> &TorusGeometry {
        &self.geometry
    }

    pub fn resolution(&self) -> Resolution {
        self.resolution
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn weight_sum(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }
}

pub fn build_grid(g: &TorusGeometry, resolution: Resolution) -> Result<QuadratureGrid, GeometryError> {
    if resolution.n_r < MIN_NODES || resolution.n_theta < MIN_NODES || resolution.n_phi < MIN_NODES {
        return Err(GeometryError::ResolutionTooSmall(resolution));
    }
    let (rs, wr) = gauss_legendre_interval(resolution.n_r, 0.0, g.minor_radius);
    let (thetas, wt) = periodic_trapezoid(resolution.n_theta);
    let (phis, wp) = periodic_trapezoid(resolution.n_phi);

    let mut nodes = Vec::with_capacity(resolution.node_count());
    for &phi in &phis {
        for (&r, &w_r) in rs.iter().zip(&wr) {
            for &theta in &thetas {
                let toroidal = ToroidalPoint { r, theta, phi };
                nodes.push(GridNode {
                    toroidal,
                    position: toroidal_to_cylindrical(toroidal, g),
                    weight: w_r * wt * wp * jacobian(toroidal, g),
                });
            }
        }
    }
    Ok(QuadratureGrid {
        geometry: *g,
        resolution,
        nodes,
    })
}

/// Weighted sum of `f` over the grid nodes.
pub fn integrate<F>(f: F, grid: &QuadratureGrid) -> Result<f64, GeometryError>
where
    F: Fn(&GridNode) -> f64,
{
    let mut sum = 0.0;
    for (index, node) in grid.nodes.iter().enumerate() {
        let v = f(node);
        if !v.is_finite() {
            return Err(GeometryError::NonFiniteIntegrand { index });
        }
        sum += node.weight * v;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn torus() -> TorusGeometry {
        TorusGeometry::new(2.0, 0.5).unwrap()
    }

    #[test]
    fn rejects_improper_tori() {
        assert!(TorusGeometry::new(1.0, 1.0).is_err());
        assert!(TorusGeometry::new(1.0, 0.0).is_err());
        assert!(TorusGeometry::new(1.0, -0.1).is_err());
        assert!(TorusGeometry::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn coordinate_mapping_examples() {
        let g = torus();
        let c = toroidal_to_cylindrical(
            ToroidalPoint {
                r: 0.0,
                theta: 2.3,
                phi: 1.0,
            },
            &g,
        );
        assert_eq!((c.radius, c.phi, c.z), (2.0, 1.0, 0.0));
        let c = toroidal_to_cylindrical(
            ToroidalPoint {
                r: 0.5,
                theta: 0.0,
                phi: 0.0,
            },
            &g,
        );
        assert_eq!((c.radius, c.phi, c.z), (2.5, 0.0, 0.0));
        let c = toroidal_to_cylindrical(
            ToroidalPoint {
                r: 0.5,
                theta: PI / 2.0,
                phi: 0.0,
            },
            &g,
        );
        assert_relative_eq!(c.radius, 2.0, epsilon = 1e-15);
        assert_eq!(c.z, 0.5);
    }

    #[test]
    fn mask_examples() {
        let g = torus();
        assert!(inside_torus(2.0, 0.0, &g));
        assert!(!inside_torus(3.0, 0.0, &g));
        assert!(!inside_torus(2.5, 0.0, &g));
    }

    #[test]
    fn jacobian_examples() {
        let g = torus();
        assert_eq!(
            jacobian(
                ToroidalPoint {
                    r: 0.0,
                    theta: 1.0,
                    phi: 0.0
                },
                &g
            ),
            0.0
        );
        let j = jacobian(
            ToroidalPoint {
                r: 0.5,
                theta: PI / 2.0,
                phi: 0.0,
            },
            &g,
        );
        assert_relative_eq!(j, 0.5 * 2.0, max_relative = 1e-15);
    }

    #[test]
    fn weight_sum_matches_volume() {
        let g = torus();
        let v = 2.0 * PI * PI * 2.0 * 0.25;
        let coarse = build_grid(&g, Resolution::new(8, 16, 16)).unwrap();
        assert_relative_eq!(coarse.weight_sum(), v, max_relative = 1e-8);
        let fine = build_grid(&g, Resolution::DEFAULT).unwrap();
        assert_relative_eq!(fine.weight_sum(), v, max_relative = 1e-12);
        assert_relative_eq!(g.volume(), v, max_relative = 1e-15);
    }

    #[test]
    fn weight_sum_converges_in_every_axis() {
        let g = TorusGeometry::new(1.0, 0.9).unwrap();
        let v = g.volume();
        let mut last = f64::INFINITY;
        for n in [4, 5, 6] {
            let err = (build_grid(&g, Resolution::new(n, n, 4)).unwrap().weight_sum() - v).abs() / v;
            assert!(err <= last.max(1e-15));
            last = err;
        }
        assert!(last < 1e-13);
    }

    #[test]
    fn rejects_small_resolution() {
        let g = torus();
        assert!(matches!(
            build_grid(&g, Resolution::new(3, 16, 16)),
            Err(GeometryError::ResolutionTooSmall(_))
        ));
        assert!(build_grid(&g, Resolution::new(4, 4, 4)).is_ok());
    }

    #[test]
    fn nodes_avoid_axis_and_surface() {
        let g = torus();
        let grid = build_grid(&g, Resolution::new(8, 8, 8)).unwrap();
        for n in grid.nodes() {
            assert!(n.toroidal.r > 0.0 && n.toroidal.r < g.minor_radius());
            assert!(g.contains(n.position.radius, n.position.z));
        }
    }

    /// Dense midpoint-rule oracle over the (r, theta) cross-section.
    fn brute_force_radial_moment(g: &TorusGeometry, n: usize) -> f64 {
        let (dr, dt) = (g.minor_radius() / n as f64, 2.0 * PI / n as f64);
        let mut s = 0.0;
        for i in 0..n {
            let r = (i as f64 + 0.5) * dr;
            for j in 0..n {
                let t = (j as f64 + 0.5) * dt;
                let radius = g.major_radius() + r * t.cos();
                s += radius * r * radius * dr * dt;
            }
        }
        2.0 * PI * s
    }

    #[test]
    fn first_radial_moment() {
        let g = torus();
        let (big, small) = (2.0f64, 0.5f64);
        let exact = 2.0 * PI * PI * big * big * small * small * (1.0 + small * small / (4.0 * big * big));
        let dense = brute_force_radial_moment(&g, 2000);
        assert_relative_eq!(dense, exact, max_relative = 1e-6);
        let grid = build_grid(&g, Resolution::DEFAULT).unwrap();
        let q = integrate(|n| n.position.radius, &grid).unwrap();
        assert_relative_eq!(q, exact, max_relative = 1e-10);
    }

    #[test]
    fn integrate_constant_zero_and_periodic() {
        let g = torus();
        let grid = build_grid(&g, Resolution::DEFAULT).unwrap();
        assert_relative_eq!(integrate(|_| 1.0, &grid).unwrap(), g.volume(), max_relative = 1e-12);
        assert_eq!(integrate(|_| 0.0, &grid).unwrap(), 0.0);
        let s = integrate(|n| (n.toroidal.phi - 0.3).sin(), &grid).unwrap();
        assert!(s.abs() < 1e-12 * g.volume(), "{s}");
    }

    #[test]
    fn integrate_reports_non_finite() {
        let grid = build_grid(&torus(), Resolution::new(4, 4, 4)).unwrap();
        let err = integrate(|n| if n.toroidal.phi > 3.0 { f64::NAN } else { 1.0 }, &grid).unwrap_err();
        assert!(matches!(err, GeometryError::NonFiniteIntegrand { .. }));
    }

    #[test]
    fn mask_agrees_with_toroidal_radius() {
        let g = torus();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let p = ToroidalPoint {
                r: rng.gen_range(0.0..1.0),
                theta: rng.gen_range(0.0..2.0 * PI),
                phi: rng.gen_range(0.0..2.0 * PI),
            };
            if (p.r - g.minor_radius()).abs() < 1e-12 {
                continue;
            }
            let c = toroidal_to_cylindrical(p, &g);
            assert_eq!(inside_torus(c.radius, c.z, &g), p.r < g.minor_radius(), "{p:?}");
        }
    }

    proptest! {
        #[test]
        fn integrate_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, k in 1u32..4) {
            let g = torus();
            let grid = build_grid(&g, Resolution::new(6, 8, 8)).unwrap();
            let f = |n: &GridNode| n.position.radius * n.position.z.cos();
            let h = move |n: &GridNode| (k as f64 * n.toroidal.theta).cos() + n.toroidal.r;
            let lhs = integrate(|n| a * f(n) + b * h(n), &grid).unwrap();
            let rhs = a * integrate(f, &grid).unwrap() + b * integrate(h, &grid).unwrap();
            let scale = (a.abs() + b.abs()) * g.volume() * 3.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }
}
