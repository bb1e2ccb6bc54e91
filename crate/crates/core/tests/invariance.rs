use toroidal_em::constants::{codata_constants, PhysicalConstants};
use toroidal_em::fields::Ansatz;
use toroidal_em::geometry::Resolution;
use toroidal_em::observables::evaluate_at;
use toroidal_em::solver::{ratio_report, solve, Mode, NewtonOptions, RatioReport};

/// Rescale constants so that `alpha`, `mu0 eps0 c^2` and `e`, `m_e` stay
/// fixed while every length-bearing constant changes.
fn rescaled(k: &PhysicalConstants, lambda: f64) -> PhysicalConstants {
    PhysicalConstants {
        c: k.c / lambda,
        eps0: k.eps0 * lambda.powi(3),
        mu0: k.mu0 / lambda,
        hbar: k.hbar / (lambda * lambda),
        ..*k
    }
}

fn ratios(k: &PhysicalConstants, mode: Mode) -> RatioReport {
    let sr = solve(k, mode, true, NewtonOptions::default()).unwrap();
    ratio_report(&sr, &k.derived(), k)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a / b - 1.0).abs() <= tol
}

#[test]
fn rescaling_preserves_identities() {
    let k = codata_constants();
    for lambda in [1e-3, 0.37, 12.5, 1e4] {
        let s = rescaled(&k, lambda);
        assert!(close(s.alpha_from_definition(), k.alpha_from_definition(), 1e-14));
        assert!((s.mu0 * s.eps0 * s.c * s.c - k.mu0 * k.eps0 * k.c * k.c).abs() < 1e-14);
    }
}

#[test]
fn dimensionless_ratios_are_unit_invariant() {
    let k = codata_constants();
    for mode in [Mode::ThinTorus, Mode::FullCorrections] {
        let base = ratios(&k, mode);
        for lambda in [1e-3, 0.37, 12.5, 1e4] {
            let r = ratios(&rescaled(&k, lambda), mode);
            for (a, b, name) in [
                (r.e0_over_es, base.e0_over_es, "E0/ES"),
                (r.major_over_rc, base.major_over_rc, "R0/rc"),
                (r.minor_over_rc, base.minor_over_rc, "r0/rc"),
                (r.energy_over_rest, base.energy_over_rest, "U/mc2"),
                (r.omega_over_dirac, base.omega_over_dirac, "w/wD"),
            ] {
                assert!(close(a, b, 1e-12), "{mode} lambda={lambda} {name}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn observable_targets_hold_in_rescaled_units() {
    let k = rescaled(&codata_constants(), 7.0);
    let sr = solve(&k, Mode::FullCorrections, true, NewtonOptions::default()).unwrap();
    let obs = evaluate_at(&Ansatz::new(sr.params(&k).unwrap(), k), Resolution::new(8, 16, 16)).unwrap();
    assert!(close(obs.q_rms.quadrature, k.e_charge, 1e-10));
    assert!(close(obs.l_z.magnitude.quadrature, 0.5 * k.hbar, 1e-10));
    assert!(close(
        obs.mu_z.closed_form,
        k.derived().mu_b * k.schwinger_factor(),
        1e-10
    ));
}
