//! Comparison of computed values against the published numbers, and
//! serialization of the combined report.

use crate::constants::{DerivedScales, PhysicalConstants};
use crate::fields::{Ansatz, FieldsError};
use crate::geometry::{build_grid, GeometryError, Resolution};
use crate::maxwell::{full_verification, MaxwellError, Sampling, Verification};
use crate::observables::{evaluate, total_energy_convention_diagnostic, ObservableSet};
use crate::solver::{
    ratio_report, solve_full, solve_thin_torus, ConstraintSystem, Mode, NewtonOptions, RatioReport, SolveResult,
    SolverError,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::str::FromStr;

pub const SCHEMA_VERSION: u32 = 1;

/// Absolute tolerance on dimensionless ratios (printed to 3-4 figures).
pub const RATIO_TOLERANCE: f64 = 5e-4;
/// Relative tolerance on SI values (printed to 3-4 figures).
pub const SI_TOLERANCE: f64 = 1e-2;
/// Relative tolerance on the fitted observables.
pub const TARGET_TOLERANCE: f64 = 1e-3;
/// Relative tolerance on identities such as `v_p = 2c`.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Every claim id [`build_claims`] produces, in order.
pub const CLAIM_MANIFEST: &[&str] = &[
    "ratio.E0_over_ES",
    "ratio.R0_over_rc",
    "ratio.r0_over_rc",
    "ratio.U_over_mec2",
    "ratio.omega_over_omegaD",
    "ratio_precise.E0_over_ES",
    "ratio_precise.R0_over_rc",
    "ratio_precise.r0_over_rc",
    "ratio_precise.U_over_mec2",
    "si.E0",
    "si.R0",
    "si.r0",
    "si.U_MeV",
    "si.omega",
    "si.v_phase",
    "target.Q_rms",
    "target.mu",
    "target.L",
];

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("unknown format '{0}' (expected json, csv or text)")]
    UnknownFormat(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Maxwell(#[from] MaxwellError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Fields(#[from] FieldsError),
    #[error("serialization failed: {0}")]
    Serialize(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToleranceKind {
    Absolute,
    Relative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedClaim {
    pub id: String,
    pub description: String,
    pub published_value: f64,
    pub unit: String,
    pub computed_value: f64,
    /// `computed - published` for absolute claims, `rel_deviation` otherwise.
    pub deviation: f64,
    pub rel_deviation: f64,
    pub tolerance: f64,
    pub tolerance_kind: ToleranceKind,
    pub passed: bool,
}

impl PublishedClaim {
    pub fn new(
        id: &str,
        description: &str,
        published_value: f64,
        unit: &str,
        computed_value: f64,
        tolerance: f64,
        kind: ToleranceKind,
    ) -> Self {
        let rel_deviation = computed_value / published_value - 1.0;
        let deviation = match kind {
            ToleranceKind::Absolute => computed_value - published_value,
            ToleranceKind::Relative => rel_deviation,
        };
        Self {
            id: id.to_string(),
            description: description.to_string(),
            published_value,
            unit: unit.to_string(),
            computed_value,
            deviation,
            rel_deviation,
            tolerance,
            tolerance_kind: kind,
            passed: deviation.abs() <= tolerance,
        }
    }
}

/// Claims for every published number.
///
/// Ratio and SI claims come from `thin`, the thin-torus solve with the
/// Schwinger factor, which is the solve the published numbers were printed
/// from. Observable targets come from `obs`, normally evaluated at the
/// full-correction solution.
pub fn build_claims(
    thin: &SolveResult,
    obs: &ObservableSet,
    ds: &DerivedScales,
    k: &PhysicalConstants,
) -> Vec<PublishedClaim> {
    use ToleranceKind::{Absolute, Relative};
    let rr = ratio_report(thin, ds, k);
    let ratio =
        |id, desc, published, value| PublishedClaim::new(id, desc, published, "1", value, RATIO_TOLERANCE, Absolute);
    let si = |id, desc, published, unit, value| {
        PublishedClaim::new(id, desc, published, unit, value, SI_TOLERANCE, Relative)
    };
    let target = |id, desc, published, unit, value| {
        PublishedClaim::new(id, desc, published, unit, value, TARGET_TOLERANCE, Relative)
    };
    vec![
        ratio(
            "ratio.E0_over_ES",
            "amplitude over Schwinger field (3 figures)",
            0.286,
            rr.e0_over_es,
        ),
        ratio(
            "ratio.R0_over_rc",
            "major radius over reduced Compton length (3 figures)",
            1.573,
            rr.major_over_rc,
        ),
        ratio(
            "ratio.r0_over_rc",
            "minor radius over reduced Compton length (3 figures)",
            0.152,
            rr.minor_over_rc,
        ),
        ratio(
            "ratio.U_over_mec2",
            "total energy over rest energy (3 figures)",
            0.795,
            rr.energy_over_rest,
        ),
        ratio(
            "ratio.omega_over_omegaD",
            "frequency over Dirac frequency (3 figures)",
            0.636,
            rr.omega_over_dirac,
        ),
        ratio(
            "ratio_precise.E0_over_ES",
            "amplitude over Schwinger field, 2 sqrt2/pi^2",
            0.2859,
            rr.e0_over_es,
        ),
        ratio(
            "ratio_precise.R0_over_rc",
            "major radius over reduced Compton length",
            1.5726,
            rr.major_over_rc,
        ),
        ratio(
            "ratio_precise.r0_over_rc",
            "minor radius over reduced Compton length",
            0.1516,
            rr.minor_over_rc,
        ),
        ratio(
            "ratio_precise.U_over_mec2",
            "total energy over rest energy, 5/(2 pi)",
            0.7949,
            rr.energy_over_rest,
        ),
        si("si.E0", "field amplitude", 3.783e17, "V/m", rr.si.e0),
        si("si.R0", "major radius", 6.073e-13, "m", rr.si.major_radius),
        si("si.r0", "minor radius", 5.854e-14, "m", rr.si.minor_radius),
        si("si.U_MeV", "total energy", 0.406, "MeV", rr.si.energy_mev),
        si("si.omega", "angular frequency", 9.86e20, "rad/s", rr.si.omega),
        PublishedClaim::new(
            "si.v_phase",
            "phase velocity 2c",
            2.0 * k.c,
            "m/s",
            obs.v_phase.value,
            EXACT_TOLERANCE,
            Relative,
        ),
        target(
            "target.Q_rms",
            "RMS charge equals e",
            k.e_charge,
            "C",
            obs.q_rms.quadrature,
        ),
        target(
            "target.mu",
            "magnetic moment equals mu_B (1 + alpha/2pi)",
            ds.mu_b * k.schwinger_factor(),
            "A m^2",
            obs.mu_z.closed_form,
        ),
        target(
            "target.L",
            "spin angular momentum equals hbar/2",
            0.5 * k.hbar,
            "J s",
            obs.l_z.magnitude.quadrature,
        ),
    ]
}

/// Constants and derived scales in one flat object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsDump {
    #[serde(flatten)]
    pub constants: PhysicalConstants,
    #[serde(flatten)]
    pub scales: DerivedScales,
}

impl ConstantsDump {
    pub fn new(k: &PhysicalConstants) -> Self {
        Self {
            constants: *k,
            scales: k.derived(),
        }
    }

    /// `(key, value)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let k = &self.constants;
        let s = &self.scales;
        vec![
            ("c", k.c),
            ("eps0", k.eps0),
            ("mu0", k.mu0),
            ("hbar", k.hbar),
            ("e", k.e_charge),
            ("m_e", k.m_e),
            ("alpha", k.alpha),
            ("r_c", s.r_c),
            ("E_S", s.e_schwinger),
            ("mu_B", s.mu_b),
            ("omega_D", s.omega_dirac),
            ("rest_energy", s.rest_energy),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolvedCase {
    pub solve: SolveResult,
    pub ratios: RatioReport,
}

impl SolvedCase {
    pub fn new(solve: SolveResult, k: &PhysicalConstants) -> Self {
        let ratios = ratio_report(&solve, &k.derived(), k);
        Self { solve, ratios }
    }
}

/// Quantities computed for comparison only; none of them gate the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Integral of the period-averaged `1/2 eps0 E^2 + B^2/(2 mu0)`.
    pub energy_convention_total: f64,
    pub energy_convention_over_closed: f64,
    /// `1/2 int R x J_rms dV` over the closed-form moment.
    pub moment_quadrature_over_closed: f64,
    pub l_z_signed: f64,
    pub orientation_note: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub resolution: Resolution,
    pub sampling: Sampling,
    pub newton: NewtonOptions,
    pub include_schwinger: bool,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            resolution: Resolution::DEFAULT,
            sampling: Sampling::default(),
            newton: NewtonOptions::default(),
            include_schwinger: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub constants: ConstantsDump,
    /// Maxwell checks at the full-correction solution.
    pub verification: Verification,
    /// Observables at the full-correction solution.
    pub observables: ObservableSet,
    pub thin_torus: SolvedCase,
    pub full_corrections: SolvedCase,
    pub diagnostics: Diagnostics,
    pub claims: Vec<PublishedClaim>,
    pub overall_pass: bool,
}

pub fn assemble(k: &PhysicalConstants, config: &ReportConfig) -> Result<FullReport, ReportError> {
    let thin = solve_thin_torus(k, config.include_schwinger)?;
    let sys = ConstraintSystem::electron(k, Mode::FullCorrections, config.include_schwinger);
    let full = solve_full(k, &sys, None, config.newton)?;

    let ansatz = Ansatz::new(full.params(k)?, *k);
    let verification = full_verification(&ansatz, &config.sampling)?;
    let grid = build_grid(ansatz.geometry(), config.resolution)?;
    let observables = evaluate(&ansatz, &grid)?;
    let energy_convention_total = total_energy_convention_diagnostic(&ansatz, &grid)?;

    let ds = k.derived();
    let claims = build_claims(&thin, &observables, &ds, k);
    let overall_pass = verification.all_passed && claims.iter().all(|c| c.passed);

    Ok(FullReport {
        schema_version: SCHEMA_VERSION,
        config: *config,
        constants: ConstantsDump::new(k),
        diagnostics: Diagnostics {
            energy_convention_total,
            energy_convention_over_closed: energy_convention_total / observables.energy.closed_form,
            moment_quadrature_over_closed: observables.mu_z.diagnostic_ratio,
            l_z_signed: observables.l_z.signed_quadrature,
            orientation_note: "E, B and the phase propagation direction form a left-handed triad; the averaged \
                               momentum flows along -a_phi so the signed L_z is negative. Magnitudes are reported."
                .to_string(),
        },
        verification,
        observables,
        thin_torus: SolvedCase::new(thin, k),
        full_corrections: SolvedCase::new(full, k),
        claims,
        overall_pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "text" | "txt" => Ok(Format::Text),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

pub const CLAIMS_CSV_HEADER: [&str; 10] = [
    "id",
    "description",
    "published_value",
    "unit",
    "computed_value",
    "deviation",
    "rel_deviation",
    "tolerance",
    "tolerance_kind",
    "passed",
];

pub fn claims_csv(claims: &[PublishedClaim]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| ReportError::Serialize(e.to_string());
    w.write_record(CLAIMS_CSV_HEADER).map_err(err)?;
    for c in claims {
        let kind = match c.tolerance_kind {
            ToleranceKind::Absolute => "absolute",
            ToleranceKind::Relative => "relative",
        };
        w.write_record([
            c.id.clone(),
            c.description.clone(),
            format!("{:e}", c.published_value),
            c.unit.clone(),
            format!("{:e}", c.computed_value),
            format!("{:e}", c.deviation),
            format!("{:e}", c.rel_deviation),
            format!("{:e}", c.tolerance),
            kind.to_string(),
            c.passed.to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| ReportError::Serialize(e.to_string()))
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn render(report: &FullReport, format: Format) -> Result<String, ReportError> {
    match format {
        Format::Json => serde_json::to_string_pretty(report).map_err(|e| ReportError::Serialize(e.to_string())),
        Format::Csv => claims_csv(&report.claims),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "toroidal electron report (schema {})", report.schema_version);
            let _ = writeln!(out, "\nMaxwell residuals");
            for r in &report.verification.reports {
                let _ = writeln!(
                    out,
                    "  {} {:<18} max {:.3e}  mean {:.3e}  (n = {}, seed {})",
                    verdict(r.passed),
                    r.equation.to_string(),
                    r.max_rel_residual,
                    r.mean_rel_residual,
                    r.n_points,
                    r.seed
                );
            }
            let _ = writeln!(out, "\nPublished values");
            for c in &report.claims {
                let _ = writeln!(
                    out,
                    "  {} {:<24} published {:<12.6e} computed {:<14.8e} dev {:+.2e} (tol {:.0e} {})",
                    verdict(c.passed),
                    c.id,
                    c.published_value,
                    c.computed_value,
                    c.deviation,
                    c.tolerance,
                    if c.tolerance_kind == ToleranceKind::Absolute {
                        "abs"
                    } else {
                        "rel"
                    }
                );
            }
            let _ = writeln!(out, "\noverall: {}", verdict(report.overall_pass));
            Ok(out)
        }
    }
}
