//! Toroidal electromagnetic model of the electron.
//!
//! A circulating phasor field confined to a torus is checked against the
//! four Maxwell equations, its charge, moment, spin and energy are
//! evaluated by volume quadrature, and its free parameters are fitted to
//! the electron's charge, spin and anomalous magnetic moment.

pub mod cli;
pub mod constants;
pub mod fields;
pub mod geometry;
pub mod maxwell;
pub mod observables;
pub mod quadrature;
pub mod report;
pub mod solver;
