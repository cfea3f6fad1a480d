//! Unit conversion constants.

/// Bohr radius in ångström.
pub const BOHR_IN_ANGSTROM: f64 = 0.52917721092;

/// Multiply ångström by this to get bohr.
pub const ANGSTROM_TO_BOHR: f64 = 1.0 / BOHR_IN_ANGSTROM;

/// kcal/mol per hartree.
pub const HARTREE_TO_KCAL: f64 = 627.5094740631;

#[inline]
pub fn to_kcal(hartree: f64) -> f64 {
    hartree * HARTREE_TO_KCAL
}

#[inline]
pub fn from_kcal(kcal: f64) -> f64 {
    kcal / HARTREE_TO_KCAL
}
