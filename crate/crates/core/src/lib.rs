//! Exact harmonic analysis on `p`-adic Lie algebras.
//!
//! Local fields `Q_p` and `F_p((t))`, root data and alcove geometry,
//! Moy-Prasad filtrations, Denef-Pas formulas, motivic-style integration by
//! coset enumeration, and orbital integrals and their Fourier transforms on
//! `sl_2`.

pub mod cyclotomic;
pub mod denefpas;
pub mod error;
pub mod integrate;
pub mod localfield;
pub mod lp;
pub mod moyprasad;
pub mod optimal;
pub mod orbital;
pub mod rootdata;
pub mod scalar;

pub use error::{Error, Result};

/// Exact rationals, the scalar used throughout.
pub type Rational = num_rational::BigRational;
/// Exact cyclotomic values with rational coefficients.
pub type Cyc = cyclotomic::CycValue<Rational>;
