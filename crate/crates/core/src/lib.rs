//! Thermodynamic formalism for countable-state Markov shifts, computed on
//! finite data: partition functions, pressure, recurrence, equilibrium
//! measures, induced presentations, variation certificates, magic-word
//! codes and measure transport.

pub mod cli;
pub mod codes;
pub mod error;
pub mod induction;
pub mod io;
pub mod potential;
pub mod shift;
pub mod thermo;
pub mod variation;

pub use error::{Result, ShiftError};
pub use potential::{FiniteRangePotential, Rational};
pub use shift::{FiniteGraph, PeriodicPoint, Word};
