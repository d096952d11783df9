//! Numerical toolkit for boundary behaviour of Pick (Nevanlinna) functions:
//! spectral measures, gauges, averaged Julia-Fatou quotients, regularity
//! tests, spectral foliation and horocyclic estimates.

pub mod acceptance;
pub mod error;
pub mod foliation;
pub mod gauges;
pub mod measures;
pub mod netgen;
pub mod pick;
pub mod quad;
pub mod quotients;
pub mod regularity;
pub mod scenario;

pub use error::{Estimate, NevError, Result};
