//! Polynomial arithmetic over finite fields, smooth and rough counting,
//! multiplicative energy, and Steinhaus random multiplicative functions.

pub mod error;
pub mod fieldpoly;
pub mod cltlab;
pub mod counting;
pub mod energy;
pub mod intervals;
pub mod shiu;

pub use error::{Error, Result};
pub use fieldpoly::{FactorTable, Factorization, FieldSpec, Poly, PrimeOrder};
pub use energy::{EnergyReport, Family, PolySet};
pub use intervals::Interval;
