//! Steinhaus values `f(P)` as a pure function of `(seed, P)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::fieldpoly::{FactorTable, Poly};

/// ChaCha key of a prime: the SHA-256 digest of its canonical serialization.
pub type PrimeKey = [u8; 32];

pub fn prime_key(p: &Poly) -> PrimeKey {
    Sha256::digest(p.serialize().as_bytes()).into()
}

/// The unit-modulus value attached to a keyed prime on stream `stream`.
///
/// The first 64-bit output of ChaCha8 (key = prime digest, stream = `stream`)
/// is cut to its top 53 bits, read as a uniform in `[0, 1)`, and scaled to an angle.
pub fn value_from_key(key: &PrimeKey, stream: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(stream);
    let unit = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let angle = unit * TAU;
    Complex64::new(angle.cos(), angle.sin())
}

/// One realization of a Steinhaus random multiplicative function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RmfAssignment {
    seed: u64,
}

impl RmfAssignment {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `f(P)` for a monic irreducible `P`.
    pub fn value_of(&self, p: &Poly) -> Complex64 {
        value_from_key(&prime_key(p), self.seed)
    }
}

/// `f(F) = Π f(P)^e` over the factorization of a monic `F`; `f(1) = 1`.
pub fn eval_f(assignment: &RmfAssignment, table: &FactorTable, f: &Poly) -> Result<Complex64> {
    if f.degree() == Some(0) && f.is_monic() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    Ok(table
        .factor(f)?
        .factors()
        .iter()
        .map(|(p, e)| assignment.value_of(p).powu(*e))
        .product())
}
