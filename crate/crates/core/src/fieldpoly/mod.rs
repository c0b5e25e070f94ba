//! Finite fields, polynomials over them, and their factorization.

mod factor;
mod field;
mod poly;
mod sieve;

pub use factor::{arith_stats, factor, ArithStats, Factorization};
pub use field::{prime_power, Elem, FieldSpec, DEFAULT_BUDGET, MAX_ORDER};
pub use poly::{Poly, PrimeOrder};
pub use sieve::{irreducibles_up_to, is_irreducible, mobius, pi_q, FactorTable, IndexStats, NO_PRIME};

pub(crate) use poly::{divmod_slices, gcd_slices, monic_index_u128, mul_into};
