//! Lower bound on `M(q, q-3)` from a product-block system of total size `v`:
//! for prime `q ≡ 1 (mod 3)`, `M(q, q-3) >= (q-1)(v+q)`.

use thiserror::Error;

use crate::blocks::{stats, verify, BlockSystem};
use crate::gf::is_prime;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("q = {0} is not prime")]
    NotPrime(u64),
    #[error("q = {0} is not congruent to 1 mod 3")]
    WrongResidue(u64),
    #[error("system has {0} conflicts")]
    InvalidSystem(usize),
    #[error("bound overflows")]
    Overflow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundResult {
    pub q: u64,
    pub v: u64,
    /// Minimum distance `q - 3`.
    pub d: u64,
    pub lower_bound: u128,
}

/// Whether the bound applies to `q` at all.
pub fn admissible(q: u64) -> Result<(), BoundError> {
    if !is_prime(q) {
        return Err(BoundError::NotPrime(q));
    }
    if q % 3 != 1 {
        return Err(BoundError::WrongResidue(q));
    }
    Ok(())
}

pub fn theorem1_bound(q: u64, v: u64) -> Result<BoundResult, BoundError> {
    admissible(q)?;
    let lower_bound = (q as u128 - 1)
        .checked_mul(v as u128 + q as u128)
        .ok_or(BoundError::Overflow)?;
    Ok(BoundResult {
        q,
        v,
        d: q - 3,
        lower_bound,
    })
}

/// Convenience for uniform systems, `v = qk`.
pub fn bound_for_uniform(q: u64, k: u64) -> Result<BoundResult, BoundError> {
    let v = q.checked_mul(k).ok_or(BoundError::Overflow)?;
    theorem1_bound(q, v)
}

pub fn bound_from_system(system: &BlockSystem) -> Result<BoundResult, BoundError> {
    let q = system.q() as u64;
    if !system.field().spec().is_prime_field() {
        return Err(BoundError::NotPrime(q));
    }
    let report = verify(system);
    if !report.is_empty() {
        return Err(BoundError::InvalidSystem(report.count()));
    }
    theorem1_bound(q, stats(system).v as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::parse_int_blocks;

    #[test]
    fn formula_examples() {
        assert_eq!(theorem1_bound(7, 14).unwrap().lower_bound, 126);
        assert_eq!(theorem1_bound(19, 76).unwrap().lower_bound, 1710);
        let r = theorem1_bound(397, 2779).unwrap();
        assert_eq!((r.lower_bound, r.d), (1_257_696, 394));
        assert_eq!(theorem1_bound(5, 10), Err(BoundError::WrongResidue(5)));
        assert_eq!(theorem1_bound(25, 10), Err(BoundError::NotPrime(25)));
        assert_eq!(theorem1_bound(1, 0), Err(BoundError::NotPrime(1)));
    }

    #[test]
    fn from_system() {
        let s = parse_int_blocks("0 3, 2 6, 1 5, 0 4, 3 6, 2 5, 1 4", 7).unwrap();
        assert_eq!(bound_from_system(&s).unwrap().lower_bound, 126);
        let bad = parse_int_blocks("0, 1, 0, 0, 0, 0, 0", 7).unwrap();
        assert_eq!(bound_from_system(&bad), Err(BoundError::InvalidSystem(1)));
        let q5 = parse_int_blocks("0 3, 0 2, 2 4, 1 4, 1 3", 5).unwrap();
        assert_eq!(bound_from_system(&q5), Err(BoundError::WrongResidue(5)));
    }

    #[test]
    fn uniform_matches_closed_form() {
        for q in [7u64, 13, 19, 31, 397] {
            for k in 0..8 {
                let b = bound_for_uniform(q, k).unwrap().lower_bound;
                assert_eq!(b, ((q - 1) * q * (k + 1)) as u128);
            }
        }
    }
}
