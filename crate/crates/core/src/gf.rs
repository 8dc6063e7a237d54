//! Exact arithmetic in GF(q) for prime and prime-power orders.
//!
//! Elements are stored as their base-`p` digit packing
//! `code = c_0 + c_1 p + ... + c_{m-1} p^{m-1}`, where `(c_0, .., c_{m-1})`
//! are the coefficients of the polynomial representative modulo the field's
//! defining polynomial. For prime fields this is just the residue mod `p`.
//!
//! Construction is deterministic: GF(p^m) is always realized with the
//! irreducible monic polynomial whose lower coefficients have the smallest
//! base-`p` encoding.

use std::fmt;

use thiserror::Error;

/// Largest order accepted by [`FieldSpec::for_order`].
pub const MAX_ORDER: u64 = 1 << 31;

/// Orders up to this bound get log/antilog/inverse tables.
pub const TABLE_LIMIT: u32 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("field order must be at least 2, got {0}")]
    OrderTooSmall(u64),
    #[error("{q} = {factorization} is not a prime power")]
    NotPrimePower { q: u64, factorization: String },
    #[error("field order {0} exceeds the supported maximum {MAX_ORDER}")]
    TooLarge(u64),
    #[error("element code {code} is out of range for GF({q})")]
    OutOfRange { code: u64, q: u32 },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("invalid field description: {0}")]
    InvalidSpec(String),
}

/// An element of some GF(q), identified by its canonical code in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldElement(u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    /// Wraps a raw code without range checking; see [`Field::element`].
    #[inline]
    pub const fn from_code(code: u32) -> Self {
        FieldElement(code)
    }

    #[inline]
    pub const fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Description of a concrete realization of GF(q).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    p: u32,
    m: u32,
    /// Coefficients `c_0..c_m` of the monic defining polynomial.
    modulus: Vec<u32>,
    q: u32,
}

impl FieldSpec {
    /// Deterministic description of GF(q).
    pub fn for_order(q: u64) -> Result<Self, FieldError> {
        if q < 2 {
            return Err(FieldError::OrderTooSmall(q));
        }
        if q > MAX_ORDER {
            return Err(FieldError::TooLarge(q));
        }
        let factors = factorize(q);
        let p = factors[0].0;
        if factors.len() != 1 {
            return Err(FieldError::NotPrimePower {
                q,
                factorization: format_factorization(&factors),
            });
        }
        let m = factors[0].1;
        let p = p as u32;
        let modulus = if m == 1 {
            vec![0, 1]
        } else {
            smallest_irreducible(p, m)
        };
        Ok(FieldSpec {
            p,
            m,
            modulus,
            q: q as u32,
        })
    }

    /// Builds a description from explicit parts, checking every invariant.
    pub fn from_parts(p: u32, m: u32, modulus: Vec<u32>) -> Result<Self, FieldError> {
        if p < 2 || !is_prime(p as u64) {
            return Err(FieldError::InvalidSpec(format!(
                "characteristic {p} is not prime"
            )));
        }
        if m == 0 {
            return Err(FieldError::InvalidSpec("degree must be at least 1".into()));
        }
        let q = (p as u64)
            .checked_pow(m)
            .filter(|&q| q <= MAX_ORDER)
            .ok_or(FieldError::TooLarge(u64::MAX))?;
        if modulus.len() != m as usize + 1 {
            return Err(FieldError::InvalidSpec(format!(
                "modulus must have {} coefficients, got {}",
                m + 1,
                modulus.len()
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(FieldError::InvalidSpec(
                "modulus coefficient out of range".into(),
            ));
        }
        if modulus[m as usize] != 1 {
            return Err(FieldError::InvalidSpec("modulus is not monic".into()));
        }
        if m == 1 {
            if modulus[0] != 0 {
                return Err(FieldError::InvalidSpec(
                    "prime field modulus must be x".into(),
                ));
            }
        } else if !is_irreducible(&modulus, p) {
            return Err(FieldError::InvalidSpec("modulus is reducible".into()));
        }
        Ok(FieldSpec {
            p,
            m,
            modulus,
            q: q as u32,
        })
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn is_prime_field(&self) -> bool {
        self.m == 1
    }
}

struct Tables {
    exp: Vec<u32>,
    log: Vec<u32>,
    inv: Vec<u32>,
}

/// GF(q) ready for arithmetic. Immutable once built.
pub struct Field {
    spec: FieldSpec,
    tables: Option<Tables>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("spec", &self.spec)
            .field("tabulated", &self.tables.is_some())
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl Eq for Field {}

impl Field {
    /// GF(q) with the canonical modulus.
    pub fn new(q: u64) -> Result<Self, FieldError> {
        Ok(Self::from_spec(FieldSpec::for_order(q)?))
    }

    pub fn from_spec(spec: FieldSpec) -> Self {
        let mut field = Field { spec, tables: None };
        if field.spec.q <= TABLE_LIMIT {
            field.tables = Some(field.build_tables());
        }
        field
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.spec.q
    }

    /// Range-checked conversion from a raw code.
    pub fn element(&self, code: u64) -> Result<FieldElement, FieldError> {
        if code < self.spec.q as u64 {
            Ok(FieldElement(code as u32))
        } else {
            Err(FieldError::OutOfRange {
                code,
                q: self.spec.q,
            })
        }
    }

    pub fn elements(&self) -> impl DoubleEndedIterator<Item = FieldElement> + ExactSizeIterator {
        (0..self.spec.q).map(FieldElement)
    }

    pub fn nonzero_elements(
        &self,
    ) -> impl DoubleEndedIterator<Item = FieldElement> + ExactSizeIterator {
        (1..self.spec.q).map(FieldElement)
    }

    /// Coefficient vector `(c_0, .., c_{m-1})` of an element.
    pub fn coefficients(&self, x: FieldElement) -> Vec<u32> {
        let p = self.spec.p;
        let mut code = x.0;
        (0..self.spec.m)
            .map(|_| {
                let c = code % p;
                code /= p;
                c
            })
            .collect()
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> Result<FieldElement, FieldError> {
        if coeffs.len() != self.spec.m as usize || coeffs.iter().any(|&c| c >= self.spec.p) {
            return Err(FieldError::InvalidSpec(format!(
                "expected {} coefficients in [0, {})",
                self.spec.m, self.spec.p
            )));
        }
        Ok(FieldElement(pack(coeffs, self.spec.p)))
    }

    #[inline]
    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        debug_assert!(x.0 < self.spec.q && y.0 < self.spec.q);
        let p = self.spec.p;
        if self.spec.m == 1 {
            let s = x.0 as u64 + y.0 as u64;
            return FieldElement((s % p as u64) as u32);
        }
        let (mut a, mut b) = (x.0, y.0);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.spec.m {
            out += ((a % p + b % p) % p) * place;
            a /= p;
            b /= p;
            place = place.wrapping_mul(p);
        }
        FieldElement(out)
    }

    #[inline]
    pub fn neg(&self, x: FieldElement) -> FieldElement {
        debug_assert!(x.0 < self.spec.q);
        let p = self.spec.p;
        if self.spec.m == 1 {
            return FieldElement(if x.0 == 0 { 0 } else { p - x.0 });
        }
        let mut a = x.0;
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.spec.m {
            out += ((p - a % p) % p) * place;
            a /= p;
            place = place.wrapping_mul(p);
        }
        FieldElement(out)
    }

    /// `x - y`, always equal to `add(x, neg(y))`.
    #[inline]
    pub fn sub(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        if self.spec.m == 1 {
            let p = self.spec.p as u64;
            return FieldElement(((x.0 as u64 + p - y.0 as u64) % p) as u32);
        }
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        debug_assert!(x.0 < self.spec.q && y.0 < self.spec.q);
        if x.0 == 0 || y.0 == 0 {
            return FieldElement(0);
        }
        match &self.tables {
            Some(t) => FieldElement(t.exp[(t.log[x.index()] + t.log[y.index()]) as usize]),
            None => self.mul_direct(x, y),
        }
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement, FieldError> {
        if x.0 == 0 {
            return Err(FieldError::ZeroInverse);
        }
        Ok(match &self.tables {
            Some(t) => FieldElement(t.inv[x.index()]),
            None => self.pow(x, self.spec.q as u64 - 2),
        })
    }

    pub fn pow(&self, x: FieldElement, mut e: u64) -> FieldElement {
        let mut base = x;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Schoolbook product modulo the defining polynomial; no tables.
    pub fn mul_direct(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        let p = self.spec.p as u64;
        if self.spec.m == 1 {
            return FieldElement(((x.0 as u64 * y.0 as u64) % p) as u32);
        }
        let a = self.coefficients(x);
        let b = self.coefficients(y);
        let m = self.spec.m as usize;
        let mut prod = vec![0u64; 2 * m - 1];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        // x^m = -(c_0 + .. + c_{m-1} x^{m-1})
        for top in (m..prod.len()).rev() {
            let lead = prod[top];
            if lead == 0 {
                continue;
            }
            prod[top] = 0;
            for (i, &c) in self.spec.modulus[..m].iter().enumerate() {
                let idx = top - m + i;
                prod[idx] = (prod[idx] + (p - lead) * c as u64) % p;
            }
        }
        let coeffs: Vec<u32> = prod[..m].iter().map(|&c| c as u32).collect();
        FieldElement(pack(&coeffs, self.spec.p))
    }

    fn build_tables(&self) -> Tables {
        let q = self.spec.q as usize;
        let order = self.spec.q as u64 - 1;
        let factors: Vec<u64> = if order == 1 {
            Vec::new()
        } else {
            factorize(order).into_iter().map(|(f, _)| f).collect()
        };
        let generator = (1..self.spec.q)
            .map(FieldElement)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&f| self.pow_direct(g, order / f) != FieldElement::ONE)
            })
            .expect("multiplicative group of a finite field is cyclic");
        let mut exp = vec![0u32; 2 * (q - 1)];
        let mut log = vec![0u32; q];
        let mut cur = FieldElement::ONE;
        for i in 0..q - 1 {
            exp[i] = cur.0;
            exp[i + q - 1] = cur.0;
            log[cur.index()] = i as u32;
            cur = self.mul_direct(cur, generator);
        }
        let mut inv = vec![0u32; q];
        for x in 1..q {
            let l = log[x] as usize;
            inv[x] = exp[(q - 1 - l) % (q - 1)];
        }
        Tables { exp, log, inv }
    }

    fn pow_direct(&self, x: FieldElement, mut e: u64) -> FieldElement {
        let mut base = x;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul_direct(acc, base);
            }
            base = self.mul_direct(base, base);
            e >>= 1;
        }
        acc
    }
}

fn pack(coeffs: &[u32], p: u32) -> u32 {
    coeffs.iter().rev().fold(0u32, |acc, &c| acc * p + c)
}

/// Trial-division factorization into `(prime, exponent)` pairs, ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == [(n, 1)]
}

fn format_factorization(factors: &[(u64, u32)]) -> String {
    factors
        .iter()
        .map(|&(p, e)| {
            if e == 1 {
                p.to_string()
            } else {
                format!("{p}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join(" * ")
}

fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    let count = (p as u64).pow(m);
    (0..count)
        .map(|n| {
            let mut coeffs = Vec::with_capacity(m as usize + 1);
            let mut n = n;
            for _ in 0..m {
                coeffs.push((n % p as u64) as u32);
                n /= p as u64;
            }
            coeffs.push(1);
            coeffs
        })
        .find(|poly| is_irreducible(poly, p))
        .expect("irreducible polynomials exist in every degree")
}

/// Irreducibility of a monic polynomial over GF(p) by trial division with
/// every monic polynomial of degree at most half its own.
fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for n in 0..count {
            let mut divisor = Vec::with_capacity(d + 1);
            let mut n = n;
            for _ in 0..d {
                divisor.push((n % p as u64) as u32);
                n /= p as u64;
            }
            divisor.push(1);
            if poly_rem_is_zero(poly, &divisor, p) {
                return false;
            }
        }
    }
    true
}

fn poly_rem_is_zero(num: &[u32], monic_div: &[u32], p: u32) -> bool {
    let p = p as u64;
    let mut rem: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    let dd = monic_div.len() - 1;
    for top in (dd..rem.len()).rev() {
        let lead = rem[top];
        if lead == 0 {
            continue;
        }
        for (i, &c) in monic_div.iter().enumerate() {
            let idx = top - dd + i;
            rem[idx] = (rem[idx] + (p - lead) * c as u64 % p) % p;
        }
    }
    rem[..dd].iter().all(|&c| c == 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(c: u32) -> FieldElement {
        FieldElement::from_code(c)
    }

    #[test]
    fn prime_field_spec() {
        let spec = FieldSpec::for_order(5).unwrap();
        assert_eq!(
            (spec.characteristic(), spec.degree(), spec.order()),
            (5, 1, 5)
        );
        assert_eq!(spec.modulus(), &[0, 1]);
    }

    #[test]
    fn gf9_uses_x2_plus_1() {
        let spec = FieldSpec::for_order(9).unwrap();
        assert_eq!((spec.characteristic(), spec.degree()), (3, 2));
        assert_eq!(spec.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn rejects_non_prime_powers() {
        let err = FieldSpec::for_order(6).unwrap_err();
        assert_eq!(
            err,
            FieldError::NotPrimePower {
                q: 6,
                factorization: "2 * 3".into()
            }
        );
        assert!(err.to_string().contains("2 * 3"));
        assert!(matches!(
            FieldSpec::for_order(1),
            Err(FieldError::OrderTooSmall(1))
        ));
        assert!(matches!(
            FieldSpec::for_order(36),
            Err(FieldError::NotPrimePower { .. })
        ));
    }

    #[test]
    fn worked_products_and_inverses() {
        let f5 = Field::new(5).unwrap();
        assert_eq!(f5.mul(e(2), e(3)), e(1));
        let f7 = Field::new(7).unwrap();
        assert_eq!(f7.inv(e(3)).unwrap(), e(5));
        assert_eq!(f7.inv(e(1)).unwrap(), e(1));
        let f9 = Field::new(9).unwrap();
        assert_eq!(f9.mul(e(3), e(3)), e(2));
        assert_eq!(f9.inv(e(3)).unwrap(), e(6));
        for y in f9.elements() {
            assert_eq!(f9.mul(e(0), y), e(0));
        }
    }

    #[test]
    fn zero_has_no_inverse() {
        let f = Field::new(11).unwrap();
        assert_eq!(f.inv(e(0)), Err(FieldError::ZeroInverse));
    }

    #[test]
    fn element_range_check() {
        let f = Field::new(7).unwrap();
        assert!(f.element(6).is_ok());
        assert_eq!(f.element(7), Err(FieldError::OutOfRange { code: 7, q: 7 }));
    }

    #[test]
    fn tables_match_direct_multiplication() {
        for q in [8u64, 25, 27, 49, 64, 81, 125] {
            let f = Field::new(q).unwrap();
            for x in f.elements() {
                for y in f.elements() {
                    assert_eq!(f.mul(x, y), f.mul_direct(x, y), "q={q} {x}*{y}");
                }
            }
        }
    }

    #[test]
    fn untabulated_field_inverts() {
        let f = Field::new(70_001).unwrap();
        assert!(f.tables.is_none());
        for x in [1u32, 2, 3, 12_345, 70_000] {
            let y = f.inv(e(x)).unwrap();
            assert_eq!(f.mul(e(x), y), FieldElement::ONE);
        }
        let g = Field::new(1 << 17).unwrap();
        for x in [1u32, 7, 99_999] {
            assert_eq!(g.mul(e(x), g.inv(e(x)).unwrap()), FieldElement::ONE);
        }
    }

    #[test]
    fn coefficient_round_trip() {
        let f = Field::new(27).unwrap();
        for x in f.elements() {
            let c = f.coefficients(x);
            assert_eq!(f.from_coefficients(&c).unwrap(), x);
        }
    }

    #[test]
    fn from_parts_validation() {
        assert!(FieldSpec::from_parts(3, 2, vec![1, 0, 1]).is_ok());
        assert!(FieldSpec::from_parts(3, 2, vec![0, 0, 1]).is_err());
        assert!(FieldSpec::from_parts(4, 1, vec![0, 1]).is_err());
        assert!(FieldSpec::from_parts(5, 1, vec![2, 1]).is_err());
        assert!(FieldSpec::from_parts(3, 2, vec![1, 0, 2]).is_err());
    }
}
