#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

/// Prime powers up to `limit`.
pub fn prime_powers(limit: u64) -> Vec<u64> {
    (2..=limit)
        .filter(|&n| {
            let p = (2..=n).find(|d| n % d == 0).unwrap();
            let mut m = n;
            while m % p == 0 {
                m /= p;
            }
            m == 1
        })
        .collect()
}

/// Arithmetic of GF(q) for q in {2, 3, 4, 5, 7}, written out by hand:
/// integers mod p, and GF(4) = GF(2)[x]/(x^2 + x + 1) with codes 0, 1, x, x+1.
pub struct TinyField {
    pub q: u32,
}

impl TinyField {
    pub fn new(q: u32) -> Self {
        assert!([2, 3, 4, 5, 7].contains(&q));
        TinyField { q }
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if self.q == 4 {
            a ^ b
        } else {
            (a + self.q - b) % self.q
        }
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if self.q == 4 {
            const T: [[u32; 4]; 4] = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]];
            T[a as usize][b as usize]
        } else {
            a * b % self.q
        }
    }
}

/// Every violating quadruple `(r, a, s, b)` with `r < s`, by checking each
/// pair of (label, member) cells directly against the defining product.
pub fn naive_conflicts(f: &TinyField, blocks: &[Vec<u32>]) -> BTreeSet<(u32, u32, u32, u32)> {
    let cells: Vec<(u32, u32)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(r, b)| b.iter().map(move |&a| (r as u32, a)))
        .collect();
    let mut out = BTreeSet::new();
    for &(r, a) in &cells {
        for &(s, b) in &cells {
            if r < s && f.mul(f.sub(b, a), f.sub(s, r)) == 1 {
                out.insert((r, a, s, b));
            }
        }
    }
    out
}

/// Independent model of GF(p^m): coefficient vectors, long division by the
/// modulus, nothing shared with the library beyond the modulus itself.
pub struct PolyOracle {
    pub p: u32,
    pub m: usize,
    pub modulus: Vec<u32>,
}

impl PolyOracle {
    pub fn decode(&self, mut code: u32) -> Vec<u32> {
        (0..self.m)
            .map(|_| {
                let c = code % self.p;
                code /= self.p;
                c
            })
            .collect()
    }

    pub fn encode(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn mul(&self, x: u32, y: u32) -> u32 {
        let (a, b) = (self.decode(x), self.decode(y));
        let mut prod = vec![0u32; 2 * self.m];
        for i in 0..self.m {
            for j in 0..self.m {
                prod[i + j] = (prod[i + j] + a[i] * b[j]) % self.p;
            }
        }
        // long division by the monic modulus
        for deg in (self.m..prod.len()).rev() {
            let c = prod[deg];
            for i in 0..=self.m {
                let idx = deg - self.m + i;
                prod[idx] = (prod[idx] + (self.p - c) * self.modulus[i]) % self.p;
            }
        }
        self.encode(&prod[..self.m])
    }

    pub fn add(&self, x: u32, y: u32) -> u32 {
        let (a, b) = (self.decode(x), self.decode(y));
        let s: Vec<u32> = a.iter().zip(&b).map(|(u, v)| (u + v) % self.p).collect();
        self.encode(&s)
    }

    /// A quotient ring is a field iff it has no zero divisors.
    pub fn is_field(&self) -> bool {
        let q = self.p.pow(self.m as u32);
        (1..q).all(|x| (1..q).all(|y| self.mul(x, y) != 0))
    }
}

/// The bundled fixture corpus; reachable from either crate of the workspace.
pub fn data_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data"))
}
