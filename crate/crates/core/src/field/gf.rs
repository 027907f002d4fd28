//! Small finite fields `GF(q)` with log/antilog tables.
//!
//! Elements are encoded as integers in `[0, q)` whose base-`ℓ` digits are
//! the coefficients of a polynomial in the primitive root `g`'s minimal
//! polynomial basis (for prime `q` the encoding is the residue itself).

use crate::units::is_prime;

/// Largest supported field size.
pub const MAX_Q: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf {
    q: u32,
    char: u32,
    degree: u32,
    /// `exp[k] = g^k` for `0 ≤ k < q - 1`.
    exp: Vec<u32>,
    /// `log[a]` for `a ≠ 0`.
    log: Vec<u32>,
}

/// `q = ℓ^k` with `ℓ` prime, if it is one.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let ell = (2..=q).find(|d| q % d == 0)?;
    let (mut r, mut k) = (q, 0);
    while r % ell == 0 {
        r /= ell;
        k += 1;
    }
    (r == 1).then_some((ell, k))
}

/// Multiplies two encoded polynomials modulo the monic `modulus` (given by
/// its lower coefficients: `x^k = -Σ modulus[i] x^i`).
fn poly_mul(a: u32, b: u32, ell: u32, modulus: &[u32]) -> u32 {
    let k = modulus.len();
    let digits = |mut x: u32| {
        let mut v = vec![0u32; k];
        for d in v.iter_mut() {
            *d = x % ell;
            x /= ell;
        }
        v
    };
    let (da, db) = (digits(a), digits(b));
    let mut prod = vec![0u64; 2 * k];
    for i in 0..k {
        for j in 0..k {
            prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % ell as u64;
        }
    }
    for top in (k..2 * k).rev() {
        let c = prod[top];
        if c == 0 {
            continue;
        }
        prod[top] = 0;
        for i in 0..k {
            let sub = c * modulus[i] as u64 % ell as u64;
            prod[top - k + i] = (prod[top - k + i] + ell as u64 - sub) % ell as u64;
        }
    }
    prod[..k].iter().rev().fold(0u32, |acc, &d| acc * ell + d as u32)
}

impl Gf {
    /// Builds `GF(q)`; `None` unless `q` is a prime power `≤ MAX_Q`.
    pub fn new(q: u32) -> Option<Self> {
        if q > MAX_Q {
            return None;
        }
        let (ell, k) = prime_power(q)?;
        debug_assert!(is_prime(ell as u64));
        // Try monic moduli until x has multiplicative order q - 1.
        let candidates = ell.pow(k);
        for code in 0..candidates {
            let mut modulus = vec![0u32; k as usize];
            let mut c = code;
            for m in modulus.iter_mut() {
                *m = c % ell;
                c /= ell;
            }
            if modulus[0] == 0 {
                continue;
            }
            let x = if k == 1 { (ell - modulus[0]) % ell } else { ell };
            if x == 0 {
                continue;
            }
            let mut exp = Vec::with_capacity(q as usize - 1);
            let mut cur = 1u32;
            let mut ok = true;
            for i in 0..q - 1 {
                if i > 0 && cur == 1 {
                    ok = false;
                    break;
                }
                exp.push(cur);
                cur = poly_mul(cur, x, ell, &modulus);
            }
            if !ok || cur != 1 {
                continue;
            }
            let mut log = vec![0u32; q as usize];
            for (i, &e) in exp.iter().enumerate() {
                log[e as usize] = i as u32;
            }
            return Some(Gf { q, char: ell, degree: k, exp, log });
        }
        None
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.char
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_prime_field(&self) -> bool {
        self.degree == 1
    }

    pub fn generator(&self) -> u32 {
        self.exp[1 % self.exp.len()]
    }

    pub fn one(&self) -> u32 {
        1
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.degree == 1 {
            return (a + b) % self.q;
        }
        let (mut a, mut b, mut out, mut place) = (a, b, 0, 1);
        for _ in 0..self.degree {
            out += ((a % self.char + b % self.char) % self.char) * place;
            a /= self.char;
            b /= self.char;
            place *= self.char;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        let (mut a, mut out, mut place) = (a, 0, 1);
        for _ in 0..self.degree {
            out += ((self.char - a % self.char) % self.char) * place;
            a /= self.char;
            place *= self.char;
        }
        out
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let n = self.q - 1;
        self.exp[((self.log[a as usize] + self.log[b as usize]) % n) as usize]
    }

    /// Inverse of a nonzero element.
    pub fn inv(&self, a: u32) -> u32 {
        assert!(a != 0, "inverse of zero in GF({})", self.q);
        let n = self.q - 1;
        self.exp[((n - self.log[a as usize]) % n) as usize]
    }

    pub fn pow(&self, a: u32, e: i64) -> u32 {
        if a == 0 {
            assert!(e > 0, "non-positive power of zero");
            return 0;
        }
        let n = (self.q - 1) as i64;
        let k = (self.log[a as usize] as i64 * e.rem_euclid(n)).rem_euclid(n);
        self.exp[k as usize]
    }

    /// Discrete logarithm to the base `g` of a nonzero element.
    pub fn log(&self, a: u32) -> u32 {
        assert!(a != 0, "logarithm of zero");
        self.log[a as usize]
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> u32 {
        n.rem_euclid(self.char as i64) as u32
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q
    }

    /// Prime-field elements print as integers, others as powers of `g`.
    pub fn render(&self, a: u32) -> String {
        if self.degree == 1 || a < self.char {
            a.to_string()
        } else {
            format!("g^{}", self.log(a))
        }
    }
}
