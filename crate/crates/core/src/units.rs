//! Truncated arithmetic in the group of principal units `1 + pZ_p`.
//!
//! A [`PAdicUnit`] is a residue modulo `p^K` that is congruent to 1 mod `p`.
//! Closed subgroups generated by finitely many such units are summarized by
//! [`UnitSubgroupInvariants`]: the depth `q` of the subgroup inside the
//! filtration `1 + p^k Z_p`, the `{±1}`-component for `p = 2`, and the index
//! of the subgroup of squares.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Default number of p-adic digits carried by units.
pub const DEFAULT_PRECISION: u32 = 64;

/// Smallest precision accepted; the `p = 2` structure theory needs `K >= 4`.
pub const MIN_PRECISION: u32 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnitError {
    #[error("{value} is not a principal unit mod {p} (not congruent to 1)")]
    NotAUnit { value: String, p: u64 },
    #[error("denominator {den} is not invertible mod {p}")]
    DenominatorNotInvertible { den: String, p: u64 },
    #[error("precision exhausted: invariant needs more than {precision} p-adic digits")]
    PrecisionExhausted { precision: u32 },
    #[error("precision {0} is below the minimum of {MIN_PRECISION}")]
    PrecisionTooSmall(u32),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("units live in different groups (p={p1}, K={k1} vs p={p2}, K={k2})")]
    Mismatch { p1: u64, k1: u32, p2: u64, k2: u32 },
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn modulus(p: u64, k: u32) -> BigUint {
    BigUint::from(p).pow(k)
}

fn reduce_signed(x: &BigInt, m: &BigUint) -> BigUint {
    let m = BigInt::from(m.clone());
    x.mod_floor(&m).to_biguint().expect("mod_floor of positive modulus is nonnegative")
}

/// An element of `1 + pZ_p`, known modulo `p^K`.
///
/// Equality and ordering look only at `(p, K, residue)`; the exact rational a
/// unit was built from, when there is one, is kept for display.
#[derive(Debug, Clone)]
pub struct PAdicUnit {
    p: u64,
    precision: u32,
    residue: BigUint,
    exact: Option<(BigInt, BigInt)>,
}

impl PAdicUnit {
    /// The residue of `num/den` modulo `p^K`.
    pub fn from_rational(p: u64, num: &BigInt, den: &BigInt, precision: u32) -> Result<Self, UnitError> {
        if !is_prime(p) {
            return Err(UnitError::NotPrime(p));
        }
        if precision < MIN_PRECISION {
            return Err(UnitError::PrecisionTooSmall(precision));
        }
        let pb = BigInt::from(p);
        if den.is_zero() || den.mod_floor(&pb).is_zero() {
            return Err(UnitError::DenominatorNotInvertible { den: den.to_string(), p });
        }
        let m = modulus(p, precision);
        let d = reduce_signed(den, &m);
        let d_inv = d.modinv(&m).expect("denominator coprime to p is invertible mod p^K");
        let residue = (reduce_signed(num, &m) * d_inv) % &m;
        if (&residue % p) != BigUint::one() {
            let shown = if den.is_one() { num.to_string() } else { format!("{num}/{den}") };
            return Err(UnitError::NotAUnit { value: shown, p });
        }
        let g = num.gcd(den);
        let (mut n, mut dd) = (num / &g, den / &g);
        if dd.is_negative() {
            n = -n;
            dd = -dd;
        }
        Ok(PAdicUnit { p, precision, residue, exact: Some((n, dd)) })
    }

    pub fn from_i64(p: u64, num: i64, den: i64, precision: u32) -> Result<Self, UnitError> {
        Self::from_rational(p, &BigInt::from(num), &BigInt::from(den), precision)
    }

    /// A unit given directly by its residue mod `p^K`.
    pub fn from_residue(p: u64, residue: BigUint, precision: u32) -> Result<Self, UnitError> {
        if !is_prime(p) {
            return Err(UnitError::NotPrime(p));
        }
        if precision < MIN_PRECISION {
            return Err(UnitError::PrecisionTooSmall(precision));
        }
        let m = modulus(p, precision);
        let residue = residue % &m;
        if (&residue % p) != BigUint::one() {
            return Err(UnitError::NotAUnit { value: residue.to_string(), p });
        }
        Ok(PAdicUnit { p, precision, residue, exact: None })
    }

    pub fn one(p: u64, precision: u32) -> Result<Self, UnitError> {
        Self::from_i64(p, 1, 1, precision)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn exact(&self) -> Option<&(BigInt, BigInt)> {
        self.exact.as_ref()
    }

    pub fn is_one(&self) -> bool {
        self.residue.is_one()
    }

    fn check_same(&self, other: &Self) -> Result<(), UnitError> {
        if self.p != other.p || self.precision != other.precision {
            return Err(UnitError::Mismatch { p1: self.p, k1: self.precision, p2: other.p, k2: other.precision });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, UnitError> {
        self.check_same(other)?;
        let m = modulus(self.p, self.precision);
        let exact = match (&self.exact, &other.exact) {
            (Some((a, b)), Some((c, d))) => {
                let (n, dd) = (a * c, b * d);
                let g = n.gcd(&dd);
                Some((n / &g, dd / g))
            }
            _ => None,
        };
        Ok(PAdicUnit { p: self.p, precision: self.precision, residue: (&self.residue * &other.residue) % m, exact })
    }

    pub fn inv(&self) -> Self {
        let m = modulus(self.p, self.precision);
        let residue = self.residue.modinv(&m).expect("principal units are invertible");
        let exact = self.exact.as_ref().map(|(n, d)| if n.is_negative() { (-d, -n) } else { (d.clone(), n.clone()) });
        PAdicUnit { p: self.p, precision: self.precision, residue, exact }
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inv() } else { self.clone() };
        let m = modulus(self.p, self.precision);
        let k = e.unsigned_abs();
        let residue = base.residue.modpow(&BigUint::from(k), &m);
        let exact = base.exact.as_ref().and_then(|(n, d)| {
            let k32 = u32::try_from(k).ok().filter(|&k| k <= 64)?;
            Some((n.pow(k32), d.pow(k32)))
        });
        PAdicUnit { p: self.p, precision: self.precision, residue, exact }
    }

    /// The `{±1}`-component as an element of `F_p`: for `p = 2`, 1 exactly when
    /// the unit is not `1 mod 4`; always 0 for odd `p`.
    pub fn epsilon(&self) -> u64 {
        if self.p != 2 {
            return 0;
        }
        if (&self.residue % 4u32).is_one() {
            0
        } else {
            1
        }
    }

    /// `v_p(u - 1)`, or `None` when the residue is exactly 1.
    pub fn depth(&self) -> Option<u32> {
        if self.residue.is_one() {
            return None;
        }
        let m = modulus(self.p, self.precision);
        let mut x = (&self.residue + &m - 1u32) % &m;
        let mut v = 0;
        while (&x % self.p).is_zero() {
            x /= self.p;
            v += 1;
        }
        Some(v)
    }

    /// Writes a 2-adic unit as `(-1)^sign * 5^exponent` with the exponent mod `2^(K-2)`.
    fn two_adic_log(&self) -> (u8, BigUint) {
        debug_assert_eq!(self.p, 2);
        let k = self.precision;
        let m = modulus(2, k);
        let sign = self.epsilon() as u8;
        let mut t = if sign == 1 { (&m - &self.residue) % &m } else { self.residue.clone() };
        let five_inv = BigUint::from(5u32).modinv(&m).expect("5 is a unit");
        let mut step = five_inv; // 5^(-2^i)
        let mut exponent = BigUint::zero();
        for i in 0..(k - 2) {
            if t.bit(u64::from(i) + 2) {
                t = (&t * &step) % &m;
                exponent.set_bit(u64::from(i), true);
            }
            step = (&step * &step) % &m;
        }
        debug_assert!(t.is_one());
        (sign, exponent)
    }

    pub fn render(&self) -> String {
        match &self.exact {
            Some((n, d)) if d.is_one() => n.to_string(),
            Some((n, d)) => format!("{n}/{d}"),
            None => self.residue.to_string(),
        }
    }
}

impl PartialEq for PAdicUnit {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.precision == other.precision && self.residue == other.residue
    }
}

impl Eq for PAdicUnit {}

impl std::hash::Hash for PAdicUnit {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        (self.p, self.precision, &self.residue).hash(state);
    }
}

impl PartialOrd for PAdicUnit {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PAdicUnit {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.p, self.precision, &self.residue).cmp(&(other.p, other.precision, &other.residue))
    }
}

impl fmt::Display for PAdicUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn bigint_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

impl Serialize for PAdicUnit {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        match &self.exact {
            Some((n, d)) => {
                map.serialize_entry("num", &bigint_json(n))?;
                map.serialize_entry("den", &bigint_json(d))?;
            }
            None => {
                map.serialize_entry("residue", &self.residue.to_string())?;
                map.serialize_entry("precision", &self.precision)?;
            }
        }
        map.end()
    }
}

/// Invariants of the closed subgroup generated by finitely many principal units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitSubgroupInvariants {
    pub p: u64,
    pub trivial: bool,
    /// `log_p q`; `None` for the trivial subgroup (where `q = 0`).
    pub q_exponent: Option<u32>,
    pub eps_nonzero: bool,
    /// Index of the subgroup of squares (`p = 2`); 1 for odd `p`.
    pub square_index: u32,
}

impl UnitSubgroupInvariants {
    pub fn trivial(p: u64) -> Self {
        UnitSubgroupInvariants { p, trivial: true, q_exponent: None, eps_nonzero: false, square_index: 1 }
    }

    /// The q-invariant: the largest p-power `q > 1` with the subgroup inside
    /// `1 + qZ_p`, or 0 when the subgroup is trivial.
    pub fn q(&self) -> BigUint {
        match self.q_exponent {
            Some(e) => BigUint::from(self.p).pow(e),
            None => BigUint::zero(),
        }
    }

    /// The q-invariant as a machine integer, when it fits.
    pub fn q_u64(&self) -> Option<u64> {
        self.q().to_u64()
    }
}

impl Serialize for UnitSubgroupInvariants {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("trivial", &self.trivial)?;
        match self.q_u64() {
            Some(q) => map.serialize_entry("q", &q)?,
            None => map.serialize_entry("q", &self.q().to_string())?,
        }
        map.serialize_entry("epsNonzero", &self.eps_nonzero)?;
        map.serialize_entry("squareIndex", &self.square_index)?;
        map.end()
    }
}

fn det2(a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> BigInt {
    (&a.0 * &b.1 - &a.1 * &b.0).abs()
}

/// Covolume of the lattice in `Z^2` spanned by `vectors` (gcd of 2x2 minors).
fn covolume(vectors: &[(BigInt, BigInt)]) -> BigInt {
    let mut g = BigInt::zero();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            g = g.gcd(&det2(&vectors[i], &vectors[j]));
        }
    }
    g
}

/// Invariants of the subgroup of `1 + pZ_p` generated by `gens`.
///
/// Generators whose residue is exactly 1 are treated as the identity. Any
/// invariant that would need digits at or beyond `p^(K-2)` raises
/// [`UnitError::PrecisionExhausted`].
pub fn subgroup_invariants(p: u64, gens: &[PAdicUnit], precision: u32) -> Result<UnitSubgroupInvariants, UnitError> {
    if !is_prime(p) {
        return Err(UnitError::NotPrime(p));
    }
    for g in gens {
        if g.p != p || g.precision != precision {
            return Err(UnitError::Mismatch { p1: p, k1: precision, p2: g.p, k2: g.precision });
        }
    }
    let nontrivial: Vec<&PAdicUnit> = gens.iter().filter(|g| !g.is_one()).collect();
    let Some(depth) = nontrivial.iter().filter_map(|g| g.depth()).min() else {
        return Ok(UnitSubgroupInvariants::trivial(p));
    };
    if depth + 2 >= precision {
        return Err(UnitError::PrecisionExhausted { precision });
    }
    if p != 2 {
        return Ok(UnitSubgroupInvariants {
            p,
            trivial: false,
            q_exponent: Some(depth),
            eps_nonzero: false,
            square_index: 1,
        });
    }

    // (Z/2^K)^x = {±1} x <5>; the subgroup becomes a lattice in Z^2 containing
    // (2, 0) and (0, 2^(K-2)).
    let m = BigInt::from(BigUint::one() << (precision - 2));
    let relations = [(BigInt::from(2), BigInt::zero()), (BigInt::zero(), m.clone())];
    let logs: Vec<(BigInt, BigInt)> = nontrivial
        .iter()
        .map(|g| {
            let (s, a) = g.two_adic_log();
            (BigInt::from(s), BigInt::from(a))
        })
        .collect();
    let mut lattice = logs.clone();
    lattice.extend(relations.iter().cloned());
    let mut doubled: Vec<(BigInt, BigInt)> = logs.iter().map(|(s, a)| (s * 2, a * 2)).collect();
    doubled.extend(relations.iter().cloned());
    let cov = covolume(&lattice);
    let cov_sq = covolume(&doubled);

    // The 1 + 4Z_2 part of the subgroup is <5^g>; too deep a g is ambiguous.
    let first_gcd = lattice.iter().fold(BigInt::zero(), |acc, v| acc.gcd(&v.0));
    let g = &cov / &first_gcd;
    let has_free_part = logs.iter().any(|(_, a)| !a.is_zero());
    if has_free_part {
        let v = g.trailing_zeros().unwrap_or(u64::from(precision));
        if v + 4 >= u64::from(precision) {
            return Err(UnitError::PrecisionExhausted { precision });
        }
    }
    let index = (&cov_sq / &cov).to_u32().expect("square index is at most 4");
    Ok(UnitSubgroupInvariants {
        p,
        trivial: false,
        q_exponent: Some(depth),
        eps_nonzero: nontrivial.iter().any(|g| g.epsilon() == 1),
        square_index: index,
    })
}

/// Convenience: parse an optionally signed decimal integer into a `BigInt`.
pub(crate) fn parse_bigint(s: &str) -> Option<BigInt> {
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (Sign::Minus, rest),
        None => (Sign::Plus, s.strip_prefix('+').unwrap_or(s)),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mag = BigUint::parse_bytes(digits.as_bytes(), 10)?;
    Some(BigInt::from_biguint(if mag.is_zero() { Sign::NoSign } else { sign }, mag))
}
