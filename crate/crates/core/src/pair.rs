//! Expression trees for cyclotomic pro-p pairs of elementary type.
//!
//! A [`PairExpr`] is built from the atomic pairs (the trivial pair, `Z^α`,
//! the order-two pair `E` and blocks of p-adic type) using free products and
//! extensions by `Z_p^m`. The ambient prime and the precision of unit
//! arithmetic are carried separately in an [`Ambient`].

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::units::{self, subgroup_invariants, PAdicUnit, UnitError, UnitSubgroupInvariants};

/// The prime `p` and the number of p-adic digits used for units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ambient {
    pub p: u64,
    pub precision: u32,
}

impl Ambient {
    pub fn new(p: u64, precision: u32) -> Result<Self, PairError> {
        if !units::is_prime(p) {
            return Err(UnitError::NotPrime(p).into());
        }
        if precision < units::MIN_PRECISION {
            return Err(UnitError::PrecisionTooSmall(precision).into());
        }
        Ok(Ambient { p, precision })
    }

    pub fn with_default_precision(p: u64) -> Result<Self, PairError> {
        Self::new(p, units::DEFAULT_PRECISION)
    }

    pub fn unit(&self, num: i64, den: i64) -> Result<PAdicUnit, UnitError> {
        PAdicUnit::from_i64(self.p, num, den, self.precision)
    }

    fn unit_big(&self, num: &BigInt, den: &BigInt) -> Result<PAdicUnit, UnitError> {
        PAdicUnit::from_rational(self.p, num, den, self.precision)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PairError {
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("invalid pair{}: {msg}", .pos.map(|p| format!(" at offset {p}")).unwrap_or_default())]
    Validation { pos: Option<usize>, msg: String },
    #[error(transparent)]
    Unit(#[from] UnitError),
}

impl PairError {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        PairError::Validation { pos: None, msg: msg.into() }
    }
}

/// Which of the four Demuškin presentations a p-adic block follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum DemuskinCase {
    I,
    II,
    III,
    IV,
}

impl fmt::Display for DemuskinCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DemuskinCase::I => "I",
            DemuskinCase::II => "II",
            DemuskinCase::III => "III",
            DemuskinCase::IV => "IV",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for DemuskinCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" => Ok(DemuskinCase::I),
            "II" => Ok(DemuskinCase::II),
            "III" => Ok(DemuskinCase::III),
            "IV" => Ok(DemuskinCase::IV),
            other => Err(format!("unknown case '{other}' (expected I, II, III or IV)")),
        }
    }
}

/// The exponent `f` of Cases II–IV; `2^∞` is read as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FExponent {
    Finite(u32),
    Infinite,
}

impl fmt::Display for FExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FExponent::Finite(k) => write!(f, "{k}"),
            FExponent::Infinite => f.write_str("inf"),
        }
    }
}

impl FExponent {
    fn two_pow(self) -> BigInt {
        match self {
            FExponent::Finite(k) => BigInt::one() << k,
            FExponent::Infinite => BigInt::zero(),
        }
    }

    fn to_json(self) -> Value {
        match self {
            FExponent::Finite(k) => json!(k),
            FExponent::Infinite => json!("inf"),
        }
    }
}

/// A pair of p-adic type, described by its Demuškin parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PAdicBlock {
    pub n: u32,
    pub q: u64,
    pub case: DemuskinCase,
    pub f: Option<FExponent>,
    /// Field level `s`; present exactly when `p = 2`.
    pub level: Option<u32>,
}

impl PAdicBlock {
    /// The level forced by the block's cup structure: `ε = 0` gives 1, and
    /// otherwise `ε ∪ ε ≠ 0` (Case II) gives 4 while Cases III/IV give 2.
    pub fn expected_level(case: DemuskinCase) -> u32 {
        match case {
            DemuskinCase::I => 1,
            DemuskinCase::II => 4,
            DemuskinCase::III | DemuskinCase::IV => 2,
        }
    }

    /// Checks the presentation constraints for the given prime.
    pub fn validate(&self, p: u64) -> Result<(), String> {
        use DemuskinCase::*;
        if self.n < 3 {
            return Err(format!("p-adic block needs rank n >= 3, got {}", self.n));
        }
        if !is_power_of(self.q, p) || self.q < p {
            return Err(format!("q = {} is not a power of p = {p}", self.q));
        }
        if p != 2 && self.case != I {
            return Err(format!("case {} requires p = 2", self.case));
        }
        match self.case {
            I => {
                if self.q == 2 {
                    return Err("case I requires q != 2".into());
                }
                if self.n % 2 != 0 {
                    return Err(format!("case I requires even rank, got n = {}", self.n));
                }
                if self.f.is_some() {
                    return Err("case I takes no parameter f".into());
                }
            }
            II | III | IV => {
                if self.q != 2 {
                    return Err(format!("case {} requires q = 2", self.case));
                }
                let want_odd = self.case == II;
                if (self.n % 2 == 1) != want_odd {
                    return Err(format!(
                        "case {} requires {} rank, got n = {}",
                        self.case,
                        if want_odd { "odd" } else { "even" },
                        self.n
                    ));
                }
                match self.f {
                    None => return Err(format!("case {} requires the parameter f", self.case)),
                    Some(FExponent::Finite(k)) if k < 2 => return Err(format!("f must be >= 2, got {k}")),
                    Some(FExponent::Infinite) if self.case == IV => {
                        return Err("case IV requires a finite f".into())
                    }
                    _ => {}
                }
            }
        }
        if p != 2 {
            if self.n < p as u32 + 1 || (self.n - 2) % (p as u32 - 1) != 0 {
                return Err(format!(
                    "for p = {p} the rank n = {} must be [F:Q_p] + 2 with [F:Q_p] a positive multiple of {}",
                    self.n,
                    p - 1
                ));
            }
            if self.level.is_some() {
                return Err("the level s is only defined for p = 2".into());
            }
        } else {
            let want = Self::expected_level(self.case);
            match self.level {
                Some(s) if s == want => {}
                Some(s) => {
                    return Err(format!(
                        "level s = {s} is inconsistent with case {} (its ε-character forces s = {want})",
                        self.case
                    ))
                }
                None => return Err("p = 2 blocks carry a level s".into()),
            }
        }
        Ok(())
    }

    /// Generators of the image of the block's character.
    pub fn theta_generators(&self, amb: &Ambient) -> Result<Vec<PAdicUnit>, UnitError> {
        let one = BigInt::one();
        let gens = match self.case {
            DemuskinCase::I => vec![amb.unit_big(&one, &(&one - BigInt::from(self.q)))?],
            DemuskinCase::II | DemuskinCase::IV => {
                let f = self.f.expect("validated block carries f").two_pow();
                vec![amb.unit(-1, 1)?, amb.unit_big(&one, &(&one - f))?]
            }
            DemuskinCase::III => {
                let f = self.f.expect("validated block carries f").two_pow();
                vec![amb.unit_big(&-one.clone(), &(&one + f))?]
            }
        };
        Ok(gens.into_iter().filter(|g| !g.is_one()).collect())
    }

    pub fn render(&self) -> String {
        let mut s = format!("padic(n={},q={},case={}", self.n, self.q, self.case);
        if let Some(f) = self.f {
            s.push_str(&format!(",f={f}"));
        }
        if let Some(l) = self.level {
            s.push_str(&format!(",s={l}"));
        }
        s.push(')');
        s
    }
}

fn is_power_of(mut x: u64, p: u64) -> bool {
    if x < 1 {
        return false;
    }
    while x % p == 0 {
        x /= p;
    }
    x == 1
}

/// An elementary-type cyclotomic pro-p pair.
///
/// The derived ordering is the canonical factor order used by normalization:
/// constructor first, then numeric parameters, then children.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PairExpr {
    Trivial,
    Z(PAdicUnit),
    E,
    PAdic(PAdicBlock),
    FreeProd(Vec<PairExpr>),
    Ext(u32, Box<PairExpr>),
}

impl PairExpr {
    pub fn ext(m: u32, base: PairExpr) -> Self {
        PairExpr::Ext(m, Box::new(base))
    }

    /// The `Z_2`-unramified 2-adic block of `Q_2`: `x1^2 x2^4 [x2,x3] = 1`.
    pub fn dyadic_block() -> Self {
        PairExpr::PAdic(PAdicBlock {
            n: 3,
            q: 2,
            case: DemuskinCase::II,
            f: Some(FExponent::Finite(2)),
            level: Some(4),
        })
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, PairExpr::Trivial)
    }

    /// Checks every block against the ambient prime and precision.
    pub fn validate(&self, amb: &Ambient) -> Result<(), PairError> {
        match self {
            PairExpr::Trivial => Ok(()),
            PairExpr::Z(u) => {
                if u.p() != amb.p || u.precision() != amb.precision {
                    return Err(PairError::validation(format!(
                        "unit {u} lives in p={}, K={} but the ambient is p={}, K={}",
                        u.p(),
                        u.precision(),
                        amb.p,
                        amb.precision
                    )));
                }
                Ok(())
            }
            PairExpr::E => {
                if amb.p != 2 {
                    return Err(PairError::validation(format!("E requires p = 2, ambient p = {}", amb.p)));
                }
                Ok(())
            }
            PairExpr::PAdic(b) => b.validate(amb.p).map_err(PairError::validation),
            PairExpr::FreeProd(fs) => {
                if fs.is_empty() {
                    return Err(PairError::validation("empty free product"));
                }
                fs.iter().try_for_each(|f| f.validate(amb))
            }
            PairExpr::Ext(m, base) => {
                if *m == 0 {
                    return Err(PairError::validation("extension rank m must be >= 1"));
                }
                base.validate(amb)
            }
        }
    }

    /// `dim H^1`: the minimal number of generators.
    pub fn rank(&self) -> u32 {
        match self {
            PairExpr::Trivial => 0,
            PairExpr::Z(_) | PairExpr::E => 1,
            PairExpr::PAdic(b) => b.n,
            PairExpr::FreeProd(fs) => fs.iter().map(PairExpr::rank).sum(),
            PairExpr::Ext(m, base) => m + base.rank(),
        }
    }

    /// Generators of the image of the character `θ`.
    pub fn theta_generators(&self, amb: &Ambient) -> Result<Vec<PAdicUnit>, UnitError> {
        match self {
            PairExpr::Trivial => Ok(vec![]),
            PairExpr::Z(a) => Ok(if a.is_one() { vec![] } else { vec![a.clone()] }),
            PairExpr::E => Ok(vec![amb.unit(-1, 1)?]),
            PairExpr::PAdic(b) => b.theta_generators(amb),
            PairExpr::FreeProd(fs) => {
                let mut out = Vec::new();
                for f in fs {
                    out.extend(f.theta_generators(amb)?);
                }
                Ok(out)
            }
            PairExpr::Ext(_, base) => base.theta_generators(amb),
        }
    }

    /// Invariants of `Img(θ)`.
    pub fn theta_image(&self, amb: &Ambient) -> Result<UnitSubgroupInvariants, UnitError> {
        subgroup_invariants(amb.p, &self.theta_generators(amb)?, amb.precision)
    }

    /// The `ε`-character of the pair is nonzero.
    pub fn eps_nonzero(&self, amb: &Ambient) -> Result<bool, UnitError> {
        Ok(amb.p == 2 && self.theta_generators(amb)?.iter().any(|g| g.epsilon() == 1))
    }

    /// Cyclic factors of `G/[G,G]`: 0 for `Z_p`, `q` for `Z_p/q`.
    pub fn abelianization(&self, amb: &Ambient) -> Result<Vec<BigUint>, UnitError> {
        match self {
            PairExpr::Trivial => Ok(vec![]),
            PairExpr::Z(_) => Ok(vec![BigUint::zero()]),
            PairExpr::E => Ok(vec![BigUint::from(2u32)]),
            PairExpr::PAdic(b) => {
                let mut v = vec![BigUint::zero(); b.n as usize - 1];
                v.push(BigUint::from(b.q));
                Ok(v)
            }
            PairExpr::FreeProd(fs) => {
                let mut v = Vec::new();
                for f in fs {
                    v.extend(f.abelianization(amb)?);
                }
                Ok(v)
            }
            PairExpr::Ext(m, base) => {
                // A/[A,G] = A/(θ(g)-1)A, and (θ(g)-1) generates qZ_p.
                let q = base.theta_image(amb)?.q();
                let mut v = vec![q; *m as usize];
                v.extend(base.abelianization(amb)?);
                Ok(v)
            }
        }
    }

    /// Canonical form under the structural isomorphisms: flattening and
    /// sorting free products, dropping trivial factors, merging nested
    /// extensions, `Z_p ⋊ (1,1) = Z^1` and `Z_2 ⋊ E = E * E`.
    pub fn normalize(&self, amb: &Ambient) -> Result<PairExpr, UnitError> {
        Ok(match self {
            PairExpr::Trivial | PairExpr::Z(_) | PairExpr::E | PairExpr::PAdic(_) => self.clone(),
            PairExpr::FreeProd(fs) => {
                let mut flat = Vec::new();
                for f in fs {
                    match f.normalize(amb)? {
                        PairExpr::Trivial => {}
                        PairExpr::FreeProd(inner) => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                free_product_of(flat)
            }
            PairExpr::Ext(m, base) => normalize_ext(*m, base.normalize(amb)?, amb)?,
        })
    }

    pub fn render(&self) -> String {
        match self {
            PairExpr::Trivial => "triv".into(),
            PairExpr::Z(u) => format!("Z({})", u.render()),
            PairExpr::E => "E".into(),
            PairExpr::PAdic(b) => b.render(),
            PairExpr::FreeProd(fs) => fs
                .iter()
                .map(|f| match f {
                    PairExpr::FreeProd(_) => format!("({})", f.render()),
                    _ => f.render(),
                })
                .collect::<Vec<_>>()
                .join(" * "),
            PairExpr::Ext(m, base) => format!("ext({m}, {})", base.render()),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            PairExpr::Trivial => json!({"type": "trivial"}),
            PairExpr::Z(u) => json!({"type": "z", "alpha": u}),
            PairExpr::E => json!({"type": "e"}),
            PairExpr::PAdic(b) => {
                let mut v = json!({"type": "padic", "n": b.n, "q": b.q, "case": b.case});
                if let Some(f) = b.f {
                    v["f"] = f.to_json();
                }
                if let Some(s) = b.level {
                    v["s"] = json!(s);
                }
                v
            }
            PairExpr::FreeProd(fs) => {
                json!({"type": "freeprod", "factors": fs.iter().map(PairExpr::to_json).collect::<Vec<_>>()})
            }
            PairExpr::Ext(m, base) => json!({"type": "ext", "m": m, "base": base.to_json()}),
        }
    }

    /// Number of nodes, for test generators and diagnostics.
    pub fn size(&self) -> usize {
        match self {
            PairExpr::FreeProd(fs) => 1 + fs.iter().map(PairExpr::size).sum::<usize>(),
            PairExpr::Ext(_, b) => 1 + b.size(),
            _ => 1,
        }
    }
}

impl fmt::Display for PairExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn free_product_of(mut factors: Vec<PairExpr>) -> PairExpr {
    factors.sort();
    match factors.len() {
        0 => PairExpr::Trivial,
        1 => factors.pop().expect("one factor"),
        _ => PairExpr::FreeProd(factors),
    }
}

/// Normal form of `Ext(m, base)` for an already normalized `base`.
fn normalize_ext(m: u32, base: PairExpr, amb: &Ambient) -> Result<PairExpr, UnitError> {
    if m == 0 {
        return Ok(base);
    }
    match base {
        PairExpr::Ext(inner, b) => normalize_ext(m + inner, *b, amb),
        // Z_p^m ⋊ (1,1) = Z_p^(m-1) ⋊ Z^1.
        PairExpr::Trivial => {
            let z1 = PairExpr::Z(amb.unit(1, 1)?);
            Ok(if m == 1 { z1 } else { PairExpr::Ext(m - 1, Box::new(z1)) })
        }
        PairExpr::E => {
            let ee = PairExpr::FreeProd(vec![PairExpr::E, PairExpr::E]);
            normalize_ext(m - 1, ee, amb)
        }
        other => Ok(PairExpr::Ext(m, Box::new(other))),
    }
}

/// Divisors as JSON numbers, or decimal strings when they exceed `u64`.
pub fn divisors_json(divs: &[BigUint]) -> Value {
    Value::Array(
        divs.iter()
            .map(|d| match d.to_u64() {
                Some(x) => json!(x),
                None => json!(d.to_string()),
            })
            .collect(),
    )
}
