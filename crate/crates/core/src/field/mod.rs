//! Concrete fields with computable p-th-power class groups and symbols.
//!
//! Every model fixes a basis of `F^×/(F^×)^p` ([`FieldModel::class_basis`]),
//! maps elements to coordinates in that basis ([`FieldModel::class_of`]) and
//! evaluates the degree-2 symbol `{a, b}` mod p as a vector
//! ([`FieldModel::symbol`]). Laurent series fields `K((t))` are modeled with
//! truncated series and explicit precision; the tame symbol and the class of
//! an element only depend on leading coefficients.

mod expr;
mod gf;
mod search;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::fp;
use crate::pair::{Ambient, PairExpr};
use crate::rigidity::AugBilinearMap;
use crate::units::{is_prime, UnitError};

pub use expr::parse_element;
pub use gf::{prime_power, Gf, MAX_Q};
pub use search::{
    check_pairing_match, o_membership, total_rigidity, trichotomic_search, HSpec, OTarget, OVerdict, OVerdictKind,
    TotalRigidity, Trichotomic,
};

/// Default number of series terms kept after an inversion.
pub const DEFAULT_SERIES_PRECISION: u32 = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("series precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is zero but a nonzero element is required")]
    ZeroElement(String),
    #[error("cannot parse element '{text}': {msg}")]
    Parse { text: String, msg: String },
    #[error("{0}")]
    NotApplicable(String),
    #[error(transparent)]
    Unit(#[from] UnitError),
}

/// Exact value of an element of some model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldElement {
    Gf(u32),
    Rational(BigRational),
    Series(Series),
}

/// `Σ coeffs[i] t^(val + i) + O(t^prec)`; `prec = None` means exact.
///
/// A series with no coefficients is exact zero when `prec` is `None` and an
/// unknown element of `t^prec K[[t]]` otherwise. The first coefficient is
/// never exactly zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    pub val: i64,
    pub coeffs: Vec<FieldElement>,
    pub prec: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    FiniteField(Gf),
    /// `Q_ℓ`, with a unit whose residue generates `F_ℓ^×`.
    LocalRational { ell: u64, generator: u64 },
    DyadicRational,
    RealField,
    ComplexField,
    Laurent { base: Box<FieldModel>, variable: String, precision: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldModel {
    p: u64,
    kind: ModelKind,
}

/// Whether a value is known to be zero, known nonzero, or undetermined at
/// the available precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ZeroTest {
    Zero,
    NonZero,
    Unknown,
}

/// On-disk model description: `{"kind": …, "params": {…}, "precision": T}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: String,
    #[serde(default)]
    pub params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `x = ℓ^v · u` with `u` an ℓ-adic unit.
fn split_valuation(x: &BigRational, ell: u64) -> (i64, BigInt, BigInt) {
    let ell = BigInt::from(ell);
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    let mut v = 0i64;
    while (&n % &ell).is_zero() {
        n /= &ell;
        v += 1;
    }
    while (&d % &ell).is_zero() {
        d /= &ell;
        v -= 1;
    }
    (v, n, d)
}

/// `n/d mod m` for `d` invertible mod `m`.
fn residue_mod(n: &BigInt, d: &BigInt, m: u64) -> u64 {
    let mb = BigInt::from(m);
    let nr = n.mod_floor(&mb).to_u64().expect("small residue");
    let dr = d.mod_floor(&mb).to_u64().expect("small residue");
    // m need not be prime (residues mod 8), so invert via the extended gcd
    let ext = (dr as i64).extended_gcd(&(m as i64));
    debug_assert_eq!(ext.gcd, 1);
    nr * ext.x.rem_euclid(m as i64) as u64 % m
}

fn primitive_root(ell: u64) -> u64 {
    let n = ell - 1;
    let mut factors = Vec::new();
    let mut r = n;
    let mut f = 2;
    while f * f <= r {
        if r % f == 0 {
            factors.push(f);
            while r % f == 0 {
                r /= f;
            }
        }
        f += 1;
    }
    if r > 1 {
        factors.push(r);
    }
    (2..ell).find(|&g| factors.iter().all(|&f| fp::pow(g, n / f, ell) != 1)).unwrap_or(1)
}

/// Discrete log mod `ell` (small `ell` only).
fn dlog_mod(x: u64, g: u64, ell: u64) -> u64 {
    let mut cur = 1;
    for k in 0..ell - 1 {
        if cur == x {
            return k;
        }
        cur = cur * g % ell;
    }
    panic!("{x} is not a unit mod {ell}");
}

impl FieldModel {
    pub fn finite_field(p: u64, q: u32) -> Result<Self, FieldError> {
        check_prime(p)?;
        let gf = Gf::new(q).ok_or_else(|| {
            FieldError::InvalidModel(format!("q = {q} is not a prime power up to {MAX_Q}"))
        })?;
        if (q as u64 - 1) % p != 0 {
            return Err(FieldError::InvalidModel(format!("F_{q} contains no p-th root of unity for p = {p}")));
        }
        Ok(FieldModel { p, kind: ModelKind::FiniteField(gf) })
    }

    pub fn local_rational(p: u64, ell: u64) -> Result<Self, FieldError> {
        check_prime(p)?;
        if !is_prime(ell) || ell == p || ell > 1_000_000 {
            return Err(FieldError::InvalidModel(format!("ℓ = {ell} must be a prime different from p (and < 10^6)")));
        }
        if (ell - 1) % p != 0 {
            return Err(FieldError::InvalidModel(format!("Q_{ell} contains no p-th root of unity for p = {p}")));
        }
        Ok(FieldModel { p, kind: ModelKind::LocalRational { ell, generator: primitive_root(ell) } })
    }

    pub fn dyadic(p: u64) -> Result<Self, FieldError> {
        if p != 2 {
            return Err(FieldError::InvalidModel("Q_2 is only modeled for p = 2".into()));
        }
        Ok(FieldModel { p, kind: ModelKind::DyadicRational })
    }

    pub fn real(p: u64) -> Result<Self, FieldError> {
        if p != 2 {
            return Err(FieldError::InvalidModel("R contains μ_p only for p = 2".into()));
        }
        Ok(FieldModel { p, kind: ModelKind::RealField })
    }

    pub fn complex(p: u64) -> Result<Self, FieldError> {
        check_prime(p)?;
        Ok(FieldModel { p, kind: ModelKind::ComplexField })
    }

    pub fn laurent(base: FieldModel, variable: &str, precision: u32) -> Result<Self, FieldError> {
        if variable.is_empty() || !variable.chars().all(|c| c.is_ascii_alphabetic()) || variable == "g" || variable == "inf" {
            return Err(FieldError::InvalidModel(format!("bad series variable name '{variable}'")));
        }
        if base.variables().contains(&variable.to_string()) {
            return Err(FieldError::InvalidModel(format!("variable '{variable}' is already used in the base")));
        }
        if precision < 2 {
            return Err(FieldError::InvalidModel("series precision must be at least 2".into()));
        }
        // Tame: the residue field of t-adic valuation is the base, whose
        // characteristic is never p for the supported bases.
        Ok(FieldModel {
            p: base.p,
            kind: ModelKind::Laurent { base: Box::new(base), variable: variable.to_string(), precision },
        })
    }

    /// Reads a model description; `p` is the ambient prime.
    pub fn from_spec(spec: &ModelSpec, p: u64) -> Result<Self, FieldError> {
        let param_u64 = |key: &str| -> Result<u64, FieldError> {
            spec.params
                .get(key)
                .and_then(Value::as_u64)
                .ok_or_else(|| FieldError::InvalidModel(format!("model '{}' needs integer parameter '{key}'", spec.kind)))
        };
        match spec.kind.as_str() {
            "FiniteField" => {
                let q = param_u64("q")?;
                let q = u32::try_from(q).map_err(|_| FieldError::InvalidModel(format!("q = {q} too large")))?;
                Self::finite_field(p, q)
            }
            "LocalRational" => Self::local_rational(p, param_u64("ell")?),
            "DyadicRational" => Self::dyadic(p),
            "RealField" => Self::real(p),
            "ComplexField" => Self::complex(p),
            "Laurent" => {
                let base = spec
                    .params
                    .get("base")
                    .ok_or_else(|| FieldError::InvalidModel("Laurent model needs params.base".into()))?;
                let base: ModelSpec = serde_json::from_value(base.clone())
                    .map_err(|e| FieldError::InvalidModel(format!("bad base model: {e}")))?;
                let var = spec.params.get("variable").and_then(Value::as_str).unwrap_or("t");
                Self::laurent(Self::from_spec(&base, p)?, var, spec.precision.unwrap_or(DEFAULT_SERIES_PRECISION))
            }
            other => Err(FieldError::InvalidModel(format!(
                "unknown model kind '{other}' (expected FiniteField, LocalRational, DyadicRational, RealField, ComplexField or Laurent)"
            ))),
        }
    }

    pub fn from_json(text: &str, p: u64) -> Result<Self, FieldError> {
        let spec: ModelSpec =
            serde_json::from_str(text).map_err(|e| FieldError::InvalidModel(format!("model JSON: {e}")))?;
        Self::from_spec(&spec, p)
    }

    pub fn to_spec(&self) -> ModelSpec {
        match &self.kind {
            ModelKind::FiniteField(gf) => {
                ModelSpec { kind: "FiniteField".into(), params: json!({"q": gf.q()}), precision: None }
            }
            ModelKind::LocalRational { ell, .. } => {
                ModelSpec { kind: "LocalRational".into(), params: json!({"ell": ell}), precision: None }
            }
            ModelKind::DyadicRational => ModelSpec { kind: "DyadicRational".into(), params: json!({}), precision: None },
            ModelKind::RealField => ModelSpec { kind: "RealField".into(), params: json!({}), precision: None },
            ModelKind::ComplexField => ModelSpec { kind: "ComplexField".into(), params: json!({}), precision: None },
            ModelKind::Laurent { base, variable, precision } => ModelSpec {
                kind: "Laurent".into(),
                params: json!({"base": base.to_spec(), "variable": variable}),
                precision: Some(*precision),
            },
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    /// Series variables from the outermost layer inwards.
    pub fn variables(&self) -> Vec<String> {
        match &self.kind {
            ModelKind::Laurent { base, variable, .. } => {
                let mut v = vec![variable.clone()];
                v.extend(base.variables());
                v
            }
            _ => vec![],
        }
    }

    /// The innermost non-series model.
    pub fn ground(&self) -> &FieldModel {
        match &self.kind {
            ModelKind::Laurent { base, .. } => base.ground(),
            _ => self,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ModelKind::FiniteField(gf) => format!("F_{}", gf.q()),
            ModelKind::LocalRational { ell, .. } => format!("Q_{ell}"),
            ModelKind::DyadicRational => "Q_2".into(),
            ModelKind::RealField => "R".into(),
            ModelKind::ComplexField => "C".into(),
            ModelKind::Laurent { base, variable, .. } => format!("{}(({variable}))", base.name()),
        }
    }

    /// Finite fields are enumerated exhaustively by the searches.
    pub fn is_finite(&self) -> bool {
        matches!(self.kind, ModelKind::FiniteField(_))
    }

    // ---- element construction ----

    pub fn zero(&self) -> FieldElement {
        match &self.kind {
            ModelKind::FiniteField(_) => FieldElement::Gf(0),
            ModelKind::Laurent { .. } => FieldElement::Series(Series { val: 0, coeffs: vec![], prec: None }),
            _ => FieldElement::Rational(BigRational::zero()),
        }
    }

    pub fn one(&self) -> FieldElement {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> FieldElement {
        self.from_bigint(&BigInt::from(n))
    }

    pub fn from_bigint(&self, n: &BigInt) -> FieldElement {
        match &self.kind {
            ModelKind::FiniteField(gf) => {
                let c = BigInt::from(gf.characteristic());
                FieldElement::Gf(gf.from_int(n.mod_floor(&c).to_i64().expect("small residue")))
            }
            ModelKind::Laurent { base, .. } => self.constant(base.from_bigint(n)),
            _ => FieldElement::Rational(BigRational::from_integer(n.clone())),
        }
    }

    pub fn from_rational(&self, n: &BigInt, d: &BigInt) -> Result<FieldElement, FieldError> {
        let num = self.from_bigint(n);
        let den = self.from_bigint(d);
        self.div(&num, &den)
    }

    /// Embeds an element of the base field as a constant series.
    fn constant(&self, c: FieldElement) -> FieldElement {
        let ModelKind::Laurent { base, .. } = &self.kind else {
            return c;
        };
        match base.zero_test(&c) {
            ZeroTest::Zero => self.zero(),
            _ => FieldElement::Series(Series { val: 0, coeffs: vec![c], prec: None }),
        }
    }

    /// The series variable of this layer, or of a base layer embedded as a
    /// constant.
    pub fn variable(&self, name: &str) -> Option<FieldElement> {
        match &self.kind {
            ModelKind::Laurent { base, variable, .. } => {
                if variable == name {
                    Some(FieldElement::Series(Series { val: 1, coeffs: vec![base.one()], prec: None }))
                } else {
                    base.variable(name).map(|c| self.constant(c))
                }
            }
            _ => None,
        }
    }

    /// The primitive element `g` of a finite ground field.
    pub fn generator_element(&self) -> Option<FieldElement> {
        match &self.kind {
            ModelKind::FiniteField(gf) => Some(FieldElement::Gf(gf.generator())),
            ModelKind::Laurent { base, .. } => base.generator_element().map(|c| self.constant(c)),
            _ => None,
        }
    }

    // ---- arithmetic ----

    fn zero_test(&self, a: &FieldElement) -> ZeroTest {
        match a {
            FieldElement::Gf(x) => {
                if *x == 0 {
                    ZeroTest::Zero
                } else {
                    ZeroTest::NonZero
                }
            }
            FieldElement::Rational(r) => {
                if r.is_zero() {
                    ZeroTest::Zero
                } else {
                    ZeroTest::NonZero
                }
            }
            FieldElement::Series(s) => {
                if !s.coeffs.is_empty() {
                    ZeroTest::NonZero
                } else if s.prec.is_none() {
                    ZeroTest::Zero
                } else {
                    ZeroTest::Unknown
                }
            }
        }
    }

    /// Exact zero.
    pub fn is_zero(&self, a: &FieldElement) -> bool {
        self.zero_test(a) == ZeroTest::Zero
    }

    fn require_nonzero(&self, a: &FieldElement) -> Result<(), FieldError> {
        match self.zero_test(a) {
            ZeroTest::NonZero => Ok(()),
            ZeroTest::Zero => Err(FieldError::ZeroElement(self.render(a))),
            ZeroTest::Unknown => Err(FieldError::PrecisionExhausted(format!(
                "{} has no known nonzero term",
                self.render(a)
            ))),
        }
    }

    fn base_and_window(&self) -> (&FieldModel, u32) {
        match &self.kind {
            ModelKind::Laurent { base, precision, .. } => (base, *precision),
            _ => unreachable!("series arithmetic outside a Laurent model"),
        }
    }

    /// Drops terms beyond the precision and strips exactly-zero leading
    /// coefficients; an undetermined leading coefficient caps the precision.
    fn make_series(&self, mut val: i64, coeffs: Vec<FieldElement>, prec: Option<i64>) -> FieldElement {
        let (base, _) = self.base_and_window();
        let mut prec = prec;
        let mut out = Vec::with_capacity(coeffs.len());
        let mut leading = true;
        for (i, c) in coeffs.into_iter().enumerate() {
            let pos = val + i as i64;
            if prec.is_some_and(|pr| pos >= pr) {
                break;
            }
            if leading {
                match base.zero_test(&c) {
                    ZeroTest::Zero => continue,
                    ZeroTest::Unknown => {
                        prec = Some(prec.map_or(pos, |pr| pr.min(pos)));
                        break;
                    }
                    ZeroTest::NonZero => {
                        leading = false;
                        val = pos;
                    }
                }
            }
            out.push(c);
        }
        if prec.is_none() {
            while out.last().is_some_and(|c| base.is_zero(c)) {
                out.pop();
            }
        }
        if out.is_empty() {
            val = prec.unwrap_or(0);
        }
        FieldElement::Series(Series { val, coeffs: out, prec })
    }

    pub fn add(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (&self.kind, a, b) {
            (ModelKind::FiniteField(gf), FieldElement::Gf(x), FieldElement::Gf(y)) => FieldElement::Gf(gf.add(*x, *y)),
            (ModelKind::Laurent { .. }, FieldElement::Series(s), FieldElement::Series(t)) => {
                let (base, _) = self.base_and_window();
                let prec = match (s.prec, t.prec) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                };
                let lo = if s.coeffs.is_empty() { t.val } else if t.coeffs.is_empty() { s.val } else { s.val.min(t.val) };
                let hi = (s.val + s.coeffs.len() as i64).max(t.val + t.coeffs.len() as i64);
                let hi = prec.map_or(hi, |pr| hi.min(pr));
                fn coeff(x: &Series, pos: i64) -> Option<&FieldElement> {
                    let i = pos - x.val;
                    (i >= 0).then(|| x.coeffs.get(i as usize)).flatten()
                }
                let coeffs = (lo..hi.max(lo))
                    .map(|pos| match (coeff(s, pos), coeff(t, pos)) {
                        (Some(x), Some(y)) => base.add(x, y),
                        (Some(x), None) => x.clone(),
                        (None, Some(y)) => y.clone(),
                        (None, None) => base.zero(),
                    })
                    .collect();
                self.make_series(lo, coeffs, prec)
            }
            (_, FieldElement::Rational(x), FieldElement::Rational(y)) => FieldElement::Rational(x + y),
            _ => panic!("mismatched element types in {}", self.name()),
        }
    }

    pub fn neg(&self, a: &FieldElement) -> FieldElement {
        match (&self.kind, a) {
            (ModelKind::FiniteField(gf), FieldElement::Gf(x)) => FieldElement::Gf(gf.neg(*x)),
            (ModelKind::Laurent { base, .. }, FieldElement::Series(s)) => FieldElement::Series(Series {
                val: s.val,
                coeffs: s.coeffs.iter().map(|c| base.neg(c)).collect(),
                prec: s.prec,
            }),
            (_, FieldElement::Rational(x)) => FieldElement::Rational(-x),
            _ => panic!("mismatched element types in {}", self.name()),
        }
    }

    pub fn sub(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &FieldElement, b: &FieldElement) -> FieldElement {
        match (&self.kind, a, b) {
            (ModelKind::FiniteField(gf), FieldElement::Gf(x), FieldElement::Gf(y)) => FieldElement::Gf(gf.mul(*x, *y)),
            (ModelKind::Laurent { .. }, FieldElement::Series(s), FieldElement::Series(t)) => {
                let (base, _) = self.base_and_window();
                let val = s.val + t.val;
                let prec = match (s.prec, t.prec) {
                    (Some(x), Some(y)) => Some((x + t.val).min(y + s.val)),
                    (Some(x), None) => Some(x + t.val),
                    (None, Some(y)) => Some(y + s.val),
                    (None, None) => None,
                };
                if s.coeffs.is_empty() || t.coeffs.is_empty() {
                    let exact_zero = (s.coeffs.is_empty() && s.prec.is_none()) || (t.coeffs.is_empty() && t.prec.is_none());
                    return if exact_zero { self.zero() } else { self.make_series(val, vec![], prec) };
                }
                let mut len = s.coeffs.len() + t.coeffs.len() - 1;
                if let Some(pr) = prec {
                    len = len.min((pr - val).max(0) as usize);
                }
                let coeffs = (0..len)
                    .map(|k| {
                        let mut acc = base.zero();
                        for i in k.saturating_sub(t.coeffs.len() - 1)..=k.min(s.coeffs.len() - 1) {
                            acc = base.add(&acc, &base.mul(&s.coeffs[i], &t.coeffs[k - i]));
                        }
                        acc
                    })
                    .collect();
                self.make_series(val, coeffs, prec)
            }
            (_, FieldElement::Rational(x), FieldElement::Rational(y)) => FieldElement::Rational(x * y),
            _ => panic!("mismatched element types in {}", self.name()),
        }
    }

    pub fn inv(&self, a: &FieldElement) -> Result<FieldElement, FieldError> {
        match self.zero_test(a) {
            ZeroTest::Zero => return Err(FieldError::DivisionByZero),
            ZeroTest::Unknown => {
                return Err(FieldError::PrecisionExhausted(format!("cannot invert {}", self.render(a))))
            }
            ZeroTest::NonZero => {}
        }
        match (&self.kind, a) {
            (ModelKind::FiniteField(gf), FieldElement::Gf(x)) => Ok(FieldElement::Gf(gf.inv(*x))),
            (ModelKind::Laurent { .. }, FieldElement::Series(s)) => {
                let (base, window) = self.base_and_window();
                let n = match s.prec {
                    Some(pr) => (window as i64).min(pr - s.val),
                    None if s.coeffs.len() == 1 => 1,
                    None => window as i64,
                } as usize;
                let c0inv = base.inv(&s.coeffs[0])?;
                let mut b: Vec<FieldElement> = vec![c0inv.clone()];
                for k in 1..n {
                    let mut acc = base.zero();
                    for i in 1..=k.min(s.coeffs.len() - 1) {
                        acc = base.add(&acc, &base.mul(&s.coeffs[i], &b[k - i]));
                    }
                    b.push(base.neg(&base.mul(&c0inv, &acc)));
                }
                let exact = s.prec.is_none() && s.coeffs.len() == 1 && b.len() == 1 && base.is_exact(&b[0]);
                let prec = if exact { None } else { Some(-s.val + n as i64) };
                Ok(self.make_series(-s.val, b, prec))
            }
            (_, FieldElement::Rational(x)) => Ok(FieldElement::Rational(x.recip())),
            _ => panic!("mismatched element types in {}", self.name()),
        }
    }

    fn is_exact(&self, a: &FieldElement) -> bool {
        match a {
            FieldElement::Series(s) => {
                let (base, _) = self.base_and_window();
                s.prec.is_none() && s.coeffs.iter().all(|c| base.is_exact(c))
            }
            _ => true,
        }
    }

    pub fn div(&self, a: &FieldElement, b: &FieldElement) -> Result<FieldElement, FieldError> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &FieldElement, e: i64) -> Result<FieldElement, FieldError> {
        let mut base = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        Ok(acc)
    }

    // ---- class group and symbols ----

    /// Labels of the chosen basis of `F^×/(F^×)^p`.
    pub fn class_labels(&self) -> Vec<String> {
        match &self.kind {
            ModelKind::FiniteField(gf) => vec![gf.render(gf.generator())],
            ModelKind::LocalRational { ell, generator } => vec![generator.to_string(), ell.to_string()],
            ModelKind::DyadicRational => vec!["-1".into(), "2".into(), "5".into()],
            ModelKind::RealField => vec!["-1".into()],
            ModelKind::ComplexField => vec![],
            ModelKind::Laurent { base, variable, .. } => {
                let mut v = base.class_labels();
                v.push(variable.clone());
                v
            }
        }
    }

    /// Representatives of the basis of `F^×/(F^×)^p`.
    pub fn class_basis(&self) -> Vec<FieldElement> {
        match &self.kind {
            ModelKind::FiniteField(gf) => vec![FieldElement::Gf(gf.generator())],
            ModelKind::LocalRational { ell, generator } => {
                vec![FieldElement::Rational(rat(*generator as i64)), FieldElement::Rational(rat(*ell as i64))]
            }
            ModelKind::DyadicRational => [-1, 2, 5].iter().map(|&n| FieldElement::Rational(rat(n))).collect(),
            ModelKind::RealField => vec![FieldElement::Rational(rat(-1))],
            ModelKind::ComplexField => vec![],
            ModelKind::Laurent { base, variable, .. } => {
                let mut v: Vec<FieldElement> = base.class_basis().into_iter().map(|c| self.constant(c)).collect();
                v.push(self.variable(variable).expect("own variable"));
                v
            }
        }
    }

    pub fn class_dim(&self) -> usize {
        match &self.kind {
            ModelKind::FiniteField(_) | ModelKind::RealField => 1,
            ModelKind::LocalRational { .. } => 2,
            ModelKind::DyadicRational => 3,
            ModelKind::ComplexField => 0,
            ModelKind::Laurent { base, .. } => base.class_dim() + 1,
        }
    }

    /// Dimension of the symbol target.
    pub fn symbol_dim(&self) -> usize {
        match &self.kind {
            ModelKind::FiniteField(_) | ModelKind::ComplexField => 0,
            ModelKind::LocalRational { .. } | ModelKind::DyadicRational | ModelKind::RealField => 1,
            ModelKind::Laurent { base, .. } => base.symbol_dim() + base.class_dim(),
        }
    }

    /// Coordinates of `a (F^×)^p` in [`class_basis`](Self::class_basis).
    pub fn class_of(&self, a: &FieldElement) -> Result<Vec<u64>, FieldError> {
        self.require_nonzero(a)?;
        let p = self.p;
        match (&self.kind, a) {
            (ModelKind::FiniteField(gf), FieldElement::Gf(x)) => Ok(vec![gf.log(*x) as u64 % p]),
            (ModelKind::LocalRational { ell, generator }, FieldElement::Rational(r)) => {
                let (v, n, d) = split_valuation(r, *ell);
                let u = residue_mod(&n, &d, *ell);
                Ok(vec![dlog_mod(u, *generator, *ell) % p, v.rem_euclid(p as i64) as u64])
            }
            (ModelKind::DyadicRational, FieldElement::Rational(r)) => {
                let (v, n, d) = split_valuation(r, 2);
                let u = residue_mod(&n, &d, 8);
                let (minus, five) = match u {
                    1 => (0, 0),
                    3 => (1, 1),
                    5 => (0, 1),
                    7 => (1, 0),
                    _ => unreachable!("odd residue mod 8"),
                };
                Ok(vec![minus, v.rem_euclid(2) as u64, five])
            }
            (ModelKind::RealField, FieldElement::Rational(r)) => Ok(vec![r.is_negative() as u64]),
            (ModelKind::ComplexField, _) => Ok(vec![]),
            (ModelKind::Laurent { base, .. }, FieldElement::Series(s)) => {
                // Tame Hensel: 1 + t K[[t]] consists of p-th powers.
                let mut v = base.class_of(&s.coeffs[0])?;
                v.push(s.val.rem_euclid(p as i64) as u64);
                Ok(v)
            }
            _ => panic!("mismatched element types in {}", self.name()),
        }
    }

    /// `a` is a p-th power.
    pub fn is_pth_power(&self, a: &FieldElement) -> Result<bool, FieldError> {
        Ok(self.class_of(a)?.iter().all(|&c| c == 0))
    }

    /// The symbol `{a, b}` in `K_2(F)/p`, as coordinates in the target.
    pub fn symbol(&self, a: &FieldElement, b: &FieldElement) -> Result<Vec<u64>, FieldError> {
        self.require_nonzero(a)?;
        self.require_nonzero(b)?;
        let p = self.p;
        match (&self.kind, a, b) {
            (ModelKind::FiniteField(_), _, _) | (ModelKind::ComplexField, _, _) => Ok(vec![]),
            (ModelKind::RealField, FieldElement::Rational(x), FieldElement::Rational(y)) => {
                Ok(vec![(x.is_negative() && y.is_negative()) as u64])
            }
            (ModelKind::DyadicRational, FieldElement::Rational(x), FieldElement::Rational(y)) => {
                Ok(vec![hilbert_symbol_2(x, y)])
            }
            (ModelKind::LocalRational { ell, generator }, FieldElement::Rational(x), FieldElement::Rational(y)) => {
                let (alpha, nx, dx) = split_valuation(x, *ell);
                let (beta, ny, dy) = split_valuation(y, *ell);
                let ux = residue_mod(&nx, &dx, *ell);
                let uy = residue_mod(&ny, &dy, *ell);
                let e = *ell;
                let sign = if (alpha * beta).rem_euclid(2) == 1 { e - 1 } else { 1 };
                let t = sign * pow_signed(ux, beta, e) % e * pow_signed(uy, -alpha, e) % e;
                Ok(vec![dlog_mod(t, *generator, e) % p])
            }
            (ModelKind::Laurent { base, .. }, FieldElement::Series(s), FieldElement::Series(t)) => {
                let (alpha, beta) = (s.val, t.val);
                let (u, w) = (&s.coeffs[0], &t.coeffs[0]);
                let mut out = base.symbol(u, w)?;
                let minus_one = base.class_of(&base.neg(&base.one()))?;
                let cu = base.class_of(u)?;
                let cw = base.class_of(w)?;
                let pi = p as i64;
                let ab = (alpha * beta).rem_euclid(pi) as u64;
                let bb = beta.rem_euclid(pi) as u64;
                let aa = alpha.rem_euclid(pi) as u64;
                for i in 0..cu.len() {
                    let v = fp::add(fp::mul(ab, minus_one[i], p), fp::mul(bb, cu[i], p), p);
                    out.push(fp::sub(v, fp::mul(aa, cw[i], p), p));
                }
                Ok(out)
            }
            _ => panic!("mismatched element types in {}", self.name()),
        }
    }

    /// `(A_1, A_2, {·,·}, class of −1)` of the model.
    pub fn aug_bilinear_map(&self) -> Result<AugBilinearMap, FieldError> {
        let basis = self.class_basis();
        let mut tensor = Vec::with_capacity(basis.len());
        for a in &basis {
            tensor.push(basis.iter().map(|b| self.symbol(a, b)).collect::<Result<Vec<_>, _>>()?);
        }
        let eps = self.class_of(&self.neg(&self.one()))?;
        Ok(AugBilinearMap::new(self.p, tensor, self.symbol_dim(), eps, self.class_labels()))
    }

    /// The pair the model's maximal pro-p Galois group is expected to have.
    pub fn predict_galois_pair(&self, precision: u32) -> Result<PairExpr, FieldError> {
        let amb = Ambient::new(self.p, precision).map_err(|e| FieldError::InvalidModel(e.to_string()))?;
        Ok(match &self.kind {
            ModelKind::ComplexField => PairExpr::Trivial,
            ModelKind::RealField => PairExpr::E,
            ModelKind::FiniteField(gf) => PairExpr::Z(amb.unit(gf.q() as i64, 1)?),
            ModelKind::LocalRational { ell, .. } => PairExpr::ext(1, PairExpr::Z(amb.unit(*ell as i64, 1)?)),
            ModelKind::DyadicRational => PairExpr::dyadic_block(),
            ModelKind::Laurent { base, .. } => PairExpr::ext(1, base.predict_galois_pair(precision)?),
        })
    }

    // ---- enumeration ----

    /// Deterministic candidate elements for bounded searches, and whether
    /// they exhaust `F^×`.
    pub fn sample_elements(&self, bound: usize) -> (Vec<FieldElement>, bool) {
        match &self.kind {
            ModelKind::FiniteField(gf) => {
                let all: Vec<FieldElement> = (1..gf.q()).map(FieldElement::Gf).collect();
                let exhaustive = all.len() <= bound;
                (all.into_iter().take(bound).collect(), exhaustive)
            }
            ModelKind::Laurent { base, variable, .. } => {
                let share = ((bound as f64).sqrt().ceil() as usize).max(2);
                let (consts, _) = base.sample_elements(share);
                let t = self.variable(variable).expect("own variable");
                let mut out: Vec<FieldElement> = consts.iter().map(|c| self.constant(c.clone())).collect();
                'outer: for c0 in &consts {
                    for c1 in &consts {
                        if out.len() >= bound {
                            break 'outer;
                        }
                        let lin = self.add(&self.constant(c0.clone()), &self.mul(&self.constant(c1.clone()), &t));
                        out.push(lin);
                    }
                }
                for k in [1i64, -1, 2, -2, 3] {
                    for c in &consts {
                        if out.len() >= bound {
                            break;
                        }
                        let tk = self.pow(&t, k).expect("t is invertible");
                        out.push(self.mul(&self.constant(c.clone()), &tk));
                    }
                }
                out.truncate(bound);
                (out, false)
            }
            _ => {
                let mut out = Vec::new();
                let mut h: i64 = 1;
                while out.len() < bound {
                    for n in 1..=h {
                        for d in 1..=h {
                            if n.max(d) != h || n.gcd(&d) != 1 {
                                continue;
                            }
                            for sign in [1, -1] {
                                out.push(FieldElement::Rational(BigRational::new(BigInt::from(sign * n), BigInt::from(d))));
                            }
                        }
                    }
                    h += 1;
                }
                out.truncate(bound);
                (out, false)
            }
        }
    }

    // ---- rendering ----

    pub fn render(&self, a: &FieldElement) -> String {
        match (&self.kind, a) {
            (ModelKind::FiniteField(gf), FieldElement::Gf(x)) => gf.render(*x),
            (ModelKind::Laurent { base, variable, .. }, FieldElement::Series(s)) => {
                let mut terms: Vec<String> = s
                    .coeffs
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !base.is_zero(c))
                    .map(|(i, c)| {
                        let k = s.val + i as i64;
                        let c = base.render(c);
                        let c = if c.contains(['+', ' ']) || (c.starts_with('-') && k != 0) {
                            format!("({c})")
                        } else {
                            c
                        };
                        match k {
                            0 => c,
                            1 if c == "1" => variable.clone(),
                            1 => format!("{c}*{variable}"),
                            _ if c == "1" => format!("{variable}^{k}"),
                            _ => format!("{c}*{variable}^{k}"),
                        }
                    })
                    .collect();
                if let Some(pr) = s.prec {
                    terms.push(format!("O({variable}^{pr})"));
                }
                if terms.is_empty() {
                    "0".into()
                } else {
                    terms.join(" + ")
                }
            }
            (_, FieldElement::Rational(r)) => r.to_string(),
            _ => format!("{a:?}"),
        }
    }
}

impl fmt::Display for FieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

fn check_prime(p: u64) -> Result<(), FieldError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(FieldError::InvalidModel(format!("{p} is not prime")))
    }
}

fn pow_signed(x: u64, e: i64, m: u64) -> u64 {
    if e >= 0 {
        fp::pow(x, e as u64, m)
    } else {
        fp::pow(fp::inv(x, m), e.unsigned_abs(), m)
    }
}

/// Quadratic Hilbert symbol over `Q_2`, as 0 (trivial) or 1, from the
/// exponent formula `ε(u)ε(w) + α ω(w) + β ω(u)` with `a = 2^α u`,
/// `b = 2^β w`, `ε(u) = (u-1)/2`, `ω(u) = (u²-1)/8` mod 2.
pub fn hilbert_symbol_2(a: &BigRational, b: &BigRational) -> u64 {
    let (alpha, na, da) = split_valuation(a, 2);
    let (beta, nb, db) = split_valuation(b, 2);
    let u = residue_mod(&na, &da, 8);
    let w = residue_mod(&nb, &db, 8);
    let eps = |x: u64| ((x - 1) / 2) % 2;
    let omega = |x: u64| ((x * x - 1) / 8) % 2;
    (eps(u) * eps(w) + alpha.rem_euclid(2) as u64 * omega(w) + beta.rem_euclid(2) as u64 * omega(u)) % 2
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(m: &FieldModel, s: &str) -> FieldElement {
        parse_element(m, s).unwrap()
    }

    #[test]
    fn class_groups() {
        let q2 = FieldModel::dyadic(2).unwrap();
        assert_eq!(q2.class_labels(), vec!["-1", "2", "5"]);
        let c = FieldModel::complex(2).unwrap();
        assert_eq!(c.class_dim(), 0);
        let l = FieldModel::laurent(FieldModel::finite_field(2, 3).unwrap(), "t", 10).unwrap();
        assert_eq!(l.class_dim(), 2);
        assert_eq!(l.class_labels(), vec!["2", "t"]);
        for m in [q2, l] {
            for (i, b) in m.class_basis().iter().enumerate() {
                let mut unit = vec![0; m.class_dim()];
                unit[i] = 1;
                assert_eq!(m.class_of(b).unwrap(), unit);
            }
        }
    }

    #[test]
    fn dyadic_symbols() {
        let q2 = FieldModel::dyadic(2).unwrap();
        assert_eq!(q2.symbol(&el(&q2, "-1"), &el(&q2, "-1")).unwrap(), vec![1]);
        assert_eq!(q2.symbol(&el(&q2, "2"), &el(&q2, "-1")).unwrap(), vec![0]);
        assert_eq!(q2.symbol(&el(&q2, "2"), &el(&q2, "5")).unwrap(), vec![1]);
    }

    #[test]
    fn dyadic_units_with_denominators() {
        let q2 = FieldModel::dyadic(2).unwrap();
        // -2/3 = 2 * (-1/3) and -1/3 ≡ 5 mod 8
        assert_eq!(q2.class_of(&el(&q2, "-2/3")).unwrap(), vec![0, 1, 1]);
        assert_eq!(q2.symbol(&el(&q2, "-2/3"), &el(&q2, "5/3")).unwrap(), vec![0]);
    }

    #[test]
    fn tame_symbol_example() {
        let m = FieldModel::laurent(FieldModel::finite_field(3, 7).unwrap(), "t", 10).unwrap();
        let v = m.symbol(&el(&m, "t"), &el(&m, "2")).unwrap();
        assert!(v.iter().any(|&x| x != 0));
        let v = m.symbol(&el(&m, "t"), &el(&m, "6")).unwrap();
        assert!(v.iter().all(|&x| x == 0));
    }

    #[test]
    fn series_inverse() {
        let m = FieldModel::laurent(FieldModel::finite_field(2, 5).unwrap(), "t", 6).unwrap();
        let b = el(&m, "1+t");
        let inv = m.inv(&b).unwrap();
        let prod = m.mul(&b, &inv);
        let FieldElement::Series(s) = &prod else { panic!() };
        assert_eq!(s.val, 0);
        assert_eq!(s.coeffs[0], FieldElement::Gf(1));
        assert!(s.coeffs[1..].iter().all(|c| *c == FieldElement::Gf(0)));
        assert_eq!(s.prec, Some(6));
        assert_eq!(m.render(&inv), "1 + 4*t + t^2 + 4*t^3 + t^4 + 4*t^5 + O(t^6)");
    }

    #[test]
    fn precision_exhausted_on_cancellation() {
        let m = FieldModel::laurent(FieldModel::finite_field(2, 5).unwrap(), "t", 3).unwrap();
        let b = el(&m, "1+t");
        let inv = m.inv(&b).unwrap();
        let back = m.inv(&inv).unwrap();
        let diff = m.sub(&back, &b);
        assert!(matches!(m.class_of(&diff), Err(FieldError::PrecisionExhausted(_))));
    }

    #[test]
    fn predictions() {
        let m = FieldModel::finite_field(3, 13).unwrap();
        let amb = Ambient::new(3, 64).unwrap();
        assert_eq!(m.predict_galois_pair(64).unwrap(), PairExpr::Z(amb.unit(13, 1).unwrap()));
        let m = FieldModel::laurent(
            FieldModel::laurent(FieldModel::finite_field(2, 3).unwrap(), "t", 10).unwrap(),
            "u",
            10,
        )
        .unwrap();
        let amb = Ambient::new(2, 64).unwrap();
        let pred = m.predict_galois_pair(64).unwrap();
        assert_eq!(pred.normalize(&amb).unwrap(), PairExpr::ext(2, PairExpr::Z(amb.unit(3, 1).unwrap())));
    }

    #[test]
    fn model_json_round_trip() {
        let text = r#"{"kind":"Laurent","params":{"base":{"kind":"FiniteField","params":{"q":9}},"variable":"t"},"precision":12}"#;
        let m = FieldModel::from_json(text, 2).unwrap();
        assert_eq!(m.name(), "F_9((t))");
        assert_eq!(FieldModel::from_spec(&m.to_spec(), 2).unwrap(), m);
        assert!(FieldModel::from_json(r#"{"kind":"FiniteField","params":{"q":7}}"#, 5).is_err());
    }
}
