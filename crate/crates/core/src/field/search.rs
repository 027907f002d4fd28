//! Bounded searches on field models: pairing comparison with a cohomology
//! ring, trichotomic witnesses, membership in `O^±(S, H)` and total rigidity
//! of `S = (F^×)^p`.

use serde::Serialize;
use serde_json::{json, Value};

use super::{FieldElement, FieldError, FieldModel};
use crate::cohomology::build_cohomology;
use crate::linalg::{all_vectors, fp, span};
use crate::pair::{Ambient, PairExpr};
use crate::rigidity::{find_isomorphism, AugBilinearMap, RigidityError};

fn rigidity_err(e: RigidityError) -> FieldError {
    FieldError::NotApplicable(e.to_string())
}

/// Whether the model's symbol map and the cup product of `e` are isomorphic
/// augmented bilinear maps.
pub fn check_pairing_match(model: &FieldModel, e: &PairExpr, amb: &Ambient, bound: u64) -> Result<bool, FieldError> {
    let a = model.aug_bilinear_map()?;
    let ga = build_cohomology(e, amb, 2).map_err(|e| FieldError::NotApplicable(e.to_string()))?;
    let b = AugBilinearMap::from_cohomology(&ga);
    Ok(find_isomorphism(&a, &b, bound).map_err(rigidity_err)?.is_some())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Trichotomic {
    /// `{a,b}`, `{a,1-b}` and `{a,1-b^-1}` all vanish.
    Witness(FieldElement),
    NoCounterexampleWithinBound { tried: usize, exhaustive: bool },
}

impl Trichotomic {
    pub fn to_json(&self, model: &FieldModel) -> Value {
        match self {
            Trichotomic::Witness(b) => json!({"result": "witness", "b": model.render(b)}),
            Trichotomic::NoCounterexampleWithinBound { tried, exhaustive } => {
                json!({"result": "noCounterexampleWithinBound", "tried": tried, "exhaustive": exhaustive})
            }
        }
    }
}

fn vanishes(v: &[u64]) -> bool {
    v.iter().all(|&x| x == 0)
}

/// Looks for `b` with `{a,b} = {a,1-b} = {a,1-b^-1} = 0`.
pub fn trichotomic_search(model: &FieldModel, a: &FieldElement, bound: usize) -> Result<Trichotomic, FieldError> {
    if model.is_pth_power(a)? {
        return Err(FieldError::NotApplicable(format!("{} is a p-th power", model.render(a))));
    }
    let (cands, exhaustive) = model.sample_elements(bound);
    let one = model.one();
    let mut tried = 0;
    for b in cands {
        let one_minus_b = model.sub(&one, &b);
        if model.is_zero(&one_minus_b) {
            continue;
        }
        tried += 1;
        let check = || -> Result<bool, FieldError> {
            if !vanishes(&model.symbol(a, &b)?) || !vanishes(&model.symbol(a, &one_minus_b)?) {
                return Ok(false);
            }
            let c = model.sub(&one, &model.inv(&b)?);
            Ok(vanishes(&model.symbol(a, &c)?))
        };
        match check() {
            Ok(true) => return Ok(Trichotomic::Witness(b)),
            Ok(false) | Err(FieldError::PrecisionExhausted(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Trichotomic::NoCounterexampleWithinBound { tried, exhaustive })
}

/// A subgroup `H ≥ (F^×)^p`, given by the classes it contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HSpec {
    All,
    Cosets(Vec<Vec<u64>>),
}

impl HSpec {
    /// The subgroup generated by `(F^×)^p` and the given elements.
    pub fn generated_by(model: &FieldModel, gens: &[FieldElement]) -> Result<HSpec, FieldError> {
        let d = model.class_dim();
        let classes = gens.iter().map(|g| model.class_of(g)).collect::<Result<Vec<_>, _>>()?;
        let ech = span(model.p(), d, classes);
        Ok(HSpec::Cosets(all_vectors(model.p(), d).filter(|v| ech.contains(v)).collect()))
    }

    pub fn contains(&self, class: &[u64]) -> bool {
        match self {
            HSpec::All => true,
            HSpec::Cosets(cs) => cs.iter().any(|c| c == class),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OTarget {
    OMinus,
    OPlus,
    ORing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OVerdictKind {
    Member,
    NonMember,
    UnknownWithinBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OVerdict {
    pub target: OTarget,
    pub verdict: OVerdictKind,
    pub search_bound: usize,
    /// A refuting `c ∈ O^-` with `a·c ∉ O^-`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    pub reason: String,
}

/// `a ∈ O^-(S,H) = (1 - S) ∩ H`.
fn in_o_minus(model: &FieldModel, a: &FieldElement, h: &HSpec) -> Result<bool, FieldError> {
    if model.is_zero(a) {
        return Ok(false);
    }
    let one_minus = model.sub(&model.one(), a);
    if model.is_zero(&one_minus) {
        return Ok(false);
    }
    Ok(model.is_pth_power(&one_minus)? && h.contains(&model.class_of(a)?))
}

/// Membership of `a` in `O^-`, `O^+` or `O = O^- ∪ O^+` for `S = (F^×)^p`.
pub fn o_membership(
    model: &FieldModel,
    a: &FieldElement,
    h: &HSpec,
    target: OTarget,
    bound: usize,
) -> Result<OVerdict, FieldError> {
    let verdict = |v, witness: Option<&FieldElement>, reason: String| OVerdict {
        target,
        verdict: v,
        search_bound: bound,
        witness: witness.map(|c| model.render(c)),
        reason,
    };
    let minus = in_o_minus(model, a, h)?;
    match target {
        OTarget::OMinus => {
            return Ok(if minus {
                verdict(OVerdictKind::Member, None, "1-a is a p-th power and a ∈ H".into())
            } else {
                verdict(OVerdictKind::NonMember, None, "1-a is not a p-th power or a ∉ H".into())
            })
        }
        OTarget::ORing if minus => return Ok(verdict(OVerdictKind::Member, None, "a ∈ O^-".into())),
        _ => {}
    }
    if model.is_zero(a) {
        return Err(FieldError::ZeroElement(model.render(a)));
    }
    let (cands, exhaustive) = model.sample_elements(bound);
    let a_in_h = h.contains(&model.class_of(a)?);
    for c in &cands {
        match in_o_minus(model, c, h) {
            Ok(true) => {}
            Ok(false) | Err(FieldError::PrecisionExhausted(_)) => continue,
            Err(e) => return Err(e),
        }
        if !a_in_h {
            return Ok(verdict(OVerdictKind::NonMember, Some(c), "a ∉ H, so a·c ∉ H for every c ∈ O^-".into()));
        }
        match in_o_minus(model, &model.mul(a, c), h) {
            Ok(true) | Err(FieldError::PrecisionExhausted(_)) => {}
            Ok(false) => return Ok(verdict(OVerdictKind::NonMember, Some(c), "c ∈ O^- but a·c ∉ O^-".into())),
            Err(e) => return Err(e),
        }
    }
    if !a_in_h {
        return Ok(verdict(OVerdictKind::NonMember, None, "a ∉ H (and O^- has no element within the bound)".into()));
    }
    Ok(if exhaustive {
        verdict(OVerdictKind::Member, None, "a·c ∈ O^- for every c ∈ O^- (exhaustive)".into())
    } else {
        verdict(OVerdictKind::UnknownWithinBound, None, "no refuting c within the bound".into())
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TotalRigidity {
    TotallyRigid { exhaustive: bool },
    /// `[x] ⊗ [1-x]` is a Steinberg tensor outside the span of `a ⊗ (-a)`.
    NotTotallyRigid { x: FieldElement, tensor: Vec<u64> },
    UnknownWithinBound { tried: usize },
}

impl TotalRigidity {
    pub fn to_json(&self, model: &FieldModel) -> Value {
        match self {
            TotalRigidity::TotallyRigid { exhaustive } => json!({"result": "totallyRigid", "exhaustive": exhaustive}),
            TotalRigidity::NotTotallyRigid { x, tensor } => json!({
                "result": "notTotallyRigid",
                "x": model.render(x),
                "oneMinusX": model.render(&model.sub(&model.one(), x)),
                "tensor": tensor,
            }),
            TotalRigidity::UnknownWithinBound { tried } => json!({"result": "unknownWithinBound", "tried": tried}),
        }
    }
}

fn tensor(p: u64, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| fp::mul(x, y, p))).collect()
}

/// Compares the Steinberg tensors `[x] ⊗ [1-x]` found among the sample
/// elements with the span of `[a] ⊗ [-a]` in `(F^×/S)^{⊗2}`.
pub fn total_rigidity(model: &FieldModel, bound: usize, dim_bound: u64) -> Result<TotalRigidity, FieldError> {
    let p = model.p();
    let d = model.class_dim();
    let size = (0..d).try_fold(1u64, |acc, _| acc.checked_mul(p).filter(|&x| x <= dim_bound));
    if size.is_none() {
        return Err(rigidity_err(RigidityError::DimensionTooLarge { p, d, bound: dim_bound }));
    }
    let eps = model.class_of(&model.neg(&model.one()))?;
    let rigid_span = span(
        p,
        d * d,
        all_vectors(p, d).map(|v| {
            let shifted: Vec<u64> = v.iter().zip(&eps).map(|(&x, &y)| fp::add(x, y, p)).collect();
            tensor(p, &v, &shifted)
        }),
    );
    let (cands, exhaustive) = model.sample_elements(bound);
    let one = model.one();
    let mut tried = 0;
    for x in cands {
        let y = model.sub(&one, &x);
        if model.is_zero(&y) {
            continue;
        }
        let (cx, cy) = match (model.class_of(&x), model.class_of(&y)) {
            (Ok(cx), Ok(cy)) => (cx, cy),
            (Err(FieldError::PrecisionExhausted(_)), _) | (_, Err(FieldError::PrecisionExhausted(_))) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        tried += 1;
        let t = tensor(p, &cx, &cy);
        if !rigid_span.contains(&t) {
            return Ok(TotalRigidity::NotTotallyRigid { x, tensor: t });
        }
    }
    Ok(if exhaustive || d == 0 {
        TotalRigidity::TotallyRigid { exhaustive: true }
    } else {
        TotalRigidity::UnknownWithinBound { tried }
    })
}
