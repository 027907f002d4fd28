//! Augmented bilinear maps `(A_1, A_2, (·,·), ε)` over `F_p`, rigid
//! elements and the subspace spanned by ε and the non-rigid elements.

use serde::Serialize;
use thiserror::Error;

use crate::cohomology::{build_cohomology, CohomologyError, GradedAlgebra};
use crate::linalg::{all_vectors, fp, span, FpMatrix};
use crate::pair::{Ambient, PairExpr};

/// Default cap on `p^d` for scans over all of `A_1`.
pub const DEFAULT_BOUND: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RigidityError {
    #[error("A_1 has {p}^{d} elements, above the bound {bound}")]
    DimensionTooLarge { p: u64, d: usize, bound: u64 },
    #[error("rigidity is only defined for nonzero elements")]
    ZeroElement,
    #[error("vector has length {found}, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("the expression is not an extension Z_p^m ⋊ Ḡ")]
    NotAnExtension,
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugBilinearMap {
    pub p: u64,
    pub d: usize,
    pub e: usize,
    /// `tensor[i][j]` is the image of `(x_i, x_j)` in `A_2 = F_p^e`.
    pub tensor: Vec<Vec<Vec<u64>>>,
    pub eps: Vec<u64>,
    pub labels: Vec<String>,
}

impl AugBilinearMap {
    pub fn new(p: u64, tensor: Vec<Vec<Vec<u64>>>, e: usize, eps: Vec<u64>, labels: Vec<String>) -> Self {
        let d = eps.len();
        assert_eq!(tensor.len(), d, "tensor must be d x d x e");
        assert!(tensor.iter().all(|r| r.len() == d && r.iter().all(|v| v.len() == e)), "tensor must be d x d x e");
        assert_eq!(labels.len(), d);
        AugBilinearMap { p, d, e, tensor, eps, labels }
    }

    /// `A_1 = H^1`, `A_2 = H^2`, cup product and `ε_G`.
    pub fn from_cohomology(ga: &GradedAlgebra) -> Self {
        AugBilinearMap::new(ga.p(), ga.gram(), ga.dim(2), ga.eps(), ga.labels(1).to_vec())
    }

    pub fn pairing(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut out = vec![0; self.e];
        for (i, &ai) in a.iter().enumerate().filter(|(_, &x)| x != 0) {
            for (j, &bj) in b.iter().enumerate().filter(|(_, &x)| x != 0) {
                let c = fp::mul(ai, bj, p);
                for (o, &t) in out.iter_mut().zip(&self.tensor[i][j]) {
                    *o = fp::add(*o, fp::mul(c, t, p), p);
                }
            }
        }
        out
    }

    /// Matrix of `b ↦ (a, b)`, of shape `e × d`.
    fn left_matrix(&self, a: &[u64]) -> FpMatrix {
        let mut m = FpMatrix::zeros(self.p, self.e, self.d);
        for j in 0..self.d {
            let mut unit = vec![0; self.d];
            unit[j] = 1;
            for (k, v) in self.pairing(a, &unit).into_iter().enumerate() {
                m.set(k, j, v);
            }
        }
        m
    }

    fn check_bound(&self, bound: u64) -> Result<(), RigidityError> {
        let too_big = (0..self.d).try_fold(1u64, |acc, _| acc.checked_mul(self.p).filter(|&x| x <= bound)).is_none();
        if too_big {
            return Err(RigidityError::DimensionTooLarge { p: self.p, d: self.d, bound });
        }
        Ok(())
    }

    fn check_vector(&self, a: &[u64]) -> Result<(), RigidityError> {
        if a.len() != self.d {
            return Err(RigidityError::WrongLength { expected: self.d, found: a.len() });
        }
        if a.iter().all(|&x| x % self.p == 0) {
            return Err(RigidityError::ZeroElement);
        }
        Ok(())
    }

    fn shifted(&self, a: &[u64]) -> Vec<u64> {
        a.iter().zip(&self.eps).map(|(&x, &y)| fp::add(x % self.p, y, self.p)).collect()
    }

    /// `a` is rigid: every `b` with `(a, b) = 0` lies on the line through `ε + a`.
    ///
    /// The set of such `b` is the kernel of a linear map, so it suffices to
    /// test a kernel basis.
    pub fn is_rigid(&self, a: &[u64], bound: u64) -> Result<bool, RigidityError> {
        self.check_vector(a)?;
        self.check_bound(bound)?;
        Ok(self.is_rigid_unchecked(a))
    }

    fn is_rigid_unchecked(&self, a: &[u64]) -> bool {
        let line = span(self.p, self.d, [self.shifted(a)]);
        self.left_matrix(a).kernel_basis().iter().all(|b| line.contains(b))
    }

    /// Rigidity by running over every `b ∈ A_1`.
    pub fn is_rigid_exhaustive(&self, a: &[u64], bound: u64) -> Result<bool, RigidityError> {
        self.check_vector(a)?;
        self.check_bound(bound)?;
        let line = span(self.p, self.d, [self.shifted(a)]);
        Ok(all_vectors(self.p, self.d).all(|b| self.pairing(a, &b).iter().any(|&x| x != 0) || line.contains(&b)))
    }

    /// Basis of the span of ε and all non-rigid nonzero elements.
    pub fn n_subspace(&self, bound: u64) -> Result<Vec<Vec<u64>>, RigidityError> {
        self.check_bound(bound)?;
        let mut n = span(self.p, self.d, [self.eps.clone()]);
        for a in all_vectors(self.p, self.d) {
            if a.iter().any(|&x| x != 0) && !n.contains(&a) && !self.is_rigid_unchecked(&a) {
                n.insert(a);
            }
        }
        Ok(n.basis().to_vec())
    }

    /// The sub-map on the span of `basis` (linearly independent vectors of
    /// `A_1`), or `None` when ε is outside that span.
    pub fn restrict(&self, basis: &[Vec<u64>]) -> Option<AugBilinearMap> {
        let k = basis.len();
        let cols: Vec<Vec<u64>> = basis.to_vec();
        let m = FpMatrix::from_columns(self.p, self.d, &cols).ok()?;
        let eps = m.solve(&self.eps).ok()??;
        let tensor = (0..k).map(|i| (0..k).map(|j| self.pairing(&basis[i], &basis[j])).collect()).collect();
        let labels = basis.iter().map(|v| self.render(v)).collect();
        Some(AugBilinearMap::new(self.p, tensor, self.e, eps, labels))
    }

    /// Linear combination of basis labels, e.g. `x1+2*b1`.
    pub fn render(&self, v: &[u64]) -> String {
        let terms: Vec<String> = v
            .iter()
            .zip(&self.labels)
            .filter(|(&c, _)| c != 0)
            .map(|(&c, l)| if c == 1 { l.clone() } else { format!("{c}*{l}") })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }

    /// Sorts every nonzero element of `A_1` and computes the N-subspace.
    pub fn scan(&self, bound: u64) -> Result<RigidityScan, RigidityError> {
        self.check_bound(bound)?;
        let mut rigid = Vec::new();
        let mut non_rigid = Vec::new();
        for a in all_vectors(self.p, self.d).filter(|a| a.iter().any(|&x| x != 0)) {
            if self.is_rigid_unchecked(&a) {
                rigid.push(a);
            } else {
                non_rigid.push(a);
            }
        }
        let n = self.n_subspace(bound)?;
        Ok(RigidityScan { rigid, non_rigid, n_subspace: n })
    }
}

/// All nonzero elements of `A_1` sorted into rigid and non-rigid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidityScan {
    pub rigid: Vec<Vec<u64>>,
    pub non_rigid: Vec<Vec<u64>>,
    pub n_subspace: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RigidityReport {
    pub rigid: Vec<String>,
    pub non_rigid: Vec<String>,
    pub n_subspace_dim: usize,
    /// Present for extensions: whether every class outside the inflation
    /// subspace is rigid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outside_inflation_rigid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_in_inflation: Option<bool>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub counterexamples: Vec<String>,
}

impl RigidityReport {
    pub fn holds(&self) -> bool {
        self.outside_inflation_rigid == Some(true) && self.n_in_inflation == Some(true)
    }
}

/// Rigidity scan of `H^1` of a pair, with the extension checks when the
/// expression is an extension.
pub fn rigidity_report(e: &PairExpr, amb: &Ambient, bound: u64) -> Result<RigidityReport, RigidityError> {
    let ga = build_cohomology(e, amb, 2)?;
    let map = AugBilinearMap::from_cohomology(&ga);
    let scan = map.scan(bound)?;
    let mut report = RigidityReport {
        rigid: scan.rigid.iter().map(|v| map.render(v)).collect(),
        non_rigid: scan.non_rigid.iter().map(|v| map.render(v)).collect(),
        n_subspace_dim: scan.n_subspace.len(),
        outside_inflation_rigid: None,
        n_in_inflation: None,
        counterexamples: vec![],
    };
    if let Some(ext) = ga.ext_structure() {
        let inflation = span(
            amb.p,
            map.d,
            ext.inflation.iter().map(|&i| {
                let mut v = vec![0; map.d];
                v[i] = 1;
                v
            }),
        );
        report.counterexamples = scan.non_rigid.iter().filter(|a| !inflation.contains(a)).map(|v| map.render(v)).collect();
        report.outside_inflation_rigid = Some(report.counterexamples.is_empty());
        report.n_in_inflation = Some(scan.n_subspace.iter().all(|v| inflation.contains(v)));
    }
    Ok(report)
}

/// Checks that every class outside `inf(H^1(Ḡ))` is rigid and that the
/// N-subspace lies inside the inflation subspace.
pub fn check_rigidity_criterion(e: &PairExpr, amb: &Ambient, bound: u64) -> Result<RigidityReport, RigidityError> {
    if !matches!(e, PairExpr::Ext(..)) {
        return Err(RigidityError::NotAnExtension);
    }
    rigidity_report(e, amb, bound)
}

/// Checks whether the images `w` of the pairs of `u` can be matched by one
/// linear map that is injective on their span.
fn consistent(p: u64, e: usize, u: &[Vec<u64>], w: &[Vec<u64>]) -> bool {
    if e == 0 || u.is_empty() {
        return true;
    }
    let stacked: Vec<Vec<u64>> = u.iter().zip(w).map(|(a, b)| a.iter().chain(b).copied().collect()).collect();
    let ru = FpMatrix::from_columns(p, e, u).expect("columns of length e").rank();
    let rw = FpMatrix::from_columns(p, e, w).expect("columns of length e").rank();
    let rs = FpMatrix::from_columns(p, 2 * e, &stacked).expect("columns of length 2e").rank();
    ru == rw && rw == rs
}

/// A basis of `A_1` starting with ε when ε is nonzero.
fn eps_adapted_basis(m: &AugBilinearMap) -> Vec<Vec<u64>> {
    let mut ech = crate::linalg::RowEchelon::new(m.p, m.d);
    let mut basis = Vec::new();
    if m.eps.iter().any(|&x| x != 0) {
        ech.insert(m.eps.clone());
        basis.push(m.eps.clone());
    }
    for i in 0..m.d {
        let mut v = vec![0; m.d];
        v[i] = 1;
        if ech.insert(v.clone()) {
            basis.push(v);
        }
    }
    basis
}

/// Searches for an isomorphism of augmented bilinear maps `a → b`: an
/// invertible `Φ: A_1 → B_1` with `Φ(ε_a) = ε_b` and an invertible
/// `Ψ: A_2 → B_2` with `Ψ((x, y)_a) = (Φx, Φy)_b`. Returns the images
/// of the standard basis of `A_1` under `Φ`.
pub fn find_isomorphism(
    a: &AugBilinearMap,
    b: &AugBilinearMap,
    bound: u64,
) -> Result<Option<Vec<Vec<u64>>>, RigidityError> {
    if a.p != b.p || a.d != b.d || a.e != b.e {
        return Ok(None);
    }
    a.check_bound(bound)?;
    let a_eps = a.eps.iter().any(|&x| x != 0);
    let b_eps = b.eps.iter().any(|&x| x != 0);
    if a_eps != b_eps {
        return Ok(None);
    }
    let p = a.p;
    let d = a.d;
    let basis = eps_adapted_basis(a);
    let candidates: Vec<Vec<u64>> = all_vectors(p, d).filter(|v| v.iter().any(|&x| x != 0)).collect();
    let mut images: Vec<Vec<u64>> = Vec::with_capacity(d);

    fn extend(
        a: &AugBilinearMap,
        b: &AugBilinearMap,
        basis: &[Vec<u64>],
        candidates: &[Vec<u64>],
        images: &mut Vec<Vec<u64>>,
        fixed_first: Option<&Vec<u64>>,
    ) -> bool {
        let k = images.len();
        if k == basis.len() {
            return true;
        }
        let choices: Vec<&Vec<u64>> = match (k, fixed_first) {
            (0, Some(v)) => vec![v],
            _ => candidates.iter().collect(),
        };
        for y in choices {
            let mut ech = span(a.p, a.d, images.iter().cloned());
            if !ech.insert(y.clone()) {
                continue;
            }
            images.push(y.clone());
            let mut u = Vec::new();
            let mut w = Vec::new();
            for i in 0..=k {
                for j in 0..=k {
                    if i == k || j == k {
                        u.push(a.pairing(&basis[i], &basis[j]));
                        w.push(b.pairing(&images[i], &images[j]));
                    }
                }
            }
            for i in 0..k {
                for j in 0..k {
                    u.push(a.pairing(&basis[i], &basis[j]));
                    w.push(b.pairing(&images[i], &images[j]));
                }
            }
            if consistent(a.p, a.e, &u, &w) && extend(a, b, basis, candidates, images, fixed_first) {
                return true;
            }
            images.pop();
        }
        false
    }

    let fixed = a_eps.then(|| b.eps.clone());
    if !extend(a, b, &basis, &candidates, &mut images, fixed.as_ref()) {
        return Ok(None);
    }
    // Express Φ on the standard basis: Φ(e_i) = Σ c_ij images_j where
    // e_i = Σ c_ij basis_j.
    let bm = FpMatrix::from_columns(p, d, &basis).expect("square basis");
    let mut phi = Vec::with_capacity(d);
    for i in 0..d {
        let mut ei = vec![0; d];
        ei[i] = 1;
        let c = bm.solve(&ei).expect("dimensions match").expect("basis spans A_1");
        let mut img = vec![0; d];
        for (cj, yj) in c.iter().zip(&images) {
            for (o, &y) in img.iter_mut().zip(yj) {
                *o = fp::add(*o, fp::mul(*cj, y, p), p);
            }
        }
        phi.push(img);
    }
    Ok(Some(phi))
}

/// Runs over every invertible `Φ ∈ GL_d(F_p)` and counts how many are the
/// `A_1` part of an isomorphism `a → b`. Returns `(candidates, matches)`.
pub fn count_isomorphisms_exhaustive(a: &AugBilinearMap, b: &AugBilinearMap, bound: u64) -> Result<(u64, u64), RigidityError> {
    if a.p != b.p || a.d != b.d || a.e != b.e {
        return Ok((0, 0));
    }
    let (p, d) = (a.p, a.d);
    let total = (0..d * d).try_fold(1u64, |acc, _| acc.checked_mul(p).filter(|&x| x <= bound * bound));
    if total.is_none() {
        return Err(RigidityError::DimensionTooLarge { p, d: d * d, bound: bound * bound });
    }
    let vectors: Vec<Vec<u64>> = all_vectors(p, d).collect();
    let (mut candidates, mut matches) = (0u64, 0u64);
    let mut idx = vec![0usize; d];
    loop {
        let cols: Vec<Vec<u64>> = idx.iter().map(|&i| vectors[i].clone()).collect();
        let m = FpMatrix::from_columns(p, d, &cols).expect("square");
        if m.rank() == d {
            candidates += 1;
            let phi = |v: &[u64]| m.mul_vec(v).expect("dimensions match");
            if phi(&a.eps) == b.eps {
                let mut u = Vec::new();
                let mut w = Vec::new();
                for i in 0..d {
                    for j in 0..d {
                        let (mut ei, mut ej) = (vec![0; d], vec![0; d]);
                        ei[i] = 1;
                        ej[j] = 1;
                        u.push(a.pairing(&ei, &ej));
                        w.push(b.pairing(&cols[i], &cols[j]));
                    }
                }
                if consistent(p, a.e, &u, &w) {
                    matches += 1;
                }
            }
        }
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < vectors.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            break;
        }
    }
    Ok((candidates, matches))
}
