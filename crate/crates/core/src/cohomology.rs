//! Truncated mod-p cohomology rings of elementary-type pairs.
//!
//! [`build_cohomology`] assembles `H^{≤D}` from the block rules, the
//! free-product rule (degree-wise direct sum, zero cross products) and the
//! extension rule `H^*(Z_p^m ⋊ Ḡ) = H^*(Ḡ)[β_1..β_m]` with `β_l² = ε β_l`
//! (p = 2) or exterior anticommuting `β_l` (p odd).

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::linalg::{fp, FpMatrix};
use crate::pair::{Ambient, DemuskinCase, FExponent, PAdicBlock, PairExpr};
use crate::units::UnitError;

/// Sparse vector over `F_p`: `(global basis index, nonzero coefficient)`,
/// sorted by index.
pub type Sparse = Vec<(usize, u64)>;

/// Upper bound on the total basis size of a constructed ring.
pub const MAX_BASIS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("maximal degree must be at least 2, got {0}")]
    DegreeTooSmall(usize),
    #[error("cohomology ring would have more than {MAX_BASIS} basis elements")]
    TooLarge,
    #[error(transparent)]
    Unit(#[from] UnitError),
}

/// Where the extension generators sit in an Ext-rooted ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtStructure {
    pub m: u32,
    /// Degree-1 positions (local to degree 1) of `inf(H^1(Ḡ))`.
    pub inflation: Vec<usize>,
    /// Degree-1 positions of `β_1, …, β_m`.
    pub betas: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct GradedAlgebra {
    p: u64,
    max_degree: usize,
    /// `degree_start[d]..degree_start[d + 1]` are the global indices of degree `d`.
    degree_start: Vec<usize>,
    labels: Vec<String>,
    table: Vec<Vec<Sparse>>,
    eps: Sparse,
    beta_count: usize,
    ext: Option<ExtStructure>,
}

fn normalize_sparse(p: u64, terms: impl IntoIterator<Item = (usize, u64)>) -> Sparse {
    let mut acc: BTreeMap<usize, u64> = BTreeMap::new();
    for (i, c) in terms {
        let e = acc.entry(i).or_insert(0);
        *e = fp::add(*e, c % p, p);
    }
    acc.into_iter().filter(|&(_, c)| c != 0).collect()
}

impl GradedAlgebra {
    /// Assembles a ring from a degree-sorted basis, a product rule on basis
    /// indices and the ε class (as global indices).
    fn from_parts(
        p: u64,
        max_degree: usize,
        basis: Vec<(usize, String)>,
        mul: impl Fn(usize, usize) -> Sparse,
        eps: Sparse,
        beta_count: usize,
        ext: Option<ExtStructure>,
    ) -> Result<Self, CohomologyError> {
        if basis.len() > MAX_BASIS {
            return Err(CohomologyError::TooLarge);
        }
        debug_assert!(basis.windows(2).all(|w| w[0].0 <= w[1].0));
        let mut degree_start = vec![0; max_degree + 2];
        for (d, start) in degree_start.iter_mut().enumerate() {
            *start = basis.iter().take_while(|(deg, _)| *deg < d).count();
        }
        let degrees: Vec<usize> = basis.iter().map(|(d, _)| *d).collect();
        let n = basis.len();
        let mut table = vec![vec![Vec::new(); n]; n];
        for i in 0..n {
            for j in 0..n {
                if degrees[i] + degrees[j] <= max_degree {
                    table[i][j] = normalize_sparse(p, mul(i, j));
                }
            }
        }
        Ok(GradedAlgebra {
            p,
            max_degree,
            degree_start,
            labels: basis.into_iter().map(|(_, l)| l).collect(),
            table,
            eps: normalize_sparse(p, eps),
            beta_count,
            ext,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self, d: usize) -> usize {
        if d > self.max_degree {
            return 0;
        }
        self.degree_start[d + 1] - self.degree_start[d]
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.max_degree).map(|d| self.dim(d)).collect()
    }

    pub fn degree_range(&self, d: usize) -> std::ops::Range<usize> {
        self.degree_start[d]..self.degree_start[d + 1]
    }

    pub fn degree_of(&self, i: usize) -> usize {
        (0..=self.max_degree).find(|&d| i < self.degree_start[d + 1]).expect("index in range")
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn labels(&self, d: usize) -> &[String] {
        &self.labels[self.degree_range(d)]
    }

    /// Product of two basis elements (empty when the degree exceeds D).
    pub fn product(&self, i: usize, j: usize) -> &Sparse {
        &self.table[i][j]
    }

    pub fn mul(&self, a: &[(usize, u64)], b: &[(usize, u64)]) -> Sparse {
        let p = self.p;
        normalize_sparse(
            p,
            a.iter().flat_map(|&(i, ca)| {
                b.iter().flat_map(move |&(j, cb)| {
                    self.table[i][j].iter().map(move |&(k, ck)| (k, fp::mul(fp::mul(ca, cb, p), ck, p)))
                })
            }),
        )
    }

    /// ε as a sparse vector of global indices.
    pub fn eps_sparse(&self) -> &Sparse {
        &self.eps
    }

    /// ε as coordinates in the degree-1 basis.
    pub fn eps(&self) -> Vec<u64> {
        self.local(1, &self.eps)
    }

    /// Dense coordinates of a homogeneous sparse vector of degree `d`.
    pub fn local(&self, d: usize, v: &[(usize, u64)]) -> Vec<u64> {
        let r = self.degree_range(d);
        let mut out = vec![0; r.len()];
        for &(i, c) in v {
            assert!(r.contains(&i), "vector is not homogeneous of degree {d}");
            out[i - r.start] = c;
        }
        out
    }

    /// Sparse global vector from dense coordinates in degree `d`.
    pub fn global(&self, d: usize, coords: &[u64]) -> Sparse {
        let start = self.degree_start[d];
        coords.iter().enumerate().filter(|(_, &c)| c % self.p != 0).map(|(i, &c)| (start + i, c % self.p)).collect()
    }

    /// `ε^k` for `1 ≤ k ≤ D`.
    pub fn eps_power(&self, k: usize) -> Sparse {
        let mut v = self.eps.clone();
        for _ in 1..k {
            v = self.mul(&v, &self.eps);
        }
        v
    }

    /// Cup products of degree-1 basis elements: `gram[i][j]` is the
    /// coordinate vector of `x_i ∪ x_j` in the degree-2 basis.
    pub fn gram(&self) -> Vec<Vec<Vec<u64>>> {
        let r1 = self.degree_range(1);
        r1.clone()
            .map(|i| r1.clone().map(|j| self.local(2, &self.table[i][j])).collect())
            .collect()
    }

    /// The Gram matrix with coefficients in `H^2` when `dim H^2 = 1`.
    pub fn scalar_gram(&self) -> Option<FpMatrix> {
        if self.dim(2) != 1 {
            return None;
        }
        let d = self.dim(1);
        let g = self.gram();
        let mut m = FpMatrix::zeros(self.p, d, d);
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v[0]);
            }
        }
        Some(m)
    }

    pub fn ext_structure(&self) -> Option<&ExtStructure> {
        self.ext.as_ref()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dims": self.dims(),
            "gram": self.gram(),
            "eps": self.eps(),
            "basis": (0..=self.max_degree).map(|d| self.labels(d).to_vec()).collect::<Vec<_>>(),
        })
    }
}

/// Builds `H^{≤D}` of a pair expression.
pub fn build_cohomology(e: &PairExpr, amb: &Ambient, max_degree: usize) -> Result<GradedAlgebra, CohomologyError> {
    if max_degree < 2 {
        return Err(CohomologyError::DegreeTooSmall(max_degree));
    }
    build(e, amb, max_degree)
}

fn build(e: &PairExpr, amb: &Ambient, dmax: usize) -> Result<GradedAlgebra, CohomologyError> {
    let p = amb.p;
    match e {
        PairExpr::Trivial => GradedAlgebra::from_parts(p, dmax, vec![(0, "1".into())], |_, _| vec![(0, 1)], vec![], 0, None),
        PairExpr::Z(alpha) => {
            let basis = vec![(0, "1".into()), (1, "x".into())];
            let eps = vec![(1, alpha.epsilon())];
            GradedAlgebra::from_parts(p, dmax, basis, unit_or_zero, eps, 0, None)
        }
        PairExpr::E => {
            let mut basis = vec![(0, "1".to_string()), (1, "e".to_string())];
            basis.extend((2..=dmax).map(|d| (d, format!("e^{d}"))));
            GradedAlgebra::from_parts(p, dmax, basis, |i, j| vec![(i + j, 1)], vec![(1, 1)], 0, None)
        }
        PairExpr::PAdic(b) => padic_algebra(b, p, dmax),
        PairExpr::FreeProd(fs) => {
            let parts = fs.iter().map(|f| build(f, amb, dmax)).collect::<Result<Vec<_>, _>>()?;
            free_product_algebra(&parts, p, dmax)
        }
        PairExpr::Ext(m, base) => ext_algebra(*m, &build(base, amb, dmax)?, p, dmax),
    }
}

/// Product rule for rings whose only nonzero products involve the unit.
fn unit_or_zero(i: usize, j: usize) -> Sparse {
    match (i, j) {
        (0, k) | (k, 0) => vec![(k, 1)],
        _ => vec![],
    }
}

/// The cup form of a Demuškin presentation in the basis dual to `x_1..x_n`,
/// together with `ε` in the same basis.
pub fn demuskin_form(b: &PAdicBlock, p: u64) -> (Vec<Vec<u64>>, Vec<u64>) {
    let n = b.n as usize;
    let mut g = vec![vec![0u64; n]; n];
    let mut eps = vec![0u64; n];
    let first_pair = if b.case == DemuskinCase::II { 1 } else { 0 };
    let mut i = first_pair;
    while i + 1 < n {
        g[i][i + 1] = 1;
        g[i + 1][i] = fp::neg(1, p);
        i += 2;
    }
    if p == 2 {
        match b.case {
            DemuskinCase::I => {}
            DemuskinCase::II => {
                g[0][0] = 1;
                eps[0] = 1;
            }
            DemuskinCase::III | DemuskinCase::IV => {
                g[0][0] = 1;
                eps[1] = 1;
            }
        }
    }
    (g, eps)
}

fn padic_algebra(b: &PAdicBlock, p: u64, dmax: usize) -> Result<GradedAlgebra, CohomologyError> {
    let n = b.n as usize;
    let (g, eps) = demuskin_form(b, p);
    let mut basis = vec![(0, "1".to_string())];
    basis.extend((1..=n).map(|i| (1, format!("x{i}"))));
    basis.push((2, "w".into()));
    let w = n + 1;
    let eps: Sparse = eps.iter().enumerate().map(|(i, &c)| (i + 1, c)).collect();
    GradedAlgebra::from_parts(
        p,
        dmax,
        basis,
        |i, j| match (i, j) {
            (0, k) | (k, 0) => vec![(k, 1)],
            (i, j) if i <= n && j <= n => vec![(w, g[i - 1][j - 1])],
            _ => vec![],
        },
        eps,
        0,
        None,
    )
}

fn free_product_algebra(parts: &[GradedAlgebra], p: u64, dmax: usize) -> Result<GradedAlgebra, CohomologyError> {
    // origin[global] = (factor, index in factor); global 0 is the unit.
    let mut basis = vec![(0, "1".to_string())];
    let mut origin = vec![(usize::MAX, 0)];
    let mut position: HashMap<(usize, usize), usize> = HashMap::new();
    for d in 1..=dmax {
        for (k, a) in parts.iter().enumerate() {
            for i in a.degree_range(d) {
                position.insert((k, i), basis.len());
                origin.push((k, i));
                basis.push((d, format!("g{}:{}", k + 1, a.label(i))));
            }
        }
    }
    let mut eps = Vec::new();
    for (k, a) in parts.iter().enumerate() {
        eps.extend(a.eps_sparse().iter().map(|&(i, c)| (position[&(k, i)], c)));
    }
    let beta_count = parts.iter().map(|a| a.beta_count).max().unwrap_or(0);
    GradedAlgebra::from_parts(
        p,
        dmax,
        basis,
        |i, j| {
            if i == 0 || j == 0 {
                return vec![(i + j, 1)];
            }
            let (ki, li) = origin[i];
            let (kj, lj) = origin[j];
            if ki != kj {
                return vec![];
            }
            parts[ki].product(li, lj).iter().map(|&(r, c)| (position[&(ki, r)], c)).collect()
        },
        eps,
        beta_count,
        None,
    )
}

/// Subsets of `{0..m}` of size `k` as bitmasks, in lexicographic order of
/// their sorted element lists.
fn subsets(m: u32, k: u32) -> Vec<u64> {
    fn go(start: u32, m: u32, k: u32, acc: u64, out: &mut Vec<u64>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..m {
            if m - i < k {
                break;
            }
            go(i + 1, m, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    go(0, m, k, 0, &mut out);
    out
}

/// Sign of reordering `β_S β_T` into increasing order.
fn merge_sign(s: u64, t: u64) -> bool {
    let mut inversions = 0u32;
    let mut rest = t;
    while rest != 0 {
        let j = rest.trailing_zeros();
        rest &= rest - 1;
        inversions += (s >> (j + 1)).count_ones();
    }
    inversions % 2 == 1
}

fn ext_algebra(m: u32, base: &GradedAlgebra, p: u64, dmax: usize) -> Result<GradedAlgebra, CohomologyError> {
    if m > 60 {
        return Err(CohomologyError::TooLarge);
    }
    let first_beta = base.beta_count;
    let mut basis = Vec::new();
    let mut origin: Vec<(usize, u64)> = Vec::new();
    let mut position: HashMap<(usize, u64), usize> = HashMap::new();
    let mut estimate = 0usize;
    for d in 0..=dmax {
        for k in 0..=(d.min(m as usize)) {
            estimate += base.dim(d - k) * binomial(m as u64, k as u64).min(MAX_BASIS as u64 + 1) as usize;
            if estimate > MAX_BASIS {
                return Err(CohomologyError::TooLarge);
            }
            for s in subsets(m, k as u32) {
                for b in base.degree_range(d - k) {
                    position.insert((b, s), basis.len());
                    origin.push((b, s));
                    basis.push((d, ext_label(base.label(b), s, first_beta)));
                }
            }
        }
    }
    let inflation = base.degree_range(1).map(|b| position[&(b, 0)] - position[&(0, 0)] - 1).collect();
    let betas = (0..m).map(|l| position[&(0, 1u64 << l)] - 1).collect();
    let eps: Sparse = base.eps_sparse().iter().map(|&(b, c)| (position[&(b, 0)], c)).collect();
    let base_eps = base.eps_sparse().clone();
    GradedAlgebra::from_parts(
        p,
        dmax,
        basis,
        |i, j| {
            let (b1, s) = origin[i];
            let (b2, t) = origin[j];
            let overlap = s & t;
            let mut v = base.product(b1, b2).clone();
            if p == 2 {
                for _ in 0..overlap.count_ones() {
                    v = base.mul(&v, &base_eps);
                }
            } else {
                if overlap != 0 {
                    return vec![];
                }
                let sign = (s.count_ones() as usize * base.degree_of(b2)) % 2 == 1;
                if sign != merge_sign(s, t) {
                    v = v.into_iter().map(|(r, c)| (r, fp::neg(c, p))).collect();
                }
            }
            v.into_iter().map(|(r, c)| (position[&(r, s | t)], c)).collect()
        },
        eps,
        first_beta + m as usize,
        Some(ExtStructure { m, inflation, betas }),
    )
}

fn ext_label(base: &str, s: u64, first_beta: usize) -> String {
    let betas: Vec<String> = (0..64).filter(|l| s >> l & 1 == 1).map(|l| format!("b{}", first_beta + l + 1)).collect();
    match (base, betas.is_empty()) {
        (_, true) => base.to_string(),
        ("1", false) => betas.join("*"),
        (_, false) => format!("{base}*{}", betas.join("*")),
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u64 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// `dim H^i` for `0 ≤ i ≤ D`, from the block dimensions, degree-wise sums
/// over free factors and binomial convolution over extensions.
pub fn dims_closed_form(e: &PairExpr, max_degree: usize) -> Vec<u64> {
    let mut out = vec![0u64; max_degree + 1];
    out[0] = 1;
    match e {
        PairExpr::Trivial => {}
        PairExpr::Z(_) => {
            if max_degree >= 1 {
                out[1] = 1;
            }
        }
        PairExpr::E => out.iter_mut().for_each(|x| *x = 1),
        PairExpr::PAdic(b) => {
            if max_degree >= 1 {
                out[1] = b.n as u64;
            }
            if max_degree >= 2 {
                out[2] = 1;
            }
        }
        PairExpr::FreeProd(fs) => {
            for f in fs {
                let d = dims_closed_form(f, max_degree);
                for i in 1..=max_degree {
                    out[i] += d[i];
                }
            }
        }
        PairExpr::Ext(m, base) => {
            let d = dims_closed_form(base, max_degree);
            for (i, slot) in out.iter_mut().enumerate() {
                *slot = (0..=i).map(|j| binomial(*m as u64, j as u64) * d[i - j]).sum();
            }
        }
    }
    out
}

/// Outcome of the Demuškin test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DemuskinVerdict {
    pub is_demuskin: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<DemuskinCase>,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "ser_f")]
    pub f: Option<FExponent>,
}

fn ser_f<S: serde::Serializer>(f: &Option<FExponent>, s: S) -> Result<S::Ok, S::Error> {
    match f {
        Some(FExponent::Finite(k)) => s.serialize_u32(*k),
        Some(FExponent::Infinite) => s.serialize_str("inf"),
        None => s.serialize_none(),
    }
}

impl DemuskinVerdict {
    fn no() -> Self {
        DemuskinVerdict { is_demuskin: false, n: None, q: None, case: None, f: None }
    }
}

pub fn is_demuskin(e: &PairExpr, amb: &Ambient) -> Result<bool, CohomologyError> {
    let ga = build_cohomology(e, amb, 2)?;
    Ok(match ga.scalar_gram() {
        Some(g) => g.rank() == ga.dim(1),
        None => false,
    })
}

/// Decides the Demuškin property from `H^{≤2}` and reads off `(n, q, case)`
/// from the rank, the θ-image and its square index.
pub fn classify_demuskin(e: &PairExpr, amb: &Ambient) -> Result<DemuskinVerdict, CohomologyError> {
    if !is_demuskin(e, amb)? {
        return Ok(DemuskinVerdict::no());
    }
    let n = e.rank();
    let inv = e.theta_image(amb)?;
    let q = inv.q_u64().ok_or(CohomologyError::Unit(UnitError::PrecisionExhausted { precision: amb.precision }))?;
    let case = if n < 2 {
        None
    } else if q != 2 {
        Some(DemuskinCase::I)
    } else if n % 2 == 1 {
        Some(DemuskinCase::II)
    } else if inv.square_index == 4 {
        Some(DemuskinCase::IV)
    } else {
        Some(DemuskinCase::III)
    };
    let f = match e {
        PairExpr::PAdic(b) => b.f,
        _ => None,
    };
    Ok(DemuskinVerdict { is_demuskin: true, n: Some(n), q: Some(q), case, f })
}

/// Logarithmic level: least `m` with `ε^m = 0`, or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LogLevel {
    Finite(u32),
    Infinite,
}

impl LogLevel {
    pub fn to_json(self) -> Value {
        match self {
            LogLevel::Finite(k) => json!(k),
            LogLevel::Infinite => json!("inf"),
        }
    }
}

/// Logarithmic level by recursion on the expression tree (1 for odd p).
pub fn log_level_recursive(e: &PairExpr, amb: &Ambient) -> LogLevel {
    if amb.p != 2 {
        return LogLevel::Finite(1);
    }
    match e {
        PairExpr::Trivial => LogLevel::Finite(1),
        PairExpr::Z(a) => LogLevel::Finite(1 + a.epsilon() as u32),
        PairExpr::E => LogLevel::Infinite,
        PairExpr::PAdic(b) => LogLevel::Finite(b.level.unwrap_or(1).trailing_zeros() + 1),
        PairExpr::FreeProd(fs) => {
            fs.iter().map(|f| log_level_recursive(f, amb)).max().unwrap_or(LogLevel::Finite(1))
        }
        PairExpr::Ext(_, base) => log_level_recursive(base, amb),
    }
}

/// Result of scanning cup powers of ε up to the truncation degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectLogLevel {
    Exact(u32),
    Above(u32),
}

impl DirectLogLevel {
    pub fn to_json(self) -> Value {
        match self {
            DirectLogLevel::Exact(k) => json!(k),
            DirectLogLevel::Above(d) => json!(format!(">{d}")),
        }
    }
}

/// Smallest `m ≤ D` with `ε^m = 0` in `H^{≤D}`.
pub fn log_level_direct(e: &PairExpr, amb: &Ambient, max_degree: usize) -> Result<DirectLogLevel, CohomologyError> {
    let ga = build_cohomology(e, amb, max_degree)?;
    Ok(log_level_in(&ga))
}

pub fn log_level_in(ga: &GradedAlgebra) -> DirectLogLevel {
    let mut v = ga.eps_sparse().clone();
    for m in 1..=ga.max_degree() {
        if v.is_empty() {
            return DirectLogLevel::Exact(m as u32);
        }
        if m < ga.max_degree() {
            v = ga.mul(&v, ga.eps_sparse());
        }
    }
    DirectLogLevel::Above(ga.max_degree() as u32)
}
