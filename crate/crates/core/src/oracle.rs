//! Brute-force `F_p` cohomology of small finite groups with trivial action:
//! `H^1`, `H^2` from normalized inhomogeneous cochains, cup products of
//! degree-one classes and classes of central extensions.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{fp, RowEchelon};
use crate::units::is_prime;

/// Default bound on the group order.
pub const MAX_ORDER: usize = 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("group order {n} exceeds the bound {max}")]
    OrderBound { n: usize, max: usize },
    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("not a homomorphism: {0}")]
    NotAHomomorphism(String),
    #[error("kernel generator is not central")]
    KernelNotCentral,
    #[error("invalid extension data: {0}")]
    InvalidExtension(String),
    #[error("cannot parse group '{0}'")]
    BadGroupSpec(String),
}

/// A finite group given by its multiplication table; element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    labels: Vec<String>,
}

/// JSON form of a group: `{"table": [[...]], "labels": [...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupTable {
    pub table: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>, labels: Option<Vec<String>>) -> Result<Self, OracleError> {
        Self::from_table_bounded(table, labels, MAX_ORDER)
    }

    pub fn from_table_bounded(
        table: Vec<Vec<usize>>,
        labels: Option<Vec<String>>,
        max: usize,
    ) -> Result<Self, OracleError> {
        let n = table.len();
        if n == 0 {
            return Err(OracleError::InvalidTable("empty table".into()));
        }
        if n > max {
            return Err(OracleError::OrderBound { n, max });
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(OracleError::InvalidTable(format!("row {i} has length {}", row.len())));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(OracleError::InvalidTable(format!("entry {bad} in row {i} is out of range")));
            }
        }
        for g in 0..n {
            if table[0][g] != g || table[g][0] != g {
                return Err(OracleError::InvalidTable(format!("element 0 is not an identity for {g}")));
            }
        }
        let mut inverse = vec![0; n];
        for g in 0..n {
            let Some(h) = (0..n).find(|&h| table[g][h] == 0) else {
                return Err(OracleError::InvalidTable(format!("element {g} has no inverse")));
            };
            if table[h][g] != 0 {
                return Err(OracleError::InvalidTable(format!("element {g} has no two-sided inverse")));
            }
            inverse[g] = h;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(OracleError::InvalidTable(format!("({a}*{b})*{c} != {a}*({b}*{c})")));
                    }
                }
            }
        }
        let labels = match labels {
            Some(l) if l.len() != n => {
                return Err(OracleError::InvalidTable(format!("{} labels for {n} elements", l.len())));
            }
            Some(l) => l,
            None => (0..n).map(|i| i.to_string()).collect(),
        };
        Ok(FiniteGroup { table, inverse, labels })
    }

    pub fn cyclic(n: usize) -> Result<Self, OracleError> {
        if n == 0 {
            return Err(OracleError::InvalidTable("cyclic group of order 0".into()));
        }
        if n > MAX_ORDER {
            return Err(OracleError::OrderBound { n, max: MAX_ORDER });
        }
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let labels = (0..n)
            .map(|k| match k {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            })
            .collect();
        Self::from_table(table, Some(labels))
    }

    /// The dihedral group of the given order `2n`, with `r^i s^j` stored at
    /// index `i + n j`.
    pub fn dihedral(order: usize) -> Result<Self, OracleError> {
        if order < 2 || order % 2 != 0 {
            return Err(OracleError::InvalidTable(format!("dihedral order {order} must be even and positive")));
        }
        if order > MAX_ORDER {
            return Err(OracleError::OrderBound { n: order, max: MAX_ORDER });
        }
        let n = order / 2;
        let idx = |i: usize, j: usize| i % n + n * (j % 2);
        let mut table = vec![vec![0; order]; order];
        for (x, row) in table.iter_mut().enumerate() {
            let (a, b) = (x % n, x / n);
            for (y, out) in row.iter_mut().enumerate() {
                let (c, d) = (y % n, y / n);
                // r^a s^b r^c s^d = r^(a ± c) s^(b+d)
                let i = if b == 0 { a + c } else { a + n - c };
                *out = idx(i, b + d);
            }
        }
        let labels = (0..order)
            .map(|x| {
                let (i, j) = (x % n, x / n);
                let r = match i {
                    0 => String::new(),
                    1 => "r".to_string(),
                    _ => format!("r^{i}"),
                };
                match (r.is_empty(), j) {
                    (true, 0) => "1".to_string(),
                    (_, 0) => r,
                    (_, _) => format!("{r}s"),
                }
            })
            .collect();
        Self::from_table(table, Some(labels))
    }

    pub fn klein4() -> Self {
        let c2 = Self::cyclic(2).expect("Z/2");
        Self::direct_product(&c2, &c2).expect("order 4")
    }

    /// `G × H` with `(g, h)` stored at index `g |H| + h`.
    pub fn direct_product(g: &Self, h: &Self) -> Result<Self, OracleError> {
        let (n, m) = (g.order(), h.order());
        if n * m > MAX_ORDER {
            return Err(OracleError::OrderBound { n: n * m, max: MAX_ORDER });
        }
        let table = (0..n * m)
            .map(|x| (0..n * m).map(|y| g.mul(x / m, y / m) * m + h.mul(x % m, y % m)).collect())
            .collect();
        let labels = (0..n * m).map(|x| format!("({},{})", g.label(x / m), h.label(x % m))).collect();
        Self::from_table(table, Some(labels))
    }

    /// Parses `cyclic(n)`, `dihedral(2n)`, `klein4`, `product(G,H)` or a
    /// JSON table.
    pub fn from_spec(text: &str) -> Result<Self, OracleError> {
        let t = text.trim();
        if t.starts_with('{') {
            let gt: GroupTable =
                serde_json::from_str(t).map_err(|e| OracleError::BadGroupSpec(format!("{t}: {e}")))?;
            return Self::from_table(gt.table, gt.labels);
        }
        let bad = || OracleError::BadGroupSpec(t.to_string());
        if t == "klein4" {
            return Ok(Self::klein4());
        }
        let open = t.find('(').ok_or_else(bad)?;
        let inner = t[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let number = || inner.trim().parse::<usize>().map_err(|_| bad());
        match &t[..open] {
            "cyclic" => Self::cyclic(number()?),
            "dihedral" => Self::dihedral(number()?),
            "product" => {
                // split at the top-level comma
                let mut depth = 0i32;
                let mut split = None;
                for (i, c) in inner.char_indices() {
                    match c {
                        '(' | '{' | '[' => depth += 1,
                        ')' | '}' | ']' => depth -= 1,
                        ',' if depth == 0 => {
                            split = Some(i);
                            break;
                        }
                        _ => {}
                    }
                }
                let i = split.ok_or_else(bad)?;
                Self::direct_product(&Self::from_spec(&inner[..i])?, &Self::from_spec(&inner[i + 1..])?)
            }
            _ => Err(bad()),
        }
    }

    pub fn to_table(&self) -> GroupTable {
        GroupTable { table: self.table.clone(), labels: Some(self.labels.clone()) }
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn pow(&self, a: usize, k: usize) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_central(&self, a: usize) -> bool {
        (0..self.order()).all(|g| self.mul(a, g) == self.mul(g, a))
    }

    /// Subgroup generated by `gens`, as a sorted list.
    pub fn subgroup(&self, gens: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let gens: Vec<usize> = gens.into_iter().collect();
        let mut seen = BTreeSet::from([0usize]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(x) = queue.pop_front() {
            for &g in &gens {
                let y = self.mul(x, g);
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Checks that `map` (indexed by elements) is a homomorphism into `target`.
    pub fn check_hom(&self, target: &Self, map: &[usize]) -> Result<(), OracleError> {
        if map.len() != self.order() {
            return Err(OracleError::NotAHomomorphism(format!(
                "map has {} values for a group of order {}",
                map.len(),
                self.order()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&y| y >= target.order()) {
            return Err(OracleError::NotAHomomorphism(format!("value {bad} is not an element of the target")));
        }
        for a in 0..self.order() {
            for b in 0..self.order() {
                if map[self.mul(a, b)] != target.mul(map[a], map[b]) {
                    return Err(OracleError::NotAHomomorphism(format!(
                        "f({a}*{b}) != f({a})*f({b})"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_prime(p: u64) -> Result<(), OracleError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(OracleError::NotPrime(p))
    }
}

/// Basis of `Hom(G, F_p)`, each homomorphism listed by its values.
pub fn h1_basis(g: &FiniteGroup, p: u64) -> Result<Vec<Vec<u64>>, OracleError> {
    check_prime(p)?;
    let n = g.order();
    // unknowns f(1..n); f(0) = 0
    let mut ech = RowEchelon::new(p, n - 1);
    for a in 1..n {
        for b in 1..n {
            let mut row = vec![0u64; n - 1];
            let mut add = |x: usize, c: u64| {
                if x > 0 {
                    row[x - 1] = fp::add(row[x - 1], c, p);
                }
            };
            add(g.mul(a, b), 1);
            add(a, p - 1);
            add(b, p - 1);
            ech.insert(row);
        }
    }
    Ok(ech
        .kernel_basis()
        .into_iter()
        .map(|k| std::iter::once(0).chain(k).collect())
        .collect())
}

pub fn h1_dim(g: &FiniteGroup, p: u64) -> Result<usize, OracleError> {
    Ok(h1_basis(g, p)?.len())
}

/// `dim Hom(G, F_p)` as the rank of `G / [G,G] G^p`, without solving any
/// linear system.
pub fn h1_dim_via_abelianization(g: &FiniteGroup, p: u64) -> Result<usize, OracleError> {
    check_prime(p)?;
    let n = g.order();
    let mut gens = Vec::new();
    for a in 0..n {
        gens.push(g.pow(a, p as usize));
        for b in 0..n {
            gens.push(g.mul(g.mul(a, b), g.mul(g.inv(a), g.inv(b))));
        }
    }
    gens.sort_unstable();
    gens.dedup();
    let frattini = g.subgroup(gens).len();
    let mut index = n / frattini;
    let mut k = 0;
    while index > 1 {
        debug_assert_eq!(index as u64 % p, 0);
        index /= p as usize;
        k += 1;
    }
    Ok(k)
}

/// Second cohomology with its chosen basis, able to express cocycles in
/// that basis.
#[derive(Debug, Clone)]
pub struct H2 {
    p: u64,
    n: usize,
    cocycle_equations: RowEchelon,
    /// `B^2` together with the basis cocycles, tagged in extra columns.
    tagged: RowEchelon,
    basis: Vec<Vec<u64>>,
}

impl H2 {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// Basis cocycles as normalized cochains (`(n-1)^2` values).
    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn cochain_len(&self) -> usize {
        (self.n - 1) * (self.n - 1)
    }

    /// Packs a full `n × n` cochain, which must vanish on the identity.
    pub fn pack(&self, c: &[Vec<u64>]) -> Option<Vec<u64>> {
        let n = self.n;
        for a in 0..n {
            if c[0][a] % self.p != 0 || c[a][0] % self.p != 0 {
                return None;
            }
        }
        Some((1..n).flat_map(|a| (1..n).map(move |b| c[a][b] % self.p)).collect())
    }

    pub fn is_cocycle(&self, c: &[u64]) -> bool {
        // the cocycle equations are stored as rows; c must be orthogonal to all
        self.cocycle_equations.basis().iter().all(|row| {
            row.iter().zip(c).fold(0, |acc, (&r, &x)| fp::add(acc, fp::mul(r, x, self.p), self.p)) == 0
        })
    }

    /// Coordinates of the class of a normalized cocycle.
    pub fn coordinates(&self, c: &[u64]) -> Option<Vec<u64>> {
        if c.len() != self.cochain_len() || !self.is_cocycle(c) {
            return None;
        }
        let mut v = c.to_vec();
        v.resize(self.cochain_len() + self.dim(), 0);
        let r = self.tagged.reduce(v);
        debug_assert!(r[..self.cochain_len()].iter().all(|&x| x == 0));
        Some(r[self.cochain_len()..].iter().map(|&x| fp::neg(x, self.p)).collect())
    }
}

/// `δf` for the indicator `f` of the element `x`:
/// `δf(a,b) = f(a) + f(b) - f(ab)`.
fn coboundary_of_delta(g: &FiniteGroup, p: u64, x: usize) -> Vec<u64> {
    let n = g.order();
    let mut row = Vec::with_capacity((n - 1) * (n - 1));
    for a in 1..n {
        for b in 1..n {
            let hits = (a == x) as u64 + (b == x) as u64;
            row.push(fp::sub(hits % p, (g.mul(a, b) == x) as u64, p));
        }
    }
    row
}

/// Builds `H^2(G, F_p)` from normalized cochains.
pub fn h2(g: &FiniteGroup, p: u64) -> Result<H2, OracleError> {
    check_prime(p)?;
    let n = g.order();
    if n > MAX_ORDER {
        return Err(OracleError::OrderBound { n, max: MAX_ORDER });
    }
    let m = n - 1;
    let len = m * m;
    let at = |a: usize, b: usize| (a > 0 && b > 0).then(|| (a - 1) * m + (b - 1));
    // δc(a,b,c) = c(b,c) - c(ab,c) + c(a,bc) - c(a,b)
    let mut eqs = RowEchelon::new(p, len);
    for a in 1..n {
        for b in 1..n {
            for c in 1..n {
                let mut row = vec![0u64; len];
                let terms = [
                    (at(b, c), 1),
                    (at(g.mul(a, b), c), p - 1),
                    (at(a, g.mul(b, c)), 1),
                    (at(a, b), p - 1),
                ];
                for (i, coef) in terms {
                    if let Some(i) = i {
                        row[i] = fp::add(row[i], coef, p);
                    }
                }
                if row.iter().any(|&x| x != 0) {
                    eqs.insert(row);
                }
            }
        }
    }
    let cocycles = eqs.kernel_basis();
    let mut boundaries = RowEchelon::new(p, len);
    for x in 1..n {
        boundaries.insert(coboundary_of_delta(g, p, x));
    }
    let mut basis = Vec::new();
    for z in cocycles {
        if boundaries.insert(z.clone()) {
            basis.push(z);
        }
    }
    let k = basis.len();
    let mut tagged = RowEchelon::new(p, len + k);
    for x in 1..n {
        let mut v = coboundary_of_delta(g, p, x);
        v.resize(len + k, 0);
        tagged.insert(v);
    }
    for (j, z) in basis.iter().enumerate() {
        let mut v = z.clone();
        v.resize(len + k, 0);
        v[len + j] = 1;
        let fresh = tagged.insert(v);
        debug_assert!(fresh);
    }
    Ok(H2 { p, n, cocycle_equations: eqs, tagged, basis })
}

pub fn h2_dim(g: &FiniteGroup, p: u64) -> Result<usize, OracleError> {
    Ok(h2(g, p)?.dim())
}

fn check_fp_hom(g: &FiniteGroup, p: u64, phi: &[u64], name: &str) -> Result<(), OracleError> {
    if phi.len() != g.order() {
        return Err(OracleError::NotAHomomorphism(format!(
            "{name} has {} values for a group of order {}",
            phi.len(),
            g.order()
        )));
    }
    for a in 0..g.order() {
        for b in 0..g.order() {
            if phi[g.mul(a, b)] % p != fp::add(phi[a] % p, phi[b] % p, p) {
                return Err(OracleError::NotAHomomorphism(format!(
                    "{name}({}*{}) != {name}({}) + {name}({})",
                    g.label(a),
                    g.label(b),
                    g.label(a),
                    g.label(b)
                )));
            }
        }
    }
    Ok(())
}

/// Class of `(a, b) ↦ φ(a) ψ(b)` in the basis of `h2`.
pub fn cup_h1h1(g: &FiniteGroup, h2: &H2, phi: &[u64], psi: &[u64]) -> Result<Vec<u64>, OracleError> {
    let p = h2.p;
    check_fp_hom(g, p, phi, "phi")?;
    check_fp_hom(g, p, psi, "psi")?;
    let n = g.order();
    let c: Vec<u64> =
        (1..n).flat_map(|a| (1..n).map(move |b| fp::mul(phi[a] % p, psi[b] % p, p))).collect();
    Ok(h2.coordinates(&c).expect("a cup product of homomorphisms is a cocycle"))
}

/// A central extension `1 → ⟨z⟩ → total → quotient → 1` with `⟨z⟩` of
/// prime order `p`.
#[derive(Debug, Clone)]
pub struct CentralExtension<'a> {
    pub total: &'a FiniteGroup,
    pub quotient: &'a FiniteGroup,
    pub kernel_generator: usize,
    /// Image of each element of `total`.
    pub map: &'a [usize],
}

impl CentralExtension<'_> {
    pub fn validate(&self) -> Result<u64, OracleError> {
        let z = self.kernel_generator;
        if z >= self.total.order() {
            return Err(OracleError::InvalidExtension(format!("kernel generator {z} is not an element")));
        }
        let p = self.total.element_order(z) as u64;
        if !is_prime(p) {
            return Err(OracleError::InvalidExtension(format!("kernel generator has order {p}, not a prime")));
        }
        if !self.total.is_central(z) {
            return Err(OracleError::KernelNotCentral);
        }
        self.total.check_hom(self.quotient, self.map)?;
        let image: BTreeSet<usize> = self.map.iter().copied().collect();
        if image.len() != self.quotient.order() {
            return Err(OracleError::InvalidExtension("map is not surjective".into()));
        }
        let kernel: Vec<usize> = (0..self.total.order()).filter(|&x| self.map[x] == 0).collect();
        if kernel != self.total.subgroup([z]) {
            return Err(OracleError::InvalidExtension("kernel is not generated by the given element".into()));
        }
        Ok(p)
    }

    /// The default section: the smallest preimage of each element.
    pub fn default_section(&self) -> Vec<usize> {
        (0..self.quotient.order())
            .map(|q| (0..self.total.order()).find(|&x| self.map[x] == q).expect("surjective"))
            .collect()
    }

    /// All preimages of each quotient element.
    pub fn fibres(&self) -> Vec<Vec<usize>> {
        let mut f = vec![Vec::new(); self.quotient.order()];
        for x in 0..self.total.order() {
            f[self.map[x]].push(x);
        }
        f
    }

    /// Factor set `s(x)s(y) = z^c(x,y) s(xy)` as a normalized cochain. The
    /// section must send the identity to the identity.
    pub fn factor_set(&self, section: &[usize]) -> Result<Vec<u64>, OracleError> {
        let (t, q) = (self.total, self.quotient);
        if section.len() != q.order() || section.iter().enumerate().any(|(x, &s)| s >= t.order() || self.map[s] != x) {
            return Err(OracleError::InvalidExtension("section is not a right inverse of the map".into()));
        }
        if section[0] != 0 {
            return Err(OracleError::InvalidExtension("section must send the identity to the identity".into()));
        }
        let z = self.kernel_generator;
        let p = t.element_order(z);
        let powers: Vec<usize> = (0..p).map(|k| t.pow(z, k)).collect();
        let n = q.order();
        let mut out = Vec::with_capacity((n - 1) * (n - 1));
        for a in 1..n {
            for b in 1..n {
                let lhs = t.mul(section[a], section[b]);
                let k = t.mul(lhs, t.inv(section[q.mul(a, b)]));
                let c = powers.iter().position(|&w| w == k).expect("lands in the kernel");
                out.push(c as u64);
            }
        }
        Ok(out)
    }
}

/// Class of a central extension in the basis of `H^2(quotient, F_p)`,
/// computed with the given section (or the default one).
pub fn extension_class(
    ext: &CentralExtension<'_>,
    h2: &H2,
    section: Option<&[usize]>,
) -> Result<Vec<u64>, OracleError> {
    let p = ext.validate()?;
    if p != h2.p || ext.quotient.order() != h2.n {
        return Err(OracleError::InvalidExtension("cohomology of the wrong group or prime".into()));
    }
    let default;
    let section = match section {
        Some(s) => s,
        None => {
            default = ext.default_section();
            &default
        }
    };
    let c = ext.factor_set(section)?;
    Ok(h2.coordinates(&c).expect("factor sets are cocycles"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_and_bounds() {
        let d4 = FiniteGroup::dihedral(8).unwrap();
        assert_eq!(d4.order(), 8);
        let (r, s) = (d4.index_of("r").unwrap(), d4.index_of("s").unwrap());
        assert_eq!(d4.element_order(r), 4);
        assert_eq!(d4.element_order(s), 2);
        assert_eq!(d4.element_order(d4.mul(r, s)), 2);
        assert!(FiniteGroup::cyclic(33).is_err());
        assert_eq!(FiniteGroup::from_spec("product(cyclic(2),cyclic(2))").unwrap(), FiniteGroup::klein4());
        let bad = vec![vec![0, 1], vec![1, 1]];
        assert!(FiniteGroup::from_table(bad, None).is_err());
    }

    #[test]
    fn small_dimensions() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let d4 = FiniteGroup::dihedral(8).unwrap();
        assert_eq!(h2_dim(&z2, 2).unwrap(), 1);
        assert_eq!(h2_dim(&z4, 2).unwrap(), 1);
        assert_eq!(h2_dim(&d4, 2).unwrap(), 3);
        assert_eq!(h2_dim(&z4, 3).unwrap(), 0);
        assert_eq!(h1_dim(&d4, 2).unwrap(), 2);
        assert_eq!(h1_dim_via_abelianization(&d4, 2).unwrap(), 2);
    }

    #[test]
    fn cups_on_cyclic_groups() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let h = h2(&z2, 2).unwrap();
        assert_eq!(cup_h1h1(&z2, &h, &[0, 1], &[0, 1]).unwrap(), vec![1]);
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let h = h2(&z4, 2).unwrap();
        let red = [0, 1, 0, 1];
        assert_eq!(cup_h1h1(&z4, &h, &red, &red).unwrap(), vec![0]);
        assert!(matches!(cup_h1h1(&z4, &h, &[0, 1, 1, 1], &red), Err(OracleError::NotAHomomorphism(_))));
    }

    #[test]
    fn z4_extension_is_the_square() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let z4 = FiniteGroup::cyclic(4).unwrap();
        let h = h2(&z2, 2).unwrap();
        let ext = CentralExtension { total: &z4, quotient: &z2, kernel_generator: 2, map: &[0, 1, 0, 1] };
        let class = extension_class(&ext, &h, None).unwrap();
        assert_eq!(class, cup_h1h1(&z2, &h, &[0, 1], &[0, 1]).unwrap());
        assert_eq!(extension_class(&ext, &h, Some(&[0, 3])).unwrap(), class);
    }

    #[test]
    fn non_central_kernel() {
        let d4 = FiniteGroup::dihedral(8).unwrap();
        let s = d4.index_of("s").unwrap();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        assert!(!d4.is_central(s));
        let map: Vec<usize> = (0..8).map(|x| x % 4 % 2).collect();
        let h = h2(&z2, 2).unwrap();
        let ext = CentralExtension { total: &d4, quotient: &z2, kernel_generator: s, map: &map };
        assert_eq!(extension_class(&ext, &h, None), Err(OracleError::KernelNotCentral));
    }

    #[test]
    fn dihedral_identity() {
        let d4 = FiniteGroup::dihedral(8).unwrap();
        let hd = h2(&d4, 2).unwrap();
        // r^i s^j lives at i + 4j
        let beta: Vec<u64> = (0..8).map(|x| (x % 4 % 2) as u64).collect();
        let eps: Vec<u64> = (0..8).map(|x| (x / 4) as u64).collect();
        let sum: Vec<u64> = beta.iter().zip(&eps).map(|(a, b)| (a + b) % 2).collect();
        assert_eq!(cup_h1h1(&d4, &hd, &beta, &sum).unwrap(), vec![0; 3]);
        assert_ne!(cup_h1h1(&d4, &hd, &beta, &beta).unwrap(), vec![0; 3]);

        // D_4 / <r^2> = (Z/2)^2, with (a, b) at 2a + b
        let v4 = FiniteGroup::klein4();
        let hv = h2(&v4, 2).unwrap();
        let map: Vec<usize> = (0..8).map(|x| 2 * (x % 4 % 2) + x / 4).collect();
        let ext = CentralExtension { total: &d4, quotient: &v4, kernel_generator: 2, map: &map };
        let vb = [0, 0, 1, 1];
        let vsum = [0, 1, 1, 0];
        let expected = cup_h1h1(&v4, &hv, &vb, &vsum).unwrap();
        assert_ne!(expected, vec![0; 3]);
        assert_eq!(extension_class(&ext, &hv, None).unwrap(), expected);
        let mut s = ext.default_section();
        for (q, fibre) in ext.fibres().iter().enumerate().skip(1) {
            s[q] = fibre[1];
            assert_eq!(extension_class(&ext, &hv, Some(&s)).unwrap(), expected);
        }
    }

    #[test]
    fn split_extension_is_zero() {
        let v4 = FiniteGroup::klein4();
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let h = h2(&z2, 2).unwrap();
        let ext = CentralExtension { total: &v4, quotient: &z2, kernel_generator: 1, map: &[0, 0, 1, 1] };
        assert_eq!(extension_class(&ext, &h, None).unwrap(), vec![0]);
    }

    #[test]
    fn largest_allowed_order() {
        let g = FiniteGroup::dihedral(32).unwrap();
        assert_eq!(h2_dim(&g, 3).unwrap(), 0);
    }
}
