#![allow(dead_code)]

use cyclopair::field::{parse_element, FieldElement, FieldModel};
use cyclopair::{parse_pair, Ambient, PairExpr};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn principal_units(p: u64) -> &'static [i64] {
    match p {
        2 => &[1, -1, 3, -3, 5, -5, 7, 9, -7, 17, 13],
        _ => &[1, 4, -2, 7, 10, -5, 28, 19],
    }
}

/// A random block as text, together with its rank.
fn random_leaf(r: &mut ChaCha8Rng, p: u64, budget: u32) -> (String, u32) {
    loop {
        match r.gen_range(0..10) {
            0 => return ("triv".into(), 0),
            1..=4 if budget >= 1 => {
                let a = principal_units(p).choose(r).unwrap();
                return (format!("Z({a})"), 1);
            }
            5 | 6 if p == 2 && budget >= 1 => return ("E".into(), 1),
            7..=9 if budget >= 3 => {
                if p == 2 {
                    let f = ["2", "3", "inf"].choose(r).unwrap();
                    let even: Vec<u32> = [4, 6, 8].into_iter().filter(|&n| n <= budget).collect();
                    let odd: Vec<u32> = [3, 5, 7].into_iter().filter(|&n| n <= budget).collect();
                    match r.gen_range(0..4) {
                        0 if !even.is_empty() => {
                            let n = even.choose(r).unwrap();
                            let q = [4, 8].choose(r).unwrap();
                            return (format!("padic(n={n},q={q})"), *n);
                        }
                        1 => {
                            let n = odd.choose(r).unwrap();
                            return (format!("padic(n={n},case=II,f={f})"), *n);
                        }
                        2 if !even.is_empty() => {
                            let n = even.choose(r).unwrap();
                            return (format!("padic(n={n},case=III,f={f})"), *n);
                        }
                        3 if !even.is_empty() => {
                            let n = even.choose(r).unwrap();
                            let f = ["2", "3"].choose(r).unwrap();
                            return (format!("padic(n={n},case=IV,f={f})"), *n);
                        }
                        _ => {}
                    }
                } else if budget >= 4 {
                    let n = [4u32, 6, 8].into_iter().filter(|&n| n <= budget).collect::<Vec<_>>();
                    let n = n.choose(r).unwrap();
                    let q = [3, 9].choose(r).unwrap();
                    return (format!("padic(n={n},q={q})"), *n);
                }
            }
            _ => {}
        }
    }
}

/// Random expression text with rank at most `budget`.
pub fn random_text(r: &mut ChaCha8Rng, p: u64, budget: u32, depth: u32) -> (String, u32) {
    let choice = if depth == 0 { 0 } else { r.gen_range(0..6) };
    match choice {
        3 | 4 if budget >= 2 => {
            let k = r.gen_range(2..=3);
            let mut parts = Vec::new();
            let mut used = 0;
            for _ in 0..k {
                let (t, rank) = random_text(r, p, budget - used, depth - 1);
                used += rank;
                parts.push(t);
            }
            (parts.join(" * "), used)
        }
        5 if budget >= 1 => {
            let m = r.gen_range(1..=budget.min(3));
            let (t, rank) = random_text(r, p, budget - m, depth - 1);
            let t = if t.contains('*') { format!("({t})") } else { t };
            (format!("ext({m}, {t})"), m + rank)
        }
        _ => random_leaf(r, p, budget),
    }
}

pub fn amb(p: u64) -> Ambient {
    Ambient::new(p, 64).unwrap()
}

/// A random expression as parsed (not normalized).
pub fn random_expr(r: &mut ChaCha8Rng, amb: &Ambient, max_rank: u32) -> PairExpr {
    let (text, _) = random_text(r, amb.p, max_rank, 3);
    let e = parse_pair(&text, amb).unwrap_or_else(|err| panic!("{text}: {err}"));
    e.validate(amb).unwrap_or_else(|err| panic!("{text}: {err}"));
    e
}

pub fn random_normalized(r: &mut ChaCha8Rng, amb: &Ambient, max_rank: u32) -> PairExpr {
    random_expr(r, amb, max_rank).normalize(amb).unwrap()
}

/// A random `Ext(m, X)` whose first cohomology has dimension at most `max_h1`.
pub fn random_ext_rooted(r: &mut ChaCha8Rng, amb: &Ambient, max_h1: u32) -> PairExpr {
    loop {
        let m = r.gen_range(1..=max_h1.min(3));
        let (t, rank) = random_text(r, amb.p, max_h1 - m, 2);
        let e = parse_pair(&format!("ext({m}, {t})"), amb).unwrap();
        let n = e.normalize(amb).unwrap();
        if matches!(n, PairExpr::Ext(..)) && m + rank <= max_h1 {
            return n;
        }
    }
}

// ---- 2-adic norm-equation oracle ----

fn is_2adic_square(x: i64) -> bool {
    if x == 0 {
        return false;
    }
    let v = x.trailing_zeros();
    v % 2 == 0 && (x >> v).rem_euclid(8) == 1
}

/// Quadratic Hilbert symbol over `Q_2` of nonzero integers, decided by
/// searching for integer `x, y` with `a x^2 + b y^2` a nonzero 2-adic square
/// (symbol trivial) or proving that `a x^2 + b y^2 = z^2` has no primitive
/// solution modulo 32 (symbol nontrivial). Returns 0 or 1.
pub fn hilbert_by_norm_search(a: i64, b: i64) -> u64 {
    for x in 0..=64i64 {
        for y in 0..=64i64 {
            if (x, y) != (0, 0) && is_2adic_square(a * x * x + b * y * y) {
                return 0;
            }
        }
    }
    let m = 32;
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                if x % 2 == 0 && y % 2 == 0 && z % 2 == 0 {
                    continue;
                }
                if (a * x * x + b * y * y - z * z).rem_euclid(m) == 0 {
                    panic!("norm search undecided for ({a}, {b})");
                }
            }
        }
    }
    1
}

// ---- direct tame-residue oracle over Laurent(F_q, t) ----

pub fn laurent_over(q: u32, p: u64, precision: u32) -> FieldModel {
    FieldModel::laurent(FieldModel::finite_field(p, q).unwrap(), "t", precision).unwrap()
}

/// A random nonzero constant, as a power of the primitive element.
fn base_constant(q: u32, r: &mut ChaCha8Rng) -> String {
    format!("g^{}", r.gen_range(0..q - 1))
}

/// A random nonzero Laurent series text over `F_q`.
pub fn random_series_text(q: u32, r: &mut ChaCha8Rng) -> String {
    let v = r.gen_range(-3i64..=3);
    let terms = r.gen_range(1..=3);
    let mut parts = Vec::new();
    for i in 0..terms {
        let c = base_constant(q, r);
        let e = v + i as i64;
        parts.push(format!("{c}*t^{e}"));
    }
    parts.join(" + ")
}

pub fn element(model: &FieldModel, text: &str) -> FieldElement {
    parse_element(model, text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

fn valuation(x: &FieldElement) -> i64 {
    match x {
        FieldElement::Series(s) => s.val,
        other => panic!("not a series: {other:?}"),
    }
}

/// Class of `(-1)^{v(a)v(b)} a^{v(b)} b^{-v(a)}` in `F_q^×/(F_q^×)^p`,
/// computed with series arithmetic and a table of p-th powers of `F_q`.
pub fn tame_symbol_direct(model: &FieldModel, a: &FieldElement, b: &FieldElement) -> u64 {
    let p = model.p();
    let (va, vb) = (valuation(a), valuation(b));
    let mut x = model.mul(&model.pow(a, vb).unwrap(), &model.pow(b, -va).unwrap());
    if (va * vb).rem_euclid(2) == 1 {
        x = model.neg(&x);
    }
    let FieldElement::Series(s) = &x else { panic!("series expected") };
    assert_eq!(s.val, 0, "tame combination is a unit");
    let c = s.coeffs[0].clone();
    let base = model.ground().clone();
    let nonzero: Vec<FieldElement> = base.sample_elements(usize::MAX).0;
    let pth: Vec<FieldElement> = nonzero.iter().map(|y| base.pow(y, p as i64).unwrap()).collect();
    let g = base.generator_element().unwrap();
    for k in 0..p {
        let shifted = base.mul(&c, &base.pow(&g, -(k as i64)).unwrap());
        if pth.contains(&shifted) {
            return k;
        }
    }
    unreachable!("some shift is a p-th power")
}
