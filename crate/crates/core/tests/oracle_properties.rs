mod common;

use proptest::prelude::*;
use rand::Rng;

use cyclopair::oracle::{self, CentralExtension, FiniteGroup};

fn builtins() -> Vec<FiniteGroup> {
    let c = |n| FiniteGroup::cyclic(n).unwrap();
    let d = |n| FiniteGroup::dihedral(n).unwrap();
    vec![
        c(1),
        c(2),
        c(3),
        c(4),
        c(6),
        c(8),
        c(9),
        c(12),
        c(16),
        d(4),
        d(6),
        d(8),
        d(12),
        d(16),
        FiniteGroup::klein4(),
        FiniteGroup::direct_product(&c(2), &c(4)).unwrap(),
        FiniteGroup::direct_product(&c(3), &c(3)).unwrap(),
        FiniteGroup::direct_product(&FiniteGroup::klein4(), &c(2)).unwrap(),
        FiniteGroup::direct_product(&d(8), &c(2)).unwrap(),
    ]
}

#[test]
fn h1_matches_abelianization() {
    for g in builtins() {
        for p in [2, 3] {
            assert_eq!(
                oracle::h1_dim(&g, p).unwrap(),
                oracle::h1_dim_via_abelianization(&g, p).unwrap(),
                "order {} p {p}",
                g.order()
            );
        }
    }
}

#[test]
fn kunneth_spot_check() {
    let c = |n| FiniteGroup::cyclic(n).unwrap();
    let pairs = [(c(2), c(2)), (c(2), c(4)), (c(4), c(4)), (c(3), c(3)), (c(2), c(3)), (FiniteGroup::klein4(), c(2))];
    for (g, h) in &pairs {
        let gh = FiniteGroup::direct_product(g, h).unwrap();
        for p in [2, 3] {
            let lhs = oracle::h2_dim(&gh, p).unwrap();
            let rhs = oracle::h2_dim(g, p).unwrap()
                + oracle::h1_dim(g, p).unwrap() * oracle::h1_dim(h, p).unwrap()
                + oracle::h2_dim(h, p).unwrap();
            assert_eq!(lhs, rhs, "|G|={} |H|={} p={p}", g.order(), h.order());
        }
    }
}

#[test]
fn json_table_round_trip() {
    let d4 = FiniteGroup::dihedral(8).unwrap();
    let text = serde_json::to_string(&d4.to_table()).unwrap();
    assert_eq!(FiniteGroup::from_spec(&text).unwrap(), d4);
}

fn combine(p: u64, basis: &[Vec<u64>], coeffs: &[u64]) -> Vec<u64> {
    let n = basis.first().map_or(0, Vec::len);
    (0..n).map(|x| basis.iter().zip(coeffs).map(|(b, c)| b[x] * c).sum::<u64>() % p).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cup_is_bilinear_and_graded_commutative(which in 0usize..19, odd in any::<bool>(), seed in any::<u64>()) {
        let p = if odd { 3 } else { 2 };
        let g = &builtins()[which];
        let basis = oracle::h1_basis(g, p).unwrap();
        prop_assume!(!basis.is_empty());
        let h = oracle::h2(g, p).unwrap();
        let mut r = common::rng(seed);
        let mut random_hom = || {
            let c: Vec<u64> = (0..basis.len()).map(|_| r.gen_range(0..p)).collect();
            combine(p, &basis, &c)
        };
        let (a, a2, b) = (random_hom(), random_hom(), random_hom());
        let sum: Vec<u64> = a.iter().zip(&a2).map(|(x, y)| (x + y) % p).collect();
        let cup = |x: &[u64], y: &[u64]| oracle::cup_h1h1(g, &h, x, y).unwrap();
        let left: Vec<u64> = cup(&a, &b).iter().zip(cup(&a2, &b)).map(|(x, y)| (x + y) % p).collect();
        prop_assert_eq!(cup(&sum, &b), left);
        let swapped: Vec<u64> = cup(&b, &a).iter().map(|&x| (p - x) % p).collect();
        prop_assert_eq!(cup(&a, &b), swapped);
    }

    #[test]
    fn extension_class_ignores_section(seed in any::<u64>(), which in 0usize..3) {
        let c = |n| FiniteGroup::cyclic(n).unwrap();
        let d4 = FiniteGroup::dihedral(8).unwrap();
        let v4 = FiniteGroup::klein4();
        let (z2, z4, c8) = (c(2), c(4), c(8));
        let d4_map: Vec<usize> = (0..8).map(|x| 2 * (x % 4 % 2) + x / 4).collect();
        let c8_map: Vec<usize> = (0..8).map(|x| x % 4).collect();
        let z4_map = vec![0, 1, 0, 1];
        let ext = match which {
            0 => CentralExtension { total: &d4, quotient: &v4, kernel_generator: 2, map: &d4_map },
            1 => CentralExtension { total: &c8, quotient: &z4, kernel_generator: 4, map: &c8_map },
            _ => CentralExtension { total: &z4, quotient: &z2, kernel_generator: 2, map: &z4_map },
        };
        let h = oracle::h2(ext.quotient, 2).unwrap();
        let reference = oracle::extension_class(&ext, &h, None).unwrap();
        let mut r = common::rng(seed);
        let section: Vec<usize> = ext
            .fibres()
            .iter()
            .enumerate()
            .map(|(q, f)| if q == 0 { 0 } else { f[r.gen_range(0..f.len())] })
            .collect();
        prop_assert_eq!(oracle::extension_class(&ext, &h, Some(&section)).unwrap(), reference);
    }
}

#[test]
fn cyclic_extensions_are_nonzero() {
    let c8 = FiniteGroup::cyclic(8).unwrap();
    let z4 = FiniteGroup::cyclic(4).unwrap();
    let map: Vec<usize> = (0..8).map(|x| x % 4).collect();
    let ext = CentralExtension { total: &c8, quotient: &z4, kernel_generator: 4, map: &map };
    let h = oracle::h2(&z4, 2).unwrap();
    assert_eq!(oracle::extension_class(&ext, &h, None).unwrap(), vec![1]);
    // but the reduction squared still vanishes on Z/4
    assert_eq!(oracle::cup_h1h1(&z4, &h, &[0, 1, 0, 1], &[0, 1, 0, 1]).unwrap(), vec![0]);
}
