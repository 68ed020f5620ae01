//! Structural invariants and oracle equivalences, randomised with proptest.

use bp2split::browngitler::{brown_gitler, w_family, WFamily};
use bp2split::ext::{cbar_block, ext_general, ext_koszul, residue_field_count};
use bp2split::margolis::{construct_model, kunneth_check};
use bp2split::monomial::{Monomial, PrimeContext};
use bp2split::qmodule::{direct_sum, tensor, QModule, QSet};
use proptest::prelude::*;
use std::sync::OnceLock;

fn ctx() -> PrimeContext {
    PrimeContext::new(3).unwrap()
}

/// Modules over E(2) that the library builds in its pipelines.
fn e2_catalogue() -> &'static Vec<QModule> {
    static C: OnceLock<Vec<QModule>> = OnceLock::new();
    C.get_or_init(|| {
        let c = ctx();
        let mut v = vec![QModule::trivial(c, QSet::E2, 0), QModule::free_on_one(c, QSet::E2)];
        for k in [3, 9, 12] {
            v.push(brown_gitler(&c, 1, k).unwrap().module);
        }
        for k in [9, 12] {
            v.push(cbar_block(&c, k).unwrap());
        }
        v
    })
}

/// Modules over E(Q_1, Q_2): W blocks and Σ^a I^{⊗b} models.
fn pair_catalogue() -> &'static Vec<QModule> {
    static C: OnceLock<Vec<QModule>> = OnceLock::new();
    C.get_or_init(|| {
        let c = ctx();
        let mut v = vec![w_family(&c, WFamily::W1, 1, i64::MAX).unwrap().with_truncation(None)];
        for (a, b) in [(0, 1), (0, -1), (3, 2), (31, -1)] {
            v.push(construct_model(&c, (1, 2), a, b).unwrap());
        }
        v
    })
}

fn monomial() -> impl Strategy<Value = Monomial> {
    (prop::collection::vec((1u32..4, 0u32..4), 0..3), prop::collection::btree_set(0u32..4, 0..3))
        .prop_map(|(xis, taus)| Monomial::from_parts(&xis, &taus.into_iter().collect::<Vec<_>>()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradings_are_additive(x in monomial(), y in monomial()) {
        let c = ctx();
        if let Some(xy) = x.mul(&y) {
            prop_assert_eq!(xy.degree(&c), x.degree(&c) + y.degree(&c));
            prop_assert_eq!(xy.weight(&c), x.weight(&c) + y.weight(&c));
            prop_assert_eq!(xy.length(), x.length() + y.length());
        } else {
            prop_assert!(x.tau_indices().any(|b| y.has_tau(b)));
        }
    }

    #[test]
    fn text_form_round_trips(x in monomial()) {
        let back: Monomial = x.to_string().parse().unwrap();
        prop_assert_eq!(back, x);
    }

    #[test]
    fn relations_hold_on_sums_and_tensors(a in 0usize..7, b in 0usize..7, shift in -3i64..4) {
        let cat = e2_catalogue();
        let (m, n) = (&cat[a % cat.len()], &cat[b % cat.len()].suspend(2 * shift).unwrap());
        prop_assert!(m.verify_relations().is_empty());
        prop_assert!(direct_sum(&[m, n]).unwrap().verify_relations().is_empty());
        prop_assert!(tensor(m, n).unwrap().verify_relations().is_empty());
        prop_assert!(m.dual().verify_relations().is_empty());
    }

    #[test]
    fn relations_hold_on_models(a in -4i64..5, b in -2i64..3) {
        let m = construct_model(&ctx(), (1, 2), a, b).unwrap();
        prop_assert!(m.verify_relations().is_empty());
    }

    #[test]
    fn kunneth_on_pairs(a in 0usize..5, b in 0usize..5, i in 1usize..3) {
        let cat = pair_catalogue();
        let r = kunneth_check(&cat[a], &cat[b], i).unwrap();
        prop_assert!(r.passed, "{:?}", r.rows);
    }

    #[test]
    fn general_ext_matches_koszul(a in 0usize..7) {
        let cat = e2_catalogue();
        let m = &cat[a % cat.len()];
        let f = QModule::trivial(ctx(), QSet::E2, 0);
        let s = 3;
        let g = ext_general(&f, m, s, i64::MAX / 4).unwrap();
        let top = m.max_degree().unwrap() + s as i64 * 17;
        let k = ext_koszul(m, s, top).unwrap().dims();
        let clip = |d: &std::collections::BTreeMap<(i64, i64), usize>| {
            d.iter().filter(|(&(_, t), _)| t <= g.t_range.1).map(|(&x, &y)| (x, y)).collect::<Vec<_>>()
        };
        prop_assert!(!g.dims.is_empty());
        prop_assert_eq!(clip(&g.dims), clip(&k.dims));
    }
}

#[test]
fn residue_field_ext_is_polynomial() {
    let f = QModule::trivial(ctx(), QSet::E2, 0);
    let s_max = 6;
    let e = ext_koszul(&f, s_max, 17 * s_max as i64).unwrap();
    for s in 0..=s_max {
        for t in 0..=17 * s as i64 {
            assert_eq!(e.dim(s, t), residue_field_count(&[1, 5, 17], s, t), "(s,t) = ({s},{t})");
        }
    }
}

#[test]
fn dual_tensor_oracle_on_reduced_blocks() {
    let c = ctx();
    for (k, m) in [(9u64, 0u64), (9, 9), (12, 9)] {
        let a = cbar_block(&c, k).unwrap();
        let b = cbar_block(&c, m).unwrap().suspend(c.q() * m as i64).unwrap();
        let g = ext_general(&a, &b, 4, i64::MAX / 4).unwrap();
        let d = tensor(&a.dual(), &b).unwrap();
        let o = ext_koszul(&d, 4, d.max_degree().unwrap() + 4 * 17).unwrap().dims();
        assert_eq!(g.dims, o.dims, "k = {k}, m = {m}");
    }
}
