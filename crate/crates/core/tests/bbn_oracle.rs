use std::collections::BTreeMap;

use iradic_core::bbn::{infer_marginal, infer_marginal_with_order};
use iradic_core::{Error, State};
use iradic_testkit::{oracle_marginal, random_bbn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_states(e: &BTreeMap<String, bool>) -> BTreeMap<String, State> {
    e.iter()
        .map(|(k, v)| (k.clone(), if *v { State::Fail } else { State::Ok }))
        .collect()
}

#[test]
fn random_networks_match_joint_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbb_0001);
    for i in 0..100 {
        let b = random_bbn(&mut rng, 10);
        let ids: Vec<String> = b.nodes.keys().cloned().collect();
        let query = ids.choose(&mut rng).unwrap().clone();

        let none = BTreeMap::new();
        let got = infer_marginal(&b, &query, &to_states(&none)).unwrap();
        let want = oracle_marginal(&b, &query, &none).unwrap();
        assert!((got - want).abs() <= 1e-12, "net {i}: {got} vs {want}");

        let observed = ids.choose(&mut rng).unwrap().clone();
        let evidence = BTreeMap::from([(observed, rng.gen_bool(0.5))]);
        let got = infer_marginal(&b, &query, &to_states(&evidence)).unwrap();
        let want = oracle_marginal(&b, &query, &evidence).unwrap();
        assert!(
            (got - want).abs() <= 1e-12,
            "net {i} with evidence: {got} vs {want}"
        );
    }
}

#[test]
fn elimination_order_does_not_matter() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbb_0002);
    for _ in 0..50 {
        let b = random_bbn(&mut rng, 9);
        let ids: Vec<String> = b.nodes.keys().cloned().collect();
        let query = ids.last().unwrap().clone();
        let base = infer_marginal(&b, &query, &BTreeMap::new()).unwrap();
        for _ in 0..5 {
            let mut order: Vec<&str> = ids.iter().map(String::as_str).collect();
            order.shuffle(&mut rng);
            let p = infer_marginal_with_order(&b, &query, &BTreeMap::new(), &order).unwrap();
            assert!((p - base).abs() <= 1e-12);
        }
    }
}

#[test]
fn conditionals_recombine_to_the_marginal() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbb_0003);
    for _ in 0..50 {
        let b = random_bbn(&mut rng, 8);
        let ids: Vec<String> = b.nodes.keys().cloned().collect();
        let observed = ids[0].clone();
        let p_obs = infer_marginal(&b, &observed, &BTreeMap::new()).unwrap();
        for q in &ids[1..] {
            let given =
                |s: State| infer_marginal(&b, q, &BTreeMap::from([(observed.clone(), s)])).unwrap();
            let total = given(State::Fail) * p_obs + given(State::Ok) * (1.0 - p_obs);
            let direct = infer_marginal(&b, q, &BTreeMap::new()).unwrap();
            assert!((total - direct).abs() <= 1e-15);
        }
    }
}

#[test]
fn impossible_evidence_is_reported() {
    let mut b = iradic_core::Bbn::new("B");
    b.insert(iradic_core::BbnNode::root("R", 0.0));
    b.insert(iradic_core::BbnNode::child("C", ["R"], vec![0.2, 0.9]));
    let evidence = BTreeMap::from([("R".to_string(), State::Fail)]);
    assert_eq!(
        infer_marginal(&b, "C", &evidence),
        Err(Error::ZeroProbabilityEvidence)
    );
}
