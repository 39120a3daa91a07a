mod common;

use common::*;
use proptest::prelude::*;
use reqshield::cnf::{clause_holds, replay_is_extendable, thresholds_to_model, CnfError, CnfPlan, THRESHOLD};
use reqshield::oracle::{extends_to_model, hierarchy_closure_reference, min_flip_model, OracleBudget};
use reqshield::{Branch, Engine, EngineOverride, Shield, ShieldConfig, ShieldError, ShieldPlan};

fn general(text: &str, n: usize) -> Shield {
    let config = ShieldConfig { engine: EngineOverride::General, ..ShieldConfig::default() };
    Shield::from_text(text, n, &config).unwrap()
}

fn cnf_plan(shield: &Shield) -> &CnfPlan {
    match shield.plan() {
        ShieldPlan::Cnf(p) => p,
        other => panic!("expected a CNF plan, got {:?}", other.engine()),
    }
}

fn thresholded(p: &[f64]) -> Vec<bool> {
    p.iter().map(|&v| v >= THRESHOLD).collect()
}

/// The assignment the greedy pass committed to: the thresholded input with
/// every flipped variable inverted. Differs from thresholding the output only
/// where an input sits exactly on 0.5.
fn committed(p: &[f64], trace: &[Branch]) -> Vec<bool> {
    thresholded(p).iter().zip(trace).map(|(&b, t)| b != (*t == Branch::Flipped)).collect()
}

fn degree_compliant(plan: &CnfPlan, p: &[f64]) -> bool {
    plan.clauses.iter().all(|c| clause_holds(c, p))
}

/// A random CNF case small enough for the brute-force oracle.
fn cnf_case() -> impl Strategy<Value = (Shield, Vec<Vec<f64>>)> {
    (any::<u64>(), 1usize..=10, 1usize..=25).prop_map(|(seed, n, m)| {
        let mut r = rng(seed);
        let text = random_sat_cnf(&mut r, n, m, (1, 4));
        let inputs = (0..8).map(|_| random_prediction(&mut r, n)).collect();
        (general(&text, n), inputs)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn general_output_thresholds_to_a_model((shield, inputs) in cnf_case()) {
        let plan = cnf_plan(&shield);
        for p in &inputs {
            let out = shield.apply(p).unwrap();
            prop_assert!(degree_compliant(plan, &out.values));
            prop_assert!(shield.is_compliant(&out.values));
            let model: Vec<f64> = committed(p, &out.trace).iter().map(|&b| f64::from(u8::from(b))).collect();
            prop_assert!(thresholds_to_model(&plan.clauses, &model));
            if !out.values.contains(&THRESHOLD) {
                prop_assert!(thresholds_to_model(&plan.clauses, &out.values));
            }
        }
    }

    #[test]
    fn general_outputs_are_reflections((shield, inputs) in cnf_case()) {
        for p in &inputs {
            let out = shield.apply(p).unwrap();
            for (k, (&h, &x)) in out.values.iter().zip(p).enumerate() {
                match out.trace[k] {
                    Branch::Kept => prop_assert_eq!(h.to_bits(), x.to_bits()),
                    Branch::Flipped => prop_assert_eq!(h.to_bits(), (1.0 - x).to_bits()),
                    b => prop_assert!(false, "unexpected branch {b:?}"),
                }
            }
        }
    }

    #[test]
    fn general_is_idempotent_and_identity_on_models((shield, inputs) in cnf_case()) {
        let plan = cnf_plan(&shield);
        for p in &inputs {
            let out = shield.apply(p).unwrap();
            let again = shield.apply(&out.values).unwrap();
            prop_assert_eq!(&again.values, &out.values);
            if thresholds_to_model(&plan.clauses, p) {
                prop_assert_eq!(&out.values, p);
            }
        }
    }

    #[test]
    fn flips_are_forced((shield, inputs) in cnf_case()) {
        let plan = cnf_plan(&shield);
        let budget = OracleBudget::default();
        for p in &inputs {
            let out = shield.apply(p).unwrap();
            prop_assert!(replay_is_extendable(plan, p, &out.trace).iter().all(|&(_, ok)| !ok));

            // Re-derive each flip's prefix and ask the enumerator.
            let want = thresholded(p);
            let mut order: Vec<usize> = (0..p.len()).collect();
            order.sort_by(|&a, &b| {
                (p[b] - THRESHOLD).abs().total_cmp(&(p[a] - THRESHOLD).abs()).then(a.cmp(&b))
            });
            let mut fixed = Vec::new();
            for k in order {
                let flipped = out.trace[k] == Branch::Flipped;
                if flipped {
                    fixed.push((k, want[k]));
                    prop_assert!(!extends_to_model(&plan.clauses, p.len(), &fixed, &budget).unwrap());
                    fixed.pop();
                }
                fixed.push((k, want[k] != flipped));
            }
        }
    }

    #[test]
    fn greedy_never_beats_the_minimum((shield, inputs) in cnf_case()) {
        let plan = cnf_plan(&shield);
        for p in &inputs {
            let out = shield.apply(p).unwrap();
            let before = thresholded(p);
            let after = committed(p, &out.trace);
            let flips = out.changed();
            let (_, best) = min_flip_model(&plan.clauses, &before, &OracleBudget::default()).unwrap();
            prop_assert!(flips >= best);
            let (_, zero) = min_flip_model(&plan.clauses, &after, &OracleBudget::default()).unwrap();
            prop_assert_eq!(zero, 0);
        }
    }

    #[test]
    fn deterministic((shield, inputs) in cnf_case()) {
        for p in &inputs {
            prop_assert_eq!(shield.apply(p).unwrap(), shield.apply(p).unwrap());
        }
    }

    #[test]
    fn hierarchy_matches_reference(seed in any::<u64>(), n in 1usize..=12, density in 0.05f64..0.5) {
        let mut r = rng(seed);
        let (text, edges) = random_dag(&mut r, n, density);
        let shield = Shield::from_text(&text, n, &ShieldConfig::default()).unwrap();
        if edges.is_empty() {
            prop_assert_eq!(shield.engine(), Engine::Identity);
            return Ok(());
        }
        prop_assert_eq!(shield.engine(), Engine::Hierarchy);
        for _ in 0..10 {
            let p = random_prediction(&mut r, n);
            let out = shield.apply(&p).unwrap();
            let reference = hierarchy_closure_reference(&edges, &p).unwrap();
            prop_assert_eq!(&out.values, &reference);
            for &(a, b) in &edges {
                prop_assert!(out.values[b] >= out.values[a]);
            }
            prop_assert_eq!(&shield.apply(&out.values).unwrap().values, &out.values);
        }
    }

    #[test]
    fn hierarchy_identity_when_parents_dominate(seed in any::<u64>(), n in 2usize..=12) {
        let mut r = rng(seed);
        let (text, edges) = random_dag(&mut r, n, 0.3);
        let shield = Shield::from_text(&text, n, &ShieldConfig::default()).unwrap();
        let p = random_prediction(&mut r, n);
        let dominated = shield.apply(&p).unwrap().values;
        prop_assert!(edges.iter().all(|&(a, b)| dominated[b] >= dominated[a]));
        let out = shield.apply(&dominated).unwrap();
        prop_assert!(out.trace.iter().all(|b| b.is_kept()));
    }
}

#[test]
fn traffic_light_golden() {
    let shield = Shield::from_text(TRAFFIC, 4, &ShieldConfig::default()).unwrap();
    assert_eq!(shield.engine(), Engine::General);
    let out = shield.apply(&[0.9, 0.4, 0.3, 0.2]).unwrap();
    assert_eq!(out.values, vec![0.9, 0.6, 0.3, 0.2]);
    assert_eq!(out.trace[1], Branch::Flipped);
    for compliant in [[0.9, 0.8, 0.1, 0.2], [0.2, 0.6, 0.6, 0.1]] {
        assert_eq!(shield.apply(&compliant).unwrap().values, compliant);
    }
}

#[test]
fn hierarchy_goldens() {
    let edge = Shield::from_text("not y_0 or y_1", 2, &ShieldConfig::default()).unwrap();
    assert_eq!(edge.engine(), Engine::Hierarchy);
    assert_eq!(edge.apply(&[0.8, 0.3]).unwrap().values, vec![0.8, 0.8]);
    assert_eq!(edge.apply(&[0.3, 0.8]).unwrap().values, vec![0.3, 0.8]);

    let chain = Shield::from_text("not y_0 or y_1\nnot y_1 or y_2", 3, &ShieldConfig::default()).unwrap();
    assert_eq!(chain.apply(&[0.9, 0.1, 0.2]).unwrap().values, vec![0.9, 0.9, 0.9]);

    let diamond = "not y_0 or y_1\nnot y_0 or y_2\nnot y_1 or y_3\nnot y_2 or y_3";
    let diamond = Shield::from_text(diamond, 4, &ShieldConfig::default()).unwrap();
    assert_eq!(diamond.apply(&[0.6, 0.1, 0.2, 0.0]).unwrap().values, vec![0.6; 4]);
}

#[test]
fn cycles_fall_back_to_general() {
    let shield = Shield::from_text("not y_0 or y_1\nnot y_1 or y_0", 2, &ShieldConfig::default()).unwrap();
    assert_eq!(shield.engine(), Engine::General);
    let out = shield.apply(&[0.9, 0.2]).unwrap();
    assert_eq!(thresholded(&out.values)[0], thresholded(&out.values)[1]);
}

#[test]
fn unsatisfiable_is_a_compile_error() {
    let err = Shield::from_text("y_0\nnot y_0", 1, &ShieldConfig::default()).unwrap_err();
    assert!(matches!(err, ShieldError::Cnf(CnfError::Unsatisfiable)), "{err:?}");
}

#[test]
fn traffic_light_min_flip() {
    let shield = Shield::from_text(TRAFFIC, 4, &ShieldConfig::default()).unwrap();
    let (model, flips) = min_flip_model(&cnf_plan(&shield).clauses, &[true, false, false, false], &OracleBudget::default()).unwrap();
    assert_eq!(flips, 1);
    assert_eq!(model, vec![false, false, false, false]);
}

#[test]
fn forty_variable_batch() {
    let mut r = rng(40);
    let text = random_sat_cnf(&mut r, 40, 250, (2, 4));
    let shield = Shield::from_text(&text, 40, &ShieldConfig::default()).unwrap();
    let rows: Vec<Vec<f64>> = (0..200).map(|_| random_prediction(&mut r, 40)).collect();
    let plan = cnf_plan(&shield);
    for out in shield.apply_rows(&rows).unwrap() {
        assert!(degree_compliant(plan, &out.values));
    }
}
