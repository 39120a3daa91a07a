use super::solver::{Lit, Search};
use super::{thresholds_to_model, CnfPlan, GeneralData, THRESHOLD};
use crate::vector::{Branch, CorrectedVector};

/// Variables by descending confidence `|p_k − 0.5|`, ties by ascending index.
pub(super) fn confidence_order(p: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| {
        let ca = (p[a] - THRESHOLD).abs();
        let cb = (p[b] - THRESHOLD).abs();
        cb.total_cmp(&ca).then(a.cmp(&b))
    });
    order
}

/// Greedy repair: commit each variable's thresholded value in confidence
/// order unless the committed prefix plus that value has no model, in which
/// case commit the opposite value and flip the output to `1 − p_k`.
///
/// `witness` is always a model extending the committed prefix, so the solver
/// only runs when the wanted value disagrees with it.
pub(super) fn apply(plan: &CnfPlan, g: &GeneralData, p: &[f64]) -> CorrectedVector {
    if thresholds_to_model(&plan.clauses, p) {
        return CorrectedVector::identity(p);
    }
    let wanted: Vec<bool> = p.iter().map(|&v| v >= THRESHOLD).collect();
    let mut witness = g.certificate.clone();
    let mut committed: Vec<Lit> = Vec::with_capacity(p.len());
    let mut search = Search::new(&g.db);

    let mut values = p.to_vec();
    let mut trace = vec![Branch::Kept; p.len()];
    for k in confidence_order(p) {
        let want = wanted[k];
        if witness[k] != want {
            committed.push(Lit::new(k, want));
            match search.solve(&committed, &wanted) {
                Some(model) => witness = model,
                None => {
                    committed.pop();
                    values[k] = 1.0 - p[k];
                    trace[k] = Branch::Flipped;
                    committed.push(Lit::new(k, !want));
                }
            }
        } else {
            committed.push(Lit::new(k, want));
        }
    }
    CorrectedVector { values, trace }
}

/// Replays the greedy commitments recorded in `trace` and reports, for every
/// flipped variable, whether its thresholded input value would have been
/// extendable at the time it was processed. A sound run yields all `false`.
pub fn replay_is_extendable(plan: &CnfPlan, p: &[f64], trace: &[Branch]) -> Vec<(usize, bool)> {
    let super::CnfKind::General(g) = &plan.kind else {
        return Vec::new();
    };
    let wanted: Vec<bool> = p.iter().map(|&v| v >= THRESHOLD).collect();
    let mut search = Search::new(&g.db);
    let mut committed = Vec::new();
    let mut out = Vec::new();
    for k in confidence_order(p) {
        let flipped = trace[k] == Branch::Flipped;
        if flipped {
            committed.push(Lit::new(k, wanted[k]));
            out.push((k, search.solve(&committed, &wanted).is_some()));
            committed.pop();
        }
        committed.push(Lit::new(k, wanted[k] != flipped));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::tests::{plan, TRAFFIC};
    use super::super::{clause_holds, CnfEngine};
    use super::*;

    fn run(p: &[f64]) -> CorrectedVector {
        let plan = plan(TRAFFIC, 4).unwrap();
        assert_eq!(plan.engine(), CnfEngine::General);
        plan.apply(p).unwrap()
    }

    #[test]
    fn confidence_order_for_traffic_example() {
        assert_eq!(confidence_order(&[0.9, 0.4, 0.3, 0.2]), vec![0, 3, 2, 1]);
        assert_eq!(confidence_order(&[0.5, 0.5, 1.0, 0.0]), vec![2, 3, 0, 1]);
    }

    #[test]
    fn traffic_light_on_without_color_gets_one_color() {
        let out = run(&[0.9, 0.4, 0.3, 0.2]);
        assert_eq!(out.values, vec![0.9, 0.6, 0.3, 0.2]);
        assert_eq!(out.trace, vec![Branch::Kept, Branch::Flipped, Branch::Kept, Branch::Kept]);
    }

    #[test]
    fn compliant_inputs_unchanged() {
        let p = [0.9, 0.8, 0.1, 0.2];
        assert_eq!(run(&p).values, p.to_vec());
        let p = [0.2, 0.6, 0.6, 0.1];
        assert_eq!(run(&p).values, p.to_vec());
    }

    #[test]
    fn output_satisfies_every_clause_and_is_idempotent() {
        let plan = plan(TRAFFIC, 4).unwrap();
        for p in [[0.9, 0.9, 0.9, 0.9], [0.6, 0.1, 0.0, 0.4], [0.5, 0.5, 0.5, 0.5], [1.7, -3.0, 0.2, 2.0]] {
            let out = plan.apply(&p).unwrap();
            assert!(plan.clauses.iter().all(|c| clause_holds(c, &out.values)), "{p:?}");
            let again = plan.apply(&out.values).unwrap();
            assert_eq!(again.values, out.values);
        }
    }

    #[test]
    fn flips_were_forced() {
        let plan = plan(TRAFFIC, 4).unwrap();
        let p = [0.9, 0.9, 0.8, 0.7];
        let out = plan.apply(&p).unwrap();
        let replay = replay_is_extendable(&plan, &p, &out.trace);
        assert!(!replay.is_empty());
        assert!(replay.iter().all(|&(_, ext)| !ext));
    }

    #[test]
    fn unit_clause_forces_flip() {
        let plan = plan("y_0\nnot y_0 or y_1", 2).unwrap();
        let out = plan.apply(&[0.1, 0.3]).unwrap();
        assert_eq!(out.values, vec![0.9, 0.7]);
    }
}
