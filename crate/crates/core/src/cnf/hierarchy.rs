use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::HierarchyData;
use crate::lang::Clause;
use crate::vector::{Branch, CorrectedVector};

/// Builds implication data when every clause is `¬y_a ∨ y_b` and the
/// implication graph is acyclic; `None` otherwise.
pub(super) fn build(n: usize, clauses: &[Clause]) -> Option<HierarchyData> {
    let mut edges = Vec::with_capacity(clauses.len());
    for c in clauses {
        let [a, b] = c.literals.as_slice() else {
            return None;
        };
        match (a.positive, b.positive) {
            (false, true) => edges.push((a.variable, b.variable)),
            (true, false) => edges.push((b.variable, a.variable)),
            _ => return None,
        }
    }

    let mut parents = vec![Vec::new(); n];
    let mut children = vec![Vec::new(); n];
    let mut pending = vec![0usize; n];
    for &(child, parent) in &edges {
        parents[child].push(parent);
        children[parent].push(child);
        pending[parent] += 1;
    }

    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&k| pending[k] == 0).map(Reverse).collect();
    let mut topo_order = Vec::with_capacity(n);
    while let Some(Reverse(k)) = ready.pop() {
        topo_order.push(k);
        for &p in &parents[k] {
            pending[p] -= 1;
            if pending[p] == 0 {
                ready.push(Reverse(p));
            }
        }
    }
    if topo_order.len() != n {
        return None;
    }

    let mut reach = vec![Vec::<bool>::new(); n];
    for &k in &topo_order {
        let mut mine = vec![false; n];
        for &c in &children[k] {
            mine[c] = true;
            for (d, &r) in reach[c].iter().enumerate() {
                if r {
                    mine[d] = true;
                }
            }
        }
        reach[k] = mine;
    }
    let descendants = reach
        .into_iter()
        .map(|r| r.iter().enumerate().filter(|(_, &x)| x).map(|(d, _)| d).collect())
        .collect();

    Some(HierarchyData { edges, topo_order, descendants })
}

/// Each output becomes the max of its own input and its descendants' inputs.
/// The variable itself wins ties; among descendants the lowest index wins.
pub(super) fn apply(h: &HierarchyData, p: &[f64]) -> CorrectedVector {
    let mut values = p.to_vec();
    let mut trace = vec![Branch::Kept; p.len()];
    for &k in &h.topo_order {
        let mut best = p[k];
        let mut source = k;
        for &d in &h.descendants[k] {
            if p[d] > best {
                best = p[d];
                source = d;
            }
        }
        values[k] = best;
        if source != k {
            trace[k] = Branch::Raised { source };
        }
    }
    CorrectedVector { values, trace }
}
