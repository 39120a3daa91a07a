//! Complete decision procedure used to test whether a partial assignment
//! extends to a model.
//!
//! Plain DPLL: unit propagation over two watched literals per clause,
//! chronological backtracking, lowest-index branching with a caller-supplied
//! phase. No learning and no restarts, so a given query always explores the
//! same search tree.

use std::ops::Not;

use crate::lang::{Clause, Literal};

/// Literal code `2·var + negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Lit(u32);

impl Lit {
    pub(crate) fn new(var: usize, value: bool) -> Self {
        Lit(((var as u32) << 1) | u32::from(!value))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn value(self) -> bool {
        self.0 & 1 == 0
    }

    fn code(self) -> usize {
        self.0 as usize
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl From<Literal> for Lit {
    fn from(l: Literal) -> Self {
        Lit::new(l.variable, l.positive)
    }
}

/// Immutable clause database shared by every search on a plan.
#[derive(Debug, Clone)]
pub(crate) struct ClauseDb {
    num_vars: usize,
    long: Vec<Vec<Lit>>,
    units: Vec<Lit>,
}

impl ClauseDb {
    pub(crate) fn new(num_vars: usize, clauses: &[Clause]) -> Self {
        let mut long = Vec::new();
        let mut units = Vec::new();
        for c in clauses {
            let lits: Vec<Lit> = c.literals.iter().map(|&l| l.into()).collect();
            match lits.len() {
                0 => unreachable!("clauses are nonempty"),
                1 => units.push(lits[0]),
                _ => long.push(lits),
            }
        }
        ClauseDb { num_vars, long, units }
    }
}

const UNASSIGNED: i8 = 0;

/// Mutable search state. Watch lists stay valid across calls because every
/// call starts from the empty assignment.
pub(crate) struct Search<'a> {
    db: &'a ClauseDb,
    clauses: Vec<Vec<Lit>>,
    watches: Vec<Vec<usize>>,
    assign: Vec<i8>,
    trail: Vec<Lit>,
    qhead: usize,
    pub(crate) calls: usize,
}

impl<'a> Search<'a> {
    pub(crate) fn new(db: &'a ClauseDb) -> Self {
        let clauses = db.long.clone();
        let mut watches = vec![Vec::new(); 2 * db.num_vars];
        for (ci, c) in clauses.iter().enumerate() {
            watches[c[0].code()].push(ci);
            watches[c[1].code()].push(ci);
        }
        Search {
            db,
            clauses,
            watches,
            assign: vec![UNASSIGNED; db.num_vars],
            trail: Vec::with_capacity(db.num_vars),
            qhead: 0,
            calls: 0,
        }
    }

    /// Finds a model extending `assumptions`, branching on `phase[v]` first.
    pub(crate) fn solve(&mut self, assumptions: &[Lit], phase: &[bool]) -> Option<Vec<bool>> {
        self.calls += 1;
        self.backtrack(0);

        for &lit in self.db.units.iter().chain(assumptions) {
            if !self.enqueue(lit) {
                return None;
            }
        }

        // (trail position before the decision, decision literal, second branch taken)
        let mut decisions: Vec<(usize, Lit, bool)> = Vec::new();
        let mut next_var = 0;
        loop {
            if !self.propagate() {
                loop {
                    let (pos, lit, flipped) = decisions.pop()?;
                    self.backtrack(pos);
                    if !flipped {
                        decisions.push((pos, !lit, true));
                        self.enqueue(!lit);
                        next_var = next_var.min(lit.var());
                        break;
                    }
                }
                continue;
            }
            while next_var < self.db.num_vars && self.assign[next_var] != UNASSIGNED {
                next_var += 1;
            }
            if next_var == self.db.num_vars {
                return Some(self.assign.iter().map(|&a| a > 0).collect());
            }
            let lit = Lit::new(next_var, phase[next_var]);
            decisions.push((self.trail.len(), lit, false));
            self.enqueue(lit);
        }
    }

    fn lit_value(assign: &[i8], lit: Lit) -> i8 {
        let a = assign[lit.var()];
        if lit.value() {
            a
        } else {
            -a
        }
    }

    /// Assigns `lit`; false when it is already false.
    fn enqueue(&mut self, lit: Lit) -> bool {
        match Self::lit_value(&self.assign, lit) {
            1 => true,
            -1 => false,
            _ => {
                self.assign[lit.var()] = if lit.value() { 1 } else { -1 };
                self.trail.push(lit);
                true
            }
        }
    }

    fn backtrack(&mut self, pos: usize) {
        for lit in self.trail.drain(pos..) {
            self.assign[lit.var()] = UNASSIGNED;
        }
        self.qhead = self.qhead.min(pos);
    }

    /// Returns false on conflict.
    fn propagate(&mut self) -> bool {
        while self.qhead < self.trail.len() {
            let false_lit = !self.trail[self.qhead];
            self.qhead += 1;

            let mut ws = std::mem::take(&mut self.watches[false_lit.code()]);
            let mut keep = 0;
            let mut i = 0;
            let mut conflict = false;
            while i < ws.len() {
                let ci = ws[i];
                i += 1;
                let clause = &mut self.clauses[ci];
                if clause[0] == false_lit {
                    clause.swap(0, 1);
                }
                let other = clause[0];
                if Self::lit_value(&self.assign, other) == 1 {
                    ws[keep] = ci;
                    keep += 1;
                    continue;
                }
                let replacement =
                    (2..clause.len()).find(|&k| Self::lit_value(&self.assign, clause[k]) != -1);
                if let Some(k) = replacement {
                    clause.swap(1, k);
                    self.watches[clause[1].code()].push(ci);
                    continue;
                }
                ws[keep] = ci;
                keep += 1;
                if Self::lit_value(&self.assign, other) == -1 {
                    conflict = true;
                    while i < ws.len() {
                        ws[keep] = ws[i];
                        keep += 1;
                        i += 1;
                    }
                } else {
                    self.assign[other.var()] = if other.value() { 1 } else { -1 };
                    self.trail.push(other);
                }
            }
            ws.truncate(keep);
            self.watches[false_lit.code()] = ws;
            if conflict {
                return false;
            }
        }
        true
    }
}
