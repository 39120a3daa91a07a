//! Seeded generators shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const TRAFFIC: &str = "not y_0 or y_1 or y_2 or y_3\n\
                           not y_0 or not y_1 or not y_2\n\
                           not y_0 or not y_1 or not y_3\n\
                           not y_0 or not y_2 or not y_3\n";

pub const HEMOGLOBIN: &str = "y_0 - y_1 >= 0\ny_2 - y_3 >= 0\n";

/// Satisfiable CNF text: clauses of width `widths` over `n` variables, each
/// repaired if needed so a hidden random assignment satisfies it.
pub fn random_sat_cnf(rng: &mut TestRng, n: usize, clauses: usize, widths: (usize, usize)) -> String {
    let planted: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let vars: Vec<usize> = (0..n).collect();
    let mut text = String::new();
    for _ in 0..clauses {
        let w = rng.gen_range(widths.0..=widths.1).min(n);
        let chosen: Vec<usize> = vars.choose_multiple(rng, w).copied().collect();
        let mut polarity: Vec<bool> = (0..w).map(|_| rng.gen()).collect();
        if !chosen.iter().zip(&polarity).any(|(&v, &pos)| planted[v] == pos) {
            let fix = rng.gen_range(0..w);
            polarity[fix] = planted[chosen[fix]];
        }
        let lits: Vec<String> = chosen
            .iter()
            .zip(&polarity)
            .map(|(v, &pos)| if pos { format!("y_{v}") } else { format!("not y_{v}") })
            .collect();
        writeln!(text, "{}", lits.join(" or ")).unwrap();
    }
    text
}

/// Random DAG as implication clauses plus its edge list (child, parent).
pub fn random_dag(rng: &mut TestRng, n: usize, edge_prob: f64) -> (String, Vec<(usize, usize)>) {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(edge_prob) {
                edges.push((perm[i], perm[j]));
            }
        }
    }
    let mut text = String::new();
    for &(a, b) in &edges {
        writeln!(text, "not y_{a} or y_{b}").unwrap();
    }
    (text, edges)
}

/// Feasible linear system with integer coefficients in [-3, 3], built around
/// a hidden integer point. Mixes `>=`, `<=`, `>`, `<` and the odd `=`.
pub fn random_feasible_linear(rng: &mut TestRng, n: usize, count: usize) -> String {
    let point: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
    let mut text = String::new();
    for _ in 0..count {
        let mut coeffs: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        if coeffs.iter().all(|&c| c == 0) {
            let k = rng.gen_range(0..n);
            coeffs[k] = if rng.gen() { 1 } else { -1 };
        }
        let value: i64 = coeffs.iter().zip(&point).map(|(a, x)| a * x).sum();
        let slack = rng.gen_range(0..=3);
        let (rel, rhs) = match rng.gen_range(0..20) {
            0 => ("=", value),
            1..=3 => (">", value - slack - 1),
            4..=6 => ("<", value + slack + 1),
            7..=12 => ("<=", value + slack),
            _ => (">=", value - slack),
        };
        let mut lhs = String::new();
        for (i, &a) in coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            let sign = if a < 0 { "-" } else if lhs.is_empty() { "" } else { "+" };
            let mag = a.abs();
            let sep = if lhs.is_empty() { "" } else { " " };
            if mag == 1 {
                write!(lhs, "{sep}{sign}{}y_{i}", if sign.is_empty() { "" } else { " " }).unwrap();
            } else {
                write!(lhs, "{sep}{sign}{}{mag}*y_{i}", if sign.is_empty() { "" } else { " " }).unwrap();
            }
        }
        writeln!(text, "{lhs} {rel} {rhs}").unwrap();
    }
    text
}

pub fn random_vector(rng: &mut TestRng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Prediction-like inputs: mostly in [0, 1], sometimes exactly 0.5, now and
/// then outside the unit interval.
pub fn random_prediction(rng: &mut TestRng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| match rng.gen_range(0..20) {
            0 => 0.5,
            1 => rng.gen_range(-1.0..2.0),
            _ => rng.gen_range(0.0..1.0),
        })
        .collect()
}
