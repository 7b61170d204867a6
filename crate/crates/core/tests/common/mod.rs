//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use latsearch::pod::expected_discovery_time;
use num_rational::Ratio;

type Q = Ratio<i64>;

/// Minimum over every integral transport plan, by recursion over cells.
pub fn brute_min(supply: &[u64], demand: &[u64], cost: &[Vec<i64>]) -> i64 {
    fn rec(i: usize, j: usize, supply: &mut [u64], demand: &mut [u64], cost: &[Vec<i64>]) -> Option<i64> {
        let g = demand.len();
        if i == supply.len() {
            return demand.iter().all(|&d| d == 0).then_some(0);
        }
        if j == g {
            return if supply[i] == 0 { rec(i + 1, 0, supply, demand, cost) } else { None };
        }
        let mut best: Option<i64> = None;
        for f in 0..=supply[i].min(demand[j]) {
            supply[i] -= f;
            demand[j] -= f;
            if let Some(c) = rec(i, j + 1, supply, demand, cost) {
                let c = c + f as i64 * cost[i][j];
                best = Some(best.map_or(c, |b: i64| b.min(c)));
            }
            supply[i] += f;
            demand[j] += f;
        }
        best
    }
    rec(0, 0, &mut supply.to_vec(), &mut demand.to_vec(), cost).expect("balanced")
}

/// Brute force over every visit sequence. Unfound mass is charged
/// horizon + 1, otherwise never searching would look best; returns Σ p_t·t of
/// the winning sequence.
pub fn greedy_oracle_objective(priors: &[Q], pod: &Q, horizon: usize) -> Q {
    let n = priors.len();
    let mut best: Option<(Q, Q)> = None;
    for code in 0..n.pow(horizon as u32) {
        let mut c = code;
        let seq: Vec<usize> = (0..horizon)
            .map(|_| {
                let v = c % n;
                c /= n;
                v
            })
            .collect();
        let e = expected_discovery_time(priors, pod, &seq);
        let found = found_mass(priors, pod, &seq);
        let penalized = e + (Q::from_integer(1) - found) * Q::from_integer(horizon as i64 + 1);
        if best.map_or(true, |(b, _)| penalized < b) {
            best = Some((penalized, e));
        }
    }
    best.unwrap().1
}

pub fn found_mass(priors: &[Q], pod: &Q, seq: &[usize]) -> Q {
    let mut next: Vec<Q> = priors.iter().map(|q| q * pod).collect();
    let mut f = Q::from_integer(0);
    for &c in seq {
        f += next[c];
        next[c] *= Q::from_integer(1) - pod;
    }
    f
}

