mod common;

use common::brute_min;
use latsearch::flow::*;
use latsearch::LatticePoint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn entry(id: usize, x: i64, y: i64, old: u64, new: u64) -> LedgerEntry {
    LedgerEntry { id, center: LatticePoint::new(x, y), old, new }
}

#[test]
fn empty_ledger_means_no_moves() {
    let p = build_flow(&[], 5).unwrap();
    assert_eq!(p.node_count(), 2);
    let r = solve_min_cost(&p).unwrap();
    assert!(r.moves.is_empty());
    assert_eq!(r.total_cost, 0);
}

#[test]
fn one_loser_two_gainers() {
    let p = build_flow(&[entry(0, 0, 0, 3, 1), entry(1, 0, 1, 0, 1), entry(2, 5, 0, 1, 2)], 4).unwrap();
    assert_eq!(p.losing.len(), 1);
    assert_eq!(p.gaining.len(), 2);
    assert_eq!(p.cost_matrix(), vec![vec![1, 5]]);
    let r = solve_min_cost(&p).unwrap();
    assert_eq!(r.moves, vec![Move { from: 0, to: 1, robots: 1 }, Move { from: 0, to: 2, robots: 1 }]);
    assert_eq!(r.total_cost, 6);
    assert!(r.verify(&p));
}

#[test]
fn nearest_matching_beats_the_crossed_one() {
    let p = build_flow(
        &[entry(0, 0, 0, 1, 0), entry(1, 10, 0, 1, 0), entry(2, 1, 0, 0, 1), entry(3, 9, 0, 0, 1)],
        2,
    )
    .unwrap();
    let r = solve_min_cost(&p).unwrap();
    assert_eq!(r.total_cost, 2);
    assert_eq!(r.moves, vec![Move { from: 0, to: 2, robots: 1 }, Move { from: 1, to: 3, robots: 1 }]);
}

#[test]
fn unbalanced_ledgers_are_rejected() {
    assert!(build_flow(&[entry(0, 0, 0, 2, 0), entry(1, 1, 1, 0, 1)], 2).is_err());
}

#[test]
fn unchanged_entries_are_dropped() {
    let p = build_flow(&[entry(0, 0, 0, 2, 2), entry(1, 0, 0, 1, 0), entry(2, 3, 3, 0, 1)], 3).unwrap();
    assert_eq!(p.node_count(), 4);
}

fn random_instance(rng: &mut ChaCha8Rng) -> FlowProblem {
    loop {
        let l = rng.gen_range(1..=4);
        let g = rng.gen_range(1..=4);
        let losses: Vec<u64> = (0..l).map(|_| rng.gen_range(1..=3)).collect();
        let gains: Vec<u64> = (0..g).map(|_| rng.gen_range(1..=3)).collect();
        if losses.iter().sum::<u64>() != gains.iter().sum::<u64>() {
            continue;
        }
        let mut entries = Vec::new();
        for (i, d) in losses.iter().enumerate() {
            entries.push(entry(i, rng.gen_range(-6..=6), rng.gen_range(-6..=6), d + 1, 1));
        }
        for (j, d) in gains.iter().enumerate() {
            entries.push(entry(l + j, rng.gen_range(-6..=6), rng.gen_range(-6..=6), 0, *d));
        }
        return build_flow(&entries, 20).unwrap();
    }
}

#[test]
fn matches_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let p = random_instance(&mut rng);
        let r = solve_min_cost(&p).unwrap();
        assert_eq!(r.total_cost as i64, brute_min(&p.supply(), &p.demand(), &p.cost_matrix()));
        assert!(r.verify(&p));
    }
}

#[test]
fn certificate_rejects_a_suboptimal_flow() {
    let (s, d) = (vec![1, 1], vec![1, 1]);
    let cost = vec![vec![1, 9], vec![9, 1]];
    let sol = transport(&s, &d, &cost, 2).unwrap();
    assert!(check_certificate(&s, &d, &cost, 2, &sol.flow, &sol.potentials));
    let crossed = vec![vec![0, 1], vec![1, 0]];
    assert!(!check_certificate(&s, &d, &cost, 2, &crossed, &sol.potentials));
}

proptest! {
    #[test]
    fn conservation_and_cost_bounds(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_instance(&mut rng);
        let r = solve_min_cost(&p).unwrap();
        let moved: u64 = p.supply().iter().sum();
        for (i, e) in p.losing.iter().enumerate() {
            let out: u64 = r.moves.iter().filter(|m| m.from == e.id).map(|m| m.robots).sum();
            prop_assert_eq!(out, p.supply()[i]);
        }
        for (j, e) in p.gaining.iter().enumerate() {
            let inn: u64 = r.moves.iter().filter(|m| m.to == e.id).map(|m| m.robots).sum();
            prop_assert_eq!(inn, p.demand()[j]);
        }
        let costs = p.cost_matrix();
        let lo = *costs.iter().flatten().min().unwrap() as u64;
        let hi = *costs.iter().flatten().max().unwrap() as u64;
        prop_assert!(r.total_cost >= moved * lo && r.total_cost <= moved * hi);
        prop_assert_eq!(p.node_count(), p.losing.len() + p.gaining.len() + 2);
        // solving twice gives the same answer
        prop_assert_eq!(solve_min_cost(&p).unwrap(), r);
    }
}
