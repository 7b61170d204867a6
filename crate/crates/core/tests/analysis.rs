use latsearch::analysis::*;
use latsearch::strategy::*;
use latsearch::Error;
use num_rational::Ratio;
use proptest::prelude::*;

#[test]
fn lower_envelope_example() {
    assert_eq!(lower_envelope(10, 4), Ratio::new(181, 30));
}

#[test]
fn theoretical_g_examples() {
    assert_eq!(theoretical_g(1, 4), Ratio::from_integer(2));
    assert_eq!(theoretical_g(10, 2), Ratio::from_integer(20) + Ratio::new(20, 31));
    assert_eq!(theoretical_g(5, 8), Ratio::new(35, 4));
}

#[test]
fn single_robot_cannot_beat_the_lower_bound() {
    let p = generalize_to_any_k(1, 30).unwrap();
    let r = audit_plan(&p, 30).unwrap();
    for n in 5..30u64 {
        let bound = Ratio::from_integer(2 * n as i64 + 4) + Ratio::new(4, 3 * n as i64) - Ratio::new(1, 2);
        assert!(r.measured_ratio[&n] >= bound, "n={n}");
    }
}

#[test]
fn four_robots_stay_under_the_upper_envelope() {
    let p = generate_even_work(1, 40).unwrap();
    let r = audit_plan(&p, 40).unwrap();
    for n in 20..=39u64 {
        assert!(r.work_ratio[&n] <= r.upper_envelope[&n] + Ratio::new(1, n as i64), "n={n}");
    }
}

#[test]
fn unit_speed_work_equals_team_size_times_time() {
    for k in [1, 3, 4, 9] {
        let p = generalize_to_any_k(k, 25).unwrap();
        let r = audit_plan(&p, 25).unwrap();
        let mut prev = 0;
        for b in &r.per_ball {
            assert!(b.last_visit_time.is_integer());
            assert_eq!(b.a_n as i64, k as i64 * b.last_visit_time.to_integer());
            assert!(b.a_n >= prev);
            assert!(b.g_n <= 4 * (b.n + 1));
            assert_eq!(b.worst_point.l1_norm(), b.n);
            prev = b.a_n;
        }
    }
}

#[test]
fn missing_points_are_reported() {
    let mut p = generalize_to_any_k(4, 10).unwrap();
    for t in p.trajectories.iter_mut() {
        t.truncate_steps(3);
    }
    assert!(matches!(audit_plan(&p, 10), Err(Error::IncompleteCoverage(_))));
    assert!(check_coverage(&p, 1).is_ok());
}

#[test]
fn boundary_rings_are_not_audited() {
    let p = generalize_to_any_k(4, 12).unwrap();
    let r = audit_plan(&p, 12).unwrap();
    assert_eq!(r.per_ball.last().unwrap().n, 11);
    assert_eq!(r.per_ball.len(), 11);
}

proptest! {
    #[test]
    fn envelopes_are_ordered(n in 1u64..10_000, k in 1u64..64) {
        prop_assert!(lower_envelope(n, k) < upper_envelope(n, k));
    }

    #[test]
    fn every_plan_respects_the_lower_bound(k in 1usize..13, n in 8u64..40) {
        let p = generalize_to_any_k(k, n).unwrap();
        let r = audit_plan(&p, n).unwrap();
        for b in r.per_ball.iter().filter(|b| b.n >= 5 && b.n + 2 <= n) {
            prop_assert!(r.work_ratio[&b.n] >= r.lower_envelope[&b.n] - Ratio::new(1, 2));
            prop_assert!(r.measured_ratio[&b.n] >= r.lower_envelope[&b.n] - Ratio::new(1, 2));
        }
    }
}
