//! Multi-robot search plans on the L1 lattice.

mod bands;
mod wedges;

use std::collections::HashSet;
use std::ops::Range;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::transport;
use crate::lattice::{ball_points, LatticePoint, Time, Trajectory};

pub use bands::band_targets;
pub use wedges::wedge_targets;

/// Largest total (scaled) speed accepted; bounds the region count.
pub const MAX_TOTAL_SPEED: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinEvent {
    pub time: Time,
    pub added: usize,
    /// Largest radius whose ball was fully explored at `time`.
    pub radius: u64,
    /// Distance each robot walked to reach its first post-join target.
    pub transit: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchPlan {
    pub robot_count: usize,
    pub speeds: Vec<u32>,
    pub region_count: usize,
    pub region_assignment: Vec<Range<usize>>,
    pub max_radius: u64,
    pub trajectories: Vec<Trajectory>,
    pub join_schedule: Vec<JoinEvent>,
}

impl SearchPlan {
    /// Wall-clock time at which the last robot stops.
    pub fn horizon(&self) -> Time {
        self.trajectories
            .iter()
            .map(|t| t.time_at(t.len()))
            .max()
            .unwrap_or_else(|| Time::from_integer(0))
    }

    pub fn is_uniform(&self) -> bool {
        self.speeds.windows(2).all(|w| w[0] == w[1])
    }

    /// Total steps per robot.
    pub fn step_counts(&self) -> Vec<usize> {
        self.trajectories.iter().map(Trajectory::len).collect()
    }

    /// max − min of the per-robot step counts.
    pub fn balance(&self) -> usize {
        let c = self.step_counts();
        c.iter().max().unwrap_or(&0) - c.iter().min().unwrap_or(&0)
    }
}

/// Robot `i` gets `4·speeds[i]` consecutive regions out of `4·Σ speeds`.
pub fn region_assignment(speeds: &[u32]) -> (usize, Vec<Range<usize>>) {
    let mut next = 0;
    let ranges = speeds
        .iter()
        .map(|&s| {
            let r = next..next + 4 * s as usize;
            next = r.end;
            r
        })
        .collect();
    (next, ranges)
}

/// Angular region of a non-origin point when each sphere is cut into
/// `region_count` equal arcs; axis points belong to the arc they start.
pub fn region_of(p: LatticePoint, region_count: usize) -> usize {
    let n = p.l1_norm() as i64;
    assert!(n > 0, "the origin belongs to every region");
    (crate::lattice::sphere_index(p) * region_count as i64 / (4 * n)) as usize
}

/// Even-work plan for `k = 4r` unit-speed robots.
pub fn generate_even_work(r: usize, n: u64) -> Result<SearchPlan> {
    if r == 0 {
        return Err(Error::Invalid("r must be at least 1".into()));
    }
    generalize_to_any_k(4 * r, n)
}

/// Plan for any number of unit-speed robots.
pub fn generalize_to_any_k(k: usize, n: u64) -> Result<SearchPlan> {
    if k == 0 {
        return Err(Error::Invalid("at least one robot is required".into()));
    }
    if n == 0 {
        return Err(Error::Invalid("radius must be at least 1".into()));
    }
    build(vec![1; k], n)
}

/// Scales rational speeds to coprime positive integers.
pub fn scale_speeds(speeds: &[Ratio<i64>]) -> Result<Vec<u32>> {
    if speeds.is_empty() || speeds.iter().all(|s| *s.numer() == 0) {
        return Err(Error::Invalid("at least one speed must be positive".into()));
    }
    if speeds.iter().any(|s| *s.numer() <= 0) {
        return Err(Error::Invalid("speeds must be positive".into()));
    }
    let mut l: i64 = 1;
    for s in speeds {
        let d = *s.denom();
        l = (l / num_integer::gcd(l, d))
            .checked_mul(d)
            .ok_or(Error::Overflow)?;
    }
    let ints: Vec<i64> = speeds
        .iter()
        .map(|s| (s * l).to_integer())
        .collect();
    let g = ints.iter().fold(0, |a, &b| num_integer::gcd(a, b));
    let ints: Vec<u64> = ints.iter().map(|&v| (v / g) as u64).collect();
    let total: u64 = ints.iter().sum();
    if total > MAX_TOTAL_SPEED {
        return Err(Error::Invalid(format!(
            "scaled speeds sum to {total}, above the limit of {MAX_TOTAL_SPEED}"
        )));
    }
    Ok(ints.into_iter().map(|v| v as u32).collect())
}

/// Plan for robots with the given relative speeds.
pub fn plan_with_speeds(speeds: &[Ratio<i64>], n: u64) -> Result<SearchPlan> {
    let s = scale_speeds(speeds)?;
    if n == 0 {
        return Err(Error::Invalid("radius must be at least 1".into()));
    }
    build(s, n)
}

fn build(speeds: Vec<u32>, n: u64) -> Result<SearchPlan> {
    let k = speeds.len();
    let targets = pattern(&speeds, 1, n + 2, &vec![LatticePoint::ORIGIN; k]);
    let mut trajectories: Vec<Trajectory> = speeds
        .iter()
        .enumerate()
        .map(|(i, &s)| Trajectory::new(i, s, Time::from_integer(0), LatticePoint::ORIGIN))
        .collect();
    let last = (0..k).map(|i| follow(&mut trajectories[i], &targets[i], n)).collect::<Vec<_>>();
    cut_at_common_horizon(&mut trajectories, &last, Time::from_integer(0));
    let (region_count, region_assignment) = region_assignment(&speeds);
    Ok(SearchPlan {
        robot_count: k,
        speeds,
        region_count,
        region_assignment,
        max_radius: n,
        trajectories,
        join_schedule: Vec::new(),
    })
}

/// Target sequences: rotating bands for equal speeds, weighted wedges otherwise.
fn pattern(speeds: &[u32], m0: u64, n_max: u64, starts: &[LatticePoint]) -> Vec<Vec<LatticePoint>> {
    if speeds.windows(2).all(|w| w[0] == w[1]) {
        band_targets(speeds.len(), m0, n_max)
    } else {
        wedges::wedge_targets_from(speeds, m0, n_max, starts)
    }
}

/// Walks `tr` through `targets`, skipping ones the robot has already stood on.
/// Returns the step at which the robot last reaches a new point of the
/// `n`-ball.
fn follow(tr: &mut Trajectory, targets: &[LatticePoint], n: u64) -> Option<usize> {
    let mut seen: HashSet<LatticePoint> = tr.points().iter().copied().collect();
    let mut last = None;
    for &t in targets {
        if seen.contains(&t) && t != tr.end() {
            continue;
        }
        let from = tr.len();
        tr.walk_to(t, |p| seen.contains(&p));
        for (i, p) in tr.points().iter().enumerate().skip(from + 1) {
            if seen.insert(*p) && p.l1_norm() <= n {
                last = Some(i);
            }
        }
    }
    last
}

/// Stops every robot at the moment the last one finishes its in-ball targets.
fn cut_at_common_horizon(trs: &mut [Trajectory], last: &[Option<usize>], floor: Time) {
    let horizon = trs
        .iter()
        .zip(last)
        .filter_map(|(t, l)| l.map(|i| t.time_at(i)))
        .fold(floor, Time::max);
    for t in trs.iter_mut() {
        let s = t.steps_by(horizon);
        t.truncate_steps(s);
    }
}

/// Adds `added` unit-speed robots at the origin at `join_time` and re-plans
/// everything outside the ball already explored by then.
pub fn transition_on_join(plan: &SearchPlan, join_time: Time, added: usize) -> Result<SearchPlan> {
    if added == 0 {
        return Ok(plan.clone());
    }
    if join_time < Time::from_integer(0) {
        return Err(Error::Invalid("join time must be non-negative".into()));
    }
    if join_time > plan.horizon() {
        return Err(Error::JoinBeyondHorizon(format!(
            "join at {join_time} but the plan ends at {}",
            plan.horizon()
        )));
    }
    if let Some(prev) = plan.join_schedule.last() {
        if join_time < prev.time {
            return Err(Error::Invalid("joins must be given in time order".into()));
        }
    }
    let n = plan.max_radius;
    let mut trs = plan.trajectories.clone();
    let mut explored = HashSet::new();
    for t in trs.iter_mut() {
        let s = t.steps_by(join_time);
        if t.t0 <= join_time {
            t.truncate_steps(s);
            explored.extend(t.points().iter().copied());
        }
    }
    let radius = (0..=n)
        .take_while(|&r| {
            crate::lattice::sphere_points(r).iter().all(|p| explored.contains(p))
        })
        .last()
        .unwrap_or(0);

    let k = plan.robot_count + added;
    let mut speeds = plan.speeds.clone();
    speeds.extend(std::iter::repeat(1).take(added));
    for i in plan.robot_count..k {
        trs.push(Trajectory::new(i, 1, join_time, LatticePoint::ORIGIN));
    }
    let starts: Vec<LatticePoint> = trs.iter().map(Trajectory::end).collect();
    let mut slots = if radius >= n {
        vec![Vec::new(); k]
    } else {
        pattern(&speeds, radius + 1, n + 2, &starts)
    };
    for s in slots.iter_mut() {
        s.retain(|p| !explored.contains(p));
    }

    // Equal speeds: any robot can take any slot, so pick the cheapest matching.
    let order: Vec<usize> = if speeds.windows(2).all(|w| w[0] == w[1]) {
        let cost: Vec<Vec<i64>> = starts
            .iter()
            .map(|p| {
                slots
                    .iter()
                    .map(|s| s.first().map_or(0, |t| p.l1_dist(*t) as i64))
                    .collect()
            })
            .collect();
        let sol = transport(&vec![1; k], &vec![1; k], &cost, 1)?;
        sol.flow
            .iter()
            .map(|row| row.iter().position(|&f| f == 1).expect("perfect matching"))
            .collect()
    } else {
        (0..k).collect()
    };

    let transit = (0..k)
        .map(|i| slots[order[i]].first().map_or(0, |t| starts[i].l1_dist(*t)))
        .collect();
    let last: Vec<Option<usize>> = (0..k).map(|i| follow(&mut trs[i], &slots[order[i]], n)).collect();
    cut_at_common_horizon(&mut trs, &last, join_time);

    let (region_count, region_assignment) = region_assignment(&speeds);
    let mut join_schedule = plan.join_schedule.clone();
    join_schedule.push(JoinEvent { time: join_time, added, radius, transit });
    Ok(SearchPlan {
        robot_count: k,
        speeds,
        region_count,
        region_assignment,
        max_radius: n,
        trajectories: trs,
        join_schedule,
    })
}

/// Every point of the closed `n`-ball that no trajectory visits.
pub fn uncovered(plan: &SearchPlan, n: u64) -> Vec<LatticePoint> {
    let seen: HashSet<LatticePoint> =
        plan.trajectories.iter().flat_map(|t| t.points().iter().copied()).collect();
    ball_points(n).filter(|p| !seen.contains(p)).collect()
}
