//! Coverage checks and per-ball work accounting.

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ball_points, sphere_points, LatticePoint, Time};
use crate::strategy::SearchPlan;

pub type Exact = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallAudit {
    pub n: u64,
    /// Time at which the last point of the closed n-ball is first reached.
    pub last_visit_time: Time,
    /// Combined steps of all robots up to `last_visit_time`.
    pub a_n: u64,
    /// Points of the (n+1)-sphere already visited by then.
    pub g_n: u64,
    /// Latest-reached point of the n-sphere.
    pub worst_point: LatticePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    /// Normalizing robot count: the sum of the (integer) speeds.
    pub k: u64,
    pub per_ball: Vec<BallAudit>,
    /// n → last_visit_time / n.
    pub measured_ratio: BTreeMap<u64, Exact>,
    /// n → A(n) / (k·n).
    pub work_ratio: BTreeMap<u64, Exact>,
    pub lower_envelope: BTreeMap<u64, Exact>,
    pub upper_envelope: BTreeMap<u64, Exact>,
}

/// Lower bound on the competitive ratio of any k-robot strategy.
pub fn lower_envelope(n: u64, k: u64) -> Exact {
    let n = n as i64;
    (Exact::from_integer(2 * n + 4) + Exact::new(4, 3 * n)) / k as i64
}

/// Upper envelope of the even-work strategy.
pub fn upper_envelope(n: u64, k: u64) -> Exact {
    (Exact::from_integer(2 * n as i64) + Exact::new(743, 100)) / k as i64
}

/// 2n + (4−k)·n/(3n+1).
pub fn theoretical_g(n: u64, k: u64) -> Exact {
    let (n, k) = (n as i64, k as i64);
    Exact::from_integer(2 * n) + Exact::new((4 - k) * n, 3 * n + 1)
}

/// Earliest time any robot stands on each point.
pub fn first_visits(plan: &SearchPlan) -> HashMap<LatticePoint, Time> {
    let mut out: HashMap<LatticePoint, Time> = HashMap::new();
    for tr in &plan.trajectories {
        for (p, t) in tr.visit_times() {
            out.entry(p).and_modify(|e| *e = (*e).min(t)).or_insert(t);
        }
    }
    out
}

/// First point of the closed n-ball that is never visited, if any.
pub fn check_coverage(plan: &SearchPlan, n: u64) -> Result<()> {
    let first = first_visits(plan);
    match ball_points(n).find(|p| !first.contains_key(p)) {
        Some(p) => Err(Error::IncompleteCoverage(p)),
        None => Ok(()),
    }
}

/// Audits balls 1..n−1 of a plan that covers the closed n-ball.
pub fn audit_plan(plan: &SearchPlan, n: u64) -> Result<RatioReport> {
    let first = first_visits(plan);
    if let Some(p) = ball_points(n).find(|p| !first.contains_key(p)) {
        return Err(Error::IncompleteCoverage(p));
    }
    let k: u64 = plan.speeds.iter().map(|&s| s as u64).sum();
    let mut report = RatioReport {
        k,
        per_ball: Vec::new(),
        measured_ratio: BTreeMap::new(),
        work_ratio: BTreeMap::new(),
        lower_envelope: BTreeMap::new(),
        upper_envelope: BTreeMap::new(),
    };
    let mut t_ball = first[&LatticePoint::ORIGIN];
    for m in 1..n {
        let sphere = sphere_points(m);
        let mut worst = sphere[0];
        for p in &sphere {
            if first[p] > first[&worst] {
                worst = *p;
            }
        }
        t_ball = t_ball.max(first[&worst]);
        let a_n: u64 = plan.trajectories.iter().map(|t| t.steps_by(t_ball) as u64).sum();
        let g_n = sphere_points(m + 1)
            .iter()
            .filter(|p| first.get(p).is_some_and(|t| *t <= t_ball))
            .count() as u64;
        let mi = m as i64;
        report.measured_ratio.insert(m, t_ball / mi);
        report.work_ratio.insert(m, Exact::new(a_n as i64, k as i64 * mi));
        report.lower_envelope.insert(m, lower_envelope(m, k));
        report.upper_envelope.insert(m, upper_envelope(m, k));
        report.per_ball.push(BallAudit { n: m, last_visit_time: t_ball, a_n, g_n, worst_point: worst });
    }
    Ok(report)
}

/// Per ball n in 1..=max_n: latest minus earliest robot completion time,
/// where a robot completes ball n when it reaches the last point of the
/// ball that it is first to visit.
pub fn completion_skew(plan: &SearchPlan, max_n: u64) -> Vec<Time> {
    let k = plan.trajectories.len();
    let mut owner: HashMap<LatticePoint, (Time, usize)> = HashMap::new();
    for (i, tr) in plan.trajectories.iter().enumerate() {
        for (p, t) in tr.visit_times() {
            owner
                .entry(p)
                .and_modify(|e| {
                    if (t, i) < *e {
                        *e = (t, i)
                    }
                })
                .or_insert((t, i));
        }
    }
    let mut done: Vec<Option<Time>> = vec![None; k];
    let mut out = Vec::new();
    for m in 0..=max_n {
        for p in sphere_points(m) {
            if let Some(&(t, i)) = owner.get(&p) {
                done[i] = Some(done[i].map_or(t, |d| d.max(t)));
            }
        }
        if m == 0 {
            continue;
        }
        let times: Vec<Time> = done.iter().flatten().copied().collect();
        let hi = times.iter().max().copied().unwrap_or_default();
        let lo = times.iter().min().copied().unwrap_or_default();
        out.push(hi - lo);
    }
    out
}
