//! Plan export and import: CSV trajectories plus a JSON metadata header.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticePoint, Time, Trajectory};
use crate::strategy::{JoinEvent, SearchPlan};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanHeader {
    pub robot_count: usize,
    pub speeds: Vec<u32>,
    pub region_count: usize,
    pub region_assignment: Vec<Range<usize>>,
    pub max_radius: u64,
    pub start_times: Vec<Time>,
    pub join_schedule: Vec<JoinEvent>,
}

impl PlanHeader {
    pub fn of(plan: &SearchPlan) -> Self {
        PlanHeader {
            robot_count: plan.robot_count,
            speeds: plan.speeds.clone(),
            region_count: plan.region_count,
            region_assignment: plan.region_assignment.clone(),
            max_radius: plan.max_radius,
            start_times: plan.trajectories.iter().map(|t| t.t0).collect(),
            join_schedule: plan.join_schedule.clone(),
        }
    }
}

/// Exact decimal for terminating fractions, six places otherwise.
pub fn format_time(t: Time) -> String {
    if t.is_integer() {
        return t.to_integer().to_string();
    }
    let mut d = *t.denom();
    while d % 2 == 0 {
        d /= 2;
    }
    while d % 5 == 0 {
        d /= 5;
    }
    let mut s = String::new();
    if d == 1 {
        // terminating: print digits until the remainder vanishes
        let neg = t < Time::from_integer(0);
        let a = if neg { -t } else { t };
        let _ = write!(s, "{}{}.", if neg { "-" } else { "" }, a.to_integer());
        let mut frac = a.fract();
        while frac != Time::from_integer(0) {
            frac *= 10;
            let _ = write!(s, "{}", frac.to_integer());
            frac = frac.fract();
        }
    } else {
        let _ = write!(s, "{:.6}", *t.numer() as f64 / *t.denom() as f64);
    }
    s
}

/// Writes `robot_id,t,x,y` rows sorted by robot, then time.
pub fn write_plan_csv<W: Write>(plan: &SearchPlan, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut trs: Vec<&Trajectory> = plan.trajectories.iter().collect();
    trs.sort_by_key(|t| t.robot_id);
    // the header row comes from the field names of `Row`
    for tr in trs {
        for (i, p) in tr.points().iter().enumerate() {
            w.serialize(Row { robot_id: tr.robot_id, t: format_time(tr.time_at(i)), x: p.x, y: p.y })
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct Row {
    robot_id: usize,
    t: String,
    x: i64,
    y: i64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

fn parse_time(s: &str) -> Result<Time> {
    let bad = || Error::Invalid(format!("bad time {s:?}"));
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let mut t = Time::from_integer(int.parse::<i64>().map_err(|_| bad())?);
    let mut scale = 1i64;
    for c in frac.chars() {
        let d = c.to_digit(10).ok_or_else(bad)? as i64;
        scale = scale.checked_mul(10).ok_or(Error::Overflow)?;
        t += Time::new(d, scale);
    }
    Ok(if neg { -t } else { t })
}

/// Reads a plan CSV. Without a header every robot is assumed to move at
/// unit speed from its first row's time; with one, speeds and metadata come
/// from the header and the CSV provides the paths.
pub fn read_plan(csv: &str, header: Option<&PlanHeader>) -> Result<SearchPlan> {
    let mut rows: BTreeMap<usize, Vec<(Time, LatticePoint)>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_reader(csv.as_bytes());
    if rdr.headers().map_err(csv_err)? != vec!["robot_id", "t", "x", "y"] {
        return Err(Error::Invalid("missing `robot_id,t,x,y` header".into()));
    }
    for row in rdr.deserialize::<Row>() {
        let row = row.map_err(csv_err)?;
        let t = parse_time(&row.t)?;
        rows.entry(row.robot_id).or_default().push((t, LatticePoint::new(row.x, row.y)));
    }
    if rows.is_empty() {
        return Err(Error::Invalid("plan has no rows".into()));
    }
    let k = header.map_or(rows.len(), |h| h.robot_count);
    if rows.len() != k || rows.keys().copied().ne(0..k) {
        return Err(Error::Invalid("robot ids must be 0..k with one block per robot".into()));
    }
    let mut trajectories = Vec::with_capacity(k);
    for (id, pts) in rows {
        let speed = header.map_or(1, |h| h.speeds[id]);
        let t0 = header.map_or(pts[0].0, |h| h.start_times[id]);
        let points: Vec<LatticePoint> = pts.iter().map(|r| r.1).collect();
        let tr = Trajectory::from_points(id, speed, t0, points)?;
        if header.is_none() {
            for (i, (t, _)) in pts.iter().enumerate() {
                if *t != tr.time_at(i) {
                    return Err(Error::Invalid(format!("robot {id}: times are not unit steps")));
                }
            }
        }
        trajectories.push(tr);
    }
    let plan = match header {
        Some(h) => SearchPlan {
            robot_count: h.robot_count,
            speeds: h.speeds.clone(),
            region_count: h.region_count,
            region_assignment: h.region_assignment.clone(),
            max_radius: h.max_radius,
            trajectories,
            join_schedule: h.join_schedule.clone(),
        },
        None => {
            let speeds = vec![1; k];
            let (region_count, region_assignment) = crate::strategy::region_assignment(&speeds);
            // largest fully covered ball
            let seen: std::collections::HashSet<LatticePoint> =
                trajectories.iter().flat_map(|t| t.points().iter().copied()).collect();
            let max_radius = (1..)
                .take_while(|&n| crate::lattice::sphere_points(n).iter().all(|p| seen.contains(p)))
                .last()
                .unwrap_or(0);
            SearchPlan {
                robot_count: k,
                speeds,
                region_count,
                region_assignment,
                max_radius,
                trajectories,
                join_schedule: Vec::new(),
            }
        }
    };
    Ok(plan)
}
