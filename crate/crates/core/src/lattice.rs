//! L1 lattice geometry: points, spheres, balls and unit-step trajectories.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wall-clock time. Exact so that speed-scaled timestamps compare honestly.
pub type Time = Ratio<i64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub x: i64,
    pub y: i64,
}

impl LatticePoint {
    pub const ORIGIN: LatticePoint = LatticePoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        LatticePoint { x, y }
    }

    pub fn l1_norm(self) -> u64 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }

    pub fn l1_dist(self, other: LatticePoint) -> u64 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }

    /// Neighbor one unit away, failing instead of wrapping at the integer limits.
    pub fn step(self, dir: Direction) -> Result<LatticePoint> {
        let (dx, dy) = dir.delta();
        match (self.x.checked_add(dx), self.y.checked_add(dy)) {
            (Some(x), Some(y)) => Ok(LatticePoint { x, y }),
            _ => Err(Error::Overflow),
        }
    }

    /// Quarter turn counter-clockwise about the origin.
    pub fn rotate(self) -> LatticePoint {
        LatticePoint { x: -self.y, y: self.x }
    }
}

impl From<(i64, i64)> for LatticePoint {
    fn from((x, y): (i64, i64)) -> Self {
        LatticePoint { x, y }
    }
}

pub fn l1_norm(p: LatticePoint) -> u64 {
    p.l1_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub fn delta(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, 1),
            Direction::Down => (0, -1),
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
        }
    }

    fn between(a: LatticePoint, b: LatticePoint) -> Option<Direction> {
        match (b.x - a.x, b.y - a.y) {
            (0, 1) => Some(Direction::Up),
            (0, -1) => Some(Direction::Down),
            (-1, 0) => Some(Direction::Left),
            (1, 0) => Some(Direction::Right),
            _ => None,
        }
    }
}

/// A run of `count` unit moves in one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub direction: Direction,
    pub count: u32,
}

/// Number of points on the sphere of radius n.
pub fn sphere_size(n: u64) -> u64 {
    if n == 0 {
        1
    } else {
        4 * n
    }
}

/// Point `p` of the n-sphere, counting counter-clockwise from (n, 0).
///
/// Quadrant q = p / n holds the rotations of (n - t, t) for t = p mod n, so
/// every axis point opens the quadrant that follows it. `p` may be any
/// integer; it is taken modulo 4n.
pub fn sphere_point(n: u64, p: i64) -> LatticePoint {
    if n == 0 {
        return LatticePoint::ORIGIN;
    }
    let n = n as i64;
    let p = p.rem_euclid(4 * n);
    let (q, t) = (p / n, p % n);
    let mut pt = LatticePoint::new(n - t, t);
    for _ in 0..q {
        pt = pt.rotate();
    }
    pt
}

/// Inverse of [`sphere_point`] for points off the origin.
pub fn sphere_index(pt: LatticePoint) -> i64 {
    let n = pt.l1_norm() as i64;
    if n == 0 {
        return 0;
    }
    let (x, y) = (pt.x, pt.y);
    if x > 0 && y >= 0 {
        y
    } else if x <= 0 && y > 0 {
        n - x
    } else if x < 0 && y <= 0 {
        2 * n - y
    } else {
        3 * n + x
    }
}

pub fn sphere_points(n: u64) -> Vec<LatticePoint> {
    (0..sphere_size(n) as i64).map(|p| sphere_point(n, p)).collect()
}

pub fn closed_ball_count(n: u64) -> u64 {
    2 * n * n + 2 * n + 1
}

pub fn ball_points(n: u64) -> impl Iterator<Item = LatticePoint> {
    (0..=n).flat_map(sphere_points)
}

/// One robot's path: a start point and the unit moves that follow it.
///
/// The robot leaves `start` at time `t0` and takes one unit step every
/// `1/speed` time units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub robot_id: usize,
    pub speed: u32,
    pub t0: Time,
    points: Vec<LatticePoint>,
}

impl Trajectory {
    pub fn new(robot_id: usize, speed: u32, t0: Time, start: LatticePoint) -> Self {
        assert!(speed > 0, "speed must be positive");
        Trajectory { robot_id, speed, t0, points: vec![start] }
    }

    /// Builds a trajectory from explicit points, checking unit adjacency.
    pub fn from_points(
        robot_id: usize,
        speed: u32,
        t0: Time,
        points: Vec<LatticePoint>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Invalid("trajectory has no points".into()));
        }
        if speed == 0 {
            return Err(Error::Invalid("speed must be positive".into()));
        }
        for w in points.windows(2) {
            if w[0].l1_dist(w[1]) != 1 {
                return Err(Error::Invalid(format!(
                    "robot {robot_id}: {:?} -> {:?} is not a unit step",
                    w[0], w[1]
                )));
            }
        }
        Ok(Trajectory { robot_id, speed, t0, points })
    }

    pub fn from_steps(
        robot_id: usize,
        speed: u32,
        t0: Time,
        start: LatticePoint,
        steps: &[Step],
    ) -> Result<Self> {
        let mut tr = Trajectory::new(robot_id, speed, t0, start);
        for s in steps {
            if s.count == 0 {
                return Err(Error::Invalid("step count must be at least 1".into()));
            }
            for _ in 0..s.count {
                let next = tr.end().step(s.direction)?;
                tr.points.push(next);
            }
        }
        Ok(tr)
    }

    pub fn start(&self) -> LatticePoint {
        self.points[0]
    }

    pub fn end(&self) -> LatticePoint {
        *self.points.last().unwrap()
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    /// Number of unit steps taken.
    pub fn len(&self) -> usize {
        self.points.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.points.len() == 1
    }

    pub fn push(&mut self, p: LatticePoint) {
        debug_assert_eq!(self.end().l1_dist(p), 1);
        self.points.push(p);
    }

    pub fn truncate_steps(&mut self, steps: usize) {
        self.points.truncate(steps + 1);
    }

    /// Time at which the robot stands on its `i`-th point.
    pub fn time_at(&self, i: usize) -> Time {
        self.t0 + Time::new(i as i64, self.speed as i64)
    }

    /// Steps completed by time `t` (clamped to the path length).
    pub fn steps_by(&self, t: Time) -> usize {
        if t < self.t0 {
            return 0;
        }
        let d = (t - self.t0) * Time::from_integer(self.speed as i64);
        (d.floor().to_integer().max(0) as usize).min(self.len())
    }

    /// Run-length encoded moves.
    pub fn steps(&self) -> Vec<Step> {
        let mut out: Vec<Step> = Vec::new();
        for w in self.points.windows(2) {
            let d = Direction::between(w[0], w[1]).expect("unit step");
            match out.last_mut() {
                Some(s) if s.direction == d => s.count += 1,
                _ => out.push(Step { direction: d, count: 1 }),
            }
        }
        out
    }

    /// Earliest visit time of every point on the path.
    pub fn visit_times(&self) -> HashMap<LatticePoint, Time> {
        let mut out = HashMap::with_capacity(self.points.len());
        for (i, p) in self.points.iter().enumerate() {
            out.entry(*p).or_insert_with(|| self.time_at(i));
        }
        out
    }

    /// How many times each point is stood on (the start counts once).
    pub fn visit_counts(&self) -> HashMap<LatticePoint, u32> {
        let mut out = HashMap::new();
        for p in &self.points {
            *out.entry(*p).or_insert(0) += 1;
        }
        out
    }

    /// Walks to `target` along one of the two L-shaped shortest routes,
    /// preferring the one that crosses more already-visited points.
    pub fn walk_to<F: Fn(LatticePoint) -> bool>(&mut self, target: LatticePoint, visited: F) {
        let from = self.end();
        if from == target {
            return;
        }
        let xfirst = l_route(from, target, true);
        let yfirst = l_route(from, target, false);
        let seen = |r: &[LatticePoint]| r[..r.len() - 1].iter().filter(|p| visited(**p)).count();
        let route = if seen(&yfirst) > seen(&xfirst) { yfirst } else { xfirst };
        self.points.extend(route);
    }
}

fn l_route(from: LatticePoint, to: LatticePoint, xfirst: bool) -> Vec<LatticePoint> {
    let mut out = Vec::with_capacity(from.l1_dist(to) as usize);
    let mut c = from;
    let sx = (to.x - c.x).signum();
    let sy = (to.y - c.y).signum();
    let go_x = |c: &mut LatticePoint, out: &mut Vec<LatticePoint>| {
        while c.x != to.x {
            c.x += sx;
            out.push(*c);
        }
    };
    let go_y = |c: &mut LatticePoint, out: &mut Vec<LatticePoint>| {
        while c.y != to.y {
            c.y += sy;
            out.push(*c);
        }
    };
    if xfirst {
        go_x(&mut c, &mut out);
        go_y(&mut c, &mut out);
    } else {
        go_y(&mut c, &mut out);
        go_x(&mut c, &mut out);
    }
    out
}
