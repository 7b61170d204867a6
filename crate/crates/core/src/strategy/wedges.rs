//! Speed-weighted wedges.
//!
//! Each sphere is split into one arc per robot, sized so that all robots
//! finish the sphere at (nearly) the same wall-clock time. A robot sweeps
//! its arc from whichever end is closer, two unit steps per sphere point.

use crate::lattice::{sphere_point, LatticePoint};


struct Level {
    m: u64,
    /// per robot: (position, finish time in units of 1/lcm)
    pos: Vec<LatticePoint>,
    time: Vec<i128>,
    weight: Vec<i128>,
}

impl Level {
    /// Cost and finishing point of sweeping `lo..hi` from the nearer end.
    fn sweep(&self, i: usize, lo: i64, hi: i64) -> (i128, LatticePoint, bool) {
        if lo >= hi {
            return (0, self.pos[i], true);
        }
        let a = sphere_point(self.m, lo);
        let b = sphere_point(self.m, hi - 1);
        let (da, db) = (self.pos[i].l1_dist(a), self.pos[i].l1_dist(b));
        let walk = 2 * (hi - lo - 1) as i128;
        if da <= db {
            (da as i128 + walk, b, true)
        } else {
            (db as i128 + walk, a, false)
        }
    }

    fn finish(&self, b: &[i64]) -> Vec<i128> {
        (0..self.pos.len())
            .map(|i| self.time[i] + self.sweep(i, b[i], b[i + 1]).0 * self.weight[i])
            .collect()
    }
}

fn score(t: &[i128]) -> (i128, i128, i128) {
    let hi = *t.iter().max().unwrap();
    let lo = *t.iter().min().unwrap();
    (hi - lo, hi, t.iter().map(|x| x * x).sum())
}

/// Target sequences for robots with integer `speeds`, starting at the origin
/// and covering spheres `1..=n_max` completely.
pub fn wedge_targets(speeds: &[u32], n_max: u64) -> Vec<Vec<LatticePoint>> {
    wedge_targets_from(speeds, 1, n_max, &vec![LatticePoint::ORIGIN; speeds.len()])
}

/// Same as [`wedge_targets`] but for spheres `m0..=n_max`, with robots
/// currently standing at `starts`.
pub fn wedge_targets_from(
    speeds: &[u32],
    m0: u64,
    n_max: u64,
    starts: &[LatticePoint],
) -> Vec<Vec<LatticePoint>> {
    let k = speeds.len();
    assert_eq!(starts.len(), k);
    assert!(k >= 1 && speeds.iter().all(|&s| s > 0));
    let l = speeds.iter().fold(1u64, |a, &s| num_integer::lcm(a, s as u64));
    let total: u64 = speeds.iter().map(|&s| s as u64).sum();
    let mut cum = vec![0u64; k + 1];
    for i in 0..k {
        cum[i + 1] = cum[i] + speeds[i] as u64;
    }
    let mut lv = Level {
        m: 0,
        pos: starts.to_vec(),
        time: vec![0; k],
        weight: speeds.iter().map(|&s| (l / s as u64) as i128).collect(),
    };
    let mut out = vec![Vec::new(); k];
    for m in m0..=n_max {
        lv.m = m;
        let size = 4 * m as i64;
        let mut b: Vec<i64> = cum
            .iter()
            .map(|&c| ((2 * size as u64 * c + total) / (2 * total)) as i64)
            .collect();
        let mut best = score(&lv.finish(&b));
        loop {
            let mut improved = false;
            for j in 1..k {
                for d in [-1i64, 1] {
                    let v = b[j] + d;
                    if v < b[j - 1] || v > b[j + 1] {
                        continue;
                    }
                    let old = b[j];
                    b[j] = v;
                    let s = score(&lv.finish(&b));
                    if s < best {
                        best = s;
                        improved = true;
                    } else {
                        b[j] = old;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        for i in 0..k {
            let (lo, hi) = (b[i], b[i + 1]);
            let (cost, end, forward) = lv.sweep(i, lo, hi);
            if lo < hi {
                if forward {
                    out[i].extend((lo..hi).map(|p| sphere_point(m, p)));
                } else {
                    out[i].extend((lo..hi).rev().map(|p| sphere_point(m, p)));
                }
            }
            lv.time[i] += cost * lv.weight[i];
            lv.pos[i] = end;
        }
    }
    out
}
