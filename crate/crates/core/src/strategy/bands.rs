//! Rotating two-level bands.
//!
//! Every robot owns a contiguous arc of each sphere. It sweeps its arc of
//! sphere m together with the leading part of its arc on sphere m + 1 in
//! one zigzag ("band m"), so the next band starts right where the previous
//! one stopped and the arcs drift counter-clockwise by roughly half their
//! width per level. The split between the two spheres is held near one
//! half, and each robot nudges its next start by at most one point to keep
//! neighbouring arcs even.

use crate::lattice::{sphere_point, LatticePoint};

/// Position in sweep order: (quadrant, 2t) on the upper sphere and
/// (quadrant, 2t + 1) on the lower one, so both spheres interleave.
fn key(level: i64, p: i64, upper: bool) -> (i64, i64) {
    let (q, t) = (p.div_euclid(level), p.rem_euclid(level));
    (q, 2 * t + if upper { 0 } else { 1 })
}

/// Per-robot target sequences covering spheres `m0..=n_max` (plus the leading
/// part of sphere `n_max + 1`) with `k` equal arcs.
pub fn band_targets(k: usize, m0: u64, n_max: u64) -> Vec<Vec<LatticePoint>> {
    assert!(k >= 1 && m0 >= 1);
    let k_i = k as i64;
    let m0_i = m0 as i64;
    // arc starts on the current level (unwrapped, ascending) and the number of
    // points already taken from the front of each arc by the previous band
    let mut start: Vec<i64> = (0..k_i).map(|i| (4 * m0_i * i).div_euclid(k_i)).collect();
    let mut taken = vec![0i64; k];
    let mut out = vec![Vec::new(); k];

    for m in m0 as i64..=n_max as i64 {
        let (m1, m2) = (m + 1, m + 2);
        let mut ustart = vec![0i64; k];
        let mut lstart = vec![0i64; k];
        let mut lcount = vec![0i64; k];
        let mut arc = vec![0i64; k];
        for i in 0..k {
            let next = if i + 1 < k { start[i + 1] } else { start[0] + 4 * m };
            arc[i] = next - start[i];
            lcount[i] = (arc[i] - taken[i]).max(0);
            if taken[i] == 0 {
                let (q, t) = (start[i].div_euclid(m), start[i].rem_euclid(m));
                ustart[i] = q * m1 + t;
                lstart[i] = start[i];
            } else {
                let e = start[i] + taken[i] - 1;
                let (q, t) = (e.div_euclid(m), e.rem_euclid(m));
                ustart[i] = q * m1 + t + 1;
                lstart[i] = e + 1;
            }
        }
        let next_start = |i: usize, u: i64| -> i64 {
            if u == 0 {
                let p = ustart[i];
                p.div_euclid(m1) * m2 + p.rem_euclid(m1)
            } else {
                let p = ustart[i] + u - 1;
                p.div_euclid(m1) * m2 + p.rem_euclid(m1) + 1
            }
        };

        // upper-sphere count: zigzag count, held near half the arc
        let mut up = vec![0i64; k];
        for i in 0..k {
            let natural = if lcount[i] == 0 {
                0
            } else {
                let last = key(m, lstart[i] + lcount[i] - 1, false);
                let mut c = 0;
                while key(m1, ustart[i] + c, true) < last {
                    c += 1;
                }
                c + 1
            };
            let half = arc[i] * m1 / (2 * m);
            up[i] = half.max(if lcount[i] > 0 { natural - 1 } else { 0 });
        }

        // even out next-level arcs, one point at a time
        let mut ns: Vec<i64> = (0..k).map(|i| next_start(i, up[i])).collect();
        let arc_at = |ns: &[i64], j: usize| -> i64 {
            if j + 1 < k {
                ns[j + 1] - ns[j]
            } else {
                ns[0] + 4 * m2 - ns[j]
            }
        };
        for i in 0..k {
            let mut best: Option<(i128, i64)> = None;
            for d in -1..=1i64 {
                let u = up[i] + d;
                if u < 0 {
                    continue;
                }
                let mut trial = ns.clone();
                trial[i] = next_start(i, u);
                if i > 0 && trial[i] < trial[i - 1] {
                    continue;
                }
                if i + 1 < k && trial[i] > trial[i + 1] {
                    continue;
                }
                let prev = if i == 0 { k - 1 } else { i - 1 };
                let dev = |a: i64| ((k_i * a - 4 * m2) as i128).pow(2);
                let cost = 2 * dev(arc_at(&trial, prev))
                    + 2 * dev(arc_at(&trial, i))
                    + (k_i as i128).pow(2) * d.abs() as i128;
                if best.map_or(true, |(c, _)| cost < c) {
                    best = Some((cost, u));
                }
            }
            if let Some((_, u)) = best {
                up[i] = u;
                ns[i] = next_start(i, u);
            }
        }

        for i in 0..k {
            let seq = &mut out[i];
            let (mut a, mut b) = (0i64, 0i64);
            while a < lcount[i] || b < up[i] {
                let take_upper = b < up[i]
                    && (a >= lcount[i]
                        || key(m1, ustart[i] + b, true) < key(m, lstart[i] + a, false));
                if take_upper {
                    seq.push(sphere_point(m1 as u64, ustart[i] + b));
                    b += 1;
                } else {
                    seq.push(sphere_point(m as u64, lstart[i] + a));
                    a += 1;
                }
            }
        }

        start = ustart;
        taken = up;
        let base = start[0].div_euclid(4 * m1) * 4 * m1;
        for s in start.iter_mut() {
            *s -= base;
        }
        for i in 1..k {
            while start[i] < start[i - 1] {
                start[i] += 4 * m1;
            }
        }
    }
    out
}
