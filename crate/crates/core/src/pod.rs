//! Probability-of-detection grids and the supercell allocation scheduler.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{build_flow, solve_min_cost, LedgerEntry, Move};
use crate::lattice::LatticePoint;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PodGrid {
    pub width: usize,
    pub height: usize,
    /// Row-major prior probabilities, normalized to sum to one.
    pub cell_prob: Vec<f64>,
    /// Per-cell probability of detecting a present target in one pass.
    pub pod: Vec<f64>,
    pub visit_count: Vec<u32>,
}

impl PodGrid {
    pub fn new(width: usize, height: usize, weights: Vec<f64>, pod_per_pass: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Grid("dimensions must be positive".into()));
        }
        if weights.len() != width * height {
            return Err(Error::Grid(format!(
                "expected {} values, found {}",
                width * height,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Grid("probabilities must be finite and non-negative".into()));
        }
        if !(pod_per_pass > 0.0 && pod_per_pass <= 1.0) {
            return Err(Error::Invalid("pod per pass must be in (0, 1]".into()));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::Grid("grid has no probability mass".into()));
        }
        Ok(PodGrid {
            width,
            height,
            cell_prob: weights.iter().map(|w| w / sum).collect(),
            pod: vec![pod_per_pass; width * height],
            visit_count: vec![0; width * height],
        })
    }

    /// Parses `width height` followed by `height` rows of `width` values;
    /// lines starting with `#` are ignored.
    pub fn parse(text: &str, pod_per_pass: f64) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Grid("empty grid file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Grid(format!("bad dimension {t:?}"))))
            .collect::<Result<_>>()?;
        let [w, h] = dims[..] else {
            return Err(Error::Grid("header must be `width height`".into()));
        };
        let mut values = Vec::with_capacity(w * h);
        let mut rows = 0;
        for line in lines {
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Grid(format!("bad value {t:?}"))))
                .collect::<Result<_>>()?;
            if row.len() != w {
                return Err(Error::Grid(format!("row {} has {} values, expected {w}", rows + 1, row.len())));
            }
            values.extend(row);
            rows += 1;
        }
        if rows != h {
            return Err(Error::Grid(format!("found {rows} rows, expected {h}")));
        }
        PodGrid::new(w, h, values, pod_per_pass)
    }

    pub fn set_pod(&mut self, cell: usize, p: f64) -> Result<()> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Invalid("pod per pass must be in (0, 1]".into()));
        }
        self.pod[cell] = p;
        Ok(())
    }

    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    /// prior · (1 − p)^m for the cell's current visit count.
    pub fn residual(&self, cell: usize) -> f64 {
        self.cell_prob[cell] * (1.0 - self.pod[cell]).powi(self.visit_count[cell] as i32)
    }

    pub fn residual_total(&self) -> f64 {
        (0..self.cell_prob.len()).map(|c| self.residual(c)).sum()
    }
}

pub fn load_pod_grid<R: Read>(mut source: R, pod_per_pass: f64) -> Result<PodGrid> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    PodGrid::parse(&text, pod_per_pass)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supercell {
    pub index: usize,
    pub origin: LatticePoint,
    pub side: usize,
    /// Member cells in sweep order: rings of equal L1 distance from the
    /// entry corner, alternating direction.
    pub cells: Vec<usize>,
    pub combined_prob: f64,
    /// Robots assigned, including ones still travelling here.
    pub robots: u32,
    pub fully_swept: bool,
    cursor: usize,
    arrivals: Vec<(u64, u32)>,
}

impl Supercell {
    pub fn center(&self, grid: &PodGrid) -> LatticePoint {
        let (x0, y0) = (self.origin.x as usize, self.origin.y as usize);
        let w = self.side.min(grid.width - x0);
        let h = self.side.min(grid.height - y0);
        LatticePoint::new((x0 + (w - 1) / 2) as i64, (y0 + (h - 1) / 2) as i64)
    }

    /// Robots on site and able to sweep.
    pub fn available(&self) -> u32 {
        self.robots - self.arrivals.iter().map(|a| a.1).sum::<u32>()
    }

    /// True between passes: every cell has been swept equally often, and
    /// at least once.
    pub fn at_pass_boundary(&self) -> bool {
        self.fully_swept && self.cursor == 0
    }

    /// The last robot may not leave before the pass in progress has covered
    /// every cell.
    pub fn blocked(&self) -> bool {
        self.robots == 1 && !self.at_pass_boundary()
    }

    fn refresh(&mut self, grid: &PodGrid) {
        self.combined_prob = self.cells.iter().map(|&c| grid.residual(c)).sum();
    }
}

/// ceil(sqrt(w·h / 4k)) clamped to [1, min(w, h)].
pub fn default_side(width: usize, height: usize, robots: u32) -> usize {
    let v = (width * height) as f64 / (4.0 * robots.max(1) as f64);
    (v.sqrt().ceil() as usize).clamp(1, width.min(height))
}

fn sweep_order(grid: &PodGrid, x0: usize, y0: usize, side: usize) -> Vec<usize> {
    let w = side.min(grid.width - x0);
    let h = side.min(grid.height - y0);
    let mut out = Vec::with_capacity(w * h);
    for d in 0..w + h - 1 {
        let xs: Vec<usize> = (0..w).filter(|&x| d >= x && d - x < h).collect();
        let ring: Vec<usize> = xs.iter().map(|&x| grid.index(x0 + x, y0 + d - x)).collect();
        if d % 2 == 0 {
            out.extend(ring);
        } else {
            out.extend(ring.into_iter().rev());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub robots: u32,
    /// Supercell side; `None` picks [`default_side`].
    pub side: Option<usize>,
    /// Stop once the residual mass falls below this fraction of the prior.
    pub threshold: f64,
    pub horizon: u64,
}

impl SchedulerConfig {
    pub fn new(robots: u32) -> Self {
        SchedulerConfig { robots, side: None, threshold: 1e-4, horizon: 1_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transfer {
    pub from: usize,
    pub to: usize,
    pub robots: u64,
}

/// One scheduler step as written to the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    pub t: u64,
    pub transfers: Vec<Transfer>,
    pub residual_total: f64,
    /// Cells swept during the step, one entry per pass.
    #[serde(skip)]
    pub passes: Vec<usize>,
    #[serde(skip)]
    pub ledger: Vec<LedgerEntry>,
    #[serde(skip)]
    pub rebalance_iterations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Key {
    value: f64,
    index: usize,
    version: u64,
}

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
/// Larger key wins; on ties the lower index wins.
impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.value.total_cmp(&o.value).then_with(|| o.index.cmp(&self.index))
    }
}

#[derive(Debug, Clone)]
pub struct Scheduler {
    pub grid: PodGrid,
    pub supercells: Vec<Supercell>,
    pub total_robots: u32,
    pub time: u64,
    pub abandon_threshold: f64,
    pub horizon: u64,
    pub terminated: bool,
}

impl Scheduler {
    pub fn new(grid: PodGrid, config: &SchedulerConfig) -> Result<Self> {
        if config.robots == 0 {
            return Err(Error::Invalid("at least one robot is required".into()));
        }
        if config.threshold < 0.0 {
            return Err(Error::Invalid("threshold must be non-negative".into()));
        }
        let side = match config.side {
            Some(0) => return Err(Error::Invalid("supercell side must be positive".into())),
            Some(s) => s.min(grid.width.max(grid.height)),
            None => default_side(grid.width, grid.height, config.robots),
        };
        let mut supercells = Vec::new();
        for y0 in (0..grid.height).step_by(side) {
            for x0 in (0..grid.width).step_by(side) {
                let mut sc = Supercell {
                    index: supercells.len(),
                    origin: LatticePoint::new(x0 as i64, y0 as i64),
                    side,
                    cells: sweep_order(&grid, x0, y0, side),
                    combined_prob: 0.0,
                    robots: 0,
                    fully_swept: false,
                    cursor: 0,
                    arrivals: Vec::new(),
                };
                sc.refresh(&grid);
                supercells.push(sc);
            }
        }
        let mass: f64 = grid.cell_prob.iter().sum();
        let mut s = Scheduler {
            grid,
            supercells,
            total_robots: config.robots,
            time: 0,
            abandon_threshold: config.threshold * mass,
            horizon: config.horizon,
            terminated: false,
        };
        s.allocate_initial();
        Ok(s)
    }

    /// Water-filling: each robot goes to the supercell with the largest
    /// p/(r+1).
    fn allocate_initial(&mut self) {
        let mut heap: BinaryHeap<Key> = self
            .supercells
            .iter()
            .map(|s| Key { value: s.combined_prob, index: s.index, version: 0 })
            .collect();
        for _ in 0..self.total_robots {
            let top = heap.pop().expect("at least one supercell");
            let sc = &mut self.supercells[top.index];
            sc.robots += 1;
            heap.push(Key { value: sc.combined_prob / (sc.robots + 1) as f64, index: sc.index, version: 0 });
        }
    }

    pub fn robots(&self) -> Vec<u32> {
        self.supercells.iter().map(|s| s.robots).collect()
    }

    pub fn residual_total(&self) -> f64 {
        self.supercells.iter().map(|s| s.combined_prob).sum()
    }

    /// max over all p/(r+1) ≤ min over active, unblocked p/r (+ tolerance).
    pub fn is_stable(&self, tol: f64) -> bool {
        let max_gain = self
            .supercells
            .iter()
            .map(|s| s.combined_prob / (s.robots + 1) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let min_keep = self
            .supercells
            .iter()
            .filter(|s| s.robots >= 1 && !s.blocked())
            .map(|s| s.combined_prob / s.robots as f64)
            .fold(f64::INFINITY, f64::min);
        max_gain <= min_keep + tol
    }

    /// Advances one time unit. Returns `None` once the search is over.
    pub fn step(&mut self) -> Option<StepEvent> {
        if self.terminated {
            return None;
        }
        if self.time >= self.horizon || self.residual_total() < self.abandon_threshold || self.residual_total() <= 0.0 {
            self.terminated = true;
            return None;
        }
        self.time += 1;
        let t = self.time;
        let mut passes = Vec::new();
        for sc in self.supercells.iter_mut() {
            sc.arrivals.retain(|a| a.0 > t);
            let a = sc.available() as usize;
            if a == 0 || sc.cells.is_empty() {
                continue;
            }
            for _ in 0..a {
                let c = sc.cells[sc.cursor];
                self.grid.visit_count[c] += 1;
                passes.push(c);
                sc.cursor += 1;
                if sc.cursor == sc.cells.len() {
                    sc.cursor = 0;
                    sc.fully_swept = true;
                }
            }
            sc.refresh(&self.grid);
        }

        let before = self.robots();
        let iterations = self.rebalance();
        let ledger: Vec<LedgerEntry> = self
            .supercells
            .iter()
            .filter(|s| s.robots != before[s.index])
            .map(|s| LedgerEntry {
                id: s.index,
                center: s.center(&self.grid),
                old: before[s.index] as u64,
                new: s.robots as u64,
            })
            .collect();
        let moves = if ledger.is_empty() {
            Vec::new()
        } else {
            let problem = build_flow(&ledger, self.total_robots as u64).expect("transfers conserve robots");
            solve_min_cost(&problem).expect("balanced problem").moves
        };
        self.dispatch(&moves, t);
        Some(StepEvent {
            t,
            transfers: moves.iter().map(|m| Transfer { from: m.from, to: m.to, robots: m.robots }).collect(),
            residual_total: self.residual_total(),
            passes,
            ledger,
            rebalance_iterations: iterations,
        })
    }

    /// Moves one robot at a time from the weakest active supercell to the
    /// strongest candidate until the stability condition holds.
    fn rebalance(&mut self) -> usize {
        let mut version = vec![0u64; self.supercells.len()];
        let gain_key = |s: &Supercell, v: u64| Key { value: s.combined_prob / (s.robots + 1) as f64, index: s.index, version: v };
        // min-queue stored as negated keys; ties still favour the lower index
        let keep_key = |s: &Supercell, v: u64| Key { value: -(s.combined_prob / s.robots as f64), index: s.index, version: v };
        let mut gain: BinaryHeap<Key> = self.supercells.iter().map(|s| gain_key(s, 0)).collect();
        let mut keep: BinaryHeap<Key> = self
            .supercells
            .iter()
            .filter(|s| s.robots >= 1 && !s.blocked())
            .map(|s| keep_key(s, 0))
            .collect();
        let mut iterations = 0;
        loop {
            while gain.peek().is_some_and(|k| k.version != version[k.index]) {
                gain.pop();
            }
            while keep.peek().is_some_and(|k| k.version != version[k.index]) {
                keep.pop();
            }
            let (Some(g), Some(l)) = (gain.peek().copied(), keep.peek().copied()) else { break };
            if g.index == l.index || g.value <= -l.value {
                break;
            }
            iterations += 1;
            self.supercells[l.index].robots -= 1;
            self.supercells[g.index].robots += 1;
            for i in [l.index, g.index] {
                version[i] += 1;
                let s = &self.supercells[i];
                gain.push(gain_key(s, version[i]));
                if s.robots >= 1 && !s.blocked() {
                    keep.push(keep_key(s, version[i]));
                }
            }
        }
        iterations
    }

    /// Sends robots on their way; they sweep once they arrive.
    fn dispatch(&mut self, moves: &[Move], t: u64) {
        let mut outgoing = vec![0u32; self.supercells.len()];
        for m in moves {
            outgoing[m.from] += m.robots as u32;
        }
        for m in moves {
            let from = self.supercells[m.from].center(&self.grid);
            let to = self.supercells[m.to].center(&self.grid);
            let due = t + from.l1_dist(to);
            let robots = m.robots as u32;
            // robots still travelling to the loser are redirected first
            let src = &mut self.supercells[m.from];
            let pending: u32 = src.arrivals.iter().map(|a| a.1).sum();
            let on_site = src.robots + outgoing[m.from] - pending;
            outgoing[m.from] -= robots;
            let mut redirect = robots.saturating_sub(on_site);
            while redirect > 0 {
                let last = src.arrivals.last_mut().expect("robot in transit");
                let n = last.1.min(redirect);
                last.1 -= n;
                redirect -= n;
                if last.1 == 0 {
                    src.arrivals.pop();
                }
            }
            self.supercells[m.to].arrivals.push((due, robots));
        }
    }
}

/// Schedule of a single searcher who may jump to any cell for free.
#[derive(Debug, Clone, PartialEq)]
pub struct TeleportSchedule<T> {
    /// (time, cell) with time starting at 1.
    pub visits: Vec<(usize, usize)>,
    /// Probability of discovering the target at each visit.
    pub slot_probs: Vec<T>,
    /// Σ p_t · t over the horizon.
    pub expected_time: T,
}

/// Always visits the cell with the largest chance of detection right now;
/// ties go to the lowest cell index.
pub fn greedy_teleport_schedule<T>(priors: &[T], pod: &T, horizon: usize) -> TeleportSchedule<T>
where
    T: num_traits::Num + Clone + PartialOrd,
{
    let miss = T::one() - pod.clone();
    let mut next: Vec<T> = priors.iter().map(|q| q.clone() * pod.clone()).collect();
    let mut visits = Vec::with_capacity(horizon);
    let mut slot_probs = Vec::with_capacity(horizon);
    let mut expected = T::zero();
    let mut t_val = T::zero();
    for t in 1..=horizon {
        t_val = t_val + T::one();
        let mut best = 0;
        for i in 1..next.len() {
            if next[i] > next[best] {
                best = i;
            }
        }
        let p = next[best].clone();
        expected = expected + p.clone() * t_val.clone();
        next[best] = p.clone() * miss.clone();
        visits.push((t, best));
        slot_probs.push(p);
    }
    TeleportSchedule { visits, slot_probs, expected_time: expected }
}

/// Truncated expected discovery time of an arbitrary visit sequence.
pub fn expected_discovery_time<T>(priors: &[T], pod: &T, sequence: &[usize]) -> T
where
    T: num_traits::Num + Clone,
{
    let miss = T::one() - pod.clone();
    let mut next: Vec<T> = priors.iter().map(|q| q.clone() * pod.clone()).collect();
    let mut expected = T::zero();
    let mut t_val = T::zero();
    for &c in sequence {
        t_val = t_val + T::one();
        expected = expected + next[c].clone() * t_val.clone();
        next[c] = next[c].clone() * miss.clone();
    }
    expected
}

/// Greedy teleport schedule over a POD grid (uses the first cell's POD).
pub fn greedy_teleport_for_grid(grid: &PodGrid, horizon: usize) -> TeleportSchedule<f64> {
    greedy_teleport_schedule(&grid.cell_prob, &grid.pod[0], horizon)
}
