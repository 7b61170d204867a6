//! Min-cost robot reassignment between supercells.
//!
//! Only the net deltas enter the network: source → loser (capacity = robots
//! given up), gainer → sink (capacity = robots received), and loser → gainer
//! cross edges priced at the L1 distance. Robots that stay put would flow
//! source → node → sink at zero cost, so dropping them changes nothing.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticePoint;

/// One supercell whose robot count changed during a scheduler step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub id: usize,
    pub center: LatticePoint,
    pub old: u64,
    pub new: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowProblem {
    pub losing: Vec<LedgerEntry>,
    pub gaining: Vec<LedgerEntry>,
    /// Capacity of the cross edges; no feasible flow can exceed it.
    pub capacity: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub from: usize,
    pub to: usize,
    pub robots: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reassignment {
    pub moves: Vec<Move>,
    pub total_cost: u64,
    /// Node potentials in network order: source, losers, gainers, sink.
    pub potentials: Vec<i64>,
}

impl FlowProblem {
    pub fn supply(&self) -> Vec<u64> {
        self.losing.iter().map(|e| e.old - e.new).collect()
    }

    pub fn demand(&self) -> Vec<u64> {
        self.gaining.iter().map(|e| e.new - e.old).collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> u64 {
        self.losing[i].center.l1_dist(self.gaining[j].center)
    }

    /// Source and sink plus one node per loser and gainer.
    pub fn node_count(&self) -> usize {
        self.losing.len() + self.gaining.len() + 2
    }

    pub fn cost_matrix(&self) -> Vec<Vec<i64>> {
        (0..self.losing.len())
            .map(|i| (0..self.gaining.len()).map(|j| self.distance(i, j) as i64).collect())
            .collect()
    }
}

/// Splits ledger entries into losers and gainers; unchanged entries are dropped.
pub fn build_flow(entries: &[LedgerEntry], total_robots: u64) -> Result<FlowProblem> {
    let mut losing = Vec::new();
    let mut gaining = Vec::new();
    for e in entries {
        match e.new.cmp(&e.old) {
            std::cmp::Ordering::Less => losing.push(*e),
            std::cmp::Ordering::Greater => gaining.push(*e),
            std::cmp::Ordering::Equal => {}
        }
    }
    let p = FlowProblem { losing, gaining, capacity: total_robots };
    let (l, g): (u64, u64) = (p.supply().iter().sum(), p.demand().iter().sum());
    if l != g {
        return Err(Error::Unbalanced { losses: l, gains: g });
    }
    Ok(p)
}

pub fn solve_min_cost(problem: &FlowProblem) -> Result<Reassignment> {
    let sol = transport(&problem.supply(), &problem.demand(), &problem.cost_matrix(), problem.capacity)?;
    let mut moves = Vec::new();
    for (i, row) in sol.flow.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            if f > 0 {
                moves.push(Move { from: problem.losing[i].id, to: problem.gaining[j].id, robots: f });
            }
        }
    }
    Ok(Reassignment { moves, total_cost: sol.cost as u64, potentials: sol.potentials })
}

/// Integral solution of a transportation problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transport {
    pub flow: Vec<Vec<u64>>,
    pub cost: i64,
    pub potentials: Vec<i64>,
}

#[derive(Clone, Copy)]
struct Edge {
    to: usize,
    cap: u64,
    cost: i64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network { edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add(&mut self, from: usize, to: usize, cap: u64, cost: i64) {
        self.adj[from].push(self.edges.len());
        self.edges.push(Edge { to, cap, cost });
        self.adj[to].push(self.edges.len());
        self.edges.push(Edge { to: from, cap: 0, cost: -cost });
    }

    fn tail(&self, e: usize) -> usize {
        self.edges[e ^ 1].to
    }

    /// Label-correcting distances from `roots` over edges with residual capacity.
    fn bellman_ford(&self, roots: &[usize]) -> Vec<Option<i64>> {
        let n = self.adj.len();
        let mut dist = vec![None; n];
        for &r in roots {
            dist[r] = Some(0);
        }
        for _ in 0..n {
            let mut changed = false;
            for (e, edge) in self.edges.iter().enumerate() {
                if edge.cap == 0 {
                    continue;
                }
                if let Some(du) = dist[self.tail(e)] {
                    let nd = du + edge.cost;
                    if dist[edge.to].map_or(true, |dv| nd < dv) {
                        dist[edge.to] = Some(nd);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }
}

/// Successive shortest paths: one label-correcting pass for the initial
/// potentials, then Dijkstra on reduced costs. Ties go to the lower node index.
pub fn transport(supply: &[u64], demand: &[u64], cost: &[Vec<i64>], cap: u64) -> Result<Transport> {
    let (l, g) = (supply.len(), demand.len());
    let total: u64 = supply.iter().sum();
    if total != demand.iter().sum::<u64>() {
        return Err(Error::Unbalanced { losses: total, gains: demand.iter().sum() });
    }
    if cost.iter().flatten().any(|&c| c < 0) {
        return Err(Error::Invalid("negative transport cost".into()));
    }
    let n = l + g + 2;
    let (src, sink) = (0, n - 1);
    let mut net = Network::new(n);
    for (i, &s) in supply.iter().enumerate() {
        net.add(src, 1 + i, s, 0);
    }
    let mut cross = vec![vec![0usize; g]; l];
    for i in 0..l {
        for j in 0..g {
            cross[i][j] = net.edges.len();
            net.add(1 + i, 1 + l + j, cap, cost[i][j]);
        }
    }
    for (j, &d) in demand.iter().enumerate() {
        net.add(1 + l + j, sink, d, 0);
    }

    let mut pot: Vec<i64> = net.bellman_ford(&[src]).iter().map(|d| d.unwrap_or(0)).collect();
    let mut sent = 0u64;
    let mut total_cost = 0i64;
    while sent < total {
        let mut dist: Vec<Option<i64>> = vec![None; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[src] = Some(0);
        heap.push(Reverse((0i64, src)));
        while let Some(Reverse((d, u))) = heap.pop() {
            if dist[u] != Some(d) {
                continue;
            }
            for &e in &net.adj[u] {
                let edge = net.edges[e];
                if edge.cap == 0 {
                    continue;
                }
                let nd = d + edge.cost + pot[u] - pot[edge.to];
                if dist[edge.to].map_or(true, |dv| nd < dv) {
                    dist[edge.to] = Some(nd);
                    prev[edge.to] = e;
                    heap.push(Reverse((nd, edge.to)));
                }
            }
        }
        let Some(dt) = dist[sink] else {
            return Err(Error::Invalid("transport problem is infeasible".into()));
        };
        for v in 0..n {
            pot[v] += dist[v].map_or(dt, |d| d.min(dt));
        }
        let mut push = total - sent;
        let mut v = sink;
        while v != src {
            let e = prev[v];
            push = push.min(net.edges[e].cap);
            v = net.tail(e);
        }
        let mut v = sink;
        while v != src {
            let e = prev[v];
            net.edges[e].cap -= push;
            net.edges[e ^ 1].cap += push;
            total_cost += push as i64 * net.edges[e].cost;
            v = net.tail(e);
        }
        sent += push;
    }

    let flow = cross
        .iter()
        .map(|row| row.iter().map(|&e| net.edges[e ^ 1].cap).collect())
        .collect();
    // Shortest distances from every node at once give feasible potentials
    // on the final residual network (it has no negative cycle at optimum).
    let all: Vec<usize> = (0..n).collect();
    let potentials = net.bellman_ford(&all).iter().map(|d| d.unwrap_or(0)).collect();
    Ok(Transport { flow, cost: total_cost, potentials })
}

/// Independent optimality check: every residual edge must have non-negative
/// reduced cost `c(u,v) + π(u) − π(v)` and the flow must be feasible.
pub fn check_certificate(
    supply: &[u64],
    demand: &[u64],
    cost: &[Vec<i64>],
    cap: u64,
    flow: &[Vec<u64>],
    potentials: &[i64],
) -> bool {
    let (l, g) = (supply.len(), demand.len());
    if potentials.len() != l + g + 2 || flow.len() != l {
        return false;
    }
    let (src, sink) = (0, l + g + 1);
    let reduced = |u: usize, v: usize, c: i64| c + potentials[u] - potentials[v];
    let out: Vec<u64> = flow.iter().map(|r| r.iter().sum()).collect();
    let inn: Vec<u64> = (0..g).map(|j| flow.iter().map(|r| r[j]).sum()).collect();
    if out != supply || inn != demand {
        return false;
    }
    for i in 0..l {
        for j in 0..g {
            let (u, v, f) = (1 + i, 1 + l + j, flow[i][j]);
            if f > cap {
                return false;
            }
            if f < cap && reduced(u, v, cost[i][j]) < 0 {
                return false;
            }
            if f > 0 && reduced(v, u, -cost[i][j]) < 0 {
                return false;
            }
        }
    }
    // saturated source/sink arcs only have their reverse in the residual graph
    (0..l).all(|i| supply[i] == 0 || reduced(1 + i, src, 0) >= 0)
        && (0..g).all(|j| demand[j] == 0 || reduced(sink, 1 + l + j, 0) >= 0)
}

impl Reassignment {
    /// Checks conservation and the reduced-cost certificate against `problem`.
    pub fn verify(&self, problem: &FlowProblem) -> bool {
        let (l, g) = (problem.losing.len(), problem.gaining.len());
        let mut flow = vec![vec![0u64; g]; l];
        for m in &self.moves {
            let i = problem.losing.iter().position(|e| e.id == m.from);
            let j = problem.gaining.iter().position(|e| e.id == m.to);
            match (i, j) {
                (Some(i), Some(j)) => flow[i][j] += m.robots,
                _ => return false,
            }
        }
        let cost: u64 = (0..l)
            .flat_map(|i| (0..g).map(move |j| (i, j)))
            .map(|(i, j)| flow[i][j] * problem.distance(i, j))
            .sum();
        cost == self.total_cost
            && check_certificate(
                &problem.supply(),
                &problem.demand(),
                &problem.cost_matrix(),
                problem.capacity,
                &flow,
                &self.potentials,
            )
    }
}
