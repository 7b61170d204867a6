//! Multi-robot search on the integer lattice: plan generation, competitive
//! ratio audits, probability-driven scheduling and robot reassignment.

pub mod analysis;
pub mod error;
pub mod flow;
pub mod io;
pub mod lattice;
pub mod montecarlo;
pub mod pod;
pub mod strategy;

pub use analysis::{audit_plan, theoretical_g, BallAudit, RatioReport};
pub use error::{Error, Result};
pub use flow::{build_flow, solve_min_cost, FlowProblem, LedgerEntry, Move, Reassignment};
pub use lattice::{
    ball_points, closed_ball_count, l1_norm, sphere_points, Direction, LatticePoint, Step, Time,
    Trajectory,
};
pub use strategy::{
    generalize_to_any_k, generate_even_work, plan_with_speeds, transition_on_join, JoinEvent,
    SearchPlan,
};
pub use io::{read_plan, write_plan_csv, PlanHeader};
pub use montecarlo::{run_trials, SimulationReport};
pub use pod::{
    greedy_teleport_schedule, load_pod_grid, PodGrid, Scheduler, SchedulerConfig, StepEvent,
    Supercell,
};
