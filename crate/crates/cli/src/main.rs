use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use latsearch::analysis::audit_plan;
use latsearch::flow::{build_flow, solve_min_cost, LedgerEntry, Move};
use latsearch::io::{read_plan, write_plan_csv, PlanHeader};
use latsearch::montecarlo::run_trials;
use latsearch::pod::{PodGrid, Scheduler, SchedulerConfig};
use latsearch::strategy::{generalize_to_any_k, plan_with_speeds, transition_on_join};
use latsearch::{Error, LatticePoint, Time};

#[derive(Parser, Debug)]
#[command(name = "latsearch", version, about = "Multi-robot lattice search planning and simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a search plan (CSV trajectories plus a JSON header next to it)
    Plan {
        /// Number of robots (optional when --speeds is given)
        #[arg(long)]
        robots: Option<usize>,
        /// Radius of the ball the plan must cover
        #[arg(long)]
        radius: u64,
        /// Relative robot speeds, e.g. 1,2 or 1/2,3/4
        #[arg(long, value_delimiter = ',')]
        speeds: Option<Vec<String>>,
        /// Add robots mid-search: TIME:COUNT (repeatable)
        #[arg(long)]
        join: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Audit a plan: coverage and per-ball work against the ratio envelopes
    Verify {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        report: PathBuf,
        /// Radius to audit [default: from the plan header, else the covered radius]
        #[arg(long)]
        radius: Option<u64>,
    },
    /// Run the supercell scheduler on a POD grid and log every step
    Search {
        #[command(flatten)]
        sched: SchedArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve the min-cost reassignment for every ledger line
    Flow {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo time-to-discovery estimate
    Simulate {
        #[command(flatten)]
        sched: SchedArgs,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads [default: all cores]; results do not depend on it
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct SchedArgs {
    /// POD grid file
    #[arg(long)]
    pod: PathBuf,
    #[arg(long)]
    robots: u32,
    /// Supercell side in cells [default: auto]
    #[arg(long)]
    supercell: Option<usize>,
    /// Probability of detecting the target in one pass over its cell
    #[arg(long, default_value_t = 0.5)]
    pod_per_pass: f64,
    /// Stop when residual mass drops below this fraction of the prior
    #[arg(long, default_value_t = 1e-4)]
    threshold: f64,
    /// Maximum number of time steps
    #[arg(long, default_value_t = 1_000_000)]
    horizon: u64,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::IncompleteCoverage(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

fn parse_ratio(s: &str) -> Result<Ratio<i64>, Failure> {
    let bad = || Failure::Validation(format!("bad number {s:?}"));
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let (a, b): (i64, i64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if b == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(a, b));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let mut r = Ratio::from_integer(int.parse::<i64>().map_err(|_| bad())?);
    let mut scale = 1i64;
    for c in frac.chars() {
        scale = scale.checked_mul(10).ok_or_else(bad)?;
        r += Ratio::new(c.to_digit(10).ok_or_else(bad)? as i64, scale);
    }
    Ok(r)
}

fn parse_join(s: &str) -> Result<(Time, usize), Failure> {
    let (t, m) = s
        .split_once(':')
        .ok_or_else(|| Failure::Validation(format!("--join expects TIME:COUNT, got {s:?}")))?;
    let m = m
        .parse()
        .map_err(|_| Failure::Validation(format!("bad robot count in --join {s:?}")))?;
    Ok((parse_ratio(t)?, m))
}

fn run_plan(
    robots: Option<usize>,
    radius: u64,
    speeds: Option<Vec<String>>,
    join: Vec<String>,
    out: &Path,
) -> Result<(), Failure> {
    let joins = join.iter().map(|j| parse_join(j)).collect::<Result<Vec<_>, _>>()?;
    let mut plan = match (robots, speeds) {
        (_, Some(s)) => {
            let s = s.iter().map(|v| parse_ratio(v)).collect::<Result<Vec<_>, _>>()?;
            if robots.is_some_and(|k| k != s.len()) {
                return Err(Failure::Validation(format!(
                    "--robots {} does not match {} speeds",
                    robots.unwrap(),
                    s.len()
                )));
            }
            plan_with_speeds(&s, radius)?
        }
        (Some(k), None) => generalize_to_any_k(k, radius)?,
        (None, None) => return Err(Failure::Validation("--robots or --speeds is required".into())),
    };
    for (t, m) in joins {
        plan = transition_on_join(&plan, t, m)?;
    }
    let mut csv = Vec::new();
    write_plan_csv(&plan, &mut csv)?;
    write(out, &csv)?;
    let header = serde_json::to_vec_pretty(&PlanHeader::of(&plan)).map_err(Error::from)?;
    write(&out.with_extension("json"), &header)?;
    println!("{} robots, {} steps written to {}", plan.robot_count, plan.step_counts().iter().sum::<usize>(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct BallRecord {
    n: u64,
    #[serde(rename = "A_n")]
    a_n: u64,
    g_n: u64,
    last_visit_time: f64,
    ratio: f64,
    time_ratio: f64,
    lower: f64,
    upper: f64,
    worst_point: LatticePoint,
}

#[derive(Serialize)]
struct VerifyReport {
    robots: usize,
    k: u64,
    radius: u64,
    balance: usize,
    balls: Vec<BallRecord>,
}

fn f(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn run_verify(plan: &Path, report: &Path, radius: Option<u64>) -> Result<(), Failure> {
    let header_path = plan.with_extension("json");
    let header: Option<PlanHeader> = if header_path.exists() {
        Some(serde_json::from_str(&read(&header_path)?).map_err(Error::from)?)
    } else {
        None
    };
    let p = read_plan(&read(plan)?, header.as_ref())?;
    let n = radius.unwrap_or(p.max_radius);
    let audit = audit_plan(&p, n)?;
    let balls = audit
        .per_ball
        .iter()
        .map(|b| BallRecord {
            n: b.n,
            a_n: b.a_n,
            g_n: b.g_n,
            last_visit_time: f(b.last_visit_time),
            ratio: f(audit.work_ratio[&b.n]),
            time_ratio: f(audit.measured_ratio[&b.n]),
            lower: f(audit.lower_envelope[&b.n]),
            upper: f(audit.upper_envelope[&b.n]),
            worst_point: b.worst_point,
        })
        .collect();
    let rep = VerifyReport { robots: p.robot_count, k: audit.k, radius: n, balance: p.balance(), balls };
    write(report, &serde_json::to_vec_pretty(&rep).map_err(Error::from)?)?;
    println!("ball of radius {n} fully covered; {} balls audited", audit.per_ball.len());
    Ok(())
}

fn scheduler_input(a: &SchedArgs) -> Result<(PodGrid, SchedulerConfig), Failure> {
    let grid = PodGrid::parse(&read(&a.pod)?, a.pod_per_pass)?;
    let config = SchedulerConfig {
        robots: a.robots,
        side: a.supercell,
        threshold: a.threshold,
        horizon: a.horizon,
    };
    Ok((grid, config))
}

#[derive(Serialize, Deserialize)]
struct EntryRecord {
    id: usize,
    x: i64,
    y: i64,
    old: u64,
    new: u64,
}

#[derive(Serialize)]
struct EventRecord<'a> {
    t: u64,
    transfers: &'a [latsearch::pod::Transfer],
    residual_total: f64,
    entries: Vec<EntryRecord>,
}

fn run_search(a: &SchedArgs, out: &Path) -> Result<(), Failure> {
    let (grid, config) = scheduler_input(a)?;
    let mut s = Scheduler::new(grid, &config)?;
    let file = fs::File::create(out).map_err(|e| io_err(out, e))?;
    let mut w = std::io::BufWriter::new(file);
    while let Some(ev) = s.step() {
        let rec = EventRecord {
            t: ev.t,
            transfers: &ev.transfers,
            residual_total: ev.residual_total,
            entries: ev
                .ledger
                .iter()
                .map(|e| EntryRecord { id: e.id, x: e.center.x, y: e.center.y, old: e.old, new: e.new })
                .collect(),
        };
        serde_json::to_writer(&mut w, &rec).map_err(Error::from)?;
        writeln!(w).map_err(|e| io_err(out, e))?;
    }
    w.flush().map_err(|e| io_err(out, e))?;
    println!("{} steps, residual {:.6e}", s.time, s.residual_total());
    Ok(())
}

#[derive(Deserialize)]
struct LedgerLine {
    t: u64,
    #[serde(default)]
    entries: Vec<EntryRecord>,
}

#[derive(Serialize)]
struct MoveLine {
    t: u64,
    moves: Vec<Move>,
    total_cost: u64,
    potentials: Vec<i64>,
}

fn run_flow(ledger: &Path, out: &Path) -> Result<(), Failure> {
    let text = read(ledger)?;
    let mut buf = Vec::new();
    let mut total = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let rec: LedgerLine = serde_json::from_str(line)
            .map_err(|e| Failure::Validation(format!("{} line {}: {e}", ledger.display(), i + 1)))?;
        let entries: Vec<LedgerEntry> = rec
            .entries
            .iter()
            .map(|e| LedgerEntry { id: e.id, center: LatticePoint::new(e.x, e.y), old: e.old, new: e.new })
            .collect();
        let supply: u64 = entries.iter().map(|e| e.old.saturating_sub(e.new)).sum();
        let problem = build_flow(&entries, supply.max(1))?;
        let sol = solve_min_cost(&problem)?;
        total += sol.total_cost;
        let line = MoveLine { t: rec.t, moves: sol.moves, total_cost: sol.total_cost, potentials: sol.potentials };
        serde_json::to_writer(&mut buf, &line).map_err(Error::from)?;
        buf.push(b'\n');
    }
    write(out, &buf)?;
    println!("total transit cost {total}");
    Ok(())
}

fn run_simulate(a: &SchedArgs, trials: u64, seed: u64, threads: Option<usize>, out: &Path) -> Result<(), Failure> {
    if threads == Some(0) {
        return Err(Failure::Validation("--threads must be positive".into()));
    }
    let (grid, config) = scheduler_input(a)?;
    let report = run_trials(&grid, &config, trials, seed, threads)?;
    write(out, &serde_json::to_vec_pretty(&report).map_err(Error::from)?)?;
    match report.mean_time_to_discovery {
        Some(m) => println!("found {:.4} of trials, mean time {m:.3}", report.found_fraction),
        None => println!("target never found"),
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan { robots, radius, speeds, join, out } => run_plan(robots, radius, speeds, join, &out),
        Command::Verify { plan, report, radius } => run_verify(&plan, &report, radius),
        Command::Search { sched, out } => run_search(&sched, &out),
        Command::Flow { ledger, out } => run_flow(&ledger, &out),
        Command::Simulate { sched, trials, seed, threads, out } => run_simulate(&sched, trials, seed, threads, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
