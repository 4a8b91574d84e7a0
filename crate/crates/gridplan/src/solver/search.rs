//! Depth-first branch and bound over the two search goals.

use std::time::{Duration, Instant};

use serde_json::json;

use crate::model::{Schedule, ScheduleEntry, Time};

use super::propagate::{propagate, RDom, State};
use super::Model;

/// Search limits. `None` means unlimited.
#[derive(Debug, Clone, Default)]
pub struct Budget {
    pub wall: Option<Duration>,
    pub nodes: Option<u64>,
}

impl Budget {
    pub fn unlimited() -> Budget {
        Budget::default()
    }

    pub fn wall_ms(ms: u64) -> Budget {
        Budget {
            wall: Some(Duration::from_millis(ms)),
            nodes: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub nodes: u64,
    pub backtracks: u64,
    pub wall_time: Duration,
    pub proven_optimal: bool,
    pub best_makespan: Option<Time>,
    /// True when the model was proven to have no solution at all (as opposed
    /// to the budget running out before an incumbent was found).
    pub infeasible: bool,
}

impl SearchReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nodes": self.nodes,
            "backtracks": self.backtracks,
            "wall_ms": self.wall_time.as_secs_f64() * 1000.0,
            "proven_optimal": self.proven_optimal,
            "makespan": self.best_makespan,
        })
    }
}

enum Branch {
    Routing(usize),
    Start(usize),
}

struct Stop;

struct Search<'a> {
    model: &'a Model,
    started: Instant,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    nodes: u64,
    backtracks: u64,
    ub: Time,
    best: Option<Schedule>,
}

impl<'a> Search<'a> {
    fn out_of_budget(&self) -> bool {
        if let Some(limit) = self.node_limit {
            if self.nodes >= limit {
                return true;
            }
        }
        if let Some(deadline) = self.deadline {
            if Instant::now() >= deadline {
                return true;
            }
        }
        false
    }

    fn select(&self, st: &State) -> Option<Branch> {
        // goal 1: route every demand; all open domains have size 2, so
        // minimum-domain selection reduces to declaration order
        if let Some(v) = st.rd.iter().position(|&r| r == RDom::Both) {
            return Some(Branch::Routing(v));
        }
        // goal 2: fix start times on the chosen links, smallest domain first
        let mut best: Option<(Time, usize)> = None;
        for v in 0..st.rd.len() {
            if st.rd[v] == RDom::One && st.lo[v] < st.hi[v] {
                let size = st.hi[v] - st.lo[v];
                if best.is_none_or(|(bs, _)| size < bs) {
                    best = Some((size, v));
                }
            }
        }
        best.map(|(_, v)| Branch::Start(v))
    }

    fn dfs(&mut self, mut st: State) -> Result<(), Stop> {
        loop {
            if self.out_of_budget() {
                return Err(Stop);
            }
            if propagate(self.model, &mut st, self.ub).is_err() {
                self.backtracks += 1;
                return Ok(());
            }
            match self.select(&st) {
                None => {
                    let schedule = decode(self.model, &st);
                    if schedule.makespan <= self.ub {
                        self.ub = schedule.makespan - 1;
                        self.best = Some(schedule);
                    }
                    return Ok(());
                }
                Some(Branch::Routing(v)) => {
                    self.nodes += 1;
                    let mut left = st.clone();
                    left.rd[v] = RDom::Zero;
                    self.dfs(left)?;
                    st.rd[v] = RDom::One;
                }
                Some(Branch::Start(v)) => {
                    self.nodes += 1;
                    let mut left = st.clone();
                    left.hi[v] = left.lo[v];
                    self.dfs(left)?;
                    st.lo[v] += 1;
                }
            }
        }
    }
}

/// Reads the schedule off a fully assigned, consistent state.
pub(crate) fn decode(model: &Model, st: &State) -> Schedule {
    let mut entries = Vec::new();
    for (d, demand) in model.request.demands.iter().enumerate() {
        let mut own: Vec<&usize> = model.demand_vars[d]
            .iter()
            .filter(|&&v| st.rd[v] == RDom::One)
            .collect();
        // chaining forces path order to equal start order
        own.sort_by_key(|&&v| st.lo[v]);
        for &&v in &own {
            entries.push(ScheduleEntry {
                demand: demand.name.clone(),
                link: model.network.links[model.vars[v].link].id.clone(),
                start: st.lo[v],
                end: st.lo[v] + model.vars[v].dur,
            });
        }
    }
    Schedule::from_entries(entries)
}

/// Branch-and-bound search for a minimum-makespan schedule.
///
/// Always deterministic: the same model and budget produce the same schedule
/// and report (wall time aside). The greedy seed schedule serves as the
/// initial incumbent, so a non-degenerate budget always yields a schedule.
pub fn solve(model: &Model, budget: &Budget) -> (Option<Schedule>, SearchReport) {
    let started = Instant::now();
    let degenerate = budget.wall.is_some_and(|w| w.is_zero()) || budget.nodes == Some(0);
    if degenerate {
        return (
            None,
            SearchReport {
                nodes: 0,
                backtracks: 0,
                wall_time: started.elapsed(),
                proven_optimal: false,
                best_makespan: None,
                infeasible: false,
            },
        );
    }
    if model.request.demands.is_empty() {
        return (
            Some(Schedule::default()),
            SearchReport {
                nodes: 0,
                backtracks: 0,
                wall_time: started.elapsed(),
                proven_optimal: true,
                best_makespan: Some(0),
                infeasible: false,
            },
        );
    }

    let mut search = Search {
        model,
        started,
        deadline: budget.wall.map(|w| started + w),
        node_limit: budget.nodes,
        nodes: 0,
        backtracks: 0,
        ub: model.greedy.makespan - 1,
        best: Some(model.greedy.clone()),
    };
    let exhausted = search.dfs(State::root(model)).is_err();
    let best = search.best;
    let report = SearchReport {
        nodes: search.nodes,
        backtracks: search.backtracks,
        wall_time: search.started.elapsed(),
        proven_optimal: !exhausted,
        best_makespan: best.as_ref().map(|s| s.makespan),
        infeasible: false,
    };
    (best, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Demand, Network, Request};
    use crate::solver::ModelConfig;

    fn star(slowdowns: &[Time]) -> Network {
        crate::bench::star_network(slowdowns)
    }

    fn shared(n_files: usize, n_sites: usize) -> Request {
        Request {
            destination: "dest".into(),
            demands: (0..n_files)
                .map(|i| Demand {
                    name: format!("f{i:03}"),
                    size: 1,
                    origins: (1..=n_sites).map(|s| format!("s{s}").as_str().into()).collect(),
                })
                .collect(),
        }
    }

    fn optimal(net: &Network, req: &Request) -> Time {
        let model = Model::build(net, req, ModelConfig::default()).unwrap();
        let (sched, report) = solve(&model, &Budget::unlimited());
        assert!(report.proven_optimal);
        sched.unwrap().makespan
    }

    #[test]
    fn picks_fast_origin() {
        // 1 unit file, links with slowdown 1 and 4: the fast link wins
        let net = star(&[1, 4]);
        let req = shared(1, 2);
        assert_eq!(optimal(&net, &req), 1);
    }

    #[test]
    fn balances_three_shared_files_over_two_links() {
        let net = star(&[1, 2]);
        assert_eq!(optimal(&net, &shared(3, 2)), 2);
        assert_eq!(optimal(&net, &shared(4, 2)), 3);
    }

    #[test]
    fn empty_request_yields_empty_schedule() {
        let net = star(&[1]);
        let req = Request {
            destination: "dest".into(),
            demands: vec![],
        };
        let model = Model::build(&net, &req, ModelConfig::default()).unwrap();
        let (sched, report) = solve(&model, &Budget::unlimited());
        assert_eq!(sched.unwrap().makespan, 0);
        assert!(report.proven_optimal);
    }

    #[test]
    fn zero_budget_returns_no_schedule() {
        let net = star(&[1]);
        let model = Model::build(&net, &shared(1, 1), ModelConfig::default()).unwrap();
        let (sched, report) = solve(&model, &Budget::wall_ms(0));
        assert!(sched.is_none());
        assert_eq!(report.nodes, 0);
        assert!(!report.proven_optimal);
    }

    #[test]
    fn determinism_same_inputs_same_output() {
        let net = star(&[1, 2, 4]);
        let req = shared(4, 3);
        let run = || {
            let model = Model::build(&net, &req, ModelConfig::default()).unwrap();
            let (sched, report) = solve(&model, &Budget::unlimited());
            (sched.unwrap(), report.nodes, report.backtracks)
        };
        assert_eq!(run(), run());
    }
}
