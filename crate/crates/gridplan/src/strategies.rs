//! Search accelerators on top of the solver: chunked decomposition with fake
//! tasks and linearly time-limited search. (Symmetry breaking lives in the
//! model itself, toggled by `ModelConfig::symmetry_breaking`.)

use std::time::Duration;

use thiserror::Error;

use crate::model::{Demand, Network, Request, Schedule, Storage};
use crate::solver::{
    build_model, solve, Budget, BuildError, FakeTask, FakeTasks, SearchReport, StorageReservation,
    ModelConfig,
};

/// Ordered partition of a request's demands. Concatenating the chunks gives
/// back the original demand list.
#[derive(Debug, Clone)]
pub struct ChunkPlan {
    pub chunk_size: usize,
    pub chunks: Vec<Vec<Demand>>,
}

/// Splits demands in request order into chunks of `chunk_size` (the last one
/// may be smaller). With `sort_by_origin_cardinality`, demands are first
/// ordered by descending origin-set size (stable, so declaration order
/// breaks ties).
pub fn plan_chunks(
    request: &Request,
    chunk_size: usize,
    sort_by_origin_cardinality: bool,
) -> ChunkPlan {
    assert!(chunk_size >= 1, "chunk_size must be >= 1");
    let mut demands = request.demands.clone();
    if sort_by_origin_cardinality {
        demands.sort_by_key(|d| std::cmp::Reverse(d.origins.len()));
    }
    let chunks = demands
        .chunks(chunk_size)
        .map(|c| c.to_vec())
        .collect();
    ChunkPlan { chunk_size, chunks }
}

/// Turns a committed schedule into fixed occupations for later chunks: every
/// entry blocks its link (and thereby any shared group it belongs to), and
/// every transit hop reserves storage at the intermediate site for the span
/// of the layover.
pub fn fake_tasks_from(schedule: &Schedule, network: &Network, request: &Request) -> FakeTasks {
    let mut fakes = FakeTasks::default();
    for e in &schedule.entries {
        fakes.links.push(FakeTask {
            link: e.link.clone(),
            start: e.start,
            end: e.end,
        });
    }
    for demand in &request.demands {
        let entries = schedule.entries_of(&demand.name);
        for pair in entries.windows(2) {
            let Ok(link) = network.link(&pair[0].link) else {
                continue;
            };
            let site = link.to.clone();
            let bounded = network
                .sites
                .iter()
                .any(|s| s.id == site && matches!(s.storage, Storage::Bounded(_)));
            if bounded {
                fakes.storage.push(StorageReservation {
                    site,
                    start: pair[0].start,
                    end: pair[1].end,
                    consumption: demand.size,
                });
            }
        }
    }
    fakes
}

#[derive(Debug, Error)]
pub enum ChunkedError {
    #[error("chunk {chunk}: {source}")]
    Build { chunk: usize, source: BuildError },
    #[error("chunk {chunk}: no schedule found within the budget")]
    NoSchedule { chunk: usize },
}

#[derive(Debug, Clone, Default)]
pub struct ChunkedOptions {
    /// Optional per-chunk search budget; chunks are solved to proven
    /// optimality when unlimited.
    pub per_chunk_budget: Budget,
    pub sort_by_origin_cardinality: bool,
}

/// Solves the request as a sequence of optimally scheduled chunks. Chunk k
/// sees the transfers committed by chunks 1..k-1 as fake tasks occupying the
/// links, shared groups and storage reservoirs.
pub fn solve_chunked(
    network: &Network,
    request: &Request,
    chunk_size: usize,
    config: &ModelConfig,
    opts: &ChunkedOptions,
) -> Result<(Schedule, Vec<SearchReport>), ChunkedError> {
    let plan = plan_chunks(request, chunk_size, opts.sort_by_origin_cardinality);
    let mut fakes = FakeTasks::default();
    let mut entries = Vec::new();
    let mut reports = Vec::new();
    for (k, chunk) in plan.chunks.iter().enumerate() {
        let sub_request = Request {
            destination: request.destination.clone(),
            demands: chunk.clone(),
        };
        let model = build_model(network, &sub_request, config.clone(), fakes.clone())
            .map_err(|source| ChunkedError::Build { chunk: k, source })?;
        let (schedule, report) = solve(&model, &opts.per_chunk_budget);
        reports.push(report);
        let schedule = schedule.ok_or(ChunkedError::NoSchedule { chunk: k })?;
        let committed = fake_tasks_from(&schedule, network, &sub_request);
        fakes.links.extend(committed.links);
        fakes.storage.extend(committed.storage);
        entries.extend(schedule.entries);
    }
    Ok((Schedule::from_entries(entries), reports))
}

/// Search with a wall-time budget linear in the request size:
/// `coefficient_ms` milliseconds per demand. Returns the best incumbent at
/// timeout; `proven_optimal` is only set when the search exhausted early.
pub fn solve_time_limited(
    network: &Network,
    request: &Request,
    coefficient_ms: u64,
    config: &ModelConfig,
) -> Result<(Option<Schedule>, SearchReport), BuildError> {
    let model = build_model(network, request, config.clone(), FakeTasks::default())?;
    let budget = Budget {
        wall: Some(Duration::from_millis(
            coefficient_ms.saturating_mul(request.demands.len() as u64),
        )),
        nodes: None,
    };
    Ok(solve(&model, &budget))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::request_from_str;
    use crate::bench::star_network;
    use crate::replay::{replay, ReplayOptions};

    fn shared_request(n: usize) -> Request {
        Request {
            destination: "dest".into(),
            demands: (0..n)
                .map(|i| Demand {
                    name: format!("f{i}"),
                    size: 1,
                    origins: vec!["s1".into(), "s2".into()],
                })
                .collect(),
        }
    }

    #[test]
    fn chunk_plan_partitions_in_order() {
        let req = shared_request(5);
        let plan = plan_chunks(&req, 2, false);
        assert_eq!(plan.chunks.len(), 3);
        let flat: Vec<&str> = plan
            .chunks
            .iter()
            .flatten()
            .map(|d| d.name.as_str())
            .collect();
        assert_eq!(flat, vec!["f0", "f1", "f2", "f3", "f4"]);
        assert_eq!(plan.chunks[2].len(), 1);
    }

    #[test]
    fn one_big_chunk_equals_plain_solve() {
        let net = star_network(&[1, 2]);
        let req = shared_request(3);
        let cfg = ModelConfig::default();
        let (chunked, reports) =
            solve_chunked(&net, &req, 10, &cfg, &ChunkedOptions::default()).unwrap();
        assert_eq!(reports.len(), 1);
        let model = build_model(&net, &req, cfg, FakeTasks::default()).unwrap();
        let (plain, _) = solve(&model, &Budget::unlimited());
        assert_eq!(chunked.makespan, plain.unwrap().makespan);
    }

    #[test]
    fn chunk_size_one_matches_optimal_on_small_shared_case() {
        // 3 shared unit files, links slowdown {1,2}: optimal makespan 2
        let net = star_network(&[1, 2]);
        let req = shared_request(3);
        let cfg = ModelConfig::default();
        let (chunked, reports) =
            solve_chunked(&net, &req, 1, &cfg, &ChunkedOptions::default()).unwrap();
        assert_eq!(reports.len(), 3);
        assert_eq!(chunked.makespan, 2);
        replay(&chunked, &net, Some(&req), &ReplayOptions::default()).unwrap();
    }

    #[test]
    fn time_limited_with_generous_budget_proves_optimality() {
        let net = star_network(&[1, 2]);
        let req = shared_request(2);
        let (sched, report) =
            solve_time_limited(&net, &req, 5000, &ModelConfig::default()).unwrap();
        assert!(report.proven_optimal);
        assert_eq!(sched.unwrap().makespan, 2);
    }

    #[test]
    fn zero_coefficient_returns_nothing() {
        let net = star_network(&[1, 2]);
        let req = shared_request(2);
        let (sched, report) = solve_time_limited(&net, &req, 0, &ModelConfig::default()).unwrap();
        assert!(sched.is_none());
        assert_eq!(report.nodes, 0);
    }

    #[test]
    fn fake_tasks_cover_transit_storage() {
        let net = crate::model::network_from_str(
            r#"{"sites": [{"id": "a"}, {"id": "b", "storage": 1}, {"id": "dest"}],
                "links": [{"id": "l1", "from": "a", "to": "b", "slowdown": 1},
                          {"id": "l2", "from": "b", "to": "dest", "slowdown": 1}]}"#,
            "test",
        )
        .unwrap();
        let req = request_from_str(
            r#"{"destination": "dest",
                "demands": [{"name": "f", "size": 1, "origins": ["a"]}]}"#,
            "test",
        )
        .unwrap();
        let sched = Schedule::from_entries(vec![
            crate::model::ScheduleEntry {
                demand: "f".into(),
                link: "l1".into(),
                start: 0,
                end: 1,
            },
            crate::model::ScheduleEntry {
                demand: "f".into(),
                link: "l2".into(),
                start: 1,
                end: 2,
            },
        ]);
        let fakes = fake_tasks_from(&sched, &net, &req);
        assert_eq!(fakes.links.len(), 2);
        assert_eq!(fakes.storage.len(), 1);
        let r = &fakes.storage[0];
        assert_eq!((r.site.as_str(), r.start, r.end, r.consumption), ("b", 0, 2, 1));
    }
}
