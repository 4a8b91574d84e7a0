//! Peer-to-peer baseline: a discrete-event simulation with one observer per
//! link into the destination. An idle observer picks the rarest remaining
//! file at its site (smallest origin-set cardinality, ties broken uniformly
//! at random from a seeded generator) and transfers it. A picked file is
//! immediately removed from every site's pool, so each file is transferred
//! exactly once.
//!
//! Only direct-connection networks are supported: every demand needs an
//! origin adjacent to the destination.

use std::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{validate, Network, Request, Schedule, ScheduleEntry, Time};

#[derive(Debug, Error)]
pub enum P2pError {
    #[error("invalid inputs:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("demand `{0}` has no origin adjacent to the destination; the P2P model needs direct connections")]
    NotDirect(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceKind {
    Pick { demand: String, cardinality: usize },
    Done { demand: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub time: Time,
    pub link: String,
    pub kind: TraceKind,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            TraceKind::Pick { demand, cardinality } => write!(
                f,
                "t={} link={} pick={} card={}",
                self.time, self.link, demand, cardinality
            ),
            TraceKind::Done { demand } => {
                write!(f, "t={} link={} done={}", self.time, self.link, demand)
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace(pub Vec<TraceEvent>);

impl Trace {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.0 {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }
}

struct Observer {
    link: usize,
    busy_until: Option<Time>,
    carrying: Option<usize>,
}

/// Runs the simulation. The same seed always produces a bit-identical trace
/// and schedule (ChaCha8 is the tie-breaking generator).
pub fn simulate(
    network: &Network,
    request: &Request,
    seed: u64,
) -> Result<(Schedule, Trace), P2pError> {
    let checked = validate(network, request);
    if !checked.is_ok() {
        return Err(P2pError::Invalid(checked.violations));
    }
    let request = checked.normalized;

    let observers_links: Vec<usize> = network
        .links
        .iter()
        .enumerate()
        .filter(|(_, l)| l.to == request.destination)
        .map(|(e, _)| e)
        .collect();
    for d in &request.demands {
        let adjacent = observers_links
            .iter()
            .any(|&e| d.has_origin(&network.links[e].from));
        if !adjacent {
            return Err(P2pError::NotDirect(d.name.clone()));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observers: Vec<Observer> = observers_links
        .iter()
        .map(|&link| Observer {
            link,
            busy_until: None,
            carrying: None,
        })
        .collect();
    let mut remaining: Vec<bool> = vec![true; request.demands.len()];
    let mut entries = Vec::new();
    let mut trace = Trace::default();

    let mut clock: Time = 0;
    loop {
        // completions first, in link declaration order
        for obs in observers.iter_mut() {
            if obs.busy_until == Some(clock) {
                let d = obs.carrying.take().unwrap();
                obs.busy_until = None;
                trace.0.push(TraceEvent {
                    time: clock,
                    link: network.links[obs.link].id.clone(),
                    kind: TraceKind::Done {
                        demand: request.demands[d].name.clone(),
                    },
                });
            }
        }
        // idle observers pick up work
        for obs in observers.iter_mut() {
            if obs.busy_until.is_some() {
                continue;
            }
            let site = &network.links[obs.link].from;
            let available: Vec<usize> = request
                .demands
                .iter()
                .enumerate()
                .filter(|(d, demand)| remaining[*d] && demand.has_origin(site))
                .map(|(d, _)| d)
                .collect();
            let Some(min_card) = available
                .iter()
                .map(|&d| request.demands[d].origins.len())
                .min()
            else {
                continue;
            };
            let rarest: Vec<usize> = available
                .into_iter()
                .filter(|&d| request.demands[d].origins.len() == min_card)
                .collect();
            let d = rarest[rng.random_range(0..rarest.len())];
            remaining[d] = false;
            let demand = &request.demands[d];
            let link = &network.links[obs.link];
            let dur = demand.size * link.slowdown;
            entries.push(ScheduleEntry {
                demand: demand.name.clone(),
                link: link.id.clone(),
                start: clock,
                end: clock + dur,
            });
            obs.busy_until = Some(clock + dur);
            obs.carrying = Some(d);
            trace.0.push(TraceEvent {
                time: clock,
                link: link.id.clone(),
                kind: TraceKind::Pick {
                    demand: demand.name.clone(),
                    cardinality: min_card,
                },
            });
        }

        let next = observers.iter().filter_map(|o| o.busy_until).min();
        match next {
            Some(t) => clock = t,
            None => break, // nothing in flight and nothing pickable
        }
    }
    debug_assert!(remaining.iter().all(|r| !r));

    Ok((Schedule::from_entries(entries), Trace(trace.0)))
}
