//! Independent schedule checker.
//!
//! Re-verifies a finished schedule against the constraint semantics — path
//! shape, link mutual exclusion, chaining, shared groups and storage — as
//! plain predicates over the entries. Shares no code with the solver's
//! propagators, so it can vouch for both solver and simulator outputs.

use std::fmt;

use crate::model::{Network, Request, Schedule, ScheduleEntry, Storage, Time};
use crate::solver::SharedConsumption;

#[derive(Debug, Clone)]
pub struct Violation {
    pub time: Option<Time>,
    pub resource: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.time {
            Some(t) => write!(f, "{} at t={}: {}", self.resource, t, self.message),
            None => write!(f, "{}: {}", self.resource, self.message),
        }
    }
}

fn violation(time: Option<Time>, resource: impl Into<String>, message: String) -> Violation {
    Violation {
        time,
        resource: resource.into(),
        message,
    }
}

#[derive(Debug, Clone)]
pub struct ReplayOptions {
    /// Verify per-demand path shape and durations; needs the request.
    pub check_paths: bool,
    pub check_shared: bool,
    pub check_storage: bool,
    pub shared_consumption: SharedConsumption,
}

impl Default for ReplayOptions {
    fn default() -> Self {
        ReplayOptions {
            check_paths: true,
            check_shared: true,
            check_storage: true,
            shared_consumption: SharedConsumption::default(),
        }
    }
}

/// Occupancy of a transit site by one demand: the space is held from the
/// start of the incoming transfer until the end of the outgoing one.
fn storage_occupancies<'a>(
    schedule: &'a Schedule,
    network: &Network,
    request: &'a Request,
) -> Vec<(usize, Time, Time, Time)> {
    let mut out = Vec::new();
    for demand in &request.demands {
        let entries = schedule.entries_of(&demand.name);
        for pair in entries.windows(2) {
            let site = &network.link(&pair[0].link).map(|l| l.to.clone());
            if let Ok(site) = site {
                if let Some(idx) = network.site_index(site) {
                    out.push((idx, pair[0].start, pair[1].end, demand.size));
                }
            }
        }
    }
    out
}

fn check_capacity(
    parts: &[(Time, Time, Time)],
    capacity: Time,
    resource: &str,
) -> Result<(), Violation> {
    let mut events: Vec<(Time, Time)> = Vec::new();
    for &(s, e, c) in parts {
        if s < e {
            events.push((s, c));
            events.push((e, -c));
        }
    }
    events.sort_unstable();
    let mut height = 0;
    for &(t, delta) in &events {
        height += delta;
        if height > capacity {
            return Err(violation(
                Some(t),
                resource,
                format!("capacity {capacity} exceeded (load {height})"),
            ));
        }
    }
    Ok(())
}

pub fn replay(
    schedule: &Schedule,
    network: &Network,
    request: Option<&Request>,
    opts: &ReplayOptions,
) -> Result<(), Violation> {
    for e in &schedule.entries {
        if network.link_index(&e.link).is_none() {
            return Err(violation(
                None,
                format!("link {}", e.link),
                "unknown link in schedule".into(),
            ));
        }
        if e.end <= e.start {
            return Err(violation(
                Some(e.start),
                format!("link {}", e.link),
                format!("entry for `{}` has end {} <= start {}", e.demand, e.end, e.start),
            ));
        }
        if e.start < 0 {
            return Err(violation(
                Some(e.start),
                format!("link {}", e.link),
                format!("entry for `{}` starts before time 0", e.demand),
            ));
        }
    }
    if schedule.makespan != schedule.entries.iter().map(|e| e.end).max().unwrap_or(0) {
        return Err(violation(
            None,
            "schedule",
            "makespan does not equal the latest entry end".into(),
        ));
    }

    if opts.check_paths {
        if let Some(request) = request {
            for e in &schedule.entries {
                if !request.demands.iter().any(|d| d.name == e.demand) {
                    return Err(violation(
                        None,
                        format!("demand {}", e.demand),
                        "not part of the request".into(),
                    ));
                }
            }
            for demand in &request.demands {
                check_path(schedule, network, request, demand)?;
            }
        }
    }

    // per-link mutual exclusion
    for link in &network.links {
        let mut own: Vec<&ScheduleEntry> = schedule
            .entries
            .iter()
            .filter(|e| e.link == link.id)
            .collect();
        own.sort_by_key(|e| e.start);
        for w in own.windows(2) {
            if w[0].end > w[1].start {
                return Err(violation(
                    Some(w[1].start),
                    format!("link {}", link.id),
                    format!(
                        "transfers of `{}` and `{}` overlap",
                        w[0].demand, w[1].demand
                    ),
                ));
            }
        }
    }

    if opts.check_shared {
        for (gi, group) in network.shared_groups.iter().enumerate() {
            let mut parts = Vec::new();
            for e in &schedule.entries {
                if group.members.contains(&e.link) {
                    let cons = match opts.shared_consumption {
                        SharedConsumption::Slowdown => network.link(&e.link).unwrap().slowdown,
                        SharedConsumption::Unit => 1,
                    };
                    parts.push((e.start, e.end, cons));
                }
            }
            check_capacity(&parts, group.capacity, &format!("shared group {gi}"))?;
        }
    }

    if opts.check_storage {
        if let Some(request) = request {
            let occupancies = storage_occupancies(schedule, network, request);
            for (idx, site) in network.sites.iter().enumerate() {
                let Storage::Bounded(capacity) = site.storage else {
                    continue;
                };
                let parts: Vec<(Time, Time, Time)> = occupancies
                    .iter()
                    .filter(|&&(s, _, _, _)| s == idx)
                    .map(|&(_, s, e, c)| (s, e, c))
                    .collect();
                check_capacity(&parts, capacity, &format!("storage at {}", site.id))?;
            }
        }
    }

    Ok(())
}

fn check_path(
    schedule: &Schedule,
    network: &Network,
    request: &Request,
    demand: &crate::model::Demand,
) -> Result<(), Violation> {
    let resource = format!("demand {}", demand.name);
    let entries = schedule.entries_of(&demand.name);
    if entries.is_empty() {
        return Err(violation(None, resource, "no transfer scheduled".into()));
    }
    let mut visited: Vec<&str> = Vec::new();
    for (i, e) in entries.iter().enumerate() {
        let link = network.link(&e.link).unwrap();
        if e.end - e.start != demand.size * link.slowdown {
            return Err(violation(
                Some(e.start),
                resource,
                format!(
                    "duration {} != size {} x slowdown {}",
                    e.end - e.start,
                    demand.size,
                    link.slowdown
                ),
            ));
        }
        if demand.has_origin(&link.to) {
            return Err(violation(
                Some(e.start),
                resource,
                format!("path enters origin site `{}`", link.to),
            ));
        }
        if i == 0 {
            if !demand.has_origin(&link.from) {
                return Err(violation(
                    Some(e.start),
                    resource,
                    format!("path starts at `{}`, not an origin", link.from),
                ));
            }
            visited.push(link.from.as_str());
        } else {
            let prev = &entries[i - 1];
            let prev_link = network.link(&prev.link).unwrap();
            if prev_link.to != link.from {
                return Err(violation(
                    Some(e.start),
                    resource,
                    format!(
                        "links `{}` and `{}` are not consecutive",
                        prev.link, e.link
                    ),
                ));
            }
            if prev.end > e.start {
                return Err(violation(
                    Some(e.start),
                    resource,
                    format!(
                        "transfer over `{}` starts before `{}` finishes",
                        e.link, prev.link
                    ),
                ));
            }
        }
        if visited.contains(&link.to.as_str()) {
            return Err(violation(
                Some(e.start),
                resource,
                format!("path revisits site `{}`", link.to),
            ));
        }
        visited.push(link.to.as_str());
    }
    let last = network.link(&entries.last().unwrap().link).unwrap();
    if last.to != request.destination {
        return Err(violation(
            None,
            resource,
            format!("path ends at `{}`, not the destination", last.to),
        ));
    }
    Ok(())
}
