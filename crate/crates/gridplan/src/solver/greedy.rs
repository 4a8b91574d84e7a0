//! Greedy seed schedule: routes every demand over its fastest usable path
//! and runs the transfers back to back, after any fake tasks. The result is
//! a feasible incumbent whose makespan bounds the start-time domains.

use crate::model::{Network, Request, Schedule, ScheduleEntry, Storage, Time};

use super::{BuildError, ModelConfig, SharedConsumption};

fn link_usable(network: &Network, config: &ModelConfig, e: usize) -> bool {
    if !config.enforce_shared_groups {
        return true;
    }
    let id = &network.links[e].id;
    network.shared_groups.iter().all(|g| {
        if !g.members.contains(id) {
            return true;
        }
        let cons = match config.shared_consumption {
            SharedConsumption::Slowdown => network.links[e].slowdown,
            SharedConsumption::Unit => 1,
        };
        cons <= g.capacity
    })
}

fn transit_usable(network: &Network, config: &ModelConfig, site: usize, size: Time) -> bool {
    if !config.enforce_storage {
        return true;
    }
    match network.sites[site].storage {
        Storage::Bounded(k) => k >= size,
        Storage::Unbounded => true,
    }
}

/// Cheapest usable path (list of link indices) from any origin to dest, or
/// None. Deterministic: ties resolved by site / link declaration order.
fn best_path(
    network: &Network,
    config: &ModelConfig,
    origins: &[usize],
    dest: usize,
    size: Time,
) -> Option<Vec<usize>> {
    let n_sites = network.sites.len();
    if !config.allow_transit {
        return network
            .links
            .iter()
            .enumerate()
            .filter(|(e, l)| {
                let from = network.site_index(&l.from).unwrap();
                let to = network.site_index(&l.to).unwrap();
                to == dest && origins.contains(&from) && link_usable(network, config, *e)
            })
            .min_by_key(|(e, l)| (size * l.slowdown, *e))
            .map(|(e, _)| vec![e]);
    }

    let mut dist: Vec<Option<Time>> = vec![None; n_sites];
    let mut parent: Vec<Option<usize>> = vec![None; n_sites];
    let mut done = vec![false; n_sites];
    for &o in origins {
        dist[o] = Some(0);
    }
    loop {
        let mut u = None;
        for n in 0..n_sites {
            if done[n] {
                continue;
            }
            if let Some(dn) = dist[n] {
                if u.is_none_or(|(best, _)| dn < best) {
                    u = Some((dn, n));
                }
            }
        }
        let Some((du, u)) = u else { break };
        done[u] = true;
        if u == dest {
            break;
        }
        // expanding through u means u is a transit site unless it is an origin
        if !origins.contains(&u) && !transit_usable(network, config, u, size) {
            continue;
        }
        for (e, l) in network.links.iter().enumerate() {
            let from = network.site_index(&l.from).unwrap();
            let to = network.site_index(&l.to).unwrap();
            if from != u || !link_usable(network, config, e) {
                continue;
            }
            // a path never enters an origin of the same demand
            if origins.contains(&to) {
                continue;
            }
            let nd = du + size * l.slowdown;
            if dist[to].is_none_or(|old| nd < old) {
                dist[to] = Some(nd);
                parent[to] = Some(e);
            }
        }
    }
    dist[dest]?;
    let mut path = Vec::new();
    let mut at = dest;
    while let Some(e) = parent[at] {
        path.push(e);
        at = network.site_index(&network.links[e].from).unwrap();
    }
    path.reverse();
    Some(path)
}

pub(crate) fn greedy_schedule(
    network: &Network,
    request: &Request,
    config: &ModelConfig,
    origin_sets: &[Vec<usize>],
    dest: usize,
    fake_link: &[Vec<(Time, Time)>],
    fake_storage: &[Vec<(Time, Time, Time)>],
) -> Result<Schedule, BuildError> {
    let fake_end = fake_link
        .iter()
        .flatten()
        .map(|&(_, e)| e)
        .chain(fake_storage.iter().flatten().map(|&(_, e, _)| e))
        .max()
        .unwrap_or(0);

    let mut t = fake_end;
    let mut entries = Vec::new();
    for (d, demand) in request.demands.iter().enumerate() {
        let path = best_path(network, config, &origin_sets[d], dest, demand.size)
            .ok_or_else(|| BuildError::Infeasible(demand.name.clone()))?;
        for e in path {
            let dur = demand.size * network.links[e].slowdown;
            entries.push(ScheduleEntry {
                demand: demand.name.clone(),
                link: network.links[e].id.clone(),
                start: t,
                end: t + dur,
            });
            t += dur;
        }
    }
    Ok(Schedule::from_entries(entries))
}
