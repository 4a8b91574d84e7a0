//! Constraint model and exact branch-and-bound search.
//!
//! For every demand `d` and link `e` the model holds a 0/1 routing variable
//! (is `d` transferred over `e`?) and an integer start-time variable. Path
//! constraints force a single origin-to-destination path per demand, every
//! link is a unary resource (one active transfer at a time), and consecutive
//! links of a path are chained: a transfer out of a site can only start once
//! the transfer into it has finished. Shared-link groups and bounded site
//! storage add cumulative resources on top.
//!
//! Search is depth-first branch and bound in two goals: first assign all
//! routing variables, then the start times of the chosen links. Variable
//! selection is smallest current domain (ties by declaration order), values
//! are tried in increasing order. Each incumbent with makespan `M` tightens
//! the bound to `M - 1`.

mod greedy;
mod propagate;
mod search;

pub use search::{solve, Budget, SearchReport};

use thiserror::Error;

use crate::model::{
    validate, Network, Request, Schedule, SiteId, Storage, Time,
};

/// How much of a shared group's capacity a transfer on a member link uses.
///
/// `Slowdown` charges the member link's slowdown factor, so slower links
/// consume more of the router's capacity. That is the modeling choice this
/// planner follows even though charging the reciprocal would match physical
/// bandwidth more closely; `Unit` (one capacity unit per active transfer) is
/// available as an alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SharedConsumption {
    #[default]
    Slowdown,
    Unit,
}

#[derive(Debug, Clone, Default)]
pub struct ModelConfig {
    /// Allow transfer paths longer than one link. When false, routing
    /// variables exist only for direct origin-to-destination links.
    pub allow_transit: bool,
    pub enforce_shared_groups: bool,
    pub enforce_storage: bool,
    pub symmetry_breaking: bool,
    /// Replaces the computed horizon for start-time domains.
    pub horizon_override: Option<Time>,
    pub shared_consumption: SharedConsumption,
}

/// A fixed, immovable occupation of a link, carried over from an earlier
/// chunk's schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FakeTask {
    pub link: String,
    pub start: Time,
    pub end: Time,
}

/// A fixed storage occupation at a site (a file that an earlier chunk parks
/// there while it is in transit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageReservation {
    pub site: SiteId,
    pub start: Time,
    pub end: Time,
    pub consumption: Time,
}

#[derive(Debug, Clone, Default)]
pub struct FakeTasks {
    pub links: Vec<FakeTask>,
    pub storage: Vec<StorageReservation>,
}

impl FakeTasks {
    pub fn is_empty(&self) -> bool {
        self.links.is_empty() && self.storage.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("invalid inputs:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("demand `{0}` has no feasible path to the destination")]
    Infeasible(String),
    #[error("unknown link `{0}` in fake tasks")]
    UnknownFakeLink(String),
    #[error("unknown site `{0}` in storage reservations")]
    UnknownFakeSite(String),
}

#[derive(Debug, Clone)]
pub(crate) struct VarDef {
    pub demand: usize,
    pub link: usize,
    pub dur: Time,
}

/// Per-demand routing sums (the single-path constraints).
#[derive(Debug, Clone, Default)]
pub(crate) struct PathSums {
    /// Variable sets that must each sum to exactly 1.
    pub exact_one: Vec<Vec<usize>>,
    /// (in, out) variable sets at transit nodes: each side sums to at most 1
    /// and both sides are equal.
    pub balanced: Vec<(Vec<usize>, Vec<usize>)>,
}

/// Chaining point: demand may pass through a node via one of `in_vars` and
/// one of `out_vars`; the outgoing transfer starts after the incoming ends.
#[derive(Debug, Clone)]
pub(crate) struct ChainNode {
    pub in_vars: Vec<usize>,
    pub out_vars: Vec<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct GroupDef {
    pub members: Vec<usize>,
    pub consumption: Vec<Time>,
    pub capacity: Time,
}

#[derive(Debug, Clone)]
pub(crate) struct StorageDef {
    pub site: usize,
    pub capacity: Time,
    /// (in var, out var, consumption): the demand occupies the site from the
    /// start of the incoming transfer to the end of the outgoing one.
    pub pairs: Vec<(usize, usize, Time)>,
}

#[derive(Debug)]
pub struct Model {
    pub(crate) network: Network,
    pub(crate) request: Request,
    pub(crate) config: ModelConfig,
    pub(crate) vars: Vec<VarDef>,
    pub(crate) link_vars: Vec<Vec<usize>>,
    pub(crate) demand_vars: Vec<Vec<usize>>,
    pub(crate) path_sums: Vec<PathSums>,
    pub(crate) chain_nodes: Vec<ChainNode>,
    pub(crate) groups: Vec<GroupDef>,
    pub(crate) storage_sites: Vec<StorageDef>,
    pub(crate) sym_pairs: Vec<(usize, usize)>,
    pub(crate) fake_link: Vec<Vec<(Time, Time)>>,
    pub(crate) fake_storage: Vec<Vec<(Time, Time, Time)>>,
    pub(crate) root_zero: Vec<usize>,
    pub(crate) horizon: Time,
    pub(crate) greedy: Schedule,
}

impl Model {
    pub fn build(
        network: &Network,
        request: &Request,
        config: ModelConfig,
    ) -> Result<Model, BuildError> {
        build_model(network, request, config, FakeTasks::default())
    }

    pub fn routing_var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    /// Makespan of the greedy seed schedule (the initial incumbent).
    pub fn greedy_makespan(&self) -> Time {
        self.greedy.makespan
    }

    pub(crate) fn demand_count(&self) -> usize {
        self.request.demands.len()
    }
}

pub fn build_model(
    network: &Network,
    request: &Request,
    config: ModelConfig,
    fakes: FakeTasks,
) -> Result<Model, BuildError> {
    let checked = validate(network, request);
    if !checked.is_ok() {
        return Err(BuildError::Invalid(checked.violations));
    }
    let request = checked.normalized;
    let dest = network.site_index(&request.destination).unwrap();

    let n_sites = network.sites.len();
    let n_links = network.links.len();
    let n_demands = request.demands.len();

    let link_from: Vec<usize> = network
        .links
        .iter()
        .map(|l| network.site_index(&l.from).unwrap())
        .collect();
    let link_to: Vec<usize> = network
        .links
        .iter()
        .map(|l| network.site_index(&l.to).unwrap())
        .collect();
    let origin_sets: Vec<Vec<usize>> = request
        .demands
        .iter()
        .map(|d| {
            d.origins
                .iter()
                .map(|o| network.site_index(o).unwrap())
                .collect()
        })
        .collect();

    // Routing variables, demand-major then link order (declaration order for
    // all tie-breaking).
    let mut vars = Vec::new();
    let mut var_of = vec![vec![None; n_links]; n_demands];
    for (d, demand) in request.demands.iter().enumerate() {
        for (e, link) in network.links.iter().enumerate() {
            let wanted = if config.allow_transit {
                true
            } else {
                link_to[e] == dest && origin_sets[d].contains(&link_from[e])
            };
            if wanted {
                var_of[d][e] = Some(vars.len());
                vars.push(VarDef {
                    demand: d,
                    link: e,
                    dur: demand.size * link.slowdown,
                });
            }
        }
    }

    let mut link_vars = vec![Vec::new(); n_links];
    let mut demand_vars = vec![Vec::new(); n_demands];
    for (v, def) in vars.iter().enumerate() {
        link_vars[def.link].push(v);
        demand_vars[def.demand].push(v);
    }

    // Variables that are 0 in every solution: links into an origin of the
    // demand, links leaving the destination.
    let mut root_zero = Vec::new();
    if config.allow_transit {
        for (v, def) in vars.iter().enumerate() {
            if origin_sets[def.demand].contains(&link_to[def.link]) || link_from[def.link] == dest
            {
                root_zero.push(v);
            }
        }
    }

    let mut path_sums = Vec::new();
    let mut chain_nodes = Vec::new();
    for d in 0..n_demands {
        let mut sums = PathSums::default();
        if config.allow_transit {
            let origin_out: Vec<usize> = demand_vars[d]
                .iter()
                .copied()
                .filter(|&v| origin_sets[d].contains(&link_from[vars[v].link]))
                .collect();
            let dest_in: Vec<usize> = demand_vars[d]
                .iter()
                .copied()
                .filter(|&v| link_to[vars[v].link] == dest)
                .collect();
            sums.exact_one.push(origin_out);
            sums.exact_one.push(dest_in);
            for n in 0..n_sites {
                if n == dest || origin_sets[d].contains(&n) {
                    continue;
                }
                let in_vars: Vec<usize> = demand_vars[d]
                    .iter()
                    .copied()
                    .filter(|&v| link_to[vars[v].link] == n)
                    .collect();
                let out_vars: Vec<usize> = demand_vars[d]
                    .iter()
                    .copied()
                    .filter(|&v| link_from[vars[v].link] == n)
                    .collect();
                if in_vars.is_empty() && out_vars.is_empty() {
                    continue;
                }
                chain_nodes.push(ChainNode {
                    in_vars: in_vars.clone(),
                    out_vars: out_vars.clone(),
                });
                sums.balanced.push((in_vars, out_vars));
            }
        } else {
            sums.exact_one.push(demand_vars[d].clone());
        }
        path_sums.push(sums);
    }

    let groups: Vec<GroupDef> = if config.enforce_shared_groups {
        network
            .shared_groups
            .iter()
            .map(|g| {
                let members: Vec<usize> = g
                    .members
                    .iter()
                    .map(|m| network.link_index(m).unwrap())
                    .collect();
                let consumption = members
                    .iter()
                    .map(|&e| match config.shared_consumption {
                        SharedConsumption::Slowdown => network.links[e].slowdown,
                        SharedConsumption::Unit => 1,
                    })
                    .collect();
                GroupDef {
                    members,
                    consumption,
                    capacity: g.capacity,
                }
            })
            .collect()
    } else {
        Vec::new()
    };

    let mut storage_sites = Vec::new();
    if config.enforce_storage {
        for (n, site) in network.sites.iter().enumerate() {
            let capacity = match site.storage {
                Storage::Bounded(k) => k,
                Storage::Unbounded => continue,
            };
            if n == dest {
                continue;
            }
            let mut pairs = Vec::new();
            for (d, demand) in request.demands.iter().enumerate() {
                if origin_sets[d].contains(&n) {
                    continue;
                }
                for e_in in 0..n_links {
                    if link_to[e_in] != n {
                        continue;
                    }
                    let Some(in_var) = var_of[d][e_in] else {
                        continue;
                    };
                    for e_out in 0..n_links {
                        if link_from[e_out] != n {
                            continue;
                        }
                        let Some(out_var) = var_of[d][e_out] else {
                            continue;
                        };
                        pairs.push((in_var, out_var, demand.size));
                    }
                }
            }
            if !pairs.is_empty() {
                storage_sites.push(StorageDef {
                    site: n,
                    capacity,
                    pairs,
                });
            }
        }
    }

    // Index fake tasks by link / site.
    let mut fake_link = vec![Vec::new(); n_links];
    for f in &fakes.links {
        let e = network
            .link_index(&f.link)
            .ok_or_else(|| BuildError::UnknownFakeLink(f.link.clone()))?;
        fake_link[e].push((f.start, f.end));
    }
    let mut fake_storage = vec![Vec::new(); n_sites];
    for r in &fakes.storage {
        let n = network
            .site_index(&r.site)
            .ok_or_else(|| BuildError::UnknownFakeSite(r.site.0.clone()))?;
        fake_storage[n].push((r.start, r.end, r.consumption));
    }

    let sym_pairs = if config.symmetry_breaking && !config.allow_transit {
        symmetry_pairs(&request, &origin_sets)
    } else {
        Vec::new()
    };

    let greedy = greedy::greedy_schedule(
        network,
        &request,
        &config,
        &origin_sets,
        dest,
        &fake_link,
        &fake_storage,
    )?;
    let horizon = config.horizon_override.unwrap_or(greedy.makespan);

    Ok(Model {
        network: network.clone(),
        request,
        config,
        vars,
        link_vars,
        demand_vars,
        path_sums,
        chain_nodes,
        groups,
        storage_sites,
        sym_pairs,
        fake_link,
        fake_storage,
        root_zero,
        horizon,
        greedy,
    })
}

/// Demand pairs (d1 before d2) with identical origin sets and sizes, adjacent
/// within their equality class. Ordering the chosen link indices of such
/// pairs prunes swapped-but-equal schedules.
fn symmetry_pairs(request: &Request, origin_sets: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut keys: Vec<(Vec<usize>, Time)> = Vec::new();
    for (d, demand) in request.demands.iter().enumerate() {
        let mut set = origin_sets[d].clone();
        set.sort_unstable();
        keys.push((set, demand.size));
    }
    let mut pairs = Vec::new();
    for d2 in 0..keys.len() {
        // closest earlier demand with the same key
        if let Some(d1) = (0..d2).rev().find(|&d1| keys[d1] == keys[d2]) {
            pairs.push((d1, d2));
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Demand, Link, Site};

    pub(crate) fn star_network(slowdowns: &[Time]) -> Network {
        let mut sites: Vec<Site> = (0..slowdowns.len())
            .map(|i| Site {
                id: SiteId(format!("s{}", i + 1)),
                storage: Storage::Unbounded,
            })
            .collect();
        sites.push(Site {
            id: "dest".into(),
            storage: Storage::Unbounded,
        });
        let links = slowdowns
            .iter()
            .enumerate()
            .map(|(i, &slow)| Link {
                id: format!("l{}", i + 1),
                from: SiteId(format!("s{}", i + 1)),
                to: "dest".into(),
                slowdown: slow,
            })
            .collect();
        Network {
            sites,
            links,
            shared_groups: vec![],
        }
    }

    fn shared_request(n_files: usize, n_sites: usize) -> Request {
        Request {
            destination: "dest".into(),
            demands: (0..n_files)
                .map(|i| Demand {
                    name: format!("f{i:03}"),
                    size: 1,
                    origins: (0..n_sites).map(|s| SiteId(format!("s{}", s + 1))).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn shared_case_var_count_is_demands_times_links() {
        // 5 sites all holding 100 shared files, direct connections.
        let net = star_network(&[1, 1, 1, 1, 1]);
        let req = shared_request(100, 5);
        let model = Model::build(&net, &req, ModelConfig::default()).unwrap();
        assert_eq!(model.routing_var_count(), 500);
    }

    #[test]
    fn direct_mode_only_creates_origin_destination_vars() {
        let net = star_network(&[1, 2]);
        let req = Request {
            destination: "dest".into(),
            demands: vec![Demand {
                name: "f".into(),
                size: 1,
                origins: vec!["s1".into()],
            }],
        };
        let model = Model::build(&net, &req, ModelConfig::default()).unwrap();
        assert_eq!(model.routing_var_count(), 1);
    }

    #[test]
    fn direct_mode_without_direct_link_is_infeasible() {
        let mut net = star_network(&[1]);
        // s2 only reaches dest through s1
        net.sites.push(Site {
            id: "s2".into(),
            storage: Storage::Unbounded,
        });
        net.links.push(Link {
            id: "l2".into(),
            from: "s2".into(),
            to: "s1".into(),
            slowdown: 1,
        });
        let req = Request {
            destination: "dest".into(),
            demands: vec![Demand {
                name: "f".into(),
                size: 1,
                origins: vec!["s2".into()],
            }],
        };
        match Model::build(&net, &req, ModelConfig::default()) {
            Err(BuildError::Infeasible(name)) => assert_eq!(name, "f"),
            other => panic!("expected Infeasible, got {other:?}"),
        }
        // with transit allowed the same instance builds fine
        let cfg = ModelConfig {
            allow_transit: true,
            ..ModelConfig::default()
        };
        assert!(Model::build(&net, &req, cfg).is_ok());
    }

    #[test]
    fn symmetry_pairs_require_identical_origins_and_size() {
        let net = star_network(&[1, 2]);
        let both = vec![SiteId::from("s1"), SiteId::from("s2")];
        let req = Request {
            destination: "dest".into(),
            demands: vec![
                Demand {
                    name: "a".into(),
                    size: 1,
                    origins: both.clone(),
                },
                Demand {
                    name: "b".into(),
                    size: 1,
                    origins: both.clone(),
                },
                Demand {
                    name: "c".into(),
                    size: 2,
                    origins: both,
                },
            ],
        };
        let cfg = ModelConfig {
            symmetry_breaking: true,
            ..ModelConfig::default()
        };
        let model = Model::build(&net, &req, cfg).unwrap();
        assert_eq!(model.sym_pairs, vec![(0, 1)]);
    }
}
