//! Cross validation of a request against a network.

use super::{Network, Request, SiteId};

/// Outcome of [`validate`]. Violations make the pair unusable; notices are
/// informational. `normalized` is the request with demands already sitting
/// at the destination dropped.
#[derive(Debug, Clone)]
pub struct ValidationResult {
    pub violations: Vec<String>,
    pub notices: Vec<String>,
    pub normalized: Request,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sites from which `dest` can be reached over directed links.
fn reaching_set(network: &Network, dest: &SiteId) -> Vec<SiteId> {
    let mut reach = vec![dest.clone()];
    let mut frontier = vec![dest.clone()];
    while let Some(site) = frontier.pop() {
        for l in &network.links {
            if l.to == site && !reach.contains(&l.from) {
                reach.push(l.from.clone());
                frontier.push(l.from.clone());
            }
        }
    }
    reach
}

pub fn validate(network: &Network, request: &Request) -> ValidationResult {
    let mut violations = Vec::new();
    let mut notices = Vec::new();

    let dest_known = network.site_index(&request.destination).is_some();
    if !dest_known {
        violations.push(format!(
            "destination `{}` is not a site of the network",
            request.destination
        ));
    }

    for g in &network.shared_groups {
        let weight_sum: i64 = g
            .members
            .iter()
            .filter_map(|m| network.link(m).ok())
            .map(|l| l.slowdown)
            .sum();
        if g.capacity >= weight_sum {
            notices.push(format!(
                "shared group {{{}}} has capacity {} >= total member weight {}; it never binds",
                g.members.join(", "),
                g.capacity,
                weight_sum
            ));
        }
    }

    let reach = if dest_known {
        reaching_set(network, &request.destination)
    } else {
        Vec::new()
    };

    let mut kept = Vec::new();
    for d in &request.demands {
        for o in &d.origins {
            if network.site_index(o).is_none() {
                violations.push(format!("demand `{}`: unknown origin site `{o}`", d.name));
            }
        }
        if d.origins.contains(&request.destination) {
            notices.push(format!(
                "demand `{}` is already at destination `{}`, dropped",
                d.name, request.destination
            ));
            continue;
        }
        if dest_known && !d.origins.iter().any(|o| reach.contains(o)) {
            violations.push(format!(
                "demand `{}` is unreachable: no origin has a path to `{}`",
                d.name, request.destination
            ));
        }
        kept.push(d.clone());
    }

    ValidationResult {
        violations,
        notices,
        normalized: Request {
            destination: request.destination.clone(),
            demands: kept,
        },
    }
}
