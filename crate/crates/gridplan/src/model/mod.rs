//! Data model for transfer networks, requests and schedules.
//!
//! A [`Network`] is a directed graph of sites connected by links. Each link
//! carries an integer slowdown factor: transferring a file of size `s` over a
//! link with slowdown `f` takes `s * f` time units. Links may belong to
//! [`SharedLinkGroup`]s with a joint capacity, and sites may have bounded
//! storage. A [`Request`] names the files (demands) that must reach a single
//! destination site; each demand is already present at one or more origin
//! sites.

mod io;
mod validate;

pub use io::{
    load_network, load_request, network_from_str, read_schedule_csv, request_from_str,
    write_schedule_csv,
};
pub use validate::{validate, ValidationResult};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer time / size unit used throughout. Durations are exact products
/// `size * slowdown`, so everything stays in integer arithmetic.
pub type Time = i64;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid input:\n{}", .0.join("\n"))]
    Invalid(Vec<String>),
    #[error("unknown site id `{0}`")]
    UnknownSite(String),
    #[error("unknown link id `{0}`")]
    UnknownLink(String),
}

/// Opaque site label, unique within a network.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SiteId(pub String);

impl SiteId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SiteId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<&str> for SiteId {
    fn from(s: &str) -> Self {
        SiteId(s.to_string())
    }
}

/// Free space at a site, in file-size units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Bounded(Time),
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Site {
    pub id: SiteId,
    pub storage: Storage,
}

/// Directed link. `slowdown` is time units per file-size unit (the
/// reciprocal of a link speed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: String,
    pub from: SiteId,
    pub to: SiteId,
    pub slowdown: Time,
}

/// Links that share a router or fiber. At any point in time the summed
/// consumption of active transfers over member links must stay within
/// `capacity`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedLinkGroup {
    pub members: Vec<String>,
    pub capacity: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Network {
    pub sites: Vec<Site>,
    pub links: Vec<Link>,
    pub shared_groups: Vec<SharedLinkGroup>,
}

impl Network {
    pub fn site_index(&self, id: &SiteId) -> Option<usize> {
        self.sites.iter().position(|s| &s.id == id)
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }

    pub fn link(&self, id: &str) -> Result<&Link, ModelError> {
        self.links
            .iter()
            .find(|l| l.id == id)
            .ok_or_else(|| ModelError::UnknownLink(id.to_string()))
    }

    /// All links leaving `site`, in declaration order.
    pub fn out_links(&self, site: &SiteId) -> Result<Vec<&Link>, ModelError> {
        if self.site_index(site).is_none() {
            return Err(ModelError::UnknownSite(site.0.clone()));
        }
        Ok(self.links.iter().filter(|l| &l.from == site).collect())
    }

    /// All links entering `site`, in declaration order.
    pub fn in_links(&self, site: &SiteId) -> Result<Vec<&Link>, ModelError> {
        if self.site_index(site).is_none() {
            return Err(ModelError::UnknownSite(site.0.clone()));
        }
        Ok(self.links.iter().filter(|l| &l.to == site).collect())
    }
}

/// A named file that must reach the destination. `origins` are the sites
/// already holding a replica; the transfer path may start at any one of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demand {
    pub name: String,
    pub size: Time,
    pub origins: Vec<SiteId>,
}

impl Demand {
    pub fn has_origin(&self, site: &SiteId) -> bool {
        self.origins.contains(site)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub destination: SiteId,
    pub demands: Vec<Demand>,
}

/// Time needed to move `demand` over `link`.
pub fn transfer_duration(demand: &Demand, link: &Link) -> Time {
    demand.size * link.slowdown
}

/// One transfer of one demand over one link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleEntry {
    pub demand: String,
    pub link: String,
    pub start: Time,
    pub end: Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
    pub makespan: Time,
}

impl Schedule {
    /// Builds a schedule from entries, computing the makespan (0 if empty).
    pub fn from_entries(entries: Vec<ScheduleEntry>) -> Self {
        let makespan = entries.iter().map(|e| e.end).max().unwrap_or(0);
        Schedule { entries, makespan }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one demand, ordered by start time.
    pub fn entries_of(&self, demand: &str) -> Vec<&ScheduleEntry> {
        let mut v: Vec<&ScheduleEntry> =
            self.entries.iter().filter(|e| e.demand == demand).collect();
        v.sort_by_key(|e| e.start);
        v
    }
}
