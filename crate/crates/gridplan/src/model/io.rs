//! JSON ingestion for networks and requests, and CSV output for schedules.
//!
//! Both file kinds are plain JSON. Unknown keys are rejected so that typos
//! surface as errors instead of silently ignored settings.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::{
    Demand, Link, ModelError, Network, Request, Schedule, ScheduleEntry, SharedLinkGroup, Site,
    SiteId, Storage,
};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    sites: Vec<SiteFile>,
    links: Vec<LinkFile>,
    #[serde(default)]
    shared_groups: Vec<GroupFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteFile {
    id: String,
    #[serde(default)]
    storage: StorageFile,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum StorageFile {
    Bounded(i64),
    Named(String),
}

impl Default for StorageFile {
    fn default() -> Self {
        StorageFile::Named("unbounded".into())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkFile {
    id: String,
    from: String,
    to: String,
    slowdown: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GroupFile {
    members: Vec<String>,
    capacity: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RequestFile {
    destination: String,
    demands: Vec<DemandFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DemandFile {
    name: String,
    size: i64,
    origins: Vec<String>,
}

fn read_file(path: &Path) -> Result<String, ModelError> {
    fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &str, e: serde_json::Error) -> ModelError {
    ModelError::Parse {
        path: path.to_string(),
        message: e.to_string(),
    }
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, ModelError> {
    let path = path.as_ref();
    network_from_str(&read_file(path)?, &path.display().to_string())
}

/// Parses and structurally validates a network from JSON text. `origin` is
/// used in error messages only.
pub fn network_from_str(text: &str, origin: &str) -> Result<Network, ModelError> {
    let raw: NetworkFile = serde_json::from_str(text).map_err(|e| parse_err(origin, e))?;
    let mut violations = Vec::new();

    let mut sites = Vec::new();
    for s in &raw.sites {
        if s.id.is_empty() {
            violations.push("site with empty id".to_string());
        }
        if sites.iter().any(|x: &Site| x.id.0 == s.id) {
            violations.push(format!("duplicate site id `{}`", s.id));
        }
        let storage = match &s.storage {
            StorageFile::Bounded(v) => {
                if *v < 1 {
                    violations.push(format!("site `{}`: storage must be >= 1, got {v}", s.id));
                }
                Storage::Bounded(*v)
            }
            StorageFile::Named(name) if name == "unbounded" => Storage::Unbounded,
            StorageFile::Named(name) => {
                violations.push(format!(
                    "site `{}`: storage must be an integer or \"unbounded\", got \"{name}\"",
                    s.id
                ));
                Storage::Unbounded
            }
        };
        sites.push(Site {
            id: SiteId(s.id.clone()),
            storage,
        });
    }

    let mut links = Vec::new();
    for l in &raw.links {
        if l.id.is_empty() {
            violations.push("link with empty id".to_string());
        }
        if links.iter().any(|x: &Link| x.id == l.id) {
            violations.push(format!("duplicate link id `{}`", l.id));
        }
        if l.from == l.to {
            violations.push(format!("link `{}`: from and to are both `{}`", l.id, l.from));
        }
        if l.slowdown < 1 {
            violations.push(format!(
                "link `{}`: slowdown must be >= 1, got {}",
                l.id, l.slowdown
            ));
        }
        for endpoint in [&l.from, &l.to] {
            if !sites.iter().any(|s| &s.id.0 == endpoint) {
                violations.push(format!("link `{}`: unknown site `{endpoint}`", l.id));
            }
        }
        links.push(Link {
            id: l.id.clone(),
            from: SiteId(l.from.clone()),
            to: SiteId(l.to.clone()),
            slowdown: l.slowdown,
        });
    }

    let mut shared_groups = Vec::new();
    for (i, g) in raw.shared_groups.iter().enumerate() {
        if g.members.len() < 2 {
            violations.push(format!("shared group {i}: needs at least 2 member links"));
        }
        for m in &g.members {
            if !links.iter().any(|l| &l.id == m) {
                violations.push(format!("shared group {i}: unknown link `{m}`"));
            }
        }
        let mut seen = g.members.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != g.members.len() {
            violations.push(format!("shared group {i}: duplicate member link"));
        }
        if g.capacity < 1 {
            violations.push(format!(
                "shared group {i}: capacity must be >= 1, got {}",
                g.capacity
            ));
        }
        shared_groups.push(SharedLinkGroup {
            members: g.members.clone(),
            capacity: g.capacity,
        });
    }

    if violations.is_empty() {
        Ok(Network {
            sites,
            links,
            shared_groups,
        })
    } else {
        Err(ModelError::Invalid(violations))
    }
}

pub fn load_request(path: impl AsRef<Path>) -> Result<Request, ModelError> {
    let path = path.as_ref();
    request_from_str(&read_file(path)?, &path.display().to_string())
}

/// Parses a request from JSON text and checks request-local invariants.
/// Cross checks against a network (destination exists, reachability) are
/// done by [`super::validate`].
pub fn request_from_str(text: &str, origin: &str) -> Result<Request, ModelError> {
    let raw: RequestFile = serde_json::from_str(text).map_err(|e| parse_err(origin, e))?;
    let mut violations = Vec::new();

    if raw.destination.is_empty() {
        violations.push("empty destination".to_string());
    }
    let mut demands = Vec::new();
    for d in &raw.demands {
        if d.name.is_empty() {
            violations.push("demand with empty name".to_string());
        }
        if demands.iter().any(|x: &Demand| x.name == d.name) {
            violations.push(format!("duplicate demand name `{}`", d.name));
        }
        if d.size < 1 {
            violations.push(format!("demand `{}`: size must be >= 1, got {}", d.name, d.size));
        }
        if d.origins.is_empty() {
            violations.push(format!("demand `{}`: empty origin set", d.name));
        }
        let mut origins: Vec<SiteId> = Vec::new();
        for o in &d.origins {
            let id = SiteId(o.clone());
            if !origins.contains(&id) {
                origins.push(id);
            }
        }
        demands.push(Demand {
            name: d.name.clone(),
            size: d.size,
            origins,
        });
    }

    if violations.is_empty() {
        Ok(Request {
            destination: SiteId(raw.destination),
            demands,
        })
    } else {
        Err(ModelError::Invalid(violations))
    }
}

/// Writes a schedule as CSV with header `demand,link,from,to,start,end`,
/// rows sorted by (demand, start).
pub fn write_schedule_csv(
    schedule: &Schedule,
    network: &Network,
    out: impl Write,
) -> Result<(), ModelError> {
    let mut rows: Vec<&ScheduleEntry> = schedule.entries.iter().collect();
    rows.sort_by(|a, b| (&a.demand, a.start).cmp(&(&b.demand, b.start)));
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| ModelError::Parse {
        path: "<schedule csv>".into(),
        message: e.to_string(),
    };
    w.write_record(["demand", "link", "from", "to", "start", "end"])
        .map_err(io_err)?;
    for e in rows {
        let link = network.link(&e.link)?;
        w.write_record([
            e.demand.as_str(),
            e.link.as_str(),
            link.from.as_str(),
            link.to.as_str(),
            &e.start.to_string(),
            &e.end.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| ModelError::Parse {
        path: "<schedule csv>".into(),
        message: e.to_string(),
    })?;
    Ok(())
}

/// Reads a schedule written by [`write_schedule_csv`]. The `from`/`to`
/// columns are informational and ignored on input.
pub fn read_schedule_csv(input: impl Read) -> Result<Schedule, ModelError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut entries = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let err = |message: String| ModelError::Parse {
            path: "<schedule csv>".into(),
            message,
        };
        let rec = rec.map_err(|e| err(e.to_string()))?;
        if rec.len() != 6 {
            return Err(err(format!("row {}: expected 6 columns", i + 2)));
        }
        let time = |field: &str, name: &str| {
            field
                .parse::<i64>()
                .map_err(|_| err(format!("row {}: bad {name} `{field}`", i + 2)))
        };
        entries.push(ScheduleEntry {
            demand: rec[0].to_string(),
            link: rec[1].to_string(),
            start: time(&rec[4], "start")?,
            end: time(&rec[5], "end")?,
        });
    }
    Ok(Schedule::from_entries(entries))
}
