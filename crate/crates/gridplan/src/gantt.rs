//! Gantt rendering of schedules: one lane per link, optionally one lane per
//! bounded storage site showing file layovers. Output is a deterministic SVG
//! (byte-identical for equal inputs) or a plain-text chart.

use crate::model::{Network, Request, Schedule, Storage, Time};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bar {
    pub label: String,
    pub start: Time,
    pub end: Time,
    /// Row within the lane; bars on the same level never overlap in time.
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lane {
    pub label: String,
    pub bars: Vec<Bar>,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GanttDocument {
    pub lanes: Vec<Lane>,
    pub horizon: Time,
}

/// First-fit level assignment: bars keep their given order, each goes to the
/// lowest level where it fits without overlap.
fn assign_levels(bars: &mut [Bar]) -> usize {
    let mut level_ends: Vec<Time> = Vec::new();
    for bar in bars.iter_mut() {
        let level = level_ends
            .iter()
            .position(|&end| end <= bar.start)
            .unwrap_or_else(|| {
                level_ends.push(Time::MIN);
                level_ends.len() - 1
            });
        bar.level = level;
        level_ends[level] = bar.end;
    }
    level_ends.len().max(1)
}

/// Builds the chart document. Link lanes appear in network declaration order.
/// With `storage_lanes`, every bounded site that hosts a layover gets an
/// extra lane; this needs the request to pair up consecutive hops, so
/// `request` must be given.
pub fn build_document(
    schedule: &Schedule,
    network: &Network,
    request: Option<&Request>,
    storage_lanes: bool,
) -> GanttDocument {
    let mut lanes = Vec::new();
    for link in &network.links {
        let mut bars: Vec<Bar> = schedule
            .entries
            .iter()
            .filter(|e| e.link == link.id)
            .map(|e| Bar {
                label: e.demand.clone(),
                start: e.start,
                end: e.end,
                level: 0,
            })
            .collect();
        bars.sort_by(|a, b| (a.start, &a.label).cmp(&(b.start, &b.label)));
        if bars.is_empty() {
            continue;
        }
        let levels = assign_levels(&mut bars);
        lanes.push(Lane {
            label: format!("link {}", link.id),
            bars,
            levels,
        });
    }

    if storage_lanes {
        if let Some(request) = request {
            for site in &network.sites {
                let Storage::Bounded(_) = site.storage else {
                    continue;
                };
                let mut bars = Vec::new();
                for demand in &request.demands {
                    let hops = schedule.entries_of(&demand.name);
                    for pair in hops.windows(2) {
                        let lands_here = network
                            .link(&pair[0].link)
                            .map(|l| l.to == site.id)
                            .unwrap_or(false);
                        if lands_here {
                            bars.push(Bar {
                                label: demand.name.clone(),
                                start: pair[0].start,
                                end: pair[1].end,
                                level: 0,
                            });
                        }
                    }
                }
                if bars.is_empty() {
                    continue;
                }
                bars.sort_by(|a, b| (a.start, &a.label).cmp(&(b.start, &b.label)));
                let levels = assign_levels(&mut bars);
                lanes.push(Lane {
                    label: format!("storage {}", site.id.0),
                    bars,
                    levels,
                });
            }
        }
    }

    GanttDocument {
        lanes,
        horizon: schedule.makespan,
    }
}

const PX_PER_UNIT: i64 = 32;
const ROW_H: i64 = 22;
const LANE_PAD: i64 = 8;
const LABEL_W: i64 = 140;

const PALETTE: &[&str] = &[
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

fn color_for(label: &str, order: &[String]) -> &'static str {
    let idx = order.iter().position(|l| l == label).unwrap_or(0);
    PALETTE[idx % PALETTE.len()]
}

pub fn render_svg(doc: &GanttDocument) -> String {
    // stable demand -> color mapping: lexicographic demand order
    let mut demand_order: Vec<String> = doc
        .lanes
        .iter()
        .flat_map(|l| l.bars.iter().map(|b| b.label.clone()))
        .collect();
    demand_order.sort();
    demand_order.dedup();

    let width = LABEL_W + doc.horizon.max(1) * PX_PER_UNIT + 20;
    let height: i64 = doc
        .lanes
        .iter()
        .map(|l| l.levels as i64 * ROW_H + LANE_PAD)
        .sum::<i64>()
        + 40;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let mut y = 10;
    for lane in &doc.lanes {
        let lane_h = lane.levels as i64 * ROW_H;
        svg.push_str(&format!(
            "<text x=\"4\" y=\"{}\" fill=\"black\">{}</text>\n",
            y + lane_h / 2 + 4,
            xml_escape(&lane.label)
        ));
        for bar in &lane.bars {
            let x = LABEL_W + bar.start * PX_PER_UNIT;
            let w = (bar.end - bar.start) * PX_PER_UNIT;
            let by = y + bar.level as i64 * ROW_H;
            svg.push_str(&format!(
                "<rect x=\"{x}\" y=\"{by}\" width=\"{w}\" height=\"{}\" fill=\"{}\" \
                 stroke=\"black\"/>\n",
                ROW_H - 4,
                color_for(&bar.label, &demand_order)
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" fill=\"black\">{}</text>\n",
                x + 4,
                by + ROW_H - 9,
                xml_escape(&bar.label)
            ));
        }
        y += lane_h + LANE_PAD;
    }

    // time axis
    for t in 0..=doc.horizon {
        let x = LABEL_W + t * PX_PER_UNIT;
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"10\" x2=\"{x}\" y2=\"{}\" stroke=\"#ddd\"/>\n",
            y
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" fill=\"black\">{t}</text>\n",
            y + 14
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_ascii(doc: &GanttDocument) -> String {
    let label_w = doc
        .lanes
        .iter()
        .map(|l| l.label.len())
        .max()
        .unwrap_or(0)
        .max(4);
    let mut out = String::new();
    for lane in &doc.lanes {
        for level in 0..lane.levels {
            let mut row = vec![b'.'; doc.horizon.max(1) as usize];
            for bar in lane.bars.iter().filter(|b| b.level == level) {
                let glyph = bar.label.bytes().next().unwrap_or(b'#');
                for cell in row
                    .iter_mut()
                    .take(bar.end as usize)
                    .skip(bar.start as usize)
                {
                    *cell = glyph;
                }
            }
            let name = if level == 0 { lane.label.as_str() } else { "" };
            out.push_str(&format!(
                "{name:<label_w$} |{}|\n",
                String::from_utf8(row).unwrap()
            ));
        }
    }
    out.push_str(&format!(
        "{:<label_w$}  0{:>width$}\n",
        "",
        doc.horizon,
        width = doc.horizon.max(1) as usize
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Schedule, ScheduleEntry};

    fn sample() -> (Schedule, Network) {
        let net = crate::bench::star_network(&[1, 2]);
        let sched = Schedule::from_entries(vec![
            ScheduleEntry {
                demand: "a".into(),
                link: "l1".into(),
                start: 0,
                end: 1,
            },
            ScheduleEntry {
                demand: "b".into(),
                link: "l1".into(),
                start: 1,
                end: 2,
            },
            ScheduleEntry {
                demand: "c".into(),
                link: "l2".into(),
                start: 0,
                end: 2,
            },
        ]);
        (sched, net)
    }

    #[test]
    fn link_lanes_follow_declaration_order() {
        let (sched, net) = sample();
        let doc = build_document(&sched, &net, None, false);
        let labels: Vec<&str> = doc.lanes.iter().map(|l| l.label.as_str()).collect();
        assert_eq!(labels, vec!["link l1", "link l2"]);
        assert_eq!(doc.horizon, 2);
        assert!(doc.lanes.iter().all(|l| l.levels == 1));
    }

    #[test]
    fn svg_is_byte_identical_across_runs() {
        let (sched, net) = sample();
        let doc = build_document(&sched, &net, None, false);
        assert_eq!(render_svg(&doc), render_svg(&doc));
        assert!(render_svg(&doc).starts_with("<svg"));
    }

    #[test]
    fn ascii_rows_span_the_horizon() {
        let (sched, net) = sample();
        let doc = build_document(&sched, &net, None, false);
        let text = render_ascii(&doc);
        let first = text.lines().next().unwrap();
        assert!(first.contains("|ab|"), "{text}");
    }

    #[test]
    fn storage_lane_shows_layover() {
        let net = crate::model::network_from_str(
            r#"{"sites": [{"id": "a"}, {"id": "b", "storage": 1}, {"id": "dest"}],
                "links": [{"id": "l1", "from": "a", "to": "b", "slowdown": 1},
                          {"id": "l2", "from": "b", "to": "dest", "slowdown": 1}]}"#,
            "test",
        )
        .unwrap();
        let req = crate::model::request_from_str(
            r#"{"destination": "dest",
                "demands": [{"name": "f", "size": 1, "origins": ["a"]}]}"#,
            "test",
        )
        .unwrap();
        let sched = Schedule::from_entries(vec![
            ScheduleEntry {
                demand: "f".into(),
                link: "l1".into(),
                start: 0,
                end: 1,
            },
            ScheduleEntry {
                demand: "f".into(),
                link: "l2".into(),
                start: 2,
                end: 3,
            },
        ]);
        let doc = build_document(&sched, &net, Some(&req), true);
        let storage = doc.lanes.iter().find(|l| l.label == "storage b").unwrap();
        assert_eq!(storage.bars.len(), 1);
        assert_eq!((storage.bars[0].start, storage.bars[0].end), (0, 3));
    }
}
