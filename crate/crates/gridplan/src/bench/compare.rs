//! Side-by-side benchmark of planning methods over generated scenarios.
//!
//! Every cell of the grid (method x n_files) runs `reps` seeded instances.
//! The loss column is measured per instance against the best makespan any
//! method achieved on that instance, then aggregated as a median.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::bench::generate::{generate, Case, GenerateError, ScenarioSpec};
use crate::model::Time;
use crate::p2p::simulate;
use crate::solver::{build_model, solve, Budget, FakeTasks, ModelConfig};
use crate::strategies::{solve_chunked, solve_time_limited, ChunkedOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Optimal,
    OptimalSymmetry,
    TimeLimited { coeff_ms: u64 },
    Chunked { size: usize },
    P2p,
}

impl Method {
    pub fn label(&self) -> String {
        match self {
            Method::Optimal => "optimal".into(),
            Method::OptimalSymmetry => "optimal_sym".into(),
            Method::TimeLimited { coeff_ms } => format!("timelimited_{coeff_ms}"),
            Method::Chunked { size } => format!("chunked_{size}"),
            Method::P2p => "p2p".into(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    /// Accepts `optimal`, `optimal-sym`, `timelimited:<ms>`, `chunked:<size>`
    /// and `p2p`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "optimal" => return Ok(Method::Optimal),
            "optimal-sym" => return Ok(Method::OptimalSymmetry),
            "p2p" => return Ok(Method::P2p),
            _ => {}
        }
        if let Some(arg) = s.strip_prefix("timelimited:") {
            let coeff_ms = arg
                .parse()
                .map_err(|_| format!("bad time coefficient `{arg}`"))?;
            return Ok(Method::TimeLimited { coeff_ms });
        }
        if let Some(arg) = s.strip_prefix("chunked:") {
            let size: usize = arg.parse().map_err(|_| format!("bad chunk size `{arg}`"))?;
            if size == 0 {
                return Err("chunk size must be >= 1".into());
            }
            return Ok(Method::Chunked { size });
        }
        Err(format!(
            "unknown method `{s}` (expected optimal, optimal-sym, timelimited:<ms>, chunked:<size> or p2p)"
        ))
    }
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub ns: Vec<usize>,
    pub reps: usize,
    pub seed0: u64,
    /// Budget applied to each optimal / chunked solve.
    pub cell_budget: Budget,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            ns: vec![2, 4, 6],
            reps: 3,
            seed0: 0,
            cell_budget: Budget::unlimited(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub method: Method,
    pub case: Case,
    pub n_files: usize,
    pub seed0: u64,
    pub reps: usize,
    pub median_wall_ms: f64,
    /// None when no rep produced a schedule within the budget.
    pub median_makespan: Option<f64>,
    pub loss_pct: Option<f64>,
    /// Reps that ended without a schedule.
    pub failures: usize,
}

/// Runs every method over every (n_files, seed) instance derived from the
/// base scenario. `base.n_files` and `base.seed` are overridden per cell.
pub fn run_comparison(
    base: &ScenarioSpec,
    methods: &[Method],
    config: &ModelConfig,
    opts: &CompareOptions,
) -> Result<Vec<ComparisonRow>, GenerateError> {
    let mut rows = Vec::new();
    for &n in &opts.ns {
        // outcome[m][rep] = (wall_ms, makespan)
        let mut outcome: Vec<Vec<(f64, Option<Time>)>> = vec![Vec::new(); methods.len()];
        for rep in 0..opts.reps {
            let seed = opts.seed0 + rep as u64;
            let spec = ScenarioSpec {
                n_files: n,
                seed,
                ..base.clone()
            };
            let request = generate(&spec)?;
            for (m, method) in methods.iter().enumerate() {
                let t0 = Instant::now();
                let makespan = run_method(method, &spec, &request, config, opts);
                let wall = t0.elapsed().as_secs_f64() * 1e3;
                outcome[m].push((wall, makespan));
            }
        }
        for (m, method) in methods.iter().enumerate() {
            let walls: Vec<f64> = outcome[m].iter().map(|&(w, _)| w).collect();
            let mut losses = Vec::new();
            let mut spans = Vec::new();
            let mut failures = 0;
            for rep in 0..opts.reps {
                let Some(span) = outcome[m][rep].1 else {
                    failures += 1;
                    continue;
                };
                spans.push(span as f64);
                let reference = outcome
                    .iter()
                    .filter_map(|per_rep| per_rep[rep].1)
                    .min()
                    .unwrap_or(span);
                losses.push(if reference == 0 {
                    0.0
                } else {
                    (span - reference) as f64 / reference as f64 * 100.0
                });
            }
            rows.push(ComparisonRow {
                method: *method,
                case: base.case,
                n_files: n,
                seed0: opts.seed0,
                reps: opts.reps,
                median_wall_ms: median(&walls),
                median_makespan: if spans.is_empty() { None } else { Some(median(&spans)) },
                loss_pct: if losses.is_empty() { None } else { Some(median(&losses)) },
                failures,
            });
        }
    }
    Ok(rows)
}

fn run_method(
    method: &Method,
    spec: &ScenarioSpec,
    request: &crate::model::Request,
    config: &ModelConfig,
    opts: &CompareOptions,
) -> Option<Time> {
    match method {
        Method::Optimal | Method::OptimalSymmetry => {
            let cfg = ModelConfig {
                symmetry_breaking: matches!(method, Method::OptimalSymmetry),
                ..config.clone()
            };
            let model = build_model(&spec.network, request, cfg, FakeTasks::default()).ok()?;
            let (schedule, _) = solve(&model, &opts.cell_budget);
            schedule.map(|s| s.makespan)
        }
        Method::TimeLimited { coeff_ms } => {
            let (schedule, _) =
                solve_time_limited(&spec.network, request, *coeff_ms, config).ok()?;
            schedule.map(|s| s.makespan)
        }
        Method::Chunked { size } => {
            let chunked_opts = ChunkedOptions {
                per_chunk_budget: opts.cell_budget.clone(),
                sort_by_origin_cardinality: false,
            };
            solve_chunked(&spec.network, request, *size, config, &chunked_opts)
                .ok()
                .map(|(s, _)| s.makespan)
        }
        Method::P2p => simulate(&spec.network, request, spec.seed)
            .ok()
            .map(|(s, _)| s.makespan),
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    }
}

pub fn rows_to_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::from(
        "method,case,n_files,seed_reps,median_wall_ms,median_makespan,loss_pct\n",
    );
    for r in rows {
        let span = r
            .median_makespan
            .map(|m| format!("{m}"))
            .unwrap_or_default();
        let loss = r.loss_pct.map(|l| format!("{l:.2}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}x{},{:.3},{},{}\n",
            r.method.label(),
            r.case,
            r.n_files,
            r.seed0,
            r.reps,
            r.median_wall_ms,
            span,
            loss,
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::generate::star_network;

    fn base_spec(case: Case) -> ScenarioSpec {
        ScenarioSpec {
            case,
            n_files: 0,
            weights: vec![],
            seed: 0,
            network: star_network(&[1, 2]),
            destination: "dest".into(),
        }
    }

    #[test]
    fn method_parsing_round_trips() {
        for s in ["optimal", "optimal-sym", "timelimited:250", "chunked:4", "p2p"] {
            let m: Method = s.parse().unwrap();
            let back: Method = match m {
                Method::TimeLimited { coeff_ms } => format!("timelimited:{coeff_ms}").parse(),
                Method::Chunked { size } => format!("chunked:{size}").parse(),
                _ => s.parse(),
            }
            .unwrap();
            assert_eq!(m, back);
        }
        assert!("chunked:0".parse::<Method>().is_err());
        assert!("nope".parse::<Method>().is_err());
    }

    #[test]
    fn optimal_has_zero_loss_and_p2p_never_beats_it() {
        let rows = run_comparison(
            &base_spec(Case::Shared),
            &[Method::Optimal, Method::P2p],
            &ModelConfig::default(),
            &CompareOptions {
                ns: vec![2, 3],
                reps: 2,
                ..CompareOptions::default()
            },
        )
        .unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(r.failures, 0);
            match r.method {
                Method::Optimal => assert_eq!(r.loss_pct, Some(0.0)),
                _ => assert!(r.loss_pct.unwrap() >= 0.0),
            }
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let rows = run_comparison(
            &base_spec(Case::Distinct),
            &[Method::Chunked { size: 1 }],
            &ModelConfig::default(),
            &CompareOptions {
                ns: vec![2],
                reps: 1,
                ..CompareOptions::default()
            },
        )
        .unwrap();
        let csv = rows_to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "method,case,n_files,seed_reps,median_wall_ms,median_makespan,loss_pct"
        );
        let row = lines.next().unwrap();
        assert!(row.starts_with("chunked_1,distinct,2,0x1,"), "{row}");
    }
}
