//! Result tables, summary statistics and box-plot rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bench::{BenchOutcome, RunRecord, ScanRow, RESULTS_SCHEMA};
use super::stats::{summarize, SummaryStats};
use crate::error::Result;
use crate::problems::ProblemKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub problem: ProblemKind,
    pub density: f64,
    pub solver: String,
    pub runs: usize,
    pub ratio: Option<SummaryStats>,
    pub metric: SummaryStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_chain_break_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub config_hash: String,
    pub runs: usize,
    pub errors: usize,
    pub groups: Vec<GroupSummary>,
}

type GroupKey = (ProblemKind, f64, String);

/// Groups in first-appearance order of problem, then density, then solver.
fn grouped(records: &[RunRecord]) -> Vec<(GroupKey, Vec<&RunRecord>)> {
    let mut order: Vec<GroupKey> = Vec::new();
    let mut map: BTreeMap<usize, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.problem, r.density, r.solver.clone());
        let i = match order.iter().position(|k| *k == key) {
            Some(i) => i,
            None => {
                order.push(key);
                order.len() - 1
            }
        };
        map.entry(i).or_default().push(r);
    }
    let rank = |k: &GroupKey| {
        let p = order.iter().position(|o| o.0 == k.0).unwrap();
        let d = order.iter().position(|o| o.0 == k.0 && o.1 == k.1).unwrap();
        let s = order.iter().position(|o| o.2 == k.2).unwrap();
        (p, d, s)
    };
    let mut out: Vec<_> = map.into_iter().map(|(i, v)| (order[i].clone(), v)).collect();
    out.sort_by_key(|(k, _)| rank(k));
    out
}

pub fn summarize_outcome(outcome: &BenchOutcome) -> Result<Summary> {
    let mut groups = Vec::new();
    for ((problem, density, solver), recs) in grouped(&outcome.records) {
        let ratios: Vec<f64> = recs.iter().filter_map(|r| r.ratio).collect();
        let metrics: Vec<f64> = recs.iter().map(|r| r.metric).collect();
        let breaks: Vec<f64> = recs.iter().filter_map(|r| r.chain_break_fraction).collect();
        groups.push(GroupSummary {
            problem,
            density,
            solver,
            runs: recs.len(),
            ratio: summarize(&ratios).ok(),
            metric: summarize(&metrics)?,
            mean_chain_break_fraction: (!breaks.is_empty()).then(|| breaks.iter().sum::<f64>() / breaks.len() as f64),
        });
    }
    Ok(Summary {
        schema: RESULTS_SCHEMA,
        config_hash: outcome.config_hash.clone(),
        runs: outcome.records.len(),
        errors: outcome.errors.len(),
        groups,
    })
}

pub fn results_csv(records: &[RunRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record([
            "instance_id", "problem", "density", "n_logical", "n_physical", "solver", "seed", "best_energy",
            "metric", "reference", "ratio", "elapsed_ms", "chain_break_fraction", "repairs",
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
}

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 6] = ["#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Box plots of the approximation ratio: one panel per problem, one box per
/// (density, solver) group, densities left to right in run order.
pub fn boxplot_svg(summary: &Summary) -> String {
    let groups: Vec<&GroupSummary> = summary.groups.iter().filter(|g| g.ratio.is_some()).collect();
    let mut problems: Vec<ProblemKind> = Vec::new();
    let mut solvers: Vec<&str> = Vec::new();
    for g in &groups {
        if !problems.contains(&g.problem) {
            problems.push(g.problem);
        }
        if !solvers.contains(&g.solver.as_str()) {
            solvers.push(&g.solver);
        }
    }
    let lo = groups.iter().map(|g| g.ratio.as_ref().unwrap().min).fold(1.0f64, f64::min);
    let lo = ((lo * 10.0).floor() / 10.0).min(0.9);
    let hi = 1.0f64.max(groups.iter().map(|g| g.ratio.as_ref().unwrap().max).fold(1.0, f64::max));
    let height = problems.len().max(1) as f64 * (PANEL_H + MARGIN) + MARGIN;
    let width = PANEL_W + 2.0 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" font-family="sans-serif" font-size="11">"#
    );
    for (pi, problem) in problems.iter().enumerate() {
        let top = MARGIN + pi as f64 * (PANEL_H + MARGIN);
        let y = |v: f64| top + PANEL_H * (hi - v) / (hi - lo);
        let panel: Vec<&&GroupSummary> = groups.iter().filter(|g| g.problem == *problem).collect();
        let slot = PANEL_W / panel.len() as f64;
        let _ = writeln!(s, r#"<g class="panel" id="panel-{}">"#, problem.as_str());
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="13">{}: approximation ratio</text>"#,
            MARGIN,
            top - 10.0,
            problem.as_str()
        );
        let _ = writeln!(
            s,
            r##"<rect x="{MARGIN:.1}" y="{top:.1}" width="{PANEL_W:.1}" height="{PANEL_H:.1}" fill="none" stroke="#999"/>"##
        );
        for tick in 0..=4 {
            let v = lo + (hi - lo) * tick as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#, MARGIN - 4.0, y(v) + 4.0);
        }
        for (gi, g) in panel.iter().enumerate() {
            let st = g.ratio.as_ref().unwrap();
            let colour = PALETTE[solvers.iter().position(|&x| x == g.solver).unwrap() % PALETTE.len()];
            let cx = MARGIN + slot * (gi as f64 + 0.5);
            let half = (slot * 0.3).min(20.0);
            let _ = writeln!(
                s,
                r#"<line x1="{cx:.1}" y1="{:.1}" x2="{cx:.1}" y2="{:.1}" stroke="{colour}"/>"#,
                y(st.max),
                y(st.min)
            );
            let _ = writeln!(
                s,
                r#"<rect class="box" x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{colour}" fill-opacity="0.4" stroke="{colour}"><title>{} d={} {}</title></rect>"#,
                cx - half,
                y(st.q3),
                2.0 * half,
                (y(st.q1) - y(st.q3)).max(0.5),
                problem.as_str(),
                g.density,
                esc(&g.solver)
            );
            let _ = writeln!(
                s,
                r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="2"/>"#,
                cx - half,
                y(st.median),
                cx + half,
                y(st.median)
            );
            let _ = writeln!(
                s,
                r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                top + PANEL_H + 14.0,
                g.density
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">density</text>"#,
            MARGIN + PANEL_W,
            top + PANEL_H + 28.0
        );
        s.push_str("</g>\n");
    }
    for (i, name) in solvers.iter().enumerate() {
        let x = MARGIN + 120.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            height - 20.0,
            PALETTE[i % PALETTE.len()],
            x + 14.0,
            height - 11.0,
            esc(name)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Write `results.csv`, `errors.csv`, `summary.json` and `boxplots.svg`.
/// Nothing time-dependent goes into these files unless timing was recorded.
pub fn emit_report(outcome: &BenchOutcome, dir: &Path) -> Result<Summary> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), results_csv(&outcome.records)?)?;
    let mut w = csv::Writer::from_path(dir.join("errors.csv"))?;
    w.write_record(["instance_id", "solver", "message"])?;
    for e in &outcome.errors {
        w.write_record([&e.instance_id, &e.solver, &e.message])?;
    }
    w.flush()?;
    let summary = summarize_outcome(outcome)?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    std::fs::write(dir.join("boxplots.svg"), boxplot_svg(&summary))?;
    Ok(summary)
}

pub fn write_scan(rows: &[ScanRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::bench::ErrorRecord;

    fn rec(problem: ProblemKind, density: f64, solver: &str, ratio: f64) -> RunRecord {
        RunRecord {
            instance_id: format!("i-{density}"),
            problem,
            density,
            n_logical: 4,
            n_physical: 8,
            solver: solver.into(),
            seed: 1,
            best_energy: -1.0,
            metric: ratio * 10.0,
            reference: Some(10.0),
            ratio: Some(ratio),
            elapsed_ms: None,
            chain_break_fraction: None,
            repairs: None,
        }
    }

    #[test]
    fn files_and_box_count() {
        let mut records = Vec::new();
        for (d, r) in [(0.5, 0.9), (0.5, 0.95), (0.2, 1.0)] {
            records.push(rec(ProblemKind::MaxCut, d, "tabu", r));
            records.push(rec(ProblemKind::MaxCut, d, "sa", r - 0.1));
            records.push(rec(ProblemKind::WeightedMis, d, "tabu", r));
        }
        let outcome = BenchOutcome {
            config_hash: "abc".into(),
            records,
            errors: vec![ErrorRecord { instance_id: "x".into(), solver: "sa".into(), message: "boom, badly".into() }],
        };
        let dir = tempfile::tempdir().unwrap();
        let summary = emit_report(&outcome, dir.path()).unwrap();
        assert_eq!(summary.groups.len(), 6);
        assert_eq!(summary.groups[0].ratio.as_ref().unwrap().median, 0.925);
        let svg = std::fs::read_to_string(dir.path().join("boxplots.svg")).unwrap();
        assert_eq!(svg.matches(r#"class="box""#).count(), 6);
        assert_eq!(svg.matches(r#"class="panel""#).count(), 2);
        let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert!(csv.starts_with("instance_id,problem,density,n_logical,n_physical,solver,seed,best_energy,metric,reference,ratio,elapsed_ms,chain_break_fraction,repairs\n"));
        assert_eq!(csv.lines().count(), 10);
        let errors = std::fs::read_to_string(dir.path().join("errors.csv")).unwrap();
        assert!(errors.contains("\"boom, badly\""));
    }

    #[test]
    fn empty_results_keep_header() {
        assert!(results_csv(&[]).unwrap().starts_with("instance_id,problem"));
    }
}
