//! Tables and reports written by the command-line front end.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::serde_ext;
use crate::solvers::{Guarantee, IncrementalSolution};
use crate::verify::{CertificateReport, RefinementStudy, StabilityRecord};

use super::config::RunConfig;

/// Shortest decimal that parses back to the same f64.
pub fn fmt_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub model: String,
    pub guarantee: Guarantee,
    pub steps: usize,
    #[serde(with = "serde_ext::real")]
    pub lipschitz: f64,
    pub coercivity: f64,
    pub offset: f64,
    pub dissipation_total: f64,
    pub final_energy: f64,
    /// Steps whose lattice search kept improving at its finest level.
    pub non_attainment_steps: Vec<usize>,
}

/// A finished run as stored on disk; enough to re-verify without solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedRun {
    pub config: RunConfig,
    pub summary: RunSummary,
    pub solution: IncrementalSolution,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> String {
    format!("cannot write {}: {e}", path.display())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), String> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Columns: t, z0..z{d−1}, energy, step_dissipation, cumulative_dissipation.
pub fn write_trajectory(path: &Path, sol: &IncrementalSolution) -> Result<(), String> {
    let dim = sol.states[0].len();
    let mut header = vec!["t".to_string()];
    header.extend((0..dim).map(|i| format!("z{i}")));
    header.extend(["energy", "step_dissipation", "cumulative_dissipation"].map(String::from));
    let mut cumulative = 0.0;
    let rows: Vec<Vec<String>> = (0..sol.grid.len())
        .map(|k| {
            cumulative += sol.dissipations[k];
            let mut row = vec![fmt_real(sol.grid.time(k))];
            row.extend(sol.states[k].values().iter().map(|&v| fmt_real(v)));
            row.push(fmt_real(sol.energies[k]));
            row.push(fmt_real(sol.dissipations[k]));
            row.push(fmt_real(cumulative));
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Columns: t, phi0..phi{n}.
pub fn write_equilibria(path: &Path, sol: &IncrementalSolution, fields: &[Vec<f64>]) -> Result<(), String> {
    let width = fields.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((0..width).map(|i| format!("phi{i}")));
    let rows: Vec<Vec<String>> = fields
        .iter()
        .enumerate()
        .map(|(k, phi)| {
            let mut row = vec![fmt_real(sol.grid.time(k))];
            row.extend(phi.iter().map(|&v| fmt_real(v)));
            row
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Columns: node, t, stability, worst_violation, chain_lower, chain_upper.
pub fn write_certificate_table(path: &Path, report: &CertificateReport) -> Result<(), String> {
    let header = ["node", "t", "stability", "worst_violation", "chain_lower", "chain_upper"]
        .map(String::from);
    let rows: Vec<Vec<String>> = report
        .stability
        .iter()
        .map(|s| {
            let (status, worst) = match &s.record {
                StabilityRecord::Certified => ("certified", String::new()),
                StabilityRecord::Sampled {
                    worst_violation, ..
                } => ("sampled", fmt_real(*worst_violation)),
                StabilityRecord::Failed { witness } => ("failed", fmt_real(witness.violation)),
            };
            let chain = s
                .node
                .checked_sub(1)
                .map(|i| &report.energy_chain[i])
                .map_or([String::new(), String::new()], |c| [fmt_real(c.lower), fmt_real(c.upper)]);
            let [lower, upper] = chain;
            vec![s.node.to_string(), fmt_real(s.t), status.into(), worst, lower, upper]
        })
        .collect();
    write_csv(path, &header, &rows)
}

/// Columns: level, steps, fineness, dissipation, variation, bound,
/// variation_slack, bound_slack, energy_gap, node_gap_to_next, sup_gap_to_next.
pub fn write_refinement_table(path: &Path, study: &RefinementStudy) -> Result<(), String> {
    let header = [
        "level",
        "steps",
        "fineness",
        "dissipation",
        "variation",
        "bound",
        "variation_slack",
        "bound_slack",
        "energy_gap",
        "node_gap_to_next",
        "sup_gap_to_next",
    ]
    .map(String::from);
    let rows: Vec<Vec<String>> = study
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            vec![
                l.level.to_string(),
                l.steps.to_string(),
                fmt_real(l.fineness),
                fmt_real(l.dissipation),
                fmt_real(l.variation),
                fmt_real(l.bound),
                fmt_real(l.variation_slack),
                fmt_real(l.bound_slack),
                fmt_real(l.energy_gap),
                study.node_gaps.get(i).map_or(String::new(), |&g| fmt_real(g)),
                study.sup_gaps.get(i).map_or(String::new(), |&g| fmt_real(g)),
            ]
        })
        .collect();
    write_csv(path, &header, &rows)
}

pub fn certificate_text(report: &CertificateReport) -> String {
    let mut out = String::new();
    let certified = report
        .stability
        .iter()
        .filter(|s| s.record == StabilityRecord::Certified)
        .count();
    let failed = report.stability.iter().filter(|s| !s.record.passed()).count();
    let sampled_worst = report
        .stability
        .iter()
        .filter_map(|s| match s.record {
            StabilityRecord::Sampled {
                worst_violation, ..
            } => Some(worst_violation),
            _ => None,
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let chain_worst = report
        .energy_chain
        .iter()
        .map(|c| c.lower.max(c.upper))
        .fold(f64::NEG_INFINITY, f64::max);
    out += &format!(
        "model {}  nodes {}  tolerance {:e}  guarantee {:?}\n",
        report.model,
        report.grid.len(),
        report.tolerance,
        report.guarantee
    );
    out += &format!(
        "stability          certified {certified}, sampled {}, failed {failed}, worst sampled {}\n",
        report.stability.len() - certified - failed,
        fmt_real(sampled_worst)
    );
    out += &format!("energy chain       worst {}\n", fmt_real(chain_worst));
    out += &format!(
        "energy inequality  worst {} on [{}, {}], gap {}\n",
        fmt_real(report.energy_inequality.residual),
        report.energy_inequality.from,
        report.energy_inequality.to,
        fmt_real(report.energy_gap)
    );
    out += &format!(
        "two-sided          lower {}, upper {}\n",
        fmt_real(report.two_sided_lower.residual),
        fmt_real(report.two_sided_upper.residual)
    );
    out += &format!(
        "energy bound       slack {}\nnorm bound         slack {}\n",
        fmt_real(report.energy_bound.slack),
        fmt_real(report.norm_bound.slack)
    );
    out += &format!("dissipation        {}\n", fmt_real(report.dissipation_total));
    match report.first_failure() {
        None => out += "PASS\n",
        Some(f) => {
            out += &format!(
                "FAIL  {} at {}: {}\n",
                f.check,
                f.node.map_or("-".to_string(), |n| format!("node {n}")),
                f.detail
            );
        }
    }
    out
}
