//! Batch sweeps over parameter grids.
//!
//! ```text
//! n=9..24
//! l=3,4,5
//! k=1,2,3
//! placements=5
//! seed=1
//! adversaries=none; random p=0.5 seed=1; blocker
//! ```

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::AdversarySpec;
use crate::engine::{run, Outcome, RunReport};
use crate::error::DkdError;

use super::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub ns: Vec<usize>,
    pub ls: Vec<usize>,
    pub ks: Vec<usize>,
    pub placements: usize,
    pub adversaries: Vec<AdversarySpec>,
    pub seed: u64,
}

/// One grid cell: a scenario and its coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub placement: usize,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub placement: usize,
    pub seed: u64,
    pub adversary: String,
    pub outcome: String,
    pub rounds: u64,
    pub cap: u64,
    pub rounds_to_chirality: Option<u64>,
    pub rounds_to_dispersion: Option<u64>,
    pub rounds_to_kdd: Option<u64>,
    pub blocked_moves: u64,
    pub violations: usize,
    pub chirality_agreed: Option<bool>,
    pub final_k_dispersed: bool,
    pub passed: bool,
}

impl SweepRow {
    fn new(cell: &SweepCell, report: &RunReport) -> Self {
        let sc = &cell.scenario;
        let outcome = match report.outcome {
            Outcome::Terminated { .. } => "terminated",
            Outcome::RoundCapExceeded { .. } => "round_cap_exceeded",
            Outcome::InvariantViolation { .. } => "invariant_violation",
        };
        Self {
            n: sc.n,
            l: sc.l(),
            k: sc.k,
            placement: cell.placement,
            seed: sc.seed,
            adversary: sc.adversary.to_string(),
            outcome: outcome.into(),
            rounds: report.rounds,
            cap: sc.round_cap(),
            rounds_to_chirality: report.stats.rounds_to_chirality,
            rounds_to_dispersion: report.stats.rounds_to_dispersion,
            rounds_to_kdd: report.stats.rounds_to_kdd,
            blocked_moves: report.stats.blocked_moves,
            violations: report.violations.len(),
            chirality_agreed: report.stats.chirality_agreed,
            final_k_dispersed: report.final_k_dispersed,
            passed: report.passed(),
        }
    }

    /// `rounds_to_chirality / (l n)`.
    pub fn c1(&self) -> Option<f64> {
        self.rounds_to_chirality.map(|r| r as f64 / (self.l * self.n) as f64)
    }

    /// `rounds_to_dispersion / l`.
    pub fn c2(&self) -> Option<f64> {
        self.rounds_to_dispersion.map(|r| r as f64 / self.l as f64)
    }

    /// `rounds_to_kdd / (l k)`.
    pub fn c3(&self) -> Option<f64> {
        self.rounds_to_kdd.map(|r| r as f64 / (self.l * self.k) as f64)
    }
}

/// Least-squares line through `(l n, rounds_to_chirality)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiralityFit {
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub runs: usize,
    pub passed: usize,
    pub violations: usize,
    pub cap_exceeded: usize,
    pub fit_all: Option<ChiralityFit>,
    pub fit_blocker: Option<ChiralityFit>,
    pub max_c2: Option<f64>,
    pub max_c3: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: SweepSummary,
}

impl SweepReport {
    pub fn from_rows(rows: Vec<SweepRow>) -> Self {
        let summary = summarize(&rows);
        Self { rows, summary }
    }

    pub fn passed(&self) -> bool {
        self.summary.passed == self.summary.runs
    }

    pub fn to_tsv(&self) -> String {
        let opt = |v: Option<u64>| v.map_or_else(|| "-".to_string(), |x| x.to_string());
        let optf = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        let mut s = String::from(
            "n\tl\tk\tplacement\tseed\tadversary\toutcome\trounds\tcap\trounds_to_chirality\trounds_to_dispersion\t\
             rounds_to_kdd\tblocked_moves\tviolations\tchirality_agreed\tc1\tc2\tc3\n",
        );
        for r in &self.rows {
            let agreed = r.chirality_agreed.map_or("-", |a| if a { "yes" } else { "no" });
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.n,
                r.l,
                r.k,
                r.placement,
                r.seed,
                r.adversary,
                r.outcome,
                r.rounds,
                r.cap,
                opt(r.rounds_to_chirality),
                opt(r.rounds_to_dispersion),
                opt(r.rounds_to_kdd),
                r.blocked_moves,
                r.violations,
                agreed,
                optf(r.c1()),
                optf(r.c2()),
                optf(r.c3()),
            );
        }
        s
    }
}

pub fn fit_chirality<'a>(rows: impl IntoIterator<Item = &'a SweepRow>) -> Option<ChiralityFit> {
    let pts: Vec<(f64, f64)> = rows
        .into_iter()
        .filter_map(|r| r.rounds_to_chirality.map(|t| ((r.l * r.n) as f64, t as f64)))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let max_ratio = pts.iter().map(|p| p.1 / p.0).fold(0.0, f64::max);
    Some(ChiralityFit { points: pts.len(), slope, intercept: my - slope * mx, max_ratio })
}

fn summarize(rows: &[SweepRow]) -> SweepSummary {
    let max = |f: fn(&SweepRow) -> Option<f64>| rows.iter().filter_map(f).reduce(f64::max);
    SweepSummary {
        runs: rows.len(),
        passed: rows.iter().filter(|r| r.passed).count(),
        violations: rows.iter().map(|r| r.violations).sum(),
        cap_exceeded: rows.iter().filter(|r| r.outcome == "round_cap_exceeded").count(),
        fit_all: fit_chirality(rows),
        fit_blocker: fit_chirality(rows.iter().filter(|r| r.adversary == "blocker")),
        max_c2: max(SweepRow::c2),
        max_c3: max(SweepRow::c3),
    }
}

/// Deterministic per-cell seed.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl SweepSpec {
    /// Every admissible cell, in grid order. Placements are shared across
    /// adversaries so strategies face identical starts.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &n in &self.ns {
            for &l in &self.ls {
                for &k in &self.ks {
                    if n < 3 || k == 0 || l < 3 || l > n / k {
                        continue;
                    }
                    for p in 0..self.placements {
                        let seed = mix(self.seed ^ mix((n as u64) << 40 | (l as u64) << 32 | (k as u64) << 24 | p as u64));
                        for adv in &self.adversaries {
                            out.push(SweepCell { placement: p, scenario: Scenario::random(n, l, k, adv.clone(), seed) });
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn parse_sweep(text: &str) -> Result<SweepSpec, DkdError> {
    let err = |line: usize, msg: String| DkdError::Parse { line, msg };
    let mut spec =
        SweepSpec { ns: Vec::new(), ls: Vec::new(), ks: Vec::new(), placements: 1, adversaries: Vec::new(), seed: 0 };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err(line_no, format!("expected key=value: {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let list = |v: &str| parse_list(v).map_err(|m| err(line_no, m));
        let num = |v: &str| v.parse::<u64>().map_err(|_| err(line_no, format!("bad number {v:?}")));
        match key {
            "n" => spec.ns = list(value)?,
            "l" => spec.ls = list(value)?,
            "k" => spec.ks = list(value)?,
            "placements" => spec.placements = num(value)? as usize,
            "seed" => spec.seed = num(value)?,
            "adversaries" => {
                spec.adversaries = value
                    .split(';')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| AdversarySpec::parse(s).map_err(|m| err(line_no, m)))
                    .collect::<Result<_, _>>()?;
            }
            other => return Err(err(line_no, format!("unknown key {other:?}"))),
        }
    }
    if spec.adversaries.is_empty() {
        spec.adversaries.push(AdversarySpec::None);
    }
    Ok(spec)
}

/// `a..b` (inclusive) or `a,b,c`, or a mix such as `3,5..7`.
fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| format!("bad number {s:?}"));
        match part.split_once("..") {
            Some((a, b)) => out.extend(num(a)?..=num(b)?),
            None => out.push(num(part)?),
        }
    }
    Ok(out)
}

/// Runs every cell on `jobs` threads (0 = rayon default).
pub fn run_batch(spec: &SweepSpec, jobs: usize) -> Result<SweepReport, DkdError> {
    let cells = spec.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| DkdError::InvalidScenario(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run(&cell.scenario, None).map(|r| SweepRow::new(cell, &r)))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(SweepReport::from_rows(rows))
}
