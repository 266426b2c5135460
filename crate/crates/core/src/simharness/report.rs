use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{RegimeSummary, SimResult};
use crate::error::{Error, Result};

/// One CSV row: a method's summary within one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub dist: String,
    pub n: usize,
    #[serde(rename = "P")]
    pub content: f64,
    pub alpha: f64,
    pub method: String,
    pub objective: String,
    pub coverage: f64,
    pub stderr: f64,
    pub mean_length: f64,
    pub mean_eta: Option<f64>,
    pub failures: usize,
    pub reps: usize,
    pub seed: u64,
}

impl SimRow {
    pub fn from_results(results: &[SimResult]) -> Vec<SimRow> {
        results
            .iter()
            .flat_map(|r| {
                r.methods.iter().map(move |m| SimRow {
                    dist: r.dist.clone(),
                    n: r.n,
                    content: r.content,
                    alpha: r.alpha,
                    method: m.method.to_string(),
                    objective: r.objective.clone(),
                    coverage: m.coverage,
                    stderr: m.stderr,
                    mean_length: m.mean_length,
                    mean_eta: m.mean_eta,
                    failures: m.failures,
                    reps: r.reps,
                    seed: r.seed,
                })
            })
            .collect()
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::ParameterDomain(format!("csv: {e}"))
}

pub fn write_csv<W: Write>(out: W, results: &[SimResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in SimRow::from_results(results) {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::ParameterDomain(format!("csv: {e}")))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<SimRow>> {
    csv::Reader::from_reader(input).deserialize().map(|r| r.map_err(csv_error)).collect()
}

fn num(x: f64, digits: usize) -> String {
    if x.is_nan() {
        "-".to_string()
    } else {
        format!("{x:.digits$}")
    }
}

/// Fixed-width table with one line per (experiment, method).
pub fn format_table(results: &[SimResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<22} {:>5} {:>6} {:>6} {:<10} {:<9} {:>8} {:>7} {:>11} {:>8} {:>8}",
        "dist", "n", "P", "alpha", "method", "objective", "coverage", "stderr", "mean_length", "mean_eta", "failures"
    );
    for row in SimRow::from_results(results) {
        let _ = writeln!(
            out,
            "{:<22} {:>5} {:>6} {:>6} {:<10} {:<9} {:>8} {:>7} {:>11} {:>8} {:>8}",
            row.dist,
            row.n,
            row.content,
            row.alpha,
            row.method,
            row.objective,
            num(row.coverage, 3),
            num(row.stderr, 3),
            num(row.mean_length, 3),
            row.mean_eta.map_or("-".to_string(), |e| num(e, 3)),
            row.failures
        );
    }
    out
}

pub fn format_regime_table(rows: &[RegimeSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<13} {:>15} {:>15} {:>15} {:>15} {:>5} {:>8}",
        "regime", "calibrated cov", "actual cov", "eta_hat", "length", "runs", "failures"
    );
    let cell = |m: &super::MeanSd| format!("{} ({})", num(m.mean, 3), num(m.sd, 3));
    for r in rows {
        let _ = writeln!(
            out,
            "{:<13} {:>15} {:>15} {:>15} {:>15} {:>5} {:>8}",
            r.regime,
            cell(&r.calibrated_coverage),
            cell(&r.actual_coverage),
            cell(&r.eta_hat),
            cell(&r.length),
            r.runs,
            r.failures
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intervals::Method;
    use crate::simharness::MethodSummary;

    fn fixture() -> Vec<SimResult> {
        vec![SimResult {
            dist: "normal(0,1)".into(),
            n: 22,
            content: 0.9,
            alpha: 0.1 + 1e-17,
            objective: "upper".into(),
            reps: 300,
            seed: u64::MAX,
            methods: vec![
                MethodSummary { method: Method::Wilks, coverage: 0.886_666_666_666_666_7, stderr: 0.018_3, mean_length: 1.921_234_567_890_123, mean_eta: None, failures: 0 },
                MethodSummary { method: Method::CalGibbs, coverage: f64::NAN, stderr: f64::NAN, mean_length: f64::NAN, mean_eta: Some(2.747_000_000_000_1), failures: 300 },
            ],
        }]
    }

    fn same(a: f64, b: f64) -> bool {
        a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = SimRow::from_results(&fixture());
        let mut buf = Vec::new();
        write_csv(&mut buf, &fixture()).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("dist,n,P,alpha,method,objective,coverage,stderr,mean_length,mean_eta,failures,reps,seed"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!((&a.dist, a.n, &a.method, &a.objective, a.failures, a.reps, a.seed), (&b.dist, b.n, &b.method, &b.objective, b.failures, b.reps, b.seed));
            for (x, y) in [(a.content, b.content), (a.alpha, b.alpha), (a.coverage, b.coverage), (a.stderr, b.stderr), (a.mean_length, b.mean_length)] {
                assert!(same(x, y), "{x} vs {y}");
            }
            assert_eq!(a.mean_eta.map(f64::to_bits), b.mean_eta.map(f64::to_bits));
        }
    }

    #[test]
    fn table_lists_every_method() {
        let t = format_table(&fixture());
        assert_eq!(t.lines().count(), 3);
        assert!(t.contains("wilks") && t.contains("cal-gibbs"));
    }
}
