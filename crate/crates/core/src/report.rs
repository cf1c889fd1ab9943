//! Serialized outputs of the command-line front end.
//!
//! JSON reports carry numbers only; an infinite value is written as `null`.
//! CSV output starts with a versioned header comment naming the command and
//! its columns, followed by the column row.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamic::WorstCaseSpectral;
use crate::io::rows_of;
use crate::linalg::HermMatrix;
use crate::static_robust::{SaddleReport, SweepRow, WorstCaseStatic};

pub const CSV_VERSION: &str = "v1";
/// Spectral reports keep at most this many frequencies unless asked for the
/// full grid.
pub const MAX_EMITTED_FREQUENCIES: usize = 256;

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

fn complex_rows(m: &HermMatrix) -> Vec<Vec<[f64; 2]>> {
    rows_of(m, |z: &Complex64| [z.re, z.im])
}

pub fn csv_header(command: &str, columns: &[&str]) -> String {
    format!(
        "# taurob {CSV_VERSION}, command={command}, columns={}\n{}\n",
        columns.join(","),
        columns.join(",")
    )
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub tau: f64,
    pub divergence: Option<f64>,
}

impl DivergenceReport {
    pub fn new(tau: f64, value: f64) -> Self {
        DivergenceReport {
            tau,
            divergence: finite(value),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = csv_header("divergence", &["tau", "divergence"]);
        let d = self.divergence.unwrap_or(f64::INFINITY);
        writeln!(s, "{},{}", num(self.tau), num(d)).unwrap();
        s
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SaddleSummary {
    pub samples: usize,
    pub accepted: usize,
    pub estimators: usize,
    pub upper_violation: f64,
    pub lower_violation: f64,
}

impl From<SaddleReport> for SaddleSummary {
    fn from(r: SaddleReport) -> Self {
        SaddleSummary {
            samples: r.proposals,
            accepted: r.accepted,
            estimators: r.estimators,
            upper_violation: r.upper_violation,
            lower_violation: r.lower_violation,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StaticReport {
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    pub lambda: Option<f64>,
    pub implied_c: f64,
    pub delta_mse: f64,
    pub nominal_p: Vec<Vec<f64>>,
    pub worst_p: Vec<Vec<f64>>,
    /// Mean and covariance of the least-favorable joint law.
    pub worst_mean: Vec<f64>,
    pub worst_cov: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub saddle: Option<SaddleSummary>,
}

impl StaticReport {
    pub fn new(w: &WorstCaseStatic, saddle: Option<SaddleReport>) -> Self {
        StaticReport {
            n: w.worst_joint.n(),
            p: w.worst_joint.p(),
            tau: w.tau,
            lambda: finite(w.lambda),
            implied_c: w.implied_c,
            delta_mse: w.delta_mse,
            nominal_p: rows_of(&w.nominal_p, |x| *x),
            worst_p: rows_of(&w.worst_p, |x| *x),
            worst_mean: w.worst_joint.mean().iter().copied().collect(),
            worst_cov: rows_of(w.worst_joint.cov(), |x| *x),
            saddle: saddle.map(Into::into),
        }
    }

    /// One row per entry of `P`.
    pub fn to_csv(&self) -> String {
        let mut s = csv_header(
            "static",
            &[
                "tau",
                "lambda",
                "implied_c",
                "delta_mse",
                "row",
                "col",
                "nominal_p",
                "worst_p",
            ],
        );
        let lambda = self.lambda.unwrap_or(f64::INFINITY);
        for (i, (a, b)) in self.nominal_p.iter().zip(&self.worst_p).enumerate() {
            for (j, (x, y)) in a.iter().zip(b).enumerate() {
                writeln!(
                    s,
                    "{},{},{},{},{i},{j},{},{}",
                    num(self.tau),
                    num(lambda),
                    num(self.implied_c),
                    num(self.delta_mse),
                    num(*x),
                    num(*y)
                )
                .unwrap();
            }
        }
        s
    }
}

/// Indices of the emitted frequencies: all of them, or an even stride
/// keeping at most [`MAX_EMITTED_FREQUENCIES`].
pub fn emitted_indices(grid_size: usize, full_grid: bool) -> Vec<usize> {
    let stride = if full_grid {
        1
    } else {
        grid_size.div_ceil(MAX_EMITTED_FREQUENCIES).max(1)
    };
    (0..grid_size).step_by(stride).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    pub lambda: Option<f64>,
    pub implied_c: f64,
    pub delta_mse: f64,
    pub grid_size: usize,
    pub indices: Vec<usize>,
    pub theta: Vec<f64>,
    /// Complex entries as `[re, im]`, one matrix per emitted frequency.
    pub nominal_se: Vec<Vec<Vec<[f64; 2]>>>,
    pub worst_se: Vec<Vec<Vec<[f64; 2]>>>,
    pub worst_sigma_x: Vec<Vec<Vec<[f64; 2]>>>,
}

impl SpectralReport {
    pub fn new(w: &WorstCaseSpectral, full_grid: bool) -> Self {
        let model = &w.worst_model;
        let indices = emitted_indices(model.grid_size(), full_grid);
        let pick = |v: &[HermMatrix]| indices.iter().map(|&k| complex_rows(&v[k])).collect();
        let sigma_x: Vec<HermMatrix> = (0..model.grid_size()).map(|k| model.blocks_at(k).x).collect();
        SpectralReport {
            n: model.n(),
            p: model.p(),
            tau: w.tau,
            lambda: finite(w.lambda),
            implied_c: w.implied_c,
            delta_mse: w.delta_mse,
            grid_size: model.grid_size(),
            theta: indices.iter().map(|&k| model.theta(k)).collect(),
            nominal_se: pick(&w.nominal_se),
            worst_se: pick(&w.worst_se),
            worst_sigma_x: pick(&sigma_x),
            indices,
        }
    }

    /// One row per emitted frequency and entry of `Σ_e`.
    pub fn to_csv(&self) -> String {
        let mut s = csv_header(
            "dynamic",
            &[
                "tau",
                "lambda",
                "implied_c",
                "delta_mse",
                "index",
                "theta",
                "row",
                "col",
                "nominal_se_re",
                "nominal_se_im",
                "worst_se_re",
                "worst_se_im",
            ],
        );
        let lambda = self.lambda.unwrap_or(f64::INFINITY);
        for (f, &k) in self.indices.iter().enumerate() {
            for (i, (a, b)) in self.nominal_se[f].iter().zip(&self.worst_se[f]).enumerate() {
                for (j, (x, y)) in a.iter().zip(b).enumerate() {
                    writeln!(
                        s,
                        "{},{},{},{},{k},{},{i},{j},{},{},{},{}",
                        num(self.tau),
                        num(lambda),
                        num(self.implied_c),
                        num(self.delta_mse),
                        num(self.theta[f]),
                        num(x[0]),
                        num(x[1]),
                        num(y[0]),
                        num(y[1])
                    )
                    .unwrap();
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub tau: f64,
    pub c: f64,
    pub lambda: f64,
    pub delta_mse: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepEntry>,
}

impl SweepReport {
    pub fn new(rows: &[SweepRow]) -> Self {
        SweepReport {
            rows: rows
                .iter()
                .map(|r| SweepEntry {
                    tau: r.tau,
                    c: r.c,
                    lambda: r.lambda,
                    delta_mse: r.delta_mse,
                })
                .collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = csv_header("sweep", &["tau", "c", "lambda", "delta_mse"]);
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{}",
                num(r.tau),
                num(r.c),
                num(r.lambda),
                num(r.delta_mse)
            )
            .unwrap();
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BallReport {
    pub mean: f64,
    pub var: f64,
    pub tau: f64,
    pub c: f64,
    /// Closed boundary polyline as `[m̃, K̃]` pairs.
    pub points: Vec<[f64; 2]>,
}

impl BallReport {
    pub fn to_csv(&self) -> String {
        let mut s = csv_header("ball", &["mean", "var"]);
        for [m, k] in &self.points {
            writeln!(s, "{},{}", num(*m), num(*k)).unwrap();
        }
        s
    }
}
