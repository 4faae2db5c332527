use std::time::Instant;

use clap::Args;
use serde::Serialize;
use tanglescan_core::engine::{self, EngineOptions};
use tanglescan_core::families::{random_twist_chain, torus_2};
use tanglescan_core::oracle;
use tanglescan_core::planar::Diagram;
use tanglescan_core::skein::{Mode, Mutation};

use crate::Failure;

#[derive(Args)]
pub struct BenchArgs {
    /// Twist counts for the (2, k) torus links.
    #[arg(long, value_delimiter = ',', default_value = "10,16,22,25,50,100,200")]
    torus: Vec<i64>,
    /// Region counts for random twist chains.
    #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
    chains: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest crossing count given to the brute-force oracle.
    #[arg(long, default_value_t = 22)]
    oracle_max: usize,
    /// Timing repetitions; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
pub struct Row {
    pub family: String,
    pub n: usize,
    pub girth: usize,
    pub peak_state_size: usize,
    pub engine_ms: f64,
    pub oracle_ms: Option<f64>,
}

#[derive(Serialize)]
struct Report {
    rows: Vec<Row>,
    /// Least-squares slope of log time against log n over the torus rows.
    torus_exponent: Option<f64>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

fn measure(family: String, d: &Diagram, a: &BenchArgs, mutation: Option<Mutation>) -> Result<Row, Failure> {
    let opts = EngineOptions::new(Mode::Bracket).with_mutation(mutation);
    let mut best = f64::INFINITY;
    let mut last = None;
    for _ in 0..a.repeat.max(1) {
        let t = Instant::now();
        let r = engine::compute(d, &opts)?;
        best = best.min(ms(t));
        last = Some(r);
    }
    let r = last.unwrap();
    let oracle_ms = if d.n() <= a.oracle_max {
        let t = Instant::now();
        let p = oracle::brute_force(d, Mode::Bracket)?;
        let took = ms(t);
        if p != r.polynomial && mutation.is_none() {
            return Err(Failure::Internal(format!("{family}: engine and oracle disagree")));
        }
        Some(took)
    } else {
        None
    };
    Ok(Row {
        family,
        n: d.n(),
        girth: r.girth,
        peak_state_size: r.peak_state_size,
        engine_ms: best,
        oracle_ms,
    })
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn run(a: &BenchArgs, mutation: Option<Mutation>) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for &k in &a.torus {
        rows.push(measure(format!("torus(2,{k})"), &torus_2(k), a, mutation)?);
    }
    let torus_points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.engine_ms)).collect();
    for &k in &a.chains {
        rows.push(measure(format!("twist_chain({k})"), &random_twist_chain(k, a.seed), a, mutation)?);
    }
    let report = Report {
        torus_exponent: loglog_slope(&torus_points),
        rows,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        return Ok(());
    }
    println!(
        "{:<18} {:>5} {:>6} {:>6} {:>12} {:>12}",
        "family", "n", "girth", "peak", "engine_ms", "oracle_ms"
    );
    for r in &report.rows {
        let o = r.oracle_ms.map_or("-".to_string(), |t| format!("{t:.3}"));
        println!(
            "{:<18} {:>5} {:>6} {:>6} {:>12.3} {:>12}",
            r.family, r.n, r.girth, r.peak_state_size, r.engine_ms, o
        );
    }
    if let Some(e) = report.torus_exponent {
        println!("torus time ~ n^{e:.2}");
    }
    Ok(())
}
