//! Trial grids over controllers, SNRs and seeds, and the loop-time benchmark.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::control::{ControllerKind, EstimatorSet, NoiseSpec, Snr, Trajectory};
use crate::error::{Result, SimError};
use crate::robot::{Derivatives, Robot};
use crate::sim::{simulate, ControllerSetup, SimOptions, SimResult, SimSummary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub kind: ControllerKind,
    pub snr: Snr,
    pub seed: u64,
}

impl Cell {
    /// File stem for this cell's outputs.
    pub fn key(&self) -> String {
        format!("{}_snr-{}_seed-{}", self.kind, self.snr, self.seed)
    }
}

/// Controllers outermost, then SNRs, then seeds. Noise-free cells appear
/// once regardless of the seed list.
pub fn grid(cfg: &RunConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &kind in &cfg.controllers {
        for &snr in &cfg.snr_db {
            let seeds: &[u64] = if snr.is_infinite() { &cfg.seeds[..1] } else { &cfg.seeds };
            cells.extend(seeds.iter().map(|&seed| Cell { kind, snr, seed }));
        }
    }
    cells
}

/// Shared inputs of every cell.
pub struct Bench<'a> {
    pub cfg: &'a RunConfig,
    pub model: &'a Robot,
    pub plant: &'a Robot,
    pub estimators: Option<&'a EstimatorSet>,
    pub traj: &'a Trajectory,
}

impl<'a> Bench<'a> {
    /// Same inputs with a different full-model controller robot.
    pub fn with_model<'b>(&self, model: &'b Robot) -> Bench<'b>
    where
        'a: 'b,
    {
        Bench {
            cfg: self.cfg,
            model,
            plant: self.plant,
            estimators: self.estimators,
            traj: self.traj,
        }
    }

    fn setup(&self, kind: ControllerKind) -> ControllerSetup<'_> {
        ControllerSetup {
            kind,
            gains: self.cfg.gains.for_kind(kind),
            robot: self.model,
            estimators: self.estimators,
            rho_10db: self.cfg.rho_10db,
            path: self.cfg.defuzz,
        }
    }

    pub fn run(&self, cell: &Cell, timing: bool) -> Result<SimResult> {
        let ctl = self.setup(cell.kind).build(cell.snr, &self.traj.coords[0])?;
        let opts = SimOptions {
            noise: NoiseSpec {
                snr_db: cell.snr,
                seed: cell.seed,
            },
            noise_target: self.cfg.noise_target,
            timing,
            sse: self.cfg.sse,
            ..Default::default()
        };
        simulate(ctl, self.traj, self.plant, &opts)
    }

    /// Runs all cells on the worker pool; results keep the order of `cells`.
    pub fn run_all(&self, cells: &[Cell], timing: bool) -> Vec<Result<SimResult>> {
        cells.par_iter().map(|c| self.run(c, timing)).collect()
    }
}

/// Median SSE per controller at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SseRow {
    pub snr_db: Snr,
    pub median_sse: BTreeMap<ControllerKind, f64>,
    /// Median over seeds of the per-seed `SSE(t1) / SSE(t2)`.
    pub ratio_t1_t2: Option<f64>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

/// Comparison table: one row per SNR in first-seen order. Unstable runs are
/// left out of the medians.
pub fn sse_table(summaries: &[SimSummary]) -> Vec<SseRow> {
    let mut snrs: Vec<Snr> = Vec::new();
    for s in summaries {
        if !snrs.contains(&s.snr_db) {
            snrs.push(s.snr_db);
        }
    }
    snrs.into_iter()
        .map(|snr| {
            let at: Vec<&SimSummary> = summaries.iter().filter(|s| s.snr_db == snr && !s.unstable).collect();
            let mut median_sse = BTreeMap::new();
            for kind in ControllerKind::ALL {
                if let Some(m) = median(at.iter().filter(|s| s.controller == kind).map(|s| s.sse).collect()) {
                    median_sse.insert(kind, m);
                }
            }
            let ratios = at
                .iter()
                .filter(|s| s.controller == ControllerKind::T1)
                .filter_map(|a| at.iter().find(|b| b.controller == ControllerKind::T2 && b.seed == a.seed).map(|b| a.sse / b.sse))
                .collect();
            SseRow {
                snr_db: snr,
                median_sse,
                ratio_t1_t2: median(ratios),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRow {
    pub controller: String,
    pub mean_loop_us: f64,
    pub p99_loop_us: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub rows: Vec<TimingRow>,
    /// Mean loop time increases along pd, t1, t2, ctc.
    pub ordering_holds: bool,
    /// Mean ctc loop over mean t2 loop.
    pub ctc_over_t2: f64,
    /// Same ratio against a full-model controller with closed-form derivatives.
    pub ctc_analytic_over_t2: f64,
}

/// Times every controller along the trajectory without noise, one run at a
/// time. The full-model controller is timed with both derivative schemes.
pub fn benchmark(bench: &Bench<'_>) -> Result<BenchmarkReport> {
    let mut rows = Vec::new();
    let mut time = |label: &str, res: SimResult| -> Result<f64> {
        if let Some(k) = res.unstable_at {
            return Err(SimError::Config(format!("{label} run unstable at step {k}")));
        }
        let s = res.summary();
        let (mean, p99) = (s.mean_loop_us.unwrap_or(f64::NAN), s.p99_loop_us.unwrap_or(f64::NAN));
        rows.push(TimingRow {
            controller: label.to_string(),
            mean_loop_us: mean,
            p99_loop_us: p99,
            samples: s.steps,
        });
        Ok(mean)
    };
    let cell = |kind| Cell {
        kind,
        snr: Snr::INFINITE,
        seed: 0,
    };
    let pd = time("pd", bench.run(&cell(ControllerKind::Pd), true)?)?;
    let t1 = time("t1", bench.run(&cell(ControllerKind::T1), true)?)?;
    let t2 = time("t2", bench.run(&cell(ControllerKind::T2), true)?)?;
    let fd_model = bench.model.with_derivatives(Derivatives::FiniteDifference);
    let an_model = bench.model.with_derivatives(Derivatives::Analytic);
    let ctc = time("ctc", bench.with_model(&fd_model).run(&cell(ControllerKind::Ctc), true)?)?;
    let ctc_an = time("ctc-analytic", bench.with_model(&an_model).run(&cell(ControllerKind::Ctc), true)?)?;
    Ok(BenchmarkReport {
        rows,
        ordering_holds: pd < t1 && t1 < t2 && t2 < ctc,
        ctc_over_t2: ctc / t2,
        ctc_analytic_over_t2: ctc_an / t2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(kind: ControllerKind, snr: Snr, seed: u64, sse: f64) -> SimSummary {
        SimSummary {
            schema_version: 1,
            controller: kind,
            snr_db: snr,
            seed,
            sse,
            steps: 1,
            unstable: false,
            unstable_at: None,
            failure: None,
            held_estimates: 0,
            mean_loop_us: None,
            p99_loop_us: None,
        }
    }

    #[test]
    fn grid_order_and_noise_free_dedup() {
        let cfg = RunConfig {
            controllers: vec![ControllerKind::Pd, ControllerKind::Ctc],
            snr_db: vec![Snr::INFINITE, Snr::db(20.0).unwrap()],
            seeds: vec![1, 2, 3],
            ..Default::default()
        };
        let g = grid(&cfg);
        assert_eq!(g.len(), 2 * (1 + 3));
        assert_eq!(g[0].key(), "pd_snr-inf_seed-1");
        assert_eq!(g[1].key(), "pd_snr-20_seed-1");
        assert_eq!(g[4].kind, ControllerKind::Ctc);
    }

    #[test]
    fn table_medians_and_ratio() {
        let s10 = Snr::db(10.0).unwrap();
        let mut v = Vec::new();
        for (seed, a, b) in [(0, 2.0, 1.0), (1, 3.0, 1.0), (2, 1.0, 1.0)] {
            v.push(summary(ControllerKind::T1, s10, seed, a));
            v.push(summary(ControllerKind::T2, s10, seed, b));
        }
        v.push(summary(ControllerKind::Pd, Snr::INFINITE, 0, 5.0));
        let t = sse_table(&v);
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].median_sse[&ControllerKind::T1], 2.0);
        assert_eq!(t[0].ratio_t1_t2, Some(2.0));
        assert_eq!(t[1].ratio_t1_t2, None);
        assert_eq!(t[1].median_sse[&ControllerKind::Pd], 5.0);
    }
}
