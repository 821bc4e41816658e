//! SNR sweeps producing one CSV row per grid point.
//!
//! Columns, in order: `snr_db`, `rho`, `fp_iterations`, then per mode
//!
//! | mode        | columns |
//! |-------------|---------|
//! | `mi`        | `mi_det`, `mi_mc_mean`, `mi_mc_stderr` |
//! | `sumrate`   | `sumrate_det`, `sumrate_mc_mean`, `sumrate_mc_stderr` |
//! | `sinr`      | `sinr_det_u{k}_s{j}`, `sinr_mc_mean_u{k}_s{j}`, `sinr_mc_stderr_u{k}_s{j}` |
//! | `waterfill` | `mi_det_uniform`, `mi_det_optimal`, `mi_mc_optimal_mean`, `mi_mc_optimal_stderr`, `wf_sweeps`, `p_u{k}_s{j}` |
//! | `oracle`    | `oracle_e_gap_max`, `oracle_ebar_gap_max` |
//!
//! and `wall_time_s` last when timing is enabled. Monte Carlo columns are
//! omitted when `trials == 0`. Users and streams are numbered from 0; streams
//! follow the eigenbasis order of the transmit fold.

use std::f64::consts::LN_2;
use std::io::Write;
use std::time::Instant;

use dscatter_core::detequiv::{mi_det, DetEquivalents};
use dscatter_core::fixedpoint::SolverOptions;
use dscatter_core::linalg::CMatrix;
use dscatter_core::model::ChannelSpec;
use dscatter_core::montecarlo::{
    exact_mi, exact_sinr, kronecker_conditional_oracle_with, sumrate_from_sinr, Substream,
};
use dscatter_core::powalloc::{iterative_waterfilling, uniform_covariances, WaterfillOptions};

use crate::config::{ExperimentConfig, Mode};
use crate::error::{CliError, Result};
use crate::grid::rho_from_snr_db;
use crate::parallel::par_ergodic_many;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Cell::Float(x) => *x,
            Cell::Int(n) => *n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

struct Row {
    header: Vec<String>,
    cells: Vec<Cell>,
}

impl Row {
    fn new() -> Self {
        Row {
            header: Vec::new(),
            cells: Vec::new(),
        }
    }

    fn push(&mut self, name: impl Into<String>, cell: Cell) {
        self.header.push(name.into());
        self.cells.push(cell);
    }

    fn float(&mut self, name: impl Into<String>, x: f64) {
        self.push(name, Cell::Float(x));
    }
}

fn stream_labels(spec: &ChannelSpec) -> Vec<String> {
    spec.users()
        .iter()
        .enumerate()
        .flat_map(|(k, u)| (0..u.n()).map(move |j| format!("u{k}_s{j}")))
        .collect()
}

/// Run every SNR point of `cfg` against `spec` (whose own `ρ` is ignored).
pub fn run_experiment(spec: &ChannelSpec, cfg: &ExperimentConfig) -> Result<Table> {
    cfg.check()?;
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for snr_db in cfg.snr_db.points() {
        let row = run_point(spec, cfg, snr_db)
            .map_err(|e| CliError::solver(format!("SNR point {snr_db} dB"), e))?;
        match &header {
            None => header = Some(row.header),
            Some(h) => debug_assert_eq!(h, &row.header),
        }
        rows.push(row.cells);
    }
    Ok(Table {
        header: header.unwrap_or_default(),
        rows,
    })
}

fn run_point(
    spec: &ChannelSpec,
    cfg: &ExperimentConfig,
    snr_db: f64,
) -> dscatter_core::Result<Row> {
    let started = Instant::now();
    let rho = rho_from_snr_db(snr_db);
    let spec = spec.with_rho(rho)?;
    let solver = SolverOptions::default();
    let unit = if cfg.bits { LN_2 } else { 1.0 };
    let mc = cfg.trials > 0;

    let det = DetEquivalents::compute(&spec, &solver)?;
    let (_, folds) = spec.folded()?;
    let waterfill = if cfg.has(Mode::Waterfill) {
        let uniform = spec.with_covariances(&uniform_covariances(&spec)?)?;
        let uniform_sol = dscatter_core::fixedpoint::solve_fundamental(&uniform, &solver)?;
        let uniform_mi = mi_det(&uniform, &uniform_sol)?;
        let outcome = iterative_waterfilling(&spec, &WaterfillOptions::default())?;
        let optimal_mi = mi_det(&outcome.spec, &outcome.solution)?;
        Some((uniform_mi, optimal_mi, outcome))
    } else {
        None
    };
    let optimal_q: Option<Vec<CMatrix>> = waterfill
        .as_ref()
        .map(|(_, _, o)| o.allocation.covariances());

    let estimates = if mc {
        let want_sinr = cfg.has(Mode::Sinr) || cfg.has(Mode::Sumrate);
        let q: Vec<CMatrix> = spec.users().iter().map(|u| u.q().clone()).collect();
        par_ergodic_many(&spec, cfg.trials, cfg.seed, |real| {
            let mut out = Vec::new();
            if cfg.has(Mode::Mi) {
                out.push(exact_mi(real, &q, rho)?);
            }
            if want_sinr {
                let sinr = exact_sinr(&real.fold(&folds)?, rho)?;
                if cfg.has(Mode::Sumrate) {
                    out.push(sumrate_from_sinr(&sinr, real.n_rx()));
                }
                if cfg.has(Mode::Sinr) {
                    out.extend(sinr.into_iter().flatten());
                }
            }
            if let Some(q) = &optimal_q {
                out.push(exact_mi(real, q, rho)?);
            }
            Ok(out)
        })?
    } else {
        Vec::new()
    };
    let mut est = estimates.into_iter();

    let mut row = Row::new();
    row.float("snr_db", snr_db);
    row.float("rho", rho);
    row.push("fp_iterations", Cell::Int(det.solution.iterations as u64));
    if cfg.has(Mode::Mi) {
        row.float("mi_det", det.mi / unit);
        if mc {
            let e = est.next().expect("mi estimate");
            row.float("mi_mc_mean", e.mean / unit);
            row.float("mi_mc_stderr", e.stderr / unit);
        }
    }
    if cfg.has(Mode::Sumrate) {
        row.float("sumrate_det", det.sumrate / unit);
        if mc {
            let e = est.next().expect("sumrate estimate");
            row.float("sumrate_mc_mean", e.mean / unit);
            row.float("sumrate_mc_stderr", e.stderr / unit);
        }
    }
    if cfg.has(Mode::Sinr) {
        let labels = stream_labels(&spec);
        for (label, g) in labels.iter().zip(det.sinr.iter().flatten()) {
            row.float(format!("sinr_det_{label}"), *g);
        }
        if mc {
            let sinr_est: Vec<_> = est.by_ref().take(labels.len()).collect();
            for (label, e) in labels.iter().zip(&sinr_est) {
                row.float(format!("sinr_mc_mean_{label}"), e.mean);
            }
            for (label, e) in labels.iter().zip(&sinr_est) {
                row.float(format!("sinr_mc_stderr_{label}"), e.stderr);
            }
        }
    }
    if let Some((uniform_mi, optimal_mi, outcome)) = &waterfill {
        row.float("mi_det_uniform", uniform_mi / unit);
        row.float("mi_det_optimal", optimal_mi / unit);
        if mc {
            let e = est.next().expect("optimal mi estimate");
            row.float("mi_mc_optimal_mean", e.mean / unit);
            row.float("mi_mc_optimal_stderr", e.stderr / unit);
        }
        row.push("wf_sweeps", Cell::Int(outcome.allocation.sweeps as u64));
        for (k, u) in outcome.allocation.users.iter().enumerate() {
            for (j, p) in u.p.iter().enumerate() {
                row.float(format!("p_u{k}_s{j}"), *p);
            }
        }
    }
    if cfg.has(Mode::Oracle) {
        let cmp = kronecker_conditional_oracle_with(
            &spec,
            Substream::new(cfg.seed, 0),
            det.solution.clone(),
            &solver,
        )?;
        row.float("oracle_e_gap_max", cmp.max_e_gap());
        row.float("oracle_ebar_gap_max", cmp.max_ebar_gap());
    }
    if cfg.timing {
        row.float("wall_time_s", started.elapsed().as_secs_f64());
    }
    Ok(row)
}
