//! Randomised convergence studies and the empirical superiority frequency.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::mesh::build_mesh;
use crate::fem::problem::Problem1D;
use crate::fem::solve::{assemble_solve, h1_error};
use crate::format::num;
use crate::oracle::McEstimate;
use crate::rng::derive_seed;

/// Errors below this level are round-off, not discretisation error.
pub const NOISE_FLOOR: f64 = 1e-11;

/// Header of the convergence record CSV.
pub const RECORD_HEADER: &str = "order,n_elements,h_max,error_h1,error_h1_semi,seed";

/// One solve: order, mesh size and the resulting H1 errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub order: u32,
    pub n_elements: usize,
    pub h_max: f64,
    pub error_h1: f64,
    pub error_h1_semi: f64,
    pub seed: u64,
}

impl ConvergenceRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.order,
            self.n_elements,
            num(self.h_max),
            num(self.error_h1),
            num(self.error_h1_semi),
            self.seed
        )
    }
}

pub fn write_records_csv<W: Write>(mut out: W, records: &[ConvergenceRecord]) -> io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Seed of the mesh used for trial `trial` at resolution `n`.
pub fn mesh_seed(seed: u64, n: usize, trial: usize) -> u64 {
    derive_seed(seed, &[n as u64, trial as u64])
}

/// Solves on a fresh mesh for every `(n, trial)` pair.
///
/// Records come back ordered by `n` then trial regardless of scheduling.
pub fn convergence_study(
    problem: &Problem1D,
    order: u32,
    n_list: &[usize],
    jitter: f64,
    trials_per_n: usize,
    seed: u64,
) -> Result<Vec<ConvergenceRecord>> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "no resolutions given"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("n_list", "resolutions must increase strictly"));
    }
    if trials_per_n == 0 {
        return Err(Error::invalid("trials_per_n", "need at least one trial"));
    }
    let jobs: Vec<(usize, usize)> = n_list
        .iter()
        .flat_map(|&n| (0..trials_per_n).map(move |t| (n, t)))
        .collect();
    jobs.par_iter()
        .map(|&(n, t)| {
            let s = mesh_seed(seed, n, t);
            let mesh = build_mesh(n, jitter, s)?;
            let sol = assemble_solve(&mesh, order, problem)?;
            let (error_h1, error_h1_semi) = h1_error(&sol, problem);
            Ok(ConvergenceRecord {
                order,
                n_elements: n,
                h_max: mesh.h_max(),
                error_h1,
                error_h1_semi,
                seed: s,
            })
        })
        .collect()
}

/// Least-squares fit of `error = constant * h^rate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedLaw {
    pub order: u32,
    pub constant: f64,
    pub rate: f64,
    /// RMS misfit of `ln(error)`.
    pub residual: f64,
}

impl FittedLaw {
    /// Whether the fitted rate lies within `tol` of the theoretical order.
    pub fn rate_within(&self, tol: f64) -> bool {
        (self.rate - self.order as f64).abs() <= tol
    }
}

/// Fits `ln e = ln C + r ln h` over the records of `order`.
///
/// With `fix_rate` the slope is pinned to `order` and only `ln C` is fitted.
pub fn fit_constant(records: &[ConvergenceRecord], order: u32, fix_rate: bool) -> Result<FittedLaw> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.order == order)
        .map(|r| (r.h_max, r.error_h1))
        .collect();
    let mut hs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    if hs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "order {order}: need at least 3 distinct mesh sizes, got {}",
            hs.len()
        )));
    }
    if let Some(&(h, e)) = pts.iter().find(|p| !(p.1 > NOISE_FLOOR && p.1.is_finite())) {
        return Err(Error::InsufficientData(format!(
            "order {order}: error {e:e} at h = {h} is at round-off level, \
             no dynamic range to fit a rate"
        )));
    }
    let n = pts.len() as f64;
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(h, e)| (h.ln(), e.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let rate = if fix_rate {
        order as f64
    } else {
        let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    };
    let log_c = my - rate * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - log_c - rate * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(FittedLaw {
        order,
        constant: log_c.exp(),
        rate,
        residual,
    })
}

/// Outcome of one superiority trial: independent meshes for the two orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperiorityTrial {
    pub h_low: f64,
    pub h_high: f64,
    pub error_low: f64,
    pub error_high: f64,
}

impl SuperiorityTrial {
    pub fn high_wins(&self) -> bool {
        self.error_high <= self.error_low
    }
}

/// Runs `trials` independent mesh pairs at resolution `n_elements`.
#[allow(clippy::too_many_arguments)]
pub fn superiority_trials(
    problem: &Problem1D,
    order_low: u32,
    order_high: u32,
    n_elements: usize,
    trials: usize,
    jitter: f64,
    seed: u64,
) -> Result<Vec<SuperiorityTrial>> {
    if order_low >= order_high {
        return Err(Error::OrderMismatch {
            low: order_low,
            high: order_high,
        });
    }
    if trials == 0 {
        return Err(Error::InsufficientData("zero trials".into()));
    }
    let solve = |order: u32, s: u64| -> Result<(f64, f64)> {
        let mesh = build_mesh(n_elements, jitter, s)?;
        let sol = assemble_solve(&mesh, order, problem)?;
        Ok((mesh.h_max(), h1_error(&sol, problem).0))
    };
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let (h_low, error_low) = solve(order_low, derive_seed(seed, &[n_elements as u64, t as u64, 0]))?;
            let (h_high, error_high) = solve(order_high, derive_seed(seed, &[n_elements as u64, t as u64, 1]))?;
            Ok(SuperiorityTrial {
                h_low,
                h_high,
                error_low,
                error_high,
            })
        })
        .collect()
}

/// Frequency of `error_high <= error_low` over independent mesh pairs.
#[allow(clippy::too_many_arguments)]
pub fn empirical_superiority(
    problem: &Problem1D,
    order_low: u32,
    order_high: u32,
    n_elements: usize,
    trials: usize,
    jitter: f64,
    seed: u64,
) -> Result<McEstimate> {
    let runs = superiority_trials(problem, order_low, order_high, n_elements, trials, jitter, seed)?;
    let wins = runs.iter().filter(|t| t.high_wins()).count() as u64;
    McEstimate::from_counts(wins, runs.len() as u64, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(order: u32, c: f64, hs: &[f64]) -> Vec<ConvergenceRecord> {
        hs.iter()
            .map(|&h| ConvergenceRecord {
                order,
                n_elements: (1.0 / h).round() as usize,
                h_max: h,
                error_h1: c * h.powi(order as i32),
                error_h1_semi: c * h.powi(order as i32),
                seed: 0,
            })
            .collect()
    }

    #[test]
    fn noiseless_fit() {
        let recs = synthetic(3, 2.5, &[0.5, 0.25, 0.125, 0.0625]);
        let f = fit_constant(&recs, 3, false).unwrap();
        assert!((f.constant - 2.5).abs() < 1e-10);
        assert!((f.rate - 3.0).abs() < 1e-10);
        assert!(f.residual < 1e-12);
        let g = fit_constant(&recs, 3, true).unwrap();
        assert!((g.constant - 2.5).abs() < 1e-10);
    }

    #[test]
    fn fit_needs_three_mesh_sizes() {
        let recs = synthetic(1, 1.0, &[0.5, 0.25, 0.25]);
        assert!(matches!(fit_constant(&recs, 1, false), Err(Error::InsufficientData(_))));
        let recs = synthetic(1, 1.0, &[0.5, 0.25, 0.125]);
        assert!(matches!(fit_constant(&recs, 2, false), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn fit_refuses_round_off_errors() {
        let recs = synthetic(2, 1e-12, &[0.5, 0.25, 0.125]);
        assert!(matches!(fit_constant(&recs, 2, false), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn study_shapes_and_determinism() {
        let p = Problem1D::sine();
        let a = convergence_study(&p, 1, &[4, 8, 16], 0.2, 3, 5).unwrap();
        assert_eq!(a.len(), 9);
        assert_eq!(a, convergence_study(&p, 1, &[4, 8, 16], 0.2, 3, 5).unwrap());
        assert!(a.iter().all(|r| r.error_h1 >= r.error_h1_semi && r.error_h1_semi > 0.0));
        assert!(convergence_study(&p, 1, &[8, 4], 0.2, 3, 5).is_err());
        assert!(convergence_study(&p, 1, &[4, 8], 0.2, 0, 5).is_err());
        assert!(convergence_study(&p, 0, &[4, 8], 0.2, 1, 5).is_err());
    }

    #[test]
    fn csv_layout() {
        let recs = synthetic(2, 1.0, &[0.5]);
        let mut buf = Vec::new();
        write_records_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(RECORD_HEADER));
        assert_eq!(
            lines.next(),
            Some("2,2,5.0000000000000000e-1,2.5000000000000000e-1,2.5000000000000000e-1,0")
        );
    }

    #[test]
    fn superiority_without_jitter_is_deterministic() {
        let p = Problem1D::sine();
        let e = empirical_superiority(&p, 1, 2, 4, 5, 0.0, 3).unwrap();
        assert_eq!(e.p_hat, 1.0);
        assert!(empirical_superiority(&p, 2, 1, 4, 5, 0.0, 3).is_err());
        assert!(empirical_superiority(&p, 1, 2, 4, 0, 0.0, 3).is_err());
    }
}
