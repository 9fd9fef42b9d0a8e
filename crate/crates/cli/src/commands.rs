use std::fmt::Write as _;
use std::path::PathBuf;

use relacc_core::fem::{self, ConvergenceRecord, FittedLaw, Problem1D};
use relacc_core::format::num;
use relacc_core::law::{self, ElementPair, Law};
use relacc_core::oracle;
use relacc_core::rng::derive_seed;

use crate::{CompareArgs, FemArgs, GridArgs, LawArgs, McArgs, PairArgs, Spacing};

/// Rendered result of one subcommand.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// Contents of `--out` (or standard output).
    pub data: String,
    /// Additional declared output files.
    pub extra_files: Vec<(PathBuf, String)>,
    /// Whether every requested validation passed.
    pub passed: bool,
    pub diagnostics: Vec<String>,
}

type CmdResult = Result<Outcome, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn build_pair(p: &PairArgs) -> Result<ElementPair, String> {
    ElementPair::from_parts(p.ck, p.k, p.cm, p.m).map_err(err)
}

fn build_grid(pair: &ElementPair, g: &GridArgs, default_points: usize) -> Result<Vec<f64>, String> {
    let hs = pair.h_star();
    let h_min = g.h_min.unwrap_or(hs / 10.0);
    let h_max = g.h_max.unwrap_or(hs * 10.0);
    let points = g.points.unwrap_or(default_points);
    if points > 1 && h_min.partial_cmp(&h_max) != Some(std::cmp::Ordering::Less) {
        return Err(format!("need h-min < h-max, got {h_min} and {h_max}"));
    }
    let mut grid = match g.spacing {
        Spacing::Log => law::log_grid(h_min, h_max, points).map_err(err)?,
        Spacing::Linear => {
            if !(h_min.is_finite() && h_min > 0.0 && h_max.is_finite()) {
                return Err(format!("mesh sizes must be positive and finite, got {h_min} and {h_max}"));
            }
            if points == 0 {
                return Err("need at least one grid point".into());
            }
            let step = if points > 1 { (h_max - h_min) / (points - 1) as f64 } else { 0.0 };
            let mut v: Vec<f64> = (0..points).map(|i| h_min + step * i as f64).collect();
            if points > 1 {
                v[points - 1] = h_max;
            }
            v
        }
    };
    if g.include_h_star && !grid.contains(&hs) {
        let at = grid.partition_point(|&h| h < hs);
        grid.insert(at, hs);
    }
    Ok(grid)
}

fn pair_comments(out: &mut String, pair: &ElementPair) {
    let _ = writeln!(
        out,
        "# ck={} k={} cm={} m={}",
        num(pair.low().constant()),
        pair.low().order(),
        num(pair.high().constant()),
        pair.high().order()
    );
    let _ = writeln!(out, "# h_star={}", num(pair.h_star()));
}

pub fn law(a: &LawArgs) -> CmdResult {
    let pair = build_pair(&a.pair)?;
    let grid = build_grid(&pair, &a.grid, 200)?;
    let two = law::tabulate_curve(&pair, &grid, Law::TwoStep).map_err(err)?;
    let sig = law::tabulate_curve(&pair, &grid, Law::Sigmoid).map_err(err)?;
    let mut out = String::new();
    let _ = writeln!(out, "# relacc law");
    pair_comments(&mut out, &pair);
    let _ = writeln!(out, "h,p_two_step,p_sigmoid");
    for ((h, p2), (_, ps)) in two.samples.iter().zip(&sig.samples) {
        let _ = writeln!(out, "{},{},{}", num(*h), num(*p2), num(*ps));
    }
    Ok(Outcome {
        data: out,
        passed: true,
        ..Default::default()
    })
}

pub fn mc(a: &McArgs) -> CmdResult {
    let pair = build_pair(&a.pair)?;
    let grid = build_grid(&pair, &a.grid, 20)?;
    if a.trials == 0 {
        return Err("--trials must be at least 1".into());
    }
    if !(a.sigma.is_finite() && a.sigma > 0.0) {
        return Err(format!("--sigma must be positive, got {}", a.sigma));
    }
    let seed = a.common.seed;
    let mut out = String::new();
    let _ = writeln!(out, "# relacc mc");
    pair_comments(&mut out, &pair);
    let _ = writeln!(out, "# trials={} seed={seed} sigma_band={}", a.trials, a.sigma);
    let _ = writeln!(out, "h,p_analytic,p_hat,std_error,within_3sigma");
    let mut diagnostics = Vec::new();
    let mut passed = true;
    for (i, &h) in grid.iter().enumerate() {
        let p = law::prob_sigmoid(&pair, h).map_err(err)?;
        let est = oracle::mc_estimate(&pair, h, a.trials, derive_seed(seed, &[i as u64])).map_err(err)?;
        let ok = est.within_sigma(p, a.sigma);
        if !ok {
            passed = false;
            diagnostics.push(format!(
                "mc: h={h} p_hat={} outside {}-sigma band around {p}",
                est.p_hat, a.sigma
            ));
        }
        let _ = writeln!(out, "{},{},{},{},{ok}", num(h), num(p), num(est.p_hat), num(est.std_error));
    }
    Ok(Outcome {
        data: out,
        extra_files: Vec::new(),
        passed,
        diagnostics,
    })
}

fn problem(name: &str) -> Result<Problem1D, String> {
    Problem1D::by_name(name).map_err(err)
}

pub fn fem(a: &FemArgs) -> CmdResult {
    let problem = problem(&a.problem)?;
    if a.orders.is_empty() {
        return Err("--orders is empty".into());
    }
    let seed = a.common.seed;
    let mut records: Vec<ConvergenceRecord> = Vec::new();
    for &order in &a.orders {
        let recs = fem::convergence_study(
            &problem,
            order,
            &a.n_list,
            a.jitter,
            a.trials,
            derive_seed(seed, &[order as u64]),
        )
        .map_err(err)?;
        records.extend(recs);
    }

    let mut diagnostics = Vec::new();
    let mut passed = true;
    let mut fits: Vec<FittedLaw> = Vec::new();
    for &order in &a.orders {
        match fem::fit_constant(&records, order, a.fix_rate) {
            Ok(f) => {
                // the rate check always uses the free fit
                let free = if a.fix_rate {
                    fem::fit_constant(&records, order, false).map_err(err)?
                } else {
                    f
                };
                if !free.rate_within(a.rate_tol) {
                    passed = false;
                    diagnostics.push(format!(
                        "fem: order {order} fitted rate {:.4} outside [{}, {}]",
                        free.rate,
                        order as f64 - a.rate_tol,
                        order as f64 + a.rate_tol
                    ));
                }
                fits.push(f);
            }
            Err(e) => {
                passed = false;
                diagnostics.push(format!("fem: fit refused for order {order}: {e}"));
            }
        }
    }

    let mut head = String::new();
    let _ = writeln!(head, "# relacc fem");
    let _ = writeln!(
        head,
        "# problem={} jitter={} trials={} seed={seed}",
        problem.name(),
        a.jitter,
        a.trials
    );
    let _ = writeln!(head, "# fix_rate={} rate_tol={}", a.fix_rate, a.rate_tol);

    let mut recs_csv = head.clone();
    let mut buf = Vec::new();
    fem::write_records_csv(&mut buf, &records).map_err(err)?;
    recs_csv.push_str(&String::from_utf8(buf).map_err(err)?);

    let mut fit_csv = head;
    let _ = writeln!(fit_csv, "order,constant,rate,residual");
    for f in &fits {
        let _ = writeln!(fit_csv, "{},{},{},{}", f.order, num(f.constant), num(f.rate), num(f.residual));
    }

    let (data, extra_files) = match &a.fit_out {
        Some(path) => (recs_csv, vec![(path.clone(), fit_csv)]),
        None => (format!("{recs_csv}\n{fit_csv}"), Vec::new()),
    };
    Ok(Outcome {
        data,
        extra_files,
        passed,
        diagnostics,
    })
}

/// One row of the compare sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareRow {
    pub n: usize,
    pub h_mean: f64,
    pub p_hat: f64,
    pub std_error: f64,
    pub p_model: f64,
}

/// Fitted pair, sweep rows and validation verdicts of a compare run.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub fits: (FittedLaw, FittedLaw),
    pub pair: ElementPair,
    pub rows: Vec<CompareRow>,
    pub crossing: Option<f64>,
    pub crossing_ok: bool,
    pub finest_ok: bool,
    /// Mean `|p_hat - p_model|` over the sweep.
    pub model_gap: f64,
}

pub fn compare_report(a: &CompareArgs) -> Result<CompareReport, String> {
    let problem = problem(&a.problem)?;
    if a.n_list.is_empty() {
        return Err("--n-list is empty".into());
    }
    if a.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err("--n-list must increase strictly".into());
    }
    if !(a.crossing_factor.is_finite() && a.crossing_factor >= 1.0) {
        return Err(format!("--crossing-factor must be >= 1, got {}", a.crossing_factor));
    }
    let seed = a.common.seed;
    let fit = |order: u32| -> Result<FittedLaw, String> {
        let recs = fem::convergence_study(
            &problem,
            order,
            &a.fit_n,
            a.jitter,
            a.fit_trials,
            derive_seed(seed, &[1, order as u64]),
        )
        .map_err(err)?;
        fem::fit_constant(&recs, order, a.fix_rate).map_err(err)
    };
    let (fit_low, fit_high) = (fit(a.low)?, fit(a.high)?);
    let pair = ElementPair::from_parts(fit_low.constant, a.low, fit_high.constant, a.high).map_err(err)?;

    let mut rows = Vec::with_capacity(a.n_list.len());
    for &n in &a.n_list {
        let trials = fem::superiority_trials(
            &problem,
            a.low,
            a.high,
            n,
            a.trials,
            a.jitter,
            derive_seed(seed, &[2]),
        )
        .map_err(err)?;
        let wins = trials.iter().filter(|t| t.high_wins()).count() as u64;
        let est = oracle::McEstimate::from_counts(wins, trials.len() as u64, seed).map_err(err)?;
        let h_mean = trials.iter().map(|t| t.h_low + t.h_high).sum::<f64>() / (2 * trials.len()) as f64;
        rows.push(CompareRow {
            n,
            h_mean,
            p_hat: est.p_hat,
            std_error: est.std_error,
            p_model: law::prob_sigmoid(&pair, h_mean).map_err(err)?,
        });
    }

    let mut by_h: Vec<(f64, f64)> = rows.iter().map(|r| (r.h_mean, r.p_hat)).collect();
    by_h.sort_by(|x, y| x.0.total_cmp(&y.0));
    let crossing = law::half_crossing(&by_h);
    let hs = pair.h_star();
    let (h_lo, h_hi) = (by_h[0].0, by_h[by_h.len() - 1].0);
    let crossing_ok = match crossing {
        Some(hc) => {
            let ratio = hc / hs;
            ratio >= 1.0 / a.crossing_factor && ratio <= a.crossing_factor
        }
        // no crossing is consistent with the model only if h* is outside the sweep
        None => {
            (hs > h_hi && by_h.iter().all(|r| r.1 >= 0.5)) || (hs < h_lo && by_h.iter().all(|r| r.1 < 0.5))
        }
    };
    let finest = rows.last().expect("n_list is non-empty");
    let finest_ok = finest.p_hat >= a.finest_min;
    let model_gap = rows.iter().map(|r| (r.p_hat - r.p_model).abs()).sum::<f64>() / rows.len() as f64;
    Ok(CompareReport {
        fits: (fit_low, fit_high),
        pair,
        rows,
        crossing,
        crossing_ok,
        finest_ok,
        model_gap,
    })
}

pub fn compare(a: &CompareArgs) -> CmdResult {
    let r = compare_report(a)?;
    let mut out = String::new();
    let _ = writeln!(out, "# relacc compare");
    let _ = writeln!(
        out,
        "# problem={} low={} high={} trials={} jitter={} seed={}",
        a.problem, a.low, a.high, a.trials, a.jitter, a.common.seed
    );
    let _ = writeln!(
        out,
        "# fit_n={:?} fit_trials={} fix_rate={}",
        a.fit_n, a.fit_trials, a.fix_rate
    );
    for f in [&r.fits.0, &r.fits.1] {
        let _ = writeln!(
            out,
            "# fitted order={} constant={} rate={} residual={}",
            f.order,
            num(f.constant),
            num(f.rate),
            num(f.residual)
        );
    }
    let _ = writeln!(out, "# fitted_h_star={}", num(r.pair.h_star()));
    let crossing = r.crossing.map_or_else(|| "none".to_string(), num);
    let _ = writeln!(out, "# empirical_crossing={crossing}");
    let _ = writeln!(
        out,
        "# crossing_factor={} crossing_ok={} finest_min={} finest_ok={}",
        a.crossing_factor, r.crossing_ok, a.finest_min, r.finest_ok
    );
    let _ = writeln!(out, "# mean_abs_model_gap={}", num(r.model_gap));
    let _ = writeln!(out, "n,h_mean,p_hat,std_error,p_model");
    for row in &r.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.n,
            num(row.h_mean),
            num(row.p_hat),
            num(row.std_error),
            num(row.p_model)
        );
    }
    let mut diagnostics = vec![
        format!("compare: fitted h* = {}", r.pair.h_star()),
        format!("compare: empirical 0.5-crossing = {crossing}"),
        format!("compare: mean |p_hat - p_model| = {:.4}", r.model_gap),
    ];
    if !r.crossing_ok {
        diagnostics.push(format!(
            "compare: crossing {crossing} not within factor {} of h* = {}",
            a.crossing_factor,
            r.pair.h_star()
        ));
    }
    if !r.finest_ok {
        diagnostics.push(format!(
            "compare: p_hat at finest n is {} < {}",
            r.rows.last().map_or(f64::NAN, |x| x.p_hat),
            a.finest_min
        ));
    }
    Ok(Outcome {
        data: out,
        extra_files: Vec::new(),
        passed: r.crossing_ok && r.finest_ok,
        diagnostics,
    })
}
