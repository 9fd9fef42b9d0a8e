//! Exit criteria. Each test prints one `PASS`/`FAIL` line with its measured figures.

use std::fs;
use std::process::Command;

use relacc_cli::commands::compare_report;
use relacc_cli::{CompareArgs, Common};
use relacc_core::fem::{assemble_solve, build_mesh, convergence_study, fit_constant, h1_error, Problem1D};
use relacc_core::law::{half_crossing, log_grid};
use relacc_core::rng::CounterRng;
use relacc_core::{
    lemma2_empirical_check, mc_estimate, numeric_area_oracle, prob_sigmoid, prob_sigmoid_complement,
    trapezium_ratio, ElementPair,
};

fn report(id: u32, name: &str, ok: bool, detail: &str) {
    println!("criterion {id} [{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

/// (C_k, k, C_m, m) for the four order pairs under test.
const PAIRS: [(f64, u32, f64, u32); 4] = [(1.0, 1, 2.0, 2), (0.5, 1, 3.0, 3), (2.0, 2, 0.7, 3), (3.0, 2, 7.0, 5)];

fn random_pair(rng: &mut CounterRng) -> ElementPair {
    let k = 1 + (rng.next_u64() % 4) as u32;
    let m = k + 1 + (rng.next_u64() % 4) as u32;
    let ck = 10f64.powf(4.0 * rng.next_f64() - 2.0);
    let cm = 10f64.powf(4.0 * rng.next_f64() - 2.0);
    ElementPair::from_parts(ck, k, cm, m).unwrap()
}

#[test]
fn criterion_1_sigmoid_law_matches_monte_carlo() {
    let n = 1_000_000u64;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut count = 0;
    for (i, &(ck, k, cm, m)) in PAIRS.iter().enumerate() {
        let pair = ElementPair::from_parts(ck, k, cm, m).unwrap();
        for (j, t) in [0.1, 0.5, 0.9, 1.0, 1.5, 10.0].into_iter().enumerate() {
            let h = t * pair.h_star();
            let p = prob_sigmoid(&pair, h).unwrap();
            let est = mc_estimate(&pair, h, n, 1000 + (10 * i + j) as u64).unwrap();
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            let z = (est.p_hat - p).abs() / sigma;
            worst = worst.max(z);
            count += 1;
            if z > 3.0 {
                failures.push(format!("(k={k},m={m},h/h*={t}): z={z:.2}"));
            }
        }
    }
    report(
        1,
        "sigmoid closed form vs Monte Carlo, n=1e6, 3 sigma",
        failures.is_empty(),
        &format!("{count} configurations, max |z| = {worst:.3}; {failures:?}"),
    );
}

#[test]
fn criterion_2_trapezium_geometry() {
    let mut rng = CounterRng::new(2, &[]);
    let mut worst_rel = 0.0f64;
    for _ in 0..100 {
        let pair = random_pair(&mut rng);
        let h = pair.h_star() * (0.01 + 0.99 * rng.next_f64());
        let tr = trapezium_ratio(&pair, h).unwrap();
        let p = prob_sigmoid(&pair, h).unwrap();
        worst_rel = worst_rel.max(((tr - p) / p).abs());
    }
    let mut worst_area = 0.0f64;
    for &(ck, k, cm, m) in &PAIRS {
        let pair = ElementPair::from_parts(ck, k, cm, m).unwrap();
        for t in [0.2, 0.7, 1.0, 1.5, 4.0] {
            let h = t * pair.h_star();
            let area = numeric_area_oracle(&pair, h, 2000).unwrap();
            worst_area = worst_area.max((area - prob_sigmoid(&pair, h).unwrap()).abs());
        }
    }
    report(
        2,
        "trapezium ratio and midpoint-area oracle",
        worst_rel <= 1e-12 && worst_area <= 5e-4,
        &format!("max relative trapezium gap {worst_rel:.2e} (tol 1e-12), max area gap {worst_area:.2e} (tol 5e-4)"),
    );
}

#[test]
fn criterion_3_sigmoid_properties() {
    let mut rng = CounterRng::new(3, &[]);
    let mut at_h_star = 0.0f64;
    let mut reflection = 0.0f64;
    let mut monotone = true;
    let mut limit = 0.0f64;
    for &(ck, k, cm, m) in &PAIRS {
        let pair = ElementPair::from_parts(ck, k, cm, m).unwrap();
        let hs = pair.h_star();
        at_h_star = at_h_star.max((prob_sigmoid(&pair, hs).unwrap() - 0.5).abs());
        for _ in 0..50 {
            let t = 1.0 - rng.next_f64(); // (0, 1]
            let s = prob_sigmoid(&pair, t * hs).unwrap() + prob_sigmoid(&pair, hs / t).unwrap();
            reflection = reflection.max((s - 1.0).abs());
        }
        let grid = log_grid(hs * 1e-3, hs * 1e3, 1000).unwrap();
        let ps: Vec<f64> = grid.iter().map(|&h| prob_sigmoid(&pair, h).unwrap()).collect();
        monotone &= ps.windows(2).all(|w| w[1] < w[0]);
        for d in 1..=6 {
            let q = prob_sigmoid_complement(&pair, hs * 10f64.powi(-d)).unwrap();
            let expect = 0.5 * 10f64.powi(-d * (m - k) as i32);
            limit = limit.max(((q - expect) / expect).abs());
        }
    }
    report(
        3,
        "P(h*)=1/2, reflection, monotonicity, limit at 0+",
        at_h_star <= 1e-12 && reflection <= 1e-12 && monotone && limit <= 1e-10,
        &format!(
            "|P(h*)-1/2| {at_h_star:.1e}, reflection {reflection:.1e}, strictly decreasing {monotone}, limit rel {limit:.1e}"
        ),
    );
}

/// Least-squares slope of `ln y` against `ln x`.
fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn criterion_4_lemma2_identity() {
    let pair = ElementPair::from_parts(1.0, 1, 2.0, 2).unwrap();
    let h = 0.25;
    let reference = lemma2_empirical_check(&pair, h, 1_000_000, 4).unwrap();

    // The residual itself must stay inside a 3-sigma envelope at every n.
    // Its O(n^-1/2) rate is measured on the sampling error of the identity's
    // right-hand side, Prob{B}/Prob{B|A}, against the exact value 0.75.
    let ns = [10_000u64, 40_000, 160_000, 640_000, 1_000_000];
    let mut rms = Vec::new();
    let mut residual_ok = true;
    let mut worst_residual = 0.0f64;
    for &n in &ns {
        let mut sq = 0.0;
        for seed in 0..10 {
            let r = lemma2_empirical_check(&pair, h, n, 40 + seed).unwrap();
            let envelope = 3.0 * (r.prob_a * (1.0 - r.prob_a) / n as f64).sqrt();
            residual_ok &= r.identity_residual <= envelope;
            worst_residual = worst_residual.max(r.identity_residual);
            let rhs = r.prob_b / r.prob_b_given_a;
            sq += (rhs - 0.75).powi(2);
        }
        rms.push((sq / 10.0).sqrt());
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = log_slope(&xs, &rms);
    report(
        4,
        "Prob{A} = Prob{B}/Prob{B|A}",
        reference.identity_residual <= 0.01 && residual_ok && (-0.75..=-0.25).contains(&slope),
        &format!(
            "residual at n=1e6 {:.1e} (tol 1e-2), max residual over sweep {worst_residual:.1e}, \
             prob_A {:.5}, prob_B {:.5}, RMS error slope {slope:.3} (expect -0.5)",
            reference.identity_residual, reference.prob_a, reference.prob_b
        ),
    );
}

#[test]
fn criterion_5_convergence_rates() {
    let p = Problem1D::sine();
    let ns = [8, 16, 32, 64, 128, 256, 512];
    let mut rates = Vec::new();
    let mut ok = true;
    for k in 1..=3 {
        let recs = convergence_study(&p, k, &ns, 0.0, 1, 5).unwrap();
        let f = fit_constant(&recs, k, false).unwrap();
        ok &= f.rate_within(0.15);
        rates.push(f.rate);
    }
    let mut worst_contained = 0.0f64;
    let cases = [
        (Problem1D::quadratic(), 2..=6),
        (Problem1D::power(2.0).unwrap(), 3..=6),
        (Problem1D::power(3.0).unwrap(), 4..=6),
    ];
    for (problem, orders) in cases {
        for k in orders {
            for (n, jitter) in [(1, 0.0), (4, 0.3), (9, 0.45)] {
                let mesh = build_mesh(n, jitter, k as u64).unwrap();
                let (e, _) = h1_error(&assemble_solve(&mesh, k, &problem).unwrap(), &problem);
                worst_contained = worst_contained.max(e);
            }
        }
    }
    report(
        5,
        "H1 convergence rates and polynomial containment",
        ok && worst_contained <= 1e-9,
        &format!("fitted rates P1..P3 {rates:.4?} (window ±0.15), worst contained error {worst_contained:.1e}"),
    );
}

fn compare_args(problem: &str) -> CompareArgs {
    CompareArgs {
        common: Common {
            seed: 2026,
            out: None,
            config: None,
        },
        problem: problem.into(),
        low: 1,
        high: 2,
        n_list: vec![1, 2, 3, 4, 6, 8, 12, 16, 24, 32],
        trials: 200,
        jitter: 0.3,
        fit_n: vec![16, 32, 64, 128, 256],
        fit_trials: 4,
        fix_rate: true,
        crossing_factor: 2.0,
        finest_min: 0.95,
    }
}

#[test]
fn criterion_6_crossover_end_to_end() {
    // synthetic uniform-error laws: the crossing must fall in the grid cell around h*
    let mut synthetic = Vec::new();
    let mut synthetic_ok = true;
    for (i, &(ck, k, cm, m)) in PAIRS.iter().enumerate() {
        let pair = ElementPair::from_parts(ck, k, cm, m).unwrap();
        let hs = pair.h_star();
        let grid = log_grid(hs / 8.0, hs * 7.0, 40).unwrap();
        let step = (grid[1] / grid[0]).ln();
        let samples: Vec<(f64, f64)> = grid
            .iter()
            .enumerate()
            .map(|(j, &h)| (h, mc_estimate(&pair, h, 200_000, 600 + (100 * i + j) as u64).unwrap().p_hat))
            .collect();
        let hc = half_crossing(&samples);
        let gap = hc.map_or(f64::INFINITY, |c| (c / hs).ln().abs());
        synthetic_ok &= gap <= step;
        synthetic.push(format!("(k={k},m={m}) |ln(hc/h*)|={gap:.3} <= {step:.3}"));
    }

    let r = compare_report(&compare_args("sin:4")).unwrap();
    let finest = r.rows.last().unwrap().p_hat;
    let fem_ok = r.crossing_ok && r.crossing.is_some() && finest >= 0.95;
    let table: Vec<String> = r
        .rows
        .iter()
        .map(|x| format!("n={} h={:.3} p_hat={:.3} p_model={:.3}", x.n, x.h_mean, x.p_hat, x.p_model))
        .collect();
    println!("criterion 6 FEM sweep (sin(4 pi x), P1 vs P2, jitter 0.3):");
    for line in &table {
        println!("    {line}");
    }
    report(
        6,
        "empirical crossing vs h*",
        synthetic_ok && fem_ok,
        &format!(
            "synthetic {synthetic:?}; FEM fitted h*={:.4}, crossing={:?}, ratio={:.3} (factor 2), \
             finest p_hat={finest:.3}, mean |p_hat - p_model|={:.3} (uniform-error model gap, reported)",
            r.pair.h_star(),
            r.crossing,
            r.crossing.map_or(f64::NAN, |c| c / r.pair.h_star()),
            r.model_gap
        ),
    );
}

fn run_to_file(args: &[&str], out: &std::path::Path, threads: Option<&str>) -> Vec<u8> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_relacc"));
    cmd.args(args).arg("--out").arg(out);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t);
    }
    let status = cmd.stderr(std::process::Stdio::null()).status().unwrap();
    assert!(status.code().is_some());
    fs::read(out).unwrap()
}

#[test]
fn criterion_7_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let jobs: [&[&str]; 4] = [
        &["law", "--ck", "3", "--k", "2", "--cm", "7", "--m", "5", "--points", "300"],
        &["mc", "--trials", "200000", "--points", "8", "--seed", "17"],
        &["fem", "--jitter", "0.3", "--trials", "3", "--seed", "5", "--n-list", "8,16,32,64"],
        &["compare", "--problem", "sin:4", "--trials", "60", "--seed", "8", "--n-list", "1,2,3,4,8"],
    ];
    let mut identical = 0;
    let mut detail = Vec::new();
    for (i, args) in jobs.iter().enumerate() {
        let a = run_to_file(args, &dir.path().join(format!("{i}a.csv")), None);
        let b = run_to_file(args, &dir.path().join(format!("{i}b.csv")), None);
        let c = run_to_file(args, &dir.path().join(format!("{i}c.csv")), Some("1"));
        let d = run_to_file(args, &dir.path().join(format!("{i}d.csv")), Some("5"));
        let same = !a.is_empty() && a == b && a == c && a == d;
        identical += same as usize;
        detail.push(format!("{}: {}", args[0], if same { "identical" } else { "DIFFERS" }));
    }
    report(
        7,
        "byte-identical reruns, serial and parallel",
        identical == jobs.len(),
        &detail.join(", "),
    );
}
