//! Independent routes to the sigmoid law.
//!
//! The errors of the two element families are modelled as independent
//! uniform variables on `[0, C_k h^k]` and `[0, C_m h^m]`. The probability
//! that the high-order error does not exceed the low-order one is the
//! fraction of the rectangle `[0, C_m h^m] x [0, C_k h^k]` lying on the
//! correct side of the bisector. It is recovered here three ways:
//! trapezium areas, midpoint-rule integration, and Monte Carlo sampling.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::law::ElementPair;
use crate::rng::CounterRng;

/// Trials per parallel work unit. Counts are summed as integers, so the
/// result does not depend on how chunks are scheduled.
const CHUNK: u64 = 1 << 14;

/// One joint draw of the two error variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformErrorSample {
    pub x_low: f64,
    pub x_high: f64,
}

impl UniformErrorSample {
    /// Draw for trial `index` of the experiment keyed by `seed`.
    pub fn draw(pair: &ElementPair, h: f64, seed: u64, index: u64) -> Self {
        let (b_low, b_high) = bounds(pair, h);
        let mut rng = CounterRng::for_trial(seed, index);
        let x_low = rng.next_f64() * b_low;
        let x_high = rng.next_f64() * b_high;
        Self { x_low, x_high }
    }

    /// The event "high order at least as accurate"; ties count as success.
    pub fn high_wins(&self) -> bool {
        self.x_high <= self.x_low
    }
}

/// Bernoulli frequency estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub p_hat: f64,
    pub n_trials: u64,
    pub std_error: f64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, n_trials: u64, seed: u64) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::InsufficientData("zero trials".into()));
        }
        if successes > n_trials {
            return Err(Error::invalid(
                "successes",
                format!("{successes} successes out of {n_trials} trials"),
            ));
        }
        let p_hat = successes as f64 / n_trials as f64;
        Ok(Self {
            p_hat,
            n_trials,
            std_error: (p_hat * (1.0 - p_hat) / n_trials as f64).sqrt(),
            seed,
        })
    }

    /// `|p_hat - p| <= k * sqrt(p (1 - p) / n)` using the reference `p`.
    pub fn within_sigma(&self, p: f64, k: f64) -> bool {
        (self.p_hat - p).abs() <= k * (p * (1.0 - p) / self.n_trials as f64).sqrt()
    }
}

/// Frequencies behind the conditional-probability identity
/// `Prob{A} = Prob{B} / Prob{B | A}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Report {
    pub prob_a: f64,
    pub prob_b: f64,
    pub prob_b_given_a: f64,
    pub identity_residual: f64,
    pub n_trials: u64,
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("h", format!("mesh size must be positive and finite, got {h}")))
    }
}

fn bounds(pair: &ElementPair, h: f64) -> (f64, f64) {
    (pair.low().bound(h), pair.high().bound(h))
}

/// Area of the trapezium above the bisector divided by the rectangle area.
///
/// Only defined on the branch `h <= h*`, where `C_m h^m <= C_k h^k`.
pub fn trapezium_ratio(pair: &ElementPair, h: f64) -> Result<f64> {
    check_h(h)?;
    if h > pair.h_star() {
        return Err(Error::AboveCrossover {
            h,
            h_star: pair.h_star(),
        });
    }
    let (ck, cm) = (pair.low().constant(), pair.high().constant());
    let (k, m) = (pair.low().order() as i32, pair.high().order() as i32);
    let side_low = ck * h.powi(k);
    let side_high = cm * h.powi(m);
    let trapezium = side_high * (side_low - side_high) + side_high * side_high / 2.0;
    let rectangle = cm * ck * h.powi(m + k);
    Ok((trapezium / rectangle).clamp(0.0, 1.0))
}

/// Midpoint-rule integral of the indicator `{x_high <= x_low}` over the
/// rectangle, normalised by its area. Valid on both sides of `h*`.
pub fn numeric_area_oracle(pair: &ElementPair, h: f64, grid_n: usize) -> Result<f64> {
    check_h(h)?;
    if grid_n < 2 {
        return Err(Error::invalid("grid_n", format!("need at least 2 cells per side, got {grid_n}")));
    }
    let (b_low, b_high) = bounds(pair, h);
    let n = grid_n as f64;
    let hits: u64 = (0..grid_n)
        .into_par_iter()
        .map(|i| {
            let x_high = (i as f64 + 0.5) / n * b_high;
            (0..grid_n)
                .filter(|&j| x_high <= (j as f64 + 0.5) / n * b_low)
                .count() as u64
        })
        .sum();
    Ok(hits as f64 / (n * n))
}

fn count_parallel<F>(n_trials: u64, f: F) -> u64
where
    F: Fn(u64) -> u64 + Sync,
{
    let chunks = n_trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(n_trials);
            (c * CHUNK..end).map(&f).sum::<u64>()
        })
        .sum()
}

/// Monte Carlo frequency of `{x_high <= x_low}` over `n_trials` independent draws.
pub fn mc_estimate(pair: &ElementPair, h: f64, n_trials: u64, seed: u64) -> Result<McEstimate> {
    check_h(h)?;
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "need at least one trial"));
    }
    let hits = count_parallel(n_trials, |i| {
        UniformErrorSample::draw(pair, h, seed, i).high_wins() as u64
    });
    McEstimate::from_counts(hits, n_trials, seed)
}

/// Frequency of `{x_low <= x_high}`, the complement event with ties included.
pub fn mc_complement(pair: &ElementPair, h: f64, n_trials: u64, seed: u64) -> Result<McEstimate> {
    check_h(h)?;
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "need at least one trial"));
    }
    let hits = count_parallel(n_trials, |i| {
        let s = UniformErrorSample::draw(pair, h, seed, i);
        (s.x_low <= s.x_high) as u64
    });
    McEstimate::from_counts(hits, n_trials, seed)
}

/// Empirical check of `Prob{A} = Prob{B} / Prob{B | A}` on the branch `h < h*`.
///
/// `A` is `{x_high <= x_low}` and `B` is `{x_low in [C_m h^m, C_k h^k]}`.
pub fn lemma2_empirical_check(
    pair: &ElementPair,
    h: f64,
    n_trials: u64,
    seed: u64,
) -> Result<Lemma2Report> {
    check_h(h)?;
    if n_trials == 0 {
        return Err(Error::invalid("n_trials", "need at least one trial"));
    }
    if h >= pair.h_star() {
        return Err(Error::AboveCrossover {
            h,
            h_star: pair.h_star(),
        });
    }
    let (b_low, b_high) = bounds(pair, h);
    // Pack the three counters into one u64 per trial: bit 0 = A, bit 1 = B, bit 2 = A and B.
    let tally = |i: u64| {
        let s = UniformErrorSample::draw(pair, h, seed, i);
        let a = s.high_wins();
        let b = (b_high..=b_low).contains(&s.x_low);
        (a as u64) | (b as u64) << 21 | ((a && b) as u64) << 42
    };
    let chunks = n_trials.div_ceil(CHUNK);
    let (n_a, n_b, n_ab) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let end = ((c + 1) * CHUNK).min(n_trials);
            let packed: u64 = (c * CHUNK..end).map(tally).sum();
            let mask = (1u64 << 21) - 1;
            (packed & mask, (packed >> 21) & mask, packed >> 42)
        })
        .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2));
    if n_a == 0 {
        return Err(Error::InsufficientData(format!(
            "event A never occurred in {n_trials} trials"
        )));
    }
    let n = n_trials as f64;
    let prob_a = n_a as f64 / n;
    let prob_b = n_b as f64 / n;
    let prob_b_given_a = n_ab as f64 / n_a as f64;
    let identity_residual = if n_ab == 0 {
        f64::NAN
    } else {
        (prob_a - prob_b / prob_b_given_a).abs()
    };
    Ok(Lemma2Report {
        prob_a,
        prob_b,
        prob_b_given_a,
        identity_residual,
        n_trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::prob_sigmoid;

    fn reference() -> ElementPair {
        ElementPair::from_parts(1.0, 1, 2.0, 2).unwrap()
    }

    #[test]
    fn trapezium_examples() {
        let p = reference();
        // S(T_u) = 0.125 * 0.125 + 0.0078125 = 0.0234375, S(R_t) = 0.03125
        assert!((trapezium_ratio(&p, 0.25).unwrap() - 0.75).abs() < 1e-15);
        assert!((trapezium_ratio(&p, p.h_star()).unwrap() - 0.5).abs() < 1e-15);
        let q = ElementPair::from_parts(1.0, 1, 1.0, 2).unwrap();
        assert!((trapezium_ratio(&q, 0.1).unwrap() - 0.95).abs() < 1e-12);
        assert!(matches!(
            trapezium_ratio(&p, 0.6),
            Err(Error::AboveCrossover { .. })
        ));
    }

    #[test]
    fn area_oracle_examples() {
        let p = reference();
        assert!((numeric_area_oracle(&p, 0.25, 2000).unwrap() - 0.75).abs() < 5e-4);
        assert!((numeric_area_oracle(&p, 0.5, 2000).unwrap() - 0.5).abs() < 5e-4);
        let far = numeric_area_oracle(&p, 1.0, 2000).unwrap();
        assert!((far - prob_sigmoid(&p, 1.0).unwrap()).abs() < 5e-4);
        let q = ElementPair::from_parts(1.0, 1, 1.0, 2).unwrap();
        assert!((numeric_area_oracle(&q, 0.1, 2000).unwrap() - 0.95).abs() < 1e-3);
        assert!(numeric_area_oracle(&p, 0.25, 1).is_err());
    }

    #[test]
    fn mc_single_trial_is_bernoulli() {
        let p = reference();
        for seed in 0..20 {
            let e = mc_estimate(&p, 0.3, 1, seed).unwrap();
            assert!(e.p_hat == 0.0 || e.p_hat == 1.0);
            assert_eq!(e.std_error, 0.0);
        }
        assert!(mc_estimate(&p, 0.3, 0, 1).is_err());
        assert!(mc_estimate(&p, 0.0, 10, 1).is_err());
    }

    #[test]
    fn samples_respect_bounds() {
        let p = ElementPair::from_parts(3.0, 2, 7.0, 5).unwrap();
        let h = 0.6;
        for i in 0..1000 {
            let s = UniformErrorSample::draw(&p, h, 9, i);
            assert!((0.0..=3.0 * h * h).contains(&s.x_low));
            assert!((0.0..=7.0 * h.powi(5)).contains(&s.x_high));
        }
    }

    #[test]
    fn estimate_std_error_matches_counts() {
        let e = McEstimate::from_counts(30, 100, 0).unwrap();
        assert_eq!(e.p_hat, 0.3);
        assert!((e.std_error - (0.3f64 * 0.7 / 100.0).sqrt()).abs() < 1e-15);
        assert!(McEstimate::from_counts(3, 0, 0).is_err());
        assert!(McEstimate::from_counts(3, 2, 0).is_err());
    }

    #[test]
    fn lemma2_rejects_upper_branch_and_empty_events() {
        let p = reference();
        assert!(lemma2_empirical_check(&p, 0.5, 100, 1).is_err());
        assert!(lemma2_empirical_check(&p, 0.7, 100, 1).is_err());
        assert!(lemma2_empirical_check(&p, 0.25, 0, 1).is_err());
    }
}
