//! Closed-form laws for the probability that the higher-order element is at
//! least as accurate as the lower-order one at mesh size `h`.
//!
//! Both laws are driven by a pair of a priori error bounds `C_k h^k` and
//! `C_m h^m` (k < m) and their crossover `h*` where the two bounds meet.

use crate::error::{Error, Result};

/// A priori error bound `constant * h^order` for one element family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorLaw {
    order: u32,
    constant: f64,
}

impl ErrorLaw {
    pub fn new(order: u32, constant: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::invalid("order", "polynomial order must be at least 1"));
        }
        if !(constant.is_finite() && constant > 0.0) {
            return Err(Error::invalid(
                "constant",
                format!("error constant must be positive and finite, got {constant}"),
            ));
        }
        Ok(Self { order, constant })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Bound value `C h^k`.
    pub fn bound(&self, h: f64) -> f64 {
        self.constant * h.powi(self.order as i32)
    }
}

/// Ordered pair of error laws with `low.order < high.order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementPair {
    low: ErrorLaw,
    high: ErrorLaw,
    h_star: f64,
}

impl ElementPair {
    pub fn new(low: ErrorLaw, high: ErrorLaw) -> Result<Self> {
        let h_star = crossover_h_star(&low, &high)?;
        Ok(Self { low, high, h_star })
    }

    /// Shorthand for `ElementPair::new(ErrorLaw::new(k, ck)?, ErrorLaw::new(m, cm)?)`.
    pub fn from_parts(c_low: f64, order_low: u32, c_high: f64, order_high: u32) -> Result<Self> {
        Self::new(
            ErrorLaw::new(order_low, c_low)?,
            ErrorLaw::new(order_high, c_high)?,
        )
    }

    pub fn low(&self) -> &ErrorLaw {
        &self.low
    }

    pub fn high(&self) -> &ErrorLaw {
        &self.high
    }

    pub fn h_star(&self) -> f64 {
        self.h_star
    }

    /// Order gap `m - k`, always at least 1.
    pub fn gap(&self) -> u32 {
        self.high.order - self.low.order
    }

    /// Same pair with both constants multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(
            ErrorLaw::new(self.low.order, self.low.constant * factor)?,
            ErrorLaw::new(self.high.order, self.high.constant * factor)?,
        )
    }
}

/// Which probability law to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    TwoStep,
    Sigmoid,
}

impl Law {
    pub fn eval(self, pair: &ElementPair, h: f64) -> Result<f64> {
        match self {
            Law::TwoStep => prob_two_step(pair, h),
            Law::Sigmoid => prob_sigmoid(pair, h),
        }
    }
}

/// Tabulated probability law over an increasing grid of mesh sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityCurve {
    pub pair: ElementPair,
    pub law: Law,
    pub samples: Vec<(f64, f64)>,
}

/// Mesh size where `C_k h^k = C_m h^m`, i.e. `(C_k / C_m)^(1 / (m - k))`.
///
/// Evaluated in log space so that constant ratios spanning many decades do
/// not overflow.
pub fn crossover_h_star(low: &ErrorLaw, high: &ErrorLaw) -> Result<f64> {
    if low.order >= high.order {
        return Err(Error::OrderMismatch {
            low: low.order,
            high: high.order,
        });
    }
    let gap = (high.order - low.order) as f64;
    Ok(((low.constant.ln() - high.constant.ln()) / gap).exp())
}

fn check_h(h: f64) -> Result<()> {
    if h.is_finite() && h > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("h", format!("mesh size must be positive and finite, got {h}")))
    }
}

/// Step law: 1 below `h*`, 0 above, and 1/2 exactly at `h*`.
pub fn prob_two_step(pair: &ElementPair, h: f64) -> Result<f64> {
    check_h(h)?;
    let hs = pair.h_star;
    Ok(if h < hs {
        1.0
    } else if h > hs {
        0.0
    } else {
        0.5
    })
}

/// Sigmoid law under independent uniform errors:
/// `1 - (h/h*)^(m-k) / 2` for `h <= h*`, `(h*/h)^(m-k) / 2` for `h >= h*`.
pub fn prob_sigmoid(pair: &ElementPair, h: f64) -> Result<f64> {
    check_h(h)?;
    let (value, _) = sigmoid_parts(pair, h);
    Ok(value)
}

/// `1 - prob_sigmoid(pair, h)` evaluated without cancellation.
///
/// This is the probability that the lower-order element is strictly more
/// accurate. Near `h -> 0` it is far below the resolution of `1 - p`.
pub fn prob_sigmoid_complement(pair: &ElementPair, h: f64) -> Result<f64> {
    check_h(h)?;
    let (_, complement) = sigmoid_parts(pair, h);
    Ok(complement)
}

fn sigmoid_parts(pair: &ElementPair, h: f64) -> (f64, f64) {
    let gap = pair.gap() as i32;
    let hs = pair.h_star;
    let (p, q) = if h <= hs {
        let tail = 0.5 * (h / hs).powi(gap);
        (1.0 - tail, tail)
    } else {
        let head = 0.5 * (hs / h).powi(gap);
        (head, 1.0 - head)
    };
    (p.clamp(0.0, 1.0), q.clamp(0.0, 1.0))
}

/// Evaluates `law` on every point of `h_grid`.
pub fn tabulate_curve(pair: &ElementPair, h_grid: &[f64], law: Law) -> Result<ProbabilityCurve> {
    if h_grid.is_empty() {
        return Err(Error::invalid("h_grid", "grid is empty"));
    }
    if let Some(w) = h_grid.windows(2).find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::invalid(
            "h_grid",
            format!("grid must be strictly increasing, found {} then {}", w[0], w[1]),
        ));
    }
    let samples = h_grid
        .iter()
        .map(|&h| law.eval(pair, h).map(|p| (h, p)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbabilityCurve {
        pair: *pair,
        law,
        samples,
    })
}

/// Mesh size where a sampled probability curve falls through 1/2.
///
/// `samples` are `(h, p)` pairs sorted by increasing `h`. Returns the first
/// crossing from `p >= 1/2` to `p < 1/2`, interpolated linearly in `ln h`,
/// or `None` when the samples never cross.
pub fn half_crossing(samples: &[(f64, f64)]) -> Option<f64> {
    samples.windows(2).find_map(|w| {
        let ((h0, p0), (h1, p1)) = (w[0], w[1]);
        if p0 >= 0.5 && p1 < 0.5 {
            let t = (p0 - 0.5) / (p0 - p1);
            Some((h0.ln() + t * (h1.ln() - h0.ln())).exp())
        } else {
            None
        }
    })
}

/// `points` log-spaced values from `h_min` to `h_max` inclusive.
pub fn log_grid(h_min: f64, h_max: f64, points: usize) -> Result<Vec<f64>> {
    check_h(h_min)?;
    check_h(h_max)?;
    if points == 0 {
        return Err(Error::invalid("points", "need at least one grid point"));
    }
    if points == 1 {
        return Ok(vec![h_min]);
    }
    if h_min.partial_cmp(&h_max) != Some(std::cmp::Ordering::Less) {
        return Err(Error::invalid("h_max", format!("need h_min < h_max, got {h_min} >= {h_max}")));
    }
    let (a, b) = (h_min.ln(), h_max.ln());
    let step = (b - a) / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| (a + step * i as f64).exp()).collect();
    grid[0] = h_min;
    grid[points - 1] = h_max;
    Ok(grid)
}
