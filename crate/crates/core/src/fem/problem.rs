//! Manufactured Poisson problems `-u'' = f` on `(0, 1)` with `u(0) = u(1) = 0`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SeminormFn = Arc<dyn Fn(u32) -> Option<f64> + Send + Sync>;

/// A Poisson problem with known exact solution.
#[derive(Clone)]
pub struct Problem1D {
    name: String,
    exact: ScalarFn,
    derivative: ScalarFn,
    source: ScalarFn,
    seminorm: Option<SeminormFn>,
}

impl fmt::Debug for Problem1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem1D").field("name", &self.name).finish_non_exhaustive()
    }
}

impl Problem1D {
    /// User-supplied problem; the exact solution must vanish at both ends.
    pub fn custom<U, D, F>(name: impl Into<String>, exact: U, derivative: D, source: F) -> Result<Self>
    where
        U: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(name.into(), Arc::new(exact), Arc::new(derivative), Arc::new(source), None)
    }

    fn build(
        name: String,
        exact: ScalarFn,
        derivative: ScalarFn,
        source: ScalarFn,
        seminorm: Option<SeminormFn>,
    ) -> Result<Self> {
        for x in [0.0, 1.0] {
            let value = exact(x);
            if value.is_nan() || value.abs() > 1e-12 {
                return Err(Error::BoundaryCondition { x, value });
            }
        }
        Ok(Self {
            name,
            exact,
            derivative,
            source,
            seminorm,
        })
    }

    /// `u = sin(pi x)`.
    pub fn sine() -> Self {
        Self::sine_mode(1).expect("mode 1 is valid")
    }

    /// `u = sin(a pi x)` for a positive integer frequency `a`.
    pub fn sine_mode(a: u32) -> Result<Self> {
        if a == 0 {
            return Err(Error::invalid("mode", "frequency must be a positive integer"));
        }
        let w = a as f64 * PI;
        let name = if a == 1 { "sin".to_string() } else { format!("sin{a}") };
        Self::build(
            name,
            Arc::new(move |x| (w * x).sin()),
            Arc::new(move |x| w * (w * x).cos()),
            Arc::new(move |x| w * w * (w * x).sin()),
            Some(Arc::new(move |s| {
                Some(if s == 0 {
                    std::f64::consts::FRAC_1_SQRT_2
                } else {
                    w.powi(s as i32) * std::f64::consts::FRAC_1_SQRT_2
                })
            })),
        )
    }

    /// `u = x (1 - x)`, `f = 2`.
    pub fn quadratic() -> Self {
        Self::build(
            "quadratic".into(),
            Arc::new(|x| x * (1.0 - x)),
            Arc::new(|x| 1.0 - 2.0 * x),
            Arc::new(|_| 2.0),
            Some(Arc::new(|s| {
                Some(match s {
                    0 => (1.0f64 / 30.0).sqrt(),
                    1 => (1.0f64 / 3.0).sqrt(),
                    2 => 2.0,
                    _ => 0.0,
                })
            })),
        )
        .expect("x(1-x) vanishes at both ends")
    }

    /// `u = x^alpha (1 - x)` for real `alpha >= 1`.
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 1.0) {
            return Err(Error::invalid("alpha", format!("need alpha >= 1, got {alpha}")));
        }
        let a = alpha;
        Self::build(
            format!("power{a}"),
            Arc::new(move |x| x.powf(a) * (1.0 - x)),
            Arc::new(move |x| a * x.powf(a - 1.0) - (a + 1.0) * x.powf(a)),
            Arc::new(move |x| {
                let d2 = a * (a - 1.0) * x.powf(a - 2.0) - (a + 1.0) * a * x.powf(a - 1.0);
                -d2
            }),
            Some(Arc::new(move |s| power_seminorm(a, s))),
        )
    }

    /// Library problem by name: `sin`, `sin:<a>`, `quadratic`, `power:<alpha>`.
    pub fn by_name(spec: &str) -> Result<Self> {
        let (head, arg) = match spec.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (spec, None),
        };
        let unknown = || Error::UnknownProblem(spec.to_string());
        match (head, arg) {
            ("sin", None) => Ok(Self::sine()),
            ("sin", Some(a)) => Self::sine_mode(a.parse().map_err(|_| unknown())?),
            ("quadratic", None) => Ok(Self::quadratic()),
            ("power", Some(a)) => Self::power(a.parse().map_err(|_| unknown())?),
            _ => Err(unknown()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn exact(&self, x: f64) -> f64 {
        (self.exact)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn source(&self, x: f64) -> f64 {
        (self.source)(x)
    }
}

/// Falling factorial `a (a - 1) ... (a - s + 1)`.
fn falling(a: f64, s: u32) -> f64 {
    (0..s).map(|i| a - i as f64).product()
}

/// `|x^a - x^(a+1)|_s` on `(0, 1)`, or `None` when the integral diverges.
fn power_seminorm(a: f64, s: u32) -> Option<f64> {
    let sf = s as f64;
    let c1 = falling(a, s);
    let c2 = falling(a + 1.0, s);
    // u^(s) = c1 x^(a-s) - c2 x^(a+1-s); integrate the square termwise
    let mut total = 0.0;
    for (coef, p) in [(c1 * c1, 2.0 * (a - sf)), (-2.0 * c1 * c2, 2.0 * (a - sf) + 1.0), (c2 * c2, 2.0 * (a - sf) + 2.0)] {
        if coef == 0.0 {
            continue;
        }
        if p + 1.0 <= 0.0 {
            return None;
        }
        total += coef / (p + 1.0);
    }
    Some(total.max(0.0).sqrt())
}

/// Analytic `H^s` seminorm `|u|_s` of the problem's exact solution.
pub fn seminorm_reference(problem: &Problem1D, s: u32) -> Result<f64> {
    let unsupported = || Error::UnsupportedSeminorm {
        problem: problem.name.clone(),
        order: s,
    };
    let f = problem.seminorm.as_ref().ok_or_else(unsupported)?;
    f(s).ok_or_else(unsupported)
}
