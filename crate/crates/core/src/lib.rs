//! Probabilistic comparison of the accuracy of two Lagrange finite elements
//! `P_k` and `P_m` (`k < m`).
//!
//! * [`law`]: closed-form two-step and sigmoid laws over the crossover `h*`.
//! * [`oracle`]: trapezium geometry, midpoint-rule and Monte Carlo checks of the sigmoid law.
//! * [`fem`]: a 1D finite element laboratory producing real error samples.

pub mod error;
pub mod fem;
pub mod format;
pub mod law;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};
pub use law::{
    crossover_h_star, half_crossing, prob_sigmoid, prob_sigmoid_complement, prob_two_step, tabulate_curve,
    ElementPair, ErrorLaw, Law, ProbabilityCurve,
};
pub use oracle::{
    lemma2_empirical_check, mc_estimate, numeric_area_oracle, trapezium_ratio, Lemma2Report,
    McEstimate, UniformErrorSample,
};
