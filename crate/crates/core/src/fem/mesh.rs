use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Sorted node set on `[0, 1]`; `h_max` is the largest element length.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
    h_max: f64,
    seed: u64,
    jitter: f64,
}

impl Mesh1D {
    /// Mesh from explicit nodes. Nodes must start at 0, end at 1 and increase strictly.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 || nodes[nodes.len() - 1] != 1.0 {
            return Err(Error::invalid("nodes", "mesh must span [0, 1] with at least one element"));
        }
        if let Some(w) = nodes.windows(2).find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(Error::invalid(
                "nodes",
                format!("nodes must increase strictly, found {} then {}", w[0], w[1]),
            ));
        }
        let h_max = max_gap(&nodes);
        Ok(Self {
            nodes,
            h_max,
            seed: 0,
            jitter: 0.0,
        })
    }

    pub fn uniform(n_elements: usize) -> Result<Self> {
        build_mesh(n_elements, 0.0, 0)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `(left, right)` end points of element `e`.
    pub fn element(&self, e: usize) -> (f64, f64) {
        (self.nodes[e], self.nodes[e + 1])
    }

    pub fn elements(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }
}

fn max_gap(nodes: &[f64]) -> f64 {
    nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Uniform mesh of `n_elements` cells with every interior node shifted by an
/// independent uniform offset in `[-jitter * h, +jitter * h]`, `h = 1 / n`.
pub fn build_mesh(n_elements: usize, jitter: f64, seed: u64) -> Result<Mesh1D> {
    if n_elements == 0 {
        return Err(Error::invalid("n_elements", "need at least one element"));
    }
    if !(0.0..0.5).contains(&jitter) {
        return Err(Error::invalid(
            "jitter",
            format!("jitter must lie in [0, 0.5), got {jitter}"),
        ));
    }
    let h = 1.0 / n_elements as f64;
    let mut nodes: Vec<f64> = (0..=n_elements).map(|i| i as f64 * h).collect();
    nodes[n_elements] = 1.0;
    if jitter > 0.0 {
        for (i, x) in nodes.iter_mut().enumerate().take(n_elements).skip(1) {
            let mut rng = CounterRng::for_trial(seed, i as u64);
            *x += rng.next_symmetric() * jitter * h;
        }
    }
    let h_max = max_gap(&nodes);
    Ok(Mesh1D {
        nodes,
        h_max,
        seed,
        jitter,
    })
}
