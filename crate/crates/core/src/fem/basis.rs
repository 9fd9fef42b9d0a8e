//! Lagrange shape functions of arbitrary degree on the reference interval.

/// Degree-`k` Lagrange basis on `[0, 1]` with equispaced nodes `i / k`.
///
/// Local index `i` is the function equal to one at node `i / k`, so local
/// indices run left to right and index `0` and `k` are the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
    denominators: Vec<f64>,
}

impl LagrangeBasis {
    pub fn new(degree: u32) -> Self {
        assert!(degree >= 1, "Lagrange basis needs degree >= 1");
        let k = degree as usize;
        let nodes: Vec<f64> = (0..=k).map(|i| i as f64 / k as f64).collect();
        let denominators = (0..=k)
            .map(|i| {
                (0..=k)
                    .filter(|&j| j != i)
                    .map(|j| nodes[i] - nodes[j])
                    .product()
            })
            .collect();
        Self { nodes, denominators }
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Values of every shape function at `xi`.
    pub fn values(&self, xi: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i, xi)).collect()
    }

    /// Reference derivatives `d phi_i / d xi` of every shape function at `xi`.
    pub fn derivatives(&self, xi: f64) -> Vec<f64> {
        (0..self.len()).map(|i| self.derivative(i, xi)).collect()
    }

    pub fn value(&self, i: usize, xi: f64) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &xj)| xi - xj)
            .product::<f64>()
            / self.denominators[i]
    }

    pub fn derivative(&self, i: usize, xi: f64) -> f64 {
        // product rule, dropping one factor at a time
        let n = self.len();
        let mut sum = 0.0;
        for l in (0..n).filter(|&l| l != i) {
            let mut term = 1.0;
            for j in (0..n).filter(|&j| j != i && j != l) {
                term *= xi - self.nodes[j];
            }
            sum += term;
        }
        sum / self.denominators[i]
    }
}

/// Shape function values and reference derivatives tabulated at quadrature points.
#[derive(Debug, Clone)]
pub struct Tabulation {
    /// `values[q][i]`
    pub values: Vec<Vec<f64>>,
    /// `derivatives[q][i]`
    pub derivatives: Vec<Vec<f64>>,
}

impl Tabulation {
    pub fn new(basis: &LagrangeBasis, points: &[f64]) -> Self {
        Self {
            values: points.iter().map(|&x| basis.values(x)).collect(),
            derivatives: points.iter().map(|&x| basis.derivatives(x)).collect(),
        }
    }
}
