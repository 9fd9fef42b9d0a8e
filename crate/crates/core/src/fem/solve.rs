use crate::error::{Error, Result};
use crate::fem::banded::SymmetricBanded;
use crate::fem::basis::{LagrangeBasis, Tabulation};
use crate::fem::mesh::Mesh1D;
use crate::fem::problem::Problem1D;
use crate::fem::quadrature::GaussRule;

pub const MIN_ORDER: u32 = 1;
pub const MAX_ORDER: u32 = 10;

/// Galerkin solution with degree-`order` Lagrange elements.
///
/// Coefficient `e * order + i` is the nodal value at `x_e + (i / order) h_e`,
/// so coefficients are ordered by position and shared vertices appear once.
#[derive(Debug, Clone, PartialEq)]
pub struct FemSolution {
    pub order: u32,
    pub mesh: Mesh1D,
    pub coefficients: Vec<f64>,
}

impl FemSolution {
    /// `(u_h(x), u_h'(x))` at reference coordinate `xi` of element `e`.
    pub fn eval_local(&self, basis: &LagrangeBasis, e: usize, xi: f64) -> (f64, f64) {
        let (a, b) = self.mesh.element(e);
        let k = self.order as usize;
        let dofs = &self.coefficients[e * k..=e * k + k];
        let v = (0..=k).map(|i| dofs[i] * basis.value(i, xi)).sum();
        let d: f64 = (0..=k).map(|i| dofs[i] * basis.derivative(i, xi)).sum();
        (v, d / (b - a))
    }
}

fn check_order(order: u32) -> Result<()> {
    if (MIN_ORDER..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(Error::OrderOutOfRange {
            order,
            min: MIN_ORDER,
            max: MAX_ORDER,
        })
    }
}

/// Gauss points used for element matrices and loads: `ceil((2k + 2) / 2) + 2`.
pub fn assembly_points(order: u32) -> usize {
    (2 * order as usize + 2).div_ceil(2) + 2
}

/// Gauss points used for error integrals: `k + 5`.
pub fn error_points(order: u32) -> usize {
    order as usize + 5
}

/// Element stiffness matrices and load vectors, indexed by global dof.
struct Assembly {
    stiffness: SymmetricBanded,
    load: Vec<f64>,
}

fn assemble(mesh: &Mesh1D, order: u32, problem: &Problem1D) -> Assembly {
    let k = order as usize;
    let n_dofs = mesh.n_elements() * k + 1;
    let basis = LagrangeBasis::new(order);
    let rule = GaussRule::new(assembly_points(order));
    let tab = Tabulation::new(&basis, &rule.points);
    let mut stiffness = SymmetricBanded::zeros(n_dofs, k);
    let mut load = vec![0.0; n_dofs];
    for (e, (a, b)) in mesh.elements().enumerate() {
        let jac = b - a;
        let base = e * k;
        for (q, (xi, w)) in rule.iter().enumerate() {
            let f = problem.source(a + xi * jac);
            let (phi, dphi) = (&tab.values[q], &tab.derivatives[q]);
            for i in 0..=k {
                load[base + i] += w * f * phi[i] * jac;
                for j in 0..=i {
                    stiffness.add(base + i, base + j, w * dphi[i] * dphi[j] / jac);
                }
            }
        }
    }
    Assembly { stiffness, load }
}

/// Solves `-u'' = f`, `u(0) = u(1) = 0` with degree-`order` Lagrange elements.
pub fn assemble_solve(mesh: &Mesh1D, order: u32, problem: &Problem1D) -> Result<FemSolution> {
    check_order(order)?;
    let k = order as usize;
    let n_dofs = mesh.n_elements() * k + 1;
    let Assembly { stiffness, load } = assemble(mesh, order, problem);

    // drop the two Dirichlet dofs; the band is unchanged
    let interior = n_dofs - 2;
    let mut reduced = SymmetricBanded::zeros(interior, k);
    for i in 0..interior {
        for j in i.saturating_sub(k)..=i {
            let v = stiffness.get(i + 1, j + 1);
            if v != 0.0 {
                reduced.add(i, j, v);
            }
        }
    }
    let mut coefficients = vec![0.0; n_dofs];
    if interior > 0 {
        let x = reduced.cholesky()?.solve(&load[1..n_dofs - 1]);
        coefficients[1..n_dofs - 1].copy_from_slice(&x);
    }
    Ok(FemSolution {
        order,
        mesh: mesh.clone(),
        coefficients,
    })
}

/// `(|| u_h - u ||_1, | u_h - u |_1)` by per-element Gauss quadrature.
pub fn h1_error(solution: &FemSolution, problem: &Problem1D) -> (f64, f64) {
    let k = solution.order as usize;
    let basis = LagrangeBasis::new(solution.order);
    let rule = GaussRule::new(error_points(solution.order));
    let tab = Tabulation::new(&basis, &rule.points);
    let (mut l2, mut semi) = (0.0, 0.0);
    for (e, (a, b)) in solution.mesh.elements().enumerate() {
        let jac = b - a;
        let dofs = &solution.coefficients[e * k..=e * k + k];
        for (q, (xi, w)) in rule.iter().enumerate() {
            let x = a + xi * jac;
            let uh: f64 = dofs.iter().zip(&tab.values[q]).map(|(c, p)| c * p).sum();
            let duh: f64 = dofs.iter().zip(&tab.derivatives[q]).map(|(c, p)| c * p).sum::<f64>() / jac;
            l2 += w * jac * (uh - problem.exact(x)).powi(2);
            semi += w * jac * (duh - problem.derivative(x)).powi(2);
        }
    }
    ((l2 + semi).sqrt(), semi.sqrt())
}

/// Largest `|l(phi_i) - a(u_h, phi_i)|` over interior basis functions,
/// divided by the Euclidean norm of the load vector.
pub fn galerkin_residual(solution: &FemSolution, problem: &Problem1D) -> f64 {
    let Assembly { stiffness, load } = assemble(&solution.mesh, solution.order, problem);
    let au = stiffness.mul_vec(&solution.coefficients);
    let n = load.len();
    let worst = (1..n - 1)
        .map(|i| (load[i] - au[i]).abs())
        .fold(0.0, f64::max);
    let norm = load.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        worst
    } else {
        worst / norm
    }
}
