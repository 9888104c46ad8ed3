//! The discretized interaction operator and the interaction functional.
//!
//! Collocation at the quadrature nodes turns the integral operator
//! `(Rf)(x) = ∫_Q R(|x−y|) f(y) dy` into the weighted matrix action
//! `(Rf)_a = Σ_b K[a][b] · w_b · f_b` with `K[a][b] = R(|x_a − x_b|)`, and
//! the interaction functional into the double sum
//! `I(f,g) = Σ_a Σ_b w_a f_a K[a][b] w_b g_b`. The matrix `K` itself is
//! symmetric by construction (each unordered pair is evaluated once).

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{distance, DomainGrid, Field};
use crate::kernel::Kernel;

#[derive(Debug)]
pub struct OperatorMatrix {
    grid: Arc<DomainGrid>,
    kernel: Kernel,
    entries: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    fn check_grid(&self, f: &Field) -> Result<()> {
        if Arc::ptr_eq(&self.grid, f.grid()) || self.grid.same_layout(f.grid()) {
            Ok(())
        } else {
            Err(Error::Contract(
                "field does not live on the operator's grid".into(),
            ))
        }
    }
}

/// Assemble K[a][b] = R(|x_a − x_b|) densely.
pub fn assemble_operator(grid: &Arc<DomainGrid>, kernel: Kernel) -> Result<OperatorMatrix> {
    let n = grid.node_count();
    let nodes = grid.nodes();
    let mut entries = DMatrix::zeros(n, n);
    let diag = kernel.eval(0.0)?;
    for a in 0..n {
        entries[(a, a)] = diag;
        for b in 0..a {
            let v = kernel.eval(distance(&nodes[a], &nodes[b]))?;
            entries[(a, b)] = v;
            entries[(b, a)] = v;
        }
    }
    Ok(OperatorMatrix {
        grid: grid.clone(),
        kernel,
        entries,
    })
}

/// (Rf)_a = Σ_b K[a][b] · w_b · f_b.
pub fn apply_operator(m: &OperatorMatrix, f: &Field) -> Result<Field> {
    m.check_grid(f)?;
    let n = m.grid.node_count();
    let w = m.grid.weights();
    let fv = f.values();
    let weighted: Vec<f64> = (0..n).map(|b| w[b] * fv[b]).collect();
    let wf = nalgebra::DVector::from_vec(weighted);
    let out = &m.entries * wf;
    Field::new(m.grid.clone(), out.data.into())
}

/// The interaction functional I(f, g) = (Rf, g), symmetric and bilinear.
pub fn interaction_force(m: &OperatorMatrix, f: &Field, g: &Field) -> Result<f64> {
    let rf = apply_operator(m, f)?;
    rf.inner_product(g)
}

/// R applied to the constant-1 distribution.
pub fn r_one(m: &OperatorMatrix) -> Field {
    let one = Field::constant(m.grid.clone(), 1.0).expect("constant field on own grid");
    apply_operator(m, &one).expect("operator application on own grid")
}

/// max over nodes of |R1| — the empirical bound constant for the nested
/// family (|R1| only grows with the domain, so the largest domain of a
/// sweep bounds the rest).
pub fn r_one_max(m: &OperatorMatrix) -> f64 {
    r_one(m)
        .values()
        .iter()
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, scale_domain};
    use crate::rng::SpecLcg;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn gaussian_reference() -> Kernel {
        Kernel::gaussian(1.0, 0.5).unwrap()
    }

    fn random_field(grid: &Arc<DomainGrid>, rng: &mut SpecLcg) -> Field {
        let values = (0..grid.node_count()).map(|_| rng.next_symmetric()).collect();
        Field::new(grid.clone(), values).unwrap()
    }

    #[test]
    fn single_node_closed_forms() {
        let g = build_grid(1, 1.0, 1, 1.0).unwrap();
        let k = gaussian_reference();
        let m = assemble_operator(&g, k).unwrap();
        assert_eq!(m.entries().nrows(), 1);
        assert_eq!(m.entries()[(0, 0)], k.eval(0.0).unwrap());

        // (Rf)₁ = R(0)·w·f₁ and R1 = R(0)·w on one node.
        let f = Field::new(g.clone(), vec![2.0]).unwrap();
        let rf = apply_operator(&m, &f).unwrap();
        assert_relative_eq!(rf.values()[0], -1.0 * 1.0 * 2.0, max_relative = 1e-15);
        assert_relative_eq!(r_one(&m).values()[0], -1.0, max_relative = 1e-15);
    }

    #[test]
    fn two_nodes_share_the_radial_value() {
        let g = build_grid(1, 1.0, 2, 1.0).unwrap();
        let k = gaussian_reference();
        let m = assemble_operator(&g, k).unwrap();
        let d = 0.5;
        let expected = k.eval(d).unwrap();
        assert_eq!(m.entries()[(0, 1)], expected);
        assert_eq!(m.entries()[(1, 0)], expected);
    }

    #[test]
    fn point_charge_interaction_closed_form() {
        // Two single-cell charges: I = w₁w₂q₁q₂R(d).
        let g = build_grid(1, 1.0, 2, 1.0).unwrap();
        let k = gaussian_reference();
        let m = assemble_operator(&g, k).unwrap();
        let q1 = Field::new(g.clone(), vec![3.0, 0.0]).unwrap();
        let q2 = Field::new(g.clone(), vec![0.0, -2.0]).unwrap();
        let w = g.weights()[0];
        let expected = w * w * 3.0 * (-2.0) * k.eval(0.5).unwrap();
        assert_relative_eq!(
            interaction_force(&m, &q1, &q2).unwrap(),
            expected,
            max_relative = 1e-14
        );
    }

    #[test]
    fn symmetry_self_adjointness_and_bilinearity() {
        let g = build_grid(2, 1.0, 5, 1.0).unwrap();
        let m = assemble_operator(&g, gaussian_reference()).unwrap();
        let mut rng = SpecLcg::new(11);
        for _ in 0..10 {
            let f = random_field(&g, &mut rng);
            let h = random_field(&g, &mut rng);
            let i_fg = interaction_force(&m, &f, &h).unwrap();
            let i_gf = interaction_force(&m, &h, &f).unwrap();
            assert_relative_eq!(i_fg, i_gf, max_relative = 1e-12);

            let lhs = apply_operator(&m, &f).unwrap().inner_product(&h).unwrap();
            let rhs = f.inner_product(&apply_operator(&m, &h).unwrap()).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);

            let k = random_field(&g, &mut rng);
            let combo = f.add_scaled(1.7, &h).unwrap();
            let left = interaction_force(&m, &combo, &k).unwrap();
            let right = interaction_force(&m, &f, &k).unwrap()
                + 1.7 * interaction_force(&m, &h, &k).unwrap();
            assert_abs_diff_eq!(left, right, epsilon = 1e-12 * left.abs().max(1.0));
        }
    }

    #[test]
    fn negative_definiteness_on_random_fields() {
        let g = build_grid(3, 1.0, 4, 1.0).unwrap();
        for kernel in [
            gaussian_reference(),
            Kernel::inverse_multiquadric(1.0, 0.5).unwrap(),
        ] {
            let m = assemble_operator(&g, kernel).unwrap();
            let mut rng = SpecLcg::new(3);
            for _ in 0..50 {
                let f = random_field(&g, &mut rng);
                let self_energy = interaction_force(&m, &f, &f).unwrap();
                assert!(
                    self_energy < 0.0,
                    "I(f,f) must be negative, got {self_energy}"
                );
            }
        }
    }

    #[test]
    fn r_one_magnitude_grows_with_domain_and_is_bounded_by_largest() {
        let base = build_grid(3, 1.0, 4, 1.0).unwrap();
        let kernel = gaussian_reference();
        let scales = [1.0, 0.5, 0.25, 0.125];
        let maxima: Vec<f64> = scales
            .iter()
            .map(|&r| {
                let g = scale_domain(&base, r).unwrap();
                r_one_max(&assemble_operator(&g, kernel).unwrap())
            })
            .collect();
        for pair in maxima.windows(2) {
            assert!(
                pair[0] >= pair[1],
                "max|R1| must not grow as the domain shrinks: {maxima:?}"
            );
        }
        let c0 = maxima[0];
        for m in &maxima {
            assert!(*m <= c0 + 1e-15);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let g1 = build_grid(1, 1.0, 4, 1.0).unwrap();
        let g2 = build_grid(1, 1.0, 8, 1.0).unwrap();
        let m = assemble_operator(&g1, gaussian_reference()).unwrap();
        let f = Field::constant(g2, 1.0).unwrap();
        assert!(matches!(apply_operator(&m, &f), Err(Error::Contract(_))));
    }
}
