//! Invariants of the bottom structure and the lent particle calculus,
//! checked over random configurations.

mod common;

use std::sync::Arc;

use common::*;
use lentlab_core::bottom_structure::gamma_of;
use lentlab_core::functional_calculus::*;
use lentlab_core::levy_sim::{coefficient, LevyMeasureSpec, MarkSampler, TotalMass};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

struct Unused;

impl MarkSampler<f64> for Unused {
    fn truncated_mass(&self) -> f64 {
        0.0
    }
    fn first_moment(&self) -> DVector<f64> {
        DVector::zeros(2)
    }
    fn sample_mark(&self, _rng: &mut dyn rand::RngCore) -> lentlab_core::Result<DVector<f64>> {
        unreachable!("zero mass")
    }
}

/// ξ(u) = |u|² I, ψ = k/2 on the open unit disc.
fn radial_spec() -> LevyMeasureSpec<f64> {
    let in_o = |u: &DVector<f64>| u.norm() > 0.0 && u.norm() < 1.0;
    LevyMeasureSpec::new(
        "radial",
        2,
        Arc::new(move |u: &DVector<f64>| if in_o(u) { 2.0 } else { 0.0 }),
        Arc::new(in_o),
        Arc::new(move |u: &DVector<f64>| if in_o(u) { 1.0 } else { 0.0 }),
        coefficient::radial_squared(),
        TotalMass::Finite(0.0),
        0.0,
        Arc::new(Unused),
    )
    .unwrap()
}

fn vec2() -> impl Strategy<Value = DVector<f64>> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| DVector::from_vec(vec![a, b]))
}

fn probe() -> impl Strategy<Value = DVector<f64>> {
    (0.05f64..0.95, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| DVector::from_vec(vec![r * a.cos(), r * a.sin()]))
}

fn rel_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    (a - b).amax() <= tol * (1.0 + a.amax())
}

type Boxed = Box<dyn Functional<f64>>;

fn scalar_catalog() -> Vec<Boxed> {
    vec![
        Box::new(TerminalValue::new(1.0, 1)),
        Box::new(StochasticIntegralPhi::identity(1.0)),
        Box::new(StochasticIntegralPhi::sine(1.0)),
        Box::new(StochasticIntegralPhi::affine(1.0, 0.7, -0.4)),
        Box::new(DoleansPair::new(1.0)),
        Box::new(RunningSup::new(1.0)),
    ]
}

proptest! {
    #![proptest_config(config(256, 7))]

    #[test]
    fn bottom_gamma_bilinear_symmetric(f in vec2(), g in vec2(), h in vec2(), a in -2.0f64..2.0, u in probe()) {
        let s = radial_spec();
        let fg = gamma_of(&s, &f, &g, &u).unwrap();
        prop_assert!((fg - gamma_of(&s, &g, &f, &u).unwrap()).abs() <= 1e-14 * (1.0 + fg.abs()));
        let lhs = gamma_of(&s, &(&f * a + &h), &g, &u).unwrap();
        let rhs = a * fg + gamma_of(&s, &h, &g, &u).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + lhs.abs()));
        prop_assert!(gamma_of(&s, &f, &f, &u).unwrap() >= 0.0);
    }

    #[test]
    fn bottom_chain_rule(u in probe(), a in -2.0f64..2.0) {
        // f(u) = u₁ + u₂², Φ = sin
        let s = radial_spec();
        let grad = DVector::from_vec(vec![1.0, 2.0 * u[1]]);
        let fu = u[0] + u[1] * u[1];
        let d = (a * fu).cos() * a;
        let lhs = gamma_of(&s, &(&grad * d), &(&grad * d), &u).unwrap();
        let rhs = d * d * gamma_of(&s, &grad, &grad, &u).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * (1.0 + rhs.abs()));
    }

    #[test]
    fn annihilation_undoes_creation(c in scalar_config(0, 10), t in 0.001f64..1.0, u in mark()) {
        let um = DVector::from_element(1, u);
        prop_assume!(c.find(t, &um).is_none());
        prop_assume!(c.points().iter().all(|p| p.time != t));
        let added = add_particle(&c, t, &um).unwrap();
        prop_assert_eq!(added.len(), c.len() + 1);
        prop_assert_eq!(remove_particle(&added, t, &um), c);
    }

    #[test]
    fn creation_is_idempotent(c in scalar_config(1, 10), k in 0usize..10) {
        let p = &c.points()[k % c.len()];
        prop_assert_eq!(add_particle(&c, p.time, &p.mark).unwrap(), c.clone());
    }
}

proptest! {
    #![proptest_config(config(120, 11))]

    #[test]
    fn engine_matches_oracle_scalar_catalog(c in scalar_config(1, 10)) {
        let spec = unit_spec();
        for f in scalar_catalog() {
            let g = lent_particle_gamma(&f, &c, &spec).unwrap();
            let o = oracle_gamma(&f, &c, &spec, 1e-5).unwrap();
            prop_assert!(rel_close(g.matrix(), o.matrix(), 1e-6), "{}: {} vs {}", f.name(), g.matrix(), o.matrix());
            g.check_psd().unwrap();
            let sum = g.contributions().iter().fold(DMatrix::zeros(g.dim(), g.dim()), |acc, c| acc + &c.matrix);
            prop_assert_eq!(&sum, g.matrix());
        }
    }

    #[test]
    fn engine_matches_oracle_degenerate_z(c in axes_config(1, 10)) {
        let spec = axes_spec();
        let f = DegenerateSdeZ::new(1.0, [0.3, -0.2, 0.1]);
        let g = lent_particle_gamma(&f, &c, &spec).unwrap();
        let o = oracle_gamma(&f, &c, &spec, 1e-5).unwrap();
        prop_assert!(rel_close(g.matrix(), o.matrix(), 1e-6));
    }

    #[test]
    fn chain_rule_for_quadratic_phi(
        c in scalar_config(1, 10),
        a in prop::collection::vec(-2.0f64..2.0, 4),
        b in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let spec = unit_spec();
        let am = DMatrix::from_row_slice(2, 2, &a);
        let bv = DVector::from_vec(b);
        let inner = DoleansPair::new(1.0);
        let h = Composed::quadratic(DoleansPair::new(1.0), am, bv);
        let grad = h.gradient_at(&c).unwrap();
        let gf = lent_particle_gamma(&inner, &c, &spec).unwrap();
        let expected = grad.dot(&(gf.matrix() * &grad));
        let gh = lent_particle_gamma(&h, &c, &spec).unwrap().matrix()[(0, 0)];
        prop_assert!((gh - expected).abs() <= 1e-8 * expected.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn locality(c in scalar_config(1, 10), t in 0.05f64..0.95) {
        let spec = unit_spec();
        for f in [Box::new(TerminalValue::new(t, 1)) as Boxed, Box::new(StochasticIntegralPhi::sine(t)), Box::new(DoleansPair::new(t))] {
            let g = lent_particle_gamma(&f, &c, &spec).unwrap();
            for (p, k) in c.points().iter().zip(g.contributions()) {
                if p.time > t {
                    prop_assert_eq!(k.matrix.amax(), 0.0);
                }
            }
        }
    }

    #[test]
    fn running_sup_by_direct_argmax(c in scalar_config(1, 10)) {
        let f = RunningSup::new(1.0);
        let (_, tau, side) = f.argmax(&c).unwrap();
        let expected: f64 = c
            .points()
            .iter()
            .filter(|p| match side {
                SupSide::Value => p.time <= tau,
                SupSide::LeftLimit => p.time < tau,
            })
            .map(|p| p.mark[0] * p.mark[0])
            .sum();
        let g = lent_particle_gamma(&f, &c, &unit_spec()).unwrap();
        prop_assert!((g.matrix()[(0, 0)] - expected).abs() < 1e-14);
    }
}
