//! Property tests for the structural invariants of the solver stack.

use std::collections::BTreeMap;

use nematic_core::numerics::{legendre_p, QuadratureRule};
use nematic_core::potential::{check_constant_mean, effective_potential, AxisymmetricPotential};
use nematic_core::sce::{f_scalar, order_parameter, sce_map, OrientationDensity};
use nematic_core::HALF_SPHERE_AREA;
use proptest::prelude::*;

fn rule64() -> QuadratureRule {
    QuadratureRule::gauss(64).unwrap()
}

/// Densities from the exponential family e^{a P2 + b P4}, normalized.
fn density(a: f64, b: f64, rule: &QuadratureRule) -> OrientationDensity {
    let values: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&u| {
            (a * legendre_p(2, u).unwrap() + b * legendre_p(4, u).unwrap()).exp()
        })
        .collect();
    OrientationDensity::from_unnormalized(values, rule.clone()).unwrap()
}

/// Random even potential with c0 = 1 and bounded higher coefficients.
fn even_potential(c2: f64, c4: f64, c6: f64) -> AxisymmetricPotential {
    let mut coeffs = BTreeMap::new();
    coeffs.insert(0, 1.0);
    coeffs.insert(2, c2);
    coeffs.insert(4, c4);
    coeffs.insert(6, c6);
    AxisymmetricPotential::from_coeffs(coeffs, "random-even").unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sce_map_preserves_the_simplex(
        beta in 1e-3..300.0_f64,
        a in -6.0..6.0_f64,
        b in -3.0..3.0_f64,
    ) {
        let rule = rule64();
        let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
        let nu = density(a, b, &rule);
        let image = sce_map(beta, &pot, &nu).unwrap();
        prop_assert!(image.values().iter().all(|&v| v >= 0.0));
        let mass = HALF_SPHERE_AREA
            * rule.weights().iter().zip(image.values()).map(|(&w, &v)| w * v).sum::<f64>();
        prop_assert!((mass - 1.0).abs() <= 1e-12, "mass {mass}");
    }

    #[test]
    fn effective_potential_identity_for_maier_saupe(
        a in -6.0..6.0_f64,
        b in -3.0..3.0_f64,
    ) {
        // H_nu(theta) = 1 - <P2>_nu P2(cos theta) pointwise.
        let rule = rule64();
        let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
        let nu = density(a, b, &rule);
        let h = effective_potential(&pot, &nu).unwrap();
        let p2_moment = h.legendre_moments[&2];
        for (i, &u) in rule.nodes().iter().enumerate() {
            let expect = 1.0 - p2_moment * legendre_p(2, u).unwrap();
            prop_assert!((h.values[i] - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn legendre_moments_match_direct_quadrature(
        a in -6.0..6.0_f64,
        c2 in -2.0..2.0_f64,
        c4 in -1.0..1.0_f64,
    ) {
        let rule = rule64();
        let pot = even_potential(c2, c4, 0.25);
        let nu = density(a, 0.5, &rule);
        let h = effective_potential(&pot, &nu).unwrap();
        for (&l, &moment) in &h.legendre_moments {
            let direct = HALF_SPHERE_AREA
                * rule
                    .nodes()
                    .iter()
                    .zip(rule.weights())
                    .zip(nu.values())
                    .map(|((&u, &w), &v)| w * legendre_p(l, u).unwrap() * v)
                    .sum::<f64>();
            prop_assert!((moment - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn scalar_map_range_stays_in_zero_one(
        beta in 1e-3..500.0_f64,
        xi in 0.0..1.0_f64,
    ) {
        let rule = rule64();
        let f = f_scalar(beta, xi, &rule);
        prop_assert!(f > 0.0 && f < 1.0, "F({beta}, {xi}) = {f}");
    }

    #[test]
    fn even_kernels_are_symmetric_in_cos_gamma(
        c2 in -2.0..2.0_f64,
        c4 in -1.0..1.0_f64,
        c6 in -0.5..0.5_f64,
        x in 0.0..1.0_f64,
    ) {
        let pot = even_potential(c2, c4, c6);
        prop_assert!((pot.evaluate(x) - pot.evaluate(-x)).abs() <= 1e-14);
    }

    #[test]
    fn constant_mean_holds_for_every_even_potential(
        c2 in -2.0..2.0_f64,
        c4 in -1.0..1.0_f64,
        c6 in -0.5..0.5_f64,
    ) {
        let rule = rule64();
        let pot = even_potential(c2, c4, c6);
        let check = check_constant_mean(&pot, &rule, 1e-11);
        prop_assert!(check.passed, "deviation {}", check.max_deviation);
    }

    #[test]
    fn isotropic_state_is_fixed_for_every_even_potential(
        beta in 0.01..100.0_f64,
        c2 in -2.0..2.0_f64,
        c4 in -1.0..1.0_f64,
    ) {
        let rule = rule64();
        let pot = even_potential(c2, c4, 0.0);
        let uniform = OrientationDensity::uniform(rule);
        let image = sce_map(beta, &pot, &uniform).unwrap();
        prop_assert!(uniform.sup_distance(&image) <= 1e-12);
    }

    #[test]
    fn order_parameter_stays_in_unit_interval(
        a in -8.0..8.0_f64,
        b in -4.0..4.0_f64,
    ) {
        let rule = rule64();
        let nu = density(a, b, &rule);
        let xi = order_parameter(&nu);
        prop_assert!((0.0..=1.0).contains(&xi), "xi = {xi}");
    }
}

#[test]
fn effective_potential_has_no_spurious_dips_between_nodes() {
    // The Legendre expansion evaluated on a 10x finer grid never dips
    // meaningfully below the node minimum for smooth densities.
    let rule = rule64();
    let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
    for a in [-4.0, -1.0, 2.0, 6.0] {
        let nu = density(a, 0.0, &rule);
        let h = effective_potential(&pot, &nu).unwrap();
        let node_min = h.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let p2 = h.legendre_moments[&2];
        let mut dense_min = f64::INFINITY;
        let fine = 10 * rule.order();
        for i in 0..=fine {
            let u = i as f64 / fine as f64;
            dense_min = dense_min.min(1.0 - p2 * legendre_p(2, u).unwrap());
        }
        assert!(node_min >= dense_min - 1e-12);
        assert!(node_min - dense_min <= 1e-3, "gap {}", node_min - dense_min);
    }
}
