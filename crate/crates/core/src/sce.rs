//! The homogeneous self-consistency equation, as a density fixed point and in
//! the scalar order-parameter reduction.
//!
//! A solution is a probability density `ν` on the half-sphere with
//! `ν ∝ exp(-β H_ν)`. For the Maier–Saupe potential the whole density enters
//! only through `⟨P₂⟩_ν`, so the equation collapses to the scalar problem
//! `ξ = F(β, ξ)` for the order parameter `ξ = ⟨sin²θ⟩_ν = (2/3)(1 - ⟨P₂⟩_ν)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{legendre, QuadratureRule};
use crate::potential::{effective_potential, AxisymmetricPotential};
use crate::HALF_SPHERE_AREA;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Probability density on the half-sphere, tabulated at quadrature nodes in
/// `u = cos θ` (units: probability per unit solid angle).
#[derive(Debug, Clone)]
pub struct OrientationDensity {
    values: Vec<f64>,
    rule: QuadratureRule,
}

impl OrientationDensity {
    /// The isotropic state `ν ≡ 1/(2π)`.
    pub fn uniform(rule: QuadratureRule) -> Self {
        let v = 1.0 / HALF_SPHERE_AREA;
        Self {
            values: vec![v; rule.order()],
            rule,
        }
    }

    /// Wrap tabulated values, enforcing positivity and normalization.
    pub fn from_values(values: Vec<f64>, rule: QuadratureRule) -> Result<Self> {
        if values.len() != rule.order() {
            return Err(Error::invalid(format!(
                "{} values for a rule of order {}",
                values.len(),
                rule.order()
            )));
        }
        let nu = Self { values, rule };
        nu.validate()?;
        Ok(nu)
    }

    /// Normalize arbitrary nonnegative node values into a density.
    pub fn from_unnormalized(mut values: Vec<f64>, rule: QuadratureRule) -> Result<Self> {
        if values.len() != rule.order() {
            return Err(Error::invalid("value/rule length mismatch"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("negative or non-finite density values"));
        }
        let mass: f64 = HALF_SPHERE_AREA
            * rule
                .weights()
                .iter()
                .zip(&values)
                .map(|(&w, &v)| w * v)
                .sum::<f64>();
        if mass <= 0.0 {
            return Err(Error::invalid("density has zero mass"));
        }
        for v in &mut values {
            *v /= mass;
        }
        Ok(Self { values, rule })
    }

    /// Prolate seed `ν ∝ exp(c u²)`, concentrated near the pole for `c > 0`.
    pub fn prolate_seed(rule: QuadratureRule, concentration: f64) -> Self {
        let values: Vec<f64> = rule.nodes().iter().map(|&u| (concentration * u * u).exp()).collect();
        Self::from_unnormalized(values, rule).expect("exponential seed is positive")
    }

    /// Density from the exponential family `ν ∝ exp(a P₂(u))` with `a` tuned
    /// by bisection so that `⟨P₂⟩_ν` hits `target`.
    pub fn with_p2_moment(rule: QuadratureRule, target: f64) -> Result<Self> {
        if !(-0.5..1.0).contains(&target) {
            return Err(Error::invalid(format!(
                "<P2> target {target} outside the attainable range (-1/2, 1)"
            )));
        }
        let moment = |a: f64| -> f64 {
            let nu = Self::from_unnormalized(
                rule.nodes().iter().map(|&u| (a * legendre(2, u)).exp()).collect(),
                rule.clone(),
            )
            .expect("exponential family is positive");
            nu.p2_moment()
        };
        let (mut lo, mut hi) = (-200.0, 200.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if moment(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = 0.5 * (lo + hi);
        Self::from_unnormalized(
            rule.nodes().iter().map(|&u| (a * legendre(2, u)).exp()).collect(),
            rule,
        )
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Check the probability-density invariants.
    pub fn validate(&self) -> Result<()> {
        if self.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("density has negative or non-finite values"));
        }
        let mass = HALF_SPHERE_AREA * self.rule.dot(&vec![1.0; self.values.len()], &self.values);
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::invalid(format!(
                "density mass {mass} deviates from 1 beyond {NORMALIZATION_TOL}"
            )));
        }
        Ok(())
    }

    /// `⟨P₂(cos ·)⟩_ν = 2π ∫₀¹ P₂(u) ν(u) du`.
    pub fn p2_moment(&self) -> f64 {
        let p2: Vec<f64> = self.rule.nodes().iter().map(|&u| legendre(2, u)).collect();
        HALF_SPHERE_AREA * self.rule.dot(&p2, &self.values)
    }

    /// Sup-norm distance to another density on the same rule.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Order parameter `ξ = ⟨sin²θ⟩_ν = 2π ∫₀¹ ν(u)(1 - u²) du ∈ [0, 1]`.
///
/// `2/3` is the isotropic value, `0` the perfectly aligned prolate state and
/// `1` the oblate extreme.
pub fn order_parameter(density: &OrientationDensity) -> f64 {
    let g: Vec<f64> = density.rule().nodes().iter().map(|&u| 1.0 - u * u).collect();
    HALF_SPHERE_AREA * density.rule().dot(&g, density.values())
}

/// One application of the self-consistency map
/// `ν ↦ exp(-β H_ν) / (2π ∫₀¹ exp(-β H_ν) du)`.
///
/// The minimum of `H_ν` is subtracted before exponentiating; the map is
/// invariant under constant shifts of `H` and the shift keeps `β` up to
/// several hundred free of overflow. The output is nonnegative and normalized
/// by construction.
pub fn sce_map(
    beta: f64,
    potential: &AxisymmetricPotential,
    density: &OrientationDensity,
) -> Result<OrientationDensity> {
    if !beta.is_finite() {
        return Err(Error::invalid(format!("beta = {beta} must be finite")));
    }
    let h = effective_potential(potential, density)?;
    let h_min = h.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let boltz: Vec<f64> = h.values.iter().map(|&v| (-beta * (v - h_min)).exp()).collect();
    OrientationDensity::from_unnormalized(boltz, density.rule().clone())
}

/// Outcome of the damped Picard iteration.
#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub density: OrientationDensity,
    /// Sup-norm of `ν - Φ(ν)` at the final iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub order_parameter: f64,
}

/// Damped Picard iteration `ν ← (1-α) ν + α Φ(ν)` from the seed `ν₀`.
///
/// Every iterate stays a probability density exactly (convex combination of
/// densities). Non-convergence within `max_iter` is reported through
/// `converged = false`, never as an error.
pub fn solve_density(
    beta: f64,
    potential: &AxisymmetricPotential,
    seed: &OrientationDensity,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPointResult> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance {tol} must be positive")));
    }
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::invalid(format!("damping {damping} outside (0, 1]")));
    }
    let mut nu = seed.clone();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let image = sce_map(beta, potential, &nu)?;
        residual = nu.sup_distance(&image);
        iterations += 1;
        let mixed: Vec<f64> = nu
            .values()
            .iter()
            .zip(image.values())
            .map(|(&old, &new)| (1.0 - damping) * old + damping * new)
            .collect();
        nu = OrientationDensity {
            values: mixed,
            rule: nu.rule,
        };
        if residual <= tol {
            break;
        }
    }
    let converged = residual <= tol;
    let xi = order_parameter(&nu);
    Ok(FixedPointResult {
        density: nu,
        residual,
        iterations,
        converged,
        order_parameter: xi,
    })
}

/// The scalar map `F(β, ξ)` of the order-parameter reduction:
///
/// ```text
/// F(β, ξ) = ∫₀¹ (1-u²) e^{-β(1-(3/2)ξ)·(3/2)(1-u²)} du
///           ------------------------------------------
///           ∫₀¹         e^{-β(1-(3/2)ξ)·(3/2)(1-u²)} du
/// ```
///
/// using `1 - P₂(cos θ) = (3/2) sin²θ`. The largest exponent is subtracted
/// before exponentiating, so the ratio is overflow-safe for any `β` tested
/// (up to several thousand).
pub fn f_scalar(beta: f64, xi: f64, rule: &QuadratureRule) -> f64 {
    let c = 1.0 - 1.5 * xi;
    let mut e_max = f64::NEG_INFINITY;
    let exps: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&u| {
            let e = -beta * c * 1.5 * (1.0 - u * u);
            e_max = e_max.max(e);
            e
        })
        .collect();
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&u, &w), &e) in rule.nodes().iter().zip(rule.weights()).zip(&exps) {
        let b = w * (e - e_max).exp();
        num += b * (1.0 - u * u);
        den += b;
    }
    num / den
}

/// Central-difference `∂F/∂ξ` with the fixed step `1e-5`.
pub fn d_f_scalar(beta: f64, xi: f64, rule: &QuadratureRule) -> f64 {
    const STEP: f64 = 1e-5;
    (f_scalar(beta, xi + STEP, rule) - f_scalar(beta, xi - STEP, rule)) / (2.0 * STEP)
}

/// A root of `G(β, ξ) = ξ - F(β, ξ)` with its stability classification.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarRoot {
    pub xi: f64,
    /// `∂F/∂ξ` at the root.
    pub d_f_d_xi: f64,
    /// Stable iff `∂F/∂ξ < 1` (the root is a physical equilibrium point).
    pub stable: bool,
    /// `|G(β, ξ)|` at the reported root.
    pub residual: f64,
    /// Roots beyond the isotropic value describe oblate states; they are
    /// reported but physically spurious once past the transcritical crossing.
    pub oblate: bool,
}

/// All roots of `G(β, ξ) = ξ - F(β, ξ)` on `[0, 1]`, by sign-change scan plus
/// bisection.
///
/// `ξ = 2/3` is always a root (the isotropic state); it is asserted and
/// inserted even when the scan cannot see it as a sign change, which happens
/// at parameter values where it is a double root.
pub fn solve_scalar(
    beta: f64,
    rule: &QuadratureRule,
    scan_points: usize,
    tol: f64,
) -> Result<Vec<ScalarRoot>> {
    if scan_points < 100 {
        return Err(Error::invalid(format!(
            "scan_points = {scan_points} below the minimum 100"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let g = |xi: f64| xi - f_scalar(beta, xi, rule);

    const ISO: f64 = 2.0 / 3.0;
    let g_iso = g(ISO).abs();
    assert!(
        g_iso <= 1e-12,
        "isotropic state failed to solve the scalar equation: |G(beta, 2/3)| = {g_iso}"
    );

    let mut roots: Vec<f64> = Vec::new();
    let mut prev_x = 0.0;
    let mut prev_g = g(prev_x);
    if prev_g == 0.0 {
        roots.push(prev_x);
    }
    for i in 1..=scan_points {
        let x = i as f64 / scan_points as f64;
        let gx = g(x);
        if gx == 0.0 {
            roots.push(x);
        } else if prev_g != 0.0 && prev_g.signum() != gx.signum() {
            let (mut lo, mut hi) = (prev_x, x);
            let mut g_lo = prev_g;
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                let g_mid = g(mid);
                if g_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if g_mid.signum() == g_lo.signum() {
                    lo = mid;
                    g_lo = g_mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_g = gx;
    }

    // The isotropic root is exact; make sure it is present even where the
    // scan sees no sign change (double root at the transcritical point).
    let spacing = 1.0 / scan_points as f64;
    if !roots.iter().any(|&r| (r - ISO).abs() < spacing) {
        roots.push(ISO);
    } else {
        // Snap the scanned root nearest 2/3 onto the exact value when it is
        // within bisection resolution of it.
        if let Some(r) = roots
            .iter_mut()
            .min_by(|a, b| (**a - ISO).abs().partial_cmp(&(**b - ISO).abs()).unwrap())
        {
            if (*r - ISO).abs() <= 2.0 * tol {
                *r = ISO;
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() <= 2.0 * tol);

    Ok(roots
        .into_iter()
        .map(|xi| {
            let d = d_f_scalar(beta, xi, rule);
            ScalarRoot {
                xi,
                d_f_d_xi: d,
                stable: d < 1.0,
                residual: g(xi).abs(),
                oblate: xi > ISO + 1e-9,
            }
        })
        .collect())
}
