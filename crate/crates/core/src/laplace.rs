//! Low-temperature asymptotics of tilted half-sphere integrals, with the
//! numerical harness that verifies the printed expansion orders.
//!
//! For `f` with a unique global minimum at `θ = 0` and `f''(0) > 0`:
//!
//! ```text
//! ∫₀^{π/2} e^{-β f} sin θ dθ = e^{-β f(0)} [ β⁻¹/f''(0)
//!     - (1/2)√(π/2) f'''(0)/f''(0)^{5/2} β^{-3/2} + o(β^{-3/2}) ]
//!
//! ⟨g⟩_β^f = g(0) + √(π/2) g'(0)/f''(0)^{1/2} β^{-1/2}
//!     + [ g''(0)/f''(0) + (3π-16)/12 · g'(0)f'''(0)/f''(0)² ] β⁻¹ + o(β⁻¹)
//! ```
//!
//! The unquantified remainders are validated by rate tests (error ratios under
//! β refinement), never by absolute tolerances at a single β.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{suggested_order, QuadratureRule};

/// Derivatives at the minimum `θ = 0` consumed by the expansions: `f(0)`,
/// `f''(0) > 0`, `f'''(0)` for the tilt and `g(0)`, `g'(0)`, `g''(0)` for the
/// observable.
#[derive(Debug, Clone, Copy)]
pub struct LocalData {
    pub f0: f64,
    pub f2: f64,
    pub f3: f64,
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
}

impl LocalData {
    pub fn new(f0: f64, f2: f64, f3: f64, g0: f64, g1: f64, g2: f64) -> Result<Self> {
        if !(f2 > 0.0) {
            return Err(Error::invalid(format!(
                "f''(0) = {f2} must be positive (0 must be a nondegenerate minimum)"
            )));
        }
        Ok(Self { f0, f2, f3, g0, g1, g2 })
    }

    /// Estimate the local data by 4th-order central differences with step
    /// `1e-4`. The callables must be defined in a neighborhood of 0.
    pub fn from_functions<F, G>(f: F, g: G) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        const H: f64 = 1e-4;
        let d1 = |p: &dyn Fn(f64) -> f64| {
            (p(-2.0 * H) - 8.0 * p(-H) + 8.0 * p(H) - p(2.0 * H)) / (12.0 * H)
        };
        let d2 = |p: &dyn Fn(f64) -> f64| {
            (-p(-2.0 * H) + 16.0 * p(-H) - 30.0 * p(0.0) + 16.0 * p(H) - p(2.0 * H))
                / (12.0 * H * H)
        };
        let d3 = |p: &dyn Fn(f64) -> f64| {
            (p(-3.0 * H) - 8.0 * p(-2.0 * H) + 13.0 * p(-H) - 13.0 * p(H) + 8.0 * p(2.0 * H)
                - p(3.0 * H))
                / (8.0 * H * H * H)
        };
        Self::new(f(0.0), d2(&f), d3(&f), g(0.0), d1(&g), d2(&g))
    }
}

fn sqrt_pi_over_2() -> f64 {
    (std::f64::consts::PI / 2.0).sqrt()
}

/// Two-term expansion of the tilted partition integral
/// `∫₀^{π/2} e^{-β f} sin θ dθ`.
pub fn laplace_partition(data: &LocalData, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta = {beta} must be positive")));
    }
    let lead = 1.0 / (data.f2 * beta);
    let correction =
        -0.5 * sqrt_pi_over_2() * data.f3 / data.f2.powf(2.5) * beta.powf(-1.5);
    Ok((-beta * data.f0).exp() * (lead + correction))
}

/// Three-term expansion of the tilted expectation `⟨g⟩_β^f`.
pub fn laplace_expectation(data: &LocalData, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::invalid(format!("beta = {beta} must be positive")));
    }
    let half = sqrt_pi_over_2() * data.g1 / data.f2.sqrt() * beta.powf(-0.5);
    let one = (data.g2 / data.f2
        + (3.0 * std::f64::consts::PI - 16.0) / 12.0 * data.g1 * data.f3 / (data.f2 * data.f2))
        / beta;
    Ok(data.g0 + half + one)
}

/// Dense-quadrature value of `∫₀^{π/2} e^{-β f} sin θ dθ`, the oracle for
/// [`laplace_partition`]. The rule order grows with β to resolve the
/// concentration layer.
pub fn partition_numeric<F: Fn(f64) -> f64>(f: F, beta: f64) -> f64 {
    let rule = QuadratureRule::gauss(suggested_order(beta)).expect("positive order");
    rule.integrate(|u| (-beta * f(u.acos())).exp())
}

/// Dense-quadrature value of the tilted expectation `⟨g⟩_β^f`, the oracle for
/// [`laplace_expectation`]. Overflow-safe via exponent shifting.
pub fn tilted_expectation<F, G>(f: F, g: G, beta: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let rule = QuadratureRule::gauss(suggested_order(beta)).expect("positive order");
    let thetas: Vec<f64> = rule.nodes().iter().map(|&u| u.acos()).collect();
    let exps: Vec<f64> = thetas.iter().map(|&t| -beta * f(t)).collect();
    let e_max = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&t, &e), &w) in thetas.iter().zip(&exps).zip(rule.weights()) {
        let b = w * (e - e_max).exp();
        num += b * g(t);
        den += b;
    }
    num / den
}

/// Scaled covariance decay of Lemma-style cumulants: `√β (⟨gh⟩ - ⟨g⟩⟨h⟩) → 0`
/// always, and `β (⟨gh⟩ - ⟨g⟩⟨h⟩) → 0` when additionally `h'(0) = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct CumulantDiagnostics {
    pub betas: Vec<f64>,
    pub covariances: Vec<f64>,
    pub sqrt_beta_scaled: Vec<f64>,
    pub beta_scaled: Vec<f64>,
    /// Whether `h'(0) = 0` (detected by finite differences).
    pub h_prime_zero: bool,
    /// True when the applicable scaled sequences decay over the last three
    /// β values.
    pub pass: bool,
}

/// Compute the tilted covariance `⟨gh⟩ - ⟨g⟩⟨h⟩` along an increasing β list
/// and check the expected decay rates.
pub fn cumulant_decay_check<F, G, H>(
    g: G,
    h: H,
    f: F,
    beta_list: &[f64],
) -> Result<CumulantDiagnostics>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    if beta_list.len() < 3 {
        return Err(Error::invalid("need at least three beta values"));
    }
    if beta_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("beta list must be strictly increasing"));
    }
    let mut covariances = Vec::with_capacity(beta_list.len());
    for &beta in beta_list {
        let gh = tilted_expectation(&f, |t| g(t) * h(t), beta);
        let eg = tilted_expectation(&f, &g, beta);
        let eh = tilted_expectation(&f, &h, beta);
        covariances.push(gh - eg * eh);
    }
    let sqrt_beta_scaled: Vec<f64> = beta_list
        .iter()
        .zip(&covariances)
        .map(|(&b, &c)| b.sqrt() * c)
        .collect();
    let beta_scaled: Vec<f64> = beta_list
        .iter()
        .zip(&covariances)
        .map(|(&b, &c)| b * c)
        .collect();

    const H_STEP: f64 = 1e-4;
    let h_prime = (h(-2.0 * H_STEP) - 8.0 * h(-H_STEP) + 8.0 * h(H_STEP) - h(2.0 * H_STEP))
        / (12.0 * H_STEP);
    let h_prime_zero = h_prime.abs() < 1e-8;

    let decreasing_tail = |xs: &[f64]| {
        let tail = &xs[xs.len() - 3..];
        tail[0].abs() > tail[1].abs() && tail[1].abs() > tail[2].abs()
    };
    let mut pass = decreasing_tail(&sqrt_beta_scaled);
    if h_prime_zero {
        pass = pass && decreasing_tail(&beta_scaled);
    }
    Ok(CumulantDiagnostics {
        betas: beta_list.to_vec(),
        covariances,
        sqrt_beta_scaled,
        beta_scaled,
        h_prime_zero,
        pass,
    })
}

/// The Maier–Saupe exponent `f(θ) = (3/2) sin²θ` (coupling 1, order
/// parameter 0) and its local data: `f(0) = 0`, `f''(0) = 3`, `f'''(0) = 0`.
pub fn maier_saupe_exponent(theta: f64) -> f64 {
    1.5 * theta.sin().powi(2)
}
