//! Linearization of the self-consistency map around the isotropic state.
//!
//! The Fréchet derivative at the uniform density is `I - βK` with the compact
//! self-adjoint operator `(Kμ)(m) = -|M|⁻¹ ∫ Ũ(m, m') μ(m') dm'`, where `Ũ` is
//! the zero-mean part of the kernel. In the Legendre representation `K` is
//! diagonal: degree-ℓ harmonics carry the eigenvalue `λ_ℓ = -c̃_ℓ / (2ℓ + 1)`.
//! Candidate bifurcation temperatures are `β_ℓ = 1/λ_ℓ` for `λ_ℓ > 0`.
//!
//! The closed form is the primary implementation; the discretized kernel
//! matrix, assembled from the raw kernel by azimuthal quadrature, serves as
//! its independent oracle in tests and in the acceptance suite.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{legendre, QuadratureRule, MAX_LEGENDRE_DEGREE};
use crate::potential::AxisymmetricPotential;

/// Spectral data of the linearized operator, with the rigorous-regime bounds.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    /// Eigenvalue of `K` on each active degree ℓ ≥ 2.
    pub eigenvalues: BTreeMap<u32, f64>,
    /// Operator norm `max_ℓ |λ_ℓ|`.
    pub norm_k: f64,
    /// `β_ℓ = 1/λ_ℓ` for every positive eigenvalue.
    pub bifurcation_betas: BTreeMap<u32, f64>,
    /// `(2 ‖U‖_∞)⁻¹`: below this the solution is unique outright.
    pub uniqueness_beta: f64,
    /// `‖K‖⁻¹`: below this no bifurcation can leave the isotropic line.
    pub no_bifurcation_beta: f64,
    /// Quadratic coupling of the critical mode at the first bifurcation;
    /// nonzero means the bifurcation is transcritical. Absent when the leading
    /// eigenvalue is degenerate or no bifurcation exists.
    #[serde(rename = "transcriticality_B")]
    pub transcriticality_b: Option<f64>,
    /// Degree attaining the smallest bifurcation temperature, when unique.
    pub critical_degree: Option<u32>,
    /// Two degrees share the smallest bifurcation temperature; the local
    /// branch structure is not classified in that case.
    pub degenerate: bool,
}

/// Eigenvalues of `K`, bifurcation temperatures and the transcriticality
/// coefficient for the leading mode.
pub fn k_eigenvalues(potential: &AxisymmetricPotential, rule: &QuadratureRule) -> SpectrumReport {
    let mut eigenvalues = BTreeMap::new();
    let mut bifurcation_betas = BTreeMap::new();
    for l in potential.active_degrees() {
        let lambda = -potential.tilde_coeff(l) / (2 * l + 1) as f64;
        eigenvalues.insert(l, lambda);
        if lambda > 0.0 {
            bifurcation_betas.insert(l, 1.0 / lambda);
        }
    }
    let norm_k = eigenvalues.values().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let uniqueness_beta = 1.0 / (2.0 * potential.sup_norm());
    let no_bifurcation_beta = if norm_k > 0.0 { 1.0 / norm_k } else { f64::INFINITY };

    // First bifurcation: smallest beta, i.e. largest positive eigenvalue.
    let mut sorted: Vec<(u32, f64)> = bifurcation_betas.iter().map(|(&l, &b)| (l, b)).collect();
    sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (critical_degree, degenerate) = match sorted.as_slice() {
        [] => (None, false),
        [_one] => (Some(sorted[0].0), false),
        [first, second, ..] => {
            if (second.1 - first.1).abs() <= 1e-12 * first.1.abs() {
                (None, true)
            } else {
                (Some(first.0), false)
            }
        }
    };
    let transcriticality_b = critical_degree.map(|l| {
        let beta_star = bifurcation_betas[&l];
        let mu = critical_eigenvector(l, rule).expect("critical degree is even and in range");
        transcriticality_coefficient(potential, beta_star, &mu, rule)
    });

    SpectrumReport {
        eigenvalues,
        norm_k,
        bifurcation_betas,
        uniqueness_beta,
        no_bifurcation_beta,
        transcriticality_b,
        critical_degree,
        degenerate,
    }
}

/// Critical-mode value `2 P_ℓ(cos θ)`; for ℓ = 2 this is `3 cos²θ - 1`.
pub fn critical_mode(l: u32, theta: f64) -> f64 {
    2.0 * legendre(l as usize, theta.cos())
}

/// The critical eigenvector tabulated at the quadrature nodes, normalized so
/// that the ℓ = 2 mode equals `3 cos²θ - 1` exactly. It has zero mean over the
/// half-sphere.
pub fn critical_eigenvector(l: u32, rule: &QuadratureRule) -> Result<Vec<f64>> {
    if l < 2 || l % 2 != 0 || l > MAX_LEGENDRE_DEGREE {
        return Err(Error::invalid(format!(
            "critical mode degree {l} must be even and in [2, {MAX_LEGENDRE_DEGREE}]"
        )));
    }
    Ok(rule.nodes().iter().map(|&u| 2.0 * legendre(l as usize, u)).collect())
}

/// Transcriticality coefficient of the bifurcation at `(β⋆, μ⋆)`:
///
/// `B = 2 β⋆² |M|⁻¹ ∫_M H_{μ⋆}(m)² dm`,
///
/// evaluated by quadrature of the mean field `H_{μ⋆}(m) = ∫ U(m, m') μ⋆ dm'`.
/// For the Maier–Saupe potential this reproduces the closed form
/// `(8/5)(2π/5)² β⋆² w²`. It vanishes exactly when the zero-mean part of the
/// kernel vanishes (no quadratic coupling), and is positive otherwise.
pub fn transcriticality_coefficient(
    potential: &AxisymmetricPotential,
    beta_star: f64,
    mu_star: &[f64],
    rule: &QuadratureRule,
) -> f64 {
    let field = potential.mean_field(mu_star, rule);
    // |M|⁻¹ ∫_M H² dm = ∫₀¹ H(u)² du on axisymmetric fields.
    let h2 = rule.dot(&field, &field);
    2.0 * beta_star * beta_star * h2
}

/// Eigenvalues of the discretized kernel operator, sorted by decreasing
/// magnitude.
///
/// The matrix is assembled from the raw kernel: the azimuthal integral of
/// `Ũ(cos γ)` is taken on a uniform φ grid (exact for trigonometric
/// polynomials of the degrees involved), and the operator is symmetrized with
/// the quadrature weights before the dense eigensolve. No Legendre expansion
/// of the kernel enters here, so the result is an independent check of the
/// closed-form eigenvalues.
pub fn discretized_kernel_eigenvalues(
    potential: &AxisymmetricPotential,
    rule: &QuadratureRule,
) -> Vec<f64> {
    let matrix = symmetrized_kernel_matrix(potential, rule);
    let mut eigs: Vec<f64> = matrix.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| b.abs().partial_cmp(&a.abs()).unwrap());
    eigs
}

/// Apply the discretized kernel operator to node values, by direct quadrature
/// of the raw kernel.
pub fn apply_kernel_operator(
    potential: &AxisymmetricPotential,
    rule: &QuadratureRule,
    mu: &[f64],
) -> Vec<f64> {
    let n = rule.order();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += kernel_entry(potential, rule, i, j) * rule.weights()[j] * mu[j];
        }
        out[i] = acc;
    }
    out
}

fn symmetrized_kernel_matrix(
    potential: &AxisymmetricPotential,
    rule: &QuadratureRule,
) -> DMatrix<f64> {
    let n = rule.order();
    let sqrt_w: Vec<f64> = rule.weights().iter().map(|w| w.sqrt()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        sqrt_w[i] * kernel_entry(potential, rule, i, j) * sqrt_w[j]
    })
}

/// `A(u_i, u_j) = -(2π)⁻¹ ∫₀^{2π} Ũ(cos γ) dφ`, the kernel of `K` restricted
/// to axisymmetric functions.
fn kernel_entry(potential: &AxisymmetricPotential, rule: &QuadratureRule, i: usize, j: usize) -> f64 {
    const N_PHI: usize = 64;
    let c0 = potential.coeffs().get(&0).copied().unwrap_or(0.0);
    let ui = rule.nodes()[i];
    let uj = rule.nodes()[j];
    let si = (1.0 - ui * ui).sqrt();
    let sj = (1.0 - uj * uj).sqrt();
    let mut acc = 0.0;
    for k in 0..N_PHI {
        let phi = 2.0 * std::f64::consts::PI * k as f64 / N_PHI as f64;
        let cos_gamma = ui * uj + si * sj * phi.cos();
        acc += potential.evaluate(cos_gamma) - c0;
    }
    -acc / N_PHI as f64
}
