//! Finite-N Metropolis sampler of the mean-field Gibbs measure.
//!
//! The system keeps orientations only: the validated object is the spatially
//! homogeneous self-consistency equation, so the positional sector of the
//! microscopic model is dropped and the energy is
//! `V_N = (N-1)⁻¹ Σ_{i<j} U(m_i, m_j)` with the angular kernel alone.
//!
//! The order parameter is measured relative to the instantaneous director: the
//! principal axis of the nematic Q-tensor `Σ_i (3 m_i ⊗ m_i - I) / 2N`. In a
//! finite system the director diffuses, and a lab-frame `⟨sin²θ⟩` would
//! average the order away.

use nalgebra::Matrix3;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::MAX_LEGENDRE_DEGREE;
use crate::potential::AxisymmetricPotential;

/// N unit directions on the half-sphere, stored as `u = cos θ` and `φ`.
#[derive(Debug, Clone)]
pub struct ParticleSystem {
    u: Vec<f64>,
    phi: Vec<f64>,
    beta: f64,
    /// Dense Legendre coefficients `c_0 .. c_L` for fast kernel evaluation.
    kernel_coeffs: Vec<f64>,
}

impl ParticleSystem {
    /// Fresh system with orientations drawn uniformly on the half-sphere.
    pub fn random(
        n: usize,
        beta: f64,
        potential: &AxisymmetricPotential,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("need at least two particles"));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta = {beta} must be finite and nonnegative")));
        }
        let max_l = potential.coeffs().keys().max().copied().unwrap_or(0) as usize;
        let mut kernel_coeffs = vec![0.0; max_l + 1];
        for (&l, &c) in potential.coeffs() {
            kernel_coeffs[l as usize] = c;
        }
        debug_assert!(max_l <= MAX_LEGENDRE_DEGREE as usize);
        let u: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let phi: Vec<f64> = (0..n)
            .map(|_| rng.gen::<f64>() * 2.0 * std::f64::consts::PI)
            .collect();
        Ok(Self {
            u,
            phi,
            beta,
            kernel_coeffs,
        })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn direction(&self, i: usize) -> [f64; 3] {
        let s = (1.0 - self.u[i] * self.u[i]).max(0.0).sqrt();
        let (sp, cp) = self.phi[i].sin_cos();
        [s * cp, s * sp, self.u[i]]
    }

    /// Kernel value by a single three-term-recurrence pass over the dense
    /// coefficients.
    fn kernel(&self, x: f64) -> f64 {
        let cs = &self.kernel_coeffs;
        let mut acc = cs[0];
        if cs.len() == 1 {
            return acc;
        }
        let mut p_prev = 1.0;
        let mut p = x;
        acc += cs[1] * p;
        for k in 1..cs.len() - 1 {
            let p_next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
            p_prev = p;
            p = p_next;
            acc += cs[k + 1] * p;
        }
        acc
    }

    /// Mean-field-scaled energy change of moving particle `i` to
    /// `(new_u, new_phi)`:
    /// `ΔV = (N-1)⁻¹ Σ_{j≠i} [U(m_i'·m_j) - U(m_i·m_j)]`.
    pub fn interaction_delta(&self, i: usize, new_u: f64, new_phi: f64) -> f64 {
        let n = self.len();
        let old = self.direction(i);
        let s = (1.0 - new_u * new_u).max(0.0).sqrt();
        let (sp, cp) = new_phi.sin_cos();
        let new = [s * cp, s * sp, new_u];
        let mut delta = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let mj = self.direction(j);
            let dot_new = new[0] * mj[0] + new[1] * mj[1] + new[2] * mj[2];
            let dot_old = old[0] * mj[0] + old[1] * mj[1] + old[2] * mj[2];
            delta += self.kernel(dot_new.clamp(-1.0, 1.0)) - self.kernel(dot_old.clamp(-1.0, 1.0));
        }
        delta / (n - 1) as f64
    }

    /// Total mean-field-scaled energy `(N-1)⁻¹ Σ_{i<j} U(m_i·m_j)`.
    pub fn total_energy(&self) -> f64 {
        let n = self.len();
        let mut acc = 0.0;
        for i in 0..n {
            let mi = self.direction(i);
            for j in (i + 1)..n {
                let mj = self.direction(j);
                let dot = mi[0] * mj[0] + mi[1] * mj[1] + mi[2] * mj[2];
                acc += self.kernel(dot.clamp(-1.0, 1.0));
            }
        }
        acc / (n - 1) as f64
    }

    /// Order parameter `N⁻¹ Σ_i sin²θ_i` measured against the instantaneous
    /// director, via the largest eigenvalue of the Q-tensor:
    /// `ξ = (2/3)(1 - λ_max(Q))`.
    pub fn instantaneous_order_parameter(&self) -> f64 {
        let n = self.len() as f64;
        let mut s = Matrix3::zeros();
        for i in 0..self.len() {
            let m = self.direction(i);
            for a in 0..3 {
                for b in 0..3 {
                    s[(a, b)] += m[a] * m[b];
                }
            }
        }
        let q = (s * (3.0 / n) - Matrix3::identity()) * 0.5;
        let lambda_max = q
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        (2.0 / 3.0) * (1.0 - lambda_max)
    }

    /// Time-averaged Q-tensor accumulator input: the instantaneous Q.
    pub fn q_tensor(&self) -> Matrix3<f64> {
        let n = self.len() as f64;
        let mut s = Matrix3::zeros();
        for i in 0..self.len() {
            let m = self.direction(i);
            for a in 0..3 {
                for b in 0..3 {
                    s[(a, b)] += m[a] * m[b];
                }
            }
        }
        (s * (3.0 / n) - Matrix3::identity()) * 0.5
    }

    #[cfg(test)]
    fn set_orientation(&mut self, i: usize, u: f64, phi: f64) {
        self.u[i] = u;
        self.phi[i] = phi;
    }

    #[cfg(test)]
    fn orientation(&self, i: usize) -> (f64, f64) {
        (self.u[i], self.phi[i])
    }
}

/// One attempted single-particle move per particle: a symmetric random walk in
/// `(u, φ)` with reflection at `u ∈ {0, 1}` and wraparound in `φ`, accepted
/// with probability `min(1, e^{-β ΔV})`. Returns the number of accepted moves.
pub fn metropolis_sweep(
    system: &mut ParticleSystem,
    proposal_width: f64,
    rng: &mut ChaCha8Rng,
) -> Result<usize> {
    if !(proposal_width > 0.0) {
        return Err(Error::invalid("proposal width must be positive"));
    }
    let width = proposal_width.min(1.0);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut accepted = 0;
    for i in 0..system.len() {
        let mut new_u = system.u[i] + width * (2.0 * rng.gen::<f64>() - 1.0);
        if new_u < 0.0 {
            new_u = -new_u;
        }
        if new_u > 1.0 {
            new_u = 2.0 - new_u;
        }
        let new_phi = (system.phi[i] + std::f64::consts::PI * width * (2.0 * rng.gen::<f64>() - 1.0))
            .rem_euclid(two_pi);
        let delta = system.interaction_delta(i, new_u, new_phi);
        let accept = delta <= 0.0 || rng.gen::<f64>() < (-system.beta * delta).exp();
        if accept {
            system.u[i] = new_u;
            system.phi[i] = new_phi;
            accepted += 1;
        }
    }
    Ok(accepted)
}

/// Monte Carlo estimate with batch-means error bars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub acceptance_rate: f64,
    pub integrated_autocorrelation_time: f64,
    /// Set when the acceptance rate left [0.2, 0.8] despite auto-tuning.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Sample the order parameter of the finite-N Gibbs measure.
///
/// The proposal width is auto-tuned toward 50% acceptance during burn-in and
/// frozen afterwards. Deterministic given `(seed, parameters)`.
pub fn estimate_order_parameter(
    n_particles: usize,
    beta: f64,
    potential: &AxisymmetricPotential,
    n_sweeps: usize,
    n_burnin: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_sweeps <= n_burnin {
        return Err(Error::invalid(format!(
            "n_sweeps = {n_sweeps} must exceed n_burnin = {n_burnin}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut system = ParticleSystem::random(n_particles, beta, potential, &mut rng)?;

    let mut width = 0.4;
    const TUNE_CHUNK: usize = 50;
    let mut chunk_accepted = 0usize;
    for sweep in 0..n_burnin {
        chunk_accepted += metropolis_sweep(&mut system, width, &mut rng)?;
        if (sweep + 1) % TUNE_CHUNK == 0 {
            let rate = chunk_accepted as f64 / (TUNE_CHUNK * n_particles) as f64;
            let factor = (rate / 0.5).clamp(0.5, 2.0);
            width = (width * factor).clamp(1e-3, 1.0);
            chunk_accepted = 0;
        }
    }

    let n_measure = n_sweeps - n_burnin;
    let mut samples = Vec::with_capacity(n_measure);
    let mut accepted = 0usize;
    for _ in 0..n_measure {
        accepted += metropolis_sweep(&mut system, width, &mut rng)?;
        samples.push(system.instantaneous_order_parameter());
    }
    let acceptance_rate = accepted as f64 / (n_measure * n_particles) as f64;

    let (mean, std_error, tau_int) = batch_means(&samples);
    let warning = if !(0.2..=0.8).contains(&acceptance_rate) {
        Some(format!(
            "acceptance rate {acceptance_rate:.3} outside [0.2, 0.8] after auto-tuning"
        ))
    } else {
        None
    };
    Ok(McEstimate {
        mean,
        std_error,
        n_samples: n_measure,
        acceptance_rate,
        integrated_autocorrelation_time: tau_int,
        warning,
    })
}

/// Batch-means mean, standard error and integrated autocorrelation time.
fn batch_means(samples: &[f64]) -> (f64, f64, f64) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 4 {
        return (mean, 0.0, 0.5);
    }
    let n_batches = ((n as f64).sqrt() as usize).clamp(2, 512);
    let batch_len = n / n_batches;
    let used = n_batches * batch_len;
    let offset = n - used;
    let batch_means: Vec<f64> = (0..n_batches)
        .map(|b| {
            let start = offset + b * batch_len;
            samples[start..start + batch_len].iter().sum::<f64>() / batch_len as f64
        })
        .collect();
    let bm_mean = batch_means.iter().sum::<f64>() / n_batches as f64;
    let bm_var = batch_means.iter().map(|m| (m - bm_mean).powi(2)).sum::<f64>()
        / (n_batches - 1) as f64;
    let std_error = (bm_var / n_batches as f64).sqrt();
    let sample_var =
        samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let tau_int = if sample_var > 0.0 {
        0.5 * batch_len as f64 * bm_var / sample_var
    } else {
        0.5
    };
    (mean, std_error, tau_int)
}

/// Combine independent-chain estimates by inverse-variance weighting.
pub fn merge_estimates(estimates: &[McEstimate]) -> Result<McEstimate> {
    if estimates.is_empty() {
        return Err(Error::invalid("nothing to merge"));
    }
    let mut weight_sum = 0.0;
    let mut weighted_mean = 0.0;
    for e in estimates {
        if !(e.std_error > 0.0) {
            return Err(Error::invalid("cannot merge estimates with zero variance"));
        }
        let w = 1.0 / (e.std_error * e.std_error);
        weight_sum += w;
        weighted_mean += w * e.mean;
    }
    let mean = weighted_mean / weight_sum;
    let std_error = (1.0 / weight_sum).sqrt();
    Ok(McEstimate {
        mean,
        std_error,
        n_samples: estimates.iter().map(|e| e.n_samples).sum(),
        acceptance_rate: estimates.iter().map(|e| e.acceptance_rate).sum::<f64>()
            / estimates.len() as f64,
        integrated_autocorrelation_time: estimates
            .iter()
            .map(|e| e.integrated_autocorrelation_time)
            .sum::<f64>()
            / estimates.len() as f64,
        warning: estimates.iter().find_map(|e| e.warning.clone()),
    })
}
