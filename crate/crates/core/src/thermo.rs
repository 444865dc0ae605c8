//! Mean-field free-energy density of homogeneous states and ranking of
//! coexisting branches.
//!
//! For a product state with one-body density `ν` the free energy per particle
//! is `𝔣_β(ν) = ½ ∬ U ν ν - β⁻¹ S₁(ν)` with the entropy `S₁(ν) = -∫ ν ln ν`.
//! Converged solutions of the self-consistency equation are critical points of
//! `𝔣_β`; minimizers are the thermal states.

use serde::Serialize;

use crate::error::Result;
use crate::potential::{effective_potential, AxisymmetricPotential};
use crate::sce::OrientationDensity;
use crate::HALF_SPHERE_AREA;

/// Energy, entropy and free energy of one homogeneous state.
#[derive(Debug, Clone, Serialize)]
pub struct FreeEnergyReport {
    /// `½ ∬ U ν ν = ½ ∫ ν H_ν`.
    pub energy: f64,
    /// `S₁(ν) = -∫ ν ln ν`, at most `ln 2π` with equality for the uniform state.
    pub entropy: f64,
    /// `energy - entropy / β`.
    pub free_energy: f64,
    pub beta: f64,
}

/// Evaluate `𝔣_β(ν)` by quadrature. Nodes where `ν` underflows to zero follow
/// the `0 · ln 0 = 0` convention.
pub fn free_energy(
    beta: f64,
    potential: &AxisymmetricPotential,
    density: &OrientationDensity,
) -> Result<FreeEnergyReport> {
    let h = effective_potential(potential, density)?;
    let rule = density.rule();
    let energy = 0.5 * HALF_SPHERE_AREA * rule.dot(density.values(), &h.values);
    let entropy = -HALF_SPHERE_AREA
        * rule
            .weights()
            .iter()
            .zip(density.values())
            .map(|(&w, &v)| if v > 0.0 { w * v * v.ln() } else { 0.0 })
            .sum::<f64>();
    Ok(FreeEnergyReport {
        energy,
        entropy,
        free_energy: energy - entropy / beta,
        beta,
    })
}

/// One entry of a free-energy ranking.
#[derive(Debug, Clone, Serialize)]
pub struct RankedBranch {
    /// Position of the density in the input list.
    pub index: usize,
    pub report: FreeEnergyReport,
    /// Free energy ties the previous entry within 1e-10.
    pub degenerate_with_previous: bool,
}

/// Rank converged densities by ascending free energy at a common `β`.
pub fn rank_branches(
    beta: f64,
    potential: &AxisymmetricPotential,
    densities: &[OrientationDensity],
) -> Result<Vec<RankedBranch>> {
    let mut entries: Vec<(usize, FreeEnergyReport)> = densities
        .iter()
        .enumerate()
        .map(|(i, nu)| free_energy(beta, potential, nu).map(|r| (i, r)))
        .collect::<Result<_>>()?;
    entries.sort_by(|a, b| a.1.free_energy.partial_cmp(&b.1.free_energy).unwrap());
    Ok(entries
        .into_iter()
        .scan(None::<f64>, |prev, (index, report)| {
            let degenerate = prev.map_or(false, |p| (report.free_energy - p).abs() <= 1e-10);
            *prev = Some(report.free_energy);
            Some(RankedBranch {
                index,
                report,
                degenerate_with_previous: degenerate,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::QuadratureRule;
    use crate::sce::{solve_density, solve_scalar, OrientationDensity};
    use approx::assert_abs_diff_eq;

    fn rule64() -> QuadratureRule {
        QuadratureRule::gauss(64).unwrap()
    }

    #[test]
    fn uniform_state_closed_form() {
        let rule = rule64();
        for (w, beta) in [(1.0, 2.0), (3.0, 7.0)] {
            let pot = AxisymmetricPotential::maier_saupe(w).unwrap();
            let nu = OrientationDensity::uniform(rule.clone());
            let rep = free_energy(beta, &pot, &nu).unwrap();
            assert_abs_diff_eq!(rep.energy, w / 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rep.entropy, HALF_SPHERE_AREA.ln(), epsilon = 1e-12);
            assert_abs_diff_eq!(
                rep.free_energy,
                w / 2.0 - HALF_SPHERE_AREA.ln() / beta,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn energy_scales_linearly_in_the_coupling() {
        let rule = rule64();
        let nu = OrientationDensity::prolate_seed(rule, 3.0);
        let e1 = free_energy(1.0, &AxisymmetricPotential::maier_saupe(1.0).unwrap(), &nu)
            .unwrap()
            .energy;
        let e4 = free_energy(1.0, &AxisymmetricPotential::maier_saupe(4.0).unwrap(), &nu)
            .unwrap()
            .energy;
        assert_abs_diff_eq!(e4, 4.0 * e1, epsilon = 1e-12);
    }

    #[test]
    fn entropy_is_maximal_for_the_uniform_state() {
        // Pinsker: S(uniform) - S(nu) = KL(nu || uniform) >= d^2 / 2 with d the
        // L1 distance over the half-sphere.
        let rule = rule64();
        let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
        let uniform = OrientationDensity::uniform(rule.clone());
        let s_max = free_energy(1.0, &pot, &uniform).unwrap().entropy;
        assert_abs_diff_eq!(s_max, HALF_SPHERE_AREA.ln(), epsilon = 1e-12);
        for target in [-0.3, 0.2, 0.6, 0.9] {
            let nu = OrientationDensity::with_p2_moment(rule.clone(), target).unwrap();
            let s = free_energy(1.0, &pot, &nu).unwrap().entropy;
            let d = HALF_SPHERE_AREA
                * nu
                    .rule()
                    .weights()
                    .iter()
                    .zip(nu.values())
                    .map(|(&w, &v)| w * (v - 1.0 / HALF_SPHERE_AREA).abs())
                    .sum::<f64>();
            assert!(
                s_max - s >= 0.5 * d * d - 1e-12,
                "target {target}: gap {} vs {}",
                s_max - s,
                0.5 * d * d
            );
        }
    }

    #[test]
    fn nematic_branch_wins_past_the_transition() {
        let rule = rule64();
        let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
        let beta = 10.0;
        let seed = OrientationDensity::prolate_seed(rule.clone(), 5.0);
        let nematic = solve_density(beta, &pot, &seed, 0.5, 1e-12, 2000).unwrap();
        assert!(nematic.converged);
        let isotropic = OrientationDensity::uniform(rule);
        let f_nem = free_energy(beta, &pot, &nematic.density).unwrap().free_energy;
        let f_iso = free_energy(beta, &pot, &isotropic).unwrap().free_energy;
        assert!(f_nem < f_iso, "nematic {f_nem} vs isotropic {f_iso}");
    }

    #[test]
    fn ranking_orders_by_free_energy_and_flags_ties() {
        let rule = rule64();
        let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
        let beta = 10.0;
        let seed = OrientationDensity::prolate_seed(rule.clone(), 5.0);
        let nematic = solve_density(beta, &pot, &seed, 0.5, 1e-12, 2000).unwrap().density;
        let isotropic = OrientationDensity::uniform(rule);
        let ranked = rank_branches(
            beta,
            &pot,
            &[isotropic.clone(), nematic, isotropic.clone()],
        )
        .unwrap();
        assert_eq!(ranked[0].index, 1, "nematic-lower ranked first");
        assert!(ranked[2].degenerate_with_previous, "duplicate isotropic ties");
    }

    #[test]
    fn single_root_regime_has_a_single_entry() {
        // At beta = 1 the scalar scan finds exactly one root; ranking the only
        // converged state is trivial but should stay well-formed.
        let rule = rule64();
        let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
        let roots = solve_scalar(1.0, &rule, 2000, 1e-12).unwrap();
        assert_eq!(roots.len(), 1);
        let ranked = rank_branches(1.0, &pot, &[OrientationDensity::uniform(rule)]).unwrap();
        assert_eq!(ranked.len(), 1);
        assert!(!ranked[0].degenerate_with_previous);
    }

    #[test]
    fn first_variation_vanishes_at_converged_solutions() {
        // Mass-preserving multiplicative perturbations of size eps change the
        // free energy by O(eps^2) at any converged solution.
        let rule = rule64();
        let pot = AxisymmetricPotential::maier_saupe(1.0).unwrap();
        let beta = 10.0;
        let seed = OrientationDensity::prolate_seed(rule.clone(), 5.0);
        let nu = solve_density(beta, &pot, &seed, 0.5, 1e-13, 4000).unwrap().density;
        let base = free_energy(beta, &pot, &nu).unwrap().free_energy;
        let eps = 1e-4;
        // C bounds the second variation for |h| <= 2 perturbation profiles;
        // 20 is ample for beta in the tested range (calibrated once).
        let c = 20.0;
        let mut lcg = 12345_u64;
        for _ in 0..20 {
            let mut h: Vec<f64> = nu
                .rule()
                .nodes()
                .iter()
                .map(|&u| {
                    lcg = lcg.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let r = (lcg >> 11) as f64 / (1u64 << 53) as f64;
                    (2.0 * r - 1.0) * crate::numerics::legendre_p(2, u).unwrap()
                        + (r - 0.5) * u * u
                })
                .collect();
            let sup = h.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
            h.iter_mut().for_each(|v| *v /= sup.max(1e-300));
            // Project out the mass component relative to nu.
            let mean = HALF_SPHERE_AREA * nu.rule().dot(&h, nu.values());
            let perturbed: Vec<f64> = nu
                .values()
                .iter()
                .zip(&h)
                .map(|(&v, &hh)| v * (1.0 + eps * (hh - mean)))
                .collect();
            let nu_p = OrientationDensity::from_values(perturbed, nu.rule().clone()).unwrap();
            let delta = (free_energy(beta, &pot, &nu_p).unwrap().free_energy - base).abs();
            assert!(delta <= c * eps * eps, "delta {delta} vs {}", c * eps * eps);
        }
    }
}
