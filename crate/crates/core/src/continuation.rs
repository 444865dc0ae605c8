//! Branch tracing of the scalar self-consistency equation over a β range,
//! with saddle-node and transcritical event detection.
//!
//! The Maier–Saupe scalar problem at coupling `w` is the `w = 1` problem at
//! effective inverse temperature `β w`, so every solve below goes through
//! `F(β w, ξ)`. Continuation is grid-scan-plus-linking: the one-dimensional
//! root structure is cheap to enumerate per β, and fold detection by root
//! counting is robust without arclength bookkeeping.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{suggested_order, QuadratureRule};
use crate::sce::{d_f_scalar, f_scalar, solve_scalar, ScalarRoot};

const ISO: f64 = 2.0 / 3.0;

/// Parameters of a continuation run.
#[derive(Debug, Clone)]
pub struct TraceConfig {
    /// Maier–Saupe coupling `w > 0`.
    pub coupling: f64,
    /// Minimum quadrature order (raised automatically with `β w`).
    pub quad_order: usize,
    /// Uniform scan resolution used for root isolation in ξ.
    pub scan_points: usize,
    /// Bisection width for roots in ξ.
    pub root_tol: f64,
    /// Bisection width for event locations in β.
    pub event_tol: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            coupling: 1.0,
            quad_order: 64,
            scan_points: 2000,
            root_tol: 1e-12,
            event_tol: 1e-6,
        }
    }
}

/// Which solution family a branch belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchKind {
    /// `ξ ≡ 2/3` at every temperature.
    Isotropic,
    /// The anisotropic root below the isotropic line (prolate, stable).
    NematicLower,
    /// The anisotropic root that crosses the isotropic line (unstable).
    NematicUpper,
}

impl BranchKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BranchKind::Isotropic => "isotropic",
            BranchKind::NematicLower => "nematic-lower",
            BranchKind::NematicUpper => "nematic-upper",
        }
    }
}

/// One solved point on a branch.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchPoint {
    pub beta: f64,
    pub xi: f64,
    /// `∂F/∂ξ` at the root (evaluated at the effective temperature `β w`).
    pub d_f_d_xi: f64,
    pub stable: bool,
    /// `|G(β, ξ)|` at the reported point.
    pub residual: f64,
}

/// An ordered solution branch.
#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub kind: BranchKind,
    pub points: Vec<BranchPoint>,
}

impl Branch {
    /// `β ξ̄` along the branch, the quantity with a finite low-temperature
    /// limit.
    pub fn asymptotic_products(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.beta * p.xi).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    SaddleNode,
    Transcritical,
}

/// A located bifurcation.
#[derive(Debug, Clone, Serialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub beta: f64,
    pub xi: f64,
    /// Width of the final β bracket.
    pub refinement_error: f64,
}

/// Output of [`trace_branches`].
#[derive(Debug, Clone)]
pub struct TraceResult {
    pub branches: Vec<Branch>,
    pub events: Vec<BifurcationEvent>,
    /// Linking ambiguities and other non-fatal notes.
    pub diagnostics: Vec<String>,
}

fn nematic_roots(roots: &[ScalarRoot]) -> Vec<ScalarRoot> {
    roots.iter().filter(|r| r.xi != ISO).cloned().collect()
}

/// Collect all scalar roots over a uniform β grid, link them into branches and
/// refine the bifurcation events.
pub fn trace_branches(
    config: &TraceConfig,
    beta_min: f64,
    beta_max: f64,
    beta_steps: usize,
) -> Result<TraceResult> {
    if !(beta_min > 0.0 && beta_max > beta_min) {
        return Err(Error::invalid(format!(
            "need 0 < beta_min < beta_max, got [{beta_min}, {beta_max}]"
        )));
    }
    if beta_steps < 2 {
        return Err(Error::invalid("need at least two beta grid points"));
    }
    if !(config.coupling > 0.0) {
        return Err(Error::invalid("coupling must be positive"));
    }
    let w = config.coupling;
    let order = config.quad_order.max(suggested_order(beta_max * w));
    let rule = QuadratureRule::gauss(order)?;

    let betas: Vec<f64> = (0..beta_steps)
        .map(|i| beta_min + (beta_max - beta_min) * i as f64 / (beta_steps - 1) as f64)
        .collect();
    let per_beta: Vec<Vec<ScalarRoot>> = betas
        .par_iter()
        .map(|&beta| solve_scalar(beta * w, &rule, config.scan_points, config.root_tol))
        .collect::<Result<_>>()?;

    let mut diagnostics = Vec::new();

    // Isotropic branch: the exact root at 2/3 exists at every grid point.
    let mut isotropic = Vec::with_capacity(beta_steps);
    for (&beta, roots) in betas.iter().zip(&per_beta) {
        let iso = roots
            .iter()
            .find(|r| r.xi == ISO)
            .expect("solve_scalar always reports the isotropic root");
        isotropic.push(BranchPoint {
            beta,
            xi: iso.xi,
            d_f_d_xi: iso.d_f_d_xi,
            stable: iso.stable,
            residual: iso.residual,
        });
    }

    // Link nematic roots across the grid by nearest xi.
    let mut open: Vec<Vec<BranchPoint>> = Vec::new();
    let mut closed: Vec<Vec<BranchPoint>> = Vec::new();
    for (&beta, roots) in betas.iter().zip(&per_beta) {
        let current = nematic_roots(roots);
        let mut taken = vec![false; current.len()];
        let mut next_open: Vec<Vec<BranchPoint>> = Vec::new();
        for branch in open.drain(..) {
            let last = branch.last().unwrap();
            let mut best: Option<(usize, f64)> = None;
            for (i, root) in current.iter().enumerate() {
                if taken[i] {
                    continue;
                }
                let d = (root.xi - last.xi).abs();
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            // Ambiguity: two unclaimed roots within 1e-6 of each other near the
            // branch end fall back to slope matching.
            if let Some((bi, bd)) = best {
                let ambiguous: Vec<usize> = current
                    .iter()
                    .enumerate()
                    .filter(|(i, r)| !taken[*i] && *i != bi && (r.xi - current[bi].xi).abs() < 1e-6)
                    .map(|(i, _)| i)
                    .collect();
                let chosen = if ambiguous.is_empty() {
                    bi
                } else {
                    diagnostics.push(format!(
                        "linking ambiguity at beta = {beta}: roots within 1e-6, matched by dF/dxi"
                    ));
                    let mut cands = ambiguous;
                    cands.push(bi);
                    cands
                        .into_iter()
                        .min_by(|&a, &b| {
                            let da = (current[a].d_f_d_xi - last.d_f_d_xi).abs();
                            let db = (current[b].d_f_d_xi - last.d_f_d_xi).abs();
                            da.partial_cmp(&db).unwrap()
                        })
                        .unwrap()
                };
                let _ = bd;
                taken[chosen] = true;
                let mut branch = branch;
                let r = &current[chosen];
                branch.push(BranchPoint {
                    beta,
                    xi: r.xi,
                    d_f_d_xi: r.d_f_d_xi,
                    stable: r.stable,
                    residual: r.residual,
                });
                next_open.push(branch);
            } else {
                closed.push(branch);
            }
        }
        for (i, r) in current.iter().enumerate() {
            if !taken[i] {
                next_open.push(vec![BranchPoint {
                    beta,
                    xi: r.xi,
                    d_f_d_xi: r.d_f_d_xi,
                    stable: r.stable,
                    residual: r.residual,
                }]);
            }
        }
        open = next_open;
    }
    closed.extend(open.drain(..));
    closed.retain(|b| !b.is_empty());

    // Classify nematic branches: when two coexist the larger mean xi is the
    // upper one; a lone branch is classified against the isotropic value.
    let mut branches = vec![Branch {
        kind: BranchKind::Isotropic,
        points: isotropic,
    }];
    let mean_xi = |pts: &[BranchPoint]| pts.iter().map(|p| p.xi).sum::<f64>() / pts.len() as f64;
    let mut nematic: Vec<Vec<BranchPoint>> = closed;
    nematic.sort_by(|a, b| mean_xi(a).partial_cmp(&mean_xi(b)).unwrap());
    let n_nem = nematic.len();
    for (i, pts) in nematic.into_iter().enumerate() {
        let kind = if n_nem >= 2 {
            if i == 0 {
                BranchKind::NematicLower
            } else {
                BranchKind::NematicUpper
            }
        } else if mean_xi(&pts) < ISO {
            BranchKind::NematicLower
        } else {
            BranchKind::NematicUpper
        };
        branches.push(Branch { kind, points: pts });
    }

    // Event detection on the grid, refined by bisection in beta.
    let mut events = Vec::new();
    let count_nematic = |beta: f64| -> Result<usize> {
        let roots = solve_scalar(beta * w, &rule, config.scan_points, config.root_tol)?;
        Ok(nematic_roots(&roots).len())
    };
    for k in 1..beta_steps {
        let (b_lo, b_hi) = (betas[k - 1], betas[k]);
        let n_lo = nematic_roots(&per_beta[k - 1]).len();
        let n_hi = nematic_roots(&per_beta[k]).len();
        if n_lo == 0 && n_hi > 0 {
            let (mut lo, mut hi) = (b_lo, b_hi);
            while hi - lo > config.event_tol {
                let mid = 0.5 * (lo + hi);
                if count_nematic(mid)? > 0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let pair = solve_scalar(hi * w, &rule, config.scan_points, config.root_tol)?;
            let nem = nematic_roots(&pair);
            let xi = nem.iter().map(|r| r.xi).sum::<f64>() / nem.len().max(1) as f64;
            events.push(BifurcationEvent {
                kind: EventKind::SaddleNode,
                beta: 0.5 * (lo + hi),
                xi,
                refinement_error: hi - lo,
            });
        }
    }

    // Transcritical: the upper nematic root crosses 2/3. Within a scan cell of
    // the crossing the root pair merges and the sign of (xi_branch - 2/3) is
    // unresolved; there the equivalent marginality condition
    // dF/dxi(beta w, 2/3) = 1 takes over (the crossing branch and the
    // exchange of stability meet at the same beta).
    let upper_sign = |roots: &[ScalarRoot], beta: f64| -> f64 {
        let resolvable = 2.0 / config.scan_points as f64;
        let nem = nematic_roots(roots);
        let upper = nem.iter().map(|r| r.xi).fold(f64::NEG_INFINITY, f64::max);
        if nem.len() >= 2 && upper.is_finite() && (upper - ISO).abs() > resolvable {
            (upper - ISO).signum()
        } else {
            (d_f_scalar(beta * w, ISO, &rule) - 1.0).signum()
        }
    };
    for k in 1..beta_steps {
        let s_lo = upper_sign(&per_beta[k - 1], betas[k - 1]);
        let s_hi = upper_sign(&per_beta[k], betas[k]);
        if nematic_roots(&per_beta[k - 1]).is_empty() || nematic_roots(&per_beta[k]).is_empty() {
            continue;
        }
        if s_lo < 0.0 && s_hi > 0.0 {
            let (mut lo, mut hi) = (betas[k - 1], betas[k]);
            while hi - lo > config.event_tol {
                let mid = 0.5 * (lo + hi);
                let roots = solve_scalar(mid * w, &rule, config.scan_points, config.root_tol)?;
                if upper_sign(&roots, mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            events.push(BifurcationEvent {
                kind: EventKind::Transcritical,
                beta: 0.5 * (lo + hi),
                xi: ISO,
                refinement_error: hi - lo,
            });
        }
    }
    events.sort_by(|a, b| a.beta.partial_cmp(&b.beta).unwrap());

    Ok(TraceResult {
        branches,
        events,
        diagnostics,
    })
}

/// Follow the stable nematic branch from `beta_start` to `beta_end` on a
/// geometric grid, warm-starting each solve from the previous root.
///
/// Fails with [`Error::RootLost`] if the root below the isotropic value
/// disappears, which indicates quadrature under-resolution, and rejects
/// non-decreasing `ξ̄` along the branch for the same reason.
pub fn low_temperature_branch(
    config: &TraceConfig,
    beta_start: f64,
    beta_end: f64,
    steps: usize,
) -> Result<Branch> {
    let w = config.coupling;
    if !(beta_start * w >= 10.0) {
        return Err(Error::invalid(format!(
            "beta_start = {beta_start} is not safely past the transition (need beta w >= 10)"
        )));
    }
    if !(beta_end > beta_start) || steps < 2 {
        return Err(Error::invalid("need beta_end > beta_start and at least two steps"));
    }
    let ratio = (beta_end / beta_start).powf(1.0 / (steps - 1) as f64);

    let mut points: Vec<BranchPoint> = Vec::with_capacity(steps);
    let mut xi_prev: Option<f64> = None;
    let mut beta = beta_start;
    for k in 0..steps {
        let rule = QuadratureRule::gauss(config.quad_order.max(suggested_order(beta * w)))?;
        let g = |xi: f64| xi - f_scalar(beta * w, xi, &rule);
        let (mut lo, mut hi) = match xi_prev {
            None => {
                let roots = solve_scalar(beta * w, &rule, config.scan_points, config.root_tol)?;
                let stable = roots
                    .iter()
                    .find(|r| r.stable && r.xi < ISO)
                    .ok_or_else(|| Error::RootLost {
                        beta,
                        context: "no stable nematic root at the start of the branch".into(),
                    })?;
                (stable.xi - 1e-4, stable.xi + 1e-4)
            }
            Some(prev) => {
                // The root shrinks like 1/beta; bracket around the predictor.
                let predicted = prev / ratio;
                ((predicted / 4.0).max(1e-300), (predicted * 4.0).min(ISO - 1e-9))
            }
        };
        if g(lo).signum() == g(hi).signum() {
            return Err(Error::RootLost {
                beta,
                context: format!("no sign change in [{lo}, {hi}]"),
            });
        }
        let g_lo = g(lo);
        while hi - lo > config.root_tol * (hi.abs().max(1.0)) {
            let mid = 0.5 * (lo + hi);
            if g(mid).signum() == g_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let xi = 0.5 * (lo + hi);
        if let Some(prev) = xi_prev {
            if xi >= prev {
                return Err(Error::NumericalDomain(format!(
                    "low-temperature branch failed to decrease at beta = {beta}: {xi} >= {prev}"
                )));
            }
        }
        let d = d_f_scalar(beta * w, xi, &rule);
        points.push(BranchPoint {
            beta,
            xi,
            d_f_d_xi: d,
            stable: d < 1.0,
            residual: g(xi).abs(),
        });
        xi_prev = Some(xi);
        if k + 1 < steps {
            beta *= ratio;
        }
    }
    Ok(Branch {
        kind: BranchKind::NematicLower,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maier_saupe_phase_diagram_events() {
        let config = TraceConfig::default();
        let result = trace_branches(&config, 1.0, 20.0, 96).unwrap();
        let trans: Vec<&BifurcationEvent> = result
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Transcritical)
            .collect();
        let folds: Vec<&BifurcationEvent> = result
            .events
            .iter()
            .filter(|e| e.kind == EventKind::SaddleNode)
            .collect();
        assert_eq!(trans.len(), 1);
        assert!((trans[0].beta - 5.0).abs() < 1e-3, "beta_tc = {}", trans[0].beta);
        assert!((trans[0].xi - ISO).abs() < 1e-6);
        assert_eq!(folds.len(), 1);
        assert!(folds[0].beta > 1.0 / 3.0 && folds[0].beta < 5.0, "beta_sn = {}", folds[0].beta);
        assert!(folds[0].beta < trans[0].beta);
    }

    #[test]
    fn branches_have_correct_kinds_and_residuals() {
        let config = TraceConfig::default();
        let result = trace_branches(&config, 1.0, 20.0, 96).unwrap();
        assert_eq!(result.branches[0].kind, BranchKind::Isotropic);
        for p in &result.branches[0].points {
            assert_eq!(p.xi, ISO);
        }
        let kinds: Vec<BranchKind> = result.branches.iter().map(|b| b.kind).collect();
        assert!(kinds.contains(&BranchKind::NematicLower));
        assert!(kinds.contains(&BranchKind::NematicUpper));
        for b in &result.branches {
            for p in &b.points {
                assert!(p.residual <= 1e-9, "{:?} residual {}", b.kind, p.residual);
            }
        }
        // The stability flag is exactly the dF/dxi < 1 criterion.
        for b in &result.branches {
            for p in &b.points {
                assert_eq!(p.stable, p.d_f_d_xi < 1.0);
            }
        }
        // The lower branch is stable in its whole range of existence; the
        // upper branch is unstable below the isotropic value (before it turns
        // into the unphysical oblate family).
        for b in &result.branches {
            match b.kind {
                BranchKind::NematicLower => assert!(b.points.iter().all(|p| p.stable)),
                BranchKind::NematicUpper => {
                    assert!(b.points.iter().filter(|p| p.xi < ISO).all(|p| !p.stable))
                }
                BranchKind::Isotropic => {}
            }
        }
    }

    #[test]
    fn exchange_of_stability_on_the_isotropic_branch() {
        let config = TraceConfig::default();
        let result = trace_branches(&config, 1.0, 20.0, 96).unwrap();
        let iso = &result.branches[0];
        for p in &iso.points {
            if p.beta < 5.0 - 1e-9 {
                assert!(p.stable && p.d_f_d_xi < 1.0, "beta {}: {:?}", p.beta, p);
            } else if p.beta > 5.0 + 1e-9 {
                assert!(!p.stable && p.d_f_d_xi > 1.0, "beta {}: {:?}", p.beta, p);
            }
        }
    }

    #[test]
    fn root_count_changes_only_at_detected_events() {
        let config = TraceConfig::default();
        let result = trace_branches(&config, 1.0, 20.0, 96).unwrap();
        let fold = result
            .events
            .iter()
            .find(|e| e.kind == EventKind::SaddleNode)
            .unwrap()
            .beta;
        let rule = QuadratureRule::gauss(64).unwrap();
        for &beta in &[1.0, 2.0, fold - 0.05, fold + 0.05, 10.0, 20.0] {
            let n = solve_scalar(beta, &rule, 2000, 1e-12).unwrap().len();
            let expect = if beta < fold { 1 } else { 3 };
            // At beta = 5 exactly the upper root merges with 2/3; avoided here.
            assert_eq!(n, expect, "beta = {beta}");
        }
    }

    #[test]
    fn transcritical_scales_with_the_coupling() {
        let config = TraceConfig {
            coupling: 2.0,
            ..TraceConfig::default()
        };
        let result = trace_branches(&config, 0.5, 10.0, 96).unwrap();
        let tc = result
            .events
            .iter()
            .find(|e| e.kind == EventKind::Transcritical)
            .unwrap();
        assert!((tc.beta - 2.5).abs() < 1e-3, "beta_tc = {}", tc.beta);

        // Events for coupling w match the w = 1 events under beta -> beta / w.
        let base = trace_branches(&TraceConfig::default(), 1.0, 20.0, 96).unwrap();
        for (a, b) in base.events.iter().zip(&result.events) {
            assert_eq!(a.kind, b.kind);
            assert!((a.beta / 2.0 - b.beta).abs() <= 1e-6, "{} vs {}", a.beta / 2.0, b.beta);
        }
    }

    #[test]
    fn nematic_slope_at_the_crossing_is_nonzero() {
        // Near the transcritical point the upper branch leaves 2/3 linearly.
        let config = TraceConfig::default();
        let result = trace_branches(&config, 4.6, 5.4, 81).unwrap();
        let upper = result
            .branches
            .iter()
            .find(|b| b.kind == BranchKind::NematicUpper)
            .unwrap();
        let slopes: Vec<f64> = upper
            .points
            .windows(2)
            .map(|pair| (pair[1].xi - pair[0].xi) / (pair[1].beta - pair[0].beta))
            .collect();
        for s in &slopes {
            assert!(*s > 0.02, "slope {s} too close to zero for a transcritical crossing");
        }
    }

    #[test]
    fn low_temperature_branch_approaches_perfect_order() {
        let config = TraceConfig::default();
        let branch = low_temperature_branch(&config, 10.0, 1e4, 31).unwrap();
        assert_eq!(branch.points.len(), 31);
        // Strictly decreasing along the branch.
        for pair in branch.points.windows(2) {
            assert!(pair[1].xi < pair[0].xi);
        }
        // beta = 100 sits on the geometric grid: |beta xi - 2/3| <= 0.05 there.
        let p100 = branch
            .points
            .iter()
            .find(|p| (p.beta - 100.0).abs() < 1e-6)
            .expect("beta = 100 on the grid");
        assert!((p100.beta * p100.xi - ISO).abs() <= 0.05, "{}", p100.beta * p100.xi);
        let last = branch.points.last().unwrap();
        assert!((last.beta - 1e4).abs() < 1e-6);
        assert!(last.xi <= 1e-3, "xi(1e4) = {}", last.xi);
    }

    #[test]
    fn low_temperature_branch_matches_independent_solves() {
        let config = TraceConfig::default();
        let branch = low_temperature_branch(&config, 10.0, 80.0, 4).unwrap();
        let betas: Vec<f64> = branch.points.iter().map(|p| p.beta).collect();
        assert!((betas[1] - 20.0).abs() < 1e-9 && (betas[3] - 80.0).abs() < 1e-9);
        for p in &branch.points {
            let rule = QuadratureRule::gauss(suggested_order(p.beta)).unwrap();
            let roots = solve_scalar(p.beta, &rule, 4000, 1e-13).unwrap();
            let oracle = roots.iter().find(|r| r.stable && r.xi < ISO).unwrap().xi;
            assert!((p.xi - oracle).abs() < 1e-9, "beta {}: {} vs {}", p.beta, p.xi, oracle);
        }
    }

    #[test]
    fn low_temperature_branch_validates_inputs() {
        let config = TraceConfig::default();
        assert!(low_temperature_branch(&config, 5.0, 100.0, 5).is_err());
        assert!(low_temperature_branch(&config, 10.0, 5.0, 5).is_err());
        assert!(trace_branches(&config, 0.0, 1.0, 10).is_err());
        assert!(trace_branches(&config, 2.0, 1.0, 10).is_err());
    }
}
