//! Axisymmetric two-body potentials `U(m, m') = U(cos γ)` and the effective
//! one-body field `H_ν`.
//!
//! Potentials are stored as even-degree Legendre expansions
//! `U(cos γ) = Σ_ℓ c_ℓ P_ℓ(cos γ)` rather than tabulated kernels: the
//! linearized operator becomes diagonal in this basis and the mean field costs
//! `O(n · L)` instead of `O(n²)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{legendre, QuadratureRule, MAX_LEGENDRE_DEGREE};
use crate::sce::OrientationDensity;
use crate::HALF_SPHERE_AREA;

/// Even-degree Legendre expansion of an axisymmetric pair potential.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisymmetricPotential {
    /// Map from even degree ℓ to the coefficient c_ℓ.
    coeffs: BTreeMap<u32, f64>,
    label: String,
}

impl AxisymmetricPotential {
    /// Build from explicit Legendre coefficients.
    ///
    /// Odd degrees are rejected outright: rods carry an orientation but no
    /// direction, so the kernel must be even in `cos γ`.
    pub fn from_coeffs(coeffs: BTreeMap<u32, f64>, label: impl Into<String>) -> Result<Self> {
        for (&l, &c) in &coeffs {
            if l % 2 != 0 {
                return Err(Error::invalid(format!(
                    "odd Legendre degree {l} in potential; even degrees only"
                )));
            }
            if l > MAX_LEGENDRE_DEGREE {
                return Err(Error::invalid(format!(
                    "Legendre degree {l} exceeds the supported maximum {MAX_LEGENDRE_DEGREE}"
                )));
            }
            if !c.is_finite() {
                return Err(Error::invalid(format!("coefficient c_{l} = {c} is not finite")));
            }
        }
        Ok(Self {
            coeffs,
            label: label.into(),
        })
    }

    /// The Maier–Saupe interaction `U = w [1 - P₂(cos γ)]` with coupling `w > 0`.
    pub fn maier_saupe(w: f64) -> Result<Self> {
        if !(w > 0.0) {
            return Err(Error::invalid(format!("coupling w = {w} must be positive")));
        }
        let mut coeffs = BTreeMap::new();
        coeffs.insert(0, w);
        coeffs.insert(2, -w);
        Self::from_coeffs(coeffs, format!("maier-saupe(w={w})"))
    }

    /// Project a tabulated axisymmetric kernel `f(cos γ)` onto even Legendre
    /// degrees up to [`MAX_LEGENDRE_DEGREE`], returning the potential together
    /// with the sup-norm truncation residual on a dense grid.
    ///
    /// Any odd-degree content of `f` ends up in the residual, never in the
    /// expansion.
    pub fn project_kernel<F: Fn(f64) -> f64>(
        kernel: F,
        label: impl Into<String>,
        rule: &QuadratureRule,
    ) -> Result<(Self, f64)> {
        let mut coeffs = BTreeMap::new();
        for l in (0..=MAX_LEGENDRE_DEGREE).step_by(2) {
            // c_ℓ = (2ℓ+1)/2 ∫_{-1}^{1} f P_ℓ dx, split into even halves.
            let c = (2 * l + 1) as f64 / 2.0
                * rule.integrate(|x| {
                    (kernel(x) + kernel(-x)) * legendre(l as usize, x)
                });
            if !c.is_finite() {
                return Err(Error::NumericalDomain(format!(
                    "kernel projection onto degree {l} is not finite"
                )));
            }
            if c.abs() > 1e-14 {
                coeffs.insert(l, c);
            }
        }
        let pot = Self::from_coeffs(coeffs, label)?;
        let mut residual = 0.0_f64;
        let dense = 2048;
        for i in 0..=dense {
            let x = -1.0 + 2.0 * i as f64 / dense as f64;
            residual = residual.max((kernel(x) - pot.evaluate(x)).abs());
        }
        Ok((pot, residual))
    }

    /// Kernel value `U(cos γ)`.
    pub fn evaluate(&self, cos_gamma: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&l, &c)| c * legendre(l as usize, cos_gamma))
            .sum()
    }

    /// Legendre coefficients of the full kernel.
    pub fn coeffs(&self) -> &BTreeMap<u32, f64> {
        &self.coeffs
    }

    /// Coefficient of the zero-mean part `Ũ = U - |M|⁻¹ ∫ U dm'`: the ℓ = 0
    /// term drops, higher degrees are untouched.
    pub fn tilde_coeff(&self, l: u32) -> f64 {
        if l == 0 {
            0.0
        } else {
            self.coeffs.get(&l).copied().unwrap_or(0.0)
        }
    }

    /// Degrees with nonzero coefficient in the zero-mean part.
    pub fn active_degrees(&self) -> Vec<u32> {
        self.coeffs
            .iter()
            .filter(|&(&l, &c)| l >= 2 && c != 0.0)
            .map(|(&l, _)| l)
            .collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Sup-norm of the kernel over `cos γ ∈ [-1, 1]`, by dense sampling.
    pub fn sup_norm(&self) -> f64 {
        let dense = 4096;
        let mut m = 0.0_f64;
        for i in 0..=dense {
            let x = -1.0 + 2.0 * i as f64 / dense as f64;
            m = m.max(self.evaluate(x).abs());
        }
        m
    }

    /// Half-sphere mean `∫_M U(m, m') dm'`, which equals `2π c₀` for any `m`.
    pub fn constant_mean(&self) -> f64 {
        HALF_SPHERE_AREA * self.coeffs.get(&0).copied().unwrap_or(0.0)
    }

    /// Mean field of an arbitrary axisymmetric (possibly signed) node function:
    /// `H_f(u) = Σ_ℓ c_ℓ (2π ∫₀¹ P_ℓ f du') P_ℓ(u)` at the quadrature nodes.
    pub fn mean_field(&self, values: &[f64], rule: &QuadratureRule) -> Vec<f64> {
        let mut field = vec![0.0; rule.order()];
        for (&l, &c) in &self.coeffs {
            let p: Vec<f64> = rule.nodes().iter().map(|&u| legendre(l as usize, u)).collect();
            let moment = HALF_SPHERE_AREA * rule.dot(&p, values);
            for (h, &pl) in field.iter_mut().zip(&p) {
                *h += c * moment * pl;
            }
        }
        field
    }
}

/// Result of the constant-mean check (Assumption that `∫ U(m, ·)` does not
/// depend on `m`).
#[derive(Debug, Clone, Serialize)]
pub struct ConstantMeanCheck {
    pub passed: bool,
    pub max_deviation: f64,
}

/// Probe `m ↦ ∫_M U(m, m') dm'` over a set of polar angles and report the
/// spread.
///
/// The azimuthal integral is done on a uniform φ grid, which is exact for the
/// trigonometric polynomials produced by degree ≤ 16 kernels; the polar part
/// uses the supplied rule. For any even-degree Legendre expansion the spread is
/// zero up to rounding, but the check recomputes it from the raw kernel rather
/// than trusting the representation.
pub fn check_constant_mean(
    potential: &AxisymmetricPotential,
    rule: &QuadratureRule,
    tol: f64,
) -> ConstantMeanCheck {
    let n_phi = 64;
    let n_probe = 17;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..n_probe {
        // Probe directions spread over theta in [0, pi/2].
        let theta = std::f64::consts::FRAC_PI_2 * k as f64 / (n_probe - 1) as f64;
        let (st, ct) = theta.sin_cos();
        let mean = HALF_SPHERE_AREA
            * rule.integrate(|up| {
                let sp = (1.0 - up * up).sqrt();
                let mut phi_avg = 0.0;
                for j in 0..n_phi {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
                    let cos_gamma = ct * up + st * sp * phi.cos();
                    phi_avg += potential.evaluate(cos_gamma);
                }
                phi_avg / n_phi as f64
            });
        lo = lo.min(mean);
        hi = hi.max(mean);
    }
    let max_deviation = hi - lo;
    ConstantMeanCheck {
        passed: max_deviation <= tol,
        max_deviation,
    }
}

/// Effective one-body potential `H_ν(θ)` tabulated at the quadrature nodes.
#[derive(Debug, Clone)]
pub struct EffectivePotential {
    /// `H_ν` at the nodes of the density's rule.
    pub values: Vec<f64>,
    /// `⟨P_ℓ(cos ·)⟩_ν` for each degree carried by the potential.
    pub legendre_moments: BTreeMap<u32, f64>,
}

/// Compute `H_ν(m) = ∫_M U(m, m') ν(m') dm'` for a normalized density.
///
/// In the Legendre representation this is
/// `H_ν(θ) = Σ_ℓ c_ℓ ⟨P_ℓ⟩_ν P_ℓ(cos θ)` with
/// `⟨P_ℓ⟩_ν = 2π ∫₀¹ P_ℓ(u') ν(u') du'`; the ℓ = 0 moment is 1 by
/// normalization, so the constant term contributes exactly `c₀`.
pub fn effective_potential(
    potential: &AxisymmetricPotential,
    density: &OrientationDensity,
) -> Result<EffectivePotential> {
    density.validate()?;
    let rule = density.rule();
    let mut moments = BTreeMap::new();
    let mut values = vec![0.0; rule.order()];
    for (&l, &c) in potential.coeffs() {
        let p: Vec<f64> = rule.nodes().iter().map(|&u| legendre(l as usize, u)).collect();
        let moment = HALF_SPHERE_AREA * rule.dot(&p, density.values());
        moments.insert(l, moment);
        for (h, &pl) in values.iter_mut().zip(&p) {
            *h += c * moment * pl;
        }
    }
    Ok(EffectivePotential {
        values,
        legendre_moments: moments,
    })
}

/// Externally supplied potential description, parsable from JSON:
/// `{"type":"maier-saupe","w":1.0}` or
/// `{"type":"legendre","coeffs":{"0":1.0,"2":-1.0}}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PotentialSpec {
    MaierSaupe { w: f64 },
    Legendre { coeffs: BTreeMap<String, f64> },
}

impl PotentialSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadSpec(e.to_string()))
    }

    pub fn build(&self) -> Result<AxisymmetricPotential> {
        match self {
            PotentialSpec::MaierSaupe { w } => AxisymmetricPotential::maier_saupe(*w),
            PotentialSpec::Legendre { coeffs } => {
                let mut map = BTreeMap::new();
                for (k, &v) in coeffs {
                    let l: u32 = k
                        .parse()
                        .map_err(|_| Error::BadSpec(format!("bad Legendre degree key {k:?}")))?;
                    map.insert(l, v);
                }
                AxisymmetricPotential::from_coeffs(map, "legendre")
            }
        }
    }
}
