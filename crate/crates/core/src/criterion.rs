//! Explicit invasion criterion `Γ`.
//!
//! For an invading species entering a half-line occupied by a resident,
//! `Γ(χ) = ∫₀^χ [ρν/((b/K)y+μ+ν) · (b y − b_r F_r* cosh(√(δ_r/D_r) L̃) (1 − y/F*)^ζ)₊ − δ y] dy`
//! with `ζ = √(δ_r D / (δ D_r))`. A positive `Γ(F*)` is a sufficient
//! condition for invasion; the heterogeneous criteria are the same
//! integral evaluated with the patch-local carrying capacities.

use std::cmp::Ordering;

use crate::equilibria::adult_equilibrium;
use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, bisect, positive_root};
use crate::params::{check_rho, positive, Habitat, SpeciesParams};

pub const QUAD_REL_TOL: f64 = 1e-9;
pub const QUAD_ABS_TOL: f64 = 1e-12;
pub const ROOT_REL_TOL: f64 = 1e-10;

/// Which species is the invader.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Species1Invades,
    Species2Invades,
}

/// Which carrying capacities feed the criterion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Patch {
    Homogeneous,
    Forest,
    Urban,
}

/// Interface point `L̃ > 0` where `b·F*(1 − e^{−√(δ/D)x}) = b_r F_r* e^{−√(δ_r/D_r)x}`.
pub fn interface_point(
    invader: &SpeciesParams,
    resident: &SpeciesParams,
    f_inv_star: f64,
    f_res_star: f64,
) -> Result<f64> {
    positive("F_inv*", f_inv_star)?;
    positive("F_res*", f_res_star)?;
    let a_inv = invader.decay_rate();
    let a_res = resident.decay_rate();
    let rise = invader.b * f_inv_star;
    let fall = resident.b * f_res_star;
    positive_root(
        |x| rise * -(-a_inv * x).exp_m1() - fall * (-a_res * x).exp(),
        ROOT_REL_TOL,
    )
}

/// Everything needed to evaluate `Γ` for one invader/resident pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaSpec {
    pub invader: SpeciesParams,
    pub resident: SpeciesParams,
    pub k_inv: f64,
    pub k_res: f64,
    pub rho: f64,
    pub f_inv_star: f64,
    pub f_res_star: f64,
    pub zeta: f64,
    pub l_tilde: f64,
    pub cosh_factor: f64,
    /// First point where the positive part of the integrand activates.
    pub chi0: f64,
}

impl GammaSpec {
    pub fn new(
        invader: SpeciesParams,
        resident: SpeciesParams,
        rho: f64,
        k_inv: f64,
        k_res: f64,
    ) -> Result<Self> {
        invader.validate()?;
        resident.validate()?;
        check_rho(rho)?;
        let f_inv_star = adult_equilibrium(&invader, rho, k_inv)?;
        let f_res_star = adult_equilibrium(&resident, rho, k_res)?;
        let zeta =
            (resident.delta * invader.diffusion / (invader.delta * resident.diffusion)).sqrt();
        let l_tilde = interface_point(&invader, &resident, f_inv_star, f_res_star)?;
        let cosh_factor = (resident.decay_rate() * l_tilde).cosh();
        let mut spec = Self {
            invader,
            resident,
            k_inv,
            k_res,
            rho,
            f_inv_star,
            f_res_star,
            zeta,
            l_tilde,
            cosh_factor,
            chi0: 0.0,
        };
        spec.chi0 = spec.activation_point()?;
        Ok(spec)
    }

    /// Criterion for the given invasion direction and patch.
    pub fn for_patch(
        direction: Direction,
        patch: Patch,
        sp1: &SpeciesParams,
        sp2: &SpeciesParams,
        rho: f64,
        habitat: &Habitat,
    ) -> Result<Self> {
        let (k1, k2) = match (patch, *habitat) {
            (Patch::Homogeneous, Habitat::Constant { k1, k2 }) => (k1, k2),
            (Patch::Homogeneous, Habitat::TwoPatch { .. }) => {
                return Err(Error::Usage(
                    "homogeneous criterion requested for a two-patch habitat; pick patch F or U"
                        .into(),
                ))
            }
            (Patch::Forest | Patch::Urban, Habitat::Constant { .. }) => {
                return Err(Error::Usage(
                    "patch F or U requested for a constant habitat; use the homogeneous criterion"
                        .into(),
                ))
            }
            (Patch::Forest, h) => h.capacities_at(-1.0),
            (Patch::Urban, h) => h.capacities_at(0.0),
        };
        match direction {
            Direction::Species1Invades => Self::new(*sp1, *sp2, rho, k1, k2),
            Direction::Species2Invades => Self::new(*sp2, *sp1, rho, k2, k1),
        }
    }

    /// `(1 − y/F*)^ζ`, clamped to 0 at and beyond `F*`.
    #[inline]
    fn decay_power(&self, y: f64) -> f64 {
        let r = y / self.f_inv_star;
        if r >= 1.0 {
            0.0
        } else {
            (self.zeta * (-r).ln_1p()).exp()
        }
    }

    #[inline]
    fn competitor_pressure(&self, y: f64) -> f64 {
        self.resident.b * self.f_res_star * self.cosh_factor * self.decay_power(y)
    }

    #[inline]
    fn recruitment(&self, y: f64) -> f64 {
        self.rho * self.invader.nu
            / (self.invader.b / self.k_inv * y + self.invader.aquatic_outflow())
    }

    /// Integrand of `Γ`, i.e. `Γ'(y)`.
    #[inline]
    pub fn integrand(&self, y: f64) -> f64 {
        let drive = (self.invader.b * y - self.competitor_pressure(y)).max(0.0);
        self.recruitment(y) * drive - self.invader.delta * y
    }

    /// Factored closed form of `Γ'(y)`:
    /// `−δy` below `χ₀`, and above it
    /// `(F*−y)/((b/K)y+μ+ν) · (δ b/K · y − ρν b_r F_r* cosh / F*^ζ · (F*−y)^{ζ−1})`.
    pub fn derivative_closed_form(&self, y: f64) -> f64 {
        if y <= self.chi0 {
            return -self.invader.delta * y;
        }
        let fs = self.f_inv_star;
        let gap = fs - y;
        if gap <= 0.0 {
            return 0.0;
        }
        let denom = self.invader.b / self.k_inv * y + self.invader.aquatic_outflow();
        gap / denom * self.slope_factor(y)
    }

    /// Bracketed factor `h(y)` of the closed-form derivative; its sign is
    /// the sign of `Γ'` on `(χ₀, F*)`.
    pub fn slope_factor(&self, y: f64) -> f64 {
        let (a, b) = self.slope_coefficients();
        let gap = self.f_inv_star - y;
        a * y - b * gap.powf(self.zeta - 1.0)
    }

    fn slope_coefficients(&self) -> (f64, f64) {
        let a = self.invader.delta * self.invader.b / self.k_inv;
        let b = self.rho * self.invader.nu * self.resident.b * self.f_res_star * self.cosh_factor
            / self.f_inv_star.powf(self.zeta);
        (a, b)
    }

    fn activation_point(&self) -> Result<f64> {
        let g = |chi: f64| self.invader.b * chi - self.competitor_pressure(chi);
        bisect(g, 0.0, self.f_inv_star, 1e-15, 200)
    }

    /// `Γ(χ)` for `χ ∈ [0, F*]`.
    pub fn gamma(&self, chi: f64) -> Result<f64> {
        let fs = self.f_inv_star;
        if !(chi >= 0.0 && chi <= fs * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!("chi = {chi} outside [0, {fs}]")));
        }
        let chi = chi.min(fs);
        let below = chi.min(self.chi0);
        let mut value = -0.5 * self.invader.delta * below * below;
        if chi > self.chi0 {
            value += adaptive_simpson(
                &|y| self.integrand(y),
                self.chi0,
                chi,
                QUAD_REL_TOL,
                QUAD_ABS_TOL,
            );
        }
        Ok(value)
    }

    /// `Γ(b) − Γ(a)` for `0 ≤ a ≤ b ≤ F*`, integrated directly so that
    /// short intervals keep full relative accuracy. Uses the factored
    /// derivative, which stays well conditioned next to `F*`.
    pub fn gamma_increment(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return -self.gamma_increment(b, a);
        }
        let mut value = 0.0;
        let split = self.chi0.clamp(a, b);
        if split > a {
            value -= 0.5 * self.invader.delta * (split * split - a * a);
        }
        if b > split {
            value += adaptive_simpson(
                &|y| self.derivative_closed_form(y),
                split,
                b,
                QUAD_REL_TOL,
                0.0,
            );
        }
        value
    }
}

/// Summary of `Γ` on `[0, F*]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaResult {
    pub value_at_fstar: f64,
    pub argmax: f64,
    pub max_value: f64,
    pub chi0: f64,
    pub invasion: bool,
}

/// Evaluates `Γ(F*)`, `χ₀` and the maximiser of `Γ` on `[0, F*]`.
///
/// For `ζ ≥ 1`, `Γ` decreases then increases, so the maximiser is `F*`
/// whenever `Γ(F*) ≥ 0`. For `ζ < 1` the slope factor is concave and the
/// interior maximiser is its larger root, when it has one.
pub fn gamma_analysis(spec: &GammaSpec) -> Result<GammaResult> {
    let fs = spec.f_inv_star;
    let value_at_fstar = spec.gamma(fs)?;
    let mut candidates = vec![(0.0, 0.0), (fs, value_at_fstar)];
    if spec.zeta < 1.0 {
        if let Some(u) = interior_maximiser(spec)? {
            candidates.push((u, spec.gamma(u)?));
        }
    }
    let (argmax, max_value) = candidates
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |best, c| {
            if c.1 > best.1 {
                c
            } else {
                best
            }
        });
    Ok(GammaResult {
        value_at_fstar,
        argmax,
        max_value,
        chi0: spec.chi0,
        invasion: value_at_fstar > 0.0,
    })
}

/// Larger root of the slope factor on `(χ₀, F*)` when `ζ < 1`.
fn interior_maximiser(spec: &GammaSpec) -> Result<Option<f64>> {
    let fs = spec.f_inv_star;
    let zeta = spec.zeta;
    let (a, b) = spec.slope_coefficients();
    // h'(y) = a − b(1−ζ)(F*−y)^{ζ−2} vanishes at the peak of the concave h.
    let peak = fs - (a / (b * (1.0 - zeta))).powf(1.0 / (zeta - 2.0));
    let peak = peak.max(spec.chi0);
    if peak.partial_cmp(&fs) != Some(Ordering::Less) || spec.slope_factor(peak) <= 0.0 {
        return Ok(None);
    }
    let mut hi = fs * (1.0 - 1e-12);
    while spec.slope_factor(hi) >= 0.0 {
        let next = 0.5 * (hi + fs);
        if next == hi {
            return Ok(Some(fs));
        }
        hi = next;
    }
    bisect(|y| spec.slope_factor(y), peak, hi, 1e-15, 200).map(Some)
}
