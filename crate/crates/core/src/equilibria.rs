//! Space-independent model: reproduction numbers, constant equilibria,
//! their linear stability, and the algebraic `w = 𝒲(F₁, F₂)` map.

use nalgebra::{linalg::Schur, Matrix4};

use crate::error::{Error, Result};
use crate::params::{check_rho, positive, SharedParams, SpeciesParams};

/// Absolute tolerance on eigenvalue real parts for stability labels.
pub const STABILITY_TOL: f64 = 1e-9;

/// Relative tolerance for a vanishing coexistence denominator.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Basic reproduction number `bρν / (δ(μ+ν))`.
pub fn basic_reproduction_number(sp: &SpeciesParams, rho: f64) -> Result<f64> {
    sp.validate()?;
    check_rho(rho)?;
    Ok(sp.b * rho * sp.nu / (sp.delta * sp.aquatic_outflow()))
}

/// Single-species equilibrium `(E*, F*)` for carrying capacity `k`.
pub fn single_species_equilibrium(sp: &SpeciesParams, rho: f64, k: f64) -> Result<(f64, f64)> {
    positive("K", k)?;
    let n = basic_reproduction_number(sp, rho)?;
    if n <= 1.0 {
        return Err(Error::NotViable { species: 0, n });
    }
    let fill = 1.0 - 1.0 / n;
    let e = k * fill;
    let f = rho * sp.nu * k / sp.delta * fill;
    Ok((e, f))
}

/// Adult equilibrium density `F*` only.
pub fn adult_equilibrium(sp: &SpeciesParams, rho: f64, k: f64) -> Result<f64> {
    single_species_equilibrium(sp, rho, k).map(|(_, f)| f)
}

fn viable_fills(sp1: &SpeciesParams, sp2: &SpeciesParams, rho: f64) -> Result<(f64, f64)> {
    let n1 = basic_reproduction_number(sp1, rho)?;
    let n2 = basic_reproduction_number(sp2, rho)?;
    if n1 <= 1.0 {
        return Err(Error::NotViable { species: 1, n: n1 });
    }
    if n2 <= 1.0 {
        return Err(Error::NotViable { species: 2, n: n2 });
    }
    Ok((1.0 - 1.0 / n1, 1.0 - 1.0 / n2))
}

/// Coexistence equilibrium `(Ẽ₁, F̃₁, Ẽ₂, F̃₂)`, or `None` when one of
/// its components is not strictly positive.
pub fn coexistence_equilibrium(
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    shared: &SharedParams,
    k1: f64,
    k2: f64,
) -> Result<Option<[f64; 4]>> {
    positive("K1", k1)?;
    positive("K2", k2)?;
    let rho = shared.rho;
    let c = shared.c;
    if !(c.is_finite() && c >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            value: c,
            reason: "competition rate must be non-negative",
        });
    }
    let (fill1, fill2) = viable_fills(sp1, sp2, rho)?;
    let cross =
        c * c * sp1.delta * sp2.delta * k1 * k2 / (rho * rho * sp1.nu * sp2.nu * sp1.b * sp2.b);
    let denom = 1.0 - cross;
    if denom.abs() <= DEGENERATE_TOL * (1.0 + cross) {
        return Err(Error::Degenerate(format!(
            "coexistence denominator 1 - {cross} vanishes"
        )));
    }
    let num1 = fill1 - c * sp1.delta / (rho * sp1.nu * sp1.b) * k2 * fill2;
    let num2 = fill2 - c * sp2.delta / (rho * sp2.nu * sp2.b) * k1 * fill1;
    let f1 = rho * sp1.nu * k1 / sp1.delta * num1 / denom;
    let f2 = rho * sp2.nu * k2 / sp2.delta * num2 / denom;
    // Components that only survive as round-off of an exact zero count as 0.
    let floor1 = 1e-12 * rho * sp1.nu * k1 / sp1.delta;
    let floor2 = 1e-12 * rho * sp2.nu * k2 / sp2.delta;
    if f1 <= floor1 || f2 <= floor2 {
        return Ok(None);
    }
    let e1 = sp1.delta / (rho * sp1.nu) * f1;
    let e2 = sp2.delta / (rho * sp2.nu) * f2;
    Ok(Some([e1, f1, e2, f2]))
}

/// Larger of the two competition thresholds; above it both
/// single-species equilibria are stable and a coexistence state exists.
pub fn competition_threshold(
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    shared: &SharedParams,
    k1: f64,
    k2: f64,
) -> Result<f64> {
    positive("K1", k1)?;
    positive("K2", k2)?;
    let (a, b) = threshold_branches(sp1, sp2, shared.rho, k1, k2)?;
    Ok(a.max(b))
}

/// The two branches `(c₁, c₂)`: species 2 cannot invade `(E₁*,F₁*,0,0)`
/// iff `c > c₁`; species 1 cannot invade `(0,0,E₂*,F₂*)` iff `c > c₂`.
pub fn threshold_branches(
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    rho: f64,
    k1: f64,
    k2: f64,
) -> Result<(f64, f64)> {
    let (fill1, fill2) = viable_fills(sp1, sp2, rho)?;
    let c1 = rho * sp2.nu * sp2.b / (sp2.delta * k1) * fill2 / fill1;
    let c2 = rho * sp1.nu * sp1.b / (sp1.delta * k2) * fill1 / fill2;
    Ok((c1, c2))
}

/// Right-hand side of the space-independent four-equation system at
/// `state = (E₁, F₁, E₂, F₂)`.
pub fn ode_rhs(
    state: [f64; 4],
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    shared: &SharedParams,
    k1: f64,
    k2: f64,
) -> [f64; 4] {
    let [e1, f1, e2, f2] = state;
    let rho = shared.rho;
    let c = shared.c;
    [
        sp1.b * f1 * (1.0 - e1 / k1) - c * e1 * e2 - sp1.aquatic_outflow() * e1,
        rho * sp1.nu * e1 - sp1.delta * f1,
        sp2.b * f2 * (1.0 - e2 / k2) - c * e1 * e2 - sp2.aquatic_outflow() * e2,
        rho * sp2.nu * e2 - sp2.delta * f2,
    ]
}

/// Jacobian of [`ode_rhs`].
pub fn jacobian(
    state: [f64; 4],
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    shared: &SharedParams,
    k1: f64,
    k2: f64,
) -> Matrix4<f64> {
    let [e1, f1, e2, f2] = state;
    let rho = shared.rho;
    let c = shared.c;
    Matrix4::new(
        -sp1.b * f1 / k1 - c * e2 - sp1.aquatic_outflow(),
        sp1.b * (1.0 - e1 / k1),
        -c * e1,
        0.0,
        rho * sp1.nu,
        -sp1.delta,
        0.0,
        0.0,
        -c * e2,
        0.0,
        -sp2.b * f2 / k2 - c * e1 - sp2.aquatic_outflow(),
        sp2.b * (1.0 - e2 / k2),
        0.0,
        0.0,
        rho * sp2.nu,
        -sp2.delta,
    )
}

/// All non-negative constant equilibria for fixed `K₁`, `K₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumSet {
    pub extinction: [f64; 4],
    /// `(E₁*, F₁*, 0, 0)`; absent when species 1 is not viable.
    pub single1: Option<[f64; 4]>,
    /// `(0, 0, E₂*, F₂*)`; absent when species 2 is not viable.
    pub single2: Option<[f64; 4]>,
    pub coexistence: Option<[f64; 4]>,
    pub n1: f64,
    pub n2: f64,
}

impl EquilibriumSet {
    pub fn compute(
        sp1: &SpeciesParams,
        sp2: &SpeciesParams,
        shared: &SharedParams,
        k1: f64,
        k2: f64,
    ) -> Result<Self> {
        let n1 = basic_reproduction_number(sp1, shared.rho)?;
        let n2 = basic_reproduction_number(sp2, shared.rho)?;
        let single1 = if n1 > 1.0 {
            let (e, f) = single_species_equilibrium(sp1, shared.rho, k1)?;
            Some([e, f, 0.0, 0.0])
        } else {
            None
        };
        let single2 = if n2 > 1.0 {
            let (e, f) = single_species_equilibrium(sp2, shared.rho, k2)?;
            Some([0.0, 0.0, e, f])
        } else {
            None
        };
        let coexistence = if n1 > 1.0 && n2 > 1.0 {
            match coexistence_equilibrium(sp1, sp2, shared, k1, k2) {
                Ok(c) => c,
                Err(Error::Degenerate(_)) => None,
                Err(e) => return Err(e),
            }
        } else {
            None
        };
        Ok(Self {
            extinction: [0.0; 4],
            single1,
            single2,
            coexistence,
            n1,
            n2,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stability {
    Unstable,
    LocallyAsymptoticallyStable,
    Marginal,
}

impl Stability {
    pub fn from_leading_real_part(re: f64) -> Self {
        if re < -STABILITY_TOL {
            Stability::LocallyAsymptoticallyStable
        } else if re > STABILITY_TOL {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Stability::Unstable => "unstable",
            Stability::LocallyAsymptoticallyStable => "locally asymptotically stable",
            Stability::Marginal => "marginal",
        }
    }
}

/// Label and leading eigenvalue real part of one equilibrium.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Classified {
    pub stability: Stability,
    pub leading_real_part: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub extinction: Classified,
    pub single1: Option<Classified>,
    pub single2: Option<Classified>,
    pub coexistence: Option<Classified>,
}

/// Largest real part among the eigenvalues of `m`, via the real Schur form.
pub fn leading_real_part(m: &Matrix4<f64>) -> Result<f64> {
    let schur = Schur::try_new(*m, 1e-14, 10_000)
        .ok_or_else(|| Error::Numerical(format!("Schur iteration failed for Jacobian {m}")))?;
    let eig = schur.complex_eigenvalues();
    let lead = eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !lead.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite eigenvalues for Jacobian {m}"
        )));
    }
    Ok(lead)
}

fn classify(
    state: [f64; 4],
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    shared: &SharedParams,
    k1: f64,
    k2: f64,
) -> Result<Classified> {
    let j = jacobian(state, sp1, sp2, shared, k1, k2);
    let re = leading_real_part(&j)?;
    Ok(Classified {
        stability: Stability::from_leading_real_part(re),
        leading_real_part: re,
    })
}

/// Linear stability of every equilibrium in `eq` from the numerical
/// eigenvalues of the Jacobian.
pub fn equilibrium_stability(
    eq: &EquilibriumSet,
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    shared: &SharedParams,
    k1: f64,
    k2: f64,
) -> Result<StabilityReport> {
    let cls = |s: [f64; 4]| classify(s, sp1, sp2, shared, k1, k2);
    Ok(StabilityReport {
        extinction: cls(eq.extinction)?,
        single1: eq.single1.map(cls).transpose()?,
        single2: eq.single2.map(cls).transpose()?,
        coexistence: eq.coexistence.map(cls).transpose()?,
    })
}

/// `𝒲(F₁, F₂)`: the aquatic-phase difference `w = E₁ − E₂` that makes the
/// `w` equation stationary for given adult densities.
#[inline]
pub fn w_of_f(f1: f64, f2: f64, k1: f64, k2: f64, sp1: &SpeciesParams, sp2: &SpeciesParams) -> f64 {
    let d = sp1.b * f1 - sp2.b * f2;
    if d > 0.0 {
        d / (sp1.b / k1 * f1 + sp1.aquatic_outflow())
    } else if d < 0.0 {
        d / (sp2.b / k2 * f2 + sp2.aquatic_outflow())
    } else {
        0.0
    }
}
