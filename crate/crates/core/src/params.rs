//! Biological parameters and carrying-capacity landscapes.

use crate::error::{Error, Result};

/// Per-species rates. Units: 1/day for the rates, km²/day for `diffusion`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeciesParams {
    /// Birth rate `b`.
    pub b: f64,
    /// Aquatic-phase death rate `μ`.
    pub mu: f64,
    /// Emergence rate `ν`.
    pub nu: f64,
    /// Adult death rate `δ`.
    pub delta: f64,
    /// Adult diffusivity `D`.
    pub diffusion: f64,
}

impl SpeciesParams {
    pub fn new(b: f64, mu: f64, nu: f64, delta: f64, diffusion: f64) -> Result<Self> {
        let sp = Self {
            b,
            mu,
            nu,
            delta,
            diffusion,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("b", self.b),
            ("mu", self.mu),
            ("nu", self.nu),
            ("delta", self.delta),
            ("D", self.diffusion),
        ] {
            positive(name, value)?;
        }
        Ok(())
    }

    /// `μ + ν`, the total outflow rate of the aquatic phase.
    #[inline]
    pub fn aquatic_outflow(&self) -> f64 {
        self.mu + self.nu
    }

    /// Spatial decay rate `sqrt(δ/D)` of a linear adult profile.
    #[inline]
    pub fn decay_rate(&self) -> f64 {
        (self.delta / self.diffusion).sqrt()
    }

    /// Species 1 of the reference parameter table.
    pub fn reference_species1() -> Self {
        Self {
            b: 10.0,
            mu: 0.03,
            nu: 0.05,
            delta: 0.04,
            diffusion: 0.025,
        }
    }

    /// Species 2 of the reference parameter table.
    pub fn reference_species2() -> Self {
        Self {
            b: 8.0,
            mu: 0.04,
            nu: 0.05,
            delta: 0.07,
            diffusion: 0.025,
        }
    }
}

/// Parameters shared by both species.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SharedParams {
    /// Sex ratio, in (0, 1].
    pub rho: f64,
    /// Larval competition rate (km²/day).
    pub c: f64,
}

impl SharedParams {
    pub fn new(rho: f64, c: f64) -> Result<Self> {
        let s = Self { rho, c };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_rho(self.rho)?;
        positive("c", self.c)
    }

    pub fn reference() -> Self {
        Self { rho: 0.49, c: 40.0 }
    }
}

/// Piecewise-constant carrying capacities `K₁(x)`, `K₂(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Habitat {
    Constant {
        k1: f64,
        k2: f64,
    },
    /// Forest patch (`x < 0`) and urban patch (`x ≥ 0`).
    TwoPatch {
        k1_forest: f64,
        k1_urban: f64,
        k2_forest: f64,
        k2_urban: f64,
    },
}

impl Habitat {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Habitat::Constant { k1, k2 } => {
                positive("K1", k1)?;
                positive("K2", k2)
            }
            Habitat::TwoPatch {
                k1_forest,
                k1_urban,
                k2_forest,
                k2_urban,
            } => {
                positive("K1F", k1_forest)?;
                positive("K1U", k1_urban)?;
                positive("K2F", k2_forest)?;
                positive("K2U", k2_urban)
            }
        }
    }

    /// Carrying capacities at position `x`. The interface node `x = 0`
    /// belongs to the urban patch.
    #[inline]
    pub fn capacities_at(&self, x: f64) -> (f64, f64) {
        match *self {
            Habitat::Constant { k1, k2 } => (k1, k2),
            Habitat::TwoPatch {
                k1_forest,
                k1_urban,
                k2_forest,
                k2_urban,
            } => {
                if x < 0.0 {
                    (k1_forest, k2_forest)
                } else {
                    (k1_urban, k2_urban)
                }
            }
        }
    }

    /// `(‖K₁‖∞, ‖K₂‖∞)`.
    pub fn sup(&self) -> (f64, f64) {
        match *self {
            Habitat::Constant { k1, k2 } => (k1, k2),
            Habitat::TwoPatch {
                k1_forest,
                k1_urban,
                k2_forest,
                k2_urban,
            } => (k1_forest.max(k1_urban), k2_forest.max(k2_urban)),
        }
    }

    /// `(inf K₁, inf K₂)`.
    pub fn inf(&self) -> (f64, f64) {
        match *self {
            Habitat::Constant { k1, k2 } => (k1, k2),
            Habitat::TwoPatch {
                k1_forest,
                k1_urban,
                k2_forest,
                k2_urban,
            } => (k1_forest.min(k1_urban), k2_forest.min(k2_urban)),
        }
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be strictly positive and finite",
        })
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho.is_finite() && rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "rho",
            value: rho,
            reason: "sex ratio must lie in (0, 1]",
        })
    }
}
