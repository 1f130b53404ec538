//! Scenario files: flat `key = value` lines with dotted sections.
//!
//! ```text
//! # comment
//! species1.b = 10
//! habitat.kind = two_patch
//! initial.recipe = blocks
//! initial.E1.value = 1000
//! ```

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::criterion::{Direction, GammaSpec, Patch};
use crate::error::{Error, Result};
use crate::params::{Habitat, SharedParams, SpeciesParams};
use crate::profiles::{
    half_space_stationary, homogeneous_initial_data, HalfLine, DEFAULT_MAX_SWEEPS,
};
use crate::sim::{block_initial_data, Block, FullState, Grid1D, Model, SimConfig, State, System};

/// Monotone-iteration stopping tolerance relative to the larger equilibrium.
pub const HALF_SPACE_REL_TOL: f64 = 1e-13;

/// How the initial state is built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialRecipe {
    /// Indicator blocks for `(E₁, F₁, E₂, F₂)`.
    Blocks([Block; 4]),
    /// Half-space stationary front translated by `x0` (constant habitat).
    Stationary { x0: f64, direction: Direction },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scenario {
    pub system: System,
    pub sim: SimConfig,
    pub initial: InitialRecipe,
}

const FIELDS: [&str; 4] = ["E1", "F1", "E2", "F2"];

struct Entries {
    map: BTreeMap<String, (String, usize)>,
    used: RefCell<BTreeSet<String>>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() {
                return Err(Error::Config {
                    line,
                    message: format!("empty key or value in `{content}`"),
                });
            }
            if let Some((_, first)) = map.insert(key.to_string(), (value.to_string(), line)) {
                return Err(Error::Config {
                    line,
                    message: format!("duplicate key `{key}` (first set on line {first})"),
                });
            }
        }
        Ok(Self {
            map,
            used: RefCell::default(),
        })
    }

    fn raw(&self, key: &str) -> Result<(&str, usize)> {
        self.used.borrow_mut().insert(key.to_string());
        self.map
            .get(key)
            .map(|(v, l)| (v.as_str(), *l))
            .ok_or_else(|| Error::MissingKey(key.to_string()))
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(_, l)| *l)
    }

    fn f64(&self, key: &str) -> Result<f64> {
        let (v, line) = self.raw(key)?;
        v.parse::<f64>().map_err(|_| Error::Config {
            line,
            message: format!("`{key}`: `{v}` is not a number"),
        })
    }

    fn usize(&self, key: &str) -> Result<usize> {
        let (v, line) = self.raw(key)?;
        v.parse::<usize>().map_err(|_| Error::Config {
            line,
            message: format!("`{key}`: `{v}` is not a non-negative integer"),
        })
    }

    fn str(&self, key: &str) -> Result<(&str, usize)> {
        self.raw(key)
    }

    /// Rejects keys that were never read, reporting the earliest one.
    fn reject_unknown(&self) -> Result<()> {
        let used = self.used.borrow();
        let first = self
            .map
            .iter()
            .filter(|(k, _)| !used.contains(*k))
            .min_by_key(|(_, (_, line))| *line);
        match first {
            Some((key, (_, line))) => Err(Error::Config {
                line: *line,
                message: format!("unknown key `{key}`"),
            }),
            None => Ok(()),
        }
    }

    /// Wraps a validation error with the line of `key`.
    fn at(&self, key: &str, err: Error) -> Error {
        Error::Config {
            line: self.line(key),
            message: format!("`{key}`: {err}"),
        }
    }
}

fn species(e: &Entries, prefix: &str) -> Result<SpeciesParams> {
    let get = |k: &str| e.f64(&format!("{prefix}.{k}"));
    let sp = SpeciesParams {
        b: get("b")?,
        mu: get("mu")?,
        nu: get("nu")?,
        delta: get("delta")?,
        diffusion: get("D")?,
    };
    sp.validate().map_err(|err| {
        let key = match &err {
            Error::InvalidParameter { name, .. } => format!("{prefix}.{name}"),
            _ => format!("{prefix}.b"),
        };
        e.at(&key, err)
    })?;
    Ok(sp)
}

impl Scenario {
    /// Parses scenario text; errors carry the offending line number.
    pub fn parse(text: &str) -> Result<Self> {
        let e = Entries::parse(text)?;
        let sp1 = species(&e, "species1")?;
        let sp2 = species(&e, "species2")?;
        let shared = SharedParams {
            rho: e.f64("shared.rho")?,
            c: e.f64("shared.c")?,
        };
        shared.validate().map_err(|err| match &err {
            Error::InvalidParameter { name: "c", .. } => e.at("shared.c", err),
            _ => e.at("shared.rho", err),
        })?;

        let habitat = match e.str("habitat.kind")? {
            ("constant", _) => Habitat::Constant {
                k1: e.f64("habitat.K1")?,
                k2: e.f64("habitat.K2")?,
            },
            ("two_patch", _) => Habitat::TwoPatch {
                k1_forest: e.f64("habitat.K1F")?,
                k1_urban: e.f64("habitat.K1U")?,
                k2_forest: e.f64("habitat.K2F")?,
                k2_urban: e.f64("habitat.K2U")?,
            },
            (other, line) => {
                return Err(Error::Config {
                    line,
                    message: format!(
                        "habitat.kind must be `constant` or `two_patch`, found `{other}`"
                    ),
                })
            }
        };
        habitat.validate().map_err(|err| match &err {
            Error::InvalidParameter { name, .. } => e.at(&format!("habitat.{name}"), err),
            _ => e.at("habitat.kind", err),
        })?;

        let grid = Grid1D::new(
            e.f64("grid.x_min")?,
            e.f64("grid.x_max")?,
            e.usize("grid.n_nodes")?,
        )
        .map_err(|err| e.at("grid.n_nodes", err))?;
        let sim = SimConfig {
            grid,
            dt: e.f64("time.dt")?,
            t_end: e.f64("time.t_end")?,
            output_stride: e.usize("time.output_stride")?,
        };
        sim.validate().map_err(|err| e.at("time.dt", err))?;

        let initial = match e.str("initial.recipe")? {
            ("blocks", _) => {
                let mut blocks = [Block {
                    value: 0.0,
                    lo: 0.0,
                    hi: 0.0,
                }; 4];
                for (b, name) in blocks.iter_mut().zip(FIELDS) {
                    let key = |k: &str| format!("initial.{name}.{k}");
                    *b = Block {
                        value: e.f64(&key("value"))?,
                        lo: e.f64(&key("lo"))?,
                        hi: e.f64(&key("hi"))?,
                    };
                    let bad = if !(b.value >= 0.0 && b.value.is_finite()) {
                        Some("value must be finite and non-negative")
                    } else if !matches!(
                        b.lo.partial_cmp(&b.hi),
                        Some(Ordering::Less | Ordering::Equal)
                    ) {
                        Some("interval must satisfy lo <= hi")
                    } else if b.lo < grid.x_min || b.hi > grid.x_max {
                        Some("interval must lie within the grid")
                    } else {
                        None
                    };
                    if let Some(msg) = bad {
                        return Err(Error::Config {
                            line: e.line(&key("value")).max(e.line(&key("lo"))),
                            message: format!("initial.{name}: {msg}"),
                        });
                    }
                }
                InitialRecipe::Blocks(blocks)
            }
            ("stationary", line) => {
                if !matches!(habitat, Habitat::Constant { .. }) {
                    return Err(Error::Config {
                        line,
                        message: "the stationary recipe needs a constant habitat".into(),
                    });
                }
                let x0 = e.f64("initial.x0")?;
                if !(x0 >= grid.x_min && x0 <= grid.x_max) {
                    return Err(Error::Config {
                        line: e.line("initial.x0"),
                        message: format!("initial.x0 = {x0} lies outside the grid"),
                    });
                }
                let direction = match e.str("initial.direction")? {
                    ("1", _) => Direction::Species1Invades,
                    ("2", _) => Direction::Species2Invades,
                    (other, line) => {
                        return Err(Error::Config {
                            line,
                            message: format!("initial.direction must be 1 or 2, found `{other}`"),
                        })
                    }
                };
                InitialRecipe::Stationary { x0, direction }
            }
            (other, line) => {
                return Err(Error::Config {
                    line,
                    message: format!(
                        "initial.recipe must be `blocks` or `stationary`, found `{other}`"
                    ),
                })
            }
        };
        e.reject_unknown()?;

        Ok(Self {
            system: System {
                sp1,
                sp2,
                shared,
                habitat,
            },
            sim,
            initial,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Serialises with shortest round-trip float formatting, so parsing the
    /// output reproduces every value bit for bit.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let sys = &self.system;
        for (name, sp) in [("species1", &sys.sp1), ("species2", &sys.sp2)] {
            for (k, v) in [
                ("b", sp.b),
                ("mu", sp.mu),
                ("nu", sp.nu),
                ("delta", sp.delta),
                ("D", sp.diffusion),
            ] {
                let _ = writeln!(s, "{name}.{k} = {v}");
            }
        }
        let _ = writeln!(s, "shared.rho = {}", sys.shared.rho);
        let _ = writeln!(s, "shared.c = {}", sys.shared.c);
        match sys.habitat {
            Habitat::Constant { k1, k2 } => {
                let _ = writeln!(
                    s,
                    "habitat.kind = constant\nhabitat.K1 = {k1}\nhabitat.K2 = {k2}"
                );
            }
            Habitat::TwoPatch {
                k1_forest,
                k1_urban,
                k2_forest,
                k2_urban,
            } => {
                let _ = writeln!(
                    s,
                    "habitat.kind = two_patch\nhabitat.K1F = {k1_forest}\nhabitat.K1U = {k1_urban}\nhabitat.K2F = {k2_forest}\nhabitat.K2U = {k2_urban}"
                );
            }
        }
        let g = &self.sim.grid;
        let _ = writeln!(
            s,
            "grid.x_min = {}\ngrid.x_max = {}\ngrid.n_nodes = {}",
            g.x_min, g.x_max, g.n_nodes
        );
        let _ = writeln!(
            s,
            "time.dt = {}\ntime.t_end = {}\ntime.output_stride = {}",
            self.sim.dt, self.sim.t_end, self.sim.output_stride
        );
        match self.initial {
            InitialRecipe::Blocks(blocks) => {
                let _ = writeln!(s, "initial.recipe = blocks");
                for (b, name) in blocks.iter().zip(FIELDS) {
                    let _ = writeln!(
                        s,
                        "initial.{name}.value = {}\ninitial.{name}.lo = {}\ninitial.{name}.hi = {}",
                        b.value, b.lo, b.hi
                    );
                }
            }
            InitialRecipe::Stationary { x0, direction } => {
                let d = match direction {
                    Direction::Species1Invades => 1,
                    Direction::Species2Invades => 2,
                };
                let _ = writeln!(
                    s,
                    "initial.recipe = stationary\ninitial.x0 = {x0}\ninitial.direction = {d}"
                );
            }
        }
        s
    }

    /// First 12 hex digits of the SHA-256 of the canonical serialisation.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_config_string().as_bytes());
        digest.iter().take(6).fold(String::new(), |mut acc, b| {
            let _ = write!(acc, "{b:02x}");
            acc
        })
    }

    /// Initial state for `model`. The stationary recipe builds the
    /// half-space front on a grid aligned with the simulation grid; for the
    /// full model the aquatic densities are `E₁ = w₊`, `E₂ = w₋`.
    pub fn initial_state(&self, model: Model) -> Result<State> {
        let grid = &self.sim.grid;
        let reduced = match self.initial {
            InitialRecipe::Blocks(blocks) => {
                let full = block_initial_data(grid, blocks);
                return Ok(match model {
                    Model::Full => State::Full(full),
                    Model::Reduced => State::Reduced(full.to_reduced()),
                });
            }
            InitialRecipe::Stationary { x0, direction } => {
                let sys = &self.system;
                let spec = GammaSpec::for_patch(
                    direction,
                    Patch::Homogeneous,
                    &sys.sp1,
                    &sys.sp2,
                    sys.shared.rho,
                    &sys.habitat,
                )?;
                let half_line = HalfLine::covering(HalfLine::default_extent(&spec), grid.dx)?;
                let tol = HALF_SPACE_REL_TOL * spec.f_inv_star.max(spec.f_res_star);
                let half = half_space_stationary(&spec, &half_line, tol, DEFAULT_MAX_SWEEPS)?;
                homogeneous_initial_data(&half, direction, x0, grid)
            }
        };
        Ok(match model {
            Model::Reduced => State::Reduced(reduced),
            Model::Full => State::Full(FullState {
                e1: reduced.w.iter().map(|w| w.max(0.0)).collect(),
                e2: reduced.w.iter().map(|w| (-w).max(0.0)).collect(),
                f1: reduced.f1,
                f2: reduced.f2,
                time: 0.0,
            }),
        })
    }

    /// Homogeneous invasion setup with the reference parameters.
    pub fn reference() -> Self {
        Self::parse(REFERENCE).expect("reference scenario parses")
    }

    /// Forest/urban setup with the reference parameters.
    pub fn reference_two_patch() -> Self {
        Self::parse(REFERENCE_TWO_PATCH).expect("two-patch scenario parses")
    }
}

/// Text of the reference homogeneous scenario.
pub const REFERENCE: &str = include_str!("../../../scenarios/default.conf");
/// Text of the reference two-patch scenario.
pub const REFERENCE_TWO_PATCH: &str = include_str!("../../../scenarios/two_patch.conf");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_round_trips() {
        for sc in [Scenario::reference(), Scenario::reference_two_patch()] {
            let again = Scenario::parse(&sc.to_config_string()).unwrap();
            assert_eq!(sc, again);
            assert_eq!(sc.hash(), again.hash());
        }
        assert_ne!(
            Scenario::reference().hash(),
            Scenario::reference_two_patch().hash()
        );
    }

    #[test]
    fn missing_key_is_named() {
        let text = REFERENCE.replace("species1.delta = 0.04", "");
        match Scenario::parse(&text) {
            Err(Error::MissingKey(k)) => assert_eq!(k, "species1.delta"),
            other => panic!("expected missing key, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "species1.b = ten\n";
        match Scenario::parse(text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        let text = "# header\n\nspecies1.b 10\n";
        match Scenario::parse(text) {
            Err(Error::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "a = 1\na = 2\n";
        assert!(matches!(
            Scenario::parse(text),
            Err(Error::Config { line: 2, .. })
        ));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!(
            "{}habitat.K1F = 2000\n",
            Scenario::reference().to_config_string()
        );
        let err = Scenario::parse(&text).unwrap_err();
        let line = text.lines().count();
        match err {
            Error::Config { line: l, message } => {
                assert_eq!(l, line);
                assert!(message.contains("habitat.K1F"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn block_outside_grid_rejected() {
        let text = REFERENCE.replace("initial.E1.lo = -50", "initial.E1.lo = -60");
        assert!(matches!(Scenario::parse(&text), Err(Error::Config { .. })));
    }
}
