//! Stationary profiles on half-lines and their heterogeneous gluing.
//!
//! Naming: for a [`GammaSpec`] the invading species plays the role of
//! species 1 in the homogeneous construction (rising from 0 at the
//! boundary to its equilibrium) and the resident that of species 2
//! (decaying from its equilibrium to 0).

use crate::criterion::{gamma_analysis, Direction, GammaSpec};
use crate::equilibria::{adult_equilibrium, w_of_f};
use crate::error::{Error, Result};
use crate::numerics::{interp_uniform, rk4_step, rk4_step2, thomas};
use crate::params::{Habitat, SpeciesParams};
use crate::sim::{Grid1D, ReducedState};

/// Samples on the uniform grid `x_start + i·dx`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub x_start: f64,
    pub dx: f64,
    pub values: Vec<f64>,
    /// Declared boundary value at `x_start`.
    pub left_value: f64,
    /// Declared limit beyond the right end.
    pub right_limit: f64,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_start + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.values.len().saturating_sub(1))
    }

    /// Piecewise-linear evaluation, constant beyond either end.
    pub fn eval(&self, x: f64) -> f64 {
        interp_uniform(self.x_start, self.dx, &self.values, x)
    }

    /// Largest violation of non-decreasing order (0 when monotone).
    pub fn decrease_violation(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[0] - w[1]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Largest violation of non-increasing order (0 when monotone).
    pub fn increase_violation(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// `x,value` CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", self.x(i), v));
        }
        out
    }
}

/// Uniform grid on `[0, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfLine {
    pub dx: f64,
    pub n_nodes: usize,
}

impl HalfLine {
    pub fn new(dx: f64, n_nodes: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) || n_nodes < 3 {
            return Err(Error::Usage(format!(
                "half-line grid needs dx > 0 and >= 3 nodes (dx = {dx}, n = {n_nodes})"
            )));
        }
        Ok(Self { dx, n_nodes })
    }

    /// Smallest grid with spacing `dx` that covers `[0, x_max]`.
    pub fn covering(x_max: f64, dx: f64) -> Result<Self> {
        let n = (x_max / dx - 1e-9).ceil() as usize + 1;
        Self::new(dx, n.max(3))
    }

    /// Default truncation `max(30 km, 20·max √(D/δ))`.
    pub fn default_extent(spec: &GammaSpec) -> f64 {
        let len = |sp: &SpeciesParams| (sp.diffusion / sp.delta).sqrt();
        30f64.max(20.0 * len(&spec.invader).max(len(&spec.resident)))
    }

    pub fn x_max(&self) -> f64 {
        self.dx * (self.n_nodes - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx
    }
}

/// Closed-form comparison functions at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormBounds {
    /// `F̄₁(x) = F*(1 − e^{−√(δ/D)x})`.
    pub f1_over: f64,
    /// `F̲₂(x) = F_r* e^{−√(δ_r/D_r)x}`.
    pub f2_under: f64,
    /// Two-branch `F̄₂`, glued `C¹` at `L̃`.
    pub f2_over: f64,
}

pub fn closed_form_bounds(spec: &GammaSpec, x: f64) -> ClosedFormBounds {
    let a1 = spec.invader.decay_rate();
    let a2 = spec.resident.decay_rate();
    let f1_over = spec.f_inv_star * -(-a1 * x).exp_m1();
    let f2_under = spec.f_res_star * (-a2 * x).exp();
    let l = spec.l_tilde;
    let f2_over = if x < l {
        spec.f_res_star * (1.0 - (-a2 * l).exp() * (a2 * x).sinh())
    } else {
        spec.f_res_star * spec.cosh_factor * (-a2 * x).exp()
    };
    ClosedFormBounds {
        f1_over,
        f2_under,
        f2_over,
    }
}

/// Second derivatives of the closed-form bounds (`F̄₂''` one-sided at `L̃`).
pub fn closed_form_second_derivatives(spec: &GammaSpec, x: f64) -> ClosedFormBounds {
    let a1 = spec.invader.decay_rate();
    let a2 = spec.resident.decay_rate();
    let b = closed_form_bounds(spec, x);
    let f2_over = if x < spec.l_tilde {
        -spec.f_res_star * a2 * a2 * (-a2 * spec.l_tilde).exp() * (a2 * x).sinh()
    } else {
        a2 * a2 * b.f2_over
    };
    ClosedFormBounds {
        f1_over: -a1 * a1 * spec.f_inv_star * (-a1 * x).exp(),
        f2_under: a2 * a2 * b.f2_under,
        f2_over,
    }
}

/// Right-hand side of one stationary equation:
/// `ρν/((b/K)u + μ+ν) · (b u − b_o v)₊ − δ u`, for own density `u` and
/// competitor density `v`.
#[inline]
pub fn stationary_source(
    own: &SpeciesParams,
    other_b: f64,
    rho: f64,
    k: f64,
    u: f64,
    v: f64,
) -> f64 {
    let drive = (own.b * u - other_b * v).max(0.0);
    rho * own.nu / (own.b / k * u + own.aquatic_outflow()) * drive - own.delta * u
}

const SUB_STOP_REL: f64 = 1e-13;

/// `Γ(top) − Γ(u)` from tail integrals over fixed panels plus one short
/// quadrature, so that repeated evaluation stays cheap and never subtracts
/// nearly equal numbers.
struct DeficitTable<'a> {
    spec: &'a GammaSpec,
    top: f64,
    width: f64,
    tails: Vec<f64>,
}

impl<'a> DeficitTable<'a> {
    const PANELS: usize = 1024;

    fn new(spec: &'a GammaSpec, top: f64) -> Self {
        let width = top / Self::PANELS as f64;
        let mut tails = vec![0.0; Self::PANELS + 1];
        for k in (0..Self::PANELS).rev() {
            let hi = if k + 1 == Self::PANELS {
                top
            } else {
                (k + 1) as f64 * width
            };
            tails[k] = tails[k + 1] + spec.gamma_increment(k as f64 * width, hi);
        }
        Self {
            spec,
            top,
            width,
            tails,
        }
    }

    fn eval(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, self.top);
        let k = ((u / self.width) as usize).min(Self::PANELS - 1);
        let hi = if k + 1 == Self::PANELS {
            self.top
        } else {
            (k + 1) as f64 * self.width
        };
        (self.tails[k + 1] + self.spec.gamma_increment(u.min(hi), hi)).max(0.0)
    }
}

/// Non-decreasing solution of `−D U'' = Γ'(U)`, `U(0) = 0`, obtained from
/// the first integral `U' = √((2/D)(max Γ − Γ(U)))`.
pub fn sub_solution_profile(spec: &GammaSpec, grid: &HalfLine) -> Result<Profile> {
    let analysis = gamma_analysis(spec)?;
    if !analysis.invasion {
        return Err(Error::CriterionFailed {
            value: analysis.value_at_fstar,
        });
    }
    let top = analysis.argmax;
    let d = spec.invader.diffusion;
    let table = DeficitTable::new(spec, top);
    let deficit = |u: f64| table.eval(u);
    let slope = |u: f64| (2.0 / d * deficit(u)).sqrt();

    let mut values = Vec::with_capacity(grid.n_nodes);
    values.push(0.0);
    let mut u = 0.0;
    let mut saturated = false;
    // Step-doubling control on each grid interval.
    let tol = 1e-10 * spec.f_inv_star;
    let mut h = grid.dx / 8.0;
    for _ in 1..grid.n_nodes {
        if !saturated {
            let mut remaining = grid.dx;
            while remaining > 0.0 {
                let step = h.min(remaining);
                let full = rk4_step(&slope, u, step);
                let half = rk4_step(&slope, rk4_step(&slope, u, 0.5 * step), 0.5 * step);
                let err = (full - half).abs();
                if err > tol && step > 1e-9 {
                    h = 0.5 * step;
                    continue;
                }
                u = half.min(top);
                remaining -= step;
                if err < 0.01 * tol {
                    h = (2.0 * step).min(grid.dx);
                }
                if top - u <= SUB_STOP_REL * top || deficit(u) == 0.0 {
                    saturated = true;
                    break;
                }
            }
        }
        values.push(if saturated { top } else { u });
    }
    Ok(Profile {
        x_start: 0.0,
        dx: grid.dx,
        values,
        left_value: 0.0,
        right_limit: top,
    })
}

/// Stationary front on a truncated half-line.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpaceSolution {
    pub spec: GammaSpec,
    /// Invader profile, non-decreasing from 0 to `F_inv*`.
    pub invader: Profile,
    /// Resident profile, non-increasing from `F_res*` to 0.
    pub resident: Profile,
    /// Max-norm of the discrete stationary residual on interior nodes.
    pub residual_norm: f64,
    pub sweeps: usize,
}

pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Monotone iteration for the stationary system on `[0, x_max]` with
/// Dirichlet data `(0, F_r*)` at 0 and `(F*, 0)` at `x_max`.
///
/// Starts from the ordered pair `(F̄₁, F̲₂)` and alternates two linear
/// solves, `(−DΔ + δ) u_{k+1} = ρν (b u_k − b_r v_k)₊ / ((b/K)u_k + μ+ν)`
/// and the analogous resident solve using `u_{k+1}`. The frozen source is
/// non-decreasing in the own density and non-increasing in the competitor,
/// so the iterates decrease (invader) and increase (resident) monotonically.
pub fn half_space_stationary(
    spec: &GammaSpec,
    grid: &HalfLine,
    tol: f64,
    max_sweeps: usize,
) -> Result<HalfSpaceSolution> {
    let analysis = gamma_analysis(spec)?;
    if !analysis.invasion {
        return Err(Error::CriterionFailed {
            value: analysis.value_at_fstar,
        });
    }
    let n = grid.n_nodes;
    let mut inv: Vec<f64> = (0..n)
        .map(|i| closed_form_bounds(spec, grid.x(i)).f1_over)
        .collect();
    let mut res: Vec<f64> = (0..n)
        .map(|i| closed_form_bounds(spec, grid.x(i)).f2_under)
        .collect();
    inv[0] = 0.0;
    inv[n - 1] = spec.f_inv_star;
    res[0] = spec.f_res_star;
    res[n - 1] = 0.0;

    let si = LinearSolve::new(&spec.invader, grid);
    let sr = LinearSolve::new(&spec.resident, grid);
    let mut rhs = vec![0.0; n - 2];
    let mut scratch = vec![0.0; n - 2];
    let mut history = Vec::new();
    let mut sweeps = 0;
    loop {
        if sweeps >= max_sweeps {
            let tail = history.len().saturating_sub(8);
            return Err(Error::NonConvergence {
                sweeps,
                history: history[tail..].to_vec(),
            });
        }
        sweeps += 1;
        let mut change: f64 = 0.0;

        let (ip, rp) = (&spec.invader, &spec.resident);
        for j in 1..n - 1 {
            let (u, v) = (inv[j], res[j]);
            rhs[j - 1] = stationary_source(ip, rp.b, spec.rho, spec.k_inv, u, v) + ip.delta * u;
        }
        rhs[0] += si.off * inv[0];
        rhs[n - 3] += si.off * inv[n - 1];
        si.solve(&mut rhs, &mut scratch)?;
        for j in 1..n - 1 {
            change = change.max((rhs[j - 1] - inv[j]).abs());
            inv[j] = rhs[j - 1];
        }

        for j in 1..n - 1 {
            let (u, v) = (res[j], inv[j]);
            rhs[j - 1] = stationary_source(rp, ip.b, spec.rho, spec.k_res, u, v) + rp.delta * u;
        }
        rhs[0] += sr.off * res[0];
        rhs[n - 3] += sr.off * res[n - 1];
        sr.solve(&mut rhs, &mut scratch)?;
        for j in 1..n - 1 {
            change = change.max((rhs[j - 1] - res[j]).abs());
            res[j] = rhs[j - 1];
        }

        if !change.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite iterate at sweep {sweeps}"
            )));
        }
        history.push(change);
        if change < tol {
            break;
        }
    }

    let residual_norm = stationary_residual(spec, grid.dx, &inv, &res);
    Ok(HalfSpaceSolution {
        spec: *spec,
        invader: Profile {
            x_start: 0.0,
            dx: grid.dx,
            values: inv,
            left_value: 0.0,
            right_limit: spec.f_inv_star,
        },
        resident: Profile {
            x_start: 0.0,
            dx: grid.dx,
            values: res,
            left_value: spec.f_res_star,
            right_limit: 0.0,
        },
        residual_norm,
        sweeps,
    })
}

/// `(−DΔ_h + δ)` with Dirichlet ends, as constant tridiagonal coefficients.
struct LinearSolve {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    /// Coupling `D/h²` to a boundary value.
    off: f64,
}

impl LinearSolve {
    fn new(sp: &SpeciesParams, grid: &HalfLine) -> Self {
        let m = grid.n_nodes - 2;
        let off = sp.diffusion / (grid.dx * grid.dx);
        Self {
            lower: vec![-off; m],
            diag: vec![2.0 * off + sp.delta; m],
            upper: vec![-off; m],
            off,
        }
    }

    fn solve(&self, rhs: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        thomas(&self.lower, &self.diag, &self.upper, rhs, scratch)
    }
}

/// Max-norm of the centred-difference residual of both stationary
/// equations over interior nodes.
pub fn stationary_residual(spec: &GammaSpec, dx: f64, inv: &[f64], res: &[f64]) -> f64 {
    let n = inv.len();
    let (ip, rp) = (&spec.invader, &spec.resident);
    let mut worst: f64 = 0.0;
    for j in 1..n - 1 {
        let lap_i = (inv[j + 1] - 2.0 * inv[j] + inv[j - 1]) / (dx * dx);
        let lap_r = (res[j + 1] - 2.0 * res[j] + res[j - 1]) / (dx * dx);
        let ri = -ip.diffusion * lap_i
            - stationary_source(ip, rp.b, spec.rho, spec.k_inv, inv[j], res[j]);
        let rr = -rp.diffusion * lap_r
            - stationary_source(rp, ip.b, spec.rho, spec.k_res, res[j], inv[j]);
        worst = worst.max(ri.abs()).max(rr.abs());
    }
    worst
}

impl HalfSpaceSolution {
    /// Largest amount by which the solution leaves the band
    /// `F̲₁ ≤ F₁ ≤ F̄₁`, `F̲₂ ≤ F₂ ≤ F̄₂` on the grid.
    pub fn sandwich_violation(&self, sub: &Profile) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.invader.len() {
            let x = self.invader.x(i);
            let b = closed_form_bounds(&self.spec, x);
            let u = self.invader.values[i];
            let v = self.resident.values[i];
            worst = worst
                .max(sub.eval(x) - u)
                .max(
                    u - b.f1_over.max(if i + 1 == self.invader.len() {
                        self.spec.f_inv_star
                    } else {
                        0.0
                    }),
                )
                .max(b.f2_under - v)
                .max(v - b.f2_over);
        }
        worst.max(0.0)
    }

    /// One-sided second-order slope of the resident profile at `x = 0`.
    pub fn resident_slope_at_origin(&self) -> f64 {
        boundary_slope(&self.resident)
    }

    pub fn invader_slope_at_origin(&self) -> f64 {
        boundary_slope(&self.invader)
    }
}

fn boundary_slope(p: &Profile) -> f64 {
    let v = &p.values;
    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * p.dx)
}

/// Shooting solution of the single-species stationary equation
/// `−D y'' = ρνb y/((b/K)y + μ+ν) − δ y` between two levels.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeResult {
    /// Length of the bridge (`α ≥ 0`).
    pub alpha: f64,
    /// Profile on `[0, α]` with `y(0) = start_value`, `y(α) = end_value`.
    pub profile: Profile,
}

pub const BRIDGE_MAX_LENGTH: f64 = 1e3;

/// Bridge step as a fraction of the half-line extent.
pub const BRIDGE_STEP_FRACTION: f64 = 1e-5;

/// Integrates backwards from `(end_value, end_slope)` at `x = α` until
/// the solution reaches `start_value`, which fixes `α`.
pub fn bridge_profile(
    sp: &SpeciesParams,
    rho: f64,
    k: f64,
    start_value: f64,
    end_value: f64,
    end_slope: f64,
    step: f64,
) -> Result<BridgeResult> {
    if !(start_value > 0.0 && end_value > 0.0 && step > 0.0) {
        return Err(Error::Construction(format!(
            "bridge needs positive levels and step (start {start_value}, end {end_value}, h {step})"
        )));
    }
    if start_value == end_value {
        return Ok(BridgeResult {
            alpha: 0.0,
            profile: Profile {
                x_start: 0.0,
                dx: step,
                values: Vec::new(),
                left_value: start_value,
                right_limit: end_value,
            },
        });
    }
    let d = sp.diffusion;
    let growth =
        |y: f64| rho * sp.nu * sp.b * y / (sp.b / k * y + sp.aquatic_outflow()) - sp.delta * y;
    // s = α − x; (y, dy/ds).
    let field = |s: [f64; 2]| [s[1], -growth(s[0]) / d];
    let rising = start_value > end_value;
    let reached = |y: f64| {
        if rising {
            y >= start_value
        } else {
            y <= start_value
        }
    };

    let mut samples = vec![[end_value, -end_slope]];
    let mut state = samples[0];
    let max_steps = (BRIDGE_MAX_LENGTH / step).ceil() as usize;
    let mut crossing = None;
    for i in 0..max_steps {
        let next = rk4_step2(&field, state, step);
        if !next[0].is_finite() {
            break;
        }
        if reached(next[0]) {
            let t = (start_value - state[0]) / (next[0] - state[0]);
            crossing = Some((i as f64 + t) * step);
            samples.push(next);
            break;
        }
        samples.push(next);
        state = next;
    }
    let alpha = crossing.ok_or_else(|| {
        Error::Construction(format!(
            "no crossing of level {start_value} within {BRIDGE_MAX_LENGTH} km from ({end_value}, slope {end_slope})"
        ))
    })?;

    // Resample on [0, α] in x with cubic Hermite interpolation in s.
    let m = (alpha / step).ceil().max(1.0) as usize;
    let dx = alpha / m as f64;
    let hermite = |s: f64| -> f64 {
        let i = ((s / step).floor() as usize).min(samples.len() - 2);
        let t = (s - i as f64 * step) / step;
        let [y0, p0] = samples[i];
        let [y1, p1] = samples[i + 1];
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * step * p0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * step * p1
    };
    let mut values: Vec<f64> = (0..=m).map(|j| hermite(alpha - j as f64 * dx)).collect();
    values[0] = start_value;
    values[m] = end_value;
    Ok(BridgeResult {
        alpha,
        profile: Profile {
            x_start: 0.0,
            dx,
            values,
            left_value: start_value,
            right_limit: end_value,
        },
    })
}

/// The four global profiles of the two-patch construction, sampled on a
/// common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HeterogeneousProfiles {
    /// `𝓕₁^F`: non-increasing, `F₁^{F*}` at −∞, zero for `x > 0`.
    pub f1_forest: Profile,
    /// `𝓕₂^U`: non-decreasing, zero for `x < 0`, `F₂^{U*}` at +∞.
    pub f2_urban: Profile,
    /// `𝓕₁^U`: non-increasing, `max(F₁^{U*}, F₁^{F*})` at −∞, 0 at +∞.
    pub f1_urban: Profile,
    /// `𝓕₂^F`: non-decreasing, 0 at −∞, `max(F₂^{U*}, F₂^{F*})` at +∞.
    pub f2_forest: Profile,
    /// Length of the species-1 bridge in the urban patch, when needed.
    pub alpha_urban: Option<f64>,
    /// Signed offset `α^F < 0` of the species-2 bridge, when needed.
    pub alpha_forest: Option<f64>,
    pub f1_forest_star: f64,
    pub f1_urban_star: f64,
    pub f2_forest_star: f64,
    pub f2_urban_star: f64,
}

/// Builds `(𝓕₁^F, 𝓕₂^U, 𝓕₁^U, 𝓕₂^F)` from the two half-space fronts and
/// the bridge profiles, following the case split on the patch equilibria.
pub fn assemble_heterogeneous(
    sp1: &SpeciesParams,
    sp2: &SpeciesParams,
    rho: f64,
    habitat: &Habitat,
    dx: f64,
    tol: f64,
) -> Result<HeterogeneousProfiles> {
    let Habitat::TwoPatch {
        k1_forest,
        k1_urban,
        k2_forest,
        k2_urban,
    } = *habitat
    else {
        // A constant habitat is the degenerate two-patch case.
        let (k1, k2) = habitat.capacities_at(0.0);
        return assemble_heterogeneous(
            sp1,
            sp2,
            rho,
            &Habitat::TwoPatch {
                k1_forest: k1,
                k1_urban: k1,
                k2_forest: k2,
                k2_urban: k2,
            },
            dx,
            tol,
        );
    };
    let spec_f = GammaSpec::new(*sp1, *sp2, rho, k1_forest, k2_forest)?;
    let spec_u = GammaSpec::new(*sp2, *sp1, rho, k2_urban, k1_urban)?;
    let grid_f = HalfLine::covering(HalfLine::default_extent(&spec_f), dx)?;
    let grid_u = HalfLine::covering(HalfLine::default_extent(&spec_u), dx)?;
    let half_f = half_space_stationary(&spec_f, &grid_f, tol, DEFAULT_MAX_SWEEPS)?;
    let half_u = half_space_stationary(&spec_u, &grid_u, tol, DEFAULT_MAX_SWEEPS)?;

    let f1f = adult_equilibrium(sp1, rho, k1_forest)?;
    let f1u = adult_equilibrium(sp1, rho, k1_urban)?;
    let f2f = adult_equilibrium(sp2, rho, k2_forest)?;
    let f2u = adult_equilibrium(sp2, rho, k2_urban)?;

    // Urban-side species-1 bridge: from F₁^{F*} down to F₁^{U*}.
    let bridge_u = if f1f > f1u {
        Some(bridge_profile(
            sp1,
            rho,
            k1_urban,
            f1f,
            f1u,
            half_u.resident_slope_at_origin(),
            grid_u.x_max() * BRIDGE_STEP_FRACTION,
        )?)
    } else {
        None
    };
    // Forest-side species-2 bridge, built on the reflected axis s = −x.
    let bridge_f = if f2f < f2u {
        Some(bridge_profile(
            sp2,
            rho,
            k2_forest,
            f2u,
            f2f,
            half_f.resident_slope_at_origin(),
            grid_f.x_max() * BRIDGE_STEP_FRACTION,
        )?)
    } else {
        None
    };
    let alpha_u = bridge_u.as_ref().map_or(0.0, |b| b.alpha);
    let alpha_f_abs = bridge_f.as_ref().map_or(0.0, |b| b.alpha);

    let x_lo = -(alpha_f_abs + grid_f.x_max());
    let x_hi = alpha_u + grid_u.x_max();
    let n = ((x_hi - x_lo) / dx).ceil() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| x_lo + i as f64 * dx).collect();

    // 𝔽^F lives on x < 0 as the reflection of the half-line front.
    let forest_inv = |x: f64| half_f.invader.eval(-x);
    let forest_res = |x: f64| half_f.resident.eval(-x);
    let urban_inv = |x: f64| half_u.invader.eval(x);
    let urban_res = |x: f64| half_u.resident.eval(x);

    let f1_urban_fn = |x: f64| -> f64 {
        match &bridge_u {
            None => {
                if x < 0.0 {
                    f1u
                } else {
                    urban_res(x)
                }
            }
            Some(b) => {
                if x < 0.0 {
                    f1f
                } else if x <= b.alpha {
                    b.profile.eval(x)
                } else {
                    urban_res(x - b.alpha)
                }
            }
        }
    };
    let f2_urban_fn = |x: f64| -> f64 {
        if x < alpha_u {
            0.0
        } else {
            urban_inv(x - alpha_u)
        }
    };
    let f1_forest_fn = |x: f64| -> f64 {
        let shift = -alpha_f_abs;
        if x < shift {
            forest_inv(x - shift)
        } else {
            0.0
        }
    };
    let f2_forest_fn = |x: f64| -> f64 {
        match &bridge_f {
            None => {
                if x < 0.0 {
                    forest_res(x)
                } else {
                    f2f
                }
            }
            Some(b) => {
                let shift = -b.alpha;
                if x < shift {
                    forest_res(x - shift)
                } else if x <= 0.0 {
                    b.profile.eval(-x)
                } else {
                    f2u
                }
            }
        }
    };
    let sample = |f: &dyn Fn(f64) -> f64, left: f64, right: f64| Profile {
        x_start: x_lo,
        dx,
        values: xs.iter().map(|&x| f(x)).collect(),
        left_value: left,
        right_limit: right,
    };
    Ok(HeterogeneousProfiles {
        f1_forest: sample(&f1_forest_fn, f1f, 0.0),
        f2_urban: sample(&f2_urban_fn, 0.0, f2u),
        f1_urban: sample(&f1_urban_fn, f1f.max(f1u), 0.0),
        f2_forest: sample(&f2_forest_fn, 0.0, f2u.max(f2f)),
        alpha_urban: bridge_u.map(|b| b.alpha),
        alpha_forest: bridge_f.map(|b| -b.alpha),
        f1_forest_star: f1f,
        f1_urban_star: f1u,
        f2_forest_star: f2f,
        f2_urban_star: f2u,
    })
}

impl HeterogeneousProfiles {
    /// Largest deviation from the six limit conditions, evaluated at the
    /// ends of the sampled window and on the half-lines where the profiles
    /// must vanish.
    pub fn limit_violation(&self) -> f64 {
        let last = |p: &Profile| *p.values.last().unwrap_or(&f64::NAN);
        let first = |p: &Profile| *p.values.first().unwrap_or(&f64::NAN);
        let mut worst: f64 = 0.0;
        for i in 0..self.f1_forest.len() {
            let x = self.f1_forest.x(i);
            if x > 0.0 {
                worst = worst.max(self.f1_forest.values[i].abs());
            }
            if x < 0.0 {
                worst = worst.max(self.f2_urban.values[i].abs());
            }
        }
        worst
            .max((first(&self.f1_forest) - self.f1_forest_star).abs())
            .max((first(&self.f1_urban) - self.f1_urban_star.max(self.f1_forest_star)).abs())
            .max(last(&self.f1_urban).abs())
            .max((last(&self.f2_urban) - self.f2_urban_star).abs())
            .max((last(&self.f2_forest) - self.f2_urban_star.max(self.f2_forest_star)).abs())
            .max(first(&self.f2_forest).abs())
    }

    /// Smallest positive multiples of the grid step such that
    /// `𝓕₁^F(·+x₀^F) ≤ 𝓕₁^U(·−x₀^U)` and `𝓕₂^U(·−x₀^U) ≤ 𝓕₂^F(·+x₀^F)`
    /// hold at every node.
    pub fn default_shifts(&self) -> (f64, f64) {
        let dx = self.f1_forest.dx;
        let n = self.f1_forest.len();
        for total in 2..2 * n {
            for kf in 1..total {
                let ku = total - kf;
                let (sf, su) = (kf as f64 * dx, ku as f64 * dx);
                if self.ordering_violation(sf, su) <= 0.0 {
                    return (sf, su);
                }
            }
        }
        (n as f64 * dx, n as f64 * dx)
    }

    /// Largest ordering violation for shifts `(x₀^F, x₀^U)`.
    pub fn ordering_violation(&self, shift_f: f64, shift_u: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.f1_forest.len() {
            let x = self.f1_forest.x(i);
            worst = worst
                .max(self.f1_forest.eval(x + shift_f) - self.f1_urban.eval(x - shift_u))
                .max(self.f2_urban.eval(x - shift_u) - self.f2_forest.eval(x + shift_f));
        }
        worst
    }
}

/// Initial data built from a half-space front translated by `x0`: the
/// invader is extended by 0 and the resident by its equilibrium to the
/// left of `x0`, and `w` follows from the adult densities.
///
/// `direction` tells which species is the invader.
pub fn homogeneous_initial_data(
    half: &HalfSpaceSolution,
    direction: Direction,
    x0: f64,
    grid: &Grid1D,
) -> ReducedState {
    let spec = &half.spec;
    let n = grid.n_nodes;
    let mut inv = vec![0.0; n];
    let mut res = vec![0.0; n];
    for (j, x) in grid.nodes().enumerate() {
        let s = x - x0;
        if s < 0.0 {
            res[j] = spec.f_res_star;
        } else {
            // Snap to the profile nodes when the grids are aligned.
            let k = s / half.invader.dx;
            let s = if (k - k.round()).abs() < 1e-9 {
                k.round() * half.invader.dx
            } else {
                s
            };
            inv[j] = half.invader.eval(s);
            res[j] = half.resident.eval(s);
        }
    }
    let (f1, f2, sp1, sp2, k1, k2) = match direction {
        Direction::Species1Invades => (
            inv,
            res,
            spec.invader,
            spec.resident,
            spec.k_inv,
            spec.k_res,
        ),
        Direction::Species2Invades => (
            res,
            inv,
            spec.resident,
            spec.invader,
            spec.k_res,
            spec.k_inv,
        ),
    };
    let w = f1
        .iter()
        .zip(&f2)
        .map(|(&a, &b)| w_of_f(a, b, k1, k2, &sp1, &sp2))
        .collect();
    ReducedState {
        w,
        f1,
        f2,
        time: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_spec() -> GammaSpec {
        GammaSpec::new(
            SpeciesParams::reference_species1(),
            SpeciesParams::reference_species2(),
            0.49,
            2000.0,
            500.0,
        )
        .unwrap()
    }

    #[test]
    fn bounds_at_origin_and_far_field() {
        let spec = reference_spec();
        let b0 = closed_form_bounds(&spec, 0.0);
        assert_eq!(b0.f1_over, 0.0);
        assert_eq!(b0.f2_under, spec.f_res_star);
        assert_eq!(b0.f2_over, spec.f_res_star);
        let far = 50.0 * (0.025f64 / 0.04).sqrt().max((0.025f64 / 0.07).sqrt());
        let bf = closed_form_bounds(&spec, far);
        assert!((bf.f1_over - spec.f_inv_star).abs() < 1e-9);
        assert!(bf.f2_under < 1e-9 && bf.f2_over < 1e-9);
    }

    #[test]
    fn upper_resident_bound_is_c1_at_interface() {
        let spec = reference_spec();
        let l = spec.l_tilde;
        let h = 1e-7;
        let a = spec.resident.decay_rate();
        let inner = spec.f_res_star * (1.0 - (-a * l).exp() * (a * l).sinh());
        let outer = spec.f_res_star * spec.cosh_factor * (-a * l).exp();
        assert!((inner - outer).abs() < 1e-10 * spec.f_res_star);
        let mid = closed_form_bounds(&spec, l).f2_over;
        let dl = (mid - closed_form_bounds(&spec, l - 2.0 * h).f2_over) / (2.0 * h);
        let dr = (closed_form_bounds(&spec, l + 2.0 * h).f2_over - mid) / (2.0 * h);
        assert!((dl - dr).abs() < 1e-3 * dl.abs(), "{dl} vs {dr}");
    }

    #[test]
    fn degenerate_bridge() {
        let sp = SpeciesParams::reference_species1();
        let b = bridge_profile(&sp, 0.49, 300.0, 181.35, 181.35, -5.0, 1e-3).unwrap();
        assert_eq!(b.alpha, 0.0);
        assert!(b.profile.is_empty());
    }

    #[test]
    fn bridge_without_slope_never_leaves_equilibrium() {
        let sp = SpeciesParams::reference_species1();
        let f = adult_equilibrium(&sp, 0.49, 300.0).unwrap();
        let r = bridge_profile(&sp, 0.49, 300.0, 1209.0, f, 0.0, 0.05);
        assert!(matches!(r, Err(Error::Construction(_))));
    }

    #[test]
    fn sub_solution_starts_at_zero_and_rejects_failed_criterion() {
        let spec = reference_spec();
        let grid = HalfLine::covering(10.0, 0.05).unwrap();
        let p = sub_solution_profile(&spec, &grid).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_eq!(p.decrease_violation(), 0.0);

        let rev = GammaSpec::new(
            SpeciesParams::reference_species2(),
            SpeciesParams::reference_species1(),
            0.49,
            500.0,
            2000.0,
        )
        .unwrap();
        assert!(matches!(
            sub_solution_profile(&rev, &grid),
            Err(Error::CriterionFailed { .. })
        ));
        assert!(matches!(
            half_space_stationary(&rev, &grid, 1e-9, 10),
            Err(Error::CriterionFailed { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_history() {
        let spec = reference_spec();
        let grid = HalfLine::covering(30.0, 0.05).unwrap();
        match half_space_stationary(&spec, &grid, 0.0, 5) {
            Err(Error::NonConvergence { sweeps, history }) => {
                assert_eq!(sweeps, 5);
                assert_eq!(history.len(), 5);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
