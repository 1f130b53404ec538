//! Semi-implicit time stepping of the full and reduced systems on a
//! bounded interval with zero-flux ends.
//!
//! Each step applies the reaction first and then an implicit diffusion
//! solve for the adult densities. The aquatic pair of the full system is
//! solved by backward Euler node by node, so the stiff competition term
//! `c E₁E₂` neither constrains the step nor spoils the large-`c` limit.

use std::cmp::Ordering;
use std::thread;

use crate::equilibria::{adult_equilibrium, w_of_f};
use crate::error::{Error, Result};
use crate::params::{Habitat, SharedParams, SpeciesParams};

/// Uniform grid on `[x_min, x_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_nodes: usize,
    pub dx: f64,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n_nodes: usize) -> Result<Self> {
        if n_nodes < 3
            || x_max.partial_cmp(&x_min) != Some(Ordering::Greater)
            || !x_min.is_finite()
            || !x_max.is_finite()
        {
            return Err(Error::Usage(format!(
                "grid needs x_min < x_max and at least 3 nodes (got [{x_min}, {x_max}], n = {n_nodes})"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_nodes,
            dx: (x_max - x_min) / (n_nodes - 1) as f64,
        })
    }

    /// `[−50, 50]` km with 2000 nodes.
    pub fn reference() -> Self {
        Self::new(-50.0, 50.0, 2000).expect("valid reference grid")
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_nodes).map(|i| self.x(i))
    }

    /// Trapezoid rule of nodal samples.
    pub fn integrate(&self, values: impl Iterator<Item = f64>) -> f64 {
        let last = self.n_nodes - 1;
        values
            .enumerate()
            .map(|(i, v)| if i == 0 || i == last { 0.5 * v } else { v })
            .sum::<f64>()
            * self.dx
    }
}

/// The four-field state `(E₁, F₁, E₂, F₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState {
    pub e1: Vec<f64>,
    pub f1: Vec<f64>,
    pub e2: Vec<f64>,
    pub f2: Vec<f64>,
    pub time: f64,
}

impl FullState {
    pub fn zeros(n: usize) -> Self {
        Self {
            e1: vec![0.0; n],
            f1: vec![0.0; n],
            e2: vec![0.0; n],
            f2: vec![0.0; n],
            time: 0.0,
        }
    }

    pub fn uniform(n: usize, [e1, f1, e2, f2]: [f64; 4]) -> Self {
        Self {
            e1: vec![e1; n],
            f1: vec![f1; n],
            e2: vec![e2; n],
            f2: vec![f2; n],
            time: 0.0,
        }
    }

    /// `(E₁ − E₂, F₁, F₂)`.
    pub fn to_reduced(&self) -> ReducedState {
        ReducedState {
            w: self.e1.iter().zip(&self.e2).map(|(a, b)| a - b).collect(),
            f1: self.f1.clone(),
            f2: self.f2.clone(),
            time: self.time,
        }
    }
}

/// The three-field state `(w, F₁, F₂)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    pub w: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub time: f64,
}

impl ReducedState {
    pub fn uniform(n: usize, [w, f1, f2]: [f64; 3]) -> Self {
        Self {
            w: vec![w; n],
            f1: vec![f1; n],
            f2: vec![f2; n],
            time: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Full(FullState),
    Reduced(ReducedState),
}

impl State {
    pub fn time(&self) -> f64 {
        match self {
            State::Full(s) => s.time,
            State::Reduced(s) => s.time,
        }
    }

    pub fn set_time(&mut self, t: f64) {
        match self {
            State::Full(s) => s.time = t,
            State::Reduced(s) => s.time = t,
        }
    }

    pub fn f1(&self) -> &[f64] {
        match self {
            State::Full(s) => &s.f1,
            State::Reduced(s) => &s.f1,
        }
    }

    pub fn f2(&self) -> &[f64] {
        match self {
            State::Full(s) => &s.f2,
            State::Reduced(s) => &s.f2,
        }
    }

    pub fn len(&self) -> usize {
        self.f1().len()
    }

    pub fn is_empty(&self) -> bool {
        self.f1().is_empty()
    }
}

/// Model parameters and landscape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct System {
    pub sp1: SpeciesParams,
    pub sp2: SpeciesParams,
    pub shared: SharedParams,
    pub habitat: Habitat,
}

impl System {
    pub fn validate(&self) -> Result<()> {
        self.sp1.validate()?;
        self.sp2.validate()?;
        self.shared.validate()?;
        self.habitat.validate()
    }

    pub fn capacities(&self, grid: &Grid1D) -> (Vec<f64>, Vec<f64>) {
        grid.nodes().map(|x| self.habitat.capacities_at(x)).unzip()
    }

    /// A-priori bounds `max(sup F_i⁰, ρν_i‖K_i‖∞/δ_i)`.
    pub fn adult_bounds(&self, sup_f1: f64, sup_f2: f64) -> (f64, f64) {
        let (k1, k2) = self.habitat.sup();
        let rho = self.shared.rho;
        (
            sup_f1.max(rho * self.sp1.nu * k1 / self.sp1.delta),
            sup_f2.max(rho * self.sp2.nu * k2 / self.sp2.delta),
        )
    }

    /// Largest admissible step for the explicit reaction terms,
    /// `0.9 / max_i(b_i F̂_i / K_i,min + μ_i + ν_i, δ_i)`.
    pub fn max_stable_dt(&self, sup_f1: f64, sup_f2: f64) -> f64 {
        let (b1, b2) = self.adult_bounds(sup_f1, sup_f2);
        let (k1, k2) = self.habitat.inf();
        let rate = |sp: &SpeciesParams, f: f64, k: f64| {
            (sp.b * f / k + sp.aquatic_outflow()).max(sp.delta)
        };
        0.9 / rate(&self.sp1, b1, k1).max(rate(&self.sp2, b2, k2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Full,
    Reduced,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    pub grid: Grid1D,
    pub dt: f64,
    pub t_end: f64,
    pub output_stride: usize,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Usage(format!(
                "time step must be positive (dt = {})",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Usage(format!(
                "t_end must be non-negative (t_end = {})",
                self.t_end
            )));
        }
        if self.output_stride == 0 {
            return Err(Error::Usage("output_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// Zero-flux `(I − dt·D·Δ_h)` on the grid, factored once.
#[derive(Clone, Debug)]
struct Implicit {
    r: f64,
    /// Multiplier of the previous unknown in each forward-sweep row.
    lower: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
    /// Normalised super-diagonal.
    upper: Vec<f64>,
}

impl Implicit {
    fn new(n: usize, r: f64) -> Result<Self> {
        let mut lower = vec![-r; n];
        let mut upper = vec![-r; n];
        lower[0] = 0.0;
        upper[n - 1] = 0.0;
        // Ghost nodes mirror the first interior neighbour.
        upper[0] = -2.0 * r;
        lower[n - 1] = -2.0 * r;
        let diag = 1.0 + 2.0 * r;
        let mut inv_pivot = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = diag - lower[i] * prev;
            if !(pivot.is_finite() && pivot != 0.0) {
                return Err(Error::Numerical(format!(
                    "tridiagonal pivot breakdown at row {i}"
                )));
            }
            inv_pivot[i] = 1.0 / pivot;
            upper[i] *= inv_pivot[i];
            prev = upper[i];
        }
        Ok(Self {
            r,
            lower,
            inv_pivot,
            upper,
        })
    }

    fn solve(&self, rhs: &mut [f64]) {
        if self.r == 0.0 {
            return;
        }
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}

/// Reusable buffers and operators for one grid, system and step size.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub system: System,
    pub grid: Grid1D,
    pub dt: f64,
    k1: Vec<f64>,
    k2: Vec<f64>,
    op1: Implicit,
    op2: Implicit,
}

impl Stepper {
    pub fn new(system: System, grid: Grid1D, dt: f64) -> Result<Self> {
        system.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Usage(format!(
                "time step must be positive (dt = {dt})"
            )));
        }
        let (k1, k2) = system.capacities(&grid);
        let n = grid.n_nodes;
        let inv_h2 = 1.0 / (grid.dx * grid.dx);
        Ok(Self {
            op1: Implicit::new(n, dt * system.sp1.diffusion * inv_h2)?,
            op2: Implicit::new(n, dt * system.sp2.diffusion * inv_h2)?,
            system,
            grid,
            dt,
            k1,
            k2,
        })
    }

    pub fn capacities(&self) -> (&[f64], &[f64]) {
        (&self.k1, &self.k2)
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.grid.n_nodes {
            return Err(Error::Usage(format!(
                "state has {n} nodes, grid has {}",
                self.grid.n_nodes
            )));
        }
        Ok(())
    }

    /// One step of the full system.
    pub fn step_full(&mut self, s: &mut FullState) -> Result<()> {
        self.check_len(s.f1.len())?;
        let dt = self.dt;
        let Self { system, k1, k2, .. } = self;
        let (p1, p2, c, rho) = (&system.sp1, &system.sp2, system.shared.c, system.shared.rho);
        for j in 0..s.e1.len() {
            let (e1, e2, f1, f2) = (s.e1[j], s.e2[j], s.f1[j], s.f2[j]);
            let a1 = 1.0 + dt * (p1.b * f1 / k1[j] + p1.aquatic_outflow());
            let a2 = 1.0 + dt * (p2.b * f2 / k2[j] + p2.aquatic_outflow());
            let (n1, n2) =
                implicit_aquatic(a1, a2, e1 + dt * p1.b * f1, e2 + dt * p2.b * f2, dt * c);
            s.e1[j] = n1;
            s.e2[j] = n2;
            s.f1[j] = f1 + dt * (rho * p1.nu * e1 - p1.delta * f1);
            s.f2[j] = f2 + dt * (rho * p2.nu * e2 - p2.delta * f2);
        }
        self.op1.solve(&mut s.f1);
        self.op2.solve(&mut s.f2);
        s.time += dt;
        Ok(())
    }

    /// One step of the reduced system.
    pub fn step_reduced(&mut self, s: &mut ReducedState) -> Result<()> {
        self.check_len(s.f1.len())?;
        let dt = self.dt;
        let Self { system, k1, k2, .. } = self;
        let (p1, p2, rho) = (&system.sp1, &system.sp2, system.shared.rho);
        for j in 0..s.w.len() {
            let (w, f1, f2) = (s.w[j], s.f1[j], s.f2[j]);
            let (wp, wm) = (w.max(0.0), (-w).max(0.0));
            // w' = S − A(w)·w with A switching between the two aquatic
            // outflows at w = 0; backward Euler picks the branch by sign.
            let num = w + dt * (p1.b * f1 - p2.b * f2);
            let a = if num >= 0.0 {
                p1.b * f1 / k1[j] + p1.aquatic_outflow()
            } else {
                p2.b * f2 / k2[j] + p2.aquatic_outflow()
            };
            s.w[j] = num / (1.0 + dt * a);
            s.f1[j] = f1 + dt * (rho * p1.nu * wp - p1.delta * f1);
            s.f2[j] = f2 + dt * (rho * p2.nu * wm - p2.delta * f2);
        }
        self.op1.solve(&mut s.f1);
        self.op2.solve(&mut s.f2);
        s.time += dt;
        Ok(())
    }

    pub fn step(&mut self, s: &mut State) -> Result<()> {
        match s {
            State::Full(f) => self.step_full(f),
            State::Reduced(r) => self.step_reduced(r),
        }
    }
}

/// Backward-Euler solution of the local aquatic pair
/// `a₁E₁ + γE₁E₂ = s₁`, `a₂E₂ + γE₁E₂ = s₂` with `a_i ≥ 1`, `s_i, γ ≥ 0`.
///
/// `E₁` is the non-negative root of `a₁γE₁² + (a₁a₂ + γ(s₂ − s₁))E₁ − a₂s₁ = 0`.
#[inline]
fn implicit_aquatic(a1: f64, a2: f64, s1: f64, s2: f64, gamma: f64) -> (f64, f64) {
    let b = a1 * a2 + gamma * (s2 - s1);
    let disc = (b * b + 4.0 * a1 * gamma * a2 * s1).sqrt();
    let e1 = if b >= 0.0 {
        if b + disc == 0.0 {
            0.0
        } else {
            2.0 * a2 * s1 / (b + disc)
        }
    } else {
        (disc - b) / (2.0 * a1 * gamma)
    };
    (e1, s2 / (a2 + gamma * e1))
}

/// Advances a copy of `state` by one full-system step.
pub fn step_full(state: &FullState, system: &System, grid: &Grid1D, dt: f64) -> Result<FullState> {
    let mut next = state.clone();
    Stepper::new(*system, *grid, dt)?.step_full(&mut next)?;
    Ok(next)
}

/// Advances a copy of `state` by one reduced-system step.
pub fn step_reduced(
    state: &ReducedState,
    system: &System,
    grid: &Grid1D,
    dt: f64,
) -> Result<ReducedState> {
    let mut next = state.clone();
    Stepper::new(*system, *grid, dt)?.step_reduced(&mut next)?;
    Ok(next)
}

/// Trapezoid rule of `E₁E₂` over the grid.
pub fn segregation_integral(state: &FullState, grid: &Grid1D) -> f64 {
    grid.integrate(state.e1.iter().zip(&state.e2).map(|(a, b)| a * b))
}

/// Position of the first down-crossing of `level` by `f`, scanning from
/// the left with linear interpolation. `x_max` if `f ≥ level` everywhere,
/// `None` if `f` never reaches `level`.
pub fn front_position(f: &[f64], grid: &Grid1D, level: f64) -> Option<f64> {
    let start = f.iter().position(|&v| v >= level)?;
    for j in start..f.len() - 1 {
        if f[j] >= level && f[j + 1] < level {
            let t = (f[j] - level) / (f[j] - f[j + 1]);
            return Some(grid.x(j) + t * grid.dx);
        }
    }
    Some(grid.x_max)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Snapshot times.
    pub times: Vec<f64>,
    /// `∫E₁E₂` at snapshot times (0 for the reduced model).
    pub segregation: Vec<f64>,
    pub sup_f1: Vec<f64>,
    pub sup_f2: Vec<f64>,
    /// Front position at snapshot times; NaN when species 1 is below the level everywhere.
    pub front: Vec<f64>,
    /// `max_t ∫E₁E₂` over every step.
    pub max_segregation: f64,
    /// Largest negative excursion of any field.
    pub positivity_violation: f64,
    /// Largest excursion outside `E_i ≤ K_i` or `−K₂ ≤ w ≤ K₁`.
    pub invariant_violation: f64,
    /// Largest excursion above the a-priori adult bounds.
    pub bound_violation: f64,
}

impl Diagnostics {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,segregation,supF1,supF2,front\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                self.times[i], self.segregation[i], self.sup_f1[i], self.sup_f2[i], self.front[i]
            ));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub snapshots: Vec<State>,
    pub diagnostics: Diagnostics,
}

struct Monitor {
    bounds: (f64, f64),
    front_level: f64,
}

impl Monitor {
    fn new(stepper: &Stepper, initial: &State) -> Self {
        let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        let sys = &stepper.system;
        let (k1_left, _) = sys.habitat.capacities_at(stepper.grid.x_min);
        let f1_star = adult_equilibrium(&sys.sp1, sys.shared.rho, k1_left).unwrap_or(f64::NAN);
        Self {
            bounds: sys.adult_bounds(sup(initial.f1()), sup(initial.f2())),
            front_level: 0.5 * f1_star,
        }
    }

    fn observe(
        &self,
        stepper: &Stepper,
        state: &State,
        step: usize,
        d: &mut Diagnostics,
    ) -> Result<()> {
        let (k1, k2) = stepper.capacities();
        let (b1, b2) = self.bounds;
        let mut finite = true;
        let (mut neg, mut inv, mut over) = (0.0f64, 0.0f64, 0.0f64);
        match state {
            State::Full(s) => {
                let mut seg = 0.0;
                for j in 0..s.e1.len() {
                    let (e1, f1, e2, f2) = (s.e1[j], s.f1[j], s.e2[j], s.f2[j]);
                    finite &= (e1 + f1 + e2 + f2).is_finite();
                    neg = neg.max(-e1).max(-f1).max(-e2).max(-f2);
                    inv = inv.max(e1 - k1[j]).max(e2 - k2[j]);
                    over = over.max(f1 - b1).max(f2 - b2);
                    seg += e1 * e2;
                }
                let n = s.e1.len() - 1;
                seg -= 0.5 * (s.e1[0] * s.e2[0] + s.e1[n] * s.e2[n]);
                d.max_segregation = d.max_segregation.max(seg * stepper.grid.dx);
            }
            State::Reduced(s) => {
                for j in 0..s.w.len() {
                    let (w, f1, f2) = (s.w[j], s.f1[j], s.f2[j]);
                    finite &= (w + f1 + f2).is_finite();
                    neg = neg.max(-f1).max(-f2);
                    inv = inv.max(w - k1[j]).max(-k2[j] - w);
                    over = over.max(f1 - b1).max(f2 - b2);
                }
            }
        }
        if !finite {
            return Err(Error::Numerical(format!("non-finite value at step {step}")));
        }
        d.positivity_violation = d.positivity_violation.max(neg);
        d.invariant_violation = d.invariant_violation.max(inv);
        d.bound_violation = d.bound_violation.max(over);
        Ok(())
    }

    fn record(&self, grid: &Grid1D, state: &State, d: &mut Diagnostics) {
        let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        d.times.push(state.time());
        d.segregation.push(match state {
            State::Full(s) => segregation_integral(s, grid),
            State::Reduced(_) => 0.0,
        });
        d.sup_f1.push(sup(state.f1()));
        d.sup_f2.push(sup(state.f2()));
        d.front
            .push(front_position(state.f1(), grid, self.front_level).unwrap_or(f64::NAN));
    }
}

fn check_initial(state: &State, grid: &Grid1D) -> Result<()> {
    let n = grid.n_nodes;
    let ok = match state {
        State::Full(s) => [&s.e1, &s.f1, &s.e2, &s.f2].iter().all(|v| v.len() == n),
        State::Reduced(s) => [&s.w, &s.f1, &s.f2].iter().all(|v| v.len() == n),
    };
    if !ok {
        return Err(Error::Usage(format!(
            "initial data must have {n} nodes per field"
        )));
    }
    let bad = match state {
        State::Full(s) => [&s.e1, &s.f1, &s.e2, &s.f2]
            .iter()
            .any(|v| v.iter().any(|x| !(x.is_finite() && *x >= 0.0))),
        State::Reduced(s) => {
            [&s.f1, &s.f2]
                .iter()
                .any(|v| v.iter().any(|x| !(x.is_finite() && *x >= 0.0)))
                || s.w.iter().any(|x| !x.is_finite())
        }
    };
    if bad {
        return Err(Error::Domain(
            "initial densities must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

/// Runs to `t_end`, keeping a snapshot every `output_stride` steps (and the
/// initial and final states).
pub fn simulate(config: &SimConfig, system: &System, initial: State) -> Result<Trajectory> {
    config.validate()?;
    check_initial(&initial, &config.grid)?;
    let mut stepper = Stepper::new(*system, config.grid, config.dt)?;
    let monitor = Monitor::new(&stepper, &initial);
    let limit = system.max_stable_dt(
        initial.f1().iter().copied().fold(0.0, f64::max),
        initial.f2().iter().copied().fold(0.0, f64::max),
    );
    if config.dt > limit {
        return Err(Error::Usage(format!(
            "dt = {} exceeds the explicit-reaction bound {limit:.6}",
            config.dt
        )));
    }

    let mut diagnostics = Diagnostics::default();
    let mut state = initial;
    monitor.observe(&stepper, &state, 0, &mut diagnostics)?;
    monitor.record(&config.grid, &state, &mut diagnostics);
    let mut snapshots = vec![state.clone()];
    let n_steps = config.n_steps();
    let t0 = state.time();
    for step in 1..=n_steps {
        stepper.step(&mut state)?;
        state.set_time(t0 + step as f64 * config.dt);
        monitor.observe(&stepper, &state, step, &mut diagnostics)?;
        if step % config.output_stride == 0 || step == n_steps {
            monitor.record(&config.grid, &state, &mut diagnostics);
            snapshots.push(state.clone());
        }
    }
    Ok(Trajectory {
        grid: config.grid,
        snapshots,
        diagnostics,
    })
}

/// Discrete `L¹` distance between `(E₁−E₂, F₁, F₂)` and a reduced state.
pub fn reduced_distance(full: &FullState, reduced: &ReducedState, grid: &Grid1D) -> f64 {
    grid.integrate((0..grid.n_nodes).map(|j| {
        (full.e1[j] - full.e2[j] - reduced.w[j]).abs()
            + (full.f1[j] - reduced.f1[j]).abs()
            + (full.f2[j] - reduced.f2[j]).abs()
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionRow {
    pub c: f64,
    /// `max_t ‖(E₁−E₂, F₁, F₂) − (w, F₁, F₂)‖_{L¹}` over every step.
    pub distance: f64,
    /// `max_t ∫E₁E₂`.
    pub max_segregation: f64,
}

/// For each competition rate, runs the full model alongside the reduced
/// model from the same segregated data and records the time-max distance.
/// The runs are independent and execute on separate threads.
pub fn reduction_experiment(
    config: &SimConfig,
    system: &System,
    initial: &FullState,
    c_values: &[f64],
) -> Result<Vec<ReductionRow>> {
    config.validate()?;
    if c_values.len() < 2 {
        return Err(Error::Usage(
            "reduction experiment needs at least two c values".into(),
        ));
    }
    if c_values
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less))
    {
        return Err(Error::Usage("c values must be strictly ascending".into()));
    }
    check_initial(&State::Full(initial.clone()), &config.grid)?;
    if initial
        .e1
        .iter()
        .zip(&initial.e2)
        .any(|(a, b)| a * b != 0.0)
    {
        return Err(Error::Domain(
            "initial aquatic densities are not segregated (E1·E2 ≠ 0)".into(),
        ));
    }
    thread::scope(|scope| {
        let handles: Vec<_> = c_values
            .iter()
            .map(|&c| {
                scope.spawn(move || -> Result<ReductionRow> {
                    let mut sys = *system;
                    sys.shared = SharedParams::new(sys.shared.rho, c)?;
                    let mut full_stepper = Stepper::new(sys, config.grid, config.dt)?;
                    let mut red_stepper = Stepper::new(sys, config.grid, config.dt)?;
                    let mut full = initial.clone();
                    let mut red = initial.to_reduced();
                    let mut row = ReductionRow {
                        c,
                        distance: reduced_distance(&full, &red, &config.grid),
                        max_segregation: segregation_integral(&full, &config.grid),
                    };
                    for step in 1..=config.n_steps() {
                        full_stepper.step_full(&mut full)?;
                        red_stepper.step_reduced(&mut red)?;
                        let d = reduced_distance(&full, &red, &config.grid);
                        if !d.is_finite() {
                            return Err(Error::Numerical(format!(
                                "non-finite value at step {step} (c = {c})"
                            )));
                        }
                        row.distance = row.distance.max(d);
                        row.max_segregation = row
                            .max_segregation
                            .max(segregation_integral(&full, &config.grid));
                    }
                    Ok(row)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| {
                h.join()
                    .map_err(|_| Error::Numerical("worker thread panicked".into()))?
            })
            .collect()
    })
}

/// Maximal violations of the competitive order `sub ≤ super`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OrderingViolation {
    /// `max (w_sub − w_super)₊`.
    pub w: f64,
    /// `max (F₁_sub − F₁_super)₊`.
    pub f1: f64,
    /// `max (F₂_super − F₂_sub)₊`.
    pub f2: f64,
}

impl OrderingViolation {
    pub fn max(&self) -> f64 {
        self.w.max(self.f1).max(self.f2)
    }
}

/// Compares two reduced trajectories snapshot by snapshot.
pub fn ordering_monitor(sub: &[ReducedState], sup: &[ReducedState]) -> Result<OrderingViolation> {
    if sub.len() != sup.len() {
        return Err(Error::Usage(format!(
            "trajectories have {} and {} snapshots",
            sub.len(),
            sup.len()
        )));
    }
    let mut v = OrderingViolation::default();
    for (a, b) in sub.iter().zip(sup) {
        if a.w.len() != b.w.len() {
            return Err(Error::Usage(format!(
                "snapshots have {} and {} nodes",
                a.w.len(),
                b.w.len()
            )));
        }
        for j in 0..a.w.len() {
            v.w = v.w.max(a.w[j] - b.w[j]);
            v.f1 = v.f1.max(a.f1[j] - b.f1[j]);
            v.f2 = v.f2.max(b.f2[j] - a.f2[j]);
        }
    }
    Ok(v)
}

/// Reduced snapshots of a trajectory (full states are mapped to
/// `(E₁ − E₂, F₁, F₂)`).
pub fn reduced_snapshots(traj: &Trajectory) -> Vec<ReducedState> {
    traj.snapshots
        .iter()
        .map(|s| match s {
            State::Full(f) => f.to_reduced(),
            State::Reduced(r) => r.clone(),
        })
        .collect()
}

/// Piecewise-constant initial data: `value` on `[lo, hi]`, 0 elsewhere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Block {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Block {
    pub fn sample(&self, grid: &Grid1D) -> Vec<f64> {
        grid.nodes()
            .map(|x| {
                if x >= self.lo && x <= self.hi {
                    self.value
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Full state from indicator blocks for `(E₁, F₁, E₂, F₂)`.
pub fn block_initial_data(grid: &Grid1D, blocks: [Block; 4]) -> FullState {
    let [e1, f1, e2, f2] = blocks.map(|b| b.sample(grid));
    FullState {
        e1,
        f1,
        e2,
        f2,
        time: 0.0,
    }
}

/// Reduced state `(w_of_f(F₁, F₂), F₁, F₂)` from adult profiles.
pub fn reduced_from_adults(
    system: &System,
    grid: &Grid1D,
    f1: Vec<f64>,
    f2: Vec<f64>,
) -> ReducedState {
    let w = grid
        .nodes()
        .enumerate()
        .map(|(j, x)| {
            let (k1, k2) = system.habitat.capacities_at(x);
            w_of_f(f1[j], f2[j], k1, k2, &system.sp1, &system.sp2)
        })
        .collect();
    ReducedState {
        w,
        f1,
        f2,
        time: 0.0,
    }
}
