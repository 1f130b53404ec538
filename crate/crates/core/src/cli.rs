//! Command-line front end. `run` parses arguments, executes one command per
//! scenario and returns the process exit code.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};

use crate::criterion::{gamma_analysis, Direction, GammaSpec, Patch};
use crate::equilibria::{competition_threshold, equilibrium_stability, Classified, EquilibriumSet};
use crate::error::{Error, Result};
use crate::output::{write_pgm, write_snapshots_csv};
use crate::params::Habitat;
use crate::profiles::{
    assemble_heterogeneous, half_space_stationary, sub_solution_profile, HalfLine, Profile,
    DEFAULT_MAX_SWEEPS,
};
use crate::scenario::{InitialRecipe, Scenario, HALF_SPACE_REL_TOL};
use crate::sim::{reduction_experiment, simulate, Model, State};

#[derive(Debug, Parser)]
#[command(
    name = "aedes",
    version,
    about = "Two-species mosquito competition: equilibria, invasion criteria, fronts and simulations"
)]
pub struct Cli {
    /// Scenario file; repeat to run several independent scenarios. The
    /// built-in homogeneous scenario is used when omitted.
    #[arg(long = "config", value_name = "PATH", global = true)]
    pub configs: Vec<PathBuf>,
    /// Output directory for reports and artifacts.
    #[arg(long, value_name = "DIR", default_value = "out", global = true)]
    pub out: PathBuf,
    /// Worker threads for several scenarios.
    #[arg(long, value_name = "N", default_value_t = 1, global = true)]
    pub sweep: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<DirectionArg> for Direction {
    fn from(d: DirectionArg) -> Self {
        match d {
            DirectionArg::One => Direction::Species1Invades,
            DirectionArg::Two => Direction::Species2Invades,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatchArg {
    #[value(name = "homogeneous")]
    Homogeneous,
    #[value(name = "F")]
    Forest,
    #[value(name = "U")]
    Urban,
}

impl From<PatchArg> for Patch {
    fn from(p: PatchArg) -> Self {
        match p {
            PatchArg::Homogeneous => Patch::Homogeneous,
            PatchArg::Forest => Patch::Forest,
            PatchArg::Urban => Patch::Urban,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Full,
    Reduced,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => Model::Full,
            ModelArg::Reduced => Model::Reduced,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Reproduction numbers, constant equilibria, threshold and stability.
    Equilibria,
    /// Invasion integral and verdict.
    Criterion {
        #[arg(long, value_enum, default_value = "1")]
        direction: DirectionArg,
        #[arg(long, value_enum, default_value = "homogeneous")]
        patch: PatchArg,
    },
    /// Stationary fronts (half-line for a constant habitat, glued global
    /// profiles for two patches).
    Profile {
        #[arg(long, value_enum, default_value = "1")]
        direction: DirectionArg,
        /// Profile grid spacing in km (defaults to the scenario grid spacing).
        #[arg(long)]
        dx: Option<f64>,
    },
    /// Time integration with snapshot, diagnostics and heatmap output.
    Simulate {
        #[arg(long, value_enum, default_value = "full")]
        model: ModelArg,
    },
    /// Distance between full and reduced runs for increasing competition.
    ReduceCheck {
        #[arg(long, value_delimiter = ',', default_value = "40,160,640")]
        c_values: Vec<f64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Equilibria => "equilibria",
            Command::Criterion { .. } => "criterion",
            Command::Profile { .. } => "profile",
            Command::Simulate { .. } => "simulate",
            Command::ReduceCheck { .. } => "reduce-check",
        }
    }
}

/// Parses `args` (including the program name) and runs. Returns the exit
/// code: 0 success, 2 configuration or usage error, 3 numerical failure,
/// 4 invasion hypothesis not satisfied.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let results = execute(&cli);
    let mut code = 0;
    for r in results {
        match r {
            Ok(report) => {
                print!("{}", report.text);
                if let Some(value) = report.hypothesis_failure {
                    let e = Error::CriterionFailed { value };
                    eprintln!("error: {e}");
                    if code == 0 {
                        code = e.exit_code();
                    }
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                if code == 0 {
                    code = e.exit_code();
                }
            }
        }
    }
    code
}

/// Text report of one command on one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    /// `Γ(F*)` when the invasion hypothesis does not hold.
    pub hypothesis_failure: Option<f64>,
}

impl From<String> for Report {
    fn from(text: String) -> Self {
        Self {
            text,
            hypothesis_failure: None,
        }
    }
}

/// Runs the command for every scenario, in scenario order.
pub fn execute(cli: &Cli) -> Vec<Result<Report>> {
    if cli.sweep == 0 {
        return vec![Err(Error::Usage("--sweep must be at least 1".into()))];
    }
    let sources: Vec<Option<PathBuf>> = if cli.configs.is_empty() {
        vec![None]
    } else {
        cli.configs.iter().cloned().map(Some).collect()
    };
    let job = |src: &Option<PathBuf>| -> Result<Report> {
        let scenario = match src {
            Some(p) => Scenario::load(p).map_err(|e| with_path(p, e))?,
            None => Scenario::reference(),
        };
        fs::create_dir_all(&cli.out)?;
        run_command(&cli.command, &scenario, &cli.out)
    };
    if cli.sweep == 1 || sources.len() == 1 {
        return sources.iter().map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<Report>>>> =
        sources.iter().map(|_| Mutex::new(None)).collect();
    thread::scope(|s| {
        for _ in 0..cli.sweep.min(sources.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= sources.len() {
                    break;
                }
                let r = job(&sources[i]);
                *slots[i].lock().expect("result slot") = Some(r);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("every job ran"))
        .collect()
}

fn with_path(path: &Path, err: Error) -> Error {
    match err {
        Error::Config { line, message } => Error::Config {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

/// Executes one command on one scenario and writes its artifacts to `out`.
/// Returns the human-readable report (also written to disk).
pub fn run_command(command: &Command, sc: &Scenario, out: &Path) -> Result<Report> {
    let stem = format!("{}-{}", command.name(), sc.hash());
    let (report, suffix) = match *command {
        Command::Equilibria => (equilibria_report(sc)?.into(), String::new()),
        Command::Criterion { direction, patch } => {
            let tag = format!(
                "-d{}-{}",
                direction_digit(direction.into()),
                patch_tag(patch.into())
            );
            (criterion_report(sc, direction.into(), patch.into())?, tag)
        }
        Command::Profile { direction, dx } => {
            let tag = format!("-d{}", direction_digit(direction.into()));
            (
                profile_command(sc, direction.into(), dx, out, &format!("{stem}{tag}"))?.into(),
                tag,
            )
        }
        Command::Simulate { model } => {
            let tag = match model {
                ModelArg::Full => "-full",
                ModelArg::Reduced => "-reduced",
            };
            (
                simulate_command(sc, model.into(), out, &format!("{stem}{tag}"))?.into(),
                tag.to_string(),
            )
        }
        Command::ReduceCheck { ref c_values } => (
            reduce_command(sc, c_values, out, &stem)?.into(),
            String::new(),
        ),
    };
    fs::write(out.join(format!("{stem}{suffix}.txt")), &report.text)?;
    Ok(report)
}

fn direction_digit(d: Direction) -> u8 {
    match d {
        Direction::Species1Invades => 1,
        Direction::Species2Invades => 2,
    }
}

fn patch_tag(p: Patch) -> &'static str {
    match p {
        Patch::Homogeneous => "homogeneous",
        Patch::Forest => "F",
        Patch::Urban => "U",
    }
}

fn fmt_state(s: &[f64; 4]) -> String {
    format!("E1 = {}, F1 = {}, E2 = {}, F2 = {}", s[0], s[1], s[2], s[3])
}

fn fmt_class(c: &Classified) -> String {
    format!(
        "{} (leading real part {:.6e})",
        c.stability.label(),
        c.leading_real_part
    )
}

pub fn equilibria_report(sc: &Scenario) -> Result<String> {
    let sys = &sc.system;
    let patches: Vec<(&str, f64, f64)> = match sys.habitat {
        Habitat::Constant { k1, k2 } => vec![("homogeneous", k1, k2)],
        Habitat::TwoPatch {
            k1_forest,
            k1_urban,
            k2_forest,
            k2_urban,
        } => vec![
            ("forest", k1_forest, k2_forest),
            ("urban", k1_urban, k2_urban),
        ],
    };
    let mut r = String::new();
    for (name, k1, k2) in patches {
        let eq = EquilibriumSet::compute(&sys.sp1, &sys.sp2, &sys.shared, k1, k2)?;
        let st = equilibrium_stability(&eq, &sys.sp1, &sys.sp2, &sys.shared, k1, k2)?;
        let _ = writeln!(r, "[{name}] K1 = {k1}, K2 = {k2}, c = {}", sys.shared.c);
        for (i, n) in [(1, eq.n1), (2, eq.n2)] {
            let flag = if n > 1.0 { "viable" } else { "not viable" };
            let _ = writeln!(r, "N{i} = {n} ({flag})");
        }
        let _ = writeln!(
            r,
            "extinction: {} -> {}",
            fmt_state(&eq.extinction),
            fmt_class(&st.extinction)
        );
        match (eq.single1, st.single1) {
            (Some(s), Some(c)) => {
                let _ = writeln!(r, "species 1 only: {} -> {}", fmt_state(&s), fmt_class(&c));
                let _ = writeln!(r, "F1* = {}", s[1]);
            }
            _ => {
                let _ = writeln!(r, "species 1 only: not viable");
            }
        }
        match (eq.single2, st.single2) {
            (Some(s), Some(c)) => {
                let _ = writeln!(r, "species 2 only: {} -> {}", fmt_state(&s), fmt_class(&c));
                let _ = writeln!(r, "F2* = {}", s[3]);
            }
            _ => {
                let _ = writeln!(r, "species 2 only: not viable");
            }
        }
        match (eq.coexistence, st.coexistence) {
            (Some(s), Some(c)) => {
                let _ = writeln!(r, "coexistence: {} -> {}", fmt_state(&s), fmt_class(&c));
            }
            _ => {
                let _ = writeln!(r, "coexistence: none");
            }
        }
        if eq.single1.is_some() && eq.single2.is_some() {
            let t = competition_threshold(&sys.sp1, &sys.sp2, &sys.shared, k1, k2)?;
            let side = if sys.shared.c > t {
                "above"
            } else {
                "at or below"
            };
            let _ = writeln!(r, "competition threshold = {t} (c is {side})");
        }
        r.push('\n');
    }
    Ok(r)
}

pub fn criterion_report(sc: &Scenario, direction: Direction, patch: Patch) -> Result<Report> {
    let sys = &sc.system;
    let spec = GammaSpec::for_patch(
        direction,
        patch,
        &sys.sp1,
        &sys.sp2,
        sys.shared.rho,
        &sys.habitat,
    )?;
    let g = gamma_analysis(&spec)?;
    let mut r = String::new();
    let _ = writeln!(
        r,
        "invader: species {}, patch: {}",
        direction_digit(direction),
        patch_tag(patch)
    );
    let _ = writeln!(
        r,
        "F_inv* = {}\nF_res* = {}",
        spec.f_inv_star, spec.f_res_star
    );
    let _ = writeln!(
        r,
        "L_tilde = {}\nzeta = {}\ncosh factor = {}",
        spec.l_tilde, spec.zeta, spec.cosh_factor
    );
    let _ = writeln!(
        r,
        "chi0 = {}\nargmax = {}\nmax Gamma = {}",
        g.chi0, g.argmax, g.max_value
    );
    let _ = writeln!(r, "Gamma(F*) = {}", g.value_at_fstar);
    let _ = writeln!(r, "invasion = {}", g.invasion);
    Ok(Report {
        text: r,
        hypothesis_failure: (!g.invasion).then_some(g.value_at_fstar),
    })
}

fn write_profile(out: &Path, name: String, p: &Profile) -> Result<()> {
    fs::write(out.join(name), p.to_csv())?;
    Ok(())
}

fn profile_command(
    sc: &Scenario,
    direction: Direction,
    dx: Option<f64>,
    out: &Path,
    stem: &str,
) -> Result<String> {
    let sys = &sc.system;
    let dx = dx.unwrap_or(sc.sim.grid.dx);
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::Usage(format!("--dx must be positive (got {dx})")));
    }
    let mut r = String::new();
    match sys.habitat {
        Habitat::Constant { .. } => {
            let spec = GammaSpec::for_patch(
                direction,
                Patch::Homogeneous,
                &sys.sp1,
                &sys.sp2,
                sys.shared.rho,
                &sys.habitat,
            )?;
            let grid = HalfLine::covering(HalfLine::default_extent(&spec), dx)?;
            let tol = HALF_SPACE_REL_TOL * spec.f_inv_star.max(spec.f_res_star);
            let half = half_space_stationary(&spec, &grid, tol, DEFAULT_MAX_SWEEPS)?;
            let sub = sub_solution_profile(&spec, &grid)?;
            write_profile(out, format!("{stem}-invader.csv"), &half.invader)?;
            write_profile(out, format!("{stem}-resident.csv"), &half.resident)?;
            write_profile(out, format!("{stem}-sub.csv"), &sub)?;
            let _ = writeln!(
                r,
                "half-line [0, {}] with {} nodes",
                grid.x_max(),
                grid.n_nodes
            );
            let _ = writeln!(
                r,
                "sweeps = {}\nresidual = {:e}",
                half.sweeps, half.residual_norm
            );
            let _ = writeln!(
                r,
                "sandwich violation = {:e}",
                half.sandwich_violation(&sub)
            );
            let _ = writeln!(
                r,
                "invader monotone = {}\nresident monotone = {}",
                half.invader.decrease_violation() == 0.0,
                half.resident.increase_violation() == 0.0
            );
            let _ = writeln!(
                r,
                "invader at x_max = {}",
                half.invader.values[grid.n_nodes - 2]
            );
        }
        Habitat::TwoPatch { .. } => {
            let scale = sc.system.habitat.sup().0.max(sc.system.habitat.sup().1);
            let het = assemble_heterogeneous(
                &sys.sp1,
                &sys.sp2,
                sys.shared.rho,
                &sys.habitat,
                dx,
                HALF_SPACE_REL_TOL * scale,
            )?;
            write_profile(out, format!("{stem}-F1-forest.csv"), &het.f1_forest)?;
            write_profile(out, format!("{stem}-F1-urban.csv"), &het.f1_urban)?;
            write_profile(out, format!("{stem}-F2-forest.csv"), &het.f2_forest)?;
            write_profile(out, format!("{stem}-F2-urban.csv"), &het.f2_urban)?;
            let (sf, su) = het.default_shifts();
            let _ = writeln!(
                r,
                "F1F* = {}\nF1U* = {}\nF2F* = {}\nF2U* = {}",
                het.f1_forest_star, het.f1_urban_star, het.f2_forest_star, het.f2_urban_star
            );
            let show = |a: Option<f64>| a.map_or("none".to_string(), |v| v.to_string());
            let _ = writeln!(
                r,
                "alpha_U = {}\nalpha_F = {}",
                show(het.alpha_urban),
                show(het.alpha_forest)
            );
            let _ = writeln!(r, "limit violation = {:e}", het.limit_violation());
            let _ = writeln!(r, "shifts x0_F = {sf}, x0_U = {su}");
            let _ = writeln!(
                r,
                "monotone = {}",
                het.f1_forest.increase_violation() == 0.0
                    && het.f1_urban.increase_violation() == 0.0
                    && het.f2_forest.decrease_violation() == 0.0
                    && het.f2_urban.decrease_violation() == 0.0
            );
        }
    }
    Ok(r)
}

fn simulate_command(sc: &Scenario, model: Model, out: &Path, stem: &str) -> Result<String> {
    let initial = sc.initial_state(model)?;
    let traj = simulate(&sc.sim, &sc.system, initial)?;
    let mut w = BufWriter::new(fs::File::create(out.join(format!("{stem}-snapshots.csv")))?);
    write_snapshots_csv(&traj, &mut w)?;
    fs::write(
        out.join(format!("{stem}-diagnostics.csv")),
        traj.diagnostics.to_csv(),
    )?;
    for (name, field) in [("F1", 0usize), ("F2", 1)] {
        let rows: Vec<&[f64]> = traj
            .snapshots
            .iter()
            .map(|s| if field == 0 { s.f1() } else { s.f2() })
            .collect();
        let mut w = BufWriter::new(fs::File::create(out.join(format!("{stem}-{name}.pgm")))?);
        write_pgm(&rows, &mut w)?;
    }
    let d = &traj.diagnostics;
    let last = traj
        .snapshots
        .last()
        .expect("initial snapshot is always kept");
    let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let mut r = String::new();
    let _ = writeln!(
        r,
        "model = {}",
        if model == Model::Full {
            "full"
        } else {
            "reduced"
        }
    );
    let _ = writeln!(
        r,
        "t_end = {}\nsnapshots = {}",
        last.time(),
        traj.snapshots.len()
    );
    let _ = writeln!(
        r,
        "final sup F1 = {}\nfinal sup F2 = {}",
        sup(last.f1()),
        sup(last.f2())
    );
    let _ = writeln!(
        r,
        "final front = {}",
        d.front.last().copied().unwrap_or(f64::NAN)
    );
    let _ = writeln!(r, "max segregation integral = {}", d.max_segregation);
    let _ = writeln!(
        r,
        "violations: positivity {:e}, invariant set {:e}, a-priori bound {:e}",
        d.positivity_violation, d.invariant_violation, d.bound_violation
    );
    Ok(r)
}

fn reduce_command(sc: &Scenario, c_values: &[f64], out: &Path, stem: &str) -> Result<String> {
    let InitialRecipe::Blocks(_) = sc.initial else {
        return Err(Error::Usage("reduce-check needs block initial data".into()));
    };
    let State::Full(initial) = sc.initial_state(Model::Full)? else {
        unreachable!("full model requested");
    };
    let rows = reduction_experiment(&sc.sim, &sc.system, &initial, c_values)?;
    let mut csv = String::from("c,distance,max_segregation\n");
    let mut r = String::new();
    for row in &rows {
        let _ = writeln!(csv, "{},{},{}", row.c, row.distance, row.max_segregation);
        let _ = writeln!(
            r,
            "c = {}: distance = {}, max segregation = {}",
            row.c, row.distance, row.max_segregation
        );
    }
    fs::write(out.join(format!("{stem}.csv")), csv)?;
    let decreasing = rows.windows(2).all(|w| w[1].distance < w[0].distance);
    let _ = writeln!(r, "distances strictly decreasing = {decreasing}");
    Ok(r)
}
