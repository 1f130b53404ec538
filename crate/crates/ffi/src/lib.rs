//! C ABI over `aedes-core`.
//!
//! Objects cross the boundary as opaque handles created by `aedes_*_new`,
//! `aedes_*_load` or a computation, and released with the matching
//! `aedes_*_free`. Every fallible call returns an [`AedesStatus`]; on
//! failure the message is kept per thread and read back with
//! [`aedes_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use aedes_core::criterion::{gamma_analysis, Direction, GammaSpec, Patch};
use aedes_core::equilibria::{competition_threshold, EquilibriumSet};
use aedes_core::profiles::{
    half_space_stationary, HalfLine, HalfSpaceSolution, DEFAULT_MAX_SWEEPS,
};
use aedes_core::scenario::{Scenario, HALF_SPACE_REL_TOL};
use aedes_core::sim::{simulate, Model, State, Trajectory};
use aedes_core::{Error, Habitat};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AedesStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    InvalidParameter = 4,
    Numerical = 5,
    CriterionFailed = 6,
    Io = 7,
    Panic = 8,
}

impl From<&Error> for AedesStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config { .. } | Error::MissingKey(_) => AedesStatus::Config,
            Error::InvalidParameter { .. } | Error::NotViable { .. } | Error::Degenerate(_) => {
                AedesStatus::InvalidParameter
            }
            Error::Usage(_) | Error::Domain(_) => AedesStatus::InvalidArgument,
            Error::CriterionFailed { .. } => AedesStatus::CriterionFailed,
            Error::Io(_) => AedesStatus::Io,
            Error::Numerical(_) | Error::NonConvergence { .. } | Error::Construction(_) => {
                AedesStatus::Numerical
            }
        }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AedesDirection {
    Species1Invades = 1,
    Species2Invades = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AedesPatch {
    Homogeneous = 0,
    Forest = 1,
    Urban = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AedesModel {
    Full = 0,
    Reduced = 1,
}

/// Snapshot field. `W` exists only for reduced trajectories, `E1`/`E2`
/// only for full ones.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AedesField {
    E1 = 0,
    F1 = 1,
    E2 = 2,
    F2 = 3,
    W = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AedesFrontSide {
    Invader = 0,
    Resident = 1,
}

/// Constant equilibria of one patch. Entries of a non-viable species are NaN,
/// as is the threshold when it is undefined.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AedesEquilibria {
    pub n1: f64,
    pub n2: f64,
    pub e1_star: f64,
    pub f1_star: f64,
    pub e2_star: f64,
    pub f2_star: f64,
    pub threshold: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AedesCriterion {
    pub f_inv_star: f64,
    pub f_res_star: f64,
    pub l_tilde: f64,
    pub zeta: f64,
    pub chi0: f64,
    pub argmax: f64,
    pub gamma_at_fstar: f64,
    pub invasion: bool,
}

/// Opaque scenario handle.
pub struct AedesScenario(Scenario);

/// Opaque simulation result.
pub struct AedesTrajectory(Trajectory);

/// Opaque stationary front on a half-line.
pub struct AedesFront(HalfSpaceSolution);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), (AedesStatus, String)>>(body: F) -> AedesStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => AedesStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            AedesStatus::Panic
        }
    }
}

type Failure = (AedesStatus, String);

fn core(e: Error) -> Failure {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> Failure {
    (AedesStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    (AedesStatus::InvalidArgument, msg.into())
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

/// Copies `src` into a caller buffer of `len` doubles.
unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Failure> {
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < src.len() {
        return Err(invalid(format!(
            "buffer holds {len} values, {} needed",
            src.len()
        )));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next `aedes_*` call on the same thread.
#[no_mangle]
pub extern "C" fn aedes_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a scenario from `key = value` text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_scenario_parse(
    text: *const c_char,
    out: *mut *mut AedesScenario,
) -> AedesStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let sc = Scenario::parse(c_str(text, "text")?).map_err(core)?;
        *out = Box::into_raw(Box::new(AedesScenario(sc)));
        Ok(())
    })
}

/// Loads a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_scenario_load(
    path: *const c_char,
    out: *mut *mut AedesScenario,
) -> AedesStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let sc = Scenario::load(Path::new(c_str(path, "path")?)).map_err(core)?;
        *out = Box::into_raw(Box::new(AedesScenario(sc)));
        Ok(())
    })
}

/// Built-in reference scenario: homogeneous habitat when `two_patch` is
/// false, forest/urban habitat otherwise.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_scenario_reference(
    two_patch: bool,
    out: *mut *mut AedesScenario,
) -> AedesStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let sc = if two_patch {
            Scenario::reference_two_patch()
        } else {
            Scenario::reference()
        };
        *out = Box::into_raw(Box::new(AedesScenario(sc)));
        Ok(())
    })
}

/// Overrides the time settings of a scenario.
///
/// # Safety
/// `scenario` must come from this library and not be freed.
#[no_mangle]
pub unsafe extern "C" fn aedes_scenario_set_time(
    scenario: *mut AedesScenario,
    dt: f64,
    t_end: f64,
    output_stride: usize,
) -> AedesStatus {
    guard(|| {
        let sc = &mut out_ref(scenario, "scenario")?.0;
        let mut sim = sc.sim;
        sim.dt = dt;
        sim.t_end = t_end;
        sim.output_stride = output_stride;
        sim.validate().map_err(core)?;
        sc.sim = sim;
        Ok(())
    })
}

/// Releases a scenario. NULL is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn aedes_scenario_free(scenario: *mut AedesScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

fn patch_capacities(habitat: &Habitat, patch: AedesPatch) -> Result<(f64, f64), Failure> {
    match (patch, *habitat) {
        (AedesPatch::Homogeneous, Habitat::Constant { k1, k2 }) => Ok((k1, k2)),
        (AedesPatch::Forest, h @ Habitat::TwoPatch { .. }) => Ok(h.capacities_at(-1.0)),
        (AedesPatch::Urban, h @ Habitat::TwoPatch { .. }) => Ok(h.capacities_at(0.0)),
        (AedesPatch::Homogeneous, _) => {
            Err(invalid("two-patch habitat: pick the forest or urban patch"))
        }
        _ => Err(invalid(
            "constant habitat: only the homogeneous patch exists",
        )),
    }
}

/// Reproduction numbers, single-species equilibria and competition
/// threshold for one patch.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_equilibria(
    scenario: *const AedesScenario,
    patch: AedesPatch,
    out: *mut AedesEquilibria,
) -> AedesStatus {
    guard(|| {
        let sys = &deref(scenario, "scenario")?.0.system;
        let out = out_ref(out, "out")?;
        let (k1, k2) = patch_capacities(&sys.habitat, patch)?;
        let eq = EquilibriumSet::compute(&sys.sp1, &sys.sp2, &sys.shared, k1, k2).map_err(core)?;
        let threshold = if eq.single1.is_some() && eq.single2.is_some() {
            competition_threshold(&sys.sp1, &sys.sp2, &sys.shared, k1, k2).map_err(core)?
        } else {
            f64::NAN
        };
        *out = AedesEquilibria {
            n1: eq.n1,
            n2: eq.n2,
            e1_star: eq.single1.map_or(f64::NAN, |s| s[0]),
            f1_star: eq.single1.map_or(f64::NAN, |s| s[1]),
            e2_star: eq.single2.map_or(f64::NAN, |s| s[2]),
            f2_star: eq.single2.map_or(f64::NAN, |s| s[3]),
            threshold,
        };
        Ok(())
    })
}

fn direction(d: AedesDirection) -> Direction {
    match d {
        AedesDirection::Species1Invades => Direction::Species1Invades,
        AedesDirection::Species2Invades => Direction::Species2Invades,
    }
}

fn gamma_spec(sc: &Scenario, d: AedesDirection, patch: AedesPatch) -> Result<GammaSpec, Failure> {
    let patch = match patch {
        AedesPatch::Homogeneous => Patch::Homogeneous,
        AedesPatch::Forest => Patch::Forest,
        AedesPatch::Urban => Patch::Urban,
    };
    let sys = &sc.system;
    GammaSpec::for_patch(
        direction(d),
        patch,
        &sys.sp1,
        &sys.sp2,
        sys.shared.rho,
        &sys.habitat,
    )
    .map_err(core)
}

/// Invasion integral. A false verdict is a successful call; inspect
/// `out->invasion`.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_criterion(
    scenario: *const AedesScenario,
    direction: AedesDirection,
    patch: AedesPatch,
    out: *mut AedesCriterion,
) -> AedesStatus {
    guard(|| {
        let sc = &deref(scenario, "scenario")?.0;
        let out = out_ref(out, "out")?;
        let spec = gamma_spec(sc, direction, patch)?;
        let g = gamma_analysis(&spec).map_err(core)?;
        *out = AedesCriterion {
            f_inv_star: spec.f_inv_star,
            f_res_star: spec.f_res_star,
            l_tilde: spec.l_tilde,
            zeta: spec.zeta,
            chi0: g.chi0,
            argmax: g.argmax,
            gamma_at_fstar: g.value_at_fstar,
            invasion: g.invasion,
        };
        Ok(())
    })
}

/// Stationary invasion front on the default half-line with spacing `dx`.
/// Fails with `AEDES_STATUS_CRITERION_FAILED` when the invasion hypothesis
/// does not hold.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_front_new(
    scenario: *const AedesScenario,
    direction: AedesDirection,
    dx: f64,
    out: *mut *mut AedesFront,
) -> AedesStatus {
    guard(|| {
        let sc = &deref(scenario, "scenario")?.0;
        let out = out_ref(out, "out")?;
        let spec = gamma_spec(sc, direction, AedesPatch::Homogeneous)?;
        let grid = HalfLine::covering(HalfLine::default_extent(&spec), dx).map_err(core)?;
        let tol = HALF_SPACE_REL_TOL * spec.f_inv_star.max(spec.f_res_star);
        let half = half_space_stationary(&spec, &grid, tol, DEFAULT_MAX_SWEEPS).map_err(core)?;
        *out = Box::into_raw(Box::new(AedesFront(half)));
        Ok(())
    })
}

/// Number of nodes of a front, or 0 for NULL.
///
/// # Safety
/// `front` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aedes_front_len(front: *const AedesFront) -> usize {
    front.as_ref().map_or(0, |f| f.0.invader.len())
}

/// Node spacing of a front, or NaN for NULL.
///
/// # Safety
/// `front` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aedes_front_dx(front: *const AedesFront) -> f64 {
    front.as_ref().map_or(f64::NAN, |f| f.0.invader.dx)
}

/// Copies one component of a front (nodes from x = 0 outward) into `buf`.
///
/// # Safety
/// `front` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn aedes_front_copy(
    front: *const AedesFront,
    side: AedesFrontSide,
    buf: *mut f64,
    len: usize,
) -> AedesStatus {
    guard(|| {
        let f = &deref(front, "front")?.0;
        let values = match side {
            AedesFrontSide::Invader => &f.invader.values,
            AedesFrontSide::Resident => &f.resident.values,
        };
        copy_out(values, buf, len)
    })
}

/// Releases a front. NULL is ignored.
///
/// # Safety
/// `front` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn aedes_front_free(front: *mut AedesFront) {
    if !front.is_null() {
        drop(Box::from_raw(front));
    }
}

/// Integrates the scenario with its own initial data and time settings.
///
/// # Safety
/// `scenario` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_simulate(
    scenario: *const AedesScenario,
    model: AedesModel,
    out: *mut *mut AedesTrajectory,
) -> AedesStatus {
    guard(|| {
        let sc = &deref(scenario, "scenario")?.0;
        let out = out_ref(out, "out")?;
        let model = match model {
            AedesModel::Full => Model::Full,
            AedesModel::Reduced => Model::Reduced,
        };
        let initial = sc.initial_state(model).map_err(core)?;
        let traj = simulate(&sc.sim, &sc.system, initial).map_err(core)?;
        *out = Box::into_raw(Box::new(AedesTrajectory(traj)));
        Ok(())
    })
}

/// Number of stored snapshots, or 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aedes_trajectory_snapshots(traj: *const AedesTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.snapshots.len())
}

/// Number of grid nodes, or 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn aedes_trajectory_nodes(traj: *const AedesTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.grid.n_nodes)
}

/// Time of snapshot `index`.
///
/// # Safety
/// `traj` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn aedes_trajectory_time(
    traj: *const AedesTrajectory,
    index: usize,
    out: *mut f64,
) -> AedesStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.0;
        let out = out_ref(out, "out")?;
        *out = snapshot(t, index)?.time();
        Ok(())
    })
}

fn snapshot(t: &Trajectory, index: usize) -> Result<&State, Failure> {
    t.snapshots.get(index).ok_or_else(|| {
        invalid(format!(
            "snapshot {index} out of range (have {})",
            t.snapshots.len()
        ))
    })
}

/// Copies one field of snapshot `index` into `buf`.
///
/// # Safety
/// `traj` must be a live handle; `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn aedes_trajectory_copy(
    traj: *const AedesTrajectory,
    index: usize,
    field: AedesField,
    buf: *mut f64,
    len: usize,
) -> AedesStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.0;
        let values: &[f64] = match (snapshot(t, index)?, field) {
            (s, AedesField::F1) => s.f1(),
            (s, AedesField::F2) => s.f2(),
            (State::Full(s), AedesField::E1) => &s.e1,
            (State::Full(s), AedesField::E2) => &s.e2,
            (State::Reduced(s), AedesField::W) => &s.w,
            (State::Full(_), AedesField::W) => {
                return Err(invalid("field W exists only for the reduced model"))
            }
            (State::Reduced(_), _) => {
                return Err(invalid("fields E1/E2 exist only for the full model"))
            }
        };
        copy_out(values, buf, len)
    })
}

/// Releases a trajectory. NULL is ignored.
///
/// # Safety
/// `traj` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn aedes_trajectory_free(traj: *mut AedesTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}
