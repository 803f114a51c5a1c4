//! C ABI for `stab-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new` functions
//! and released with the matching `*_free`. Every fallible call returns a
//! [`StabStatus`]; the message of the last failure on the calling thread is
//! available through [`stab_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use num_complex::Complex64;
use stab_core::geometry::Discretization;
use stab_core::gl::{gl_energy, gl_solve, residual_norm, Ansatz, GlParams, GlSchedule, GlState};
use stab_core::pointlab::{cpn_frame_build, cpn_lemma_prelim_check, sphere_gl_trace, sphere_ymh_trace};
use stab_core::ymh::{bundle_init, gradient_norm, ymh_energy, ymh_solve, YmhSchedule, YmhState};
use stab_core::StabError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotConverged = 3,
    Admissibility = 4,
    Numerical = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabAnsatz {
    VortexPair = 0,
    ModulatedPair = 1,
    RandomHarmonics = 2,
    HalfConstant = 3,
    Zero = 4,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabIdentity {
    SphereGl = 0,
    SphereYmh = 1,
    CpnLemma = 2,
}

/// Icosphere mesh together with its finite-element operators.
pub struct StabMesh {
    disc: Arc<Discretization>,
}

pub struct StabGlState {
    state: GlState,
}

pub struct StabYmhState {
    state: YmhState,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: StabError) -> StabStatus {
    let status = match &err {
        StabError::NotConverged(_) => StabStatus::NotConverged,
        StabError::Admissibility(_) => StabStatus::Admissibility,
        StabError::Io(_) => StabStatus::Io,
        StabError::NonFinite(_) | StabError::LinearSolve(_) | StabError::DegenerateTriangle { .. } => {
            StabStatus::Numerical
        }
        _ => StabStatus::InvalidArgument,
    };
    set_error(err.to_string());
    status
}

fn guard(f: impl FnOnce() -> Result<(), StabStatus>) -> StabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StabStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            StabStatus::Panic
        }
    }
}

fn null() -> StabStatus {
    set_error("null pointer argument".into());
    StabStatus::NullPointer
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, StabStatus> {
    p.as_ref().ok_or_else(null)
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, StabStatus> {
    p.as_mut().ok_or_else(null)
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn stab_status_str(status: StabStatus) -> *const c_char {
    let s: &'static CStr = match status {
        StabStatus::Ok => c"ok",
        StabStatus::NullPointer => c"null pointer",
        StabStatus::InvalidArgument => c"invalid argument",
        StabStatus::NotConverged => c"not converged",
        StabStatus::Admissibility => c"admissibility violated",
        StabStatus::Numerical => c"numerical failure",
        StabStatus::Io => c"i/o error",
        StabStatus::BufferTooSmall => c"buffer too small",
        StabStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn stab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// # Safety
/// `out_mesh` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stab_mesh_new(level: u32, out_mesh: *mut *mut StabMesh) -> StabStatus {
    guard(|| {
        let slot = out(out_mesh)?;
        let disc = Discretization::icosphere(level).map_err(status_of)?;
        *slot = Box::into_raw(Box::new(StabMesh { disc: Arc::new(disc) }));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from [`stab_mesh_new`]; the output pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn stab_mesh_counts(
    mesh: *const StabMesh,
    vertices: *mut usize,
    edges: *mut usize,
    faces: *mut usize,
) -> StabStatus {
    guard(|| {
        let m = &deref(mesh)?.disc.mesh;
        if let Some(v) = vertices.as_mut() {
            *v = m.num_vertices();
        }
        if let Some(e) = edges.as_mut() {
            *e = m.num_edges();
        }
        if let Some(f) = faces.as_mut() {
            *f = m.num_faces();
        }
        Ok(())
    })
}

/// # Safety
/// `mesh` must be NULL or come from [`stab_mesh_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn stab_mesh_free(mesh: *mut StabMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Initial GL configuration on `mesh` from one of the built-in ansatz fields.
///
/// # Safety
/// `mesh` must be a live mesh handle and `out_state` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stab_gl_state_new(
    mesh: *const StabMesh,
    epsilon: f64,
    ansatz: StabAnsatz,
    seed: u64,
    out_state: *mut *mut StabGlState,
) -> StabStatus {
    guard(|| {
        let m = deref(mesh)?;
        let slot = out(out_state)?;
        let params = GlParams::new(epsilon).map_err(status_of)?;
        let a = match ansatz {
            StabAnsatz::VortexPair => Ansatz::VortexPair,
            StabAnsatz::ModulatedPair => Ansatz::ModulatedPair,
            StabAnsatz::RandomHarmonics => Ansatz::RandomHarmonics,
            StabAnsatz::HalfConstant => Ansatz::HalfConstant,
            StabAnsatz::Zero => Ansatz::Zero,
        };
        let state = a.build(m.disc.clone(), params, seed).map_err(status_of)?;
        *slot = Box::into_raw(Box::new(StabGlState { state }));
        Ok(())
    })
}

/// Replaces the state by a critical point reached from it.
///
/// # Safety
/// `state` must be a live GL state handle.
#[no_mangle]
pub unsafe extern "C" fn stab_gl_solve(state: *mut StabGlState) -> StabStatus {
    guard(|| {
        let s = out(state)?;
        let (solved, _) = gl_solve(&s.state, &GlSchedule::default()).map_err(status_of)?;
        s.state = solved;
        Ok(())
    })
}

/// # Safety
/// `state` must be a live GL state handle; the output pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn stab_gl_energy(state: *const StabGlState, energy: *mut f64, residual: *mut f64) -> StabStatus {
    guard(|| {
        let s = &deref(state)?.state;
        if let Some(e) = energy.as_mut() {
            *e = gl_energy(s).map_err(status_of)?;
        }
        if let Some(r) = residual.as_mut() {
            *r = residual_norm(s).map_err(status_of)?;
        }
        Ok(())
    })
}

/// Copies the vertex values into `re` and `im`, each of length `len`.
///
/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn stab_gl_values(state: *const StabGlState, re: *mut f64, im: *mut f64, len: usize) -> StabStatus {
    guard(|| {
        let u = &deref(state)?.state.u;
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        copy_complex(u, re, im, len)
    })
}

unsafe fn copy_complex(u: &[Complex64], re: *mut f64, im: *mut f64, len: usize) -> Result<(), StabStatus> {
    if len < u.len() {
        set_error(format!("buffer holds {len} values, need {}", u.len()));
        return Err(StabStatus::BufferTooSmall);
    }
    let re = std::slice::from_raw_parts_mut(re, u.len());
    let im = std::slice::from_raw_parts_mut(im, u.len());
    for (i, z) in u.iter().enumerate() {
        re[i] = z.re;
        im[i] = z.im;
    }
    Ok(())
}

/// # Safety
/// `state` must be NULL or a GL state handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stab_gl_state_free(state: *mut StabGlState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Initial YMH configuration of the given degree with unit section.
///
/// # Safety
/// `mesh` must be a live mesh handle and `out_state` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stab_ymh_state_new(
    mesh: *const StabMesh,
    epsilon: f64,
    degree: i64,
    out_state: *mut *mut StabYmhState,
) -> StabStatus {
    guard(|| {
        let m = deref(mesh)?;
        let slot = out(out_state)?;
        let bundle = bundle_init(m.disc.clone(), degree).map_err(status_of)?;
        let u = vec![Complex64::new(1.0, 0.0); m.disc.mesh.num_vertices()];
        let state = YmhState::new(bundle, u, epsilon).map_err(status_of)?;
        *slot = Box::into_raw(Box::new(StabYmhState { state }));
        Ok(())
    })
}

/// Replaces the state by a critical point of the same degree.
///
/// # Safety
/// `state` must be a live YMH state handle.
#[no_mangle]
pub unsafe extern "C" fn stab_ymh_solve(state: *mut StabYmhState) -> StabStatus {
    guard(|| {
        let s = out(state)?;
        let (solved, _) = ymh_solve(&s.state, &YmhSchedule::default()).map_err(status_of)?;
        s.state = solved;
        Ok(())
    })
}

/// # Safety
/// `state` must be a live YMH state handle; the output pointers may be NULL.
#[no_mangle]
pub unsafe extern "C" fn stab_ymh_energy(
    state: *const StabYmhState,
    energy: *mut f64,
    gradient: *mut f64,
    degree: *mut i64,
) -> StabStatus {
    guard(|| {
        let s = &deref(state)?.state;
        if let Some(e) = energy.as_mut() {
            *e = ymh_energy(s).map_err(status_of)?;
        }
        if let Some(g) = gradient.as_mut() {
            *g = gradient_norm(s).map_err(status_of)?;
        }
        if let Some(d) = degree.as_mut() {
            *d = s.degree().map_err(status_of)?;
        }
        Ok(())
    })
}

/// # Safety
/// `re` and `im` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn stab_ymh_values(state: *const StabYmhState, re: *mut f64, im: *mut f64, len: usize) -> StabStatus {
    guard(|| {
        let u = &deref(state)?.state.u;
        if re.is_null() || im.is_null() {
            return Err(null());
        }
        copy_complex(u, re, im, len)
    })
}

/// # Safety
/// `state` must be NULL or a YMH state handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stab_ymh_state_free(state: *mut StabYmhState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Largest relative deviation of a sampled pointwise identity.
///
/// # Safety
/// `max_deviation` must be a valid pointer; `scale` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn stab_pointlab_check(
    identity: StabIdentity,
    n: usize,
    samples: usize,
    seed: u64,
    max_deviation: *mut f64,
    scale: *mut f64,
) -> StabStatus {
    guard(|| {
        let dev = out(max_deviation)?;
        let (d, s) = match identity {
            StabIdentity::SphereGl => {
                let r = sphere_gl_trace(n, samples, seed).map_err(status_of)?;
                (r.max_deviation, r.scale)
            }
            StabIdentity::SphereYmh => {
                let r = sphere_ymh_trace(n, samples, seed).map_err(status_of)?;
                (r.max_deviation, r.scale)
            }
            StabIdentity::CpnLemma => {
                let frame = cpn_frame_build(n).map_err(status_of)?;
                (cpn_lemma_prelim_check(&frame, samples, seed), 1.0)
            }
        };
        *dev = d;
        if let Some(sc) = scale.as_mut() {
            *sc = s;
        }
        Ok(())
    })
}
