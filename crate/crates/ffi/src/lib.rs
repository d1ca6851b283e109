//! C ABI for hyperpack.
//!
//! Every fallible function returns an [`HpStatus`]; on failure a message is
//! available from [`hp_last_error_message`] on the same thread. Complexes
//! are opaque [`HpComplex`] handles owned by the caller and released with
//! [`hp_complex_free`]. Arrays are passed as pointer plus length; matrices
//! are row-major. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hyperpack::face::{face_solve, FaceConfig};
use hyperpack::{admissibility, assembly, io, solver};
use hyperpack::{CellComplex, Error, Method, PackingState, SolveConfig, Status, Targets};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DomainError = 4,
    NoConvergence = 5,
    Inadmissible = 6,
    NotPositiveDefinite = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpMethod {
    Calabi = 0,
    Newton = 1,
    Gradient = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HpSolveStatus {
    Converged = 0,
    MaxSteps = 1,
    Diverged = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HpSolveOptions {
    pub method: HpMethod,
    /// Exponent of the p-Laplacian, Calabi only.
    pub p: f64,
    pub dt: f64,
    pub dt_max: f64,
    pub tol: f64,
    pub max_steps: usize,
    /// Run even when the admissibility precheck finds a violation.
    pub force: bool,
}

/// A validated cell complex, with the targets of the document it came from, if any.
pub struct HpComplex {
    complex: CellComplex,
    targets: Option<Targets>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Fail(HpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } | Error::InvalidComplex(_) => HpStatus::ParseError,
            Error::NoConvergence { .. } => HpStatus::NoConvergence,
            Error::Inadmissible { .. } => HpStatus::Inadmissible,
            Error::NotPositiveDefinite { .. } => HpStatus::NotPositiveDefinite,
            Error::UnknownVertex(_) | Error::SubsetCap { .. } => HpStatus::InvalidArgument,
            _ => HpStatus::DomainError,
        };
        Fail(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(HpStatus::InvalidArgument, msg.into())
}

fn null(what: &str) -> Fail {
    Fail(HpStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HpStatus {
    set_last_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            HpStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        Ok(&mut [])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts_mut(p, len))
    }
}

unsafe fn handle<'a>(c: *const HpComplex) -> Result<&'a HpComplex, Fail> {
    c.as_ref().ok_or_else(|| null("complex"))
}

unsafe fn put<T>(p: *mut T, value: T) {
    if !p.is_null() {
        *p = value;
    }
}

fn state_from(k: &[f64], n: usize) -> Result<PackingState, Fail> {
    if k.len() != n {
        return Err(invalid(format!("expected {n} curvatures, got {}", k.len())));
    }
    Ok(PackingState::from_curvatures(k)?)
}

unsafe fn targets_for(h: &HpComplex, targets: *const f64, n: usize) -> Result<Targets, Fail> {
    if targets.is_null() {
        return h
            .targets
            .clone()
            .ok_or_else(|| invalid("no targets given and the complex carries none"));
    }
    if n != h.complex.vertex_count() {
        return Err(invalid(format!(
            "expected {} targets, got {n}",
            h.complex.vertex_count()
        )));
    }
    Ok(Targets::new(input(targets, n, "targets")?.to_vec())?)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON problem document. Its targets, if present, are kept with the handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_complex_from_json(json: *const c_char, out: *mut *mut HpComplex) -> HpStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|_| Fail(HpStatus::ParseError, "document is not UTF-8".into()))?;
        let doc = io::parse(text)?;
        *out = Box::into_raw(Box::new(HpComplex {
            complex: doc.complex,
            targets: doc.targets,
        }));
        Ok(())
    })
}

/// Builds a complex on vertices `0..n_vertices`. Face `f` has `face_sizes[f]`
/// vertices, listed consecutively in `face_vertices`, and Gaussian curvature
/// `gauss_curvatures[f]`.
///
/// # Safety
/// Arrays must hold `n_faces` entries (`face_vertices` the sum of the sizes); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hp_complex_new(
    n_vertices: usize,
    n_faces: usize,
    face_sizes: *const usize,
    face_vertices: *const usize,
    gauss_curvatures: *const f64,
    out: *mut *mut HpComplex,
) -> HpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let sizes = input(face_sizes, n_faces, "face_sizes")?;
        let ys = input(gauss_curvatures, n_faces, "gauss_curvatures")?;
        let total = sizes
            .iter()
            .try_fold(0usize, |a, &b| a.checked_add(b))
            .ok_or_else(|| invalid("face sizes overflow"))?;
        let verts = input(face_vertices, total, "face_vertices")?;
        let mut faces = Vec::with_capacity(n_faces);
        let mut at = 0;
        for (&size, &y) in sizes.iter().zip(ys) {
            faces.push((verts[at..at + size].to_vec(), y));
            at += size;
        }
        let complex = CellComplex::from_indices(n_vertices, &faces)?;
        *out = Box::into_raw(Box::new(HpComplex {
            complex,
            targets: None,
        }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `complex` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hp_complex_free(complex: *mut HpComplex) {
    if !complex.is_null() {
        drop(Box::from_raw(complex));
    }
}

/// Number of vertices, 0 for a null handle.
///
/// # Safety
/// `complex` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hp_complex_vertex_count(complex: *const HpComplex) -> usize {
    complex.as_ref().map_or(0, |h| h.complex.vertex_count())
}

/// # Safety
/// `complex` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hp_complex_face_count(complex: *const HpComplex) -> usize {
    complex.as_ref().map_or(0, |h| h.complex.face_count())
}

/// Copies the document targets into `out` (length `n`).
///
/// # Safety
/// `complex` must be a live handle and `out` writable for `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hp_complex_targets(complex: *const HpComplex, out: *mut f64, n: usize) -> HpStatus {
    guard(|| {
        let h = handle(complex)?;
        let t = h.targets.as_ref().ok_or_else(|| invalid("complex carries no targets"))?;
        if n != t.len() {
            return Err(invalid(format!("expected length {}, got {n}", t.len())));
        }
        output(out, n, "out")?.copy_from_slice(t.values());
        Ok(())
    })
}

/// Total geodesic curvature `L` at every vertex for curvatures `k`.
///
/// # Safety
/// `k` and `out_l` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn hp_forward(complex: *const HpComplex, k: *const f64, n: usize, out_l: *mut f64) -> HpStatus {
    guard(|| {
        let h = handle(complex)?;
        let state = state_from(input(k, n, "k")?, h.complex.vertex_count())?;
        let report = assembly::curvatures(&h.complex, &state)?;
        output(out_l, n, "out_l")?.copy_from_slice(report.total.as_slice());
        Ok(())
    })
}

/// Jacobian `∂L_i/∂(ln k_j)`, row-major into `out_m` (`n * n` doubles).
///
/// # Safety
/// `k` must hold `n` doubles and `out_m` `n * n`.
#[no_mangle]
pub unsafe extern "C" fn hp_jacobian(complex: *const HpComplex, k: *const f64, n: usize, out_m: *mut f64) -> HpStatus {
    guard(|| {
        let h = handle(complex)?;
        let state = state_from(input(k, n, "k")?, h.complex.vertex_count())?;
        let m = assembly::jacobian(&h.complex, &state)?;
        let out = output(out_m, n * n, "out_m")?;
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = m[(i, j)];
            }
        }
        Ok(())
    })
}

/// Exhaustive admissibility check. `targets` may be null to use the
/// document targets. Writes the verdict and the smallest subset slack.
///
/// # Safety
/// `targets` must be null or hold `n` doubles; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn hp_check(
    complex: *const HpComplex,
    targets: *const f64,
    n: usize,
    out_admissible: *mut bool,
    out_slack: *mut f64,
) -> HpStatus {
    guard(|| {
        let h = handle(complex)?;
        let t = targets_for(h, targets, n)?;
        let v = admissibility::check(&h.complex, &t)?;
        put(out_admissible, v.admissible);
        put(out_slack, v.slack);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn hp_solve_options_default() -> HpSolveOptions {
    let d = SolveConfig::default();
    HpSolveOptions {
        method: HpMethod::Calabi,
        p: d.p,
        dt: d.dt,
        dt_max: d.dt_max,
        tol: d.tol,
        max_steps: d.max_steps,
        force: false,
    }
}

/// Solves for curvatures realizing `targets` (null: document targets),
/// starting from `initial_k` (null: all horocycles). Writes the final
/// curvatures to `out_k` even when the solver stops without converging.
///
/// # Safety
/// `targets`, `initial_k` null or `n` doubles; `out_k` writable for `n`; other outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn hp_solve(
    complex: *const HpComplex,
    targets: *const f64,
    initial_k: *const f64,
    n: usize,
    options: *const HpSolveOptions,
    out_k: *mut f64,
    out_status: *mut HpSolveStatus,
    out_steps: *mut usize,
    out_residual: *mut f64,
) -> HpStatus {
    guard(|| {
        let h = handle(complex)?;
        let nv = h.complex.vertex_count();
        if n != nv {
            return Err(invalid(format!("expected {nv} vertices, got {n}")));
        }
        let t = targets_for(h, targets, n)?;
        let initial = if initial_k.is_null() {
            None
        } else {
            Some(state_from(input(initial_k, n, "initial_k")?, nv)?)
        };
        let o = options.as_ref().copied().unwrap_or_else(|| hp_solve_options_default());
        let cfg = SolveConfig {
            method: match o.method {
                HpMethod::Calabi => Method::Calabi,
                HpMethod::Newton => Method::Newton,
                HpMethod::Gradient => Method::Gradient,
            },
            p: o.p,
            dt: o.dt,
            dt_max: o.dt_max,
            tol: o.tol,
            max_steps: o.max_steps,
            force: o.force,
            trace_every: usize::MAX,
            ..SolveConfig::default()
        };
        let out = output(out_k, n, "out_k")?;
        let sol = solver::solve(&h.complex, &t, initial.as_ref(), &cfg)?;
        out.copy_from_slice(sol.state.curvatures().as_slice());
        put(
            out_status,
            match sol.status {
                Status::Converged => HpSolveStatus::Converged,
                Status::MaxSteps => HpSolveStatus::MaxSteps,
                Status::Diverged => HpSolveStatus::Diverged,
            },
        );
        put(out_steps, sol.steps);
        put(out_residual, sol.residual_inf);
        Ok(())
    })
}

/// Packs one face with vertex curvatures `k` and Gaussian curvature `gauss_curvature`.
/// Writes the dual curvature, the per-vertex arc curvatures and the face area.
///
/// # Safety
/// `k` and `out_l` must hold `n` doubles; scalar outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn hp_face_solve(
    k: *const f64,
    n: usize,
    gauss_curvature: f64,
    out_dual_curvature: *mut f64,
    out_l: *mut f64,
    out_area: *mut f64,
) -> HpStatus {
    guard(|| {
        let cfg = FaceConfig::with_gauss_curvature(input(k, n, "k")?.to_vec(), gauss_curvature)?;
        let p = face_solve(&cfg)?;
        output(out_l, n, "out_l")?.copy_from_slice(&p.arc_curvature);
        put(out_dual_curvature, p.dual_curvature);
        put(out_area, p.area);
        Ok(())
    })
}
