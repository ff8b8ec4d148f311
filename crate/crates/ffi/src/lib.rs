//! C ABI over the dlab core: model spaces, nonlinearities, fields, and the
//! gradient-estimate check.
//!
//! Every function returns a [`DlabStatus`]. On failure the message is kept
//! per thread and read back with [`dlab_last_error`]. Handles are opaque and
//! owned by the caller once returned; release them with the matching
//! `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dlab::config::{parse_exact_family, parse_nonlinearity, RunConfig};
use dlab::estimates::{theorem11_check_with, EstimateError, DEFAULT_C_V};
use dlab::geometry::ModelSpace;
use dlab::nonlinearity::Nonlinearity;
use dlab::solver::{self, ParabolicOptions, SolverError, SpaceTimeField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DlabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverAbort = 3,
    CheckFailed = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Model space and node count, from a `[space]` configuration section.
pub struct DlabSpace {
    space: ModelSpace,
    nodes: usize,
}

pub struct DlabNonlinearity(Nonlinearity);

/// Space-time samples of a solution.
pub struct DlabField(SpaceTimeField);

/// Flat summary of the gradient-estimate check.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DlabEstimate {
    pub eps: f64,
    pub m: f64,
    pub big_m: f64,
    pub k: f64,
    pub alpha: f64,
    pub radius: f64,
    pub duration: f64,
    pub sup_h: f64,
    pub lhs_max: f64,
    pub bracket_min: f64,
    pub c_empirical: f64,
    pub c_conservative: f64,
    pub lemma_min_residual: f64,
    pub lemma_tol_disc: f64,
    /// 1 when the lemma residual is within its tolerance.
    pub lemma_holds: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Fail(DlabStatus, String);

type Res<T> = Result<T, Fail>;

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(DlabStatus::InvalidArgument, msg.into())
}

impl From<SolverError> for Fail {
    fn from(e: SolverError) -> Self {
        let status = match e {
            SolverError::RangeViolation { .. }
            | SolverError::Divergence { .. }
            | SolverError::StepTooLarge { .. }
            | SolverError::SingularJacobian { .. }
            | SolverError::NewtonDiverged { .. }
            | SolverError::Linear(_) => DlabStatus::SolverAbort,
            _ => DlabStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

impl From<EstimateError> for Fail {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::Solver(s) => s.into(),
            EstimateError::NotPositive { .. } => Fail(DlabStatus::CheckFailed, e.to_string()),
            other => invalid(other.to_string()),
        }
    }
}

fn guard(f: impl FnOnce() -> Res<()>) -> DlabStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (DlabStatus::Ok, String::new()),
        Ok(Err(Fail(s, m))) => (s, m),
        Err(_) => (DlabStatus::Panic, "internal panic".to_string()),
    };
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
    status
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Res<&'a T> {
    p.as_ref()
        .ok_or_else(|| Fail(DlabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Res<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Fail(DlabStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return Err(Fail(DlabStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Res<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail(DlabStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dlab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dlab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a space from configuration text containing a `[space]` section.
///
/// # Safety
/// `config` must be a NUL-terminated string; `out_space` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_space_from_config(
    config: *const c_char,
    out_space: *mut *mut DlabSpace,
) -> DlabStatus {
    guard(|| {
        let slot = out(out_space, "out_space")?;
        let cfg =
            RunConfig::from_str(text(config, "config")?).map_err(|e| invalid(e.to_string()))?;
        let space = cfg
            .require_space()
            .map_err(|e| invalid(e.to_string()))?
            .clone();
        *slot = Box::into_raw(Box::new(DlabSpace {
            space,
            nodes: cfg.nodes,
        }));
        Ok(())
    })
}

/// # Safety
/// `space` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dlab_space_free(space: *mut DlabSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// # Safety
/// `space` must be a live handle; `nodes` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_space_nodes(
    space: *const DlabSpace,
    nodes: *mut usize,
) -> DlabStatus {
    guard(|| {
        *out(nodes, "nodes")? = deref(space, "space")?.nodes;
        Ok(())
    })
}

/// Grid coordinates into `buf`, which must hold the node count.
///
/// # Safety
/// `space` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dlab_space_coordinates(
    space: *const DlabSpace,
    buf: *mut f64,
    len: usize,
) -> DlabStatus {
    guard(|| {
        let s = deref(space, "space")?;
        let grid = s.space.grid(s.nodes).map_err(|e| invalid(e.to_string()))?;
        copy_out(&grid.coordinates(), buf, len)
    })
}

/// Parses a catalog entry such as `allen_cahn` or `log{a=-1}`.
///
/// # Safety
/// `entry` must be a NUL-terminated string; `out_nl` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_nonlinearity_parse(
    entry: *const c_char,
    out_nl: *mut *mut DlabNonlinearity,
) -> DlabStatus {
    guard(|| {
        let slot = out(out_nl, "out_nl")?;
        let nl = parse_nonlinearity(text(entry, "entry")?).map_err(invalid)?;
        *slot = Box::into_raw(Box::new(DlabNonlinearity(nl)));
        Ok(())
    })
}

/// # Safety
/// `nl` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dlab_nonlinearity_free(nl: *mut DlabNonlinearity) {
    if !nl.is_null() {
        drop(Box::from_raw(nl));
    }
}

/// H(u, ε) = (ε − 1) F(u)/u + F'(u).
///
/// # Safety
/// `nl` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_nonlinearity_h(
    nl: *const DlabNonlinearity,
    u: f64,
    eps: f64,
    value: *mut f64,
) -> DlabStatus {
    guard(|| {
        let slot = out(value, "value")?;
        *slot = deref(nl, "nl")?
            .0
            .h(u, eps)
            .map_err(|e| invalid(e.to_string()))?;
        Ok(())
    })
}

/// Window of ε with sup H ≤ 0 on [m, M]; `empty` is set to 1 when none
/// exists.
///
/// # Safety
/// `nl` must be a live handle; the three outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_epsilon_window(
    nl: *const DlabNonlinearity,
    m: f64,
    big_m: f64,
    lo: *mut f64,
    hi: *mut f64,
    empty: *mut i32,
) -> DlabStatus {
    guard(|| {
        let (lo, hi, empty) = (out(lo, "lo")?, out(hi, "hi")?, out(empty, "empty")?);
        let w = deref(nl, "nl")?
            .0
            .epsilon_window(m, big_m)
            .map_err(|e| invalid(e.to_string()))?;
        *lo = w.lo;
        *hi = w.hi;
        *empty = i32::from(w.empty);
        Ok(())
    })
}

/// Evolves `u0` (one value per node) over `duration` from `t_start`.
///
/// # Safety
/// Handles must be live; `u0` must point to `len` doubles; `out_field` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_solve(
    space: *const DlabSpace,
    nl: *const DlabNonlinearity,
    u0: *const f64,
    len: usize,
    t_start: f64,
    duration: f64,
    dt: f64,
    out_field: *mut *mut DlabField,
) -> DlabStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let s = deref(space, "space")?;
        let nl = deref(nl, "nl")?;
        let u0 = slice(u0, len, "u0")?;
        let grid = s.space.grid(s.nodes).map_err(|e| invalid(e.to_string()))?;
        let opts = ParabolicOptions::new(t_start, duration, dt);
        let run = solver::solve_parabolic(&s.space, &grid, &nl.0, u0, &opts)?;
        *slot = Box::into_raw(Box::new(DlabField(run.field)));
        Ok(())
    })
}

/// Samples a closed-form family (e.g. `gaussian_heat{shift=0.25}`) at
/// `n_times` times spaced `dt` from `t_start`.
///
/// # Safety
/// `space` must be live; `family` NUL-terminated; `out_field` writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_field_exact(
    space: *const DlabSpace,
    family: *const c_char,
    t_start: f64,
    dt: f64,
    n_times: usize,
    out_field: *mut *mut DlabField,
) -> DlabStatus {
    guard(|| {
        let slot = out(out_field, "out_field")?;
        let s = deref(space, "space")?;
        let family = parse_exact_family(text(family, "family")?).map_err(invalid)?;
        let grid = s.space.grid(s.nodes).map_err(|e| invalid(e.to_string()))?;
        let field = family.sample(&s.space, &grid, t_start, dt, n_times)?;
        *slot = Box::into_raw(Box::new(DlabField(field)));
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn dlab_field_free(field: *mut DlabField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be live; `nodes` and `times` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_field_shape(
    field: *const DlabField,
    nodes: *mut usize,
    times: *mut usize,
) -> DlabStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        *out(nodes, "nodes")? = f.nodes();
        *out(times, "times")? = f.n_times();
        Ok(())
    })
}

fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Res<()> {
    if len < src.len() {
        return Err(Fail(
            DlabStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if buf.is_null() {
        return Err(Fail(DlabStatus::NullPointer, "buf is null".into()));
    }
    // SAFETY: caller guarantees `len` writable doubles at `buf`
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

/// Copies all values, time-major (node index fastest).
///
/// # Safety
/// `field` must be live; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dlab_field_values(
    field: *const DlabField,
    buf: *mut f64,
    len: usize,
) -> DlabStatus {
    guard(|| copy_out(deref(field, "field")?.0.values(), buf, len))
}

/// Writes the binary snapshot of `field` to `path`.
///
/// # Safety
/// `field` must be live; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dlab_field_write_snapshot(
    field: *const DlabField,
    path: *const c_char,
) -> DlabStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let path = text(path, "path")?;
        let file = std::fs::File::create(path)
            .map_err(|e| Fail(DlabStatus::Io, format!("{path}: {e}")))?;
        solver::write_snapshot(f, std::io::BufWriter::new(file))
            .map_err(|e| Fail(DlabStatus::Io, format!("{path}: {e}")))
    })
}

/// Gradient-estimate check on the inner half of the field's domain.
/// `r_probe` is the inner radius of the curvature probe; `c_v ≤ 0` selects
/// the default discretisation constant.
///
/// # Safety
/// Handles must be live; `report` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dlab_verify(
    field: *const DlabField,
    nl: *const DlabNonlinearity,
    eps: f64,
    r_probe: f64,
    c_v: f64,
    report: *mut DlabEstimate,
) -> DlabStatus {
    guard(|| {
        let slot = out(report, "report")?;
        let f = &deref(field, "field")?.0;
        let nl = &deref(nl, "nl")?.0;
        let curv = f
            .space()
            .estimate_curvature(r_probe)
            .map_err(|e| invalid(e.to_string()))?;
        let c_v = if c_v > 0.0 { c_v } else { DEFAULT_C_V };
        let r = theorem11_check_with(f, nl, eps, &curv, c_v)?;
        *slot = DlabEstimate {
            eps: r.eps,
            m: r.m,
            big_m: r.big_m,
            k: r.k,
            alpha: r.alpha,
            radius: r.radius,
            duration: r.duration,
            sup_h: r.sup_h,
            lhs_max: r.lhs_max,
            bracket_min: r.bracket_min,
            c_empirical: r.c_empirical,
            c_conservative: r.c_conservative,
            lemma_min_residual: r.lemma21_min_residual,
            lemma_tol_disc: r.lemma21_tol_disc,
            lemma_holds: i32::from(r.lemma_holds()),
        };
        Ok(())
    })
}
