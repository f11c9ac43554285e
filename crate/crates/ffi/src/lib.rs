//! C ABI for flowpost.
//!
//! Every function returns an [`FpStatus`]; results come back through out
//! parameters. Objects are opaque handles created by `*_open`/`*_new`
//! functions and released with the matching `*_free`. After a failure,
//! [`fp_last_error_message`] gives a description of the most recent error
//! on the calling thread.
//!
//! Strings are NUL-terminated UTF-8. Buffers are caller-owned; functions
//! that fill them report the required length so callers can retry.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use flowpost::extract::{profile_along_line, Profile};
use flowpost::plot::{self, ColorMap, Figure, VectorOptions};
use flowpost::{Case, Error, MeshError, VtkError};

/// Result codes of every `fp_*` function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Mesh = 5,
    UnknownField = 6,
    UnknownBoundary = 7,
    InvalidArgument = 8,
    NoIntersection = 9,
    SpecInvalid = 10,
    BufferTooSmall = 11,
    StaleHandle = 12,
    Panic = 13,
}

/// An opened dataset.
pub struct FpCase(Case);

/// A figure under construction.
pub struct FpFigure(Figure);

/// Field values sampled along a line.
pub struct FpProfile(Profile);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> FpStatus {
    match err {
        Error::Vtk(VtkError::Io { .. }) | Error::Io { .. } => FpStatus::Io,
        Error::Vtk(_) | Error::SidecarInvalid { .. } => FpStatus::Parse,
        Error::Mesh(MeshError::InvalidInput(_)) => FpStatus::InvalidArgument,
        Error::Mesh(_) => FpStatus::Mesh,
        Error::UnknownField { .. } => FpStatus::UnknownField,
        Error::UnknownBoundary { .. } => FpStatus::UnknownBoundary,
        Error::NoIntersection => FpStatus::NoIntersection,
        Error::SpecInvalid { .. } => FpStatus::SpecInvalid,
        Error::StaleHandle => FpStatus::StaleHandle,
        _ => FpStatus::InvalidArgument,
    }
}

struct Fail(FpStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail(status_of(&e), e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Fail>;

/// Runs `f`, records any error or panic, and maps the outcome to a status.
fn guard(f: impl FnOnce() -> FfiResult) -> FpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FpStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            FpStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(FpStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(FpStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, what: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, what).map(Some)
    }
}

unsafe fn obj<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn obj_mut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> FfiResult {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Copies `data` into `buf` if it fits; always reports the full length.
unsafe fn fill<T: Copy>(data: &[T], buf: *mut T, len: usize, needed: *mut usize) -> FfiResult {
    if !needed.is_null() {
        needed.write(data.len());
    }
    if len < data.len() {
        return Err(Fail(
            FpStatus::BufferTooSmall,
            format!("buffer holds {len} entries, {} needed", data.len()),
        ));
    }
    if !data.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
    }
    Ok(())
}

/// Copies a string plus terminating NUL into `buf`.
unsafe fn fill_str(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> FfiResult {
    let mut bytes: Vec<c_char> = s.bytes().map(|b| b as c_char).collect();
    bytes.push(0);
    fill(&bytes, buf, len, needed)
}

/// Length in bytes, including the terminating NUL, of the calling thread's
/// last error message.
#[no_mangle]
pub extern "C" fn fp_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len() + 1)
}

/// Copies the calling thread's last error message into `buf`. Returns the
/// number of bytes written including the NUL, or 0 if `buf` is null or too
/// small.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fp_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if buf.is_null() || len < e.len() + 1 {
            return 0;
        }
        ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, e.len());
        *buf.add(e.len()) = 0;
        e.len() + 1
    })
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opens a `.vtk` or `.vtu` dataset.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_case_open(path: *const c_char, out: *mut *mut FpCase) -> FpStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let case = Case::open(path)?;
        out.write(Box::into_raw(Box::new(FpCase(case))));
        Ok(())
    })
}

/// Releases a case. Null is ignored.
///
/// # Safety
/// `case` must come from [`fp_case_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fp_case_free(case: *mut FpCase) {
    if !case.is_null() {
        drop(Box::from_raw(case));
    }
}

/// Number of cells of a case.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_case_n_cells(case: *const FpCase, out: *mut usize) -> FpStatus {
    guard(|| put(out, obj(case, "case")?.0.n_cells(), "out"))
}

/// Bounds as `xmin, xmax, ymin, ymax`.
///
/// # Safety
/// `out` must point to 4 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fp_case_bounds(case: *const FpCase, out: *mut f64) -> FpStatus {
    guard(|| {
        let b = obj(case, "case")?.0.bounds();
        fill(&[b.xmin, b.xmax, b.ymin, b.ymax], out, 4, ptr::null_mut())
    })
}

/// Number of components (1, 3 or 9) of a named field.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_case_field_components(
    case: *const FpCase,
    name: *const c_char,
    out: *mut usize,
) -> FpStatus {
    guard(|| {
        let f = obj(case, "case")?.0.get_field(str_arg(name, "name")?)?;
        put(out, f.components(), "out")
    })
}

/// Copies a cell field into `buf`: all components interleaved when
/// `component` is negative, otherwise the one component. `needed` (may be
/// null) receives the number of doubles required.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fp_case_get_field(
    case: *const FpCase,
    name: *const c_char,
    component: i32,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FpStatus {
    guard(|| {
        let mut f = obj(case, "case")?.0.get_field(str_arg(name, "name")?)?;
        if component >= 0 {
            f = f.component(component as usize)?;
        }
        fill(f.as_slice(), buf, len, needed)
    })
}

/// Samples a field along the segment from `(x1, y1)` to `(x2, y2)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_profile_along_line(
    case: *const FpCase,
    x1: f64,
    y1: f64,
    x2: f64,
    y2: f64,
    field: *const c_char,
    out: *mut *mut FpProfile,
) -> FpStatus {
    guard(|| {
        let case = obj(case, "case")?;
        let field = str_arg(field, "field")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let p = profile_along_line(&case.0, [x1, y1], [x2, y2], field)?;
        out.write(Box::into_raw(Box::new(FpProfile(p))));
        Ok(())
    })
}

/// Releases a profile. Null is ignored.
///
/// # Safety
/// `profile` must come from [`fp_profile_along_line`].
#[no_mangle]
pub unsafe extern "C" fn fp_profile_free(profile: *mut FpProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of samples and values per sample of a profile.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_profile_shape(
    profile: *const FpProfile,
    samples: *mut usize,
    components: *mut usize,
) -> FpStatus {
    guard(|| {
        let p = &obj(profile, "profile")?.0;
        put(samples, p.len(), "samples")?;
        put(components, p.values.components(), "components")
    })
}

/// Copies the arc-length positions of the samples.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fp_profile_positions(
    profile: *const FpProfile,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FpStatus {
    guard(|| fill(&obj(profile, "profile")?.0.positions, buf, len, needed))
}

/// Copies the sampled values, components interleaved.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fp_profile_values(
    profile: *const FpProfile,
    buf: *mut f64,
    len: usize,
    needed: *mut usize,
) -> FpStatus {
    guard(|| fill(obj(profile, "profile")?.0.values.as_slice(), buf, len, needed))
}

/// Creates an empty figure.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_figure_new(out: *mut *mut FpFigure) -> FpStatus {
    guard(|| put(out, Box::into_raw(Box::new(FpFigure(Figure::new()))), "out"))
}

/// Releases a figure. Null is ignored.
///
/// # Safety
/// `fig` must come from [`fp_figure_new`].
#[no_mangle]
pub unsafe extern "C" fn fp_figure_free(fig: *mut FpFigure) {
    if !fig.is_null() {
        drop(Box::from_raw(fig));
    }
}

/// Sets axis labels and title; null arguments leave the current value.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn fp_figure_set_labels(
    fig: *mut FpFigure,
    xlabel: *const c_char,
    ylabel: *const c_char,
    title: *const c_char,
) -> FpStatus {
    guard(|| {
        let fig = &mut obj_mut(fig, "figure")?.0;
        if let Some(s) = opt_str_arg(xlabel, "xlabel")? {
            fig.set_xlabel(s);
        }
        if let Some(s) = opt_str_arg(ylabel, "ylabel")? {
            fig.set_ylabel(s);
        }
        if let Some(s) = opt_str_arg(title, "title")? {
            fig.set_title(s);
        }
        Ok(())
    })
}

/// Draws every boundary loop, coordinates divided by the scales.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_plot_boundaries(
    fig: *mut FpFigure,
    case: *const FpCase,
    scale_x: f64,
    scale_y: f64,
) -> FpStatus {
    guard(|| {
        let (fig, case) = (obj_mut(fig, "figure")?, obj(case, "case")?);
        plot::plot_boundaries(&mut fig.0, &case.0, scale_x, scale_y)?;
        Ok(())
    })
}

/// Colours each cell by one component of a field. `colormap` may be null
/// for the default; `colorbar_label` null means no colorbar, an empty
/// string a colorbar without a label.
///
/// # Safety
/// Pointers must be valid or null where allowed.
#[no_mangle]
pub unsafe extern "C" fn fp_plot_field(
    fig: *mut FpFigure,
    case: *const FpCase,
    field: *const c_char,
    component: u32,
    scale_x: f64,
    scale_y: f64,
    colormap: *const c_char,
    colorbar_label: *const c_char,
) -> FpStatus {
    guard(|| {
        let (fig, case) = (obj_mut(fig, "figure")?, obj(case, "case")?);
        let values = case
            .0
            .get_field(str_arg(field, "field")?)?
            .component(component as usize)?;
        let cmap = match opt_str_arg(colormap, "colormap")? {
            None => ColorMap::viridis(),
            Some(name) => ColorMap::by_name(name).ok_or_else(|| {
                Fail(
                    FpStatus::InvalidArgument,
                    format!(
                        "unknown colormap {name:?}; expected one of {}",
                        ColorMap::NAMES.join(", ")
                    ),
                )
            })?,
        };
        let h = plot::plot_field(&mut fig.0, &case.0, &values, scale_x, scale_y, cmap, None)?;
        if let Some(label) = opt_str_arg(colorbar_label, "colorbar_label")? {
            let label = (!label.is_empty()).then_some(label);
            plot::add_colorbar(&mut fig.0, h, label)?;
        }
        Ok(())
    })
}

/// Draws vector arrows at cell centres, or on an `nx` x `ny` grid when both
/// are non-zero.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_plot_vectors(
    fig: *mut FpFigure,
    case: *const FpCase,
    field: *const c_char,
    scale_x: f64,
    scale_y: f64,
    nx: usize,
    ny: usize,
    normalize: bool,
) -> FpStatus {
    guard(|| {
        let (fig, case) = (obj_mut(fig, "figure")?, obj(case, "case")?);
        let values = case.0.get_field(str_arg(field, "field")?)?;
        let opts = VectorOptions {
            sample: (nx > 0 && ny > 0).then_some((nx, ny)),
            normalize,
            scale: None,
        };
        plot::plot_vectors(&mut fig.0, &case.0, &values, scale_x, scale_y, opts)?;
        Ok(())
    })
}

/// Writes the figure as an SVG file.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_render_svg(fig: *const FpFigure, path: *const c_char) -> FpStatus {
    guard(|| {
        let fig = obj(fig, "figure")?;
        plot::render_svg(&fig.0, Path::new(str_arg(path, "path")?))?;
        Ok(())
    })
}

/// Renders the figure into `buf` as a NUL-terminated SVG document.
/// `needed` (may be null) receives the size including the NUL.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fp_render_svg_string(
    fig: *const FpFigure,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> FpStatus {
    guard(|| {
        let doc = plot::render_svg_string(&obj(fig, "figure")?.0)?;
        fill_str(&doc, buf, len, needed)
    })
}

/// Renders a JSON plot spec, like `flowpost plot`. `output` may be null to
/// use the spec's own output path.
///
/// # Safety
/// Pointers must be valid or null where allowed.
#[no_mangle]
pub unsafe extern "C" fn fp_plot_spec(spec: *const c_char, output: *const c_char) -> FpStatus {
    guard(|| {
        let spec = str_arg(spec, "spec")?;
        let output = opt_str_arg(output, "output")?;
        flowpost::cli::cmd_plot(Path::new(spec), output.map(Path::new))?;
        Ok(())
    })
}
