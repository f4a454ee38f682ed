//! C ABI over `nambu_core`.
//!
//! Handles are opaque and owned by the caller: every `*_new`/`*_from_*`
//! result must be released with the matching `*_free`. Strings returned
//! through `char **` are heap allocated and released with
//! [`nambu_string_free`]. On a non-OK status, [`nambu_last_error`] describes
//! the failure for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nambu_core::algebroid::{algebroid_battery, AlgebroidOptions};
use nambu_core::cli::run_args;
use nambu_core::fields::ScalarField;
use nambu_core::gallery::{gallery, GalleryParams};
use nambu_core::nambu::{
    check_census, check_filippov_direct, check_filippov_structural, check_leibniz, check_lie_derivative_criterion, CheckOptions, NambuStructure,
};
use nambu_core::report::CheckReport;
use nambu_core::specfile::SpecFile;
use nambu_core::towers::{tower_battery, TowerSpec};
use nambu_core::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NambuStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    SpecError = 4,
    StructureError = 5,
    ArityError = 6,
    DomainError = 7,
    RestrictionError = 8,
    PreconditionFailed = 9,
    Unsupported = 10,
    NumericFailure = 11,
    ConfigError = 12,
    IoError = 13,
    Panic = 14,
}

/// An almost Nambu-Poisson structure.
pub struct NambuStructureHandle(NambuStructure);

/// A projective or direct tower of structures.
pub struct NambuTowerHandle(TowerSpec);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NambuStatus {
    match e {
        Error::PolyParse { .. } => NambuStatus::ParseError,
        Error::SpecSyntax { .. } | Error::SpecSemantic(_) => NambuStatus::SpecError,
        Error::Structure(_) => NambuStatus::StructureError,
        Error::Arity(_) => NambuStatus::ArityError,
        Error::Domain { .. } => NambuStatus::DomainError,
        Error::Restriction(_) => NambuStatus::RestrictionError,
        Error::Precondition(_) => NambuStatus::PreconditionFailed,
        Error::Unsupported(_) | Error::UnsupportedMode(_) => NambuStatus::Unsupported,
        Error::Flow { .. } | Error::DegenerateFrame(_) | Error::Chart(_) => NambuStatus::NumericFailure,
        Error::Config(_) => NambuStatus::ConfigError,
        Error::Io(_) => NambuStatus::IoError,
    }
}

struct Fail(NambuStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> NambuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            NambuStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NambuStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(NambuStatus::NullArgument, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(NambuStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

fn export(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn reports_json(reports: &[CheckReport]) -> Result<String, Fail> {
    serde_json::to_string(reports).map_err(|e| Fail(NambuStatus::Panic, e.to_string()))
}

/// Message for the last failing call on this thread; empty after success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn nambu_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn nambu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nambu_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a TOML spec holding a `[structure]` table.
///
/// # Safety
/// `spec` must be a nul-terminated string; `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_structure_from_spec(spec: *const c_char, out_handle: *mut *mut NambuStructureHandle) -> NambuStatus {
    guard(|| {
        let o = out(out_handle, "out")?;
        let s = SpecFile::parse_str(text(spec, "spec")?)?.structure()?;
        *o = Box::into_raw(Box::new(NambuStructureHandle(s)));
        Ok(())
    })
}

/// Instantiate a gallery item; `params` is null or `key=value` pairs
/// separated by `;`.
///
/// # Safety
/// `name` and non-null `params` must be nul-terminated; `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_structure_from_gallery(
    name: *const c_char,
    params: *const c_char,
    out_handle: *mut *mut NambuStructureHandle,
) -> NambuStatus {
    guard(|| {
        let o = out(out_handle, "out")?;
        let name = text(name, "name")?;
        let mut p = GalleryParams::new();
        if !params.is_null() {
            for kv in text(params, "params")?.split(';').filter(|s| !s.trim().is_empty()) {
                let (k, v) = kv.split_once('=').ok_or_else(|| Fail(NambuStatus::ConfigError, format!("parameter `{kv}` is not key=value")))?;
                p.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        *o = Box::into_raw(Box::new(NambuStructureHandle(gallery(name, &p)?.structure)));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn nambu_structure_free(s: *mut NambuStructureHandle) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Dimension `n` and order `r`.
///
/// # Safety
/// `s` must be a live handle; `n` and `r` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_structure_dims(s: *const NambuStructureHandle, n: *mut usize, r: *mut usize) -> NambuStatus {
    guard(|| {
        let s = &handle(s, "structure")?.0;
        *out(n, "n")? = s.n();
        *out(r, "r")? = s.r();
        Ok(())
    })
}

/// `{f₁, …, f_r}(x)` for `r` polynomial strings such as `"x1^2 + x2"`.
///
/// # Safety
/// `fs` must point to `r` nul-terminated strings and `x` to `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn nambu_bracket_eval(
    s: *const NambuStructureHandle,
    fs: *const *const c_char,
    x: *const f64,
    n: usize,
    value: *mut f64,
) -> NambuStatus {
    guard(|| {
        let s = &handle(s, "structure")?.0;
        if fs.is_null() {
            return Err(null("fs"));
        }
        if x.is_null() {
            return Err(null("x"));
        }
        if n != s.n() {
            return Err(Fail(NambuStatus::ArityError, format!("point has {n} coordinates, structure lives in R^{}", s.n())));
        }
        let fields: Vec<ScalarField> =
            (0..s.r()).map(|i| Ok(ScalarField::parse(text(*fs.add(i), "function")?)?)).collect::<Result<_, Fail>>()?;
        let point = std::slice::from_raw_parts(x, n);
        *out(value, "value")? = s.bracket_eval(&fields[..s.r() - 1], &fields[s.r() - 1], point)?;
        Ok(())
    })
}

/// Rank of the anchor at `x`.
///
/// # Safety
/// `x` must point to `n` doubles; `rank` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_classify_point(s: *const NambuStructureHandle, x: *const f64, n: usize, rank: *mut usize) -> NambuStatus {
    guard(|| {
        let s = &handle(s, "structure")?.0;
        if x.is_null() {
            return Err(null("x"));
        }
        if n != s.n() {
            return Err(Fail(NambuStatus::ArityError, format!("point has {n} coordinates, structure lives in R^{}", s.n())));
        }
        *out(rank, "rank")? = s.classify_point(std::slice::from_raw_parts(x, n)).rank;
        Ok(())
    })
}

/// Run a named check and return its reports as a JSON array.
///
/// Names: `filippov_direct`, `leibniz`, `lie_derivative`,
/// `filippov_structural`, `census`, `algebroid`, or `all`.
///
/// # Safety
/// `check` must be nul-terminated; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_check(s: *const NambuStructureHandle, check: *const c_char, seed: u64, json: *mut *mut c_char) -> NambuStatus {
    guard(|| {
        let s = &handle(s, "structure")?.0;
        let name = text(check, "check")?;
        let dest = out(json, "json")?;
        let o = CheckOptions { seed, ..CheckOptions::default() };
        let fi = || check_filippov_direct(s, &o);
        let reports = match name {
            "filippov_direct" => vec![fi()?],
            "leibniz" => vec![check_leibniz(s, &o)],
            "lie_derivative" => vec![check_lie_derivative_criterion(s, &o)],
            "filippov_structural" => vec![check_filippov_structural(s, &o)],
            "census" => vec![check_census(s, fi()?.passed(), &o)],
            "algebroid" => algebroid_battery(s, fi()?.passed(), &AlgebroidOptions { seed, ..AlgebroidOptions::default() })?,
            "all" => {
                let direct = fi()?;
                let census = check_census(s, direct.passed(), &o);
                vec![check_leibniz(s, &o), direct, check_lie_derivative_criterion(s, &o), check_filippov_structural(s, &o), census]
            }
            other => return Err(Fail(NambuStatus::ConfigError, format!("unknown check `{other}`"))),
        };
        *dest = export(reports_json(&reports)?);
        Ok(())
    })
}

/// Parse a TOML spec holding a `[tower]` table.
///
/// # Safety
/// `spec` must be nul-terminated; `out_handle` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_tower_from_spec(spec: *const c_char, out_handle: *mut *mut NambuTowerHandle) -> NambuStatus {
    guard(|| {
        let o = out(out_handle, "out")?;
        let t = SpecFile::parse_str(text(spec, "spec")?)?.tower()?;
        *o = Box::into_raw(Box::new(NambuTowerHandle(t)));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn nambu_tower_free(t: *mut NambuTowerHandle) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of levels.
///
/// # Safety
/// `t` must be a live handle; `levels` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_tower_levels(t: *const NambuTowerHandle, levels: *mut usize) -> NambuStatus {
    guard(|| {
        *out(levels, "levels")? = handle(t, "tower")?.0.len();
        Ok(())
    })
}

/// Compatibility, stratification and (projective) limit-bracket and chart
/// checks as a JSON array of reports.
///
/// # Safety
/// `t` must be a live handle; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_tower_check(t: *const NambuTowerHandle, samples: usize, seed: u64, json: *mut *mut c_char) -> NambuStatus {
    guard(|| {
        let t = &handle(t, "tower")?.0;
        let dest = out(json, "json")?;
        *dest = export(reports_json(&tower_battery(t, samples, seed)?)?);
        Ok(())
    })
}

/// Run the command-line interface in process. `argv[0]` is the program
/// name. Output streams are returned as strings.
///
/// # Safety
/// `argv` must point to `argc` nul-terminated strings; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nambu_run(
    argc: usize,
    argv: *const *const c_char,
    exit_code: *mut i32,
    stdout_text: *mut *mut c_char,
    stderr_text: *mut *mut c_char,
) -> NambuStatus {
    guard(|| {
        if argv.is_null() {
            return Err(null("argv"));
        }
        let args: Vec<String> = (0..argc).map(|i| text(*argv.add(i), "argument").map(str::to_string)).collect::<Result<_, Fail>>()?;
        let (code, so, se) = (out(exit_code, "exit_code")?, out(stdout_text, "stdout")?, out(stderr_text, "stderr")?);
        let o = run_args(args);
        *code = o.code;
        *so = export(o.stdout);
        *se = export(o.stderr);
        Ok(())
    })
}
