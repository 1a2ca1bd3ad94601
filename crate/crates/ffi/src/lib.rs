//! C ABI over `cat0lab`.
//!
//! Every fallible function returns a [`Cat0Status`]; on failure the message
//! is kept in a thread-local slot readable with [`cat0_last_error`]. Handles
//! are opaque, owned by the caller and released with the matching `_free`.
//! Strings crossing the boundary are NUL-terminated UTF-8. Output strings
//! are copied into caller buffers: the required size, NUL included, is
//! always stored in `*needed`, and a short buffer yields
//! `CAT0_STATUS_BUFFER_TOO_SMALL` without writing.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cat0lab::group::{Group, WordMetric};
use cat0lab::harness::{run, Command, CommandOutput, ExperimentConfig};
use cat0lab::measure::{drift_series, DriftMode, Measure};
use cat0lab::space::{Space, SpaceDescriptor};
use cat0lab::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cat0Status {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Schema = 3,
    Domain = 4,
    RadiusExceeded = 5,
    Resource = 6,
    Convergence = 7,
    Unsupported = 8,
    Io = 9,
    Json = 10,
    BufferTooSmall = 11,
    UnknownCommand = 12,
    Panic = 13,
}

/// A parsed experiment config.
pub struct Cat0Config(ExperimentConfig);

/// The record and CSV series of one run.
pub struct Cat0Record(CommandOutput);

/// A CAT(0) space built from its JSON descriptor.
pub struct Cat0Space(Space);

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: Cat0Status, msg: impl Into<String>) -> Cat0Status {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> Cat0Status {
    let status = match &e {
        Error::Domain(_) => Cat0Status::Domain,
        Error::RadiusExceeded { .. } => Cat0Status::RadiusExceeded,
        Error::Resource(_) => Cat0Status::Resource,
        Error::Convergence { .. } => Cat0Status::Convergence,
        Error::Unsupported(_) => Cat0Status::Unsupported,
        Error::Schema(_) => Cat0Status::Schema,
        Error::Io(_) => Cat0Status::Io,
        Error::Json(_) => Cat0Status::Json,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `Panic` and errors into status codes.
fn guard(f: impl FnOnce() -> Result<(), Cat0Status>) -> Cat0Status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Cat0Status::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(Cat0Status::Panic, "internal panic"),
    }
}

/// # Safety
/// `s` is null or a valid NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Cat0Status> {
    if s.is_null() {
        return Err(fail(Cat0Status::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(Cat0Status::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `buf` is null or valid for `cap` bytes; `needed` is null or writable.
unsafe fn write_str(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Cat0Status> {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || cap < n {
        return Err(fail(Cat0Status::BufferTooSmall, format!("buffer needs {n} bytes")));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf.cast::<u8>(), s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn check_out<T>(out: *mut T, what: &str) -> Result<(), Cat0Status> {
    if out.is_null() {
        Err(fail(Cat0Status::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Copies the last error message of this thread into `buf`.
///
/// Returns the size needed including the NUL, or 0 when there is no error.
/// Nothing is written unless the message fits.
///
/// # Safety
/// `buf` is null or valid for `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn cat0_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_deref() {
        None => 0,
        Some(msg) => {
            let n = msg.len() + 1;
            if !buf.is_null() && cap >= n {
                ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), msg.len());
                *buf.add(msg.len()) = 0;
            }
            n
        }
    })
}

#[no_mangle]
pub extern "C" fn cat0_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cat0_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses and schema-checks an experiment config.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_config_parse(json: *const c_char, out: *mut *mut Cat0Config) -> Cat0Status {
    guard(|| {
        check_out(out, "out")?;
        let text = read_str(json, "json")?;
        let config = ExperimentConfig::from_json(text).map_err(from_error)?;
        *out = Box::into_raw(Box::new(Cat0Config(config)));
        Ok(())
    })
}

/// # Safety
/// `config` is null or was returned by [`cat0_config_parse`] and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cat0_config_free(config: *mut Cat0Config) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a command (`"drift"`, `"conv-comb"`, `"fixed-point"`, `"shalom"`,
/// `"grigorchuk-audit"`, `"space-check"`). Output directories in the config
/// are ignored; use [`cat0_record_json`] and [`cat0_record_csv`].
///
/// # Safety
/// `command` is a NUL-terminated string, `config` a live handle, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_run(
    command: *const c_char,
    config: *const Cat0Config,
    out: *mut *mut Cat0Record,
) -> Cat0Status {
    guard(|| {
        check_out(out, "out")?;
        let name = read_str(command, "command")?;
        let cmd = Command::from_name(name)
            .ok_or_else(|| fail(Cat0Status::UnknownCommand, format!("unknown command {name:?}")))?;
        let config = config
            .as_ref()
            .ok_or_else(|| fail(Cat0Status::NullPointer, "config is null"))?;
        let output = run(cmd, &config.0, None).map_err(from_error)?;
        *out = Box::into_raw(Box::new(Cat0Record(output)));
        Ok(())
    })
}

/// Process exit code for the run: 0 pass or complete, 2 violation; -1 for null.
///
/// # Safety
/// `record` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cat0_record_exit_code(record: *const Cat0Record) -> i32 {
    record.as_ref().map_or(-1, |r| r.0.record.status.exit_code())
}

/// The run record as JSON.
///
/// # Safety
/// `record` is a live handle; `buf` is null or valid for `cap` bytes; `needed` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_record_json(
    record: *const Cat0Record,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> Cat0Status {
    guard(|| {
        let r = record
            .as_ref()
            .ok_or_else(|| fail(Cat0Status::NullPointer, "record is null"))?;
        let text = serde_json::to_string(&r.0.record).map_err(|e| from_error(e.into()))?;
        write_str(&text, buf, cap, needed)
    })
}

/// Number of CSV series attached to the record.
///
/// # Safety
/// `record` is null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cat0_record_csv_count(record: *const Cat0Record) -> usize {
    record.as_ref().map_or(0, |r| r.0.csv.len())
}

/// CSV series `index` as `name\ncontents`.
///
/// # Safety
/// As for [`cat0_record_json`].
#[no_mangle]
pub unsafe extern "C" fn cat0_record_csv(
    record: *const Cat0Record,
    index: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> Cat0Status {
    guard(|| {
        let r = record
            .as_ref()
            .ok_or_else(|| fail(Cat0Status::NullPointer, "record is null"))?;
        let (name, body) = r
            .0
            .csv
            .get(index)
            .ok_or_else(|| fail(Cat0Status::Domain, format!("no CSV series {index}")))?;
        write_str(&format!("{name}\n{body}"), buf, cap, needed)
    })
}

/// # Safety
/// `record` is null or was returned by [`cat0_run`] and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cat0_record_free(record: *mut Cat0Record) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Builds a space from its JSON descriptor.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_parse(json: *const c_char, out: *mut *mut Cat0Space) -> Cat0Status {
    guard(|| {
        check_out(out, "out")?;
        let text = read_str(json, "json")?;
        let desc: SpaceDescriptor =
            serde_json::from_str(text).map_err(|e| fail(Cat0Status::Schema, format!("space: {e}")))?;
        let space = Space::from_descriptor(&desc).map_err(from_error)?;
        *out = Box::into_raw(Box::new(Cat0Space(space)));
        Ok(())
    })
}

/// Distance between two points given in the space's JSON point form.
///
/// # Safety
/// `space` is a live handle, `x` and `y` NUL-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_distance(
    space: *const Cat0Space,
    x: *const c_char,
    y: *const c_char,
    out: *mut f64,
) -> Cat0Status {
    guard(|| {
        check_out(out, "out")?;
        let s = &space
            .as_ref()
            .ok_or_else(|| fail(Cat0Status::NullPointer, "space is null"))?
            .0;
        let point = |p: *const c_char, what: &str| -> Result<_, Cat0Status> {
            let v: serde_json::Value =
                serde_json::from_str(read_str(p, what)?).map_err(|e| from_error(e.into()))?;
            s.point_from_json(&v).map_err(from_error)
        };
        let (px, py) = (point(x, "x")?, point(y, "y")?);
        *out = s.distance(&px, &py).map_err(from_error)?;
        Ok(())
    })
}

/// Point at time `t ∈ [0, 1]` on the geodesic from `x` to `y`, as JSON.
///
/// # Safety
/// As for [`cat0_space_distance`]; `buf` is null or valid for `cap` bytes, `needed` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_geodesic(
    space: *const Cat0Space,
    x: *const c_char,
    y: *const c_char,
    t: f64,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> Cat0Status {
    guard(|| {
        let s = &space
            .as_ref()
            .ok_or_else(|| fail(Cat0Status::NullPointer, "space is null"))?
            .0;
        let point = |p: *const c_char, what: &str| -> Result<_, Cat0Status> {
            let v: serde_json::Value =
                serde_json::from_str(read_str(p, what)?).map_err(|e| from_error(e.into()))?;
            s.point_from_json(&v).map_err(from_error)
        };
        let m = s
            .geodesic_point(&point(x, "x")?, &point(y, "y")?, t)
            .map_err(from_error)?;
        write_str(&s.point_to_json(&m).to_string(), buf, cap, needed)
    })
}

/// # Safety
/// `space` is null or was returned by [`cat0_space_parse`] and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cat0_space_free(space: *mut Cat0Space) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Exact `L^n` for `n = 1..=len` under the uniform measure on the standard
/// symmetric generators of the group described by `group_json`.
///
/// # Safety
/// `group_json` is a NUL-terminated string; `out` is valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cat0_drift_exact(group_json: *const c_char, out: *mut f64, len: usize) -> Cat0Status {
    guard(|| {
        check_out(out, "out")?;
        let group: Group = serde_json::from_str(read_str(group_json, "group_json")?)
            .map_err(|e| fail(Cat0Status::Schema, format!("group: {e}")))?;
        group.validate().map_err(from_error)?;
        let gens = group.generators();
        let mu = Measure::uniform(&group, gens.elements(), true).map_err(from_error)?;
        let metric = WordMetric::new(&group, &gens, Default::default());
        let s = drift_series(&mu, &metric, len, DriftMode::Exact, 2_000_000).map_err(from_error)?;
        let dst = std::slice::from_raw_parts_mut(out, len);
        dst.copy_from_slice(&s.ln[1..=len]);
        Ok(())
    })
}
