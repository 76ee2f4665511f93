//! C ABI over the tfpanel toolkit.
//!
//! Conventions: handles are opaque pointers created and freed here; every
//! fallible call returns a [`TfpStatus`]; the last error message is kept in
//! thread-local storage and read back with [`tfp_last_error`]. The header
//! `include/tfpanel.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;

use tfpanel::dea::{efficiency, DmuBundle, ReferenceSet, Rts};
use tfpanel::panel::{read_panel_csv, PanelDataset};
use tfpanel::pipeline::{run_pipeline, Overrides, RunConfig};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TfpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    IoError = 3,
    InvalidInput = 4,
    ComputeError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl AsRef<str>) {
    let sanitized = message.as_ref().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

/// Copy the last error message of this thread into `buffer` (NUL
/// terminated, truncated to `capacity`). Returns the full message length in
/// bytes, excluding the terminator; call with a null buffer to query the
/// needed capacity.
///
/// # Safety
/// `buffer` must be null or point to at least `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn tfp_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buffer.cast(), n);
                *buffer.add(n) = 0;
            }
        }
        bytes.len()
    })
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, TfpStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(TfpStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        TfpStatus::InvalidUtf8
    })
}

/// Opaque panel handle.
pub struct TfpPanel {
    inner: PanelDataset,
}

/// Load a long-form panel CSV (`entity,period,variable,value`). Returns a
/// handle to free with [`tfp_panel_free`], or null on failure (see
/// [`tfp_last_error`]).
///
/// # Safety
/// `path` must be a NUL-terminated string valid for the duration of the
/// call.
#[no_mangle]
pub unsafe extern "C" fn tfp_panel_load(path: *const c_char) -> *mut TfpPanel {
    let path = match unsafe { cstr_arg(path) } {
        Ok(p) => p,
        Err(_) => return std::ptr::null_mut(),
    };
    let build = || -> tfpanel::Result<PanelDataset> {
        let records = read_panel_csv(std::path::Path::new(path))?;
        PanelDataset::from_records(&records)
    };
    match build() {
        Ok(panel) => Box::into_raw(Box::new(TfpPanel { inner: panel })),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Free a panel handle. Null is a no-op.
///
/// # Safety
/// `panel` must be a pointer returned by [`tfp_panel_load`] that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn tfp_panel_free(panel: *mut TfpPanel) {
    if !panel.is_null() {
        drop(unsafe { Box::from_raw(panel) });
    }
}

/// Number of entities in the panel; 0 for a null handle.
///
/// # Safety
/// `panel` must be null or a live handle from [`tfp_panel_load`].
#[no_mangle]
pub unsafe extern "C" fn tfp_panel_entity_count(panel: *const TfpPanel) -> usize {
    unsafe { panel.as_ref() }.map_or(0, |p| p.inner.entities().len())
}

/// Number of periods in the panel; 0 for a null handle.
///
/// # Safety
/// `panel` must be null or a live handle from [`tfp_panel_load`].
#[no_mangle]
pub unsafe extern "C" fn tfp_panel_period_count(panel: *const TfpPanel) -> usize {
    unsafe { panel.as_ref() }.map_or(0, |p| p.inner.periods().len())
}

/// Composite efficiency scores (super-efficiency SBM for efficient units)
/// of `n_dmus` observations against their own pooled reference set.
///
/// `inputs` is row-major `n_dmus x n_inputs`, `good_outputs` row-major
/// `n_dmus x n_good`, `bad_outputs` row-major `n_dmus x n_bad` (may be null
/// when `n_bad` is 0). All values must be strictly positive. `vrs` != 0
/// adds the convexity constraint. `scores_out` receives `n_dmus` values.
///
/// # Safety
/// The array pointers must reference at least the stated number of
/// readable (respectively writable) doubles.
#[no_mangle]
pub unsafe extern "C" fn tfp_dea_scores(
    n_dmus: usize,
    n_inputs: usize,
    n_good: usize,
    n_bad: usize,
    inputs: *const f64,
    good_outputs: *const f64,
    bad_outputs: *const f64,
    vrs: i32,
    scores_out: *mut f64,
) -> TfpStatus {
    if n_dmus == 0 || n_inputs == 0 || n_good == 0 {
        set_error("need at least one DMU, one input and one good output");
        return TfpStatus::InvalidInput;
    }
    if inputs.is_null() || good_outputs.is_null() || scores_out.is_null() {
        set_error("null array argument");
        return TfpStatus::NullArgument;
    }
    if n_bad > 0 && bad_outputs.is_null() {
        set_error("bad_outputs is null but n_bad > 0");
        return TfpStatus::NullArgument;
    }

    let inputs = unsafe { std::slice::from_raw_parts(inputs, n_dmus * n_inputs) };
    let good = unsafe { std::slice::from_raw_parts(good_outputs, n_dmus * n_good) };
    let bad = if n_bad > 0 {
        unsafe { std::slice::from_raw_parts(bad_outputs, n_dmus * n_bad) }
    } else {
        &[]
    };

    let mut bundles = Vec::with_capacity(n_dmus);
    for d in 0..n_dmus {
        let bundle = DmuBundle::new(
            format!("dmu{d}"),
            0,
            inputs[d * n_inputs..(d + 1) * n_inputs].to_vec(),
            good[d * n_good..(d + 1) * n_good].to_vec(),
            if n_bad > 0 {
                bad[d * n_bad..(d + 1) * n_bad].to_vec()
            } else {
                Vec::new()
            },
        );
        match bundle {
            Ok(b) => bundles.push(b),
            Err(e) => {
                set_error(e.to_string());
                return TfpStatus::InvalidInput;
            }
        }
    }

    let rts = if vrs != 0 { Rts::Vrs } else { Rts::Crs };
    let reference = ReferenceSet::new(bundles.clone(), rts);
    for (d, bundle) in bundles.iter().enumerate() {
        match efficiency(bundle, &reference) {
            Ok(result) => unsafe {
                *scores_out.add(d) = result.score;
            },
            Err(e) => {
                set_error(e.to_string());
                return TfpStatus::ComputeError;
            }
        }
    }
    TfpStatus::Ok
}

/// Run the analysis pipeline described by a config file. `out_dir` and
/// `stages` (comma separated) are optional overrides and may be null;
/// `seed_override` points to an optional seed (null keeps the config seed).
///
/// # Safety
/// String arguments must be null or NUL-terminated; `seed_override` must be
/// null or point to a readable u64.
#[no_mangle]
pub unsafe extern "C" fn tfp_run_pipeline(
    config_path: *const c_char,
    out_dir: *const c_char,
    stages: *const c_char,
    seed_override: *const u64,
) -> TfpStatus {
    let config_path = match unsafe { cstr_arg(config_path) } {
        Ok(p) => PathBuf::from(p),
        Err(status) => return status,
    };
    let out_dir = if out_dir.is_null() {
        None
    } else {
        match unsafe { cstr_arg(out_dir) } {
            Ok(p) => Some(PathBuf::from(p)),
            Err(status) => return status,
        }
    };
    let stages = if stages.is_null() {
        None
    } else {
        let raw = match unsafe { cstr_arg(stages) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let mut parsed = Vec::new();
        for name in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match tfpanel::pipeline::Stage::parse(name) {
                Ok(stage) => parsed.push(stage),
                Err(e) => {
                    set_error(e.to_string());
                    return TfpStatus::InvalidInput;
                }
            }
        }
        Some(parsed)
    };

    let overrides = Overrides {
        seed: unsafe { seed_override.as_ref() }.copied(),
        out_dir,
        taus: None,
        stages,
    };
    let config = match RunConfig::from_file(&config_path, &overrides) {
        Ok(c) => c,
        Err(e) => {
            set_error(e.to_string());
            return TfpStatus::InvalidInput;
        }
    };
    match run_pipeline(&config) {
        Ok(report) => match report.failure {
            None => TfpStatus::Ok,
            Some((stage, error)) => {
                set_error(format!("stage `{stage}` failed: {error}"));
                TfpStatus::ComputeError
            }
        },
        Err(e) => {
            set_error(e.to_string());
            TfpStatus::IoError
        }
    }
}
