//! C ABI over `memtrans-core`.
//!
//! Every fallible function returns an [`MtStatus`] and writes its result
//! through an out-pointer. On failure a description is kept per thread and
//! can be read with [`mt_last_error`]. Simulations are opaque handles created
//! by [`mt_simulation_from_toml`] and released with [`mt_simulation_free`].

use memtrans_core::config::{Overrides, Scenario, ScenarioFile};
use memtrans_core::device::SystemState;
use memtrans_core::diagnostics::free_energy;
use memtrans_core::run::{simulate, RunOutput};
use memtrans_core::statistics::{blakemore_h, fermi_dirac, g_prime, inverse_fd_half, FermiDiracOrder};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// The scenario could not be parsed or violates an assumption.
    Config = 3,
    /// The time integration failed; the partial run is kept.
    Solver = 4,
    /// Argument outside the domain of a statistics function.
    Domain = 5,
    /// Output buffer length does not match the number of cells.
    BufferSize = 6,
    UnknownField = 7,
    Panic = 8,
}

/// Opaque simulation handle.
pub struct MtSimulation {
    scenario: Scenario,
    output: Option<RunOutput>,
}

impl MtSimulation {
    fn state(&self) -> &SystemState {
        self.output.as_ref().map_or(&self.scenario.initial, |o| &o.final_state)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (MtStatus, String);

/// Runs `f`, recording its error message and turning panics into
/// `MT_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MtStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            MtStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (MtStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn string<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (MtStatus::InvalidUtf8, format!("`{what}`: {e}")))
}

unsafe fn handle<'a>(sim: *const MtSimulation) -> Result<&'a MtSimulation, Failure> {
    sim.as_ref().ok_or_else(|| null("sim"))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn mt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Normalized Fermi–Dirac integral `F_j(z)` for `j > -1` or `j = -1`.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn mt_fermi_dirac(j: f64, z: f64, out: *mut f64) -> MtStatus {
    guard(|| {
        let order = FermiDiracOrder::new(j).map_err(|e| (MtStatus::Domain, e.to_string()))?;
        write(out, fermi_dirac(order, z), "out")
    })
}

/// Inverse of `F_{1/2}` on `(0, ∞)`.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn mt_inverse_fd_half(z: f64, out: *mut f64) -> MtStatus {
    guard(|| {
        let y = inverse_fd_half(z).map_err(|e| (MtStatus::Domain, e.to_string()))?;
        write(out, y, "out")
    })
}

/// `g'(z) = 1 / F_{-1/2}(g(z))`.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn mt_g_prime(z: f64, out: *mut f64) -> MtStatus {
    guard(|| {
        let y = g_prime(z).map_err(|e| (MtStatus::Domain, e.to_string()))?;
        write(out, y, "out")
    })
}

/// Blakemore chemical potential `h(z) = log(z / (1 - z))` on `(0, 1)`.
///
/// # Safety
/// `out` must be NULL or valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn mt_blakemore_h(z: f64, out: *mut f64) -> MtStatus {
    guard(|| {
        let y = blakemore_h(z).map_err(|e| (MtStatus::Domain, e.to_string()))?;
        write(out, y, "out")
    })
}

/// Parses and resolves a scenario given as TOML text. Relative data file
/// paths are resolved against `base_dir`, or the working directory when it
/// is NULL. On success `*out` owns a new handle.
///
/// # Safety
/// `toml` must be a NUL-terminated string, `base_dir` NULL or
/// NUL-terminated, and `out` valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_from_toml(
    toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut MtSimulation,
) -> MtStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = string(toml, "toml")?;
        let base = if base_dir.is_null() { "." } else { string(base_dir, "base_dir")? };
        let config = |e: memtrans_core::config::ConfigError| (MtStatus::Config, e.to_string());
        let mut file = ScenarioFile::from_toml(text).map_err(config)?;
        file.apply(&Overrides::default()).map_err(config)?;
        let scenario = Scenario::resolve(file, Path::new(base)).map_err(config)?;
        out.write(Box::into_raw(Box::new(MtSimulation { scenario, output: None })));
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `sim` must be NULL or a handle from [`mt_simulation_from_toml`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_free(sim: *mut MtSimulation) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Runs the scenario to its final time. On `MT_STATUS_SOLVER` the state
/// reached before the failure is kept and can still be queried.
///
/// # Safety
/// `sim` must be a live handle not used concurrently from another thread.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_run(sim: *mut MtSimulation) -> MtStatus {
    guard(|| {
        let sim = sim.as_mut().ok_or_else(|| null("sim"))?;
        match simulate(&sim.scenario) {
            Ok(out) => {
                sim.output = Some(out);
                Ok(())
            }
            Err(f) => {
                sim.output = Some(*f.partial);
                Err((MtStatus::Solver, f.error.to_string()))
            }
        }
    })
}

/// # Safety
/// `sim` must be a live handle and `out` valid for writing one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_num_cells(sim: *const MtSimulation, out: *mut usize) -> MtStatus {
    guard(|| write(out, handle(sim)?.scenario.mesh.num_cells(), "out"))
}

/// Time of the current state.
///
/// # Safety
/// `sim` must be a live handle and `out` valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_time(sim: *const MtSimulation, out: *mut f64) -> MtStatus {
    guard(|| write(out, handle(sim)?.state().t, "out"))
}

/// Accepted time steps so far (0 before the run).
///
/// # Safety
/// `sim` must be a live handle and `out` valid for writing one `size_t`.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_steps(sim: *const MtSimulation, out: *mut usize) -> MtStatus {
    guard(|| {
        let steps = handle(sim)?.output.as_ref().map_or(0, |o| o.records.len().saturating_sub(1));
        write(out, steps, "out")
    })
}

/// Copies a cell field of the current state into `buf`. `name` is one of
/// `n`, `p`, `D`, `V`, `phi_n`, `phi_p`, `phi_D`, `x`, `y`; `len` must equal
/// the number of cells.
///
/// # Safety
/// `name` must be NUL-terminated and `buf` valid for writing `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_get_field(
    sim: *const MtSimulation,
    name: *const c_char,
    buf: *mut f64,
    len: usize,
) -> MtStatus {
    guard(|| {
        let sim = handle(sim)?;
        let name = string(name, "name")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        let s = sim.state();
        let cells = sim.scenario.mesh.cells();
        let coord = |i: usize| -> Vec<f64> { cells.iter().map(|c| c.centroid[i]).collect() };
        let values: Vec<f64> = match name {
            "n" => s.n.clone(),
            "p" => s.p.clone(),
            "D" => s.d.clone(),
            "V" => s.v.clone(),
            "phi_n" => s.phi_n.clone(),
            "phi_p" => s.phi_p.clone(),
            "phi_D" => s.phi_d.clone(),
            "x" => coord(0),
            "y" => coord(1),
            _ => return Err((MtStatus::UnknownField, format!("no field named `{name}`"))),
        };
        if len != values.len() {
            return Err((
                MtStatus::BufferSize,
                format!("buffer holds {len} values, mesh has {} cells", values.len()),
            ));
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(&values);
        Ok(())
    })
}

/// Free energy of the current state, relative to the boundary data in
/// force at that time.
///
/// # Safety
/// `sim` must be a live handle and `out` valid for writing one double.
#[no_mangle]
pub unsafe extern "C" fn mt_simulation_energy(sim: *const MtSimulation, out: *mut f64) -> MtStatus {
    guard(|| {
        let sim = handle(sim)?;
        let sc = &sim.scenario;
        let state = sim.state();
        let stage = sc
            .stages
            .iter()
            .find(|s| state.t <= s.end)
            .or(sc.stages.last())
            .ok_or_else(|| (MtStatus::Config, "scenario has no boundary stage".to_string()))?;
        write(out, free_energy(state, &stage.bc, &sc.mesh, &sc.params), "out")
    })
}
