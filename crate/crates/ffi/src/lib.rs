//! C ABI over `crnsim`.
//!
//! Scenarios and packet PMFs cross the boundary as opaque handles owned by
//! the caller and released with the matching `_free` function. Every
//! fallible call returns a [`CrnStatus`]; on failure the message is kept per
//! thread and can be copied out with [`crn_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use crnsim::access::{collision_probability, optimize_p, spectral_efficiency, AccessParams, EfficiencyInputs};
use crnsim::fountain::{measure_dep, SolitonParams};
use crnsim::link::{link_pmf, required_packets, success_probability, PacketPmf};
use crnsim::montecarlo::{estimate_success, TrialConfig};
use crnsim::scenario::{load_scenario, ModelKind, Scenario};
use crnsim::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrnStatus {
    Ok = 0,
    Invalid = 1,
    Io = 2,
    Parse = 3,
    NullPointer = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrnModel {
    Markov = 0,
    Poisson = 1,
}

impl From<CrnModel> for ModelKind {
    fn from(m: CrnModel) -> Self {
        match m {
            CrnModel::Markov => ModelKind::Markov,
            CrnModel::Poisson => ModelKind::Poisson,
        }
    }
}

/// Opaque scenario handle.
pub struct CrnScenario(Scenario);

/// Opaque packet-count PMF handle.
pub struct CrnPmf(PacketPmf);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CrnStatus {
    match e {
        Error::Io { .. } => CrnStatus::Io,
        Error::Parse { .. } => CrnStatus::Parse,
        _ => CrnStatus::Invalid,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CrnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CrnStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(arg))) => {
            set_error(format!("{arg} is null"));
            CrnStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            CrnStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn write<T>(p: *mut T, name: &'static str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(value);
    Ok(())
}

/// Scenario with `lambdas` substituted when non-null.
unsafe fn resolve(scenario: *const CrnScenario, lambdas: *const f64, n_lambdas: usize) -> Result<Scenario, Failure> {
    let s = non_null(scenario, "scenario")?.0.clone();
    if lambdas.is_null() {
        return Ok(s);
    }
    Ok(s.with_lambdas(slice::from_raw_parts(lambdas, n_lambdas))?)
}

/// Copies the calling thread's last error message into `buf` (truncated,
/// always NUL-terminated when `len > 0`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn crn_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// The bundled baseline scenario. Never null.
#[no_mangle]
pub extern "C" fn crn_scenario_baseline() -> *mut CrnScenario {
    Box::into_raw(Box::new(CrnScenario(Scenario::baseline())))
}

/// Loads a scenario JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_load(path: *const c_char, out: *mut *mut CrnScenario) -> CrnStatus {
    guard(|| {
        let path = CStr::from_ptr(non_null(path, "path")?);
        let path = path
            .to_str()
            .map_err(|_| Error::invalid("path", path.to_string_lossy(), "is not UTF-8"))?;
        let scenario = load_scenario(Path::new(path))?;
        write(out, "out", Box::into_raw(Box::new(CrnScenario(scenario))))
    })
}

/// # Safety
/// `scenario` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_free(scenario: *mut CrnScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Default link size of the scenario, 0 for a null handle.
///
/// # Safety
/// `scenario` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crn_scenario_subchannels(scenario: *const CrnScenario) -> usize {
    scenario.as_ref().map_or(0, |s| s.0.subchannels())
}

/// Packet-count PMF of the link built from the first `s` pool entries.
/// `lambdas` (length `n_lambdas`) overrides the pool's Poisson rates when
/// non-null.
///
/// # Safety
/// Pointers must be null or valid for the stated lengths; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crn_link_pmf(
    scenario: *const CrnScenario,
    model: CrnModel,
    lambdas: *const f64,
    n_lambdas: usize,
    s: usize,
    out: *mut *mut CrnPmf,
) -> CrnStatus {
    guard(|| {
        let sc = resolve(scenario, lambdas, n_lambdas)?;
        let link = sc.link(model.into(), s)?;
        let pmf = link_pmf(&link, sc.frame());
        write(out, "out", Box::into_raw(Box::new(CrnPmf(pmf))))
    })
}

/// # Safety
/// `pmf` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn crn_pmf_free(pmf: *mut CrnPmf) {
    if !pmf.is_null() {
        drop(Box::from_raw(pmf));
    }
}

/// Number of bins (`k_max + 1`), 0 for a null handle.
///
/// # Safety
/// `pmf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crn_pmf_len(pmf: *const CrnPmf) -> usize {
    pmf.as_ref().map_or(0, |p| p.0.masses().len())
}

/// Copies `min(len, crn_pmf_len)` masses into `out`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn crn_pmf_masses(pmf: *const CrnPmf, out: *mut f64, len: usize) -> CrnStatus {
    guard(|| {
        let masses = non_null(pmf, "pmf")?.0.masses();
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let n = masses.len().min(len);
        ptr::copy_nonoverlapping(masses.as_ptr(), out, n);
        Ok(())
    })
}

/// `P(packets >= needed)`.
///
/// # Safety
/// `pmf` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crn_pmf_success(pmf: *const CrnPmf, needed: u64, out: *mut f64) -> CrnStatus {
    guard(|| {
        let p = success_probability(&non_null(pmf, "pmf")?.0, needed);
        write(out, "out", p)
    })
}

/// Encoded packets needed for `k` source packets.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crn_required_packets(k: u64, out: *mut u64) -> CrnStatus {
    guard(|| write(out, "out", required_packets(k)?))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crn_collision_probability(
    p: f64,
    q: f64,
    slots: u32,
    degree: u32,
    links: u32,
    out: *mut f64,
) -> CrnStatus {
    guard(|| {
        let a = AccessParams::new(p, q, slots, degree, links)?;
        write(out, "out", collision_probability(&a))
    })
}

/// Spectral efficiency of an `s`-subchannel link under the scenario's coding
/// and link constants.
///
/// # Safety
/// `scenario` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crn_spectral_efficiency(
    scenario: *const CrnScenario,
    s: usize,
    p_success: f64,
    p_collision: f64,
    out: *mut f64,
) -> CrnStatus {
    guard(|| {
        let sc = &non_null(scenario, "scenario")?.0;
        let (c, l) = (sc.coding(), sc.link_constants());
        let e = EfficiencyInputs::new(c.dep_target, c.k, l.packet_bits, s, l.bandwidth_hz, sc.frame().frame_s())?;
        for (name, v) in [("p_success", p_success), ("p_collision", p_collision)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, v, "out of [0,1]").into());
            }
        }
        write(out, "out", spectral_efficiency(&e, p_success, p_collision))
    })
}

/// Grid search for the foreign-slot probability under the scenario's access
/// parameters.
///
/// # Safety
/// `scenario` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn crn_optimize_p(
    scenario: *const CrnScenario,
    grid_step: f64,
    out_p: *mut f64,
    out_value: *mut f64,
) -> CrnStatus {
    guard(|| {
        let (p, v) = optimize_p(non_null(scenario, "scenario")?.0.access(), grid_step)?;
        write(out_p, "out_p", p)?;
        write(out_value, "out_value", v)
    })
}

/// Monte-Carlo estimate of `P_success` for the `s`-subchannel link.
///
/// # Safety
/// As for [`crn_link_pmf`]; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn crn_estimate_success(
    scenario: *const CrnScenario,
    model: CrnModel,
    lambdas: *const f64,
    n_lambdas: usize,
    s: usize,
    trials: u64,
    seed: u64,
    out_mean: *mut f64,
    out_std_error: *mut f64,
) -> CrnStatus {
    guard(|| {
        let sc = resolve(scenario, lambdas, n_lambdas)?;
        let cfg = TrialConfig::new(trials, seed)?;
        let link = sc.link(model.into(), s)?;
        let needed = required_packets(sc.coding().k)?;
        let est = estimate_success(&link, sc.frame(), needed, &cfg);
        write(out_mean, "out_mean", est.mean)?;
        write(out_std_error, "out_std_error", est.std_error)
    })
}

/// Empirical LT decoding error probability.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn crn_lt_measure_dep(
    k: usize,
    c: f64,
    delta: f64,
    overhead: f64,
    trials: u64,
    seed: u64,
    out: *mut f64,
) -> CrnStatus {
    guard(|| {
        let params = SolitonParams::new(k, c, delta)?;
        write(out, "out", measure_dep(&params, overhead, trials, seed)?)
    })
}
