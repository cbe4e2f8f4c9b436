//! C ABI over `qsl-core`.
//!
//! Channels are opaque heap handles created by `qsl_channel_*` and released
//! with [`qsl_channel_free`]. Every fallible call returns a [`QslStatus`];
//! on failure [`qsl_last_error_message`] describes the most recent error on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qsl_core::qsl::{qsl_closed_form, qsl_general};
use qsl_core::{
    ChannelSpec, DephasingChannel, FilterOp, FilteredTrajectory, OhmicSpec, QslError, QslResult, QuadConfig, RtnSpec,
    Variant,
};

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    OutOfRange = 3,
    NotConverged = 4,
    Numerical = 5,
    Panic = 6,
}

/// Closed-form bound prefactor.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QslVariant {
    Paper = 0,
    Ml = 1,
}

/// Engine output for one driving window `[tau, tau + tau_d]`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QslBound {
    pub tau: f64,
    pub tau_d: f64,
    /// Relative purity between the window end points.
    pub f: f64,
    pub purity_tau: f64,
    pub ml_denom: f64,
    pub mt_denom: f64,
    pub tau_ml: f64,
    pub tau_mt: f64,
    pub tau_qsl: f64,
}

impl From<QslResult> for QslBound {
    fn from(r: QslResult) -> Self {
        QslBound {
            tau: r.tau,
            tau_d: r.tau_d,
            f: r.f,
            purity_tau: r.purity_tau,
            ml_denom: r.ml_denom,
            mt_denom: r.mt_denom,
            tau_ml: r.tau_ml,
            tau_mt: r.tau_mt,
            tau_qsl: r.tau_qsl,
        }
    }
}

/// Opaque dephasing channel.
pub struct QslChannel {
    inner: DephasingChannel,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let msg = CString::new(bytes).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &QslError) -> QslStatus {
    match e {
        QslError::InvalidParameter { .. } => QslStatus::InvalidParameter,
        QslError::OutOfTable { .. } => QslStatus::OutOfRange,
        QslError::Quadrature { .. } | QslError::Unresolved { .. } => QslStatus::NotConverged,
        QslError::InvalidDensity(_) | QslError::CoherenceOutOfRange { .. } | QslError::DegenerateFilter(_) => {
            QslStatus::Numerical
        }
        QslError::SweepRow { source, .. } => status_of(source),
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (QslStatus, String)>) -> QslStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QslStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("internal panic: {msg}"));
            QslStatus::Panic
        }
    }
}

fn core<T>(r: qsl_core::Result<T>) -> Result<T, (QslStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QslStatus, String) {
    (QslStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn channel_ref<'a>(ch: *const QslChannel) -> Result<&'a DephasingChannel, (QslStatus, String)> {
    ch.as_ref().map(|c| &c.inner).ok_or_else(|| null("channel"))
}

fn emit(out: *mut *mut QslChannel, inner: DephasingChannel) {
    // SAFETY: checked non-null by the caller before any work is done.
    unsafe { *out = Box::into_raw(Box::new(QslChannel { inner })) };
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qsl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the most recent failure on this thread; empty if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qsl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Ohmic phase-damping channel with exponent `s` and cutoff `omega_c`.
///
/// With `t_max > 0` the decoherence function is tabulated on `[0, t_max]` and
/// later evaluations beyond `t_max` fail with `QSL_STATUS_OUT_OF_RANGE`. With
/// `t_max == 0` every evaluation runs the quadrature directly.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qsl_channel_phase_damping(
    s: f64,
    omega_c: f64,
    t_max: f64,
    out: *mut *mut QslChannel,
) -> QslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = ChannelSpec::PhaseDamping(core(OhmicSpec::new(s, omega_c))?);
        let inner = if t_max == 0.0 {
            spec.direct_channel()
        } else {
            core(spec.build_channel(t_max))?
        };
        emit(out, inner);
        Ok(())
    })
}

/// Random-telegraph-noise channel with coupling `alpha` and switching time
/// `delta`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qsl_channel_rtn(alpha: f64, delta: f64, out: *mut *mut QslChannel) -> QslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        emit(out, DephasingChannel::rtn(core(RtnSpec::new(alpha, delta))?));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `ch` must be null or a handle from a `qsl_channel_*` constructor that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn qsl_channel_free(ch: *mut QslChannel) {
    if !ch.is_null() {
        drop(Box::from_raw(ch));
    }
}

/// Coherence factor `q(t)` and its rate. Either output may be null.
///
/// # Safety
/// `ch` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_channel_coherence(
    ch: *const QslChannel,
    t: f64,
    out_q: *mut f64,
    out_rate: *mut f64,
) -> QslStatus {
    guard(|| {
        let channel = channel_ref(ch)?;
        let (q, rate) = core(channel.coherence_and_rate(t))?;
        if let Some(o) = out_q.as_mut() {
            *o = q;
        }
        if let Some(o) = out_rate.as_mut() {
            *o = rate;
        }
        Ok(())
    })
}

/// Speed-limit bound for the filtered trajectory with filter strength `k`
/// over `[tau, tau + tau_d]`, using the default quadrature settings.
///
/// # Safety
/// `ch` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_bound(
    ch: *const QslChannel,
    k: f64,
    tau: f64,
    tau_d: f64,
    out: *mut QslBound,
) -> QslStatus {
    guard(|| {
        let channel = channel_ref(ch)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let traj = FilteredTrajectory::new(channel.clone(), core(FilterOp::new(k))?);
        *out = core(qsl_general(&traj, tau, tau_d, &QuadConfig::default()))?.into();
        Ok(())
    })
}

/// Closed-form bound for the filtered trajectory with the given prefactor.
///
/// # Safety
/// `ch` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qsl_bound_closed_form(
    ch: *const QslChannel,
    k: f64,
    tau: f64,
    tau_d: f64,
    variant: QslVariant,
    out: *mut f64,
) -> QslStatus {
    guard(|| {
        let channel = channel_ref(ch)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let variant = match variant {
            QslVariant::Paper => Variant::Paper,
            QslVariant::Ml => Variant::Ml,
        };
        *out = core(qsl_closed_form(channel, k, tau, tau_d, variant, &QuadConfig::default()))?;
        Ok(())
    })
}
