//! C interface to `ipd-core`.
//!
//! Environments and realizations are opaque handles owned by the caller and
//! released with the matching `*_free` function. Every fallible call returns
//! an [`IpdStatus`] and writes results through out-pointers. Panics never
//! cross the boundary; they surface as [`IpdStatus::Panic`].

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ipd_core::{
    build_heterogeneous, build_homogeneous, payoff_ratio, perceived_ratio, run_realization, EnvironmentConfig,
    Error, GroupSelector, PayoffMatrix, RealizationResult, Strategy,
};

pub const IPD_STRATEGY_FR: u32 = 0;
pub const IPD_STRATEGY_FMC: u32 = 1;
pub const IPD_STRATEGY_FMD: u32 = 2;
pub const IPD_STRATEGY_FMU: u32 = 3;
pub const IPD_STRATEGY_FLP: u32 = 4;
pub const IPD_STRATEGY_FMP: u32 = 5;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidPayoffs = 3,
    /// The requested payoff ratio has a zero or missing denominator.
    DegenerateRatio = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpdPayoffs {
    pub temptation: f64,
    pub reward: f64,
    pub punishment: f64,
    pub sucker: f64,
}

impl From<IpdPayoffs> for PayoffMatrix {
    fn from(p: IpdPayoffs) -> Self {
        PayoffMatrix {
            temptation: p.temptation,
            reward: p.reward,
            punishment: p.punishment,
            sucker: p.sucker,
        }
    }
}

/// A validated simulation environment.
pub struct IpdEnvironment(EnvironmentConfig);

/// The outcome of one realization.
pub struct IpdRealization(RealizationResult);

fn status_of(e: &Error) -> IpdStatus {
    match e {
        Error::InvalidPayoffs(_) => IpdStatus::InvalidPayoffs,
        Error::DegenerateRatio | Error::EmptyGroup => IpdStatus::DegenerateRatio,
        _ => IpdStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), IpdStatus>) -> IpdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IpdStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => IpdStatus::Panic,
    }
}

unsafe fn deref<'a, T>(ptr: *const T) -> Result<&'a T, IpdStatus> {
    ptr.as_ref().ok_or(IpdStatus::NullPointer)
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), IpdStatus> {
    if out.is_null() {
        return Err(IpdStatus::NullPointer);
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ipd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static description of a status code. Takes a plain integer so any value
/// coming from C is safe to pass.
#[no_mangle]
pub extern "C" fn ipd_status_message(status: i32) -> *const c_char {
    let msg: &CStr = match status {
        0 => c"ok",
        1 => c"null pointer argument",
        2 => c"invalid argument",
        3 => c"payoffs violate S < P < R < T or S + T < 2R",
        4 => c"payoff ratio is undefined",
        5 => c"internal error",
        _ => c"unknown status",
    };
    msg.as_ptr()
}

/// `(c + 1) / (c + d + 2)`.
#[no_mangle]
pub extern "C" fn ipd_perceived_ratio(coop_count: u32, defect_count: u32) -> f64 {
    perceived_ratio(coop_count, defect_count)
}

/// T = 5, R = 3, P = 1, S = 0.
#[no_mangle]
pub extern "C" fn ipd_payoffs_default() -> IpdPayoffs {
    let p = PayoffMatrix::default();
    IpdPayoffs {
        temptation: p.temptation,
        reward: p.reward,
        punishment: p.punishment,
        sucker: p.sucker,
    }
}

/// # Safety
/// `payoffs` must be null or point to a valid `IpdPayoffs`.
#[no_mangle]
pub unsafe extern "C" fn ipd_payoffs_validate(payoffs: *const IpdPayoffs) -> IpdStatus {
    guard(|| {
        let p = PayoffMatrix::from(*deref(payoffs)?);
        p.validate().map_err(|e| status_of(&e))
    })
}

unsafe fn new_environment(
    roster: impl FnOnce() -> Result<Vec<ipd_core::AgentSpec>, IpdStatus>,
    mu: f64,
    tau: u32,
    payoffs: *const IpdPayoffs,
    seed: u64,
    out: *mut *mut IpdEnvironment,
) -> IpdStatus {
    guard(|| {
        if out.is_null() {
            return Err(IpdStatus::NullPointer);
        }
        let payoffs = match payoffs.as_ref() {
            Some(p) => PayoffMatrix::from(*p),
            None => PayoffMatrix::default(),
        };
        let config = EnvironmentConfig::new(roster()?, mu, tau, payoffs, seed).map_err(|e| status_of(&e))?;
        write(out, Box::into_raw(Box::new(IpdEnvironment(config))))
    })
}

/// Homogeneous population: every agent uses `strategy` (one of the
/// `IPD_STRATEGY_*` values), `agents_per_rho` agents per cooperation level.
/// A null `payoffs` selects the defaults.
///
/// # Safety
/// `payoffs` must be null or valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ipd_environment_new_homogeneous(
    strategy: u32,
    agents_per_rho: usize,
    mu: f64,
    tau: u32,
    payoffs: *const IpdPayoffs,
    seed: u64,
    out: *mut *mut IpdEnvironment,
) -> IpdStatus {
    let roster = || {
        let s = *Strategy::ALL.get(strategy as usize).ok_or(IpdStatus::InvalidArgument)?;
        Ok(build_homogeneous(s, agents_per_rho))
    };
    new_environment(roster, mu, tau, payoffs, seed, out)
}

/// The 126-agent mixed population, 21 agents per strategy.
///
/// # Safety
/// `payoffs` must be null or valid; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ipd_environment_new_heterogeneous(
    mu: f64,
    tau: u32,
    payoffs: *const IpdPayoffs,
    seed: u64,
    out: *mut *mut IpdEnvironment,
) -> IpdStatus {
    new_environment(|| Ok(build_heterogeneous()), mu, tau, payoffs, seed, out)
}

/// # Safety
/// `env` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ipd_environment_free(env: *mut IpdEnvironment) {
    if !env.is_null() {
        drop(Box::from_raw(env));
    }
}

/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ipd_environment_agent_count(env: *const IpdEnvironment, out: *mut usize) -> IpdStatus {
    guard(|| write(out, deref(env)?.0.n_agents()))
}

/// Runs one realization seeded from the environment.
///
/// # Safety
/// `env` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ipd_run_realization(env: *const IpdEnvironment, out: *mut *mut IpdRealization) -> IpdStatus {
    guard(|| {
        let env = deref(env)?;
        if out.is_null() {
            return Err(IpdStatus::NullPointer);
        }
        let result = run_realization(&env.0).map_err(|e| status_of(&e))?;
        write(out, Box::into_raw(Box::new(IpdRealization(result))))
    })
}

/// # Safety
/// `r` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ipd_realization_free(r: *mut IpdRealization) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ipd_realization_agent_count(r: *const IpdRealization, out: *mut usize) -> IpdStatus {
    guard(|| write(out, deref(r)?.0.agents.len()))
}

/// Copies total payoffs, indexed by agent id, into `buf`. `len` must be at
/// least the agent count.
///
/// # Safety
/// `r` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ipd_realization_payoffs(r: *const IpdRealization, buf: *mut f64, len: usize) -> IpdStatus {
    guard(|| {
        let r = deref(r)?;
        if buf.is_null() {
            return Err(IpdStatus::NullPointer);
        }
        if len < r.0.agents.len() {
            return Err(IpdStatus::InvalidArgument);
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (slot, a) in out.iter_mut().zip(&r.0.agents) {
            *slot = a.total_payoff;
        }
        Ok(())
    })
}

/// Total, played and refused round counts. Any out-pointer may be null.
///
/// # Safety
/// `r` must be a live handle; non-null out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ipd_realization_rounds(
    r: *const IpdRealization,
    total: *mut u64,
    played: *mut u64,
    refused: *mut u64,
) -> IpdStatus {
    guard(|| {
        let r = &deref(r)?.0;
        for (ptr, v) in [(total, r.rounds), (played, r.played_rounds), (refused, r.refused_rounds)] {
            if !ptr.is_null() {
                ptr.write(v);
            }
        }
        Ok(())
    })
}

/// Mean payoff of cooperators (`rho > 0.5`) over the population mean.
///
/// # Safety
/// `r` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ipd_payoff_ratio_cooperators(r: *const IpdRealization, out: *mut f64) -> IpdStatus {
    guard(|| {
        let phi = payoff_ratio(&deref(r)?.0, GroupSelector::Cooperators).map_err(|e| status_of(&e))?;
        write(out, phi)
    })
}
