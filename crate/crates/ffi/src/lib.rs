//! C interface to `gauge-lab`.
//!
//! Every fallible function returns a [`GlStatus`]; on failure the message is
//! available from [`gl_last_error`] on the same thread. Objects are opaque
//! handles released with their `_free` function. Strings returned through
//! out-parameters are released with [`gl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gauge_lab::experiment::{run_experiment, ExperimentConfig};
use gauge_lab::expr::{Bindings, Expr, ProofMode, Var};
use gauge_lab::fields::{classify_gauge_function, GaugeClass, GaugeFunction, PotentialPair};
use gauge_lab::gauge_engine::covariance_residual;
use gauge_lab::hamiltonian::{assemble, predicted_shift, spectrum};
use gauge_lab::lattice::Grid;
use gauge_lab::model::{CouplingScheme, KineticStencil, Model, PhysicalParams};
use gauge_lab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    UnboundSymbol = 4,
    InvalidArgument = 5,
    NotSeparable = 6,
    NotGaugeEquivalent = 7,
    NumericalFailure = 8,
    Config = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlVar {
    X = 0,
    T = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlGaugeClass {
    Invariant = 0,
    DifferencePreserving = 1,
    General = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlKinetic {
    SecondOrder = 0,
    FourthOrder = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlCoupling {
    Peierls = 0,
    Symmetric = 1,
}

/// Parsed expression.
pub struct GlExpr(Expr);

/// Grid, physical parameters, discretization and constants.
pub struct GlModel(Model);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> GlStatus {
    match err {
        Error::Syntax { .. } | Error::UnknownFunction { .. } => GlStatus::Syntax,
        Error::UnboundSymbol(_) => GlStatus::UnboundSymbol,
        Error::InvalidGrid(_) | Error::InvalidArgument(_) | Error::GridMismatch | Error::ZeroNorm => {
            GlStatus::InvalidArgument
        }
        Error::NotSeparable(_) => GlStatus::NotSeparable,
        Error::NotGaugeEquivalent(_) => GlStatus::NotGaugeEquivalent,
        Error::NonIntegrable(_) | Error::SolveFailure { .. } => GlStatus::NumericalFailure,
        Error::Config(_) => GlStatus::Config,
        Error::Io { .. } => GlStatus::Io,
    }
}

struct Fail(GlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GlStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_error(&message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(GlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn bindings(names: *const *const c_char, values: *const f64, count: usize) -> Result<Bindings, Fail> {
    let mut b = Bindings::new();
    if count == 0 {
        return Ok(b);
    }
    if names.is_null() || values.is_null() {
        return Err(null("constant arrays"));
    }
    for i in 0..count {
        let name = str_arg(*names.add(i), "constant name")?;
        b.insert(name, *values.add(i));
    }
    Ok(b)
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn gl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn gl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `source` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_expr_parse(source: *const c_char, out: *mut *mut GlExpr) -> GlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let e = Expr::parse(str_arg(source, "source")?)?;
        *out = Box::into_raw(Box::new(GlExpr(e)));
        Ok(())
    })
}

/// # Safety
/// `e` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gl_expr_free(e: *mut GlExpr) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Canonical text of `e`; free with [`gl_string_free`].
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_expr_render(e: *const GlExpr, out: *mut *mut c_char) -> GlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_c_string(ref_arg(e, "expression")?.0.to_string());
        Ok(())
    })
}

/// Simplified partial derivative as a new handle.
///
/// # Safety
/// `e` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_expr_differentiate(e: *const GlExpr, var: GlVar, out: *mut *mut GlExpr) -> GlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let v = match var {
            GlVar::X => Var::X,
            GlVar::T => Var::T,
        };
        let d = ref_arg(e, "expression")?.0.differentiate(v);
        *out = Box::into_raw(Box::new(GlExpr(d)));
        Ok(())
    })
}

/// Value at `(x, t)` with `count` named constants.
///
/// # Safety
/// `names` and `values` must each hold `count` entries; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gl_expr_evaluate(
    e: *const GlExpr,
    x: f64,
    t: f64,
    names: *const *const c_char,
    values: *const f64,
    count: usize,
    out: *mut f64,
) -> GlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let b = bindings(names, values, count)?;
        *out = ref_arg(e, "expression")?.0.evaluate_at(x, t, &b)?;
        Ok(())
    })
}

/// Classifies a gauge function given as text. `proved` is set when the
/// result did not rely on sampling.
///
/// # Safety
/// `chi` must be NUL-terminated; `names`/`values` hold `count` entries;
/// `class` and `proved` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_classify(
    chi: *const c_char,
    names: *const *const c_char,
    values: *const f64,
    count: usize,
    class: *mut GlGaugeClass,
    proved: *mut bool,
) -> GlStatus {
    guard(|| {
        let class = out_arg(class, "class")?;
        let proved = out_arg(proved, "proved")?;
        let mut b = PhysicalParams::default().bindings();
        for (k, v) in bindings(names, values, count)?.iter() {
            b.insert(k, v);
        }
        let c = classify_gauge_function(&Expr::parse(str_arg(chi, "chi")?)?, &b)?;
        *class = match c.class {
            GaugeClass::Invariant => GlGaugeClass::Invariant,
            GaugeClass::DifferencePreserving => GlGaugeClass::DifferencePreserving,
            GaugeClass::General => GlGaugeClass::General,
        };
        *proved = c.proof_mode == ProofMode::Proved;
        Ok(())
    })
}

/// New model on `[x_min, x_max]` with `n` nodes.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gl_model_new(
    x_min: f64,
    x_max: f64,
    n: usize,
    hbar: f64,
    mass: f64,
    charge: f64,
    out: *mut *mut GlModel,
) -> GlStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let params = PhysicalParams { hbar, mass, charge };
        let m = Model::new(Grid::new(x_min, x_max, n)?, params)?;
        *out = Box::into_raw(Box::new(GlModel(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn gl_model_free(m: *mut GlModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Binds a named constant. `hbar`, `m` and `e` stay tied to the physical
/// parameters.
///
/// # Safety
/// `m` must be a live handle; `name` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn gl_model_set_constant(m: *mut GlModel, name: *const c_char, value: f64) -> GlStatus {
    guard(|| {
        let model = out_arg(m, "model")?;
        let name = str_arg(name, "name")?;
        if !value.is_finite() {
            return Err(Fail(GlStatus::InvalidArgument, format!("constant `{name}` is not finite")));
        }
        let mut c = model.0.constants().clone();
        c.insert(name, value);
        model.0 = model.0.clone().with_constants(&c);
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn gl_model_set_discretization(
    m: *mut GlModel,
    kinetic: GlKinetic,
    coupling: GlCoupling,
) -> GlStatus {
    guard(|| {
        let model = out_arg(m, "model")?;
        let k = match kinetic {
            GlKinetic::SecondOrder => KineticStencil::SecondOrder,
            GlKinetic::FourthOrder => KineticStencil::FourthOrder,
        };
        let c = match coupling {
            GlCoupling::Peierls => CouplingScheme::Peierls,
            GlCoupling::Symmetric => CouplingScheme::Symmetric,
        };
        model.0 = model.0.clone().with_kinetic(k).with_coupling(c);
        Ok(())
    })
}

unsafe fn pair(phi: *const c_char, a: *const c_char) -> Result<PotentialPair, Fail> {
    Ok(PotentialPair::parse(str_arg(phi, "phi")?, str_arg(a, "a")?)?)
}

/// Writes the `k` lowest eigenvalues of the Hamiltonian for potentials
/// `(phi, a)` at time `t` into `out`.
///
/// # Safety
/// `m` must be a live handle, `phi` and `a` NUL-terminated, `out` must hold
/// `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn gl_spectrum(
    m: *const GlModel,
    phi: *const c_char,
    a: *const c_char,
    t: f64,
    k: usize,
    out: *mut f64,
) -> GlStatus {
    guard(|| {
        let model = &ref_arg(m, "model")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = spectrum(&assemble(model, &pair(phi, a)?, t)?, k)?;
        ptr::copy_nonoverlapping(s.eigenvalues.as_ptr(), out, k);
        Ok(())
    })
}

/// `-e·dg/dt` for a separable gauge function.
///
/// # Safety
/// `m` must be a live handle, `chi` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_predicted_shift(m: *const GlModel, chi: *const c_char, t: f64, out: *mut f64) -> GlStatus {
    guard(|| {
        let model = &ref_arg(m, "model")?.0;
        let out = out_arg(out, "out")?;
        let g = GaugeFunction::parse(str_arg(chi, "chi")?, model.constants())?;
        *out = predicted_shift(model, &g, t)?;
        Ok(())
    })
}

/// Lattice mismatch between transforming the potentials and conjugating the
/// Hamiltonian.
///
/// # Safety
/// `m` must be a live handle, strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gl_covariance_residual(
    m: *const GlModel,
    phi: *const c_char,
    a: *const c_char,
    chi: *const c_char,
    t: f64,
    out: *mut f64,
) -> GlStatus {
    guard(|| {
        let model = &ref_arg(m, "model")?.0;
        let out = out_arg(out, "out")?;
        let chi = Expr::parse(str_arg(chi, "chi")?)?;
        *out = covariance_residual(model, &pair(phi, a)?, &chi, t)?;
        Ok(())
    })
}

/// Runs an experiment from TOML text. `report_json` receives the JSON
/// report (free with [`gl_string_free`]); `passed` is set from its
/// assertions.
///
/// # Safety
/// `config_toml` must be NUL-terminated; `report_json` and `passed` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn gl_run_experiment(
    config_toml: *const c_char,
    report_json: *mut *mut c_char,
    passed: *mut bool,
) -> GlStatus {
    guard(|| {
        let out = out_arg(report_json, "report_json")?;
        let passed = out_arg(passed, "passed")?;
        *out = ptr::null_mut();
        let cfg = ExperimentConfig::from_toml(str_arg(config_toml, "config")?)?;
        let report = run_experiment(&cfg)?;
        *passed = report.passed();
        *out = into_c_string(report.to_json());
        Ok(())
    })
}
