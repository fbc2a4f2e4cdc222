//! C ABI for valex.
//!
//! Every fallible function returns a [`ValexStatus`]. On failure the message
//! is kept per thread and read back with [`valex_last_error_message`].
//! Handles are opaque, created by `*_parse` or a producing call, and released
//! with the matching `*_free`. Strings returned through `char **` belong to
//! the caller and are released with [`valex_string_free`].
//!
//! # Safety
//!
//! Pointer arguments must be null or valid for the access the function
//! makes; null is reported as [`ValexStatus::NullPointer`]. Handles must come
//! from this library and must not be used after being freed.
#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use valex::bank::{read_bank, Bank};
use valex::cooc::{reconstruct_dp, EntryTriple};
use valex::em::SelectionPolicy;
use valex::eval::{prf, EvalLevel};
use valex::filters::{params_to_string, LearnedParams, MatrixMethod};
use valex::lexicon::{lexicon_to_string, read_lexicon, Lexicon};
use valex::pipeline::{run_pipeline, Counting, FilterPath, PipelineConfig};
use valex::synth::{gen_bank, gen_gold, SynthConfig};
use valex::ValexError;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Format = 4,
    Data = 5,
    Numeric = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValexPolicy {
    EmShort = 0,
    EmMax = 1,
    MinLength = 2,
    Blind = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValexCounting {
    Hard = 0,
    Soft = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValexPath {
    TwoStage = 0,
    Bht = 1,
    Both = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValexMatrixMethod {
    A = 0,
    B = 1,
    C = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValexLevel {
    Frame = 0,
    Argument = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValexPipelineConfig {
    pub em_iters: u32,
    pub policy: ValexPolicy,
    pub seed: u64,
    pub counting: ValexCounting,
    pub path: ValexPath,
    pub matrix_method: ValexMatrixMethod,
    pub arg_offset: u32,
    pub alpha: f64,
    pub min_verb_count: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ValexPrf {
    pub recall: f64,
    pub precision: f64,
    pub f_score: f64,
}

/// A parse-forest bank.
pub struct ValexBank(Bank);

/// A counted dictionary.
pub struct ValexLexicon(Lexicon);

/// Learned filter parameters.
pub struct ValexParams(LearnedParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

struct Failure(ValexStatus, String);

impl From<ValexError> for Failure {
    fn from(e: ValexError) -> Failure {
        let status = match e {
            ValexError::Format { .. } => ValexStatus::Format,
            ValexError::Data(_) => ValexStatus::Data,
            ValexError::Numeric(_) => ValexStatus::Numeric,
            ValexError::Io { .. } => ValexStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(ValexStatus::NullPointer, format!("{what} is null"))
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ValexStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_last_error();
            ValexStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {message}"));
            ValexStatus::Panic
        }
    }
}

unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Failure(ValexStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure(ValexStatus::Data, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn check_out<T>(out: *mut *mut T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        Err(null(what))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null after a success.
/// The pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn valex_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn valex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn valex_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a bank from its text form.
#[no_mangle]
pub unsafe extern "C" fn valex_bank_parse(text_ptr: *const c_char, out: *mut *mut ValexBank) -> ValexStatus {
    guard(|| {
        check_out(out, "out")?;
        let bank = read_bank(text(text_ptr, "text")?.as_bytes(), "<bank>")?;
        put(out, ValexBank(bank));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn valex_bank_free(bank: *mut ValexBank) {
    if !bank.is_null() {
        drop(Box::from_raw(bank));
    }
}

/// Number of clauses, or 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn valex_bank_len(bank: *const ValexBank) -> usize {
    bank.as_ref().map_or(0, |b| b.0.len())
}

/// Parses a dictionary from its TSV form.
#[no_mangle]
pub unsafe extern "C" fn valex_lexicon_parse(text_ptr: *const c_char, out: *mut *mut ValexLexicon) -> ValexStatus {
    guard(|| {
        check_out(out, "out")?;
        let lexicon = read_lexicon(text(text_ptr, "text")?.as_bytes(), "<lexicon>")?;
        put(out, ValexLexicon(lexicon));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn valex_lexicon_free(lexicon: *mut ValexLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

#[no_mangle]
pub unsafe extern "C" fn valex_lexicon_verb_count(lexicon: *const ValexLexicon) -> usize {
    lexicon.as_ref().map_or(0, |l| l.0.verb_count())
}

#[no_mangle]
pub unsafe extern "C" fn valex_lexicon_pair_count(lexicon: *const ValexLexicon) -> usize {
    lexicon.as_ref().map_or(0, |l| l.0.pair_count())
}

/// Writes the dictionary in TSV form to a new string.
#[no_mangle]
pub unsafe extern "C" fn valex_lexicon_to_string(lexicon: *const ValexLexicon, out: *mut *mut c_char) -> ValexStatus {
    guard(|| {
        check_out(out, "out")?;
        let l = handle(lexicon, "lexicon")?;
        put_string(out, lexicon_to_string(&l.0))
    })
}

/// Replaces every frame set by the reconstruction from its own matrix.
#[no_mangle]
pub unsafe extern "C" fn valex_lexicon_reconstruct(
    lexicon: *const ValexLexicon,
    out: *mut *mut ValexLexicon,
) -> ValexStatus {
    guard(|| {
        check_out(out, "out")?;
        let l = &handle(lexicon, "lexicon")?.0;
        let mut rebuilt = Lexicon::new();
        for verb in l.verbs() {
            let frames = reconstruct_dp(&EntryTriple::from_frames(&l.frames(verb))?)?;
            rebuilt.set_frames(verb, &frames);
        }
        put(out, ValexLexicon(rebuilt));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn valex_params_free(params: *mut ValexParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Writes the parameters in their TSV file form to a new string.
#[no_mangle]
pub unsafe extern "C" fn valex_params_to_string(params: *const ValexParams, out: *mut *mut c_char) -> ValexStatus {
    guard(|| {
        check_out(out, "out")?;
        let p = handle(params, "params")?;
        put_string(out, params_to_string(&p.0))
    })
}

/// The library defaults.
#[no_mangle]
pub extern "C" fn valex_pipeline_config_default() -> ValexPipelineConfig {
    let d = PipelineConfig::default();
    ValexPipelineConfig {
        em_iters: d.em_iters as u32,
        policy: ValexPolicy::EmShort,
        seed: d.seed,
        counting: ValexCounting::Hard,
        path: ValexPath::TwoStage,
        matrix_method: ValexMatrixMethod::C,
        arg_offset: d.arg_offset,
        alpha: d.alpha,
        min_verb_count: d.min_verb_count,
    }
}

fn to_config(c: &ValexPipelineConfig) -> PipelineConfig {
    PipelineConfig {
        em_iters: c.em_iters as usize,
        policy: match c.policy {
            ValexPolicy::EmShort => SelectionPolicy::EmShort,
            ValexPolicy::EmMax => SelectionPolicy::EmMax,
            ValexPolicy::MinLength => SelectionPolicy::MinLength,
            ValexPolicy::Blind => SelectionPolicy::Blind,
        },
        seed: c.seed,
        counting: match c.counting {
            ValexCounting::Hard => Counting::Hard,
            ValexCounting::Soft => Counting::Soft,
        },
        path: match c.path {
            ValexPath::TwoStage => FilterPath::TwoStage,
            ValexPath::Bht => FilterPath::Bht,
            ValexPath::Both => FilterPath::Both,
        },
        matrix_method: match c.matrix_method {
            ValexMatrixMethod::A => MatrixMethod::A,
            ValexMatrixMethod::B => MatrixMethod::B,
            ValexMatrixMethod::C => MatrixMethod::C,
        },
        arg_offset: c.arg_offset,
        alpha: c.alpha,
        min_verb_count: c.min_verb_count,
    }
}

/// Runs the extraction pipeline. `params_out` may be null when the learned
/// parameters are not wanted.
#[no_mangle]
pub unsafe extern "C" fn valex_pipeline_run(
    bank: *const ValexBank,
    training: *const ValexLexicon,
    config: *const ValexPipelineConfig,
    lexicon_out: *mut *mut ValexLexicon,
    params_out: *mut *mut ValexParams,
) -> ValexStatus {
    guard(|| {
        check_out(lexicon_out, "lexicon_out")?;
        let bank = handle(bank, "bank")?;
        let training = handle(training, "training")?;
        let config = to_config(handle(config, "config")?);
        let run = run_pipeline(&bank.0, &training.0, &config)?;
        put(lexicon_out, ValexLexicon(run.output));
        if !params_out.is_null() {
            put(params_out, ValexParams(run.params));
        }
        Ok(())
    })
}

/// Recall, precision and F of `candidate` against `reference` over the
/// `n_verbs` verbs in `verbs`.
#[no_mangle]
pub unsafe extern "C" fn valex_eval(
    candidate: *const ValexLexicon,
    reference: *const ValexLexicon,
    level: ValexLevel,
    verbs: *const *const c_char,
    n_verbs: usize,
    out: *mut ValexPrf,
) -> ValexStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if verbs.is_null() && n_verbs > 0 {
            return Err(null("verbs"));
        }
        let cand = handle(candidate, "candidate")?;
        let refs = handle(reference, "reference")?;
        let list = (0..n_verbs)
            .map(|i| text(*verbs.add(i), "verb").map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;
        let level = match level {
            ValexLevel::Frame => EvalLevel::Frame,
            ValexLevel::Argument => EvalLevel::Argument,
        };
        let s = prf(&cand.0, &refs.0, level, &list)?;
        *out = ValexPrf {
            recall: s.recall,
            precision: s.precision,
            f_score: s.f_score,
        };
        Ok(())
    })
}

/// Generates a gold dictionary and a bank with default generator settings
/// apart from the seed and the number of verbs.
#[no_mangle]
pub unsafe extern "C" fn valex_synth(
    seed: u64,
    n_verbs: usize,
    gold_out: *mut *mut ValexLexicon,
    bank_out: *mut *mut ValexBank,
) -> ValexStatus {
    guard(|| {
        check_out(gold_out, "gold_out")?;
        check_out(bank_out, "bank_out")?;
        if n_verbs == 0 {
            return Err(Failure(ValexStatus::InvalidArgument, "n_verbs must be positive".into()));
        }
        let config = SynthConfig {
            seed,
            n_verbs,
            ..SynthConfig::default()
        };
        let gold = gen_gold(&config)?;
        let bank = gen_bank(&gold, &config)?;
        put(gold_out, ValexLexicon(gold));
        put(bank_out, ValexBank(bank));
        Ok(())
    })
}
