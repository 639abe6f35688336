//! C interface to sentikit.
//!
//! Every fallible call returns an [`SkStatus`]; on failure a message for the
//! calling thread is available from [`sk_last_error`]. Objects are opaque and
//! released with their matching `*_free` function. Strings returned to the
//! caller are released with [`sk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use sentikit::eval::evaluate;
use sentikit::persist::ModelBundle;
use sentikit::preprocess::{preprocess_text, PreprocessConfig, ResourcePaths, Step};
use sentikit::vectorize::{load_embedding_table, EmbeddingTable};
use sentikit::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Data = 4,
    ModelFormat = 5,
    Io = 6,
    Numeric = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

impl From<&Error> for SkStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) => SkStatus::Config,
            Error::ModelFormat(_) => SkStatus::ModelFormat,
            Error::Io { .. } => SkStatus::Io,
            Error::Numeric(_) | Error::SequenceTooShort { .. } => SkStatus::Numeric,
            _ => SkStatus::Data,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: SkStatus, msg: impl Into<String>) -> SkStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), SkStatus>) -> SkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SkStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(SkStatus::Panic, "internal panic"),
    }
}

fn core<T>(r: sentikit::Result<T>) -> Result<T, SkStatus> {
    r.map_err(|e| fail(SkStatus::from(&e), e.to_string()))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, SkStatus> {
    if p.is_null() {
        return Err(fail(SkStatus::NullArgument, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SkStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn optional_path(p: *const c_char, what: &str) -> Result<Option<PathBuf>, SkStatus> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(|s| Some(PathBuf::from(s)))
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &str) -> Result<&'a T, SkStatus> {
    p.as_ref()
        .ok_or_else(|| fail(SkStatus::NullArgument, format!("{what} is NULL")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, SkStatus> {
    p.as_mut()
        .ok_or_else(|| fail(SkStatus::NullArgument, format!("{what} is NULL")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior NULs removed")
        .into_raw()
}

/// Message describing the last failed call on this thread, or NULL. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

pub struct SkPreprocessor {
    config: PreprocessConfig,
}

/// Builds a preprocessor with every step enabled. Each resource path may be
/// NULL, in which case that resource is empty (no dictionary disables
/// spelling correction).
///
/// # Safety
/// Non-NULL paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_preprocessor_new(
    stopwords: *const c_char,
    emoji_map: *const c_char,
    stem_rules: *const c_char,
    dictionary: *const c_char,
    out: *mut *mut SkPreprocessor,
) -> SkStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let paths = ResourcePaths {
            stopwords: optional_path(stopwords, "stopwords")?,
            emoji_map: optional_path(emoji_map, "emoji_map")?,
            stem_rules: optional_path(stem_rules, "stem_rules")?,
            dictionary: optional_path(dictionary, "dictionary")?,
        };
        let config = core(PreprocessConfig::load(&paths, Step::ALL.to_vec()))?;
        *out = Box::into_raw(Box::new(SkPreprocessor { config }));
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a live preprocessor from [`sk_preprocessor_new`].
#[no_mangle]
pub unsafe extern "C" fn sk_preprocessor_free(p: *mut SkPreprocessor) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Cleans and tokenizes `input`; `*out` receives the tokens joined by single
/// spaces (empty for a document with no tokens), freed with
/// [`sk_string_free`].
///
/// # Safety
/// `p` must be a live preprocessor, `input` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_preprocess(
    p: *const SkPreprocessor,
    input: *const c_char,
    out: *mut *mut c_char,
) -> SkStatus {
    guard(|| {
        let p = reference(p, "preprocessor")?;
        let input = text(input, "input")?;
        let out = out_ptr(out, "out")?;
        *out = into_c_string(preprocess_text(input, &p.config).to_string());
        Ok(())
    })
}

pub struct SkEmbeddings {
    table: EmbeddingTable,
}

/// Loads a word2vec-format text embedding table.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_embeddings_load(
    path: *const c_char,
    out: *mut *mut SkEmbeddings,
) -> SkStatus {
    guard(|| {
        let path = text(path, "path")?;
        let out = out_ptr(out, "out")?;
        let table = core(load_embedding_table(path.as_ref()))?;
        *out = Box::into_raw(Box::new(SkEmbeddings { table }));
        Ok(())
    })
}

/// Dimension of every vector in the table.
///
/// # Safety
/// `e` must be a live table from [`sk_embeddings_load`].
#[no_mangle]
pub unsafe extern "C" fn sk_embeddings_dim(e: *const SkEmbeddings) -> usize {
    e.as_ref().map_or(0, |e| e.table.dim())
}

/// # Safety
/// `e` must be NULL or a live table from [`sk_embeddings_load`].
#[no_mangle]
pub unsafe extern "C" fn sk_embeddings_free(e: *mut SkEmbeddings) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

pub struct SkModel {
    bundle: ModelBundle,
    class_names: Vec<CString>,
}

/// Loads a saved model bundle.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_model_load(path: *const c_char, out: *mut *mut SkModel) -> SkStatus {
    guard(|| {
        let path = text(path, "path")?;
        let out = out_ptr(out, "out")?;
        let bundle = core(ModelBundle::load(path.as_ref()))?;
        let class_names = bundle
            .class_names
            .iter()
            .map(|n| CString::new(n.replace('\0', " ")).expect("interior NULs removed"))
            .collect();
        *out = Box::into_raw(Box::new(SkModel {
            bundle,
            class_names,
        }));
        Ok(())
    })
}

/// # Safety
/// `m` must be NULL or a live model from [`sk_model_load`].
#[no_mangle]
pub unsafe extern "C" fn sk_model_free(m: *mut SkModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of classes the model predicts; 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live model.
#[no_mangle]
pub unsafe extern "C" fn sk_model_n_classes(m: *const SkModel) -> usize {
    m.as_ref().map_or(0, |m| m.bundle.n_classes())
}

/// Name of class `index`, owned by the model; NULL when out of range.
///
/// # Safety
/// `m` must be NULL or a live model.
#[no_mangle]
pub unsafe extern "C" fn sk_model_class_name(m: *const SkModel, index: usize) -> *const c_char {
    m.as_ref()
        .and_then(|m| m.class_names.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// True if predicting needs an embedding table.
///
/// # Safety
/// `m` must be NULL or a live model.
#[no_mangle]
pub unsafe extern "C" fn sk_model_needs_embeddings(m: *const SkModel) -> bool {
    m.as_ref().is_some_and(|m| m.bundle.needs_embeddings())
}

/// Classifies one raw text. `pre` may be NULL for every step with empty
/// resources; `emb` may be NULL for bag-of-words models. When `probs` is
/// non-NULL it receives `probs_len` class probabilities, and `probs_len`
/// must equal the class count.
///
/// # Safety
/// Handles must be live or NULL as described, `input` NUL-terminated,
/// `class_out` writable and `probs` valid for `probs_len` writes.
#[no_mangle]
pub unsafe extern "C" fn sk_model_predict(
    m: *const SkModel,
    pre: *const SkPreprocessor,
    emb: *const SkEmbeddings,
    input: *const c_char,
    class_out: *mut usize,
    probs: *mut f64,
    probs_len: usize,
) -> SkStatus {
    guard(|| {
        let m = reference(m, "model")?;
        let input = text(input, "input")?;
        let class_out = out_ptr(class_out, "class_out")?;
        if !probs.is_null() && probs_len != m.bundle.n_classes() {
            return Err(fail(
                SkStatus::BufferTooSmall,
                format!(
                    "probs holds {probs_len} values, model has {} classes",
                    m.bundle.n_classes()
                ),
            ));
        }
        let fallback;
        let config = match pre.as_ref() {
            Some(p) => &p.config,
            None => {
                fallback = PreprocessConfig::all_steps();
                &fallback
            }
        };
        let tokens = preprocess_text(input, config);
        let table = emb.as_ref().map(|e| &e.table);
        let (classes, dists) = core(m.bundle.predict(std::slice::from_ref(&tokens), table))?;
        *class_out = classes[0];
        if !probs.is_null() {
            std::slice::from_raw_parts_mut(probs, probs_len).copy_from_slice(&dists[0]);
        }
        Ok(())
    })
}

/// Support-weighted summary scores.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SkMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Scores `n` predicted class indices against `n` true ones.
///
/// # Safety
/// `preds` and `labels` must each be valid for `n` reads; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sk_metrics(
    preds: *const usize,
    labels: *const usize,
    n: usize,
    n_classes: usize,
    out: *mut SkMetrics,
) -> SkStatus {
    guard(|| {
        if preds.is_null() || labels.is_null() {
            return Err(fail(SkStatus::NullArgument, "preds or labels is NULL"));
        }
        let out = out_ptr(out, "out")?;
        let preds = std::slice::from_raw_parts(preds, n);
        let labels = std::slice::from_raw_parts(labels, n);
        let names: Vec<String> = (0..n_classes).map(|c| c.to_string()).collect();
        let m = core(evaluate(preds, labels, &names))?;
        *out = SkMetrics {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
        };
        Ok(())
    })
}
