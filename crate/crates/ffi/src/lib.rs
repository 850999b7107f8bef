//! C ABI over the `nedkit` linker.
//!
//! Every fallible function returns a [`NedStatus`]; on failure the message is
//! available from [`ned_last_error_message`] on the same thread. Strings
//! returned through out-parameters are owned by the caller and must be
//! released with [`ned_string_free`]. Snapshots are opaque handles released
//! with [`ned_snapshot_free`]. A snapshot may be shared by threads for
//! concurrent read-only calls.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use nedkit::linker::write_annotations;
use nedkit::{
    build_snapshot, evaluate_with_workers, link_corpus, load_snapshot, parse_corpus,
    parse_dump_str, BuildOptions, CorpusFormat, Error, KnowledgeSnapshot, LinkerConfig, Module,
    ScorerConfig,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NedStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    NotFound = 3,
    Io = 4,
    Parse = 5,
    Conflict = 6,
    Redirect = 7,
    Corrupt = 8,
    VersionMismatch = 9,
    Input = 10,
    Config = 11,
    Internal = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NedCorpusFormat {
    Native = 0,
    Nif = 1,
}

/// Options for [`ned_disambiguate`] and [`ned_evaluate`]. Start from
/// [`ned_link_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NedLinkOptions {
    pub nil_threshold: f64,
    /// Comma-separated subset of `infobox,textual,llc1,llc2`; NULL for all.
    pub modules: *const c_char,
    pub format: NedCorpusFormat,
    pub verbose_ambiguity: bool,
    /// 0 or 1 links serially.
    pub workers: u32,
}

/// Opaque knowledge snapshot.
pub struct NedSnapshot {
    inner: KnowledgeSnapshot,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NedStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parse { .. } => NedStatus::Parse,
            Error::Conflict(_) => NedStatus::Conflict,
            Error::RedirectCycle(_) | Error::RedirectTooDeep(..) => NedStatus::Redirect,
            Error::Io { .. } => NedStatus::Io,
            Error::VersionMismatch { .. } => NedStatus::VersionMismatch,
            Error::Corrupt(_) => NedStatus::Corrupt,
            Error::Input(_) => NedStatus::Input,
            Error::Config(_) => NedStatus::Config,
            Error::Contract(_) => NedStatus::Internal,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', "\\0")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NedStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(Failure(
            NedStatus::Internal,
            format!("internal error: {msg}"),
        ))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NedStatus::Ok
        }
        Err(Failure(status, msg)) => {
            set_last_error(&msg);
            status
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(NedStatus::NullArgument, format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NedStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn snapshot_arg<'a>(p: *const NedSnapshot) -> Result<&'a KnowledgeSnapshot, Failure> {
    p.as_ref()
        .map(|s| &s.inner)
        .ok_or_else(|| Failure(NedStatus::NullArgument, "snapshot is NULL".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(NedStatus::NullArgument, format!("{name} is NULL")))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(NedStatus::Internal, "output contains a NUL byte".into()))
}

unsafe fn configs(
    options: *const NedLinkOptions,
) -> Result<(ScorerConfig, LinkerConfig, CorpusFormat, bool, usize), Failure> {
    let o = options
        .as_ref()
        .copied()
        .unwrap_or_else(|| ned_link_options_default());
    let mut scorer = ScorerConfig::default();
    if !o.modules.is_null() {
        scorer.enabled_modules = Module::parse_list(str_arg(o.modules, "modules")?)?;
    }
    scorer.validate()?;
    let linker = LinkerConfig {
        nil_threshold: o.nil_threshold,
        ..Default::default()
    };
    linker.validate()?;
    let format = match o.format {
        NedCorpusFormat::Native => CorpusFormat::Native,
        NedCorpusFormat::Nif => CorpusFormat::Nif,
    };
    Ok((
        scorer,
        linker,
        format,
        o.verbose_ambiguity,
        o.workers as usize,
    ))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn ned_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn ned_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ned_link_options_default() -> NedLinkOptions {
    NedLinkOptions {
        nil_threshold: LinkerConfig::default().nil_threshold,
        modules: ptr::null(),
        format: NedCorpusFormat::Native,
        verbose_ambiguity: false,
        workers: 1,
    }
}

/// Parse the dump at `dump_path` and write a snapshot file to
/// `snapshot_path`.
///
/// # Safety
/// Both paths must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn ned_build_snapshot(
    dump_path: *const c_char,
    snapshot_path: *const c_char,
    build_timestamp: u64,
) -> NedStatus {
    guard(|| {
        let input = str_arg(dump_path, "dump_path")?;
        let output = str_arg(snapshot_path, "snapshot_path")?;
        let text = std::fs::read_to_string(input).map_err(|e| Error::Io {
            path: input.into(),
            source: e,
        })?;
        let data = build_snapshot(&parse_dump_str(&text)?, BuildOptions { build_timestamp })?;
        data.write_atomic(Path::new(output))?;
        Ok(())
    })
}

/// Load a snapshot file into a new handle stored in `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ned_snapshot_load(
    path: *const c_char,
    out: *mut *mut NedSnapshot,
) -> NedStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        *slot = ptr::null_mut();
        let inner = load_snapshot(str_arg(path, "path")?)?;
        *slot = Box::into_raw(Box::new(NedSnapshot { inner }));
        Ok(())
    })
}

/// Build a snapshot in memory from dump text.
///
/// # Safety
/// `dump_text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ned_snapshot_from_dump(
    dump_text: *const c_char,
    out: *mut *mut NedSnapshot,
) -> NedStatus {
    guard(|| {
        let slot = out_arg(out, "out")?;
        *slot = ptr::null_mut();
        let records = parse_dump_str(str_arg(dump_text, "dump_text")?)?;
        let inner = KnowledgeSnapshot::from_records(&records)?;
        *slot = Box::into_raw(Box::new(NedSnapshot { inner }));
        Ok(())
    })
}

/// Release a snapshot handle. NULL is ignored.
///
/// # Safety
/// `snapshot` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ned_snapshot_free(snapshot: *mut NedSnapshot) {
    if !snapshot.is_null() {
        drop(Box::from_raw(snapshot));
    }
}

/// Number of articles; 0 for NULL.
///
/// # Safety
/// `snapshot` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ned_snapshot_entity_count(snapshot: *const NedSnapshot) -> usize {
    snapshot.as_ref().map_or(0, |s| s.inner.entity_count())
}

/// Resolve a title or redirect to an entity id.
///
/// # Safety
/// `snapshot` must be a live handle, `title` a NUL-terminated string and
/// `out_id` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ned_snapshot_resolve_title(
    snapshot: *const NedSnapshot,
    title: *const c_char,
    out_id: *mut u32,
) -> NedStatus {
    guard(|| {
        let s = snapshot_arg(snapshot)?;
        let title = str_arg(title, "title")?;
        let slot = out_arg(out_id, "out_id")?;
        let id = s
            .resolve_title(title)
            .ok_or_else(|| Failure(NedStatus::NotFound, format!("no entity titled {title:?}")))?;
        *slot = id.0;
        Ok(())
    })
}

/// Canonical title of an entity id, as a caller-owned string.
///
/// # Safety
/// `snapshot` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ned_snapshot_entity_title(
    snapshot: *const NedSnapshot,
    id: u32,
    out: *mut *mut c_char,
) -> NedStatus {
    guard(|| {
        let s = snapshot_arg(snapshot)?;
        let slot = out_arg(out, "out")?;
        *slot = ptr::null_mut();
        let title = s
            .title(nedkit::EntityId(id))
            .ok_or_else(|| Failure(NedStatus::NotFound, format!("no entity with id {id}")))?;
        *slot = into_c_string(title.to_string())?;
        Ok(())
    })
}

/// Link every mention of a corpus given as text. `*out` receives one JSON
/// annotation per line.
///
/// # Safety
/// `snapshot` must be a live handle, `corpus` a NUL-terminated string,
/// `options` NULL or valid, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ned_disambiguate(
    snapshot: *const NedSnapshot,
    corpus: *const c_char,
    options: *const NedLinkOptions,
    out: *mut *mut c_char,
) -> NedStatus {
    guard(|| {
        let s = snapshot_arg(snapshot)?;
        let slot = out_arg(out, "out")?;
        *slot = ptr::null_mut();
        let (scorer, linker, format, verbose, workers) = configs(options)?;
        let corpus = parse_corpus(str_arg(corpus, "corpus")?, format)?;
        let annotations = link_corpus(&corpus.documents, s, &scorer, &linker, workers)?;
        *slot = into_c_string(write_annotations(&annotations, verbose))?;
        Ok(())
    })
}

/// Link a gold-annotated corpus and return the evaluation report as JSON.
///
/// # Safety
/// Same as [`ned_disambiguate`].
#[no_mangle]
pub unsafe extern "C" fn ned_evaluate(
    snapshot: *const NedSnapshot,
    corpus: *const c_char,
    options: *const NedLinkOptions,
    out: *mut *mut c_char,
) -> NedStatus {
    guard(|| {
        let s = snapshot_arg(snapshot)?;
        let slot = out_arg(out, "out")?;
        *slot = ptr::null_mut();
        let (scorer, linker, format, _, workers) = configs(options)?;
        let corpus = parse_corpus(str_arg(corpus, "corpus")?, format)?;
        let report = evaluate_with_workers(&corpus, s, &scorer, &linker, workers)?;
        *slot = into_c_string(report.to_json())?;
        Ok(())
    })
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ned_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
