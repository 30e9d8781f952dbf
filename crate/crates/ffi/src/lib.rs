//! C ABI over the `ibac` crate.
//!
//! Objects cross the boundary as opaque handles created by `*_new` or
//! `*_generate` and released by the matching `*_free`. Every fallible call
//! returns an [`IbacStatus`]; on failure [`ibac_last_error`] describes what
//! went wrong on the calling thread. Byte buffers and strings handed out by
//! the library are released with [`ibac_bytes_free`] and
//! [`ibac_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use ibac::analysis::{model_mu, ServiceModelParams};
use ibac::auth::Verdict;
use ibac::consumer::{interest_generation, ConsumerContext, IbacMode, ObfuscationScheme};
use ibac::crypto::{gen_group, GroupKeyMaterial};
use ibac::harness::{resolve_scenario, run_scenario, RunOptions};
use ibac::name::{parse_components, Name};
use ibac::producer::{Producer, ProducerConfig};
use ibac::router::{router_authorization_check, CacheEntry, Work};
use ibac::wire::{decode_content, decode_interest, encode_content, encode_interest};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbacStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Crypto = 3,
    Encoding = 4,
    /// The message was refused; the reason is in the last error.
    Denied = 5,
    Scenario = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbacModeCode {
    ObfuscateOnly = 0,
    Full = 1,
    AuthOnly = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IbacSchemeCode {
    Enc = 0,
    Hash = 1,
}

impl From<IbacModeCode> for IbacMode {
    fn from(m: IbacModeCode) -> Self {
        match m {
            IbacModeCode::ObfuscateOnly => IbacMode::ObfuscateOnly,
            IbacModeCode::Full => IbacMode::Full,
            IbacModeCode::AuthOnly => IbacMode::AuthOnly,
        }
    }
}

impl From<IbacSchemeCode> for ObfuscationScheme {
    fn from(s: IbacSchemeCode) -> Self {
        match s {
            IbacSchemeCode::Enc => ObfuscationScheme::Enc,
            IbacSchemeCode::Hash => ObfuscationScheme::Hash,
        }
    }
}

/// Keys of one access group.
pub struct IbacGroup(GroupKeyMaterial);

/// A group member building interests.
pub struct IbacConsumer {
    ctx: ConsumerContext,
    rng: ChaCha20Rng,
}

pub struct IbacProducer(Producer);

/// One cached content object with its nonce memory.
pub struct IbacCacheEntry {
    entry: CacheEntry,
    skew_ms: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: IbacStatus, msg: impl Into<String>) -> IbacStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning a panic into [`IbacStatus::Internal`].
fn guard(f: impl FnOnce() -> IbacStatus) -> IbacStatus {
    catch_unwind(AssertUnwindSafe(f))
        .unwrap_or_else(|_| fail(IbacStatus::Internal, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, IbacStatus> {
    if p.is_null() {
        return Err(fail(IbacStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(IbacStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn bytes_arg<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], IbacStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(IbacStatus::NullPointer, format!("{what} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn give_bytes(bytes: Vec<u8>, out: *mut *mut u8, out_len: *mut usize) -> IbacStatus {
    if out.is_null() || out_len.is_null() {
        return fail(IbacStatus::NullPointer, "output pointer is null");
    }
    let boxed = bytes.into_boxed_slice();
    *out_len = boxed.len();
    *out = Box::into_raw(boxed) as *mut u8;
    IbacStatus::Ok
}

unsafe fn give<T>(value: T, out: *mut *mut T) -> IbacStatus {
    if out.is_null() {
        return fail(IbacStatus::NullPointer, "output pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    IbacStatus::Ok
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! handle {
    ($p:expr, $what:literal) => {
        match $p.as_mut() {
            Some(h) => h,
            None => return fail(IbacStatus::NullPointer, concat!($what, " is null")),
        }
    };
}

/// Message describing the last failure on this thread, or NULL. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ibac_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ibac_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `p` and `len` must come from one library call that returned bytes.
#[no_mangle]
pub unsafe extern "C" fn ibac_bytes_free(p: *mut u8, len: usize) {
    if !p.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(p, len)));
    }
}

/// # Safety
/// `s` must be a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibac_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `(1 − δ)/τ_process + δ/(τ_process + τ_verify)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibac_model_mu(
    delta: f64,
    tau_process: f64,
    tau_verify: f64,
    out: *mut f64,
) -> IbacStatus {
    if out.is_null() {
        return fail(IbacStatus::NullPointer, "out is null");
    }
    match model_mu(&ServiceModelParams {
        delta,
        tau_process,
        tau_verify,
    }) {
        Ok(mu) => {
            *out = mu;
            IbacStatus::Ok
        }
        Err(e) => fail(IbacStatus::InvalidArgument, e.to_string()),
    }
}

/// Generates group keys at security level `kappa` (128 or 256 bits).
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ibac_group_generate(
    kappa: u32,
    seed: u64,
    out: *mut *mut IbacGroup,
) -> IbacStatus {
    guard(|| match gen_group(kappa, seed) {
        Ok(g) => give(IbacGroup(g), out),
        Err(e) => fail(IbacStatus::Crypto, e.to_string()),
    })
}

/// Copies the 32-byte group id into `out`.
///
/// # Safety
/// `group` must be a live handle and `out` must hold 32 bytes.
#[no_mangle]
pub unsafe extern "C" fn ibac_group_id(group: *const IbacGroup, out: *mut u8) -> IbacStatus {
    let Some(g) = group.as_ref() else {
        return fail(IbacStatus::NullPointer, "group is null");
    };
    if out.is_null() {
        return fail(IbacStatus::NullPointer, "out is null");
    }
    ptr::copy_nonoverlapping(g.0.group_id().as_ptr(), out, 32);
    IbacStatus::Ok
}

/// # Safety
/// `group` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibac_group_free(group: *mut IbacGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// A consumer of `group`'s content; the group handle may be freed after.
///
/// # Safety
/// `group` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ibac_consumer_new(
    group: *const IbacGroup,
    mode: IbacModeCode,
    scheme: IbacSchemeCode,
    seed: u64,
    out: *mut *mut IbacConsumer,
) -> IbacStatus {
    let Some(g) = group.as_ref() else {
        return fail(IbacStatus::NullPointer, "group is null");
    };
    let ctx = ConsumerContext::new(g.0.clone(), mode.into(), scheme.into());
    give(
        IbacConsumer {
            ctx,
            rng: ChaCha20Rng::seed_from_u64(seed),
        },
        out,
    )
}

/// # Safety
/// `consumer` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibac_consumer_free(consumer: *mut IbacConsumer) {
    if !consumer.is_null() {
        drop(Box::from_raw(consumer));
    }
}

/// Builds the encoded interest for `name` (a `/`-separated URI) whose first
/// `prefix_len` components are routable.
///
/// # Safety
/// Handles and strings must be valid; `out` and `out_len` writable.
#[no_mangle]
pub unsafe extern "C" fn ibac_consumer_interest(
    consumer: *mut IbacConsumer,
    name: *const c_char,
    prefix_len: usize,
    now_ms: u64,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> IbacStatus {
    let c = handle!(consumer, "consumer");
    let uri = tri!(str_arg(name, "name"));
    guard(|| {
        let name = match Name::parse(uri, prefix_len) {
            Ok(n) => n,
            Err(e) => return fail(IbacStatus::InvalidArgument, e.to_string()),
        };
        let interest =
            match interest_generation(&c.ctx, name.routable_prefix(), &name, now_ms, &mut c.rng) {
                Ok(i) => i,
                Err(e) => return fail(IbacStatus::Crypto, e.to_string()),
            };
        match encode_interest(&interest) {
            Ok(b) => give_bytes(b, out, out_len),
            Err(e) => fail(IbacStatus::Encoding, e.to_string()),
        }
    })
}

/// A producer answering for names under `prefix`.
///
/// # Safety
/// `prefix` must be a valid string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ibac_producer_new(
    prefix: *const c_char,
    seed: u64,
    out: *mut *mut IbacProducer,
) -> IbacStatus {
    let prefix = tri!(str_arg(prefix, "prefix"));
    guard(|| {
        give(
            IbacProducer(Producer::new(ProducerConfig::new(
                parse_components(prefix),
                seed,
            ))),
            out,
        )
    })
}

/// # Safety
/// `producer` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibac_producer_free(producer: *mut IbacProducer) {
    if !producer.is_null() {
        drop(Box::from_raw(producer));
    }
}

/// Registers the public parameters of `group`.
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn ibac_producer_register_group(
    producer: *mut IbacProducer,
    group: *const IbacGroup,
) -> IbacStatus {
    let p = handle!(producer, "producer");
    let Some(g) = group.as_ref() else {
        return fail(IbacStatus::NullPointer, "group is null");
    };
    match p.0.register_group(g.0.public()) {
        Ok(()) => IbacStatus::Ok,
        Err(e) => fail(IbacStatus::InvalidArgument, e.to_string()),
    }
}

/// Publishes `data` under `name` for one registered group.
///
/// # Safety
/// Handles, strings and `data`/`data_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ibac_producer_publish(
    producer: *mut IbacProducer,
    name: *const c_char,
    prefix_len: usize,
    data: *const u8,
    data_len: usize,
    group: *const IbacGroup,
    mode: IbacModeCode,
    scheme: IbacSchemeCode,
    lifetime_ms: u64,
) -> IbacStatus {
    let p = handle!(producer, "producer");
    let uri = tri!(str_arg(name, "name"));
    let data = tri!(bytes_arg(data, data_len, "data"));
    let Some(g) = group.as_ref() else {
        return fail(IbacStatus::NullPointer, "group is null");
    };
    guard(|| {
        let name = match Name::parse(uri, prefix_len) {
            Ok(n) => n,
            Err(e) => return fail(IbacStatus::InvalidArgument, e.to_string()),
        };
        match p.0.publish(
            name,
            data.to_vec(),
            &[*g.0.group_id()],
            scheme.into(),
            mode.into(),
            lifetime_ms,
        ) {
            Ok(_) => IbacStatus::Ok,
            Err(e) => fail(IbacStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Answers an encoded interest with an encoded content object, or returns
/// [`IbacStatus::Denied`] with the drop reason as the last error.
///
/// # Safety
/// `producer` must be live, `interest`/`len` readable, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn ibac_producer_respond(
    producer: *mut IbacProducer,
    interest: *const u8,
    len: usize,
    now_ms: u64,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> IbacStatus {
    let p = handle!(producer, "producer");
    let bytes = tri!(bytes_arg(interest, len, "interest"));
    guard(|| {
        let interest = match decode_interest(bytes) {
            Ok(i) => i,
            Err(e) => return fail(IbacStatus::Encoding, e.to_string()),
        };
        match p.0.content_object_generation(&interest, now_ms) {
            Ok(co) => match encode_content(&co) {
                Ok(b) => give_bytes(b, out, out_len),
                Err(e) => fail(IbacStatus::Encoding, e.to_string()),
            },
            Err(reason) => fail(IbacStatus::Denied, reason.as_str()),
        }
    })
}

/// Caches an encoded content object as a router would at `now_ms`. A zero
/// `window_ms` ties the nonce window to the content's remaining lifetime.
///
/// # Safety
/// `content`/`len` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ibac_cache_entry_new(
    content: *const u8,
    len: usize,
    now_ms: u64,
    window_ms: u64,
    skew_ms: u64,
    out: *mut *mut IbacCacheEntry,
) -> IbacStatus {
    let bytes = tri!(bytes_arg(content, len, "content"));
    guard(|| match decode_content(bytes) {
        Ok(co) => {
            let window = (window_ms > 0).then_some(window_ms);
            give(
                IbacCacheEntry {
                    entry: CacheEntry::new(co, now_ms, window),
                    skew_ms,
                },
                out,
            )
        }
        Err(e) => fail(IbacStatus::Encoding, e.to_string()),
    })
}

/// # Safety
/// `entry` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ibac_cache_entry_free(entry: *mut IbacCacheEntry) {
    if !entry.is_null() {
        drop(Box::from_raw(entry));
    }
}

/// Decides whether the cached content may answer an encoded interest,
/// remembering its nonce when it may.
///
/// # Safety
/// `entry` must be live and `interest`/`len` readable.
#[no_mangle]
pub unsafe extern "C" fn ibac_cache_entry_check(
    entry: *mut IbacCacheEntry,
    interest: *const u8,
    len: usize,
    now_ms: u64,
) -> IbacStatus {
    let e = handle!(entry, "cache entry");
    let bytes = tri!(bytes_arg(interest, len, "interest"));
    guard(|| {
        let interest = match decode_interest(bytes) {
            Ok(i) => i,
            Err(err) => return fail(IbacStatus::Encoding, err.to_string()),
        };
        let mut work = Work::default();
        match router_authorization_check(&interest, &mut e.entry, now_ms, e.skew_ms, &mut work) {
            Verdict::Pass => IbacStatus::Ok,
            Verdict::Fail(f) => fail(IbacStatus::Denied, f.as_str()),
        }
    })
}

/// Runs a scenario file or bundled scenario. With `has_seed` the seed is
/// overridden; a non-NULL `out_dir` receives the output files. The summary
/// is returned as JSON through `summary_json` (free with
/// [`ibac_string_free`]); pass NULL to skip it.
///
/// # Safety
/// Strings must be valid or NULL where allowed; `summary_json` writable
/// when non-NULL.
#[no_mangle]
pub unsafe extern "C" fn ibac_run_scenario(
    scenario: *const c_char,
    out_dir: *const c_char,
    has_seed: bool,
    seed: u64,
    summary_json: *mut *mut c_char,
) -> IbacStatus {
    let scenario = tri!(str_arg(scenario, "scenario"));
    let out_dir = if out_dir.is_null() {
        None
    } else {
        Some(tri!(str_arg(out_dir, "out_dir")))
    };
    guard(|| {
        let mut cfg = match resolve_scenario(scenario) {
            Ok(c) => c,
            Err(e) => return fail(IbacStatus::Scenario, e.to_string()),
        };
        if has_seed {
            cfg.seed = seed;
        }
        let report = match run_scenario(&cfg, out_dir.map(Path::new), RunOptions::default()) {
            Ok(r) => r,
            Err(e) => return fail(IbacStatus::Scenario, e.to_string()),
        };
        if !summary_json.is_null() {
            let json = serde_json::to_string(&report.summary).expect("summary serializes");
            *summary_json = CString::new(json).expect("JSON has no NUL").into_raw();
        }
        IbacStatus::Ok
    })
}
