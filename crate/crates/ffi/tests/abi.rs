use std::ffi::{CStr, CString};
use std::ptr;

use ibac_ffi::*;

fn last_error() -> String {
    let p = ibac_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Bytes(*mut u8, usize);

impl Bytes {
    fn slice(&self) -> &[u8] {
        unsafe { std::slice::from_raw_parts(self.0, self.1) }
    }
}

impl Drop for Bytes {
    fn drop(&mut self) {
        unsafe { ibac_bytes_free(self.0, self.1) }
    }
}

unsafe fn interest(c: *mut IbacConsumer, uri: &str, now: u64) -> Bytes {
    let uri = CString::new(uri).unwrap();
    let (mut p, mut n) = (ptr::null_mut(), 0);
    assert_eq!(
        ibac_consumer_interest(c, uri.as_ptr(), 2, now, &mut p, &mut n),
        IbacStatus::Ok
    );
    Bytes(p, n)
}

#[test]
fn exchange_through_a_cache() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ibac_group_generate(128, 1, &mut g), IbacStatus::Ok);
        let mut id = [0u8; 32];
        assert_eq!(ibac_group_id(g, id.as_mut_ptr()), IbacStatus::Ok);
        assert_ne!(id, [0; 32]);

        let prefix = CString::new("/edu/uci").unwrap();
        let mut p = ptr::null_mut();
        assert_eq!(
            ibac_producer_new(prefix.as_ptr(), 7, &mut p),
            IbacStatus::Ok
        );
        assert_eq!(ibac_producer_register_group(p, g), IbacStatus::Ok);
        let name = CString::new("/edu/uci/ics/home.html").unwrap();
        let data = b"hello";
        let st = ibac_producer_publish(
            p,
            name.as_ptr(),
            2,
            data.as_ptr(),
            data.len(),
            g,
            IbacModeCode::Full,
            IbacSchemeCode::Enc,
            10_000,
        );
        assert_eq!(st, IbacStatus::Ok);

        let mut c = ptr::null_mut();
        assert_eq!(
            ibac_consumer_new(g, IbacModeCode::Full, IbacSchemeCode::Enc, 3, &mut c),
            IbacStatus::Ok
        );
        ibac_group_free(g);

        let first = interest(c, "/edu/uci/ics/home.html", 100);
        let (mut co, mut co_len) = (ptr::null_mut(), 0);
        let st = ibac_producer_respond(
            p,
            first.slice().as_ptr(),
            first.1,
            100,
            &mut co,
            &mut co_len,
        );
        assert_eq!(st, IbacStatus::Ok);
        let content = Bytes(co, co_len);

        // Replaying the same interest at the producer is refused.
        let st = ibac_producer_respond(
            p,
            first.slice().as_ptr(),
            first.1,
            101,
            &mut co,
            &mut co_len,
        );
        assert_eq!(st, IbacStatus::Denied);
        assert_eq!(last_error(), "duplicate_nonce");

        let mut entry = ptr::null_mut();
        assert_eq!(
            ibac_cache_entry_new(content.0, content.1, 102, 0, 1_000, &mut entry),
            IbacStatus::Ok
        );
        let second = interest(c, "/edu/uci/ics/home.html", 200);
        assert_eq!(
            ibac_cache_entry_check(entry, second.0, second.1, 200),
            IbacStatus::Ok
        );
        assert_eq!(
            ibac_cache_entry_check(entry, second.0, second.1, 201),
            IbacStatus::Denied
        );
        assert_eq!(last_error(), "duplicate_nonce");

        ibac_cache_entry_free(entry);
        ibac_consumer_free(c);
        ibac_producer_free(p);
    }
}

#[test]
fn null_and_bad_arguments_report_errors() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(ibac_group_generate(100, 1, &mut g), IbacStatus::Crypto);
        assert!(g.is_null());
        assert_eq!(
            ibac_group_generate(128, 1, ptr::null_mut()),
            IbacStatus::NullPointer
        );
        assert_eq!(
            ibac_group_id(ptr::null(), ptr::null_mut()),
            IbacStatus::NullPointer
        );
        assert!(last_error().contains("null"));
        let mut mu = 0.0;
        assert_eq!(
            ibac_model_mu(1.5, 0.005, 0.599, &mut mu),
            IbacStatus::InvalidArgument
        );
        assert_eq!(ibac_model_mu(0.0, 0.005, 0.599, &mut mu), IbacStatus::Ok);
        assert_eq!(mu, 200.0);
        let mut entry = ptr::null_mut();
        let junk = [0xffu8; 8];
        assert_eq!(
            ibac_cache_entry_new(junk.as_ptr(), junk.len(), 0, 0, 0, &mut entry),
            IbacStatus::Encoding
        );
        // Freeing NULL is a no-op.
        ibac_group_free(ptr::null_mut());
        ibac_bytes_free(ptr::null_mut(), 0);
        ibac_string_free(ptr::null_mut());
    }
}

#[test]
fn runs_bundled_scenarios() {
    unsafe {
        let name = CString::new("figure_sequence").unwrap();
        let dir = tempfile::tempdir().unwrap();
        let out = CString::new(dir.path().to_str().unwrap()).unwrap();
        let mut json = ptr::null_mut();
        assert_eq!(
            ibac_run_scenario(name.as_ptr(), out.as_ptr(), true, 11, &mut json),
            IbacStatus::Ok
        );
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        ibac_string_free(json);
        assert!(text.contains("\"producer_interests\":1"), "{text}");
        assert!(text.contains("\"seed\":11"));
        assert!(dir.path().join("emission.log").is_file());

        let missing = CString::new("no_such_scenario").unwrap();
        assert_eq!(
            ibac_run_scenario(missing.as_ptr(), ptr::null(), false, 0, ptr::null_mut()),
            IbacStatus::Scenario
        );
        assert!(last_error().contains("no_such_scenario"));
    }
}

#[test]
fn header_is_valid_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/ibac.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in [
        "ibac_group_generate",
        "ibac_cache_entry_check",
        "ibac_run_scenario",
        "ibac_last_error",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", header])
        .status()
    else {
        eprintln!("no C compiler; skipped syntax check");
        return;
    };
    assert!(status.success());
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(ibac_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
