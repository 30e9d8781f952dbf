use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::consumer::{interest_generation, ConsumerContext, IbacMode, ObfuscationScheme};
use crate::crypto::{gen_group, GroupKeyMaterial};
use crate::name::{MessageName, Name};
use crate::producer::{Producer, ProducerConfig};

const UP: FaceId = 100;
const LIFE: u64 = 10_000;

struct Fixture {
    producer: Producer,
    g1: GroupKeyMaterial,
    g2: GroupKeyMaterial,
    g3: GroupKeyMaterial,
}

fn home() -> Name {
    Name::parse_with_prefix("/edu/uci/ics/home.html", "/edu/uci").unwrap()
}

fn fixture(scheme: ObfuscationScheme) -> Fixture {
    let g1 = gen_group(128, 1).unwrap();
    let g2 = gen_group(128, 2).unwrap();
    let g3 = gen_group(128, 3).unwrap();
    let mut producer = Producer::new(ProducerConfig::new(
        vec![b"edu".to_vec(), b"uci".to_vec()],
        7,
    ));
    for g in [&g1, &g2, &g3] {
        producer.register_group(g.public()).unwrap();
    }
    producer
        .publish(
            home(),
            b"<html/>".to_vec(),
            &[*g1.group_id(), *g2.group_id()],
            scheme,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
    Fixture {
        producer,
        g1,
        g2,
        g3,
    }
}

fn router(mode: VerifyMode) -> Router {
    let mut r = Router::new(RouterConfig {
        verify_mode: mode,
        ..RouterConfig::default()
    });
    r.fib_mut().insert(&[b"edu".to_vec(), b"uci".to_vec()], UP);
    r
}

fn ctx(g: &GroupKeyMaterial) -> ConsumerContext {
    ConsumerContext::new(g.clone(), IbacMode::Full, ObfuscationScheme::Enc)
}

fn interest(c: &ConsumerContext, now: u64, seed: u64) -> Interest {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    interest_generation(c, home().routable_prefix(), &home(), now, &mut rng).unwrap()
}

fn sends(out: &Output) -> Vec<(FaceId, Vec<TraceId>)> {
    out.emissions
        .iter()
        .filter_map(|e| match e {
            Emission::SendContent { face, traces, .. } => Some((*face, traces.clone())),
            _ => None,
        })
        .collect()
}

fn drops(out: &Output) -> Vec<(DropReason, Vec<TraceId>)> {
    out.emissions
        .iter()
        .filter_map(|e| match e {
            Emission::Drop { reason, traces, .. } => Some((*reason, traces.clone())),
            _ => None,
        })
        .collect()
}

fn forwards(out: &Output) -> usize {
    out.emissions
        .iter()
        .filter(|e| matches!(e, Emission::SendInterest { .. }))
        .count()
}

/// Fetches the content through the router once so it ends up cached.
fn warm(r: &mut Router, f: &mut Fixture, now: u64) -> Interest {
    let i = interest(&ctx(&f.g1), now, 1000);
    assert_eq!(forwards(&r.on_interest(now, i.clone(), 1, 1)), 1);
    let content = f.producer.content_object_generation(&i, now).unwrap();
    let out = r.on_content(now, content, UP);
    assert_eq!(sends(&out), vec![(1, vec![1])]);
    i
}

#[test]
fn miss_forwards_and_creates_pit_entry() {
    let f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    let i = interest(&ctx(&f.g1), 0, 1);
    let out = r.on_interest(0, i.clone(), 1, 7);
    assert_eq!(
        out.emissions,
        vec![Emission::SendInterest {
            face: UP,
            interest: i.clone(),
            trace: 7
        }]
    );
    assert!(r.pit().contains(&encode_name(&i.name).unwrap()));
    assert_eq!(out.work, Work::default());
}

#[test]
fn pending_interest_aggregates_without_forwarding() {
    let f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    r.on_interest(0, interest(&ctx(&f.g1), 0, 1), 1, 1);
    let out = r.on_interest(5, interest(&ctx(&f.g1), 5, 2), 2, 2);
    assert_eq!(forwards(&out), 0);
    assert_eq!(r.pit().len(), 1);
}

#[test]
fn both_collapsed_interests_are_served() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    let a = interest(&ctx(&f.g1), 0, 1);
    r.on_interest(0, a.clone(), 1, 1);
    r.on_interest(1, interest(&ctx(&f.g1), 1, 2), 2, 2);
    let content = f.producer.content_object_generation(&a, 2).unwrap();
    let out = r.on_content(3, content, UP);
    assert_eq!(sends(&out), vec![(1, vec![1]), (2, vec![2])]);
    assert_eq!(out.work.verifications, 2);
    assert_eq!(
        r.nonce_table(&encode_name(&a.name).unwrap()).unwrap().len(),
        2
    );
}

#[test]
fn cache_hit_requires_a_valid_check() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    warm(&mut r, &mut f, 0);
    let out = r.on_interest(10, interest(&ctx(&f.g1), 10, 5), 3, 3);
    assert_eq!(sends(&out), vec![(3, vec![3])]);
    assert_eq!(forwards(&out), 0);
    assert_eq!(out.work.verifications, 1);
}

#[test]
fn replayed_nonce_is_dropped() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    let first = warm(&mut r, &mut f, 0);
    let out = r.on_interest(20, first, 4, 4);
    assert_eq!(
        drops(&out),
        vec![(DropReason::Auth(AuthFailure::DuplicateNonce), vec![4])]
    );
    assert_eq!(out.work.verifications, 0);
}

#[test]
fn unsolicited_content_is_dropped() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    let i = interest(&ctx(&f.g1), 0, 1);
    let content = f.producer.content_object_generation(&i, 0).unwrap();
    let out = r.on_content(0, content, UP);
    assert_eq!(drops(&out), vec![(DropReason::Unsolicited, vec![])]);
    assert!(r.cs().is_empty());
}

#[test]
fn group_without_key_gets_nothing() {
    // Under HASH with two groups both derive the same N′ from the shared key,
    // so a third group's interest for that name lands on the cached entry.
    let mut f = fixture(ObfuscationScheme::Hash);
    let name = home();
    let shared = f
        .producer
        .catalog()
        .get(name.components())
        .unwrap()
        .hash_key
        .clone()
        .unwrap();
    let mut c1 = ConsumerContext::new(f.g1.clone(), IbacMode::Full, ObfuscationScheme::Hash);
    c1.add_content_key(&name, shared.clone());
    let mut c3 = ConsumerContext::new(f.g3.clone(), IbacMode::Full, ObfuscationScheme::Hash);
    c3.add_content_key(&name, shared);
    let mut r = router(VerifyMode::Individual);
    let i = interest(&c1, 0, 1);
    r.on_interest(0, i.clone(), 1, 1);
    r.on_content(0, f.producer.content_object_generation(&i, 0).unwrap(), UP);
    let out = r.on_interest(10, interest(&c3, 10, 2), 2, 2);
    assert_eq!(
        drops(&out),
        vec![(DropReason::Auth(AuthFailure::UnknownGroupKey), vec![2])]
    );
    assert!(sends(&out).is_empty());
}

#[test]
fn forged_signature_fails() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    warm(&mut r, &mut f, 0);
    let mut i = interest(&ctx(&f.g1), 10, 9);
    let auth = i.payload.as_mut().unwrap().authenticator.as_mut().unwrap();
    auth.signature[5] ^= 1;
    let out = r.on_interest(10, i, 2, 2);
    assert_eq!(
        drops(&out),
        vec![(DropReason::Auth(AuthFailure::BadSignature), vec![2])]
    );
}

#[test]
fn stale_and_future_timestamps_fail() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = Router::new(RouterConfig {
        window_ms: Some(1_000),
        ..RouterConfig::default()
    });
    r.fib_mut().insert(&[b"edu".to_vec()], UP);
    warm(&mut r, &mut f, 0);
    // Window 1000 ms and skew 1000 ms: accepted t ∈ [now − 1000, now + 1000].
    let now = 500;
    let edge = interest(&ctx(&f.g1), 0, 11);
    assert_eq!(sends(&r.on_interest(now, edge, 2, 2)).len(), 1);
    let future = interest(&ctx(&f.g1), now + 1_001, 12);
    assert_eq!(
        drops(&r.on_interest(now, future, 3, 3))[0].0,
        DropReason::Auth(AuthFailure::StaleTimestamp)
    );
}

#[test]
fn expiry_boundary_evicts_entry_and_nonces() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    let first = warm(&mut r, &mut f, 0);
    let key = encode_name(&first.name).unwrap();
    let expires = r.cs().get(&key).unwrap().expires_at_ms;
    assert_eq!(expires, LIFE);
    assert!(r.expire(expires - 1).emissions.is_empty());
    let out = r.expire(expires);
    assert!(out.emissions.contains(&Emission::Note {
        name: key.clone(),
        kind: NoteKind::CacheExpire,
        trace: None
    }));
    assert!(r.nonce_table(&key).is_none());
    // With the entry gone the old interest is a miss, not a replay.
    assert_eq!(forwards(&r.on_interest(expires, first, 1, 9)), 1);
}

#[test]
fn pit_entries_expire_with_their_traces() {
    let f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Individual);
    r.on_interest(0, interest(&ctx(&f.g1), 0, 1), 1, 1);
    r.on_interest(1, interest(&ctx(&f.g1), 1, 2), 2, 2);
    assert_eq!(r.next_deadline(), Some(DEFAULT_PIT_LIFETIME_MS));
    let out = r.expire(DEFAULT_PIT_LIFETIME_MS);
    assert_eq!(drops(&out), vec![(DropReason::PitExpired, vec![1, 2])]);
    assert!(r.pit().is_empty());
}

#[test]
fn no_route_is_dropped() {
    let f = fixture(ObfuscationScheme::Enc);
    let mut r = Router::new(RouterConfig::default());
    let out = r.on_interest(0, interest(&ctx(&f.g1), 0, 1), 1, 1);
    assert_eq!(drops(&out), vec![(DropReason::NoRoute, vec![1])]);
}

#[test]
fn public_content_is_served_without_checks() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let page = Name::parse_with_prefix("/edu/uci/index.html", "/edu/uci").unwrap();
    f.producer
        .publish_public(page.clone(), b"hi".to_vec(), LIFE)
        .unwrap();
    let mut r = router(VerifyMode::Individual);
    let i = Interest::new(MessageName::clear(&page));
    r.on_interest(0, i.clone(), 1, 1);
    r.on_content(0, f.producer.content_object_generation(&i, 0).unwrap(), UP);
    let out = r.on_interest(1, i.clone(), 2, 2);
    assert_eq!(sends(&out), vec![(2, vec![2])]);
    assert_eq!(out.work.verifications, 0);
}

#[test]
fn obfuscate_only_content_is_cached_freely() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let page = Name::parse_with_prefix("/edu/uci/ics/open.html", "/edu/uci").unwrap();
    f.producer
        .publish(
            page.clone(),
            b"x".to_vec(),
            &[*f.g1.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::ObfuscateOnly,
            LIFE,
        )
        .unwrap();
    let c = ConsumerContext::new(
        f.g1.clone(),
        IbacMode::ObfuscateOnly,
        ObfuscationScheme::Enc,
    );
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let i = interest_generation(&c, page.routable_prefix(), &page, 0, &mut rng).unwrap();
    let mut r = router(VerifyMode::Individual);
    r.on_interest(0, i.clone(), 1, 1);
    r.on_content(0, f.producer.content_object_generation(&i, 0).unwrap(), UP);
    let out = r.on_interest(1, i, 2, 2);
    assert_eq!(sends(&out).len(), 1);
    assert_eq!(out.work.verifications, 0);
}

#[test]
fn encrypted_group_id_uses_trial_verification() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let pk = f.producer.encryption_public().clone();
    let c = ctx(&f.g1).with_producer_public(pk);
    let mut r = router(VerifyMode::Individual);
    let i = interest(&c, 0, 1);
    r.on_interest(0, i.clone(), 1, 1);
    let out = r.on_content(0, f.producer.content_object_generation(&i, 0).unwrap(), UP);
    assert_eq!(sends(&out).len(), 1);
    assert!(out.work.verifications >= 1);
    let out = r.on_interest(5, interest(&c, 5, 2), 2, 2);
    assert_eq!(sends(&out).len(), 1);
}

#[test]
fn batch_mode_flushes_on_size_and_deadline() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Batch {
        size: 3,
        max_wait_ms: 50,
    });
    warm(&mut r, &mut f, 0);
    let c = ctx(&f.g1);
    for k in 0..2u64 {
        let out = r.on_interest(10, interest(&c, 10, 20 + k), 2, 10 + k);
        assert!(sends(&out).is_empty());
    }
    assert_eq!(r.queued_checks(), 2);
    let out = r.on_interest(11, interest(&c, 11, 30), 3, 12);
    assert_eq!(sends(&out).len(), 3);
    assert_eq!(
        out.work,
        Work {
            verifications: 0,
            batches: 1
        }
    );

    r.on_interest(20, interest(&c, 20, 40), 4, 13);
    assert_eq!(r.next_deadline(), Some(70));
    let out = r.expire(70);
    assert_eq!(sends(&out), vec![(4, vec![13])]);
    assert_eq!(out.work.verifications, 1);
}

#[test]
fn batch_with_bad_item_falls_back_to_individual() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Batch {
        size: 2,
        max_wait_ms: 50,
    });
    warm(&mut r, &mut f, 0);
    let c = ctx(&f.g1);
    r.on_interest(10, interest(&c, 10, 50), 2, 2);
    let mut bad = interest(&c, 10, 51);
    bad.payload
        .as_mut()
        .unwrap()
        .authenticator
        .as_mut()
        .unwrap()
        .signature[40] ^= 1;
    let out = r.on_interest(10, bad, 3, 3);
    assert_eq!(sends(&out), vec![(2, vec![2])]);
    assert_eq!(
        drops(&out),
        vec![(DropReason::Auth(AuthFailure::BadSignature), vec![3])]
    );
    assert_eq!(
        out.work,
        Work {
            verifications: 2,
            batches: 1
        }
    );
}

#[test]
fn batch_rejects_duplicate_nonce_already_queued() {
    let mut f = fixture(ObfuscationScheme::Enc);
    let mut r = router(VerifyMode::Batch {
        size: 4,
        max_wait_ms: 50,
    });
    warm(&mut r, &mut f, 0);
    let i = interest(&ctx(&f.g1), 10, 60);
    r.on_interest(10, i.clone(), 2, 2);
    let out = r.on_interest(10, i, 3, 3);
    assert_eq!(
        drops(&out),
        vec![(DropReason::Auth(AuthFailure::DuplicateNonce), vec![3])]
    );
}

#[test]
fn second_group_authorizes_against_its_own_key() {
    let mut f = fixture(ObfuscationScheme::Hash);
    let name = home();
    let shared = f
        .producer
        .catalog()
        .get(name.components())
        .unwrap()
        .hash_key
        .clone()
        .unwrap();
    let mut c1 = ConsumerContext::new(f.g1.clone(), IbacMode::Full, ObfuscationScheme::Hash);
    c1.add_content_key(&name, shared.clone());
    let mut c2 = ConsumerContext::new(f.g2.clone(), IbacMode::Full, ObfuscationScheme::Hash);
    c2.add_content_key(&name, shared);
    let mut r = router(VerifyMode::Individual);
    let i = interest(&c1, 0, 1);
    r.on_interest(0, i.clone(), 1, 1);
    r.on_content(0, f.producer.content_object_generation(&i, 0).unwrap(), UP);
    let out = r.on_interest(3, interest(&c2, 3, 2), 2, 2);
    assert_eq!(sends(&out), vec![(2, vec![2])]);
}
