use ibac::message::{
    Authenticator, AuthorizationPayload, ContentObject, Interest, VerificationKeyEntry,
};
use ibac::name::{MessageName, Name, ObfuscatedName, SchemeTag};
use ibac::wire::{decode_content, decode_interest, encode_content, encode_interest};
use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;

fn bytes(min: usize, max: usize) -> impl Strategy<Value = Vec<u8>> {
    vec(any::<u8>(), min..=max)
}

fn components() -> impl Strategy<Value = Vec<Vec<u8>>> {
    vec(bytes(1, 12), 1..=5)
}

fn message_name() -> impl Strategy<Value = MessageName> {
    prop_oneof![
        components().prop_map(|c| MessageName::clear(&Name::routable(c).unwrap())),
        (
            components(),
            bytes(1, 48),
            prop_oneof![Just(SchemeTag::Enc), Just(SchemeTag::Hash)]
        )
            .prop_map(|(p, s, t)| MessageName::Obfuscated(ObfuscatedName::new(p, s, t).unwrap())),
    ]
}

fn interest() -> impl Strategy<Value = Interest> {
    let nonce = prop_oneof![bytes(16, 16), bytes(32, 32)];
    let auth = (nonce, any::<u64>(), bytes(1, 128)).prop_map(|(nonce, timestamp_ms, signature)| {
        Authenticator {
            nonce,
            timestamp_ms,
            signature,
        }
    });
    let payload = (bytes(1, 64), any::<bool>(), option::of(auth)).prop_map(
        |(group_id, group_id_encrypted, a)| AuthorizationPayload {
            group_id,
            group_id_encrypted,
            authenticator: a,
        },
    );
    (
        message_name(),
        option::of(payload),
        option::of(bytes(1, 32)),
        option::of(bytes(32, 32)),
    )
        .prop_map(|(name, payload, key_id, content_object_hash)| Interest {
            name,
            payload,
            key_id,
            content_object_hash,
        })
}

fn content() -> impl Strategy<Value = ContentObject> {
    let key = (bytes(1, 40), bytes(1, 400))
        .prop_map(|(group_id, key)| VerificationKeyEntry { group_id, key });
    (
        message_name(),
        bytes(0, 256),
        vec(key, 0..=3),
        any::<u64>(),
        bytes(1, 128),
    )
        .prop_map(
            |(name, data, verification_keys, expiry_time_ms, producer_signature)| ContentObject {
                name,
                data,
                verification_keys,
                expiry_time_ms,
                producer_signature,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn interests_round_trip(i in interest()) {
        let wire = encode_interest(&i).unwrap();
        let back = decode_interest(&wire).unwrap();
        prop_assert_eq!(&back, &i);
        prop_assert_eq!(encode_interest(&back).unwrap(), wire);
    }

    #[test]
    fn contents_round_trip(c in content()) {
        let wire = encode_content(&c).unwrap();
        let back = decode_content(&wire).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(encode_content(&back).unwrap(), wire);
    }
}

#[test]
fn odd_nonce_lengths_do_not_encode() {
    let auth = Authenticator {
        nonce: vec![1; 20],
        timestamp_ms: 0,
        signature: vec![2; 64],
    };
    let payload = AuthorizationPayload {
        group_id: vec![3; 32],
        group_id_encrypted: false,
        authenticator: Some(auth),
    };
    let name = MessageName::clear(&Name::parse("/a/b", 1).unwrap());
    assert!(encode_interest(&Interest::with_payload(name, payload)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    /// Any byte string that decodes is the one encoding of its value.
    #[test]
    fn mutated_interests_decode_only_canonically(i in interest(), at in any::<prop::sample::Index>(), b in any::<u8>()) {
        let mut wire = encode_interest(&i).unwrap();
        let k = at.index(wire.len());
        wire[k] = b;
        if let Ok(v) = decode_interest(&wire) {
            prop_assert_eq!(encode_interest(&v).unwrap(), wire);
        }
    }

    #[test]
    fn mutated_contents_decode_only_canonically(c in content(), at in any::<prop::sample::Index>(), b in any::<u8>()) {
        let mut wire = encode_content(&c).unwrap();
        let k = at.index(wire.len());
        wire[k] = b;
        if let Ok(v) = decode_content(&wire) {
            prop_assert_eq!(encode_content(&v).unwrap(), wire);
        }
    }

    #[test]
    fn truncated_messages_are_rejected(i in interest(), cut in any::<prop::sample::Index>()) {
        let wire = encode_interest(&i).unwrap();
        let n = cut.index(wire.len());
        prop_assert!(decode_interest(&wire[..n]).is_err());
    }
}
