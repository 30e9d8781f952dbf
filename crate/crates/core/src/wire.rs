//! Canonical TLV wire encoding.
//!
//! Every element is `type (u16 BE) | length (u16 BE) | value`. Nested
//! elements appear in ascending type order, each at most once unless the
//! type is repeatable (name components, verification key entries). The
//! decoder rejects anything else, so a value has exactly one encoding.

use thiserror::Error;

use crate::message::{
    Authenticator, AuthorizationPayload, ContentObject, Interest, VerificationKeyEntry,
};
use crate::name::{MessageName, Name, NameError, ObfuscatedName, SchemeTag};

pub mod types {
    pub const INTEREST: u16 = 0x0001;
    pub const CONTENT_OBJECT: u16 = 0x0002;
    pub const NAME: u16 = 0x0010;
    pub const NAME_COMPONENT: u16 = 0x0011;
    pub const OBFUSCATED_COMPONENT: u16 = 0x0012;
    pub const SCHEME_TAG: u16 = 0x0013;
    pub const AUTH_PAYLOAD: u16 = 0x0020;
    pub const GROUP_ID: u16 = 0x0021;
    pub const NONCE: u16 = 0x0022;
    pub const TIMESTAMP: u16 = 0x0023;
    pub const PAYLOAD_SIGNATURE: u16 = 0x0024;
    pub const GROUP_ID_ENCRYPTED: u16 = 0x0025;
    pub const CONTENT_DATA: u16 = 0x0030;
    pub const VERIFICATION_KEY_ENTRY: u16 = 0x0031;
    pub const EXPIRY_TIME: u16 = 0x0032;
    pub const PRODUCER_SIGNATURE: u16 = 0x0033;
    pub const KEY_ID: u16 = 0x0040;
    pub const CONTENT_OBJECT_HASH: u16 = 0x0041;
}

/// Size of a TLV header.
pub const HEADER_LEN: usize = 4;
pub const MAX_VALUE_LEN: usize = u16::MAX as usize;
pub const MAX_MESSAGE_LEN: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("value of TLV type {tlv_type:#06x} is {len} bytes, limit is 65535")]
    ValueTooLong { tlv_type: u16, len: usize },
    #[error("nonce must be 16 or 32 bytes, got {0}")]
    NonceLength(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("truncated TLV header")]
    Truncated,
    #[error("TLV declares {declared} bytes but only {available} remain")]
    LengthOverflow { declared: usize, available: usize },
    #[error("unexpected TLV type {found:#06x}")]
    UnexpectedType { found: u16 },
    #[error("missing mandatory TLV type {0:#06x}")]
    Missing(u16),
    #[error("invalid value: {0}")]
    InvalidValue(&'static str),
    #[error("message exceeds {MAX_MESSAGE_LEN} bytes")]
    MessageTooLarge,
    #[error(transparent)]
    Name(#[from] NameError),
}

fn put(buf: &mut Vec<u8>, tlv_type: u16, value: &[u8]) -> Result<(), EncodeError> {
    if value.len() > MAX_VALUE_LEN {
        return Err(EncodeError::ValueTooLong {
            tlv_type,
            len: value.len(),
        });
    }
    buf.extend_from_slice(&tlv_type.to_be_bytes());
    buf.extend_from_slice(&(value.len() as u16).to_be_bytes());
    buf.extend_from_slice(value);
    Ok(())
}

struct Reader<'a> {
    rest: &'a [u8],
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { rest: bytes }
    }

    fn peek_type(&self) -> Result<Option<u16>, DecodeError> {
        match self.rest.len() {
            0 => Ok(None),
            1..HEADER_LEN => Err(DecodeError::Truncated),
            _ => Ok(Some(u16::from_be_bytes([self.rest[0], self.rest[1]]))),
        }
    }

    fn read(&mut self) -> Result<(u16, &'a [u8]), DecodeError> {
        if self.rest.len() < HEADER_LEN {
            return Err(DecodeError::Truncated);
        }
        let t = u16::from_be_bytes([self.rest[0], self.rest[1]]);
        let len = u16::from_be_bytes([self.rest[2], self.rest[3]]) as usize;
        let available = self.rest.len() - HEADER_LEN;
        if len > available {
            return Err(DecodeError::LengthOverflow {
                declared: len,
                available,
            });
        }
        let value = &self.rest[HEADER_LEN..HEADER_LEN + len];
        self.rest = &self.rest[HEADER_LEN + len..];
        Ok((t, value))
    }

    fn optional(&mut self, t: u16) -> Result<Option<&'a [u8]>, DecodeError> {
        if self.peek_type()? == Some(t) {
            Ok(Some(self.read()?.1))
        } else {
            Ok(None)
        }
    }

    fn expect(&mut self, t: u16) -> Result<&'a [u8], DecodeError> {
        match self.peek_type()? {
            Some(found) if found == t => Ok(self.read()?.1),
            Some(found) => {
                // Surface a length problem before a type problem.
                self.read()?;
                Err(DecodeError::UnexpectedType { found })
            }
            None => Err(DecodeError::Missing(t)),
        }
    }

    fn finish(mut self) -> Result<(), DecodeError> {
        match self.peek_type()? {
            None => Ok(()),
            Some(found) => {
                self.read()?;
                Err(DecodeError::UnexpectedType { found })
            }
        }
    }
}

/// Encodes the Name TLV. These bytes are what PITs and content stores index.
pub fn encode_name(name: &MessageName) -> Result<Vec<u8>, EncodeError> {
    let mut inner = Vec::new();
    match name {
        MessageName::Clear(n) => {
            for c in n.components() {
                put(&mut inner, types::NAME_COMPONENT, c)?;
            }
        }
        MessageName::Obfuscated(o) => {
            for c in o.routable_prefix() {
                put(&mut inner, types::NAME_COMPONENT, c)?;
            }
            if o.scheme() != SchemeTag::None {
                put(
                    &mut inner,
                    types::OBFUSCATED_COMPONENT,
                    o.obfuscated_suffix(),
                )?;
            }
            put(&mut inner, types::SCHEME_TAG, &[o.scheme() as u8])?;
        }
    }
    let mut out = Vec::with_capacity(inner.len() + HEADER_LEN);
    put(&mut out, types::NAME, &inner)?;
    Ok(out)
}

fn decode_name_value(value: &[u8]) -> Result<MessageName, DecodeError> {
    let mut r = Reader::new(value);
    let mut components = Vec::new();
    while r.peek_type()? == Some(types::NAME_COMPONENT) {
        components.push(r.read()?.1.to_vec());
    }
    let obfuscated = r.optional(types::OBFUSCATED_COMPONENT)?;
    let scheme = r.optional(types::SCHEME_TAG)?;
    r.finish()?;
    match (obfuscated, scheme) {
        (None, None) => Ok(MessageName::Clear(Name::routable(components)?)),
        (Some(_), None) => Err(DecodeError::InvalidValue(
            "obfuscated component without scheme tag",
        )),
        (obf, Some(tag)) => {
            let tag = match tag {
                [b] => SchemeTag::from_byte(*b)
                    .ok_or(DecodeError::InvalidValue("unknown scheme tag"))?,
                _ => return Err(DecodeError::InvalidValue("scheme tag must be one byte")),
            };
            let suffix = match (tag, obf) {
                (SchemeTag::None, None) => Vec::new(),
                (SchemeTag::None, Some(_)) => {
                    return Err(DecodeError::InvalidValue(
                        "scheme NONE with obfuscated component",
                    ))
                }
                (_, None) => return Err(DecodeError::InvalidValue("missing obfuscated component")),
                (_, Some(v)) => v.to_vec(),
            };
            Ok(MessageName::Obfuscated(ObfuscatedName::new(
                components, suffix, tag,
            )?))
        }
    }
}

/// Decodes a standalone Name TLV.
pub fn decode_name(bytes: &[u8]) -> Result<MessageName, DecodeError> {
    let mut r = Reader::new(bytes);
    let value = r.expect(types::NAME)?;
    r.finish()?;
    decode_name_value(value)
}

fn encode_payload(p: &AuthorizationPayload) -> Result<Vec<u8>, EncodeError> {
    let mut inner = Vec::new();
    put(&mut inner, types::GROUP_ID, &p.group_id)?;
    if let Some(a) = &p.authenticator {
        if a.nonce.len() != 16 && a.nonce.len() != 32 {
            return Err(EncodeError::NonceLength(a.nonce.len()));
        }
        put(&mut inner, types::NONCE, &a.nonce)?;
        put(&mut inner, types::TIMESTAMP, &a.timestamp_ms.to_be_bytes())?;
        put(&mut inner, types::PAYLOAD_SIGNATURE, &a.signature)?;
    }
    put(
        &mut inner,
        types::GROUP_ID_ENCRYPTED,
        &[p.group_id_encrypted as u8],
    )?;
    Ok(inner)
}

fn decode_u64(v: &[u8]) -> Result<u64, DecodeError> {
    let arr: [u8; 8] = v
        .try_into()
        .map_err(|_| DecodeError::InvalidValue("expected 8-byte integer"))?;
    Ok(u64::from_be_bytes(arr))
}

fn decode_payload(value: &[u8]) -> Result<AuthorizationPayload, DecodeError> {
    let mut r = Reader::new(value);
    let group_id = r.expect(types::GROUP_ID)?.to_vec();
    let nonce = r.optional(types::NONCE)?;
    let timestamp = r.optional(types::TIMESTAMP)?;
    let signature = r.optional(types::PAYLOAD_SIGNATURE)?;
    let flag = r.expect(types::GROUP_ID_ENCRYPTED)?;
    r.finish()?;
    if group_id.is_empty() {
        return Err(DecodeError::InvalidValue("empty group id"));
    }
    let group_id_encrypted = match flag {
        [0] => false,
        [1] => true,
        _ => {
            return Err(DecodeError::InvalidValue(
                "encrypted-group-id flag must be 0 or 1",
            ))
        }
    };
    let authenticator = match (nonce, timestamp, signature) {
        (None, None, None) => None,
        (Some(n), Some(t), Some(s)) => {
            if n.len() != 16 && n.len() != 32 {
                return Err(DecodeError::InvalidValue("nonce must be 16 or 32 bytes"));
            }
            Some(Authenticator {
                nonce: n.to_vec(),
                timestamp_ms: decode_u64(t)?,
                signature: s.to_vec(),
            })
        }
        _ => {
            return Err(DecodeError::InvalidValue(
                "nonce, timestamp and signature travel together",
            ))
        }
    };
    Ok(AuthorizationPayload {
        group_id,
        group_id_encrypted,
        authenticator,
    })
}

pub fn encode_interest(i: &Interest) -> Result<Vec<u8>, EncodeError> {
    let mut inner = encode_name(&i.name)?;
    if let Some(p) = &i.payload {
        put(&mut inner, types::AUTH_PAYLOAD, &encode_payload(p)?)?;
    }
    if let Some(k) = &i.key_id {
        put(&mut inner, types::KEY_ID, k)?;
    }
    if let Some(h) = &i.content_object_hash {
        put(&mut inner, types::CONTENT_OBJECT_HASH, h)?;
    }
    let mut out = Vec::with_capacity(inner.len() + HEADER_LEN);
    put(&mut out, types::INTEREST, &inner)?;
    Ok(out)
}

pub fn decode_interest(bytes: &[u8]) -> Result<Interest, DecodeError> {
    if bytes.len() > MAX_MESSAGE_LEN {
        return Err(DecodeError::MessageTooLarge);
    }
    let mut outer = Reader::new(bytes);
    let value = outer.expect(types::INTEREST)?;
    outer.finish()?;
    let mut r = Reader::new(value);
    let name = decode_name_value(r.expect(types::NAME)?)?;
    let payload = r
        .optional(types::AUTH_PAYLOAD)?
        .map(decode_payload)
        .transpose()?;
    let key_id = r.optional(types::KEY_ID)?.map(<[u8]>::to_vec);
    let content_object_hash = r.optional(types::CONTENT_OBJECT_HASH)?.map(<[u8]>::to_vec);
    r.finish()?;
    Ok(Interest {
        name,
        payload,
        key_id,
        content_object_hash,
    })
}

fn encode_key_entry(e: &VerificationKeyEntry) -> Result<Vec<u8>, EncodeError> {
    let mut v = Vec::with_capacity(HEADER_LEN + e.group_id.len() + e.key.len());
    put(&mut v, types::GROUP_ID, &e.group_id)?;
    v.extend_from_slice(&e.key);
    Ok(v)
}

/// The bytes a producer signs for a content object: everything except the
/// producer signature itself, including the verification keys.
pub fn content_signing_bytes(c: &ContentObject) -> Result<Vec<u8>, EncodeError> {
    let mut inner = encode_name(&c.name)?;
    put(&mut inner, types::CONTENT_DATA, &c.data)?;
    for e in &c.verification_keys {
        put(
            &mut inner,
            types::VERIFICATION_KEY_ENTRY,
            &encode_key_entry(e)?,
        )?;
    }
    put(
        &mut inner,
        types::EXPIRY_TIME,
        &c.expiry_time_ms.to_be_bytes(),
    )?;
    Ok(inner)
}

pub fn encode_content(c: &ContentObject) -> Result<Vec<u8>, EncodeError> {
    let mut inner = content_signing_bytes(c)?;
    put(&mut inner, types::PRODUCER_SIGNATURE, &c.producer_signature)?;
    let mut out = Vec::with_capacity(inner.len() + HEADER_LEN);
    put(&mut out, types::CONTENT_OBJECT, &inner)?;
    Ok(out)
}

pub fn decode_content(bytes: &[u8]) -> Result<ContentObject, DecodeError> {
    if bytes.len() > MAX_MESSAGE_LEN {
        return Err(DecodeError::MessageTooLarge);
    }
    let mut outer = Reader::new(bytes);
    let value = outer.expect(types::CONTENT_OBJECT)?;
    outer.finish()?;
    let mut r = Reader::new(value);
    let name = decode_name_value(r.expect(types::NAME)?)?;
    let data = r.expect(types::CONTENT_DATA)?.to_vec();
    let mut verification_keys = Vec::new();
    while r.peek_type()? == Some(types::VERIFICATION_KEY_ENTRY) {
        let entry = r.read()?.1;
        let mut er = Reader::new(entry);
        let group_id = er.expect(types::GROUP_ID)?.to_vec();
        let key = er.rest.to_vec();
        if group_id.is_empty() || key.is_empty() {
            return Err(DecodeError::InvalidValue(
                "verification key entry needs a group id and a key",
            ));
        }
        verification_keys.push(VerificationKeyEntry { group_id, key });
    }
    let expiry_time_ms = decode_u64(r.expect(types::EXPIRY_TIME)?)?;
    let producer_signature = r.expect(types::PRODUCER_SIGNATURE)?.to_vec();
    r.finish()?;
    Ok(ContentObject {
        name,
        data,
        verification_keys,
        expiry_time_ms,
        producer_signature,
    })
}
