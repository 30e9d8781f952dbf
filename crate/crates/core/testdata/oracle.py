#!/usr/bin/env python3
"""Independent reference implementations used to freeze test vectors.

Regenerate with:
    python3 oracle.py obfuscation > obfuscation.hex
    python3 oracle.py schnorr > schnorr.hex

The Ristretto255 arithmetic goes through libsodium via ctypes; the MODP
arithmetic uses Python integers.
"""
import ctypes
import hashlib
import hmac
import struct
import sys

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes


def encode_suffix(components):
    return b"".join(struct.pack(">I", len(c)) + c for c in components)


def siv_encrypt(key, components):
    pt = encode_suffix(components)
    mac_key = hmac.new(key, b"ibac/siv/mac", hashlib.sha256).digest()
    enc_key = hmac.new(key, b"ibac/siv/enc", hashlib.sha256).digest()[: len(key)]
    tag = hmac.new(mac_key, pt, hashlib.sha256).digest()[:16]
    enc = Cipher(algorithms.AES(enc_key), modes.CTR(tag)).encryptor()
    return tag + enc.update(pt) + enc.finalize()


def keyed_hash(key, components):
    return hmac.new(key, encode_suffix(components), hashlib.sha256).digest()


def obfuscation():
    home = [b"ics", b"home.html"]
    print("siv_zero_key_home = " + siv_encrypt(bytes(16), home).hex())
    print("siv_k256_home = " + siv_encrypt(bytes(range(32)), home).hex())
    print("hash_zero_key_home = " + keyed_hash(bytes(16), home).hex())


SODIUM = ctypes.CDLL("libsodium.so.23")
assert SODIUM.sodium_init() >= 0

# RFC 2409 group 2 (1024-bit safe prime), generator 2.
MODP1024 = int(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE65381FFFFFFFFFFFFFFFF",
    16,
)


def payload_message(name, group_id, nonce, timestamp_ms):
    fields = [name, group_id, nonce, struct.pack(">Q", timestamp_ms)]
    return b"".join(struct.pack(">I", len(f)) + f for f in fields)


def sc_reduce(wide):
    out = ctypes.create_string_buffer(32)
    SODIUM.crypto_core_ristretto255_scalar_reduce(out, wide)
    return out.raw


def sc_mul(a, b):
    out = ctypes.create_string_buffer(32)
    SODIUM.crypto_core_ristretto255_scalar_mul(out, a, b)
    return out.raw


def sc_add(a, b):
    out = ctypes.create_string_buffer(32)
    SODIUM.crypto_core_ristretto255_scalar_add(out, a, b)
    return out.raw


def base_mul(scalar):
    out = ctypes.create_string_buffer(32)
    assert SODIUM.crypto_scalarmult_ristretto255_base(out, scalar) == 0
    return out.raw


def ristretto_sign(x, msg):
    pk = base_mul(x)
    k = sc_reduce(hashlib.sha512(b"ibac/schnorr/nonce" + x + msg).digest())
    r = base_mul(k)
    c = sc_reduce(hashlib.sha512(b"ibac/schnorr/challenge" + r + pk + msg).digest())
    return pk, r + sc_add(k, sc_mul(c, x))


def modp_hash_to_scalar(p, label, parts):
    q = (p - 1) // 2
    size = (p.bit_length() + 7) // 8
    want = size + 16
    wide = b""
    counter = 0
    while len(wide) < want:
        h = hashlib.sha512(struct.pack(">I", counter) + label)
        for part in parts:
            h.update(struct.pack(">Q", len(part)) + part)
        wide += h.digest()
        counter += 1
    return int.from_bytes(wide[:want], "big") % q


def modp_sign(p, x, msg):
    q = (p - 1) // 2
    size = (p.bit_length() + 7) // 8
    canon = lambda rho: min(rho, p - rho)
    x_bytes = x.to_bytes(size, "big")
    y = x * pow(2, -1, q) % q
    pk = canon(pow(2, y, p)).to_bytes(size, "big")
    half = modp_hash_to_scalar(p, b"ibac/schnorr/nonce", [x_bytes, msg]) or 1
    r = canon(pow(2, half, p)).to_bytes(size, "big")
    c = modp_hash_to_scalar(p, b"ibac/schnorr/challenge", [r, pk, msg])
    s = (2 * half + c * x) % q
    return pk, r + s.to_bytes(size, "big")


def schnorr():
    msg = payload_message(b"/edu/uci/xyz", bytes([9] * 32), bytes([1] * 16), 1000)
    x = sc_reduce(hashlib.sha512(b"test secret").digest())
    pk, sig = ristretto_sign(x, msg)
    print("payload_message = " + msg.hex())
    print("ristretto_secret = " + x.hex())
    print("ristretto_public = " + pk.hex())
    print("ristretto_signature = " + sig.hex())
    q = (MODP1024 - 1) // 2
    xm = int.from_bytes(hashlib.sha512(b"test secret").digest() * 3, "big") % q
    pk, sig = modp_sign(MODP1024, xm, msg)
    print("modp1024_secret = " + xm.to_bytes(128, "big").hex())
    print("modp1024_public = " + pk.hex())
    print("modp1024_signature = " + sig.hex())


if __name__ == "__main__":
    globals()[sys.argv[1]]()
