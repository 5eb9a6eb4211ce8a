"""Deterministic cryptographic primitives.

Hash commitments with 16-byte padding, a length-preserving hash keystream
cipher, Ed25519 signatures, X25519 sealed boxes and XOR masking. All
randomness is drawn from an explicitly passed `random.Random`, so a seeded
run is reproducible bit for bit.

Fixed encodings:
    commitment      c = SHA-256(x || d), serialized as c || d (48 bytes)
    symmetric key   master (32) || nonce (16), 48 bytes
    nonce tweak     SHA-256(nonce || id as 8-byte big-endian)[:16]
    keystream       SHAKE-256(b"ks" || master || nonce), truncated to |m|
    signature       0x01 || Ed25519 signature (65 bytes)
    sealed box      ephemeral X25519 public (32) || ChaCha20-Poly1305 body
"""

from __future__ import annotations

from dataclasses import dataclass
import hashlib
import random

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

HASH_SIZE = 32
PAD_SIZE = 16
NONCE_SIZE = 16
MASTER_KEY_SIZE = 32
SYMKEY_SIZE = MASTER_KEY_SIZE + NONCE_SIZE
SIG_SIZE = 65
SEALED_OVERHEAD = 32 + 16

_SIG_SCHEME = b"\x01"
_RAW = (Encoding.Raw, PublicFormat.Raw)


class MalformedCommitment(ValueError):
    """A commitment value whose fields have the wrong lengths."""


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


def random_bytes(rng: random.Random, n: int) -> bytes:
    return rng.getrandbits(8 * n).to_bytes(n, "big") if n else b""


# -- commitments -------------------------------------------------------------


@dataclass(frozen=True)
class CommitmentValue:
    c: bytes
    d: bytes

    def well_formed(self) -> bool:
        return (
            isinstance(self.c, bytes)
            and isinstance(self.d, bytes)
            and len(self.c) == HASH_SIZE
            and len(self.d) == PAD_SIZE
        )

    def to_bytes(self) -> bytes:
        return self.c + self.d

    @classmethod
    def from_bytes(cls, raw: bytes) -> "CommitmentValue":
        if len(raw) != HASH_SIZE + PAD_SIZE:
            raise MalformedCommitment(f"expected {HASH_SIZE + PAD_SIZE} bytes, got {len(raw)}")
        return cls(raw[:HASH_SIZE], raw[HASH_SIZE:])

    def short(self) -> str:
        return self.c[:4].hex()


def commit(x: bytes, rng: random.Random) -> CommitmentValue:
    pad = random_bytes(rng, PAD_SIZE)
    return CommitmentValue(sha256(x + pad), pad)


def opens(x: bytes, h: CommitmentValue) -> bool:
    """True iff `h` is a commitment to `x`. Raises on a malformed commitment."""
    if not isinstance(h, CommitmentValue) or not h.well_formed():
        raise MalformedCommitment("commitment fields have wrong lengths")
    return sha256(bytes(x) + h.d) == h.c


def opens_safely(x: bytes, h) -> bool:
    """`opens` for untrusted input: malformed commitments simply fail."""
    try:
        return opens(x, h)
    except (MalformedCommitment, TypeError):
        return False


# -- symmetric encryption ----------------------------------------------------


@dataclass(frozen=True)
class SymKey:
    master: bytes
    nonce: bytes

    def to_bytes(self) -> bytes:
        return self.master + self.nonce

    @classmethod
    def from_bytes(cls, raw: bytes) -> "SymKey":
        if len(raw) != SYMKEY_SIZE:
            raise ValueError(f"symmetric key must be {SYMKEY_SIZE} bytes")
        return cls(raw[:MASTER_KEY_SIZE], raw[MASTER_KEY_SIZE:])


def se_keygen(rng: random.Random) -> SymKey:
    return SymKey(random_bytes(rng, MASTER_KEY_SIZE), random_bytes(rng, NONCE_SIZE))


def _keystream(master: bytes, nonce: bytes, n: int) -> bytes:
    return hashlib.shake_256(b"ks" + master + nonce).digest(n)


def se_enc(m: bytes, master: bytes, nonce: bytes) -> bytes:
    if not m:
        return b""
    return xor_mask(m, _keystream(master, nonce, len(m)))


se_dec = se_enc


def tweak_nonce(nonce: bytes, chunk_id: int) -> bytes:
    if chunk_id < 1:
        raise ValueError("chunk ids start at 1")
    return sha256(nonce + chunk_id.to_bytes(8, "big"))[:NONCE_SIZE]


def xor_mask(a: bytes, b: bytes) -> bytes:
    if len(a) != len(b):
        raise ValueError(f"xor length mismatch: {len(a)} vs {len(b)}")
    n = len(a)
    return (int.from_bytes(a, "little") ^ int.from_bytes(b, "little")).to_bytes(n, "little")


# -- signatures and public-key encryption -------------------------------------


@dataclass(frozen=True)
class Signature:
    raw: bytes


@dataclass(frozen=True)
class PublicKey:
    verify_key: bytes
    enc_key: bytes

    def short(self) -> str:
        return self.verify_key[:4].hex()


class KeyPair:
    """Signing and decryption keys derived from one 32-byte seed."""

    def __init__(self, seed: bytes):
        if len(seed) != 32:
            raise ValueError("key seed must be 32 bytes")
        self._sign = Ed25519PrivateKey.from_private_bytes(seed)
        self._dec = X25519PrivateKey.from_private_bytes(sha256(b"x25519" + seed))
        self.public = PublicKey(
            self._sign.public_key().public_bytes(*_RAW),
            self._dec.public_key().public_bytes(*_RAW),
        )

    def __repr__(self) -> str:
        return f"KeyPair({self.public.short()})"


def ae_keygen(rng: random.Random) -> KeyPair:
    return KeyPair(random_bytes(rng, 32))


def ae_sign(m: bytes, key: KeyPair) -> Signature:
    return Signature(_SIG_SCHEME + key._sign.sign(m))


def ae_verify(m: bytes, sig: Signature, pk: PublicKey) -> bool:
    try:
        if len(sig.raw) != SIG_SIZE or sig.raw[:1] != _SIG_SCHEME:
            return False
        Ed25519PublicKey.from_public_bytes(pk.verify_key).verify(sig.raw[1:], m)
        return True
    except (InvalidSignature, ValueError, TypeError, AttributeError):
        return False


def _box_key(shared: bytes, eph: bytes, recipient: bytes) -> bytes:
    return sha256(b"box" + shared + eph + recipient)


def ae_enc(m: bytes, pk: PublicKey, rng: random.Random) -> bytes:
    eph = X25519PrivateKey.from_private_bytes(random_bytes(rng, 32))
    eph_pub = eph.public_key().public_bytes(*_RAW)
    shared = eph.exchange(X25519PublicKey.from_public_bytes(pk.enc_key))
    body = ChaCha20Poly1305(_box_key(shared, eph_pub, pk.enc_key)).encrypt(bytes(12), m, None)
    return eph_pub + body


def ae_dec(c: bytes, key: KeyPair) -> bytes:
    """Open a sealed box. Raises ValueError if it was not sealed to `key`."""
    if len(c) < SEALED_OVERHEAD:
        raise ValueError("sealed box too short")
    eph_pub, body = c[:32], c[32:]
    try:
        shared = key._dec.exchange(X25519PublicKey.from_public_bytes(eph_pub))
        return ChaCha20Poly1305(_box_key(shared, eph_pub, key.public.enc_key)).decrypt(
            bytes(12), body, None
        )
    except (InvalidTag, ValueError) as exc:
        raise ValueError("sealed box does not open under this key") from exc
