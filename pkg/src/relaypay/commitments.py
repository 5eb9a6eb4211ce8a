"""Mask and encryption commitments, proofs of misbehavior, and the
customer-side key and content extraction.

A party that relays chunk `id` publishes one EncCommitment per chunk and a
single MaskCommitment per session. The two share `h_sk`, which is what lets
a revealed mask secret be checked against the key that did the encryption.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import random
from typing import Protocol, Sequence

from .codec import encode
from .crypto import (
    HASH_SIZE,
    PAD_SIZE,
    SIG_SIZE,
    SYMKEY_SIZE,
    CommitmentValue,
    KeyPair,
    PublicKey,
    Signature,
    SymKey,
    ae_sign,
    ae_verify,
    commit,
    opens_safely,
    se_dec,
    se_enc,
    tweak_nonce,
    xor_mask,
)


class NoMisbehavior(ValueError):
    """Raised when asked to prove misbehavior against an honest commitment."""


# -- mask commitments ----------------------------------------------------------


@dataclass(frozen=True)
class MaskCommitment:
    h_sk: CommitmentValue
    h_s: CommitmentValue
    ck: bytes
    sig: Signature

    def to_bytes(self) -> bytes:
        return self.h_sk.to_bytes() + self.h_s.to_bytes() + self.ck + self.sig.raw

    @classmethod
    def from_bytes(cls, raw: bytes) -> "MaskCommitment":
        w = HASH_SIZE + PAD_SIZE
        if len(raw) != 2 * w + SYMKEY_SIZE + SIG_SIZE:
            raise ValueError("malformed mask commitment")
        return cls(
            CommitmentValue.from_bytes(raw[:w]),
            CommitmentValue.from_bytes(raw[w : 2 * w]),
            raw[2 * w : 2 * w + SYMKEY_SIZE],
            Signature(raw[2 * w + SYMKEY_SIZE :]),
        )


def _mask_statement(h_sk, h_s, ck) -> bytes:
    return encode(("mask", h_sk, h_s, ck))


def sign_mask(h_sk: CommitmentValue, h_s: CommitmentValue, ck: bytes, key: KeyPair) -> MaskCommitment:
    """Sign an arbitrary (h_sk, h_s, ck) triple; honest callers use mcom_gen."""
    return MaskCommitment(h_sk, h_s, ck, ae_sign(_mask_statement(h_sk, h_s, ck), key))


def mcom_gen(sk: SymKey, secret: bytes, key: KeyPair, rng: random.Random) -> MaskCommitment:
    raw = sk.to_bytes()
    if len(secret) != len(raw):
        raise ValueError("mask secret must be as long as the serialized key")
    h_sk = commit(raw, rng)
    h_s = commit(secret, rng)
    ck = xor_mask(secret, raw)
    return MaskCommitment(h_sk, h_s, ck, ae_sign(_mask_statement(h_sk, h_s, ck), key))


def mcom_ver(com: MaskCommitment, pk: PublicKey, h_sk: CommitmentValue, h_s: CommitmentValue) -> bool:
    return (
        len(com.ck) == SYMKEY_SIZE
        and com.h_sk == h_sk
        and com.h_s == h_s
        and ae_verify(_mask_statement(com.h_sk, com.h_s, com.ck), com.sig, pk)
    )


@dataclass(frozen=True)
class PoMMProof:
    h_sk: CommitmentValue
    h_s: CommitmentValue
    ck: bytes
    sig: Signature
    secret: bytes

    def statement(self) -> bytes:
        return _mask_statement(self.h_sk, self.h_s, self.ck) + encode(self.sig)


def _unmask_fails(ck: bytes, secret: bytes, h_sk: CommitmentValue) -> bool:
    if len(ck) != len(secret):
        return False
    return not opens_safely(xor_mask(ck, secret), h_sk)


def pomm_gen(com: MaskCommitment, pk: PublicKey, secret: bytes) -> tuple[PoMMProof, PublicKey]:
    if not opens_safely(secret, com.h_s):
        raise NoMisbehavior("secret does not open h_s")
    if not _unmask_fails(com.ck, secret, com.h_sk):
        raise NoMisbehavior("masked key opens h_sk; committer was honest")
    return PoMMProof(com.h_sk, com.h_s, com.ck, com.sig, secret), pk


def pomm_ver(proof: PoMMProof, tid: PublicKey) -> bool:
    # Accept when the unmasked key does NOT open h_sk: that is the misbehavior.
    return (
        ae_verify(_mask_statement(proof.h_sk, proof.h_s, proof.ck), proof.sig, tid)
        and opens_safely(proof.secret, proof.h_s)
        and _unmask_fails(proof.ck, proof.secret, proof.h_sk)
    )


# -- encryption commitments ------------------------------------------------------


@dataclass(frozen=True)
class EncStatement:
    h_m: CommitmentValue
    h_c: CommitmentValue
    h_sk: CommitmentValue
    chunk_id: int


@dataclass(frozen=True)
class EncCommitment:
    h_m: CommitmentValue
    h_c: CommitmentValue
    h_sk: CommitmentValue
    chunk_id: int
    sig: Signature

    @property
    def statement(self) -> EncStatement:
        return EncStatement(self.h_m, self.h_c, self.h_sk, self.chunk_id)


def _enc_statement(st: EncStatement) -> bytes:
    return encode(("enc", st.h_m, st.h_c, st.h_sk, st.chunk_id))


def encrypt_chunk(m: bytes, sk: SymKey, chunk_id: int) -> bytes:
    return se_enc(m, sk.master, tweak_nonce(sk.nonce, chunk_id))


def decrypt_chunk(c: bytes, sk: SymKey, chunk_id: int) -> bytes:
    return se_dec(c, sk.master, tweak_nonce(sk.nonce, chunk_id))


def sign_enc(st: EncStatement, key: KeyPair) -> EncCommitment:
    return EncCommitment(st.h_m, st.h_c, st.h_sk, st.chunk_id, ae_sign(_enc_statement(st), key))


def ecom_gen(
    m: bytes,
    sk: SymKey,
    chunk_id: int,
    key: KeyPair,
    rng: random.Random,
    h_sk: CommitmentValue,
    h_m: CommitmentValue | None = None,
) -> tuple[bytes, EncCommitment]:
    """Encrypt one chunk layer and commit to input, output and key.

    `h_sk` is the key commitment already published in the mask commitment.
    Pass `h_m` to reuse an existing commitment to the input (the previous
    layer's `h_c`, or the content's leaf commitment at layer 0).
    """
    c = encrypt_chunk(m, sk, chunk_id)
    st = EncStatement(h_m if h_m is not None else commit(m, rng), commit(c, rng), h_sk, chunk_id)
    return c, sign_enc(st, key)


def ecom_ver(com: EncCommitment, pk: PublicKey, h_sk: CommitmentValue, chunk_id: int) -> bool:
    return (
        com.chunk_id == chunk_id
        and com.h_sk == h_sk
        and ae_verify(_enc_statement(com.statement), com.sig, pk)
    )


class EncryptionClaimBackend(Protocol):
    """Proves and checks "this layer's decryption does not match h_m"."""

    def prove(self, st: EncStatement, ciphertext: bytes, sk: SymKey) -> object: ...

    def verify(self, st: EncStatement, witness: object) -> bool: ...


@dataclass(frozen=True)
class TransparentWitness:
    ciphertext: bytes
    key: bytes


class TransparentBackend:
    """Hands the verifier the ciphertext and key so it can redo the decryption."""

    def prove(self, st, ciphertext, sk):
        return TransparentWitness(ciphertext, sk.to_bytes())

    def verify(self, st, witness) -> bool:
        if not isinstance(witness, TransparentWitness) or len(witness.key) != SYMKEY_SIZE:
            return False
        if not opens_safely(witness.ciphertext, st.h_c) or not opens_safely(witness.key, st.h_sk):
            return False
        plain = decrypt_chunk(witness.ciphertext, SymKey.from_bytes(witness.key), st.chunk_id)
        return not opens_safely(plain, st.h_m)


TRANSPARENT = TransparentBackend()


@dataclass(frozen=True)
class PoMEProof:
    statement: EncStatement
    sig: Signature
    witness: object

    def statement_digest(self) -> bytes:
        return _enc_statement(self.statement) + encode(self.sig)


def pome_gen(
    com: EncCommitment,
    ciphertext: bytes,
    pk: PublicKey,
    sk: SymKey,
    backend: EncryptionClaimBackend = TRANSPARENT,
) -> tuple[PoMEProof, PublicKey]:
    st = com.statement
    if not opens_safely(ciphertext, st.h_c):
        raise NoMisbehavior("ciphertext does not open h_c")
    if not opens_safely(sk.to_bytes(), st.h_sk):
        raise NoMisbehavior("key does not open h_sk")
    if opens_safely(decrypt_chunk(ciphertext, sk, st.chunk_id), st.h_m):
        raise NoMisbehavior("decryption opens h_m; layer was honest")
    return PoMEProof(st, com.sig, backend.prove(st, ciphertext, sk)), pk


def pome_ver(proof: PoMEProof, tid: PublicKey, backend: EncryptionClaimBackend = TRANSPARENT) -> bool:
    return ae_verify(_enc_statement(proof.statement), proof.sig, tid) and backend.verify(
        proof.statement, proof.witness
    )


# -- tuples and extraction --------------------------------------------------------


def validate_tuple(
    ciphertext: bytes,
    chain: Sequence[EncCommitment],
    masks: Sequence[MaskCommitment],
    chunk_id: int,
    roster: Sequence[PublicKey],
) -> bool:
    """Check a delivered chunk: final ciphertext, links, ids, pairing, signatures."""
    if not chain or not (len(chain) == len(masks) == len(roster)):
        return False
    if not opens_safely(ciphertext, chain[-1].h_c):
        return False
    for i, (enc, mask, pk) in enumerate(zip(chain, masks, roster)):
        if enc.h_sk != mask.h_sk or enc.chunk_id != chunk_id:
            return False
        if not ecom_ver(enc, pk, mask.h_sk, chunk_id):
            return False
        if not mcom_ver(mask, pk, mask.h_sk, mask.h_s):
            return False
        if i + 1 < len(chain) and enc.h_c != chain[i + 1].h_m:
            return False
    return True


@dataclass
class KeyExtraction:
    keys: list[SymKey] | None
    tid: PublicKey | None = None
    proof: PoMMProof | None = None
    position: int | None = None


def ext_key(
    secrets: Sequence[bytes],
    masks: Sequence[MaskCommitment],
    roster: Sequence[PublicKey],
) -> KeyExtraction:
    """Unmask every key, provider first, then paths and hops in ascending order.

    Stops at the first committer whose unmasked key fails its own h_sk.
    """
    if not (len(secrets) == len(masks) == len(roster)):
        raise ValueError("secrets, masks and roster must align")
    keys = []
    for pos, (s, mask, pk) in enumerate(zip(secrets, masks, roster)):
        if not opens_safely(s, mask.h_s):
            raise ValueError(f"secret at position {pos} does not open its h_s")
        raw = xor_mask(mask.ck, s) if len(mask.ck) == len(s) else b""
        if len(raw) == SYMKEY_SIZE and opens_safely(raw, mask.h_sk):
            keys.append(SymKey.from_bytes(raw))
            continue
        proof, tid = pomm_gen(mask, pk, s)
        return KeyExtraction(None, tid, proof, pos)
    return KeyExtraction(keys)


@dataclass(frozen=True)
class DeliveredChunk:
    chunk_id: int
    ciphertext: bytes
    chain: tuple[EncCommitment, ...]


@dataclass
class ContentExtraction:
    content: bytes | None
    tid: PublicKey | None = None
    proof: PoMEProof | None = None
    offender: tuple[int, int] | None = None  # (path index from 0, layer; 0 = provider)
    chunks: dict[int, bytes] = field(default_factory=dict)


def extract(
    provider_key: SymKey,
    path_keys: Sequence[Sequence[SymKey]],
    deliveries: Sequence[Sequence[DeliveredChunk]],
    provider_pk: PublicKey,
    path_pks: Sequence[Sequence[PublicKey]],
    content_length: int | None = None,
) -> ContentExtraction:
    """Peel every chunk from its outermost layer down to the plaintext.

    The first layer whose decryption fails its h_m is the offender; since
    peeling starts at the customer's end, that is the cheater closest to it.
    """
    plain: dict[int, bytes] = {}
    for k, chunks in enumerate(deliveries):
        keys = [provider_key, *path_keys[k]]
        pks = [provider_pk, *path_pks[k]]
        for item in chunks:
            c = item.ciphertext
            for layer in range(len(item.chain) - 1, -1, -1):
                com = item.chain[layer]
                m = decrypt_chunk(c, keys[layer], item.chunk_id)
                if not opens_safely(m, com.h_m):
                    proof, tid = pome_gen(com, c, pks[layer], keys[layer])
                    return ContentExtraction(None, tid, proof, (k, layer))
                c = m
            plain[item.chunk_id] = c
    content = b"".join(plain[j] for j in sorted(plain))
    if content_length is not None:
        content = content[:content_length]
    return ContentExtraction(content, chunks=plain)
