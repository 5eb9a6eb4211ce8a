"""Byte accounting for bus messages.

Sizes follow a fixed model rather than any serialization: a hash or
commitment counts |h| = 32 bytes, a signature |σ| = 65, raw byte strings
their length. Party ids, channel ids and chunk indices are free. A relayed
encryption commitment costs |h| + |σ|, because its input digest and key
digest are already known to the receiver.
"""

from __future__ import annotations

import dataclasses
from enum import Enum

from ..commitments import EncCommitment
from ..crypto import HASH_SIZE, SIG_SIZE, CommitmentValue, PublicKey, Signature

ENC_COMMITMENT_WIRE = HASH_SIZE + SIG_SIZE


def measure(value) -> int:
    """Accounted size of a payload under the fixed byte model."""
    if value is None or isinstance(value, (bool, str, int, Enum)):
        return 0
    if isinstance(value, (bytes, bytearray)):
        return len(value)
    if isinstance(value, CommitmentValue):
        return HASH_SIZE
    if isinstance(value, Signature):
        return SIG_SIZE
    if isinstance(value, PublicKey):
        return HASH_SIZE
    if isinstance(value, EncCommitment):
        return ENC_COMMITMENT_WIRE
    if isinstance(value, dict):
        return sum(measure(v) for v in value.values())
    if isinstance(value, (list, tuple, set, frozenset)):
        return sum(measure(v) for v in value)
    if dataclasses.is_dataclass(value):
        return sum(measure(getattr(value, f.name)) for f in dataclasses.fields(value))
    raise TypeError(f"no size model for {type(value).__name__}")


def split_size(kind: str, payload) -> tuple[int, int]:
    """(content bytes, overhead bytes) of one message."""
    if kind == "chunk":
        return len(payload.ciphertext), measure(payload.chain)
    return 0, measure(payload)
