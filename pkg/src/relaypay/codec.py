"""Canonical byte encoding.

Every signed statement, trace digest and judge dedup key goes through
`encode`, so the layout here is frozen: changing it changes every trace.

Layout (tag byte, then body):
    N            None
    T / F        booleans
    I len body   integers, signed big-endian
    B len body   bytes
    S len body   utf-8 strings
    L count ...  lists and tuples
    D count ...  dicts, entries sorted by encoded key
    O name ...   dataclasses, fields in declaration order
Lengths and counts are 4-byte big-endian.
"""

from dataclasses import fields, is_dataclass
from enum import Enum
import hashlib


def _u32(n: int) -> bytes:
    return n.to_bytes(4, "big")


def encode(value) -> bytes:
    if value is None:
        return b"N"
    if value is True:
        return b"T"
    if value is False:
        return b"F"
    if isinstance(value, Enum):
        return encode(value.value)
    if isinstance(value, int):
        body = value.to_bytes((value.bit_length() + 8) // 8 or 1, "big", signed=True)
        return b"I" + _u32(len(body)) + body
    if isinstance(value, (bytes, bytearray)):
        return b"B" + _u32(len(value)) + bytes(value)
    if isinstance(value, str):
        body = value.encode()
        return b"S" + _u32(len(body)) + body
    if isinstance(value, (list, tuple)):
        return b"L" + _u32(len(value)) + b"".join(encode(v) for v in value)
    if isinstance(value, (set, frozenset)):
        items = sorted(encode(v) for v in value)
        return b"L" + _u32(len(items)) + b"".join(items)
    if isinstance(value, dict):
        items = sorted((encode(k), encode(v)) for k, v in value.items())
        return b"D" + _u32(len(items)) + b"".join(k + v for k, v in items)
    if is_dataclass(value):
        name = type(value).__name__.encode()
        parts = [encode(getattr(value, f.name)) for f in fields(value)]
        return b"O" + _u32(len(name)) + name + _u32(len(parts)) + b"".join(parts)
    raise TypeError(f"cannot encode {type(value).__name__}")


def digest_of(value) -> str:
    """Hex SHA-256 of the canonical encoding; used for trace payload digests."""
    return hashlib.sha256(encode(value)).hexdigest()
