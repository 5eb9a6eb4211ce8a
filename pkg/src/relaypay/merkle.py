"""Merkle trees with multi-member proofs.

Leaves are hashed as SHA-256(0x00 || leaf) and interior nodes as
SHA-256(0x01 || left || right). A level of odd width pairs its last node
with itself. Positions are 0-based.

A multi-proof lists the sibling digests the verifier cannot compute on its
own, level by level from the leaves up and left to right within a level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .crypto import sha256

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"


@dataclass(frozen=True)
class MerkleMultiProof:
    indices: tuple[int, ...]
    siblings: tuple[bytes, ...]
    width: int


def leaf_hash(leaf: bytes) -> bytes:
    return sha256(LEAF_PREFIX + leaf)


def node_hash(left: bytes, right: bytes) -> bytes:
    return sha256(NODE_PREFIX + left + right)


def merkle_root(leaves: Sequence[bytes]) -> bytes:
    if not leaves:
        raise ValueError("empty leaf list")
    level = [leaf_hash(x) for x in leaves]
    while len(level) > 1:
        if len(level) % 2:
            level.append(level[-1])
        level = [node_hash(level[i], level[i + 1]) for i in range(0, len(level), 2)]
    return level[0]


def _climb(known: dict[int, bytes], width: int, sibling_for) -> bytes:
    """Fold known nodes up to the root; `sibling_for(level, pos)` supplies gaps."""
    level = 0
    while width > 1:
        parents: dict[int, bytes] = {}
        for pos in sorted(known):
            parent = pos // 2
            if parent in parents:
                continue
            sib = pos ^ 1
            if sib >= width:
                sib_hash = known[pos]
            elif sib in known:
                sib_hash = known[sib]
            else:
                sib_hash = sibling_for(level, sib)
            left, right = (known[pos], sib_hash) if pos % 2 == 0 else (sib_hash, known[pos])
            parents[parent] = node_hash(left, right)
        known = parents
        width = (width + 1) // 2
        level += 1
    return known[0]


def merkle_member(indices: Sequence[int], leaves: Sequence[bytes]) -> tuple[list[bytes], MerkleMultiProof]:
    """Return the selected leaves and a proof that they sit at `indices`."""
    if not leaves:
        raise ValueError("empty leaf list")
    idx = sorted(set(indices))
    if not idx or idx[0] < 0 or idx[-1] >= len(leaves):
        raise ValueError("subset indices out of range")

    levels = [[leaf_hash(x) for x in leaves]]
    while len(levels[-1]) > 1:
        cur = list(levels[-1])
        if len(cur) % 2:
            cur.append(cur[-1])
        levels.append([node_hash(cur[i], cur[i + 1]) for i in range(0, len(cur), 2)])

    siblings: list[bytes] = []

    def take(level: int, pos: int) -> bytes:
        siblings.append(levels[level][pos])
        return levels[level][pos]

    _climb({i: levels[0][i] for i in idx}, len(leaves), take)
    return [leaves[i] for i in idx], MerkleMultiProof(tuple(idx), tuple(siblings), len(leaves))


def merkle_verify(selected: Sequence[bytes], proof: MerkleMultiProof, root: bytes) -> bool:
    idx = list(proof.indices)
    if (
        proof.width < 1
        or not idx
        or len(idx) != len(selected)
        or any(b <= a for a, b in zip(idx, idx[1:]))
        or idx[0] < 0
        or idx[-1] >= proof.width
    ):
        return False
    supply = iter(proof.siblings)
    missing = object()

    def take(level: int, pos: int) -> bytes:
        nxt = next(supply, missing)
        if nxt is missing:
            raise LookupError
        return nxt

    try:
        computed = _climb({i: leaf_hash(x) for i, x in zip(idx, selected)}, proof.width, take)
    except LookupError:
        return False
    return next(supply, missing) is missing and computed == root
