"""Static corruption: who misbehaves and how, fixed before round 1."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

from ..behavior import HONEST, Behavior

CUSTOMER_LIBRARY = ("silent-at(setup)", "silent-at(pay)", "silent-at(decrypt)", "false-accuse")
PROVIDER_LIBRARY = (
    "silent-at(setup)",
    "silent-at(delivery)",
    "silent-at(lock)",
    "silent-at(release)",
    "silent-at(unlock)",
    "silent-at(enforce)",
    "wrong-secret",
    "garbage-encrypt",
    "wrong-mask",
)
RELAYER_LIBRARY = (
    "silent-at(setup)",
    "silent-at(delivery)",
    "silent-at(lock)",
    "silent-at(unlock)",
    "silent-at(enforce)",
    "wrong-secret",
    "garbage-encrypt",
    "withhold-unlock",
    "wrong-mask",
    "stall-receipt",
)


@dataclass(frozen=True)
class AdversarySchedule:
    behaviors: dict[str, Behavior] = field(default_factory=dict)

    @property
    def corrupted(self) -> frozenset[str]:
        return frozenset(u for u, b in self.behaviors.items() if not b.honest)

    def of(self, party: str) -> Behavior:
        return self.behaviors.get(party, HONEST)

    def honest(self, party: str) -> bool:
        return party not in self.corrupted

    def as_text(self) -> dict[str, str]:
        return {u: str(b) for u, b in sorted(self.behaviors.items()) if not b.honest}


def library_for(party: str, provider: str = "P", customer: str = "C") -> tuple[str, ...]:
    if party == customer:
        return CUSTOMER_LIBRARY
    if party == provider:
        return PROVIDER_LIBRARY
    return RELAYER_LIBRARY


def single_corruptions(parties: list[str]) -> Iterator[dict[str, str]]:
    for u in parties:
        for b in library_for(u):
            yield {u: b}


def pairwise_collusions(parties: list[str], relayer_paths: dict[str, tuple[int, int]]) -> Iterator[dict[str, str]]:
    """Every pair of parties with every pair of library behaviors, plus wormhole pairs.

    `relayer_paths` maps a relayer to (path index, hop); wormhole pairs are
    non-adjacent relayers on the same path, and the provider with any
    relayer two or more hops away.
    """
    for a, b in combinations(parties, 2):
        for ba in library_for(a):
            for bb in library_for(b):
                yield {a: ba, b: bb}
    for a, b in combinations(parties, 2):
        if _wormhole_pair(a, b, relayer_paths):
            yield {a: f"wormhole-collude({b})", b: f"wormhole-collude({a})"}


def _wormhole_pair(a: str, b: str, relayer_paths) -> bool:
    if a in relayer_paths and b in relayer_paths:
        (ka, ia), (kb, ib) = relayer_paths[a], relayer_paths[b]
        return ka == kb and abs(ia - ib) >= 2
    other = b if a == "P" else a if b == "P" else None
    return other in relayer_paths and relayer_paths[other][1] >= 2
