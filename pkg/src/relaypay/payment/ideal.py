"""Reference outcome of one enforceable payment along a single path.

This is a direct timetable of who gets paid, when, and who gets punished,
given each participant's behavior. It shares no code with the engines and
is what the round-driven exchange is checked against.

Round timetable for `n` payees (payer locks in round 1):

    locked(i)    round i, while every upstream payee keeps forwarding
    ack(i)       round i + 1
    released     round n + 2 = T', needs all n acks
    settled(n)   T' + 1, then one hop per round while the cascade holds
    enforced     T' + n + 1, when hop 1 is still unsettled
    logged(i)    enforced + n - i + 1, top down until the first silent payee
    punished(i)  enforced + n + 1, i the highest payee that never logged
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..behavior import HONEST, Behavior

PAYER_BEHAVIORS = tuple(
    Behavior.parse(b) for b in ("honest", "silent-at(lock)", "silent-at(release)", "silent-at(enforce)")
)
PAYEE_BEHAVIORS = tuple(
    Behavior.parse(b)
    for b in (
        "honest",
        "silent-at(lock)",
        "silent-at(release)",
        "silent-at(unlock)",
        "silent-at(enforce)",
        "wrong-secret",
        "withhold-unlock",
        "stall-receipt",
    )
)


def _forwards(b: Behavior) -> bool:
    return b.acts_in("lock")


def _acks(b: Behavior) -> bool:
    return b.acts_in("lock") and b.kind != "stall-receipt"


def _cascades(b: Behavior) -> bool:
    return b.acts_in("unlock") and b.kind not in ("withhold-unlock", "wrong-secret")


def _responds(b: Behavior) -> bool:
    return b.acts_in("enforce") and b.kind != "wrong-secret"


@dataclass(frozen=True)
class ExchangeTrace:
    events: tuple[tuple[int, str, int], ...]  # (round, kind, payee index; 0 for the payer)
    deltas: tuple[int, ...]  # balance change per node, payer first

    def rounds(self, kind: str) -> dict[int, int]:
        return {i: r for r, k, i in self.events if k == kind}


def ideal_exchange(
    fees: Sequence[int],
    payees: Sequence[Behavior],
    payer: Behavior = HONEST,
    penalty: int = 0,
) -> ExchangeTrace:
    n = len(fees)
    if len(payees) != n or n == 0:
        raise ValueError("one behavior per payee, at least one payee")
    for b in (payer, *payees):
        if b.kind == "wormhole-collude" or b not in (*PAYER_BEHAVIORS, *PAYEE_BEHAVIORS):
            raise ValueError(f"no reference outcome for {b}")
    amount = [sum(fees[i - 1 :]) for i in range(1, n + 1)]  # amount[i-1] locked into payee i
    events: list[tuple[int, str, int]] = []

    if not payer.acts_in("lock"):
        return ExchangeTrace((), (0,) * (n + 1))

    reached = 0  # highest payee holding a lock
    for i in range(1, n + 1):
        events.append((i, "locked", i))
        reached = i
        if _acks(payees[i - 1]):
            events.append((i + 1, "ack", i))
        if not _forwards(payees[i - 1]):
            break

    acked = reached == n and all(_acks(b) for b in payees)
    settled: dict[int, int] = {}
    if acked and payer.acts_in("release"):
        release = n + 2
        events.append((release, "released", 0))
        if _cascades(payees[n - 1]):
            settled[n] = release + 1
            for i in range(n - 1, 0, -1):
                if not _cascades(payees[i - 1]):
                    break
                settled[i] = settled[i + 1] + 1

        if payer.acts_in("enforce") and settled.get(1, release + n + 1) > release + n:
            opened = release + n + 1
            events.append((opened, "enforced", 0))
            logged = []
            for i in range(n, 0, -1):
                if not _responds(payees[i - 1]):
                    break
                window = opened + n - i + 1
                events.append((window, "logged", i))
                logged.append(i)
                settled[i] = min(settled.get(i, window), window)
            # a cascading payee also follows a forced settlement downstream
            for i in range(n - 1, 0, -1):
                if i + 1 in settled and _cascades(payees[i - 1]):
                    settled[i] = min(settled.get(i, settled[i + 1] + 1), settled[i + 1] + 1)
            missing = [i for i in range(1, n + 1) if i not in logged]
            if missing:
                events.append((opened + n + 1, "punished", max(missing)))

    deltas = [0] * (n + 1)
    for i, _ in settled.items():
        deltas[i] += amount[i - 1]
        deltas[i - 1] -= amount[i - 1]
    for r, kind, i in events:
        if kind == "punished":
            deltas[i] -= penalty
            deltas[0] += penalty
    events += [(r, "settled", i) for i, r in settled.items()]
    return ExchangeTrace(tuple(sorted(events)), tuple(deltas))
