"""Deadline arithmetic for the accumulative hash-time-locked payments.

Rounds are absolute. In the multi-path schedule the provider locks at
`delivery_deadline + 1`, collects receipts until `delivery_deadline +
longest + 2`, and every relayer keeps one spare round after its last
chance to answer the judge.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


def timelocks_single(current_round: int, hops: int) -> list[int]:
    """Deadlines t_0..t_hops for one path, one round apart, counted from `current_round`."""
    if hops < 0:
        raise ValueError("hop count must be non-negative")
    t0 = current_round + hops + 1
    return [t0 - i for i in range(hops + 1)]


@dataclass(frozen=True)
class Timelocks:
    delivery_deadline: int  # T_1
    enforce_deadline: int  # T_2
    customer_deadline: int  # t_0
    hop_deadlines: tuple[tuple[int, ...], ...]  # t_{k,i}, path k and hop i both 1-based

    def hop(self, k: int, i: int) -> int:
        return self.hop_deadlines[k - 1][i - 1]

    @property
    def longest(self) -> int:
        return max((len(p) for p in self.hop_deadlines), default=0)

    @property
    def receipt_deadline(self) -> int:
        return self.delivery_deadline + self.longest + 2


def payment_schedule(lengths: Sequence[int], delivery_deadline: int) -> Timelocks:
    """Multi-path deadlines anchored at an arbitrary delivery deadline."""
    if not lengths:
        raise ValueError("need at least one path")
    longest = max(lengths)
    t2 = delivery_deadline + 2 * longest + 5
    t0 = t2 + longest + 2
    hops = tuple(tuple(t2 + n - i + 2 for i in range(1, n + 1)) for n in lengths)
    return Timelocks(delivery_deadline, t2, t0, hops)


def timelocks_multi(lengths: Sequence[int]) -> Timelocks:
    if not lengths:
        raise ValueError("need at least one path")
    return payment_schedule(lengths, 5 + max(lengths))
