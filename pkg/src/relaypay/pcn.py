"""Simulated ledger and payment channels with hash-and-deadline conditions.

Party ids are plain strings. A channel `cid` links a left and a right party;
a conditioned payment proposes new absolute balances for it and settles
only when the counterparty countersigns and supplies every preimage before
the deadline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .codec import encode
from .crypto import CommitmentValue, KeyPair, PublicKey, Signature, ae_sign, ae_verify, opens_safely


class InsufficientBalance(ValueError):
    pass


class UnknownChannel(KeyError):
    pass


# -- ledger --------------------------------------------------------------------


@dataclass(frozen=True)
class LedgerEvent:
    kind: str  # transferred | insufficient
    src: str
    dst: str
    amount: int


class Ledger:
    def __init__(self, balances: dict[str, int] | None = None):
        self.balances: dict[str, int] = dict(balances or {})
        self.events: list[LedgerEvent] = []

    def query(self, uid: str) -> int:
        if uid not in self.balances:
            raise KeyError(f"unknown account {uid!r}")
        return self.balances[uid]

    def transfer(self, src: str, dst: str, amount: int) -> bool:
        if amount < 0:
            raise ValueError("negative transfer")
        if self.balances.get(src, 0) < amount:
            self.events.append(LedgerEvent("insufficient", src, dst, amount))
            return False
        self.balances[src] = self.balances.get(src, 0) - amount
        self.balances[dst] = self.balances.get(dst, 0) + amount
        self.events.append(LedgerEvent("transferred", src, dst, amount))
        return True

    def total(self) -> int:
        return sum(self.balances.values())


# -- conditions ----------------------------------------------------------------


@dataclass(frozen=True)
class PaymentCondition:
    hashes: tuple[CommitmentValue, ...]
    deadline: int


def construct_condition(hashes: Iterable[CommitmentValue], deadline: int) -> PaymentCondition:
    hashes = tuple(hashes)
    if not hashes:
        raise ValueError("a payment condition needs at least one hash")
    return PaymentCondition(hashes, deadline)


def eval_condition(cond: PaymentCondition, secrets: Sequence[bytes], now: int) -> bool:
    if now > cond.deadline or len(secrets) != len(cond.hashes):
        return False
    return all(opens_safely(s, h) for s, h in zip(secrets, cond.hashes))


def order_secrets(cond: PaymentCondition, pool: Iterable[bytes]) -> list[bytes] | None:
    """Arrange known secrets positionally for `cond`; None if any is missing."""
    pool = list(pool)
    out = []
    for h in cond.hashes:
        match = next((s for s in pool if opens_safely(s, h)), None)
        if match is None:
            return None
        out.append(match)
    return out


# -- channels ------------------------------------------------------------------


@dataclass
class Channel:
    cid: str
    left: str
    right: str
    lb: int
    rb: int

    def counterparty(self, party: str) -> str:
        if party == self.left:
            return self.right
        if party == self.right:
            return self.left
        raise ValueError(f"{party} is not an endpoint of {self.cid}")


@dataclass(frozen=True)
class ConditionedPayment:
    cid: str
    lb: int
    rb: int
    cond: PaymentCondition
    initiator: str
    sig: Signature

    def statement(self) -> bytes:
        return encode(("tx", self.cid, self.lb, self.rb, self.cond))


@dataclass(frozen=True)
class UpdateRequest:
    tx: ConditionedPayment
    redeemer: str
    redeemer_sig: Signature
    secrets: tuple[bytes, ...]


@dataclass(frozen=True)
class ChannelEvent:
    kind: str  # updated | update-fail
    cid: str
    round: int
    secrets: tuple[bytes, ...] = ()
    reason: str = ""


@dataclass
class ChannelNetwork:
    roster: dict[str, PublicKey]
    channels: dict[str, Channel] = field(default_factory=dict)
    applied: set = field(default_factory=set)
    events: list[ChannelEvent] = field(default_factory=list)

    def open(self, cid: str, left: str, right: str, lb: int, rb: int) -> Channel:
        if cid in self.channels:
            raise ValueError(f"channel {cid} exists")
        ch = Channel(cid, left, right, lb, rb)
        self.channels[cid] = ch
        return ch

    def get(self, cid: str) -> Channel:
        try:
            return self.channels[cid]
        except KeyError:
            raise UnknownChannel(cid) from None

    def query(self, cid: str) -> tuple[int, int]:
        ch = self.get(cid)
        return ch.lb, ch.rb

    def holdings(self, party: str) -> int:
        total = 0
        for ch in self.channels.values():
            if ch.left == party:
                total += ch.lb
            if ch.right == party:
                total += ch.rb
        return total

    def total(self) -> int:
        return sum(ch.lb + ch.rb for ch in self.channels.values())

    def update(self, req: UpdateRequest, now: int) -> ChannelEvent:
        event = self._try_update(req, now)
        self.events.append(event)
        return event

    def _try_update(self, req: UpdateRequest, now: int) -> ChannelEvent:
        tx = req.tx

        def fail(reason: str) -> ChannelEvent:
            return ChannelEvent("update-fail", tx.cid, now, (), reason)

        ch = self.channels.get(tx.cid)
        if ch is None:
            return fail("unknown channel")
        if tx.initiator not in (ch.left, ch.right) or req.redeemer != ch.counterparty(tx.initiator):
            return fail("signers are not the channel endpoints")
        stmt = tx.statement()
        if not ae_verify(stmt, tx.sig, self.roster[tx.initiator]):
            return fail("bad initiator signature")
        if not ae_verify(stmt, req.redeemer_sig, self.roster[req.redeemer]):
            return fail("bad redeemer signature")
        if tx.lb < 0 or tx.rb < 0 or tx.lb + tx.rb != ch.lb + ch.rb:
            return fail("balance sum not preserved")
        if stmt in self.applied:
            return fail("payment already applied")
        if not eval_condition(tx.cond, req.secrets, now):
            return fail("condition not met")
        ch.lb, ch.rb = tx.lb, tx.rb
        self.applied.add(stmt)
        return ChannelEvent("updated", tx.cid, now, tuple(req.secrets))


def lock(
    channels: ChannelNetwork,
    cid: str,
    party: str,
    key: KeyPair,
    amount: int,
    cond: PaymentCondition,
) -> ConditionedPayment:
    """Propose moving `amount` from `party`'s side to the counterparty under `cond`."""
    ch = channels.get(cid)
    if party == ch.left:
        if ch.lb < amount:
            raise InsufficientBalance(f"{party} holds {ch.lb} < {amount} in {cid}")
        lb, rb = ch.lb - amount, ch.rb + amount
    elif party == ch.right:
        if ch.rb < amount:
            raise InsufficientBalance(f"{party} holds {ch.rb} < {amount} in {cid}")
        lb, rb = ch.lb + amount, ch.rb - amount
    else:
        raise ValueError(f"{party} is not an endpoint of {cid}")
    unsigned = ConditionedPayment(cid, lb, rb, cond, party, Signature(b""))
    return ConditionedPayment(cid, lb, rb, cond, party, ae_sign(unsigned.statement(), key))


def unlock(tx: ConditionedPayment, redeemer: str, key: KeyPair, secrets: Sequence[bytes]) -> UpdateRequest:
    return UpdateRequest(tx, redeemer, ae_sign(tx.statement(), key), tuple(secrets))


def credited(tx: ConditionedPayment, channel: Channel, party: str) -> int:
    """How much `party` gains if `tx` settles on `channel` in its current state."""
    if party == channel.left:
        return tx.lb - channel.lb
    if party == channel.right:
        return tx.rb - channel.rb
    raise ValueError(f"{party} is not an endpoint of {channel.cid}")
