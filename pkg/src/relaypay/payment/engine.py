"""Round-driven payment state machines for the paying provider and each relayer.

Both engines run in one of two modes. With a synchronizer secret (the
enforceable mode) relayers acknowledge locks with signed receipts, nothing
unlocks until the provider releases the synchronizer, and a stalled path
can be forced on-chain. Without one (the plain mode) the last relayer
unlocks as soon as its lock arrives and there is no on-chain fallback.
"""

from __future__ import annotations

from typing import Iterable

from ..behavior import HONEST, Behavior
from ..crypto import CommitmentValue, KeyPair, PublicKey, opens_safely
from ..judge import JudgeEvent
from ..messages import Enforce, LogSecret, Message, Punish, Send, SubmitUpdate
from ..pcn import ChannelEvent, ChannelNetwork, ConditionedPayment, PaymentCondition, order_secrets, unlock
from .htlc import PathSpec, ack_receipt, build_outgoing_lock, receipt_valid, verify_incoming_lock
from .timelocks import Timelocks

_BOGUS = b"\x00" * 48


def _assemble(cond: PaymentCondition, pool: Iterable[bytes], own: bytes, reveal: bytes) -> list[bytes] | None:
    """Order secrets for `cond`, revealing `reveal` in place of our own secret."""
    ordered = order_secrets(cond, [*pool, own])
    if ordered is None:
        return None
    return [reveal if s == own else s for s in ordered]


class PayerEngine:
    """The provider's side: opens every path, gathers receipts, releases, enforces."""

    def __init__(
        self,
        name: str,
        key: KeyPair,
        channels: ChannelNetwork,
        roster: dict[str, PublicKey],
        paths: Iterable[PathSpec],
        timelocks: Timelocks | None = None,
        sync_secret: bytes | None = None,
        sync_hash: CommitmentValue | None = None,
        behavior: Behavior = HONEST,
    ):
        self.name = name
        self.key = key
        self.channels = channels
        self.roster = roster
        self.paths = {p.index: p for p in paths if p.length}
        self.timelocks = timelocks
        self.sync_secret = sync_secret
        self.sync_hash = sync_hash
        self.behavior = behavior
        self.multi = sync_secret is not None
        self.challenges = (
            {k: p.challenge(timelocks.enforce_deadline, sync_hash) for k, p in self.paths.items()}
            if self.multi
            else {}
        )
        self.by_challenge = {ch.challenge_id: k for k, ch in self.challenges.items()}
        self.by_first_channel = {p.channels[0]: k for k, p in self.paths.items()}
        self.txs: dict[int, ConditionedPayment] = {}
        self.receipts: dict[int, dict] = {k: {} for k in self.paths}
        self.settled: dict[int, tuple[bytes, ...] | None] = {k: None for k in self.paths}
        self.enforced_round: dict[int, int] = {}
        self.enforce_opened: dict[int, int] = {}
        self.logs: dict[int, dict[int, bytes]] = {k: {} for k in self.paths}
        self.punish_sent: set[int] = set()
        self.locked_at: int | None = None
        self.released_at: int | None = None
        self.aborted = False

    # -- phases

    def start(self, now: int, incoming: PaymentCondition | None = None, own_hash=None) -> list:
        """Lock the first hop of every path; in plain mode derive it from `incoming`."""
        if not self.behavior.acts_in("lock"):
            return []
        acts = []
        for k, path in self.paths.items():
            if self.multi:
                tx = build_outgoing_lock(
                    self.channels, path, 0, self.key,
                    sync_hash=self.sync_hash, deadline=self.timelocks.hop(k, 1),
                )
            else:
                tx = build_outgoing_lock(self.channels, path, 0, self.key, incoming=incoming, own_hash=own_hash)
            self.txs[k] = tx
            acts.append(Send(path.relayers[0], "lock", tx))
        if self.behavior.kind == "wormhole-collude" and self.multi:
            acts.append(Send(self.behavior.partner, "collude", (self.sync_secret,)))
        self.locked_at = now
        return acts

    def step(self, now: int, inbox: Iterable[Message], events: Iterable) -> list:
        for msg in inbox:
            if msg.kind == "ack" and self.multi:
                self._on_ack(msg)
        for ev in events:
            if isinstance(ev, ChannelEvent) and ev.kind == "updated" and ev.cid in self.by_first_channel:
                self.settled[self.by_first_channel[ev.cid]] = ev.secrets
            elif isinstance(ev, JudgeEvent) and ev.challenge in self.by_challenge:
                k = self.by_challenge[ev.challenge]
                if ev.kind == "enforced":
                    self.enforce_opened[k] = ev.round
                elif ev.kind == "logged":
                    self.logs[k] = dict(ev.secrets)
        if self.locked_at is None or self.aborted or not self.multi:
            return []
        if self.released_at is None:
            return self._maybe_release(now)
        return self._watch_paths(now)

    def _on_ack(self, msg: Message) -> None:
        for k, path in self.paths.items():
            if msg.sender in path.relayers:
                if receipt_valid(msg.payload, self.challenges[k], self.roster[msg.sender]):
                    self.receipts[k][msg.sender] = msg.payload.sig
                else:
                    self.aborted = True
                return

    def _maybe_release(self, now: int) -> list:
        complete = all(len(self.receipts[k]) == p.length for k, p in self.paths.items())
        if complete and self.behavior.acts_in("release"):
            self.released_at = now
            return [Send(p.relayers[-1], "release", self.sync_secret) for p in self.paths.values()]
        if now >= self.timelocks.receipt_deadline:
            self.aborted = True
        return []

    def _watch_paths(self, now: int) -> list:
        acts = []
        if not self.behavior.acts_in("enforce"):
            return acts
        for k, path in self.paths.items():
            if self.settled[k] is None and k not in self.enforced_round:
                if now >= self.released_at + path.length + 1:
                    self.enforced_round[k] = now
                    acts.append(Enforce(self.challenges[k], dict(self.receipts[k]), self.sync_secret))
            opened = self.enforce_opened.get(k)
            if opened is not None and k not in self.punish_sent and now == opened + path.length + 1:
                if 1 not in self.logs[k]:
                    self.punish_sent.add(k)
                    acts.append(Punish(self.challenges[k].challenge_id))
        return acts

    # -- results

    def path_secrets(self, k: int) -> list[bytes] | None:
        path = self.paths[k]
        if self.settled[k] is not None:
            return [s for s in self.settled[k] if s != self.sync_secret]
        logs = self.logs[k]
        if all(i in logs for i in range(1, path.length + 1)):
            return [logs[i] for i in range(1, path.length + 1)]
        return None

    def relayer_secrets(self) -> list[bytes] | None:
        out = []
        for k in self.paths:
            got = self.path_secrets(k)
            if got is None:
                return None
            out.extend(got)
        return out

    def all_settled(self) -> bool:
        return all(v is not None for v in self.settled.values())

    @property
    def fallback_round(self) -> int | None:
        """Last round at which on-chain logs can still complete every path."""
        if self.released_at is None:
            return None
        return self.released_at + 2 * max((p.length for p in self.paths.values()), default=0) + 3


class PayeeEngine:
    """One relayer's side of one path."""

    def __init__(
        self,
        name: str,
        key: KeyPair,
        channels: ChannelNetwork,
        roster: dict[str, PublicKey],
        path: PathSpec,
        hop: int,
        secret: bytes,
        own_hash: CommitmentValue,
        lock_by: int,
        sync_hash: CommitmentValue | None = None,
        deadline: int | None = None,
        challenge=None,
        behavior: Behavior = HONEST,
    ):
        self.name = name
        self.key = key
        self.channels = channels
        self.roster = roster
        self.path = path
        self.hop = hop
        self.secret = secret
        self.own_hash = own_hash
        self.lock_by = lock_by
        self.sync_hash = sync_hash
        self.deadline = deadline
        self.challenge = challenge
        self.behavior = behavior
        self.multi = challenge is not None
        self.in_cid = path.channels[hop - 1]
        self.out_cid = path.channels[hop] if hop < path.length else None
        self.reveal = _BOGUS if behavior.kind == "wrong-secret" else secret
        self.incoming: ConditionedPayment | None = None
        self.outgoing: ConditionedPayment | None = None
        self.pool: set[bytes] = set()
        self.partner_pool: set[bytes] = set()
        self.leaked: frozenset = frozenset()
        self.unlock_sent = False
        self.guessed_with: frozenset = frozenset()
        self.settled = False
        self.enforced_at: int | None = None
        self.logged = False
        self.aborted = False
        partner = behavior.partner if behavior.kind == "wormhole-collude" else None
        self.partner_downstream = partner in path.relayers[hop:] if partner else False
        self.partner_upstream = partner is not None and not self.partner_downstream

    @property
    def last(self) -> bool:
        return self.hop == self.path.length

    def finished(self, now: int) -> bool:
        if self.aborted:
            return True
        if self.incoming is None:
            return now >= self.lock_by
        return now > self.incoming.cond.deadline

    def step(self, now: int, inbox: Iterable[Message], events: Iterable) -> list:
        acts: list = []
        if self.aborted:
            return acts
        log_due = False
        for msg in inbox:
            if msg.kind == "lock" and msg.sender == self.path.node(self.hop - 1) and self.incoming is None:
                acts += self._on_lock(now, msg.payload)
            elif msg.kind == "release" and self.last and msg.sender == self.path.provider:
                if opens_safely(msg.payload, self.sync_hash):
                    self.pool.add(msg.payload)
            elif msg.kind == "collude" and msg.sender == self.behavior.partner:
                self.partner_pool.update(msg.payload)
        for ev in events:
            if isinstance(ev, ChannelEvent) and ev.kind == "updated":
                if ev.cid == self.out_cid:
                    self.pool.update(ev.secrets)
                elif ev.cid == self.in_cid:
                    self.settled = True
            elif isinstance(ev, JudgeEvent) and self.multi and ev.challenge == self.challenge.challenge_id:
                if ev.kind == "enforced":
                    self.enforced_at = ev.round
                    self.pool.update(s for _, s in ev.secrets)
                    log_due |= self.last
                elif ev.kind == "logged":
                    self.pool.update(s for _, s in ev.secrets)
                    log_due |= ev.index == self.hop + 1
        if self.incoming is None:
            if now >= self.lock_by:
                self.aborted = True
            return acts
        if now > self.incoming.cond.deadline:
            return acts
        if self.behavior.kind == "wormhole-collude":
            acts += self._collude()
        if log_due and not self.logged and self.behavior.acts_in("enforce"):
            self.logged = True
            acts.append(LogSecret(self.challenge.challenge_id, self.hop, self.reveal))
            acts += self._unlock(forced=True)
        acts += self._unlock()
        return acts

    def _on_lock(self, now: int, tx) -> list:
        if not self.behavior.acts_in("lock"):
            return []
        n = self.path.length
        if self.multi:
            ok = verify_incoming_lock(
                self.channels, self.roster, self.path, self.hop, tx,
                hashes=(self.sync_hash, *self.path.hashes_from(self.hop)), deadline=self.deadline,
            )
        else:
            ok = verify_incoming_lock(
                self.channels, self.roster, self.path, self.hop, tx,
                must_include=self.own_hash, hash_count=n - self.hop + 1,
                earliest=now + 2 * (n - self.hop) + 1,
            )
        if not ok:
            self.aborted = True
            return []
        self.incoming = tx
        acts = []
        if self.multi and self.behavior.kind != "stall-receipt":
            acts.append(Send(self.path.provider, "ack", ack_receipt(self.name, self.key, self.challenge)))
        out = build_outgoing_lock(self.channels, self.path, self.hop, self.key, incoming=tx.cond, own_hash=self.own_hash)
        if out is not None:
            self.outgoing = out
            acts.append(Send(self.path.node(self.hop + 1), "lock", out))
        return acts

    def _cascade_allowed(self) -> bool:
        if self.behavior.kind == "withhold-unlock" or self.partner_upstream:
            return False
        return self.behavior.acts_in("unlock")

    def _unlock(self, forced: bool = False) -> list:
        if self.unlock_sent or self.settled:
            return []
        if not forced and not self._cascade_allowed():
            return []
        ordered = _assemble(self.incoming.cond, self.pool | self.partner_pool, self.secret, self.reveal)
        if ordered is None:
            return []
        self.unlock_sent = True
        return [SubmitUpdate(unlock(self.incoming, self.name, self.key, ordered))]

    def _collude(self) -> list:
        acts = []
        known = frozenset(self.pool | {self.secret})
        if known != self.leaked:
            self.leaked = known
            acts.append(Send(self.behavior.partner, "collude", tuple(sorted(known))))
        # the upstream colluder tries to redeem around the honest middle,
        # guessing whatever its partner could not supply
        fresh = frozenset(self.partner_pool) != self.guessed_with
        if self.partner_downstream and self.partner_pool and fresh and not self.unlock_sent and not self.settled:
            self.guessed_with = frozenset(self.partner_pool)
            pool = self.pool | self.partner_pool | {self.secret}
            guess = [next((s for s in pool if opens_safely(s, h)), _BOGUS) for h in self.incoming.cond.hashes]
            self.unlock_sent = guess == order_secrets(self.incoming.cond, pool)
            acts.append(SubmitUpdate(unlock(self.incoming, self.name, self.key, guess)))
        return acts
