"""Stand-alone enforceable payment along one path, run on the real substrate.

The payer locks in round 1 and every deadline is laid out as in the
multi-path schedule with delivery finished at round 0. The result has the
same shape as the reference timetable so the two can be compared directly.
"""

from __future__ import annotations

import random
from typing import Sequence

from ..behavior import HONEST, Behavior
from ..crypto import ae_keygen, commit, random_bytes
from ..judge import JudgeContract
from ..pcn import ChannelNetwork, Ledger
from ..payment import ExchangeTrace, PathSpec, PayeeEngine, PayerEngine, payment_schedule
from .world import World

CHANNEL_FUNDS = 10_000


class _Payer:
    def __init__(self, engine: PayerEngine, horizon: int):
        self.engine = engine
        self.name = engine.name
        self.horizon = horizon

    def step(self, now, inbox, events):
        if now == 1:
            return self.engine.start(now)
        return self.engine.step(now, inbox, events)

    def finished(self, now):
        return self.engine.aborted or now >= self.horizon


def run_exchange(
    fees: Sequence[int],
    payees: Sequence[Behavior],
    payer: Behavior = HONEST,
    penalty: int = 100,
    seed: int = 0,
) -> tuple[ExchangeTrace, World]:
    n = len(fees)
    rng = random.Random(seed)
    names = [f"U{i}" for i in range(n + 1)]
    keys = {u: ae_keygen(rng) for u in names}
    roster = {u: k.public for u, k in keys.items()}
    secrets = [random_bytes(rng, 48) for _ in range(n)]
    hashes = [commit(s, rng) for s in secrets]
    sync = random_bytes(rng, 48)
    sync_hash = commit(sync, rng)

    cids = tuple(f"{names[i]}-{names[i + 1]}" for i in range(n))
    channels = ChannelNetwork(roster)
    for i, cid in enumerate(cids):
        channels.open(cid, names[i], names[i + 1], CHANNEL_FUNDS, CHANNEL_FUNDS)
    ledger = Ledger({u: 2 * penalty for u in names})
    judge = JudgeContract(ledger, roster, b_max=penalty)

    path = PathSpec(1, names[0], tuple(names[1:]), cids, tuple(fees), tuple(hashes))
    schedule = payment_schedule([n], 0)
    challenge = path.challenge(schedule.enforce_deadline, sync_hash)
    horizon = schedule.hop(1, 1) + 2
    parties = [
        _Payer(
            PayerEngine(names[0], keys[names[0]], channels, roster, [path], schedule, sync, sync_hash, payer),
            horizon,
        )
    ]
    for i in range(1, n + 1):
        parties.append(
            PayeeEngine(
                names[i], keys[names[i]], channels, roster, path, i, secrets[i - 1], hashes[i - 1],
                lock_by=i + 1, sync_hash=sync_hash, deadline=schedule.hop(1, i),
                challenge=challenge, behavior=payees[i - 1],
            )
        )
    world = World(parties, channels, ledger, judge)
    before = {u: channels.holdings(u) + ledger.balances[u] for u in names}
    world.run(horizon)
    return _observe(world, names, cids, before), world


def _observe(world: World, names: list[str], cids: tuple[str, ...], before: dict[str, int]) -> ExchangeTrace:
    index = {u: i for i, u in enumerate(names)}
    hop_of = {cid: i + 1 for i, cid in enumerate(cids)}
    events = []
    for m in world.bus.log:
        if m.kind == "lock":
            events.append((m.round, "locked", index[m.recipient]))
        elif m.kind == "ack":
            events.append((m.round, "ack", index[m.sender]))
        elif m.kind == "release":
            events.append((m.round, "released", 0))
    for ev in world.channels.events:
        if ev.kind == "updated":
            events.append((ev.round, "settled", hop_of[ev.cid]))
    for ev in world.judge.events:
        if ev.kind in ("logged", "punished"):
            events.append((ev.round, ev.kind, ev.index))
        elif ev.kind == "enforced":
            events.append((ev.round, "enforced", 0))
    after = {u: world.channels.holdings(u) + world.ledger.balances[u] for u in names}
    return ExchangeTrace(tuple(sorted(events)), tuple(after[u] - before[u] for u in names))
