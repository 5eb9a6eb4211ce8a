"""Outcome classification and the fairness and confidentiality predicates.

Each predicate is only asserted for the parties it protects: provider
fairness when the provider is honest, customer fairness when the customer
is, relayer fairness per honest relayer, and confidentiality when both
endpoints are honest.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

from ..codec import encode
from ..commitments import decrypt_chunk
from ..crypto import opens_safely
from ..parties import CUSTOMER_CHANNEL

if TYPE_CHECKING:
    from .engine import Metrics, Simulation


def classify(sim: "Simulation") -> str:
    ops = {r.op for r in sim.judge.records if r.round >= 1}
    if ops & {"pomm", "pome"}:
        return "disputed"
    if "enforce" in ops:
        return "enforced"
    if sim.customer.content is not None and sim.customer.content == sim.content:
        return "delivered"
    if sim.customer.payment is None:
        return "aborted-before-payment"
    return "expired"


def _settled(sim: "Simulation", cid: str) -> bool:
    return any(e.kind == "updated" and e.cid == cid for e in sim.channels.events)


def _channel_delta(sim: "Simulation", cid: str, party: str) -> int:
    ch = sim.channels.get(cid)
    lb, rb = sim.start_channels[cid]
    return ch.lb - lb if party == ch.left else ch.rb - rb


def _leaks(payload, needles: list[bytes]) -> bool:
    raw = encode(payload)
    return any(n in raw for n in needles)


def provider_fair(sim: "Simulation") -> bool:
    p = sim.provider
    plain = set(sim.chunks)
    for m in sim.world.bus.log:
        if m.recipient == p.name:
            continue
        if m.kind == "chunk" and m.payload.ciphertext in plain:
            return False
        if m.kind != "chunk" and _leaks(m.payload, [p.secret, p.sk.to_bytes(), p.mask.ck]):
            return False
    paid_for = _settled(sim, CUSTOMER_CHANNEL)
    if sim.customer.content is not None and not paid_for:
        return False
    fees_paid = -sum(_channel_delta(sim, path.channels[0], p.name) for path in sim.session.graph.paths if path.length)
    compensation = sim.ledger.balances[p.name] - sim.start_ledger[p.name]
    return fees_paid <= 0 or paid_for or compensation >= fees_paid


def customer_fair(sim: "Simulation", deltas: dict[str, int]) -> bool:
    c = sim.customer
    return c.content == sim.content or deltas[c.name] >= 0


def relayer_protected(sim: "Simulation", relayer: str, deltas: dict[str, int]) -> bool:
    """Never net negative, and either paid its fee or nothing upstream of it settled."""
    path, hop = sim.session.graph.locate(relayer)
    fee = path.fees[hop - 1]
    if deltas[relayer] < 0:
        return False
    if _settled(sim, CUSTOMER_CHANNEL) and deltas[relayer] < fee:
        return False
    upstream = [path.channels[i] for i in range(hop)]
    return deltas[relayer] >= fee or not any(_settled(sim, cid) for cid in upstream)


def confidential(sim: "Simulation") -> bool:
    p = sim.provider
    plain = set(sim.chunks)
    relayers = sim.relayers
    for m in sim.world.bus.log:
        if m.recipient not in relayers:
            continue
        if m.kind == "chunk" and m.payload.ciphertext in plain:
            return False
        if m.kind != "chunk" and _leaks(m.payload, [p.sk.to_bytes(), p.mask.ck]):
            return False
    if any(seen in plain for r in relayers.values() for seen in r.seen_plain):
        return False
    graph = sim.session.graph
    for k, path in enumerate(graph.paths, 1):
        keys = [relayers[r].sk for r in path.relayers]
        for item in sim.customer.delivered[k].values():
            c = item.ciphertext
            for layer in range(len(keys), 0, -1):
                c = decrypt_chunk(c, keys[layer - 1], item.chunk_id)
            if opens_safely(c, item.chain[0].h_m):
                return False
    return True


def evaluate(sim: "Simulation", metrics: "Metrics") -> dict[str, bool]:
    sched = sim.schedule
    deltas = metrics.deltas
    out: dict[str, bool] = {}
    if sched.honest(sim.provider.name):
        out["provider-fair"] = provider_fair(sim)
    if sched.honest(sim.customer.name):
        out["customer-fair"] = customer_fair(sim, deltas)
    honest_relayers = [r for r in sim.relayers if sched.honest(r)]
    for r in honest_relayers:
        out[f"protected:{r}"] = relayer_protected(sim, r, deltas)
    if honest_relayers:
        out["relayer-fair"] = all(out[f"protected:{r}"] for r in honest_relayers)
    if sched.honest(sim.provider.name) and sched.honest(sim.customer.name):
        out["confidential"] = confidential(sim)
    out["conservation"] = sim.channels.total() + sim.ledger.total() == sim.start_total
    out["terminated"] = all(p.finished(metrics.rounds) for p in sim.world.parties)

    expect = sim.config.expect
    if expect.outcome is not None:
        out["expect:outcome"] = metrics.outcome == expect.outcome
    if expect.judge_ops is not None:
        out["expect:judge-ops"] = metrics.judge_op_counts() == dict(sorted(expect.judge_ops.items()))
    for r in expect.protected:
        out[f"expect:protected:{r}"] = out.get(f"protected:{r}", False)
    return out
