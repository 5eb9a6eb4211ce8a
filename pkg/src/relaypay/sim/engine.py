"""Build a session from a scenario, run it to completion, and measure it."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
import json
import random

from ..config import CUSTOMER, PROVIDER, ScenarioConfig
from ..crypto import ae_keygen, random_bytes
from ..judge import JudgeContract
from ..parties import (
    CUSTOMER_CHANNEL,
    Customer,
    DeliveryGraph,
    Provider,
    Relayer,
    Session,
    content_root,
    leaf_commitments,
)
from ..payment import PathSpec
from ..pcn import ChannelNetwork, Ledger
from .adversary import AdversarySchedule
from .world import TraceRecord, World


@dataclass
class Metrics:
    judge_ops: dict[str, dict[str, int]]  # party -> op -> count, session rounds only
    links: dict[str, dict[str, int]]  # "A->B" -> messages / content_bytes / overhead_bytes
    deltas: dict[str, int]  # channel holdings plus on-chain balance, per party
    rounds: int
    outcome: str

    @property
    def judge_op_total(self) -> int:
        return sum(sum(ops.values()) for ops in self.judge_ops.values())

    def judge_op_counts(self) -> dict[str, int]:
        total: Counter = Counter()
        for ops in self.judge_ops.values():
            total.update(ops)
        return dict(sorted(total.items()))

    def to_dict(self) -> dict:
        return {
            "judge_ops": self.judge_ops,
            "judge_op_total": self.judge_op_total,
            "links": self.links,
            "deltas": self.deltas,
            "rounds": self.rounds,
            "outcome": self.outcome,
        }


@dataclass
class RunResult:
    config: ScenarioConfig
    seed: int
    trace: list[TraceRecord]
    metrics: Metrics
    verdicts: dict[str, bool]
    simulation: "Simulation" = field(repr=False)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def trace_lines(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.trace)

    def metrics_json(self) -> str:
        data = self.metrics.to_dict() | {"verdicts": self.verdicts, "seed": self.seed, "scenario": self.config.name}
        return json.dumps(data, indent=2, sort_keys=True) + "\n"


class Simulation:
    def __init__(self, config: ScenarioConfig, seed: int | None = None):
        self.config = config
        self.seed = config.seed if seed is None else seed
        self.schedule = AdversarySchedule(config.behaviors())
        self._build()

    def _rng(self, label: str) -> random.Random:
        return random.Random(f"{self.seed}:{label}")

    def _build(self) -> None:
        cfg = self.config
        b_max = cfg.judge.b_max
        names = cfg.relayer_names()
        everyone = [PROVIDER, *(r for p in names for r in p), CUSTOMER]
        self.keys = {u: ae_keygen(self._rng(f"key:{u}")) for u in everyone}
        roster = {u: k.public for u, k in self.keys.items()}

        size, count = cfg.content.chunk_size, cfg.content.chunk_count
        self.content = random_bytes(self._rng("content"), cfg.content.total)
        padded = self.content.ljust(size * count, b"\x00")
        self.chunks = [padded[i * size : (i + 1) * size] for i in range(count)]
        provider_rng = self._rng(f"party:{PROVIDER}")
        leaves = leaf_commitments(self.chunks, provider_rng)

        funds = cfg.funding.channel if cfg.funding.channel is not None else 2 * b_max
        deposit = cfg.funding.deposit if cfg.funding.deposit is not None else 2 * b_max
        self.channels = ChannelNetwork(roster)
        self.channels.open(CUSTOMER_CHANNEL, CUSTOMER, PROVIDER, funds, 0)
        paths = []
        for k, (pc, relayers) in enumerate(zip(cfg.paths, names), 1):
            hops = [PROVIDER, *relayers]
            cids = tuple(f"{hops[i]}-{hops[i + 1]}" for i in range(len(relayers)))
            for i, cid in enumerate(cids):
                self.channels.open(cid, hops[i], hops[i + 1], funds, 0)
            paths.append(PathSpec(k, PROVIDER, tuple(relayers), cids, tuple(pc.fees)))
        self.ledger = Ledger({u: deposit for u in everyone})
        self.judge = JudgeContract(
            self.ledger, roster, b_max, slashing=cfg.judge.slashing, slash_fraction=cfg.judge.slash_fraction
        )
        graph = DeliveryGraph(
            PROVIDER, CUSTOMER, tuple(paths), tuple(tuple(j) for j in cfg.jobs()), cfg.price,
            size, count, len(self.content), content_root(leaves),
        )
        self.judge.register(PROVIDER, graph.com_m, cfg.price, now=0)
        self.session = Session(graph, roster, b_max, cfg.mode == "multi", cfg.timing.delivery_deadline)

        of = self.schedule.of
        self.provider = Provider(
            self.session, self.keys[PROVIDER], provider_rng, self.chunks, leaves, self.channels, of(PROVIDER)
        )
        self.relayers = {
            r: Relayer(r, self.session, self.keys[r], self._rng(f"party:{r}"), self.channels, of(r))
            for r in graph.relayers
        }
        self.customer = Customer(
            self.session, self.keys[CUSTOMER], self._rng(f"party:{CUSTOMER}"), self.channels, of(CUSTOMER)
        )
        parties = [self.provider, *self.relayers.values(), self.customer]
        self.world = World(parties, self.channels, self.ledger, self.judge)
        self.everyone = everyone
        self.start_holdings = self._holdings()
        self.start_channels = {cid: (ch.lb, ch.rb) for cid, ch in self.channels.channels.items()}
        self.start_total = self.channels.total() + self.ledger.total()
        self.start_ledger = dict(self.ledger.balances)

    def _holdings(self) -> dict[str, int]:
        return {u: self.channels.holdings(u) + self.ledger.balances.get(u, 0) for u in self.everyone}

    @property
    def horizon(self) -> int:
        return self.session.customer_deadline + self.session.graph.longest + 2

    def run(self) -> RunResult:
        from .verdicts import evaluate, classify

        rounds = self.world.run(self.horizon)
        after = self._holdings()
        deltas = {u: after[u] - self.start_holdings[u] for u in self.everyone}
        judge_ops: dict[str, dict[str, int]] = {}
        for rec in self.judge.records:
            if rec.round >= 1:
                judge_ops.setdefault(rec.caller, {})
                judge_ops[rec.caller][rec.op] = judge_ops[rec.caller].get(rec.op, 0) + 1
        links = {
            f"{a}->{b}": {"messages": s.messages, "content_bytes": s.content_bytes, "overhead_bytes": s.overhead_bytes}
            for (a, b), s in sorted(self.world.bus.links.items())
        }
        metrics = Metrics(judge_ops, links, deltas, rounds, classify(self))
        verdicts = evaluate(self, metrics)
        return RunResult(self.config, self.seed, list(self.world.trace), metrics, verdicts, self)


def run(config: ScenarioConfig, seed: int | None = None) -> RunResult:
    return Simulation(config, seed).run()
