"""The shared substrate: bus, channels, ledger and judge, driven round by round.

Parties are objects with `step(now, inbox, events) -> actions` and
`finished(now) -> bool`. Within a round every party steps in roster order,
then the collected actions execute in three passes: all sends, all channel
updates, all judge calls. Substrate events of round r are public from r+1.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
import json
from typing import Iterable, Protocol

from ..codec import digest_of
from ..judge import JudgeContract
from ..messages import Enforce, LogSecret, Punish, ReportMisbehavior, Send, SubmitUpdate
from ..pcn import ChannelNetwork, Ledger
from .bus import MessageBus, RoundClock
from .wire import split_size


class Party(Protocol):
    name: str

    def step(self, now: int, inbox: list, events: list) -> list: ...

    def finished(self, now: int) -> bool: ...


@dataclass(frozen=True)
class TraceRecord:
    round: int
    actor: str
    kind: str
    digest: str
    size: int
    detail: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))


class World:
    def __init__(self, parties: Iterable[Party], channels: ChannelNetwork, ledger: Ledger, judge: JudgeContract):
        self.parties = list(parties)
        self.order = {p.name: i for i, p in enumerate(self.parties)}
        self.clock = RoundClock()
        self.bus = MessageBus(self.order)
        self.channels = channels
        self.ledger = ledger
        self.judge = judge
        self.trace: list[TraceRecord] = []

    def _record(self, now, actor, kind, payload, size=0, detail="") -> None:
        self.trace.append(TraceRecord(now, actor, kind, digest_of(payload)[:16], size, detail))

    def public_events(self, now: int) -> list:
        chan = [e for e in self.channels.events if e.round == now - 1]
        judge = [e for e in self.judge.events if e.round == now - 1]
        return chan + judge

    def step(self) -> int:
        now = self.clock.tick()
        inboxes = self.bus.deliver(now)
        events = self.public_events(now)
        queued = []
        for party in self.parties:
            queued.append((party.name, party.step(now, inboxes.get(party.name, []), events)))
        for name, actions in queued:
            for act in actions:
                if isinstance(act, Send):
                    self.bus.send(now, name, act)
                    size = sum(split_size(act.kind, act.payload))
                    self._record(now, name, f"send:{act.kind}", act.payload, size, act.to)
        for name, actions in queued:
            for act in actions:
                if isinstance(act, SubmitUpdate):
                    ev = self.channels.update(act.request, now)
                    self._record(now, name, ev.kind, act.request.tx.statement(), detail=ev.cid)
        for name, actions in queued:
            for act in actions:
                self._judge_call(now, name, act)
        return now

    def _judge_call(self, now, name, act) -> None:
        j = self.judge
        if isinstance(act, Enforce):
            ok = j.enforce(name, act.challenge, act.receipts, act.sync_secret, now)
            detail = act.challenge.challenge_id
        elif isinstance(act, LogSecret):
            ok = j.log_response(name, act.challenge_id, act.hop, act.secret, now)
            detail = f"{act.challenge_id}:{act.hop}"
        elif isinstance(act, Punish):
            ok = j.punish(name, act.challenge_id, now)
            detail = act.challenge_id
        elif isinstance(act, ReportMisbehavior):
            handler = j.handle_pomm if act.kind == "pomm" else j.handle_pome
            ok = handler(name, act.proof, act.tid, now)
            detail = act.kind
        else:
            return
        self._record(now, name, f"judge:{j.records[-1].op}", act, detail=f"{detail}:{j.records[-1].outcome}")

    def run(self, horizon: int) -> int:
        """Step until every party is finished or `horizon` rounds have passed."""
        while self.clock.now < horizon:
            now = self.step()
            if all(p.finished(now) for p in self.parties):
                break
        return self.clock.now
