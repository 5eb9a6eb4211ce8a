"""Synchronous round clock and authenticated message bus."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from ..messages import Message, Send
from .wire import split_size


@dataclass
class RoundClock:
    now: int = 0

    def tick(self) -> int:
        self.now += 1
        return self.now


@dataclass
class LinkStats:
    messages: int = 0
    content_bytes: int = 0
    overhead_bytes: int = 0


@dataclass
class MessageBus:
    """Messages sent in round r reach their recipient at the start of round r+1.

    The sender field is stamped by the bus, so a party cannot forge another
    party's identity. Inboxes are ordered by (sender index, sequence).
    """

    order: dict[str, int]
    pending: list[Message] = field(default_factory=list)
    log: list[Message] = field(default_factory=list)
    links: dict[tuple[str, str], LinkStats] = field(default_factory=lambda: defaultdict(LinkStats))
    _seq: int = 0

    def send(self, now: int, sender: str, action: Send) -> Message:
        if action.to not in self.order:
            raise KeyError(f"unknown recipient {action.to!r}")
        self._seq += 1
        msg = Message(now, sender, action.to, self._seq, action.kind, action.payload)
        self.pending.append(msg)
        self.log.append(msg)
        stats = self.links[(sender, action.to)]
        content, overhead = split_size(action.kind, action.payload)
        stats.messages += 1
        stats.content_bytes += content
        stats.overhead_bytes += overhead
        return msg

    def deliver(self, now: int) -> dict[str, list[Message]]:
        due = [m for m in self.pending if m.round < now]
        self.pending = [m for m in self.pending if m.round >= now]
        inboxes: dict[str, list[Message]] = defaultdict(list)
        for m in sorted(due, key=lambda m: (self.order[m.sender], m.seq)):
            inboxes[m.recipient].append(m)
        return inboxes
