"""What parties receive and what they ask the world to do.

Parties never touch the bus, channels or judge directly: each round they
get their inbox and the public events of the previous round, and return a
list of actions. The scheduler executes actions in a fixed order: sends,
then channel updates, then judge calls.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crypto import PublicKey, Signature
from .judge import EnforcementChallenge
from .pcn import UpdateRequest


@dataclass(frozen=True)
class Message:
    round: int
    sender: str
    recipient: str
    seq: int
    kind: str
    payload: object


@dataclass(frozen=True)
class Send:
    to: str
    kind: str
    payload: object = None


@dataclass(frozen=True)
class SubmitUpdate:
    request: UpdateRequest


@dataclass(frozen=True)
class Enforce:
    challenge: EnforcementChallenge
    receipts: dict[str, Signature]
    sync_secret: bytes


@dataclass(frozen=True)
class LogSecret:
    challenge_id: str
    hop: int
    secret: bytes


@dataclass(frozen=True)
class Punish:
    challenge_id: str


@dataclass(frozen=True)
class ReportMisbehavior:
    kind: str  # pomm | pome
    proof: object
    tid: PublicKey


Action = Send | SubmitUpdate | Enforce | LogSecret | Punish | ReportMisbehavior
