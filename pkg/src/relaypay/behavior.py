"""Static adversary behaviors.

A behavior is fixed per party before the run starts. Text form, as used in
scenario files:

    honest
    silent-at(<phase>)          stop acting from that phase on
    wrong-secret                reveal a bogus secret when unlocking or logging
    garbage-encrypt[(<chunk>)]  emit random bytes instead of a real encryption
    withhold-unlock             skip the off-chain unlock, still answer the judge
    wormhole-collude(<party>)   leak every known secret to <party>, unlock only
                                with whatever the pair can assemble
    wrong-mask                  publish a masked key that does not unmask
    stall-receipt               accept and forward the lock, never acknowledge
    false-accuse                customer files forged proofs of misbehavior
"""

from __future__ import annotations

from dataclasses import dataclass
import re

PHASES = ("setup", "delivery", "pay", "lock", "release", "unlock", "enforce", "decrypt")

KINDS = (
    "honest",
    "silent",
    "wrong-secret",
    "garbage-encrypt",
    "withhold-unlock",
    "wormhole-collude",
    "wrong-mask",
    "stall-receipt",
    "false-accuse",
)

_FORM = re.compile(r"^(?P<kind>[a-z-]+?)(?:-at)?(?:\((?P<arg>[^)]*)\))?$")


@dataclass(frozen=True)
class Behavior:
    kind: str = "honest"
    phase: str | None = None
    chunk: int | None = None
    partner: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown behavior {self.kind!r}")
        if self.kind == "silent" and self.phase not in PHASES:
            raise ValueError(f"silent needs a phase from {PHASES}")
        if self.kind == "wormhole-collude" and not self.partner:
            raise ValueError("wormhole-collude needs a partner")

    @property
    def honest(self) -> bool:
        return self.kind == "honest"

    def silent_from(self, phase: str) -> bool:
        return self.kind == "silent" and PHASES.index(phase) >= PHASES.index(self.phase)

    def acts_in(self, phase: str) -> bool:
        return not self.silent_from(phase)

    def corrupts_chunk(self, chunk_id: int) -> bool:
        return self.kind == "garbage-encrypt" and (self.chunk is None or self.chunk == chunk_id)

    def __str__(self) -> str:
        if self.kind == "silent":
            return f"silent-at({self.phase})"
        if self.kind == "garbage-encrypt" and self.chunk is not None:
            return f"garbage-encrypt({self.chunk})"
        if self.kind == "wormhole-collude":
            return f"wormhole-collude({self.partner})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "Behavior":
        text = text.strip()
        m = _FORM.match(text)
        if not m:
            raise ValueError(f"cannot parse behavior {text!r}")
        kind, arg = m.group("kind"), m.group("arg")
        if text.startswith("silent-at"):
            return cls("silent", phase=arg)
        if kind == "garbage-encrypt":
            return cls(kind, chunk=int(arg) if arg else None)
        if kind == "wormhole-collude":
            return cls(kind, partner=arg)
        if arg:
            raise ValueError(f"{kind} takes no argument")
        return cls(kind)


HONEST = Behavior()
