"""Simulated judge contract: registration, misbehavior compensation and the
round-gated enforcement log.

Every call is recorded as a JudgeRecord {round, op, caller, outcome}; those
records are the on-chain operation count. Broadcasts (enforced, logged,
punished, compensated) are queued as JudgeEvents for all parties to see in
the following round.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import hashlib

from .codec import encode
from .commitments import TRANSPARENT, EncryptionClaimBackend, PoMEProof, PoMMProof, pome_ver, pomm_ver
from .crypto import CommitmentValue, PublicKey, Signature, ae_verify, opens_safely
from .pcn import Ledger

BURN_ACCOUNT = "burn"


@dataclass(frozen=True)
class JudgeRecord:
    round: int
    op: str
    caller: str
    outcome: str


@dataclass(frozen=True)
class JudgeEvent:
    kind: str  # enforced | logged | punished | compensated
    round: int
    challenge: str = ""
    index: int = 0
    secrets: tuple[tuple[int, bytes], ...] = ()
    party: str = ""


@dataclass(frozen=True)
class EnforcementChallenge:
    deadline: int
    hashes: tuple[CommitmentValue, ...]
    sync_hash: CommitmentValue
    addr: tuple[str, ...]  # provider first, then relayers in hop order

    def statement(self) -> bytes:
        return encode(("challenge", self.deadline, self.hashes, self.sync_hash, self.addr))

    @property
    def challenge_id(self) -> str:
        return hashlib.sha256(self.statement()).hexdigest()[:16]

    @property
    def hops(self) -> int:
        return len(self.hashes)


@dataclass
class SecretLog:
    challenge: EnforcementChallenge
    opened: int
    entries: dict[int, bytes] = field(default_factory=dict)
    closed: bool = False

    def window(self, hop: int) -> int:
        return self.opened + self.challenge.hops - hop + 1

    @property
    def punish_round(self) -> int:
        return self.opened + self.challenge.hops + 1


class JudgeContract:
    def __init__(
        self,
        ledger: Ledger,
        roster: dict[str, PublicKey],
        b_max: int,
        deposit_min: int | None = None,
        slashing: bool = False,
        slash_fraction: float = 0.5,
        backend: EncryptionClaimBackend = TRANSPARENT,
    ):
        self.ledger = ledger
        self.roster = dict(roster)
        self.owner_of = {pk: uid for uid, pk in roster.items()}
        self.b_max = b_max
        self.deposit_min = b_max if deposit_min is None else deposit_min
        self.slashing = slashing
        self.slash_fraction = slash_fraction
        self.backend = backend
        self.registrations: dict[bytes, tuple[str, int]] = {}
        self.logs: dict[str, SecretLog] = {}
        self.seen_proofs: set[bytes] = set()
        self.records: list[JudgeRecord] = []
        self.events: list[JudgeEvent] = []

    def _record(self, now: int, op: str, caller: str, outcome: str) -> None:
        self.records.append(JudgeRecord(now, op, caller, outcome))

    # registration

    def register(self, uid: str, com_m: bytes, price: int, now: int = 0) -> bool:
        ok = self.ledger.balances.get(uid, 0) >= self.deposit_min and price < self.b_max
        if ok:
            self.registrations[com_m] = (uid, price)
        self._record(now, "register", uid, "ok" if ok else "rejected")
        return ok

    def registered(self, com_m: bytes) -> tuple[str, int] | None:
        return self.registrations.get(com_m)

    # proofs of misbehavior

    def handle_pomm(self, uid: str, proof: PoMMProof, tid: PublicKey, now: int) -> bool:
        valid = pomm_ver(proof, tid)
        return self._compensate(now, "pomm", uid, tid, proof.statement(), valid)

    def handle_pome(self, uid: str, proof: PoMEProof, tid: PublicKey, now: int) -> bool:
        valid = pome_ver(proof, tid, self.backend)
        return self._compensate(now, "pome", uid, tid, proof.statement_digest(), valid)

    def _compensate(self, now, op, uid, tid, statement, valid) -> bool:
        accused = self.owner_of.get(tid)
        key = hashlib.sha256(statement + encode(tid)).digest()
        if not valid or accused is None or key in self.seen_proofs:
            self._record(now, op, uid, "rejected")
            return False
        if not self.ledger.transfer(accused, uid, self.b_max):
            self._record(now, op, uid, "insufficient")
            return False
        self.seen_proofs.add(key)
        if self.slashing:
            burn = min(int(self.slash_fraction * self.b_max), self.ledger.balances.get(accused, 0))
            self.ledger.transfer(accused, BURN_ACCOUNT, burn)
        self._record(now, op, uid, "compensation")
        self.events.append(JudgeEvent("compensated", now, party=accused))
        return True

    # enforcement

    def enforce(
        self,
        caller: str,
        ch: EnforcementChallenge,
        receipts: dict[str, Signature],
        sync_secret: bytes,
        now: int,
    ) -> bool:
        stmt = ch.statement()
        ok = (
            len(ch.addr) == ch.hops + 1
            and ch.hops > 0
            and caller == ch.addr[0]
            and now < ch.deadline
            and ch.challenge_id not in self.logs
            and opens_safely(sync_secret, ch.sync_hash)
            and all(
                r in receipts and r in self.roster and ae_verify(stmt, receipts[r], self.roster[r])
                for r in ch.addr[1:]
            )
        )
        self._record(now, "enforce", caller, "enforced" if ok else "rejected")
        if ok:
            self.logs[ch.challenge_id] = SecretLog(ch, now)
            self.events.append(
                JudgeEvent("enforced", now, ch.challenge_id, 0, ((0, sync_secret),), caller)
            )
        return ok

    def log_response(self, caller: str, challenge_id: str, hop: int, secret: bytes, now: int) -> bool:
        log = self.logs.get(challenge_id)
        ok = False
        if log is not None and not log.closed and 1 <= hop <= log.challenge.hops:
            n = log.challenge.hops
            ok = (
                caller == log.challenge.addr[hop]
                and now == log.window(hop)
                and hop not in log.entries
                and (hop == n or hop + 1 in log.entries)
                and opens_safely(secret, log.challenge.hashes[hop - 1])
            )
        self._record(now, "log", caller, "logged" if ok else "rejected")
        if ok:
            log.entries[hop] = secret
            self.events.append(
                JudgeEvent("logged", now, challenge_id, hop, tuple(sorted(log.entries.items())), caller)
            )
        return ok

    def punish(self, caller: str, challenge_id: str, now: int) -> str:
        log = self.logs.get(challenge_id)
        if log is None or log.closed or caller != log.challenge.addr[0] or now != log.punish_round:
            self._record(now, "punish", caller, "rejected")
            return "rejected"
        log.closed = True
        missing = [i for i in range(1, log.challenge.hops + 1) if i not in log.entries]
        if not missing:
            self._record(now, "punish", caller, "no-op")
            return "no-op"
        hop = max(missing)
        target = log.challenge.addr[hop]
        paid = self.ledger.transfer(target, caller, self.b_max)
        outcome = "punished" if paid else "insufficient"
        self._record(now, "punish", caller, outcome)
        if paid:
            self.events.append(JudgeEvent("punished", now, challenge_id, hop, (), target))
        return outcome

    def secrets_logged(self, challenge_id: str) -> dict[int, bytes]:
        log = self.logs.get(challenge_id)
        return dict(log.entries) if log else {}
