"""Per-hop lock construction, verification and lock receipts.

Node 0 of a path is the provider and node i its i-th relayer. Channel
`channels[i-1]` links node i-1 (paying side) to node i, and the amount
locked on it is the sum of fees from hop i to the end of the path.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace
from typing import Sequence

from ..crypto import CommitmentValue, KeyPair, PublicKey, Signature, ae_sign, ae_verify
from ..judge import EnforcementChallenge
from ..pcn import ChannelNetwork, ConditionedPayment, PaymentCondition, construct_condition, credited, lock


@dataclass(frozen=True)
class PathSpec:
    index: int
    provider: str
    relayers: tuple[str, ...]
    channels: tuple[str, ...]
    fees: tuple[int, ...]
    secret_hashes: tuple[CommitmentValue, ...] = ()

    def __post_init__(self):
        if not (len(self.relayers) == len(self.channels) == len(self.fees)):
            raise ValueError("relayers, channels and fees must align")
        if any(f <= 0 for f in self.fees):
            raise ValueError("relay fees must be positive")

    @property
    def length(self) -> int:
        return len(self.relayers)

    def node(self, hop: int) -> str:
        return self.provider if hop == 0 else self.relayers[hop - 1]

    def fee_sum(self, hop: int) -> int:
        """Amount locked on the channel into `hop`: its fee plus everything downstream."""
        return sum(self.fees[hop - 1 :])

    def hashes_from(self, hop: int) -> tuple[CommitmentValue, ...]:
        return self.secret_hashes[hop - 1 :]

    def with_hashes(self, hashes: Sequence[CommitmentValue]) -> "PathSpec":
        return replace(self, secret_hashes=tuple(hashes))

    def challenge(self, deadline: int, sync_hash: CommitmentValue) -> EnforcementChallenge:
        return EnforcementChallenge(deadline, self.secret_hashes, sync_hash, (self.provider, *self.relayers))


def build_outgoing_lock(
    channels: ChannelNetwork,
    path: PathSpec,
    hop: int,
    key: KeyPair,
    incoming: PaymentCondition | None = None,
    own_hash: CommitmentValue | None = None,
    sync_hash: CommitmentValue | None = None,
    deadline: int | None = None,
) -> ConditionedPayment | None:
    """Lock the next hop's fee sum.

    With an incoming condition, strip `own_hash` from it and shave one round
    off its deadline. Without one (the provider opening a path), lock under
    `sync_hash` plus every relayer hash until `deadline`.
    The last relayer has nothing to forward and gets None.
    """
    if hop >= path.length:
        return None
    if incoming is not None:
        hashes = list(incoming.hashes)
        hashes.remove(own_hash)
        cond = construct_condition(hashes, incoming.deadline - 1)
    else:
        prefix = (sync_hash,) if sync_hash is not None else ()
        cond = construct_condition(prefix + path.hashes_from(1), deadline)
    return lock(channels, path.channels[hop], path.node(hop), key, path.fee_sum(hop + 1), cond)


def verify_incoming_lock(
    channels: ChannelNetwork,
    roster: dict[str, PublicKey],
    path: PathSpec,
    hop: int,
    tx: ConditionedPayment,
    hashes: Sequence[CommitmentValue] | None = None,
    deadline: int | None = None,
    earliest: int | None = None,
    must_include: CommitmentValue | None = None,
    hash_count: int | None = None,
) -> bool:
    """Check a lock arriving at node `hop`.

    `hashes` demands the exact multiset; `must_include`/`hash_count` are the
    weaker checks a relayer uses when it never learned its peers' hashes.
    `deadline` is exact; `earliest` is a lower bound.
    """
    if not isinstance(tx, ConditionedPayment) or not 1 <= hop <= path.length:
        return False
    if tx.cid != path.channels[hop - 1] or tx.initiator != path.node(hop - 1):
        return False
    if not ae_verify(tx.statement(), tx.sig, roster[tx.initiator]):
        return False
    cond = tx.cond
    if deadline is not None and cond.deadline != deadline:
        return False
    if earliest is not None and cond.deadline < earliest:
        return False
    if hashes is not None and Counter(cond.hashes) != Counter(hashes):
        return False
    if must_include is not None and must_include not in cond.hashes:
        return False
    if hash_count is not None and len(cond.hashes) != hash_count:
        return False
    ch = channels.get(tx.cid)
    if tx.lb < 0 or tx.rb < 0 or tx.lb + tx.rb != ch.lb + ch.rb:
        return False
    return credited(tx, ch, path.node(hop)) == path.fee_sum(hop)


@dataclass(frozen=True)
class LockReceipt:
    challenge: EnforcementChallenge
    signer: str
    sig: Signature


def ack_receipt(name: str, key: KeyPair, challenge: EnforcementChallenge) -> LockReceipt:
    return LockReceipt(challenge, name, ae_sign(challenge.statement(), key))


def receipt_valid(receipt: LockReceipt, challenge: EnforcementChallenge, pk: PublicKey) -> bool:
    return (
        isinstance(receipt, LockReceipt)
        and receipt.challenge == challenge
        and ae_verify(challenge.statement(), receipt.sig, pk)
    )
