"""Customer, provider and relayer state machines.

A session runs setup, delivery, payment and decryption over synchronous
rounds. Every party shares the public `Session` (graph, keys, deadlines)
and keeps its own secrets. Rounds, with n the longest path:

    1        customer broadcasts init
    2        every node sends its setup to the customer; in multi-path mode
             relayers also send their secret hash along the path and the
             provider sends the synchronizer hash to every relayer
    3        customer checks all setups and asks for delivery
    4        provider sends each path its hash message and chunks
    4+i      the i-th relayer of a path re-encrypts and forwards
    T_1      customer holds every path and pays the provider
    T_1+1    provider checks that payment and locks every path

From there the payment engines take over, and the customer decrypts once
its payment is redeemed. Any missing or invalid message at its deadline
aborts the party that was waiting for it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import random
from typing import Sequence

from .behavior import HONEST, Behavior
from .commitments import (
    DeliveredChunk,
    EncCommitment,
    EncStatement,
    MaskCommitment,
    PoMMProof,
    ecom_gen,
    ext_key,
    extract,
    mcom_gen,
    mcom_ver,
    sign_enc,
    sign_mask,
    validate_tuple,
)
from .crypto import (
    SYMKEY_SIZE,
    CommitmentValue,
    KeyPair,
    PublicKey,
    ae_dec,
    ae_enc,
    commit,
    opens_safely,
    random_bytes,
    se_keygen,
)
from .merkle import MerkleMultiProof, merkle_member, merkle_root, merkle_verify
from .messages import ReportMisbehavior, Send, SubmitUpdate
from .payment import PathSpec, PayeeEngine, PayerEngine, Timelocks, timelocks_single
from .pcn import ChannelEvent, ChannelNetwork, ConditionedPayment, construct_condition, lock, order_secrets, unlock

CUSTOMER_CHANNEL = "C-P"


# -- shared public data ------------------------------------------------------------


@dataclass(frozen=True)
class DeliveryGraph:
    provider: str
    customer: str
    paths: tuple[PathSpec, ...]
    jobs: tuple[tuple[int, ...], ...]  # chunk ids per path, 1-based
    price: int
    chunk_size: int
    chunk_count: int
    content_length: int
    com_m: bytes

    def __post_init__(self):
        if len(self.jobs) != len(self.paths):
            raise ValueError("one job per path")
        ids = sorted(j for job in self.jobs for j in job)
        if ids != list(range(1, self.chunk_count + 1)):
            raise ValueError("jobs must partition the chunk ids")

    @property
    def relayers(self) -> list[str]:
        return [r for p in self.paths for r in p.relayers]

    @property
    def nodes(self) -> list[str]:
        """Provider first, then every relayer by path and hop; the key order used for extraction."""
        return [self.provider, *self.relayers]

    @property
    def longest(self) -> int:
        return max(p.length for p in self.paths)

    def locate(self, relayer: str) -> tuple[PathSpec, int]:
        for p in self.paths:
            if relayer in p.relayers:
                return p, p.relayers.index(relayer) + 1
        raise KeyError(relayer)

    def receiver(self, path: PathSpec, hop: int) -> str:
        """Who node `hop` of `path` forwards chunks to."""
        return path.relayers[hop] if hop < path.length else self.customer


@dataclass(frozen=True)
class Session:
    graph: DeliveryGraph
    roster: dict[str, PublicKey]
    b_max: int
    multi: bool = True
    delivery_override: int | None = None

    @property
    def delivery_deadline(self) -> int:
        """T_1: the last path's chunks reach the customer in round 5 + longest."""
        return self.delivery_override or 5 + self.graph.longest

    def schedule(self) -> Timelocks:
        from .payment import payment_schedule

        return payment_schedule([p.length for p in self.graph.paths], self.delivery_deadline)

    def single_deadlines(self) -> list[int]:
        # the customer pays at T_1 and the provider's lock reaches hop i at T_1+1+i;
        # every hop needs 2(n-i)+1 spare rounds for the cascade to come back
        n = self.graph.paths[0].length
        return timelocks_single(self.delivery_deadline + n + 1, n)

    @property
    def customer_deadline(self) -> int:
        return self.schedule().customer_deadline if self.multi else self.single_deadlines()[0]


# -- wire payloads -------------------------------------------------------------------


@dataclass(frozen=True)
class SetupMessage:
    h_sk: CommitmentValue
    h_s: CommitmentValue
    sealed_mask: bytes


@dataclass(frozen=True)
class HashMessage:
    path: int
    chunk_ids: tuple[int, ...]
    hashes: tuple[CommitmentValue, ...]
    proof: MerkleMultiProof | None = None


@dataclass(frozen=True)
class ChunkMessage:
    chunk_id: int
    ciphertext: bytes
    chain: tuple[EncCommitment, ...]


def leaf_commitments(chunks: Sequence[bytes], rng: random.Random) -> list[CommitmentValue]:
    return [commit(c, rng) for c in chunks]


def content_root(leaves: Sequence[CommitmentValue]) -> bytes:
    return merkle_root([h.to_bytes() for h in leaves])


def check_hash_message(session: Session, k: int, msg) -> bool:
    """Job hashes for path k must be what the content root commits to."""
    graph = session.graph
    if not isinstance(msg, HashMessage) or msg.path != k:
        return False
    if session.multi:
        if msg.chunk_ids != graph.jobs[k - 1] or msg.proof is None:
            return False
        if msg.proof.indices != tuple(j - 1 for j in msg.chunk_ids):
            return False
        return merkle_verify([h.to_bytes() for h in msg.hashes], msg.proof, graph.com_m)
    if msg.chunk_ids != tuple(range(1, graph.chunk_count + 1)) or len(msg.hashes) != graph.chunk_count:
        return False
    return content_root(msg.hashes) == graph.com_m


class _Node:
    """Common key material for the provider and relayers."""

    def __init__(self, name: str, session: Session, key: KeyPair, rng: random.Random, behavior: Behavior):
        self.name = name
        self.session = session
        self.graph = session.graph
        self.key = key
        self.rng = rng
        self.behavior = behavior
        self.phase = "setup"
        self.abort_reason = ""
        self.sk = se_keygen(rng)
        self.secret = random_bytes(rng, SYMKEY_SIZE)
        self.mask = mcom_gen(self.sk, self.secret, key, rng)
        if behavior.kind == "wrong-mask":
            self.mask = sign_mask(self.mask.h_sk, self.mask.h_s, random_bytes(rng, SYMKEY_SIZE), key)

    def abort(self, reason: str) -> list:
        if self.phase not in ("done", "aborted"):
            self.phase = "aborted"
            self.abort_reason = reason
        return []

    def setup_message(self) -> Send:
        sealed = ae_enc(self.mask.to_bytes(), self.session.roster[self.graph.customer], self.rng)
        return Send(self.graph.customer, "setup", SetupMessage(self.mask.h_sk, self.mask.h_s, sealed))

    def encrypt_layer(self, chunk_id: int, incoming: bytes, h_m: CommitmentValue) -> tuple[bytes, EncCommitment]:
        if self.behavior.corrupts_chunk(chunk_id):
            out = random_bytes(self.rng, len(incoming))
            return out, sign_enc(EncStatement(h_m, commit(out, self.rng), self.mask.h_sk, chunk_id), self.key)
        return ecom_gen(incoming, self.sk, chunk_id, self.key, self.rng, self.mask.h_sk, h_m)


# -- provider ----------------------------------------------------------------------


class Provider(_Node):
    def __init__(
        self,
        session: Session,
        key: KeyPair,
        rng: random.Random,
        chunks: Sequence[bytes],
        leaves: Sequence[CommitmentValue],
        channels: ChannelNetwork,
        behavior: Behavior = HONEST,
    ):
        super().__init__(session.graph.provider, session, key, rng, behavior)
        self.chunks = list(chunks)
        self.leaves = list(leaves)
        self.channels = channels
        self.sync_secret = random_bytes(rng, SYMKEY_SIZE) if session.multi else None
        self.sync_hash = commit(self.sync_secret, rng) if session.multi else None
        self.peer_hashes: dict[str, CommitmentValue] = {}
        self.incoming: ConditionedPayment | None = None
        self.engine: PayerEngine | None = None
        self.redeem_sent = False
        self.paid = False
        self.reveal = random_bytes(rng, SYMKEY_SIZE) if behavior.kind == "wrong-secret" else self.secret

    def finished(self, now: int) -> bool:
        return self.phase in ("done", "aborted") or now > self.session.customer_deadline

    def step(self, now: int, inbox, events) -> list:
        if self.phase in ("done", "aborted"):
            return []
        acts: list = []
        for msg in inbox:
            if msg.kind == "init" and msg.sender == self.graph.customer and now == 2:
                if not self.behavior.acts_in("setup"):
                    return self.abort("silent")
                acts.append(self.setup_message())
                if self.session.multi:
                    acts += [Send(r, "sync-hash", self.sync_hash) for r in self.graph.relayers]
            elif msg.kind == "peer-hash" and msg.sender in self.graph.relayers:
                self.peer_hashes[msg.sender] = msg.payload
            elif msg.kind == "deliver" and msg.sender == self.graph.customer and now == 4:
                if not self.behavior.acts_in("delivery"):
                    return self.abort("silent")
                acts += self._deliver()
                self.phase = "delivery"
            elif msg.kind == "pay" and msg.sender == self.graph.customer:
                self.incoming = msg.payload
        if now == 3 and self.session.multi and set(self.peer_hashes) != set(self.graph.relayers):
            return self.abort("missing relayer secret hashes")
        t1 = self.session.delivery_deadline
        if self.engine is None:
            if now == t1 + 1:
                acts += self._start_payment(now)
            return acts
        acts += self.engine.step(now, inbox, events)
        for ev in events:
            if isinstance(ev, ChannelEvent) and ev.kind == "updated" and ev.cid == CUSTOMER_CHANNEL:
                self.paid = True
                self.phase = "done"
        acts += self._redeem(now)
        return acts

    def _deliver(self) -> list:
        acts = []
        for k, path in enumerate(self.graph.paths, 1):
            job = self.graph.jobs[k - 1]
            to = self.graph.receiver(path, 0)
            if self.session.multi:
                selected, proof = merkle_member([j - 1 for j in job], [h.to_bytes() for h in self.leaves])
                msg = HashMessage(k, job, tuple(self.leaves[j - 1] for j in job), proof)
            else:
                msg = HashMessage(k, job, tuple(self.leaves))
            acts.append(Send(to, "hashes", msg))
            for j in job:
                c, com = self.encrypt_layer(j, self.chunks[j - 1], self.leaves[j - 1])
                acts.append(Send(to, "chunk", ChunkMessage(j, c, (com,))))
        return acts

    def _expected_hashes(self) -> list[CommitmentValue]:
        return [self.mask.h_s, *(self.peer_hashes[r] for r in self.graph.relayers)]

    def _payment_ok(self, tx, now: int) -> bool:
        if not isinstance(tx, ConditionedPayment) or tx.cid != CUSTOMER_CHANNEL or tx.initiator != self.graph.customer:
            return False
        from .crypto import ae_verify
        from .pcn import credited

        if not ae_verify(tx.statement(), tx.sig, self.session.roster[tx.initiator]):
            return False
        if credited(tx, self.channels.get(tx.cid), self.name) != self.graph.price:
            return False
        cond = tx.cond
        if self.session.multi:
            return (
                sorted(h.to_bytes() for h in cond.hashes) == sorted(h.to_bytes() for h in self._expected_hashes())
                and cond.deadline == self.session.customer_deadline
            )
        n = self.graph.paths[0].length
        return self.mask.h_s in cond.hashes and len(cond.hashes) == n + 1 and cond.deadline - now >= 2 * n + 1

    def _start_payment(self, now: int) -> list:
        if self.incoming is None or not self._payment_ok(self.incoming, now):
            return self.abort("no valid customer payment")
        self.phase = "payment-lock"
        paths = self.graph.paths
        if self.session.multi:
            paths = [p.with_hashes([self.peer_hashes[r] for r in p.relayers]) for p in paths]
            self.engine = PayerEngine(
                self.name, self.key, self.channels, self.session.roster, paths,
                self.session.schedule(), self.sync_secret, self.sync_hash, self.behavior,
            )
            return self.engine.start(now)
        self.engine = PayerEngine(self.name, self.key, self.channels, self.session.roster, paths, behavior=self.behavior)
        return self.engine.start(now, incoming=self.incoming.cond, own_hash=self.mask.h_s)

    def _redeem(self, now: int) -> list:
        if self.redeem_sent or self.paid or now > self.incoming.cond.deadline:
            return []
        secrets = self.engine.relayer_secrets()
        if secrets is None or not self.behavior.acts_in("unlock"):
            return []
        self.phase = "payment-unlock"
        pool = [*secrets, self.secret]
        ordered = order_secrets(self.incoming.cond, pool)
        if ordered is None:
            return []
        self.redeem_sent = True
        ordered = [self.reveal if s == self.secret else s for s in ordered]
        return [SubmitUpdate(unlock(self.incoming, self.name, self.key, ordered))]


# -- relayer -----------------------------------------------------------------------


class Relayer(_Node):
    def __init__(
        self,
        name: str,
        session: Session,
        key: KeyPair,
        rng: random.Random,
        channels: ChannelNetwork,
        behavior: Behavior = HONEST,
    ):
        super().__init__(name, session, key, rng, behavior)
        self.channels = channels
        self.path, self.hop = self.graph.locate(name)
        self.peer_hashes: dict[str, CommitmentValue] = {}
        self.sync_hash: CommitmentValue | None = None
        self.job_hashes: dict[int, CommitmentValue] = {}
        self.relayed: set[int] = set()
        self.engine: PayeeEngine | None = None
        self.seen_plain: list[bytes] = []

    @property
    def peers(self) -> list[str]:
        return [self.path.provider, *(r for r in self.path.relayers if r != self.name)]

    def finished(self, now: int) -> bool:
        if self.phase == "aborted":
            return True
        return self.engine is not None and self.engine.finished(now)

    def step(self, now: int, inbox, events) -> list:
        if self.phase == "aborted":
            return []
        acts: list = []
        delivery = []
        for msg in inbox:
            if msg.kind == "init" and msg.sender == self.graph.customer and now == 2:
                if not self.behavior.acts_in("setup"):
                    return self.abort("silent")
                acts.append(self.setup_message())
                if self.session.multi:
                    acts += [Send(p, "peer-hash", self.mask.h_s) for p in self.peers]
                else:
                    self._make_engine()
            elif msg.kind == "peer-hash" and msg.sender in self.path.relayers:
                self.peer_hashes[msg.sender] = msg.payload
            elif msg.kind == "sync-hash" and msg.sender == self.path.provider:
                self.sync_hash = msg.payload
            elif msg.kind in ("hashes", "chunk") and msg.sender == self.path.node(self.hop - 1):
                delivery.append(msg)
        if now == 3 and self.session.multi:
            self.peer_hashes[self.name] = self.mask.h_s
            if self.sync_hash is None or set(self.peer_hashes) != set(self.path.relayers):
                return self.abort("missing setup hashes")
            self._make_engine()
        if now == 4 + self.hop:
            if not delivery:
                return self.abort("no delivery")
            acts += self._relay(delivery)
            if self.phase == "aborted":
                return []
            self.phase = "payment-lock"
        if self.engine is not None and now > 4 + self.hop:
            acts += self.engine.step(now, inbox, events)
            if self.engine.aborted:
                self.abort("payment")
            elif self.engine.settled:
                self.phase = "done"
            elif self.engine.unlock_sent:
                self.phase = "payment-unlock"
        return acts

    def _make_engine(self) -> None:
        path, hop = self.path, self.hop
        t1 = self.session.delivery_deadline
        if self.session.multi:
            path = path.with_hashes([self.peer_hashes[r] for r in path.relayers])
            schedule = self.session.schedule()
            self.engine = PayeeEngine(
                self.name, self.key, self.channels, self.session.roster, path, hop, self.secret,
                self.mask.h_s, lock_by=t1 + hop + 1, sync_hash=self.sync_hash,
                deadline=schedule.hop(path.index, hop),
                challenge=path.challenge(schedule.enforce_deadline, self.sync_hash), behavior=self.behavior,
            )
        else:
            self.engine = PayeeEngine(
                self.name, self.key, self.channels, self.session.roster, path, hop, self.secret,
                self.mask.h_s, lock_by=t1 + hop + 1, behavior=self.behavior,
            )

    def _relay(self, delivery) -> list:
        head, chunks = delivery[0], delivery[1:]
        if head.kind != "hashes" or not check_hash_message(self.session, self.path.index, head.payload):
            return self.abort("bad hash message")
        hashes = dict(zip(head.payload.chunk_ids, head.payload.hashes))
        job = self.graph.jobs[self.path.index - 1]
        to = self.graph.receiver(self.path, self.hop)
        out = [Send(to, "hashes", head.payload)] if self.behavior.acts_in("delivery") else []
        got = set()
        for msg in chunks:
            item = msg.payload
            if msg.kind != "chunk" or not isinstance(item, ChunkMessage) or item.chunk_id not in job:
                return self.abort("foreign chunk")
            if len(item.chain) != self.hop or item.chunk_id in got:
                return self.abort("bad chain length")
            if item.chain[0].h_m != hashes[item.chunk_id] or not opens_safely(item.ciphertext, item.chain[-1].h_c):
                return self.abort("chunk does not match its commitments")
            got.add(item.chunk_id)
            self.seen_plain.append(item.ciphertext)
            c, com = self.encrypt_layer(item.chunk_id, item.ciphertext, item.chain[-1].h_c)
            if self.behavior.acts_in("delivery"):
                out.append(Send(to, "chunk", ChunkMessage(item.chunk_id, c, item.chain + (com,))))
        if got != set(job):
            return self.abort("missing chunks")
        return out


# -- customer ----------------------------------------------------------------------


class Customer:
    def __init__(
        self,
        session: Session,
        key: KeyPair,
        rng: random.Random,
        channels: ChannelNetwork,
        behavior: Behavior = HONEST,
    ):
        self.session = session
        self.graph = session.graph
        self.name = self.graph.customer
        self.key = key
        self.rng = rng
        self.channels = channels
        self.behavior = behavior
        self.phase = "setup"
        self.abort_reason = ""
        self.setups: dict[str, tuple[CommitmentValue, CommitmentValue, MaskCommitment]] = {}
        self.hashes: dict[int, dict[int, CommitmentValue]] = {}
        self.delivered: dict[int, dict[int, DeliveredChunk]] = {k: {} for k in range(1, len(self.graph.paths) + 1)}
        self.payment: ConditionedPayment | None = None
        self.content: bytes | None = None
        self.dispute: tuple[str, str] | None = None  # (proof kind, accused)
        self.revealed: tuple[bytes, ...] = ()

    def finished(self, now: int) -> bool:
        return self.phase in ("done", "aborted")

    def abort(self, reason: str) -> list:
        self.phase = "aborted"
        self.abort_reason = reason
        return []

    def step(self, now: int, inbox, events) -> list:
        if self.phase in ("done", "aborted"):
            return []
        if now == 1:
            if not self.behavior.acts_in("setup"):
                return self.abort("silent")
            return [Send(u, "init", None) for u in self.graph.nodes]
        acts: list = []
        for msg in inbox:
            if msg.kind == "setup" and msg.sender in self.graph.nodes:
                self._on_setup(msg)
            elif msg.kind in ("hashes", "chunk") and self.phase == "delivery":
                self._on_delivery(msg)
                if self.phase == "aborted":
                    return []
        if now == 3:
            return self._check_setup()
        if now == self.session.delivery_deadline:
            return self._pay(now)
        if self.payment is not None:
            for ev in events:
                if isinstance(ev, ChannelEvent) and ev.kind == "updated" and ev.cid == CUSTOMER_CHANNEL:
                    self.revealed = ev.secrets
                    return self._decrypt(now)
            if now > self.payment.cond.deadline + 1:
                return self.abort("payment expired")
        return acts

    def _on_setup(self, msg) -> None:
        body = msg.payload
        try:
            mask = MaskCommitment.from_bytes(ae_dec(body.sealed_mask, self.key))
        except (ValueError, AttributeError):
            return
        self.setups[msg.sender] = (body.h_sk, body.h_s, mask)

    def _check_setup(self) -> list:
        for u in self.graph.nodes:
            if u not in self.setups:
                return self.abort(f"no setup from {u}")
            h_sk, h_s, mask = self.setups[u]
            if not mcom_ver(mask, self.session.roster[u], h_sk, h_s):
                return self.abort(f"invalid mask commitment from {u}")
        self.phase = "delivery"
        return [Send(self.graph.provider, "deliver", None)]

    def _path_of_sender(self, sender: str) -> PathSpec | None:
        for p in self.graph.paths:
            if p.node(p.length) == sender:
                return p
        return None

    def _on_delivery(self, msg) -> None:
        path = self._path_of_sender(msg.sender)
        if path is None:
            return
        k = path.index
        if msg.kind == "hashes":
            if not check_hash_message(self.session, k, msg.payload):
                self.abort("bad hash message")
                return
            self.hashes[k] = dict(zip(msg.payload.chunk_ids, msg.payload.hashes))
            return
        item = msg.payload
        if k not in self.hashes or not isinstance(item, ChunkMessage):
            self.abort("chunk before hashes")
            return
        job = self.graph.jobs[k - 1]
        names = [path.provider, *path.relayers]
        masks = [self.setups[u][2] for u in names]
        pks = [self.session.roster[u] for u in names]
        if (
            item.chunk_id not in job
            or item.chunk_id in self.delivered[k]
            or item.chain[0].h_m != self.hashes[k][item.chunk_id]
            or not validate_tuple(item.ciphertext, item.chain, masks, item.chunk_id, pks)
        ):
            self.abort(f"invalid chunk {item.chunk_id} on path {k}")
            return
        self.delivered[k][item.chunk_id] = DeliveredChunk(item.chunk_id, item.ciphertext, item.chain)

    def _complete(self) -> bool:
        for k, job in enumerate(self.graph.jobs, 1):
            if set(self.delivered[k]) != set(job):
                return False
        leaves = {j: h for hs in self.hashes.values() for j, h in hs.items()}
        return content_root([leaves[j] for j in range(1, self.graph.chunk_count + 1)]) == self.graph.com_m

    def _pay(self, now: int) -> list:
        if self.phase != "delivery" or not self._complete():
            return self.abort("delivery incomplete")
        if not self.behavior.acts_in("pay"):
            return self.abort("silent")
        hashes = [self.setups[u][1] for u in self.graph.nodes]
        deadline = self.session.customer_deadline
        self.payment = lock(
            self.channels, CUSTOMER_CHANNEL, self.name, self.key, self.graph.price, construct_condition(hashes, deadline)
        )
        self.phase = "payment"
        return [Send(self.graph.provider, "pay", self.payment)]

    def _decrypt(self, now: int) -> list:
        self.phase = "decryption"
        if not self.behavior.acts_in("decrypt"):
            return self.abort("silent")
        nodes = self.graph.nodes
        masks = [self.setups[u][2] for u in nodes]
        pks = [self.session.roster[u] for u in nodes]
        acts: list = []
        if self.behavior.kind == "false-accuse":
            forged = PoMMProof(masks[0].h_sk, masks[0].h_s, masks[0].ck, masks[0].sig, self.revealed[0])
            acts.append(ReportMisbehavior("pomm", forged, pks[0]))
        keys = ext_key(self.revealed, masks, pks)
        if keys.keys is None:
            self.dispute = ("pomm", nodes[keys.position])
            self.phase = "done"
            return [*acts, ReportMisbehavior("pomm", keys.proof, keys.tid)]
        path_keys, path_pks, i = [], [], 1
        for p in self.graph.paths:
            path_keys.append(keys.keys[i : i + p.length])
            path_pks.append(pks[i : i + p.length])
            i += p.length
        deliveries = [[self.delivered[k][j] for j in job] for k, job in enumerate(self.graph.jobs, 1)]
        result = extract(keys.keys[0], path_keys, deliveries, pks[0], path_pks, self.graph.content_length)
        self.phase = "done"
        if result.content is None:
            k, layer = result.offender
            self.dispute = ("pome", self.graph.paths[k].node(layer))
            return [*acts, ReportMisbehavior("pome", result.proof, result.tid)]
        self.content = result.content
        return acts
