import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from relaypay.behavior import HONEST, Behavior
from relaypay.crypto import ae_keygen, commit, random_bytes
from relaypay.payment import (
    PAYEE_BEHAVIORS,
    PAYER_BEHAVIORS,
    PathSpec,
    ack_receipt,
    build_outgoing_lock,
    ideal_exchange,
    payment_schedule,
    receipt_valid,
    timelocks_multi,
    timelocks_single,
    verify_incoming_lock,
)
from relaypay.pcn import ChannelNetwork
from relaypay.sim.exchange import run_exchange

WITHHOLD = Behavior.parse("withhold-unlock")


class TestTimelocks:
    def test_single_example(self):
        assert timelocks_single(10, 2) == [13, 12, 11]

    def test_single_no_relayers(self):
        assert timelocks_single(7, 0) == [8]

    def test_multi_example(self):
        tl = timelocks_multi([2, 3])
        assert (tl.delivery_deadline, tl.enforce_deadline, tl.customer_deadline) == (8, 19, 24)
        assert tl.hop(2, 1) == 23 and tl.hop(2, 3) == 21

    def test_one_hop(self):
        tl = timelocks_multi([1])
        assert tl.hop(1, 1) == tl.enforce_deadline + 2 < tl.customer_deadline

    def test_receipt_deadline(self):
        assert timelocks_multi([2, 3]).receipt_deadline == 8 + 3 + 2

    def test_empty(self):
        with pytest.raises(ValueError):
            timelocks_multi([])

    @settings(max_examples=200)
    @given(st.lists(st.integers(1, 6), min_size=1, max_size=5))
    def test_ordering(self, lengths):
        tl = timelocks_multi(lengths)
        for k, n in enumerate(lengths, 1):
            row = [tl.hop(k, i) for i in range(1, n + 1)]
            assert all(a > b for a, b in zip(row, row[1:]))
            assert tl.customer_deadline > row[0]
            assert all(row[i - 1] > tl.enforce_deadline + n - i for i in range(1, n + 1))


def _path(n, rng, with_sync=True):
    names = ["P"] + [f"R{i}" for i in range(1, n + 1)]
    keys = {u: ae_keygen(rng) for u in names}
    net = ChannelNetwork({u: k.public for u, k in keys.items()})
    cids = tuple(f"{names[i]}-{names[i + 1]}" for i in range(n))
    for i, cid in enumerate(cids):
        net.open(cid, names[i], names[i + 1], 100, 100)
    secrets = [random_bytes(rng, 48) for _ in range(n)]
    path = PathSpec(1, "P", tuple(names[1:]), cids, tuple(range(2, n + 2)), tuple(commit(s, rng) for s in secrets))
    return path, net, keys


class TestLocks:
    def setup_method(self):
        self.rng = random.Random(11)
        self.path, self.net, self.keys = _path(2, self.rng)
        self.roster = {u: k.public for u, k in self.keys.items()}
        self.sync = commit(b"sync" * 12, self.rng)

    def first_lock(self, deadline=30):
        return build_outgoing_lock(self.net, self.path, 0, self.keys["P"], sync_hash=self.sync, deadline=deadline)

    def test_provider_lock(self):
        tx = self.first_lock()
        assert tx.cond.hashes == (self.sync, *self.path.secret_hashes)
        assert tx.rb - 100 == 2 + 3

    def test_forward_strips_own_hash(self):
        tx = self.first_lock()
        out = build_outgoing_lock(self.net, self.path, 1, self.keys["R1"], incoming=tx.cond, own_hash=self.path.secret_hashes[0])
        assert out.cond.hashes == (self.sync, self.path.secret_hashes[1])
        assert out.cond.deadline == 29 and out.rb - 100 == 3

    def test_last_builds_nothing(self):
        tx = self.first_lock()
        assert build_outgoing_lock(self.net, self.path, 2, self.keys["R2"], incoming=tx.cond) is None

    def expect(self, tx, deadline=30):
        return verify_incoming_lock(
            self.net, self.roster, self.path, 1, tx,
            hashes=(self.sync, *self.path.secret_hashes), deadline=deadline,
        )

    def test_exact_accepts(self):
        assert self.expect(self.first_lock())

    def test_deadline_off_by_one(self):
        assert not self.expect(self.first_lock(31))

    def test_amount_short(self):
        from relaypay.pcn import lock

        tx = self.first_lock()
        short = lock(self.net, tx.cid, "P", self.keys["P"], 4, tx.cond)
        assert not self.expect(short)

    def test_missing_sync(self):
        tx = build_outgoing_lock(self.net, self.path, 0, self.keys["P"], deadline=30)
        assert not self.expect(tx)

    def test_wrong_signer(self):
        tx = self.first_lock()
        forged = type(tx)(tx.cid, tx.lb, tx.rb, tx.cond, tx.initiator, ack_receipt("R1", self.keys["R1"], self.path.challenge(1, self.sync)).sig)
        assert not self.expect(forged)


class TestReceipts:
    def setup_method(self):
        rng = random.Random(2)
        self.path, _, self.keys = _path(2, rng)
        self.ch = self.path.challenge(20, commit(b"x" * 48, rng))

    def test_valid(self):
        r = ack_receipt("R1", self.keys["R1"], self.ch)
        assert receipt_valid(r, self.ch, self.keys["R1"].public)

    def test_other_challenge(self):
        r = ack_receipt("R1", self.keys["R1"], self.path.challenge(21, self.ch.sync_hash))
        assert not receipt_valid(r, self.ch, self.keys["R1"].public)

    def test_wrong_key(self):
        r = ack_receipt("R1", self.keys["R2"], self.ch)
        assert not receipt_valid(r, self.ch, self.keys["R1"].public)


class TestReferenceTimetable:
    def test_honest_two(self):
        t = ideal_exchange([3, 5], [HONEST, HONEST])
        assert t.events == (
            (1, "locked", 1), (2, "ack", 1), (2, "locked", 2), (3, "ack", 2),
            (4, "released", 0), (5, "settled", 2), (6, "settled", 1),
        )
        assert t.deltas == (-8, 3, 5)

    def test_payer_withholds_release(self):
        t = ideal_exchange([3, 5], [HONEST, HONEST], Behavior.parse("silent-at(release)"))
        assert not t.rounds("settled") and t.deltas == (0, 0, 0)

    def test_stalled_middle_punished(self):
        silent = Behavior.parse("silent-at(unlock)")
        t = ideal_exchange([1, 1, 1], [HONEST, silent, HONEST], penalty=50)
        assert t.rounds("logged") == {3: 10}
        assert t.rounds("punished") == {2: 13}
        assert t.deltas[2] == -1 - 50

    def test_rejects_wormhole(self):
        with pytest.raises(ValueError):
            ideal_exchange([1, 1], [HONEST, Behavior.parse("wormhole-collude(U1)")])


def _cases(max_n):
    for n in range(1, max_n + 1):
        for payer in PAYER_BEHAVIORS:
            for combo in itertools.product(PAYEE_BEHAVIORS, repeat=n):
                yield n, payer, combo


class TestDifferential:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_engine_matches_reference(self, n):
        fees = [3, 5, 7][:n]
        mismatches = []
        for _, payer, combo in (c for c in _cases(n) if c[0] == n):
            expected = ideal_exchange(fees, combo, payer, penalty=100)
            actual, _ = run_exchange(fees, combo, payer, penalty=100)
            if actual != expected:
                mismatches.append((str(payer), [str(b) for b in combo]))
        assert not mismatches, mismatches[:3]

    def test_withheld_unlock_enforced(self):
        actual, world = run_exchange([1, 1, 1], [HONEST, WITHHOLD, HONEST])
        assert actual.rounds("enforced") and len(actual.rounds("logged")) == 3
        ops = [r.op for r in world.judge.records]
        assert ops == ["enforce", "log", "log", "log"]


class TestLemmas:
    """Safety properties over the whole behavior library, n <= 3."""

    def test_controllable(self):
        # nothing leaves the payer before the release
        for n, payer, combo in _cases(3):
            t = ideal_exchange([2] * n, combo, payer)
            released = t.rounds("released")
            for r in t.rounds("settled").values():
                assert released and r > released[0]

    def test_atomic(self):
        # a settled hop means every hop below settled or its payee was punished
        for n, payer, combo in _cases(3):
            t = ideal_exchange([2] * n, combo, payer)
            settled, punished = t.rounds("settled"), t.rounds("punished")
            for i in settled:
                for j in range(i + 1, n + 1):
                    assert j in settled or punished

    def test_honest_payees_never_lose(self):
        for n, payer, combo in _cases(3):
            t = ideal_exchange([2] * n, combo, payer, penalty=100)
            for i, b in enumerate(combo, 1):
                if b.honest:
                    assert t.deltas[i] >= 0
