import random

import pytest
from hypothesis import given, settings, strategies as st

from relaypay.crypto import ae_keygen, commit
from relaypay.pcn import (
    ChannelNetwork,
    InsufficientBalance,
    Ledger,
    UnknownChannel,
    construct_condition,
    eval_condition,
    lock,
    order_secrets,
    unlock,
)


@pytest.fixture
def world():
    r = random.Random(3)
    keys = {"A": ae_keygen(r), "B": ae_keygen(r)}
    net = ChannelNetwork({k: v.public for k, v in keys.items()})
    net.open("ab", "A", "B", 10, 0)
    secrets = [b"s1" * 24, b"s2" * 24]
    hashes = [commit(s, r) for s in secrets]
    return net, keys, secrets, hashes


class TestLedger:
    def test_transfer(self):
        led = Ledger({"A": 100, "B": 0})
        assert led.transfer("A", "B", 40)
        assert led.balances == {"A": 60, "B": 40}

    def test_insufficient(self):
        led = Ledger({"A": 10, "B": 0})
        assert not led.transfer("A", "B", 40)
        assert led.balances == {"A": 10, "B": 0}
        assert led.events[-1].kind == "insufficient"

    def test_zero(self):
        led = Ledger({"A": 1, "B": 0})
        assert led.transfer("A", "B", 0)
        assert led.balances == {"A": 1, "B": 0}

    def test_query_unknown(self):
        with pytest.raises(KeyError):
            Ledger().query("nobody")

    @given(st.lists(st.tuples(st.sampled_from("ABC"), st.sampled_from("ABC"), st.integers(0, 50)), max_size=40))
    def test_conservation(self, moves):
        led = Ledger({"A": 100, "B": 50, "C": 0})
        for a, b, amt in moves:
            led.transfer(a, b, amt)
            assert min(led.balances.values()) >= 0
        assert led.total() == 150


class TestCondition:
    def test_eval(self, world):
        _, _, secrets, hashes = world
        cond = construct_condition(hashes, 5)
        assert eval_condition(cond, secrets, 4)
        assert eval_condition(cond, secrets, 5)
        assert not eval_condition(cond, secrets, 6)
        assert not eval_condition(cond, secrets[:1], 4)
        assert not eval_condition(cond, secrets[::-1], 4)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            construct_condition([], 3)

    def test_order_secrets(self, world):
        _, _, secrets, hashes = world
        cond = construct_condition(hashes, 5)
        assert order_secrets(cond, secrets[::-1] + [b"junk"]) == secrets
        assert order_secrets(cond, secrets[:1]) is None


class TestChannel:
    def test_lock_left(self, world):
        net, keys, _, hashes = world
        tx = lock(net, "ab", "A", keys["A"], 5, construct_condition(hashes, 9))
        assert (tx.lb, tx.rb) == (5, 5)
        assert net.query("ab") == (10, 0)

    def test_lock_right(self):
        r = random.Random(1)
        keys = {"A": ae_keygen(r), "B": ae_keygen(r)}
        net = ChannelNetwork({k: v.public for k, v in keys.items()})
        net.open("ab", "A", "B", 0, 10)
        tx = lock(net, "ab", "B", keys["B"], 4, construct_condition([commit(b"x", r)], 3))
        assert (tx.lb, tx.rb) == (4, 6)

    def test_lock_insufficient(self, world):
        net, keys, _, hashes = world
        with pytest.raises(InsufficientBalance):
            lock(net, "ab", "A", keys["A"], 11, construct_condition(hashes, 9))

    def test_update_succeeds_and_reveals(self, world):
        net, keys, secrets, hashes = world
        tx = lock(net, "ab", "A", keys["A"], 5, construct_condition(hashes, 9))
        ev = net.update(unlock(tx, "B", keys["B"], secrets), 4)
        assert ev.kind == "updated" and ev.secrets == tuple(secrets)
        assert net.query("ab") == (5, 5)

    def test_wrong_preimage(self, world):
        net, keys, secrets, hashes = world
        tx = lock(net, "ab", "A", keys["A"], 5, construct_condition(hashes, 9))
        ev = net.update(unlock(tx, "B", keys["B"], [secrets[0], b"bad"]), 4)
        assert ev.kind == "update-fail"
        assert net.query("ab") == (10, 0)

    def test_after_deadline(self, world):
        net, keys, secrets, hashes = world
        tx = lock(net, "ab", "A", keys["A"], 5, construct_condition(hashes, 9))
        assert net.update(unlock(tx, "B", keys["B"], secrets), 10).kind == "update-fail"
        # expiry is monotone
        assert net.update(unlock(tx, "B", keys["B"], secrets), 11).kind == "update-fail"

    def test_tampered_tx(self, world):
        net, keys, secrets, hashes = world
        tx = lock(net, "ab", "A", keys["A"], 5, construct_condition(hashes, 9))
        forged = type(tx)(tx.cid, 0, 10, tx.cond, tx.initiator, tx.sig)
        assert net.update(unlock(forged, "B", keys["B"], secrets), 4).kind == "update-fail"

    def test_replay_rejected(self, world):
        net, keys, secrets, hashes = world
        tx = lock(net, "ab", "A", keys["A"], 5, construct_condition(hashes, 9))
        req = unlock(tx, "B", keys["B"], secrets)
        assert net.update(req, 4).kind == "updated"
        assert net.update(req, 5).kind == "update-fail"

    def test_unknown_channel(self, world):
        net, *_ = world
        with pytest.raises(UnknownChannel):
            net.query("zz")

    @settings(max_examples=30)
    @given(st.lists(st.integers(0, 12), max_size=8))
    def test_sum_conserved(self, amounts):
        r = random.Random(2)
        keys = {"A": ae_keygen(r), "B": ae_keygen(r)}
        net = ChannelNetwork({k: v.public for k, v in keys.items()})
        net.open("ab", "A", "B", 10, 10)
        s = b"q" * 48
        h = commit(s, r)
        for i, amt in enumerate(amounts):
            payer = "A" if i % 2 == 0 else "B"
            try:
                tx = lock(net, "ab", payer, keys[payer], amt, construct_condition([h], 100 + i))
            except InsufficientBalance:
                continue
            net.update(unlock(tx, "B" if payer == "A" else "A", keys["B" if payer == "A" else "A"], [s]), i)
            assert sum(net.query("ab")) == 20
