"""Acceptance criteria, one test each; the terminal summary prints PASS/FAIL per criterion."""

import itertools
import random
import time

import pytest

from relaypay.behavior import HONEST, Behavior
from relaypay.cli import bundled_suite
from relaypay.commitments import ext_key, extract, pome_ver, pomm_ver
from relaypay.config import CUSTOMER, PROVIDER, load_config
from relaypay.payment import PAYEE_BEHAVIORS, PAYER_BEHAVIORS, ideal_exchange, timelocks_multi
from relaypay.sim.adversary import pairwise_collusions, single_corruptions
from relaypay.sim.engine import Simulation, run
from relaypay.sim.exchange import run_exchange
from relaypay.sim.overhead import analytic_per_chunk, measure_run

from graphs import small_config
from test_commitments import deliver, flat, session

parse = Behavior.parse


@pytest.mark.criterion(1)
def test_optimistic_path_costs_nothing(criterion):
    config = load_config(bundled_suite() / "honest-two-paths.yaml")
    start = time.perf_counter()
    result = run(config)
    elapsed = time.perf_counter() - start
    sim, m = result.simulation, result.metrics
    fees = {r: f for pc, names in zip(config.paths, config.relayer_names()) for r, f in zip(names, pc.fees)}
    exact_fees = all(m.deltas[r] == fee for r, fee in fees.items())
    ok = (
        m.judge_op_total == 0
        and sim.customer.content == sim.content
        and exact_fees
        and m.deltas[PROVIDER] == config.price - sum(fees.values())
        and m.deltas[CUSTOMER] == -config.price
        and elapsed < 5
    )
    criterion(ok, f"judge ops {m.judge_op_total}, content identical {sim.customer.content == sim.content}, "
                  f"fees exact {exact_fees}, provider {m.deltas[PROVIDER]:+d}, {elapsed:.2f}s")
    assert ok


def _graphs():
    for count in range(1, 4):
        for length in range(1, 6):
            yield [length] * count


@pytest.mark.criterion(2)
def test_pessimistic_footprint_is_constant(criterion):
    bad = []
    graphs = list(_graphs())
    for lengths in graphs:
        last = f"R1.{lengths[0]}"
        for behavior, op in (("garbage-encrypt", "pome"), ("wrong-mask", "pomm")):
            m = run(small_config(lengths, {last: behavior})).metrics
            if m.judge_ops != {CUSTOMER: {op: 1}}:
                bad.append((lengths, behavior, m.judge_ops))
        m = run(small_config(lengths, {last: "withhold-unlock"})).metrics
        for k, n in enumerate(lengths, 1):
            for i in range(1, n + 1):
                want = {"log": 1} if k == 1 else {}
                if m.judge_ops.get(f"R{k}.{i}", {}) != want:
                    bad.append((lengths, f"R{k}.{i}", m.judge_ops))
    ok = not bad
    criterion(ok, f"{len(graphs)} graphs (lengths 1-5 x paths 1-3): dispute = 1 op, enforcement = 1 log per relayer"
                  + (f"; first mismatch {bad[0]}" if bad else ""))
    assert ok, bad[:3]


@pytest.mark.criterion(3)
def test_enforcement_dichotomy(criterion):
    start = time.perf_counter()
    bad, runs = [], 0
    for n in range(1, 5):
        for responsive in itertools.product([True, False], repeat=n):
            payees = [parse("withhold-unlock") if r else parse("silent-at(unlock)") for r in responsive]
            trace, world = run_exchange([1] * n, payees, penalty=100)
            runs += 1
            opened = trace.rounds("enforced")
            if not opened:
                bad.append((responsive, "never enforced"))
                continue
            by = opened[0] + n + 1
            logged = {i for i, r in trace.rounds("logged").items() if r <= by}
            punished = {i: r for i, r in trace.rounds("punished").items() if r <= by}
            missing = [i for i in range(1, n + 1) if i not in logged]
            if not missing:
                good = not punished
            else:
                target = f"U{max(missing)}"
                good = list(punished) == [max(missing)] and world.ledger.balances[target] == 100
            if not good:
                bad.append((responsive, logged, punished))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    criterion(ok, f"{runs} responsive subsets for n <= 4, {elapsed:.2f}s")
    assert ok, bad[:3]


def _middle_protected(deltas, settled, fee):
    return deltas >= 0 and (deltas >= fee or not ({1, 2} & set(settled)))


@pytest.mark.criterion(4)
def test_wormhole_resistance(criterion):
    # payment engine: every behavior of P, R1, R3 around an honest R2, wormhole pairs included
    payer = [*PAYER_BEHAVIORS, parse("wormhole-collude(U3)")]
    first = [*PAYEE_BEHAVIORS, parse("wormhole-collude(U3)")]
    third = [*PAYEE_BEHAVIORS, parse("wormhole-collude(U1)"), parse("wormhole-collude(U0)")]
    bad, engine_runs = [], 0
    for p, a, c in itertools.product(payer, first, third):
        trace, _ = run_exchange([3, 5, 7], [a, HONEST, c], p)
        engine_runs += 1
        if not _middle_protected(trace.deltas[2], trace.rounds("settled"), 5):
            bad.append((str(p), str(a), str(c), trace.deltas))
    # full protocol: single and pairwise schedules over P, R1.1, R1.3
    base = small_config([3])
    parties = [PROVIDER, "R1.1", "R1.3"]
    located = {"R1.1": (1, 1), "R1.3": (1, 3)}
    schedules = [*single_corruptions(parties), *pairwise_collusions(parties, located)]
    for adversary in schedules:
        result = run(base.with_adversary(adversary))
        if not result.verdicts["protected:R1.2"]:
            bad.append(adversary)
    ok = not bad
    criterion(ok, f"honest middle of a 3-relayer path: {engine_runs} engine runs, {len(schedules)} full runs"
                  + (f"; first failure {bad[0]}" if bad else ""))
    assert ok, bad[:3]


@pytest.mark.criterion(5)
def test_fairness_sweep(criterion):
    base = small_config([2, 3])
    sim = Simulation(base)
    relayers = sim.session.graph.relayers
    parties = [PROVIDER, *relayers, CUSTOMER]
    located = {r: (sim.session.graph.locate(r)[0].index, sim.session.graph.locate(r)[1]) for r in relayers}
    schedules = [*single_corruptions(parties), *pairwise_collusions(parties, located)]
    start = time.perf_counter()
    failures = []
    for adversary in schedules:
        result = run(base.with_adversary(adversary))
        if not result.passed:
            failures.append((adversary, [k for k, v in result.verdicts.items() if not v]))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    criterion(ok, f"{len(schedules)} schedules on the 2-path graph, {len(failures)} failing, {elapsed:.1f}s")
    assert ok, failures[:3]


def _extraction_cases():
    for count in (1, 2):
        for lengths in itertools.product(range(1, 4), repeat=count):
            yield list(lengths)


@pytest.mark.criterion(6)
def test_extraction_dichotomy(criterion):
    bad, cases = [], 0
    chunks = [bytes([j]) * 48 for j in range(1, 5)]
    for lengths in _extraction_cases():
        jobs = [[1, 2], [3, 4]] if len(lengths) == 2 else [[1, 2, 3, 4]]
        # honest: both extractions open everything
        r = random.Random(f"honest:{lengths}")
        provider, paths = session(r, lengths)
        keys = ext_key(*flat(provider, paths))
        out = extract(
            provider.sk, [[p.sk for p in path] for path in paths],
            deliver(r, provider, paths, chunks, jobs), provider.pk, [[p.pk for p in path] for path in paths],
        )
        cases += 1
        if keys.keys is None or out.content != b"".join(chunks):
            bad.append((lengths, "honest"))
        positions = [(0, 0)] + [(k + 1, i + 1) for k, n in enumerate(lengths) for i in range(n)]
        for slot, (k, i) in enumerate(positions):
            # bad mask at one committer: PoMM against exactly that committer
            r = random.Random(f"mask:{lengths}:{k}:{i}")
            provider, paths = session(r, lengths, bad_mask=(k, i))
            cheater = provider if k == 0 else paths[k - 1][i - 1]
            got = ext_key(*flat(provider, paths))
            cases += 1
            if not (got.keys is None and got.position == slot and got.tid == cheater.pk and pomm_ver(got.proof, got.tid)):
                bad.append((lengths, "mask", k, i))
        for k, n in enumerate(lengths):
            for layer in range(n + 1):
                # garbage at one encryption layer: PoME against exactly that layer
                r = random.Random(f"enc:{lengths}:{k}:{layer}")
                provider, paths = session(r, lengths)
                cheater = provider if layer == 0 else paths[k][layer - 1]
                out = extract(
                    provider.sk, [[p.sk for p in path] for path in paths],
                    deliver(r, provider, paths, chunks, jobs, garbage=(k, layer)),
                    provider.pk, [[p.pk for p in path] for path in paths],
                )
                cases += 1
                if not (out.content is None and out.offender == (k, layer) and out.tid == cheater.pk
                        and pome_ver(out.proof, out.tid)):
                    bad.append((lengths, "enc", k, layer))
    ok = not bad
    criterion(ok, f"{cases} honest and single-corruption cases over paths of length <= 3")
    assert ok, bad[:3]


@pytest.mark.criterion(7)
def test_differential_oracle(criterion):
    fees = [3, 5, 7]
    total, mismatches = 0, []
    for n in range(1, 4):
        for payer in PAYER_BEHAVIORS:
            for combo in itertools.product(PAYEE_BEHAVIORS, repeat=n):
                total += 1
                expected = ideal_exchange(fees[:n], combo, payer, penalty=100)
                actual, _ = run_exchange(fees[:n], combo, payer, penalty=100)
                if actual != expected:
                    mismatches.append((str(payer), [str(b) for b in combo]))
    ok = not mismatches
    criterion(ok, f"{total - len(mismatches)}/{total} engine traces equal the reference timetable")
    assert ok, mismatches[:3]


@pytest.mark.criterion(8)
def test_overhead_reproduction(criterion):
    per_chunk, total, _ = measure_run(10, 65536, 8)
    ok = per_chunk == analytic_per_chunk(10) == 970 and total < 0.015
    criterion(ok, f"10 hops, 8 x 64 KiB: {per_chunk} B per chunk, {100 * total:.3f}% total overhead")
    assert ok


@pytest.mark.criterion(9)
def test_timelock_sanity(criterion):
    r = random.Random(2024)
    bad = []
    for _ in range(1000):
        lengths = [r.randint(1, 6) for _ in range(r.randint(1, 5))]
        t = timelocks_multi(lengths)
        for k, n in enumerate(lengths, 1):
            good = t.customer_deadline > t.hop(k, 1)
            good &= all(t.hop(k, i) > t.hop(k, i + 1) for i in range(1, n))
            good &= all(t.hop(k, i) > t.enforce_deadline + n - i for i in range(1, n + 1))
            if not good:
                bad.append(lengths)
    ok = not bad
    criterion(ok, "1000 random graphs, up to 5 paths and 6 hops")
    assert ok, bad[:3]


@pytest.mark.criterion(10)
def test_determinism(criterion):
    files = sorted(bundled_suite().glob("*.yaml"))

    def snapshot():
        out = []
        for f in files:
            result = run(load_config(f))
            out.append((result.trace_lines(), result.metrics_json()))
        return out

    ok = snapshot() == snapshot()
    criterion(ok, f"{len(files)} bundled scenarios run twice, traces and metrics byte-identical")
    assert ok
