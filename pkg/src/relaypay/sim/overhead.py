"""Bandwidth overhead: the analytic per-chunk model next to a measured run.

A path of h hops has h - 1 relayers, so a chunk reaching the customer
carries h encryption commitments of |h| + |σ| = 97 bytes each. Setup,
hash lists and payment messages are counted separately.
"""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
import io
from typing import Iterable

from ..config import ScenarioConfig
from .wire import ENC_COMMITMENT_WIRE


@dataclass(frozen=True)
class OverheadRow:
    hops: int
    chunk_size: int
    chunk_count: int
    analytic_per_chunk: int
    measured_per_chunk: int | None
    final_link_ratio: float  # commitment bytes per payload byte on the customer's link
    total_ratio: float | None  # every overhead byte on every link per payload byte on every link
    setup_bytes: int | None

    @property
    def efficiency(self) -> float:
        return 1 / (1 + self.final_link_ratio)

    @property
    def matches(self) -> bool:
        return self.measured_per_chunk is None or self.measured_per_chunk == self.analytic_per_chunk


def analytic_per_chunk(hops: int) -> int:
    """Zero hops means nothing is relayed: only setup traffic remains."""
    return hops * ENC_COMMITMENT_WIRE


def overhead_config(hops: int, chunk_size: int, chunk_count: int) -> ScenarioConfig:
    relayers = max(hops - 1, 0)
    fees = [1] * relayers
    return ScenarioConfig.model_validate(
        {
            "name": f"overhead-{hops}-hops",
            "price": relayers + 1,
            "content": {"chunk_size": chunk_size, "chunk_count": chunk_count},
            "paths": [{"fees": fees}],
            "judge": {"b_max": relayers + 2},
        }
    )


SETUP_KINDS = ("setup", "peer-hash", "sync-hash", "init", "deliver")


def measure_run(hops: int, chunk_size: int, chunk_count: int) -> tuple[int, float, int]:
    """(per-chunk commitment bytes on the customer link, total ratio, setup bytes)."""
    from .engine import Simulation
    from .wire import split_size

    sim = Simulation(overhead_config(hops, chunk_size, chunk_count))
    sim.run()
    last = sim.session.graph.paths[0]
    sender = last.node(last.length)
    chunk_overhead = setup = overhead = payload = 0
    for m in sim.world.bus.log:
        content, extra = split_size(m.kind, m.payload)
        payload += content
        overhead += extra
        if m.kind == "chunk" and m.sender == sender and m.recipient == "C":
            chunk_overhead += extra
        if m.kind in SETUP_KINDS:
            setup += extra
    return chunk_overhead // chunk_count, overhead / payload, setup


def overhead_report(
    hops: Iterable[int], chunk_sizes: Iterable[int], chunk_count: int = 1, measure: bool = True
) -> list[OverheadRow]:
    rows = []
    for size in chunk_sizes:
        for h in hops:
            per_chunk = analytic_per_chunk(h)
            measured = total = setup = None
            if measure and h > 0:
                measured, total, setup = measure_run(h, size, chunk_count)
            elif measure:
                _, _, setup = measure_run(1, size, chunk_count)
            rows.append(OverheadRow(h, size, chunk_count, per_chunk, measured, per_chunk / size, total, setup))
    return rows


def format_table(rows: list[OverheadRow]) -> str:
    head = f"{'hops':>4} {'chunk':>7} {'model B':>8} {'measured B':>10} {'final link':>10} {'efficiency':>10} {'all links':>9}"
    lines = [head]
    for r in rows:
        measured = "-" if r.measured_per_chunk is None else str(r.measured_per_chunk)
        total = "-" if r.total_ratio is None else f"{100 * r.total_ratio:.3f}%"
        lines.append(
            f"{r.hops:>4} {r.chunk_size:>7} {r.analytic_per_chunk:>8} {measured:>10} "
            f"{100 * r.final_link_ratio:>9.3f}% {100 * r.efficiency:>9.2f}% {total:>9}"
        )
    return "\n".join(lines)


def to_csv(rows: list[OverheadRow]) -> str:
    buf = io.StringIO()
    fields = [*asdict(rows[0]).keys(), "efficiency", "matches"] if rows else []
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for r in rows:
        writer.writerow(asdict(r) | {"efficiency": r.efficiency, "matches": r.matches})
    return buf.getvalue()
