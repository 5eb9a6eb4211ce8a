"""relaypay command line: run scenarios, sweep overheads, summarize suites."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
import json
from pathlib import Path
import sys

import click
from pydantic import ValidationError

from .config import config_schema, load_config
from .sim.engine import run
from .sim.overhead import format_table, overhead_report, to_csv


def bundled_suite() -> Path:
    return Path(str(resources.files("relaypay") / "scenarios"))


def _parse_range(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


class InvalidScenario(click.ClickException):
    exit_code = 2


def _load(path: Path):
    try:
        return load_config(path)
    except ValidationError as exc:
        raise InvalidScenario(f"{path}: invalid scenario\n{exc}") from None
    except (OSError, ValueError) as exc:
        raise InvalidScenario(f"{path}: {exc}") from None


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Simulate fair content delivery over payment channels."""


@main.command("run")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Write trace.jsonl and metrics.json here.")
def cmd_run(config_path: Path, seed: int | None, out: Path | None):
    """Run one scenario; exit 0 iff every verdict holds, 1 if any fails, 2 if the file is invalid."""
    config = _load(config_path)
    result = run(config, seed)
    m = result.metrics
    click.echo(f"scenario {config.name}  seed {result.seed}  outcome {m.outcome}  rounds {m.rounds}")
    click.echo(f"judge ops {m.judge_op_counts() or '{}'}")
    for party, delta in m.deltas.items():
        click.echo(f"  {party:>6} {delta:+d}")
    for name, ok in result.verdicts.items():
        click.echo(f"{'PASS' if ok else 'FAIL'} {name}")
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "trace.jsonl").write_text(result.trace_lines())
        (out / "metrics.json").write_text(result.metrics_json())
    sys.exit(0 if result.passed else 1)


@main.command("overhead")
@click.option("--hops", default="0-10", show_default=True, help="Hop counts, e.g. 0-10 or 1,5,10.")
@click.option("--chunk-sizes", default="2048,16384,65536", show_default=True)
@click.option("--chunk-count", default=1, show_default=True, type=int)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--measure/--no-measure", default=True, show_default=True, help="Cross-check against a simulated run.")
def cmd_overhead(hops: str, chunk_sizes: str, chunk_count: int, csv_path: Path | None, measure: bool):
    """Per-chunk commitment overhead by hop count and chunk size."""
    rows = overhead_report(_parse_range(hops), _parse_range(chunk_sizes), chunk_count, measure)
    click.echo(format_table(rows))
    if csv_path is not None:
        csv_path.write_text(to_csv(rows))
    if not all(r.matches for r in rows):
        raise click.ClickException("measured overhead differs from the model")


def _run_one(path: str) -> dict:
    config = load_config(path)
    result = run(config)
    return {
        "scenario": config.name,
        "file": Path(path).name,
        "outcome": result.metrics.outcome,
        "judge_ops": result.metrics.judge_op_counts(),
        "passed": result.passed,
        "failed": [k for k, v in result.verdicts.items() if not v],
    }


@main.command("matrix")
@click.option("--suite", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None, help="Directory of scenario files; default the bundled suite.")
@click.option("--json", "json_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--jobs", default=1, show_default=True, type=int, help="Parallel worker processes.")
def cmd_matrix(suite: Path | None, json_path: Path | None, jobs: int):
    """Run every scenario in a suite and summarize verdicts and judge operations."""
    suite = suite or bundled_suite()
    files = sorted(str(p) for p in suite.glob("*.yaml"))
    if not files:
        raise click.ClickException(f"no scenarios in {suite}")
    for f in files:
        _load(Path(f))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_run_one, files))
    else:
        rows = [_run_one(f) for f in files]
    width = max(len(r["scenario"]) for r in rows)
    for r in rows:
        ops = ",".join(f"{k}={v}" for k, v in r["judge_ops"].items()) or "0"
        status = "PASS" if r["passed"] else "FAIL " + ",".join(r["failed"])
        click.echo(f"{r['scenario']:<{width}}  {r['outcome']:<22}  ops {ops:<28}  {status}")
    if json_path is not None:
        json_path.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    failed = sum(not r["passed"] for r in rows)
    click.echo(f"{len(rows) - failed}/{len(rows)} scenarios pass")
    sys.exit(1 if failed else 0)


@main.command("schema")
def cmd_schema():
    """Print the scenario JSON schema."""
    click.echo(json.dumps(config_schema(), indent=2))


@main.command("inspect")
@click.argument("trace", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--actor", default=None)
@click.option("--kind", default=None, help="Prefix match, e.g. judge or send:chunk.")
@click.option("--summary", is_flag=True, help="Count records per kind instead of listing them.")
def cmd_inspect(trace: Path, actor: str | None, kind: str | None, summary: bool):
    """Filter or summarize a trace.jsonl file."""
    records = [json.loads(line) for line in trace.read_text().splitlines() if line.strip()]
    picked = [
        r for r in records
        if (actor is None or r["actor"] == actor) and (kind is None or r["kind"].startswith(kind))
    ]
    if summary:
        for k, n in sorted(Counter(r["kind"] for r in picked).items()):
            click.echo(f"{k:<24} {n}")
        return
    for r in picked:
        click.echo(f"{r['round']:>4} {r['actor']:>6} {r['kind']:<20} {r['size']:>8} {r['digest']} {r['detail']}")


if __name__ == "__main__":
    main()
