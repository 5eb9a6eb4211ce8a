import json

from click.testing import CliRunner

from relaypay.cli import bundled_suite, main

from relaypay.config import ScenarioConfig, dump_config

from graphs import small_config


def invoke(*args):
    return CliRunner().invoke(main, list(map(str, args)))


def write(tmp_path, config, name="s.yaml"):
    path = tmp_path / name
    path.write_text(dump_config(config))
    return path


def test_run_writes_trace_and_metrics(tmp_path):
    out = tmp_path / "out"
    result = invoke("run", "--config", bundled_suite() / "wormhole.yaml", "--out", out)
    assert result.exit_code == 0, result.output
    assert "PASS expect:protected:R2.2" in result.output
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["outcome"] == "enforced" and all(metrics["verdicts"].values())
    assert (out / "trace.jsonl").read_text().count("\n") > 10


def test_run_fails_on_unmet_expectation(tmp_path):
    config = ScenarioConfig.model_validate(small_config([1]).model_dump() | {"expect": {"outcome": "disputed"}})
    result = invoke("run", "--config", write(tmp_path, config))
    assert result.exit_code == 1 and "FAIL expect:outcome" in result.output


def test_run_rejects_invalid_file(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("name: x\nprice: 5\npaths: [{fees: [9]}]\njudge: {b_max: 20}\n")
    result = invoke("run", "--config", path)
    assert result.exit_code == 2 and "invalid scenario" in result.output


def test_seed_override_is_reproducible(tmp_path):
    path = write(tmp_path, small_config([2]))
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    for out, seed in ((a, 7), (b, 7), (c, 8)):
        assert invoke("run", "--config", path, "--seed", seed, "--out", out).exit_code == 0
    assert (a / "trace.jsonl").read_bytes() == (b / "trace.jsonl").read_bytes()
    assert (a / "trace.jsonl").read_bytes() != (c / "trace.jsonl").read_bytes()


def test_overhead_table_and_csv(tmp_path):
    csv_path = tmp_path / "o.csv"
    result = invoke("overhead", "--hops", "0,10", "--chunk-sizes", "65536", "--csv", csv_path)
    assert result.exit_code == 0, result.output
    assert "970" in result.output
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("hops,") and len(lines) == 3


def test_matrix_on_custom_suite(tmp_path):
    write(tmp_path, small_config([1]), "a.yaml")
    write(tmp_path, small_config([2], {"R1.2": "garbage-encrypt"}), "b.yaml")
    report = tmp_path / "m.json"
    result = invoke("matrix", "--suite", tmp_path, "--json", report)
    assert result.exit_code == 0, result.output
    rows = json.loads(report.read_text())
    assert [r["outcome"] for r in rows] == ["delivered", "disputed"]
    assert "2/2 scenarios pass" in result.output


def test_schema_is_json():
    result = invoke("schema")
    assert json.loads(result.output)["title"] == "ScenarioConfig"


def test_inspect_filters(tmp_path):
    out = tmp_path / "out"
    invoke("run", "--config", write(tmp_path, small_config([2], {"R1.2": "withhold-unlock"})), "--out", out)
    trace = out / "trace.jsonl"
    judge = invoke("inspect", trace, "--kind", "judge")
    assert judge.exit_code == 0 and "judge:log" in judge.output
    summary = invoke("inspect", trace, "--actor", "R1.1", "--summary")
    assert "judge:log" in summary.output and "send:" in summary.output
