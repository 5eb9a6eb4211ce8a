import pytest
from pydantic import ValidationError

from relaypay.config import ScenarioConfig, config_schema, dump_config, load_config

BASE = {"name": "t", "price": 10, "paths": [{"fees": [1, 2]}, {"fees": [3]}], "judge": {"b_max": 20}}


def make(**changes):
    return ScenarioConfig.model_validate(BASE | changes)


def test_defaults():
    c = make()
    assert c.relayer_names() == [["R1.1", "R1.2"], ["R2.1"]]
    assert c.jobs() == [[1, 2, 3, 4], [5, 6, 7, 8]]
    assert c.content.total == 8 * 65536


def test_yaml_round_trip(tmp_path):
    c = make(adversary={"R1.1": "withhold-unlock"}, expect={"outcome": "enforced", "judge_ops": {"log": 2}})
    path = tmp_path / "s.yaml"
    path.write_text(dump_config(c))
    assert load_config(path) == c


def test_uneven_jobs():
    c = make(content={"chunk_size": 16, "chunk_count": 5})
    assert c.jobs() == [[1, 2, 3], [4, 5]]


@pytest.mark.parametrize(
    "changes",
    [
        {"unknown": 1},
        {"price": 2},  # below the fees
        {"judge": {"b_max": 10}},  # not above the price
        {"paths": [{"fees": [0]}]},
        {"paths": [{"fees": [1], "relayers": ["a", "b"]}]},
        {"paths": [{"fees": [1], "relayers": ["P"]}]},
        {"paths": [{"fees": [1], "job": [1, 2]}, {"fees": [1], "job": [2, 3, 4, 5, 6, 7, 8]}]},
        {"paths": [{"fees": [1], "job": list(range(1, 9))}, {"fees": [1]}]},
        {"mode": "single"},
        {"adversary": {"Z": "silent-at(setup)"}},
        {"adversary": {"R1.1": "dance"}},
        {"adversary": {"R1.1": "wormhole-collude(Q)"}},
        {"timing": {"delivery_deadline": 3}},
        {"content": {"chunk_size": 4, "chunk_count": 2, "length": 3}},
    ],
)
def test_rejects(changes):
    with pytest.raises((ValidationError, ValueError)):
        make(**changes).jobs()


def test_with_adversary_clears_expectations():
    c = make(expect={"outcome": "delivered"}).with_adversary({"C": "silent-at(pay)"}, name="x")
    assert c.name == "x" and c.expect.outcome is None and c.adversary == {"C": "silent-at(pay)"}


def test_schema_lists_fields():
    props = config_schema()["properties"]
    assert {"paths", "judge", "adversary", "expect"} <= set(props)
