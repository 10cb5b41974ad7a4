import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from unidym import cli
from unidym.errors import InvariantError, PreconditionError
from unidym.harness import (ConfigError, ExperimentConfig, ResultRecord, case_rng, emit, parse_flat, parse_grid,
                            plot, read_csv, read_jsonl, run_experiment)
from unidym.harness.records import body_of, fmt_number, make_record, sort_records

BLOWUP = """experiment.id = schwarzian-blowup
map.params = 1, 0.01
blowup.grid = 101
output.dir = {out}
"""


def _rec(i, margin=0.5, flags=()):
    return ResultRecord("demo", {"i": i, "a": 0.1 * i}, {"x": 1.0 / (i + 1)}, {"b": 0.0}, margin,
                        "pass" if not flags else "flag", flags)


def test_parse_flat():
    kv = parse_flat("# comment\na = 1\n\nb.c = x, y  # trailing\n")
    assert kv == {"a": "1", "b.c": "x, y"}
    with pytest.raises(ConfigError):
        parse_flat("a = 1\na = 2")
    with pytest.raises(ConfigError):
        parse_flat("no equals sign")


def test_parse_grid():
    assert parse_grid("1, 0.1") == (1.0, 0.1)
    assert parse_grid("") == ()
    assert parse_grid("linspace(0, 1, 3)") == (0.0, 0.5, 1.0)
    assert parse_grid("logspace(-2, 0, 3)") == pytest.approx((0.01, 0.1, 1.0))
    with pytest.raises(ConfigError):
        parse_grid("linspace(0, 1)")
    with pytest.raises(ConfigError):
        parse_grid("1, two")


def test_config_mapping_and_validation():
    cfg = ExperimentConfig.from_mapping(
        {"map.params": "1, 2", "tol.rel0": "1e-8", "run.seed": "5", "output.format": "jsonl", "blowup.grid": "7"},
        "schwarzian-blowup")
    assert cfg.grid((9.0,)) == (1.0, 2.0) and cfg.tol("rel0") == 1e-8 and cfg.seed == 5
    assert cfg.opt("blowup.grid", 3, int) == 7 and cfg.opt("missing", "0.5", float) == 0.5
    cfg.validate()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"output.format": "xml"}, "schwarzian-blowup").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"experiment.id": "chains"}, "schwarzian-blowup")
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig(experiment="nope"))


def test_empty_grid_gives_no_records():
    cfg = ExperimentConfig.from_mapping({"map.params": ""}, "schwarzian-blowup")
    assert run_experiment(cfg) == []


def test_emit_csv_single_record(tmp_path):
    path = emit([_rec(1)], tmp_path / "one.csv", "csv", "demo", 3)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# unidym experiment=demo seed=3")
    assert len(lines) == 3
    (row,) = read_csv(path)
    assert row["param.a"] == "0.10000000000000001" and row["status"] == "pass"


def test_emit_jsonl_round_trip(tmp_path):
    recs = sort_records([_rec(i, margin=(-1.0 if i == 2 else i), flags=(("neutral",) if i == 3 else ()))
                         for i in range(1000)])
    path = emit(recs, tmp_path / "many.jsonl", "jsonl", "demo", 1)
    assert "meta" in json.loads(path.read_text().splitlines()[0])
    back = read_jsonl(path)
    assert len(back) == 1000 and back == recs


def test_special_numbers_survive():
    assert fmt_number(math.nan) == "NaN" and fmt_number(-math.inf) == "-Infinity"
    r = make_record("demo", {"k": 1}, {"m": math.inf}, {}, math.nan, 1e-9)
    assert r.margin != r.margin


def test_judge_statuses():
    assert make_record("d", {}, {}, {}, -1e-12, 1e-9).status == "pass"
    assert make_record("d", {}, {}, {}, -1e-3, 1e-9).status == "fail"
    assert make_record("d", {}, {}, {}, 1.0, 1e-9, ("hypothesis",)).status == "flag"


def test_case_rng_is_keyed_by_seed_and_counter():
    a = case_rng(7, 1).random(4)
    assert (a == case_rng(7, 1).random(4)).all()
    assert not (a == case_rng(7, 2).random(4)).any()
    assert not (a == case_rng(8, 1).random(4)).any()


def test_plot_smoke_and_errors(tmp_path):
    path = plot([_rec(i) for i in range(20)], "margin-histogram", tmp_path / "h.svg")
    text = path.read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text
    again = plot([_rec(i) for i in range(20)], "margin-histogram", tmp_path / "h2.svg")
    assert again.read_text() == text
    with pytest.raises(PreconditionError):
        plot([], "margin-histogram", tmp_path / "e.svg")
    with pytest.raises(PreconditionError):
        plot([_rec(1)], "pie", tmp_path / "p.svg")


def test_cli_runs_and_is_deterministic(tmp_path):
    cfg = tmp_path / "b.cfg"
    cfg.write_text(BLOWUP.format(out=tmp_path / "o"))
    assert cli.main(["schwarzian-blowup", "--config", str(cfg), "--plot", "margin-histogram"]) == 0
    first = body_of(tmp_path / "o" / "schwarzian-blowup.csv")
    assert (tmp_path / "o" / "schwarzian-blowup-margin-histogram.svg").exists()
    assert cli.main(["schwarzian-blowup", "--config", str(cfg), "--format", "jsonl"]) == 0
    assert cli.main(["schwarzian-blowup", "--config", str(cfg)]) == 0
    assert body_of(tmp_path / "o" / "schwarzian-blowup.csv") == first
    assert all(r.status == "pass" for r in read_jsonl(tmp_path / "o" / "schwarzian-blowup.jsonl"))


def test_cli_exit_codes(tmp_path, monkeypatch):
    cfg = tmp_path / "b.cfg"
    cfg.write_text(BLOWUP.format(out=tmp_path / "o"))
    assert cli.main(["no-such-experiment", "--config", str(cfg)]) == 2
    assert cli.main(["schwarzian-blowup", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["schwarzian-blowup"]) == 2
    empty = tmp_path / "e.cfg"
    empty.write_text("map.params =\n")
    assert cli.main(["schwarzian-blowup", "--config", str(empty), "--out", str(tmp_path / "e")]) == 0
    assert cli.main(["schwarzian-blowup", "--config", str(empty), "--out", str(tmp_path / "e"),
                     "--plot", "margin-histogram"]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["schwarzian-blowup", "--config", str(cfg), "--out", str(blocker / "sub")]) == 3

    def boom(cfg):
        raise InvariantError("broken")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert cli.main(["schwarzian-blowup", "--config", str(cfg)]) == 4


@given(st.lists(st.tuples(st.integers(0, 5), st.floats(-1, 1)), min_size=1, max_size=20))
def test_record_order_ignores_input_order(items):
    recs = [ResultRecord("d", {"k": k, "v": v}, {}, {}, 0.0) for k, v in items]
    assert sort_records(recs) == sort_records(list(reversed(recs)))
