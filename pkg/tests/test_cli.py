import json
from fractions import Fraction

import pytest

from rauzylab import reference_stage
from rauzylab.cli import main
from rauzylab.expansion import continued_fraction, winner_runs
from rauzylab.io import fraction_str, parse_fraction, parse_widths, read_csv, write_csv

TWO = '{"top": [1, 2], "bottom": [2, 1]}'
FOUR = '{"d": 4, "top": [2, 2, 1, 1], "bottom": [4, 4, 3, 3]}'


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_diagram_two_band(tmp_path):
    assert main(["diagram", "--type", TWO, "--out", str(tmp_path)]) == 0
    g = json.loads((tmp_path / "diagram.json").read_text())
    assert len(g["nodes"]) == 1 and len(g["edges"]) == 2
    assert {"diagram.dot", "diagram.json", "sinks.json"} <= set(_files(tmp_path))


def test_diagram_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["diagram", "--type", FOUR, "--out", str(a)]) == 0
    assert main(["diagram", "--type", FOUR, "--out", str(b)]) == 0
    assert _files(a) == _files(b)


def test_type_from_file(tmp_path):
    f = tmp_path / "type.json"
    f.write_text(FOUR)
    assert main(["diagram", "--type", str(f), "--out", str(tmp_path / "o")]) == 0


@pytest.mark.parametrize("bad", ['{"top": [1, 2', '{"top": [1, 1], "bottom": [2]}', '{"top": [1], "bottom": [1], "x": 0}'])
def test_invalid_type_exit_2(tmp_path, bad, capsys):
    assert main(["diagram", "--type", bad, "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def _trace(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_orbit_two_band_cf(tmp_path):
    assert main(["orbit", "--type", TWO, "--widths", "10/17,7/17", "--steps", "100", "--out", str(tmp_path)]) == 0
    recs = _trace(tmp_path / "trace.jsonl")
    assert recs[0]["record"] == "header" and recs[0]["widths"] == ["10/17", "7/17"]
    assert recs[-1] == {"record": "halt", "n": 5, "reason": "equal_critical_widths"}
    winners = [r["winner"] for r in recs if r["record"] == "stage" and r["winner"] is not None]
    runs = [n for _, n in winner_runs(winners)]
    runs[-1] += 1  # the tie is the final cut
    assert runs == continued_fraction(10, 7) == [1, 2, 3]


def test_orbit_inadmissible_exit_3(tmp_path):
    args = ["orbit", "--type", FOUR, "--widths", "1/2,1/4,1/8,1/8", "--steps", "5", "--out", str(tmp_path)]
    assert main(args) == 3


def test_orbit_zero_steps_header_only(tmp_path):
    assert main(["orbit", "--type", TWO, "--widths", "10/17,7/17", "--steps", "0", "--out", str(tmp_path)]) == 0
    recs = _trace(tmp_path / "trace.jsonl")
    assert len(recs) == 1 and recs[0]["record"] == "header"


def test_reference_stage_command(capsys):
    assert main(["reference-stage", "--n-range", "1-20"]) == 0
    out = capsys.readouterr().out
    assert "n=1 p=2/3" in out and "n=10 p=13/24" in out
    assert main(["reference-stage", "--n-range", "0"]) == 1


def test_reference_stage_values():
    rep = reference_stage.check(1)
    assert rep.ok
    assert rep.values["probability"] == Fraction(2, 3)
    assert rep.values["quad_area"] == pytest.approx(1 / 48, rel=1e-12)
    assert rep.values["triangle_area"] == pytest.approx(1 / 72, rel=1e-12)
    assert reference_stage.check(10).values["probability"] == Fraction(13, 24)
    with pytest.raises(ValueError):
        reference_stage.moves(0)


def test_experiments_zero_samples_is_config_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["experiments", "--type", TWO, "--N", "0", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_experiments_two_band_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["experiments", "--type", TWO, "--seed", "7", "--n-samples", "2000", "--steps", "500", "--orbits", "10"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert _files(a) == _files(b)
    summary = json.loads((a / "summary.json").read_text())
    assert summary["passed"] and summary["config"]["seed"] == 7
    header, rows = read_csv(a / "normality.csv")
    assert header["seed"] == "7" and header["N"] == "2000" and header["k"] == "3"
    assert len(rows) == 14


def test_seed_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RAUZYLAB_SEED", "11")
    args = ["experiments", "--type", TWO, "--n-samples", "500", "--steps", "200", "--orbits", "4", "--format", "json"]
    assert main(args + ["--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "summary.json").read_text())["config"]["seed"] == 11


def test_config_file_rejects_unknown_fields(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(SystemExit):
        main(["diagram", "--type", TWO, "--config", str(cfg), "--out", str(tmp_path)])


def test_fraction_io(tmp_path):
    assert fraction_str(Fraction(3, 6)) == "1/2"
    assert fraction_str(2) == "2/1"
    assert parse_fraction("7/17") == Fraction(7, 17)
    assert parse_widths('["1/2", "1/2"]') == [Fraction(1, 2)] * 2
    with pytest.raises(ValueError):
        parse_fraction(0.5)
    path = tmp_path / "t.csv"
    write_csv(path, {"seed": 1, "N": 5}, ["a", "b"], [[1, "x"]])
    header, rows = read_csv(path)
    assert header == {"seed": "1", "N": "5"} and rows == [{"a": "1", "b": "x"}]
