import json

import pytest

from olnd import cli, synth
from olnd.diagram import LayoutDiagram, Placement
from olnd.graph import ComponentKind


@pytest.fixture
def model(tmp_path):
    path = tmp_path / "model.cime"
    path.write_text(synth.fixture_three_level())
    return path


@pytest.fixture
def batch(tmp_path):
    path = tmp_path / "batch.cime"
    path.write_text(synth.corpus_with_five_level(4, "BAD", seed=11))
    return path


def _files(d):
    return sorted(p.name for p in d.iterdir())


def test_generate_one_substation(model, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["generate", "--input", str(model), "--substation", "F", "--out", str(out)]) == 0
    assert _files(out) == ["F.layout.json", "F.svg"]
    doc = json.loads((out / "F.layout.json").read_text())
    assert doc["elements"] and doc["elements"][0]["p"]["image"] == "symbols/bus.json"
    assert "INFO substation=F code=OK" in capsys.readouterr().err


def test_format_subset(model, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["generate", "--input", str(model), "--out", str(out), "--format", "svg"]) == 0
    assert _files(out) == ["F.svg"]


def test_batch_with_a_failing_substation(batch, tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["generate", "--input", str(batch), "--out", str(out), "--format", "json"]) == 2
    assert _files(out) == [f"S00{i}.layout.json" for i in range(4)]
    err = capsys.readouterr().err
    assert "ERROR substation=BAD code=TooManyLevels" in err
    first = {f: (out / f).read_bytes() for f in _files(out)}
    assert cli.main(["generate", "--input", str(batch), "--out", str(out), "--format", "json"]) == 2
    assert {f: (out / f).read_bytes() for f in _files(out)} == first


def test_validate_passes(model, tmp_path):
    out = tmp_path / "rep"
    assert cli.main(["validate", "--input", str(model), "--out", str(out)]) == 0
    doc = json.loads((out / "decency_report.json").read_text())
    assert doc["summary"]["pass_rate"] == 1.0 and doc["substations"]["F"]["passed"] is True


def test_validate_reports_defect(model, tmp_path, monkeypatch):
    def overlapping(name, records, config):
        p = Placement("Load#1", 0, 0, 0, 110, ComponentKind.LOAD, 110)
        return LayoutDiagram(placements=(p, Placement("Load#2", 0, 0, 0, 110, ComponentKind.LOAD, 110)), name=name)

    monkeypatch.setattr(cli, "_layout", overlapping)
    out = tmp_path / "rep"
    assert cli.main(["validate", "--input", str(model), "--out", str(out)]) == 2
    doc = json.loads((out / "decency_report.json").read_text())
    assert doc["summary"]["failures"] == ["F"]
    assert doc["substations"]["F"]["overlap_pairs"] == [["Load#1", "Load#2"]]


def test_missing_input(tmp_path, capsys):
    assert cli.main(["generate", "--input", str(tmp_path / "nope.cime"), "--out", str(tmp_path)]) == 1
    assert "code=InputError" in capsys.readouterr().err


def test_unknown_substation(model, tmp_path):
    assert cli.main(["generate", "--input", str(model), "--substation", "Z", "--out", str(tmp_path / "o")]) == 1
    assert not (tmp_path / "o").exists()


def test_list(batch, tmp_path, capsys):
    assert cli.main(["list", "--input", str(batch)]) == 0
    assert capsys.readouterr().out.splitlines() == ["BAD", "S000", "S001", "S002", "S003"]
    empty = tmp_path / "empty.cime"
    empty.write_text("")
    assert cli.main(["list", "--input", str(empty)]) == 0
    assert capsys.readouterr().out == ""
    broken = tmp_path / "broken.cime"
    broken.write_text("<Bus>\n@ id name volt node st\n# 1 a 110 1 S\n")
    assert cli.main(["list", "--input", str(broken)]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["draw", "--input", "x"],
        ["generate"],
        ["generate", "--input", "x", "--jobs", "0"],
        ["generate", "--input", "x", "--format", "png"],
        ["generate", "--input", "x", "--jobs", "many"],
    ],
)
def test_bad_flags(argv, capsys):
    assert cli.main(argv) == 3
    assert "code=BadFlags" in capsys.readouterr().err


def test_bad_config(model, tmp_path):
    cfg = tmp_path / "layout.cfg"
    cfg.write_text("grid_unit = -1\n")
    assert cli.main(["generate", "--input", str(model), "--config", str(cfg), "--out", str(tmp_path)]) == 3


def test_config_changes_output(model, tmp_path):
    cfg = tmp_path / "layout.cfg"
    cfg.write_text("grid_unit = 60\n")
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["generate", "--input", str(model), "--out", str(a), "--format", "json"])
    cli.main(["generate", "--input", str(model), "--out", str(b), "--format", "json", "--config", str(cfg)])
    assert (a / "F.layout.json").read_bytes() != (b / "F.layout.json").read_bytes()


def test_parallel_output_identical(batch, tmp_path):
    serial, parallel = tmp_path / "j1", tmp_path / "j8"
    cli.main(["generate", "--input", str(batch), "--out", str(serial), "--jobs", "1"])
    cli.main(["generate", "--input", str(batch), "--out", str(parallel), "--jobs", "8"])
    assert _files(serial) == _files(parallel)
    for f in _files(serial):
        assert (serial / f).read_bytes() == (parallel / f).read_bytes()
    assert not [f for f in _files(parallel) if f.endswith(".tmp")]
