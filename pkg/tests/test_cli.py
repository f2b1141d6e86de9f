import json
import math
import os

import pytest

from parvol import acceptance, cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_construct_dim1_example(tmp_path, capsys):
    code, out, _ = run(capsys, "construct", "--dim", "1", "--radii", "1,1/2", "--out", str(tmp_path))
    assert code == 0
    geom = read_json(tmp_path / "geometry.json")
    assert geom["points"] == ["0", "2", "3"]
    assert read_json(tmp_path / "metadata.json")["predicted_nondiff"] == ["1/2", "1"]
    assert json.loads(out)["geometry"] == geom


def test_construct_dim2_writes_jumps(tmp_path, capsys):
    code, out, _ = run(capsys, "construct", "--dim", "2", "--radii", "1,0.5", "--gamma0", "0.05",
                       "--out", str(tmp_path))
    assert code == 0
    meta = read_json(tmp_path / "metadata.json")
    assert meta["predicted_jumps"] == {"0.5": pytest.approx(0.05), "1": pytest.approx(0.1)}


def test_construct_boxes_dim3(tmp_path, capsys):
    code, _, _ = run(capsys, "construct", "--dim", "3", "--radii", "1,0.5", "--out", str(tmp_path))
    assert code == 0
    boxes = read_json(tmp_path / "boxes.json")
    assert boxes["d"] == 3 and boxes["pairwise_disjoint"]


def test_analyze_dim1_matches_predictions(tmp_path, capsys):
    code, _, _ = run(capsys, "analyze", "--geometry", "dim1:1,1/2", "--out", str(tmp_path))
    assert code == 0
    rep = read_json(tmp_path / "nondiff.json")
    assert [d["r"] for d in rep["detected"]] == [0.5, 1.0]
    assert [d["jump"] for d in rep["detected"]] == [2.0, 2.0]
    assert rep["missed"] == [] and rep["spurious"] == []


def test_analyze_rect_boundary(tmp_path, capsys):
    code, _, _ = run(capsys, "analyze", "--geometry", "rectboundary:1", "--h", "0.01", "--band", "0.05,1.3",
                     "--kneser", "--out", str(tmp_path))
    assert code == 0
    rep = read_json(tmp_path / "nondiff.json")
    assert len(rep["detected"]) == 1
    assert rep["detected"][0]["r"] == pytest.approx(1.0, abs=0.02)
    assert rep["detected"][0]["jump"] == pytest.approx(2.0, rel=0.1)
    crit = read_json(tmp_path / "criticality.json")
    assert crit[0]["verdict"] == "non-differentiable"
    for name in ("volume.csv", "jump_profile.csv", "kneser.json"):
        assert (tmp_path / name).exists()


def test_gallery_cantor_sum(tmp_path, capsys):
    code, out, _ = run(capsys, "gallery", "--q", str(1 / 9), "--depth", "14", "--out", str(tmp_path))
    assert code == 0
    summary = read_json(tmp_path / "gallery.json")
    assert summary["closed_form"] == pytest.approx(math.sqrt(7), rel=1e-9)
    assert summary["gap_sum"] == pytest.approx(math.sqrt(7), rel=1e-9)
    assert summary["minkowski_dimension"] == pytest.approx(math.log(2) / math.log(9))


def test_convergence_disk(tmp_path, capsys):
    code, out, _ = run(capsys, "convergence", "--geometry", "disk:1", "--h", "0.01", "--r0", "0.5",
                       "--out", str(tmp_path))
    assert code == 0
    assert json.loads(out)["reports"][0]["verdict"] is True
    assert (tmp_path / "convergence.csv").exists()


@pytest.mark.parametrize("argv", [
    ["analyze", "--geometry", "nosuchshape:1"],
    ["construct", "--dim", "1", "--radii", "1,-1"],
    ["construct", "--dim", "2"],
    ["convergence", "--geometry", "dim1:1", "--r0", "0.5"],
    ["gallery", "--depth", "40"],
])
def test_errors_are_json_records(tmp_path, capsys, argv):
    code, out, err = run(capsys, *argv, "--out", str(tmp_path))
    assert code == 2
    assert out == ""
    rec = json.loads(err)
    assert set(rec) >= {"error", "message"}


def test_outputs_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        code, _, _ = run(capsys, "analyze", "--geometry", "twopoints:2", "--h", "0.02", "--band", "0.1,1.2",
                         "--seed", "3", "--out", str(d))
        assert code == 0
    names = sorted(os.listdir(a))
    assert names == sorted(os.listdir(b))
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()


def _fake_run_all(outcome):
    def run_all(ctx, echo=print):
        res = [acceptance.CriterionResult(k, f"fake {k}", outcome or k != 2, 0.0, 1.0) for k in (1, 2)]
        for r in res:
            echo(r.line())
        return res
    return run_all


@pytest.mark.parametrize("outcome, code", [(True, 0), (False, 1)])
def test_verify_exit_status(tmp_path, capsys, monkeypatch, outcome, code):
    monkeypatch.setattr(acceptance, "run_all", _fake_run_all(outcome))
    got, out, err = run(capsys, "verify", "--out", str(tmp_path))
    assert got == code
    assert "criterion 2" in err
    rows = read_json(tmp_path / "acceptance.json")
    assert [r["passed"] for r in rows] == [True, outcome]


def test_figures_flag(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    code, _, _ = run(capsys, "convergence", "--geometry", "disk:1", "--h", "0.02", "--r0", "0.5",
                     "--figures", "--out", str(tmp_path))
    assert code == 0
    assert any(n.endswith(".png") for n in os.listdir(tmp_path))
