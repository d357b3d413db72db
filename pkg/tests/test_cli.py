import json
import subprocess
import sys

import numpy as np
import pytest

from annuli import io
from annuli.annulus import NormalizedAnnulus
from annuli.cli import main
from annuli.exponential import LiePath
from annuli.fourier import FourierSeries
from annuli.geometry import CircleDiffeo
from annuli.virasoro import witt


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, obj):
        p = tmp_path / name
        io.save(obj, p)
        paths[name] = str(p)

    put("rot.json", CircleDiffeo.rotation(0.7, 16))
    put("phi.json", CircleDiffeo.from_function(lambda t: 0.2 * np.sin(t), 32))
    put("q1.json", NormalizedAnnulus.round(0.6, 32))
    put("q2.json", NormalizedAnnulus.round(0.8, 32))
    put("path.json", LiePath.constant(0.5j, 16, 40))
    put("l2.json", witt(2, 16))
    put("lm2.json", witt(-2, 16))
    paths["dir"] = tmp_path
    return paths


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_weld_rotation(files, capsys):
    code, out, _ = run(["weld", files["rot.json"]], capsys)
    assert code == 0
    sol = io.from_dict(json.loads(out))
    assert sol.f_plus.distance(FourierSeries.from_modes({1: np.exp(-0.7j)}, 16)) < 1e-13
    assert sol.f_minus.distance(FourierSeries.identity(16)) < 1e-13


def test_weld_far_and_modes(files, capsys, tmp_path):
    out = tmp_path / "w.json"
    code, _, _ = run(["weld", files["phi.json"], "--steps", "3", "--modes", "48", "--out", str(out)], capsys)
    assert code == 0
    assert io.load(out).f_minus.N == 48


def test_compose_round(files, capsys):
    code, out, _ = run(["compose", files["q1.json"], files["q2.json"]], capsys)
    assert code == 0
    assert io.from_dict(json.loads(out)).distance(NormalizedAnnulus.round(0.48, 32)) < 1e-6


def test_exp_and_framing(files, capsys):
    code, out, _ = run(["exp", files["path.json"]], capsys)
    assert code == 0
    assert io.from_dict(json.loads(out)).distance(NormalizedAnnulus.round(np.exp(-0.5), 16)) < 1e-7
    code, out, _ = run(["exp", files["path.json"], "--framing", "--tsteps", "80"], capsys)
    fr = io.from_dict(json.loads(out))
    assert code == 0 and fr.M == 80 and fr.annulus is not None


def test_cocycle(files, capsys):
    code, out, _ = run(["cocycle", files["l2.json"], files["lm2.json"]], capsys)
    assert code == 0 and json.loads(out)["value"] == [0.5, 0.0]


@pytest.mark.parametrize("name", ["rot.json", "q1.json", "path.json", "l2.json"])
def test_verify_report(files, capsys, name):
    code, out, _ = run(["verify", files[name]], capsys)
    report = json.loads(out)
    assert code == 0
    assert report["checks"] and all(set(c) == {"name", "pass", "residual"} for c in report["checks"])
    assert all(c["pass"] for c in report["checks"])


def test_verify_failure_exit_status(files, capsys):
    # a curve that crosses itself
    bad = files["dir"] / "bad_curve.json"
    bad.write_text(json.dumps({"kind": "curve", "N": 2, "coeffs": [[1, 0.5, 0], [0, 0.1, 0], [-1, 0.5, 0], [2, 0.0, 0.0]]}))
    code, out, _ = run(["verify", str(bad)], capsys)
    assert code == 1
    assert not all(c["pass"] for c in json.loads(out)["checks"])


def test_render_svg(files, capsys):
    code, out, _ = run(["render", files["q1.json"], "--format", "svg"], capsys)
    assert code == 0 and out.startswith("<svg")
    assert out.count('<path class="inner"') == 1 and out.count('<path class="outer"') == 1
    assert out.count(" Z\"") == 2


def test_render_framing_slices(files, capsys, tmp_path):
    fr = tmp_path / "fr.json"
    run(["exp", files["path.json"], "--framing", "--out", str(fr)], capsys)
    code, out, _ = run(["render", str(fr), "--format", "svg"], capsys)
    assert code == 0 and out.count('class="slice"') >= 5


def test_render_csv(files, capsys):
    code, out, _ = run(["render", files["q1.json"], "--format", "csv"], capsys)
    lines = out.strip().split("\n")
    assert code == 0 and lines[0] == "curve,index,theta,re,im"
    assert len(lines) == 1 + 2 * 65
    row = lines[1].split(",")
    assert row[0] == "inner" and abs(complex(float(row[3]), float(row[4])) - 0.6) < 1e-14


def test_parse_errors(files, capsys, tmp_path):
    assert run(["weld", files["rot.json"], "--modes", "-1"], capsys)[0] == 2
    assert run(["verify", str(tmp_path / "missing.json")], capsys)[0] == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    code, _, err = run(["verify", str(broken)], capsys)
    assert code == 2 and json.loads(err)["error"]["stage"] == "parse"
    unknown = tmp_path / "unknown.json"
    unknown.write_text('{"kind": "teapot"}')
    assert run(["verify", str(unknown)], capsys)[0] == 2
    assert run(["weld", files["q1.json"]], capsys)[0] == 2  # wrong object kind
    assert run(["weld", files["rot.json"], "--format", "svg"], capsys)[0] == 2
    assert run(["frobnicate"], capsys)[0] == 2


def test_solver_error_is_structured(capsys, tmp_path):
    p = tmp_path / "low.json"
    io.save(LiePath.from_function(lambda th, t: 0.5j + 0.1 * np.exp(-3j * th) + 0 * t, 8, 20), p)
    code, _, err = run(["exp", str(p)], capsys)
    diag = json.loads(err)["error"]
    assert code == 3 and diag["kind"] == "solver" and diag["stage"] == "path"


def test_byte_identical_runs(files):
    cmd = [sys.executable, "-m", "annuli.cli"]
    for args in (["weld", files["phi.json"]], ["verify", files["q1.json"]]):
        outs = [subprocess.run(cmd + args, capture_output=True, check=True).stdout for _ in range(2)]
        assert outs[0] == outs[1] and outs[0]


def test_io_round_trips(tmp_path):
    objs = [FourierSeries.from_modes({-1: 1j, 3: 2}, 4), CircleDiffeo.rotation(0.2, 8),
            NormalizedAnnulus.round(0.3, 8), LiePath.constant(0.1j, 4, 5)]
    for i, obj in enumerate(objs):
        p = tmp_path / f"{i}.json"
        io.save(obj, p)
        assert io.dumps(io.to_dict(io.load(p))) == p.read_text()
    with pytest.raises(io.FormatError):
        io.from_dict({"N": 3})
    with pytest.raises(io.FormatError):
        io.from_dict({"kind": "annulus"})
