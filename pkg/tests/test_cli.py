import json
import math
import subprocess
import sys

import numpy as np
import pytest

from regdisk.cli import RunConfig, main
from regdisk.domain import save_field
from regdisk.report import dumps

from conftest import get_field


@pytest.fixture(scope="module")
def manifests(tmp_path_factory):
    d = tmp_path_factory.mktemp("fields")
    out = {}
    for name in ("square_y", "square_y2", "plateau"):
        out[name] = str(save_field(get_field(name), d / f"{name}.json"))
    return out


def run(args, capsys=None):
    code = main(args)
    text = capsys.readouterr().out if capsys else None
    return code, text


def test_classify_ok(manifests, capsys):
    code, text = run(["classify", "--field", manifests["square_y"]], capsys)
    assert code == 0
    assert json.loads(text)["status"] == "weakly_regular"


def test_classify_plateau(manifests, capsys):
    code, text = run(["classify", "--field", manifests["plateau"]], capsys)
    assert code == 1
    assert json.loads(text)["status"] == "not_regular"


def test_classify_missing(tmp_path):
    assert main(["classify", "--field", str(tmp_path / "missing.json")]) == 2


def test_bad_usage():
    with pytest.raises(SystemExit) as exc:
        main(["classify"])
    assert exc.value.code == 2


def test_levels_and_render(manifests, tmp_path):
    out, svg = tmp_path / "levels.json", tmp_path / "levels.svg"
    assert main(["levels", "--field", manifests["square_y"], "-n", "11", "--out", str(out), "--svg", str(svg)]) == 0
    data = json.loads(out.read_text())
    assert len(data["curves"]) == 11
    for c in data["curves"]:
        pts = np.array(c["points"])
        assert np.allclose(pts[:, 1], c["c"])
    text = svg.read_text()
    assert 'viewBox="0 0 1024 1024"' in text and text.count("<polyline") == 11
    again = tmp_path / "again.svg"
    assert main(["render", "--input", str(out), "--out", str(again)]) == 0
    assert again.read_bytes() == svg.read_bytes()


def test_rectify_deterministic(manifests, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["rectify", "--field", manifests["square_y2"], "--levels", "9", "--samples", "9"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    H = json.loads(a.read_text())
    assert H["target_shape"] == "square" and H["orientation_ok"]
    grid = np.array(H["grid"])
    rows = np.array(H["rows"])
    assert np.abs(grid[0, :, 1] - np.sqrt(rows)).max() <= 2 / 128
    svg = tmp_path / "warp.svg"
    assert main(["render", "--input", str(a), "--out", str(svg)]) == 0
    assert svg.read_text().count("<polyline") == 18


def test_rectify_not_regular(manifests):
    assert main(["rectify", "--field", manifests["plateau"]]) == 1


def test_mu_and_frechet(tmp_path, capsys):
    seg = tmp_path / "seg.json"
    seg.write_text(json.dumps([[0, 0], [1, 0]]))
    off = tmp_path / "off.json"
    off.write_text(json.dumps([[0, 0.3], [1, 0.3]]))
    code, text = run(["mu", "--curve", str(seg), "--resample", "5"], capsys)
    assert code == 0
    data = json.loads(text)
    assert abs(data["mu_length"] - math.log(2)) < 1e-3
    assert np.allclose(np.array(data["resampled"])[:, 0], [0, 0.25, 0.5, 0.75, 1], atol=2e-3)
    code, text = run(["frechet", "--a", str(seg), "--b", str(off)], capsys)
    assert json.loads(text)["frechet"] == pytest.approx(0.3)


def test_conjugate(manifests, tmp_path):
    s = np.arange(128) / 128
    phi0 = tmp_path / "phi0.json"
    phi0.write_text(json.dumps([[float(x), float(x)] for x in s]))
    out = tmp_path / "phi.json"
    args = ["conjugate", "--f", manifests["square_y"], "--g", manifests["square_y"], "--phi0", str(phi0), "--levels", "9", "--samples", "9", "--out", str(out)]
    assert main(args) == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["ok"] and rep["residual"] <= 3 / 128


def test_config_validation(tmp_path, manifests):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tol_level": -1.0}))
    assert main(["classify", "--field", manifests["square_y"], "--config", str(cfg)]) == 2
    with pytest.raises(ValueError):
        RunConfig(m=1)


def test_json_format():
    assert dumps({"b": 0.1, "a": [1, float("nan"), True]}) == '{"a":[1,null,true],"b":0.10000000000000001}\n'


def test_console_script_runs(manifests):
    proc = subprocess.run([sys.executable, "-m", "regdisk.cli", "classify", "--field", manifests["square_y"]], capture_output=True, text=True)
    assert proc.returncode == 0
    assert '"n_f":2' in proc.stdout
