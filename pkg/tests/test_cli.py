import json

import numpy as np
import pytest

from finslerlab import NormSpec
from finslerlab.cli import SECTIONS, config_hash, dumps, main

D41 = NormSpec.ellipsoidal(np.diag([4.0, 1.0])).to_dict()
PERTURBED = NormSpec.perturbed(NormSpec.euclidean(2), 0.05).to_dict()

FAST = {
    "solve-bvp": {"h": 0.125},
    "stability": {"nodes": 500},
    "exterior-stability": {"nodes": 400},
    "energy-scan": {"points": 20},
    "hardy": {"count": 20},
    "isoperimetric": {"vertices": 1024, "polygons": 10},
    "coarea": {"h": 0.0625, "tolerance": 0.05},
}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def summary(out):
    return json.loads((out / "summary.json").read_text())


@pytest.mark.parametrize("command", sorted(SECTIONS))
def test_every_subcommand_runs_and_is_deterministic(tmp_path, command):
    cfg = write(tmp_path, {command: FAST.get(command, {})}) if command in FAST else None
    args = [command, "--quiet", "--seed", "3"] + (["--config", cfg] if cfg else [])
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert (a / "summary.json").read_bytes() == (b / "summary.json").read_bytes()
    doc = summary(a)
    assert doc["schema"] == "finsler-lab/1" and doc["command"] == command
    assert doc["passed"] is True
    assert doc["config_hash"] == config_hash(doc["config"])
    assert "tolerance" in doc


def test_norm_check_ellipsoid(tmp_path):
    cfg = write(tmp_path, {"norm": D41, "seed": 7})
    assert main(["norm-check", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    names = json.dumps(summary(tmp_path)["result"])
    assert "compatibility" in names


def test_norm_check_counterexample_exits_2(tmp_path):
    cfg = write(tmp_path, {"norm": PERTURBED})
    assert main(["norm-check", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 2
    doc = summary(tmp_path)
    assert doc["passed"] is False and "compatibility" in json.dumps(doc["result"])


def test_norm_from_file(tmp_path):
    write(tmp_path, D41, "norm.json")
    cfg = write(tmp_path, {"norm": "norm.json"})
    assert main(["norm-check", "--config", cfg, "--out", str(tmp_path / "o"), "--quiet"]) == 0
    assert summary(tmp_path / "o")["config"]["norm"]["kind"] == "ellipsoidal"


def test_no_arguments(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 1


def test_unknown_keys_rejected(tmp_path, capsys):
    cfg = write(tmp_path, {"hardy": {"N": 3, "bogus": 1}})
    assert main(["hardy", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert "bogus" in capsys.readouterr().err
    cfg = write(tmp_path, {"colour": "red"})
    assert main(["hardy", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_nonpositive_tolerance_rejected(tmp_path):
    cfg = write(tmp_path, {"hardy": {"tolerance": 0}})
    assert main(["hardy", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_json_error_reports_position(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "seed": 1,\n  "hardy": {"N": }\n}')
    assert main(["hardy", "--config", str(p)]) == 1
    err = capsys.readouterr().err
    assert "line 3" in err and "column" in err


def test_missing_config(tmp_path):
    assert main(["hardy", "--config", str(tmp_path / "none.json")]) == 1


def test_domain_error_exit_1(tmp_path):
    cfg = write(tmp_path, {"hardy": {"s": [3.0]}})
    assert main(["hardy", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 1


def test_property_failure_exit_2(tmp_path):
    cfg = write(tmp_path, {"energy-scan": {"negate": True, "points": 20}})
    assert main(["energy-scan", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 2
    assert (tmp_path / "summary.json").exists()


def test_out_directory_precedence(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write(tmp_path, {"out": "from-config"})
    monkeypatch.setenv("FINSLERLAB_OUT", str(tmp_path / "from-env"))
    assert main(["decay-probe", "--config", cfg, "--quiet"]) == 0
    assert (tmp_path / "from-env" / "summary.json").exists()
    assert main(["decay-probe", "--config", cfg, "--quiet", "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "summary.json").exists()
    monkeypatch.delenv("FINSLERLAB_OUT")
    assert main(["decay-probe", "--config", cfg, "--quiet"]) == 0
    assert (tmp_path / "from-config" / "summary.json").exists()


def test_epsilon_scan_flags(tmp_path):
    out = tmp_path / "eps"
    assert main(["epsilon-scan", "--quiet", "--out", str(out), "--p", "1", "--radii", "0.01,0.1"]) == 0
    res = summary(out)["result"]
    assert res["flagged"] == [0]
    assert (out / "quantity.csv").read_text().startswith("center,radius,quantity")


def test_seed_changes_config_hash(tmp_path):
    main(["hardy", "--quiet", "--seed", "1", "--out", str(tmp_path / "s1"), "--config",
          write(tmp_path, {"hardy": {"count": 5}})])
    main(["hardy", "--quiet", "--seed", "2", "--out", str(tmp_path / "s2"), "--config",
          write(tmp_path, {"hardy": {"count": 5}})])
    assert summary(tmp_path / "s1")["config_hash"] != summary(tmp_path / "s2")["config_hash"]


def test_dumps_format():
    text = dumps({"b": 0.1, "a": [np.float64(1) / 3, float("inf")]})
    assert text.index('"a"') < text.index('"b"')
    assert "0.33333333333333331" in text and "null" in text
