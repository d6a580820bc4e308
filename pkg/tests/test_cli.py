import csv
import io
import json
import subprocess
import sys

import pytest

from eightvertex.claims import Claim
from eightvertex.cli import ConfigError, RunConfig, dumps, main


def run(tmp_path, command, config=None, *extra):
    args = [command, "--out", str(tmp_path)]
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        args += ["--config", str(path)]
    return main(args + list(extra))


def report(tmp_path, name):
    return json.loads((tmp_path / f"{name}.json").read_text())


def rows(tmp_path, name):
    return list(csv.DictReader(io.StringIO((tmp_path / name).read_text())))


def test_verify_default(tmp_path):
    assert run(tmp_path, "verify") == 0
    rep = report(tmp_path, "verify")
    assert rep["all_passed"] and rep["claims"]
    assert all(c["status"] == "pass" for c in rep["claims"])
    assert len(rep["config_sha256"]) == 64


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = {"N": 2, "twist": [0, 1], "seed": 4}
    for d in (a, b):
        d.mkdir()
        assert run(d, "all", cfg) == 0
    for name in ("verify.json", "spectrum.json", "spectrum.csv", "bethe.json", "bethe_roots.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_seed_changes_digest(tmp_path):
    c1 = RunConfig.from_dict({"N": 1}, seed=1)
    c2 = RunConfig.from_dict({"N": 1}, seed=2)
    assert c1.digest() != c2.digest()
    assert RunConfig.from_dict({"N": 1}, seed=1).digest() == c1.digest()


def test_coincident_inhomogeneities_rejected(tmp_path, capsys):
    assert run(tmp_path, "verify", {"N": 2, "xi": [0.5, 0.5]}) == 2
    assert "cond-inh" in capsys.readouterr().err
    assert not (tmp_path / "verify.json").exists()


def test_tight_tolerance_is_reported(tmp_path):
    assert run(tmp_path, "verify", None, "--tol", "1e-15") == 1
    statuses = {c["status"] for c in report(tmp_path, "verify")["claims"]}
    assert "tolerance-limited" in statuses and "fail" not in statuses


def test_spectrum_twisted(tmp_path):
    assert run(tmp_path, "spectrum", {"N": 3, "twist": [0, 1]}) == 0
    table = rows(tmp_path, "spectrum.csv")
    assert len(table) == 8
    assert all(r["multiplicity"] == "1" and r["oracle_match"] == "1" for r in table)
    assert {"t_re_3", "t_im_3", "discrete_residual"} <= set(table[0])


def test_spectrum_periodic(tmp_path):
    assert run(tmp_path, "spectrum", {"N": 3, "twist": [0, 0]}) == 0
    table = rows(tmp_path, "spectrum.csv")
    assert len(table) == 4 and all(r["multiplicity"] == "2" for r in table)
    names = {c["name"] for c in report(tmp_path, "spectrum")["claims"]}
    assert "spectrum.eigenspace-span" in names


def test_periodic_even_rejected(tmp_path):
    assert run(tmp_path, "spectrum", {"N": 2, "twist": [0, 0]}) == 2


def test_bethe_tally(tmp_path):
    assert run(tmp_path, "bethe", {"N": 2, "twist": [1, 0]}) == 0
    claims = {c["name"]: c for c in report(tmp_path, "bethe")["claims"]}
    tally = claims["bethe.homogeneous.completeness"]["details"]
    assert tally["found"] == tally["expected"] == 4
    assert claims["bethe.inhomogeneous.completeness"]["details"]["found"] == 4
    table = rows(tmp_path, "bethe_roots.csv")
    assert sorted(r["equation"] for r in table) == ["homogeneous"] * 4 + ["inhomogeneous"] * 4


def test_bethe_odd_coverage_not_asserted(tmp_path):
    assert run(tmp_path, "bethe", {"N": 1, "twist": [1, 1]}) == 0
    names = {c["name"] for c in report(tmp_path, "bethe")["claims"]}
    assert "bethe.homogeneous.coverage" in names and "bethe.homogeneous.completeness" not in names


@pytest.mark.parametrize("raw", [
    {"N": 0},
    {"N": 9},
    {"twist": [2, 0]},
    {"omega": [0, -1]},
    {"xi": [0.1]},
    {"seed": "x"},
    {"tol": -1},
    {"gauge": {"nu": 1}},
    {"colour": "blue"},
    {"eta": "big"},
])
def test_config_validation(raw):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(raw)


def test_bad_config_file_exit_code(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["verify", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert main(["verify", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2


def test_dumps_is_stable():
    obj = {"b": 1 + 2j, "a": [0.1, float("inf")], "c": Claim("x", 0.5, 1.0).passed}
    assert dumps(obj) == dumps(obj)
    # complex numbers as [re, im], 17 significant digits, non-finite values as strings
    assert json.loads(dumps({"z": 1 + 2j, "a": [0.1, float("inf")]})) == {"z": [1, 2], "a": [0.1, "inf"]}
    assert "0.10000000000000001" in dumps([0.1])


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "eightvertex", "verify", "--out", str(tmp_path)],
                         capture_output=True, text=True, timeout=300)
    assert out.returncode == 0, out.stderr
    assert "pass" in out.stdout and (tmp_path / "verify.json").exists()
