import io
import json
import shutil
import time
from pathlib import Path

import pytest

from surflab.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main
from surflab.families import family_ids

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_families_listing():
    code, out, _ = run("families")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) >= 12
    assert any(line.startswith("classA/nullscroll") for line in lines)


def test_families_json():
    code, out, _ = run("families", "--json")
    schema = json.loads(out)
    assert code == EXIT_OK
    assert sorted(schema) == family_ids()
    assert schema["totumb/h31"]["params"] == {"k": 1.0, "k2": 0.0}
    assert schema["classA/nullscroll"]["c"] == [-1, 0, 1]


@pytest.mark.parametrize("argv", [["families", "--bogus"], ["construct"], ["verify", "--suite", "nope"], []])
def test_usage_errors(argv):
    assert run(*argv)[0] == EXIT_USAGE


def test_construct_csv(tmp_path):
    cfg = str(CONFIGS / "classA-e31.toml")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    code, _, err = run("construct", "--config", cfg, "--out", str(a))
    assert code == EXIT_OK
    assert "valid only on u" in err
    run("construct", "--config", cfg, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0].startswith("# family=classA/e31 c=0 f=")
    assert lines[1] == "u,v,x1,x2,x3,z,E,h1,h2,h3"
    rows = [list(map(float, line.split(","))) for line in lines[2:]]
    assert len(rows) == 441
    # v-major: u runs fastest
    assert rows[0][1] == rows[20][1] and rows[0][0] != rows[1][0]
    assert all(r[0] == r[5] for r in rows)  # z = u


def test_construct_to_stdout_for_json_config():
    code, out, _ = run("construct", "--config", str(CONFIGS / "h31-quadric.json"))
    assert code == EXIT_OK
    assert out.splitlines()[1] == "u,v,x1,x2,x3,x4,z,E,h1,h2,h3"


def test_parameter_domain_error(tmp_path):
    cfg = write(tmp_path, "bad.toml", 'family = "totumb/h31"\n[params]\nk = 0\n')
    code, out, err = run("construct", "--config", cfg)
    assert code == EXIT_CONFIG
    assert "params.k" in err and out == ""


@pytest.mark.parametrize(
    "name, text",
    [("bad.toml", "family = \n"), ("bad.json", "[1, 2]"), ("bad.yaml", "family: x"), ("bad.json", "{")],
)
def test_unreadable_configs(tmp_path, name, text):
    assert run("classify", "--config", write(tmp_path, name, text))[0] == EXIT_CONFIG


def test_missing_config():
    assert run("construct", "--config", "/nonexistent/x.toml")[0] == EXIT_CONFIG


def test_unwritable_output(tmp_path):
    code = run("construct", "--config", str(CONFIGS / "cone.toml"), "--out", str(tmp_path / "no" / "x.csv"))[0]
    assert code == EXIT_CONFIG


@pytest.mark.parametrize(
    "config, expected",
    [
        ("h31-quadric.json", {"class_a": "pass"}),
        ("cone.toml", {"class_a": "fail", "pseudo_umbilical": "pass", "flat_normal_bundle": "pass"}),
        ("classA-e31.toml", {"pseudo_umbilical": "fail"}),
    ],
)
def test_classify_reports(config, expected):
    code, out, _ = run("classify", "--config", str(CONFIGS / config))
    assert code == EXIT_OK
    rep = json.loads(out)
    assert {k: rep["flags"][k]["verdict"] for k in expected} == expected
    assert len(rep["shape_samples"]) == 5
    assert max(rep["frame_invariants"].values()) < 1e-8
    assert set(rep["structure_residuals"]) >= {"gauss", "codazzi", "ricci"}


def test_s31_pseudo_umbilicity_fails(tmp_path):
    cfg = write(tmp_path, "s31.toml", 'family = "classA/s31"\n')
    out_file = tmp_path / "r.json"
    code, out, _ = run("analyze", "--config", cfg, "--report", str(out_file))
    assert code == EXIT_OK
    assert "pseudo_umbilical: fail" in out.splitlines()
    assert json.loads(out_file.read_text())["flags"]["pseudo_umbilical"]["verdict"] == "fail"


def test_verify_numerics_is_fast():
    t0 = time.perf_counter()
    code, out, err = run("verify", "--suite", "numerics")
    assert time.perf_counter() - t0 < 5
    assert code == EXIT_OK
    assert json.loads(out)["summary"]["fail"] == 0
    assert "fail=0" in err


def test_verify_config_dir():
    code, out, _ = run("verify", "--suite", "fixtures", "--config-dir", str(CONFIGS))
    assert code == EXIT_OK
    assert json.loads(out)["summary"]["pass"] >= 10


def test_corrupted_fixture_fails(tmp_path):
    d = tmp_path / "configs"
    shutil.copytree(CONFIGS, d)
    text = (d / "cone.toml").read_text().replace('class_a = "fail"', 'class_a = "pass"')
    (d / "cone.toml").write_text(text)
    code, _, err = run("verify", "--suite", "fixtures", "--config-dir", str(d))
    assert code == EXIT_FAIL
    assert "FAIL fixtures pseudoumb/e31-cone: class_a=pass" in err


@pytest.mark.parametrize("make", [lambda p: p / "missing", lambda p: p])
def test_verify_missing_configs(tmp_path, make):
    assert run("verify", "--suite", "fixtures", "--config-dir", str(make(tmp_path)))[0] == EXIT_CONFIG
