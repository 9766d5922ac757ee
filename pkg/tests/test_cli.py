import json
import os
import subprocess
import sys

import pytest

from hyperkey import catalog
from hyperkey.cli import main

GOLDEN = os.path.join(os.path.dirname(__file__), "data", "golden")


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def written(tmp_path, capsys):
    """Write every catalog example into tmp_path and return the directory."""
    for name in catalog.NAMES:
        assert run(["examples", name, "--out", tmp_path], capsys)[0] == 0
    return tmp_path


def test_validate(written, capsys):
    code, out, _ = run(["validate", written / "receptacle.json"], capsys)
    assert code == 0 and json.loads(out)["valid"]


def test_validate_full_cover(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"vertices": 3, "edges": [{"label": "a", "verts": [1, 2, 3], "weight": 1}]}))
    code, _, err = run(["validate", bad], capsys)
    assert code == 2 and json.loads(err)["error"] == "FullCoverEdge"


def test_validate_malformed(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code, _, err = run(["validate", bad], capsys)
    assert code == 2 and "invalid JSON" in json.loads(err)["message"]


def test_report_receptacle(written, capsys):
    code, out, _ = run(["report", written / "receptacle.json"], capsys)
    cap = json.loads(out)["capacity"]
    assert code == 0 and cap["best_slope"] == "2/3" and cap["best_kind"] == "VP"


def test_report_scoop_with_extra_rho(written, capsys):
    code, out, _ = run(["report", written / "scoop.json", "--extra-rho", "20/3"], capsys)
    cap = json.loads(out)["capacity"]
    assert cap["best_slope"] == "2/3" and cap["best_kind"] == "Lamination"


def test_report_triangle(written, capsys):
    code, out, _ = run(["report", written / "triangle.json"], capsys)
    d = json.loads(out)
    assert d["capacity"]["best_slope"] == "1" and d["capacity"]["best_kind"] == "EP"
    assert d["capacity"]["CS_inf"] == "3/2" and d["tree_packing"]["value"] == "3/2"


def test_bounds_command(written, capsys):
    code, out, _ = run(["bounds", written / "receptacle.json"], capsys)
    d = json.loads(out)
    assert [b["slope"] for b in d["bounds"]] == ["1", "2/3", "2/3"]
    assert d["best_kind"] == "VP"


def test_curve_path3(written, capsys):
    code, out, _ = run(["curve", written / "example_3_1.json", "--rmax", 2, "--step", "1/2"], capsys)
    assert code == 0
    assert out.splitlines() == ["R,envelope", "0,0", "1/2,1/2", "1,1", "3/2,1", "2,1"]


def test_curve_receptacle_and_profile(written, capsys, tmp_path):
    prof = tmp_path / "profile.json"
    code, out, _ = run(["curve", written / "receptacle.json", "--rmax", "3/2", "--step", "3/4", "--profile", prof], capsys)
    rows = dict(line.split(",") for line in out.splitlines()[1:])
    assert rows == {"0": "0", "3/4": "1/2", "3/2": "1"}
    assert json.loads(prof.read_text())["R_S"] == "3/2"


def test_curve_bad_step(written, capsys):
    assert run(["curve", written / "receptacle.json", "--step", 0], capsys)[0] == 2


def test_verify_ok(written, capsys):
    code, out, _ = run(["verify", written / "scoop.json", written / "scoop.scheme.json"], capsys)
    d = json.loads(out)
    assert code == 0 and (d["key_rate"], d["discussion_rate"]) == ("1", "3/2")


def test_verify_tampered_key(written, capsys, tmp_path):
    scheme = json.loads((written / "scoop.scheme.json").read_text())
    # make the first key bit equal to the first message
    scheme["key"][0] = scheme["messages"][0]["terms"]
    bad = written / "tampered.json"
    bad.write_text(json.dumps(scheme))
    code, out, _ = run(["verify", written / "scoop.json", bad], capsys)
    assert code == 1 and json.loads(out)["secret"] is False


def test_verify_unknown_edge(written, capsys):
    scheme = json.loads((written / "scoop.scheme.json").read_text())
    scheme["key"][0] = [{"edge": "zz", "bit": 0, "t": 0}]
    bad = written / "unknown.json"
    bad.write_text(json.dumps(scheme))
    code, _, err = run(["verify", written / "scoop.json", bad], capsys)
    assert code == 2 and json.loads(err)["error"] == "SchemaError"


def test_examples_list(capsys):
    code, out, _ = run(["examples", "--list"], capsys)
    assert code == 0 and out.split() == list(catalog.NAMES)


def test_examples_scoop_incidences(written):
    d = json.loads((written / "scoop.json").read_text())
    assert d["vertices"] == 5
    assert {e["label"]: e["verts"] for e in d["edges"]} == {
        "a": [1, 2, 3], "b": [1, 3, 4], "c": [1, 2, 4], "d": [2, 5]
    }


def test_examples_unknown(capsys, tmp_path):
    assert run(["examples", "nope", "--out", tmp_path], capsys)[0] == 2


def test_examples_complete_size(capsys, tmp_path):
    assert run(["examples", "complete_pin_m", "--m", 5, "--out", tmp_path], capsys)[0] == 0
    assert json.loads((tmp_path / "complete_pin_m.json").read_text())["vertices"] == 5


@pytest.mark.parametrize("name", catalog.NAMES)
def test_round_trip_matches_golden(name, written, capsys):
    code, out, _ = run(["report", written / f"{name}.json", "--scheme", written / f"{name}.scheme.json"], capsys)
    with open(os.path.join(GOLDEN, f"{name}.report.json")) as fh:
        assert out == fh.read()


def test_report_independent_of_jobs(written, capsys):
    _, one, _ = run(["report", written / "scoop.json", "--jobs", 1], capsys)
    _, two, _ = run(["report", written / "scoop.json", "--jobs", 2], capsys)
    assert one == two


def test_env_limit(written, capsys, monkeypatch):
    monkeypatch.setenv("HYPERKEY_MAX_M", "4")
    code, _, err = run(["bounds", written / "scoop.json"], capsys)
    assert code == 2 and json.loads(err)["error"] == "LimitExceeded"
    monkeypatch.delenv("HYPERKEY_MAX_M")
    code, _, err = run(["bounds", written / "scoop.json", "--max-partitions", 4], capsys)
    assert code == 2


def test_laminate_demo(tmp_path, capsys, written):
    mu = tmp_path / "mu.json"
    mu.write_text(json.dumps({"ground": [1, 2, 3], "mass": [{"set": [1, 2], "value": "1"}, {"set": [2, 3], "value": 1}]}))
    code, out, _ = run(["laminate", mu, "--source", written / "example_3_1.json"], capsys)
    d = json.loads(out)
    assert code == 0
    assert d["trace"] == [{"sets": [[1, 2], [2, 3]], "moved": "1"}]
    assert d["laminated"]["mass"] == [{"set": [2], "value": "1"}, {"set": [1, 2, 3], "value": "1"}]
    assert d["objective"]["laminated"] == d["objective"]["greedy"] <= d["objective"]["input"]


def test_module_entry_point(written):
    proc = subprocess.run(
        [sys.executable, "-m", "hyperkey", "validate", str(written / "triangle.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and json.loads(proc.stdout)["is_pin"] is True
