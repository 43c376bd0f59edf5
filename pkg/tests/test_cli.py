import csv
import io
import json

import numpy as np
import pytest

from starmaj.cli import flatten, main, render

X = [0.5, -0.25]
Z = [0.3, 0.2]
THIRD = [1 / 3, 1 / 3, 1 - 2 / 3]


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    x, z = np.array(X), np.array(Z)
    return {
        "mu": write(tmp_path / "mu.json", {"weights": THIRD, "points": [X, X, X]}),
        "nu": write(tmp_path / "nu.json", {"weights": THIRD,
                                           "points": [X, (x + z).tolist(), (x - z).tolist()]}),
        "x": write(tmp_path / "x.json", {"weights": [0.5, 0.5], "points": [[2.0], [2.0]]}),
        "y": write(tmp_path / "y.json", {"weights": [0.5, 0.5], "points": [[3.0], [1.0]]}),
        "bad": str(tmp_path / "bad.json"),
        "fn": write(tmp_path / "fn.json", {"expr": "x0^2", "dim": 1, "domain": [[-5, 5]],
                                           "m": 1.0, "omega": {"kind": "power", "c": 0.0,
                                                               "q": 2.0}}),
        "logfn": write(tmp_path / "logfn.json", {"expr": "log(x0 - 0.4)", "dim": 1,
                                                 "domain": [[0.5, 1]], "m": 0.5}),
        "dir": tmp_path,
    }


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(argv, capsys):
    code, out, err = run(argv, capsys)
    return code, json.loads(out) if out else None, err


def test_check_majorization(files, capsys):
    code, rep, _ = run_json(["check-majorization", files["mu"], files["nu"], "--m", "1",
                             "--kind", "mL_down"], capsys)
    assert code == 0 and rep["result"]["holds"]
    code, _, err = run(["check-majorization", files["mu"], files["nu"], "--kind", "classic"],
                       capsys)
    assert code == 2 and "one-dimensional" in err
    code, rep, _ = run_json(["check-majorization", files["nu"], files["mu"]], capsys)
    assert code == 1 and not rep["result"]["holds"]


def test_malformed_json(files, capsys):
    open(files["bad"], "w").write("{oops")
    code, _, err = run(["check-majorization", files["bad"], files["mu"]], capsys)
    assert code == 2 and "invalid JSON" in err
    code, _, _ = run(["check-majorization", str(files["dir"] / "missing.json"), files["mu"]],
                     capsys)
    assert code == 2


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["certify"])
    assert info.value.code == 2
    capsys.readouterr()


def test_certify(files, capsys):
    assert run(["certify", "mocanu-f"], capsys)[0] == 0
    code, rep, _ = run_json(["certify", "mocanu-f", "--m", "1"], capsys)
    assert code == 1 and rep["result"]["witness"] is not None
    assert run(["certify", "gamma"], capsys)[0] == 0
    assert run(["certify", files["fn"]], capsys)[0] == 0
    code, _, err = run(["certify", files["logfn"]], capsys)
    assert code == 2 and "evaluable" in err


def test_certify_modes(capsys):
    assert run(["certify", "sqrt-square", "--mode", "mp-star", "--p", "2"], capsys)[0] == 0
    assert run(["certify", "mocanu-f", "--m", "1", "--mode", "delta-star",
                "--delta", "0.02"], capsys)[0] == 0
    code, rep, _ = run_json(["certify", "mocanu-f", "--mode", "local", "--x0", "2",
                             "--epsilon", "0.5"], capsys)
    assert code == 0 and rep["result"]["radius"] > 0
    assert run(["certify", "mocanu-f", "--mode", "mp-star", "--p", "2"], capsys)[0] == 1


def test_estimate_m(capsys):
    code, rep, _ = run_json(["estimate-m", "mocanu-f"], capsys)
    assert code == 0 and abs(rep["result"]["estimate"]["value"] - 0.9412) < 1e-3
    code, rep, _ = run_json(["estimate-m", "gamma-wide"], capsys)
    assert code == 0 and abs(rep["result"]["estimate"]["value"] - 0.9643) < 1e-3
    code, rep, _ = run_json(["estimate-m", "square"], capsys)
    assert rep["result"]["estimate"]["value"] == 1.0
    assert run(["estimate-m", "upsilon"], capsys)[0] == 2
    code, rep, _ = run_json(["estimate-m", "mocanu-f", "--grid", "200", "--expect", "0.5"],
                            capsys)
    assert "discrepancy" in rep["result"]["estimate"]["note"]


def test_gradient_and_isotonicity(capsys):
    code, rep, _ = run_json(["gradient-check", "mocanu-f", "--critical"], capsys)
    assert code == 0 and rep["result"]["critical_point_bound"]["passed"]
    assert run(["gradient-check", "exp-square", "--p", "0"], capsys)[0] == 0
    assert run(["gradient-check", "mocanu-f", "--m", "1"], capsys)[0] == 1
    assert run(["isotonicity-check", "exp-sum"], capsys)[0] == 0
    code, rep, _ = run_json(["isotonicity-check", "upsilon", "--point", "1", "1"], capsys)
    assert code == 1 and rep["result"]["entrywise"]["config"]["violations"] > 0
    assert run(["isotonicity-check", "upsilon", "--point", "1", "1", "2"], capsys)[0] == 2


def test_verify_hlp_files(files, capsys):
    code, rep, _ = run_json(["verify-hlp", files["x"], files["y"], "--fn", "square"], capsys)
    assert code == 0 and rep["result"]["slack"] == 1.0
    code, rep, err = run_json(["verify-hlp", files["y"], files["x"], "--fn", "square"], capsys)
    assert code == 1 and rep["result"]["failed_condition"] == "prefix" and "prefix" in err
    code, rep, _ = run_json(["verify-hlp", files["mu"], files["nu"], "--fn",
                             "catalog:exp-sum"], capsys)
    assert code == 0 and rep["result"]["passed"]
    assert run(["verify-hlp", files["x"]], capsys)[0] == 2


def test_verify_hlp_sweep(capsys):
    code, rep, _ = run_json(["verify-hlp", "--generate", "--kind", "mL_down", "--count", "200",
                             "--fn", "catalog:exp-sum"], capsys)
    res = rep["result"]
    assert code == 0 and res["passed"] == 200 and res["min_scaled_slack"] >= -1e-8


def test_gallery(capsys):
    code, rep, _ = run_json(["gallery", "--list"], capsys)
    assert code == 0 and len(rep["entries"]) >= 8
    code, rep, _ = run_json(["gallery", "--run", "perspective-f"], capsys)
    entry = rep["entries"][0]
    assert code == 0 and entry["reproduced"] and "claimed: pass" in entry["note"]
    assert run(["gallery", "--run", "nope"], capsys)[0] == 2


def test_out_file_and_csv(files, capsys, tmp_path):
    out = tmp_path / "r.csv"
    argv = ["certify", "mocanu-f", "--m", "1", "--n-random", "100"]
    assert main(argv + ["--format", "csv", "--out", str(out)]) == 1
    code, rep, _ = run_json(argv, capsys)
    rows = dict(list(csv.reader(io.StringIO(out.read_text())))[1:])
    for key, value in flatten(rep):
        if isinstance(value, float):
            assert float(rows[key]) == pytest.approx(value, rel=1e-15)
    assert rows["result.passed"] == "false"


def test_render_plain_types():
    text = render({"a": np.float64(1.5), "b": np.array([1, 2]), "c": float("inf"),
                   "d": np.bool_(True)}, "json")
    assert json.loads(text) == {"a": 1.5, "b": [1, 2], "c": "inf", "d": True}


def test_determinism(files, capsys):
    argv = ["verify-hlp", "--generate", "--count", "20", "--seed", "7"]
    first = run(argv, capsys)[1]
    assert first == run(argv, capsys)[1]
    assert first != run(argv[:-1] + ["8"], capsys)[1]
