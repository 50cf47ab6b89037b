import csv
import io
import json
import math

import pytest

from anisotl.cli import run


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def mat(rows, mode="rational"):
    return {"dim": len(rows), "mode": mode, "entries": rows}


@pytest.fixture
def files(tmp_path):
    a = write(tmp_path / "a.json", {"matrix": mat([["2", "0"], ["0", "2"]]), "alpha": 0.0, "p": "1", "q": "2"})
    b = write(tmp_path / "b.json", {"matrix": mat([["2", "0"], ["0", "-2"]]), "alpha": 0.0, "p": "1", "q": "2"})
    seq = write(tmp_path / "delta_j2.json", {"entries": [{"j": 2, "k": [0, 0], "re": 1.0, "im": 0.0}]})
    c, s = 2 * math.cos(1), 2 * math.sin(1)
    pair = write(tmp_path / "rot.json", {"A": mat([["2", "0"], ["0", "2"]]), "B": mat([[c, -s], [s, c]], "float")})
    return {"a": a, "b": b, "seq": seq, "pair": pair, "dir": tmp_path}


def call(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def test_classify_example(files):
    code, out, _ = call(["classify", "--space-a", files["a"], "--space-b", files["b"], "--mmax", "64"])
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "Equal" and rep["reason"] == "orbit finite, period 2"


def test_norm_example(files):
    code, out, _ = call(["norm", "--space", files["a"], "--seq", files["seq"], "--method", "exact"])
    rep = json.loads(out)
    assert code == 0 and rep["value"] == 4.0 and rep["method"].startswith("exact")


def test_orbit_and_expansive(files, tmp_path):
    code, out, _ = call(["orbit", "--pair", files["pair"], "--mmax", "20", "--jrange", "5"])
    rep = json.loads(out)
    assert code == 0 and rep["orbit"]["verdict"] == "InfiniteUpTo" and rep["brute_force_count"]["count"] == 11
    m = write(tmp_path / "m.json", mat([["2", "0"], ["0", "1/2"]]))
    code, out, _ = call(["expansive", "--matrix", m])
    assert code == 0 and json.loads(out)["result"]["status"] == "not-expansive"


def test_usage_errors(files):
    assert call(["frobnicate"])[0] == 1
    assert call(["norm", "--space", files["a"]])[0] == 1
    assert call(["norm", "--space", files["a"], "--seq", files["seq"], "--bogus"])[0] == 1
    assert call([])[0] == 1


def test_invalid_input(files, tmp_path):
    bad = write(tmp_path / "bad.json", {"matrix": mat([["2", "0"], ["0", "1/2"]]), "p": "1", "q": "2"})
    code, out, _ = call(["norm", "--space", bad, "--seq", files["seq"]])
    assert code == 1 and json.loads(out)["error"] == "InvalidInput"
    code, _, _ = call(["norm", "--space", str(tmp_path / "missing.json"), "--seq", files["seq"]])
    assert code == 1


def test_unknown_classification_exits_2(tmp_path, files):
    c, s = 2 * math.cos(1), 2 * math.sin(1)
    rb = write(tmp_path / "rb.json", {"matrix": mat([[c, -s], [s, c]], "float"), "alpha": 0, "p": "1", "q": "2"})
    code, out, _ = call(["classify", "--space-a", files["a"], "--space-b", rb, "--mmax", "8", "--mmax-insufficient"])
    assert code == 2 and json.loads(out)["verdict"] == "Unknown"


def test_verify_csv_and_replay(files, tmp_path):
    out_csv = tmp_path / "law.csv"
    argv = ["verify", "--family", "case1", "--pair", files["pair"], "--p", "1", "--q1", "2",
            "--sizes", "2,3", "--samples", "100000", "--seed", "0", "--out", str(out_csv)]
    code, out, _ = call(argv)
    rep = json.loads(out)
    assert code in (0, 2)
    rows = list(csv.DictReader(out_csv.open()))
    assert [int(r["size"]) for r in rows] == [2, 3]
    assert float(rows[1]["measured"]) > float(rows[0]["measured"])
    man = write(tmp_path / "manifest.json", rep)
    code2, out2, _ = call(["verify", "--replay", man])
    rep2 = json.loads(out2)
    assert rep2["law"] == rep["law"]


def test_witness_report(files):
    code, out, _ = call(["witness", "--family", "case2", "--pair", files["pair"], "--size", "3", "--measure"])
    rep = json.loads(out)
    assert code == 0
    assert rep["measured"]["a"]["value"] >= 0.12 and rep["measured"]["b"]["value"] <= 1 + 1e-9
    assert rep["separation_check"]["ok"]


def test_csv_format(files):
    code, out, _ = call(["norm", "--space", files["a"], "--seq", files["seq"], "--format", "csv"])
    rows = {r["key"]: r["value"] for r in csv.DictReader(io.StringIO(out))}
    assert code == 0 and float(rows["value"]) == 4.0


def test_verify_delta_via_space(files):
    code, out, _ = call(["verify", "--family", "delta", "--space", files["a"], "--sizes=-2,-1,0,1,2"])
    rep = json.loads(out)
    assert code == 0 and rep["law"]["slope"] == pytest.approx(math.log(4) * 0.5)
