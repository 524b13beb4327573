import json
import os
import subprocess
import sys

import numpy as np
import pytest

from central_mpo.breakability import frame_diagonal_operator, synthetic_factorizable_model
from central_mpo.cli import main
from central_mpo.levin_wen import b_loop_dense, z2_table

HOLE = [(x, y) for x in range(2) for y in range(4)]


def run(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = main([*argv, "-o", str(out)])
    return code, json.loads(out.read_text())


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["model", "build", "toric", "--L", "4", "--edges", "tblr", "-o", str(d / "t4.json")]) == 0
    assert main(["model", "build", "toric", "--L", "4", "--edges", "tblr", "--flip", "0,0:1,0", "-o", str(d / "t4f.json")]) == 0
    assert main(["foursite", "witness", "--model", str(d / "t4.json"), "-o", str(d / "w.json")]) == 0
    return d


def test_build_and_validate(files, tmp_path):
    code, rep = run(tmp_path, "model", "validate", str(files / "t4.json"))
    assert code == 0 and rep["passed"] and rep["seed"] == 0


def test_verify_accepts_witness(files, tmp_path):
    w = json.loads((files / "w.json").read_text())
    (tmp_path / "w.json").write_text(json.dumps(w["witness"]))
    code, rep = run(tmp_path, "verify", "--model", str(files / "t4.json"), "--witness", str(tmp_path / "w.json"))
    assert code == 0 and rep["verdict"] == "accept"
    assert max(max(b) for b in rep["bond_dims"].values()) <= 2


def test_flipped_model_rejected(files, tmp_path):
    w = json.loads((files / "w.json").read_text())
    (tmp_path / "w.json").write_text(json.dumps(w["witness"]))
    code, rep = run(tmp_path, "verify", "--model", str(files / "t4f.json"), "--witness", str(tmp_path / "w.json"))
    assert code == 1 and rep["verdict"] == "reject"
    assert "column" in rep["reason"]
    code, rep = run(tmp_path, "foursite", "witness", "--model", str(files / "t4f.json"))
    assert code == 1


def test_verify_cap_exceeded(files, tmp_path):
    w = json.loads((files / "w.json").read_text())
    (tmp_path / "w.json").write_text(json.dumps(w["witness"]))
    code, rep = run(tmp_path, "verify", "--model", str(files / "t4.json"), "--witness", str(tmp_path / "w.json"),
                    "--cap", "4")
    assert code == 2 and rep["verdict"] == "unable"


def test_reports_are_deterministic(files, tmp_path):
    args = ["foursite", "analyze", "--model", str(files / "t4.json"), "--column", "1", "--center", "1", "--seed", "3"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(args + ["-o", str(a)]) == main(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["seed"] == 3


def test_malformed_json(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"Lx": 4,\n "Ly": }')
    code, rep = run(tmp_path, "model", "validate", str(bad))
    assert code == 2 and "line 2" in rep["reason"]
    code, rep = run(tmp_path, "model", "validate", str(tmp_path / "missing.json"))
    assert code == 2 and rep["error"] == "input"


def test_campaigns(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    code, rep = run(tmp_path, "campaign", str(empty))
    assert code == 0 and rep["passed"] and rep["suites"] == {}
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"bounds": {"count": 5, "variants": ["base", "proj"]},
                                "propagation": {"count": 3}, "masks": {"count": 2}}))
    code, rep = run(tmp_path, "campaign", str(spec))
    assert code == 0 and rep["passed"]
    assert {k: v["cases"] for k, v in rep["suites"].items()} == {"bounds": 5, "propagation": 3, "masks": 2}
    spec.write_text(json.dumps({"nope": {}}))
    assert run(tmp_path, "campaign", str(spec))[0] == 2


def test_lw_commands(tmp_path):
    code, rep = run(tmp_path, "lw", "mpo", "--ftable", "fibonacci", "--s", "tau", "--n", "12")
    assert code == 0 and rep["periodic"]
    mpo_path = tmp_path / "loop.json"
    main(["lw", "mpo", "--ftable", "z2", "--s", "1", "--n", "4", "--trim", "-o", str(mpo_path)])
    code, info = run(tmp_path, "mpo", "info", str(mpo_path))
    assert code == 0 and info["max_bond"] == 2
    code, rep = run(tmp_path, "lw", "pentagon", "--ftable", "fib")
    assert code == 0 and rep["residual"] < 1e-8
    code, rep = run(tmp_path, "lw", "mpo", "--ftable", "fib", "--s", "sigma", "--n", "4")
    assert code == 2 and "sigma" in rep["reason"]
    assert run(tmp_path, "lw", "mpo", "--ftable", "fib", "--s", "tau", "--n", "2")[0] == 2


def test_mpo_multiply_and_compress(tmp_path):
    # on Z2 the flux loop squares to the vertex-admissible projector B^0
    p = tmp_path / "z.json"
    main(["lw", "mpo", "--ftable", "z2", "--s", "1", "--n", "3", "-o", str(p)])
    sq = tmp_path / "sq.json"
    assert main(["mpo", "multiply", str(p), str(p), "-o", str(sq)]) == 0
    code, dense = run(tmp_path, "mpo", "dense", str(sq))
    m = np.array(dense["matrix"])
    assert code == 0 and np.allclose(m[..., 0] + 1j * m[..., 1], b_loop_dense(z2_table(), 0, 3))
    code, small = run(tmp_path, "mpo", "compress", str(sq))
    assert code == 0
    (tmp_path / "c.json").write_text(json.dumps(small))
    assert run(tmp_path, "mpo", "info", str(tmp_path / "c.json"))[1]["max_bond"] < 16


def test_break_and_holes(tmp_path):
    m = synthetic_factorizable_model(3, 4, [HOLE], 0)
    (tmp_path / "m.json").write_text(json.dumps(m.to_dict()))
    X, Y, AI = [(2, 0)], [(2, 3)], [(0, 0), (0, 1), (0, 2)]
    O = frame_diagonal_operator(m, X + Y + AI, np.random.default_rng(0))
    (tmp_path / "op.json").write_text(json.dumps(O.to_dict()))
    (tmp_path / "r.json").write_text(json.dumps({"S": HOLE, "A": X + Y + AI, "X": X, "Y": Y}))
    code, rep = run(tmp_path, "break", "--model", str(tmp_path / "m.json"), "--op", str(tmp_path / "op.json"),
                    "--region", str(tmp_path / "r.json"))
    assert code == 0 and rep["split"] == "three"
    (tmp_path / "h.json").write_text(json.dumps({"holes": [HOLE]}))
    code, rep = run(tmp_path, "holes", "--model", str(tmp_path / "m.json"), "--holes", str(tmp_path / "h.json"))
    assert code in (0, 1) and rep["equivalence_holds"]


def test_env_cap_limits_dense(tmp_path):
    p = tmp_path / "z.json"
    main(["lw", "mpo", "--ftable", "z2", "--s", "1", "--n", "4", "-o", str(p)])
    env = {**os.environ, "CENTRAL_MPO_CAP": "16"}
    res = subprocess.run([sys.executable, "-m", "central_mpo.cli", "mpo", "dense", str(p)],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 2 and json.loads(res.stdout)["error"] == "resource"


def test_text_format(files, tmp_path):
    out = tmp_path / "v.txt"
    assert main(["model", "validate", str(files / "t4.json"), "--format", "text", "-o", str(out)]) == 0
    assert "passed: true" in out.read_text()
