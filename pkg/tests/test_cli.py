import csv
import json
import subprocess
import sys

import pytest

import polysys.finpoly as fp
from polysys.cli import main
from polysys.coalg import Coalgebra
from polysys.learners import FinLearner, compose_parallel, compose_serial, identity_learner
from polysys.machines import controller_not, mod2_counter, plant_xor, traffic_light
from polysys.sysnet import controlled_plant_wiring


def write(path, data):
    path.write_text(json.dumps(data, indent=2))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "counter": write(tmp_path / "counter.json", mod2_counter().to_dict()),
        "light": write(tmp_path / "light.json", traffic_light().to_dict()),
        "plant": write(tmp_path / "plant.json", plant_xor().to_dict()),
        "ctrl": write(tmp_path / "ctrl.json", controller_not().to_dict()),
        "wiring": write(tmp_path / "wiring.json", controlled_plant_wiring(2, 2, 2).to_dict()),
        "gy": write(tmp_path / "gy.json", {"Q": [0, 1]}),
        "all": write(tmp_path / "all.json", {"Q": [0, 1, 2]}),
        "dir": tmp_path,
    }


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# --- run -----------------------------------------------------------------------------


def test_run(files, capsys):
    assert run(capsys, "run", "--machine", files["counter"], "--inputs", "1,1,0,1") == (0, "0,1,0,0\n", "")
    assert run(capsys, "run", "--machine", files["counter"], "--inputs", "")[:2] == (0, "\n")


def test_run_malformed_json(files, capsys):
    bad = files["dir"] / "bad.json"
    bad.write_text('{\n  "interface": {\n    "positions": [\n  }\n')
    code, _, err = run(capsys, "run", "--machine", str(bad))
    assert code == 2
    assert f"{bad}:4:3:" in err


def test_run_errors(files, capsys):
    assert run(capsys, "run", "--machine", "/nonexistent.json")[0] == 2
    assert run(capsys, "run", "--machine", files["counter"], "--inputs", "1,x")[0] == 2
    assert run(capsys, "run", "--machine", files["light"], "--inputs", "0")[0] == 3
    assert run(capsys, "run", "--machine", files["counter"], "--start", "5", "--inputs", "0")[0] == 3
    broken = write(files["dir"] / "broken.json", {**mod2_counter().to_dict(), "readout": [0, 7]})
    assert run(capsys, "run", "--machine", broken)[0] == 3
    missing = write(files["dir"] / "missing.json", {"states": 1})
    assert run(capsys, "run", "--machine", missing)[0] == 2


# --- check ---------------------------------------------------------------------------


def test_check(files, capsys):
    code, out, _ = run(capsys, "check", "--machine", files["light"], "--prop", files["gy"])
    assert (code, out) == (1, "violated: green->yellow->red\n")
    code, out, _ = run(capsys, "check", "--machine", files["light"], "--prop", files["all"])
    assert (code, out) == (0, "satisfied\n")
    bad = write(files["dir"] / "badprop.json", {"Q": [0], "R": {"0,0": [2]}})
    assert run(capsys, "check", "--machine", files["light"], "--prop", bad)[0] == 2
    assert run(capsys, "check", "--machine", files["light"], "--prop", files["gy"], "--start", "9")[0] == 3


# --- wire ----------------------------------------------------------------------------


def test_wire(files, capsys):
    out_path = files["dir"] / "closed.json"
    code, _, _ = run(capsys, "wire", "--spec", files["wiring"], "--inner",
                     f"{files['plant']},{files['ctrl']}", "--out", str(out_path))
    assert code == 0
    closed = Coalgebra.from_dict(json.loads(out_path.read_text()))
    assert closed.n_states == 4 and closed.interface == fp.monomial(2, 2)
    code, out, _ = run(capsys, "run", "--machine", str(out_path), "--inputs", "1,0,1,1,0")
    assert out == "0,1,0,1,1\n"


def test_wire_mismatch(files, capsys):
    assert run(capsys, "wire", "--spec", files["wiring"], "--inner", files["plant"])[0] == 3
    assert run(capsys, "wire", "--spec", files["wiring"], "--inner",
               f"{files['ctrl']},{files['plant']}")[0] == 3


# --- train ---------------------------------------------------------------------------


@pytest.fixture
def net_files(tmp_path):
    net = {"layers": [{"kind": "linear", "in": 2, "out": 2, "eps": 0.01},
                      {"kind": "linear", "in": 2, "out": 1, "eps": 0.01}]}
    data = tmp_path / "data.csv"
    with open(data, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "y"])
        for x1, x2 in [(0.1, -0.5), (0.9, 0.3), (-0.4, 0.8), (-0.7, -0.6), (0.5, 0.5), (0.2, -0.9)]:
            w.writerow([x1, x2, 0.6 * x1 - 0.3 * x2])
    return write(tmp_path / "net.json", net), str(data), tmp_path


def test_train(net_files, capsys):
    net, data, tmp = net_files
    trace = tmp / "trace.csv"
    code, out, _ = run(capsys, "train", "--net", net, "--data", data, "--steps", "5000",
                       "--seed", "1", "--trace", str(trace))
    assert code == 0 and out.startswith("steps=5000 mse=")
    assert float(out.split("mse=")[1]) < 1e-3
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["step", "loss"] and len(rows) == 5001
    losses = [float(r[1]) for r in rows[1:]]
    # trend: late losses far below early ones
    assert sum(losses[-100:]) < 1e-3 * sum(losses[:100])


def test_train_needs_seed_for_random_init(net_files, capsys):
    net, data, tmp = net_files
    assert run(capsys, "train", "--net", net, "--data", data)[0] == 2
    fixed = write(tmp / "fixed.json", [{"kind": "linear", "in": 2, "out": 1, "init": [0, 0], "eps": 0.1}])
    code, out, _ = run(capsys, "train", "--net", fixed, "--data", data, "--steps", "2000")
    assert code == 0 and float(out.split("mse=")[1]) < 1e-6


def test_train_divergence(net_files, capsys):
    _, data, tmp = net_files
    wild = write(tmp / "wild.json", [{"kind": "linear", "in": 2, "out": 1, "init": [1, 1], "eps": 50}])
    trace = tmp / "t.csv"
    code, _, err = run(capsys, "train", "--net", wild, "--data", data, "--steps", "5000",
                       "--trace", str(trace))
    assert code == 1 and "diverged" in err and trace.exists()


def test_train_bad_inputs(net_files, capsys):
    net, data, tmp = net_files
    bad = write(tmp / "bad.json", [{"kind": "conv", "in": 2}])
    assert run(capsys, "train", "--net", bad, "--data", data, "--seed", "0")[0] == 2
    assert run(capsys, "train", "--net", net, "--data", str(tmp / "none.csv"), "--seed", "0")[0] == 2
    short = tmp / "short.csv"
    short.write_text("1,2\n")
    assert run(capsys, "train", "--net", net, "--data", str(short), "--seed", "0")[0] == 2


# --- laws ----------------------------------------------------------------------------


def test_laws(capsys):
    code, out, _ = run(capsys, "laws", "--seed", "42", "--trials", "100")
    assert code == 0 and out.startswith("all laws hold")
    assert run(capsys, "laws", "--seed", "42", "--trials", "0")[:2] == (0, "no trials\n")


def test_laws_catch_a_broken_composition(capsys, monkeypatch):
    real = fp.compose_poly

    def broken(p, q):
        out = real(p, q)
        return fp.FinPoly(out.directions[:-1]) if len(out) > 1 else out

    monkeypatch.setattr(fp, "compose_poly", broken)
    code, out, _ = run(capsys, "laws", "--seed", "42", "--trials", "100", "--suite", "compose")
    assert code == 1 and out.startswith("law violated: compose")


def test_laws_single_suite(capsys):
    code, out, _ = run(capsys, "laws", "--seed", "1", "--trials", "5", "--suite", "curry", "--suite", "lax")
    assert code == 0


def test_laws_seed_required():
    with pytest.raises(SystemExit):
        main(["laws"])


# --- learn-compose ---------------------------------------------------------------------


def test_learn_compose(tmp_path, capsys):
    L = FinLearner.from_functions(2, 2, 2, lambda a, p: (a + p) % 2, lambda a, b, p: b,
                                  lambda a, b, p: (a + b) % 2)
    a = write(tmp_path / "a.json", L.to_dict())
    b = write(tmp_path / "b.json", identity_learner(2).to_dict())
    out = tmp_path / "out.json"
    assert run(capsys, "learn-compose", "--serial", a, b, a, "--out", str(out))[0] == 0
    assert FinLearner.from_dict(json.loads(out.read_text())) == compose_serial(
        compose_serial(L, identity_learner(2)), L)
    code, stdout, _ = run(capsys, "learn-compose", "--parallel", a, b)
    assert code == 0 and FinLearner.from_dict(json.loads(stdout)) == compose_parallel(L, identity_learner(2))
    c = write(tmp_path / "c.json", identity_learner(3).to_dict())
    assert run(capsys, "learn-compose", "--serial", a, c)[0] == 3


# --- tree, graph, poly -------------------------------------------------------------------


def test_tree(files, capsys):
    code, out, _ = run(capsys, "tree", "--machine", files["light"], "--depth", "1")
    assert code == 0 and out == "green\n  [0] green\n  [1] yellow\n"
    code, out, _ = run(capsys, "tree", "--machine", files["light"], "--depth", "2", "--dot")
    assert out.startswith("digraph ptree {") and out.count("->") == 6
    assert run(capsys, "tree", "--machine", files["light"], "--start", "3")[0] == 3


def test_graph(files, capsys):
    code, out, _ = run(capsys, "graph", "--machine", files["light"])
    assert code == 0
    assert out.splitlines() == ["0 green -> [0, 1]", "1 yellow -> [0, 2]", "2 red -> []",
                                "classes: 0,1,2"]
    dot = files["dir"] / "g.dot"
    assert run(capsys, "graph", "--machine", files["light"], "--dot", "--out", str(dot))[0] == 0
    assert dot.read_text().startswith("digraph behavior {")


def test_poly(capsys):
    assert run(capsys, "poly", "compose", "y^2", "y+1")[:2] == (0, "y^2 + 2y + 1\n")
    assert run(capsys, "poly", "tensor", "2y^3", "3y^2")[:2] == (0, "6y^6\n")
    assert run(capsys, "poly", "hom", "2y^2", "2y^2")[:2] == (0, "64y^4\n")
    assert run(capsys, "poly", "hom", "3y^4", "3y^4")[0] == 3
    assert run(capsys, "poly", "hom", "2y^2", "2y^2", "--size-guard", "10")[0] == 3
    assert run(capsys, "poly", "compose", "2x", "y")[0] == 2


def test_deterministic_bytes(files, net_files, capsys):
    net, data, tmp = net_files
    for argv in (["graph", "--machine", files["light"], "--dot"],
                 ["laws", "--seed", "7", "--trials", "10"],
                 ["train", "--net", net, "--data", data, "--steps", "300", "--seed", "3"]):
        first = run(capsys, *argv)
        assert run(capsys, *argv) == first


def test_module_entry_point(files):
    done = subprocess.run([sys.executable, "-m", "polysys", "run", "--machine", files["counter"],
                           "--inputs", "1,1,0,1"], capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout == "0,1,0,0\n"
