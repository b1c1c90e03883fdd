import json

import pytest

from pbgap.cli import main


def run(tmp_path, *argv, name="out.txt"):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, (out.read_text() if out.exists() else None)


def test_construct_ok_and_deterministic(tmp_path):
    args = ("construct", "--p", "1", "--q", "4", "--resolution", "1024", "--samples", "200")
    c1, t1 = run(tmp_path, *args, name="a.json")
    c2, t2 = run(tmp_path, *args, name="b.json")
    assert c1 == c2 == 0
    assert t1 == t2
    rep = json.loads(t1)
    assert all(c["ok"] for c in rep["checks"])
    assert rep["numbers"]["norm_f"]["gridMax"] == 1.0


def test_construct_corollary(tmp_path):
    code, text = run(tmp_path, "construct", "--C", "1", "--resolution", "1024", "--samples", "100")
    assert code == 0
    rep = json.loads(text)
    assert rep["corollary"]["rho_f1g1_0"] == 4.0


def test_validation_errors(tmp_path):
    assert run(tmp_path, "construct", "--p", "4", "--q", "1")[0] == 2
    assert run(tmp_path, "construct", "--p", "1")[0] == 2
    assert main(["construct", "--p", "abc"]) == 2
    assert main(["nonsense"]) == 2
    assert run(tmp_path, "profile", "--p", "1", "--q", "4", "--s", "9")[0] == 2


def test_profile_csv_and_empty_grid(tmp_path):
    code, text = run(tmp_path, "profile", "--p", "1", "--q", "4", "--s", "", name="e.csv")
    assert code == 0
    assert text.strip().split(",") == ["s", "lowerBound", "upperBound", "witnessDistance",
                                       "bestAdversary", "bracketSupAtWitness"]
    code, text = run(tmp_path, "profile", "--p", "1", "--q", "4", "--s", "0,0.5",
                     "--budget", "0", "--resolution", "1024", name="p.csv")
    assert code == 0
    lines = text.strip().splitlines()
    assert len(lines) == 3
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == 0.0 and row[1] == 0.5 and row[2] == 0.5


def test_pb4_seeded_and_margins(tmp_path):
    code, text = run(tmp_path, "pb4", "--p", "1", "--q", "4", "--budget", "0", "--points", "64",
                     "--margins", "0.2,0.1,0.05")
    assert code == 0
    rep = json.loads(text)
    assert abs(rep["bestValue"] - 4.0) <= 0.04
    assert rep["marginSchedule"]["nonIncreasing"]


def test_pb4_overlap_instance(tmp_path):
    side = [[0.0, 0.0], [0.0, 1.0]]
    inst = {"sides": [side, side, [[0, 0], [1, 0]], [[0, 1], [1, 1]]], "area": 1.0,
            "box": [[-1, 3], [-1, 3]]}
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(inst))
    code, text = run(tmp_path, "pb4", "--instance", str(path))
    assert code == 0
    assert json.loads(text)["bestValue"] == "+inf"


def test_embed(tmp_path):
    code, text = run(tmp_path, "embed", "--target-area", str(10 * 3.141592653589793),
                     "--samples", "10000")
    assert code == 0
    rep = json.loads(text)
    assert rep["k"] == 9 and rep["contained"] and rep["injective"]


def test_config_and_manifest_round_trip(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# reference case\np = 1\nq = 4\nsamples = 100\nresolution = 1024\n")
    man = tmp_path / "manifest.cfg"
    code, t1 = run(tmp_path, "construct", "--config", str(cfg), "--manifest", str(man),
                   name="c1.json")
    assert code == 0
    code, t2 = run(tmp_path, "construct", "--config", str(man), name="c2.json")
    assert code == 0
    assert t1 == t2
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus = 1\n")
    assert main(["construct", "--config", str(bad)]) == 2
    assert main(["construct", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_threads_env_does_not_change_output(tmp_path, monkeypatch):
    args = ("profile", "--p", "1", "--q", "4", "--s", "0.2,0.6", "--budget", "5",
            "--resolution", "1024")
    monkeypatch.setenv("PBGAP_THREADS", "1")
    _, t1 = run(tmp_path, *args, name="t1.csv")
    monkeypatch.setenv("PBGAP_THREADS", "2")
    _, t2 = run(tmp_path, *args, name="t2.csv")
    assert t1 == t2


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
