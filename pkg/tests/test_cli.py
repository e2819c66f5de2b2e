import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from tnsynth import cli
from tnsynth.cli import RunConfig, parse_hsp_script, run, validate
from tnsynth.errors import ValidationError


def run_main(args, tmp_path, name="out"):
    out = tmp_path / name
    code = cli.main(args + ["--out", str(out)])
    return code, out


def read(out, sub):
    return json.loads((out / f"{sub}.json").read_text())


def test_shor_15_scripted(tmp_path):
    code, out = run_main(["shor", "--n", "15", "--a", "2", "--script", "w=4,v=12"], tmp_path)
    doc = read(out, "shor")
    assert code == 0
    assert doc["period"] == 4 and sorted(doc["factors"]) == [3, 5]
    assert doc["rng_calls"] == 0


def test_shor_21_scripted(tmp_path):
    code, out = run_main(["shor", "--n", "21", "--a", "10", "--script", "w=13,v=27"], tmp_path)
    doc = read(out, "shor")
    assert code == 0 and doc["period"] == 6 and sorted(doc["factors"]) == [3, 7]


def test_hsp_bv_seeded(tmp_path):
    code, out = run_main(["hsp", "--kind", "bv", "--secret", "1011", "--seed", "7"], tmp_path)
    doc = read(out, "hsp")
    assert code == 0 and doc["result"]["secret"] == "1011"


def test_hsp_simon_scripted(tmp_path):
    code, out = run_main(["hsp", "--kind", "simon", "--secret", "110", "--script", "y=001;y=111"], tmp_path)
    assert code == 0 and read(out, "hsp")["result"]["secret"] == "110"


def test_validate_examples():
    assert "a must satisfy 1 < a < N" in validate(RunConfig("shor", {"n": 15, "a": 15}, seed=1))
    msgs = validate(RunConfig("pentamer", {"points": 64}))
    assert any("dense diagonalization bound" in m for m in msgs)
    assert validate(RunConfig("dimer", {})) == []


def test_validate_other_problems():
    assert validate(RunConfig("fold", {}))
    assert validate(RunConfig("shor", {"n": 15, "a": 2}))  # neither seed nor script
    assert validate(RunConfig("shor", {"n": 15, "a": 2}, script="w=4"))
    assert validate(RunConfig("hsp", {"kind": "bv"}, seed=1))
    assert validate(RunConfig("schmidt", {"bell": "3+"}))
    assert validate(RunConfig("shor", {"n": 15, "a": 2}, seed=-1))


def test_invalid_exit_code(tmp_path):
    err = io.StringIO()
    code = run(RunConfig("shor", {"n": 15, "a": 15}, seed=1, out=tmp_path), stderr=err)
    assert code == 2 and "1 < a < N" in err.getvalue()


def test_algorithm_failure_exit_code(tmp_path):
    err = io.StringIO()
    code = run(RunConfig("shor", {"n": 15, "a": 2}, script="w=4,v=0", out=tmp_path), stderr=err)
    assert code == 3 and err.getvalue().startswith("failed:")
    assert not json.loads((tmp_path / "shor.json").read_text())["success"]


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    err = io.StringIO()
    code = run(RunConfig("shor", {"n": 15, "a": 2}, script="w=4,v=12", out=blocker / "sub"), stderr=err)
    assert code == 2 and "cannot write" in err.getvalue()


def test_byte_identical_seeded_runs(tmp_path):
    args = ["shor", "--n", "21", "--a", "2", "--seed", "123", "--format", "both"]
    _, a = run_main(args, tmp_path, "a")
    _, b = run_main(args, tmp_path, "b")
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir()) and "shor_qft.csv" in names
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_trials_aggregate(tmp_path):
    code, out = run_main(["shor", "--n", "15", "--a", "7", "--seed", "5", "--trials", "20"], tmp_path)
    doc = read(out, "shor")
    assert code == 0 and doc["trials"] == 20 and len(doc["runs"]) == 20
    assert [r["stream"] for r in doc["runs"]] == list(range(20))


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "dimer.json"
    cfg.write_text(json.dumps({"alphas": [0.9987, 0.0502, 0.0022], "k": 2}))
    code, out = run_main(["dimer", "--config", str(cfg), "--k", "1"], tmp_path)
    doc = read(out, "dimer")
    assert code == 0 and doc["k"] == 1
    assert doc["probability_k"] == pytest.approx(0.99740169, abs=1e-8)


def test_bad_config_file(tmp_path):
    code, _ = run_main(["dimer", "--config", str(tmp_path / "missing.json")], tmp_path)
    assert code == 2


def test_csv_only(tmp_path):
    code, out = run_main(["dimer", "--alphas", "0.8,0.6", "--format", "csv"], tmp_path)
    names = sorted(p.name for p in out.iterdir())
    assert code == 0 and names == ["dimer_schmidt.csv", "dimer_spectrum_k.csv", "dimer_spectrum_superposition.csv"]
    assert (out / "dimer_schmidt.csv").read_text() == "index,alpha\n1,0.80000000000000004\n2,0.59999999999999998\n"


def test_schmidt_subcommand(tmp_path):
    code, out = run_main(["schmidt", "--bell", "1-"], tmp_path)
    doc = read(out, "schmidt")
    assert code == 0 and doc["weight_total"] == pytest.approx(1)
    assert doc["mps"]["type"] == "MPSForm"


def test_wire_synthetic_config(tmp_path):
    cfg = tmp_path / "wire.json"
    cfg.write_text(json.dumps({"modes": 5, "mode": "synthetic", "bond_weights": [[0.8, 0.6]] * 4}))
    code, out = run_main(["wire", "--config", str(cfg)], tmp_path)
    doc = read(out, "wire")
    assert code == 0 and doc["n_modes"] == 5 and doc["bond_dims"] == [2, 2, 2, 2]


def test_parse_hsp_script():
    assert parse_hsp_script("y=1011") == [(None, 0b1011)]
    assert parse_hsp_script("w=3,y=101; w=0,y=011") == [(3, 0b101), (0, 0b011)]
    for bad in ["", "w=1", "y=12", "z=1,y=1"]:
        with pytest.raises(ValidationError):
            parse_hsp_script(bad)


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "tnsynth", "shor", "--n", "15", "--a", "2", "--script", "w=4,v=12", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert Path(tmp_path / "shor.json").exists()
