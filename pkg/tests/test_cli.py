import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from anosov.cli import EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, main
from anosov.linalg import Representation


@pytest.fixture(scope="module")
def reps(tmp_path_factory):
    d = tmp_path_factory.mktemp("reps")
    paths = {}
    for name, argv in {
        "j": ["zoo", "build", "fuchsian-free"],
        "s2": ["zoo", "build", "fuchsian-free", "--sym", "2"],
        "disc": ["zoo", "build", "fuchsian-free", "--ball"],
        "triv": ["zoo", "build", "trivial"],
        "octagon": ["zoo", "build", "surface-octagon"],
    }.items():
        p = d / f"{name}.json"
        assert main(argv + ["-o", str(p)]) == EXIT_OK
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_zoo_list_and_roundtrip(capsys, reps):
    code, out, _ = run(capsys, "zoo", "list")
    assert code == EXIT_OK and "fuchsian-free" in out.split()
    with open(reps["s2"]) as fh:
        rho = Representation.from_json(json.load(fh))
    assert rho.dim == 3 and rho.rank == 2
    code, out, _ = run(capsys, "zoo", "build", "fuchsian-free", "--t", "1.5", "--double")
    back = Representation.from_json(json.loads(out))
    assert back.dim == 4 and back.summands is not None


def test_holder_output(capsys, reps):
    code, out, _ = run(capsys, "holder", "--rep", reps["s2"], "--radius", "6")
    assert code == EXIT_OK
    assert out.startswith("estimate 1.0000000000")
    code, out, _ = run(capsys, "holder", "--rep", reps["j"], "--radius", "5", "--max-length", "4", "--json")
    doc = json.loads(out)
    assert doc["estimate"] == pytest.approx(1.0) and doc["eigen_estimate"] == pytest.approx(1.0)


def test_errors_exit_2(capsys, reps):
    code, _, err = run(capsys, "diagnose", "--rep", reps["j"], "--checks", "divergence", "--radius", "-1")
    assert code == EXIT_ERROR and err.startswith("error:")
    assert run(capsys, "diagnose", "--rep", reps["j"], "--checks", "nonsense")[0] == EXIT_ERROR
    assert run(capsys, "diagnose", "--rep", "/nonexistent.json", "--checks", "qie")[0] == EXIT_ERROR
    assert run(capsys, "zoo", "build", "nowhere")[0] == EXIT_ERROR
    assert run(capsys, "frobnicate")[0] == EXIT_ERROR
    assert run(capsys, "interval", "--rep1", reps["j"], "--rep2", reps["s2"], "--p", "2", "--q", "3",
               "--radius", "5", "--max-length", "4")[0] == EXIT_ERROR
    assert run(capsys, "hilbert", "--rep", reps["s2"], "--word", "b")[0] == EXIT_ERROR


def test_diagnose_text_and_strict(capsys, reps):
    code, out, _ = run(capsys, "diagnose", "--rep", reps["j"], "--checks", "divergence,qie", "--radius", "5")
    assert code == EXIT_OK
    assert "divergence: consistent" in out and "qie: consistent" in out
    code, out, _ = run(capsys, "diagnose", "--rep", reps["octagon"], "--checks", "ccartan", "--radius", "3")
    assert code == EXIT_OK and "ccartan_ii: inconclusive" in out
    code, _, _ = run(capsys, "diagnose", "--rep", reps["octagon"], "--checks", "ccartan", "--radius", "3",
                     "--strict")
    assert code == EXIT_INCONCLUSIVE


def test_diagnose_json_schema(capsys, reps):
    code, out, _ = run(capsys, "diagnose", "--rep", reps["s2"], "--rep2", reps["j"],
                       "--checks", "directsum,mu_lambda", "--element", "abA", "--radius", "5",
                       "--max-length", "5", "--json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert [r["criterion"] for r in doc["reports"]] == ["directsum", "mu_lambda"]
    assert doc["reports"][0]["verdict"] == "consistent"
    assert "precondition_gap" in doc["reports"][0]["constants"]


def test_diagnose_byte_identical_across_threads(reps, tmp_path):
    outs = []
    for t in (1, 4):
        p = tmp_path / f"t{t}.json"
        code = main(["diagnose", "--rep", reps["j"], "--checks", "divergence,ccartan,gromov,ugsp_gromov",
                     "--radius", "5", "--threads", str(t), "--json", str(p)])
        assert code == EXIT_OK
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_diagnose_csv_and_svg(reps, tmp_path, capsys):
    c, s = tmp_path / "t.csv", tmp_path / "t.svg"
    code, _, _ = run(capsys, "diagnose", "--rep", reps["j"], "--checks", "ccartan", "--radius", "5",
                     "--csv", str(c), "--svg", str(s))
    assert code == EXIT_OK
    with open(c) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["criterion", "table", "x", "y"] and len(rows) > 5
    svg = s.read_text()
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")


def test_limits_export(capsys, reps, tmp_path):
    code, out, _ = run(capsys, "limits", "export", "--rep", reps["j"], "--rays", "a,b:aB", "--depths", "5,10",
                       "--json")
    assert code == EXIT_OK
    rows = json.loads(out)["limits"]
    assert len(rows) == 4
    assert np.allclose(rows[0]["point"], [1, 0])
    p = tmp_path / "l.csv"
    assert main(["limits", "export", "--rep", reps["s2"], "--count", "3", "--csv", str(p)]) == EXIT_OK
    with open(p) as fh:
        assert len(list(csv.reader(fh))) == 1 + 3 * 3


def test_floyd_commands(capsys, reps):
    code, out, _ = run(capsys, "floyd", "dist", "--rep", reps["j"], "--g", "", "--h", "ab", "--radius", "3",
                       "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["distance"] == pytest.approx(0.75)
    code, out, _ = run(capsys, "floyd", "check", "--rep", reps["j"], "--f", "exp:2.718281828", "--radius", "4")
    assert code == EXIT_OK and "floyd: consistent" in out


def test_hilbert_commands(capsys, reps):
    code, out, _ = run(capsys, "hilbert", "--rep", reps["disc"], "--word", "a", "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["displacement"] == pytest.approx(4.0)
    code, out, _ = run(capsys, "hilbert", "--rep", reps["disc"], "--radius", "4", "--json")
    doc = json.loads(out)
    assert doc["reports"][0]["constants"]["kappa"] < 1e-9


def test_interval_and_gromov_commands(capsys, reps):
    code, out, _ = run(capsys, "interval", "--rep1", reps["j"], "--rep2", reps["s2"], "--p", "1", "--q", "2",
                       "--radius", "5", "--max-length", "4", "--json")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["reports"][0]["constants"]["residual"] == pytest.approx(0.0, abs=1e-12)
    code, out, _ = run(capsys, "gromov", "--rep", reps["j"], "--g", "ab", "--h", "a", "--phi", "epsilon:1",
                       "--json")
    doc = json.loads(out)
    assert doc["group_product"] == 1 and doc["product"] > 0
    assert run(capsys, "gromov", "--rep", reps["j"], "--g", "ab")[0] == EXIT_ERROR
    code, out, _ = run(capsys, "gromov", "--rep", reps["j"], "--radius", "4")
    assert code in (EXIT_OK,) and "gromov_i" in out


@pytest.mark.skipif(shutil.which("anosov") is None, reason="console script not installed")
def test_console_script(reps):
    out = subprocess.run(["anosov", "holder", "--rep", reps["s2"], "--radius", "5"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("estimate 1.0000000000")


def test_module_entry_point(reps):
    out = subprocess.run([sys.executable, "-m", "anosov.cli", "zoo", "list"], capture_output=True, text=True)
    assert out.returncode == 0 and "surface-octagon" in out.stdout
