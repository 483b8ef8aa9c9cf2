import csv
import io
import json
import math
import subprocess
import sys

from sphere_strings.cli import banner, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_banner_has_hash():
    b = banner()
    assert b.startswith("sphere-strings ")
    assert len(b.split("tables ")[1]) == 16


def test_algebra_mul_json(capsys):
    code, out, _ = run(capsys, "algebra", "mul", "--n", "2", "B[0]", "A[0]", "--format", "json")
    assert code == 0
    assert json.loads(out)["product"] == "-A'[1]"


def test_algebra_verify(capsys):
    code, out, _ = run(capsys, "algebra", "verify", "--n", "2", "--cutoff", "6")
    assert code == 0
    assert out.startswith("# sphere-strings")


def test_algebra_involutions(capsys):
    code, out, _ = run(capsys, "algebra", "involutions", "--n", "3", "--format", "json")
    assert code == 0
    assert "E[0]" in out


def test_usage_errors(capsys):
    assert run(capsys, "algebra", "mul", "--n", "5", "A[0]", "A[0]")[0] == 2
    assert run(capsys, "algebra", "mul", "--n", "2", "A[1]", "A[0]")[0] == 2
    assert run(capsys, "homology", "table")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "coalgebra", "apply", "--n", "2", "A[0]")[0] == 2


def test_coalgebra_apply_notes_reindexing(capsys):
    code, out, _ = run(capsys, "coalgebra", "apply", "--n", "2", "--map", "copairing", "A'[3]")
    assert code == 0
    assert "A[0] x A[2] + A[2] x A[0]" in out
    assert "l = 0..m" in out


def test_coalgebra_dual_and_verify(capsys):
    code, out, _ = run(capsys, "coalgebra", "dual", "--n", "2", "a[1]", "b[0]", "--format", "json")
    assert code == 0 and json.loads(out)["product"] == "-b[2]"
    assert run(capsys, "coalgebra", "verify", "--n", "4", "--cutoff", "4")[0] == 0


def test_homology_table_csv(capsys):
    code, out, _ = run(capsys, "homology", "table", "--space", "P", "--n", "2",
                       "--max-degree", "5", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["degree"] for r in rows] == [str(i) for i in range(6)]
    assert rows[1]["group"] == "Z2"
    assert rows[3]["group"] == "Z + Z2"


def test_homology_diagram(capsys):
    code, out, _ = run(capsys, "homology", "diagram", "--n", "4", "--levels", "2")
    assert code == 0 and "(3pi)^2" in out


def test_geodesics_shoot(capsys):
    code, out, _ = run(capsys, "geodesics", "shoot", "--metric", "round", "--n", "2",
                       "--level", "0", "--format", "json")
    assert code == 0
    assert abs(json.loads(out)["length"] - math.pi) < 1e-6


def test_geodesics_nonconvergence(capsys):
    code, _, err = run(capsys, "geodesics", "shoot", "--n", "2", "--speed", "5.5", "--max-iter", "1")
    assert code == 3 and err


def test_resonance_and_density(capsys):
    code, out, _ = run(capsys, "resonance", "--n", "4", "--format", "json")
    assert code == 0 and json.loads(out)["beta"] == "4"
    code, out, _ = run(capsys, "density", "--n", "2", "--k-max", "4", "--format", "json")
    assert code == 0 and json.loads(out)["density"]["passed"]


def test_density_failure_exit(capsys):
    code, _, _ = run(capsys, "density", "--n", "2", "--k-max", "4", "--eps", "1e-9",
                     "--metric", "ellipsoid:1,1,1.1", "--direction", "0,0,1", "--speed", "3")
    assert code == 1


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# defaults\nn = 4\nmax_degree = 3\nformat = json\n")
    code, out, _ = run(capsys, "homology", "table", "--config", str(cfg))
    assert code == 0
    rows = json.loads(out)["rows"]
    assert len(rows) == 4 and rows[3]["group"] == "Z2"
    # flags on the command line win over the file
    code, out, _ = run(capsys, "homology", "table", "--config", str(cfg), "--max-degree", "1")
    assert len(json.loads(out)["rows"]) == 2
    assert run(capsys, "homology", "table", "--config", str(tmp_path / "missing"))[0] == 2


def test_deterministic_output():
    cmd = [sys.executable, "-m", "sphere_strings.cli", "geodesics", "spectrum", "--n", "2",
           "--count", "2", "--seed", "3", "--format", "csv"]
    a = subprocess.run(cmd, capture_output=True, text=True)
    b = subprocess.run(cmd, capture_output=True, text=True)
    assert a.returncode == 0, a.stderr
    assert a.stdout == b.stdout
    rows = list(csv.DictReader(io.StringIO(a.stdout)))
    assert list(rows[0]) == ["length", "energy", "index", "nullity_flag"]
