import csv
import json
import subprocess
import sys

import pytest

from natred.cli import main, parse_grid, random_points, run_config, strip_time, sweep
from natred.report import VerificationReport


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_tangent_pass(capsys):
    code, out, _ = run(capsys, "run", "--pipeline", "tangent", "--algebra", "su2", "--a", "1", "--b", "1")
    assert code == 0
    assert "[PASS] curvature_scalar: value=2.0" in out and "overall: PASS" in out


def test_degenerate_and_config_errors(capsys):
    code, _, err = run(capsys, "run", "--pipeline", "tangent", "--algebra", "su2", "--a", "0", "--b", "1")
    assert code == 3 and "degenerate" in err
    code, _, err = run(capsys, "run", "--pipeline", "appendix-gxg", "--algebra", "su2",
                       "--a", "0", "--b", "0", "--c", "0", "--d", "0")
    assert code == 3
    code, _, err = run(capsys, "run", "--pipeline", "tangent", "--algebra", "e8", "--a", "1", "--b", "1")
    assert code == 2 and "su2" in err and "su3" in err
    code, _, err = run(capsys, "run", "--pipeline", "tangent", "--algebra", "su2", "--a", "1")
    assert code == 2
    code, _, _ = run(capsys, "run", "--pipeline", "appendix-gxg", "--algebra", "su2",
                     "--a", "2", "--b", "3", "--c", "4", "--d", "5", "--lambda", "-1")
    assert code == 2


def test_unknown_pipeline_lists_options(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--pipeline", "nope", "--algebra", "su2"])
    assert exc.value.code == 2
    assert "tangent" in capsys.readouterr().err


def test_product_family_flat_locus(capsys):
    code, out, _ = run(capsys, "run", "--pipeline", "appendix-gxg", "--algebra", "su2",
                       "--a", "2", "--b", "1", "--c", "1", "--d", "3", "--lambda", "1")
    assert code == 0
    assert "flat locus: Sigma = 0" in out and "holonomy_dim: value=0" in out


def test_json_byte_identical_and_matches_text(capsys):
    args = ["run", "--pipeline", "s7", "--a", "1", "--b", "0", "--samples", "2", "--seed", "5"]
    _, j1, _ = run(capsys, *args, "--format", "json")
    _, j2, _ = run(capsys, *args, "--format", "json")
    d1, d2 = json.loads(j1), json.loads(j2)
    assert d1.pop("wall_time") is not None and d2.pop("wall_time") is not None
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)
    _, text, _ = run(capsys, *args, "--format", "text")
    rep = VerificationReport.from_dict({**d1, "wall_time": None})
    # same per-check records; only the order of the echoed inputs differs (JSON keys are sorted)
    checks = lambda t: [ln for ln in t.splitlines() if ln.startswith("[")]
    assert checks(rep.to_text()) == checks(text) and len(checks(text)) == len(d1["checks"])
    for c in d1["checks"]:
        assert f"] {c['name']}: value=" in text


def test_out_file_and_file_algebra(tmp_path, capsys):
    alg = tmp_path / "su2.json"
    alg.write_text(json.dumps({"name": "f", "dim": 3, "compact": True,
                               "entries": [[1, 2, 3, 1], [2, 3, 1, 1], [3, 1, 2, 1]]}))
    out = tmp_path / "rep.json"
    code, stdout, _ = run(capsys, "run", "--pipeline", "tangent", "--file", str(alg),
                          "--a", "2", "--b", "1", "--format", "json", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["passed"] is True
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, _ = run(capsys, "run", "--pipeline", "tangent", "--file", str(bad), "--a", "1", "--b", "1")
    assert code == 2


def test_validate_subcommand(capsys):
    code, out, _ = run(capsys, "validate", "--algebra", "so4")
    assert code == 0 and "jacobi" in out


def test_parse_grid():
    pts = parse_grid("a=0.5,1,2;b=-1,0,1")
    assert len(pts) == 9 and pts[0] == {"a": 0.5, "b": -1.0} and pts[-1] == {"a": 2.0, "b": 1.0}
    assert parse_grid("") == []
    with pytest.raises(ValueError):
        parse_grid("q=1")


def test_sweep_grid_flags_flat_column(capsys, tmp_path):
    path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "sweep", "--pipeline", "tangent", "--algebra", "su2",
                       "--grid", "a=0.5,1,2;b=-1,0,1", "--csv", str(path))
    assert code == 0 and "9 points, 0 failed" in out
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 9
    for r in rows:
        assert (r["flat"] == "True") == (float(r["b"]) == 0.0)
        assert r["holonomy_dim"] == ("0" if float(r["b"]) == 0.0 else "3")


def test_sweep_empty_grid(capsys):
    code, out, _ = run(capsys, "sweep", "--pipeline", "tangent", "--algebra", "su2", "--grid", "",
                       "--format", "json")
    assert code == 0 and json.loads(out)["summary"]["count"] == 0


def test_sweep_jobs_invariance():
    base = {"pipeline": "tangent", "algebra": "su2", "seed": 3, "tol": None}
    pts = random_points("tangent", 3, 6)
    one = strip_time(sweep(base, pts, 1))
    two = strip_time(sweep(base, pts, 2))
    assert one == two and one["summary"]["count"] == 6


def test_random_product_points_nondegenerate():
    from natred.product import ProductParams
    for pt in random_points("appendix-gxg", 1, 32):
        assert abs(ProductParams(pt["a"], pt["b"], pt["c"], pt["d"], pt["lambda"]).delta) > 1e-3
    assert random_points("appendix-gxg", 1, 5) == random_points("appendix-gxg", 1, 5)


def test_run_config_direct():
    rep = run_config({"pipeline": "direct-product-crosscheck", "algebra": "su2", "a": 1.0, "b": 1.0})
    assert rep.passed and rep.info["torsion_sign"] == -1


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "natred.cli", "run", "--pipeline", "spinor-remark21",
                        "--a", "1", "--b", "0", "--samples", "4"], capture_output=True, text=True)
    assert r.returncode == 0 and "overall: PASS" in r.stdout
