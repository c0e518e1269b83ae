import csv
import io
import json
import subprocess
import sys

import pytest

from lensfix.cli import main

MODELS = {
    "filament": "[model]\ntype = filament\nname = filament\nsigma0 = 0.125\n",
    "point": "[model]\ntype = point_ensemble\nname = point\nmasses = [1.0]\npositions = [[0, 0]]\n",
    "binary": "[model]\ntype = point_ensemble\nname = binary\nmasses = [0.5, 0.5]\npositions = [[-0.5, 0], [0.5, 0]]\n",
    "equal_degree": "[model]\ntype = raw\nu1 = [[1, 0, 1, 0]]\nv1 = [[0, 1, 1, 0]]\nu2 = [[0, 1, 1, 0]]\nv2 = [[1, 0, 1, 0]]\n",
    "asymmetric": "[model]\ntype = raw\nu1 = [[0, 0, 1, 0]]\nv1 = [[0, 1, 1, 0]]\nu2 = [[0, 0, 1.1, 0]]\nv2 = [[1, 0, 1, 0]]\n",
    "incomplete": "[model]\ntype = plummer\ntheta_e = 1\n",
}


@pytest.fixture
def cfg(tmp_path):
    def write(name):
        path = tmp_path / f"{name}.ini"
        path.write_text(MODELS[name])
        return str(path)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- validate ----------------------------------------------------------------------------


def test_validate_pass(cfg, capsys):
    code, out, _ = run(capsys, "validate", "--model", cfg("filament"))
    assert code == 0
    assert out.splitlines() == ["degree_condition   PASS", "conjugate_symmetry PASS", "decay              PASS"]


def test_validate_degree_failure(cfg, capsys):
    code, out, err = run(capsys, "validate", "--model", cfg("equal_degree"))
    assert code == 1
    assert "degree_condition   FAIL" in out
    assert "degree_condition" in err


def test_validate_missing_parameter(cfg, capsys):
    code, out, err = run(capsys, "validate", "--model", cfg("incomplete"))
    assert code == 2
    assert out == ""
    assert "'a'" in err


def test_usage_errors(cfg, capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "images", "--model", cfg("filament"))[0] == 2
    assert run(capsys, "images", "--model", cfg("filament"), "--source", "1;2")[0] == 2
    assert run(capsys, "validate", "--model", "/nonexistent.ini")[0] == 2
    assert run(capsys, "invariant", "--model", cfg("filament"))[0] == 2


# -- images ------------------------------------------------------------------------------


def test_images_filament(cfg, capsys):
    code, out, err = run(capsys, "images", "--model", cfg("filament"), "--source", "2,0")
    assert code == 0 and err == ""
    recs = [json.loads(l) for l in out.splitlines()]
    points, summary = recs[:-1], recs[-1]
    assert len(points) == 2
    assert [p["z1_re"] for p in points] == pytest.approx([0.1339745962, 1.8660254038], abs=1e-9)
    assert f"{summary['complex_sum_re']:.10f}" == "1.0000000000"
    assert summary["valid"] is True


def test_images_binary(cfg, capsys):
    _, out, _ = run(capsys, "images", "--model", cfg("binary"), "--source", "0.05,0")
    recs = [json.loads(l) for l in out.splitlines()][:-1]
    assert len(recs) == 5 and all(r["is_real"] for r in recs)
    code, out, _ = run(capsys, "images", "--model", cfg("binary"), "--source", "2,0")
    recs = [json.loads(l) for l in out.splitlines()]
    assert code == 0
    assert sum(r["is_real"] for r in recs[:-1]) == 3 and len(recs) == 6
    assert abs(recs[-1]["complex_sum_re"] - 1) < 1e-8


def test_images_on_caustic(cfg, capsys):
    code, out, err = run(capsys, "images", "--model", cfg("filament"), "--source", "1,0")
    assert code == 1
    assert json.loads(out.splitlines()[-1])["valid"] is False
    assert err
    code, out, _ = run(capsys, "images", "--model", cfg("point"), "--source", "0,0")
    assert code == 1
    assert json.loads(out.splitlines()[-1])["valid"] is False


def test_images_out_file(cfg, capsys, tmp_path):
    target = tmp_path / "img.jsonl"
    code, out, _ = run(capsys, "images", "--model", cfg("filament"), "--source", "2,0.5", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_bytes().count(b"\n") == 3
    assert b"\r" not in target.read_bytes()


# -- invariant ---------------------------------------------------------------------------


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_invariant_random(cfg, capsys):
    code, out, _ = run(capsys, "invariant", "--model", cfg("filament"), "--random", "100", "--seed", "42")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == ["zeta_re", "zeta_im", "n_fixed", "n_real", "sum_re", "sum_im", "real_sum", "valid"]
    assert len(rows) == 100
    code, out, _ = run(capsys, "invariant", "--model", cfg("binary"), "--random", "100", "--seed", "7")
    assert code == 0


def test_invariant_sources_file_with_centered_source(cfg, capsys, tmp_path):
    src = tmp_path / "sources.txt"
    src.write_text("re,im\n0,0\n0.5,0\n0.3,-0.2\n")
    code, out, err = run(capsys, "invariant", "--model", cfg("point"), "--sources", str(src))
    assert code == 0
    rows = _rows(out)
    assert [r["valid"] for r in rows] == ["false", "true", "true"]
    assert "excluded" in err


def test_invariant_violation_exit(cfg, capsys):
    code, _, err = run(capsys, "invariant", "--model", cfg("binary"), "--random", "3", "--tol", "1e-300")
    assert code == 1
    assert err.count("row ") == 3


def test_invariant_byte_stable(cfg, capsys):
    a = run(capsys, "invariant", "--model", cfg("binary"), "--random", "20", "--seed", "3")[1]
    b = run(capsys, "invariant", "--model", cfg("binary"), "--random", "20", "--seed", "3")[1]
    assert a == b


# -- scan / caustics -------------------------------------------------------------------


def test_scan_outputs(cfg, capsys, tmp_path):
    out_csv, poly, svg = tmp_path / "g.csv", tmp_path / "p.csv", tmp_path / "g.svg"
    code, out, err = run(
        capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1.2,1.2,9,9",
        "--out", str(out_csv), "--polylines", str(poly), "--svg", str(svg),
    )
    assert code == 0 and out == ""
    assert "max_count = 5" in err
    rows = _rows(out_csv.read_text())
    assert len(rows) == 81 and max(int(r["count"]) for r in rows) == 5
    assert poly.read_text().startswith("kind,polyline,vertex,x,y\ncaustic,0,0,")
    text = svg.read_text()
    assert text.startswith("<?xml") and "max_count = 5" in text
    first = svg.read_bytes()
    run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1.2,1.2,9,9", "--out", str(out_csv), "--svg", str(svg))
    assert svg.read_bytes() == first


def test_scan_jobs_identical(cfg, capsys):
    a = run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1,1,8,8")[1]
    b = run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1,1,8,8", "--jobs", "2")[1]
    assert a == b


def test_scan_bad_window(cfg, capsys):
    assert run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1,1,8")[0] == 2
    assert run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,-1,1,8,8")[0] == 2
    assert run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1,1,4,8")[0] == 2
    assert run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1,1,8.5,8")[0] == 2
    assert run(capsys, "scan", "--model", cfg("binary"), "--window", "0,0,1,1,8,8", "--jobs", "0")[0] == 2


def test_caustics_point_mass(cfg, capsys, tmp_path):
    svg = tmp_path / "c.svg"
    code, out, _ = run(capsys, "caustics", "--model", cfg("point"), "--window", "0,0,2,2,81,81", "--svg", str(svg))
    assert code == 0
    rows = _rows(out)
    crit = [r for r in rows if r["kind"] == "critical"]
    caus = [r for r in rows if r["kind"] == "caustic"]
    assert crit and caus
    assert max(abs(complex(float(r["x"]), float(r["y"]))) for r in caus) < 0.1
    assert svg.read_text().startswith("<?xml")


# -- verify ------------------------------------------------------------------------------


def test_verify_filament(cfg, capsys):
    code, out, _ = run(capsys, "verify", "--model", cfg("filament"), "--random", "5")
    assert code == 0
    assert all(line.startswith("PASS") for line in out.splitlines())


def test_verify_point(cfg, capsys):
    code, out, _ = run(capsys, "verify", "--model", cfg("point"), "--random", "5")
    assert code == 0
    assert "PASS closed_form" in out


def test_verify_corrupted(cfg, capsys):
    code, out, err = run(capsys, "verify", "--model", cfg("asymmetric"))
    assert code == 1
    assert out.splitlines()[-1].startswith("FAIL conjugate_symmetry")
    assert "conjugate_symmetry" in err


# -- entry point -------------------------------------------------------------------------


def test_module_entry_point(cfg):
    proc = subprocess.run(
        [sys.executable, "-m", "lensfix", "images", "--model", cfg("filament"), "--source", "2,0"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert proc.stdout.count("\n") == 3
