import csv
import dataclasses
import io
import json
import math

import pytest

from frontlab.bounds import sigma_bounds
from frontlab.cli import SweepSpec, main, run_sweep
from frontlab.core import ModelParams, ValidationError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def fields(line):
    return dict(item.split("=", 1) for item in line.split() if "=" in item)


# --- bounds ---------------------------------------------------------------

def test_bounds_t1(capsys):
    code, out, _ = run(capsys, "bounds", "--a", "1", "--b", "1")
    assert code == 0
    f = fields(out)
    assert float(f["lower"]) == 2 and float(f["upper"]) == 2


def test_bounds_sqrt_branch(capsys):
    code, out, _ = run(capsys, "bounds", "--a", "25", "--b", "0")
    assert code == 0
    assert float(fields(out)["upper"]) == 5


def test_bounds_negative_a(capsys):
    code, _, err = run(capsys, "bounds", "--a", "-1", "--b", "0")
    assert code == 2
    assert "error" in err


def test_bounds_formats(capsys):
    _, out, _ = run(capsys, "bounds", "--a", "4", "--b", "0", "--format", "json")
    rec = json.loads(out)
    assert rec["upper"] == pytest.approx(math.sqrt(5), rel=1e-15)
    _, out, _ = run(capsys, "bounds", "--a", "4", "--b", "0", "--format", "csv")
    assert out.splitlines()[0] == "a,b,lower,upper,lower_branch,upper_branch"


def test_unknown_command_is_usage_error(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "bounds", "--a", "1")[0] == 2


# --- sigma-star -----------------------------------------------------------

@pytest.mark.parametrize("a,b", [(0, 0), (1, 1)])
def test_sigma_star_two(capsys, a, b):
    code, out, _ = run(capsys, "sigma-star", "--a", str(a), "--b", str(b))
    assert code == 0
    f = fields(out)
    assert abs(float(f["sigma_star"]) - 2) <= 1e-4
    assert f["sandwich"] == "ok"


def test_sigma_star_a20(capsys):
    code, out, _ = run(capsys, "sigma-star", "--a", "20", "--b", "0", "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert 19 / math.sqrt(20) - 1e-4 <= rec["sigma_star"] <= math.sqrt(20) + 1e-4
    assert rec["settings"]["tol"] == 1e-4


def test_sigma_star_sandwich_violation_exits_3(capsys, monkeypatch):
    import frontlab.cli as cli

    real = cli.sigma_star

    def broken(p, tol):
        res = real(p, tol=tol)
        return dataclasses.replace(res, sigma_star=99.0, bounds_ok=False)

    monkeypatch.setattr(cli, "sigma_star", broken)
    code, _, err = run(capsys, "sigma-star", "--a", "1", "--b", "1")
    assert code == 3
    assert "99" in err


def test_sigma_star_inconclusive_exits_4(capsys, monkeypatch):
    import frontlab.cli as cli
    from frontlab.shooting import InconclusiveRegion

    def boom(p, tol):
        raise InconclusiveRegion("mixed verdicts")

    monkeypatch.setattr(cli, "sigma_star", boom)
    assert run(capsys, "sigma-star", "--a", "1", "--b", "1")[0] == 4


def test_repeat_invocations_identical(capsys):
    argv = ("sigma-star", "--a", "12", "--b", "5", "--format", "json")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second


# --- profile --------------------------------------------------------------

def test_profile_local_csv(capsys, tmp_path):
    out = tmp_path / "prof.csv"
    code, _, _ = run(capsys, "profile", "--a", "1", "--b", "1", "--tol", "1e-3",
                     "--out", str(out))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    phi = [float(r["phi"]) for r in rows]
    # the saddle tail decays like exp(-0.41 |xi|), so phi(-30) is 1 - O(1e-5)
    assert phi[0] == pytest.approx(1, abs=1e-4) and phi[-1] == pytest.approx(0, abs=1e-4)
    assert all(x >= y - 1e-12 for x, y in zip(phi, phi[1:]))


# --- sweep ----------------------------------------------------------------

def _sweep_rows(capsys, monkeypatch, *extra):
    monkeypatch.setenv("FRONTLAB_THREADS", "1")
    code, out, err = run(capsys, "sweep", *extra)
    return code, list(csv.DictReader(io.StringIO(out))), err


def test_sweep_single_point(capsys, monkeypatch):
    code, rows, err = _sweep_rows(capsys, monkeypatch, "--a-start", "0", "--a-stop", "0",
                                  "--b", "40")
    assert code == 0 and len(rows) == 1
    r = rows[0]
    assert float(r["sigma_star"]) >= 2
    assert float(r["sigma_star"]) <= float(r["sigma_upper"]) + 1e-4
    assert r["upper_branch"] == "T3"
    assert "tol=0.0001" in err


@pytest.mark.slow
def test_sweep_b0_full_range(capsys, monkeypatch):
    code, rows, _ = _sweep_rows(capsys, monkeypatch, "--b", "0")
    assert code == 0
    assert len(rows) == 41
    assert [float(r["a"]) for r in rows] == list(range(41))
    for r in rows:
        assert r["status"] == "ok"
        s = float(r["sigma_star"])
        assert float(r["sigma_lower"]) - 1e-3 <= s <= float(r["sigma_upper"]) + 1e-3


def test_sweep_parallel_matches_serial(capsys, monkeypatch):
    spec = SweepSpec((3.0, 6.0, 1.0), (0.0, 5.0))
    serial = run_sweep(spec, tol=1e-3, workers=1)
    parallel = run_sweep(spec, tol=1e-3, workers=2)
    assert serial == parallel
    assert [(r["a"], r["b"]) for r in serial] == spec.points()


def test_sweep_validation(capsys, monkeypatch):
    assert _sweep_rows(capsys, monkeypatch, "--a-step", "0")[0] == 2
    assert _sweep_rows(capsys, monkeypatch, "--a-start", "5", "--a-stop", "1")[0] == 2
    assert _sweep_rows(capsys, monkeypatch, "--mode", "nonlocal")[0] == 2
    monkeypatch.setenv("FRONTLAB_THREADS", "zero")
    assert run(capsys, "sweep", "--a-stop", "0")[0] == 2
    monkeypatch.setenv("FRONTLAB_THREADS", "0")
    assert run(capsys, "sweep", "--a-stop", "0")[0] == 2


def test_sweep_records_failures_without_aborting():
    spec = SweepSpec((-1.0, 1.0, 1.0), (0.0,))
    rows = run_sweep(spec, tol=1e-3)
    assert len(rows) == 3
    assert rows[0]["status"].startswith("invalid")
    assert rows[1]["status"] == rows[2]["status"] == "ok"


def test_sweep_spec_invariants():
    with pytest.raises(ValidationError):
        SweepSpec((0, 1, -1), (0,))
    with pytest.raises(ValidationError):
        SweepSpec((0, 1, 1), ())
    assert SweepSpec((0, 40, 1), (0, 5, 40)).points()[41] == (0, 5)
    sb = sigma_bounds(ModelParams(0, 40))
    assert sb.upper_branch == "T3"


# --- nonlocal -------------------------------------------------------------

def test_nonlocal_ratio_violation(capsys):
    code, _, err = run(capsys, "nonlocal", "--a", "1", "--b", "9", "--lambda", "2")
    assert code == 2
    assert "1.125" in err


def test_nonlocal_needs_lambda(capsys):
    assert run(capsys, "nonlocal", "--a", "1", "--b", "1")[0] == 2


def test_nonlocal_benchmark(capsys, tmp_path):
    prof = tmp_path / "front.csv"
    code, out, _ = run(capsys, "nonlocal", "--a", "1", "--b", "1", "--lambda", "2",
                       "--profile-out", str(prof))
    assert code == 0
    rec = json.loads(out)
    cap = rec["speed_cap"]
    assert cap == pytest.approx(2.6785714285714284, rel=1e-15)
    assert 2 - 5e-3 <= rec["sigma"] <= cap + 5e-3
    assert rec["settings"]["schedule"] == "deep"
    assert all(d["ok"] for d in rec["final"]["diagnostics"])
    assert prof.read_text().splitlines()[0] == "xi,phi,u,v"


def test_nonlocal_fkpp(capsys):
    code, out, _ = run(capsys, "nonlocal", "--a", "0", "--b", "0", "--lambda", "1")
    assert code == 0
    assert abs(json.loads(out)["sigma"] - 2) <= 5e-3


def test_nonlocal_solver_failure_names_stage(capsys, monkeypatch):
    import frontlab.cli as cli
    from frontlab.nonlocal_bvp import PicardNotContracting

    def boom(*a, **kw):
        raise PicardNotContracting("stalled")

    monkeypatch.setattr(cli, "continue_theta_alpha", boom)
    code, _, err = run(capsys, "nonlocal", "--a", "1", "--b", "1", "--lambda", "2")
    assert code == 5
    assert "continuation" in err
