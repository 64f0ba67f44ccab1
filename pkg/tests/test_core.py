import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontlab.core import (SWEEP_COLUMNS, Grid1D, ModelParams, NegativeParameter,
                           NonFiniteValue, NonlocalConditionViolated, OddN, SigmaBounds,
                           TooCoarse, ValidationError, WaveProfile, fmt_float,
                           grid_for_spacing, make_grid, parse, serialize, validate_params)


# --- parameters -----------------------------------------------------------

def test_nonlocal_ok_when_ratio_below_one():
    p = ModelParams(1, 1, 2)
    assert validate_params(p, "nonlocal") is p
    assert p.coupling_ratio == 0.125
    assert p.nonlocal_solvable


def test_local_fkpp_ok():
    assert validate_params(ModelParams(0, 0, 0), "local") == ModelParams(0, 0, 0)


def test_ratio_violation_quotes_value():
    with pytest.raises(NonlocalConditionViolated, match="1.125"):
        validate_params(ModelParams(1, 9, 2), "nonlocal")


@pytest.mark.parametrize("field", ["a", "b", "lam"])
def test_negative_rejected(field):
    kw = {"a": 1.0, "b": 1.0, "lam": 0.0}
    kw[field] = -0.5
    with pytest.raises(NegativeParameter):
        validate_params(ModelParams(**kw), "local")


def test_mode_mismatch():
    with pytest.raises(ValidationError):
        validate_params(ModelParams(0, 0, 1.0), "local")
    with pytest.raises(ValidationError):
        validate_params(ModelParams(0, 0, 0.0), "nonlocal")


@given(st.floats(0, 50), st.floats(0, 50), st.floats(0, 10))
def test_solvability_flag(a, b, lam):
    p = ModelParams(a, b, lam)
    assert p.nonlocal_solvable == (lam > 0 and b < 2 * lam * lam)


# --- grids ----------------------------------------------------------------

def test_grid_examples():
    g = make_grid(10, 2000)
    assert g.h == 0.01
    assert g.xi[1000] == 0.0
    assert make_grid(30, 6000).h == 0.01
    with pytest.raises(OddN):
        make_grid(5, 7)
    with pytest.raises(TooCoarse):
        make_grid(5, 6)


@given(st.floats(0.5, 200), st.integers(4, 5000))
def test_grid_invariants(alpha, half):
    g = make_grid(alpha, 2 * half)
    xi = g.xi
    assert xi[0] == -alpha and xi[-1] == alpha
    assert xi[g.mid] == 0.0
    assert len(xi) == g.n + 1
    assert g.h * g.n == pytest.approx(2 * alpha, rel=1e-15)
    assert np.all(np.diff(xi) > 0)
    assert np.allclose(np.diff(xi), g.h, rtol=1e-9, atol=1e-12)


def test_grid_for_spacing_even():
    g = grid_for_spacing(12.345, 0.01)
    assert g.n % 2 == 0
    assert abs(g.h - 0.01) < 1e-5


# --- profiles -------------------------------------------------------------

def _tanh_profile(n=40, alpha=10.0, **kw):
    g = make_grid(alpha, n)
    return WaveProfile(g, 0.5 * (1 - np.tanh(g.xi / 2)), 2.0, **kw)


def test_profile_arrays_frozen():
    prof = _tanh_profile()
    with pytest.raises(ValueError):
        prof.phi[0] = 3.0


def test_profile_shape_and_theta_checked():
    g = make_grid(1, 8)
    with pytest.raises(ValidationError):
        WaveProfile(g, np.zeros(8), 2.0)
    with pytest.raises(ValidationError):
        WaveProfile(g, np.zeros(9), 2.0, theta=1 / 3)


def test_invariant_violations():
    assert _tanh_profile().invariant_violations() == []
    g = make_grid(1, 8)
    bumpy = np.linspace(1, 0, 9)
    bumpy[4] = bumpy[3] + 0.01
    assert "monotone" in WaveProfile(g, bumpy, 2.0).invariant_violations()
    assert "bounded" in WaveProfile(g, np.linspace(1.1, 0, 9), 2.0).invariant_violations()
    flat = np.array([1, 1, 1, 0.8, 0.5, 0.2, 0, 0, 0], dtype=float)
    assert WaveProfile(g, flat, 2.0).invariant_violations() == []


# --- serialization --------------------------------------------------------

def test_bounds_csv_header():
    text = serialize(SigmaBounds(0, 0, 2, 2, "trivial-2", "T2-fisher"), "csv").decode()
    header, row = text.strip().split("\n")
    assert header == "a,b,lower,upper,lower_branch,upper_branch"
    assert row == "0,0,2,2,trivial-2,T2-fisher"


def test_profile_json_counts():
    rec = json.loads(serialize(_tanh_profile(n=8), "json"))
    assert len(rec["phi"]) == 9
    assert rec["kind"] == "wave_profile"


def test_nan_rejected():
    g = make_grid(1, 8)
    phi = np.linspace(1, 0, 9)
    phi[3] = np.nan
    with pytest.raises(NonFiniteValue):
        serialize(WaveProfile(g, phi, 2.0), "json")
    with pytest.raises(NonFiniteValue):
        serialize(SigmaBounds(0, 0, math.inf, 2, "x", "y"), "csv")


def test_fmt_float_17_digits():
    assert fmt_float(0.1) == "0.10000000000000001"
    assert float(fmt_float(1 / 3)) == 1 / 3


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.integers(4, 50), st.floats(0.1, 100), finite,
       st.floats(0, 0.33), st.booleans(), st.data())
def test_profile_json_roundtrip(half, alpha, sigma, theta, with_u, data):
    g = make_grid(alpha, 2 * half)
    arr = st.lists(finite, min_size=len(g), max_size=len(g))
    phi = np.array(data.draw(arr))
    u = np.array(data.draw(arr)) if with_u else None
    v = np.array(data.draw(arr)) if with_u else None
    prof = WaveProfile(g, phi, sigma, theta, u=u, v=v)
    back = parse(serialize(prof, "json"), "json")
    assert back == prof


@given(finite, finite, finite, finite, st.text(max_size=12), st.text(max_size=12))
def test_bounds_roundtrip(a, b, lo, up, lb, ub):
    sb = SigmaBounds(a, b, lo, up, lb, ub)
    assert parse(serialize(sb, "json"), "json") == sb


@given(st.lists(st.tuples(finite, finite, st.one_of(st.none(), finite)), min_size=1, max_size=6))
def test_sweep_roundtrip(rows_in):
    rows = [{"a": a, "b": b, "sigma_lower": 2.0, "sigma_upper": 3.0, "sigma_star": s,
             "lower_branch": "trivial-2", "upper_branch": "T3", "status": "ok"}
            for a, b, s in rows_in]
    assert parse(serialize(rows, "json"), "json") == rows
    back = parse(serialize(rows, "csv"), "csv")
    assert back == rows
    assert tuple(serialize(rows, "csv").decode().split("\n")[0].split(",")) == SWEEP_COLUMNS


def test_profile_csv_columns():
    prof = _tanh_profile(n=8)
    text = serialize(prof, "csv").decode()
    assert text.split("\n")[0] == "xi,phi,u,v"
    back = parse(text, "csv")
    assert np.array_equal(back["phi"], prof.phi)
    assert back["u"] is None


def test_serialization_deterministic():
    prof = _tanh_profile()
    assert serialize(prof, "csv") == serialize(prof, "csv")
    assert serialize(prof, "json") == serialize(prof, "json")
