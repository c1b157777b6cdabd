import math
import pathlib

import numpy as np
import pytest

import singbvp

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"


def fixture(name):
    return str(FIXTURES / name)


def test_p1_solution_matches_closed_form():
    out = singbvp.solve(fixture("p1.json"), x0=1.0)
    x, y = out["x"], out["y"]
    assert y.shape == (x.size, 2)
    mask = x <= 10.0
    assert np.max(np.abs(y[mask, 1] - x[mask] * np.exp(-x[mask]))) <= 1e-6
    assert np.max(np.abs(y[mask, 0])) <= 1e-6
    assert out["report"]["solvability"]["solvable"]


def test_classify_reports_lattice_and_index():
    r = singbvp.classify(fixture("p2_solvable.json"))
    assert r["dims"] == [1, 0, 0, 0, 0, 1]
    assert r["index"] == 0
    assert r["adjoint"]["ok"]


def test_shuffle_seed_keeps_dimensions():
    base = singbvp.classify(fixture("p3.json"))
    shuffled = singbvp.classify(fixture("p3.json"), shuffle_seed=7)
    assert shuffled["dims"] == base["dims"]
    assert shuffled["index"] == base["index"]


def test_unsolvable_forcing_raises():
    r = singbvp.solvability(fixture("p2_unsolvable.json"), x0=1.0)
    assert not r["solvable"]
    assert r["residual_P6_norm"] == pytest.approx(math.e * math.sqrt(math.pi / 2), rel=1e-8)
    with pytest.raises(singbvp.UnsolvableError):
        singbvp.solve(fixture("p2_unsolvable.json"), x0=1.0)


def test_errors_carry_their_kind():
    with pytest.raises(singbvp.SolverError, match="^syntax"):
        singbvp.classify(fixture("malformed.json"))
    with pytest.raises(singbvp.SolverError, match="^domain"):
        singbvp.solve(fixture("p1.json"), tol=0.5)


def test_green_battery_passes():
    r = singbvp.verify_green(fixture("p1.json"), x0=1.0)
    assert r["ok"]
    assert {c["status"] for c in r["checks"]} == {"pass"}


def test_manufacture_round_trip():
    problem = singbvp.manufacture(fixture("p1_ystar.json"))
    assert problem["A"] == [[2.0, 0.0], [0.0, -1.0]]
    out = singbvp.solve(problem, x0=1.0)
    assert out["report"]["diagnostics"]["ode_residual"] <= 1e-6


def test_special_functions():
    assert singbvp.reg_lower_gamma(2.0, 1.0) == pytest.approx(1 - 2 / math.e, rel=1e-14)
    e = singbvp.mat_exp(np.diag([1.0, -1.0]))
    assert np.allclose(e, np.diag([math.e, 1 / math.e]), rtol=1e-14)
