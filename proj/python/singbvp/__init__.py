"""Boundary value problems y' = (A/x + B(x)) y + a/x + f(x) on [0, inf).

Problems are given as JSON text (or a dict, or a path to a JSON file) in the
same format the ``singbvp`` command-line tool reads.
"""

import json
import os

from . import _core
from ._core import REPORT_SCHEMA, SolverError, UnsolvableError, mat_exp, reg_lower_gamma

__all__ = [
    "REPORT_SCHEMA",
    "SolverError",
    "UnsolvableError",
    "classify",
    "manufacture",
    "mat_exp",
    "reg_lower_gamma",
    "solvability",
    "solve",
    "verify_green",
]


def _text(problem):
    if isinstance(problem, dict):
        return json.dumps(problem)
    if isinstance(problem, os.PathLike) or (isinstance(problem, str) and not problem.lstrip().startswith("{")):
        with open(problem, encoding="utf-8") as fh:
            return fh.read()
    return problem


def classify(problem, x0=None, tol=1e-8, shuffle_seed=None):
    """Lattice dimensions, Noether index and adjoint integrability verdicts."""
    return json.loads(_core.classify(_text(problem), x0, tol, shuffle_seed))


def solvability(problem, x0=None, tol=1e-8):
    """Orthogonality residuals of the forcing against the integrable adjoint solutions."""
    return json.loads(_core.solvability(_text(problem), x0, tol))


def solve(problem, v1=None, v2=None, x0=None, x_inf=None, tol=1e-8, kappa=None, beta=None):
    """Solves the main problem; returns grid ``x``, values ``y`` (rows) and the report."""
    out = _core.solve(_text(problem), v1, v2, x0, x_inf, tol, kappa, beta)
    out["report"] = json.loads(out["report"])
    return out


def verify_green(problem, x0=None, tol=1e-8, probes=3):
    return json.loads(_core.verify_green(_text(problem), x0, tol, probes))


def manufacture(ystar):
    """Problem (as a dict) whose main boundary value problem is solved by ystar."""
    return json.loads(_core.manufacture(_text(ystar)))
