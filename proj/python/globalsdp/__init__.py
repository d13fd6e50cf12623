"""Python front end for the globalsdp solver. Reports come back as dicts."""

import json

from . import _globalsdp
from ._globalsdp import AssumptionViolation, UsageError, catalog_ids, gen_eig_min

__all__ = [
    "AssumptionViolation",
    "UsageError",
    "catalog_ids",
    "check_assumptions",
    "gen_eig_min",
    "multistart",
    "oracle",
    "run_cli",
    "solve",
    "verify_kkt",
]


def solve(problem="", *, text="", tol=1e-8, override_assumptions=False, trace=False):
    """Bisection solve of a catalog id or of a JSON problem text."""
    return json.loads(_globalsdp.solve(problem, text, tol, override_assumptions, trace))


def multistart(problem, *, starts=16, seed=42, override_assumptions=False, threads=0):
    return json.loads(_globalsdp.multistart(problem, starts, seed, override_assumptions, threads))


def check_assumptions(problem, *, samples=200, seed=None):
    if seed is None:
        return json.loads(_globalsdp.check_assumptions(problem, samples))
    return json.loads(_globalsdp.check_assumptions(problem, samples, seed))


def verify_kkt(problem, x, y, *, tol=1e-6):
    return json.loads(_globalsdp.verify_kkt(problem, list(x), float(y), tol))


def oracle(problem, *, step=0.0):
    """Grid-search reference; step 0 uses the catalog default grid."""
    return json.loads(_globalsdp.oracle(problem, step))


def run_cli(*args):
    """Runs the command-line front end in-process; returns (exit code, stdout, stderr)."""
    return _globalsdp.run_cli([str(a) for a in args])
