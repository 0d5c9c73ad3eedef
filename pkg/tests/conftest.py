import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import linprog

from kmsharp.schedule import weights

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def curves():
    with open(DATA / "reference_curves.json") as fh:
        return json.load(fh)


def lp_value(s, costs, m, n):
    """Optimal cost of the bipartite transport problem by scipy's HiGHS LP.

    Independent of the package's own solvers; float precision only.
    """
    sup = np.array([float(x) for x in weights(s, m)])
    dem = np.array([float(x) for x in weights(s, n)])
    C = np.array([[float(costs.get(i - 1, j - 1)) for j in range(n + 1)] for i in range(m + 1)])
    A = []
    for i in range(m + 1):
        row = np.zeros((m + 1, n + 1))
        row[i, :] = 1
        A.append(row.ravel())
    for j in range(n + 1):
        col = np.zeros((m + 1, n + 1))
        col[:, j] = 1
        A.append(col.ravel())
    res = linprog(C.ravel(), A_eq=np.array(A), b_eq=np.concatenate([sup, dem]),
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def pi_bigint(alphas, i, n):
    """``pi_i^n`` as an exact ratio built from integer numerators and denominators."""
    num, den = 1, 1
    a = [Fraction(1)] + [Fraction(x) for x in alphas]
    num *= a[i].numerator
    den *= a[i].denominator
    for k in range(i + 1, n + 1):
        num *= a[k].denominator - a[k].numerator
        den *= a[k].denominator
    return num, den


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail}")
    missing = [k for k in range(1, 14) if k not in results]
    if missing:
        terminalreporter.write_line(f"not run: {missing}")
