import numpy as np
import pytest

from timesched import Instance
from timesched.lp.relaxations import build_lp_unrelated, frac_unrelated_from_x

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion (printed in the terminal summary)."""

    def record(name: str, ok: bool, detail: str = ""):
        _ACCEPTANCE.append((name, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")


def synthetic_unrelated(rng: np.random.Generator, n: int, m: int, pmax: int = 16, tiny: float = 0.7,
                        pmin_bad: int = 8):
    """A random LP-feasible start-indexed point with many bad edges.

    LP optima of random instances are nearly integral, so these points are
    what exercises the bad-edge, block and grouping logic. A job chosen as
    bad (probability ``tiny``) gets one chunk of mass below 0.01 starting at
    time 0 on one machine, and the rest of its mass elsewhere.
    Returns ``(instance, frac)``.
    """
    P = [[int(rng.integers(1, pmax + 1)) for _ in range(n)] for _ in range(m)]
    bad_on = [int(rng.integers(m)) if rng.random() < tiny else None for _ in range(n)]
    for j, i in enumerate(bad_on):
        if i is not None:
            P[i][j] = int(rng.integers(pmin_bad, pmax + 1))
    inst = Instance.unrelated([int(rng.integers(1, 6)) for _ in range(n)], P)
    T = inst.T
    p = np.array(P)
    cap = np.ones((m, T))
    x = np.zeros((m, n, T))

    def put(i, j, s, amount):
        room = cap[i, s:s + p[i, j]].min()
        amount = min(amount, room)
        if amount > 1e-9:
            x[i, j, s] += amount
            cap[i, s:s + p[i, j]] -= amount
            return amount
        return 0.0

    for j in range(n):
        left = 1.0
        if bad_on[j] is not None:
            left -= put(bad_on[j], j, 0, float(rng.uniform(0.002, 0.0099)))
        others = [i for i in range(m) if i != bad_on[j]] or list(range(m))
        for _ in range(50):
            if left <= 1e-12:
                break
            i = others[int(rng.integers(len(others)))]
            s = int(rng.integers(0, T - p[i, j] + 1))
            left -= put(i, j, s, min(left, float(rng.choice([0.25, 0.5, 1.0]))))
        while left > 1e-12:
            i, s = max(((i, s) for i in others for s in range(T - p[i, j] + 1)),
                       key=lambda t: (cap[t[0], t[1]:t[1] + p[t[0], j]].min(), -t[1]))
            left -= put(i, j, s, left)
    return inst, frac_unrelated_from_x(inst, x)


def unrelated_point(inst, x: np.ndarray) -> np.ndarray:
    """Flatten ``x[i, j, s]`` into the column order of the unrelated LP."""
    lp = build_lp_unrelated(inst)
    return lp, np.array([x[i, j, s] for (_, i, j, s) in lp.var_keys])
