"""Time-indexed LP relaxations, their solution types and solution repair.

* identical machines with precedence: ``x[j, t]`` = job ``j`` runs in ``(t - p_j, t]``,
* related machines, makespan: assignment fractions ``x[i, j]``, completion ``C_j``, makespan ``D``,
* related machines, weighted completion: the same assignment split by geometric deadlines,
* unrelated machines: ``x[i, j, s]`` = job ``j`` starts at ``s`` on machine ``i``.

Every solution consumed downstream comes out of an ``extract_*`` function,
which clamps tiny negatives, renormalises each job to total mass one and
recomputes the derived quantities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from ..instance import Instance, Model
from .program import EQ, LE, LinearProgram, LPBuilder, LPError, LPStatus, Solver, SolverConfig, solve_lp


class SolutionRepairError(LPError):
    pass


def _require(inst: Instance, model: Model) -> None:
    if inst.model is not model:
        raise ValueError(f"expected a {model.value} instance, got {inst.model.value}")


@dataclass(frozen=True)
class FracIdentical:
    x: np.ndarray            # (n, T + 1); column t holds x[j, t], column 0 unused
    C: np.ndarray
    sizes: np.ndarray
    lp_value: float


@dataclass(frozen=True)
class FracRelated:
    x: np.ndarray            # (m, n)
    C: np.ndarray
    D: float
    lp_value: float


@dataclass(frozen=True)
class FracRelatedWC:
    x: np.ndarray            # (m, n, number of deadlines)
    deadlines: tuple[Fraction, ...]
    C: np.ndarray
    lp_value: float


@dataclass(frozen=True)
class FracUnrelated:
    x: np.ndarray            # (m, n, T); x[i, j, s], s = start time
    p: np.ndarray            # (m, n) processing times, 0 where not processable
    y: np.ndarray            # (m, n) machine fractions
    phi: np.ndarray          # (m, n) mean start on the machine, nan where y == 0
    C: np.ndarray
    lp_value: float


def _check_horizon(inst: Instance) -> None:
    longest = max((job.size for job in inst.jobs), default=0)
    if inst.T < longest:
        raise ValueError(f"horizon T={inst.T} is shorter than the longest job ({longest})")


# ---------------------------------------------------------------------------
# identical machines, precedence, weighted completion time
# ---------------------------------------------------------------------------

def build_lp_identical(inst: Instance) -> LinearProgram:
    """Job-completion-indexed relaxation for identical machines.

    Rows, in order: one assignment row per job, one congestion row per time
    point ``t' = 1..T``, then for each edge ``j -> k`` and each ``t'`` the
    precedence row ``sum_{t < t'+p_k} x[k,t] - sum_{t < t'} x[j,t] <= 0``.
    Precedence rows with an empty left side hold trivially and are skipped.
    """
    _require(inst, Model.IDENTICAL)
    _check_horizon(inst)
    T, m = inst.T, inst.m
    b = LPBuilder()
    col: dict[tuple[int, int], int] = {}
    for job in inst.jobs:
        for t in range(job.size, T + 1):
            col[job.id, t] = b.add_var(("x", job.id, t), cost=job.weight * t)
    for job in inst.jobs:
        b.add_row([(col[job.id, t], 1.0) for t in range(job.size, T + 1)], EQ, 1.0, f"assign[{job.id}]")
    for tp in range(1, T + 1):
        terms = [(col[job.id, t], 1.0) for job in inst.jobs
                 for t in range(max(tp, job.size), min(tp + job.size, T + 1))]
        if terms:
            b.add_row(terms, LE, m, f"congestion[{tp}]")
    sizes = inst.sizes
    for j, k in inst.dag.edges:
        for tp in range(1, T + 1):
            left = [(col[k, t], 1.0) for t in range(sizes[k], min(tp + sizes[k], T + 1))]
            if not left:
                continue
            right = [(col[j, t], -1.0) for t in range(sizes[j], min(tp, T + 1))]
            b.add_row(left + right, LE, 0.0, f"precedence[{j},{k},{tp}]")
    return b.build()


def _repair(values: np.ndarray, groups: list[np.ndarray], feas_tol: float) -> np.ndarray:
    """Clamp negatives and renormalise each index group to sum one."""
    if values.size and values.min() < -10 * feas_tol:
        raise SolutionRepairError(f"solution too infeasible: entry {values.min():.3g} < 0")
    fixed = np.clip(values, 0.0, None)
    for idx in groups:
        total = fixed[idx].sum()
        if total <= 0:
            raise SolutionRepairError("solution too infeasible: job with no mass")
        fixed[idx] = fixed[idx] / total
    moved = np.abs(fixed - values).max(initial=0.0)
    if moved > 10 * feas_tol:
        raise SolutionRepairError(f"solution too infeasible: repair moved a coordinate by {moved:.3g}")
    return fixed


def extract_identical(inst: Instance, point: np.ndarray, lp: Optional[LinearProgram] = None,
                      cfg: Optional[SolverConfig] = None) -> FracIdentical:
    cfg = cfg or SolverConfig()
    lp = lp or build_lp_identical(inst)
    keys = lp.var_keys
    groups: dict[int, list[int]] = {}
    for c, (_, j, _) in enumerate(keys):
        groups.setdefault(j, []).append(c)
    vals = _repair(np.asarray(point, dtype=float)[: len(keys)],
                   [np.array(groups.get(j, []), dtype=int) for j in range(inst.n)], cfg.feas_tol)
    x = np.zeros((inst.n, inst.T + 1))
    for c, (_, j, t) in enumerate(keys):
        x[j, t] = vals[c]
    times = np.arange(inst.T + 1)
    C = x @ times
    sizes = np.array(inst.sizes, dtype=float)
    tol = inst.n * cfg.feas_tol
    for j, k in inst.dag.edges:
        if C[j] + sizes[k] > C[k] + tol:
            raise LPError(f"precedence gap violated on ({j}, {k}): {C[j]} + {sizes[k]} > {C[k]}")
    value = float(np.dot(inst.weights, C))
    return FracIdentical(x, C, sizes, value)


# ---------------------------------------------------------------------------
# related machines, precedence, makespan
# ---------------------------------------------------------------------------

def build_lp_related_cmax(inst: Instance) -> LinearProgram:
    """Assignment relaxation for makespan; its integral points need not be schedulable."""
    _require(inst, Model.RELATED)
    m, n = inst.m, inst.n
    speeds = [float(s) for s in inst.speeds]
    sizes = inst.sizes
    b = LPBuilder()
    X = [[b.add_var(("x", i, j)) for j in range(n)] for i in range(m)]
    C = [b.add_var(("C", j)) for j in range(n)]
    D = b.add_var(("D",), cost=1.0)
    for j in range(n):
        b.add_row([(X[i][j], 1.0) for i in range(m)], EQ, 1.0, f"assign[{j}]")
    for j in range(n):
        b.add_row([(X[i][j], sizes[j] / speeds[i]) for i in range(m)] + [(C[j], -1.0)], LE, 0.0,
                  f"completion[{j}]")
    for j, k in inst.dag.edges:
        b.add_row([(C[j], 1.0), (C[k], -1.0)] + [(X[i][k], sizes[k] / speeds[i]) for i in range(m)], LE, 0.0,
                  f"precedence[{j},{k}]")
    for i in range(m):
        b.add_row([(X[i][j], sizes[j] / speeds[i]) for j in range(n)] + [(D, -1.0)], LE, 0.0, f"load[{i}]")
    for j in range(n):
        b.add_row([(C[j], 1.0), (D, -1.0)], LE, 0.0, f"makespan[{j}]")
    return b.build()


def extract_related(inst: Instance, point: np.ndarray, lp: Optional[LinearProgram] = None,
                    cfg: Optional[SolverConfig] = None) -> FracRelated:
    cfg = cfg or SolverConfig()
    lp = lp or build_lp_related_cmax(inst)
    idx = lp.index()
    m, n = inst.m, inst.n
    point = np.asarray(point, dtype=float)
    xcols = np.array([[idx["x", i, j] for j in range(n)] for i in range(m)], dtype=int).reshape(m, n)
    flat = point[xcols].T.reshape(-1)           # job-major
    fixed = _repair(flat, [np.arange(j * m, (j + 1) * m) for j in range(n)], cfg.feas_tol)
    x = fixed.reshape(n, m).T.copy()
    C = np.array([max(point[idx["C", j]], 0.0) for j in range(n)])
    D = float(point[idx["D",]])
    return FracRelated(x, C, D, D)


def related_violations(inst: Instance, x: np.ndarray, C: np.ndarray, D: float,
                       tol: float = 1e-7, speeds=None) -> list[str]:
    """Which makespan-LP constraint families ``(x, C, D)`` breaks beyond ``tol``."""
    speeds = np.array([float(s) for s in (speeds if speeds is not None else inst.speeds)])
    sizes = np.array(inst.sizes, dtype=float)
    scale = tol * max(1.0, abs(D))
    out = []
    if x.min(initial=0.0) < -tol or C.min(initial=0.0) < -tol:
        out.append("nonnegativity")
    if np.abs(x.sum(axis=0) - 1.0).max(initial=0.0) > tol:
        out.append("assignment")
    own = sizes * (x / speeds[:, None]).sum(axis=0)
    if (own - C).max(initial=-1.0) > scale:
        out.append("completion")
    for j, k in inst.dag.edges:
        if C[j] + own[k] - C[k] > scale:
            out.append(f"precedence[{j},{k}]")
    load = (x * sizes[None, :]).sum(axis=1) / speeds
    if (load - D).max(initial=-1.0) > scale:
        out.append("load")
    if (C - D).max(initial=-1.0) > scale:
        out.append("makespan")
    return out


# ---------------------------------------------------------------------------
# related machines, precedence, weighted completion time
# ---------------------------------------------------------------------------

def related_deadlines(inst: Instance) -> tuple[Fraction, ...]:
    """Powers of two from below the shortest possible job to above the serial time on the slowest machine.

    An optimal schedule never has all machines idle before its last
    completion, so its makespan is at most that serial time; every optimal
    schedule therefore maps to a feasible point.
    """
    smax = max(inst.speeds)
    shortest = min(Fraction(job.size) / smax for job in inst.jobs)
    serial = sum(Fraction(job.size) for job in inst.jobs) / min(inst.speeds)
    lo = math.floor(math.log2(shortest))
    while Fraction(2) ** lo > shortest:
        lo -= 1
    hi = lo
    while Fraction(2) ** hi < serial:
        hi += 1
    return tuple(Fraction(2) ** u for u in range(lo, hi + 1))


def build_lp_related_wc(inst: Instance) -> LinearProgram:
    """Deadline-indexed relaxation for weighted completion time on related machines.

    ``x[i, j, u]`` is the part of ``j`` run on ``i`` and finishing in
    ``(d_{u-1}, d_u]`` (with ``d_{-1} = 0``). Rows: assignment; per machine
    and deadline, processing finished by ``d_u`` fits in ``d_u``; ``C_j`` at
    least the interval left ends and the own processing time; precedence on
    ``C``; and for ``j -> k`` the part of ``k`` finished by ``d_u`` is at
    most the part of ``j``.
    """
    _require(inst, Model.RELATED)
    m, n = inst.m, inst.n
    dl = related_deadlines(inst)
    U = len(dl)
    speeds = [float(s) for s in inst.speeds]
    sizes = inst.sizes
    left = [0.0] + [float(d) for d in dl[:-1]]
    b = LPBuilder()
    X = [[[b.add_var(("x", i, j, u)) for u in range(U)] for j in range(n)] for i in range(m)]
    C = [b.add_var(("C", j), cost=inst.jobs[j].weight) for j in range(n)]
    for j in range(n):
        b.add_row([(X[i][j][u], 1.0) for i in range(m) for u in range(U)], EQ, 1.0, f"assign[{j}]")
    for i in range(m):
        for u in range(U):
            b.add_row([(X[i][j][v], sizes[j] / speeds[i]) for j in range(n) for v in range(u + 1)], LE,
                      float(dl[u]), f"load[{i},{u}]")
    for j in range(n):
        b.add_row([(X[i][j][u], left[u]) for i in range(m) for u in range(U) if left[u]] + [(C[j], -1.0)], LE,
                  0.0, f"interval[{j}]")
        b.add_row([(X[i][j][u], sizes[j] / speeds[i]) for i in range(m) for u in range(U)] + [(C[j], -1.0)], LE,
                  0.0, f"completion[{j}]")
    for j, k in inst.dag.edges:
        b.add_row([(C[j], 1.0), (C[k], -1.0)] + [(X[i][k][u], sizes[k] / speeds[i]) for i in range(m)
                                                 for u in range(U)], LE, 0.0, f"precedence[{j},{k}]")
        for u in range(U):
            b.add_row([(X[i][k][v], 1.0) for i in range(m) for v in range(u + 1)]
                      + [(X[i][j][v], -1.0) for i in range(m) for v in range(u + 1)], LE, 0.0,
                      f"prefix[{j},{k},{u}]")
    return b.build()


def extract_related_wc(inst: Instance, point: np.ndarray, lp: Optional[LinearProgram] = None,
                       cfg: Optional[SolverConfig] = None) -> FracRelatedWC:
    cfg = cfg or SolverConfig()
    lp = lp or build_lp_related_wc(inst)
    dl = related_deadlines(inst)
    idx = lp.index()
    m, n, U = inst.m, inst.n, len(dl)
    point = np.asarray(point, dtype=float)
    cols = np.array([[[idx["x", i, j, u] for u in range(U)] for i in range(m)] for j in range(n)], dtype=int)
    fixed = _repair(point[cols.reshape(-1)], [np.arange(j * m * U, (j + 1) * m * U) for j in range(n)],
                    cfg.feas_tol)
    x = fixed.reshape(n, m, U).transpose(1, 0, 2).copy()
    C = np.array([max(point[idx["C", j]], 0.0) for j in range(n)])
    return FracRelatedWC(x, dl, C, float(np.dot(inst.weights, C)))


# ---------------------------------------------------------------------------
# unrelated machines, weighted completion time
# ---------------------------------------------------------------------------

def build_lp_unrelated(inst: Instance) -> LinearProgram:
    """Start-indexed relaxation for unrelated machines.

    Variables exist only for processable pairs and starts ``s <= T - p``.
    Congestion rows cover unit slots ``(t, t+1]`` for ``t = 0..T-1``: the
    rectangle of a start ``s`` covers slot ``t`` iff ``t - p < s <= t``.
    """
    _require(inst, Model.UNRELATED)
    T = inst.T
    for j in range(inst.n):
        if all(row[j] is None or row[j] > T for row in inst.pmatrix):
            raise ValueError(f"job {j} does not fit in horizon T={T}")
    b = LPBuilder()
    col: dict[tuple[int, int, int], int] = {}
    for i, row in enumerate(inst.pmatrix):
        for j, p in enumerate(row):
            if p is None:
                continue
            for s in range(0, T - p + 1):
                col[i, j, s] = b.add_var(("x", i, j, s), cost=inst.jobs[j].weight * (s + p))
    for j in range(inst.n):
        b.add_row([(c, 1.0) for (i, jj, s), c in col.items() if jj == j], EQ, 1.0, f"assign[{j}]")
    for i, row in enumerate(inst.pmatrix):
        for t in range(T):
            terms = [(col[i, j, s], 1.0) for j, p in enumerate(row) if p is not None
                     for s in range(max(0, t - p + 1), min(t, T - p) + 1)]
            if terms:
                b.add_row(terms, LE, 1.0, f"congestion[{i},{t}]")
    return b.build()


def processing_matrix(inst: Instance) -> np.ndarray:
    return np.array([[0 if v is None else v for v in row] for row in inst.pmatrix], dtype=float)


def machine_fractions(x: np.ndarray) -> np.ndarray:
    """``y[i, j] = sum_s x[i, j, s]``."""
    return x.sum(axis=2)


def mean_starts(x: np.ndarray) -> np.ndarray:
    """Average start of the rectangles of ``j`` on ``i``; ``nan`` when ``y[i, j] == 0``."""
    y = machine_fractions(x)
    weighted = x @ np.arange(x.shape[2], dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(y > 0, weighted / np.where(y > 0, y, 1.0), np.nan)


def frac_unrelated_from_x(inst: Instance, x: np.ndarray) -> FracUnrelated:
    p = processing_matrix(inst)
    y = machine_fractions(x)
    phi = mean_starts(x)
    C = ((x @ np.arange(x.shape[2], dtype=float)) + y * p).sum(axis=0)
    return FracUnrelated(x, p, y, phi, C, float(np.dot(inst.weights, C)))


def extract_unrelated(inst: Instance, point: np.ndarray, lp: Optional[LinearProgram] = None,
                      cfg: Optional[SolverConfig] = None) -> FracUnrelated:
    cfg = cfg or SolverConfig()
    lp = lp or build_lp_unrelated(inst)
    keys = lp.var_keys
    groups: dict[int, list[int]] = {}
    for c, (_, _, j, _) in enumerate(keys):
        groups.setdefault(j, []).append(c)
    vals = _repair(np.asarray(point, dtype=float)[: len(keys)],
                   [np.array(groups.get(j, []), dtype=int) for j in range(inst.n)], cfg.feas_tol)
    x = np.zeros((inst.m, inst.n, max(inst.T, 1)))
    for c, (_, i, j, s) in enumerate(keys):
        x[i, j, s] = vals[c]
    return frac_unrelated_from_x(inst, x)


# ---------------------------------------------------------------------------
# build + solve + extract in one call
# ---------------------------------------------------------------------------

_BUILD = {Model.IDENTICAL: (build_lp_identical, extract_identical),
          Model.RELATED: (build_lp_related_cmax, extract_related),
          Model.UNRELATED: (build_lp_unrelated, extract_unrelated)}


def solve_relaxation(inst: Instance, cfg: Optional[SolverConfig] = None, solver: Optional[Solver] = None,
                     objective: str = "default"):
    """Solve the model's relaxation and return the repaired fractional solution.

    ``objective="wc"`` selects the weighted-completion relaxation for related
    machines; every other model has a single relaxation.
    """
    cfg = cfg or SolverConfig()
    if inst.model is Model.RELATED and objective == "wc":
        build, extract = build_lp_related_wc, extract_related_wc
    else:
        build, extract = _BUILD[inst.model]
    lp = build(inst)
    sol = solve_lp(lp, cfg, solver)
    if sol.status is not LPStatus.OPTIMAL:
        raise LPError(f"relaxation is {sol.status.value}")
    return extract(inst, sol.x, lp, cfg)
