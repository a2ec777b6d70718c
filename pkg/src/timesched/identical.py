"""Job-driven list scheduling on identical machines and its two randomized order rules.

``mtheta_general`` shifts each fractional completion time back by part of
the job's size; ``mtheta_unit`` takes a quantile of the fractional
completion mass (unit sizes only). Either key feeds :func:`list_schedule`,
which inserts jobs in key order at the earliest integer start that keeps at
most ``m`` intervals overlapping, then assigns intervals to machines.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .instance import Instance, Model, Schedule, intervals_to_machines, objective
from .lp.program import Solver, SolverConfig
from .lp.relaxations import FracIdentical, solve_relaxation
from .seeding import trial_rng


class OrderError(ValueError):
    pass


@dataclass(frozen=True)
class OrderKey:
    """Per-job priority ``values``; equal values are resolved by topological ``rank``."""

    values: np.ndarray
    rank: tuple[int, ...]


def _topo_rank(inst: Instance) -> tuple[int, ...]:
    rank = [0] * inst.n
    for pos, j in enumerate(inst.dag.topological_order()):
        rank[j] = pos
    return tuple(rank)


def mtheta_general(frac: FracIdentical, theta: float, inst: Optional[Instance] = None) -> OrderKey:
    if not 0.0 < theta <= 0.5:
        raise ValueError(f"theta must lie in (0, 1/2], got {theta}")
    values = frac.C - (1.0 - theta) * frac.sizes
    rank = _topo_rank(inst) if inst is not None else tuple(range(len(values)))
    return OrderKey(values, rank)


def mtheta_unit(frac: FracIdentical, theta: float, inst: Optional[Instance] = None,
                feas_tol: float = 1e-7) -> OrderKey:
    """First time at which the cumulative completion mass reaches ``theta`` (minus ``feas_tol``)."""
    if np.any(frac.sizes != 1):
        raise ValueError("quantile keys need unit job sizes")
    if not 0.0 < theta <= 1.0:
        raise ValueError(f"theta must lie in (0, 1], got {theta}")
    cum = np.cumsum(frac.x, axis=1)
    hit = cum >= theta - feas_tol
    values = hit.argmax(axis=1).astype(float)
    rank = _topo_rank(inst) if inst is not None else tuple(range(len(values)))
    return OrderKey(values, rank)


def processing_order(inst: Instance, key: OrderKey, tol: float = 1e-7) -> list[int]:
    """Jobs sorted by key, then rank, then id.

    Keys must not decrease along precedence edges. A decrease within ``tol``
    (solver noise) is lifted away; a larger one raises :class:`OrderError`.
    """
    vals = np.asarray(key.values, dtype=float).copy()
    if len(vals) != inst.n:
        raise ValueError("order key length does not match the job count")
    preds = inst.dag.predecessors()
    scale = tol * max(1.0, float(np.abs(vals).max(initial=0.0)))
    for k in inst.dag.topological_order():
        for j in preds[k]:
            if vals[k] < vals[j] - scale:
                raise OrderError(f"order key decreases along edge ({j}, {k}): {vals[j]} > {vals[k]}")
            vals[k] = max(vals[k], vals[j])
    rank = key.rank
    for j, k in inst.dag.edges:
        if rank[j] >= rank[k] and vals[j] == vals[k]:
            raise OrderError(f"tie on edge ({j}, {k}) not resolved by rank")
    return sorted(range(inst.n), key=lambda j: (vals[j], rank[j], j))


def place_in_order(inst: Instance, order: list[int]) -> list[tuple[int, int, int]]:
    """Insert jobs one by one at the earliest feasible integer start."""
    preds = inst.dag.predecessors()
    m = inst.m
    usage: list[int] = []
    end = [None] * inst.n
    out = []
    for j in order:
        p = inst.jobs[j].size
        t = 0
        for k in preds[j]:
            if end[k] is None:
                raise OrderError(f"job {j} placed before its predecessor {k}")
            t = max(t, end[k])
        s = t
        while True:
            if len(usage) < s + p:
                usage.extend([0] * (s + p - len(usage)))
            full = [u for u in range(s, s + p) if usage[u] >= m]
            if not full:
                break
            s = full[-1] + 1
        for u in range(s, s + p):
            usage[u] += 1
        end[j] = s + p
        out.append((j, s, s + p))
    return out


def list_schedule(inst: Instance, key: OrderKey) -> Schedule:
    if inst.model is not Model.IDENTICAL:
        raise ValueError("list scheduling needs an identical-machine instance")
    return intervals_to_machines(place_in_order(inst, processing_order(inst, key)), inst.m)


@dataclass
class TrialResult:
    schedule: Schedule
    cost: object
    costs: list = field(default_factory=list)
    thetas: list = field(default_factory=list)
    lp_value: float = float("nan")

    @property
    def mean_cost(self) -> float:
        return float(np.mean([float(c) for c in self.costs]))


def _run_trials(inst: Instance, frac: FracIdentical, seed: int, trials: int, grid: bool, hi: float,
                keyfn) -> TrialResult:
    if trials < 1:
        raise ValueError("need at least one trial")
    cache: dict[tuple[int, ...], tuple[Schedule, int]] = {}
    costs, thetas = [], []
    best = None
    for k in range(trials):
        theta = hi * (k + 1) / trials if grid else hi * (1.0 - trial_rng(seed, k).random())
        order = tuple(processing_order(inst, keyfn(frac, theta, inst)))
        if order not in cache:
            sched = intervals_to_machines(place_in_order(inst, list(order)), inst.m)
            cache[order] = (sched, objective(inst, sched))
        sched, cost = cache[order]
        costs.append(cost)
        thetas.append(theta)
        if best is None or cost < best[1]:
            best = (sched, cost)
    return TrialResult(best[0], best[1], costs, thetas, frac.lp_value)


def _frac(inst, frac, cfg, solver):
    if inst.model is not Model.IDENTICAL:
        raise ValueError("expected an identical-machine instance")
    return frac if frac is not None else solve_relaxation(inst, cfg, solver)


def schedule_identical_wc(inst: Instance, frac: Optional[FracIdentical] = None, seed: int = 0, trials: int = 1,
                          grid: bool = False, cfg: Optional[SolverConfig] = None,
                          solver: Optional[Solver] = None) -> TrialResult:
    """Best of ``trials`` list schedules with ``theta`` uniform on (0, 1/2].

    ``grid=True`` replaces the random draws by ``theta_k = (k+1)/(2 trials)``.
    """
    return _run_trials(inst, _frac(inst, frac, cfg, solver), seed, trials, grid, 0.5, mtheta_general)


def schedule_identical_unit_wc(inst: Instance, frac: Optional[FracIdentical] = None, seed: int = 0,
                               trials: int = 1, grid: bool = False, cfg: Optional[SolverConfig] = None,
                               solver: Optional[Solver] = None) -> TrialResult:
    """Unit sizes: quantile keys with ``theta`` uniform on (0, 1]."""
    if any(job.size != 1 for job in inst.jobs):
        raise ValueError("quantile keys need unit job sizes")
    feas = (cfg or SolverConfig()).feas_tol
    return _run_trials(inst, _frac(inst, frac, cfg, solver), seed, trials, grid, 1.0,
                       lambda f, th, i: mtheta_unit(f, th, i, feas))
