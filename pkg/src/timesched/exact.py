"""Exact optima for small instances (ground truth for LP bounds and ratios).

Identical and related machines use depth-first search over job orders where
each job is placed at its earliest feasible start. The search only extends
an order when the new job's ``(start, id)`` is larger than the previous
job's. Some optimal schedule has this form: re-placing any schedule's jobs
in ``(start, id)`` order never delays a job, so repeating it reaches a
schedule that reproduces itself, and its placement order is sorted.

Unrelated machines enumerate job-to-machine maps and sequence each machine
by Smith's ratio rule.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .instance import Instance, Model, Schedule, intervals_to_machines, objective

DEFAULT_CAP = 9


class CapExceeded(ValueError):
    pass


@dataclass(frozen=True)
class ExactResult:
    opt_value: object
    witness: Schedule
    nodes_explored: int


def _check(inst: Instance, model: Model, cap: int) -> None:
    if inst.model is not model:
        raise ValueError(f"expected a {model.value} instance")
    if inst.n > cap:
        raise CapExceeded(f"instance has {inst.n} jobs; exact search is capped at {cap}")


def _usage_fits(usage: list[int], s: int, p: int, m: int) -> bool:
    return all(usage[u] < m for u in range(s, s + p))


def exact_identical(inst: Instance, cap: int = DEFAULT_CAP) -> ExactResult:
    """Minimum weighted completion time over integer-start schedules."""
    _check(inst, Model.IDENTICAL, cap)
    n, m = inst.n, inst.m
    if n == 0:
        return ExactResult(0, Schedule((), (), ()), 0)
    p = inst.sizes
    w = inst.weights
    preds = inst.dag.predecessors()
    topo = inst.dag.topological_order()
    horizon = sum(p) + 1
    usage = [0] * (horizon + max(p))
    end: list[Optional[int]] = [None] * n
    start = [0] * n
    best = [None, None]
    nodes = [0]

    def lower_bound(floor_start: int) -> int:
        est = {}
        total = 0
        for k in topo:
            if end[k] is not None:
                continue
            e = floor_start
            for q in preds[k]:
                e = max(e, end[q] if end[q] is not None else est[q] + p[q])
            est[k] = e
            total += w[k] * (e + p[k])
        return total

    def dfs(placed: int, cost: int, last: tuple[int, int]):
        nodes[0] += 1
        if placed == n:
            if best[0] is None or cost < best[0]:
                best[0], best[1] = cost, list(start)
            return
        if best[0] is not None and cost + lower_bound(last[0]) >= best[0]:
            return
        for j in range(n):
            if end[j] is not None or any(end[q] is None for q in preds[j]):
                continue
            s = max((end[q] for q in preds[j]), default=0)
            while not _usage_fits(usage, s, p[j], m):
                s += 1
            if (s, j) <= last:
                continue
            for u in range(s, s + p[j]):
                usage[u] += 1
            end[j], start[j] = s + p[j], s
            dfs(placed + 1, cost + w[j] * (s + p[j]), (s, j))
            for u in range(s, s + p[j]):
                usage[u] -= 1
            end[j] = None

    dfs(0, 0, (-1, -1))
    sched = intervals_to_machines([(j, best[1][j], best[1][j] + p[j]) for j in range(n)], m)
    return ExactResult(best[0], sched, nodes[0])


def enumerate_identical(inst: Instance) -> int:
    """Optimum over every tuple of integer starts in ``[0, T - p_j]`` (no placement rule).

    Jobs are fixed in topological order; a partial assignment is cut when its
    cost plus each remaining job's earliest completion reaches the best
    value found, which never discards a strictly better tuple.
    """
    if inst.model is not Model.IDENTICAL:
        raise ValueError("expected an identical-machine instance")
    n, m, T = inst.n, inst.m, inst.T
    p, w = inst.sizes, inst.weights
    preds = inst.dag.predecessors()
    order = inst.dag.topological_order()
    usage = [0] * (T + 1)
    end = [0] * n
    best = [None]

    def rest_bound(pos: int) -> int:
        est = {}
        total = 0
        for k in order[pos:]:
            e = max((end[q] if q not in est else est[q] + p[q] for q in preds[k]), default=0)
            est[k] = e
            total += w[k] * (e + p[k])
        return total

    def dfs(pos: int, cost: int):
        if pos == n:
            if best[0] is None or cost < best[0]:
                best[0] = cost
            return
        j = order[pos]
        lo = max((end[q] for q in preds[j]), default=0)
        for s in range(lo, T - p[j] + 1):
            c = cost + w[j] * (s + p[j])
            end[j] = s + p[j]
            if best[0] is not None and c + rest_bound(pos + 1) >= best[0]:
                break
            if not _usage_fits(usage, s, p[j], m):
                continue
            for u in range(s, s + p[j]):
                usage[u] += 1
            dfs(pos + 1, c)
            for u in range(s, s + p[j]):
                usage[u] -= 1

    dfs(0, 0)
    return best[0]


def exact_related(inst: Instance, objective_kind: str = "wc", cap: int = DEFAULT_CAP) -> ExactResult:
    """Exact ``cmax`` or ``wc`` optimum; each job is appended to its machine at the earliest time."""
    _check(inst, Model.RELATED, cap)
    if objective_kind not in ("cmax", "wc"):
        raise ValueError("objective must be 'cmax' or 'wc'")
    n, m = inst.n, inst.m
    if n == 0:
        return ExactResult(Fraction(0), Schedule((), (), ()), 0)
    p = [Fraction(s) for s in inst.sizes]
    w = inst.weights
    speeds = inst.speeds
    vmax = max(speeds)
    preds = inst.dag.predecessors()
    topo = inst.dag.topological_order()
    free = [Fraction(0)] * m
    end: list[Optional[Fraction]] = [None] * n
    machine, start = [0] * n, [Fraction(0)] * n
    best = [None, None]
    nodes = [0]
    wc = objective_kind == "wc"

    def lower_bound(floor_start: Fraction, cost: Fraction) -> Fraction:
        est = {}
        total = cost
        for k in topo:
            if end[k] is not None:
                continue
            e = floor_start
            for q in preds[k]:
                e = max(e, end[q] if end[q] is not None else est[q] + p[q] / vmax)
            est[k] = e
            total = total + w[k] * (e + p[k] / vmax) if wc else max(total, e + p[k] / vmax)
        return total

    def dfs(placed: int, cost: Fraction, last):
        nodes[0] += 1
        if placed == n:
            if best[0] is None or cost < best[0]:
                best[0] = cost
                best[1] = Schedule(tuple(machine), tuple(start), tuple(end))
            return
        if best[0] is not None and lower_bound(last[0], cost) >= best[0]:
            return
        for j in range(n):
            if end[j] is not None or any(end[q] is None for q in preds[j]):
                continue
            ready = max((end[q] for q in preds[j]), default=Fraction(0))
            for i in range(m):
                s = max(free[i], ready)
                if (s, j) <= last:
                    continue
                e = s + p[j] / speeds[i]
                old = free[i]
                free[i], end[j], start[j], machine[j] = e, e, s, i
                dfs(placed + 1, cost + w[j] * e if wc else max(cost, e), (s, j))
                free[i], end[j] = old, None

    dfs(0, Fraction(0), (Fraction(-1), -1))
    return ExactResult(best[0], best[1], nodes[0])


def smith_order(jobs: list[int], weights, sizes) -> list[int]:
    """Decreasing ``w / p``; equal ratios by job id."""
    return sorted(jobs, key=lambda j: (-Fraction(weights[j], sizes[j]), j))


def single_machine_cost(order, weights, sizes) -> int:
    t = total = 0
    for j in order:
        t += sizes[j]
        total += weights[j] * t
    return total


def best_permutation_cost(jobs: list[int], weights, sizes) -> int:
    return min((single_machine_cost(perm, weights, sizes) for perm in itertools.permutations(jobs)), default=0)


def exact_unrelated(inst: Instance, cap: int = DEFAULT_CAP) -> ExactResult:
    _check(inst, Model.UNRELATED, cap)
    n, m = inst.n, inst.m
    w = inst.weights
    P = inst.pmatrix
    choices = [[i for i in range(m) if P[i][j] is not None] for j in range(n)]
    best = None
    nodes = 0
    for assign in itertools.product(*choices):
        nodes += 1
        total = 0
        for i in set(assign):
            jobs = [j for j in range(n) if assign[j] == i]
            total += single_machine_cost(smith_order(jobs, w, P[i]), w, P[i])
            if best is not None and total >= best[0]:
                break
        if best is None or total < best[0]:
            best = (total, assign)
    if best is None:
        return ExactResult(0, Schedule((), (), ()), nodes)
    assign = best[1]
    start, end = [0] * n, [0] * n
    for i in set(assign):
        t = 0
        for j in smith_order([j for j in range(n) if assign[j] == i], w, P[i]):
            start[j] = t
            t += P[i][j]
            end[j] = t
    sched = Schedule(tuple(assign), tuple(start), tuple(end))
    assert objective(inst, sched) == best[0]
    return ExactResult(best[0], sched, nodes)


def exact(inst: Instance, objective_kind: str = "wc", cap: int = DEFAULT_CAP) -> ExactResult:
    if inst.model is Model.IDENTICAL:
        return exact_identical(inst, cap)
    if inst.model is Model.RELATED:
        return exact_related(inst, objective_kind, cap)
    return exact_unrelated(inst, cap)
