"""Related machines with precedence: group-restricted machine-driven list scheduling.

Makespan pipeline: solve the assignment LP, move the work of very slow
machines onto the fastest one (doubling the LP makespan), split machines
into speed bands of ratio ``gamma``, send each job to the band of largest
total speed among those holding the upper half of its LP mass, and let idle
machines pull available jobs of their band in real time.

The weighted-completion wrapper solves a deadline-indexed LP, cuts jobs into
blocks by the first power of two above their LP completion time and
concatenates makespan schedules of the blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .instance import Instance, Model, Schedule, objective
from .lp.program import Solver, SolverConfig
from .lp.relaxations import FracRelated, FracRelatedWC, related_violations, solve_relaxation


@dataclass(frozen=True)
class Preprocessed:
    inst: Instance                 # retained machines, original speeds
    x: np.ndarray                  # (retained machines, n)
    C: np.ndarray
    D: float                       # doubled LP makespan
    retained: tuple[int, ...]      # original index of each retained machine
    scaled: tuple[Fraction, ...]   # retained speeds divided by the slowest retained speed


def _sub_machines(inst: Instance, keep: list[int]) -> Instance:
    return Instance(Model.RELATED, inst.jobs, len(keep), inst.T, inst.dag,
                    speeds=tuple(inst.speeds[i] for i in keep))


def preprocess(inst: Instance, frac: FracRelated, tol: float = 1e-7) -> Preprocessed:
    """Drop machines of speed at most ``s_max / m``; their LP mass moves to the fastest machine."""
    if inst.model is not Model.RELATED:
        raise ValueError("expected a related-machine instance")
    speeds = inst.speeds
    fastest = max(range(inst.m), key=lambda i: (speeds[i], -i))
    cutoff = speeds[fastest] / inst.m
    keep = [i for i in range(inst.m) if i == fastest or speeds[i] > cutoff]
    x = np.array(frac.x, dtype=float)
    for i in range(inst.m):
        if i not in keep:
            x[fastest] += x[i]
            x[i] = 0.0
    sub = _sub_machines(inst, keep)
    xs = x[keep]
    D2 = 2.0 * frac.D
    bad = related_violations(sub, xs, frac.C, D2, tol)
    if bad:
        raise RuntimeError(f"preprocessed LP solution violates {', '.join(bad)}")
    slowest = min(sub.speeds)
    return Preprocessed(sub, xs, np.array(frac.C), D2, tuple(keep), tuple(s / slowest for s in sub.speeds))


def default_gamma(m: int) -> float:
    if m < 3:
        return 2.0
    return max(2.0, math.log(m) / math.log(math.log(m)))


@dataclass(frozen=True)
class SpeedGroups:
    gamma: float
    K: int
    members: tuple[tuple[int, ...], ...]   # members[k - 1] = machines in band k
    speeds: tuple                          # the (scaled) speeds the bands were built from

    def total_speed(self, k: int):
        return sum((self.speeds[i] for i in self.members[k - 1]), Fraction(0))

    def group_of(self) -> list[int]:
        out = [0] * len(self.speeds)
        for k, mem in enumerate(self.members, start=1):
            for i in mem:
                out[i] = k
        return out


def band(speed, gamma: float) -> int:
    """``k`` with ``gamma**(k-1) <= speed < gamma**k`` (speeds below 1 land in band 1)."""
    k = 1
    while float(speed) >= gamma ** k:
        k += 1
    return k


def make_groups(speeds, m: int, gamma: Optional[float] = None) -> SpeedGroups:
    """Partition machines into half-open speed bands; empty bands are kept."""
    gamma = default_gamma(m) if gamma is None else float(gamma)
    if gamma <= 1.0:
        raise ValueError("gamma must exceed 1")
    ks = [band(s, gamma) for s in speeds]
    K = max(ks, default=1)
    members = tuple(tuple(i for i, k in enumerate(ks) if k == b) for b in range(1, K + 1))
    return SpeedGroups(gamma, K, members, tuple(speeds))


@dataclass(frozen=True)
class GroupAssignment:
    ell: tuple[int, ...]
    k: tuple[int, ...]


def group_masses(x: np.ndarray, groups: SpeedGroups) -> np.ndarray:
    """``(K, n)`` array of each job's LP mass per band."""
    return np.array([x[list(mem)].sum(axis=0) if mem else np.zeros(x.shape[1]) for mem in groups.members])


def assign_groups(x: np.ndarray, groups: SpeedGroups, tol: float = 1e-7) -> GroupAssignment:
    masses = group_masses(np.asarray(x, dtype=float), groups)
    K = groups.K
    totals = [groups.total_speed(k) for k in range(1, K + 1)]
    ells, ks = [], []
    for j in range(masses.shape[1]):
        col = masses[:, j]
        if col.sum() <= 0:
            raise ValueError(f"job {j} has no LP mass")
        suffix = np.cumsum(col[::-1])[::-1]
        ell = max(k for k in range(1, K + 1) if suffix[k - 1] >= 0.5 - tol)
        kj = max(range(ell, K + 1), key=lambda k: (totals[k - 1], -k))
        ells.append(ell)
        ks.append(kj)
    return GroupAssignment(tuple(ells), tuple(ks))


@dataclass(frozen=True)
class TraceEntry:
    time: Fraction
    started: tuple[tuple[int, int], ...]        # (machine, job) started at this time
    idle: tuple[int, ...]                       # machines left idle after dispatch
    waiting: tuple[int, ...]                    # available jobs still not started


def machine_list_schedule(inst: Instance, assign: GroupAssignment, groups: SpeedGroups,
                          trace: Optional[list] = None) -> Schedule:
    """Event loop: at time 0 and each completion, idle machines (slowest first) take
    the lowest-id available job of their band."""
    n, m = inst.n, inst.m
    group_of = groups.group_of()
    for j in range(n):
        if not groups.members[assign.k[j] - 1]:
            raise ValueError(f"job {j} is assigned to an empty machine group")
    order = sorted(range(m), key=lambda i: (inst.speeds[i], i))
    succ = inst.dag.successors()
    missing = [0] * n
    for _, b in inst.dag.edges:
        missing[b] += 1
    ready = {j for j in range(n) if missing[j] == 0}
    running: dict[int, tuple[int, Fraction]] = {}
    machine, start, end = [0] * n, [Fraction(0)] * n, [Fraction(0)] * n
    now = Fraction(0)
    left = n
    while left:
        started = []
        for i in order:
            if i in running:
                continue
            cands = [j for j in ready if assign.k[j] == group_of[i]]
            if not cands:
                continue
            j = min(cands)
            ready.discard(j)
            fin = now + Fraction(inst.jobs[j].size) / inst.speeds[i]
            running[i] = (j, fin)
            machine[j], start[j], end[j] = i, now, fin
            started.append((i, j))
        if trace is not None:
            trace.append(TraceEntry(now, tuple(started), tuple(i for i in order if i not in running),
                                    tuple(sorted(ready))))
        if not running:
            raise RuntimeError("no job can run: precedence graph or group assignment is inconsistent")
        now = min(fin for _, fin in running.values())
        for i in [i for i, (_, fin) in running.items() if fin == now]:
            j, _ = running.pop(i)
            left -= 1
            for b in succ[j]:
                missing[b] -= 1
                if missing[b] == 0:
                    ready.add(b)
    return Schedule(tuple(machine), tuple(start), tuple(end))


@dataclass(frozen=True)
class Certificate:
    D_lp: float
    gamma: float
    K: int
    makespan: Fraction
    bound: float

    def to_text(self) -> str:
        return (f"D_lp={self.D_lp!r} gamma={self.gamma!r} K={self.K} "
                f"makespan={self.makespan.numerator}/{self.makespan.denominator} bound={self.bound!r}")


@dataclass(frozen=True)
class RelatedResult:
    schedule: Schedule
    certificate: Certificate
    groups: SpeedGroups
    assignment: GroupAssignment


def schedule_related_cmax(inst: Instance, frac: Optional[FracRelated] = None, cfg: Optional[SolverConfig] = None,
                          solver: Optional[Solver] = None, gamma: Optional[float] = None) -> RelatedResult:
    cfg = cfg or SolverConfig()
    if inst.model is not Model.RELATED:
        raise ValueError("expected a related-machine instance")
    frac = frac if frac is not None else solve_relaxation(inst, cfg, solver)
    pre = preprocess(inst, frac, cfg.feas_tol * max(1.0, frac.D))
    groups = make_groups(pre.scaled, inst.m, gamma)
    assign = assign_groups(pre.x, groups, cfg.feas_tol)
    local = machine_list_schedule(pre.inst, assign, groups)
    sched = Schedule(tuple(pre.retained[i] for i in local.machine), local.start, local.end)
    cert = Certificate(frac.D, groups.gamma, groups.K, sched.makespan, 2 * (groups.gamma + groups.K) * pre.D)
    slack = 1e-9 * max(1.0, cert.bound)
    if float(cert.makespan) > cert.bound + slack:
        raise RuntimeError(f"makespan {float(cert.makespan)} exceeds certified bound {cert.bound}")
    if float(cert.makespan) < frac.D - slack - cfg.feas_tol * max(1.0, frac.D):
        raise RuntimeError(f"makespan {float(cert.makespan)} below the LP bound {frac.D}")
    return RelatedResult(sched, cert, groups, assign)


@dataclass(frozen=True)
class RelatedWCResult:
    schedule: Schedule
    cost: Fraction
    lp_value: float
    blocks: tuple[tuple[int, ...], ...]
    certificates: tuple[Certificate, ...] = field(default=())


def deadline_blocks(inst: Instance, frac: FracRelatedWC, tol: float = 1e-9) -> list[list[int]]:
    """Jobs grouped by the first deadline at or above their LP completion time."""
    dl = [float(d) for d in frac.deadlines]
    u = []
    for c in frac.C:
        idx = next((k for k, d in enumerate(dl) if c <= d * (1 + tol)), len(dl) - 1)
        u.append(idx)
    preds = inst.dag.predecessors()
    for k in inst.dag.topological_order():
        for j in preds[k]:
            u[k] = max(u[k], u[j])
    return [b for b in ([j for j in range(inst.n) if u[j] == k] for k in range(len(dl))) if b]


def _block_instance(inst: Instance, jobs: list[int]) -> Instance:
    pos = {j: r for r, j in enumerate(jobs)}
    edges = [(pos[a], pos[b]) for a, b in inst.dag.edges if a in pos and b in pos]
    return Instance.related([inst.jobs[j].weight for j in jobs], [inst.jobs[j].size for j in jobs],
                            inst.speeds, edges)


def schedule_related_wc(inst: Instance, frac: Optional[FracRelatedWC] = None, cfg: Optional[SolverConfig] = None,
                        solver: Optional[Solver] = None, gamma: Optional[float] = None) -> RelatedWCResult:
    """Concatenate makespan schedules of the deadline blocks, earliest block first."""
    cfg = cfg or SolverConfig()
    if inst.model is not Model.RELATED:
        raise ValueError("expected a related-machine instance")
    frac = frac if frac is not None else solve_relaxation(inst, cfg, solver, objective="wc")
    blocks = deadline_blocks(inst, frac)
    machine, start, end = [0] * inst.n, [Fraction(0)] * inst.n, [Fraction(0)] * inst.n
    offset = Fraction(0)
    certs = []
    for jobs in blocks:
        res = schedule_related_cmax(_block_instance(inst, jobs), cfg=cfg, solver=solver, gamma=gamma)
        for r, j in enumerate(jobs):
            machine[j] = res.schedule.machine[r]
            start[j] = offset + res.schedule.start[r]
            end[j] = offset + res.schedule.end[r]
        offset += res.schedule.makespan
        certs.append(res.certificate)
    sched = Schedule(tuple(machine), tuple(start), tuple(end))
    return RelatedWCResult(sched, objective(inst, sched), frac.lp_value, tuple(tuple(b) for b in blocks),
                           tuple(certs))
