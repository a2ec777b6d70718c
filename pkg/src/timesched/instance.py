"""Instances, schedules and the checks every algorithm output goes through.

Three machine models share one :class:`Instance` type:

* ``identical``: job ``j`` takes ``p_j`` on any machine,
* ``related``: job ``j`` takes ``p_j / s_i`` on machine ``i``,
* ``unrelated``: job ``j`` takes ``p[i][j]`` on machine ``i`` (``None`` = forbidden).

Times are integers for identical/unrelated schedules and
:class:`fractions.Fraction` for related ones, so validation is exact.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heapify, heappop, heappush
from typing import Iterable, Optional, Sequence, Union

Time = Union[int, Fraction]


class Model(str, enum.Enum):
    IDENTICAL = "identical"
    RELATED = "related"
    UNRELATED = "unrelated"


class CycleError(ValueError):
    pass


class CongestionError(ValueError):
    pass


@dataclass(frozen=True)
class Job:
    id: int
    weight: int
    size: Optional[int] = None


@dataclass(frozen=True)
class PrecedenceDag:
    """Edges ``(j, k)`` mean job ``j`` must finish before ``k`` starts."""

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted({(int(a), int(b)) for a, b in self.edges})))

    def predecessors(self) -> list[list[int]]:
        preds: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            if 0 <= b < self.n:
                preds[b].append(a)
        return preds

    def successors(self) -> list[list[int]]:
        succ: list[list[int]] = [[] for _ in range(self.n)]
        for a, b in self.edges:
            if 0 <= a < self.n:
                succ[a].append(b)
        return succ

    def topological_order(self) -> list[int]:
        """Smallest-id-first topological order. Raises :class:`CycleError`."""
        indeg = [0] * self.n
        succ = self.successors()
        for _, b in self.edges:
            indeg[b] += 1
        heap = [j for j in range(self.n) if indeg[j] == 0]
        heapify(heap)
        order = []
        while heap:
            j = heappop(heap)
            order.append(j)
            for k in succ[j]:
                indeg[k] -= 1
                if indeg[k] == 0:
                    heappush(heap, k)
        if len(order) != self.n:
            raise CycleError("precedence graph has a cycle")
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except CycleError:
            return False
        return True


@dataclass(frozen=True)
class Instance:
    model: Model
    jobs: tuple[Job, ...]
    m: int
    T: int
    dag: PrecedenceDag
    speeds: Optional[tuple[Fraction, ...]] = None
    pmatrix: Optional[tuple[tuple[Optional[int], ...], ...]] = None

    @property
    def n(self) -> int:
        return len(self.jobs)

    @property
    def weights(self) -> list[int]:
        return [job.weight for job in self.jobs]

    @property
    def sizes(self) -> list[int]:
        return [job.size for job in self.jobs]

    @classmethod
    def identical(cls, weights: Sequence[int], sizes: Sequence[int], m: int,
                  edges: Iterable[tuple[int, int]] = (), T: Optional[int] = None) -> Instance:
        jobs = tuple(Job(j, int(w), int(p)) for j, (w, p) in enumerate(zip(weights, sizes)))
        if T is None:
            T = sum(int(p) for p in sizes)
        return cls(Model.IDENTICAL, jobs, int(m), int(T), PrecedenceDag(len(jobs), tuple(edges)))

    @classmethod
    def related(cls, weights: Sequence[int], sizes: Sequence[int], speeds: Sequence,
                edges: Iterable[tuple[int, int]] = (), T: Optional[int] = None) -> Instance:
        jobs = tuple(Job(j, int(w), int(p)) for j, (w, p) in enumerate(zip(weights, sizes)))
        if T is None:
            T = sum(int(p) for p in sizes)
        speeds = tuple(Fraction(s) for s in speeds)
        return cls(Model.RELATED, jobs, len(speeds), int(T), PrecedenceDag(len(jobs), tuple(edges)),
                   speeds=speeds)

    @classmethod
    def unrelated(cls, weights: Sequence[int], pmatrix: Sequence[Sequence[Optional[int]]],
                  T: Optional[int] = None) -> Instance:
        jobs = tuple(Job(j, int(w)) for j, w in enumerate(weights))
        rows = tuple(tuple(None if v is None else int(v) for v in row) for row in pmatrix)
        if T is None:
            T = unrelated_horizon(rows, len(jobs))
        return cls(Model.UNRELATED, jobs, len(rows), int(T), PrecedenceDag(len(jobs)), pmatrix=rows)

    def processing_time(self, i: int, j: int) -> Optional[Time]:
        """Time job ``j`` occupies machine ``i``; ``None`` when forbidden."""
        if self.model is Model.IDENTICAL:
            return self.jobs[j].size
        if self.model is Model.RELATED:
            return Fraction(self.jobs[j].size) / self.speeds[i]
        return self.pmatrix[i][j]


def unrelated_horizon(pmatrix, n: int) -> int:
    total = 0
    for j in range(n):
        finite = [row[j] for row in pmatrix if row[j] is not None]
        total += max(finite) if finite else 0
    return total


@dataclass(frozen=True)
class Schedule:
    """Per-job machine index, start and end time."""

    machine: tuple[int, ...]
    start: tuple[Time, ...]
    end: tuple[Time, ...]

    @property
    def n(self) -> int:
        return len(self.machine)

    @property
    def makespan(self) -> Time:
        return max(self.end, default=0)

    @classmethod
    def from_rows(cls, rows: Iterable[tuple[int, Time, Time]]) -> Schedule:
        rows = list(rows)
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows), tuple(r[2] for r in rows))

    def rows(self):
        return list(zip(self.machine, self.start, self.end))


@dataclass
class IntervalSet:
    """Job intervals ``(start, end]`` not yet bound to machines."""

    intervals: list[tuple[int, Time, Time]] = field(default_factory=list)

    def add(self, job: int, start: Time, end: Time) -> None:
        self.intervals.append((job, start, end))

    def congestion(self) -> int:
        return congestion(self.intervals)


def congestion(intervals: Iterable[tuple[int, Time, Time]]) -> int:
    """Largest number of open interval interiors sharing a point."""
    events = []
    for _, s, e in intervals:
        if e > s:
            events.append((s, 1))
            events.append((e, -1))
    # ends sort before starts at equal times: (0,2] and (2,3] do not overlap
    events.sort(key=lambda ev: (ev[0], ev[1]))
    best = cur = 0
    for _, delta in events:
        cur += delta
        best = max(best, cur)
    return best


def validate_instance(inst: Instance) -> list[str]:
    """Every invariant violation of ``inst``; an empty list means valid."""
    problems = []
    n = inst.n
    if inst.m < 1:
        problems.append("machine count must be positive")
    for j, job in enumerate(inst.jobs):
        if job.id != j:
            problems.append(f"job {j}: id {job.id} out of order")
        if job.weight < 1:
            problems.append(f"job {j}: nonpositive weight")
        if inst.model is not Model.UNRELATED and (job.size is None or job.size < 1):
            problems.append(f"job {j}: nonpositive size")
    for a, b in inst.dag.edges:
        if not (0 <= a < n and 0 <= b < n):
            problems.append(f"edge ({a}, {b}): index out of range")
        elif a == b:
            problems.append(f"edge ({a}, {b}): self-loop")
    if inst.dag.n != n:
        problems.append("dag size differs from job count")
    if all(0 <= a < n and 0 <= b < n for a, b in inst.dag.edges) and not inst.dag.is_acyclic():
        problems.append("cycle in precedence graph")

    if inst.model is Model.IDENTICAL:
        if inst.T != sum(job.size or 0 for job in inst.jobs):
            problems.append("bad T: expected sum of sizes")
    elif inst.model is Model.RELATED:
        if inst.speeds is None or len(inst.speeds) != inst.m:
            problems.append("speeds missing or wrong length")
        elif any(s <= 0 for s in inst.speeds):
            problems.append("nonpositive speed")
        if inst.T != sum(job.size or 0 for job in inst.jobs):
            problems.append("bad T: expected sum of sizes")
    else:
        if inst.dag.edges:
            problems.append("unrelated instance must have no precedence edges")
        if inst.pmatrix is None or len(inst.pmatrix) != inst.m or any(len(r) != n for r in inst.pmatrix):
            problems.append("processing matrix missing or wrong shape")
        else:
            for j in range(n):
                col = [row[j] for row in inst.pmatrix]
                if all(v is None for v in col):
                    problems.append(f"job {j}: job unschedulable (no finite processing time)")
                if any(v is not None and v < 1 for v in col):
                    problems.append(f"job {j}: nonpositive processing time")
            if inst.T != unrelated_horizon(inst.pmatrix, n):
                problems.append("bad T: expected sum of per-job max finite processing time")
    return problems


def validate_schedule(inst: Instance, sched: Schedule) -> list[str]:
    """Duration, overlap, precedence and sign checks; returns violations."""
    problems = []
    if sched.n != inst.n:
        problems.append(f"missing job: schedule has {sched.n} jobs, instance has {inst.n}")
        return problems
    for j, (i, s, e) in enumerate(sched.rows()):
        if not 0 <= i < inst.m:
            problems.append(f"job {j}: machine {i} out of range")
            continue
        if s < 0:
            problems.append(f"job {j}: negative start")
        p = inst.processing_time(i, j)
        if p is None:
            problems.append(f"job {j}: not processable on machine {i}")
        elif e - s != p:
            problems.append(f"job {j}: duration {e - s} differs from processing time {p}")
    by_machine: dict[int, list[int]] = {}
    for j, i in enumerate(sched.machine):
        by_machine.setdefault(i, []).append(j)
    for i, jobs in sorted(by_machine.items()):
        jobs.sort(key=lambda j: (sched.start[j], sched.end[j], j))
        for a, b in zip(jobs, jobs[1:]):
            if sched.start[b] < sched.end[a]:
                problems.append(f"overlap on machine {i}: jobs {a} and {b}")
    for a, b in inst.dag.edges:
        if 0 <= a < inst.n and 0 <= b < inst.n and sched.end[a] > sched.start[b]:
            problems.append(f"precedence ({a}, {b}) violated")
    return problems


def objective(inst: Instance, sched: Schedule) -> Time:
    """Total weighted completion time."""
    return sum((job.weight * sched.end[j] for j, job in enumerate(inst.jobs)), 0)


def makespan(sched: Schedule) -> Time:
    return sched.makespan


def depth(dag: PrecedenceDag) -> list[int]:
    """Number of jobs on the longest chain ending at each job."""
    preds = dag.predecessors()
    a = [1] * dag.n
    for j in dag.topological_order():
        for k in preds[j]:
            a[j] = max(a[j], a[k] + 1)
    return a


def intervals_to_machines(ivals: Union[IntervalSet, Sequence[tuple[int, Time, Time]]], m: int) -> Schedule:
    """Greedy sweep by ``(start, job)`` onto the lowest-indexed free machine."""
    items = ivals.intervals if isinstance(ivals, IntervalSet) else list(ivals)
    n = len(items)
    free_at: list[Optional[Time]] = [None] * m
    machine = [0] * n
    start = [0] * n
    end = [0] * n
    ids = sorted(j for j, _, _ in items)
    if ids != list(range(n)):
        raise ValueError("interval set must cover jobs 0..n-1 exactly once")
    for j, s, e in sorted(items, key=lambda it: (it[1], it[0])):
        for i in range(m):
            if free_at[i] is None or free_at[i] <= s:
                break
        else:
            raise CongestionError(f"congestion exceeded: more than {m} intervals overlap at {s}")
        free_at[i] = e
        machine[j], start[j], end[j] = i, s, e
    return Schedule(tuple(machine), tuple(start), tuple(end))


@dataclass(frozen=True)
class GeneratorConfig:
    model: Model
    n: int
    m: int
    size_range: tuple[int, int] = (1, 3)
    weight_range: tuple[int, int] = (1, 5)
    density: float = 0.3
    layers: Optional[int] = None
    speed_range: tuple[int, int] = (1, 8)
    sparsity: float = 1.0


def generate(cfg: GeneratorConfig, seed: int) -> Instance:
    """Random instance; the same ``(cfg, seed)`` always gives the same instance.

    Precedence edges only run from lower to higher job ids. With ``layers``
    set, jobs are split into consecutive layers and edges only join adjacent
    layers. Related speeds are halves in ``speed_range``; unrelated entries
    are finite with probability ``sparsity`` (at least one per job).
    """
    model = Model(cfg.model)
    if cfg.n < 1 or cfg.m < 1:
        raise ValueError("generator needs n >= 1 and m >= 1")
    lo, hi = cfg.size_range
    wlo, whi = cfg.weight_range
    if lo < 1 or hi < lo or wlo < 1 or whi < wlo:
        raise ValueError("bad size or weight range")
    if not 0.0 <= cfg.density <= 1.0 or not 0.0 < cfg.sparsity <= 1.0:
        raise ValueError("density must be in [0, 1] and sparsity in (0, 1]")
    rng = random.Random(seed)
    n, m = cfg.n, cfg.m
    weights = [rng.randint(wlo, whi) for _ in range(n)]

    if model is Model.UNRELATED:
        rows = [[None] * n for _ in range(m)]
        for j in range(n):
            for i in range(m):
                if rng.random() < cfg.sparsity:
                    rows[i][j] = rng.randint(lo, hi)
            if all(rows[i][j] is None for i in range(m)):
                rows[rng.randrange(m)][j] = rng.randint(lo, hi)
        return Instance.unrelated(weights, rows)

    sizes = [rng.randint(lo, hi) for _ in range(n)]
    edges = []
    if cfg.layers:
        k = max(1, min(cfg.layers, n))
        bounds = [round(n * r / k) for r in range(k + 1)]
        layer_of = [[j for j in range(bounds[r], bounds[r + 1])] for r in range(k)]
        for r in range(k - 1):
            for a in layer_of[r]:
                for b in layer_of[r + 1]:
                    if rng.random() < cfg.density:
                        edges.append((a, b))
    else:
        for a in range(n):
            for b in range(a + 1, n):
                if rng.random() < cfg.density:
                    edges.append((a, b))
    if model is Model.IDENTICAL:
        return Instance.identical(weights, sizes, m, edges)
    slo, shi = cfg.speed_range
    if slo <= 0 or shi < slo:
        raise ValueError("bad speed range")
    speeds = [Fraction(rng.randint(2 * slo, 2 * shi), 2) for _ in range(m)]
    return Instance.related(weights, sizes, speeds, edges)
