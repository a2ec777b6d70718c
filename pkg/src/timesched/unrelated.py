"""Unrelated machines: rounding the start-indexed LP.

Each LP variable ``x[i, j, s]`` is a rectangle of height ``x`` over
``(s, s + p_ij]`` on machine ``i``. Two roundings are provided:

* :func:`independent_round` picks one rectangle per job with probability
  ``x``, draws a point ``tau`` inside it and runs the jobs of each machine in
  ``tau`` order.
* :func:`schedule_unrelated_wc` samples a rectangle and ``tau`` for every
  edge, shifts the order key by ``theta``, groups "bad" edges (small,
  early-starting LP mass) that fall in the same dyadic block, and picks
  machines by dependent rounding so that at most one edge per group is kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .instance import Instance, Model, Schedule, objective
from .lp.program import Solver, SolverConfig
from .lp.relaxations import FracUnrelated, solve_relaxation
from .seeding import derive_seed, trial_rng

GOOD_THRESHOLD = 0.01
SET_FILL = 1.0 / 9.0
NUM_SETS = 10
NUM_DROPPED = 2
MIN_BLOCK = -2


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def pack(assignment, keys, p: np.ndarray) -> Schedule:
    """Run each machine's jobs back to back from 0 in ascending ``(key, job)`` order."""
    n = len(assignment)
    start, end = [0] * n, [0] * n
    for i in sorted(set(assignment)):
        t = 0
        for j in sorted((j for j in range(n) if assignment[j] == i), key=lambda j: (keys[j], j)):
            start[j] = t
            t += int(p[i, j])
            end[j] = t
    return Schedule(tuple(int(i) for i in assignment), tuple(start), tuple(end))


def independent_round(frac: FracUnrelated, seed=None) -> Schedule:
    """Pick rectangle ``(i, s)`` for job ``j`` with probability ``x[i, j, s]``."""
    rng = _rng(seed)
    m, n, T = frac.x.shape
    assignment, taus = [0] * n, [0.0] * n
    for j in range(n):
        probs = frac.x[:, j, :].reshape(-1)
        k = int(rng.choice(len(probs), p=probs / probs.sum()))
        i, s = divmod(k, T)
        assignment[j] = i
        taus[j] = s + frac.p[i, j] * (1.0 - rng.random())
    return pack(assignment, taus, frac.p)


def edges(frac: FracUnrelated) -> np.ndarray:
    return frac.y > 0


def is_good(phi: float, y: float, p: float) -> bool:
    return phi + y * p >= GOOD_THRESHOLD * p


def classify(frac: FracUnrelated) -> np.ndarray:
    """Boolean ``(m, n)`` mask of good edges (False off the support)."""
    E = edges(frac)
    phi = np.where(E, frac.phi, 0.0)
    return E & (phi + frac.y * frac.p >= GOOD_THRESHOLD * frac.p)


@dataclass(frozen=True)
class RectSample:
    """Per-edge start ``s``, point ``tau`` in ``(s, s + p]`` and shift ``theta``; nan off the support."""

    s: np.ndarray
    tau: np.ndarray
    theta: np.ndarray


def shift(s, phi, y, p):
    return 0.2 * (s + phi) + 0.4 * y * p


def sample_rectangles(frac: FracUnrelated, seed=None) -> RectSample:
    rng = _rng(seed)
    m, n, T = frac.x.shape
    s = np.full((m, n), np.nan)
    tau = np.full((m, n), np.nan)
    theta = np.full((m, n), np.nan)
    for i in range(m):
        for j in range(n):
            if frac.y[i, j] <= 0:
                continue
            w = frac.x[i, j]
            si = int(rng.choice(T, p=w / w.sum()))
            s[i, j] = si
            tau[i, j] = si + frac.p[i, j] * (1.0 - rng.random())
            theta[i, j] = shift(si, frac.phi[i, j], frac.y[i, j], frac.p[i, j])
    return RectSample(s, tau, theta)


def block_of(tau: float) -> int:
    """``a`` with ``tau`` in ``(2**a, 2**(a+1)]``."""
    mant, e = math.frexp(tau)      # tau = mant * 2**e, mant in [0.5, 1)
    return e - 2 if mant == 0.5 else e - 1


def block_for(p: float, phi: float, s: float, theta: float, tau: float) -> Optional[int]:
    """The basic block a bad edge is assigned to, or None.

    Conditions: the block lies inside ``(10 phi, p]``, the shifted rectangle
    start ``s + theta`` is at most the block's left end, and ``tau`` is inside.
    """
    if tau <= 0:
        return None
    a = block_of(tau)
    if a < MIN_BLOCK:
        return None
    lo, hi = math.ldexp(1.0, a), math.ldexp(1.0, a + 1)
    if lo >= 10 * phi and hi <= p and s + theta <= lo:
        return a
    return None


def assign_blocks(frac: FracUnrelated, sample: RectSample, good: Optional[np.ndarray] = None) -> dict:
    """``{(i, j): a}`` for every bad edge that lands in a block."""
    good = classify(frac) if good is None else good
    bad = edges(frac) & ~good
    out = {}
    for i, j in zip(*np.nonzero(bad)):
        a = block_for(frac.p[i, j], frac.phi[i, j], sample.s[i, j], sample.theta[i, j], sample.tau[i, j])
        if a is not None:
            out[int(i), int(j)] = a
    return out


class GroupingError(RuntimeError):
    pass


@dataclass(frozen=True)
class GroupingScheme:
    groups: dict                     # (machine, block) -> tuple of job ids kept together
    block_weight: dict               # (machine, block) -> y-weight before dropping sets
    sets: dict                       # (machine, block) -> list of the (up to 10) filled sets

    def machine_groups(self, i: int) -> list[tuple[int, ...]]:
        return [g for (mi, _), g in sorted(self.groups.items()) if mi == i and g]

    @property
    def num_groups(self) -> int:
        return sum(1 for g in self.groups.values() if g)


def fill_sets(jobs: list[int], weight: dict) -> list[list[int]]:
    """Greedy fill in job order; a set closes once its weight reaches 1/9."""
    sets, cur, w = [], [], 0.0
    for j in sorted(jobs):
        cur.append(j)
        w += weight[j]
        if w >= SET_FILL:
            sets.append(cur)
            cur, w = [], 0.0
    if cur:
        sets.append(cur)
    return sets


def build_grouping(frac: FracUnrelated, blocks: dict, seed=None, tol: float = 1e-9) -> GroupingScheme:
    rng = _rng(seed)
    per_block: dict[tuple[int, int], list[int]] = {}
    for (i, j), a in sorted(blocks.items()):
        per_block.setdefault((i, a), []).append(j)
    groups, weights, all_sets = {}, {}, {}
    for (i, a), jobs in sorted(per_block.items()):
        weights[i, a] = float(sum(frac.y[i, j] for j in jobs))
        sets = fill_sets(jobs, {j: frac.y[i, j] for j in jobs})
        if len(sets) > NUM_SETS:
            raise GroupingError(f"block {a} on machine {i} needs {len(sets)} sets (weight {weights[i, a]:.6f})")
        padded = sets + [[] for _ in range(NUM_SETS - len(sets))]
        dropped = set(rng.choice(NUM_SETS, size=NUM_DROPPED, replace=False).tolist())
        kept = tuple(sorted(j for k, s in enumerate(padded) if k not in dropped for j in s))
        if sum(frac.y[i, j] for j in kept) > 1.0 + tol:
            raise GroupingError(f"group for block {a} on machine {i} has weight above 1")
        groups[i, a] = kept
        all_sets[i, a] = sets
    return GroupingScheme(groups, weights, all_sets)


@dataclass(frozen=True)
class AssignmentOutcome:
    machine: tuple[int, ...]         # chosen machine per job
    sample: Optional[RectSample] = None


class RoundingDriftError(RuntimeError):
    pass


def dependent_round(y: np.ndarray, grouping: Optional[GroupingScheme] = None, seed=None,
                    drift_tol: float = 1e-12) -> AssignmentOutcome:
    """Round ``y`` to one machine per job, keeping ``Pr[j -> i] = y[i, j]``.

    The bipartite graph joins jobs to machine-side nodes: one node per group
    and one node per machine for its ungrouped edges. While fractional edges
    remain, a maximal path or a cycle of fractional edges is split into its
    two alternating matchings and mass is moved between them by the largest
    step either way that keeps all values in [0, 1], choosing the direction
    with the probabilities that keep every expectation fixed. Job nodes keep
    total 1 exactly, and a group node (total at most 1) ends with at most
    one chosen edge.
    """
    rng = _rng(seed)
    y = np.asarray(y, dtype=float)
    m, n = y.shape
    node_of = {}
    nodes = 0
    if grouping is not None:
        for (i, _), g in sorted(grouping.groups.items()):
            if not g:
                continue
            for j in g:
                node_of[i, j] = n + nodes
            nodes += 1
    residual = {}
    eu, ev, ei, val = [], [], [], []
    for i in range(m):
        for j in range(n):
            if y[i, j] <= 0:
                continue
            if (i, j) not in node_of:
                if i not in residual:
                    residual[i] = n + nodes
                    nodes += 1
                node_of[i, j] = residual[i]
            eu.append(j)
            ev.append(node_of[i, j])
            ei.append(i)
            val.append(y[i, j])
    val = np.array(val)
    eu = np.array(eu, dtype=int)
    ev = np.array(ev, dtype=int)
    ei = np.array(ei, dtype=int)
    job_total = np.bincount(eu, weights=val, minlength=n)
    V = n + nodes
    adj: list[set[int]] = [set() for _ in range(V)]

    def snap(e):
        if val[e] <= drift_tol:
            val[e] = 0.0
        elif val[e] >= 1.0 - drift_tol:
            val[e] = 1.0
        if val[e] in (0.0, 1.0):
            adj[eu[e]].discard(e)
            adj[ev[e]].discard(e)

    for e in range(len(val)):
        adj[eu[e]].add(e)
        adj[ev[e]].add(e)
        snap(e)

    while True:
        start = next((v for v in range(n, V) if len(adj[v]) == 1), None)
        if start is None:
            start = next((v for v in range(V) if adj[v]), None)
        if start is None:
            break
        path_nodes, path_edges = [start], []
        seen = {start: 0}
        cur, came = start, -1
        while True:
            nxt = next((e for e in sorted(adj[cur]) if e != came), None)
            if nxt is None:
                cycle = path_edges
                break
            other = ev[nxt] if eu[nxt] == cur else eu[nxt]
            path_edges.append(nxt)
            if other in seen:
                cycle = path_edges[seen[other]:]
                break
            seen[other] = len(path_nodes)
            path_nodes.append(other)
            cur, came = other, nxt
        a_edges = np.array(cycle[0::2], dtype=int)
        b_edges = np.array(cycle[1::2], dtype=int)
        up = min(np.min(1.0 - val[a_edges]), np.min(val[b_edges], initial=np.inf))
        down = min(np.min(val[a_edges]), np.min(1.0 - val[b_edges], initial=np.inf))
        if rng.random() < down / (up + down):
            val[a_edges] += up
            val[b_edges] -= up
        else:
            val[a_edges] -= down
            val[b_edges] += down
        touched = np.concatenate([a_edges, b_edges])
        for e in touched:
            snap(int(e))
        jobs = np.unique(eu[touched])
        now = np.bincount(eu, weights=val, minlength=n)
        if np.abs(now[jobs] - job_total[jobs]).max() > drift_tol:
            raise RoundingDriftError("job mass drifted during dependent rounding")

    machine = [-1] * n
    for e in np.flatnonzero(val == 1.0):
        if machine[eu[e]] != -1:
            raise RoundingDriftError(f"job {eu[e]} received two machines")
        machine[eu[e]] = int(ei[e])
    if -1 in machine:
        raise RoundingDriftError(f"job {machine.index(-1)} received no machine")
    return AssignmentOutcome(tuple(machine))


def area_before(frac: FracUnrelated, i: int, tau: float) -> float:
    """Total rectangle area on machine ``i`` lying left of ``tau``."""
    m, n, T = frac.x.shape
    starts = np.arange(T, dtype=float)
    covered = np.clip(tau - starts[None, :], 0.0, frac.p[i][:, None])
    return float((frac.x[i] * covered).sum())


@dataclass
class TrialStats:
    trial: int
    cost: int
    num_bad_edges: int
    num_groups: int
    seed: int

    def row(self) -> tuple:
        return (self.trial, self.cost, self.num_bad_edges, self.num_groups, self.seed)


@dataclass
class UnrelatedResult:
    schedule: Schedule
    cost: int
    costs: list = field(default_factory=list)
    log: list = field(default_factory=list)
    lp_value: float = float("nan")

    @property
    def mean_cost(self) -> float:
        return float(np.mean(self.costs))


TRIAL_LOG_HEADER = ("trial", "cost", "num_bad_edges", "num_groups", "seed")


def round_once(frac: FracUnrelated, seed) -> tuple[Schedule, GroupingScheme, int]:
    """One pass: sample, classify, block, group, round, order by ``tau + theta``."""
    rng = _rng(seed)
    sample = sample_rectangles(frac, rng)
    good = classify(frac)
    blocks = assign_blocks(frac, sample, good)
    grouping = build_grouping(frac, blocks, rng)
    outcome = dependent_round(frac.y, grouping, rng)
    keys = [sample.tau[i, j] + sample.theta[i, j] for j, i in enumerate(outcome.machine)]
    num_bad = int((edges(frac) & ~good).sum())
    return pack(outcome.machine, keys, frac.p), grouping, num_bad


def _frac(inst, frac, cfg, solver):
    if inst.model is not Model.UNRELATED:
        raise ValueError("expected an unrelated-machine instance")
    return frac if frac is not None else solve_relaxation(inst, cfg, solver)


def schedule_unrelated_wc(inst: Instance, frac: Optional[FracUnrelated] = None, seed: int = 0, trials: int = 1,
                          cfg: Optional[SolverConfig] = None, solver: Optional[Solver] = None) -> UnrelatedResult:
    frac = _frac(inst, frac, cfg, solver)
    if trials < 1:
        raise ValueError("need at least one trial")
    best = None
    costs, log = [], []
    for k in range(trials):
        sched, grouping, num_bad = round_once(frac, trial_rng(seed, k))
        cost = objective(inst, sched)
        costs.append(cost)
        log.append(TrialStats(k, cost, num_bad, grouping.num_groups, derive_seed(seed, k)))
        if best is None or cost < best[1]:
            best = (sched, cost)
    return UnrelatedResult(best[0], best[1], costs, log, frac.lp_value)


def schedule_unrelated_independent(inst: Instance, frac: Optional[FracUnrelated] = None, seed: int = 0,
                                   trials: int = 1, cfg: Optional[SolverConfig] = None,
                                   solver: Optional[Solver] = None) -> UnrelatedResult:
    frac = _frac(inst, frac, cfg, solver)
    if trials < 1:
        raise ValueError("need at least one trial")
    best = None
    costs, log = [], []
    for k in range(trials):
        sched = independent_round(frac, trial_rng(seed, k))
        cost = objective(inst, sched)
        costs.append(cost)
        log.append(TrialStats(k, cost, 0, 0, derive_seed(seed, k)))
        if best is None or cost < best[1]:
            best = (sched, cost)
    return UnrelatedResult(best[0], best[1], costs, log, frac.lp_value)
