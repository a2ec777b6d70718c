"""Sparse LP container, solver configuration and the pluggable solve entry point."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Optional, Protocol, Sequence

import numpy as np
import scipy.sparse as sp

LE, EQ, GE = "<=", "=", ">="


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LPError(RuntimeError):
    pass


class IterationLimitError(LPError):
    """Raised when a solver gives up; ``point`` is the best feasible point, if any."""

    def __init__(self, message: str, point: Optional[np.ndarray] = None):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-7
    opt_tol: float = 1e-9
    max_iter: int = 100_000

    def __post_init__(self):
        if self.feas_tol <= 0 or self.opt_tol <= 0 or self.max_iter <= 0:
            raise ValueError("tolerances and iteration limit must be positive")


@dataclass(frozen=True)
class LinearProgram:
    """``min cost @ x`` s.t. ``A x (sense) rhs`` and ``lower <= x <= upper``.

    ``var_keys`` names each column (e.g. ``("x", j, t)``); relaxation builders
    and solution extractors rely on them instead of positional layouts.
    """

    cost: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    A: sp.csr_matrix
    sense: tuple[str, ...]
    rhs: np.ndarray
    var_keys: tuple[Hashable, ...]
    row_names: tuple[str, ...] = ()

    @property
    def num_vars(self) -> int:
        return len(self.cost)

    @property
    def num_rows(self) -> int:
        return len(self.rhs)

    def index(self) -> dict:
        return {k: c for c, k in enumerate(self.var_keys)}

    def row_violations(self, x: np.ndarray) -> np.ndarray:
        """Per-row amount by which ``x`` breaks its constraint (0 when satisfied)."""
        ax = self.A @ x
        out = np.zeros(self.num_rows)
        for r, s in enumerate(self.sense):
            if s == LE:
                out[r] = max(0.0, ax[r] - self.rhs[r])
            elif s == GE:
                out[r] = max(0.0, self.rhs[r] - ax[r])
            else:
                out[r] = abs(ax[r] - self.rhs[r])
        return out

    def max_violation(self, x: np.ndarray) -> float:
        bounds = max(float(np.max(self.lower - x, initial=0.0)), float(np.max(x - self.upper, initial=0.0)))
        rows = float(np.max(self.row_violations(x), initial=0.0))
        return max(bounds, rows)

    def value(self, x: np.ndarray) -> float:
        return float(self.cost @ x)


@dataclass
class LPBuilder:
    _cost: list = field(default_factory=list)
    _lower: list = field(default_factory=list)
    _upper: list = field(default_factory=list)
    _keys: list = field(default_factory=list)
    _rows: list = field(default_factory=list)
    _cols: list = field(default_factory=list)
    _vals: list = field(default_factory=list)
    _sense: list = field(default_factory=list)
    _rhs: list = field(default_factory=list)
    _names: list = field(default_factory=list)

    def add_var(self, key: Hashable, cost: float = 0.0, lower: float = 0.0, upper: float = np.inf) -> int:
        if not np.isfinite(lower):
            raise ValueError("variables need a finite lower bound")
        if not np.isfinite(cost):
            raise ValueError("objective coefficients must be finite")
        self._keys.append(key)
        self._cost.append(float(cost))
        self._lower.append(float(lower))
        self._upper.append(float(upper))
        return len(self._keys) - 1

    def add_row(self, coefs: Mapping[int, float] | Sequence[tuple[int, float]], sense: str, rhs: float,
                name: str = "") -> int:
        if sense not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {sense!r}")
        items = coefs.items() if isinstance(coefs, Mapping) else coefs
        r = len(self._rhs)
        for c, v in items:
            if not 0 <= c < len(self._keys):
                raise ValueError(f"row {name or r}: variable index {c} out of range")
            if not np.isfinite(v):
                raise ValueError(f"row {name or r}: non-finite coefficient")
            self._rows.append(r)
            self._cols.append(c)
            self._vals.append(float(v))
        self._sense.append(sense)
        self._rhs.append(float(rhs))
        self._names.append(name)
        return r

    def build(self) -> LinearProgram:
        nv, nr = len(self._keys), len(self._rhs)
        A = sp.csr_matrix((self._vals, (self._rows, self._cols)), shape=(nr, nv))
        A.sum_duplicates()
        arrays = [np.array(a, dtype=float) for a in (self._cost, self._lower, self._upper, self._rhs)]
        for a in arrays:
            a.setflags(write=False)
        cost, lower, upper, rhs = arrays
        return LinearProgram(cost, lower, upper, A, tuple(self._sense), rhs, tuple(self._keys), tuple(self._names))


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    iterations: int = 0


class Solver(Protocol):
    def solve(self, lp: LinearProgram, cfg: SolverConfig) -> LPSolution: ...


_default_solver: Optional[Solver] = None


def default_solver() -> Solver:
    global _default_solver
    if _default_solver is None:
        from .simplex import BoundedSimplex

        _default_solver = BoundedSimplex()
    return _default_solver


def set_default_solver(solver: Optional[Solver]) -> None:
    """Swap the solver used when ``solve_lp`` gets none (``None`` restores the bundled one)."""
    global _default_solver
    _default_solver = solver


def solve_lp(lp: LinearProgram, cfg: Optional[SolverConfig] = None, solver: Optional[Solver] = None) -> LPSolution:
    cfg = cfg or SolverConfig()
    sol = (solver or default_solver()).solve(lp, cfg)
    if sol.status is LPStatus.OPTIMAL:
        viol = lp.max_violation(sol.x)
        if viol > cfg.feas_tol:
            raise LPError(f"solver returned a point violating constraints by {viol:.3g}")
    return sol
