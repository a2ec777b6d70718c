"""HiGHS (through :func:`scipy.optimize.linprog`) behind the same solver interface."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .program import EQ, GE, IterationLimitError, LinearProgram, LPError, LPSolution, LPStatus, SolverConfig


class HighsSolver:
    def solve(self, lp: LinearProgram, cfg: SolverConfig) -> LPSolution:
        le = [r for r, s in enumerate(lp.sense) if s != EQ]
        eq = [r for r, s in enumerate(lp.sense) if s == EQ]
        sign = np.array([-1.0 if lp.sense[r] == GE else 1.0 for r in le])
        A_ub = sp.diags(sign) @ lp.A[le] if le else None
        b_ub = sign * lp.rhs[le] if le else None
        A_eq = lp.A[eq] if eq else None
        b_eq = lp.rhs[eq] if eq else None
        bounds = [(lo, None if not np.isfinite(hi) else hi) for lo, hi in zip(lp.lower, lp.upper)]
        res = linprog(lp.cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs",
                      options={"primal_feasibility_tolerance": min(cfg.feas_tol, 1e-7) / 10,
                               "maxiter": cfg.max_iter})
        if res.status == 0:
            return LPSolution(LPStatus.OPTIMAL, np.asarray(res.x), float(res.fun), int(res.nit))
        if res.status == 2:
            return LPSolution(LPStatus.INFEASIBLE, iterations=int(res.nit))
        if res.status == 3:
            return LPSolution(LPStatus.UNBOUNDED, iterations=int(res.nit))
        if res.status == 1:
            raise IterationLimitError(res.message)
        raise LPError(res.message)

