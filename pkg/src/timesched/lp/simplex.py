"""Bounded-variable revised simplex (two phases, dense basis inverse).

Each row gets a slack so the system reads ``A x + s = b``; rows the starting
slack basis cannot satisfy get an artificial. Phase 1 minimises the
artificial sum, phase 2 fixes artificials at zero and minimises the real
cost. Nonbasic variables sit at a bound; the ratio test allows bound flips.
Pricing is Dantzig's rule, falling back to Bland's rule after a run of
degenerate pivots so the method cannot cycle.
"""
from __future__ import annotations

import numpy as np

from .program import GE, IterationLimitError, LinearProgram, LPSolution, LPStatus, SolverConfig


class _Unbounded(Exception):
    pass


class BoundedSimplex:
    def __init__(self, refactor_every: int = 64, bland_after: int = 25, pivot_tol: float = 1e-9):
        self.refactor_every = refactor_every
        self.bland_after = bland_after
        self.pivot_tol = pivot_tol

    def solve(self, lp: LinearProgram, cfg: SolverConfig) -> LPSolution:
        n, R = lp.num_vars, lp.num_rows
        if R == 0:
            return self._solve_box(lp)

        A = lp.A.toarray()
        b = np.array(lp.rhs, dtype=float)
        sign = np.array([-1.0 if s == GE else 1.0 for s in lp.sense])
        A *= sign[:, None]
        b *= sign

        lower = np.concatenate([lp.lower, np.zeros(R)])
        slack_up = np.array([np.inf if s != "=" else 0.0 for s in lp.sense])
        upper = np.concatenate([lp.upper, slack_up])
        x = lower.copy()
        resid = b - A @ x[:n]

        art_rows = [r for r in range(R)
                    if (lp.sense[r] == "=" and abs(resid[r]) > 0) or (lp.sense[r] != "=" and resid[r] < 0)]
        n_art = len(art_rows)
        Afull = np.zeros((R, n + R + n_art))
        Afull[:, :n] = A
        Afull[:, n:n + R] = np.eye(R)
        basis = list(range(n, n + R))
        for k, r in enumerate(art_rows):
            col = n + R + k
            Afull[r, col] = 1.0 if resid[r] >= 0 else -1.0
            basis[r] = col
        lower = np.concatenate([lower, np.zeros(n_art)])
        upper = np.concatenate([upper, np.full(n_art, np.inf)])
        x = np.concatenate([x, np.zeros(n_art)])
        for r in range(R):
            x[basis[r]] = abs(resid[r]) if basis[r] >= n + R else resid[r]
        at_upper = np.zeros(len(x), dtype=bool)

        budget = [cfg.max_iter]
        iters = 0
        if n_art:
            cost1 = np.zeros(len(x))
            cost1[n + R:] = 1.0
            iters += self._run(Afull, b, cost1, lower, upper, x, basis, at_upper, cfg, budget, None)
            if x[n + R:].sum() > cfg.feas_tol * max(1.0, float(np.abs(b).max())):
                return LPSolution(LPStatus.INFEASIBLE, iterations=iters)
            upper[n + R:] = 0.0
            x[n + R:] = np.clip(x[n + R:], 0.0, 0.0)

        cost2 = np.zeros(len(x))
        cost2[:n] = lp.cost
        try:
            iters += self._run(Afull, b, cost2, lower, upper, x, basis, at_upper, cfg, budget, n)
        except _Unbounded:
            return LPSolution(LPStatus.UNBOUNDED, iterations=iters)
        self._polish(Afull, b, lower, upper, x, basis)
        sol = x[:n].copy()
        return LPSolution(LPStatus.OPTIMAL, sol, float(lp.cost @ sol), iters)

    @staticmethod
    def _solve_box(lp: LinearProgram) -> LPSolution:
        x = np.array(lp.lower, dtype=float)
        for c, cost in enumerate(lp.cost):
            if cost < 0:
                if not np.isfinite(lp.upper[c]):
                    return LPSolution(LPStatus.UNBOUNDED)
                x[c] = lp.upper[c]
        return LPSolution(LPStatus.OPTIMAL, x, float(lp.cost @ x), 0)

    @staticmethod
    def _basic_values(Afull, b, x, basis, Binv):
        xn = x.copy()
        xn[basis] = 0.0
        return Binv @ (b - Afull @ xn)

    def _polish(self, Afull, b, lower, upper, x, basis):
        xn = x.copy()
        xn[basis] = 0.0
        xb = np.linalg.solve(Afull[:, basis], b - Afull @ xn)
        x[basis] = np.clip(xb, lower[basis], upper[basis])

    def _run(self, Afull, b, cost, lower, upper, x, basis, at_upper, cfg, budget, n_struct):
        R = len(basis)
        is_basic = np.zeros(len(x), dtype=bool)
        is_basic[basis] = True
        fixed = (upper - lower) <= 0.0
        Binv = np.linalg.inv(Afull[:, basis])
        x[basis] = self._basic_values(Afull, b, x, basis, Binv)
        opt_tol = cfg.opt_tol * max(1.0, float(np.abs(cost).max()))
        degenerate = 0
        it = 0
        while True:
            if budget[0] <= 0:
                point = x[:n_struct].copy() if n_struct is not None else None
                raise IterationLimitError("simplex iteration limit reached", point)
            if it and it % self.refactor_every == 0:
                Binv = np.linalg.inv(Afull[:, basis])
                x[basis] = self._basic_values(Afull, b, x, basis, Binv)

            y = cost[basis] @ Binv
            d = cost - y @ Afull
            movable = ~is_basic & ~fixed
            inc = movable & ~at_upper & (d < -opt_tol)
            dec = movable & at_upper & (d > opt_tol)
            cand = inc | dec
            if not cand.any():
                return it
            if degenerate > self.bland_after:
                q = int(np.flatnonzero(cand)[0])
            else:
                q = int(np.argmax(np.where(cand, np.abs(d), -1.0)))
            direction = 1.0 if inc[q] else -1.0

            w = Binv @ Afull[:, q]
            rate = -direction * w
            xb = x[basis]
            limits = np.full(R, np.inf)
            down = rate < -self.pivot_tol
            limits[down] = (xb[down] - lower[basis][down]) / -rate[down]
            up = (rate > self.pivot_tol) & np.isfinite(upper[basis])
            limits[up] = (upper[basis][up] - xb[up]) / rate[up]
            np.maximum(limits, 0.0, out=limits)
            t_row = float(limits.min()) if R else np.inf
            t_flip = upper[q] - lower[q]
            t = min(t_row, t_flip)
            if not np.isfinite(t):
                raise _Unbounded()

            x[q] += direction * t
            x[basis] = xb + rate * t
            budget[0] -= 1
            it += 1
            degenerate = degenerate + 1 if t <= 1e-12 else 0

            if t_flip <= t_row:
                at_upper[q] = not at_upper[q]
                x[q] = upper[q] if at_upper[q] else lower[q]
                continue

            ties = np.flatnonzero(limits <= t_row + 1e-12)
            if degenerate > self.bland_after:
                k = int(min(ties, key=lambda r: basis[r]))
            else:
                k = int(ties[np.argmax(np.abs(rate[ties]))])
            leave = basis[k]
            hit_upper = rate[k] > 0
            at_upper[leave] = bool(hit_upper)
            x[leave] = upper[leave] if hit_upper else lower[leave]
            is_basic[leave] = False
            is_basic[q] = True
            at_upper[q] = False
            basis[k] = q

            piv = w[k]
            row_k = Binv[k] / piv
            Binv -= np.outer(w, row_k)
            Binv[k] = row_k
