"""Scikit-learn style wrappers: ``fit`` solves the relaxation, ``predict`` rounds it.

``fit(inst)`` stores the fractional solution in ``frac_`` and its value in
``lp_value_``; ``predict(inst)`` returns the rounded schedule (best over
``trials`` draws) and keeps the per-trial costs in ``costs_``.
"""
from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .identical import schedule_identical_unit_wc, schedule_identical_wc
from .instance import Model, objective
from .lp.program import SolverConfig
from .lp.relaxations import solve_relaxation
from .related import schedule_related_cmax, schedule_related_wc
from .unrelated import schedule_unrelated_independent, schedule_unrelated_wc
from .validation import check_instance, check_schedule


class _SchedulerBase(BaseEstimator):
    _model: Model

    def _lp_objective(self) -> str:
        return "default"

    def fit(self, X, y=None):
        inst = check_instance(X, self._model)
        self.frac_ = solve_relaxation(inst, SolverConfig(feas_tol=self.feas_tol), objective=self._lp_objective())
        self.lp_value_ = float(self.frac_.lp_value)
        self.n_jobs_in_ = inst.n
        return self

    def _check_same(self, X):
        check_is_fitted(self, "frac_")
        inst = check_instance(X, self._model)
        if inst.n != self.n_jobs_in_:
            raise ValueError(f"fitted on {self.n_jobs_in_} jobs, got an instance with {inst.n}")
        return inst

    def score(self, X, y=None) -> float:
        """Negative LP-relative cost of the predicted schedule (higher is better)."""
        inst = self._check_same(X)
        return -float(objective(inst, self.predict(inst))) / self.lp_value_

    def fit_predict(self, X, y=None):
        return self.fit(X).predict(X)


class IdenticalPrecedenceScheduler(_SchedulerBase):
    """``variant`` is ``"general"``, ``"unit"`` or ``"auto"`` (unit when all sizes are 1)."""

    _model = Model.IDENTICAL

    def __init__(self, variant="auto", trials=1, seed=0, grid=False, feas_tol=1e-7):
        self.variant = variant
        self.trials = trials
        self.seed = seed
        self.grid = grid
        self.feas_tol = feas_tol

    def predict(self, X):
        inst = self._check_same(X)
        unit = all(job.size == 1 for job in inst.jobs)
        variant = ("unit" if unit else "general") if self.variant == "auto" else self.variant
        if variant not in ("general", "unit"):
            raise ValueError(f"unknown variant {self.variant!r}")
        fn = schedule_identical_unit_wc if variant == "unit" else schedule_identical_wc
        res = fn(inst, self.frac_, self.seed, self.trials, self.grid, SolverConfig(feas_tol=self.feas_tol))
        self.costs_ = res.costs
        return check_schedule(inst, res.schedule)


class RelatedPrecedenceScheduler(_SchedulerBase):
    """``objective`` is ``"wc"`` (weighted completion time) or ``"cmax"`` (makespan)."""

    _model = Model.RELATED

    def __init__(self, objective="wc", gamma=None, feas_tol=1e-7):
        self.objective = objective
        self.gamma = gamma
        self.feas_tol = feas_tol

    def _lp_objective(self) -> str:
        if self.objective not in ("wc", "cmax"):
            raise ValueError(f"unknown objective {self.objective!r}")
        return "wc" if self.objective == "wc" else "default"

    def predict(self, X):
        inst = self._check_same(X)
        cfg = SolverConfig(feas_tol=self.feas_tol)
        if self.objective == "cmax":
            res = schedule_related_cmax(inst, self.frac_, cfg, gamma=self.gamma)
            self.certificate_ = res.certificate
            self.costs_ = [res.certificate.makespan]
        else:
            res = schedule_related_wc(inst, self.frac_, cfg, gamma=self.gamma)
            self.costs_ = [res.cost]
        return check_schedule(inst, res.schedule)


class UnrelatedScheduler(_SchedulerBase):
    """``rounding`` is ``"dependent"`` (grouped) or ``"independent"``."""

    _model = Model.UNRELATED

    def __init__(self, rounding="dependent", trials=1, seed=0, feas_tol=1e-7):
        self.rounding = rounding
        self.trials = trials
        self.seed = seed
        self.feas_tol = feas_tol

    def predict(self, X):
        inst = self._check_same(X)
        if self.rounding not in ("dependent", "independent"):
            raise ValueError(f"unknown rounding {self.rounding!r}")
        fn = schedule_unrelated_wc if self.rounding == "dependent" else schedule_unrelated_independent
        res = fn(inst, self.frac_, self.seed, self.trials)
        self.costs_ = res.costs
        self.trial_log_ = [s.row() for s in res.log]
        return check_schedule(inst, res.schedule)
