"""Experiment runner: generate instances, solve the LP, round, optionally solve exactly, report CSV.

Seeds: instance ``k`` of a run with master seed ``S`` is generated from
``derive_seed(S, k)``; trial ``t`` on that instance draws its randomness from
``derive_seed(derive_seed(S, k), t)``.

Report columns (fixed order)::

    instance_id, n, m, lp_value, opt_value, alg_cost_mean, alg_cost_best,
    ratio_vs_lp, ratio_vs_opt, seed, wall_time,
    opt_value_exact, alg_cost_best_exact, error

Decimals carry 12 significant digits; the ``*_exact`` columns hold the same
rationals as ``num/den``. ``wall_time`` stays blank unless timing is
requested, so reports with equal configs are byte-identical. ``error``
holds the message of a failed stage; the run moves on to the next instance.
"""
from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

import numpy as np

from .exact import DEFAULT_CAP, exact
from .identical import schedule_identical_unit_wc, schedule_identical_wc
from .instance import GeneratorConfig, Instance, Model, generate, validate_schedule
from .lp.program import SolverConfig
from .related import schedule_related_cmax, schedule_related_wc
from .seeding import derive_seed
from .unrelated import schedule_unrelated_independent, schedule_unrelated_wc

COLUMNS = ("instance_id", "n", "m", "lp_value", "opt_value", "alg_cost_mean", "alg_cost_best", "ratio_vs_lp",
           "ratio_vs_opt", "seed", "wall_time", "opt_value_exact", "alg_cost_best_exact", "error")

ALGORITHMS = {
    "identical-general": Model.IDENTICAL,
    "identical-unit": Model.IDENTICAL,
    "related-cmax": Model.RELATED,
    "related-wc": Model.RELATED,
    "unrelated-indep": Model.UNRELATED,
    "unrelated-dep": Model.UNRELATED,
}

WORKERS_ENV = "TIMESCHED_WORKERS"


def default_algorithm(model: Model, unit: bool = False) -> str:
    return {Model.IDENTICAL: "identical-unit" if unit else "identical-general",
            Model.RELATED: "related-wc", Model.UNRELATED: "unrelated-dep"}[Model(model)]


@dataclass(frozen=True)
class RunOutcome:
    schedule: object
    costs: list
    best: object
    lp_value: float


def run_algorithm(inst: Instance, alg: str, seed: int, trials: int, cfg: Optional[SolverConfig] = None) -> RunOutcome:
    """Run a named algorithm; makespan for ``related-cmax``, weighted completion time otherwise."""
    if alg not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}")
    if ALGORITHMS[alg] is not inst.model:
        raise ValueError(f"algorithm {alg} needs a {ALGORITHMS[alg].value} instance")
    if alg == "identical-general":
        r = schedule_identical_wc(inst, seed=seed, trials=trials, cfg=cfg)
        return RunOutcome(r.schedule, r.costs, r.cost, r.lp_value)
    if alg == "identical-unit":
        r = schedule_identical_unit_wc(inst, seed=seed, trials=trials, cfg=cfg)
        return RunOutcome(r.schedule, r.costs, r.cost, r.lp_value)
    if alg == "related-cmax":
        r = schedule_related_cmax(inst, cfg=cfg)
        mk = r.certificate.makespan
        return RunOutcome(r.schedule, [mk], mk, r.certificate.D_lp)
    if alg == "related-wc":
        r = schedule_related_wc(inst, cfg=cfg)
        return RunOutcome(r.schedule, [r.cost], r.cost, r.lp_value)
    fn = schedule_unrelated_wc if alg == "unrelated-dep" else schedule_unrelated_independent
    r = fn(inst, seed=seed, trials=trials, cfg=cfg)
    return RunOutcome(r.schedule, r.costs, r.cost, r.lp_value)


@dataclass(frozen=True)
class ExperimentConfig:
    model: Model
    n: int
    m: int
    instances: int = 1
    trials: int = 1
    seed: int = 0
    alg: Optional[str] = None
    exact: bool = False
    cap: int = DEFAULT_CAP
    generator: GeneratorConfig = None
    record_time: bool = False

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if self.n < 1 or self.m < 1 or self.instances < 0 or self.trials < 1 or self.cap < 1:
            raise ValueError("n, m, trials and cap must be positive and instances nonnegative")
        gen = self.generator or GeneratorConfig(self.model, self.n, self.m)
        object.__setattr__(self, "generator", replace(gen, model=self.model, n=self.n, m=self.m))
        if self.alg is None:
            object.__setattr__(self, "alg", default_algorithm(self.model, gen.size_range == (1, 1)))
        if self.alg not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.alg!r}")
        if ALGORITHMS[self.alg] is not self.model:
            raise ValueError(f"algorithm {self.alg} does not fit model {self.model.value}")


def _dec(v) -> str:
    return "" if v is None else f"{float(v):.12g}"


def _frac(v) -> str:
    if v is None:
        return ""
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


def run_instance(cfg: ExperimentConfig, k: int) -> dict:
    seed = derive_seed(cfg.seed, k)
    row = {c: "" for c in COLUMNS}
    row.update(instance_id=k, n=cfg.n, m=cfg.m, seed=seed)
    t0 = time.perf_counter()
    try:
        inst = generate(cfg.generator, seed)
        out = run_algorithm(inst, cfg.alg, seed, cfg.trials)
        problems = validate_schedule(inst, out.schedule)
        if problems:
            raise RuntimeError("infeasible schedule: " + "; ".join(problems))
        row.update(lp_value=_dec(out.lp_value), alg_cost_mean=_dec(np.mean([float(c) for c in out.costs])),
                   alg_cost_best=_dec(out.best), alg_cost_best_exact=_frac(out.best),
                   ratio_vs_lp=_dec(float(out.best) / out.lp_value) if out.lp_value > 0 else "")
        if cfg.exact:
            kind = "cmax" if cfg.alg == "related-cmax" else "wc"
            opt = exact(inst, kind, cfg.cap).opt_value
            row.update(opt_value=_dec(opt), opt_value_exact=_frac(opt),
                       ratio_vs_opt=_dec(Fraction(out.best) / Fraction(opt)) if opt else "")
    except Exception as exc:     # recorded per row; the run continues
        row["error"] = f"{type(exc).__name__}: {exc}".replace("\n", " ")
    if cfg.record_time:
        row["wall_time"] = f"{time.perf_counter() - t0:.6f}"
    return row


def _worker_count(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    return max(1, workers)


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> list[dict]:
    """Rows in instance order, whatever order the workers finish in."""
    ks = range(cfg.instances)
    workers = _worker_count(workers)
    if workers == 1 or cfg.instances <= 1:
        return [run_instance(cfg, k) for k in ks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_instance, [cfg] * len(ks), ks))


def report_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def read_report(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
