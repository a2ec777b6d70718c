"""Input checks that raise instead of returning violation lists."""
from __future__ import annotations

from typing import Optional

from .instance import Instance, Model, Schedule, validate_instance, validate_schedule


def check_instance(inst, model: Optional[Model] = None) -> Instance:
    if not isinstance(inst, Instance):
        raise TypeError(f"expected an Instance, got {type(inst).__name__}")
    if model is not None and inst.model is not Model(model):
        raise ValueError(f"expected a {Model(model).value} instance, got {inst.model.value}")
    problems = validate_instance(inst)
    if problems:
        raise ValueError("invalid instance: " + "; ".join(problems))
    return inst


def check_schedule(inst: Instance, sched) -> Schedule:
    if not isinstance(sched, Schedule):
        raise TypeError(f"expected a Schedule, got {type(sched).__name__}")
    problems = validate_schedule(inst, sched)
    if problems:
        raise ValueError("infeasible schedule: " + "; ".join(problems))
    return sched
