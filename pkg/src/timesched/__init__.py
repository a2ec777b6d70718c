"""LP-based approximation algorithms for precedence-constrained and unrelated machine scheduling."""
from .instance import (CongestionError, CycleError, GeneratorConfig, Instance, IntervalSet, Job, Model,
                       PrecedenceDag, Schedule, congestion, depth, generate, intervals_to_machines, makespan,
                       objective, validate_instance, validate_schedule)
from .textio import ParseError, read_instance, read_schedule, write_instance, write_schedule

__version__ = "0.1.0"
