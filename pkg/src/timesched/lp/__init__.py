"""LP container, solvers and the time-indexed relaxations."""
from .highs import HighsSolver
from .mps import read_mps, write_mps
from .program import (EQ, GE, LE, IterationLimitError, LinearProgram, LPBuilder, LPError, LPSolution, LPStatus,
                      SolverConfig, default_solver, set_default_solver, solve_lp)
from .relaxations import (FracIdentical, FracRelated, FracRelatedWC, FracUnrelated, SolutionRepairError,
                          build_lp_identical, build_lp_related_cmax, build_lp_related_wc, build_lp_unrelated,
                          extract_identical, extract_related, extract_related_wc, extract_unrelated,
                          machine_fractions, mean_starts, related_violations, solve_relaxation)
from .simplex import BoundedSimplex
