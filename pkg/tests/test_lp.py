import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timesched import GeneratorConfig, Instance, Model, generate
from timesched.exact import exact_identical, exact_unrelated
from timesched.lp import (EQ, GE, LE, BoundedSimplex, HighsSolver, LPBuilder, LPError, LPStatus, SolutionRepairError,
                          SolverConfig, build_lp_identical, build_lp_related_cmax, build_lp_related_wc,
                          build_lp_unrelated, extract_identical, extract_unrelated, read_mps, solve_lp,
                          solve_relaxation, write_mps)
from timesched.lp.relaxations import frac_unrelated_from_x, related_violations

from .conftest import unrelated_point


def _lp(rows, cost, upper=None):
    b = LPBuilder()
    for k, c in enumerate(cost):
        b.add_var(k, c, upper=np.inf if upper is None else upper[k])
    for coefs, sense, rhs in rows:
        b.add_row(coefs, sense, rhs)
    return b.build()


SMALL_LPS = [
    (_lp([({0: 1}, GE, 3)], [1]), 3.0),
    (_lp([({0: 1, 1: 1}, EQ, 2)], [1, 1]), 2.0),
    (_lp([({0: 1, 1: 2}, GE, 4), ({0: 3, 1: 1}, GE, 6)], [1, 1]), 2.8),
    (_lp([({0: 1, 1: 1}, LE, 4)], [-1, -2], upper=[3, 3]), -7.0),
]


@pytest.mark.parametrize("solver", [BoundedSimplex(), HighsSolver()], ids=["simplex", "highs"])
@pytest.mark.parametrize("lp, value", SMALL_LPS)
def test_small_lps(solver, lp, value):
    sol = solve_lp(lp, solver=solver)
    assert sol.status is LPStatus.OPTIMAL
    assert sol.value == pytest.approx(value, abs=1e-9)
    assert lp.max_violation(sol.x) <= 1e-7


@pytest.mark.parametrize("solver", [BoundedSimplex(), HighsSolver()], ids=["simplex", "highs"])
def test_unbounded_and_infeasible(solver):
    assert solve_lp(_lp([({0: 1}, GE, 0)], [-1]), solver=solver).status is LPStatus.UNBOUNDED
    assert solve_lp(_lp([({0: 1}, LE, -1)], [1]), solver=solver).status is LPStatus.INFEASIBLE


def test_builder_rejects_bad_input():
    b = LPBuilder()
    with pytest.raises(ValueError):
        b.add_var("x", lower=-np.inf)
    b.add_var("x")
    with pytest.raises(ValueError, match="out of range"):
        b.add_row({3: 1.0}, LE, 1)
    with pytest.raises(ValueError):
        b.add_row({0: np.nan}, LE, 1)
    with pytest.raises(ValueError):
        SolverConfig(feas_tol=0)


def _relax_value(inst, **kw):
    return solve_relaxation(inst, **kw).lp_value


def test_identical_examples():
    assert _relax_value(Instance.identical([1], [1], 1, T=1)) == pytest.approx(1)
    chain = Instance.identical([1, 1], [1, 1], 2, [(0, 1)], T=2)
    assert _relax_value(chain) == pytest.approx(3)
    assert exact_identical(chain).opt_value == 3
    pair = Instance.identical([1, 1], [1, 1], 1, T=2)
    assert _relax_value(pair) == pytest.approx(3)


def test_identical_chain_forces_successor_late():
    frac = solve_relaxation(Instance.identical([1, 1], [1, 1], 2, [(0, 1)], T=2))
    assert frac.x[1, 1] == pytest.approx(0, abs=1e-9)
    assert frac.C[1] == pytest.approx(2)


def test_identical_builder_rejects():
    with pytest.raises(ValueError):
        build_lp_identical(Instance.related([1], [1], [1]))
    with pytest.raises(ValueError):
        build_lp_identical(Instance.identical([1], [3], 1, T=2))


def test_related_examples():
    assert solve_relaxation(Instance.related([1], [2], [1, 2])).D == pytest.approx(1)
    assert solve_relaxation(Instance.related([1, 1], [1, 1], [1], [(0, 1)])).D == pytest.approx(2)
    assert solve_relaxation(Instance.related([1, 2, 3], [2, 3, 4], [1])).D == pytest.approx(9)
    with pytest.raises(ValueError):
        build_lp_related_cmax(Instance.identical([1], [1], 1))
    with pytest.raises(ValueError):
        build_lp_related_wc(Instance.identical([1], [1], 1))


def test_related_solution_satisfies_all_families():
    inst = generate(GeneratorConfig(Model.RELATED, 6, 3, density=0.4), 5)
    frac = solve_relaxation(inst)
    assert related_violations(inst, frac.x, frac.C, frac.D, 1e-6) == []


def test_unrelated_examples():
    assert _relax_value(Instance.unrelated([1], [[2]], T=2)) == pytest.approx(2)
    frac = solve_relaxation(Instance.unrelated([1], [[4], [2]], T=4))
    assert frac.lp_value == pytest.approx(2)
    assert frac.x[1, 0, 0] == pytest.approx(1)
    assert _relax_value(Instance.unrelated([1, 1], [[1, 1]], T=2)) == pytest.approx(3)
    with pytest.raises(ValueError):
        build_lp_unrelated(Instance.identical([1], [1], 1))


def test_unrelated_variables_respect_horizon():
    inst = Instance.unrelated([1, 1], [[2, None], [1, 3]], T=4)
    lp = build_lp_unrelated(inst)
    for _, i, j, s in lp.var_keys:
        assert inst.pmatrix[i][j] is not None
        assert s + inst.pmatrix[i][j] <= inst.T


def test_unrelated_lp_below_brute_force():
    for seed in range(5):
        inst = generate(GeneratorConfig(Model.UNRELATED, 4, 2, size_range=(1, 4)), seed)
        assert _relax_value(inst) <= exact_unrelated(inst).opt_value + 1e-6


def test_extract_integral_point_unchanged():
    inst = Instance.identical([1, 2], [1, 2], 1, T=3)
    lp = build_lp_identical(inst)
    point = np.array([1.0 if k in (("x", 0, 1), ("x", 1, 3)) else 0.0 for k in lp.var_keys])
    frac = extract_identical(inst, point, lp)
    assert list(frac.C) == [1, 3]
    assert frac.lp_value == 7


def test_extract_clamps_tiny_negative():
    inst = Instance.identical([1], [1], 1, T=2)
    lp = build_lp_identical(inst)
    point = np.array([1.0 + 1e-9, -1e-9])
    frac = extract_identical(inst, point, lp)
    assert frac.x.min() >= 0
    assert frac.x.sum() == pytest.approx(1, abs=1e-15)


def test_extract_rejects_far_point():
    inst = Instance.identical([1], [1], 1, T=2)
    lp = build_lp_identical(inst)
    with pytest.raises(SolutionRepairError, match="solution too infeasible"):
        extract_identical(inst, np.array([1.1, -0.1]), lp)
    with pytest.raises(SolutionRepairError, match="solution too infeasible"):
        extract_identical(inst, np.array([0.6, 0.6]), lp)


def test_extract_identical_checks_precedence_gap():
    inst = Instance.identical([1, 1], [1, 1], 2, [(0, 1)], T=2)
    lp = build_lp_identical(inst)
    point = np.array([1.0 if k in (("x", 0, 1), ("x", 1, 1)) else 0.0 for k in lp.var_keys])
    with pytest.raises(LPError, match="precedence gap"):
        extract_identical(inst, point, lp)


def test_unrelated_average_start():
    inst = Instance.unrelated([1], [[1], [1]], T=6)
    x = np.zeros((2, 1, 6))
    x[0, 0, 0] = x[0, 0, 5] = 0.2
    x[1, 0, 0] = 0.6
    frac = frac_unrelated_from_x(inst, x)
    assert frac.y[0, 0] == pytest.approx(0.4)
    assert frac.phi[0, 0] == pytest.approx(2.5)
    lp, point = unrelated_point(inst, x)
    assert extract_unrelated(inst, point, lp).phi[0, 0] == pytest.approx(2.5)


def test_mps_round_trip():
    inst = generate(GeneratorConfig(Model.IDENTICAL, 4, 2, density=0.5), 2)
    lp = build_lp_identical(inst)
    text = write_mps(lp)
    back = read_mps(text)
    assert write_mps(back) == text
    assert solve_lp(back).value == pytest.approx(solve_lp(lp).value, abs=1e-9)


def test_build_is_deterministic():
    inst = generate(GeneratorConfig(Model.UNRELATED, 5, 2), 9)
    a, b = build_lp_unrelated(inst), build_lp_unrelated(inst)
    assert a.var_keys == b.var_keys and a.row_names == b.row_names
    assert (a.A != b.A).nnz == 0
    assert np.array_equal(solve_lp(a).x, solve_lp(b).x)


@given(st.sampled_from(list(Model)), st.integers(1, 5), st.integers(1, 3), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_simplex_matches_highs(model, n, m, seed):
    inst = generate(GeneratorConfig(model, n, m, density=0.4, size_range=(1, 3)), seed)
    build = {Model.IDENTICAL: build_lp_identical, Model.RELATED: build_lp_related_cmax,
             Model.UNRELATED: build_lp_unrelated}[model]
    lp = build(inst)
    ours, ref = solve_lp(lp, solver=BoundedSimplex()), solve_lp(lp, solver=HighsSolver())
    assert ours.status is ref.status is LPStatus.OPTIMAL
    assert ours.value == pytest.approx(ref.value, rel=1e-7, abs=1e-7)
