from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from timesched import GeneratorConfig, Instance, Model, generate, validate_schedule
from timesched.exact import exact_related
from timesched.lp import FracRelated, solve_relaxation
from timesched.lp.relaxations import related_violations
from timesched.related import (GroupAssignment, assign_groups, band, default_gamma, make_groups,
                               machine_list_schedule, preprocess, schedule_related_cmax, schedule_related_wc)


def test_preprocess_discards_slow_machine():
    inst = Instance.related([1, 1], [50, 50], [1, 100])
    frac = FracRelated(np.array([[0.5, 0.0], [0.5, 1.0]]), np.array([25.5, 0.5]), 25.5, 25.5)
    pre = preprocess(inst, frac, tol=1e10)
    assert pre.retained == (1,)
    assert np.allclose(pre.x, [[1.0, 1.0]])
    assert pre.D == 51.0


def test_preprocess_equal_speeds_kept_and_scaled():
    inst = generate(GeneratorConfig(Model.RELATED, 4, 3, speed_range=(3, 3)), 0)
    frac = solve_relaxation(inst)
    pre = preprocess(inst, frac)
    assert pre.retained == (0, 1, 2)
    assert pre.scaled == (1, 1, 1)


@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_preprocess_postconditions(n, m, seed):
    inst = generate(GeneratorConfig(Model.RELATED, n, m, speed_range=(1, 40), density=0.3), seed)
    frac = solve_relaxation(inst)
    pre = preprocess(inst, frac, 1e-6 * max(1, frac.D))
    assert all(1 <= s < max(m, 2) for s in pre.scaled)
    dropped = [inst.speeds[i] for i in range(m) if i not in pre.retained]
    assert sum(dropped, Fraction(0)) <= max(inst.speeds)
    assert related_violations(pre.inst, pre.x, pre.C, pre.D, 1e-6 * max(1, frac.D)) == []


def test_gamma_guard():
    assert default_gamma(1) == default_gamma(2) == 2.0
    assert default_gamma(10**6) > 2.0


def test_band_arithmetic():
    assert band(30, 4.0) == 3
    assert [band(s, 2.0) for s in (1, 5, 30)] == [1, 3, 5]


def test_make_groups_examples():
    g = make_groups((1, 5, 30), 3, gamma=2.0)
    assert g.K == 5
    assert g.members == ((0,), (), (1,), (), (2,))
    flat = make_groups((1, 1, 1), 3)
    assert flat.K == 1 and flat.members == ((0, 1, 2),)


def test_assign_groups_examples():
    # bands with gamma 2: {1}, {2, 2, 3} (total 7), {5} (total 5)
    g = make_groups((1, 2, 2, 3, 5), 5, 2.0)
    assert [g.total_speed(k) for k in (1, 2, 3)] == [1, 7, 5]
    a = assign_groups(np.array([[0.3], [0.1], [0.1], [0.1], [0.4]]), g)
    assert a.ell == (2,)
    assert a.k == (2,)
    top = assign_groups(np.array([[0.0], [0.0], [0.0], [0.0], [1.0]]), g)
    assert top.ell == top.k == (3,)
    with pytest.raises(ValueError):
        assign_groups(np.zeros((5, 1)), g)


def test_assign_groups_boundary_half():
    g = make_groups((1, 2), 2, 2.0)
    assert assign_groups(np.array([[0.5], [0.5]]), g).ell == (2,)


def test_machine_list_schedule_examples():
    one = Instance.related([1], [2], [2])
    g = make_groups((1,), 1)
    assert machine_list_schedule(one, GroupAssignment((1,), (1,)), g).makespan == 1
    chain = Instance.related([1, 1], [1, 1], [1], [(0, 1)])
    assert machine_list_schedule(chain, GroupAssignment((1, 1), (1, 1)), g).makespan == 2
    three = Instance.related([1, 1, 1], [1, 1, 1], [1, 1])
    g2 = make_groups((1, 1), 2)
    assert machine_list_schedule(three, GroupAssignment((1,) * 3, (1,) * 3), g2).makespan == 2


def test_empty_group_assignment_rejected():
    g = make_groups((1, 5), 2, 2.0)
    with pytest.raises(ValueError):
        machine_list_schedule(Instance.related([1], [1], [1, 5]), GroupAssignment((2,), (2,)), g)


def test_single_machine_makespan_is_total_size():
    inst = generate(GeneratorConfig(Model.RELATED, 5, 1, size_range=(1, 4), density=0.4), 2)
    r = schedule_related_cmax(inst)
    assert r.certificate.makespan == Fraction(sum(inst.sizes)) / inst.speeds[0]


@given(st.integers(1, 7), st.integers(1, 8), st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_cmax_pipeline_properties(n, m, seed):
    inst = generate(GeneratorConfig(Model.RELATED, n, m, speed_range=(1, 20), density=0.3), seed)
    r = schedule_related_cmax(inst)
    cert = r.certificate
    assert validate_schedule(inst, r.schedule) == []
    assert float(cert.makespan) <= cert.bound
    assert float(cert.makespan) >= cert.D_lp - 1e-6
    assert all(ell <= k <= r.groups.K for ell, k in zip(r.assignment.ell, r.assignment.k))


def test_no_unforced_idleness():
    for seed in range(10):
        inst = generate(GeneratorConfig(Model.RELATED, 7, 4, speed_range=(1, 6), density=0.3), seed)
        frac = solve_relaxation(inst)
        pre = preprocess(inst, frac, 1e-6 * max(1, frac.D))
        groups = make_groups(pre.scaled, inst.m)
        assign = assign_groups(pre.x, groups)
        trace = []
        machine_list_schedule(pre.inst, assign, groups, trace)
        group_of = groups.group_of()
        for entry in trace:
            for i in entry.idle:
                assert not [j for j in entry.waiting if assign.k[j] == group_of[i]]


def test_rerun_is_identical():
    inst = generate(GeneratorConfig(Model.RELATED, 6, 3, density=0.3), 8)
    a, b = schedule_related_cmax(inst), schedule_related_cmax(inst)
    assert a.schedule == b.schedule and a.certificate.to_text() == b.certificate.to_text()
    assert "bound=" in a.certificate.to_text()


def test_wc_single_job_matches_cmax():
    inst = Instance.related([3], [4], [1, 2])
    wc = schedule_related_wc(inst)
    assert wc.schedule.end == schedule_related_cmax(inst).schedule.end
    assert wc.cost == 3 * 2


def test_wc_feasible_and_bounded_below_by_opt():
    for seed in range(8):
        inst = generate(GeneratorConfig(Model.RELATED, 5, 1, weight_range=(1, 1), density=0.3), seed)
        r = schedule_related_wc(inst)
        assert validate_schedule(inst, r.schedule) == []
        opt = exact_related(inst, "wc").opt_value
        assert opt <= r.cost
        assert r.lp_value <= float(opt) + 1e-6


def test_rejects_other_models():
    with pytest.raises(ValueError):
        schedule_related_cmax(Instance.identical([1], [1], 1))
    with pytest.raises(ValueError):
        schedule_related_wc(Instance.identical([1], [1], 1))
