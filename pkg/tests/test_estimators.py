import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from timesched import GeneratorConfig, Instance, Model, generate, validate_schedule
from timesched.estimators import IdenticalPrecedenceScheduler, RelatedPrecedenceScheduler, UnrelatedScheduler


def test_identical_fit_predict():
    inst = generate(GeneratorConfig(Model.IDENTICAL, 5, 2, density=0.3), 1)
    est = IdenticalPrecedenceScheduler(trials=5, seed=2).fit(inst)
    assert est.lp_value_ > 0
    sched = est.predict(inst)
    assert validate_schedule(inst, sched) == []
    assert len(est.costs_) == 5
    assert est.score(inst) <= -1 + 1e-6


def test_unit_variant_auto():
    inst = generate(GeneratorConfig(Model.IDENTICAL, 5, 2, size_range=(1, 1)), 0)
    assert validate_schedule(inst, IdenticalPrecedenceScheduler().fit_predict(inst)) == []
    with pytest.raises(ValueError):
        IdenticalPrecedenceScheduler(variant="unit").fit_predict(Instance.identical([1], [2], 1))


def test_related_objectives():
    inst = generate(GeneratorConfig(Model.RELATED, 5, 3, density=0.3), 2)
    est = RelatedPrecedenceScheduler(objective="cmax").fit(inst)
    est.predict(inst)
    assert float(est.certificate_.makespan) <= est.certificate_.bound
    wc = RelatedPrecedenceScheduler().fit(inst)
    assert validate_schedule(inst, wc.predict(inst)) == []
    with pytest.raises(ValueError):
        RelatedPrecedenceScheduler(objective="other").fit(inst)


def test_unrelated_and_params():
    inst = generate(GeneratorConfig(Model.UNRELATED, 5, 2), 3)
    est = UnrelatedScheduler(rounding="independent", trials=3)
    assert clone(est).get_params()["rounding"] == "independent"
    with pytest.raises(NotFittedError):
        est.predict(inst)
    est.fit(inst)
    est.predict(inst)
    assert len(est.trial_log_) == 3


def test_wrong_inputs():
    inst = generate(GeneratorConfig(Model.UNRELATED, 3, 2), 0)
    with pytest.raises(ValueError):
        IdenticalPrecedenceScheduler().fit(inst)
    with pytest.raises(TypeError):
        UnrelatedScheduler().fit([[1, 2]])
    est = UnrelatedScheduler().fit(inst)
    with pytest.raises(ValueError):
        est.predict(generate(GeneratorConfig(Model.UNRELATED, 4, 2), 0))
