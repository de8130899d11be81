import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.errors import SpecNotSupported
from core.model import FacilityDistribution, ObjectiveSpec, make_profile
from objectives.evaluate import (
    Convention,
    aggregate,
    default_convention,
    eval_at_point,
    eval_at_points,
    eval_batch,
    eval_expected_power,
    eval_objective,
    eval_uniform_batch,
)

UNIFORM = FacilityDistribution.uniform_unit()


def test_eval_at_point() -> None:
    x = make_profile([0.0, 0.501])
    assert eval_at_point(ObjectiveSpec.su(1), x, 1.0) == pytest.approx(1.499)
    assert eval_at_point(ObjectiveSpec.su(1), x, 0.0) == pytest.approx(0.501)
    assert eval_at_point(ObjectiveSpec.su_max(), x, 0.0) == pytest.approx(0.501)
    assert eval_at_point(ObjectiveSpec.su_min(), x, 0.0) == 0.0
    assert eval_at_point(ObjectiveSpec.sc(1), x, 1.0) == pytest.approx(0.501)
    assert eval_at_point(ObjectiveSpec.sc_max(), x, 1.0) == pytest.approx(0.501)


def test_aggregate_extremes() -> None:
    assert aggregate(ObjectiveSpec.su_geomean(), np.array([0.0, 0.8])) == 0.0
    assert aggregate(ObjectiveSpec.su_geomean(), np.array([0.25, 1.0])) == pytest.approx(0.5)
    # Large exponents approach the max without overflow.
    assert aggregate(ObjectiveSpec.su(1e6), np.array([0.4, 0.9])) == pytest.approx(0.9, rel=1e-5)


def test_large_exponent_stays_near_max_utility() -> None:
    rng = np.random.default_rng(64)
    for _ in range(200):
        x = make_profile(rng.random(int(rng.integers(1, 6))))
        y = float(rng.random())
        near = eval_at_point(ObjectiveSpec.su(64), x, y)
        assert abs(near - eval_at_point(ObjectiveSpec.su_max(), x, y)) <= 0.05


def test_eval_at_points_matches_scalar() -> None:
    x = make_profile([0.1, 0.4, 0.8])
    spec = ObjectiveSpec.sc(2)
    ys = np.linspace(0.0, 1.0, 11)
    expected = [eval_at_point(spec, x, y) for y in ys]
    assert eval_at_points(spec, x, ys) == pytest.approx(expected)


def test_default_conventions() -> None:
    assert default_convention(ObjectiveSpec.su(2)) == Convention.EXPECTED_POWER
    assert default_convention(ObjectiveSpec.sc(1)) == Convention.EXPECTED_POWER
    assert default_convention(ObjectiveSpec.su_geomean()) == Convention.AGGREGATE_OF_EXPECTATIONS
    assert default_convention(ObjectiveSpec.su_max()) == Convention.EXPECTED_AGGREGATE
    assert default_convention(ObjectiveSpec.sc_max()) == Convention.EXPECTED_AGGREGATE


def test_expected_power_on_fair_endpoints() -> None:
    mixture = FacilityDistribution.discrete([(0.0, 0.5), (1.0, 0.5)])
    x = make_profile([0.5, 1.0])
    value = eval_expected_power(ObjectiveSpec.su(2), x, mixture)
    assert value.value == pytest.approx(math.sqrt(0.75))
    with pytest.raises(SpecNotSupported):
        eval_expected_power(ObjectiveSpec.su_max(), x, mixture)


def test_conventions_coincide_at_p_one() -> None:
    dist = FacilityDistribution.discrete([(0.0, 0.3), (0.6, 0.2), (1.0, 0.5)])
    x = make_profile([0.1, 0.45, 0.7])
    for spec in (ObjectiveSpec.su(1), ObjectiveSpec.sc(1)):
        values = [eval_objective(spec, x, dist, conv).value for conv in Convention]
        assert values == pytest.approx([values[0]] * 3)


def test_uniform_geomean_closed_form() -> None:
    x = make_profile([0.75, 0.75])
    value = eval_objective(ObjectiveSpec.su_geomean(), x, UNIFORM)
    assert value.convention == Convention.AGGREGATE_OF_EXPECTATIONS
    assert value.value == pytest.approx(0.3125)


def test_uniform_su_max_by_quadrature() -> None:
    x = make_profile([0.2, 0.9])
    assert eval_objective(ObjectiveSpec.su_max(), x, UNIFORM).value == pytest.approx(0.6025, abs=1e-9)


@pytest.mark.parametrize(
    "spec, convention",
    [
        (ObjectiveSpec.su(1), None),
        (ObjectiveSpec.su(2), None),
        (ObjectiveSpec.sc(1), None),
        (ObjectiveSpec.sc(3), None),
        (ObjectiveSpec.su_max(), None),
        (ObjectiveSpec.su_min(), None),
        (ObjectiveSpec.sc_max(), None),
        (ObjectiveSpec.su_geomean(), None),
        (ObjectiveSpec.su(2), Convention.AGGREGATE_OF_EXPECTATIONS),
        (ObjectiveSpec.sc_max(), Convention.AGGREGATE_OF_EXPECTATIONS),
    ],
)
def test_uniform_closed_forms_match_quadrature(spec: ObjectiveSpec, convention) -> None:
    rng = np.random.default_rng(11)
    profiles = np.sort(rng.random((5, 3)), axis=1)
    closed = eval_uniform_batch(spec, profiles, convention)
    assert closed is not None
    for row, value in zip(profiles, closed):
        x = make_profile(row)
        assert value == pytest.approx(eval_objective(spec, x, UNIFORM, convention).value, abs=1e-8)


def test_uniform_closed_form_missing_for_geomean_expected_aggregate() -> None:
    profiles = np.array([[0.2, 0.6]])
    assert eval_uniform_batch(ObjectiveSpec.su_geomean(), profiles, Convention.EXPECTED_AGGREGATE) is None


def test_uniform_social_cost_power() -> None:
    x = make_profile([0.0, 1.0])
    assert eval_objective(ObjectiveSpec.sc(2), x, UNIFORM).value == pytest.approx(math.sqrt(2 / 3), abs=1e-9)


def test_monte_carlo_agrees_with_exact_expectation() -> None:
    rng = np.random.default_rng(2024)
    x = make_profile([0.2, 0.9])
    spec = ObjectiveSpec.su_max()
    samples = eval_at_points(spec, x, UNIFORM.sample(rng, 200_000))
    exact = eval_objective(spec, x, UNIFORM).value
    stderr = samples.std() / math.sqrt(samples.size)
    assert abs(samples.mean() - exact) <= 4 * stderr


def test_stratified_monte_carlo_matches_quadrature() -> None:
    rng = np.random.default_rng(99)
    specs = [
        ObjectiveSpec.su(1),
        ObjectiveSpec.su(2),
        ObjectiveSpec.su_max(),
        ObjectiveSpec.su_min(),
        ObjectiveSpec.sc_max(),
    ]
    draws = 20_000
    for i in range(20):
        spec = specs[i % len(specs)]
        x = make_profile(rng.random(int(rng.integers(1, 6))))
        # One uniform draw per stratum of [0, 1].
        ys = (np.arange(draws) + rng.random(draws)) / draws
        samples = eval_at_points(spec, x, ys)
        exact = eval_objective(spec, x, UNIFORM, Convention.EXPECTED_AGGREGATE).value
        stderr = samples.std() / math.sqrt(draws)
        assert abs(samples.mean() - exact) <= 3 * stderr + 1e-9


def test_social_utility_falls_as_p_grows() -> None:
    rng = np.random.default_rng(31)
    ps = [0.3, 0.5, 1.0, 1.5, 2.0, 3.0, 8.0, 32.0]
    for _ in range(200):
        x = make_profile(rng.random(int(rng.integers(2, 7))))
        y = float(rng.random())
        values = [eval_at_point(ObjectiveSpec.su(p), x, y) for p in ps]
        for lower_p, higher_p in zip(values, values[1:]):
            assert higher_p <= lower_p + 1e-10 * max(1.0, lower_p)


profiles_st = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=4)
support_st = st.lists(
    st.tuples(st.floats(0.0, 1.0), st.floats(0.05, 1.0)), min_size=1, max_size=4
)


@given(profiles_st, support_st)
@settings(max_examples=60, deadline=None)
def test_batch_matches_scalar(raw_profile, raw_support) -> None:
    x = make_profile(raw_profile)
    total = sum(weight for _, weight in raw_support)
    support = np.array([[y for y, _ in raw_support]])
    weights = np.array([[weight / total for _, weight in raw_support]])
    dist = FacilityDistribution.discrete(zip(support[0], weights[0]))
    for spec in (ObjectiveSpec.su(2), ObjectiveSpec.sc(1), ObjectiveSpec.su_max(), ObjectiveSpec.su_min()):
        batched = eval_batch(spec, x.as_array()[None, :], support, weights)[0]
        assert batched == pytest.approx(eval_objective(spec, x, dist).value, rel=1e-9, abs=1e-12)
