import math

import numpy as np
import pytest

from core.errors import OutOfRange, SpecNotSupported
from core.model import ObjectiveSpec, make_profile
from objectives.evaluate import eval_at_point
from optima.solver import Method, opt_batch, opt_convex_candidates, opt_grid, opt_su_min, optimum


def test_min_utility_closed_form() -> None:
    result = opt_su_min(make_profile([0.2, 0.9]))
    assert result.method == Method.CLOSED_FORM
    assert result.value == pytest.approx(0.35)
    assert result.location == pytest.approx(0.55)


def test_min_utility_matches_grid_oracle() -> None:
    rng = np.random.default_rng(5)
    spec = ObjectiveSpec.su_min()
    for _ in range(200):
        x = make_profile(rng.random(int(rng.integers(1, 6))))
        assert opt_su_min(x).value == pytest.approx(opt_grid(spec, x).value, abs=1e-6)


def test_candidates_for_social_utility() -> None:
    result = opt_convex_candidates(ObjectiveSpec.su(1), make_profile([0.0, 0.501]))
    assert result.method == Method.CANDIDATE_SET
    assert result.value == pytest.approx(1.499)
    assert result.location == 1.0


def test_social_cost_interior_minimum() -> None:
    result = optimum(ObjectiveSpec.sc(2), make_profile([0.0, 1.0]))
    assert result.value == pytest.approx(math.sqrt(0.5), abs=1e-9)
    assert result.location == pytest.approx(0.5, abs=1e-6)


def test_candidates_reject_quasi_norms() -> None:
    with pytest.raises(SpecNotSupported):
        opt_convex_candidates(ObjectiveSpec.su(0.5), make_profile([0.2]))
    with pytest.raises(SpecNotSupported):
        opt_convex_candidates(ObjectiveSpec.su_geomean(), make_profile([0.2]))


def test_ties_go_to_the_smallest_location() -> None:
    result = optimum(ObjectiveSpec.su(1), make_profile([0.5]))
    assert result.location == 0.0
    assert result.value == pytest.approx(0.5)


def test_quasi_norm_uses_grid_oracle() -> None:
    result = optimum(ObjectiveSpec.su(0.5), make_profile([0.5, 0.5]))
    assert result.method == Method.GRID_REFINED
    assert result.value == pytest.approx(2.0)
    assert result.location == 0.0


def test_grid_step_is_validated() -> None:
    with pytest.raises(OutOfRange):
        opt_grid(ObjectiveSpec.su(1), make_profile([0.3]), 0.0)


ALL_SPECS = [
    ObjectiveSpec.su(1),
    ObjectiveSpec.su(3),
    ObjectiveSpec.su(0.5),
    ObjectiveSpec.su_max(),
    ObjectiveSpec.su_min(),
    ObjectiveSpec.su_geomean(),
    ObjectiveSpec.sc(1),
    ObjectiveSpec.sc(2),
    ObjectiveSpec.sc_max(),
]


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_candidate_and_closed_forms_agree_with_grid(spec: ObjectiveSpec) -> None:
    rng = np.random.default_rng(17)
    for n in range(1, 7):
        profiles = np.sort(rng.random((34, n)), axis=1)
        values, locations = opt_batch(spec, profiles)
        for row, value, location in zip(profiles, values, locations):
            x = make_profile(row)
            assert value == pytest.approx(optimum(spec, x).value, abs=1e-8)
            assert value == pytest.approx(opt_grid(spec, x, 1e-4).value, abs=1e-6)
            assert eval_at_point(spec, x, location) == pytest.approx(value, abs=1e-9)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_optimum_is_reflection_invariant(spec: ObjectiveSpec) -> None:
    rng = np.random.default_rng(23)
    for _ in range(100):
        x = make_profile(rng.random(int(rng.integers(1, 7))))
        result = optimum(spec, x)
        mirrored = optimum(spec, x.reflected())
        tolerance = 1e-8 if result.method == Method.GRID_REFINED else 1e-9
        assert mirrored.value == pytest.approx(result.value, abs=tolerance)
