import math

import numpy as np
import pytest

from core.errors import InvalidMechanism
from core.model import DistributionKind, FacilityDistribution, ObjectiveSpec, make_profile
from mechanisms.catalog import power_weighted_p0, square_weighted_p0
from mechanisms.registry import (
    MechanismKind,
    MechanismSpec,
    batch_outputs,
    custom_names,
    describe,
    parse_mechanism,
    register_custom,
    run_mechanism,
)


def test_majority_vote_moves_away_from_the_crowd() -> None:
    mv = MechanismSpec.majority_vote()
    assert run_mechanism(mv, make_profile([0.1, 0.2, 0.9])).support == (1.0,)
    assert run_mechanism(mv, make_profile([0.1, 0.8, 0.9])).support == (0.0,)
    # Balanced sides (1/2 counts left) break toward 0.
    assert run_mechanism(mv, make_profile([0.5, 0.7])).support == (0.0,)


def test_uniform_ignores_the_profile() -> None:
    dist = run_mechanism(MechanismSpec.uniform(), make_profile([0.3]))
    assert dist.kind == DistributionKind.UNIFORM_UNIT


def test_square_weighted_probabilities() -> None:
    assert square_weighted_p0(2, 1) == pytest.approx(0.2)
    dist = run_mechanism(MechanismSpec.square_weighted(), make_profile([0.0, 0.1, 0.9]))
    assert dist.prob_of(0.0) == pytest.approx(0.2)
    assert dist.prob_of(1.0) == pytest.approx(0.8)
    one_sided = run_mechanism(MechanismSpec.square_weighted(), make_profile([0.7, 0.9]))
    assert one_sided.support == (0.0,)


def test_power_weighted_probabilities() -> None:
    assert power_weighted_p0(1, 1, 2.0) == pytest.approx(0.5)
    assert power_weighted_p0(2, 1, 1.0) == pytest.approx((0.5 + 2) / (2.5 + 4))
    assert power_weighted_p0(2, 1, math.inf) == pytest.approx(0.5)
    assert power_weighted_p0(2, 1, 1e6) == pytest.approx(0.5)
    assert power_weighted_p0(0, 3, 2.0) == 1.0
    assert power_weighted_p0(3, 0, 2.0) == 0.0


@pytest.mark.parametrize(
    "mech",
    [MechanismSpec.square_weighted(), MechanismSpec.power_weighted(2.0), MechanismSpec.power_weighted(math.inf)],
)
def test_reflection_swaps_endpoint_probabilities(mech: MechanismSpec) -> None:
    rng = np.random.default_rng(11)
    for _ in range(100):
        raw = rng.random(int(rng.integers(1, 6)))
        x = make_profile(raw[raw != 0.5])
        dist = run_mechanism(mech, x)
        mirrored = run_mechanism(mech, x.reflected())
        assert mirrored.prob_of(0.0) == pytest.approx(dist.prob_of(1.0), abs=1e-12)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 8.0, math.inf])
def test_p0_falls_as_agents_move_left(p: float) -> None:
    for n in range(1, 12):
        n1 = np.arange(n + 1)
        for p0 in (square_weighted_p0(n1, n - n1), power_weighted_p0(n1, n - n1, p)):
            assert np.all(np.diff(p0) <= 1e-15)


def test_threshold_counts_ties_toward_second_candidate() -> None:
    mech = MechanismSpec.threshold(0.0, 1.0, 1)
    assert run_mechanism(mech, make_profile([0.5])).support == (1.0,)
    assert run_mechanism(mech, make_profile([0.2])).support == (0.0,)
    with pytest.raises(InvalidMechanism):
        run_mechanism(MechanismSpec.threshold(0.0, 1.0, 4), make_profile([0.2, 0.3]))


def test_majority_vote_mirrors_the_majority_threshold() -> None:
    # The threshold rule picks the crowded endpoint; majority vote places the facility at the other one.
    rng = np.random.default_rng(5)
    for _ in range(300):
        raw = rng.random(int(rng.integers(1, 8)))
        x = make_profile(raw[raw != 0.5])
        (mv,) = run_mechanism(MechanismSpec.majority_vote(), x).support
        (chosen,) = run_mechanism(MechanismSpec.threshold(0.0, 1.0, x.n // 2 + 1), x).support
        assert mv == 1.0 - chosen


@pytest.mark.parametrize(
    "text, name",
    [
        ("majority-vote", "majority-vote"),
        ("uniform", "uniform"),
        ("square-weighted", "square-weighted"),
        ("power-weighted:2", "power-weighted:2"),
        ("power-weighted:inf", "power-weighted:inf"),
        ("threshold:0,1,2", "threshold:0,1,2"),
        ("custom:dictator", "custom:dictator"),
    ],
)
def test_parse_mechanism(text: str, name: str) -> None:
    assert parse_mechanism(text).name == name


@pytest.mark.parametrize(
    "text", ["median", "power-weighted:0", "power-weighted:x", "threshold:0,1", "custom:nobody"]
)
def test_parse_mechanism_rejects(text: str) -> None:
    with pytest.raises(InvalidMechanism):
        parse_mechanism(text)


def test_descriptions() -> None:
    mv = describe(MechanismSpec.majority_vote())
    assert mv.deterministic
    assert mv.candidates == (0.0, 1.0)
    assert mv.claimed_bound(ObjectiveSpec.su(1)) == pytest.approx(3.0)
    uniform = describe(MechanismSpec.uniform())
    assert not uniform.deterministic
    assert uniform.candidates is None
    assert describe(MechanismSpec.custom("dictator")).deterministic


def test_custom_registry() -> None:
    assert {"dictator", "average", "median-left"} <= set(custom_names())
    register_custom("far-end", lambda x: FacilityDistribution.point(1.0 if x.locations[0] < 0.5 else 0.0))
    assert run_mechanism(parse_mechanism("custom:far-end"), make_profile([0.2])).support == (1.0,)
    with pytest.raises(InvalidMechanism):
        register_custom("bad:name", lambda x: FacilityDistribution.point(0.0))


@pytest.mark.parametrize(
    "mech",
    [
        MechanismSpec.majority_vote(),
        MechanismSpec.square_weighted(),
        MechanismSpec.power_weighted(2.0),
        MechanismSpec.power_weighted(math.inf),
        MechanismSpec.threshold(0.2, 0.9, 2),
        MechanismSpec.custom("average"),
    ],
)
def test_batch_outputs_match_scalar_runs(mech: MechanismSpec) -> None:
    rng = np.random.default_rng(8)
    profiles = np.sort(rng.random((50, 3)), axis=1)
    support, weights = batch_outputs(mech, profiles)
    for row, ys, ws in zip(profiles, support, weights):
        dist = run_mechanism(mech, make_profile(row))
        for y, w in zip(ys, ws):
            if w > 0:
                assert dist.prob_of(y) == pytest.approx(w)


def test_uniform_has_no_finite_batch() -> None:
    assert batch_outputs(MechanismSpec.uniform(), np.array([[0.1, 0.2]])) is None
    assert MechanismSpec.uniform().kind == MechanismKind.UNIFORM
