"""Unit tests for the battery queue: single steps, trajectories, regimes."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehnet.battery import (
    BatteryState,
    Regime,
    classify_regime,
    deposit,
    extract,
    extract_many,
    trajectory,
)


# ---------------------------------------------------------------------------
# single-step semantics


def test_extract_grants_min_of_level_and_request():
    s = BatteryState(level=3.0)
    got, s2 = extract(s, 5.0)
    assert got == 3.0
    assert s2.level == 0.0

    got, s2 = extract(BatteryState(level=3.0), 2.0)
    assert got == 2.0
    assert s2.level == 1.0


def test_extract_exact_level_leaves_zero():
    got, s2 = extract(BatteryState(level=2.5), 2.5)
    assert got == 2.5
    assert s2.level == 0.0


def test_deposit_clips_at_capacity():
    s = BatteryState(level=4.0, capacity=5.0)
    s2 = deposit(s, 3.0)
    assert s2.level == 5.0
    # overflow is discarded, not banked
    s3 = deposit(s2, 100.0)
    assert s3.level == 5.0


def test_deposit_unbounded_capacity_never_clips():
    s = deposit(BatteryState(level=1e300), 1e300)
    assert s.level == 2e300


def test_extract_many_is_sequential_first_come_first_served():
    s = BatteryState(level=5.0)
    grants, s2 = extract_many(s, [3.0, 3.0, 3.0])
    assert grants == [3.0, 2.0, 0.0]
    assert s2.level == 0.0


def test_extract_many_order_matters():
    grants, _ = extract_many(BatteryState(level=4.0), [1.0, 5.0])
    assert grants == [1.0, 3.0]
    grants, _ = extract_many(BatteryState(level=4.0), [5.0, 1.0])
    assert grants == [4.0, 0.0]


def test_negative_requests_rejected():
    with pytest.raises(ValueError):
        extract(BatteryState(level=1.0), -0.5)
    with pytest.raises(ValueError):
        deposit(BatteryState(level=1.0), -0.5)


def test_state_validation():
    with pytest.raises(ValueError):
        BatteryState(level=-1.0)
    with pytest.raises(ValueError):
        BatteryState(level=2.0, capacity=1.0)
    with pytest.raises(ValueError):
        BatteryState(level=0.0, capacity=-3.0)


# ---------------------------------------------------------------------------
# trajectory: worked examples checked by hand


def test_trajectory_worked_example_unbounded():
    # slot order is extract first, then deposit the slot's arrival
    desired = np.array([1.0, 1.0, 1.0, 1.0])
    harvested = np.array([0.5, 2.0, 0.0, 1.0])
    actual, levels = trajectory(desired, harvested)
    # slot 1: empty -> grant 0.0, then +0.5
    # slot 2: grant 0.5, level 0, then +2.0
    # slot 3: grant 1.0, level 1.0, then +0.0
    # slot 4: grant 1.0, level 0.0, then +1.0
    assert actual.tolist() == [0.0, 0.5, 1.0, 1.0]
    assert levels.tolist() == [0.5, 2.0, 1.0, 1.0]


def test_trajectory_worked_example_capacity_clip():
    desired = np.zeros(3)
    harvested = np.array([4.0, 4.0, 4.0])
    actual, levels = trajectory(desired, harvested, capacity=5.0)
    assert actual.tolist() == [0.0, 0.0, 0.0]
    assert levels.tolist() == [4.0, 5.0, 5.0]


def test_trajectory_initial_level_is_spent_first():
    desired = np.array([2.0, 2.0])
    harvested = np.zeros(2)
    actual, levels = trajectory(desired, harvested, initial=3.0)
    assert actual.tolist() == [2.0, 1.0]
    assert levels.tolist() == [1.0, 0.0]


def test_trajectory_multilink_shares_one_buffer():
    desired = np.array([[2.0, 2.0], [2.0, 2.0]])
    harvested = np.array([3.0, 0.0])
    actual, levels = trajectory(desired, harvested, initial=3.0)
    # slot 1: grants 2.0 then 1.0, deposit 3.0 -> level 3.0
    # slot 2: grants 2.0 then 1.0, deposit 0.0 -> level 0.0
    assert actual.tolist() == [[2.0, 1.0], [2.0, 1.0]]
    assert levels.tolist() == [3.0, 0.0]


def test_trajectory_empty_run():
    actual, levels = trajectory(np.zeros(0), np.zeros(0))
    assert actual.shape == (0,)
    assert levels.shape == (0,)


def test_trajectory_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        trajectory(np.zeros(3), np.zeros(4))


# ---------------------------------------------------------------------------
# trajectory: randomized properties

finite_power = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)


@st.composite
def random_run(draw):
    n = draw(st.integers(min_value=1, max_value=60))
    desired = np.array(draw(st.lists(finite_power, min_size=n, max_size=n)))
    harvested = np.array(draw(st.lists(finite_power, min_size=n, max_size=n)))
    capacity = draw(st.one_of(st.just(math.inf),
                              st.floats(min_value=0.5, max_value=1e7)))
    initial = draw(st.floats(min_value=0.0, max_value=0.5))
    return desired, harvested, capacity, initial


@given(random_run())
@settings(max_examples=200, deadline=None)
def test_grants_never_exceed_requests(run):
    desired, harvested, capacity, initial = run
    actual, _ = trajectory(desired, harvested, capacity=capacity, initial=initial)
    assert np.all(actual <= desired + 1e-12)
    assert np.all(actual >= 0.0)


@given(random_run())
@settings(max_examples=200, deadline=None)
def test_levels_stay_inside_battery(run):
    desired, harvested, capacity, initial = run
    _, levels = trajectory(desired, harvested, capacity=capacity, initial=initial)
    assert np.all(levels >= -1e-12)
    assert np.all(levels <= capacity * (1 + 1e-12) if math.isfinite(capacity)
                  else np.isfinite(levels))


@given(random_run())
@settings(max_examples=200, deadline=None)
def test_energy_conservation_unbounded(run):
    # with no capacity clip, nothing is ever lost:
    # initial + sum(in) = sum(out) + final level
    desired, harvested, _, initial = run
    actual, levels = trajectory(desired, harvested, initial=initial)
    lhs = initial + math.fsum(harvested.tolist())
    rhs = math.fsum(actual.tolist()) + float(levels[-1])
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


@given(random_run())
@settings(max_examples=100, deadline=None)
def test_trajectory_matches_stepwise_primitives(run):
    desired, harvested, capacity, initial = run
    actual, levels = trajectory(desired, harvested, capacity=capacity, initial=initial)
    state = BatteryState(level=initial, capacity=capacity)
    for i in range(len(desired)):
        got, state = extract(state, float(desired[i]))
        state = deposit(state, float(harvested[i]))
        assert got == actual[i]
        assert state.level == levels[i]


@given(random_run())
@settings(max_examples=100, deadline=None)
def test_bounded_battery_never_outperforms_unbounded(run):
    desired, harvested, capacity, initial = run
    bounded, _ = trajectory(desired, harvested, capacity=capacity, initial=initial)
    unbounded, _ = trajectory(desired, harvested, initial=initial)
    assert math.fsum(bounded.tolist()) <= math.fsum(unbounded.tolist()) + 1e-9


# ---------------------------------------------------------------------------
# regime classification


def test_regime_boundary_counts_as_non_absorbing():
    assert classify_regime(2.0, 2.0) is Regime.NON_ABSORBING
    assert classify_regime(2.0, 2.5) is Regime.NON_ABSORBING
    assert classify_regime(2.0, 1.9) is Regime.ABSORBING
    assert classify_regime(2.0, math.inf) is Regime.NON_ABSORBING


def test_regime_requires_positive_finite_intake():
    with pytest.raises(ValueError):
        classify_regime(0.0, 1.0)
    with pytest.raises(ValueError):
        classify_regime(math.inf, 1.0)
