from fractions import Fraction

import pytest

from capitalsim.core import (
    DiscreteDistribution,
    DynamicsRow,
    EnvironmentModel,
    Epoch,
    GroundingError,
    History,
    InactiveObservation,
    MissingDynamics,
    UnavailableAction,
    UnknownObservation,
    as_fraction,
    available_actions,
    env_step,
    history_append,
)
from capitalsim.groundings import make_epoch, make_trapdoor
from capitalsim.rng import Purpose, Stream

P = DiscreteDistribution


def test_append_to_empty_history():
    h = history_append(History(0), 0, 1)
    assert len(h) == 1
    assert h.events[0] == (0, 1)
    assert h.last_observation == 1


def test_append_preserves_prefix_and_leaves_original():
    h = History(0).append(0, 1).append(1, 0)
    h3 = history_append(h, 1, 0)
    assert len(h3) == 3
    assert h3.prefix(2) == h
    assert len(h) == 2


def test_append_twice_is_concatenation():
    h = History(2).append(0, 1)
    twice = h.append(1, 0).append(0, 0)
    assert twice == h.concat([(1, 0), (0, 0)])
    assert twice == h.concat(History(1).append(1, 0).append(0, 0))


def test_history_clocks():
    h = History(1, (), 5).append(0, 0).append(0, 1)
    assert h.birth_time == 5
    assert h.t == 7
    assert h.observations() == [1, 0, 1]


def test_as_fraction_is_exact():
    assert as_fraction(0.1) == Fraction(1, 10)
    assert as_fraction("1/3") == Fraction(1, 3)
    assert as_fraction(3) == 3


def test_distribution_rejects_bad_mass():
    with pytest.raises(ValueError):
        P.from_mapping({0: Fraction(1, 2), 1: Fraction(1, 3)})
    with pytest.raises(ValueError):
        P.from_mapping({0: Fraction(3, 2), 1: Fraction(-1, 2)})


def test_mixture_and_product():
    mix = P.mixture([(Fraction(1, 2), P.point(0)), (Fraction(1, 2), P.point(1))])
    assert mix.as_dict() == {0: Fraction(1, 2), 1: Fraction(1, 2)}
    prod = P.product([P.uniform([0, 1]), P.point(7)])
    assert prod.as_dict() == {(0, 7): Fraction(1, 2), (1, 7): Fraction(1, 2)}
    assert prod.marginal(1).as_dict() == {7: 1}


def test_epoch_time_dependent_actions():
    env = make_epoch().env
    for t in range(11):
        acts = available_actions(env, 0, t)
        assert (2 in acts) == (t >= 5)
    assert 2 not in available_actions(env, 0, 3)
    assert 2 in available_actions(env, 0, 7)


def test_trap_offers_only_stay():
    env = make_trapdoor().env
    for t in range(20):
        assert available_actions(env, 2, t) == {0}


def test_available_actions_within_catalog():
    for g in (make_trapdoor(), make_epoch()):
        for o in g.env.observations:
            for t in range(8):
                if g.env.obs_active(o, t):
                    assert available_actions(g.env, o, t) <= set(g.env.actions)


def test_unknown_and_inactive_observation():
    env = make_epoch().env
    with pytest.raises(UnknownObservation):
        env.available_actions(99, 0)
    with pytest.raises(InactiveObservation):
        env.available_actions(2, 4)


def test_point_mass_step_ignores_seed():
    env = make_trapdoor().env
    h = History(0)
    for seed in range(50):
        o, k, n = env_step(env, h, 2, Stream(seed, Purpose.ENV))
        assert (o, k, n) == (2, 5, 1)


def test_fair_row_frequency():
    env = make_trapdoor().env
    h = History(0)
    stream = Stream(123, Purpose.ENV)
    hits = sum(env_step(env, h, 1, stream)[0] == 0 for _ in range(10_000))
    assert 0.48 <= hits / 10_000 <= 0.52


def test_step_is_deterministic_per_seed():
    env = make_trapdoor().env
    h = History(0)
    a = [env_step(env, h, 1, Stream(9, Purpose.ENV, 3, 0))[0] for _ in range(3)]
    b = [env_step(env, h, 1, Stream(9, Purpose.ENV, 3, 0))[0] for _ in range(3)]
    assert a == b


def test_unavailable_action_raises():
    env = make_trapdoor().env
    with pytest.raises(UnavailableAction):
        env_step(env, History(2), 2, Stream(0, Purpose.ENV))


def test_missing_dynamics_signals_bad_grounding():
    env = make_trapdoor().env
    with pytest.raises(MissingDynamics):
        env.row((2, ()), 2, 0)


def test_model_rejects_emission_outside_epoch():
    with pytest.raises(GroundingError, match="outside its epoch"):
        EnvironmentModel(
            {0: Epoch(), 1: Epoch(5, None)},
            {0: Epoch()},
            [DynamicsRow((0, ()), 0, Epoch(), P.point(1))],
        )


def test_model_rejects_overlapping_rows():
    with pytest.raises(GroundingError, match="overlapping"):
        EnvironmentModel(
            {0: Epoch()},
            {0: Epoch()},
            [
                DynamicsRow((0, ()), 0, Epoch(0, 5), P.point(0)),
                DynamicsRow((0, ()), 0, Epoch(3, None), P.point(0)),
            ],
        )


def test_model_rejects_fractional_reward():
    with pytest.raises(GroundingError, match="non-negative integer"):
        EnvironmentModel(
            {0: Epoch()},
            {0: Epoch()},
            [DynamicsRow((0, ()), 0, Epoch(), P.point(0))],
            reward_map={(0, 0): Fraction(1, 2)},
        )
