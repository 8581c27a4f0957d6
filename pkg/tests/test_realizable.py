from fractions import Fraction

import pytest

from capitalsim.core import BudgetExceeded, History, UniformPolicy, UnrealizablePrefix, WeightedPolicy
from capitalsim.groundings import make_epoch, make_memory, make_static, make_trapdoor
from capitalsim.realizable import (
    counts_by_length,
    enumerate_realizable_histories,
    history_probability,
    realizable_suffixes,
)
from oracles import as_triples, brute_force_histories


def test_full_support_two_by_two_depth_two():
    env = make_static().env
    hs = enumerate_realizable_histories(UniformPolicy(env), env, 2)
    # frozen from brute_force_histories(make_static().env, 0, 2)
    assert len(hs) == 21
    assert counts_by_length(hs) == {0: 1, 1: 4, 2: 16}
    assert as_triples(hs) == brute_force_histories(env, 0, 2)


def test_depth_zero_is_empty_history():
    env = make_static().env
    assert enumerate_realizable_histories(UniformPolicy(env), env, 0) == {History(0)}


def test_zero_weight_action_never_appears():
    env = make_static().env
    hs = enumerate_realizable_histories(WeightedPolicy(env, {0: 1}), env, 3)
    assert all(e.action == 0 for h in hs for e in h.events)
    assert len(hs) == 1 + 2 + 4 + 8


def test_empty_prefix_suffixes_equal_enumeration():
    env = make_trapdoor().env
    pol = UniformPolicy(env)
    assert realizable_suffixes(pol, env, History(0), 3) == enumerate_realizable_histories(pol, env, 3)


def test_suffixes_from_trap_stay_in_trap():
    env = make_trapdoor().env
    pol = UniformPolicy(env)
    h = History(0).append(1, 1).append(2, 2)
    sufs = realizable_suffixes(pol, env, h, 5)
    assert sufs
    assert all(o == 2 for s in sufs for o in s.observations())
    assert History(2, (), h.t) in sufs


def test_unrealizable_prefix_rejected():
    env = make_trapdoor().env
    with pytest.raises(UnrealizablePrefix):
        realizable_suffixes(UniformPolicy(env), env, History(0).append(0, 1), 2)


def test_prefix_closure():
    env = make_epoch().env
    hs = enumerate_realizable_histories(UniformPolicy(env), env, 6)
    for h in hs:
        for n in range(len(h)):
            assert h.prefix(n) in hs


def test_epoch_new_observation_only_after_five():
    env = make_epoch().env
    pol = UniformPolicy(env)
    shallow = enumerate_realizable_histories(pol, env, 4)
    assert all(2 not in h.observations() for h in shallow)
    deep = enumerate_realizable_histories(pol, env, 6)
    assert any(2 in h.observations() for h in deep)


def test_history_keyed_enumeration_matches_brute_force():
    env = make_memory().env
    hs = enumerate_realizable_histories(UniformPolicy(env), env, 4)
    assert as_triples(hs) == brute_force_histories(env, 0, 4)


def test_probability_of_histories():
    env = make_trapdoor().env
    pol = UniformPolicy(env)
    h = History(0).append(1, 1)
    # 1/3 for MOVE among three actions, 1/2 for landing on the gate
    assert history_probability(pol, env, h) == Fraction(1, 6)
    assert history_probability(pol, env, h.append(2, 0)) == 0


def test_node_cap():
    env = make_static().env
    with pytest.raises(BudgetExceeded):
        enumerate_realizable_histories(UniformPolicy(env), env, 10, cap=1000)
