"""Exact enumeration of realizable histories and suffixes.

A history is realizable for a policy and environment when the product of
policy and transition probabilities along it is strictly positive.  All
probabilities are rationals, so the test is an exact ``> 0``.
"""

from __future__ import annotations

from fractions import Fraction

from .core import BudgetExceeded, EnvironmentModel, History, Policy, UnrealizablePrefix

DEFAULT_NODE_CAP = 10**6


def history_probability(policy: Policy, env: EnvironmentModel, h: History) -> Fraction:
    """Probability of producing ``h``'s events from its origin."""
    p = Fraction(1)
    cur = History(h.origin, (), h.birth_time)
    for a, o in h.events:
        lam = policy(cur).prob(a)
        if lam == 0:
            return Fraction(0)
        p *= lam * env.prob(cur, a, o)
        if p == 0:
            return p
        cur = cur.append(a, o)
    return p


def _expand(policy: Policy, env: EnvironmentModel, root: History, t_max: int, cap: int) -> list[History]:
    out = [root]
    frontier = [root]
    for _ in range(t_max):
        nxt = []
        for h in frontier:
            for a, lam in policy(h).items():
                if lam <= 0:
                    continue
                for o, q in env.transition(h, a).items():
                    if q > 0:
                        nxt.append(h.append(a, o))
            if len(out) + len(nxt) > cap:
                raise BudgetExceeded(f"realizable-history frontier exceeds cap of {cap} nodes")
        out.extend(nxt)
        frontier = nxt
        if not frontier:
            break
    return out


def enumerate_realizable_histories(
    policy: Policy,
    env: EnvironmentModel,
    t_max: int,
    origin: int = 0,
    birth_time: int = 0,
    cap: int = DEFAULT_NODE_CAP,
) -> set[History]:
    """All realizable histories of length at most ``t_max``, breadth first."""
    if t_max < 0:
        raise ValueError("t_max must be non-negative")
    env.available_actions(origin, birth_time)
    return set(_expand(policy, env, History(origin, (), birth_time), t_max, cap))


def realizable_suffixes(
    policy: Policy,
    env: EnvironmentModel,
    h: History,
    t_max: int,
    cap: int = DEFAULT_NODE_CAP,
) -> set[History]:
    """Suffixes ``h'`` with ``len(h') <= t_max`` such that ``hh'`` is realizable.

    Suffixes are returned as histories anchored at ``h``'s last observation
    and current time, so an empty ``h`` gives back the full enumeration.
    """
    if history_probability(policy, env, h) == 0:
        raise UnrealizablePrefix(f"prefix of length {len(h)} has probability zero")
    n = len(h)
    anchor_origin = h.last_observation
    return {History(anchor_origin, full.events[n:], h.t) for full in _expand(policy, env, h, t_max, cap)}


def counts_by_length(histories) -> dict[int, int]:
    out: dict[int, int] = {}
    for h in histories:
        out[len(h)] = out.get(len(h), 0) + 1
    return dict(sorted(out.items()))
