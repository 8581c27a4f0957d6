"""Independent reference computations used to freeze expected values.

Nothing here calls the package's own lookup, enumeration or summation
routines; each oracle walks the raw tables in the simplest possible way.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def _key(env, origin, events):
    last = events[-1][1] if events else origin
    d = env.history_key_depth
    if d == "full":
        trail = tuple(events)
    elif d == 0:
        trail = ()
    else:
        trail = tuple(events[-d:])
    return (last, trail)


def _rows_at(env, key, t):
    """Action -> distribution for the raw rows matching ``key`` at time ``t``."""
    out = {}
    for r in env.rows:
        if r.key == key and r.epoch.contains(t) and env.actions[r.action].contains(t):
            out[r.action] = r.dist
    return out


def brute_force_histories(env, origin, t_max, birth_time=0, weights=None):
    """Every ``(a, o)`` sequence of length ``<= t_max`` over the full catalogs,
    kept iff the product of policy and dynamics probabilities is positive.

    The policy is uniform over available actions, or proportional to
    ``weights`` (uniform fallback when no available action has weight).
    """
    actions = list(env.actions)
    observations = list(env.observations)
    found = set()
    for n in range(t_max + 1):
        for seq in itertools.product(itertools.product(actions, observations), repeat=n):
            p = Fraction(1)
            events = []
            for i, (a, o) in enumerate(seq):
                t = birth_time + i
                rows = _rows_at(env, _key(env, origin, events), t)
                if a not in rows:
                    p = Fraction(0)
                    break
                if weights is None:
                    lam = Fraction(1, len(rows))
                else:
                    total = sum(Fraction(weights.get(x, 0)) for x in rows)
                    lam = Fraction(weights.get(a, 0)) / total if total else Fraction(1, len(rows))
                p *= lam * rows[a].as_dict().get(o, Fraction(0))
                if p == 0:
                    break
                events.append((a, o))
            if p > 0:
                found.add((origin, birth_time, tuple(seq)))
    return found


def as_triples(histories):
    return {(h.origin, h.birth_time, tuple(tuple(e) for e in h.events)) for h in histories}


def resum(entries, members, gamma, tau, horizon, cent):
    """Discounted return by a plain loop over individual ledger entries."""
    gamma = Fraction(gamma)
    total = Fraction(0)
    for t, unit, k in entries:
        if unit in members and tau <= t <= horizon:
            total += Fraction(k) * Fraction(cent) * gamma**t
    return total


def chain_q_star(gamma, reward):
    """Optimal Q for a deterministic 2-state chain by policy enumeration.

    States 0 and 1; action 0 stays, action 1 switches.  ``reward[(s, a)]``
    is the immediate reward.  Each of the four deterministic policies is
    evaluated by a linear solve and the best value vector is kept.
    """
    nxt = {(s, 0): s for s in (0, 1)} | {(s, 1): 1 - s for s in (0, 1)}
    best = None
    for pol in itertools.product((0, 1), repeat=2):
        P = np.zeros((2, 2))
        r = np.zeros(2)
        for s in (0, 1):
            P[s, nxt[(s, pol[s])]] = 1.0
            r[s] = reward.get((s, pol[s]), 0)
        v = np.linalg.solve(np.eye(2) - gamma * P, r)
        if best is None or np.all(v >= best - 1e-12):
            best = v
    return {(s, a): reward.get((s, a), 0) + gamma * best[nxt[(s, a)]] for s in (0, 1) for a in (0, 1)}


def plug_in_entropy(probs):
    """Shannon entropy in bits by direct summation with numpy."""
    p = np.asarray([float(x) for x in probs if x > 0])
    return float(-(p * np.log2(p)).sum())


_M64 = (1 << 64) - 1


def philox4x64_10(counter, key):
    """Reference Philox4x64-10 block function on Python ints."""
    ctr, key = list(counter), list(key)
    for r in range(10):
        if r:
            key = [(key[0] + 0x9E3779B97F4A7C15) & _M64, (key[1] + 0xBB67AE8584CAA73B) & _M64]
        p0 = 0xD2E7470EE14C6C93 * ctr[0]
        p1 = 0xCA5A826395121157 * ctr[2]
        ctr = [(p1 >> 64) ^ ctr[1] ^ key[0], p1 & _M64, (p0 >> 64) ^ ctr[3] ^ key[1], p0 & _M64]
    return ctr


def philox_words(seed, purpose, entity, t, n):
    out, block = [], 1
    while len(out) < n:
        out.extend(philox4x64_10([block, 0, t, purpose], [seed, entity]))
        block += 1
    return out[:n]
