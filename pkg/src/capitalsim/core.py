"""Agent-environment interface: distributions, histories and tabular dynamics.

Observations and actions are integer ids into a grounding's catalogs.  A
history is the sequence of ``(action, observation)`` events a unit has
produced since birth; the environment maps a history and an action to an
exact distribution over next observations.

Time is global simulation time.  A history born at ``birth_time`` whose
events have length ``n`` sits at time ``birth_time + n``; its action at that
step is taken at that time and the resulting observation is emitted at the
next one.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import accumulate
from typing import NamedTuple, Protocol

from .rng import Stream

FULL = "full"


class CapitalError(Exception):
    """Base class for model errors."""


class GroundingError(CapitalError):
    """A grounding is malformed."""


class MissingDynamics(GroundingError):
    pass


class UnknownObservation(CapitalError):
    pass


class InactiveObservation(CapitalError):
    pass


class UnavailableAction(CapitalError):
    pass


class BudgetExceeded(CapitalError):
    pass


class UnrealizablePrefix(CapitalError):
    pass


# -- distributions ---------------------------------------------------------


def as_fraction(value) -> Fraction:
    """Parse ``1/3``, ``0.25``, ints and Fractions exactly (floats go via repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite distribution with exact rational probabilities.

    The support is kept sorted, so two distributions with the same mass
    function compare equal.  Outcomes may be ints or tuples of ints.
    """

    support: tuple
    probs: tuple

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support ids must be unique")
        probs = tuple(as_fraction(p) for p in self.probs)
        if any(p < 0 for p in probs):
            raise ValueError("negative probability")
        if sum(probs) != 1:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")
        order = sorted(range(len(probs)), key=lambda i: self.support[i])
        object.__setattr__(self, "support", tuple(self.support[i] for i in order))
        object.__setattr__(self, "probs", tuple(probs[i] for i in order))

    @classmethod
    def point(cls, outcome) -> DiscreteDistribution:
        return cls((outcome,), (Fraction(1),))

    @classmethod
    def uniform(cls, outcomes: Iterable) -> DiscreteDistribution:
        outcomes = sorted(set(outcomes))
        if not outcomes:
            raise ValueError("uniform over an empty set")
        p = Fraction(1, len(outcomes))
        return cls(tuple(outcomes), (p,) * len(outcomes))

    @classmethod
    def from_mapping(cls, mass: Mapping) -> DiscreteDistribution:
        """Build from ``{outcome: prob}``, dropping zero-mass outcomes."""
        items = [(k, as_fraction(v)) for k, v in mass.items() if v != 0]
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @classmethod
    def mixture(cls, weighted: Iterable[tuple[Fraction, DiscreteDistribution]]) -> DiscreteDistribution:
        mass: dict = {}
        for w, dist in weighted:
            for x, p in dist.items():
                mass[x] = mass.get(x, 0) + w * p
        return cls.from_mapping(mass)

    @classmethod
    def product(cls, dists: Sequence[DiscreteDistribution]) -> DiscreteDistribution:
        """Joint law of independent components, over tuples."""
        mass = {(): Fraction(1)}
        for dist in dists:
            mass = {k + (x,): p * q for k, p in mass.items() for x, q in dist.items()}
        return cls.from_mapping(mass)

    def items(self):
        return zip(self.support, self.probs)

    def as_dict(self) -> dict:
        return dict(self.items())

    def prob(self, outcome) -> Fraction:
        return self.as_dict().get(outcome, Fraction(0))

    def __len__(self):
        return len(self.support)

    def positive_support(self) -> tuple:
        return tuple(x for x, p in self.items() if p > 0)

    def marginal(self, index: int) -> DiscreteDistribution:
        mass: dict = {}
        for x, p in self.items():
            mass[x[index]] = mass.get(x[index], 0) + p
        return DiscreteDistribution.from_mapping(mass)

    def pushforward(self, fn: Callable) -> DiscreteDistribution:
        mass: dict = {}
        for x, p in self.items():
            y = fn(x)
            mass[y] = mass.get(y, 0) + p
        return DiscreteDistribution.from_mapping(mass)

    @cached_property
    def _table(self) -> tuple[int, list[int]]:
        denom = math.lcm(*(p.denominator for p in self.probs))
        cum = list(accumulate(p.numerator * (denom // p.denominator) for p in self.probs))
        return denom, cum

    def sample(self, stream: Stream):
        """Exact inverse-CDF draw on the integer cumulative table."""
        denom, cum = self._table
        if len(cum) == 1:
            return self.support[0]
        return self.support[bisect_right(cum, stream.below(denom))]

    def float_probs(self) -> list[float]:
        return [float(p) for p in self.probs]


# -- histories -------------------------------------------------------------


class HistoryEvent(NamedTuple):
    action: int
    observation: int


@dataclass(frozen=True)
class History:
    """Immutable event sequence anchored at a birth observation."""

    origin: int
    events: tuple = ()
    birth_time: int = 0

    def __len__(self):
        return len(self.events)

    @property
    def t(self) -> int:
        """Global time of the current observation."""
        return self.birth_time + len(self.events)

    @property
    def last_observation(self) -> int:
        return self.events[-1].observation if self.events else self.origin

    def append(self, action: int, observation: int) -> History:
        return History(self.origin, self.events + (HistoryEvent(action, observation),), self.birth_time)

    def concat(self, suffix: History | Iterable) -> History:
        extra = suffix.events if isinstance(suffix, History) else tuple(HistoryEvent(*e) for e in suffix)
        return History(self.origin, self.events + tuple(extra), self.birth_time)

    def prefix(self, n: int) -> History:
        return History(self.origin, self.events[:n], self.birth_time)

    def observations(self) -> list[int]:
        return [self.origin] + [e.observation for e in self.events]

    def to_list(self) -> list[list[int]]:
        return [[e.action, e.observation] for e in self.events]


# -- environment -----------------------------------------------------------


@dataclass(frozen=True)
class Epoch:
    """Closed activation window; ``end=None`` means open-ended."""

    start: int = 0
    end: int | None = None

    def contains(self, t: int) -> bool:
        return self.start <= t and (self.end is None or t <= self.end)

    def overlaps(self, other: Epoch) -> bool:
        lo = max(self.start, other.start)
        hi_a = math.inf if self.end is None else self.end
        hi_b = math.inf if other.end is None else other.end
        return lo <= min(hi_a, hi_b)

    def __str__(self):
        return f"{self.start}:{'inf' if self.end is None else self.end}"


ALWAYS = Epoch()

ContextKey = tuple  # (current observation, trailing events)


@dataclass(frozen=True)
class DynamicsRow:
    key: ContextKey
    action: int
    epoch: Epoch
    dist: DiscreteDistribution


class EnvironmentModel:
    """Tabular stochastic environment with time-indexed catalogs.

    ``dynamics`` rows are addressed by ``(context key, action)`` and carry
    their own epoch, interpreted at the time the action is taken.  The
    context key is the current observation plus the trailing
    ``history_key_depth`` events (all events for ``"full"``).

    ``joint_dynamics`` optionally couples units: it maps ``(joint
    observation, joint action)`` tuples over the alive population to a
    distribution over joint next observations.  Units not covered by a
    joint row are stepped independently.

    Instances are treated as immutable once built.
    """

    def __init__(
        self,
        observations: Mapping[int, Epoch],
        actions: Mapping[int, Epoch],
        dynamics: Iterable[DynamicsRow],
        reward_map: Mapping[tuple[int, int], int] | None = None,
        spawn_map: Mapping[tuple[int, int], int] | None = None,
        history_key_depth: int | str = 0,
        absorbing: Iterable[int] = (),
        joint_dynamics: Mapping[tuple[tuple, tuple], DiscreteDistribution] | None = None,
        obs_labels: Mapping[int, str] | None = None,
        action_labels: Mapping[int, str] | None = None,
    ):
        if history_key_depth != FULL and (not isinstance(history_key_depth, int) or history_key_depth < 0):
            raise GroundingError(f"bad history_key_depth {history_key_depth!r}")
        self.observations = dict(sorted(observations.items()))
        self.actions = dict(sorted(actions.items()))
        self.rows: tuple[DynamicsRow, ...] = tuple(dynamics)
        self.reward_map = dict(reward_map or {})
        self.spawn_map = dict(spawn_map or {})
        self.history_key_depth = history_key_depth
        self.absorbing = frozenset(absorbing)
        self.joint_dynamics = dict(joint_dynamics or {})
        self.obs_labels = dict(obs_labels or {})
        self.action_labels = dict(action_labels or {})

        self._table: dict[tuple[ContextKey, int], list[DynamicsRow]] = {}
        self._by_obs: dict[int, list[DynamicsRow]] = {}
        for row in self.rows:
            self._table.setdefault((row.key, row.action), []).append(row)
            self._by_obs.setdefault(row.key[0], []).append(row)
        self._avail_cache: dict[tuple[int, int], frozenset] = {}
        problems = self.problems()
        if problems:
            raise GroundingError("; ".join(problems))

    # structure ------------------------------------------------------------

    @property
    def is_markov(self) -> bool:
        return self.history_key_depth == 0

    def problems(self) -> list[str]:
        """Static well-formedness checks; empty when the model is valid."""
        out = []
        for (key, a), rows in self._table.items():
            for i, r in enumerate(rows):
                for other in rows[i + 1 :]:
                    if r.epoch.overlaps(other.epoch):
                        out.append(f"overlapping dynamics rows for {key}/{a}")
        for row in self.rows:
            o = row.key[0]
            if o not in self.observations:
                out.append(f"dynamics key uses unknown observation {o}")
            if row.action not in self.actions:
                out.append(f"dynamics row uses unknown action {row.action}")
            for e in row.key[1]:
                if e[0] not in self.actions or e[1] not in self.observations:
                    out.append(f"dynamics key {row.key} uses unknown ids")
            for o2 in row.dist.positive_support():
                if o2 not in self.observations:
                    out.append(f"dynamics row {row.key}/{row.action} emits unknown observation {o2}")
                    continue
                emit = self.observations[o2]
                # emission happens one step after the row's action time
                lo = row.epoch.start + 1
                hi = None if row.epoch.end is None else row.epoch.end + 1
                if emit.start > lo or (emit.end is not None and (hi is None or hi > emit.end)):
                    out.append(
                        f"dynamics row {row.key}/{row.action}@{row.epoch} "
                        f"can emit {o2} outside its epoch {emit}"
                    )
        for table, name in ((self.reward_map, "reward"), (self.spawn_map, "spawn")):
            for (o, a), v in table.items():
                if isinstance(v, bool) or not isinstance(v, int) or v < 0:
                    out.append(f"{name} for ({o},{a}) must be a non-negative integer, got {v!r}")
                if o not in self.observations or a not in self.actions:
                    out.append(f"{name} entry ({o},{a}) uses unknown ids")
        for (obs, acts), dist in self.joint_dynamics.items():
            if len(obs) != len(acts):
                out.append(f"joint dynamics key {obs}/{acts} has mismatched arity")
            for x in dist.positive_support():
                if not isinstance(x, tuple) or len(x) != len(obs):
                    out.append(f"joint dynamics {obs}/{acts} emits {x!r} of wrong arity")
        return out

    def context_key(self, h: History) -> ContextKey:
        d = self.history_key_depth
        if d == FULL:
            trail = h.events
        elif d == 0:
            trail = ()
        else:
            trail = h.events[-d:]
        return (h.last_observation, tuple(tuple(e) for e in trail))

    def obs_active(self, o: int, t: int) -> bool:
        return o in self.observations and self.observations[o].contains(t)

    def active_observations(self, t: int) -> list[int]:
        return [o for o, ep in self.observations.items() if ep.contains(t)]

    def action_active(self, a: int, t: int) -> bool:
        return a in self.actions and self.actions[a].contains(t)

    def epoch_boundaries(self) -> list[int]:
        """Times at which any catalog or dynamics epoch opens or closes."""
        pts = {0}
        for ep in (
            list(self.observations.values()) + list(self.actions.values()) + [r.epoch for r in self.rows]
        ):
            pts.add(ep.start)
            if ep.end is not None:
                pts.add(ep.end + 1)
        return sorted(pts)

    # queries --------------------------------------------------------------

    def available_actions(self, o: int, t: int) -> frozenset:
        """Actions with a dynamics row for an ``o``-context whose epochs hold at ``t``."""
        if o not in self.observations:
            raise UnknownObservation(o)
        if not self.observations[o].contains(t):
            raise InactiveObservation(f"observation {o} is not active at t={t}")
        cached = self._avail_cache.get((o, t))
        if cached is None:
            cached = frozenset(
                r.action
                for r in self._by_obs.get(o, ())
                if r.epoch.contains(t) and self.actions[r.action].contains(t)
            )
            self._avail_cache[(o, t)] = cached
        return cached

    def history_actions(self, h: History) -> frozenset:
        """Actions usable after exactly this history (its own context key)."""
        t = h.t
        if self.is_markov:
            return self.available_actions(h.last_observation, t)
        self.available_actions(h.last_observation, t)
        key = self.context_key(h)
        return frozenset(
            a
            for (k, a), rows in self._table.items()
            if k == key and self.actions[a].contains(t) and any(r.epoch.contains(t) for r in rows)
        )

    def row(self, key: ContextKey, a: int, t: int) -> DiscreteDistribution:
        for r in self._table.get((key, a), ()):
            if r.epoch.contains(t):
                return r.dist
        raise MissingDynamics(f"no dynamics for context {key}, action {a} at t={t}")

    def transition(self, h: History, a: int) -> DiscreteDistribution:
        return self.row(self.context_key(h), a, h.t)

    def prob(self, h: History, a: int, o: int) -> Fraction:
        """``e(o | h, a)``; zero for actions that are not available."""
        if a not in self.history_actions(h):
            return Fraction(0)
        return self.transition(h, a).prob(o)

    def reward(self, o: int, a: int) -> int:
        return self.reward_map.get((o, a), 0)

    def spawn(self, o: int, a: int) -> int:
        return self.spawn_map.get((o, a), 0)

    def joint_row(self, obs: tuple, acts: tuple) -> DiscreteDistribution | None:
        return self.joint_dynamics.get((tuple(obs), tuple(acts)))

    def step(self, h: History, a: int, stream: Stream) -> tuple[int, int, int]:
        o = h.last_observation
        if a not in self.history_actions(h):
            raise UnavailableAction(f"action {a} unavailable at observation {o}, t={h.t}")
        o2 = self.transition(h, a).sample(stream)
        return o2, self.reward(o, a), self.spawn(o, a)

    def label_obs(self, o: int) -> str:
        return self.obs_labels.get(o, f"o{o}")

    def label_action(self, a: int) -> str:
        return self.action_labels.get(a, f"a{a}")


def history_append(h: History, a: int, o: int) -> History:
    return h.append(a, o)


def available_actions(env: EnvironmentModel, o: int, t: int) -> frozenset:
    return env.available_actions(o, t)


def env_step(env: EnvironmentModel, h: History, a: int, rng: Stream) -> tuple[int, int, int]:
    """Sample ``(next observation, reward in cent counts, units spawned)``."""
    return env.step(h, a, rng)


# -- single-unit policies --------------------------------------------------


class Policy(Protocol):
    """Maps a history to a distribution over the actions available after it."""

    def __call__(self, h: History) -> DiscreteDistribution: ...


@dataclass
class UniformPolicy:
    env: EnvironmentModel

    def __call__(self, h: History) -> DiscreteDistribution:
        return DiscreteDistribution.uniform(self.env.history_actions(h))


@dataclass
class WeightedPolicy:
    """Fixed action weights renormalised over whatever is available.

    Actions missing from ``weights`` get weight zero; if nothing available
    has positive weight the policy falls back to uniform.
    """

    env: EnvironmentModel
    weights: Mapping[int, Fraction] = field(default_factory=dict)

    def __call__(self, h: History) -> DiscreteDistribution:
        avail = sorted(self.env.history_actions(h))
        w = {a: as_fraction(self.weights.get(a, 0)) for a in avail}
        total = sum(w.values())
        if total == 0:
            return DiscreteDistribution.uniform(avail)
        return DiscreteDistribution.from_mapping({a: v / total for a, v in w.items()})


@dataclass
class FunctionPolicy:
    fn: Callable[[History], DiscreteDistribution]

    def __call__(self, h: History) -> DiscreteDistribution:
        return self.fn(h)
