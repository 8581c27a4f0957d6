"""Capital agents acting for whole partitions.

An agent sees the enlarged history of its partition (every member's
observations and actions) and the actions available to each member, and
emits a joint action.  Agents are tagged with the kind of process that
generates their action distribution: quantitative ones may read rewards and
optimise; qualitative ones are opaque rule tables and only ever receive
observations.
"""

from __future__ import annotations

import copy
import csv
import io
import itertools
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .core import CapitalError, DiscreteDistribution, EnvironmentModel, History, as_fraction
from .rng import Stream
from .units import Ledger, discounted_return


class NoAvailableAction(CapitalError):
    pass


class GeneratingProcessKind(str, Enum):
    QUANTITATIVE = "quantitative"
    QUALITATIVE = "qualitative"


@dataclass(frozen=True)
class EnlargedHistory:
    """Histories of a partition's members, in unit-id order."""

    units: tuple
    histories: tuple

    @property
    def observations(self) -> tuple:
        return tuple(h.last_observation for h in self.histories)

    @property
    def t(self) -> int:
        return max((h.t for h in self.histories), default=0)

    def steps(self) -> list[tuple[int, dict]]:
        """Per-time tuples ``{unit: (obs, action)}`` for every member alive then."""
        table: dict[int, dict] = {}
        for uid, h in zip(self.units, self.histories):
            obs = h.observations()
            for i, ev in enumerate(h.events):
                table.setdefault(h.birth_time + i, {})[uid] = (obs[i], ev.action)
        return sorted(table.items())


@dataclass(frozen=True)
class UnitTransition:
    """What a learning agent is told about one member after a step."""

    before: History
    action: int
    reward_k: int
    after: History
    next_actions: frozenset
    alive: bool


def _check_avail(avail: Sequence[Iterable[int]]) -> list[list[int]]:
    out = [sorted(a) for a in avail]
    for i, a in enumerate(out):
        if not a:
            raise NoAvailableAction(f"member {i} has no available action")
    return out


class PartitionAgent:
    """Base class; subclasses provide ``distribution`` and may override ``act``."""

    kind = GeneratingProcessKind.QUANTITATIVE
    independent = False

    def __init__(self, gamma=Fraction(1), partition_id: int = 0):
        self.gamma = as_fraction(gamma)
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        self.partition_id = partition_id

    def distribution(self, h_U: EnlargedHistory, avail) -> DiscreteDistribution:
        raise NotImplementedError

    def act(self, h_U: EnlargedHistory, avail, stream: Stream) -> tuple:
        _check_avail(avail)
        return self.distribution(h_U, avail).sample(stream)

    def learn(self, transitions: Sequence[UnitTransition]) -> None:
        pass

    def spawn_clone(self, partition_id: int) -> PartitionAgent:
        """Agent for a new partition; learning agents share their tables."""
        clone = copy.copy(self)
        clone.partition_id = partition_id
        return clone


class IndependentAgent(PartitionAgent):
    """Members act independently; the joint law is the product of marginals."""

    independent = True

    def unit_distribution(self, h: History, avail: list[int]) -> DiscreteDistribution:
        raise NotImplementedError

    def unit_distributions(self, h_U: EnlargedHistory, avail) -> list[DiscreteDistribution]:
        avail = _check_avail(avail)
        return [self.unit_distribution(h, a) for h, a in zip(h_U.histories, avail)]

    def distribution(self, h_U, avail):
        return DiscreteDistribution.product(self.unit_distributions(h_U, avail))

    def act(self, h_U, avail, stream):
        return tuple(d.sample(stream) for d in self.unit_distributions(h_U, avail))


class RandomAgent(IndependentAgent):
    """Uniform over each member's available actions."""

    def unit_distribution(self, h, avail):
        return DiscreteDistribution.uniform(avail)

    def act(self, h_U, avail, stream):
        avail = _check_avail(avail)
        return tuple(a[stream.below(len(a))] for a in avail)


class CorrelatedAgent(PartitionAgent):
    """All members take the same action, drawn uniformly from the actions
    every member can take.  Falls back to independent uniform choices when
    the members share no action."""

    def distribution(self, h_U, avail):
        avail = _check_avail(avail)
        common = set(avail[0]).intersection(*avail[1:])
        if not common:
            return DiscreteDistribution.product([DiscreteDistribution.uniform(a) for a in avail])
        m = len(avail)
        return DiscreteDistribution.uniform([(a,) * m for a in common])


class RuleTableAgent(IndependentAgent):
    """Qualitative process: a fixed ``observation -> action`` table.

    Only observations reach the table.  An observation with no rule, or a
    rule naming an unavailable action, falls back to the lowest available
    action.
    """

    kind = GeneratingProcessKind.QUALITATIVE

    def __init__(self, rules: Mapping[int, int], partition_id: int = 0):
        super().__init__(Fraction(1), partition_id)
        self._rules = dict(rules)

    def decide(self, observation: int, avail: list[int]) -> int:
        a = self._rules.get(observation)
        return a if a in avail else avail[0]

    def unit_distribution(self, h, avail):
        return DiscreteDistribution.point(self.decide(h.last_observation, avail))

    def act(self, h_U, avail, stream):
        avail = _check_avail(avail)
        return tuple(self.decide(o, a) for o, a in zip(h_U.observations, avail))


_RULE_LINE = re.compile(r"^\s*(\d+)\s*->\s*(\d+)\s*$")


def parse_rule_table(text: str) -> dict[int, int]:
    """Parse ``obs_id -> action_id`` lines; ``#`` starts a comment."""
    rules = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _RULE_LINE.match(line)
        if not m:
            raise ValueError(f"rule table line {n}: expected 'obs -> action', got {raw!r}")
        rules[int(m.group(1))] = int(m.group(2))
    return rules


class GreedyAgent(IndependentAgent):
    """White-box one-step optimiser: each member takes the action with the
    largest immediate reward count, lowest id on ties."""

    def __init__(self, env: EnvironmentModel, gamma=Fraction(0), partition_id: int = 0):
        super().__init__(gamma, partition_id)
        self.env = env

    def unit_distribution(self, h, avail):
        o = h.last_observation
        best = max(avail, key=lambda a: (self.env.reward(o, a), -a))
        return DiscreteDistribution.point(best)


def greedy_onestep(agent: GreedyAgent, env: EnvironmentModel, h_U: EnlargedHistory, avail) -> tuple:
    """Joint action maximising the summed expected reward of the members.

    Rewards are additive over members and depend only on each member's own
    observation and action, so the joint argmax is the per-member argmax;
    lowest-index ties make it the lexicographically first maximiser.
    """
    avail = _check_avail(avail)
    obs = h_U.observations
    return tuple(max(a, key=lambda x, o=o: (env.reward(o, x), -x)) for o, a in zip(obs, avail))


class QAgent(IndependentAgent):
    """Tabular Q-learning with constant epsilon-greedy exploration.

    Members share one table.  Unvisited entries start at ``q_init``; a
    positive value makes the greedy choice try unvisited actions before
    ones that have paid nothing.  Each member's key is the truncation of
    its own history to the last ``depth`` events (its birth observation
    followed by its events while it has fewer than that); ``depth=0`` keys
    on the current observation.
    """

    def __init__(
        self,
        gamma=Fraction(9, 10),
        alpha: float = 0.1,
        epsilon=Fraction(1, 10),
        depth: int = 1,
        cent=Fraction(1),
        partition_id: int = 0,
        q_init: float = 0.0,
    ):
        super().__init__(gamma, partition_id)
        if not 0 < alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        self.alpha = float(alpha)
        self.epsilon = as_fraction(epsilon)
        if not 0 <= self.epsilon <= 1:
            raise ValueError("epsilon must lie in [0, 1]")
        self.depth = depth
        self.cent = as_fraction(cent)
        self.q_init = float(q_init)
        self.q: dict[tuple, dict[int, float]] = {}
        self.frozen = False

    def key(self, h: History) -> tuple:
        if self.depth == 0:
            return (h.last_observation,)
        if len(h.events) < self.depth:
            return (h.origin,) + tuple(tuple(e) for e in h.events)
        return tuple(tuple(e) for e in h.events[-self.depth :])

    def value(self, key, a) -> float:
        return self.q.get(key, {}).get(a, self.q_init)

    def best(self, key, avail: Iterable[int]) -> int:
        return max(sorted(avail), key=lambda a: (self.value(key, a), -a))

    def unit_distribution(self, h, avail):
        best = self.best(self.key(h), avail)
        explore = self.epsilon / len(avail)
        return DiscreteDistribution.from_mapping(
            {a: explore + (1 - self.epsilon if a == best else 0) for a in avail}
        )

    def act(self, h_U, avail, stream):
        avail = _check_avail(avail)
        num, den = self.epsilon.numerator, self.epsilon.denominator
        out = []
        for h, a in zip(h_U.histories, avail):
            if stream.below(den) < num:
                out.append(a[stream.below(len(a))])
            else:
                out.append(self.best(self.key(h), a))
        return tuple(out)

    def learn(self, transitions):
        if self.frozen:
            return
        for tr in transitions:
            nxt = tr.next_actions if tr.alive else ()
            q_update(self, (self.key(tr.before), tr.action, tr.reward_k, self.key(tr.after)), nxt)

    def spawn_clone(self, partition_id):
        clone = super().spawn_clone(partition_id)
        clone.q = self.q
        return clone

    def greedy(self) -> QAgent:
        """Evaluation view sharing the table with exploration switched off."""
        clone = QAgent(
            self.gamma, self.alpha, Fraction(0), self.depth, self.cent, self.partition_id, self.q_init
        )
        clone.q = self.q
        clone.frozen = True
        return clone

    def export_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "action", "value"])
        for key in sorted(self.q, key=repr):
            for a in sorted(self.q[key]):
                w.writerow([format_key(key), a, repr(self.q[key][a])])
        return buf.getvalue()


def format_key(key: tuple) -> str:
    parts = []
    for x in key:
        parts.append(f"{x[0]}.{x[1]}" if isinstance(x, tuple) else str(x))
    return " ".join(parts)


def q_update(agent: QAgent, transition, next_actions: Iterable[int] | None = None) -> QAgent:
    """``Q(s,a) += alpha * (k*cent + gamma * max_a' Q(s',a') - Q(s,a))``.

    ``next_actions`` restricts the max; when omitted it runs over the
    actions already recorded for ``s'``.  An empty set (terminal) gives 0.
    """
    key, action, k_total, key2 = transition
    if next_actions is None:
        nxt = agent.q.get(key2, {}).values()
    else:
        nxt = [agent.value(key2, a) for a in next_actions]
    future = max(nxt, default=0.0)
    row = agent.q.setdefault(key, {})
    old = row.get(action, agent.q_init)
    target = float(k_total * agent.cent) + float(agent.gamma) * future
    row[action] = old + agent.alpha * (target - old)
    return agent


def episode_return(
    agent: PartitionAgent, ledger: Ledger, tau: int = 0, horizon: int | None = None, cent=Fraction(1)
):
    """Discounted return of the agent's partition from ``tau``, with its own gamma."""
    members = {e.unit for e in ledger if e.partition == agent.partition_id}
    if horizon is None and agent.gamma == 1:
        horizon = max((e.t for e in ledger), default=tau)
    return discounted_return(ledger.rewards(), members, agent.gamma, tau, horizon, cent)


def joint_actions(avail) -> list[tuple]:
    """All joint actions in lexicographic order."""
    return list(itertools.product(*[sorted(a) for a in avail]))


AGENT_KINDS = ("random", "correlated", "greedy", "q", "rules")


def make_agent(
    name: str,
    env: EnvironmentModel,
    gamma=None,
    alpha=0.1,
    epsilon=Fraction(1, 10),
    depth=1,
    rules: Mapping[int, int] | None = None,
    cent=Fraction(1),
    q_init: float = 0.0,
) -> PartitionAgent:
    if name == "random":
        return RandomAgent(gamma if gamma is not None else Fraction(1))
    if name == "correlated":
        return CorrelatedAgent(gamma if gamma is not None else Fraction(1))
    if name == "greedy":
        return GreedyAgent(env, gamma if gamma is not None else Fraction(0))
    if name == "q":
        return QAgent(
            gamma if gamma is not None else Fraction(9, 10), alpha, epsilon, depth, cent, q_init=q_init
        )
    if name == "rules":
        if rules is None:
            raise ValueError("rules agent needs a rule table")
        return RuleTableAgent(rules)
    raise ValueError(f"unknown agent kind {name!r}; expected one of {', '.join(AGENT_KINDS)}")
