"""Entropy of next-observation distributions, per unit and jointly.

For one unit with history ``h`` the next observation follows the mixture
``q(o) = sum_a policy(a|h) * e(o|h, a)``.  For a partition, the joint law
over the members' next observations is the mixture over joint actions of
either a declared coupled row or the product of per-unit rows.  Entropies
are in bits with ``0 log 0 = 0``; probabilities stay rational until the
final logarithm.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .agents import EnlargedHistory, IndependentAgent, PartitionAgent
from .core import CapitalError, DiscreteDistribution, EnvironmentModel, History, Policy
from .realizable import history_probability
from .rng import Purpose, numpy_generator

DEFAULT_ENUMERATION_CAP = 10**6
DEFAULT_BOOTSTRAP = 1000


class EnumerationCapExceeded(CapitalError):
    pass


class UnrealizableHistory(CapitalError):
    pass


def entropy_bits(dist: DiscreteDistribution | Sequence) -> float:
    """Shannon entropy in bits of exact probabilities."""
    probs = dist.probs if isinstance(dist, DiscreteDistribution) else dist
    terms = []
    for p in probs:
        p = Fraction(p)
        if p == 0:
            continue
        terms.append(-float(p) * (math.log2(p.numerator) - math.log2(p.denominator)))
    return math.fsum(terms) + 0.0


def unit_entropy(q: DiscreteDistribution) -> float:
    return entropy_bits(q)


def next_obs_distribution(
    policy: Policy, env: EnvironmentModel, h: History, check: bool = True
) -> DiscreteDistribution:
    """Exact ``q`` for a single unit following ``policy``."""
    if check and history_probability(policy, env, h) == 0:
        raise UnrealizableHistory(f"history of length {len(h)} is not realizable under this policy")
    lam = policy(h)
    return DiscreteDistribution.mixture((p, env.transition(h, a)) for a, p in lam.items() if p > 0)


def _avail(env: EnvironmentModel, h_U: EnlargedHistory, avail):
    return (
        [sorted(a) for a in avail]
        if avail is not None
        else [sorted(env.history_actions(h)) for h in h_U.histories]
    )


def enumeration_size(env: EnvironmentModel, h_U: EnlargedHistory, avail=None) -> int:
    """Upper bound on the terms of the exact joint enumeration."""
    avail = _avail(env, h_U, avail)
    n_actions = math.prod(len(a) for a in avail)
    if env.joint_dynamics and len(h_U.histories) > 1:
        n_obs = len(env.observations) ** len(h_U.histories)
    else:
        n_obs = 1
        for h, acts in zip(h_U.histories, avail):
            outs = set()
            for a in acts:
                outs.update(env.transition(h, a).positive_support())
            n_obs *= len(outs)
    return n_actions * n_obs


def joint_next_obs_distribution(
    agent: PartitionAgent,
    env: EnvironmentModel,
    h_U: EnlargedHistory,
    avail=None,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> DiscreteDistribution:
    avail = _avail(env, h_U, avail)
    size = enumeration_size(env, h_U, avail)
    if size > cap:
        raise EnumerationCapExceeded(f"joint enumeration needs {size} terms, cap is {cap}")
    lam = agent.distribution(h_U, avail)
    obs = h_U.observations
    parts = []
    for ja, p in lam.items():
        row = env.joint_row(obs, ja) if env.joint_dynamics else None
        if row is None:
            row = DiscreteDistribution.product([env.transition(h, a) for h, a in zip(h_U.histories, ja)])
        parts.append((p, row))
    return DiscreteDistribution.mixture(parts)


def unit_next_obs_distributions(
    agent: PartitionAgent,
    env: EnvironmentModel,
    h_U: EnlargedHistory,
    avail=None,
    joint: DiscreteDistribution | None = None,
) -> list[DiscreteDistribution]:
    """Per-member ``q``.  Uses the member's marginal policy unless the
    dynamics are coupled, in which case the joint law is marginalised."""
    avail = _avail(env, h_U, avail)
    if env.joint_dynamics and len(h_U.histories) > 1:
        if joint is None:
            joint = joint_next_obs_distribution(agent, env, h_U, avail)
        return [joint.marginal(i) for i in range(len(h_U.histories))]
    if isinstance(agent, IndependentAgent):
        marginals = agent.unit_distributions(h_U, avail)
    else:
        lam = agent.distribution(h_U, avail)
        marginals = [lam.marginal(i) for i in range(len(h_U.histories))]
    return [
        DiscreteDistribution.mixture((p, env.transition(h, a)) for a, p in lam_i.items() if p > 0)
        for h, lam_i in zip(h_U.histories, marginals)
    ]


def joint_entropy_exact(agent, env, h_U, avail=None, cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    return entropy_bits(joint_next_obs_distribution(agent, env, h_U, avail, cap))


# -- Monte Carlo -----------------------------------------------------------


def _draw(dist: DiscreteDistribution, n: int, gen: np.random.Generator) -> np.ndarray:
    """Indices into ``dist.support`` for ``n`` draws."""
    if len(dist) == 1:
        return np.zeros(n, dtype=np.int64)
    cum = np.cumsum(np.asarray(dist.float_probs()))
    cum[-1] = 1.0
    return np.searchsorted(cum, gen.random(n), side="right")


def sample_joint_actions(
    agent: PartitionAgent, h_U: EnlargedHistory, avail, n: int, gen: np.random.Generator
) -> np.ndarray:
    if isinstance(agent, IndependentAgent):
        cols = []
        for d in agent.unit_distributions(h_U, avail):
            cols.append(np.asarray(d.support, dtype=np.int64)[_draw(d, n, gen)])
        return np.stack(cols, axis=1)
    lam = agent.distribution(h_U, avail)
    table = np.asarray(lam.support, dtype=np.int64).reshape(len(lam), -1)
    return table[_draw(lam, n, gen)]


def _unique_rows(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distinct rows of a non-negative int matrix and each row's index into them."""
    if a.shape[1] == 1:
        codes = a[:, 0]
    else:
        # mixed-radix code per row; fall back to the generic path if it could overflow
        radix = a.max(axis=0).astype(object) + 1
        if math.prod(radix) >= 2**62 or a.min() < 0:
            uniq, inverse = np.unique(a, axis=0, return_inverse=True)
            return uniq, inverse.reshape(-1)
        codes = np.zeros(len(a), dtype=np.int64)
        for j in range(a.shape[1]):
            codes = codes * int(radix[j]) + a[:, j]
    _, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    return a[first], inverse.reshape(-1)


def sample_joint_next_obs(
    agent, env: EnvironmentModel, h_U: EnlargedHistory, n: int, gen, avail=None
) -> np.ndarray:
    """``n`` joint next observations by simulating policy then dynamics."""
    avail = _avail(env, h_U, avail)
    acts = sample_joint_actions(agent, h_U, avail, n, gen)
    m = acts.shape[1]
    out = np.empty_like(acts)
    obs = h_U.observations
    uniq, inverse = _unique_rows(acts)
    for j, ja in enumerate(map(tuple, uniq.tolist())):
        rows = np.nonzero(inverse == j)[0]
        coupled = env.joint_row(obs, ja) if env.joint_dynamics else None
        if coupled is not None:
            table = np.asarray(coupled.support, dtype=np.int64).reshape(len(coupled), m)
            out[rows] = table[_draw(coupled, len(rows), gen)]
            continue
        for i, (h, a) in enumerate(zip(h_U.histories, ja)):
            d = env.transition(h, a)
            out[rows, i] = np.asarray(d.support, dtype=np.int64)[_draw(d, len(rows), gen)]
    return out


def miller_madow_bits(counts: np.ndarray) -> np.ndarray:
    """Plug-in entropy plus ``(K - 1) / (2 n ln 2)``; rows are count vectors."""
    counts = np.atleast_2d(np.asarray(counts, dtype=float))
    n = counts.sum(axis=1)
    p = counts / n[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    k = (counts > 0).sum(axis=1)
    return terms.sum(axis=1) + (k - 1) / (2.0 * n * math.log(2))


def joint_entropy_mc(
    agent,
    env: EnvironmentModel,
    h_U: EnlargedHistory,
    n: int,
    seed: int,
    avail=None,
    bootstrap: int = DEFAULT_BOOTSTRAP,
    level: float = 0.99,
    stream_entity: int = 0,
) -> tuple[float, tuple[float, float]]:
    """Miller-Madow estimate of the joint entropy with a percentile bootstrap CI."""
    if n < 1000:
        raise ValueError("Monte Carlo estimate needs n >= 1000")
    gen = numpy_generator(seed, Purpose.MONTE_CARLO, stream_entity, h_U.t)
    samples = sample_joint_next_obs(agent, env, h_U, n, gen, avail)
    _, inverse = _unique_rows(samples)
    counts = np.bincount(inverse)
    estimate = float(miller_madow_bits(counts)[0])
    if len(counts) == 1:
        return 0.0, (0.0, 0.0)
    boot_gen = numpy_generator(seed, Purpose.BOOTSTRAP, stream_entity, h_U.t)
    resampled = boot_gen.multinomial(n, counts / counts.sum(), size=bootstrap)
    boot = miller_madow_bits(resampled)
    tail = (1 - level) / 2 * 100
    lo, hi = np.percentile(boot, [tail, 100 - tail])
    return estimate, (float(lo), float(hi))


# -- reports ---------------------------------------------------------------

ENTROPY_COLUMNS = (
    "t",
    "partition",
    "unit",
    "H_unit_bits",
    "H_joint_bits",
    "marginal_sum_bits",
    "method",
    "n",
    "ci_low",
    "ci_high",
)


@dataclass
class EntropyReport:
    t: int
    partition: int
    per_unit: dict = field(default_factory=dict)
    joint: float = 0.0
    marginal_sum: float = 0.0
    method: str = "exact"
    n: int | None = None
    ci: tuple[float, float] | None = None

    def rows(self) -> list[dict]:
        out = []
        for uid, h in self.per_unit.items():
            out.append(
                {
                    "t": self.t,
                    "partition": self.partition,
                    "unit": uid,
                    "H_unit_bits": _fmt(h),
                    "H_joint_bits": _fmt(self.joint),
                    "marginal_sum_bits": _fmt(self.marginal_sum),
                    "method": self.method,
                    "n": "" if self.n is None else self.n,
                    "ci_low": "" if self.ci is None else _fmt(self.ci[0]),
                    "ci_high": "" if self.ci is None else _fmt(self.ci[1]),
                }
            )
        return out


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def entropy_report(
    agent: PartitionAgent,
    env: EnvironmentModel,
    h_U: EnlargedHistory,
    partition: int = 0,
    cap: int = DEFAULT_ENUMERATION_CAP,
    n_mc: int = 10**4,
    seed: int = 0,
) -> EntropyReport:
    """Exact joint entropy when enumeration fits under ``cap``, Monte Carlo otherwise."""
    avail = _avail(env, h_U, None)
    report = EntropyReport(h_U.t, partition)
    joint = None
    if enumeration_size(env, h_U, avail) <= cap:
        joint = joint_next_obs_distribution(agent, env, h_U, avail, cap)
        report.joint = entropy_bits(joint)
    else:
        est, ci = joint_entropy_mc(agent, env, h_U, n_mc, seed, avail, stream_entity=partition)
        report.joint, report.method, report.n, report.ci = est, "monte_carlo", n_mc, ci
    if joint is None and env.joint_dynamics and len(h_U.histories) > 1:
        marginals = [None] * len(h_U.histories)
    else:
        marginals = unit_next_obs_distributions(agent, env, h_U, avail, joint)
    for uid, q in zip(h_U.units, marginals):
        report.per_unit[uid] = float("nan") if q is None else unit_entropy(q)
    report.marginal_sum = math.fsum(report.per_unit.values())
    return report
