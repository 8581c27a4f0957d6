"""Units of capital, the reward ledger, partitions and accumulation.

Rewards are integer counts ``k`` of the smallest unit (the cent quantum);
a reward's value is ``k * cent``.  Nothing here ever rounds.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .core import CapitalError, History, as_fraction

DEFAULT_CENT = Fraction(1, 100)


class NotAMultiple(CapitalError):
    pass


class NegativeReward(CapitalError):
    pass


class DivergentObjective(CapitalError):
    pass


class LedgerError(CapitalError):
    pass


@dataclass(frozen=True)
class CentQuantum:
    value: Fraction = DEFAULT_CENT

    def __post_init__(self):
        v = as_fraction(self.value)
        if v <= 0:
            raise ValueError("cent quantum must be strictly positive")
        object.__setattr__(self, "value", v)


def quantize_reward(raw, cent: CentQuantum | Fraction = DEFAULT_CENT) -> int:
    """Exact count ``k`` with ``raw = k * cent``; refuses to round."""
    q = cent.value if isinstance(cent, CentQuantum) else CentQuantum(cent).value
    raw = as_fraction(raw)
    if raw < 0:
        raise NegativeReward(f"reward {raw} is negative")
    k = raw / q
    if k.denominator != 1:
        raise NotAMultiple(f"reward {raw} is not a multiple of {q}")
    return int(k)


@dataclass
class CapitalUnit:
    unit_id: int
    birth_time: int
    history: History
    parent_id: int | None = None
    alive: bool = True

    @property
    def observation(self) -> int:
        return self.history.last_observation


class UnitRegistry:
    """Owns unit ids; ids are monotone and never reused."""

    def __init__(self):
        self._next = 0
        self.units: dict[int, CapitalUnit] = {}

    def create(self, origin: int, birth_time: int, parent_id: int | None = None) -> CapitalUnit:
        uid = self._next
        self._next += 1
        unit = CapitalUnit(uid, birth_time, History(origin, (), birth_time), parent_id)
        self.units[uid] = unit
        return unit

    def alive(self) -> list[CapitalUnit]:
        return [u for u in self.units.values() if u.alive]

    def alive_ids(self) -> list[int]:
        return [u.unit_id for u in self.units.values() if u.alive]

    def __getitem__(self, uid: int) -> CapitalUnit:
        return self.units[uid]

    def __len__(self):
        return len(self.units)


def spawn_units(
    pool: UnitRegistry,
    parent: CapitalUnit,
    transition: tuple[int, int, int, int],
    n_spawn: int,
    t: int,
) -> list[CapitalUnit]:
    """Create ``n_spawn`` children of ``parent`` born at ``t + 1`` observing ``o'``.

    ``transition`` is ``(o, a, k, o')``.  Children start with an empty
    history whose origin is ``o'``.
    """
    if not parent.alive:
        raise CapitalError(f"unit {parent.unit_id} is dead and cannot spawn")
    if n_spawn < 0:
        raise ValueError("n_spawn must be non-negative")
    next_obs = transition[3]
    return [pool.create(next_obs, t + 1, parent.unit_id) for _ in range(n_spawn)]


def joint_observation(units: Iterable[CapitalUnit]) -> list[int]:
    """One observation slot per alive unit, ordered by unit id."""
    return [u.observation for u in sorted(units, key=lambda u: u.unit_id) if u.alive]


# -- partitions ------------------------------------------------------------


@dataclass
class Partition:
    partition_id: int
    members: set[int] = field(default_factory=set)

    def agency(self) -> int:
        return len(self.members)


@dataclass
class Partitioning:
    partitions: list[Partition] = field(default_factory=list)

    def owner(self, unit_id: int) -> int | None:
        for p in self.partitions:
            if unit_id in p.members:
                return p.partition_id
        return None

    def get(self, partition_id: int) -> Partition:
        for p in self.partitions:
            if p.partition_id == partition_id:
                return p
        raise KeyError(partition_id)

    def to_lists(self) -> dict[int, list[int]]:
        return {p.partition_id: sorted(p.members) for p in self.partitions}


@dataclass
class PartitionReport:
    overlaps: dict[int, list[int]] = field(default_factory=dict)
    uncovered: list[int] = field(default_factory=list)
    empty: list[int] = field(default_factory=list)
    dead_members: list[int] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.overlaps or self.uncovered or self.empty or self.dead_members)


def check_partitioning(p: Partitioning, alive: Iterable[int]) -> PartitionReport:
    alive = set(alive)
    seen: dict[int, list[int]] = {}
    report = PartitionReport()
    for part in p.partitions:
        if not part.members:
            report.empty.append(part.partition_id)
        for uid in part.members:
            seen.setdefault(uid, []).append(part.partition_id)
    report.overlaps = {u: sorted(pids) for u, pids in sorted(seen.items()) if len(pids) > 1}
    report.uncovered = sorted(alive - set(seen))
    report.dead_members = sorted(set(seen) - alive)
    return report


def agency(partition: Partition) -> int:
    return partition.agency()


# -- ledger ----------------------------------------------------------------

LEDGER_FIELDS = ("t", "unit", "partition", "obs", "action", "reward_k", "next_obs", "spawned")


@dataclass(frozen=True)
class LedgerEntry:
    t: int
    unit: int
    partition: int
    obs: int
    action: int
    reward_k: int
    next_obs: int
    spawned: tuple = ()

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "unit": self.unit,
            "partition": self.partition,
            "obs": self.obs,
            "action": self.action,
            "reward_k": self.reward_k,
            "next_obs": self.next_obs,
            "spawned": list(self.spawned),
        }


class Ledger:
    """Append-only transition log ordered by ``(t, unit)``."""

    def __init__(self, entries: Iterable[LedgerEntry] = ()):
        self._entries: list[LedgerEntry] = []
        for e in entries:
            self.append(e)

    def append(self, entry: LedgerEntry) -> None:
        k = entry.reward_k
        if isinstance(k, bool) or not isinstance(k, int):
            raise LedgerError(f"reward {k!r} is not an integer count of cents")
        if k < 0:
            raise NegativeReward(f"reward {k} is negative")
        if self._entries:
            last = self._entries[-1]
            if (entry.t, entry.unit) <= (last.t, last.unit):
                raise LedgerError(f"entry ({entry.t},{entry.unit}) out of order after ({last.t},{last.unit})")
        self._entries.append(entry)

    @property
    def entries(self) -> tuple[LedgerEntry, ...]:
        return tuple(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def rewards(self) -> dict[tuple[int, int], int]:
        return {(e.t, e.unit): e.reward_k for e in self._entries}

    def jsonl_lines(self, episode: int | None = None) -> list[str]:
        out = []
        for e in self._entries:
            d = e.to_dict()
            if episode is not None:
                d = {"episode": episode, **d}
            out.append(json.dumps(d, separators=(",", ":")))
        return out

    @classmethod
    def from_jsonl(cls, lines: Iterable[str]) -> Ledger:
        entries = []
        for line in lines:
            if not line.strip():
                continue
            d = json.loads(line)
            entries.append(
                LedgerEntry(
                    d["t"],
                    d["unit"],
                    d["partition"],
                    d["obs"],
                    d["action"],
                    d["reward_k"],
                    d["next_obs"],
                    tuple(d["spawned"]),
                )
            )
        return cls(entries)


def _members(U) -> set[int]:
    return set(U.members) if isinstance(U, Partition) else set(U)


def accumulated_capital(ledger: Ledger | Iterable[LedgerEntry], U, t: int) -> int:
    """``G(U)`` up to and including time ``t``, in cent counts."""
    members = _members(U)
    return sum(e.reward_k for e in ledger if e.t <= t and e.unit in members)


def discounted_return(
    rewards: Mapping[tuple[int, int], int],
    U,
    gamma,
    tau: int = 0,
    horizon: int | None = None,
    cent=Fraction(1),
) -> Fraction:
    """Sum over ``tau <= t <= horizon`` and units in ``U`` of ``gamma**t * k * cent``.

    The exponent is global time ``t``, not ``t - tau``.  ``horizon=None``
    sums every recorded reward from ``tau`` on; that is only allowed for
    ``gamma < 1``.
    """
    gamma = as_fraction(gamma)
    cent = cent.value if isinstance(cent, CentQuantum) else as_fraction(cent)
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must lie in [0, 1]")
    if gamma == 1 and horizon is None:
        raise DivergentObjective("gamma = 1 needs a finite horizon")
    members = _members(U)
    by_t: dict[int, int] = {}
    for (t, uid), k in rewards.items():
        if uid in members and t >= tau and (horizon is None or t <= horizon):
            by_t[t] = by_t.get(t, 0) + k
    total = Fraction(0)
    for t in sorted(by_t):
        total += gamma**t * by_t[t]
    return total * cent


def tail_bound(gamma, horizon: int, k_max: int, n_units: int, cent=Fraction(1)) -> Fraction:
    """Upper bound on the discounted mass beyond ``horizon`` for bounded rewards
    and a fixed population; ``inf`` is not representable, so gamma must be < 1."""
    gamma = as_fraction(gamma)
    if gamma >= 1:
        raise DivergentObjective("tail is unbounded for gamma >= 1")
    return gamma ** (horizon + 1) / (1 - gamma) * k_max * n_units * as_fraction(cent)
