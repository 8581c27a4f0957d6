"""Discrete-time rollout engine.

One step at global time ``t``:

1. every partition's agent picks a joint action for its alive members
   (agent stream addressed by partition id and ``t``);
2. every member is stepped through the environment (environment stream
   addressed by unit id and ``t``), or the whole population jointly when the
   grounding declares coupled dynamics for the current joint state;
3. transitions are logged in unit order, then children are spawned in the
   same order, born at ``t + 1`` on their parent's next observation;
4. members landing on an absorbing observation die;
5. quantitative agents are told their members' transitions.

Spawned units join their parent's partition, so the partitioning stays
complete without moving any unit between partitions.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from fractions import Fraction

from .agents import EnlargedHistory, GeneratingProcessKind, NoAvailableAction, PartitionAgent, UnitTransition
from .core import CapitalError, EnvironmentModel
from .rng import Purpose, Stream
from .units import (
    DEFAULT_CENT,
    Ledger,
    LedgerEntry,
    Partition,
    Partitioning,
    UnitRegistry,
    spawn_units,
)

DEFAULT_MAX_UNITS = 100_000

# entity id of the environment stream used for coupled joint transitions
JOINT_ENTITY = (1 << 63) - 1


class PopulationCapExceeded(CapitalError):
    pass


@dataclass(frozen=True)
class StepRecord:
    t: int
    units: tuple
    joint_obs: tuple
    joint_action: tuple
    partitions: tuple  # ((partition_id, (members...)), ...)

    @property
    def m(self) -> int:
        return len(self.units)


class Simulation:
    """A single seeded episode.

    ``agent`` is either one agent (used for the single partition, or cloned
    for every singleton partition) or a callable ``partition_id -> agent``.
    """

    def __init__(
        self,
        grounding,
        agent: PartitionAgent | Callable[[int], PartitionAgent],
        seed: int,
        partitioning: str = "single",
        cent=DEFAULT_CENT,
        max_units: int = DEFAULT_MAX_UNITS,
    ):
        if partitioning not in ("single", "singleton"):
            raise ValueError("partitioning must be 'single' or 'singleton'")
        self.grounding = grounding
        self.env: EnvironmentModel = grounding.env
        self.seed = seed
        self.cent = Fraction(cent)
        self.max_units = max_units
        self.registry = UnitRegistry()
        self.ledger = Ledger()
        self.trace: list[StepRecord] = []
        self.t = 0
        self._factory = agent if callable(agent) and not isinstance(agent, PartitionAgent) else None
        self._template = None if self._factory else agent

        for origin in grounding.initial:
            self.env.available_actions(origin, 0)
            self.registry.create(origin, 0)
        ids = self.registry.alive_ids()
        if partitioning == "single":
            self.partitioning = Partitioning([Partition(0, set(ids))])
        else:
            self.partitioning = Partitioning([Partition(i, {uid}) for i, uid in enumerate(ids)])
        self.mode = partitioning
        self.agents: dict[int, PartitionAgent] = {}
        for p in self.partitioning.partitions:
            self.agents[p.partition_id] = self._new_agent(p.partition_id)

    def _new_agent(self, pid: int) -> PartitionAgent:
        if self._factory is not None:
            agent = self._factory(pid)
            agent.partition_id = pid
            return agent
        if not self.agents and pid == 0:
            self._template.partition_id = 0
            return self._template
        return self._template.spawn_clone(pid)

    def enlarged_history(self, partition: Partition) -> EnlargedHistory:
        members = sorted(u for u in partition.members if self.registry[u].alive)
        return EnlargedHistory(tuple(members), tuple(self.registry[u].history for u in members))

    def step(self) -> StepRecord:
        t = self.t
        alive = sorted(self.registry.alive(), key=lambda u: u.unit_id)
        joint_obs = tuple(u.observation for u in alive)
        parts = tuple(
            (p.partition_id, tuple(sorted(p.members)))
            for p in sorted(self.partitioning.partitions, key=lambda p: p.partition_id)
        )
        owner: dict[int, int] = {}
        actions: dict[int, int] = {}
        for part in sorted(self.partitioning.partitions, key=lambda p: p.partition_id):
            h_U = self.enlarged_history(part)
            if not h_U.units:
                continue
            avail = [self.env.history_actions(h) for h in h_U.histories]
            for uid, a in zip(h_U.units, avail):
                if not a:
                    raise NoAvailableAction(f"unit {uid} has no available action at t={t}")
            joint = self.agents[part.partition_id].act(
                h_U, avail, Stream(self.seed, Purpose.AGENT, part.partition_id, t)
            )
            for uid, a, ok in zip(h_U.units, joint, avail):
                if a not in ok:
                    raise CapitalError(f"agent chose unavailable action {a} for unit {uid}")
                actions[uid] = a
                owner[uid] = part.partition_id
        joint_action = tuple(actions[u.unit_id] for u in alive)

        next_obs: dict[int, int] = {}
        coupled = self.env.joint_row(joint_obs, joint_action) if self.env.joint_dynamics else None
        if coupled is not None:
            sample = coupled.sample(Stream(self.seed, Purpose.ENV, JOINT_ENTITY, t))
            next_obs = {u.unit_id: o for u, o in zip(alive, sample)}
        else:
            for u in alive:
                next_obs[u.unit_id] = self.env.transition(u.history, actions[u.unit_id]).sample(
                    Stream(self.seed, Purpose.ENV, u.unit_id, t)
                )

        transitions: dict[int, list] = {}
        for u in alive:
            uid = u.unit_id
            o, a, o2 = u.observation, actions[uid], next_obs[uid]
            k = self.env.reward(o, a)
            n_spawn = self.env.spawn(o, a)
            if len(self.registry) + n_spawn > self.max_units:
                raise PopulationCapExceeded(f"population would exceed {self.max_units} units at t={t}")
            children = spawn_units(self.registry, u, (o, a, k, o2), n_spawn, t)
            self.ledger.append(
                LedgerEntry(t, uid, owner[uid], o, a, k, o2, tuple(c.unit_id for c in children))
            )
            before = u.history
            u.history = before.append(a, o2)
            if o2 in self.env.absorbing:
                u.alive = False
            part = self.partitioning.get(owner[uid])
            if not u.alive:
                part.members.discard(uid)
            for c in children:
                if self.mode == "single":
                    part.members.add(c.unit_id)
                else:
                    pid = max(p.partition_id for p in self.partitioning.partitions) + 1
                    self.partitioning.partitions.append(Partition(pid, {c.unit_id}))
                    self.agents[pid] = self._new_agent(pid)
            transitions.setdefault(owner[uid], []).append((before, a, k, u))
        # a partition whose members all died no longer exists
        self.partitioning.partitions = [p for p in self.partitioning.partitions if p.members]

        for pid, items in transitions.items():
            agent = self.agents[pid]
            if agent.kind is not GeneratingProcessKind.QUANTITATIVE:
                continue
            batch = []
            for before, a, k, u in items:
                nxt = self.env.history_actions(u.history) if u.alive else frozenset()
                batch.append(UnitTransition(before, a, k, u.history, nxt, u.alive))
            agent.learn(batch)

        record = StepRecord(
            t,
            tuple(u.unit_id for u in alive),
            joint_obs,
            joint_action,
            parts,
        )
        self.trace.append(record)
        self.t += 1
        return record

    def run(self, horizon: int) -> Simulation:
        for _ in range(horizon):
            self.step()
        return self

    def total_capital(self, t: int | None = None) -> int:
        return sum(e.reward_k for e in self.ledger if t is None or e.t <= t)


def rollout(grounding, agent, seed: int, horizon: int, **kw) -> Simulation:
    return Simulation(grounding, agent, seed, **kw).run(horizon)
