from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..core import EnvironmentModel, GroundingError
from ..units import DEFAULT_CENT

PROPOSITIONS = ("P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9")
STATUSES = ("witnessed", "refuted", "inconclusive", "error")


@dataclass
class GroundingSpec:
    """An environment plus its initial population and declared verdicts.

    ``initial`` lists the origin observation of each unit present at t=0.
    ``expect`` maps proposition ids to the verdict the fixture is built to
    produce.  ``proportional`` is the units-per-cent constant for groundings
    whose population tracks accumulated capital; ``endowment`` is the
    capital the initial population stands for.
    """

    name: str
    env: EnvironmentModel
    initial: tuple = (0,)
    cent: Fraction = DEFAULT_CENT
    expect: dict = field(default_factory=dict)
    proportional: int | None = None
    description: str = ""

    def __post_init__(self):
        self.initial = tuple(self.initial)
        if not self.initial:
            raise GroundingError(f"{self.name}: grounding needs at least one initial unit")
        for o in self.initial:
            if not self.env.obs_active(o, 0):
                raise GroundingError(f"{self.name}: initial origin {o} is not active at t=0")
        for p, status in self.expect.items():
            if p not in PROPOSITIONS or status not in STATUSES:
                raise GroundingError(f"{self.name}: bad expectation {p}={status}")
        if self.proportional is not None:
            k = self.proportional
            if k <= 0:
                raise GroundingError(f"{self.name}: proportional constant must be positive")
            keys = set(self.env.reward_map) | set(self.env.spawn_map)
            for key in keys:
                if self.env.spawn_map.get(key, 0) != k * self.env.reward_map.get(key, 0):
                    raise GroundingError(f"{self.name}: spawn at {key} is not {k} x reward")
            if len(self.initial) % k:
                raise GroundingError(f"{self.name}: initial population is not a multiple of {k}")

    @property
    def endowment(self) -> Fraction:
        return Fraction(len(self.initial), self.proportional or 1)

    def witnesses(self) -> list[str]:
        return [p for p in PROPOSITIONS if self.expect.get(p) == "witnessed"]
