"""Built-in groundings, each designed to exhibit or avoid particular propositions."""

from __future__ import annotations

import random
from fractions import Fraction

from ..core import DiscreteDistribution, DynamicsRow, EnvironmentModel, Epoch, GroundingError
from ..units import DEFAULT_CENT, quantize_reward
from .base import GroundingSpec

P = DiscreteDistribution
W, R, N = "witnessed", "refuted", "inconclusive"  # N: not decided


def _expect(**kw) -> dict:
    base = {f"P{i}": W for i in range(1, 10)}
    base.update(kw)
    return base


def _row(o, a, dist, epoch=Epoch(), trail=()):
    return DynamicsRow((o, tuple(trail)), a, epoch, dist)


def make_trapdoor() -> GroundingSpec:
    """Easy to enter, impossible to leave.

    ``free`` and ``gate`` communicate; ``jump`` from either lands in ``trap``
    with probability 1, pays 5 cents and spawns one unit, and from ``trap``
    only ``stay`` exists.
    """
    FREE, GATE, TRAP = 0, 1, 2
    STAY, MOVE, JUMP = 0, 1, 2
    half = Fraction(1, 2)
    rows = [
        _row(FREE, STAY, P.point(FREE)),
        _row(FREE, MOVE, P.from_mapping({FREE: half, GATE: half})),
        _row(FREE, JUMP, P.point(TRAP)),
        _row(GATE, STAY, P.point(GATE)),
        _row(GATE, MOVE, P.point(FREE)),
        _row(GATE, JUMP, P.point(TRAP)),
        _row(TRAP, STAY, P.point(TRAP)),
    ]
    env = EnvironmentModel(
        {FREE: Epoch(), GATE: Epoch(), TRAP: Epoch()},
        {STAY: Epoch(), MOVE: Epoch(), JUMP: Epoch()},
        rows,
        reward_map={(FREE, JUMP): 5, (GATE, JUMP): 5, (TRAP, STAY): 1},
        spawn_map={(FREE, JUMP): 1, (GATE, JUMP): 1},
        obs_labels={FREE: "o_free", GATE: "o_gate", TRAP: "o_trap"},
        action_labels={STAY: "a_stay", MOVE: "a_move", JUMP: "a_jump"},
    )
    return GroundingSpec(
        "trapdoor",
        env,
        (FREE,),
        DEFAULT_CENT,
        _expect(P4=R, P9=R),
        description="absorbing trap entered by a rewarded jump that spawns a unit",
    )


def make_epoch() -> GroundingSpec:
    """Observation ``o_new`` and action ``a_new`` come into existence at t=5.

    Before then the unit shuttles between ``o0`` and ``o1``; from t=4 the
    ``o1/a1`` row can emit ``o_new`` (observed at t=5), and from t=5
    ``a_new`` is available at ``o0`` and ``o_new``.
    """
    O0, O1, NEW = 0, 1, 2
    A0, A1, ANEW = 0, 1, 2
    half, third = Fraction(1, 2), Fraction(1, 3)
    late = Epoch(5, None)
    rows = [
        _row(O0, A0, P.from_mapping({O0: half, O1: half})),
        _row(O0, A1, P.point(O1)),
        _row(O1, A0, P.point(O0)),
        _row(O1, A1, P.from_mapping({O0: half, O1: half}), Epoch(0, 3)),
        _row(O1, A1, P.from_mapping({O0: third, O1: third, NEW: third}), Epoch(4, None)),
        _row(O0, ANEW, P.point(NEW), late),
        _row(NEW, A0, P.point(O0), late),
        _row(NEW, ANEW, P.point(NEW), late),
    ]
    env = EnvironmentModel(
        {O0: Epoch(), O1: Epoch(), NEW: late},
        {A0: Epoch(), A1: Epoch(), ANEW: late},
        rows,
        reward_map={(O0, ANEW): 2, (NEW, ANEW): 2, (O1, A1): 1},
        obs_labels={O0: "o0", O1: "o1", NEW: "o_new"},
        action_labels={A0: "a0", A1: "a1", ANEW: "a_new"},
    )
    return GroundingSpec(
        "epoch",
        env,
        (O0,),
        DEFAULT_CENT,
        _expect(P6=N, P7=R),
        description="observation and action spaces that grow at t=5",
    )


def make_static(n_obs: int = 2, n_actions: int = 2) -> GroundingSpec:
    """Full-support, time-invariant grounding: every action from every
    observation leads uniformly to every observation.  One initial unit
    per observation, so the whole space is in use from t=0."""
    obs = range(n_obs)
    acts = range(n_actions)
    uniform = P.uniform(obs)
    rows = [_row(o, a, uniform) for o in obs for a in acts]
    env = EnvironmentModel(
        {o: Epoch() for o in obs},
        {a: Epoch() for a in acts},
        rows,
        reward_map={(o, a): a for o in obs for a in acts if a},
    )
    return GroundingSpec(
        "static",
        env,
        tuple(obs),
        DEFAULT_CENT,
        _expect(P4=R, P5=R, P6=N, P7=R, P9=R),
        description="time-invariant full-support dynamics",
    )


def make_coupled_pair() -> GroundingSpec:
    """Two units whose next observation copies the action just taken.

    Correlation between the units can only come from a joint policy.
    """
    rows = [_row(o, a, P.point(a)) for o in (0, 1) for a in (0, 1)]
    env = EnvironmentModel(
        {0: Epoch(), 1: Epoch()},
        {0: Epoch(), 1: Epoch()},
        rows,
        reward_map={(0, 1): 1, (1, 1): 1},
    )
    return GroundingSpec(
        "coupled",
        env,
        (0, 0),
        DEFAULT_CENT,
        _expect(P4=R, P5=R, P6=N, P7=R, P9=R),
        description="two units copying their actions into their next observations",
    )


def make_random_coupled(seed: int = 7, n_obs: int = 3, n_actions: int = 2) -> GroundingSpec:
    """Two units with genuinely coupled dynamics: every joint state and joint
    action has its own random rational law over joint next observations.
    The per-unit rows only define availability and are never sampled while
    both units are alive."""
    rnd = random.Random(seed)
    obs = range(n_obs)
    acts = range(n_actions)
    rows = [_row(o, a, P.uniform(obs)) for o in obs for a in acts]
    joint = {}
    outcomes = [(x, y) for x in obs for y in obs]
    for jo in outcomes:
        for ja in [(a, b) for a in acts for b in acts]:
            weights = [rnd.randint(0, 3) for _ in outcomes]
            if not any(weights):
                weights[rnd.randrange(len(weights))] = 1
            total = sum(weights)
            joint[(jo, ja)] = P.from_mapping({x: Fraction(w, total) for x, w in zip(outcomes, weights)})
    env = EnvironmentModel(
        {o: Epoch() for o in obs},
        {a: Epoch() for a in acts},
        rows,
        reward_map={(o, 1): 1 for o in obs},
        joint_dynamics=joint,
    )
    return GroundingSpec(
        "coupled_random",
        env,
        (0, 1),
        DEFAULT_CENT,
        _expect(P4=R, P5=R, P6=N, P7=R, P9=R),
        description=f"random coupled two-unit dynamics (seed {seed})",
    )


NORTH, SOUTH, WEST, EAST, HARVEST = range(5)
MOVES = {NORTH: (0, -1), SOUTH: (0, 1), WEST: (-1, 0), EAST: (1, 0)}


def make_market_grid(
    width: int = 4,
    height: int = 4,
    spawn_yield: int = 1,
    resources=None,
    harvest_value=Fraction(5, 100),
    start=(0, 0),
    cent=DEFAULT_CENT,
) -> GroundingSpec:
    """Grid of cells; moves bump against walls; ``harvest`` exists only on
    resource cells, keeps the unit in place, pays ``harvest_value`` and
    spawns ``spawn_yield`` units.  Cell ``(x, y)`` is observation
    ``y * width + x``."""
    if width < 1 or height < 1:
        raise GroundingError("grid dimensions must be positive")
    if width * height > 10**4:
        raise GroundingError("grid has more than 10^4 cells")
    if spawn_yield < 0:
        raise GroundingError("spawn_yield must be non-negative")
    if resources is None:
        resources = [(width - 1, height - 1)]
    resources = sorted(set(map(tuple, resources)))
    for x, y in resources + [tuple(start)]:
        if not (0 <= x < width and 0 <= y < height):
            raise GroundingError(f"cell {(x, y)} lies outside the {width}x{height} grid")
    k = quantize_reward(harvest_value, cent)

    def cell(x, y):
        return y * width + x

    rows = []
    reward, spawn = {}, {}
    for y in range(height):
        for x in range(width):
            o = cell(x, y)
            for a, (dx, dy) in MOVES.items():
                nx, ny = x + dx, y + dy
                if not (0 <= nx < width and 0 <= ny < height):
                    nx, ny = x, y
                rows.append(_row(o, a, P.point(cell(nx, ny))))
            if (x, y) in resources:
                rows.append(_row(o, HARVEST, P.point(o)))
                reward[(o, HARVEST)] = k
                if spawn_yield:
                    spawn[(o, HARVEST)] = spawn_yield
    env = EnvironmentModel(
        {o: Epoch() for o in range(width * height)},
        {a: Epoch() for a in range(5)},
        rows,
        reward_map=reward,
        spawn_map=spawn,
        action_labels={NORTH: "north", SOUTH: "south", WEST: "west", EAST: "east", HARVEST: "harvest"},
    )
    expect = _expect(P4=R, P7=R, P9=R)
    if not spawn_yield:
        expect["P6"] = N
    if len(resources) == width * height:
        expect["P5"] = R
    return GroundingSpec(
        "market",
        env,
        (cell(*start),),
        Fraction(cent),
        expect,
        description=f"{width}x{height} market grid, resources {resources}, spawn yield {spawn_yield}",
    )


def make_proportional(k: int = 1) -> GroundingSpec:
    """Single observation where ``earn`` pays one cent and spawns ``k`` units,
    so the population is always ``k`` times accumulated capital (counting
    the endowment the initial units stand for)."""
    env = EnvironmentModel(
        {0: Epoch()},
        {0: Epoch(), 1: Epoch()},
        [_row(0, 0, P.point(0)), _row(0, 1, P.point(0))],
        reward_map={(0, 1): 1},
        spawn_map={(0, 1): k},
        action_labels={0: "idle", 1: "earn"},
    )
    return GroundingSpec(
        "proportional",
        env,
        (0,) * k,
        DEFAULT_CENT,
        _expect(P4=R, P5=R, P7=R, P9=R),
        proportional=k,
        description=f"population equals {k} x accumulated capital",
    )


def make_memory() -> GroundingSpec:
    """Dynamics keyed on the last event: repeating the previous action
    scrambles the next observation, a fresh action is copied into it."""
    rows = []
    half = Fraction(1, 2)
    for o in (0, 1):
        for a in (0, 1):
            rows.append(_row(o, a, P.point(a)))
            for prev in (0, 1):
                if prev != o:
                    continue
                for pa in (0, 1):
                    dist = P.from_mapping({0: half, 1: half}) if pa == a else P.point(a)
                    rows.append(_row(o, a, dist, trail=((pa, prev),)))
    env = EnvironmentModel(
        {0: Epoch(), 1: Epoch()}, {0: Epoch(), 1: Epoch()}, rows, reward_map={(1, 1): 1}, history_key_depth=1
    )
    return GroundingSpec(
        "memory",
        env,
        (0,),
        DEFAULT_CENT,
        _expect(P4=R, P5=R, P6=N, P7=R, P9=R),
        description="history-keyed dynamics (depth 1)",
    )


BUILDERS = {
    "trapdoor": make_trapdoor,
    "epoch": make_epoch,
    "static": make_static,
    "coupled": make_coupled_pair,
    "coupled_random": make_random_coupled,
    "market": make_market_grid,
    "proportional": make_proportional,
    "memory": make_memory,
}
