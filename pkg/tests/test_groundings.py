from fractions import Fraction

import pytest

from capitalsim.agents import RuleTableAgent
from capitalsim.core import GroundingError
from capitalsim.groundings import (
    BUILDERS,
    builtin,
    dump_grounding,
    make_market_grid,
    make_proportional,
    make_trapdoor,
    parse_grounding,
    resolve,
    shipped_path,
    validate_grounding_text,
)
from capitalsim.groundings.fileformat import GroundingParseError
from capitalsim.groundings.fixtures import HARVEST
from capitalsim.simulation import Simulation


def closure(env, start):
    """Observations reachable from ``start`` over the raw row table, ignoring time."""
    seen, stack = {start}, [start]
    while stack:
        o = stack.pop()
        for r in env.rows:
            if r.key[0] != o:
                continue
            for o2, p in r.dist.items():
                if p > 0 and o2 not in seen:
                    seen.add(o2)
                    stack.append(o2)
    return seen


def test_trapdoor_reachability():
    env = make_trapdoor().env
    assert closure(env, 2) == {2}
    assert closure(env, 0) == {0, 1, 2}


def test_trapdoor_never_leaves_trap():
    g = make_trapdoor()
    for seed in range(20):
        sim = Simulation(g, RuleTableAgent({0: 2, 1: 2}), seed).run(20)
        for e in sim.ledger:
            if e.obs == 2:
                assert e.next_obs == 2


def test_trapdoor_jump_table():
    env = make_trapdoor().env
    assert (env.reward(0, 2), env.spawn(0, 2)) == (5, 1)


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_shipped_file_matches_builder(name):
    text = shipped_path(name).read_text()
    assert text == dump_grounding(BUILDERS[name]())
    assert validate_grounding_text(text) == []


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_round_trip(name):
    g = builtin(name)
    assert dump_grounding(parse_grounding(dump_grounding(g))) == dump_grounding(g)
    assert g.witnesses()


def test_resolve_accepts_paths(tmp_path):
    path = tmp_path / "mine.grounding"
    path.write_text(dump_grounding(make_trapdoor()))
    assert resolve(str(path)).name == "trapdoor"
    with pytest.raises(KeyError):
        builtin("nope")


def test_market_harvest_only_on_resources():
    g = make_market_grid()
    env = g.env
    assert HARVEST not in env.available_actions(0, 0)
    assert HARVEST in env.available_actions(15, 0)
    assert env.reward(15, HARVEST) == 5


def test_market_dimension_errors():
    with pytest.raises(GroundingError):
        make_market_grid(0, 3)
    with pytest.raises(GroundingError):
        make_market_grid(101, 100)
    with pytest.raises(GroundingError):
        make_market_grid(2, 2, resources=[(5, 5)])


@pytest.mark.parametrize("spawn_yield", [1, 2])
def test_market_always_harvest_grows_geometrically(spawn_yield):
    g = make_market_grid(spawn_yield=spawn_yield, start=(3, 3))
    sim = Simulation(g, RuleTableAgent({15: HARVEST}), 0).run(7)
    # every unit harvests every step, so m_t = (1 + y)^t
    assert [rec.m for rec in sim.trace] == [(1 + spawn_yield) ** t for t in range(7)]
    assert sim.total_capital() == 5 * sum((1 + spawn_yield) ** t for t in range(7))


def test_proportional_validation():
    g = make_proportional(2)
    assert g.endowment == 1
    with pytest.raises(GroundingError):
        make_proportional(0)


def test_raw_rewards_quantized_by_cent():
    text = dump_grounding(make_trapdoor()).replace("REW\n0 2 5\n", "REW\n0 2 0.05\n")
    assert parse_grounding(text).env.reward(0, 2) == 5


def test_raw_reward_not_a_multiple():
    text = dump_grounding(make_trapdoor()).replace("REW\n0 2 5\n", "REW\n0 2 0.055\n")
    with pytest.raises(GroundingError, match="not a multiple"):
        parse_grounding(text)


def test_parse_errors_carry_line_numbers():
    text = dump_grounding(make_trapdoor()).replace("0 1 -> 0:1/2 1:1/2", "0 1 -> 0:1/2 1:1/3")
    with pytest.raises(GroundingParseError) as info:
        parse_grounding(text)
    assert info.value.lineno == text.splitlines().index("0 1 -> 0:1/2 1:1/3") + 1


def test_validator_reports_problems():
    assert validate_grounding_text("GROUNDING x\nOBS\n0 0 inf\n") == []
    problems = validate_grounding_text("GROUNDING x\nOBS\n0 0 inf\nACT\n0 0 inf\nDYN\n0 0 -> 3:1\n")
    assert "unknown observation 3" in problems[0]
    assert validate_grounding_text("garbage line\n")


def test_cent_header():
    text = dump_grounding(make_trapdoor()).replace("CENT 1/100", "CENT 1/1000")
    assert parse_grounding(text).cent == Fraction(1, 1000)
