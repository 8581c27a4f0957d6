"""Line-oriented grounding files.

::

    # comments run to end of line
    GROUNDING trapdoor
    DESCRIPTION free text
    DEPTH 0                     # history_key_depth: integer or "full"
    CENT 1/100
    INIT 1 0                    # <count> <origin>; repeatable
    PROPORTIONAL 1              # optional units-per-cent constant
    EXPECT P2=witnessed P4=refuted
    OBS
    0 0 inf o_free              # <id> <epoch start> <epoch end|inf> [label]
    ACT
    0 0 inf a_stay
    DYN
    0 1 -> 0:1/2 1:1/2          # <obs>[|a.o,a.o,...] <action> [@start:end] -> <obs>:<prob> ...
    REW
    0 2 5                       # <obs> <action> <k>; a value written with '.' or '/'
                                #   is a raw reward and is divided by CENT exactly
    SPAWN
    0 2 1                       # <obs> <action> <units spawned>
    ABSORB
    3                           # observations that remove the unit
    JOINT
    0,0 1,1 -> 1,1:1            # <joint obs> <joint action> -> <joint obs>:<prob> ...

Section headers stand alone on their line; header keywords with values
may appear anywhere before the first section.  Probabilities are exact
rationals (``1/3``) or decimals (``0.25``) and every row must sum to 1.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from ..core import (
    FULL,
    DiscreteDistribution,
    DynamicsRow,
    EnvironmentModel,
    Epoch,
    GroundingError,
    as_fraction,
)
from ..units import CentQuantum, NegativeReward, NotAMultiple, quantize_reward
from .base import GroundingSpec

SECTIONS = ("OBS", "ACT", "DYN", "REW", "SPAWN", "ABSORB", "JOINT")
FORMAT_TAG = "# capitalsim grounding v1"


class GroundingParseError(GroundingError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _fraction(tok: str, n: int) -> Fraction:
    try:
        return as_fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise GroundingParseError(n, f"bad number {tok!r}") from None


def _int(tok: str, n: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise GroundingParseError(n, f"expected an integer, got {tok!r}") from None


def _epoch(start: str, end: str, n: int) -> Epoch:
    s = _int(start, n)
    e = None if end in ("inf", "∞") else _int(end, n)
    if e is not None and e < s:
        raise GroundingParseError(n, f"epoch end {e} precedes start {s}")
    return Epoch(s, e)


def _dist(tokens: list[str], n: int, joint: bool = False) -> DiscreteDistribution:
    mass = {}
    for tok in tokens:
        if ":" not in tok:
            raise GroundingParseError(n, f"expected outcome:prob, got {tok!r}")
        out, p = tok.rsplit(":", 1)
        key = tuple(_int(x, n) for x in out.split(",")) if joint else _int(out, n)
        if key in mass:
            raise GroundingParseError(n, f"duplicate outcome {out}")
        mass[key] = _fraction(p, n)
    total = sum(mass.values())
    if total != 1:
        raise GroundingParseError(n, f"probabilities sum to {total}, not 1")
    try:
        return DiscreteDistribution(tuple(mass), tuple(mass.values()))
    except ValueError as exc:
        raise GroundingParseError(n, str(exc)) from None


def _context(tok: str, n: int) -> tuple:
    head, _, trail = tok.partition("|")
    events = []
    if trail:
        for ev in trail.split(","):
            a, _, o = ev.partition(".")
            events.append((_int(a, n), _int(o, n)))
    return (_int(head, n), tuple(events))


def parse_grounding(text: str) -> GroundingSpec:
    name, description, depth = "unnamed", "", 0
    cent = CentQuantum()
    initial: list[int] = []
    expect: dict[str, str] = {}
    proportional = None
    obs, acts = {}, {}
    obs_labels, act_labels = {}, {}
    rows: list[DynamicsRow] = []
    raw_rewards: list[tuple[int, tuple[int, int], str]] = []
    spawn, absorbing, joint = {}, [], {}
    section = None

    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        head = parts[0]
        if head in SECTIONS and len(parts) == 1:
            section = head
            continue
        if section is None:
            rest = line[len(head) :].strip()
            if head == "GROUNDING":
                name = rest
            elif head == "DESCRIPTION":
                description = rest
            elif head == "DEPTH":
                depth = FULL if rest == FULL else _int(rest, n)
            elif head == "CENT":
                try:
                    cent = CentQuantum(_fraction(rest, n))
                except ValueError as exc:
                    raise GroundingParseError(n, str(exc)) from None
            elif head == "INIT":
                if len(parts) != 3:
                    raise GroundingParseError(n, "INIT takes <count> <origin>")
                initial.extend([_int(parts[2], n)] * _int(parts[1], n))
            elif head == "PROPORTIONAL":
                proportional = _int(rest, n)
            elif head == "EXPECT":
                for tok in parts[1:]:
                    p, _, status = tok.partition("=")
                    expect[p] = status
            else:
                raise GroundingParseError(n, f"unknown header {head!r}")
            continue

        if section in ("OBS", "ACT"):
            if len(parts) not in (3, 4):
                raise GroundingParseError(n, f"{section} lines take <id> <start> <end> [label]")
            i = _int(parts[0], n)
            catalog, labels = (obs, obs_labels) if section == "OBS" else (acts, act_labels)
            if i in catalog:
                raise GroundingParseError(n, f"duplicate {section} id {i}")
            catalog[i] = _epoch(parts[1], parts[2], n)
            if len(parts) == 4:
                labels[i] = parts[3]
        elif section == "DYN":
            left, arrow, right = line.partition("->")
            if not arrow:
                raise GroundingParseError(n, "DYN lines need '->'")
            lhs = left.split()
            if len(lhs) not in (2, 3):
                raise GroundingParseError(n, "DYN left side is <context> <action> [@start:end]")
            epoch = Epoch()
            if len(lhs) == 3:
                if not lhs[2].startswith("@") or ":" not in lhs[2]:
                    raise GroundingParseError(n, f"bad epoch {lhs[2]!r}")
                s, e = lhs[2][1:].split(":", 1)
                epoch = _epoch(s, e, n)
            rows.append(DynamicsRow(_context(lhs[0], n), _int(lhs[1], n), epoch, _dist(right.split(), n)))
        elif section == "REW":
            if len(parts) != 3:
                raise GroundingParseError(n, "REW lines take <obs> <action> <k>")
            raw_rewards.append((n, (_int(parts[0], n), _int(parts[1], n)), parts[2]))
        elif section == "SPAWN":
            if len(parts) != 3:
                raise GroundingParseError(n, "SPAWN lines take <obs> <action> <n>")
            spawn[(_int(parts[0], n), _int(parts[1], n))] = _int(parts[2], n)
        elif section == "ABSORB":
            absorbing.extend(_int(p, n) for p in parts)
        elif section == "JOINT":
            left, arrow, right = line.partition("->")
            lhs = left.split()
            if not arrow or len(lhs) != 2:
                raise GroundingParseError(n, "JOINT lines are <obs,..> <act,..> -> <obs,..>:<p> ...")
            key = (tuple(_int(x, n) for x in lhs[0].split(",")), tuple(_int(x, n) for x in lhs[1].split(",")))
            joint[key] = _dist(right.split(), n, joint=True)

    rewards = {}
    for n, key, tok in raw_rewards:
        try:
            rewards[key] = (
                quantize_reward(_fraction(tok, n), cent) if ("." in tok or "/" in tok) else _int(tok, n)
            )
        except (NotAMultiple, NegativeReward) as exc:
            raise GroundingParseError(n, str(exc)) from None

    env = EnvironmentModel(obs, acts, rows, rewards, spawn, depth, absorbing, joint, obs_labels, act_labels)
    return GroundingSpec(name, env, tuple(initial) or (0,), cent.value, expect, proportional, description)


def load_grounding(path: str | Path) -> GroundingSpec:
    return parse_grounding(Path(path).read_text())


def _fmt(p: Fraction) -> str:
    return str(p)


def dump_grounding(g: GroundingSpec) -> str:
    env = g.env
    out = [FORMAT_TAG, f"GROUNDING {g.name}"]
    if g.description:
        out.append(f"DESCRIPTION {g.description}")
    out.append(f"DEPTH {env.history_key_depth}")
    out.append(f"CENT {_fmt(g.cent)}")
    counts: list[list[int]] = []
    for o in g.initial:
        if counts and counts[-1][1] == o:
            counts[-1][0] += 1
        else:
            counts.append([1, o])
    out.extend(f"INIT {c} {o}" for c, o in counts)
    if g.proportional is not None:
        out.append(f"PROPORTIONAL {g.proportional}")
    if g.expect:
        out.append("EXPECT " + " ".join(f"{p}={s}" for p, s in sorted(g.expect.items())))

    def catalog(title, cat, labels):
        out.append(title)
        for i, ep in cat.items():
            end = "inf" if ep.end is None else str(ep.end)
            label = f" {labels[i]}" if i in labels else ""
            out.append(f"{i} {ep.start} {end}{label}")

    catalog("OBS", env.observations, env.obs_labels)
    catalog("ACT", env.actions, env.action_labels)
    out.append("DYN")
    for r in sorted(env.rows, key=lambda r: (r.key, r.action, r.epoch.start)):
        ctx = str(r.key[0])
        if r.key[1]:
            ctx += "|" + ",".join(f"{a}.{o}" for a, o in r.key[1])
        ep = "" if r.epoch == Epoch() else f" @{r.epoch}"
        dist = " ".join(f"{o}:{_fmt(p)}" for o, p in r.dist.items())
        out.append(f"{ctx} {r.action}{ep} -> {dist}")
    if env.reward_map:
        out.append("REW")
        out.extend(f"{o} {a} {k}" for (o, a), k in sorted(env.reward_map.items()))
    if env.spawn_map:
        out.append("SPAWN")
        out.extend(f"{o} {a} {k}" for (o, a), k in sorted(env.spawn_map.items()))
    if env.absorbing:
        out.append("ABSORB")
        out.append(" ".join(str(o) for o in sorted(env.absorbing)))
    if env.joint_dynamics:
        out.append("JOINT")
        for (jo, ja), dist in sorted(env.joint_dynamics.items()):
            rhs = " ".join(f"{','.join(map(str, x))}:{_fmt(p)}" for x, p in dist.items())
            out.append(f"{','.join(map(str, jo))} {','.join(map(str, ja))} -> {rhs}")
    return "\n".join(out) + "\n"


def validate_grounding_text(text: str) -> list[str]:
    """Problems found while loading, or an empty list."""
    try:
        parse_grounding(text)
    except GroundingError as exc:
        return [str(exc)]
    return []
