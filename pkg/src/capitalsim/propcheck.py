"""Mechanical checks of the nine propositions against a grounding.

Every check returns a :class:`PropositionReport` whose witness is plain
JSON data that :func:`replay` can re-derive.  Existential statements over
unbounded time are only ever witnessed; when a bounded search finds
nothing the verdict is ``refuted`` with the search depth attached, except
for the reachability check on Markov groundings, which is exact.

Time conventions follow :mod:`capitalsim.core`: an event ``(a, o')`` of a
history at global time ``t`` pairs the action taken at ``t`` with the
observation emitted at ``t + 1``.
"""

from __future__ import annotations

import copy
import hashlib
import json
from collections.abc import Callable
from dataclasses import asdict, dataclass, field

from .agents import PartitionAgent, RandomAgent
from .core import BudgetExceeded, CapitalError, History, UniformPolicy
from .groundings.base import GroundingSpec
from .realizable import DEFAULT_NODE_CAP, history_probability
from .rng import GENERATOR_ID, Purpose, derive_seed
from .simulation import Simulation
from .units import Ledger, Partition, Partitioning, UnitRegistry, check_partitioning

SCHEMA_ID = "capitalsim.props/1"

TITLES = {
    "P1": "rollout log conforms to history semantics",
    "P2": "rewards are whole cent counts",
    "P3": "one observation and one action per alive unit",
    "P4": "an action appears that was absent earlier",
    "P5": "availability differs between observations",
    "P6": "spawned units start on the parent's next observation",
    "P7": "some transition rules out returning to its source",
    "P8": "units split into disjoint, complete partitions",
    "P9": "an observation appears that was absent earlier",
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "generator", "grounding", "agent", "seed", "t_max", "horizon", "reports"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "generator": {"type": "string"},
        "grounding": {"type": "string"},
        "agent": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "t_max": {"type": "integer", "minimum": 0},
        "horizon": {"type": "integer", "minimum": 0},
        "reports": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["prop", "title", "status", "basis", "depth", "exact", "witness", "detail"],
                "properties": {
                    "prop": {"enum": list(TITLES)},
                    "title": {"type": "string"},
                    "status": {"enum": ["witnessed", "refuted", "inconclusive", "error"]},
                    "basis": {"enum": ["formula", "conformance", "scan"]},
                    "depth": {"type": ["integer", "null"]},
                    "exact": {"type": "boolean"},
                    "witness": {"type": "object"},
                    "detail": {"type": "string"},
                },
            },
        },
    },
}


@dataclass
class PropositionReport:
    prop: str
    status: str
    basis: str = "formula"
    depth: int | None = None
    exact: bool = False
    witness: dict = field(default_factory=dict)
    detail: str = ""

    @property
    def title(self) -> str:
        return TITLES[self.prop]

    def to_dict(self) -> dict:
        d = asdict(self)
        return {
            "prop": d["prop"],
            "title": self.title,
            **{k: d[k] for k in ("status", "basis", "depth", "exact", "witness", "detail")},
        }


@dataclass
class CheckConfig:
    t_max: int = 10
    horizon: int = 20
    seed: int = 0
    episodes: int = 20
    cap: int = DEFAULT_NODE_CAP
    partitioning: str = "single"


def _hist_json(h: History) -> dict:
    return {"origin": h.origin, "birth_time": h.birth_time, "events": h.to_list()}


def _hist_from(d: dict) -> History:
    return History(d["origin"], (), d["birth_time"]).concat([tuple(e) for e in d["events"]])


# -- rollout-based checks --------------------------------------------------


def _agent_factory(agent) -> Callable[[], PartitionAgent]:
    if agent is None:
        return RandomAgent
    if isinstance(agent, PartitionAgent):
        return lambda: copy.deepcopy(agent)
    return agent


def episode_seed(seed: int, episode: int) -> int:
    return derive_seed(seed, Purpose.EPISODE, episode)


def run_episode(
    grounding: GroundingSpec, agent, seed: int, episode: int, horizon: int, partitioning="single"
) -> Simulation:
    make = _agent_factory(agent)
    return Simulation(grounding, make(), episode_seed(seed, episode), partitioning=partitioning).run(horizon)


def _rollout_ref(sim: Simulation, episode: int) -> dict:
    return {"episode": episode, "episode_seed": sim.seed, "horizon": len(sim.trace)}


def check_historical(grounding: GroundingSpec, sim: Simulation, episode: int = 0) -> PropositionReport:
    """Structural conformance: the log is an append-only record of histories,
    and every logged action was available after the logged history."""
    env = grounding.env
    rebuilt: dict[int, History] = {}
    problems = []
    for e in sim.ledger:
        unit = sim.registry[e.unit]
        h = rebuilt.get(e.unit, History(unit.history.origin, (), unit.birth_time))
        if h.t != e.t or h.last_observation != e.obs:
            problems.append(f"unit {e.unit} at t={e.t}: log does not continue its history")
            break
        if e.action not in env.history_actions(h):
            problems.append(f"unit {e.unit} at t={e.t}: action {e.action} was not available")
            break
        rebuilt[e.unit] = h.append(e.action, e.next_obs)
    for uid, h in rebuilt.items():
        if sim.registry[uid].history != h:
            problems.append(f"unit {uid}: stored history differs from the log")
    if not len(sim.ledger):
        return PropositionReport("P1", "inconclusive", "conformance", detail="empty rollout")
    digest = hashlib.sha256("\n".join(sim.ledger.jsonl_lines()).encode()).hexdigest()
    witness = {**_rollout_ref(sim, episode), "ledger_sha256": digest, "entries": len(sim.ledger)}
    if problems:
        return PropositionReport("P1", "refuted", "conformance", witness=witness, detail="; ".join(problems))
    return PropositionReport(
        "P1",
        "witnessed",
        "conformance",
        witness=witness,
        detail="log replays as append-only histories under available actions",
    )


def check_discreteness(grounding: GroundingSpec, sim: Simulation, episode: int = 0) -> PropositionReport:
    env = grounding.env
    bad = []
    for e in sim.ledger:
        k = e.reward_k
        if isinstance(k, bool) or not isinstance(k, int) or k < 0 or k != env.reward(e.obs, e.action):
            bad.append([e.t, e.unit])
    if not len(sim.ledger):
        return PropositionReport("P2", "inconclusive", "scan", detail="empty rollout")
    witness = {
        **_rollout_ref(sim, episode),
        "entries": len(sim.ledger),
        "total_k": sum(e.reward_k for e in sim.ledger),
        "cent": str(grounding.cent),
    }
    if bad:
        return PropositionReport(
            "P2",
            "refuted",
            "scan",
            witness={**witness, "offending": bad},
            detail=f"{len(bad)} entries are not integer cent counts",
        )
    return PropositionReport(
        "P2", "witnessed", "scan", witness=witness, detail="every logged reward is an integer count of cents"
    )


def check_units_afford(grounding: GroundingSpec, sim: Simulation, episode: int = 0) -> PropositionReport:
    """Per step, one observation and one action per alive unit; for
    proportional groundings also ``m_t = k * (endowment + G_{t-1})``."""
    by_t: dict[int, list[int]] = {}
    for e in sim.ledger:
        by_t.setdefault(e.t, []).append(e.unit)
    ms, gs = [], []
    k = grounding.proportional
    g_prev = 0
    for rec in sim.trace:
        m = rec.m
        logged = by_t.get(rec.t, [])
        ms.append(m)
        gs.append(g_prev)
        if not (len(rec.joint_obs) == len(rec.joint_action) == m == len(logged)) or list(rec.units) != logged:
            return PropositionReport(
                "P3",
                "refuted",
                witness={**_rollout_ref(sim, episode), "t": rec.t},
                detail=f"vector lengths disagree with the population at t={rec.t}",
            )
        if k is not None and m != k * (grounding.endowment + g_prev):
            return PropositionReport(
                "P3",
                "refuted",
                witness={**_rollout_ref(sim, episode), "t": rec.t, "m": m, "G": g_prev},
                detail=f"m_t != k * G at t={rec.t}",
            )
        g_prev += sum(e.reward_k for e in sim.ledger if e.t == rec.t)
    if not ms:
        return PropositionReport("P3", "inconclusive", detail="empty rollout")
    witness = {**_rollout_ref(sim, episode), "m": ms}
    detail = "|joint obs| = |joint action| = alive units at every step"
    if k is not None:
        witness.update({"k": k, "endowment": str(grounding.endowment), "G_before": gs})
        detail += f"; m_t = {k} * (endowment + G_(t-1))"
    return PropositionReport("P3", "witnessed", witness=witness, detail=detail)


def generation_violations(ledger: Ledger, registry: UnitRegistry | None = None) -> tuple[list[dict], int]:
    """Spawn events whose child did not start on the parent's next observation."""
    first_obs: dict[int, tuple[int, int]] = {}
    for e in ledger:
        first_obs.setdefault(e.unit, (e.t, e.obs))
    bad, n_events = [], 0
    for e in ledger:
        for child in e.spawned:
            n_events += 1
            seen = first_obs.get(child)
            origin = (
                registry[child].history.origin if registry is not None and child in registry.units else None
            )
            if seen is not None and (seen[1] != e.next_obs or seen[0] != e.t + 1):
                bad.append(
                    {"parent": e.unit, "child": child, "t": e.t, "expected": e.next_obs, "observed": seen[1]}
                )
            elif origin is not None and origin != e.next_obs:
                bad.append(
                    {"parent": e.unit, "child": child, "t": e.t, "expected": e.next_obs, "observed": origin}
                )
    return bad, n_events


def check_generation(
    grounding: GroundingSpec, sim: Simulation | Ledger, episode: int = 0
) -> PropositionReport:
    if isinstance(sim, Simulation):
        ledger, registry, ref = sim.ledger, sim.registry, _rollout_ref(sim, episode)
    else:
        ledger, registry, ref = sim, None, {}
    bad, n = generation_violations(ledger, registry)
    if bad:
        return PropositionReport(
            "P6",
            "refuted",
            witness={**ref, "offending": bad},
            detail=f"{len(bad)} spawned units did not observe the parent's next observation",
        )
    if n == 0:
        return PropositionReport("P6", "inconclusive", witness=ref, detail="no unit was generated")
    events = [[e.t, e.unit, e.next_obs, list(e.spawned)] for e in ledger if e.spawned]
    return PropositionReport(
        "P6",
        "witnessed",
        witness={**ref, "spawn_events": events[:50], "n_spawned": n},
        detail=f"{n} generated units all began on their parent's next observation",
    )


def check_partition_log(grounding: GroundingSpec, sim: Simulation, episode: int = 0) -> PropositionReport:
    for rec in sim.trace:
        report = check_partitioning(
            Partitioning([Partition(pid, set(m)) for pid, m in rec.partitions]), rec.units
        )
        if not report.valid:
            return PropositionReport(
                "P8",
                "refuted",
                "scan",
                witness={
                    **_rollout_ref(sim, episode),
                    "t": rec.t,
                    "overlaps": {str(k): v for k, v in report.overlaps.items()},
                    "uncovered": report.uncovered,
                    "empty": report.empty,
                },
                detail=f"invalid partitioning at t={rec.t}",
            )
    if not sim.trace:
        return PropositionReport("P8", "inconclusive", "scan", detail="empty rollout")
    last = sim.trace[-1]
    agency = {str(pid): len(m) for pid, m in last.partitions}
    return PropositionReport(
        "P8",
        "witnessed",
        "scan",
        witness={**_rollout_ref(sim, episode), "steps": len(sim.trace), "agency_at_last_step": agency},
        detail="a complete, disjoint partitioning held at every step; agency sums to the population",
    )


# -- enumeration-based checks ----------------------------------------------


def _layers(grounding: GroundingSpec, t_max: int, cap: int):
    """Realizable states under the full-support policy, by global time.

    A state is a dynamics context at a time; each keeps the first history
    (in a deterministic order) that reaches it.  Returns ``layers[t] =
    {(context, t): history}`` for ``t = 0 .. t_max``.
    """
    env = grounding.env
    layer = {}
    for o in sorted(set(grounding.initial)):
        h = History(o, (), 0)
        layer.setdefault((env.context_key(h), 0), h)
    layers = [layer]
    total = len(layer)
    for t in range(t_max):
        nxt = {}
        for key in sorted(layer, key=repr):
            h = layer[key]
            for a in sorted(env.history_actions(h)):
                for o2 in env.transition(h, a).positive_support():
                    h2 = h.append(a, o2)
                    nxt.setdefault((env.context_key(h2), t + 1), h2)
        total += len(nxt)
        if total > cap:
            raise BudgetExceeded(f"state search exceeds cap of {cap}")
        layers.append(nxt)
        layer = nxt
    return layers


def _pairs_by_time(grounding: GroundingSpec, t_max: int, cap: int) -> list[dict]:
    """``pairs[t][(o, a)]`` = a realizable history whose event at ``t`` takes
    ``a`` from ``o``, for ``t = 0 .. t_max - 1``."""
    env = grounding.env
    layers = _layers(grounding, t_max, cap)
    pairs = []
    for t in range(t_max):
        found = {}
        for key in sorted(layers[t], key=repr):
            h = layers[t][key]
            for a in sorted(env.history_actions(h)):
                o2 = env.transition(h, a).positive_support()[0]
                found.setdefault((h.last_observation, a), h.append(a, o2))
        pairs.append(found)
    return pairs


def _interface_actions(env, t: int) -> set[int]:
    out = set()
    for o in env.active_observations(t):
        out |= env.available_actions(o, t)
    return out


def _interface_observations(env, t: int) -> set[int]:
    return {o for o in env.active_observations(t) if env.available_actions(o, t)}


def _time_dependence(
    grounding: GroundingSpec, t_max: int, cap: int, prop: str, index: int, interface
) -> PropositionReport:
    if t_max < 2:
        return PropositionReport(
            prop, "inconclusive", depth=t_max, detail="depth too small to compare two times"
        )
    env = grounding.env
    try:
        pairs = _pairs_by_time(grounding, t_max, cap)
    except BudgetExceeded as exc:
        return PropositionReport(prop, "inconclusive", depth=t_max, detail=str(exc))
    what = "action" if index == 1 else "observation"
    for tau in range(1, t_max):
        for pair in sorted(pairs[tau]):
            item = pair[index]
            absent = [t for t in range(tau) if item not in interface(env, t)]
            if absent:
                t = absent[-1]
                h = pairs[tau][pair]
                return PropositionReport(
                    prop,
                    "witnessed",
                    depth=t_max,
                    exact=True,
                    witness={"t": t, "tau": tau, what: item, "history": _hist_json(h)},
                    detail=f"{what} {item} does not exist at t={t} "
                    f"and occurs in a realizable history at tau={tau}",
                )
    return PropositionReport(
        prop,
        "refuted",
        depth=t_max,
        detail=f"no {what} appears that was absent earlier, within depth {t_max}",
    )


def check_action_time_dependence(
    grounding: GroundingSpec, t_max: int, cap: int = DEFAULT_NODE_CAP
) -> PropositionReport:
    return _time_dependence(grounding, t_max, cap, "P4", 1, _interface_actions)


def check_observation_time_dependence(
    grounding: GroundingSpec, t_max: int, cap: int = DEFAULT_NODE_CAP
) -> PropositionReport:
    return _time_dependence(grounding, t_max, cap, "P9", 0, _interface_observations)


def check_action_observation_dependence(grounding: GroundingSpec) -> PropositionReport:
    """Availability is piecewise constant between epoch boundaries, so a
    scan of the boundaries covers all times."""
    env = grounding.env
    for t in env.epoch_boundaries():
        active = env.active_observations(t)
        for o in active:
            for o2 in active:
                if o == o2:
                    continue
                missing = sorted(env.available_actions(o, t) - env.available_actions(o2, t))
                if missing:
                    return PropositionReport(
                        "P5",
                        "witnessed",
                        exact=True,
                        witness={"t": t, "obs": o, "other_obs": o2, "action": missing[0]},
                        detail=f"action {missing[0]} is available at {o} but not at {o2} (t={t})",
                    )
    return PropositionReport(
        "P5", "refuted", exact=True, detail="every active observation affords the same actions"
    )


def _markov_returns(env, target: int, start_obs: int, start_t: int, horizon_t: int) -> bool:
    """Whether ``target`` is emitted again on some path from ``(start_obs, start_t)``.

    Times are clamped at ``horizon_t`` after which the dynamics are stationary.
    """
    seen = set()
    stack = [(start_obs, min(start_t, horizon_t))]
    while stack:
        o, t = stack.pop()
        if (o, t) in seen:
            continue
        seen.add((o, t))
        for a in env.available_actions(o, t):
            for o2 in env.row(env.context_key(History(o, (), t)), a, t).positive_support():
                if o2 == target:
                    return True
                stack.append((o2, min(t + 1, horizon_t)))
    return False


def _markov_states(grounding: GroundingSpec, horizon_t: int) -> dict:
    """Realizable ``(obs, clamped time)`` states with a first history reaching each."""
    env = grounding.env
    found = {}
    frontier = []
    for o in sorted(set(grounding.initial)):
        found.setdefault((o, 0), History(o, (), 0))
        frontier.append((o, 0))
    while frontier:
        nxt = []
        for state in frontier:
            h = found[state]
            for a in sorted(env.history_actions(h)):
                for o2 in env.transition(h, a).positive_support():
                    s2 = (o2, min(h.t + 1, horizon_t))
                    if s2 not in found:
                        found[s2] = h.append(a, o2)
                        nxt.append(s2)
        frontier = sorted(nxt)
    return found


def check_nonergodicity(
    grounding: GroundingSpec, t_max: int, cap: int = DEFAULT_NODE_CAP
) -> PropositionReport:
    """An observation ``o``, action ``a`` and landing ``o'`` after which ``o``
    can never be emitted again, under any policy."""
    env = grounding.env
    if env.is_markov:
        horizon_t = max(env.epoch_boundaries())
        states = _markov_states(grounding, horizon_t)
        for o, s in sorted(states):
            h = states[(o, s)]
            for a in sorted(env.history_actions(h)):
                for o2 in env.transition(h, a).positive_support():
                    if not _markov_returns(env, o, o2, h.t + 1, horizon_t):
                        return PropositionReport(
                            "P7",
                            "witnessed",
                            depth=t_max,
                            exact=True,
                            witness={"obs": o, "action": a, "next_obs": o2, "history": _hist_json(h)},
                            detail=f"after taking {a} at {o} and landing on {o2}, "
                            f"{o} is never observed again",
                        )
        return PropositionReport(
            "P7",
            "refuted",
            depth=t_max,
            exact=True,
            detail="every observation stays reachable after every transition (closure over the state graph)",
        )

    try:
        layers = _layers(grounding, t_max, cap)
    except BudgetExceeded as exc:
        return PropositionReport("P7", "inconclusive", depth=t_max, detail=str(exc))
    candidate = None
    for t in range(t_max // 2 + 1):
        for key in sorted(layers[t], key=repr):
            h = layers[t][key]
            o = h.last_observation
            for a in sorted(env.history_actions(h)):
                for o2 in env.transition(h, a).positive_support():
                    if not _bounded_returns(env, o, h.append(a, o2), t_max - t - 1, cap):
                        candidate = {
                            "obs": o,
                            "action": a,
                            "next_obs": o2,
                            "history": _hist_json(h),
                            "lookahead": t_max - t - 1,
                        }
                        break
                if candidate:
                    break
            if candidate:
                break
        if candidate:
            break
    if candidate:
        return PropositionReport(
            "P7",
            "inconclusive",
            depth=t_max,
            witness=candidate,
            detail=f"history-keyed dynamics: {candidate['obs']} not seen again within the search depth",
        )
    return PropositionReport(
        "P7",
        "refuted",
        depth=t_max,
        detail=f"every observation recurs within depth {t_max} after every transition",
    )


def _bounded_returns(env, target: int, h: History, steps: int, cap: int) -> bool:
    frontier = {env.context_key(h): h}
    total = 0
    for _ in range(max(steps, 0)):
        nxt = {}
        for key in sorted(frontier, key=repr):
            cur = frontier[key]
            for a in sorted(env.history_actions(cur)):
                for o2 in env.transition(cur, a).positive_support():
                    if o2 == target:
                        return True
                    h2 = cur.append(a, o2)
                    nxt.setdefault(env.context_key(h2), h2)
        total += len(nxt)
        if total > cap:
            raise BudgetExceeded(f"lookahead exceeds cap of {cap}")
        frontier = nxt
    return False


# -- driver ----------------------------------------------------------------


def _guard(prop: str, fn, *args) -> PropositionReport:
    try:
        return fn(*args)
    except CapitalError as exc:
        return PropositionReport(prop, "error", detail=f"{type(exc).__name__}: {exc}")


def check_all(
    grounding: GroundingSpec, agent=None, config: CheckConfig | None = None
) -> list[PropositionReport]:
    """Run every checker.  Checker failures become ``error`` reports."""
    config = config or CheckConfig()
    try:
        sim = run_episode(grounding, agent, config.seed, 0, config.horizon, config.partitioning)
    except CapitalError as exc:
        err = f"rollout failed: {type(exc).__name__}: {exc}"
        sim = None
    reports = []
    rollout_checks = {
        "P1": check_historical,
        "P2": check_discreteness,
        "P3": check_units_afford,
        "P8": check_partition_log,
    }
    for prop in ("P1", "P2", "P3"):
        reports.append(
            _guard(prop, rollout_checks[prop], grounding, sim, 0)
            if sim
            else PropositionReport(prop, "error", detail=err)
        )
    reports.append(_guard("P4", check_action_time_dependence, grounding, config.t_max, config.cap))
    reports.append(_guard("P5", check_action_observation_dependence, grounding))
    reports.append(
        _guard("P6", _search_generation, grounding, agent, config)
        if sim
        else PropositionReport("P6", "error", detail=err)
    )
    reports.append(_guard("P7", check_nonergodicity, grounding, config.t_max, config.cap))
    reports.append(
        _guard("P8", check_partition_log, grounding, sim, 0)
        if sim
        else PropositionReport("P8", "error", detail=err)
    )
    reports.append(_guard("P9", check_observation_time_dependence, grounding, config.t_max, config.cap))
    return reports


def _search_generation(grounding, agent, config: CheckConfig) -> PropositionReport:
    """First episode (of ``config.episodes``) in which a unit is generated."""
    for ep in range(config.episodes):
        sim = run_episode(grounding, agent, config.seed, ep, config.horizon, config.partitioning)
        report = check_generation(grounding, sim, ep)
        if report.status != "inconclusive":
            return report
    report.depth = config.episodes
    report.detail = f"no unit was generated in {config.episodes} episodes of {config.horizon} steps"
    return report


def document(grounding: GroundingSpec, reports, agent_name: str, config: CheckConfig) -> dict:
    return {
        "schema": SCHEMA_ID,
        "generator": GENERATOR_ID,
        "grounding": grounding.name,
        "agent": agent_name,
        "seed": config.seed,
        "t_max": config.t_max,
        "horizon": config.horizon,
        "reports": [r.to_dict() for r in reports],
    }


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


# -- replay ----------------------------------------------------------------


def replay(
    report: PropositionReport, grounding: GroundingSpec, agent=None, config: CheckConfig | None = None
) -> bool:
    """Re-derive a witnessed or refuted report's evidence from scratch.

    Rollout-based reports are re-simulated from the recorded episode seed;
    enumeration-based witnesses are re-verified against the formula with
    exact arithmetic, then recomputed.
    """
    config = config or CheckConfig()
    env = grounding.env
    w = report.witness
    prop = report.prop
    if prop in ("P1", "P2", "P3", "P6", "P8") and "episode" in w:
        sim = run_episode(grounding, agent, config.seed, w["episode"], w["horizon"], config.partitioning)
        if sim.seed != w["episode_seed"]:
            return False
        fn = {
            "P1": check_historical,
            "P2": check_discreteness,
            "P3": check_units_afford,
            "P6": check_generation,
            "P8": check_partition_log,
        }[prop]
        again = fn(grounding, sim, w["episode"])
        return again.status == report.status and again.witness == w
    if prop in ("P4", "P9") and report.status == "witnessed":
        h = _hist_from(w["history"])
        if history_probability(UniformPolicy(env), env, h) == 0:
            return False
        idx = w["tau"] - h.birth_time
        if not 0 <= idx < len(h):
            return False
        obs_at = h.observations()[idx]
        ev = h.events[idx]
        if prop == "P4":
            ok = ev.action == w["action"] and w["action"] not in _interface_actions(env, w["t"])
        else:
            ok = obs_at == w["observation"] and w["observation"] not in _interface_observations(env, w["t"])
        fn = check_action_time_dependence if prop == "P4" else check_observation_time_dependence
        return ok and w["t"] < w["tau"] and fn(grounding, report.depth, config.cap).witness == w
    if prop == "P5" and report.status == "witnessed":
        t = w["t"]
        return w["action"] in env.available_actions(w["obs"], t) and w["action"] not in env.available_actions(
            w["other_obs"], t
        )
    if prop == "P7" and report.status == "witnessed":
        h = _hist_from(w["history"])
        if history_probability(UniformPolicy(env), env, h) == 0 or h.last_observation != w["obs"]:
            return False
        if env.prob(h, w["action"], w["next_obs"]) == 0:
            return False
        return not _markov_returns(env, w["obs"], w["next_obs"], h.t + 1, max(env.epoch_boundaries()))
    fns = {
        "P4": lambda: check_action_time_dependence(grounding, report.depth, config.cap),
        "P5": lambda: check_action_observation_dependence(grounding),
        "P7": lambda: check_nonergodicity(grounding, report.depth, config.cap),
        "P9": lambda: check_observation_time_dependence(grounding, report.depth, config.cap),
    }
    if prop in fns:
        return fns[prop]().to_dict() == report.to_dict()
    return False
