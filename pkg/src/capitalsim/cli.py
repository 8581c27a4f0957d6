"""``capitalsim`` command line: run, check, entropy, enumerate.

Exit status 0 on success, 2 on configuration, grounding or budget errors.
Proposition refutations are results, not failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .agents import AGENT_KINDS, QAgent, make_agent, parse_rule_table
from .config import PARSERS, ConfigError, RunConfig, build_config, load_config, parse_value
from .core import BudgetExceeded, CapitalError, UniformPolicy
from .entropy import ENTROPY_COLUMNS, entropy_report
from .groundings import resolve
from .propcheck import CheckConfig, check_all, document, dumps, episode_seed
from .realizable import counts_by_length, enumerate_realizable_histories
from .simulation import Simulation
from .units import discounted_return

METRIC_COLUMNS = ("episode", "t", "partition", "m", "agency", "reward_k", "G_t", "pi_U", "episode_return")


def _fmt(x) -> str:
    return f"{float(x):.12g}"


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _load(cfg: RunConfig):
    try:
        grounding = resolve(cfg.grounding)
    except KeyError as exc:
        raise ConfigError(str(exc.args[0])) from None
    except FileNotFoundError:
        raise ConfigError(f"grounding file not found: {cfg.grounding}") from None
    rules = None
    if cfg.agent == "rules":
        path = Path(cfg.rules)
        if not path.is_file():
            raise ConfigError(f"rule table not found: {path}")
        try:
            rules = parse_rule_table(path.read_text())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    agent = make_agent(
        cfg.agent,
        grounding.env,
        cfg.gamma,
        cfg.alpha,
        cfg.epsilon,
        cfg.depth,
        rules,
        grounding.cent,
        cfg.q_init,
    )
    return grounding, agent


def _cent(cfg: RunConfig, grounding) -> Fraction:
    return cfg.cent if cfg.cent is not None else grounding.cent


def metrics_rows(sim: Simulation, episode: int, gamma, cent) -> list[dict]:
    """Per step and partition: population, cumulative capital, and the
    partition's discounted return from that step to the horizon."""
    rewards = sim.ledger.rewards()
    horizon = len(sim.trace) - 1
    reward_at: dict[int, int] = {}
    for e in sim.ledger:
        reward_at[e.t] = reward_at.get(e.t, 0) + e.reward_k
    members = {}
    for e in sim.ledger:
        members.setdefault(e.partition, set()).add(e.unit)
    rows = []
    g = 0
    for rec in sim.trace:
        g += reward_at.get(rec.t, 0)
        for pid, mem in rec.partitions:
            U = members.get(pid, set(mem))
            rows.append(
                {
                    "episode": episode,
                    "t": rec.t,
                    "partition": pid,
                    "m": rec.m,
                    "agency": len(mem),
                    "reward_k": sum(rewards.get((rec.t, u), 0) for u in mem),
                    "G_t": g,
                    "pi_U": _fmt(discounted_return(rewards, U, gamma, rec.t, horizon, cent)),
                    "episode_return": _fmt(discounted_return(rewards, U, gamma, 0, horizon, cent)),
                }
            )
    return rows


def cmd_run(cfg: RunConfig) -> int:
    cfg.validate()
    grounding, agent = _load(cfg)
    cent = _cent(cfg, grounding)
    out = Path(cfg.out)
    ledger_lines, rows = [], []
    for ep in range(cfg.episodes):
        sim = Simulation(grounding, agent, episode_seed(cfg.seed, ep), partitioning=cfg.partitioning)
        sim.run(cfg.horizon)
        ledger_lines.extend(sim.ledger.jsonl_lines(episode=ep))
        rows.extend(metrics_rows(sim, ep, agent.gamma, cent))
    _write(out / "ledger.jsonl", "".join(line + "\n" for line in ledger_lines))
    _write(out / "metrics.csv", _csv_text(METRIC_COLUMNS, rows))
    if isinstance(agent, QAgent):
        _write(out / "qtable.csv", agent.export_csv())
    if cfg.figures and rows:
        from .plotting import plot_metrics

        plot_metrics(rows, out / "metrics.png")
    total = sum(int(r["reward_k"]) for r in rows)
    print(
        f"run: {grounding.name}, {cfg.episodes} episode(s) x {cfg.horizon} steps, "
        f"{len(ledger_lines)} ledger lines, {total} cents earned -> {out}"
    )
    return 0


def cmd_check(cfg: RunConfig) -> int:
    cfg.validate()
    grounding, agent = _load(cfg)
    check_cfg = CheckConfig(cfg.tmax, cfg.horizon, cfg.seed, max(cfg.episodes, 1), cfg.cap, cfg.partitioning)
    reports = check_all(grounding, agent, check_cfg)
    doc = document(grounding, reports, cfg.agent, check_cfg)
    _write(Path(cfg.out) / "props.json", dumps(doc))
    for r in reports:
        if r.exact:
            depth = " (exact)"
        else:
            depth = "" if r.depth is None else f" (depth {r.depth})"
        print(f"{r.prop}  {r.status:<12} {r.title}{depth}")
    crashed = [r.prop for r in reports if r.status == "error"]
    if crashed:
        for r in reports:
            if r.status == "error":
                print(f"error: {r.prop}: {r.detail}", file=sys.stderr)
        return 1
    return 0


def cmd_entropy(cfg: RunConfig) -> int:
    """One episode; before each step, the entropy of every partition's
    joint next observation."""
    cfg.validate()
    grounding, agent = _load(cfg)
    sim = Simulation(grounding, agent, episode_seed(cfg.seed, 0), partitioning=cfg.partitioning)
    rows = []
    for _ in range(cfg.horizon):
        for part in sim.partitioning.partitions:
            h_U = sim.enlarged_history(part)
            if not h_U.units:
                continue
            rep = entropy_report(
                sim.agents[part.partition_id],
                grounding.env,
                h_U,
                part.partition_id,
                cfg.cap,
                cfg.n_mc,
                cfg.seed,
            )
            rows.extend(rep.rows())
        sim.step()
    out = Path(cfg.out)
    _write(out / "entropy.csv", _csv_text(ENTROPY_COLUMNS, rows))
    if cfg.figures and rows:
        from .plotting import plot_entropy

        plot_entropy(rows, out / "entropy.png")
    print(f"entropy: {grounding.name}, {cfg.horizon} steps, {len(rows)} rows -> {out / 'entropy.csv'}")
    return 0


def cmd_enumerate(cfg: RunConfig, listing: bool = False) -> int:
    """Realizable histories from the first initial observation, by length.

    Realizability does not depend on which full-support policy is used, so
    the uniform policy stands in for all of them.
    """
    cfg.validate(need_horizon=False, need_seed=False)
    grounding, _ = _load(cfg)
    env = grounding.env
    origin = grounding.initial[0]
    hs = enumerate_realizable_histories(UniformPolicy(env), env, cfg.tmax, origin, 0, cfg.cap)
    print("length,count")
    for n, c in counts_by_length(hs).items():
        print(f"{n},{c}")
    print(f"total,{len(hs)}")
    if listing:
        for h in sorted(hs, key=lambda h: (len(h), h.to_list())):
            print(json.dumps({"origin": h.origin, "events": h.to_list()}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value config file; command-line flags win")
    common.add_argument("--grounding", help="builtin name or grounding file")
    common.add_argument("--agent", choices=AGENT_KINDS)
    common.add_argument("--gamma", help="discount in [0, 1], decimal or fraction")
    common.add_argument("--alpha", help="Q-learning step size")
    common.add_argument("--epsilon", help="exploration rate")
    common.add_argument("--depth", help="Q-table history depth")
    common.add_argument("--q-init", dest="q_init", help="initial Q-table value (optimistic exploration)")
    common.add_argument("--rules", help="rule table file for the rules agent")
    common.add_argument("--horizon", help="steps per episode")
    common.add_argument("--episodes", help="number of episodes")
    common.add_argument("--seed", help="master seed (required)")
    common.add_argument("--cent", help="value of one cent used in reported returns")
    common.add_argument("--out", help="output directory")
    common.add_argument("--partitioning", choices=("single", "singleton"))
    common.add_argument("--tmax", help="enumeration depth")
    common.add_argument("--cap", help="node cap for exact enumeration")
    common.add_argument("--n-mc", dest="n_mc", help="Monte Carlo samples when enumeration is too large")
    common.add_argument(
        "--no-figures", dest="figures", action="store_const", const="false", help="skip the PNG figures"
    )

    parser = argparse.ArgumentParser(prog="capitalsim", description="Seeded simulations of units of capital.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate episodes; write ledger.jsonl and metrics.csv")
    sub.add_parser("check", parents=[common], help="check the propositions; write props.json")
    sub.add_parser("entropy", parents=[common], help="entropy per step; write entropy.csv")
    enum = sub.add_parser("enumerate", parents=[common], help="count realizable histories by length")
    enum.add_argument("--list", action="store_true", help="also print every history")
    return parser


# every config key doubles as a flag
FLAG_KEYS = tuple(PARSERS)


def config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = load_config(args.config) if args.config else {}
    overrides = {}
    for key in FLAG_KEYS:
        raw = getattr(args, key, None)
        if raw is not None:
            overrides[key] = parse_value(key, raw)
    return build_config(file_values, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "check":
            return cmd_check(cfg)
        if args.command == "entropy":
            return cmd_entropy(cfg)
        return cmd_enumerate(cfg, args.list)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return 2
    except (CapitalError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
