"""Figures written next to the CSV outputs.

Rendering uses the Agg backend and strips the PNG software tag, so the
same data gives the same bytes.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.fontsize": 8,
    "legend.frameon": False,
}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_metrics(rows: list[dict], path: str | Path) -> Path:
    """Population ``m_t`` and accumulated capital ``G_t`` per episode."""
    series = defaultdict(dict)
    for r in rows:
        series[int(r["episode"])][int(r["t"])] = (int(r["m"]), int(r["G_t"]))
    with plt.rc_context(STYLE):
        fig, (ax_m, ax_g) = plt.subplots(2, 1, sharex=True)
        for ep in sorted(series)[:20]:
            ts = sorted(series[ep])
            ax_m.step(ts, [series[ep][t][0] for t in ts], where="post", lw=1, label=f"episode {ep}")
            ax_g.plot(ts, [series[ep][t][1] for t in ts], lw=1)
        ax_m.set_ylabel("units alive")
        ax_g.set_ylabel("capital (cents)")
        ax_g.set_xlabel("t")
        if len(series) <= 6:
            ax_m.legend(loc="upper left")
        return _save(fig, Path(path))


def plot_entropy(rows: list[dict], path: str | Path) -> Path:
    """Joint next-observation entropy against the sum of unit entropies."""
    joint, marg = defaultdict(dict), defaultdict(dict)
    for r in rows:
        key = int(r["partition"])
        joint[key][int(r["t"])] = float(r["H_joint_bits"])
        marg[key][int(r["t"])] = float(r["marginal_sum_bits"])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for pid in sorted(joint)[:10]:
            ts = sorted(joint[pid])
            (line,) = ax.plot(
                ts, [joint[pid][t] for t in ts], marker=".", lw=1, label=f"joint, partition {pid}"
            )
            ax.plot(
                ts,
                [marg[pid][t] for t in ts],
                ls="--",
                lw=1,
                color=line.get_color(),
                label=f"sum of units, partition {pid}",
            )
        ax.set_xlabel("t")
        ax.set_ylabel("entropy (bits)")
        ax.legend(loc="best")
        return _save(fig, Path(path))
