"""Line charts of a simulated run: phase errors and coupling strengths."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from kuracluster.integrate import Trajectory  # noqa: E402

_RC = {
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.fontsize": 7,
    "legend.frameon": False,
    "svg.hashsalt": "kuracluster",   # stable element ids -> reproducible files
    "svg.fonttype": "none",
}
FIGSIZE = (6.4, 3.2)


def _save(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_errors(traj: Trajectory, path: Path) -> None:
    """``|e_i|`` against time, one line per non-representative node."""
    e = np.abs(traj.e)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=FIGSIZE, constrained_layout=True)
        for col, node in enumerate(traj.partition.non_representatives):
            ax.plot(traj.t, e[:, col], lw=1.0, label=f"$|e_{{{node + 1}}}|$")
        ax.set_xlabel("$t$")
        ax.set_ylabel("$|e_i|$")
        ax.set_xlim(traj.t[0], traj.t[-1] if len(traj.t) > 1 else traj.t[0] + 1)
        if e.shape[1]:
            ax.legend(ncol=min(4, e.shape[1]), loc="upper right")
        _save(fig, path)


def plot_couplings(traj: Trajectory, path: Path, k_intra_star: float | None = None) -> None:
    """``k_ij`` against time; intra-cluster edges solid blue, inter-cluster edges grey."""
    p = traj.partition
    targets, sources = traj.graph.edge_arrays()
    intra = p.labels[targets] == p.labels[sources]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=FIGSIZE, constrained_layout=True)
        for q in np.nonzero(~intra)[0]:
            ax.plot(traj.t, traj.k[:, q], color="0.65", lw=0.6)
        for q in np.nonzero(intra)[0]:
            ax.plot(traj.t, traj.k[:, q], color="tab:blue", lw=0.9)
        if k_intra_star is not None:
            ax.axhline(k_intra_star, color="k", ls="--", lw=0.7)
        ax.plot([], [], color="tab:blue", label="intra-cluster")
        ax.plot([], [], color="0.65", label="inter-cluster")
        ax.set_xlabel("$t$")
        ax.set_ylabel("$k_{ij}$")
        ax.set_xlim(traj.t[0], traj.t[-1] if len(traj.t) > 1 else traj.t[0] + 1)
        ax.legend(loc="upper right")
        _save(fig, path)
