"""Figure rendering for the experiment drivers.

Each driver's CSV output gets a companion PNG in the same directory;
the CSV remains the data contract, the figures are for eyeballing.
"""

from __future__ import annotations

import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = [
    "plot_fig5",
    "plot_trajectory",
    "plot_sample_batches",
    "plot_trotter_grid",
]


def _read_csv(path):
    with open(path) as fh:
        reader = csv.DictReader(fh)
        return list(reader)


def plot_fig5(summary_csv, out_png):
    rows = _read_csv(summary_csv)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for variant, color in (("numeric", "C0"), ("weak", "C1"), ("strong", "C2")):
        pts = [(float(r["x_scale"]), float(r["mean_infidelity"]),
                float(r["std_error"])) for r in rows if r["variant"] == variant]
        pts.sort()
        x = [p[0] for p in pts]
        y = [max(p[1], 1e-18) for p in pts]
        e = [p[2] for p in pts]
        ax.errorbar(x, y, yerr=e, marker="o", ms=3, color=color, label=variant)
    ax.set_yscale("log")
    ax.set_xlabel("hub coupling scale x")
    ax.set_ylabel("mean infidelity")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_trajectory(traj_csv, out_png, exact_energy_per_spin=None):
    rows = _read_csv(traj_csv)
    t = [float(r["time"]) for r in rows]
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.2))
    energies = [(ti, float(r["energy_per_spin"])) for ti, r in zip(t, rows)
                if r["energy_per_spin"]]
    if energies:
        axes[0].plot([p[0] for p in energies], [p[1] for p in energies], "-",
                     lw=1.2, color="C0")
        if exact_energy_per_spin is not None:
            axes[0].axhline(exact_energy_per_spin, color="k", ls="--", lw=0.8,
                            label="exact")
            axes[0].legend(frameon=False, fontsize=8)
    axes[0].set_xlabel("time")
    axes[0].set_ylabel("energy per spin")
    for col, style, label in (("sx", "-", "dense"),
                              ("sx_sampled", ".", "sampled"),
                              ("sx_ref", "--", "exact Trotter")):
        pts = [(ti, float(r[col])) for ti, r in zip(t, rows) if r.get(col)]
        if pts:
            axes[1].plot([p[0] for p in pts], [p[1] for p in pts], style,
                         lw=1.0, ms=3, label=label)
    axes[1].set_xlabel("time")
    axes[1].set_ylabel("transverse magnetization")
    axes[1].legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_sample_batches(batches_csv, out_png):
    rows = _read_csv(batches_csv)
    chains = sorted({int(r["chain"]) for r in rows})
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    for c in chains:
        vals = [float(r["value"]) for r in rows if int(r["chain"]) == c]
        ax.plot(vals, marker=".", ms=3, lw=0.6, label=f"chain {c}")
    ax.set_xlabel("batch")
    ax.set_ylabel("batch mean")
    if len(chains) <= 8:
        ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_trotter_grid(state, out_png):
    """Heatmap of the hidden-visible and hidden-hidden couplings of an
    unrestricted network (real parts)."""
    fig, axes = plt.subplots(1, 2, figsize=(7.5, 3.2))
    im0 = axes[0].imshow(state.W.real, aspect="auto", cmap="viridis")
    axes[0].set_title("W (hidden x visible)", fontsize=9)
    fig.colorbar(im0, ax=axes[0], shrink=0.85)
    im1 = axes[1].imshow(state.X.real, aspect="auto", cmap="viridis")
    axes[1].set_title("X (hidden x hidden)", fontsize=9)
    fig.colorbar(im1, ax=axes[1], shrink=0.85)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
