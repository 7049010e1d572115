"""Render figures from a run report.

CSV remains the interchange format; figures are an optional convenience for
eyeballing a run.  Everything here reads the JSON report produced by
``run_experiment`` and writes PNG files next to it.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")  # headless; must precede pyplot
import matplotlib.pyplot as plt  # noqa: E402


def render_figures(report: dict, prefix: str) -> list:
    """Write diagnostic PNGs for an evolution report; returns the paths."""
    written = []
    monitors = report.get("monitors")
    if monitors and monitors["times"]:
        written.append(_monitor_figure(monitors, f"{prefix}.monitors.png"))
        written.append(_conservation_figure(monitors, f"{prefix}.conservation.png"))
    limits = report.get("limits")
    if limits:
        written.append(_limit_figure(limits, f"{prefix}.limits.png"))
    return written


def _monitor_figure(monitors: dict, path: str) -> str:
    ts = monitors["times"]
    fig, axes = plt.subplots(2, 2, figsize=(10, 7), constrained_layout=True)

    ax = axes[0, 0]
    for s, series in sorted(monitors["moments"].items()):
        ax.plot(ts, series, label=f"s = {s}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("weighted moment")
    ax.legend()

    ax = axes[0, 1]
    for s, series in sorted(monitors["sigma_norms"].items()):
        ax.plot(ts, series, label=f"s = {s}")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("Sigma_s norm")
    ax.legend()

    ax = axes[1, 0]
    ax.plot(ts, monitors["decay_functional"])
    ax.set_xlabel("t")
    ax.set_ylabel(r"$(1+t^2)^{1/4} \max |u|$")

    ax = axes[1, 1]
    ax.plot(ts, monitors["pseudoconformal"])
    ax.set_xlabel("t")
    ax.set_ylabel(r"$\|x u + 2 i t \partial_x u\|$")

    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _conservation_figure(monitors: dict, path: str) -> str:
    ts = monitors["times"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.6), constrained_layout=True)

    mass0 = monitors["mass"][0] or 1.0
    ax1.plot(ts, [abs(m - monitors["mass"][0]) / abs(mass0) for m in monitors["mass"]])
    ax1.set_yscale("symlog", linthresh=1e-16)
    ax1.set_xlabel("t")
    ax1.set_ylabel("relative mass drift")

    e0 = monitors["energy"][0]
    scale = abs(e0) or 1.0
    ax2.plot(ts, [abs(e - e0) / scale for e in monitors["energy"]])
    ax2.set_yscale("symlog", linthresh=1e-16)
    ax2.set_xlabel("t")
    ax2.set_ylabel("relative energy drift")

    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _limit_figure(limits: dict, path: str) -> str:
    ts = [t for t, _ in limits["samples"]]
    vs = [v for _, v in limits["samples"]]
    fig, ax = plt.subplots(figsize=(6, 4), constrained_layout=True)
    ax.plot(ts, vs, "o", label="scaled moment")
    ax.plot(ts, [limits["limit"] + limits["slope"] / t for t in ts],
            "-", label="a + b/t fit")
    ax.axhline(limits["limit"], color="gray", linestyle="--",
               label=f"limit a = {limits['limit']:.6g}")
    ax.set_xlabel("t")
    ax.set_ylabel(f"(x/t)^{2 * limits['s']} moment")
    ax.legend()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
