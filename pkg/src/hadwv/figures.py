"""Figure rendering for experiment reports.

Figures are PNG companions to the CSV outputs: convergence traces, sweep
curves, cost bars and programming-error histograms. All rendering goes
through the Agg backend so it works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_COLORS = {
    "cwsc": "tab:gray",
    "multiread": "tab:orange",
    "hdpv": "tab:blue",
    "harp": "tab:green",
}

_LABELS = {
    "cwsc": "one-hot compare (CW-SC)",
    "multiread": "multi-read averaging",
    "hdpv": "Hadamard parallel verify",
    "harp": "Hadamard compare-only",
}

_DPI = 150


def _style(scheme: str) -> dict:
    return {"color": _COLORS.get(scheme, "tab:red"), "label": _LABELS.get(scheme, scheme)}


def _mean_trace(results) -> tuple[np.ndarray, np.ndarray]:
    """Mean |cell error| per iteration across trials (ragged lengths ok)."""
    longest = max(len(r.trace) for r in results)
    sums = np.zeros(longest)
    counts = np.zeros(longest)
    for r in results:
        errs = [t.mean_abs_cell_error_lsb for t in r.trace]
        # A finished run holds its final error for the remaining iterations.
        errs = errs + [errs[-1]] * (longest - len(errs)) if errs else [0.0] * longest
        sums += np.asarray(errs)
        counts += 1
    return np.arange(1, longest + 1), sums / np.maximum(counts, 1)


def render_convergence(out_dir: Path, results_by_scheme: dict) -> list[Path]:
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme, results in results_by_scheme.items():
        iters, errs = _mean_trace(results)
        ax.plot(iters, errs, **_style(scheme))
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean |cell error| (LSB)")
    ax.set_title("Write-verify convergence")
    ax.legend()
    ax.grid(alpha=0.3)
    path = out_dir / "fig_convergence.png"
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return [path]


def render_sweep(out_dir: Path, rows, grid_param: str) -> list[Path]:
    schemes = sorted({r.scheme for r in rows}, key=str)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    for scheme in schemes:
        cells = [r for r in rows if r.scheme == scheme]
        xs = [r.grid_value for r in cells]
        axes[0].errorbar(
            xs,
            [r.mean_rms_weight_lsb for r in cells],
            yerr=[r.std_rms_weight_lsb for r in cells],
            marker="o",
            capsize=3,
            **_style(scheme),
        )
        axes[1].errorbar(
            xs,
            [r.mean_iterations for r in cells],
            yerr=[r.std_iterations for r in cells],
            marker="o",
            capsize=3,
            **_style(scheme),
        )
    axes[0].set_ylabel("RMS weight error (LSB)")
    axes[1].set_ylabel("iterations")
    for ax in axes:
        ax.set_xlabel(grid_param)
        ax.grid(alpha=0.3)
    axes[0].legend(fontsize=8)
    path = out_dir / "fig_sweep.png"
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return [path]


def render_cost(out_dir: Path, rows) -> list[Path]:
    cells = [r for r in rows if r.grid_value in (None, rows[0].grid_value)]
    schemes = [r.scheme for r in cells]
    x = np.arange(len(schemes))
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    colors = [_COLORS.get(s, "tab:red") for s in schemes]
    axes[0].bar(x, [r.mean_latency_ns / 1e3 for r in cells], color=colors)
    axes[0].set_ylabel("mean latency (us)")
    axes[1].bar(x, [r.mean_energy_pj / 1e3 for r in cells], color=colors)
    axes[1].set_ylabel("mean energy (nJ)")
    for ax in axes:
        ax.set_xticks(x)
        ax.set_xticklabels(schemes, rotation=20)
        ax.grid(alpha=0.3, axis="y")
    path = out_dir / "fig_cost.png"
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return [path]


def render_program_tensor(out_dir: Path, program) -> list[Path]:
    errors = np.concatenate([r.per_weight_error_lsb for r in program.results])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(errors, bins=41, color="tab:blue", alpha=0.8)
    ax.set_xlabel("weight error (LSB)")
    ax.set_ylabel("count")
    ax.set_title("Programmed weight error distribution")
    ax.grid(alpha=0.3)
    path = out_dir / "fig_error_hist.png"
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return [path]


def render_experiment(out_dir: Path, spec, rows, results) -> list[Path]:
    """Dispatch to the figure set matching the experiment kind."""
    from .experiments import AVERAGING_COMPARE, CONVERGENCE

    paths: list[Path] = []
    if spec.experiment == CONVERGENCE:
        paths += render_convergence(out_dir, {s: results[(0, s)] for s in spec.schemes})
        paths += render_cost(out_dir, rows)
    elif spec.experiment == AVERAGING_COMPARE:
        paths += render_cost(out_dir, rows)
    else:
        paths += render_sweep(out_dir, rows, rows[0].grid_param if rows else "grid")
    return paths
