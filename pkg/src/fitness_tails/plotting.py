"""Figures for the CLI report paths. Rendered off-screen to image files."""

from __future__ import annotations

import math
from typing import Callable, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 10,
    "axes.labelsize": 10,
    "axes.titlesize": 11,
    "legend.fontsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def _figure(width=6.0, height=None):
    golden = (math.sqrt(5) - 1.0) / 2.0
    return plt.subplots(figsize=(width, height or width * golden))


def _floats(rows, key):
    return np.array([np.nan if r.get(key) is None else float(r[key]) for r in rows])


def plot_bound_curves(rows: Sequence[Mapping], path: str) -> None:
    with plt.rc_context(RC):
        fig, ax = _figure()
        d = _floats(rows, "delta")
        for key, label, style in (
            ("lower_bound", "lower tail, closed form", "-"),
            ("chernoff_lower", "lower tail, optimised", ":"),
            ("upper_bound", "upper tail, closed form", "--"),
            ("chernoff_upper", "upper tail, optimised", "-."),
        ):
            ax.plot(d, _floats(rows, key), style, marker="o", ms=3, label=label)
        ax.set_yscale("log")
        ax.set_xlabel("deviation from the mean")
        ax.set_ylabel("tail probability bound")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_hitting_times(
    counts: Mapping[int, int],
    path: str,
    reference_cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> None:
    t = np.fromiter(counts.keys(), dtype=np.int64)
    c = np.fromiter(counts.values(), dtype=np.float64)
    total = c.sum()
    with plt.rc_context(RC):
        fig, (ax_h, ax_c) = plt.subplots(1, 2, figsize=(9, 3.5))
        ax_h.bar(t, c / total, width=1.0, color="0.4")
        ax_h.set_xlabel("hitting time T")
        ax_h.set_ylabel("relative frequency")
        ax_c.step(t, np.cumsum(c) / total, where="post", label="empirical")
        if reference_cdf is not None:
            grid = np.arange(t.min(), t.max() + 1)
            ax_c.step(grid, reference_cdf(grid), where="post", ls="--", label="exact")
        ax_c.set_xlabel("hitting time T")
        ax_c.set_ylabel("P(T <= t)")
        ax_c.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_verification(rows: Sequence[Mapping], path: str, x_label: str = "delta") -> None:
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
        for ax, tail in zip(axes, ("lower", "upper")):
            sel = [r for r in rows if r["tail"] == tail]
            if not sel:
                ax.set_visible(False)
                continue
            x = _floats(sel, "delta_or_r")
            ax.plot(x, _floats(sel, "closed_form_bound"), "-o", ms=3, label="closed form")
            ax.plot(x, _floats(sel, "chernoff_bound"), ":s", ms=3, label="optimised")
            ax.plot(x, _floats(sel, "exact_tail"), "--^", ms=3, label="exact")
            emp, se = _floats(sel, "empirical_tail"), _floats(sel, "empirical_se")
            if np.any(np.isfinite(emp)):
                ax.errorbar(x, emp, yerr=3 * se, fmt="x", capsize=2, label="empirical +- 3 SE")
            for xi, r in zip(x, sel):
                if r["verdict"] == "fail":
                    ax.axvline(xi, color="red", lw=0.8)
            ax.set_yscale("log")
            ax.set_title(f"{tail} tail")
            ax.set_xlabel(x_label)
        axes[0].set_ylabel("probability")
        axes[0].legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
