"""Figure rendering for the spectral and central-limit experiments.

Rendering is opt-in from the command line; the delimited outputs remain
the primary artifacts.  The non-interactive Agg backend keeps rendering
usable in headless environments.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .limitlaws import MPLaw, mp_pdf, semicircle_pdf  # noqa: E402


def save_esd_figure(result, path) -> None:
    """Empirical spectral histogram with its limiting density overlaid."""
    hist = result.histogram
    edges = hist.bin_edges
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.bar(
        edges[:-1],
        hist.densities,
        width=np.diff(edges),
        align="edge",
        color="#9ecae1",
        edgecolor="#6baed6",
        label="pooled eigenvalues",
    )
    lo, hi = float(edges[0]), float(edges[-1])
    if isinstance(result.law, MPLaw):
        # the ratio-1 law has an inverse-square-root pole at the left edge
        a = max(result.law.a, 1e-9)
        grid = np.linspace(max(lo, a + 1e-6), min(hi, result.law.b - 1e-9), 600)
        pdf = mp_pdf(result.law, grid)
        label = "Marchenko-Pastur density"
    else:
        lo_s = result.law.u - result.law.r
        hi_s = result.law.u + result.law.r
        grid = np.linspace(max(lo, lo_s), min(hi, hi_s), 600)
        pdf = semicircle_pdf(result.law, grid)
        label = "semicircle density"
    ax.plot(grid, pdf, color="#d62728", lw=2.0, label=label)
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("density")
    ax.set_title(
        f"{result.matrix_kind} spectrum, n={result.n}, p={result.p}, "
        f"reps={result.reps}, KS={result.ks:.4f}"
    )
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_clt_figure(result, k: int, path, bins: int = 40) -> None:
    """Histogram of centered trace-power draws with the Gaussian limit."""
    sample = result.samples[k]
    centered = sample.centered
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.hist(
        centered,
        bins=bins,
        density=True,
        color="#a1d99b",
        edgecolor="#74c476",
        label=f"centered tr(Psi^{k})",
    )
    sd = math.sqrt(sample.reference_variance)
    grid = np.linspace(centered.min(), centered.max(), 400)
    pdf = np.exp(-0.5 * (grid / sd) ** 2) / (sd * math.sqrt(2.0 * math.pi))
    ax.plot(grid, pdf, color="#d62728", lw=2.0, label="Gaussian limit")
    ax.set_xlabel("centered value")
    ax.set_ylabel("density")
    ax.set_title(
        f"tr(Psi^{k}) over {result.reps} replications, n={result.n}, p={result.p}; "
        f"variance {sample.sample_variance:.4f} vs limit {sample.reference_variance:.4f}"
    )
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
