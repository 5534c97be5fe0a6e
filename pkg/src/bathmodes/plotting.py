"""Report figures for the CLI.

Kept separate from the numerical modules so the library itself has no
plotting imports; only the command-line report path renders figures, next
to the CSV/JSON artifacts.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def convergence_figure(path, params, errors, certificates, xlabel: str):
    """Log-log convergence plot of measured error and certificate vs size."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    params = np.asarray(params, dtype=float)
    errors = np.asarray(errors, dtype=float)
    ax.loglog(params, errors, "o-", color="C0", label="measured trace distance")
    certs = np.asarray(certificates, dtype=float)
    finite = np.isfinite(certs) & (certs > 0)
    if np.any(finite):
        ax.loglog(params[finite], certs[finite], "s--", color="C1", label="certificate")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("final-time error")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def trajectory_figure(path, times, states, leakage):
    """Populations of the reduced state plus the Fock-leakage monitor."""
    states = np.asarray(states)
    fig, (ax1, ax2) = plt.subplots(
        2, 1, figsize=(5.0, 4.6), sharex=True, height_ratios=[3, 1]
    )
    for i in range(states.shape[1]):
        ax1.plot(times, states[:, i, i].real, label=f"pop {i}")
    ax1.set_ylabel("population")
    ax1.legend(frameon=False, fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.semilogy(times, np.maximum(leakage, 1e-18), color="C3")
    ax2.set_ylabel("leakage")
    ax2.set_xlabel("t")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
