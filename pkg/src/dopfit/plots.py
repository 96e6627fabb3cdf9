"""Figure rendering for the CLI report paths.

Every figure writer takes already-computed results and a target path; the
CSV/JSON files remain the primary outputs and the figures are companions
for quick inspection. Rendering is headless (Agg).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def save_basis_figure(basis, path):
    """Basis columns and their derivatives, one line per degree."""
    fig, (ax_p, ax_dp) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    x = basis.grid.x_raw
    for i in range(basis.degree + 1):
        ax_p.plot(x, basis.p[:, i], lw=1.2, label=f"degree {i}")
        ax_dp.plot(x, basis.p_prime[:, i], lw=1.2)
    ax_p.set_ylabel("basis value")
    ax_dp.set_ylabel("basis derivative")
    ax_dp.set_xlabel("x")
    if basis.degree <= 9:
        ax_p.legend(loc="upper right", fontsize=8, ncol=2)
    fig.suptitle(f"orthogonal basis, degree {basis.degree}, n={basis.grid.n}")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_fit_figure(x, obs, fit, path, title="fit"):
    """Data, reconstruction, and a 2-sigma band in both domains."""
    fig, (ax_v, ax_d) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    ax_v.plot(x, obs.y_hat, ".", ms=2.5, alpha=0.45, label="data")
    ax_v.plot(x, fit.y_tilde, "-", lw=1.5, label="fit")
    ax_v.fill_between(
        x, fit.y_tilde - 2 * fit.sd_y, fit.y_tilde + 2 * fit.sd_y,
        alpha=0.25, lw=0, label="2 sd",
    )
    ax_d.plot(x, obs.y_hat_prime, ".", ms=2.5, alpha=0.45)
    ax_d.plot(x, fit.y_tilde_prime, "-", lw=1.5)
    ax_d.fill_between(
        x, fit.y_tilde_prime - 2 * fit.sd_dy, fit.y_tilde_prime + 2 * fit.sd_dy,
        alpha=0.25, lw=0,
    )
    ax_v.set_ylabel("value")
    ax_d.set_ylabel("derivative")
    ax_d.set_xlabel("x")
    ax_v.legend(loc="best", fontsize=8)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_sweep_figure(rows, mode, path):
    """Significant digits over the sweep: per-measure curves and the
    method comparison on the Frobenius measure."""
    on_n = mode == "complete"
    fig, (ax_meas, ax_cmp) = plt.subplots(1, 2, figsize=(11, 4.5))
    dop = [r for r in rows if r.method == "dop" and r.report is not None]
    van = [r for r in rows if r.method == "vandermonde" and r.report is not None]
    axis = [r.n if on_n else r.d for r in dop]
    for measure in ("max", "frob", "det", "cond", "rank"):
        ax_meas.plot(
            axis,
            [_clip_eta(r.report.eta[measure]) for r in dop],
            marker="o", ms=3, lw=1.0, label=measure,
        )
    ax_meas.set_title("orthogonal basis: digits by measure")
    ax_meas.legend(fontsize=8)
    for label, series in (("dop", dop), ("vandermonde", van)):
        ax_cmp.plot(
            [r.n if on_n else r.d for r in series],
            [_clip_eta(r.report.eta["frob"]) for r in series],
            marker="o", ms=3, lw=1.2, label=label,
        )
    ax_cmp.set_title("Frobenius digits: method comparison")
    ax_cmp.legend(fontsize=8)
    for ax in (ax_meas, ax_cmp):
        ax.set_xlabel("n" if on_n else "degree")
        ax.set_ylabel("significant digits")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_montecarlo_figure(result, sigma_y, sigma_dy, path):
    """Per-iteration residual standard deviations against the noise gains."""
    fig, (ax_v, ax_d) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
    iters = np.arange(1, result.n_iter + 1)
    ax_v.plot(iters, result.per_iteration[:, 0], ".", ms=3, alpha=0.6)
    ax_v.axhline(result.mean_std_ry, color="C1", lw=1.5, label="mean")
    ax_v.axhline(sigma_y, color="C2", lw=1.0, ls="--", label="noise gain")
    ax_d.plot(iters, result.per_iteration[:, 1], ".", ms=3, alpha=0.6)
    ax_d.axhline(result.mean_std_rdy, color="C1", lw=1.5)
    ax_d.axhline(sigma_dy, color="C2", lw=1.0, ls="--")
    ax_v.set_ylabel("std of value residual")
    ax_d.set_ylabel("std of derivative residual")
    ax_d.set_xlabel("iteration")
    ax_v.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def save_compare_figure(x, obs, fits, path):
    """Overlay of reconstructions from different methods."""
    fig, (ax_v, ax_d) = plt.subplots(2, 1, figsize=(8, 7), sharex=True)
    ax_v.plot(x, obs.y_hat, ".", ms=2.5, alpha=0.4, label="data")
    ax_d.plot(x, obs.y_hat_prime, ".", ms=2.5, alpha=0.4)
    for label, (y_tilde, dy_tilde) in fits.items():
        ax_v.plot(x, y_tilde, lw=1.4, label=label)
        ax_d.plot(x, dy_tilde, lw=1.4)
    ax_v.set_ylabel("value")
    ax_d.set_ylabel("derivative")
    ax_d.set_xlabel("x")
    ax_v.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _clip_eta(eta: float) -> float:
    # +inf means an exactly zero error measure; pin it to a finite ceiling
    # so the curve stays plottable.
    if eta == float("inf"):
        return 17.0
    if eta == float("-inf") or np.isnan(eta):
        return 0.0
    return eta
