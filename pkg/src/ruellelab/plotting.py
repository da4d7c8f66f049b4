"""Static figures for CLI reports, rendered with the Agg backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def summability_figure(report, path) -> None:
    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    n = np.arange(len(report.terms))
    terms = np.asarray(report.terms, dtype=float)
    finite = np.isfinite(terms) & (terms > 0)
    a.semilogy(n[finite], terms[finite], ".-")
    a.set_xlabel("n")
    a.set_ylabel("term")
    b.plot(n, report.partial_sums, ".-")
    b.set_xlabel("n")
    b.set_ylabel("partial sum")
    fig.suptitle(f"summability: {report.verdict}")
    _save(fig, path)


def transversality_figure(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    q = np.asarray(report.quotients)
    s = np.asarray(report.series_partials)
    ax.plot(np.arange(1, len(q) + 1), q.real, "o-", ms=3, label="quotient (m)")
    ax.plot(np.arange(1, len(s) + 1), s.real, "x--", ms=3, label="series partial (M+1)")
    ax.axhline(report.limit_estimate.real, color="k", lw=0.5)
    ax.set_xlabel("index")
    ax.set_ylabel("real part")
    ax.legend()
    _save(fig, path)


def omega_figure(report, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    pts = np.asarray(report.cloud, dtype=complex)
    ax.plot(pts.real, pts.imag, ",", color="k")
    ax.set_aspect("equal")
    ax.set_title(f"covering numbers {report.covering_numbers}")
    _save(fig, path)


def hardy_figure(report, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    eps = np.asarray(report.epsilons)
    ax.loglog(1 / eps, report.inner_integrals, "o-", label=f"inner, slope {report.inner_exponent:.2e}")
    ax.loglog(1 / eps, report.outer_integrals, "s-", label=f"outer, slope {report.outer_exponent:.2e}")
    ax.set_xlabel("1/eps")
    ax.set_ylabel("integral of |dw|/|psi'|")
    ax.set_title("bounded" if report.bounded_verdict else "unbounded")
    ax.legend()
    _save(fig, path)


def residual_figure(report, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 4.5))
    pts = np.asarray(report.sample_points, dtype=complex)
    res = np.maximum(np.asarray(report.residuals), 1e-18)
    sc = ax.scatter(pts.real, pts.imag, c=np.log10(res), s=12)
    fig.colorbar(sc, ax=ax, label="log10 residual")
    ax.set_aspect("equal")
    ax.set_title(report.verdict)
    _save(fig, path)


def curve_measure_figure(measure, samples: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    for c in measure.curves:
        z = np.append(c.nodes, c.nodes[0])
        ax.plot(z.real, z.imag, lw=1, label=f"orientation {c.orientation:+d}")
    for name, z in samples.items():
        ax.plot(np.real(z), np.imag(z), ".", ms=2, label=name)
    ax.set_aspect("equal")
    ax.legend(fontsize=7)
    _save(fig, path)


def bars_figure(labels, values, path, ylabel: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(values)), values)
    ax.set_xticks(range(len(values)), labels, rotation=45, ha="right")
    ax.set_ylabel(ylabel)
    _save(fig, path)
