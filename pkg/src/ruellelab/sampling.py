"""Reproducible low-discrepancy sample grids."""

from __future__ import annotations

import os

import numpy as np
from scipy.stats import qmc

DEFAULT_SAMPLES = 256


def _unit_square(n: int, seed: int) -> np.ndarray:
    return qmc.Halton(d=2, scramble=True, seed=seed).random(n)


def annulus(n: int, r_inner: float, r_outer: float, seed: int = 0, center: complex = 0j) -> np.ndarray:
    """Area-uniform quasi-random points in ``r_inner < |z - center| < r_outer``."""
    u = _unit_square(n, seed)
    r = np.sqrt(r_inner**2 + u[:, 0] * (r_outer**2 - r_inner**2))
    return center + r * np.exp(2j * np.pi * u[:, 1])


def box(n: int, lower: complex, upper: complex, seed: int = 0) -> np.ndarray:
    u = _unit_square(n, seed)
    return lower.real + u[:, 0] * (upper.real - lower.real) + 1j * (lower.imag + u[:, 1] * (upper.imag - lower.imag))


def thread_cap() -> int:
    """Worker count from ``RUELLE_LAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("RUELLE_LAB_THREADS", "1")))
    except ValueError:
        return 1
