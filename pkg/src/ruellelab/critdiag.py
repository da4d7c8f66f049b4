"""Critical-orbit diagnostics: summability series and omega-limit clouds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import NotCritical, PoleHit
from .ratmap import ESCAPE_RADIUS, orbit

CRIT_CHECK_TOL = 1e-8
SUMMABLE_RTOL = 1e-10
DIVERGENT_FLOOR = 1e-3
DECADE = 10


@dataclass
class SummabilityReport:
    """Terms ``t_n = (1+|f^n(v)|^2) / ((1+|v|^2) |(f^n)'(v)|)`` for ``v = f(c)``."""

    critical_point: complex
    critical_value: complex
    terms: list[float]
    partial_sums: list[float]
    last_decade_increment: float
    verdict: str
    thresholds: dict = field(default_factory=lambda: {"summable_rtol": SUMMABLE_RTOL, "divergent_floor": DIVERGENT_FLOOR})

    @property
    def total(self) -> float:
        return self.partial_sums[-1] if self.partial_sums else 0.0


def summability(f, c: complex, N: int, crit_tol: float = CRIT_CHECK_TOL) -> SummabilityReport:
    """First ``N`` terms of the summability series of the critical point ``c``.

    Verdicts are evidence only.  ``SUMMABLE_EVIDENCE`` when the last ten terms
    add at most 1e-10 of the partial sum; ``DIVERGENT_EVIDENCE`` when a term is
    infinite (superattracting orbit) or the last ten terms all stay above 1e-3.
    """
    c = complex(c)
    if abs(complex(f.derivative(c))) > crit_tol * max(1.0, abs(c)):
        raise NotCritical(f"|f'({c})| = {abs(f.derivative(c)):.3e} exceeds tolerance")
    v = complex(f(c))
    if N <= 0:
        return SummabilityReport(c, v, [], [], 0.0, "INCONCLUSIVE")
    orb = orbit(f, v, N - 1, ESCAPE_RADIUS)
    if orb.pole_hit:
        raise PoleHit(f"orbit of the critical value {v} reaches a pole")
    base = 1 + abs(v) ** 2
    terms = []
    for z, d in zip(orb.points, orb.derivs):
        ad = abs(d)
        terms.append(math.inf if ad == 0 else (1 + abs(z) ** 2) / (base * ad))
    partial = np.cumsum(terms).tolist()
    last = terms[-DECADE:]
    inc = math.fsum(last) if all(map(math.isfinite, last)) else math.inf
    if orb.escaped or not all(map(math.isfinite, terms)):
        verdict = "DIVERGENT_EVIDENCE"
    elif inc <= SUMMABLE_RTOL * partial[-1]:
        verdict = "SUMMABLE_EVIDENCE"
    elif min(last) >= DIVERGENT_FLOOR:
        verdict = "DIVERGENT_EVIDENCE"
    else:
        verdict = "INCONCLUSIVE"
    return SummabilityReport(c, v, terms, partial, inc, verdict)


def decay_rate(terms, start: int, stop: int) -> float:
    """Geometric ratio from a least-squares fit of ``log t_n`` over ``start <= n <= stop``."""
    n = np.arange(start, stop + 1)
    y = np.log(np.asarray(terms, dtype=float)[start : stop + 1])
    slope = np.polyfit(n, y, 1)[0]
    return float(np.exp(slope))


@dataclass
class OmegaReport:
    cloud: list[complex]
    scales: tuple[float, float]
    covering_numbers: tuple[int, int]
    nn_spacing_histogram: tuple[list[int], list[float]]
    escaped: bool
    pole_hit: bool


def covering_number(points: np.ndarray, scale: float) -> int:
    """Number of occupied grid boxes of side ``scale``."""
    if not len(points):
        return 0
    keys = np.stack([np.floor(points.real / scale), np.floor(points.imag / scale)], axis=1)
    return len(np.unique(keys, axis=0))


def omega_limit_sample(
    f, x: complex, burn_in: int, keep: int, scales: tuple[float, float] = (1e-1, 1e-2), bins: int = 20
) -> OmegaReport:
    """Tail of the orbit of ``x`` as a point cloud with box-counting at two scales.

    Diagnostic only: covering counts growing like ``1/scale`` indicate a curve,
    flat counts indicate a finite set.
    """
    orb = orbit(f, x, burn_in + keep)
    tail = orb.points[burn_in + 1 :] if len(orb.points) > burn_in + 1 else []
    tail = tail[:keep]
    pts = np.array(tail, complex)
    counts = (covering_number(pts, scales[0]), covering_number(pts, scales[1]))
    if len(pts) > 1:
        xy = np.stack([pts.real, pts.imag], axis=1)
        nn = cKDTree(xy).query(xy, k=2)[0][:, 1]
        hist, edges = np.histogram(nn, bins=bins)
        histogram = (hist.tolist(), edges.tolist())
    else:
        histogram = ([], [])
    return OmegaReport(tail, scales, counts, histogram, orb.escaped, orb.pole_hit)
