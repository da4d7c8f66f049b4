"""The pushforward operator ``T_f g(x) = sum_{f(w)=x} g(w) / f'(w)^2`` and its diagnostics.

Anything with ``__call__``, ``derivative`` and ``fiber`` can play the role of
``f``: rational maps, and the conjugated rotation of the annulus model.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import (
    AllSamplesInvalid,
    ConvergenceError,
    CriticalValue,
    DomainError,
    InfinitePreimageUnhandled,
    QuadratureFailure,
    Undefined,
    UndefinedAtPreimage,
    ZeroDenominator,
)
from .measure import CurveMeasure, DiscreteMeasure, cauchy, moments
from .poly import RootSet
from .sampling import thread_cap

CRIT_TOL = 1e-6
FIXED_TOL = 1e-8
NOT_FIXED_FACTOR = 1e3
TRIANGLE_SLACK = 1e-10
NONZERO_TOL = 1e-12


class FiberMap(Protocol):
    def __call__(self, z: complex) -> complex: ...

    def derivative(self, z: complex) -> complex: ...

    def fiber(self, x: complex) -> RootSet: ...


@dataclass(frozen=True)
class EvaluableField:
    """A pointwise function the operator can act on.

    ``evaluate`` raises ``Undefined`` on the singular set.  ``decay`` is the
    order ``k`` of ``O(z**-k)`` at infinity, and ``singular_points`` lists
    isolated singularities that quadrature should keep on panel corners.
    """

    evaluate: Callable[[complex], complex]
    support_hint: str = "plane"
    label: str = ""
    decay: int = 0
    singular_points: tuple[complex, ...] = ()

    def __call__(self, z: complex) -> complex:
        return self.evaluate(z)


def constant_field(c: complex = 1.0) -> EvaluableField:
    c = complex(c)
    return EvaluableField(lambda z: c, "plane", f"const {c}", 0 if c else 99)


def power_field(k: int, coeff: complex = 1.0) -> EvaluableField:
    """``coeff * z**k`` for ``k <= 0``, undefined at the origin when ``k < 0``."""
    coeff = complex(coeff)

    def ev(z):
        if k < 0 and z == 0:
            raise Undefined("power field evaluated at 0")
        return coeff * complex(z) ** k

    return EvaluableField(ev, "plane", f"{coeff} z^{k}", -k, (0j,) if k < 0 else ())


def cauchy_field(mu: DiscreteMeasure | CurveMeasure, label: str = "cauchy transform") -> EvaluableField:
    """The Cauchy transform as a field; decay order read off the moments."""
    m = moments(mu)
    scale = max(1.0, getattr(mu, "total_variation", 1.0))
    if abs(m.A) > 1e-12 * scale:
        decay = 1
    elif abs(m.B) > 1e-12 * scale:
        decay = 2
    else:
        decay = 3
    if isinstance(mu, DiscreteMeasure):
        hint, sing = "atoms", tuple(np.unique(mu.positions).tolist())
    else:
        hint, sing = "curves", ()
    return EvaluableField(lambda z: cauchy(mu, z), hint, label, decay, sing)


def _fiber_terms(f: FiberMap, g: EvaluableField, x: complex, crit_tol: float) -> list[complex]:
    fib = f.fiber(x)
    if fib.infinity_multiplicity and g.decay < 2:
        raise InfinitePreimageUnhandled(f"fiber of {x} contains infinity and {g.label!r} decays like z^-{g.decay}")
    if np.any(fib.multiplicities > 1):
        raise CriticalValue(f"{x} is a critical value (multiple preimage)")
    terms = []
    for w in fib.roots.tolist():
        d = complex(f.derivative(w))
        if abs(d) < crit_tol * (1 + abs(w)):
            raise CriticalValue(f"{x} is within tolerance of a critical value (|f'| = {abs(d):.2e} at {w})")
        try:
            gw = complex(g(w))
        except Undefined as exc:
            raise UndefinedAtPreimage(f"field undefined at preimage {w}: {exc.detail}") from exc
        terms.append(gw / d**2)
    return terms


def apply(f: FiberMap, g: EvaluableField, x: complex, crit_tol: float = CRIT_TOL) -> complex:
    """``T_f g(x)``; an infinite preimage contributes 0 when ``g`` decays like ``z**-2`` or faster."""
    terms = _fiber_terms(f, g, complex(x), crit_tol)
    return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))


@dataclass
class FixedPointReport:
    sample_points: list[complex]
    values: list[complex]
    transformed: list[complex]
    residuals: list[float]
    triangle_gaps: list[float]
    max_residual: float
    verdict: str
    dropped: list[tuple[complex, str]] = field(default_factory=list)
    tolerance: float = FIXED_TOL


def _sample_row(f, H, z, crit_tol):
    try:
        hz = complex(H(z))
        terms = _fiber_terms(f, H, z, crit_tol)
    except (DomainError, ConvergenceError) as exc:
        return None, f"{exc.kind}: {exc.detail}"
    th = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    gap = math.fsum(abs(t) for t in terms) - abs(th)
    return (z, hz, th, abs(th - hz), gap), None


def fixed_point_residual(
    f: FiberMap,
    H: EvaluableField,
    samples: Sequence[complex],
    tol: float = FIXED_TOL,
    crit_tol: float = CRIT_TOL,
    workers: int | None = None,
) -> FixedPointReport:
    """Compare ``T_f H`` with ``H`` at each sample.

    Samples at critical values or singular points are dropped and recorded.
    The triangle gap ``sum |H(w)|/|f'(w)|^2 - |T_f H(z)|`` is zero exactly
    when all fiber terms point the same way.
    """
    samples = [complex(z) for z in np.ravel(samples)]
    workers = workers or thread_cap()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(lambda z: _sample_row(f, H, z, crit_tol), samples))
    else:
        rows = [_sample_row(f, H, z, crit_tol) for z in samples]
    kept = [r for r, _ in rows if r is not None]
    dropped = [(z, why) for z, (r, why) in zip(samples, rows) if r is None]
    if not kept:
        raise AllSamplesInvalid(f"all {len(samples)} samples were rejected", dropped=dropped)
    pts, hv, tv, res, gaps = (list(col) for col in zip(*kept))
    max_res = max(res)
    scale = 1 + max(abs(h) for h in hv)
    if max_res <= tol * scale:
        verdict = "FIXED"
    elif max_res > NOT_FIXED_FACTOR * tol * scale:
        verdict = "NOT_FIXED"
    else:
        verdict = "INCONCLUSIVE"
    return FixedPointReport(pts, hv, tv, res, gaps, max_res, verdict, dropped, tol)


@dataclass(frozen=True)
class MultiplierReport:
    L: complex
    realness: float


def multiplier_relation(f: FiberMap, H: EvaluableField, x: complex) -> MultiplierReport:
    """``L_x = H(f(x)) f'(x)^2 / H(x)``; real and >= 1 at genuine fixed points off the support."""
    x = complex(x)
    hx = complex(H(x))
    if abs(hx) <= NONZERO_TOL:
        raise ZeroDenominator(f"H({x}) vanishes")
    d = complex(f.derivative(x))
    if abs(d) <= NONZERO_TOL:
        raise ZeroDenominator(f"f'({x}) vanishes")
    L = complex(H(f(x))) * d**2 / hx
    return MultiplierReport(L, abs(L.imag) / abs(L) if L else 0.0)


@dataclass
class LineFieldReport:
    samples: list[complex]
    defects: list[float]
    max_defect: float
    excluded: list[tuple[complex, str]]


def line_field_defect(f: FiberMap, H: EvaluableField, samples: Sequence[complex]) -> LineFieldReport:
    """Invariance defect ``|l(f(z)) conj(f'(z))/f'(z) - l(z)|`` of ``l = conj(H)/|H|``."""
    pts, defects, excluded = [], [], []
    for z in np.ravel(samples).tolist():
        try:
            hz = complex(H(z))
            d = complex(f.derivative(z))
            hfz = complex(H(f(z)))
        except (DomainError, ConvergenceError) as exc:
            excluded.append((z, exc.kind))
            continue
        if abs(hz) <= NONZERO_TOL or abs(hfz) <= NONZERO_TOL:
            excluded.append((z, "H vanishes"))
            continue
        if abs(d) <= NONZERO_TOL:
            excluded.append((z, "f' vanishes"))
            continue
        lz = hz.conjugate() / abs(hz)
        lfz = hfz.conjugate() / abs(hfz)
        pts.append(z)
        defects.append(abs(lfz * d.conjugate() / d - lz))
    return LineFieldReport(pts, defects, max(defects) if defects else 0.0, excluded)


# ---------------------------------------------------------------------------
# invariant mass


@dataclass(frozen=True)
class AnnularSector:
    """``{r_inner < |z - center| < r_outer, theta0 < arg(z - center) < theta1}``; a disc has ``r_inner = 0``."""

    r_inner: float
    r_outer: float
    theta0: float = 0.0
    theta1: float = 2 * math.pi
    center: complex = 0j

    @classmethod
    def disc(cls, center: complex, radius: float) -> "AnnularSector":
        return cls(0.0, radius, 0.0, 2 * math.pi, center)

    def to_json(self) -> dict:
        return {
            "r_inner": self.r_inner,
            "r_outer": self.r_outer,
            "theta0": self.theta0,
            "theta1": self.theta1,
            "center": [self.center.real, self.center.imag],
        }


@dataclass
class MassReport:
    region: AnnularSector
    lambda_A: float
    lambda_preimage: float
    rel_gap: float
    panels: int
    skipped_nodes: int


_GL_ORDER = 8


def _breaks(lo: float, hi: float, panels: int, extra: Sequence[float]) -> np.ndarray:
    pts = set(np.linspace(lo, hi, panels + 1).tolist())
    pts.update(t for t in extra if lo < t < hi)
    return np.array(sorted(pts))


def _polar_nodes(region: AnnularSector, panels: int, singular: Sequence[complex]):
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    rel = [complex(s) - region.center for s in singular]
    rb = _breaks(region.r_inner, region.r_outer, panels, [abs(s) for s in rel])
    tb = _breaks(
        region.theta0,
        region.theta1,
        panels,
        [region.theta0 + (math.atan2(s.imag, s.real) - region.theta0) % (2 * math.pi) for s in rel if s],
    )

    def nodes(b):
        a, c = b[:-1, None], b[1:, None]
        return ((c - a) / 2 * x + (c + a) / 2).ravel(), ((c - a) / 2 * w).ravel()

    r, wr = nodes(rb)
    t, wt = nodes(tb)
    R, T = np.meshgrid(r, t, indexing="ij")
    W = np.outer(wr, wt) * R
    return (region.center + R * np.exp(1j * T)).ravel(), W.ravel()


def invariant_mass(
    f: FiberMap,
    H: EvaluableField,
    region: AnnularSector,
    rtol: float = 1e-9,
    max_panels: int = 32,
) -> MassReport:
    """Compare ``Lambda(A) = int_A |H|`` with ``Lambda(f^{-1}(A))``.

    The pulled-back mass is computed on ``A`` itself through the change of
    variables ``int_{f^{-1}A} |H| = int_A sum_{f(w)=x} |H(w)| / |f'(w)|^2``,
    which sums the contributions of every preimage branch.  Tensor
    Gauss-Legendre panels in polar coordinates are doubled until both
    integrals settle to ``rtol``.
    """

    def integrand(x):
        try:
            a = abs(complex(H(x)))
        except Undefined:
            a = None
        b = 0.0
        fib = f.fiber(x)
        for w, m in zip(fib.roots.tolist(), fib.multiplicities.tolist()):
            if m > 1:
                continue
            try:
                b += abs(complex(H(w))) / abs(complex(f.derivative(w))) ** 2
            except Undefined:
                continue
        return a, b

    prev = None
    panels = 2
    while panels <= max_panels:
        z, w = _polar_nodes(region, panels, H.singular_points)
        skipped = 0
        va, vb = np.empty(len(z)), np.empty(len(z))
        for i, x in enumerate(z.tolist()):
            a, b = integrand(x)
            if a is None:
                skipped += 1
                a = 0.0
            va[i], vb[i] = a, b
        la, lb = float(va @ w), float(vb @ w)
        if prev is not None:
            da = abs(la - prev[0]) <= rtol * max(abs(la), 1e-300) or la == prev[0]
            db = abs(lb - prev[1]) <= rtol * max(abs(lb), 1e-300) or lb == prev[1]
            if da and db:
                top = max(la, lb)
                gap = abs(la - lb) / top if top > 0 else 0.0
                return MassReport(region, la, lb, gap, panels, skipped)
        prev = (la, lb)
        panels *= 2
    raise QuadratureFailure(
        f"mass integrals did not settle to {rtol:g} with {max_panels} panels per axis",
        estimate=prev,
    )
