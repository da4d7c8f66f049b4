"""A solvable rotation-annulus model.

The round annulus ``1 < |w| < R`` is carried onto ``A = psi(annulus)`` by a
Laurent polynomial ``psi``; on ``A`` the map ``f = psi o (lambda w) o psi^-1``
is a rotation in disguise.  Everything here is explicit in the ``w`` chart:
the fixed field ``H = C (phi'/phi)^2`` with ``phi = psi^-1``, the boundary
measure whose Cauchy transform is ``H`` on ``A`` and zero off it, and the
Hardy-type integrals of ``1/psi'`` near the two boundary circles.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from matplotlib.path import Path

from . import sampling
from .errors import DerivativeVanishes, HardyUnbounded, InputError, InversionFailure, InvalidModel, Undefined
from .measure import CurveMeasure, SampledCurve, cauchy_curve
from .poly import RootSet
from .transfer import EvaluableField, cauchy_field, fixed_point_residual

GOLDEN_LAMBDA = cmath.exp(2j * math.pi * (math.sqrt(5) - 1) / 2)
UNIMODULAR_TOL = 1e-12
MIN_WIDTH = 1e-6
EIGEN_TOL = 1e-10
NEWTON_TOL = 1e-14
VERIFY_TOL = 1e-7
SCALING_TOL = 1e-12
HARDY_EXPONENT_MAX = 0.05
HARDY_INCREMENT_MAX = 0.01
HARDY_RUNGS = tuple(range(4, 15))
HARDY_FIT_RUNGS = 6
WINDING_NODES = 4096


def _laurent_eval(coeffs: dict[int, complex], w):
    w = np.asarray(w, dtype=complex)
    out = np.zeros(w.shape, complex)
    for n, a in coeffs.items():
        out = out + a * w**n
    return out


def _laurent_deriv(coeffs: dict[int, complex]) -> dict[int, complex]:
    return {n - 1: n * a for n, a in coeffs.items() if n != 0}


@dataclass(frozen=True, eq=False)
class AnnulusModel:
    """Rotation by ``lam`` on ``1 < |w| < R``, transported by ``psi(w) = sum psi[n] w**n``."""

    R: float
    lam: complex = GOLDEN_LAMBDA
    psi: dict[int, complex] = field(default_factory=lambda: {1: 1 + 0j})
    C: complex = 1 + 0j

    def __post_init__(self):
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "C", complex(self.C))
        psi = {int(n): complex(a) for n, a in self.psi.items() if a != 0}
        object.__setattr__(self, "psi", psi)
        if abs(abs(self.lam) - 1) > UNIMODULAR_TOL:
            raise InvalidModel(f"|lambda| = {abs(self.lam)!r} is not 1")
        if not self.R > 1 + MIN_WIDTH:
            raise InvalidModel(f"R = {self.R} must exceed 1")
        if not psi:
            raise InvalidModel("psi is identically zero")
        if not self.is_identity:
            self._check_injective()

    @property
    def is_identity(self) -> bool:
        return self.psi == {1: 1 + 0j}

    def map(self, w):
        return _laurent_eval(self.psi, w)

    def dmap(self, w):
        return _laurent_eval(_laurent_deriv(self.psi), w)

    def _check_injective(self) -> None:
        """Argument principle: ``psi - psi(w0)`` has one zero in the annulus for each probe ``w0``."""
        theta = 2 * np.pi * np.arange(WINDING_NODES) / WINDING_NODES
        e = np.exp(1j * theta)
        outer, inner = self.map(self.R * e), self.map(e)
        probes = [r * cmath.exp(1j * t) for r in np.linspace(1, self.R, 5)[1:-1] for t in np.linspace(0, 2 * np.pi, 6)[:-1]]
        for w0 in probes:
            v = complex(self.map(w0))
            zeros = _winding(outer, v) - _winding(inner, v)
            if zeros != 1:
                raise InvalidModel(f"psi is not injective: {zeros} solutions of psi(w) = psi({w0:.3g})")

    def boundary(self, which: str, n: int = WINDING_NODES) -> np.ndarray:
        r = self.R if which == "outer" else 1.0
        return self.map(r * np.exp(2j * np.pi * np.arange(n) / n))

    @classmethod
    def from_json(cls, spec: dict) -> "AnnulusModel":
        extra = set(spec) - {"R", "lambda", "psi", "C"}
        if extra:
            raise InputError(f"unknown keys in model spec: {sorted(extra)}")
        try:
            lam = complex(*spec.get("lambda", [GOLDEN_LAMBDA.real, GOLDEN_LAMBDA.imag]))
            psi = {int(n): complex(*a) for n, a in spec.get("psi", [[1, [1, 0]]])}
            C = complex(*spec.get("C", [1, 0]))
            R = float(spec["R"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad model spec: {exc}") from exc
        return cls(R, lam, psi, C)

    def to_json(self) -> dict:
        return {
            "R": self.R,
            "lambda": [self.lam.real, self.lam.imag],
            "psi": [[n, [a.real, a.imag]] for n, a in sorted(self.psi.items())],
            "C": [self.C.real, self.C.imag],
        }


def _winding(curve: np.ndarray, z: complex) -> int:
    d = curve - z
    turn = np.angle(np.roll(d, -1) / d)
    return int(round(turn.sum() / (2 * np.pi)))


def rotation_eigenspace(lam: complex, N: int) -> list[int]:
    """Indices ``n`` in ``[-N, N]`` with ``lam**(n+2) == 1``: the Laurent modes that survive rotation.

    Only finite evidence is reported; a rotation number that is rational with
    denominator beyond ``2N`` looks irrational here.
    """
    if N < 2:
        raise InputError("N must be >= 2")
    lam = complex(lam)
    if abs(abs(lam) - 1) > UNIMODULAR_TOL:
        raise InputError(f"|lambda| = {abs(lam)!r} is not 1")
    arg = cmath.phase(lam)
    return [n for n in range(-N, N + 1) if abs(cmath.exp(1j * (n + 2) * arg) - 1) <= EIGEN_TOL]


@dataclass(frozen=True)
class LaurentField:
    """``H(w) = sum_n coeffs[n + N] w**n`` on ``r_inner <= |w| <= r_outer``."""

    coeffs: np.ndarray
    r_inner: float
    r_outer: float

    @property
    def N(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        n = np.arange(-self.N, self.N + 1)
        return (self.coeffs * w[..., None] ** n).sum(axis=-1)

    def support(self, atol: float = 1e-10) -> list[int]:
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return [int(n) for n, a in zip(range(-self.N, self.N + 1), self.coeffs) if abs(a) > atol * scale]


def laurent_coefficients(h: Callable[[np.ndarray], np.ndarray], r: float, N: int, nodes: int = 256) -> LaurentField:
    """Coefficients ``a_{-N..N}`` of ``h`` from an FFT on the circle ``|w| = r``."""
    if nodes < 2 * N + 1:
        raise InputError("need at least 2N+1 nodes")
    w = r * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    c = np.fft.fft(np.asarray(h(w), dtype=complex)) / nodes
    n = np.arange(-N, N + 1)
    return LaurentField(c[n % nodes] / r**n, r, r)


class _Chart:
    """Newton inversion ``w = phi(z)`` with a multi-start radial grid."""

    def __init__(self, model: AnnulusModel):
        self.model = model
        r = np.linspace(1, model.R, 9)
        t = 2 * np.pi * np.arange(32) / 32
        self.starts = (r[:, None] * np.exp(1j * t)[None, :]).ravel()
        self.start_images = model.map(self.starts)
        self.outer = Path(np.c_[model.boundary("outer").real, model.boundary("outer").imag])
        self.inner = Path(np.c_[model.boundary("inner").real, model.boundary("inner").imag])
        self.scale = max(abs(a) for a in model.psi.values())

    def inside(self, z: complex) -> bool:
        p = [(z.real, z.imag)]
        return bool(self.outer.contains_points(p)[0] and not self.inner.contains_points(p)[0])

    def invert(self, z: complex) -> complex:
        m = self.model
        if m.is_identity:
            w = z
        else:
            w = complex(self.starts[np.argmin(np.abs(self.start_images - z))])
            ok = False
            for _ in range(60):
                d = complex(m.dmap(w))
                if d == 0:
                    break
                step = (complex(m.map(w)) - z) / d
                w -= step
                if abs(step) <= NEWTON_TOL * max(1.0, abs(w)):
                    ok = True
                    break
            if not ok or abs(complex(m.map(w)) - z) > 1e-10 * self.scale * max(1.0, abs(z)):
                if self.inside(z):
                    raise InversionFailure(f"Newton failed to invert psi at {z}")
                raise Undefined(f"{z} lies outside the model annulus")
        slack = 1e-12 * m.R
        if not (1 - slack <= abs(w) <= m.R + slack):
            if not m.is_identity and self.inside(z):
                raise InversionFailure(f"inverse of {z} left the annulus")
            raise Undefined(f"{z} lies outside the model annulus")
        return w


def model_fixed_field(model: AnnulusModel) -> EvaluableField:
    """``H(z) = C / (w**2 psi'(w)**2)`` with ``w = psi^-1(z)``, undefined off the closed image annulus."""
    chart = _Chart(model)

    def ev(z):
        w = chart.invert(complex(z))
        return model.C / (w * w * complex(model.dmap(w)) ** 2)

    return EvaluableField(ev, "annulus", "model fixed field", 2, (0j,))


class AnnulusRotationMap:
    """``f = psi o (lam w) o psi^-1`` on the image annulus; one preimage per point."""

    degree = 1

    def __init__(self, model: AnnulusModel):
        self.model = model
        self.chart = _Chart(model)

    def __call__(self, z):
        w = self.chart.invert(complex(z))
        return complex(self.model.map(self.model.lam * w))

    def derivative(self, z):
        m = self.model
        w = self.chart.invert(complex(z))
        return complex(m.dmap(m.lam * w)) * m.lam / complex(m.dmap(w))

    def fiber(self, x) -> RootSet:
        m = self.model
        w = self.chart.invert(complex(x)) / m.lam
        z = complex(m.map(w))
        res = abs(self(z) - x)
        return RootSet(np.array([z]), np.array([1]), np.array([res]), True, 0)


@dataclass
class HardyReport:
    epsilons: list[float]
    inner_integrals: list[float]
    outer_integrals: list[float]
    inner_exponent: float
    outer_exponent: float
    inner_increment: float
    outer_increment: float
    bounded_verdict: bool
    nodes: list[int]
    thresholds: dict = field(
        default_factory=lambda: {"exponent": HARDY_EXPONENT_MAX, "increment": HARDY_INCREMENT_MAX, "fit_rungs": HARDY_FIT_RUNGS}
    )


def _ladder_nodes(eps: float) -> int:
    n = 1 << max(10, math.ceil(math.log2(16 / eps)))
    return min(n, 1 << 18)


def _circle_integral(dpsi, r: float, n: int) -> float:
    w = r * np.exp(2j * np.pi * np.arange(n) / n)
    d = np.abs(dpsi(w))
    if d.min() <= 1e-14 * max(1.0, d.max()):
        raise DerivativeVanishes(f"psi' vanishes on |w| = {r}")
    return float(np.sum(1 / d) * 2 * np.pi * r / n)


def _growth(eps: np.ndarray, vals: np.ndarray) -> tuple[float, float]:
    k = HARDY_FIT_RUNGS
    slope = np.polyfit(np.log(1 / eps[-k:]), np.log(vals[-k:]), 1)[0]
    inc = abs(vals[-1] - vals[-2]) / vals[-1]
    return float(slope), float(inc)


def hardy_ladder(dpsi: Callable[[np.ndarray], np.ndarray], R: float, rungs=HARDY_RUNGS) -> HardyReport:
    """``int |dw| / |psi'(w)|`` on ``|w| = 1 + eps`` and ``|w| = R - eps`` for ``eps = 2**-j``.

    The growth exponent is the log-log slope over the finest rungs; bounded
    means both slopes stay under 0.05 and the last rung moves less than 1%.
    """
    eps = np.array([2.0**-j for j in rungs])
    if eps[0] >= (R - 1) / 2:
        raise InputError(f"ladder starts at eps = {eps[0]} but the annulus is only {R - 1} wide")
    nodes = [_ladder_nodes(e) for e in eps]
    inner = np.array([_circle_integral(dpsi, 1 + e, n) for e, n in zip(eps, nodes)])
    outer = np.array([_circle_integral(dpsi, R - e, n) for e, n in zip(eps, nodes)])
    ei, ii = _growth(eps, inner)
    eo, io = _growth(eps, outer)
    bounded = max(ei, eo) < HARDY_EXPONENT_MAX and max(ii, io) < HARDY_INCREMENT_MAX
    return HardyReport(eps.tolist(), inner.tolist(), outer.tolist(), ei, eo, ii, io, bool(bounded), nodes)


def hardy_estimate(model: AnnulusModel, rungs=HARDY_RUNGS) -> HardyReport:
    return hardy_ladder(model.dmap, model.R, rungs)


def _image_curve(model: AnnulusModel, r: float, n: int, orientation: int) -> SampledCurve:
    w = r * np.exp(2j * np.pi * np.arange(n) / n)
    dpsi = model.dmap(w)
    z = model.map(w)
    tangents = dpsi * 1j * w * (2 * np.pi / n)
    density = model.C / (w * w * dpsi * dpsi * 2j * np.pi)
    return SampledCurve(z, tangents, density, orientation)


def plemelj_measure(model: AnnulusModel, nodes: int = 1024, check_hardy: bool = True) -> CurveMeasure:
    """Boundary measure ``orientation * H dz / (2 pi i)`` on the two image circles.

    The outer curve is counterclockwise and the inner one carries
    orientation -1, so by Cauchy's formula the transform is ``H`` on the
    annulus and vanishes on both complementary components.
    """
    if check_hardy:
        report = hardy_estimate(model)
        if not report.bounded_verdict:
            raise HardyUnbounded("1/psi' fails the Hardy ladder; no boundary measure", report=report)
    return CurveMeasure((_image_curve(model, model.R, nodes, 1), _image_curve(model, 1.0, nodes, -1)))


@dataclass
class CheckResult:
    passed: bool
    max_error: float
    samples: int
    note: str = ""


@dataclass
class Part2Report:
    checks: dict[str, CheckResult]
    tolerance: float
    scaling_tolerance: float
    nodes: int

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())


def region_samples(model: AnnulusModel, measure: CurveMeasure, per_region: int = 200, seed: int = 0) -> dict[str, np.ndarray]:
    """Quasi-random validity-zone points in the annulus and in each complementary region."""
    outer_pts, inner_pts = measure.curves[0].nodes, measure.curves[1].nodes
    outer = Path(np.c_[outer_pts.real, outer_pts.imag])
    inner = Path(np.c_[inner_pts.real, inner_pts.imag])
    span = float(np.max(np.abs(outer_pts)))
    lo, hi = complex(-1.6 * span, -1.6 * span), complex(1.6 * span, 1.6 * span)
    n = 8 * per_region
    while True:
        z = sampling.box(n, lo, hi, seed)
        z = z[measure.in_validity_zone(z)]
        xy = np.c_[z.real, z.imag]
        in_out, in_in = outer.contains_points(xy), inner.contains_points(xy)
        regions = {"annulus": z[in_out & ~in_in], "inner": z[in_in], "outer": z[~in_out]}
        if all(len(v) >= per_region for v in regions.values()):
            return {k: v[:per_region] for k, v in regions.items()}
        if n > 1 << 20:
            raise InputError("could not place enough samples in every region")
        n *= 2


def verify_part2(
    model: AnnulusModel,
    samples: int = 200,
    nodes: int = 1024,
    measure: CurveMeasure | None = None,
    seed: int = 0,
    tol: float = VERIFY_TOL,
    k: complex = 2.0,
) -> Part2Report:
    """Check the boundary measure against the model.

    (i) transform equals the fixed field on the annulus; (ii) it vanishes on
    both complementary regions; (iii) it is fixed by the transfer operator of
    the rotation map; (iv) scaling the measure by ``k`` scales the transform.
    """
    mu = measure if measure is not None else plemelj_measure(model, nodes)
    pts = region_samples(model, mu, samples, seed)
    H = model_fixed_field(model)
    inside = pts["annulus"]
    mu_in = cauchy_curve(mu, inside)
    h_in = np.array([H(z) for z in inside])
    err_i = float(np.max(np.abs(mu_in - h_in)))
    err_inner = float(np.max(np.abs(cauchy_curve(mu, pts["inner"]))))
    err_outer = float(np.max(np.abs(cauchy_curve(mu, pts["outer"]))))
    err_ii = max(err_inner, err_outer)
    fpr = fixed_point_residual(AnnulusRotationMap(model), cauchy_field(mu), inside, tol=tol)
    allpts = np.concatenate(list(pts.values()))
    base = cauchy_curve(mu, allpts)
    scaled = cauchy_curve(mu * k, allpts)
    err_iv = float(np.max(np.abs(scaled - k * base) / np.maximum(1.0, np.abs(k * base))))
    checks = {
        "field_inside": CheckResult(err_i <= tol, err_i, len(inside)),
        "zero_outside": CheckResult(
            err_ii <= tol, err_ii, len(pts["inner"]) + len(pts["outer"]), f"inner {err_inner:.3e}, outer {err_outer:.3e}"
        ),
        "transfer_fixed": CheckResult(
            fpr.max_residual <= tol, fpr.max_residual, len(fpr.sample_points), f"{len(fpr.dropped)} dropped near the support"
        ),
        "scaling": CheckResult(err_iv <= SCALING_TOL, err_iv, len(allpts), f"k = {complex(k)}"),
    }
    return Part2Report(checks, tol, SCALING_TOL, len(mu.curves[0].nodes))
