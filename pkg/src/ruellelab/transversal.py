"""One-parameter families ``f_t = f + t u`` and the transversality limit along critical orbits.

For a simple critical point ``c`` of ``f`` the quotient

    q_m = (d/dt)|_{t=0} f_t^m(c(t)) / (f^{m-1})'(f(c))

is compared with the series ``sum_{n>=0} u(f^n(c)) / (f^n)'(f(c))``.  The
numerator of ``q_m`` is propagated with dual numbers, so the two routes are
computed independently and their gap is a genuine consistency check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dual import DualComplex
from .errors import CriticalOrbit, DegenerateCritical, InputError, NonConvergence, NotCritical, PoleHit
from .poly import Poly
from .ratmap import RationalMap

CRIT_CHECK_TOL = 1e-8
DEGENERATE_TOL = 1e-8
CONVERGENCE_RTOL = 1e-9
CONVERGENCE_RUN = 5
RANK_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """``f_t(z) = base(z) + t * direction(z)``, affine in ``t``."""

    base: RationalMap
    direction_num: Poly
    direction_den: Poly = field(default_factory=lambda: Poly([1.0]))
    description: str = ""

    def __post_init__(self):
        if self.direction_den.is_zero():
            raise InputError("direction denominator is zero")

    @classmethod
    def unicritical(cls, d: int, v0: complex) -> "FamilySpec":
        """``z**d + v`` around ``v = v0``, moving along ``u = 1``."""
        c = [0j] * (d + 1)
        c[0], c[d] = complex(v0), 1.0
        return cls(RationalMap.polynomial(c), Poly([1.0]), Poly([1.0]), f"z^{d} + v at v0={v0}")

    @classmethod
    def from_json(cls, spec: dict) -> "FamilySpec":
        extra = set(spec) - {"base", "direction", "description"}
        if extra:
            raise InputError(f"unknown keys in family spec: {sorted(extra)}")
        try:
            base = RationalMap.from_json(spec["base"])
            u = spec["direction"]
            num = Poly([complex(a, b) for a, b in u["num"]])
            den = Poly([complex(a, b) for a, b in u.get("den", [[1, 0]])])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad family spec: {exc}") from exc
        return cls(base, num, den, spec.get("description", ""))

    def to_json(self) -> dict:
        return {
            "base": self.base.to_json(),
            "direction": {
                "num": [[c.real, c.imag] for c in self.direction_num.coeffs.tolist()],
                "den": [[c.real, c.imag] for c in self.direction_den.coeffs.tolist()],
            },
            "description": self.description,
        }

    def u(self, z):
        return self.direction_num(z) / self.direction_den(z)

    def du(self, z):
        q = self.direction_den(z)
        return (self.direction_num.derivative()(z) * q - self.direction_num(z) * self.direction_den.derivative()(z)) / (
            q * q
        )

    def is_zero(self) -> bool:
        return self.direction_num.is_zero()

    def at(self, t: complex) -> RationalMap:
        """The member ``f_t`` as a rational map (for finite-difference checks)."""
        p, q = self.base.num, self.base.den
        num = p * self.direction_den + q * self.direction_num * complex(t)
        return RationalMap(num, q * self.direction_den, check=False)

    def shifted(self, v0: complex) -> "FamilySpec":
        """Same direction, base replaced by ``f + v0``."""
        base = RationalMap(self.base.num + self.base.den * complex(v0), self.base.den)
        return FamilySpec(base, self.direction_num, self.direction_den, self.description)

    def __add__(self, other: "FamilySpec") -> "FamilySpec":
        num = self.direction_num * other.direction_den + other.direction_num * self.direction_den
        return FamilySpec(self.base, num, self.direction_den * other.direction_den)

    def __mul__(self, k: complex) -> "FamilySpec":
        return FamilySpec(self.base, self.direction_num * complex(k), self.direction_den)

    __rmul__ = __mul__


def _second_derivative(f: RationalMap, c: complex) -> complex:
    return f.derivative_dual(DualComplex(complex(c), 1 + 0j)).deriv


def _check_critical(f: RationalMap, c: complex) -> None:
    if abs(complex(f.derivative(c))) > CRIT_CHECK_TOL * max(1.0, abs(c)):
        raise NotCritical(f"{c} is not a critical point")


def track_critical_point(family: FamilySpec, c: complex) -> DualComplex:
    """First-order motion ``c(t) = c + t c'`` of a simple critical point.

    Differentiating ``f_t'(c(t)) = 0`` gives ``c' = -u'(c) / f''(c)``.
    """
    c = complex(c)
    f = family.base
    _check_critical(f, c)
    f2 = _second_derivative(f, c)
    if abs(f2) <= DEGENERATE_TOL * max(1.0, abs(c)):
        raise DegenerateCritical(f"f''({c}) vanishes; first-order tracking is invalid")
    return DualComplex(c, -complex(family.du(c)) / f2)


def orbit_derivative(family: FamilySpec, c: complex, m: int) -> DualComplex:
    """``f_t^m(c(t))`` at ``t = 0`` with its exact ``t``-derivative."""
    z = track_critical_point(family, c)
    f = family.base
    for _ in range(m):
        f._check_pole(z.value)
        if family.direction_den(z.value) == 0:
            raise PoleHit(f"{z.value} is a pole of the direction")
        step = f.num(z) / f.den(z)
        z = DualComplex(step.value, step.deriv + complex(family.u(z.value)))
    return z


@dataclass
class TransversalityReport:
    critical_point: complex
    quotients: list[complex]
    series_partials: list[complex]
    limit_estimate: complex
    series_estimate: complex
    gap: float
    quotients_converged: bool
    series_converged: bool
    nonzero_verdict: bool
    margin: float
    tolerance: float = CONVERGENCE_RTOL


def _settled(seq: list[complex], rtol: float, run: int) -> bool:
    if len(seq) < run + 1:
        return False
    tail = seq[-(run + 1) :]
    est = tail[-1]
    return all(abs(b - a) <= rtol * abs(est) for a, b in zip(tail, tail[1:]))


def transversality(
    family: FamilySpec, c: complex, m_max: int, rtol: float = CONVERGENCE_RTOL, strict: bool = True
) -> TransversalityReport:
    """Quotient sequence and printed series for ``m, M = 1 .. m_max``.

    ``quotients[m-1]`` is the quotient for ``m``; ``series_partials[M]`` sums
    ``n = 0 .. M``.  The quotient for ``m`` equals the series partial sum with
    ``M = m - 1`` whenever the chain rule holds, which the gap monitors.
    """
    c = complex(c)
    f = family.base
    if m_max < 1:
        raise InputError("m_max must be >= 1")
    z = track_critical_point(family, c)
    # orbit of c and (f^n)'(v) along it
    pts = [c]
    dv = [1 + 0j]
    for n in range(m_max):
        f._check_pole(pts[-1])
        pts.append(complex(f(pts[-1])))
        if n >= 1:
            dv.append(dv[-1] * complex(f.derivative(pts[-2])))
            if dv[-1] == 0 or abs(complex(f.derivative(pts[-2]))) <= CRIT_CHECK_TOL * max(1.0, abs(pts[-2])):
                raise CriticalOrbit(f"orbit of f(c) meets the critical point {pts[-2]}")
    quotients, partials = [], []
    acc_re, acc_im = [], []
    for m in range(1, m_max + 1):
        f._check_pole(z.value)
        step = f.num(z) / f.den(z)
        z = DualComplex(step.value, step.deriv + complex(family.u(z.value)))
        quotients.append(z.deriv / dv[m - 1])
    for n in range(m_max):
        term = complex(family.u(pts[n])) / dv[n]
        acc_re.append(term.real)
        acc_im.append(term.imag)
        partials.append(complex(math.fsum(acc_re), math.fsum(acc_im)))
    q_ok = _settled(quotients, rtol, CONVERGENCE_RUN)
    s_ok = _settled(partials, rtol, CONVERGENCE_RUN)
    if strict and not (q_ok or s_ok):
        gap = abs(quotients[-1] - partials[-1])
        report = TransversalityReport(c, quotients, partials, quotients[-1], partials[-1], gap, q_ok, s_ok, False, 0.0, rtol)
        raise NonConvergence(f"neither sequence settled within m_max={m_max}", result=report)
    lim, ser = quotients[-1], partials[-1]
    margin = abs(lim)
    nonzero = margin > 10 * rtol
    return TransversalityReport(c, quotients, partials, lim, ser, abs(lim - ser), q_ok, s_ok, nonzero, margin, rtol)


@dataclass
class LMatrix:
    entries: np.ndarray
    singular_values: np.ndarray
    rank: int
    threshold: float = RANK_RTOL


def l_matrix(families: list[FamilySpec], crits: list[complex], m_max: int) -> LMatrix:
    """``L[j, k]`` = transversality limit of critical point ``j`` along family ``k``."""
    L = np.zeros((len(crits), len(families)), complex)
    for k, fam in enumerate(families):
        for j, c in enumerate(crits):
            L[j, k] = transversality(fam, c, m_max).limit_estimate
    sv = np.linalg.svd(L, compute_uv=False) if L.size else np.zeros(0)
    rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv.size and sv[0] > 0 else 0
    return LMatrix(L, sv, rank)


def finite_difference_orbit_derivative(
    family: FamilySpec, c: complex, m: int, h: float = 1e-6, richardson: bool = False
) -> complex:
    """Central difference of ``f_t^m(c(t))`` with ``c(t)`` re-solved by Newton for each ``t``.

    Independent of the dual-number path: it works on the explicit members
    ``f_{+h}`` and ``f_{-h}`` and their exact critical points.  With
    ``richardson`` the steps ``h`` and ``h/2`` are combined to cancel the
    ``O(h^2)`` error, which matters on orbits with fast derivative growth.
    """

    def value(t: float) -> complex:
        ft = family.at(t)
        w = ft.critical_numerator()
        dw = w.derivative()
        z = complex(c)
        for _ in range(50):
            step = w(z) / dw(z)
            z -= step
            if abs(step) <= 1e-15 * max(1.0, abs(z)):
                break
        for _ in range(m):
            z = complex(ft(z))
        return z

    def central(step: float) -> complex:
        return (value(step) - value(-step)) / (2 * step)

    if richardson:
        return (4 * central(h / 2) - central(h)) / 3
    return central(h)
