"""Rational maps ``f = p/q`` as dynamical systems."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, NotCoprime, PoleHit, SingularMoebius
from .poly import Poly, RootSet, find_roots

POLE_TOL = 1e-13
COPRIME_TOL = 1e-9
ESCAPE_RADIUS = 1e6
# relative size below which a computed leading coefficient counts as cancelled
CANCEL_RTOL = 1e-13


def _trim_cancelled(c: np.ndarray, scale: np.ndarray) -> Poly:
    """Trim leading coefficients that vanish up to rounding of the terms that formed them."""
    n = len(c)
    while n and abs(c[n - 1]) <= CANCEL_RTOL * max(scale[n - 1], 1e-300):
        n -= 1
    return Poly(c[:n])


def _trim_below(p: Poly, atol: float) -> Poly:
    c = p.coeffs
    n = len(c)
    while n and abs(c[n - 1]) <= atol:
        n -= 1
    return Poly(c[:n])


def _padded(p: Poly, n: int) -> np.ndarray:
    out = np.zeros(n, complex)
    out[: len(p.coeffs)] = p.coeffs
    return out


@dataclass(frozen=True, eq=False)
class RationalMap:
    """``f(z) = num(z) / den(z)`` with coprime numerator and denominator."""

    num: Poly
    den: Poly
    check: bool = field(default=True, repr=False)
    degree: int = field(init=False)
    _dnum: Poly = field(init=False, repr=False)
    _dden: Poly = field(init=False, repr=False)

    def __post_init__(self):
        num = self.num if isinstance(self.num, Poly) else Poly(self.num)
        den = self.den if isinstance(self.den, Poly) else Poly(self.den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        if den.is_zero():
            raise InputError("denominator is identically zero")
        deg = int(max(num.degree, den.degree, 0))
        if deg < 1:
            raise InputError("rational map must have degree >= 1")
        object.__setattr__(self, "degree", deg)
        object.__setattr__(self, "_dnum", num.derivative())
        object.__setattr__(self, "_dden", den.derivative())
        if self.check and den.degree >= 1 and num.degree >= 1:
            rq = find_roots(den, strict=False).roots
            rp = find_roots(num, strict=False).roots
            for a in rq:
                d = np.abs(rp - a)
                if d.size and d.min() <= COPRIME_TOL * max(1.0, abs(a)):
                    raise NotCoprime(f"numerator and denominator share the root {a}")

    # construction helpers
    @classmethod
    def polynomial(cls, coeffs: Sequence[complex]) -> "RationalMap":
        return cls(Poly(coeffs), Poly([1.0]))

    @classmethod
    def from_json(cls, spec: dict) -> "RationalMap":
        try:
            num = [complex(a, b) for a, b in spec["num"]]
            den = [complex(a, b) for a, b in spec.get("den", [[1, 0]])]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad map spec: {exc}") from exc
        extra = set(spec) - {"num", "den"}
        if extra:
            raise InputError(f"unknown keys in map spec: {sorted(extra)}")
        return cls(Poly(num), Poly(den))

    def to_json(self) -> dict:
        return {
            "num": [[c.real, c.imag] for c in self.num.coeffs.tolist()],
            "den": [[c.real, c.imag] for c in self.den.coeffs.tolist()],
        }

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalMap) and self.num == other.num and self.den == other.den

    __hash__ = None

    # evaluation
    def _check_pole(self, z) -> None:
        q = self.den
        thresh = POLE_TOL * q.scale() * np.maximum(1.0, np.abs(z)) ** max(q.degree, 0)
        if np.any(np.abs(q(z)) <= thresh):
            raise PoleHit(f"{z} is a pole of the map")

    def __call__(self, z):
        self._check_pole(z)
        return self.num(z) / self.den(z)

    def derivative(self, z):
        self._check_pole(z)
        qz = self.den(z)
        return self._dnum(z) / qz - self.num(z) * self._dden(z) / qz**2

    def derivative_dual(self, z):
        """``f'(z)`` with generic arithmetic, so ``z`` may be a dual number."""
        qz = self.den(z)
        return (self._dnum(z) * qz - self.num(z) * self._dden(z)) / (qz * qz)

    def critical_numerator(self) -> Poly:
        """``p'q - pq'`` truncated to its structural degree ``2d - 2``."""
        a = self._dnum * self.den
        b = self.num * self._dden
        # both products reach degree 2d - 1 when deg p = deg q; that term cancels identically
        n = 2 * self.degree
        ca, cb = _padded(a, n)[: n - 1], _padded(b, n)[: n - 1]
        return _trim_cancelled(ca - cb, np.abs(ca) + np.abs(cb))

    def preimages(self, x: complex) -> RootSet:
        """Fiber ``{w : f(w) = x}``; a degree drop of ``p - x q`` is a preimage at infinity."""
        x = complex(x)
        n = self.degree + 1
        cp, cq = _padded(self.num, n), _padded(self.den, n)
        P = _trim_cancelled(cp - x * cq, np.abs(cp) + abs(x) * np.abs(cq))
        deg = 0 if P.is_zero() else int(P.degree)
        if deg < 1:
            return RootSet.empty(self.degree - deg)
        return find_roots(P).with_infinity(self.degree - deg)

    def fiber(self, x: complex) -> RootSet:
        return self.preimages(x)

    def __repr__(self) -> str:
        return f"RationalMap(num={self.num.coeffs.tolist()}, den={self.den.coeffs.tolist()})"


def eval_map(f: RationalMap, z: complex) -> complex:
    return f(z)


def derivative_at(f: RationalMap, z: complex) -> complex:
    return f.derivative(z)


def critical_points(f: RationalMap) -> RootSet:
    """Finite critical points, with ``infinity_multiplicity`` counting infinity.

    Multiple poles are critical and appear here as roots of ``p'q - pq'``.
    """
    if f.degree < 2:
        raise InputError("critical points need degree >= 2")
    w = f.critical_numerator()
    expected = 2 * f.degree - 2
    deg = 0 if w.is_zero() else int(w.degree)
    if deg < 1:
        return RootSet.empty(expected - deg)
    return find_roots(w).with_infinity(expected - deg)


def preimages(f: RationalMap, x: complex) -> RootSet:
    return f.preimages(x)


@dataclass
class Orbit:
    points: list[complex]
    derivs: list[complex]
    escaped: bool = False
    escape_index: int | None = None
    pole_hit: bool = False

    @property
    def truncated(self) -> bool:
        return self.escaped or self.pole_hit


def orbit(f, z0: complex, m: int, escape_radius: float = ESCAPE_RADIUS) -> Orbit:
    """``z0, f(z0), ..., f^m(z0)`` with ``(f^n)'(z0)``.

    Stops at the first point beyond ``escape_radius`` (kept as the last point)
    or before a pole.
    """
    if m < 0:
        raise InputError("orbit length must be >= 0")
    z = complex(z0)
    pts, ders = [z], [1 + 0j]
    out = Orbit(pts, ders)
    if abs(z) > escape_radius:
        out.escaped, out.escape_index = True, 0
        return out
    for n in range(1, m + 1):
        try:
            dz = f.derivative(z)
            z = complex(f(z))
        except PoleHit:
            out.pole_hit = True
            break
        ders.append(ders[-1] * dz)
        pts.append(z)
        if not math.isfinite(abs(z)) or abs(z) > escape_radius:
            out.escaped, out.escape_index = True, n
            break
    return out


@dataclass(frozen=True)
class InfinityForm:
    sigma: complex
    b: complex
    valid: bool


def infinity_form(f: RationalMap) -> InfinityForm:
    """``f(z) = sigma z + b + O(1/z)`` when ``deg p = deg q + 1``."""
    if f.num.degree != f.den.degree + 1:
        return InfinityForm(0j, 0j, False)
    quot, _ = f.num.divmod(f.den)
    return InfinityForm(f.num.lead / f.den.lead, complex(quot.coeffs[0]), True)


@dataclass(frozen=True)
class Moebius:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) <= 1e-12:
            raise SingularMoebius("ad - bc vanishes")

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def inverse(self) -> "Moebius":
        return Moebius(self.d, -self.b, -self.c, self.a)


def cancel_common_roots(p: Poly, q: Poly, tol: float = COPRIME_TOL) -> tuple[Poly, Poly]:
    """Remove shared roots of ``p`` and ``q`` found by matching their roots."""
    if p.degree < 1 or q.degree < 1:
        return p, q
    rp, rq = find_roots(p, strict=False), find_roots(q, strict=False)
    mp = dict(zip(rp.roots.tolist(), rp.multiplicities.tolist()))
    mq = dict(zip(rq.roots.tolist(), rq.multiplicities.tolist()))
    common = []
    for a in list(mp):
        for b in list(mq):
            if mq[b] and mp[a] and abs(a - b) <= tol * max(1.0, abs(a)):
                k = min(mp[a], mq[b])
                mp[a] -= k
                mq[b] -= k
                common.append(((a + b) / 2, k))
    if not common:
        return p, q
    for r, k in common:
        lin = Poly([-r, 1.0]) ** k
        p, _ = p.divmod(lin)
        q, _ = q.divmod(lin)
    return p, q


def moebius_conjugate(f: RationalMap, M: Moebius | Sequence[complex]) -> RationalMap:
    """``M o f o M^{-1}`` in lowest terms."""
    if not isinstance(M, Moebius):
        M = Moebius(*M)
    inv = M.inverse()
    d = f.degree
    top = Poly([inv.b, inv.a])  # numerator of M^{-1}
    bot = Poly([inv.d, inv.c])  # denominator of M^{-1}
    tops = [top**k for k in range(d + 1)]
    bots = [bot**k for k in range(d + 1)]

    def homogenize(p: Poly) -> Poly:
        out = Poly()
        for k, ck in enumerate(_padded(p, d + 1)):
            if ck:
                out = out + tops[k] * bots[d - k] * complex(ck)
        return out

    P, Q = homogenize(f.num), homogenize(f.den)
    num = P * M.a + Q * M.b
    den = P * M.c + Q * M.d
    atol = 1e-14 * max(num.scale(), den.scale())
    num, den = _trim_below(num, atol), _trim_below(den, atol)
    num, den = cancel_common_roots(num, den)
    return RationalMap(num, den)
