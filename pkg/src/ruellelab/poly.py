"""Complex polynomials in ascending coefficient order and a simultaneous root finder.

Roots are computed with the Aberth-Ehrlich iteration started from circles
read off the Newton polygon of the coefficients.  Nearby approximations are
merged afterwards, so a root of multiplicity m shows up once with
multiplicity m instead of as m nearly equal numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInput, NonConvergence

RESIDUAL_TOL = 1e-12
MAX_ITER = 200
CLUSTER_RADIUS = 1e-7

_EPS = np.finfo(float).eps


class Poly:
    """Immutable complex polynomial, ``coeffs[k]`` multiplies ``z**k``.

    Trailing (highest-degree) exact zeros are trimmed on construction.  The
    zero polynomial has an empty coefficient array and degree ``-inf``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[complex] | np.ndarray = ()):
        c = np.array(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs, dtype=complex).ravel()
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:0]
        c.setflags(write=False)
        self._c = c

    @classmethod
    def from_roots(cls, roots: Sequence[complex], lead: complex = 1.0) -> "Poly":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> float:
        return len(self._c) - 1 if len(self._c) else -math.inf

    @property
    def lead(self) -> complex:
        return complex(self._c[-1]) if len(self._c) else 0j

    def is_zero(self) -> bool:
        return len(self._c) == 0

    def scale(self) -> float:
        """Largest coefficient modulus."""
        return float(np.max(np.abs(self._c))) if len(self._c) else 0.0

    def trimmed(self, rtol: float) -> "Poly":
        """Drop leading coefficients that are below ``rtol`` times the largest one."""
        c = self._c
        s = self.scale()
        n = len(c)
        while n and abs(c[n - 1]) <= rtol * s:
            n -= 1
        return Poly(c[:n])

    def __call__(self, z):
        # generic Horner loop also serves dual numbers
        c = self._c
        if not len(c):
            return 0 * z
        if isinstance(z, np.ndarray):
            acc = np.full(z.shape, c[-1], dtype=complex)
            for a in c[-2::-1]:
                acc = acc * z + a
            return acc
        acc = complex(c[-1])
        for a in c[-2::-1]:
            acc = acc * z + complex(a)
        return acc

    def __add__(self, other: "Poly | complex") -> "Poly":
        other = _as_poly(other)
        n = max(len(self._c), len(other._c))
        out = np.zeros(n, dtype=complex)
        out[: len(self._c)] += self._c
        out[: len(other._c)] += other._c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-self._c)

    def __sub__(self, other: "Poly | complex") -> "Poly":
        return self + (-_as_poly(other))

    def __rsub__(self, other: complex) -> "Poly":
        return _as_poly(other) - self

    def __mul__(self, other: "Poly | complex") -> "Poly":
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly()
            return Poly(np.convolve(self._c, other._c))
        return Poly(self._c * complex(other))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly([1.0])
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return len(self._c) == len(other._c) and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(tuple(self._c.tolist()))

    def __repr__(self) -> str:
        return f"Poly({self._c.tolist()})"

    def allclose(self, other: "Poly", rtol: float = 1e-12, atol: float = 1e-14) -> bool:
        n = max(len(self._c), len(other._c))
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[: len(self._c)] = self._c
        b[: len(other._c)] = other._c
        return bool(np.allclose(a, b, rtol=rtol, atol=atol))

    def derivative(self) -> "Poly":
        c = self._c
        if len(c) <= 1:
            return Poly()
        return Poly(c[1:] * np.arange(1, len(c)))

    def compose(self, inner: "Poly") -> "Poly":
        """``self(inner(z))`` by Horner's scheme on polynomials."""
        c = self._c
        if not len(c):
            return Poly()
        acc = Poly([c[-1]])
        for a in c[-2::-1]:
            acc = acc * inner + complex(a)
        return acc

    def divmod(self, divisor: "Poly") -> tuple["Poly", "Poly"]:
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        num = self._c.copy()
        den = divisor._c
        dn = len(den) - 1
        if len(num) - 1 < dn:
            return Poly(), Poly(num)
        quot = np.zeros(len(num) - dn, dtype=complex)
        for k in range(len(quot) - 1, -1, -1):
            q = num[k + dn] / den[-1]
            quot[k] = q
            num[k : k + dn + 1] -= q * den
        return Poly(quot), Poly(num[:dn])

    def scaled_residual(self, z) -> np.ndarray:
        """``|p(z)| / (max|coeff| * max(1, |z|)**deg)``."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape)
        small = np.abs(z) <= 1.0
        out[small] = np.abs(self(z[small]))
        # for |z| > 1, |p(z)| / |z|**deg is the reversed polynomial at 1/z
        rev = Poly(self.coeffs[::-1])
        out[~small] = np.abs(rev(1.0 / z[~small]))
        return out / self.scale()


def _as_poly(x) -> Poly:
    return x if isinstance(x, Poly) else Poly([x])


def add(p: Poly, q: Poly) -> Poly:
    return p + q


def mul(p: Poly, q: Poly) -> Poly:
    return p * q


def compose(p: Poly, q: Poly) -> Poly:
    return p.compose(q)


def derivative(p: Poly) -> Poly:
    return p.derivative()


@dataclass(frozen=True)
class RootSet:
    """Distinct roots with multiplicities.

    ``infinity_multiplicity`` is only used by callers that solve on the
    sphere (fibers and critical points of rational maps); it counts towards
    the degree but has no entry in ``roots``.
    """

    roots: np.ndarray
    multiplicities: np.ndarray
    residuals: np.ndarray
    converged: bool = True
    infinity_multiplicity: int = 0
    tolerance: float = RESIDUAL_TOL

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def total_multiplicity(self) -> int:
        return int(np.sum(self.multiplicities)) + self.infinity_multiplicity

    def with_infinity(self, mult: int) -> "RootSet":
        return RootSet(self.roots, self.multiplicities, self.residuals, self.converged, mult, self.tolerance)

    @classmethod
    def empty(cls, infinity_multiplicity: int = 0) -> "RootSet":
        return cls(np.zeros(0, complex), np.zeros(0, int), np.zeros(0), True, infinity_multiplicity)


@dataclass
class _Workspace:
    c: np.ndarray  # ascending, c[-1] != 0, c[0] != 0
    n: int = field(init=False)
    rev: np.ndarray = field(init=False)
    absc: np.ndarray = field(init=False)
    absrev: np.ndarray = field(init=False)

    def __post_init__(self):
        self.n = len(self.c) - 1
        self.rev = self.c[::-1].copy()
        self.absc = np.abs(self.c)
        self.absrev = self.absc[::-1].copy()

    def newton_ratio(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``p(z)/p'(z)`` and a flag for roots already at backward-error level."""
        ratio = np.empty_like(z)
        done = np.zeros(z.shape, bool)
        small = np.abs(z) <= 1.0
        if small.any():
            zs = z[small]
            p, dp, bound = _horner3(self.c, self.absc, zs)
            done[small] = np.abs(p) <= 4 * _EPS * bound
            with np.errstate(all="ignore"):
                ratio[small] = p / dp
        if (~small).any():
            # evaluate the reversed polynomial at 1/z to avoid overflow
            y = 1.0 / z[~small]
            r, dr, bound = _horner3(self.rev, self.absrev, y)
            done[~small] = np.abs(r) <= 4 * _EPS * bound
            with np.errstate(all="ignore"):
                ratio[~small] = 1.0 / (y * (self.n - y * dr / r))
        return ratio, done


def _horner3(c: np.ndarray, absc: np.ndarray, z: np.ndarray):
    p = np.full(z.shape, c[-1], dtype=complex)
    dp = np.zeros(z.shape, dtype=complex)
    az = np.abs(z)
    bound = np.full(z.shape, absc[-1])
    for a, aa in zip(c[-2::-1], absc[-2::-1]):
        dp = dp * z + p
        p = p * z + a
        bound = bound * az + aa
    return p, dp, bound


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    """Points on circles whose radii come from the upper hull of (k, log|c_k|)."""
    n = len(c) - 1
    logs = np.full(n + 1, -np.inf)
    nz = np.abs(c) > 0
    logs[nz] = np.log(np.abs(c[nz]))
    hull = [0]
    for k in range(1, n + 1):
        if not np.isfinite(logs[k]):
            continue
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # drop j if it lies on or below the segment i -> k
            if (logs[j] - logs[i]) * (k - i) <= (logs[k] - logs[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    guesses = []
    sigma = 0.7
    for i, j in zip(hull[:-1], hull[1:]):
        m = j - i
        radius = math.exp((logs[i] - logs[j]) / m)
        for t in range(m):
            ang = 2 * math.pi * t / m + 2 * math.pi * i / n + sigma
            guesses.append(radius * complex(math.cos(ang), math.sin(ang)))
    return np.array(guesses, dtype=complex)


def _aberth(c: np.ndarray, max_iter: int) -> tuple[np.ndarray, bool]:
    ws = _Workspace(c)
    n = ws.n
    if n == 1:
        return np.array([-c[0] / c[1]]), True
    z = _initial_guesses(c)
    active = np.ones(n, bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if not idx.size:
            return z, True
        ratio, done = ws.newton_ratio(z[idx])
        diff = z[idx, None] - z[None, :]
        diff[np.arange(idx.size), idx] = 1.0
        with np.errstate(all="ignore"):
            inv = 1.0 / diff
        inv[np.arange(idx.size), idx] = 0.0
        s = inv.sum(axis=1)
        with np.errstate(all="ignore"):
            corr = ratio / (1.0 - ratio * s)
        corr[~np.isfinite(corr)] = 0.0
        corr[done] = 0.0
        z[idx] -= corr
        small_step = np.abs(corr) <= 2 * _EPS * np.abs(z[idx])
        active[idx[done | small_step]] = False
    return z, not active.any()


def _cluster(z: np.ndarray, mult: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-link merge of points closer than ``radius * max(1, |z|)``."""
    n = len(z)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) <= radius * max(1.0, abs(z[i]), abs(z[j])):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    roots, mults = [], []
    for members in groups.values():
        w = mult[members].astype(float)
        roots.append(np.sum(z[members] * w) / w.sum())
        mults.append(int(mult[members].sum()))
    order = np.lexsort((np.imag(roots), np.real(roots)))
    return np.array(roots, complex)[order], np.array(mults, int)[order]


def find_roots(
    p: Poly,
    tol: float = RESIDUAL_TOL,
    max_iter: int = MAX_ITER,
    cluster_radius: float = CLUSTER_RADIUS,
    strict: bool = True,
) -> RootSet:
    """All complex roots of ``p`` with multiplicities.

    Raises ``DegenerateInput`` for constants.  If the iteration cap is hit or a
    residual exceeds ``tol`` the best iterate is returned with
    ``converged=False``; with ``strict=True`` a ``NonConvergence`` carrying
    that result is raised instead.
    """
    if not isinstance(p, Poly):
        p = Poly(p)
    if p.degree < 1:
        raise DegenerateInput(f"polynomial of degree {p.degree} has no roots to find")
    c = p.coeffs
    # exact roots at the origin
    k0 = int(np.flatnonzero(c)[0])
    rest = c[k0:]
    pts, mult = [], []
    if k0:
        pts.append(0j)
        mult.append(k0)
    if len(rest) > 1:
        z, _ = _aberth(rest / rest[-1], max_iter)
        pts.extend(z.tolist())
        mult.extend([1] * len(z))
    roots, mults = _cluster(np.array(pts, complex), np.array(mult, int), cluster_radius)
    res = p.scaled_residual(roots)
    # hitting the cap is harmless when every residual already passes
    converged = bool(np.all(res <= tol))
    out = RootSet(roots, mults, res, converged, 0, tol)
    if strict and not converged:
        raise NonConvergence(
            f"root finder stopped with max scaled residual {float(np.max(res)):.3e}", result=out
        )
    return out
