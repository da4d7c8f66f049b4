"""Finite complex measures and their Cauchy transforms.

The Cauchy transform uses the kernel ``1/(w - z)``::

    mu_hat(z) = integral dmu(w) / (w - z)

Atomic measures are summed exactly.  Measures on closed curves are stored as
samples (nodes, tangent increments, density) and integrated with the
trapezoid rule, which is spectrally accurate for smooth periodic data as long
as ``z`` stays a few node spacings away from the curve.

Condition ``integral_{|z|>10} |z| log|z| d|mu| < inf`` at infinity holds for
every measure representable here (finite support), so it is not checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import AtomHit, InputError, PoleHit, TooCloseToSupport
from .ratmap import orbit

ATOM_TOL = 1e-12
ZONE_SPACINGS = 5.0


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Atoms ``alpha_k`` at positions ``b_k``; repeated positions are allowed."""

    positions: np.ndarray
    weights: np.ndarray
    total_variation: float = field(init=False)

    def __post_init__(self):
        b = np.asarray(self.positions, dtype=complex).ravel()
        a = np.asarray(self.weights, dtype=complex).ravel()
        if b.shape != a.shape:
            raise InputError("positions and weights differ in length")
        object.__setattr__(self, "positions", b)
        object.__setattr__(self, "weights", a)
        object.__setattr__(self, "total_variation", float(np.sum(np.abs(a))))

    @classmethod
    def from_atoms(cls, atoms: Sequence[tuple[complex, complex]]) -> "DiscreteMeasure":
        if not len(atoms):
            return cls(np.zeros(0, complex), np.zeros(0, complex))
        b, a = zip(*atoms)
        return cls(np.array(b, complex), np.array(a, complex))

    @property
    def atoms(self) -> list[tuple[complex, complex]]:
        return list(zip(self.positions.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return len(self.positions)

    def __add__(self, other: "DiscreteMeasure") -> "DiscreteMeasure":
        return DiscreteMeasure(
            np.concatenate([self.positions, other.positions]), np.concatenate([self.weights, other.weights])
        )

    def __mul__(self, k: complex) -> "DiscreteMeasure":
        return DiscreteMeasure(self.positions, self.weights * k)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DiscreteMeasure)
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.weights, other.weights)
        )

    def to_json(self) -> dict:
        return {"atoms": [[[b.real, b.imag], [a.real, a.imag]] for b, a in self.atoms]}

    @classmethod
    def from_json(cls, spec: dict) -> "DiscreteMeasure":
        try:
            atoms = [(complex(*b), complex(*a)) for b, a in spec["atoms"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad measure spec: {exc}") from exc
        return cls.from_atoms(atoms)


def cauchy_discrete(mu: DiscreteMeasure, z: complex) -> complex:
    """``sum_k alpha_k / (b_k - z)``, largest weights first."""
    z = complex(z)
    if not len(mu):
        return 0j
    d = mu.positions - z
    if np.min(np.abs(d)) < ATOM_TOL:
        raise AtomHit(f"{z} coincides with an atom")
    order = np.argsort(-np.abs(mu.weights), kind="stable")
    terms = mu.weights[order] / d[order]
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """A closed curve sampled on a uniform parameter grid.

    ``tangents[j]`` is the parametrization derivative at node ``j`` times the
    parameter step, so ``sum g_j phi(z_j) dz_j`` approximates the line
    integral.  The measure carried is ``orientation * density * dz``.
    """

    nodes: np.ndarray
    tangents: np.ndarray
    density: np.ndarray
    orientation: int = 1

    def __post_init__(self):
        for name in ("nodes", "tangents", "density"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex).ravel())
        n = len(self.nodes)
        if n < 64 or n & (n - 1):
            raise InputError(f"curve needs a power-of-two node count >= 64, got {n}")
        if len(self.tangents) != n or len(self.density) != n:
            raise InputError("nodes, tangents and density differ in length")
        if self.orientation not in (1, -1):
            raise InputError("orientation must be +1 or -1")

    @property
    def spacing(self) -> float:
        return float(np.max(np.abs(np.diff(np.append(self.nodes, self.nodes[0])))))

    def distance(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return np.min(np.abs(self.nodes[None, :] - z.reshape(-1, 1)), axis=1).reshape(z.shape)

    @classmethod
    def circle(
        cls,
        center: complex,
        radius: float,
        n: int,
        density: Callable[[np.ndarray], np.ndarray] | np.ndarray | None = None,
        orientation: int = 1,
    ) -> "SampledCurve":
        """Counterclockwise circle; ``density`` is a callable of the node positions or raw samples."""
        theta = 2 * np.pi * np.arange(n) / n
        e = np.exp(1j * theta)
        nodes = center + radius * e
        tangents = 1j * radius * e * (2 * np.pi / n)
        if density is None:
            g = np.zeros(n, complex)
        elif callable(density):
            g = np.asarray(density(nodes), dtype=complex) * np.ones(n)
        else:
            g = np.asarray(density, dtype=complex)
        return cls(nodes, tangents, g, orientation)


@dataclass(frozen=True, eq=False)
class CurveMeasure:
    curves: tuple[SampledCurve, ...]

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))

    def __mul__(self, k: complex) -> "CurveMeasure":
        return CurveMeasure(tuple(replace(c, density=c.density * k) for c in self.curves))

    __rmul__ = __mul__

    def distance(self, z) -> np.ndarray:
        return np.min([c.distance(z) for c in self.curves], axis=0)

    def in_validity_zone(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        ok = np.ones(z.shape, bool)
        for c in self.curves:
            ok &= c.distance(z) >= ZONE_SPACINGS * c.spacing
        return ok


def cauchy_curve(nu: CurveMeasure, z):
    """Trapezoid rule for ``sum_curves orientation * sum_j g_j dz_j / (z_j - z)``.

    Accepts a scalar or an array of points; raises ``TooCloseToSupport`` for
    any point within five node spacings of a curve.
    """
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if not nu.in_validity_zone(zz).all():
        raise TooCloseToSupport(f"point(s) within {ZONE_SPACINGS} node spacings of the support")
    out = np.zeros(zz.shape, complex)
    for c in nu.curves:
        w = c.orientation * c.density * c.tangents
        out += (w[None, :] / (c.nodes[None, :] - zz.reshape(-1, 1))).sum(axis=1).reshape(zz.shape)
    return complex(out[0]) if scalar else out


def cauchy(mu, z):
    if isinstance(mu, DiscreteMeasure):
        if np.ndim(z):
            return np.array([cauchy_discrete(mu, t) for t in np.ravel(z)]).reshape(np.shape(z))
        return cauchy_discrete(mu, z)
    return cauchy_curve(mu, z)


@dataclass(frozen=True)
class Moments:
    """``A`` total mass, ``B`` first moment, ``tail_S = sum |alpha|(1+|b|^2)`` (atoms only)."""

    A: complex
    B: complex
    tail_S: float | None


def moments(mu: DiscreteMeasure | CurveMeasure) -> Moments:
    if isinstance(mu, DiscreteMeasure):
        a, b = mu.weights, mu.positions
        return Moments(
            complex(np.sum(a)), complex(np.sum(a * b)), float(np.sum(np.abs(a) * (1 + np.abs(b) ** 2)))
        )
    A = B = 0j
    for c in mu.curves:
        w = c.orientation * c.density * c.tangents
        A += complex(np.sum(w))
        B += complex(np.sum(w * c.nodes))
    return Moments(A, B, None)


# curve densities that the JSON curve spec may name
NAMED_DENSITIES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "0": lambda w: np.zeros_like(w),
    "1": lambda w: np.ones_like(w),
    "w^-2/(2 pi i)": lambda w: w**-2 / (2j * np.pi),
    "-w^-2/(2 pi i)": lambda w: -(w**-2) / (2j * np.pi),
    "w^3": lambda w: w**3,
}


def curve_from_json(spec: dict) -> SampledCurve:
    allowed = {"center", "radius", "density", "orientation", "nodes"}
    if set(spec) - allowed:
        raise InputError(f"unknown keys in curve spec: {sorted(set(spec) - allowed)}")
    try:
        center = complex(*spec.get("center", [0, 0]))
        radius = float(spec["radius"])
        n = int(spec.get("nodes", 256))
        dens = spec.get("density", "0")
        if isinstance(dens, str):
            if dens not in NAMED_DENSITIES:
                raise InputError(f"unknown density {dens!r}; known: {sorted(NAMED_DENSITIES)}")
            g = NAMED_DENSITIES[dens]
        else:
            g = np.array([complex(a, b) for a, b in dens])
        return SampledCurve.circle(center, radius, n, g, int(spec.get("orientation", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad curve spec: {exc}") from exc


def measure_from_json(spec: dict) -> DiscreteMeasure | CurveMeasure:
    if "atoms" in spec:
        return DiscreteMeasure.from_json(spec)
    if "curves" in spec:
        return CurveMeasure(tuple(curve_from_json(c) for c in spec["curves"]))
    if "radius" in spec:
        return CurveMeasure((curve_from_json(spec),))
    raise InputError("measure spec needs 'atoms', 'curves' or a single curve")


@dataclass
class OrbitMeasure:
    """Truncated orbit measure with the running tail sum ``sum |alpha_n|(1+|b_n|^2)``."""

    measure: DiscreteMeasure
    tail_partial_sums: list[float]
    last_decade_increment: float
    verdict: str


def truncate_orbit_measure(
    f, v: complex, weights: Callable[[int], complex], N: int, escape_radius: float = math.inf
) -> OrbitMeasure:
    """Atoms ``(f^n(v), weights(n))`` for ``n < N`` with a tail-convergence diagnostic.

    The verdict is ``DIVERGING`` when a term overflows; with at least 20 terms
    it is ``CONVERGING`` when the last ten add at most 1e-10 of the total and
    ``DIVERGING`` when they fail to decay below 1e-3.  Anything else is
    ``INCONCLUSIVE``.
    """
    if N <= 0:
        return OrbitMeasure(DiscreteMeasure.from_atoms([]), [], 0.0, "INCONCLUSIVE")
    with np.errstate(over="ignore", invalid="ignore"):
        orb = orbit(f, v, N - 1, escape_radius)
    if orb.pole_hit:
        raise PoleHit(f"orbit of {v} reaches a pole after {len(orb.points)} steps")
    pts = np.array(orb.points, complex)
    alphas = np.array([complex(weights(n)) for n in range(len(pts))])
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.abs(alphas) * (1 + np.abs(pts) ** 2)
    terms = np.where(np.isnan(terms), np.inf, terms)
    partial = np.cumsum(terms).tolist()
    last = terms[-10:]
    inc = float(np.sum(last))
    if not np.all(np.isfinite(terms)) or (len(pts) < N):
        verdict = "DIVERGING"
    elif len(pts) < 20:
        verdict = "INCONCLUSIVE"
    elif inc <= 1e-10 * partial[-1]:
        verdict = "CONVERGING"
    elif np.min(last) >= 1e-3:
        verdict = "DIVERGING"
    else:
        verdict = "INCONCLUSIVE"
    return OrbitMeasure(DiscreteMeasure(pts, alphas), partial, inc, verdict)
