"""Exit criteria for the build, each at its stated tolerance."""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from ruellelab import sampling
from ruellelab.critdiag import decay_rate, summability
from ruellelab.errors import DegenerateCritical, NotCoprime, NotCritical, PoleHit
from ruellelab.hermanmodel import (
    GOLDEN_LAMBDA,
    AnnulusModel,
    AnnulusRotationMap,
    hardy_estimate,
    hardy_ladder,
    model_fixed_field,
    rotation_eigenspace,
    verify_part2,
)
from ruellelab.measure import DiscreteMeasure
from ruellelab.poly import Poly
from ruellelab.ratmap import RationalMap, critical_points, orbit
from ruellelab.transfer import (
    AnnularSector,
    cauchy_field,
    fixed_point_residual,
    invariant_mass,
    line_field_defect,
    multiplier_relation,
    power_field,
)
from ruellelab.transversal import (
    FamilySpec,
    finite_difference_orbit_derivative,
    orbit_derivative,
    track_critical_point,
    transversality,
)

pytestmark = pytest.mark.acceptance

CHEB = RationalMap.polynomial([-2, 0, 1])


def test_c1_unicritical_transversality(criterion):
    t0 = time.perf_counter()
    rep = transversality(FamilySpec.unicritical(2, -2), 0, 30)
    elapsed = time.perf_counter() - t0
    err = abs(rep.series_estimate - 2 / 3)
    ok = err <= 1e-9 and rep.gap <= 1e-8 and rep.nonzero_verdict and elapsed < 1
    criterion(1, ok, f"|series - 2/3| = {err:.1e}, gap = {rep.gap:.1e}, nonzero = {rep.nonzero_verdict}, {elapsed:.3f}s")
    assert ok


def test_c2_summability(criterion):
    rep = summability(CHEB, 0, 40)
    err = abs(rep.total - 4 / 3)
    rate = decay_rate(rep.terms, 5, 30)
    ok = err <= 1e-9 and abs(rate - 0.25) <= 1e-6
    criterion(2, ok, f"|sum - 4/3| = {err:.1e}, decay rate = {rate:.9f}")
    assert ok


def test_c3_rotation_fixed_point(criterion):
    t0 = time.perf_counter()
    model = AnnulusModel(2.0, GOLDEN_LAMBDA)
    f, H = AnnulusRotationMap(model), model_fixed_field(model)
    samples = sampling.annulus(100, 1.01, 1.99, seed=0)
    rep = fixed_point_residual(f, H, samples)
    mult = multiplier_relation(f, H, 1.5)
    lf = line_field_defect(f, H, samples)
    elapsed = time.perf_counter() - t0
    ok = (
        rep.verdict == "FIXED"
        and rep.max_residual <= 1e-10
        and len(rep.sample_points) == 100
        and abs(mult.L - 1) <= 1e-12
        and mult.realness <= 1e-12
        and lf.max_defect <= 1e-10
        and elapsed < 1
    )
    criterion(
        3,
        ok,
        f"{rep.verdict}, max residual {rep.max_residual:.1e}, |L-1| = {abs(mult.L - 1):.1e}, "
        f"realness {mult.realness:.1e}, line field {lf.max_defect:.1e}, {elapsed:.3f}s",
    )
    assert ok


def test_c4_plemelj_verification(criterion):
    t0 = time.perf_counter()
    rep = verify_part2(AnnulusModel(2.0, GOLDEN_LAMBDA), samples=200, nodes=1024)
    elapsed = time.perf_counter() - t0
    inside, outside, scale = rep.checks["field_inside"], rep.checks["zero_outside"], rep.checks["scaling"]
    ok = (
        inside.max_error <= 1e-7
        and inside.samples == 200
        and outside.max_error <= 1e-7
        and outside.samples == 400
        and scale.max_error <= 1e-12
        and rep.nodes == 1024
        and elapsed < 5
    )
    criterion(
        4,
        ok,
        f"inside {inside.max_error:.1e}, outside {outside.max_error:.1e}, scaling {scale.max_error:.1e}, "
        f"transfer {rep.checks['transfer_fixed'].max_error:.1e}, {elapsed:.3f}s",
    )
    assert ok


def test_c5_lemma2_falsifiability(criterion):
    rng = np.random.default_rng(20261015)
    samples = sampling.box(256, -3 - 3j, 3 + 3j, seed=1)
    maxima, verdicts = [], []
    for _ in range(20):
        k = int(rng.integers(2, 12))
        # atoms along the orbit -2, 2, 2, ... with A = 0 and a tail that converges
        tail = (rng.normal(size=k - 1) + 1j * rng.normal(size=k - 1)) * 4.0 ** -np.arange(1, k)
        weights = np.concatenate([[-tail.sum()], tail])
        positions = np.array([-2] + [2] * (k - 1), complex)
        mu = DiscreteMeasure(positions, weights)
        assert abs(weights.sum()) < 1e-14 and abs(weights[0]) > 0
        rep = fixed_point_residual(CHEB, cauchy_field(mu), samples)
        maxima.append(rep.max_residual)
        verdicts.append(rep.verdict)
    ok = all(v == "NOT_FIXED" for v in verdicts) and min(maxima) >= 1e-3
    criterion(5, ok, f"{verdicts.count('NOT_FIXED')}/20 NOT_FIXED, smallest max residual {min(maxima):.3e}")
    assert ok


def test_c6_invariant_mass(criterion):
    model = AnnulusModel(2.0, GOLDEN_LAMBDA)
    rot = invariant_mass(AnnulusRotationMap(model), model_fixed_field(model), AnnularSector(1.0, 2.0, 0.0, math.pi / 2))
    sq = invariant_mass(RationalMap.polynomial([0, 0, 1]), power_field(-2), AnnularSector(1.0, 2.0))
    closed_a, closed_pre = 2 * math.pi * math.log(2), math.pi * math.log(2)
    ok = (
        rot.rel_gap <= 1e-6
        and abs(sq.rel_gap - 0.5) <= 1e-3
        and abs(sq.lambda_A - closed_a) <= 1e-6 * closed_a
        and abs(sq.lambda_preimage - closed_pre) <= 1e-6 * closed_pre
    )
    criterion(6, ok, f"rotation rel_gap {rot.rel_gap:.1e}, z^2 rel_gap {sq.rel_gap:.6f} ({sq.lambda_A:.6f} vs {sq.lambda_preimage:.6f})")
    assert ok


def _random_map(rng, max_deg=8):
    while True:
        dp, dq = int(rng.integers(1, max_deg + 1)), int(rng.integers(0, max_deg + 1))
        p = rng.uniform(-1, 1, dp + 1) + 1j * rng.uniform(-1, 1, dp + 1)
        q = rng.uniform(-1, 1, dq + 1) + 1j * rng.uniform(-1, 1, dq + 1)
        try:
            return RationalMap(Poly(p), Poly(q))
        except NotCoprime:
            continue


def test_c7_root_fiber_suite(criterion):
    rng = np.random.default_rng(7)
    worst, conserved = 0.0, True
    for _ in range(1000):
        f = _random_map(rng)
        x = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        rs = f.preimages(x)
        conserved &= rs.total_multiplicity == f.degree
        if len(rs):
            # residual of p - x q at each reported preimage, scaled as in the root finder
            P = f.num - f.den * x
            worst = max(worst, float(np.max(P.scaled_residual(rs.roots))))
    # AD vs FD on tame instances: critical orbit stays in |z| <= 10, derivative and
    # critical point speed stay <= 1e3; FD is Richardson-extrapolated central differences
    matched, tried, worst_ad = 0, 0, 0.0
    while matched < 200:
        tried += 1
        f = _random_map(rng, max_deg=4)
        if f.degree < 2:
            continue
        u = Poly(rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
        fam = FamilySpec(f, u)
        crits = critical_points(f).roots
        if not len(crits):
            continue
        c = complex(crits[rng.integers(len(crits))])
        m = int(rng.integers(1, 13))
        try:
            speed = abs(track_critical_point(fam, c).deriv)
            ad = orbit_derivative(fam, c, m)
            if orbit(f, c, m, 10.0).truncated or speed > 1e3 or abs(ad.deriv) > 1e3:
                continue
            fd = finite_difference_orbit_derivative(fam, c, m, richardson=True)
        except (DegenerateCritical, NotCritical, PoleHit):
            continue
        worst_ad = max(worst_ad, abs(ad.deriv - fd) / max(1.0, abs(ad.deriv)))
        matched += 1
    ok = worst <= 1e-8 and conserved and worst_ad <= 1e-5
    criterion(
        7,
        ok,
        f"worst preimage residual {worst:.1e}, multiplicity conserved {conserved}, "
        f"AD vs FD worst {worst_ad:.1e} over 200 instances ({tried} drawn)",
    )
    assert ok


def test_c8_eigenspace_exactness(criterion):
    N = 50
    mismatches = 0
    cases = 0
    for q in range(1, 21):
        for p in range(q):
            if Fraction(p, q).denominator != q:
                continue
            cases += 1
            lam = complex(math.cos(2 * math.pi * p / q), math.sin(2 * math.pi * p / q))
            expected = [n for n in range(-N, N + 1) if (n + 2) % q == 0]
            mismatches += rotation_eigenspace(lam, N) != expected
    golden = rotation_eigenspace(GOLDEN_LAMBDA, N)
    ok = mismatches == 0 and golden == [-2]
    criterion(8, ok, f"{cases - mismatches}/{cases} rational rotations exact, golden -> {golden}")
    assert ok


def test_c9_hardy_ladder(criterion):
    R = 2.0
    rep = hardy_estimate(AnnulusModel(R))
    inner_err = max(abs(i - 2 * math.pi * (1 + e)) for e, i in zip(rep.epsilons, rep.inner_integrals))
    outer_err = max(abs(o - 2 * math.pi * (R - e)) for e, o in zip(rep.epsilons, rep.outer_integrals))
    stub = hardy_ladder(lambda w: w - 1, R)
    ok = (
        abs(rep.inner_exponent) <= 1e-3
        and abs(rep.outer_exponent) <= 1e-3
        and max(inner_err, outer_err) <= 1e-6
        and rep.bounded_verdict
        and not stub.bounded_verdict
    )
    criterion(
        9,
        ok,
        f"exponents {rep.inner_exponent:.1e}/{rep.outer_exponent:.1e}, rung error {max(inner_err, outer_err):.1e}, "
        f"stub bounded = {stub.bounded_verdict} (exponent {stub.inner_exponent:.3f})",
    )
    assert ok
