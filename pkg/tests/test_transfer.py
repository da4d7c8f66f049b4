import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ruellelab import sampling
from ruellelab.errors import AllSamplesInvalid, CriticalValue, InfinitePreimageUnhandled, ZeroDenominator
from ruellelab.measure import DiscreteMeasure
from ruellelab.poly import Poly
from ruellelab.ratmap import RationalMap
from ruellelab.transfer import (
    AnnularSector,
    EvaluableField,
    apply,
    cauchy_field,
    constant_field,
    fixed_point_residual,
    invariant_mass,
    line_field_defect,
    multiplier_relation,
    power_field,
)

SQ = RationalMap.polynomial([0, 0, 1])
CHEB = RationalMap.polynomial([-2, 0, 1])
LAM = cmath.exp(2j * math.pi * (math.sqrt(5) - 1) / 2)
ROT = RationalMap.polynomial([0, LAM])
ZINV2 = power_field(-2)


def test_apply_examples():
    assert abs(apply(SQ, constant_field(1), 4) - 0.125) < 1e-15
    assert abs(apply(ROT, ZINV2, 3) - 1 / 9) < 1e-15
    with pytest.raises(CriticalValue):
        apply(SQ, constant_field(1), 0)


def test_infinite_preimage_needs_decay():
    f = RationalMap(Poly([1, 0, 1]), Poly([0, 1, 1]))
    with pytest.raises(InfinitePreimageUnhandled):
        apply(f, constant_field(1), 1)
    assert np.isfinite(abs(apply(f, ZINV2, 1)))


def test_fixed_residual_examples():
    samples = sampling.annulus(100, 1.01, 1.99, seed=3)
    rep = fixed_point_residual(ROT, ZINV2, samples)
    assert rep.verdict == "FIXED" and rep.max_residual <= 1e-10
    H = cauchy_field(DiscreteMeasure.from_atoms([(-2, 1)]))
    rep = fixed_point_residual(CHEB, H, [1 + 1j])
    assert rep.verdict == "NOT_FIXED"
    oracle = abs(apply(CHEB, H, 1 + 1j) - H(1 + 1j))
    assert abs(rep.max_residual - oracle) < 1e-14
    rep = fixed_point_residual(SQ, constant_field(0), samples)
    assert rep.verdict == "FIXED" and rep.max_residual == 0


def test_fixed_residual_drops_bad_samples():
    rep = fixed_point_residual(SQ, constant_field(1), [0, 1 + 1j])
    assert len(rep.dropped) == 1 and rep.dropped[0][0] == 0
    with pytest.raises(AllSamplesInvalid):
        fixed_point_residual(SQ, constant_field(1), [0])


def test_fixed_residual_threads_match(monkeypatch):
    samples = sampling.box(64, -2 - 2j, 2 + 2j, seed=1)
    serial = fixed_point_residual(SQ, ZINV2, samples, workers=1)
    threaded = fixed_point_residual(SQ, ZINV2, samples, workers=4)
    assert serial.residuals == threaded.residuals


def test_multiplier_examples():
    rep = multiplier_relation(ROT, ZINV2, 1.5)
    assert abs(rep.L - 1) < 1e-14 and rep.realness < 1e-14
    assert abs(multiplier_relation(SQ, ZINV2, 2).L - 4) < 1e-14
    with pytest.raises(ZeroDenominator):
        multiplier_relation(SQ, constant_field(0), 2)


def test_line_field_examples():
    rep = line_field_defect(ROT, ZINV2, sampling.annulus(50, 1.1, 1.9))
    assert rep.max_defect <= 1e-12
    rep = line_field_defect(SQ, constant_field(1), [2, 1j])
    assert rep.defects[0] == 0 and abs(rep.defects[1] - 2) < 1e-15
    rep = line_field_defect(SQ, constant_field(0), [2])
    assert rep.samples == [] and rep.excluded[0][0] == 2


def test_invariant_mass_examples():
    sector = AnnularSector(1, 2, 0, math.pi / 2)
    assert invariant_mass(ROT, ZINV2, sector).rel_gap <= 1e-6
    zero = invariant_mass(SQ, constant_field(0), sector)
    assert zero.lambda_A == zero.lambda_preimage == 0
    rep = invariant_mass(SQ, ZINV2, AnnularSector(1, 2))
    assert abs(rep.lambda_A - 2 * math.pi * math.log(2)) < 1e-8
    assert abs(rep.lambda_preimage - math.pi * math.log(2)) < 1e-8
    assert abs(rep.rel_gap - 0.5) < 1e-9


unit = st.floats(0, 2 * math.pi)
point = st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False)


@given(unit, point)
def test_rotation_covariance(t, x):
    f = RationalMap.polynomial([0, cmath.exp(1j * t)])
    assert abs(apply(f, ZINV2, x) - x**-2) <= 1e-12 * abs(x) ** -2


@given(point)
def test_square_constant(x):
    assert abs(apply(SQ, constant_field(1), x) - 1 / (2 * x)) <= 1e-10 / abs(x)


@given(st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=3, max_size=6), point)
def test_fiber_sum_oracle(c, x):
    """Sum of 1/f'(w)^2 over numpy's fiber of a polynomial matches apply."""
    if abs(c[-1]) < 0.1:
        return
    f = RationalMap.polynomial(c)
    desc = np.array(c[::-1], complex)
    desc[-1] -= x
    w = np.roots(desc)
    dp = np.polyval(np.polyder(np.array(c[::-1], complex)), w)
    if np.min(np.abs(dp)) < 1e-3:
        return
    oracle = np.sum(1 / dp**2)
    assert abs(apply(f, constant_field(1), x) - oracle) <= 1e-8 * max(1.0, abs(oracle))


@given(st.lists(st.tuples(point, point), min_size=1, max_size=4), point)
def test_triangle_inequality(atoms, x):
    H = cauchy_field(DiscreteMeasure.from_atoms(atoms))
    try:
        rep = fixed_point_residual(CHEB, H, [x])
    except AllSamplesInvalid:
        return
    assert all(g >= -1e-10 for g in rep.triangle_gaps)
