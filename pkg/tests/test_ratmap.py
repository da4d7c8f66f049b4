import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ruellelab.errors import NotCoprime, PoleHit, SingularMoebius
from ruellelab.poly import Poly
from ruellelab.ratmap import (
    Moebius,
    RationalMap,
    critical_points,
    infinity_form,
    moebius_conjugate,
    orbit,
    preimages,
)

SQ = RationalMap.polynomial([0, 0, 1])
NEWTON = RationalMap(Poly([1, 0, 1]), Poly([0, 2]))  # (z^2+1)/(2z)


def _has(roots, target, tol=1e-7):
    return np.min(np.abs(np.asarray(roots) - target)) < tol


def test_eval_and_derivative_examples():
    assert SQ(1 + 1j) == 2j
    assert NEWTON(1) == 1
    assert SQ.derivative(3) == 6
    assert abs(NEWTON.derivative(1)) < 1e-15
    assert RationalMap.polynomial([0, 0, 0, 1]).derivative(0) == 0
    with pytest.raises(PoleHit):
        RationalMap(Poly([1]), Poly([0, 1]))(0)


def test_common_root_rejected():
    with pytest.raises(NotCoprime):
        RationalMap(Poly([-1, 0, 1]), Poly([-1, 1]))


def test_critical_points_examples():
    rs = critical_points(RationalMap.polynomial([0.3, 0, 1]))
    assert _has(rs.roots, 0) and rs.infinity_multiplicity == 1
    rs = critical_points(NEWTON)
    assert _has(rs.roots, 1) and _has(rs.roots, -1) and rs.infinity_multiplicity == 0
    rs = critical_points(RationalMap.polynomial([0, 0, 0, 1]))
    assert rs.multiplicities.tolist() == [2] and rs.infinity_multiplicity == 2


def test_preimage_examples():
    rs = preimages(SQ, 4)
    assert _has(rs.roots, 2) and _has(rs.roots, -2)
    rs = preimages(SQ, 0)
    assert rs.multiplicities.tolist() == [2]
    rs = preimages(NEWTON, 1)
    assert rs.multiplicities.tolist() == [2] and _has(rs.roots, 1)


def test_preimage_at_infinity():
    # (z^2 + 1)/(z^2 + z): x = 1 loses the leading term
    f = RationalMap(Poly([1, 0, 1]), Poly([0, 1, 1]))
    rs = f.preimages(1)
    assert rs.infinity_multiplicity == 1 and _has(rs.roots, 1)
    assert rs.total_multiplicity == 2


def test_orbit_examples():
    orb = orbit(RationalMap.polynomial([-2, 0, 1]), -2, 3)
    assert orb.points == [-2, 2, 2, 2]
    assert orb.derivs == [1, -4, -16, -64]
    orb = orbit(SQ, 0, 5)
    assert orb.points == [0] * 6 and orb.derivs[1:] == [0] * 5
    orb = orbit(SQ, 2, 10, escape_radius=100)
    assert orb.escaped and orb.escape_index == 3 and orb.points[-1] == 256


def test_orbit_stops_at_pole():
    orb = orbit(RationalMap(Poly([1]), Poly([0, 1])), 0, 4)
    assert orb.pole_hit and orb.points == [0]


def test_infinity_form_examples():
    form = infinity_form(RationalMap(Poly([1, 1, 2]), Poly([0, 1])))
    assert form.valid and form.sigma == 2 and form.b == 1
    form = infinity_form(RationalMap(Poly([1, 0, 1]), Poly([3, 1])))
    assert form.valid and form.sigma == 1 and abs(form.b + 3) < 1e-14
    assert not infinity_form(SQ).valid


def test_conjugation_examples():
    assert moebius_conjugate(SQ, (0, 1, 1, 0)) == SQ or moebius_conjugate(SQ, (0, 1, 1, 0)).num.allclose(SQ.num)
    g = moebius_conjugate(RationalMap.polynomial([1, 0, 1]), (1, 1, 0, 1))
    q = g.den.coeffs[0]
    assert (g.num * (1 / q)).allclose(Poly([3, -2, 1]))
    with pytest.raises(SingularMoebius):
        Moebius(1, 2, 2, 4)


def test_json_round_trip():
    assert RationalMap.from_json(NEWTON.to_json()) == NEWTON


coeff = st.complex_numbers(max_magnitude=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def maps(draw, max_deg=8):
    p = draw(st.lists(coeff, min_size=2, max_size=max_deg + 1))
    q = draw(st.lists(coeff, min_size=1, max_size=max_deg + 1))
    assume(abs(p[-1]) > 1e-2 and abs(q[-1]) > 1e-2)
    try:
        return RationalMap(Poly(p), Poly(q))
    except NotCoprime:
        assume(False)


@given(maps(), coeff)
def test_fiber_identity(f, x):
    rs = f.preimages(x)
    assert rs.total_multiplicity == f.degree
    for w, m in zip(rs.roots, rs.multiplicities):
        if m == 1 and abs(w) < 1e4:
            try:
                assert abs(f(w) - x) <= 1e-8 * max(1, abs(x)) * max(1.0, abs(w)) ** f.degree
            except PoleHit:
                pass


@given(maps(max_deg=6))
def test_critical_count(f):
    assume(f.degree >= 2)
    assert critical_points(f).total_multiplicity == 2 * f.degree - 2


@given(maps(max_deg=4), coeff)
def test_orbit_chain_rule_reverse(f, z0):
    orb = orbit(f, z0, 6)
    for n in range(1, len(orb.points)):
        prod = 1 + 0j
        for z in reversed(orb.points[:n]):
            prod *= f.derivative(z)
        assert abs(prod - orb.derivs[n]) <= 1e-10 * max(1.0, abs(prod))


@given(maps(max_deg=4), coeff, st.tuples(coeff, coeff, coeff, coeff))
def test_conjugation_covariance(f, z, m):
    a, b, c, d = m
    assume(abs(a * d - b * c) > 0.1)
    M = Moebius(a, b, c, d)
    try:
        g = moebius_conjugate(f, M)
        mz = M(z)
        lhs = g(mz)
        rhs = M(f(z))
    except (PoleHit, ZeroDivisionError, NotCoprime):
        assume(False)
    assume(abs(rhs) < 1e4 and abs(mz) < 1e4 and abs(c * f(z) + d) > 1e-3)
    assert abs(lhs - rhs) <= 1e-6 * max(1.0, abs(rhs))
