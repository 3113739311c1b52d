import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unicurrent import InvalidArgument
from unicurrent.wavefunction import (
    BoundaryClass,
    BoxEigenstate,
    GridWavefunction,
    NaturalUnits,
    PiecewiseWavefunction,
    SupportKind,
    classify_boundary,
    eigenstate_coefficients,
    evaluate,
)

CONT = PiecewiseWavefunction([0, 1, 1], 1.0)
DISC = PiecewiseWavefunction([1, 1], 1.0)


def test_units_alpha_monotone_and_positive():
    u = NaturalUnits(2.0, 0.5)
    assert u.alpha(1e-3) == pytest.approx(4e-3)
    assert u.alpha(2e-3) > u.alpha(1e-3)
    assert u.delta_t(u.alpha(0.3)) == pytest.approx(0.3)
    with pytest.raises(InvalidArgument):
        NaturalUnits(0.0, 1.0)
    with pytest.raises(InvalidArgument):
        NaturalUnits(1.0, -1.0)


def test_evaluate_examples():
    assert evaluate(CONT, -0.5) == pytest.approx(-0.25)
    assert evaluate(CONT, 0.5) == 0
    assert evaluate(DISC, 0.0) == 1
    assert evaluate(DISC, -1.0000001) == 0


def test_classify_examples():
    assert classify_boundary(CONT) is BoundaryClass.CONTINUOUS_DERIVATIVE_JUMP
    assert classify_boundary(DISC) is BoundaryClass.DISCONTINUOUS
    assert classify_boundary(PiecewiseWavefunction([0, 0, 1, 1], 1.0)) is BoundaryClass.SMOOTH_ZERO


def test_coefficient_pairs_and_validation():
    wf = PiecewiseWavefunction([[0, 0], [1, 2], [1, 2]], 1.0)
    assert wf.coefficients[1] == 1 + 2j
    with pytest.raises(InvalidArgument):
        PiecewiseWavefunction([1, 2], 1.0)  # Q(-1) = -1
    with pytest.raises(InvalidArgument):
        PiecewiseWavefunction([], 1.0)
    with pytest.raises(InvalidArgument):
        PiecewiseWavefunction([0] * 18, 1.0)
    with pytest.raises(InvalidArgument):
        PiecewiseWavefunction([0, 1, 1], -1.0)
    with pytest.raises(InvalidArgument):
        PiecewiseWavefunction([0, [1, 2, 3]], 1.0)
    # the wall condition is skipped for semi-infinite support
    semi = PiecewiseWavefunction.semi_infinite([1, 2])
    assert semi.support_kind is SupportKind.SEMI_INFINITE and math.isinf(semi.support_left)
    assert evaluate(semi, -1e6) == 1 - 2e6


def test_wall_condition_relative_tolerance():
    a = 3.0
    PiecewiseWavefunction([0, a * (1 + 1e-14), 1], a)
    with pytest.raises(InvalidArgument):
        PiecewiseWavefunction([0, a * (1 + 1e-9), 1], a)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=6),
    st.floats(0.1, 5.0),
    st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=20),
)
def test_evaluate_zero_outside_support(tail, a, xs):
    # force Q(-a) = 0 by multiplying with (x + a)
    coeffs = np.polynomial.polynomial.polymul(tail, [a, 1.0])
    wf = PiecewiseWavefunction(list(coeffs), a)
    for x in xs:
        if x > 0 or x < -a:
            assert evaluate(wf, x) == 0


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=2, max_size=5),
    st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3, allow_nan=False, allow_infinity=False),
)
def test_classification_scale_invariant(coeffs, c):
    wf = PiecewiseWavefunction.semi_infinite(coeffs)
    assert classify_boundary(wf) is classify_boundary(wf.scaled(c))


@pytest.mark.parametrize("n", [1, 2, 5])
@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_eigenstate_norm_and_walls(n, a):
    s = BoxEigenstate(n, a)
    x = np.linspace(-a, 0.0, 20001)
    # sin^2 is band-limited, so the trapezoid rule is exact up to rounding here
    assert np.trapezoid(s.evaluate(x) ** 2, x) == pytest.approx(1.0, abs=1e-12)
    assert s.evaluate(0.0) == pytest.approx(0.0, abs=1e-14 * s.amplitude * n)
    assert s.evaluate(-a) == 0.0
    assert s.evaluate(0.1) == 0.0


def test_eigenstate_energy():
    u = NaturalUnits()
    es = [BoxEigenstate(n, 1.0).energy(u) for n in range(1, 6)]
    assert es[0] == pytest.approx(math.pi**2 / 2)
    assert all(b > a > 0 for a, b in zip(es, es[1:]))
    with pytest.raises(InvalidArgument):
        BoxEigenstate(0, 1.0)
    with pytest.raises(InvalidArgument):
        BoxEigenstate(1.5, 1.0)


def test_eigenstate_taylor_coefficients():
    s = BoxEigenstate(1, 1.0)
    wf1 = eigenstate_coefficients(s, 1)
    # d/dx sqrt(2) sin(pi (x + 1)) at 0 is -sqrt(2) pi
    assert wf1.coefficients[1] == pytest.approx(-math.sqrt(2) * math.pi)
    wf = eigenstate_coefficients(s, 7)
    assert all(wf.coefficients[j] == 0 for j in (0, 2, 4, 6))
    # odd derivatives: |psi^(2j+1)(0)| = (2 m E / hbar^2)^j |psi'(0)|
    k2 = 2 * s.energy()
    for j in range(1, 4):
        deriv = abs(wf.coefficients[2 * j + 1]) * math.factorial(2 * j + 1)
        assert deriv == pytest.approx(k2**j * abs(wf.coefficients[1]), rel=1e-12)
    assert abs(wf.coefficients[3] / wf.coefficients[1]) == pytest.approx(k2 / 6)
    # the Taylor polynomial matches the state near the wall
    x = np.linspace(-0.05, 0, 11)
    assert np.allclose(np.polynomial.polynomial.polyval(x, wf.q).real, s.evaluate(x), atol=1e-9)
    with pytest.raises(InvalidArgument):
        eigenstate_coefficients(s, 0)
    with pytest.raises(InvalidArgument):
        eigenstate_coefficients(s, 17)


def test_eigenstate_edge_jet_matches_taylor():
    s = BoxEigenstate(3, 2.0)
    jet = s.edge_jet("right", 5)
    wf = eigenstate_coefficients(s, 5)
    assert np.allclose(jet, wf.edge_jet("right", 5), rtol=1e-12, atol=1e-12)


def test_grid_wavefunction():
    g = GridWavefunction.from_function(lambda x: np.exp(-x * x / 2), -10, 10, 2001)
    assert g.h == pytest.approx(0.01)
    assert g.probability() == pytest.approx(math.sqrt(math.pi), rel=1e-10)
    assert g.index_of(0.0) == 1000
    with pytest.raises(InvalidArgument):
        g.index_of(0.005)
    with pytest.raises(ValueError):
        g.samples[0] = 1.0
    with pytest.raises(InvalidArgument):
        GridWavefunction(0.0, 1.0, [1.0])
