import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sepscan import closedform as cf
from sepscan.exact import BivariatePolynomial
from sepscan.exceptions import ToleranceNotReached

HALF = Fraction(1, 2)
unit = st.fractions(min_value=0, max_value=1, max_denominator=200)


# -- surfaces --------------------------------------------------------------

def test_x_prob_printed_values():
    assert cf.x_prob(HALF, HALF) == Fraction(139, 384)
    assert cf.x_prob(0, 0) == Fraction(3, 8)
    assert cf.x_prob(1, 1) == 0
    assert cf.x_prob(0, 1) == HALF


def test_x_total_at_origin():
    # lower piece at (0, 0): (1)^3 * 1 / 960, times pi^2
    assert cf.x_total(0, 0) == pytest.approx(math.pi**2 / 960)


@given(unit, unit)
def test_x_prob_is_ratio_of_volumes(a, b):
    if max(a, b) < 1:
        # pi^2 cancels, so the identity is exact on the rational parts
        assert cf.X_PROB.rational(a, b) == cf.X_SEP.rational(a, b) / cf.X_TOTAL.rational(a, b)


@given(unit, unit)
def test_surfaces_symmetric(a, b):
    assert cf.x_prob(a, b) == cf.x_prob(b, a)
    assert cf.x_total(a, b) == pytest.approx(cf.x_total(b, a), rel=1e-15)


@given(unit, unit)
def test_x_prob_is_a_probability(a, b):
    if max(a, b) < 1:
        assert 0 <= cf.x_prob(a, b) <= 1


def test_float_and_exact_evaluation_agree():
    for a, b in [(0.3, 0.2), (0.1, 0.9), (0.45, 0.45)]:
        assert cf.x_prob(a, b) == pytest.approx(float(cf.x_prob(Fraction(a), Fraction(b))), rel=1e-12)


def test_surface_continuity_across_diagonal():
    cf.X_TOTAL.check_continuity()
    cf.X_SEP.check_continuity()
    cf.X_PROB.check_continuity()


# -- curves ----------------------------------------------------------------

@given(unit)
def test_curves_are_sections_of_the_surface(r):
    assert cf.x_diag(r) == cf.x_prob(r, r)
    assert cf.x_antidiag(r) == cf.x_prob(r, 1 - r)
    if r != HALF:
        assert cf.x_half(r) == cf.x_prob(r, HALF)


def test_x_half_special_point():
    assert cf.x_half(HALF) == Fraction(139, 384)
    assert cf.xk5_half(HALF) == Fraction(1261, 2176)


def test_curve_vectorized_evaluation():
    r = np.linspace(0.01, 0.99, 17)
    np.testing.assert_allclose(cf.X_ANTIDIAG.evaluate(r), [cf.x_antidiag(v) for v in r], rtol=1e-13)


def test_antidiagonal_pieces_continuous():
    cf.X_ANTIDIAG.check_continuity()
    cf.X_HALF.check_continuity(tol=1e-12)


def test_curve_outside_domain():
    with pytest.raises(ValueError):
        cf.x_diag(1.5)


# -- roots, extrema, intersections -------------------------------------------

def test_crossover_roots():
    assert cf.poly_root(cf.XK4_QUINTIC, Fraction(3, 10), HALF) == pytest.approx(0.40182804, abs=1e-7)
    assert cf.poly_root(cf.XK5_OCTIC, Fraction(3, 10), Fraction(4, 10)) == pytest.approx(0.3385355079, abs=1e-7)
    assert cf.poly_root(cf.K3_QUARTIC, Fraction(4, 10), HALF) == pytest.approx(0.487543066126, abs=1e-7)


def test_quintic_root_is_where_curves_cross():
    # the crossover quintic is the numerator of x_diag - x_antidiag below 1/2
    r = cf.poly_root(cf.XK4_QUINTIC, Fraction(3, 10), HALF, tol=1e-15)
    assert cf.x_diag(r) - cf.x_antidiag(r) == pytest.approx(0, abs=1e-12)
    assert cf.intersect_curves(cf.X_DIAG, cf.X_ANTIDIAG, Fraction(1, 10), Fraction(49, 100)) == pytest.approx([r])


def test_diag_maximum():
    arg, val = cf.curve_extremum(cf.X_DIAG, 0, 1, "max")
    assert arg == pytest.approx(0.2722700792, abs=1e-8)
    assert val == pytest.approx(0.393558399, abs=1e-8)
    # the argmax is a root of the printed cubic and the maximum of the other
    assert float(cf.DIAG_MAX_CUBIC(arg)) == pytest.approx(0, abs=1e-9)
    assert float(cf.DIAG_MAXVAL_CUBIC(val)) == pytest.approx(0, abs=1e-8)
    grid = np.linspace(0, 1, 100_001)
    assert cf.X_DIAG.evaluate(grid).max() <= val + 1e-12


def test_crossover_gap_maximum():
    gap = cf.X_DIAG - cf.X_ANTIDIAG
    arg, val = cf.curve_extremum(gap, Fraction("0.40182804"), HALF, "max")
    assert arg == pytest.approx(0.4564893379, abs=1e-8)
    assert val == pytest.approx(0.0056796160, abs=1e-8)


def test_half_curve_intersections():
    d = cf.intersect_curves(cf.X_HALF, cf.X_DIAG, 0, Fraction(49, 100))
    a = cf.intersect_curves(cf.X_HALF, cf.X_ANTIDIAG, 0, Fraction(49, 100))
    assert d[-1] == pytest.approx(0.364314, abs=1e-5)
    assert a[-1] == pytest.approx(0.428908, abs=1e-5)
    assert float(cf.HALF_DIAG_QUINTIC(d[-1])) == pytest.approx(0, abs=1e-9)
    assert float(cf.HALF_ANTI_SEXTIC(a[-1])) == pytest.approx(0, abs=1e-9)


# -- integrals ---------------------------------------------------------------

def test_integral_of_probability_surface():
    assert cf.integrate_surface(cf.X_PROB, 1e-9) == pytest.approx(0.381678, abs=1e-4)


def test_total_volume_integral():
    # integrating the one-variable marginal pi^2 (1 - r^2)^3 / 2304 gives pi^2 (16/35) / 2304
    assert cf.integrate_surface(cf.X_TOTAL, 1e-12) == pytest.approx(math.pi**2 * 16 / 35 / 2304, abs=1e-12)


@pytest.mark.parametrize("r", [Fraction(k, 10) for k in range(1, 10)])
def test_marginal_identity(r):
    assert cf.marginal_integral(cf.x_total, r) == pytest.approx(cf.x_total_marginal(r), abs=1e-9)


def test_integrate_surface_plain_callable():
    assert cf.integrate_surface(lambda a, b: a * b, 1e-10) == pytest.approx(0.25)


def test_integrate_surface_tolerance_failure():
    with pytest.raises(ToleranceNotReached):
        cf.integrate_surface(lambda a, b: 1 / np.sqrt(abs(a - 0.3) + 1e-300), 1e-15)


# -- correlation ---------------------------------------------------------------

def exact_pearson(piece):
    """Pearson correlation from exact moments of a symmetric polynomial density.

    ``piece`` is the polynomial valid on ``rA > rB``; symmetry doubles it.
    """
    A, B = BivariatePolynomial.var_a(), BivariatePolynomial.var_b()
    tri = lambda p: (piece * p).integrate_lower_triangle() + (piece * p.swap()).integrate_lower_triangle()  # noqa: E731
    z = tri(A**0 * 1)
    ea, eaa, eab = tri(A) / z, tri(A * A) / z, tri(A * B) / z
    return (eab - ea * ea) / (eaa - ea * ea)


def test_correlation_matches_exact_moments():
    assert exact_pearson(cf._tu) == Fraction(495, 5359)
    assert cf.x_correlation("all").value == pytest.approx(495 / 5359, abs=1e-12)
    assert cf.x_correlation("separable").value == pytest.approx(float(exact_pearson(cf._su)), abs=1e-12)


def test_correlation_matches_sampled_x_states():
    from sepscan.measures import MeasureSpec, Sampler

    xb = Sampler(MeasureSpec("XFlat", seed=21)).xstates(2_000_000)
    rA, rB = xb.radii()
    sep = xb.separable()
    assert np.corrcoef(rA, rB)[0, 1] == pytest.approx(cf.x_correlation("all").value, abs=0.003)
    assert np.corrcoef(rA[sep], rB[sep])[0, 1] == pytest.approx(cf.x_correlation("separable").value, abs=0.004)


def test_printed_correlation_kept_alongside():
    res = cf.x_correlation("all")
    assert res.paper_value == pytest.approx(0.702341, abs=1e-6)
    assert cf.x_correlation("separable").paper_value == pytest.approx(0.68326, abs=1e-5)


# -- bundle ----------------------------------------------------------------

def test_exact_constants_schema():
    rows = cf.exact_constants()
    names = {r["name"] for r in rows}
    assert {"x_prob_half_half", "x_crossover_quintic", "x_prob_integral", "x_correlation_all"} <= names
    for r in rows:
        assert set(r) == {"name", "value", "paper_value", "abs_err"}
        assert isinstance(r["paper_value"], str)
    first = next(r for r in rows if r["name"] == "x_prob_half_half")
    assert first["value"] == pytest.approx(0.3619791666) and first["paper_value"] == "139/384"
