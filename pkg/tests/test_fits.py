from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from sepscan import fits
from sepscan.exceptions import NoData
from sepscan.histogram import CurveEstimate

HALF = Fraction(1, 2)
inner = st.fractions(min_value=Fraction(1, 100), max_value=Fraction(99, 100), max_denominator=300)


# -- normalizations ------------------------------------------------------------

def test_volumes_normalized_at_half():
    assert fits.k3_total(HALF, HALF) == 1
    assert fits.K4_TOTAL_DIAG(HALF) == 1
    assert fits.K5_TOTAL_DIAG(HALF) == 1


def test_k3_diagonal_piece_is_limit_of_off_diagonal():
    for r in [Fraction(1, 5), Fraction(3, 7), Fraction(9, 10)]:
        assert fits.K3_TOTAL.upper(r, r) == fits.K3_TOTAL.diagonal(r)
        assert fits.K3_SEP.upper(r, r) == fits.K3_SEP.diagonal(r)


# -- ratios of printed volumes ---------------------------------------------

@given(inner)
def test_k3_diag_is_volume_ratio(r):
    assert fits.k3_diag(r) == fits.k3_sep(r, r) / fits.k3_total(r, r)


@given(inner)
def test_k3_antidiag_is_volume_ratio(r):
    assert fits.k3_antidiag(r) == fits.k3_sep(r, 1 - r) / fits.k3_total(r, 1 - r)


@given(inner)
def test_k3_antidiag_symmetric_about_half(r):
    assert fits.k3_antidiag(r) == fits.k3_antidiag(1 - r)


def test_k3_antidiag_endpoints():
    assert fits.k3_diag(0) == Fraction(1, 32)
    # both volumes vanish at (0, 1); the printed curve extends continuously to 3/25
    assert fits.k3_total(0, 1) == fits.k3_sep(0, 1) == 0
    assert fits.k3_antidiag(0) == Fraction(3, 25)
    assert fits.k3_antidiag(HALF) == fits.k3_diag(HALF) == Fraction(17, 256)


def test_k3_antidiag_continuous_at_half():
    lo, hi = fits.K3_ANTIDIAG.pieces[0][2], fits.K3_ANTIDIAG.pieces[1][2]
    assert lo(HALF) == hi(HALF)


@given(inner)
def test_k4_k5_diag_are_volume_ratios(r):
    assert fits.k4_diag(r) == fits.K4_SEP_DIAG(r) / fits.K4_TOTAL_DIAG(r)
    assert fits.k5_diag(r) == fits.K5_SEP_DIAG(r) / fits.K5_TOTAL_DIAG(r)


def test_k3_quartic_is_where_k3_curves_cross():
    from sepscan.closedform import K3_QUARTIC, intersect_curves, poly_root

    r = poly_root(K3_QUARTIC, Fraction(4, 10), HALF)
    found = intersect_curves(fits.K3_DIAG, fits.K3_ANTIDIAG, Fraction(4, 10), Fraction(499, 1000))
    assert found == pytest.approx([r], abs=1e-9)


def test_k4_antidiag_is_flagged_empirical():
    assert fits.K4_ANTIDIAG_EMPIRICAL
    assert 0 < fits.k4_antidiag(0.3) < 1
    assert fits.k4_antidiag(0.3) == pytest.approx(fits.k4_antidiag(0.7))


# -- marginals over the Bloch ball -------------------------------------------

def ball_marginal(f, r):
    """Integral of f(r, rB) rB^2 drB: the rB-sphere contributes 4 pi rB^2."""
    g = lambda b: float(f(r, b)) * b * b  # noqa: E731
    return sum(integrate.quad(g, lo, hi, epsabs=1e-14)[0] for lo, hi in ((1e-300, r), (r, 1)))


@pytest.mark.parametrize("r", [0.1 * k for k in range(1, 10)])
def test_k3_marginal_shape_and_ratio(r):
    tot = ball_marginal(fits.k3_total, r)
    sep = ball_marginal(fits.k3_sep, r)
    assert tot / (1 - r * r) ** 4 == pytest.approx(1 / 3, rel=1e-6)
    assert sep / tot == pytest.approx(1 / 14, rel=1e-6)


@given(inner)
def test_k3_surfaces_finite_on_the_axes(r):
    # each piece divides by the larger radius only, so an axis point is regular
    assert fits.k3_total(r, 0) == 8 * (r - 1) ** 4 * (r + 4)
    assert fits.k3_sep(0, r) == fits.k3_sep(r, 0)
    assert fits.k3_total(0, 0) == 32


# -- chi-squared -------------------------------------------------------------

def test_chi_squared_by_hand():
    data = CurveEstimate(
        abscissae=np.array([0.25, 0.5, 0.75]),
        probabilities=np.array([0.5, 0.0, np.nan]),
        counts=np.array([100, 10, 0]),
        separable_counts=np.array([50, 0, 0]),
    )
    rep = fits.chi_squared(lambda r: 0.4, data)
    # point 1: (0.1)^2 / (0.25 / 100) = 4; point 2: (0.4)^2 / (1 / 400) = 64
    assert rep.statistic == pytest.approx(68.0)
    assert rep.dof == 2 and rep.skipped == 1
    assert rep.reduced == pytest.approx(34.0)
    assert np.isnan(rep.residuals[2])
    d = rep.to_dict()
    assert d["residuals"][2] is None and d["statistic"] == pytest.approx(68.0)


def test_chi_squared_min_count_and_no_data():
    data = CurveEstimate(np.array([0.5]), np.array([0.5]), np.array([5]), np.array([2]))
    with pytest.raises(NoData):
        fits.chi_squared(fits.K3_DIAG, data, min_count=10)


def test_chi_squared_on_exact_data_is_zero():
    x = (np.arange(100) + 0.5) / 100
    p = fits.K3_DIAG.evaluate(x)
    data = CurveEstimate(x, p, np.full(100, 1000), np.round(p * 1000).astype(int))
    assert fits.chi_squared(fits.K3_DIAG, data).statistic == pytest.approx(0, abs=1e-18)
