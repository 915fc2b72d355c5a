import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from sepscan.exceptions import InsufficientData, NoCrossing, OutOfRange, ShapeMismatch
from sepscan.histogram import (
    CorrelationAccumulator,
    CurveEstimate,
    JointRadialHistogram,
    SeparabilityHistogram,
    antidiagonal_curve,
    column_curve,
    diagonal_curve,
    estimate_crossover,
    estimate_crossover_fit,
    marginal,
    marginal_exponent,
    merge,
    row_curve,
    sample_correlation,
)
from sepscan.radii import RadiusPair


def filled(seed=0, n=5000, nbins=10):
    rng = np.random.default_rng(seed)
    rA, rB = rng.random(n), rng.random(n)
    sep = rng.random(n) < 0.5 * (1 - rA * rB)
    return JointRadialHistogram(nbins).accumulate_many(rA, rB, sep), (rA, rB, sep)


# -- binning ---------------------------------------------------------------

def test_binning_examples():
    h = JointRadialHistogram()
    h.accumulate(RadiusPair(0.004, 0.995, True))
    assert h.total[0, 99] == 1 and h.separable[0, 99] == 1
    h.accumulate((1.0, 0.5, False))
    assert h.total[99, 50] == 1 and h.separable[99, 50] == 0
    assert h.midpoints[0] == pytest.approx(0.005)
    assert h.midpoints[-1] == pytest.approx(0.995)


def test_bin_index_rejects_out_of_range():
    h = JointRadialHistogram()
    with pytest.raises(OutOfRange):
        h.bin_index(1.01)
    with pytest.raises(OutOfRange):
        h.bin_index(-0.1)


def test_radius_scale_shifts_bins():
    h = JointRadialHistogram(10, radius_scale=2.0)
    assert h.bin_index(1.0) == 5
    assert h.midpoints[0] == pytest.approx(0.1)


def test_accumulate_many_matches_single_updates():
    h, (rA, rB, sep) = filled(n=500)
    h2 = JointRadialHistogram(10)
    for p in zip(rA, rB, sep):
        h2.accumulate(p)
    assert h == h2
    assert h.n_total == 500 and h.n_separable == int(sep.sum())


def test_invalid_counts_rejected():
    with pytest.raises(ShapeMismatch):
        JointRadialHistogram(3, total=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        JointRadialHistogram(2, total=np.zeros((2, 2)), separable=np.ones((2, 2)))


def test_probability_marks_empty_bins():
    h = JointRadialHistogram(2)
    h.accumulate((0.1, 0.1, True))
    p = h.probability()
    assert p[0, 0] == 1.0 and np.isnan(p[1, 1])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_merge_commutative_associative(s1, s2, s3):
    a, _ = filled(s1, 200)
    b, _ = filled(s2, 200)
    c, _ = filled(s3, 200)
    assert merge(a, b) == merge(b, a)
    assert merge(merge(a, b), c) == merge(a, merge(b, c))
    assert merge(a, JointRadialHistogram(10)) == a


def test_merge_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        merge(JointRadialHistogram(10), JointRadialHistogram(20))


def test_csv_round_trip(tmp_path):
    h, _ = filled()
    h.to_csv(tmp_path)
    assert JointRadialHistogram.from_csv(tmp_path) == h
    first = (tmp_path / "total.csv").read_text().splitlines()[0]
    assert len(first.split(",")) == 10


# -- curves ------------------------------------------------------------------

def test_curve_cells():
    h = JointRadialHistogram(4)
    h.total[:] = np.arange(16).reshape(4, 4) + 1
    assert list(diagonal_curve(h).counts) == [1, 6, 11, 16]
    anti = antidiagonal_curve(h)
    assert list(anti.counts) == [4, 7, 10, 13]  # cells (0,3),(1,2),(2,1),(3,0)
    np.testing.assert_allclose(anti.abscissae, h.midpoints)
    short = antidiagonal_curve(h, offset=0.5)  # m = 2: cells (0,1),(1,0)
    assert list(short.counts) == [2, 5]
    by_b = antidiagonal_curve(h, offset=0.5, axis="B")  # cells (1,0),(0,1) indexed by column
    assert list(by_b.counts) == [5, 2]
    assert list(column_curve(h, 2).counts) == [3, 7, 11, 15]
    assert list(row_curve(h, 1).counts) == [5, 6, 7, 8]


def test_antidiagonal_offset_bounds():
    with pytest.raises(OutOfRange):
        antidiagonal_curve(JointRadialHistogram(10), offset=0.01)
    with pytest.raises(ValueError):
        antidiagonal_curve(JointRadialHistogram(10), axis="C")


def test_curve_csv(tmp_path):
    h = JointRadialHistogram(2)
    h.accumulate((0.1, 0.1, True))
    diagonal_curve(h).to_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines == ["midpoint,probability,count", "0.25,1.0,1", "0.75,,0"]


def test_curve_variances():
    c = CurveEstimate(np.array([0.1, 0.2]), np.array([0.5, np.nan]), np.array([4, 0]), np.array([2, 0]))
    v = c.variances()
    assert v[0] == pytest.approx(0.0625) and np.isnan(v[1])


# -- marginals -------------------------------------------------------------

def test_marginal_sums():
    h, _ = filled()
    m = marginal(h, "A")
    np.testing.assert_array_equal(m.total, h.total.sum(axis=1))
    np.testing.assert_array_equal(marginal(h, "B").separable, h.separable.sum(axis=0))


@pytest.mark.parametrize("k,jac", [(3, 0), (6, 2), (3.5, 1)])
def test_marginal_exponent_recovers_power(k, jac):
    # draw r with density r^jac (1 - r^2)^k by inverse-CDF on a fine grid
    rng = np.random.default_rng(int(10 * k))
    grid = np.linspace(0, 1, 200_001)
    pdf = grid**jac * (1 - grid**2) ** k
    cdf = np.cumsum(pdf)
    cdf /= cdf[-1]
    r = np.interp(rng.random(2_000_000), cdf, grid)
    h = JointRadialHistogram().accumulate_many(r, rng.random(r.size), np.zeros(r.size, bool))
    assert marginal_exponent(h, jacobian_power=jac) == pytest.approx(k, abs=0.05)


def test_marginal_exponent_needs_data():
    with pytest.raises(InsufficientData):
        marginal_exponent(JointRadialHistogram())


# -- crossover ---------------------------------------------------------------

def curve(x, p, n=1000):
    p = np.asarray(p, float)
    return CurveEstimate(np.asarray(x, float), p, np.full(len(x), n), np.round(np.nan_to_num(p) * n).astype(int))


def test_crossover_linear_interpolation():
    x = [0.1, 0.2, 0.3, 0.4, 0.5]
    diag = curve(x, [0.5, 0.5, 0.5, 0.5, 0.5])
    anti = curve(x, [0.6, 0.6, 0.55, 0.45, 0.5])
    assert estimate_crossover(diag, anti) == pytest.approx(0.35)


def test_crossover_picks_closest_to_half():
    x = [0.1, 0.2, 0.3, 0.4]
    diag = curve(x, [0.5] * 4)
    anti = curve(x, [0.6, 0.4, 0.6, 0.4])
    assert estimate_crossover(diag, anti) == pytest.approx(0.35)


def test_crossover_skips_undefined_points():
    x = [0.1, 0.2, 0.3, 0.4]
    diag = curve(x, [0.5] * 4)
    anti = curve(x, [0.6, 0.6, np.nan, 0.4])
    assert estimate_crossover(diag, anti) == pytest.approx(0.3)


def test_crossover_of_synthetic_lines():
    x = (np.arange(50) + 0.5) / 100
    assert estimate_crossover(curve(x, x, n=10**6), curve(x, np.full(50, 0.45), n=10**6)) == pytest.approx(0.45)


def test_no_crossing():
    x = [0.1, 0.2, 0.3]
    with pytest.raises(NoCrossing):
        estimate_crossover(curve(x, [0.5] * 3), curve(x, [0.6] * 3))


def test_crossover_fit_recovers_planted_root():
    x = (np.arange(100) + 0.5) / 100
    diff = (0.5 - x) * (x - 0.41) * 0.3
    diag = curve(x, np.full(100, 0.3), n=10**6)
    anti = curve(x, 0.3 + diff, n=10**6)
    assert estimate_crossover_fit(diag, anti) == pytest.approx(0.41, abs=1e-3)


# -- correlation -----------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 400), st.integers(1, 399))
def test_correlation_accumulator_matches_corrcoef(seed, n, cut):
    rng = np.random.default_rng(seed)
    a = rng.random(n)
    b = 0.3 * a + rng.random(n)
    cut = min(cut, n - 1)
    acc = CorrelationAccumulator().update(a[:cut], b[:cut])
    acc.merge(CorrelationAccumulator().update(a[cut:], b[cut:]))
    assert acc.correlation == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)


def test_sample_correlation_filter():
    rng = np.random.default_rng(1)
    a = rng.random(1000)
    b = a + 0.1 * rng.random(1000)
    sep = rng.random(1000) < 0.5
    pairs = list(zip(a, b, sep))
    assert sample_correlation(pairs) == pytest.approx(np.corrcoef(a, b)[0, 1])
    assert sample_correlation(pairs, "separable") == pytest.approx(np.corrcoef(a[sep], b[sep])[0, 1])
    with pytest.raises(ValueError):
        sample_correlation(pairs, "entangled")


def test_correlation_needs_two_samples():
    with pytest.raises(InsufficientData):
        CorrelationAccumulator().update([0.1], [0.2]).correlation
    with pytest.raises(InsufficientData):
        CorrelationAccumulator().update([0.1, 0.1], [0.2, 0.3]).correlation


# -- estimator -------------------------------------------------------------

def test_separability_histogram_estimator():
    _, (rA, rB, sep) = filled(n=20_000)
    X = np.column_stack([rA, rB])
    est = SeparabilityHistogram(nbins=10).fit(X, sep)
    ref = JointRadialHistogram(10).accumulate_many(rA, rB, sep)
    assert est.histogram_ == ref
    p = est.predict_proba([[0.05, 0.05], [0.95, 0.95]])
    assert p[0] == pytest.approx(ref.probability()[0, 0])
    assert est.get_params() == {"nbins": 10, "radius_scale": 1.0}
    assert np.isfinite(est.score(X, sep))
    # partial_fit in two halves gives the same counts
    half = len(sep) // 2
    est2 = clone(est).partial_fit(X[:half], sep[:half]).partial_fit(X[half:], sep[half:])
    assert est2.histogram_ == ref


def test_estimator_validation():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        SeparabilityHistogram().predict_proba([[0.1, 0.1]])
    with pytest.raises(ValueError):
        SeparabilityHistogram().fit(np.zeros((3, 3)), [0, 1, 0])
