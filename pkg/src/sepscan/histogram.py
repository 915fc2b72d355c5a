"""Joint (rA, rB) binning of separable and total counts, and curve extraction.

Bin ``i`` covers ``[i, i+1) * radius_scale / nbins`` and is attributed its
midpoint ``(i + 1/2) * radius_scale / nbins``; a radius exactly equal to
``radius_scale`` is clamped into the top bin.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, check_X_y, check_array

from .exceptions import InsufficientData, NoCrossing, OutOfRange, ShapeMismatch


@dataclass(eq=False)
class JointRadialHistogram:
    nbins: int = 100
    radius_scale: float = 1.0
    total: np.ndarray = field(default=None)
    separable: np.ndarray = field(default=None)

    def __post_init__(self):
        shape = (self.nbins, self.nbins)
        if self.total is None:
            self.total = np.zeros(shape, dtype=np.int64)
        if self.separable is None:
            self.separable = np.zeros(shape, dtype=np.int64)
        self.total = np.asarray(self.total, dtype=np.int64)
        self.separable = np.asarray(self.separable, dtype=np.int64)
        if self.total.shape != shape or self.separable.shape != shape:
            raise ShapeMismatch(f"count matrices must be {shape}")
        if (self.total < 0).any() or (self.separable < 0).any():
            raise ValueError("counts must be non-negative")
        if (self.separable > self.total).any():
            raise ValueError("separable count exceeds total count")

    def __eq__(self, other):
        return (
            isinstance(other, JointRadialHistogram)
            and self.nbins == other.nbins
            and self.radius_scale == other.radius_scale
            and np.array_equal(self.total, other.total)
            and np.array_equal(self.separable, other.separable)
        )

    @property
    def midpoints(self) -> np.ndarray:
        return (np.arange(self.nbins) + 0.5) / self.nbins * self.radius_scale

    @property
    def n_total(self) -> int:
        return int(self.total.sum())

    @property
    def n_separable(self) -> int:
        return int(self.separable.sum())

    def bin_index(self, r):
        r = np.asarray(r, dtype=float)
        if r.size and (r.min() < 0 or r.max() > self.radius_scale + 1e-12):
            raise OutOfRange(f"radius outside [0, {self.radius_scale}]")
        return np.minimum((r * (self.nbins / self.radius_scale)).astype(np.int64), self.nbins - 1)

    def accumulate(self, pair) -> "JointRadialHistogram":
        """Add one :class:`~sepscan.radii.RadiusPair` (or ``(rA, rB, separable)`` tuple)."""
        rA, rB, sep = pair
        i, j = int(self.bin_index(rA)), int(self.bin_index(rB))
        self.total[i, j] += 1
        if sep:
            self.separable[i, j] += 1
        return self

    def accumulate_many(self, rA, rB, separable) -> "JointRadialHistogram":
        i, j = self.bin_index(rA), self.bin_index(rB)
        flat = i * self.nbins + j
        size = self.nbins * self.nbins
        self.total += np.bincount(flat, minlength=size).reshape(self.total.shape)
        sep = np.asarray(separable, dtype=bool)
        self.separable += np.bincount(flat[sep], minlength=size).reshape(self.total.shape)
        return self

    def probability(self) -> np.ndarray:
        """Separable/total per bin; NaN marks empty (undefined) bins."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.total > 0, self.separable / np.maximum(self.total, 1), np.nan)

    def copy(self) -> "JointRadialHistogram":
        return JointRadialHistogram(self.nbins, self.radius_scale, self.total.copy(), self.separable.copy())

    def to_csv(self, out_dir) -> None:
        """Write ``total.csv`` and ``separable.csv`` (``nbins`` rows of integers)."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, arr in (("total", self.total), ("separable", self.separable)):
            with open(out_dir / f"{name}.csv", "w", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(arr.tolist())

    @classmethod
    def from_csv(cls, in_dir, radius_scale: float = 1.0) -> "JointRadialHistogram":
        in_dir = Path(in_dir)
        mats = []
        for name in ("total", "separable"):
            with open(in_dir / f"{name}.csv", newline="") as fh:
                mats.append(np.array([[int(v) for v in row] for row in csv.reader(fh)], dtype=np.int64))
        if mats[0].shape != mats[1].shape or mats[0].shape[0] != mats[0].shape[1]:
            raise ShapeMismatch("total.csv and separable.csv must be equal square matrices")
        return cls(mats[0].shape[0], radius_scale, mats[0], mats[1])


def merge(h1: JointRadialHistogram, h2: JointRadialHistogram) -> JointRadialHistogram:
    if h1.nbins != h2.nbins or h1.radius_scale != h2.radius_scale:
        raise ShapeMismatch("histograms differ in nbins or radius_scale")
    return JointRadialHistogram(h1.nbins, h1.radius_scale, h1.total + h2.total, h1.separable + h2.separable)


@dataclass
class CurveEstimate:
    """One-dimensional section of a histogram; NaN probabilities are undefined points."""

    abscissae: np.ndarray
    probabilities: np.ndarray
    counts: np.ndarray
    separable_counts: np.ndarray
    name: str = ""

    @classmethod
    def from_cells(cls, h: JointRadialHistogram, rows, cols, abscissae, name=""):
        rows, cols = np.asarray(rows, dtype=int), np.asarray(cols, dtype=int)
        tot = h.total[rows, cols]
        sep = h.separable[rows, cols]
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.where(tot > 0, sep / np.maximum(tot, 1), np.nan)
        return cls(np.asarray(abscissae, dtype=float), p, tot, sep, name)

    @property
    def defined(self) -> np.ndarray:
        return self.counts > 0

    def variances(self) -> np.ndarray:
        """Binomial variance ``p(1-p)/n`` per point (NaN where undefined)."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.probabilities * (1 - self.probabilities) / self.counts

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["midpoint", "probability", "count"])
            for x, p, n in zip(self.abscissae, self.probabilities, self.counts):
                w.writerow([repr(float(x)), "" if np.isnan(p) else repr(float(p)), int(n)])


def diagonal_curve(h: JointRadialHistogram) -> CurveEstimate:
    k = np.arange(h.nbins)
    return CurveEstimate.from_cells(h, k, k, h.midpoints, "diagonal")


def antidiagonal_curve(h: JointRadialHistogram, offset: float = 1.0, axis: str = "A") -> CurveEstimate:
    """Cells ``(i, m - 1 - i)`` with ``m = round(offset * nbins)``.

    ``offset=1`` pairs midpoints summing to ``radius_scale``; smaller
    offsets give the quasi-antidiagonals used for qutrit radii. With
    ``axis='B'`` the curve is indexed by the column radius instead, which
    for a non-symmetric histogram is the reversed antidiagonal.
    """
    m = int(round(offset * h.nbins))
    if not 1 <= m <= h.nbins:
        raise OutOfRange(f"offset {offset} gives no cells")
    i = np.arange(m)
    j = m - 1 - i
    if axis == "A":
        return CurveEstimate.from_cells(h, i, j, h.midpoints[i], "antidiagonal")
    if axis == "B":
        return CurveEstimate.from_cells(h, j, i, h.midpoints[i], "antidiagonal_by_B")
    raise ValueError("axis must be 'A' or 'B'")


def column_curve(h: JointRadialHistogram, j: int) -> CurveEstimate:
    """Cells ``(i, j)`` for all ``i``; ``j = nbins // 2`` is the ``rB = 1/2`` section."""
    i = np.arange(h.nbins)
    return CurveEstimate.from_cells(h, i, np.full(h.nbins, j), h.midpoints, f"column_{j}")


def row_curve(h: JointRadialHistogram, i: int) -> CurveEstimate:
    j = np.arange(h.nbins)
    return CurveEstimate.from_cells(h, np.full(h.nbins, i), j, h.midpoints, f"row_{i}")


class Marginal(NamedTuple):
    total: np.ndarray
    separable: np.ndarray
    ratio: np.ndarray


def marginal(h: JointRadialHistogram, axis: str = "A") -> Marginal:
    """Counts summed over the other radius; ``axis='A'`` indexes by ``rA``."""
    ax = 1 if axis == "A" else 0
    tot = h.total.sum(axis=ax)
    sep = h.separable.sum(axis=ax)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(tot > 0, sep / np.maximum(tot, 1), np.nan)
    return Marginal(tot, sep, ratio)


def marginal_exponent(h: JointRadialHistogram, lo=0.05, hi=0.9, axis="A", jacobian_power: int = 0) -> float:
    """Slope of the log marginal density against ``log(1 - r^2)`` over ``[lo, hi]``.

    Parameters
    ----------
    jacobian_power : int
        Counts are divided by ``r**jacobian_power`` before the regression,
        removing the radial volume element of the Bloch ball (2 for a
        qubit, 1 for a rebit, 0 when the radius is itself a flat coordinate
        as for X-states).
    """
    m = marginal(h, axis).total.astype(float)
    r = h.midpoints / h.radius_scale
    sel = (r >= lo) & (r <= hi) & (m > 0)
    if sel.sum() < 2:
        raise InsufficientData("fewer than two populated bins in the regression window")
    dens = m[sel] / r[sel] ** jacobian_power
    return float(np.polyfit(np.log1p(-r[sel] ** 2), np.log(dens), 1)[0])


def estimate_crossover(diag: CurveEstimate, anti: CurveEstimate, upper: float = 0.5) -> float:
    """Largest abscissa below ``upper`` where ``anti - diag`` crosses zero.

    The difference is linearly interpolated between consecutive points
    defined on both curves; the crossing closest to ``upper`` from below is
    returned.
    """
    if not np.allclose(diag.abscissae[: len(anti.abscissae)], anti.abscissae[: len(diag.abscissae)]):
        raise ShapeMismatch("curves do not share abscissae")
    n = min(len(diag.abscissae), len(anti.abscissae))
    x = diag.abscissae[:n]
    dv = anti.probabilities[:n] - diag.probabilities[:n]
    ok = ~np.isnan(dv) & (x < upper)
    x, dv = x[ok], dv[ok]
    for k in range(len(x) - 1, -1, -1):
        if dv[k] == 0:
            return float(x[k])
        if k > 0 and dv[k - 1] * dv[k] < 0:
            return float(x[k - 1] - dv[k - 1] * (x[k] - x[k - 1]) / (dv[k] - dv[k - 1]))
    raise NoCrossing(f"anti - diag keeps one sign on all {len(x)} defined points below {upper}")


def estimate_crossover_fit(diag: CurveEstimate, anti: CurveEstimate, lo: float = 0.2,
                           upper: float = 0.5, degree: int = 2) -> float:
    """Crossover from a weighted polynomial fit to ``anti - diag`` on ``[lo, upper)``.

    Both curves meet at ``upper`` by symmetry, so the difference is modelled
    as ``(upper - r) * q(r)`` with ``q`` of the given degree, each point
    weighted by its binomial standard error. The largest root of ``q`` in
    ``(lo, upper)`` is returned. Far less noisy than :func:`estimate_crossover`
    when the two curves separate by less than their per-bin scatter.
    """
    n = min(len(diag.abscissae), len(anti.abscissae))
    x = diag.abscissae[:n]
    dv = anti.probabilities[:n] - diag.probabilities[:n]
    var = diag.variances()[:n] + anti.variances()[:n]
    sel = (x >= lo) & (x < upper) & ~np.isnan(dv) & (var > 0)
    if sel.sum() <= degree + 1:
        raise InsufficientData("too few defined points for the crossover fit")
    x, dv, w = x[sel], dv[sel], 1 / np.sqrt(var[sel])
    X = np.vstack([(upper - x) * x**k for k in range(degree + 1)]).T
    coef = np.linalg.lstsq(X * w[:, None], dv * w, rcond=None)[0]
    roots = np.roots(coef[::-1])
    roots = roots[np.abs(roots.imag) < 1e-12].real
    roots = roots[(roots > lo) & (roots < upper)]
    if roots.size == 0:
        raise NoCrossing("fitted difference has no root in the window")
    return float(roots.max())


class CorrelationAccumulator:
    """One-pass, mergeable Pearson correlation (pairwise co-moment updates)."""

    def __init__(self):
        self.n = 0
        self.mean_a = 0.0
        self.mean_b = 0.0
        self.m2_a = 0.0
        self.m2_b = 0.0
        self.c_ab = 0.0

    def update(self, a, b) -> "CorrelationAccumulator":
        a = np.asarray(a, dtype=float).ravel()
        b = np.asarray(b, dtype=float).ravel()
        if a.size == 0:
            return self
        other = CorrelationAccumulator()
        other.n = a.size
        other.mean_a, other.mean_b = a.mean(), b.mean()
        da, db = a - other.mean_a, b - other.mean_b
        other.m2_a, other.m2_b, other.c_ab = da @ da, db @ db, da @ db
        return self.merge(other)

    def merge(self, other: "CorrelationAccumulator") -> "CorrelationAccumulator":
        if other.n == 0:
            return self
        n = self.n + other.n
        dA = other.mean_a - self.mean_a
        dB = other.mean_b - self.mean_b
        w = self.n * other.n / n
        self.m2_a += other.m2_a + dA * dA * w
        self.m2_b += other.m2_b + dB * dB * w
        self.c_ab += other.c_ab + dA * dB * w
        self.mean_a += dA * other.n / n
        self.mean_b += dB * other.n / n
        self.n = n
        return self

    @property
    def correlation(self) -> float:
        if self.n < 2:
            raise InsufficientData("need at least two samples")
        denom = np.sqrt(self.m2_a * self.m2_b)
        if denom <= 1e-300 * max(self.n, 1):
            raise InsufficientData("zero variance in one of the radii")
        return float(self.c_ab / denom)


def sample_correlation(samples: Iterable, filter: str = "all") -> float:
    """Pearson correlation of ``(rA, rB)`` over a stream of radius pairs.

    ``filter='separable'`` keeps only pairs flagged separable.
    """
    if filter not in ("all", "separable"):
        raise ValueError("filter must be 'all' or 'separable'")
    acc = CorrelationAccumulator()
    buf_a, buf_b = [], []
    for rA, rB, sep in samples:
        if filter == "all" or sep:
            buf_a.append(rA)
            buf_b.append(rB)
            if len(buf_a) >= 65536:
                acc.update(buf_a, buf_b)
                buf_a, buf_b = [], []
    acc.update(buf_a, buf_b)
    return acc.correlation


class SeparabilityHistogram(BaseEstimator):
    """Estimator wrapper: fit on ``(rA, rB)`` rows with separability labels.

    Parameters
    ----------
    nbins : int
    radius_scale : float

    Attributes
    ----------
    histogram_ : JointRadialHistogram
    """

    def __init__(self, nbins=100, radius_scale=1.0):
        self.nbins = nbins
        self.radius_scale = radius_scale

    def fit(self, X, y):
        self.histogram_ = JointRadialHistogram(self.nbins, self.radius_scale)
        self.n_features_in_ = 2
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (rA, rB), got {X.shape[1]}")
        if not hasattr(self, "histogram_"):
            self.histogram_ = JointRadialHistogram(self.nbins, self.radius_scale)
            self.n_features_in_ = 2
        self.histogram_.accumulate_many(X[:, 0], X[:, 1], y.astype(bool))
        return self

    def predict_proba(self, X) -> np.ndarray:
        """Binned separability probability at each ``(rA, rB)`` row (NaN if unseen)."""
        check_is_fitted(self, "histogram_")
        X = check_array(X, dtype=float)
        h = self.histogram_
        return h.probability()[h.bin_index(X[:, 0]), h.bin_index(X[:, 1])]

    def score(self, X, y) -> float:
        """Mean log-likelihood of labels ``y`` under the binned probabilities."""
        p = np.clip(self.predict_proba(X), 1e-12, 1 - 1e-12)
        y = np.asarray(y, dtype=bool)
        ok = ~np.isnan(p)
        return float(np.mean(np.where(y[ok], np.log(p[ok]), np.log1p(-p[ok]))))
