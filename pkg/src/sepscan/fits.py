"""Candidate (fitted, unproven) formulas for full two-qubit K=3, 4, 5 measures
and chi-squared comparison of curves against binned Monte Carlo data.

The K=3 surfaces are normalized so that the total volume is 1 at
``(1/2, 1/2)``; likewise the K=4 and K=5 diagonal volumes. The K=4
antidiagonal is an empirical fit with decimal coefficients and carries no
exactness claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .closedform import PiecewiseCurve, PiecewiseSurface
from .exact import BivariatePolynomial, BivariateRational, ExactPolynomial, RationalFunction
from .exceptions import NoData
from .histogram import CurveEstimate

HALF = Fraction(1, 2)
_r = ExactPolynomial.x()
A, B = BivariatePolynomial.var_a(), BivariatePolynomial.var_b()

# K=3 total volume, normalized to 1 at (1/2, 1/2)
K3_TOTAL = PiecewiseSurface(
    BivariateRational(8 * (A - 1) ** 4 * (A**2 + 4 * A - 5 * B**2), A),
    BivariateRational(8 * (B - 1) ** 4 * (B * (B + 4) - 5 * A**2), B),
    diagonal=RationalFunction(-32 * (_r - 1) ** 5),
    name="k3_total",
)

# K=3 separable volume; S and T are kept as the named sub-polynomials
K3_S = -22675 * B**3 - 852 * B**2 + 470 * B + 96
K3_T = -5100 * B**4 + 5502 * B**3 + 49355 * B**2 - 1152 * B - 5196
_k3_sep_upper = BivariateRational(
    -(A - 1) ** 4
    * (-(A**3) * (6012 * B + 2351) + 2 * A**2 * (2424 * B - 9859) + K3_T * A + 2785 * A**4 + K3_S * B),
    5100 * A,
)
K3_SEP_DIAG = RationalFunction((_r - 1) ** 6 * (_r**2 + 6 * _r + 1))
K3_SEP = PiecewiseSurface(_k3_sep_upper, _k3_sep_upper.swap(), diagonal=K3_SEP_DIAG, name="k3_sep")

K3_DIAG = PiecewiseCurve([(0, 1, RationalFunction((1 - _r) * (_r**2 + 6 * _r + 1) / 32))], name="k3_diag")
K3_ANTIDIAG = PiecewiseCurve(
    [
        (0, HALF, RationalFunction(
            5100 * _r**5 - 24480 * _r**4 - 66682 * _r**3 + 49256 * _r**2 + 38325 * _r - 24480,
            40800 * (4 * _r**2 + 6 * _r - 5))),
        (HALF, 1, RationalFunction(
            -5100 * _r**5 + 1020 * _r**4 + 113602 * _r**3 - 246670 * _r**2 + 135629 * _r - 22961,
            40800 * (4 * _r**2 - 14 * _r + 5))),
    ],
    name="k3_antidiag",
)
# continuity at 1/2 is checked with a looser bound too: a transcription slip must fail loudly
if abs(float(K3_ANTIDIAG.pieces[0][2](HALF) - K3_ANTIDIAG.pieces[1][2](HALF))) > 1e-9:
    raise ValueError("k3_antidiag pieces disagree at 1/2")

# K=4 (Hilbert-Schmidt) diagonal volumes, normalized to 1 at 1/2
K4_TOTAL_DIAG = RationalFunction(Fraction(256, 5) * (1 - _r) ** 8 * (8 * _r + 1))
K4_SEP_DIAG = RationalFunction(Fraction(28, 3) * (1 - _r) ** 9 * (29 * _r**2 + Fraction(17, 2) * _r + 1))
K4_DIAG = PiecewiseCurve(
    [(0, 1, RationalFunction(-35 * (_r - 1) * (58 * _r**2 + 17 * _r + 2), 384 * (8 * _r + 1)))],
    name="k4_diag",
)
_k4_anti = RationalFunction(
    ExactPolynomial.from_descending(["-0.660807", "-119.919", "237.198", "-200.68", "90.0466", "-21.6016", "2.32483"]),
    ExactPolynomial.from_descending(["-1", "-66.164", "75.933", "-30.4436", "4.64965"]),
)
K4_ANTIDIAG = PiecewiseCurve(
    [(0, HALF, _k4_anti), (HALF, 1, _k4_anti.compose(1 - _r))],
    name="k4_antidiag",
)
K4_ANTIDIAG_EMPIRICAL = True

# K=5 diagonal volumes and their ratio
K5_TOTAL_DIAG = RationalFunction(Fraction(4096, 33) * (1 - _r) ** 11 * (40 * _r**2 + 11 * _r + 1))
K5_SEP_DIAG = RationalFunction(
    49 * (1 - _r) ** 12 * (108 * _r**3 + Fraction(111, 2) * _r**2 + 10 * _r + 1)
)
K5_DIAG = PiecewiseCurve(
    [(0, 1, RationalFunction(-1617 * (_r - 1) * (216 * _r**3 + 111 * _r**2 + 20 * _r + 2),
                             8192 * (40 * _r**2 + 11 * _r + 1)))],
    name="k5_diag",
)


def k3_total(rA, rB):
    return K3_TOTAL(rA, rB)


def k3_sep(rA, rB):
    return K3_SEP(rA, rB)


def k3_diag(rA):
    return K3_DIAG(rA)


def k3_antidiag(rA):
    return K3_ANTIDIAG(rA)


def k4_diag(rA):
    return K4_DIAG(rA)


def k4_antidiag(rA):
    return K4_ANTIDIAG(rA)


def k5_diag(rA):
    return K5_DIAG(rA)


@dataclass
class FitReport:
    name: str
    residuals: np.ndarray
    statistic: float
    dof: int
    skipped: int
    empirical: bool = False
    abscissae: np.ndarray = field(default=None, repr=False)

    @property
    def reduced(self) -> float:
        return self.statistic / self.dof if self.dof else float("nan")

    def to_dict(self) -> dict:
        return {
            "formula": self.name,
            "statistic": self.statistic,
            "dof": self.dof,
            "reduced_chi_squared": self.reduced,
            "skipped_bins": self.skipped,
            "empirical_formula": self.empirical,
            "residuals": [None if np.isnan(v) else float(v) for v in self.residuals],
        }


def chi_squared(curve, data: CurveEstimate, min_count: int = 1, name: str | None = None,
                empirical: bool = False) -> FitReport:
    """Binomially weighted chi-squared of ``data`` against ``curve``.

    Each defined point contributes ``(p_hat - f(mid))**2 / max(p_hat (1 - p_hat) / n, 1 / (4 n**2))``.
    Points with fewer than ``min_count`` samples are skipped.
    """
    use = data.counts >= max(min_count, 1)
    if not use.any():
        raise NoData("no defined bins to compare")
    n = data.counts[use].astype(float)
    p = data.probabilities[use]
    x = data.abscissae[use]
    f = curve.evaluate(x) if hasattr(curve, "evaluate") else np.array([float(curve(v)) for v in x])
    var = np.maximum(p * (1 - p) / n, 1 / (4 * n * n))
    resid = np.full(len(data.counts), np.nan)
    resid[use] = p - f
    stat = float(np.sum((p - f) ** 2 / var))
    return FitReport(
        name or getattr(curve, "name", "curve"), resid, stat, int(use.sum()),
        int(len(data.counts) - use.sum()), empirical, data.abscissae,
    )
