"""Closed-form X-state separability surfaces, curves and crossover equations.

Surfaces and curves are assembled from exact rational polynomials exactly as
the formulas are written, so identities between them (restrictions of the
bivariate ratio to ``rB = rA``, ``rB = 1 - rA`` and ``rB = 1/2``, swap
symmetry, continuity at joins) can be checked in rational arithmetic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy import integrate

from .exact import (
    BivariatePolynomial,
    BivariateRational,
    ExactPolynomial,
    RationalFunction,
    _frac,
    isolate_root,
    poly_root,
    real_roots,
)
from .exceptions import ToleranceNotReached

PI2 = math.pi**2
HALF = Fraction(1, 2)


def _compile(p: BivariatePolynomial) -> Callable[[float, float], float]:
    """Float evaluator for ``p`` as Horner in ``b`` with Horner-in-``a`` coefficients."""
    deg_b = max((j for _, j in p.terms), default=0)
    rows = []
    for j in range(deg_b + 1):
        cs = {i: float(c) for (i, jj), c in p.terms.items() if jj == j}
        deg_a = max(cs, default=0)
        expr = "0.0"
        for i in range(deg_a, -1, -1):
            expr = f"({expr})*a+({cs.get(i, 0.0)!r})"
        rows.append(expr)
    src = "0.0"
    for expr in reversed(rows):
        src = f"({src})*b+({expr})"
    return eval(f"lambda a, b: {src}")  # noqa: S307 - generated from numeric literals only


def _as_rational(expr) -> BivariateRational:
    return expr if isinstance(expr, BivariateRational) else BivariateRational(expr, 1)


class PiecewiseSurface:
    """Function on the unit square given by one expression on each side of the diagonal.

    Parameters
    ----------
    upper, lower : BivariatePolynomial or BivariateRational
        Expressions on ``rA > rB`` and ``rA < rB``.
    scale : float
        Irrational prefactor (e.g. ``pi**2``) multiplying the rational part.
    diagonal : RationalFunction, optional
        Value on ``rA = rB``; defaults to the reduced restriction of ``upper``.
    """

    def __init__(self, upper, lower, scale=1.0, scale_label="", name="", diagonal=None, probes=1000):
        self.upper = _as_rational(upper)
        self.lower = _as_rational(lower)
        self.scale = scale
        self.scale_label = scale_label
        self.name = name
        x = ExactPolynomial.x()
        self.diagonal = diagonal if diagonal is not None else self.upper.restrict(x, x).reduced()
        self.symmetric = self.lower.same_function(self.upper.swap())
        self.regions = [("rA>rB", self.upper), ("rA<rB", self.lower), ("rA=rB", self.diagonal)]
        self._fu = self._compile(self.upper)
        self._fl = self._compile(self.lower)
        if probes:
            self.check_continuity(probes)

    @staticmethod
    def _compile(expr: BivariateRational):
        num = _compile(expr.num)
        if expr.den.terms == {(0, 0): Fraction(1)}:
            return num
        den = _compile(expr.den)
        return lambda a, b: num(a, b) / den(a, b)

    def check_continuity(self, probes=1000, tol=1e-12):
        for r in np.linspace(0, 1, probes + 2)[1:-1]:
            vals = []
            for expr, f in ((self.upper, self._fu), (self.lower, self._fl)):
                if expr.den(r, r) != 0:
                    vals.append(f(r, r))
            vals.append(self.diagonal(float(r)))
            if max(vals) - min(vals) > tol * max(1.0, max(abs(v) for v in vals)):
                raise ValueError(f"{self.name}: pieces disagree on the diagonal at r={r}: {vals}")

    def rational(self, a, b):
        """Exact value of the rational part at rational ``(a, b)``."""
        a, b = _frac(a), _frac(b)
        if a > b:
            return self.upper(a, b)
        if a < b:
            return self.lower(a, b)
        return self.diagonal(a)

    def __call__(self, a, b):
        if isinstance(a, (Fraction, int)) and isinstance(b, (Fraction, int)) and self.scale == 1.0:
            return self.rational(a, b)
        a, b = float(a), float(b)
        if a > b:
            v = self._fu(a, b)
        elif a < b:
            v = self._fl(a, b)
        else:
            v = self.diagonal(a)
        return self.scale * v

    def times(self, g: BivariatePolynomial, name="") -> "PiecewiseSurface":
        """Surface multiplied by a polynomial (moment integrands)."""
        up = BivariateRational(self.upper.num * g, self.upper.den)
        lo = BivariateRational(self.lower.num * g, self.lower.den)
        x = ExactPolynomial.x()
        diag = self.diagonal * RationalFunction(g.restrict(x, x))
        return PiecewiseSurface(up, lo, self.scale, self.scale_label, name or self.name, diag, probes=0)


class PiecewiseCurve:
    """Univariate piecewise rational function on closed intervals, with special points."""

    def __init__(self, pieces, special=None, name="", check=True):
        self.pieces = [(_frac(lo), _frac(hi), f if isinstance(f, RationalFunction) else RationalFunction(f))
                       for lo, hi, f in pieces]
        self.pieces.sort(key=lambda p: p[0])
        self.special = {_frac(k): _frac(v) for k, v in (special or {}).items()}
        self.name = name
        if check:
            self.check_continuity()

    @property
    def domain(self):
        return self.pieces[0][0], self.pieces[-1][1]

    @property
    def breakpoints(self) -> list[Fraction]:
        return [p[1] for p in self.pieces[:-1]]

    def _eval_piece(self, f: RationalFunction, r):
        if f.den(r) == 0:
            return f.reduced()(r)
        return f(r)

    def check_continuity(self, tol=1e-12):
        for (_, hi, f), (lo, _, g) in zip(self.pieces, self.pieces[1:]):
            if hi != lo:
                raise ValueError(f"{self.name}: gap between pieces at {hi} and {lo}")
            left, right = self._eval_piece(f, hi), self._eval_piece(g, lo)
            if abs(float(left - right)) > tol:
                raise ValueError(f"{self.name}: discontinuous at {float(hi)} ({float(left)} vs {float(right)})")
            if hi in self.special and abs(float(self.special[hi] - left)) > tol:
                raise ValueError(f"{self.name}: special value at {float(hi)} disagrees with the pieces")

    def piece_at(self, r) -> RationalFunction:
        for lo, hi, f in self.pieces:
            if lo <= r <= hi:
                return f
        raise ValueError(f"{self.name}: {float(r)} outside domain")

    def __call__(self, r):
        exact = isinstance(r, (Fraction, int))
        if exact:
            r = Fraction(r)
            if r in self.special:
                return self.special[r]
            return self._eval_piece(self.piece_at(r), r)
        r = float(r)
        fr = Fraction(r) if r in (0.5, 0.0, 1.0) else None
        if fr is not None and fr in self.special:
            return float(self.special[fr])
        f = self.piece_at(r)
        den = f.den(r)
        if den == 0:
            return float(f.reduced()(Fraction(r)))
        return f.num(r) / den

    def evaluate(self, r: np.ndarray) -> np.ndarray:
        return np.array([self(float(x)) for x in np.ravel(r)]).reshape(np.shape(r))

    def __sub__(self, other: "PiecewiseCurve") -> "PiecewiseCurve":
        lo = max(self.domain[0], other.domain[0])
        hi = min(self.domain[1], other.domain[1])
        cuts = sorted({lo, hi, *(b for b in self.breakpoints + other.breakpoints if lo < b < hi)})
        pieces = []
        for a, b in zip(cuts, cuts[1:]):
            m = (a + b) / 2
            pieces.append((a, b, self.piece_at(m) - other.piece_at(m)))
        special = {}
        for k in set(self.special) | set(other.special):
            if lo <= k <= hi:
                special[k] = self(k) - other(k)
        return PiecewiseCurve(pieces, special, f"{self.name}-{other.name}", check=False)


def _surface_pieces():
    A, B = BivariatePolynomial.var_a(), BivariatePolynomial.var_b()
    tot_up = -(A - 1) ** 3 * (A * (A + 3) - 5 * B**2 + 1) / 960
    tot_lo = -(B - 1) ** 3 * (-5 * A**2 + B * (B + 3) + 1) / 960
    sep_up = -(A - 1) ** 3 * (5 * (A + 3) * B**4 - 10 * (3 * A + 1) * B**2 + 8 * A**2 + 9 * A + 3) / 7680
    sep_lo = -(B - 1) ** 3 * (5 * A**4 * (B + 3) - 10 * A**2 * (3 * B + 1) + B * (8 * B + 9) + 3) / 7680
    prob_up = BivariateRational(
        5 * (A + 3) * B**4 - 10 * (3 * A + 1) * B**2 + 8 * A**2 + 9 * A + 3,
        8 * (A * (A + 3) - 5 * B**2 + 1),
    )
    prob_lo = BivariateRational(
        5 * A**4 * (B + 3) - 10 * A**2 * (3 * B + 1) + B * (8 * B + 9) + 3,
        8 * (-5 * A**2 + B * (B + 3) + 1),
    )
    return tot_up, tot_lo, sep_up, sep_lo, prob_up, prob_lo


_tu, _tl, _su, _sl, _pu, _pl = _surface_pieces()
X_TOTAL = PiecewiseSurface(_tu, _tl, PI2, "pi^2", "x_total")
X_SEP = PiecewiseSurface(_su, _sl, PI2, "pi^2", "x_sep")
X_PROB = PiecewiseSurface(_pu, _pl, name="x_prob")

_r = ExactPolynomial.x()

X_DIAG = PiecewiseCurve(
    [(0, 1, RationalFunction(-(_r - 1) * (5 * _r * (_r * (_r + 5) + 3) + 3), 32 * _r + 8))],
    name="x_diag",
)
X_ANTIDIAG = PiecewiseCurve(
    [
        (0, HALF, RationalFunction(_r * (_r * (5 * _r * ((_r - 4) * _r - 6) + 32) + 25) - 20,
                                   8 * (_r * (4 * _r + 5) - 5))),
        (HALF, 1, RationalFunction(-((_r - 2) * _r * (5 * _r * (_r**2 + _r - 10) + 28) + 8),
                                   8 * (_r * (4 * _r - 13) + 4))),
    ],
    name="x_antidiag",
)
X_HALF = PiecewiseCurve(
    [
        (0, HALF, RationalFunction(35 * _r**4 - 50 * _r**2 + 19, 44 - 80 * _r**2)),
        (HALF, 1, RationalFunction(128 * _r**2 + 29 * _r + 23, 32 * (4 * _r**2 + 12 * _r - 1))),
    ],
    special={HALF: Fraction(139, 384)},
    name="x_half",
)
XK5_HALF = PiecewiseCurve(
    [
        (0, HALF, RationalFunction(-231 * _r**6 + 441 * _r**4 - 297 * _r**2 + 70,
                                   336 * _r**4 - 360 * _r**2 + 103)),
        (HALF, 1, RationalFunction(512 * _r**4 + 2560 * _r**3 - 384 * _r**2 + 679 * _r + 35,
                                   32 * (16 * _r**4 + 80 * _r**3 + 120 * _r**2 - 40 * _r + 13))),
    ],
    special={HALF: Fraction(1261, 2176)},
    name="xk5_half",
)

# crossover and intersection equations, highest degree first as printed
XK4_QUINTIC = ExactPolynomial.from_descending([4, 5, -8, -14, 4, 1])
XK5_OCTIC = ExactPolynomial.from_descending([112, 252, -203, -938, -441, 728, 27, -42, -7])
K3_QUARTIC = ExactPolynomial.from_descending([5100, 6885, -26711, -26340, 18105])
DIAG_MAX_CUBIC = ExactPolynomial.from_descending([3, 9, 1, -1])
DIAG_MAXVAL_CUBIC = ExactPolynomial.from_descending([54, 108, -28, -9])
HALF_DIAG_QUINTIC = ExactPolynomial.from_descending([10, 17, -24, -18, 6, 1])
HALF_ANTI_SEXTIC = ExactPolynomial.from_descending([10, -7, -34, -6, 30, 5, -6])


def x_total(rA, rB):
    return X_TOTAL(rA, rB)


def x_sep(rA, rB):
    return X_SEP(rA, rB)


def x_prob(rA, rB):
    """Separability probability; exact for rational arguments."""
    return X_PROB(rA, rB)


def x_diag(rA):
    return X_DIAG(rA)


def x_antidiag(rA):
    return X_ANTIDIAG(rA)


def x_half(rA):
    return X_HALF(rA)


def xk5_half(rA):
    return XK5_HALF(rA)


def curve_extremum(c: PiecewiseCurve, lo, hi, mode: str = "max") -> tuple[float, float]:
    """Global max or min of ``c`` on ``[lo, hi]``.

    Interior candidates are the roots of each piece's derivative numerator,
    isolated exactly (Sturm) and bisected to 1e-13; endpoints and piece
    joins are candidates as well.
    """
    if mode not in ("max", "min"):
        raise ValueError("mode must be 'max' or 'min'")
    lo, hi = _frac(lo), _frac(hi)
    cands = [lo, hi]
    for a, b, f in c.pieces:
        a, b = max(a, lo), min(b, hi)
        if a >= b:
            continue
        cands += [a, b]
        dnum = f.derivative().num
        if not dnum.is_zero():
            cands += [Fraction(x) for x in real_roots(dnum, a, b, tol=1e-13)]
    vals = [(float(c(x)), x) for x in cands]
    best = max(vals) if mode == "max" else min(vals)
    return float(best[1]), best[0]


def intersect_curves(c1: PiecewiseCurve, c2: PiecewiseCurve, lo, hi, grid=10_000, tol=1e-10) -> list[float]:
    """Roots of ``c1 - c2`` on ``[lo, hi]`` by sign scanning and exact bisection."""
    diff = c1 - c2
    lo, hi = _frac(lo), _frac(hi)
    xs = np.linspace(float(lo), float(hi), grid + 1)
    vals = np.array([diff(float(x)) for x in xs])
    roots = []

    def exact_zero(x):
        return diff(Fraction(x)) == 0

    for k in range(grid + 1):
        if abs(vals[k]) < 1e-12 and exact_zero(xs[k] if 0 < k < grid else (lo if k == 0 else hi)):
            roots.append(float(xs[k]))
            continue
        if k < grid and vals[k] * vals[k + 1] < 0:
            a, b = Fraction(xs[k]), Fraction(xs[k + 1])
            inside = [f for pa, pb, f in diff.pieces if pa <= a and b <= pb]
            if inside and inside[0].den.sign_at(a) == inside[0].den.sign_at(b) != 0:
                # single smooth piece: a root of the numerator is a root of the curve
                x, y = isolate_root(inside[0].num, a, b, tol)
                roots.append(float((x + y) / 2))
                continue
            while b - a > tol:
                m = (a + b) / 2
                if diff(m) * diff(a) <= 0:
                    b = m
                else:
                    a = m
            roots.append(float((a + b) / 2))
    out = []
    for x in sorted(roots):
        if not out or x - out[-1] > 10 * tol:
            out.append(x)
    return out


def integrate_surface(f, tol: float = 1e-9) -> float:
    """Integral over the unit square, split along the diagonal into two triangles.

    ``f`` is a :class:`PiecewiseSurface` (each triangle then sees a single
    smooth piece) or any callable ``f(rA, rB)``.
    """
    if isinstance(f, PiecewiseSurface):
        up, lo_, scale = f._fu, f._fl, f.scale
    else:
        up = lo_ = f
        scale = 1.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            # dblquad integrates func(y, x) with x = rA outer, y = rB inner
            v1, e1 = integrate.dblquad(lambda b, a: up(a, b), 0, 1, 0, lambda a: a, epsabs=tol / 4, epsrel=0)
            v2, e2 = integrate.dblquad(lambda b, a: lo_(a, b), 0, 1, lambda a: a, 1, epsabs=tol / 4, epsrel=0)
        except integrate.IntegrationWarning as exc:
            raise ToleranceNotReached(str(exc)) from exc
    err = (e1 + e2) * abs(scale)
    if err > tol:
        raise ToleranceNotReached(f"estimated error {err:.2e} exceeds {tol:.2e}")
    return scale * (v1 + v2)


def marginal_integral(f, rA, tol: float = 1e-12) -> float:
    """``integral_0^1 f(rA, rB) drB``, split at the diagonal where the pieces meet."""
    rA = float(rA)
    g = lambda b: float(f(rA, b))  # noqa: E731
    v = 0.0
    for lo, hi in ((0.0, rA), (rA, 1.0)):
        if hi > lo:
            val, err = integrate.quad(g, lo, hi, epsabs=tol, epsrel=0, limit=200)
            if err > 10 * tol:
                raise ToleranceNotReached(f"quadrature error {err:.2e} on [{lo}, {hi}]")
            v += val
    return v


def x_total_marginal(r) -> float:
    """Closed-form marginal of the X-state total volume: ``pi^2 (1 - r^2)^3 / 2304``."""
    return PI2 * (1 - float(r) ** 2) ** 3 / 2304


@dataclass(frozen=True)
class CorrelationResult:
    value: float
    mean: float
    variance: float
    covariance: float
    paper_value: float | None = None


def surface_correlation(f: PiecewiseSurface, tol: float = 1e-12) -> CorrelationResult:
    """Pearson correlation of ``(rA, rB)`` under the normalized density ``f``."""
    A, B = BivariatePolynomial.var_a(), BivariatePolynomial.var_b()
    z = integrate_surface(f, tol)
    ea = integrate_surface(f.times(A), tol) / z
    eb = integrate_surface(f.times(B), tol) / z
    eaa = integrate_surface(f.times(A * A), tol) / z
    ebb = integrate_surface(f.times(B * B), tol) / z
    eab = integrate_surface(f.times(A * B), tol) / z
    var_a, var_b = eaa - ea * ea, ebb - eb * eb
    cov = eab - ea * eb
    return CorrelationResult(cov / math.sqrt(var_a * var_b), ea, var_a, cov)


PAPER_CORRELATION = {
    "all": 1 - 11206656 / (37748736 - 10080 * PI2 + PI2**2),
    "separable": 1 - 74649600 / (235929600 - 25200 * PI2 + PI2**2),
}


def x_correlation(filter: str = "all", tol: float = 1e-12) -> CorrelationResult:
    """Correlation of the radii under ``x_total`` (or ``x_sep``), with the printed value alongside."""
    f = {"all": X_TOTAL, "separable": X_SEP}[filter]
    res = surface_correlation(f, tol)
    return CorrelationResult(res.value, res.mean, res.variance, res.covariance, PAPER_CORRELATION[filter])


def exact_constants(tol: float = 1e-12) -> list[dict]:
    """Named closed-form values with the figures they are compared against.

    ``tol`` is the bracket width used for root isolation.
    """
    def row(name, value, paper_value, paper_float):
        return {"name": name, "value": float(value), "paper_value": paper_value,
                "abs_err": abs(float(value) - paper_float)}

    half = Fraction(1, 2)
    arg, val = curve_extremum(X_DIAG, 0, 1, "max")
    gap_arg, gap = curve_extremum(X_DIAG - X_ANTIDIAG, Fraction("0.40182804"), half, "max")
    rows = [
        row("x_prob_half_half", x_prob(half, half), "139/384", 139 / 384),
        row("x_prob_0_0", x_prob(0, 0), "3/8", 3 / 8),
        row("x_prob_1_1", x_prob(1, 1), "0", 0.0),
        row("x_prob_0_1", x_prob(0, 1), "1/2", 0.5),
        row("x_crossover_quintic", poly_root(XK4_QUINTIC, Fraction(3, 10), half, tol), "0.40182804", 0.40182804),
        row("xk5_crossover_octic", poly_root(XK5_OCTIC, Fraction(3, 10), Fraction(4, 10), tol), "0.3385355079", 0.3385355079),
        row("k3_crossover_quartic", poly_root(K3_QUARTIC, Fraction(4, 10), half, tol), "0.487543066126", 0.487543066126),
        row("x_diag_argmax", arg, "0.2722700792", 0.2722700792),
        row("x_diag_max", val, "0.393558399", 0.393558399),
        row("x_gap_argmax", gap_arg, "0.4564893379", 0.4564893379),
        row("x_gap_max", gap, "0.0056796160", 0.0056796160),
        row("x_half_diag_intersection", intersect_curves(X_HALF, X_DIAG, 0, Fraction(49, 100))[-1], "0.364314", 0.364314),
        row("x_half_anti_intersection", intersect_curves(X_HALF, X_ANTIDIAG, 0, Fraction(49, 100))[-1], "0.428908", 0.428908),
        row("xk5_half_at_half", xk5_half(half), "1261/2176", 1261 / 2176),
        row("x_prob_integral", integrate_surface(X_PROB, 1e-9), "0.381678", 0.381678),
    ]
    for filt in ("all", "separable"):
        c = x_correlation(filt)
        rows.append(row(f"x_correlation_{filt}", c.value, repr(c.paper_value), c.paper_value))
    return rows
