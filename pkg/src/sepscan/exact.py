"""Exact rational polynomial and rational-function arithmetic.

Coefficients are :class:`fractions.Fraction`. Evaluation at a ``Fraction``
argument is exact; evaluation at a ``float`` uses cached float coefficients
and Horner's rule.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .exceptions import NoSignChange

Number = int | float | Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # decimals are taken at their shortest repr, not binary expansion
        return Fraction(repr(x))
    return Fraction(x)


class ExactPolynomial:
    """Univariate polynomial with rational coefficients, ascending degree.

    The zero polynomial has an empty coefficient tuple; every other
    polynomial has a nonzero leading coefficient.
    """

    __slots__ = ("coeffs", "_fcoeffs")

    def __init__(self, coeffs: Iterable = ()):
        c = [_frac(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)
        self._fcoeffs = tuple(float(x) for x in c)

    @classmethod
    def x(cls) -> "ExactPolynomial":
        return cls((0, 1))

    @classmethod
    def from_descending(cls, coeffs: Sequence) -> "ExactPolynomial":
        """Build from coefficients written highest degree first."""
        return cls(list(coeffs)[::-1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __repr__(self):
        return f"ExactPolynomial({[str(c) for c in self.coeffs]})"

    def __eq__(self, other):
        if not isinstance(other, ExactPolynomial):
            other = _as_poly(other)
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x):
        if isinstance(x, (Fraction, int)) and not isinstance(x, bool):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        acc = 0.0
        for c in reversed(self._fcoeffs):
            acc = acc * x + c
        return acc

    def sign_at(self, x) -> int:
        v = self(_frac(x))
        return (v > 0) - (v < 0)

    def __neg__(self):
        return ExactPolynomial(-c for c in self.coeffs)

    def __add__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return ExactPolynomial(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, RationalFunction):
            return NotImplemented
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return ExactPolynomial()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return ExactPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = ExactPolynomial((1,))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return ExactPolynomial(c / other for c in self.coeffs)
        return RationalFunction(self, other)

    def __rtruediv__(self, other):
        return RationalFunction(_as_poly(other), self)

    def derivative(self) -> "ExactPolynomial":
        return ExactPolynomial(i * c for i, c in enumerate(self.coeffs) if i)

    def compose(self, inner: "ExactPolynomial") -> "ExactPolynomial":
        """Return ``self(inner(x))``."""
        out = ExactPolynomial()
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    def divmod(self, other: "ExactPolynomial"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        q = [Fraction(0)] * max(len(rem) - len(other.coeffs) + 1, 0)
        lead = other.coeffs[-1]
        while len(rem) >= len(other.coeffs) and rem:
            shift = len(rem) - len(other.coeffs)
            f = rem[-1] / lead
            q[shift] = f
            for i, c in enumerate(other.coeffs):
                rem[shift + i] -= f * c
            rem.pop()
            while rem and rem[-1] == 0:
                rem.pop()
        return ExactPolynomial(q), ExactPolynomial(rem)

    def monic(self) -> "ExactPolynomial":
        return ExactPolynomial(c / self.coeffs[-1] for c in self.coeffs)

    def gcd(self, other: "ExactPolynomial") -> "ExactPolynomial":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a.divmod(b)[1]
        return a.monic() if not a.is_zero() else a

    def sturm_sequence(self) -> list["ExactPolynomial"]:
        seq = [self, self.derivative()]
        while not seq[-1].is_zero():
            seq.append(-seq[-2].divmod(seq[-1])[1])
        return seq[:-1]

    def count_roots(self, lo, hi) -> int:
        """Number of distinct real roots in the half-open interval (lo, hi]."""
        seq = self.sturm_sequence()

        def changes(x):
            signs = [s for s in (p.sign_at(x) for p in seq) if s]
            return sum(1 for u, v in zip(signs, signs[1:]) if u != v)

        return changes(_frac(lo)) - changes(_frac(hi))


def _as_poly(x):
    if isinstance(x, ExactPolynomial):
        return x
    if isinstance(x, (int, Fraction, float, Rational)):
        return ExactPolynomial((x,))
    return NotImplemented


class RationalFunction:
    """Quotient ``num / den`` of two exact polynomials."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        self.num = _as_poly(num)
        self.den = _as_poly(den)
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator")

    def __repr__(self):
        return f"RationalFunction({self.num!r}, {self.den!r})"

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def reduced(self) -> "RationalFunction":
        g = self.num.gcd(self.den)
        if g.is_zero() or g.degree == 0:
            return self
        return RationalFunction(self.num.divmod(g)[0], self.den.divmod(g)[0])

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __add__(self, other):
        other = _as_rat(other)
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_rat(other))

    def __rsub__(self, other):
        return _as_rat(other) - self

    def __mul__(self, other):
        other = _as_rat(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_rat(other)
        return RationalFunction(self.num * other.den, self.den * other.num)

    def derivative(self) -> "RationalFunction":
        return RationalFunction(
            self.num.derivative() * self.den - self.num * self.den.derivative(),
            self.den * self.den,
        )

    def compose(self, inner: ExactPolynomial) -> "RationalFunction":
        return RationalFunction(self.num.compose(inner), self.den.compose(inner))


def _as_rat(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    return RationalFunction(_as_poly(x), 1)


class BivariatePolynomial:
    """Polynomial in ``(a, b)`` stored as ``{(i, j): coefficient}`` for ``a**i b**j``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms: dict[tuple[int, int], Fraction] = {
            k: _frac(v) for k, v in (terms or {}).items() if v != 0
        }

    @classmethod
    def var_a(cls):
        return cls({(1, 0): 1})

    @classmethod
    def var_b(cls):
        return cls({(0, 1): 1})

    def __repr__(self):
        return f"BivariatePolynomial({self.terms})"

    def __eq__(self, other):
        return isinstance(other, BivariatePolynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __call__(self, a, b):
        exact = all(isinstance(v, (int, Fraction)) for v in (a, b))
        acc = Fraction(0) if exact else 0.0
        for (i, j), c in self.terms.items():
            acc += (c if exact else float(c)) * a**i * b**j
        return acc

    def __neg__(self):
        return BivariatePolynomial({k: -v for k, v in self.terms.items()})

    def __add__(self, other):
        other = _as_bi(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return BivariatePolynomial(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-_as_bi(other))

    def __rsub__(self, other):
        return _as_bi(other) - self

    def __mul__(self, other):
        other = _as_bi(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (i, j), c in self.terms.items():
            for (k, m), d in other.terms.items():
                key = (i + k, j + m)
                out[key] = out.get(key, 0) + c * d
        return BivariatePolynomial(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return BivariatePolynomial({k: v / other for k, v in self.terms.items()})
        return BivariateRational(self, other)

    def __pow__(self, n: int):
        out = BivariatePolynomial({(0, 0): 1})
        for _ in range(n):
            out = out * self
        return out

    def swap(self) -> "BivariatePolynomial":
        """Exchange the roles of ``a`` and ``b`` at coefficient level."""
        return BivariatePolynomial({(j, i): v for (i, j), v in self.terms.items()})

    def restrict(self, pa: ExactPolynomial, pb: ExactPolynomial) -> ExactPolynomial:
        """Univariate polynomial ``r -> self(pa(r), pb(r))``."""
        out = ExactPolynomial()
        for (i, j), c in self.terms.items():
            out = out + (pa**i) * (pb**j) * c
        return out

    def integrate_lower_triangle(self) -> Fraction:
        """Exact integral over ``0 < b < a < 1``."""
        return sum(
            (c / ((j + 1) * (i + j + 2)) for (i, j), c in self.terms.items()),
            Fraction(0),
        )


def _as_bi(x) -> BivariatePolynomial:
    if isinstance(x, BivariatePolynomial):
        return x
    return BivariatePolynomial({(0, 0): _frac(x)})


class BivariateRational:
    """Quotient of two bivariate polynomials."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        self.num = _as_bi(num)
        self.den = _as_bi(den)

    def __call__(self, a, b):
        return self.num(a, b) / self.den(a, b)

    def swap(self) -> "BivariateRational":
        return BivariateRational(self.num.swap(), self.den.swap())

    def restrict(self, pa, pb) -> RationalFunction:
        return RationalFunction(self.num.restrict(pa, pb), self.den.restrict(pa, pb))

    def same_function(self, other: "BivariateRational") -> bool:
        """Exact test of ``self == other`` as rational functions."""
        return (self.num * other.den) == (other.num * self.den)


def isolate_root(p: ExactPolynomial, lo, hi, tol=1e-12) -> tuple[Fraction, Fraction]:
    """Bisect a sign-changing bracket of ``p`` down to width ``tol``.

    Signs are computed exactly, so the returned bracket is a rigorous
    enclosure of a root.
    """
    lo, hi = _frac(lo), _frac(hi)
    slo, shi = p.sign_at(lo), p.sign_at(hi)
    if slo == 0:
        return lo, lo
    if shi == 0:
        return hi, hi
    if slo == shi:
        raise NoSignChange(f"p has the same sign at {float(lo)} and {float(hi)}")
    tol = _frac(tol)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        s = p.sign_at(mid)
        if s == 0:
            return mid, mid
        if s == slo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def poly_root(p: ExactPolynomial, lo, hi, tol=1e-12) -> float:
    """Root of ``p`` in ``[lo, hi]`` by exact-sign bisection."""
    a, b = isolate_root(p, lo, hi, tol)
    return float((a + b) / 2)


def real_roots(p: ExactPolynomial, lo, hi, tol=1e-12) -> list[float]:
    """All distinct real roots of ``p`` in ``[lo, hi]``, isolated with Sturm counts."""
    if p.is_zero():
        raise ValueError("zero polynomial has no isolated roots")
    lo, hi = _frac(lo), _frac(hi)
    # square-free part keeps every root simple, so each has a sign change
    g = p.gcd(p.derivative())
    q = p.divmod(g)[0] if g.degree > 0 else p
    out = []
    if q.sign_at(lo) == 0:
        out.append(float(lo))
    stack = [(lo, hi)]
    tol = _frac(tol)
    while stack:
        a, b = stack.pop()
        n = q.count_roots(a, b)
        if n == 0:
            continue
        if n == 1 and q.sign_at(a) != 0:
            if q.sign_at(b) == 0:
                out.append(float(b))
            else:
                x, y = isolate_root(q, a, b, tol)
                out.append(float((x + y) / 2))
            continue
        m = (a + b) / 2
        stack.extend([(a, m), (m, b)])
    return sorted(out)
