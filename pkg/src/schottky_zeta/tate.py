"""Exact univariate power series and the Tate-curve identities.

``ZSeries`` holds integer coefficients, ``QSeries`` rational ones
(``gmpy2.mpq``).  Both truncate every product at their common order.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from gmpy2 import mpq

from .errors import IntegralityViolation, InvalidParameter, PoleAtZ0
from .numbers import parse_rational


class _Series:
    __slots__ = ("coeffs", "order")
    _zero = 0

    def __init__(self, coeffs: Sequence, order: Optional[int] = None):
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise InvalidParameter("series order must be >= 0")
        c = [self._coerce(x) for x in list(coeffs)[: order + 1]]
        c.extend([self._coerce(0)] * (order + 1 - len(c)))
        self.coeffs = tuple(c)
        self.order = order

    @staticmethod
    def _coerce(x):
        return x

    @classmethod
    def zero(cls, order: int):
        return cls([], order)

    @classmethod
    def one(cls, order: int):
        return cls([1], order)

    @classmethod
    def monomial(cls, n: int, order: int, c=1):
        out = [0] * (order + 1)
        if n <= order:
            out[n] = c
        return cls(out, order)

    def _other(self, other):
        if isinstance(other, _Series):
            return other
        return type(self)([other], self.order)

    def _same(self, other):
        o = self._other(other)
        n = min(self.order, o.order)
        return o, n

    def __getitem__(self, n):
        return self.coeffs[n]

    def __len__(self):
        return self.order + 1

    def __add__(self, other):
        o, n = self._same(other)
        return self._result([a + b for a, b in zip(self.coeffs[: n + 1], o.coeffs[: n + 1])], n, o)

    __radd__ = __add__

    def __neg__(self):
        return type(self)([-a for a in self.coeffs], self.order)

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        if not isinstance(other, _Series):
            return type(self)([a * other for a in self.coeffs], self.order)
        o, n = self._same(other)
        a, b = self.coeffs, o.coeffs
        out = [0] * (n + 1)
        for i in range(n + 1):
            ai = a[i]
            if ai:
                for j in range(n + 1 - i):
                    bj = b[j]
                    if bj:
                        out[i + j] += ai * bj
        return self._result(out, n, o)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not supported; use inverse()")
        out = type(self).one(self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def _result(self, coeffs, n, other):
        # mixing with a QSeries promotes to QSeries
        cls = QSeries if isinstance(self, QSeries) or isinstance(other, QSeries) else type(self)
        return cls(coeffs, n)

    def __eq__(self, other):
        if not isinstance(other, _Series):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def first_nonzero(self) -> Optional[int]:
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        return None

    def truncate(self, order: int):
        return type(self)(self.coeffs, min(order, self.order))

    def __repr__(self):
        terms = [f"{c}*q^{i}" for i, c in enumerate(self.coeffs) if c]
        return f"{type(self).__name__}({' + '.join(terms) or '0'}; O(q^{self.order + 1}))"


class ZSeries(_Series):
    """Integer power series truncated at ``q^order``."""

    __slots__ = ()

    @staticmethod
    def _coerce(x):
        if isinstance(x, int):
            return x
        xq = mpq(x)
        if xq.denominator != 1:
            raise IntegralityViolation(f"coefficient {xq} is not an integer")
        return int(xq.numerator)

    def exact_div(self, d: int) -> "ZSeries":
        out = []
        for i, c in enumerate(self.coeffs):
            if c % d:
                raise IntegralityViolation(f"coefficient {c} of q^{i} is not divisible by {d}")
            out.append(c // d)
        return ZSeries(out, self.order)


class QSeries(_Series):
    """Rational power series truncated at ``q^order``."""

    __slots__ = ()

    @staticmethod
    def _coerce(x):
        return mpq(x)

    def inverse(self) -> "QSeries":
        a = self.coeffs
        if a[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        n = self.order
        inv0 = 1 / a[0]
        out = [mpq(0)] * (n + 1)
        out[0] = inv0
        for i in range(1, n + 1):
            s = mpq(0)
            for j in range(1, i + 1):
                if a[j]:
                    s += a[j] * out[i - j]
            out[i] = -s * inv0
        return QSeries(out, n)

    def __truediv__(self, other):
        if isinstance(other, _Series):
            return self * QSeries(other.coeffs, other.order).inverse()
        return QSeries([c / mpq(other) for c in self.coeffs], self.order)


def _divisors(n: int):
    small, large = [], []
    d = 1
    while d * d <= n:
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
        d += 1
    return small + large[::-1]


def sk_series(k: int, N: int) -> ZSeries:
    """``s_k = sum n^k q^n / (1 - q^n)``: coefficient of ``q^n`` is ``sigma_k(n)``."""
    if k < 0:
        raise InvalidParameter("k must be >= 0")
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    return ZSeries([0] + [sum(d ** k for d in _divisors(n)) for n in range(1, N + 1)], N)


def a4_a6_series(N: int):
    """The Tate-curve coefficients ``a4 = -5 s3`` and ``a6 = -(5 s3 + 7 s5)/12``."""
    s3, s5 = sk_series(3, N), sk_series(5, N)
    a4 = s3 * (-5)
    a6 = -((s3 * 5 + s5 * 7).exact_div(12))
    return a4, a6


def tate_xy(z0, N: int):
    """``X(z0)`` and ``Y(z0)`` as exact rational q-series through ``q^N``.

    Summing the geometric expansions of each term over ``n`` gives, for
    ``N >= 1``, coefficient ``sum_{m | N} m (z^m + z^-m - 2)`` in ``X`` and
    ``sum_{m | N} (m(m-1)/2 z^m - m(m+1)/2 z^-m + m)`` in ``Y``.
    """
    z = parse_rational(z0) if not isinstance(z0, type(mpq(0))) else z0
    if z == 0 or z == 1:
        raise PoleAtZ0(f"z0 = {z} makes the q^0 term singular")
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    zi = 1 / z
    zp = [mpq(1)]
    zip_ = [mpq(1)]
    for _ in range(N):
        zp.append(zp[-1] * z)
        zip_.append(zip_[-1] * zi)
    x = [z / (1 - z) ** 2]
    y = [z * z / (1 - z) ** 3]
    for n in range(1, N + 1):
        sx = mpq(0)
        sy = mpq(0)
        for m in _divisors(n):
            sx += m * (zp[m] + zip_[m] - 2)
            sy += mpq(m * (m - 1), 2) * zp[m] - mpq(m * (m + 1), 2) * zip_[m] + m
        x.append(sx)
        y.append(sy)
    return QSeries(x, N), QSeries(y, N)


@dataclass(frozen=True)
class SeriesCheck:
    residual: _Series

    @property
    def residual_zero(self) -> bool:
        return self.residual.is_zero()

    @property
    def first_nonzero_order(self) -> Optional[int]:
        return self.residual.first_nonzero()


def weierstrass_check(z0, N: int) -> SeriesCheck:
    """Residual ``Y^2 + XY - X^3 - a4 X - a6`` at ``z = z0`` through ``q^N``."""
    X, Y = tate_xy(z0, N)
    a4, a6 = a4_a6_series(N)
    res = Y * Y + X * Y - X * X * X - X * a4 - a6
    return SeriesCheck(res)


def euler_product(start: int, N: int, power: int = 1) -> ZSeries:
    """``prod_{m>=0} (1 - q^{start+m})^power`` through ``q^N``."""
    out = ZSeries.one(N)
    for e in range(start, N + 1):
        out = out * (ZSeries.one(N) - ZSeries.monomial(e, N)) ** power
    return out


def telescoping_check(k: int, N: int) -> SeriesCheck:
    """Difference of the two sides of the shifted-product telescoping identity."""
    if k < 2:
        raise InvalidParameter("k must be >= 2")
    if N < 1:
        raise InvalidParameter("N must be >= 1")
    lhs = ZSeries.one(N)
    for j in range(1, k):
        lhs = lhs * (ZSeries.one(N) - ZSeries.monomial(j, N)) ** 2
    lhs = lhs * euler_product(k, N, 2)
    rhs = euler_product(1, N, 2)
    return SeriesCheck(lhs - rhs)
