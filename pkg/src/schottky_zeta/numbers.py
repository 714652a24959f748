"""Scalar plumbing: working precision, exact Gaussian rationals, parsing.

Floating values are ``gmpy2.mpc`` numbers; exact values are :class:`QQi`.
The point at infinity of the Riemann sphere is the singleton :data:`INF`.
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from typing import Union

import gmpy2
from gmpy2 import mpc, mpfr, mpq

DEFAULT_PRECISION = 128
MIN_PRECISION = 64


def default_precision() -> int:
    """Precision in bits, honouring ``SCHOTTKY_PRECISION_BITS`` when set."""
    env = os.environ.get("SCHOTTKY_PRECISION_BITS")
    if env:
        bits = int(env)
        if bits < MIN_PRECISION:
            raise ValueError(f"SCHOTTKY_PRECISION_BITS must be >= {MIN_PRECISION}")
        return bits
    return DEFAULT_PRECISION


@contextmanager
def workprec(bits: int):
    # gmpy2 contexts are thread-local, so this is safe under threads
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        yield


class _Infinity:
    __slots__ = ()

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return "INF"


INF = _Infinity()


class QQi:
    """Exact complex rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = mpq(re)
        self.im = mpq(im)

    @staticmethod
    def coerce(x) -> "QQi":
        if isinstance(x, QQi):
            return x
        if isinstance(x, complex):
            return QQi(mpq(x.real), mpq(x.imag))
        return QQi(mpq(x), 0)

    def __add__(self, other):
        o = QQi.coerce(other)
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = QQi.coerce(other)
        return QQi(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return QQi.coerce(other) - self

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __mul__(self, other):
        o = QQi.coerce(other)
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QQi.coerce(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("QQi division by zero")
        return QQi((self.re * o.re + self.im * o.im) / n, (self.im * o.re - self.re * o.im) / n)

    def __rtruediv__(self, other):
        return QQi.coerce(other) / self

    def __eq__(self, other):
        try:
            o = QQi.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def norm(self):
        return self.re * self.re + self.im * self.im

    def conjugate(self):
        return QQi(self.re, -self.im)

    def to_mpc(self, bits: int) -> mpc:
        return mpc(mpfr(self.re, bits), mpfr(self.im, bits), precision=bits)

    def __repr__(self):
        return f"QQi({self.re}, {self.im})"


Scalar = Union[QQi, mpc]


def parse_rational(text) -> mpq:
    """Exact rational from a decimal string, ``"p/q"`` string, or int."""
    if isinstance(text, int) and not isinstance(text, bool):
        return mpq(text)
    if type(text) is type(mpq(0)):
        return text
    if isinstance(text, float):
        raise TypeError("floats are not parsed exactly; pass a decimal string")
    try:
        return mpq(str(text).strip())
    except ValueError as exc:
        raise ValueError(f"cannot parse {text!r} as an exact rational") from exc


def parse_complex(value) -> QQi:
    """Parse ``[re, im]`` (decimal strings) or a bare real string into a QQi."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex number must be [re, im], got {value!r}")
        return QQi(parse_rational(value[0]), parse_rational(value[1]))
    return QQi(parse_rational(value), 0)


def to_mpc(x, bits: int) -> mpc:
    if isinstance(x, QQi):
        return x.to_mpc(bits)
    if isinstance(x, mpc):
        return mpc(x, precision=bits)
    if isinstance(x, complex):
        return mpc(x.real, x.imag, precision=bits)
    return mpc(x, precision=bits)


def to_complex(x) -> complex:
    """Round to a Python complex (``inf`` for the point at infinity)."""
    if x is INF:
        return complex(float("inf"), 0.0)
    if isinstance(x, QQi):
        return complex(float(x.re), float(x.im))
    if isinstance(x, mpc):
        return complex(float(x.real), float(x.imag))
    return complex(x)


def cabs(x) -> mpfr:
    return abs(x)


def format_complex(x, digits: int = 0) -> list:
    """JSON-friendly ``[re, im]`` decimal strings (full precision by default)."""
    if x is INF:
        return ["inf", "0"]
    if isinstance(x, QQi):
        return [str(x.re), str(x.im)]
    if isinstance(x, complex):
        return [repr(x.real), repr(x.imag)]
    fmt = "{0:." + str(digits) + "g}" if digits else None
    re, im = x.real, x.imag
    if fmt:
        return [fmt.format(re), fmt.format(im)]
    return [_mpfr_str(re), _mpfr_str(im)]


def _mpfr_str(x: mpfr) -> str:
    digits = max(17, int(x.precision * 0.30103) + 2)
    return format(x, f".{digits}g")
