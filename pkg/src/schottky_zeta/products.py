"""Infinite products over primitive classes: F_1, F_k, Ruelle zeta values.

Every product is accumulated as a sum of logarithms, one shell per word
length, with compensated summation in a fixed canonical order, and
exponentiated once at the end.
"""
from __future__ import annotations

import math
import warnings
import weakref
from dataclasses import dataclass, replace
from typing import Optional

import gmpy2
import mpmath
from gmpy2 import mpc, mpfr

from .errors import (
    DegenerateMarking,
    DivergenceSuspected,
    InvalidParameter,
    MultiplierOnUnitCircle,
    NotNormalized,
    NotRealGroup,
    ParabolicOrElliptic,
)
from .moebius import (
    MarkedSchottkyGroup,
    MoebiusMap,
    fixed_points,
    is_normalized,
    multiplier,
    normalize_marking,
)
from .numbers import INF, to_mpc, workprec
from .words import multiplier_spectrum

# ---------------------------------------------------------------------------
# spectrum cache


@dataclass(frozen=True)
class Spectrum:
    """Class multipliers grouped by word length (index 0 is unused)."""

    max_len: int
    shells: tuple
    real: bool

    def upto(self, max_len: int) -> tuple:
        return self.shells[: max_len + 1]

    @property
    def count(self) -> int:
        return sum(len(s) for s in self.shells)


_SPECTRA: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def spectrum(group: MarkedSchottkyGroup, max_len: int, workers: int = 1) -> Spectrum:
    """Multipliers of every primitive class up to ``max_len``, cached per group."""
    cached = _SPECTRA.get(group)
    if cached is not None and cached.max_len >= max_len:
        return cached
    try:
        reps = multiplier_spectrum(group, max_len, workers=workers)
    except ParabolicOrElliptic as exc:
        raise MultiplierOnUnitCircle(str(exc)) from exc
    shells = [[] for _ in range(max_len + 1)]
    for r in reps:
        shells[r.length].append(r.multiplier)
    real = all(q.imag == 0 for s in shells for q in s)
    with workprec(group.precision):
        if real:
            shells = [[q.real for q in s] for s in shells]
    out = Spectrum(max_len, tuple(tuple(s) for s in shells), real)
    _SPECTRA[group] = out
    return out


# ---------------------------------------------------------------------------
# numerics


class CompensatedSum:
    """Neumaier summation, applied to real and imaginary parts separately."""

    def __init__(self, real: bool):
        self.real = real
        zero = mpfr(0)
        self.s = [zero, zero]
        self.c = [zero, zero]

    def _add(self, idx: int, x):
        s = self.s[idx]
        t = s + x
        if abs(s) >= abs(x):
            self.c[idx] += (s - t) + x
        else:
            self.c[idx] += (x - t) + s
        self.s[idx] = t

    def add(self, x):
        if self.real:
            self._add(0, x)
        else:
            self._add(0, x.real)
            self._add(1, x.imag)

    def value(self):
        re = self.s[0] + self.c[0]
        if self.real:
            return re
        return mpc(re, self.s[1] + self.c[1])


def _log1m(x, cutoff):
    """``log(1 - x)`` without losing tiny ``x`` to rounding."""
    if abs(x) > mpfr("1e-6"):
        return gmpy2.log(1 - x)
    # -x - x^2/2 - x^3/3 ... ; |x| <= 1e-6 so a few terms reach full precision
    out = -x
    p = x
    n = 1
    while True:
        n += 1
        p = p * x
        if abs(p) < cutoff:
            return out
        out -= p / n


def default_m_max(group_or_qmax, precision: int) -> int:
    """Smallest exponent cutoff making ``|q_max|^m_max`` negligible at ``precision``."""
    qmax = float(group_or_qmax)
    if qmax <= 0:
        return 0
    if qmax >= 1:
        raise MultiplierOnUnitCircle(f"|q| = {qmax!r} is not inside the unit disk")
    return max(1, math.ceil((precision + 10) * math.log(2) / -math.log(qmax)))


# ---------------------------------------------------------------------------
# truncated values


@dataclass(frozen=True)
class TruncatedValue:
    """A finite product over enumerated classes with a heuristic tail.

    ``shells[L-1]`` is the summed log-contribution of classes of length ``L``;
    ``offset`` is the log of any class-independent prefactor.  ``value`` is
    ``exp(offset + sum(shells))``.
    """

    value: object
    max_len: int
    m_max: int
    tail_estimate: float
    shells: tuple
    offset: object = 0
    log_value: object = 0
    classes: int = 0
    precision: int = 128
    label: str = ""

    def cumulative(self) -> list:
        """Running log sums ``offset + shells[0] + ... + shells[L-1]``."""
        out = []
        # same guard bits as the final accumulation, so the last entry equals log_value
        with workprec(self.precision + 16):
            acc = CompensatedSum(False)
            acc.add(mpc(self.offset))
            for s in self.shells:
                acc.add(mpc(s))
                out.append(acc.value())
        with workprec(self.precision):
            return [mpc(v) for v in out]

    def as_complex(self) -> complex:
        return complex(float(self.value.real), float(self.value.imag))


def _word_tail(shells: list) -> float:
    """Geometric extrapolation from the last two nonzero shells."""
    mags = [float(abs(s)) for s in shells]
    nz = [(i, m) for i, m in enumerate(mags) if m > 0]
    if len(nz) < 2:
        return 0.0
    (i0, a), (i1, b) = nz[-2], nz[-1]
    r = (b / a) ** (1.0 / (i1 - i0))
    if r >= 1:
        return math.inf
    return b * r / (1 - r)


def _check_decay(shells: list, label: str):
    mags = [float(abs(s)) for s in shells]
    run = 0
    for a, b in zip(mags, mags[1:]):
        if a > 0 and b >= a:
            run += 1
            if run >= 3:
                raise DivergenceSuspected(f"{label}: shell contributions failed to decay over 3 lengths")
        else:
            run = 0


def _product(group, max_len: int, m_max: Optional[int], shift, kind: str, workers: int):
    """Shared driver for all products.

    ``kind == "eta"``: factor ``prod_{m=0}^{m_max} (1 - q^{shift+m})``.
    ``kind == "zeta"``: factor ``(1 - |q|^shift)^-1``.
    """
    if max_len < 0:
        raise InvalidParameter("max_len must be >= 0")
    prec = group.precision
    spec = spectrum(group, max_len, workers) if max_len > 0 else Spectrum(0, ((),), True)
    all_q = [q for s in spec.upto(max_len) for q in s]
    qmax = max((float(abs(q)) for q in all_q), default=0.0)
    if qmax >= 1:
        raise MultiplierOnUnitCircle(f"class multiplier with |q| = {qmax!r}")
    if kind == "eta" and m_max is None:
        m_max = default_m_max(qmax, prec)
    m_max = m_max or 0
    shells = []
    exp_tail = 0.0
    with workprec(prec + 16):
        cutoff = mpfr(2) ** (-(prec + 20))
        real = spec.real and (kind == "eta" or isinstance(shift, int))
        if kind == "zeta" and not real:
            s_c = to_mpc(shift, prec + 16)
        for L in range(1, max_len + 1):
            acc = CompensatedSum(real)
            for q in spec.shells[L]:
                if kind == "eta":
                    p = q ** shift
                    for _m in range(m_max + 1):
                        if abs(p) < cutoff:
                            break
                        acc.add(_log1m(p, cutoff))
                        p = p * q
                    else:
                        aq = float(abs(q))
                        exp_tail += aq ** (shift + m_max + 1) / (1 - aq)
                else:
                    aq = abs(q)
                    if real:
                        x = aq ** shift
                    else:
                        x = gmpy2.exp(s_c * gmpy2.log(mpc(aq)))
                    acc.add(-_log1m(x, cutoff))
            shells.append(acc.value())
    _check_decay(shells, kind)
    return spec, shells, m_max, exp_tail


def _finish(group, spec, shells, offset, m_max, exp_tail, max_len, label) -> TruncatedValue:
    prec = group.precision
    with workprec(prec + 16):
        acc = CompensatedSum(False)
        acc.add(mpc(offset))
        for s in shells:
            acc.add(mpc(s))
        log_value = acc.value()
    with workprec(prec):
        log_value = mpc(log_value)
        value = gmpy2.exp(log_value)
        shells = tuple(mpc(s) for s in shells)
        offset = mpc(offset)
    tail_log = _word_tail(shells) + exp_tail
    mag = float(abs(value))
    tail = math.inf if math.isinf(tail_log) else mag * math.expm1(tail_log)
    n = sum(len(s) for s in spec.upto(max_len))
    return TruncatedValue(value, max_len, m_max, tail, shells, offset, log_value, n, prec, label)


def f1(group: MarkedSchottkyGroup, max_len: int, m_max: Optional[int] = None, workers: int = 1) -> TruncatedValue:
    """Truncated ``prod_{classes} prod_{m>=0} (1 - q^{1+m})``."""
    spec, shells, m_max, exp_tail = _product(group, max_len, m_max, 1, "eta", workers)
    return _finish(group, spec, shells, 0, m_max, exp_tail, max_len, "f1")


def _require_normalizable(group: MarkedSchottkyGroup):
    if group.rank < 2:
        raise NotNormalized("a normalized marking needs rank >= 2")
    if is_normalized(group):
        return
    try:
        normalize_marking(group)
    except DegenerateMarking as exc:
        raise NotNormalized(str(exc)) from exc


def _generator_qs(group: MarkedSchottkyGroup):
    try:
        return group.generator_multipliers()
    except ParabolicOrElliptic as exc:
        raise MultiplierOnUnitCircle(str(exc)) from exc


def fk_prefactor_log(q1, q2, k: int, prec: int):
    """``log`` of ``(1-q1)^2 ... (1-q1^(k-1))^2 (1-q2^(k-1))``."""
    with workprec(prec + 16):
        cutoff = mpfr(2) ** (-(prec + 20))
        acc = CompensatedSum(False)
        for j in range(1, k):
            acc.add(2 * mpc(_log1m(q1 ** j, cutoff)))
        acc.add(mpc(_log1m(q2 ** (k - 1), cutoff)))
        return acc.value()


def fk(group: MarkedSchottkyGroup, k: int, max_len: int, m_max: Optional[int] = None, workers: int = 1) -> TruncatedValue:
    """Prefactored ``prod_{classes} prod_{m>=0} (1 - q^{k+m})``.

    The prefactor uses the multipliers of the first two marked generators.
    Multipliers are conjugation invariant, so the group need only admit a
    normalized marking; it is not conjugated.
    """
    if k < 2:
        raise InvalidParameter("k must be >= 2")
    _require_normalizable(group)
    q1, q2 = _generator_qs(group)[:2]
    spec, shells, m_max, exp_tail = _product(group, max_len, m_max, k, "eta", workers)
    offset = fk_prefactor_log(q1, q2, k, group.precision)
    return _finish(group, spec, shells, offset, m_max, exp_tail, max_len, f"f{k}")


def ruelle_zeta(group: MarkedSchottkyGroup, s, max_len: int, workers: int = 1) -> TruncatedValue:
    """Truncated ``prod_{classes} (1 - |q|^s)^-1``."""
    s_c = complex(s) if not isinstance(s, int) else s
    re = s_c.real if isinstance(s_c, complex) else s_c
    if re <= 1:
        raise InvalidParameter(f"Re(s) = {re} is outside the convergence region")
    if re < 2:
        warnings.warn("Re(s) < 2: convergence is not guaranteed", RuntimeWarning, stacklevel=2)
    if isinstance(s_c, complex) and s_c.imag == 0 and s_c.real == int(s_c.real):
        s_c = int(s_c.real)
    spec, shells, _, _ = _product(group, max_len, None, s_c, "zeta", workers)
    return _finish(group, spec, shells, 0, 0, 0.0, max_len, "zeta")


def zeta_correction_log(q1, q2, k: int, prec: int):
    """``log`` of ``(1-q1^k)^2 (1-q2^k) / (1-q2^(k-1))``."""
    with workprec(prec + 16):
        cutoff = mpfr(2) ** (-(prec + 20))
        acc = CompensatedSum(False)
        acc.add(2 * mpc(_log1m(q1 ** k, cutoff)))
        acc.add(mpc(_log1m(q2 ** k, cutoff)))
        acc.add(-mpc(_log1m(q2 ** (k - 1), cutoff)))
        return acc.value()


def modified_ruelle(group: MarkedSchottkyGroup, k: int, max_len: int, workers: int = 1) -> TruncatedValue:
    """``Z(k)`` times the generator correction factor of the modified zeta value."""
    if k < 2:
        raise InvalidParameter("k must be an integer > 1")
    _require_normalizable(group)
    q1, q2 = _generator_qs(group)[:2]
    z = ruelle_zeta(group, k, max_len, workers)
    spec = spectrum(group, max_len, workers) if max_len > 0 else Spectrum(0, ((),), True)
    offset = zeta_correction_log(q1, q2, k, group.precision)
    out = _finish(group, spec, list(z.shells), offset, 0, 0.0, max_len, f"modified_zeta_{k}")
    scale = float(abs(out.value)) / max(float(abs(z.value)), 1e-300)
    return replace(out, tail_estimate=z.tail_estimate * scale)


@dataclass(frozen=True)
class RatioCheck:
    k: int
    max_len: int
    residual: float
    tail_bound: float
    rounding_floor: float
    modified_zeta: TruncatedValue
    fk: TruncatedValue
    fk1: TruncatedValue

    @property
    def within_tails(self) -> bool:
        return self.residual <= self.tail_bound + self.rounding_floor


def _require_real(group: MarkedSchottkyGroup, max_len: int, workers: int):
    tol = 2.0 ** (-(group.precision // 2))
    for g in group.floating_generators:
        if any(abs(float(x.imag)) > tol * max(1.0, float(abs(x))) for x in g.entries()):
            raise NotRealGroup("generator entries are not real")
    for q in _generator_qs(group):
        if abs(float(q.imag)) > tol or not 0 < float(q.real) < 1:
            raise NotRealGroup(f"generator multiplier {complex(q)!r} is not in (0, 1)")
    if max_len > 0:
        spec = spectrum(group, max_len, workers)
        if not spec.real:
            raise NotRealGroup("class multipliers are not real")


def check_ratio_identity(group: MarkedSchottkyGroup, k: int, max_len: int,
                         m_max: Optional[int] = None, workers: int = 1) -> RatioCheck:
    """Compare ``Z~(k) F_k`` with ``F_{k+1}`` under matched truncation.

    The identity holds factor by factor, so the residual sits at the
    rounding floor; ``rounding_floor`` estimates that floor.
    """
    _require_real(group, max_len, workers)
    if m_max is None:
        spec = spectrum(group, max_len, workers) if max_len > 0 else None
        qmax = max([float(abs(q)) for s in spec.upto(max_len) for q in s], default=0.0) if spec else 0.0
        m_max = default_m_max(max(qmax, 1e-300), group.precision)
    zt = modified_ruelle(group, k, max_len, workers)
    a = fk(group, k, max_len, m_max, workers)
    b = fk(group, k + 1, max_len, m_max, workers)
    with workprec(group.precision):
        lhs = zt.value * a.value
        residual = float(abs(lhs - b.value))
    bound = zt.tail_estimate + a.tail_estimate + b.tail_estimate
    floor = float(abs(b.value)) * 2.0 ** (-group.precision) * (16 + 4 * a.classes)
    return RatioCheck(k, max_len, residual, bound, floor, zt, a, b)


# ---------------------------------------------------------------------------
# degenerating families


def _far_points(group: MarkedSchottkyGroup):
    from .moebius import validate_schottky

    circles = validate_schottky(group).circles
    reach = max(abs(c.center) + c.radius for c in circles if not c.outer)
    cands = []
    for ring in (0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0):
        for j in range(16):
            z = reach * ring * complex(math.cos(2 * math.pi * j / 16), math.sin(2 * math.pi * j / 16))
            if not any(c.contains(z) for c in circles):
                gap = min(abs(abs(z - c.center) - c.radius) for c in circles)
                cands.append((-gap, j, z))
    if len(cands) < 2:
        raise InvalidParameter("could not find base points outside the circles; pass them explicitly")
    cands.sort(key=lambda t: (t[0], t[1]))
    a = cands[0][2]
    # pick a' roughly opposite to a
    b = max(cands[1:], key=lambda t: abs(t[2] - a))[2]
    return a, b


def degenerate_family(group: MarkedSchottkyGroup, i: int, t, a=None, a_prime=None) -> MarkedSchottkyGroup:
    """The degenerating group obtained with parameter ``t``.

    ``i = 0`` replaces the last generator by the map with the same fixed
    points and multiplier ``t``.  ``i > 0`` conjugates generators
    ``i+1..g`` by a pair of loxodromic maps with fixed points ``a, a_prime``
    and multiplier ``t``.
    """
    prec = group.precision
    g = group.rank
    with workprec(prec):
        tt = to_mpc(t, prec)
        if tt == 0:
            raise InvalidParameter("t must be nonzero")
        if not abs(tt) < 1:
            raise InvalidParameter("|t| must be < 1")
        if not 0 <= i <= g // 2:
            raise InvalidParameter(f"i must lie in [0, {g // 2}]")
        gens = list(group.floating_generators)
        if i == 0:
            fp = fixed_points(gens[-1])
            gens[-1] = MoebiusMap.from_fixed_points(fp.attractive, fp.repulsive, tt, prec)
            return MarkedSchottkyGroup(tuple(gens), None, prec, f"{group.name}:t0")
        if a is None or a_prime is None:
            a, a_prime = _far_points(group)
        a_m, b_m = to_mpc(a, prec), to_mpc(a_prime, prec)
        mu = MoebiusMap.from_fixed_points(a_m, b_m, tt, prec)
        mu_p = MoebiusMap.from_fixed_points(b_m, a_m, tt, prec)
        for j in range(i, g):
            gens[j] = (mu_p @ gens[j] @ mu)._normalized()
        return MarkedSchottkyGroup(tuple(gens), None, prec, f"{group.name}:t{i}")


def subgroup(group: MarkedSchottkyGroup, indices) -> MarkedSchottkyGroup:
    """The subgroup generated by the listed (1-based) generators."""
    gens = tuple(group.generators[j - 1] for j in indices)
    circles = None
    if group.circles is not None:
        circles = tuple(c for j in indices for c in (group.circle(j), group.circle(-j)))
    return MarkedSchottkyGroup(gens, circles, group.precision, group.name)


# ---------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class ConstantsBundle:
    g: int
    k: int
    d_k: int
    c_g: mpmath.mpf
    c_gk: mpmath.mpf
    a_g: mpmath.mpf
    zeta_prime_minus1: mpmath.mpf
    precision: int = 128


def d_k(k: int) -> int:
    return 6 * k * k - 6 * k + 1


def zeta_prime_minus1(precision: int):
    """``zeta'(-1) = 1/12 - log A`` with ``A`` the Glaisher-Kinkelin constant."""
    with mpmath.workprec(precision + 16):
        v = mpmath.mpf(1) / 12 - mpmath.log(mpmath.glaisher)
    with mpmath.workprec(precision):
        return +v


def constants(g: int, k: int, precision: int = 128) -> ConstantsBundle:
    if g < 2 or k < 2:
        raise InvalidParameter("constants need g >= 2 and k >= 2")
    dk = d_k(k)
    with mpmath.workprec(precision + 16):
        z = zeta_prime_minus1(precision + 16)
        c_g = (2 * mpmath.pi) ** (2 * g) * mpmath.exp((g - 1) * (24 * z + 1) / 6)
        c_gk = mpmath.exp((g - 1) * (24 * z + 2 * dk - 1) / 6)
        a_g = (2 * g - 2) * (-12 * z + mpmath.mpf(1) / 2)
    with mpmath.workprec(precision):
        return ConstantsBundle(g, k, dk, +c_g, +c_gk, +a_g, +z, precision)
