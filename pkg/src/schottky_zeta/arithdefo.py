"""Universal multiplier expansions in the deformation parameters ``y_1..y_g``.

The fixed-point coordinates ``x_{±i}`` are specialised to exact rationals
(``x_1 = 0``, ``x_-1 = infinity``, ``x_2 = 1``), so every object here is a
truncated power series in the ``y``'s with rational coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence

from gmpy2 import mpq

from .errors import CoincidentFixedPoints, InvalidParameter, NonInvertibleLeadingTerm
from .numbers import INF, parse_rational
from .words import is_cyclically_reduced, walk_classes

_ZERO = mpq(0)


class MultiSeries:
    """Truncated power series in ``nvars`` variables, total degree ``<= D``."""

    __slots__ = ("nvars", "D", "terms")

    def __init__(self, nvars: int, D: int, terms: Optional[Mapping] = None):
        self.nvars = nvars
        self.D = D
        out = {}
        if terms:
            for e, c in terms.items():
                e = tuple(e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} has wrong length for {nvars} variables")
                if sum(e) <= D and c:
                    out[e] = mpq(c)
        self.terms = out

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, nvars: int, D: int, c=1) -> "MultiSeries":
        return cls(nvars, D, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars: int, D: int, i: int) -> "MultiSeries":
        """The variable ``y_i`` (1-based)."""
        e = [0] * nvars
        e[i - 1] = 1
        return cls(nvars, D, {tuple(e): 1})

    @classmethod
    def monomial(cls, nvars: int, D: int, exps, c=1) -> "MultiSeries":
        return cls(nvars, D, {tuple(exps): c})

    def _wrap(self, terms) -> "MultiSeries":
        out = MultiSeries(self.nvars, self.D)
        out.terms = terms
        return out

    def _coerce(self, other) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return MultiSeries.const(self.nvars, self.D, other)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        D = min(self.D, o.D)
        out = {e: c for e, c in self.terms.items() if sum(e) <= D}
        for e, c in o.terms.items():
            if sum(e) <= D:
                v = out.get(e, _ZERO) + c
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        r = self._wrap(out)
        r.D = D
        return r

    __radd__ = __add__

    def __neg__(self):
        return self._wrap({e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, MultiSeries):
            c0 = mpq(other)
            if not c0:
                return self._wrap({})
            return self._wrap({e: c * c0 for e, c in self.terms.items()})
        o = other
        D = min(self.D, o.D)
        a = [(e, sum(e), c) for e, c in self.terms.items()]
        b = [(e, sum(e), c) for e, c in o.terms.items()]
        out: Dict[tuple, object] = {}
        for ea, da, ca in a:
            room = D - da
            if room < 0:
                continue
            for eb, db, cb in b:
                if db > room:
                    continue
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, _ZERO) + ca * cb
        r = self._wrap({e: c for e, c in out.items() if c})
        r.D = D
        return r

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = MultiSeries.const(self.nvars, self.D)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def truncate(self, D: int) -> "MultiSeries":
        D = min(D, self.D)
        r = self._wrap({e: c for e, c in self.terms.items() if sum(e) <= D})
        r.D = D
        return r

    def times_monomial(self, exps: Sequence[int], D: Optional[int] = None) -> "MultiSeries":
        """Exact product with ``prod y_j^{exps_j}``.

        A series known through degree ``d`` times a monomial of degree ``m``
        is known through ``d + m``; ``D`` sets the resulting cap.
        """
        cap = self.D + sum(exps) if D is None else D
        out = MultiSeries(self.nvars, cap)
        out.terms = {
            t: c for t, c in ((tuple(x + y for x, y in zip(e, exps)), c) for e, c in self.terms.items())
            if sum(t) <= cap
        }
        return out

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, _ZERO)

    def inverse(self) -> "MultiSeries":
        """Multiplicative inverse; needs a nonzero constant term."""
        c0 = self.constant_term()
        if not c0:
            raise ZeroDivisionError("constant term is zero")
        # u = c0 (1 - h) with h in the maximal ideal; 1/u = (1/c0) sum h^n
        h = (self * (1 / c0) - 1) * -1
        out = MultiSeries.const(self.nvars, self.D)
        p = MultiSeries.const(self.nvars, self.D)
        for _ in range(self.D):
            p = p * h
            if not p.terms:
                break
            out = out + p
        return out * (1 / c0)

    def __truediv__(self, other):
        if isinstance(other, MultiSeries):
            return self * other.inverse()
        return self * (1 / mpq(other))

    def __eq__(self, other):
        if isinstance(other, MultiSeries):
            return self.nvars == other.nvars and self.terms == other.terms
        return self == self._coerce(other)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    # inspection ---------------------------------------------------------
    def min_degree(self) -> Optional[int]:
        return min((sum(e) for e in self.terms), default=None)

    def lowest_terms(self) -> dict:
        d = self.min_degree()
        return {e: c for e, c in self.terms.items() if sum(e) == d}

    def divisible_by(self, exps: Sequence[int]) -> bool:
        """Every monomial is a multiple of ``prod y_j^{exps_j}``."""
        return all(all(x >= m for x, m in zip(e, exps)) for e in self.terms)

    def sorted_terms(self) -> list:
        return sorted(self.terms.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))

    def mod_p(self, p: int) -> dict:
        """Coefficients reduced mod ``p``; raises if a denominator is divisible by ``p``."""
        out = {}
        for e, c in self.terms.items():
            den = int(c.denominator)
            if den % p == 0:
                raise ValueError(f"coefficient {c} is not {p}-integral")
            v = int(c.numerator) * pow(den, -1, p) % p
            if v:
                out[e] = v
        return out

    def __repr__(self):
        parts = []
        for e, c in self.sorted_terms():
            mono = "*".join(f"y{i + 1}^{x}" if x > 1 else f"y{i + 1}" for i, x in enumerate(e) if x)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return f"MultiSeries({' + '.join(parts) or '0'}; deg<={self.D})"


# ---------------------------------------------------------------------------
# configuration and generators


@dataclass(frozen=True)
class ArithConfig:
    """Rank, rational fixed-point coordinates and the degree cap.

    ``x_values`` maps signed indices to rationals; the normalised values
    ``x_1 = 0``, ``x_-1 = INF``, ``x_2 = 1`` are filled in.
    """

    g: int
    x_values: dict = field(default_factory=dict)
    D: int = 10

    def __post_init__(self):
        if self.g < 1:
            raise InvalidParameter("g must be >= 1")
        if self.D < 0:
            raise InvalidParameter("degree cap must be >= 0")
        xs = {1: mpq(0), -1: INF}
        if self.g >= 2:
            xs[2] = mpq(1)
        for key, v in self.x_values.items():
            key = int(key)
            if key in xs:
                continue
            if not 1 <= abs(key) <= self.g:
                raise InvalidParameter(f"x index {key} outside rank {self.g}")
            xs[key] = v if v is INF else parse_rational(v)
        missing = [i for j in range(1, self.g + 1) for i in (j, -j) if i not in xs]
        if missing:
            raise InvalidParameter(f"missing x values for indices {missing}")
        vals = list(xs.values())
        for a in range(len(vals)):
            for b in range(a + 1, len(vals)):
                if vals[a] is not INF and vals[b] is not INF and vals[a] == vals[b]:
                    raise CoincidentFixedPoints(f"x values coincide: {vals[a]}")
        object.__setattr__(self, "x_values", dict(sorted(xs.items(), key=lambda kv: (abs(kv[0]), -kv[0]))))

    def x(self, i: int):
        return self.x_values[i]

    def with_degree(self, D: int) -> "ArithConfig":
        return ArithConfig(self.g, dict(self.x_values), D)


Matrix = tuple  # (a, b, c, d) of MultiSeries


def phi_generators(cfg: ArithConfig) -> list:
    """Generator matrices with polynomial entries and determinant exactly ``y_i``.

    ``phi_i`` fixes ``x_i`` (repelling) and ``x_-i`` (attracting) with
    multiplier ``y_i``; ``phi_1 = diag(1, y_1)``.
    """
    n, D = cfg.g, cfg.D
    one = MultiSeries.const(n, D)
    out = []
    for i in range(1, n + 1):
        y = MultiSeries.var(n, D, i)
        xi, xm = cfg.x(i), cfg.x(-i)
        if xm is INF:
            if xi is INF:
                raise CoincidentFixedPoints("both fixed points at infinity")
            # z -> (z - xi)/y + xi; for xi = 0 this is diag(1, y)
            out.append((one, (y - one) * xi, MultiSeries(n, D), y))
            continue
        if xi is INF:
            # repelling point at infinity: z -> y z + (1 - y) xm
            out.append((y, (one - y) * xm, MultiSeries(n, D), one))
            continue
        s = 1 / (xi - xm)
        a = (y * xi - xm) * s
        b = (one - y) * (xi * xm) * s
        c = (y - one) * s
        d = (one * xi - y * xm) * s
        out.append((a, b, c, d))
    return out


def _mat_mul(m1: Matrix, m2: Matrix, D: Optional[int] = None) -> Matrix:
    a1, b1, c1, d1 = m1
    a2, b2, c2, d2 = m2
    out = (a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2)
    if D is not None:
        out = tuple(x.truncate(D) for x in out)
    return out


def _adjugate(m: Matrix) -> Matrix:
    a, b, c, d = m
    return (d, -b, -c, a)


def letter_matrices(cfg: ArithConfig) -> dict:
    gens = phi_generators(cfg)
    out = {}
    for i, m in enumerate(gens, start=1):
        out[i] = m
        out[-i] = _adjugate(m)
    return out


def word_det_exponents(w: Sequence[int], g: int) -> tuple:
    e = [0] * g
    for l in w:
        e[abs(l) - 1] += 1
    return tuple(e)


def word_matrix(w: Sequence[int], cfg: ArithConfig, D: Optional[int] = None) -> Matrix:
    lets = letter_matrices(cfg)
    n = cfg.g
    m = (MultiSeries.const(n, cfg.D), MultiSeries(n, cfg.D), MultiSeries(n, cfg.D), MultiSeries.const(n, cfg.D))
    for l in w:
        if l == 0 or abs(l) > n:
            raise InvalidParameter(f"letter {l} outside rank {n}")
        m = _mat_mul(m, lets[l], D)
    return m


def _multiplier_from_matrix(m: Matrix, det_exps: tuple, cfg: ArithConfig, word=()) -> MultiSeries:
    n, D = cfg.g, cfg.D
    ldeg = sum(det_exps)
    if ldeg > D:
        return MultiSeries(n, D)
    det = MultiSeries.monomial(n, D, det_exps)
    room = D - ldeg
    tr = (m[0] + m[3]).truncate(room)
    T = (tr * tr - det * 2).truncate(room)
    if not T.constant_term():
        raise NonInvertibleLeadingTerm(f"tr^2 - 2 det has zero constant term for word {tuple(word)}")
    Tinv = T.inverse()
    # q <- det (q^2 + 1) / T contracts y-adically by ldeg per step
    q = MultiSeries(n, D)
    for _ in range(D // max(ldeg, 1) + 2):
        nq = ((q * q + 1).truncate(room) * Tinv).times_monomial(det_exps, D)
        if nq == q:
            break
        q = nq
    return q


def word_multiplier_series(w: Sequence[int], cfg: ArithConfig) -> MultiSeries:
    """Universal multiplier ``q_w`` truncated at total degree ``cfg.D``."""
    w = tuple(w)
    if not w:
        raise InvalidParameter("empty word")
    if not is_cyclically_reduced(w):
        raise InvalidParameter(f"word {w} is not cyclically reduced")
    dexp = word_det_exponents(w, cfg.g)
    room = cfg.D - sum(dexp)
    if room < 0:
        return MultiSeries(cfg.g, cfg.D)
    m = word_matrix(w, cfg, room)
    return _multiplier_from_matrix(m, dexp, cfg, w)


def quadratic_residual(w: Sequence[int], q: MultiSeries, cfg: ArithConfig) -> MultiSeries:
    """``det q^2 - (tr^2 - 2 det) q + det`` through degree ``cfg.D``."""
    m = word_matrix(w, cfg)
    det = MultiSeries.monomial(cfg.g, cfg.D, word_det_exponents(w, cfg.g))
    tr = m[0] + m[3]
    return det * q * q - (tr * tr - det * 2) * q + det


def class_multipliers(cfg: ArithConfig, max_len: Optional[int] = None):
    """``(word, q_w)`` for every primitive class of length ``<= max_len``."""
    D = cfg.D
    L = D if max_len is None else max_len
    lets = letter_matrices(cfg)
    n = cfg.g
    one, zero = MultiSeries.const(n, D), MultiSeries(n, D)
    root = ((one, zero, zero, one), (0,) * n)

    def step(state, letter, depth):
        m, e = state
        e = list(e)
        e[abs(letter) - 1] += 1
        # a class reached through this prefix has length >= depth
        return _mat_mul(m, lets[letter], D - depth), tuple(e)

    for w, (m, e) in walk_classes(n, L, root, step):
        yield w, _multiplier_from_matrix(m, e, cfg, w)


def _eta_factor(q: MultiSeries, start: int, D: int) -> MultiSeries:
    """``prod_{m>=0} (1 - q^{start+m})`` through degree ``D``."""
    out = MultiSeries.const(q.nvars, D)
    if not q:
        return out
    if q.min_degree() == 0:
        raise NonInvertibleLeadingTerm("multiplier series has a constant term")
    p = q ** start
    while p:
        out = out * (1 - p)
        p = p * q
    return out


def f1_series(cfg: ArithConfig, D: Optional[int] = None) -> MultiSeries:
    """Universal expansion of ``prod_{classes} prod_m (1 - q^{1+m})``."""
    cfg = cfg if D is None else cfg.with_degree(D)
    out = MultiSeries.const(cfg.g, cfg.D)
    for _w, q in class_multipliers(cfg):
        out = out * _eta_factor(q, 1, cfg.D)
    return out


def fk_series(cfg: ArithConfig, k: int, D: Optional[int] = None) -> MultiSeries:
    """Universal expansion of the prefactored ``F_k`` product."""
    if k < 2:
        raise InvalidParameter("k must be >= 2")
    if cfg.g < 2:
        raise InvalidParameter("the F_k prefactor needs g >= 2")
    cfg = cfg if D is None else cfg.with_degree(D)
    n, Dc = cfg.g, cfg.D
    q1 = word_multiplier_series((1,), cfg)
    q2 = word_multiplier_series((2,), cfg)
    out = MultiSeries.const(n, Dc)
    for j in range(1, k):
        out = out * (1 - q1 ** j) ** 2
    out = out * (1 - q2 ** (k - 1))
    for _w, q in class_multipliers(cfg):
        out = out * _eta_factor(q, k, Dc)
    return out


def specialize(s: MultiSeries, assignment: Mapping) -> MultiSeries:
    """Substitute values for some variables (1-based keys); others are kept."""
    vals = {int(k): parse_rational(v) if not isinstance(v, type(_ZERO)) else v for k, v in assignment.items()}
    out: Dict[tuple, object] = {}
    for e, c in s.terms.items():
        e = list(e)
        for i, v in vals.items():
            x = e[i - 1]
            if x:
                c = c * v ** x
                e[i - 1] = 0
        if c:
            t = tuple(e)
            out[t] = out.get(t, _ZERO) + c
    return MultiSeries(s.nvars, s.D, {e: c for e, c in out.items() if c})


def univariate(s: MultiSeries, var: int = 1) -> list:
    """Coefficients of a series that only involves ``y_var``."""
    out = [_ZERO] * (s.D + 1)
    for e, c in s.terms.items():
        if any(x for i, x in enumerate(e) if i != var - 1):
            raise ValueError("series involves other variables")
        out[e[var - 1]] = c
    return out


@dataclass(frozen=True)
class PrimeReport:
    p: int
    p_integral: bool
    primitive: Optional[bool]
    note: str = ""


def primitivity_check(s: MultiSeries, primes: Iterable[int]) -> list:
    """Per prime: is some coefficient a ``p``-unit?  Denominators are reported."""
    out = []
    for p in primes:
        bad = [c for c in s.terms.values() if int(c.denominator) % p == 0]
        if bad:
            out.append(PrimeReport(p, False, None, f"{len(bad)} coefficients have denominators divisible by {p}"))
            continue
        unit = any(int(c.numerator) % p for c in s.terms.values())
        out.append(PrimeReport(p, True, unit))
    return out


def admissible_words(g: int, max_len: int) -> list:
    """All cyclically reduced words (not only class representatives) up to ``max_len``."""
    import itertools

    letters = [l for i in range(1, g + 1) for l in (i, -i)]
    out = []
    for n in range(1, max_len + 1):
        for w in itertools.product(letters, repeat=n):
            if is_cyclically_reduced(w):
                out.append(w)
    return out
