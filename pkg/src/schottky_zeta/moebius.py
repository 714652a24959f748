"""Möbius transformations, fixed points, multipliers and marked Schottky groups."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import (
    DegenerateMap,
    DegenerateMarking,
    InvalidInput,
    NotClassicalSchottky,
    ParabolicOrElliptic,
)
from .numbers import INF, QQi, cabs, default_precision, to_complex, to_mpc, workprec


def _is_zero(x) -> bool:
    # bool(mpc(0)) is True in gmpy2, so compare explicitly
    return x == 0


@dataclass(frozen=True, eq=False)
class MoebiusMap:
    """Projective 2x2 matrix ``z -> (a z + b) / (c z + d)``.

    ``prec`` is the working precision in bits for floating maps (entries are
    ``gmpy2.mpc``) and ``None`` for exact maps (entries are :class:`QQi`).
    Equality is projective.
    """

    a: object
    b: object
    c: object
    d: object
    prec: Optional[int] = None

    def __post_init__(self):
        if _is_zero(self.a * self.d - self.b * self.c):
            raise DegenerateMap("ad - bc = 0")

    # -- construction -------------------------------------------------
    @classmethod
    def exact(cls, a, b, c, d) -> "MoebiusMap":
        return cls(*(QQi.coerce(x) for x in (a, b, c, d)), prec=None)

    @classmethod
    def floating(cls, a, b, c, d, prec: Optional[int] = None) -> "MoebiusMap":
        prec = prec or default_precision()
        return cls(*(to_mpc(x, prec) for x in (a, b, c, d)), prec=prec)._normalized()

    @classmethod
    def identity(cls, prec: Optional[int] = None) -> "MoebiusMap":
        if prec is None:
            return cls.exact(1, 0, 0, 1)
        return cls.floating(1, 0, 0, 1, prec)

    @classmethod
    def from_fixed_points(cls, attractive, repulsive, multiplier, prec: Optional[int] = None) -> "MoebiusMap":
        """The loxodromic map with the given attractive/repulsive points and multiplier."""
        prec = prec or default_precision()
        with workprec(prec):
            q = to_mpc(multiplier, prec)
            pa = _homogeneous(attractive, prec)
            pr = _homogeneous(repulsive, prec)
            # columns: 0 -> attractive, infinity -> repulsive
            m = cls(pr[0], pa[0], pr[1], pa[1], prec=prec)
            diag = cls(q, to_mpc(0, prec), to_mpc(0, prec), to_mpc(1, prec), prec=prec)
            return compose(compose(m, diag), m.inverse())

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def to_floating(self, prec: Optional[int] = None) -> "MoebiusMap":
        prec = prec or self.prec or default_precision()
        return MoebiusMap.floating(*self.entries(), prec=prec)

    # -- algebra --------------------------------------------------------
    def det(self):
        with workprec(self.prec or 64):
            return self.a * self.d - self.b * self.c

    def trace(self):
        with workprec(self.prec or 64):
            return self.a + self.d

    def inverse(self) -> "MoebiusMap":
        """Adjugate; projectively the inverse."""
        with workprec(self.prec or 64):
            return MoebiusMap(self.d, -self.b, -self.c, self.a, prec=self.prec)

    def __matmul__(self, other: "MoebiusMap") -> "MoebiusMap":
        return compose(self, other)

    def __call__(self, z):
        return apply(self, z)

    def power(self, n: int) -> "MoebiusMap":
        base = self if n >= 0 else self.inverse()
        out = MoebiusMap.identity(self.prec)
        for _ in range(abs(n)):
            out = compose(out, base)
        return out

    def _normalized(self) -> "MoebiusMap":
        if self.prec is None:
            pivot = next(x for x in self.entries() if not _is_zero(x))
            return MoebiusMap(*(x / pivot for x in self.entries()), prec=None)
        with workprec(self.prec):
            pivot = max(self.entries(), key=cabs)
            return MoebiusMap(*(x / pivot for x in self.entries()), prec=self.prec)

    def projectively_close(self, other: "MoebiusMap", tol=None) -> bool:
        x, y = self.entries(), other.entries()
        prec = min(p for p in (self.prec, other.prec, 10**6) if p is not None)
        if self.is_exact and other.is_exact:
            return all(x[i] * y[j] == x[j] * y[i] for i in range(4) for j in range(i + 1, 4))
        with workprec(prec):
            x = [to_mpc(v, prec) for v in x]
            y = [to_mpc(v, prec) for v in y]
            sx = max(cabs(v) for v in x)
            sy = max(cabs(v) for v in y)
            worst = max(cabs(x[i] * y[j] - x[j] * y[i]) for i in range(4) for j in range(i + 1, 4))
            if tol is None:
                tol = mpfr(2) ** (-(prec - 12))
            return worst <= tol * sx * sy

    def __eq__(self, other):
        if not isinstance(other, MoebiusMap):
            return NotImplemented
        return self.projectively_close(other)

    __hash__ = None

    def __repr__(self):
        ent = ", ".join(str(to_complex(x)) for x in self.entries())
        mode = "exact" if self.is_exact else f"{self.prec} bits"
        return f"MoebiusMap({ent}; {mode})"


def compose(m1: MoebiusMap, m2: MoebiusMap) -> MoebiusMap:
    """``m1 o m2`` as a projectively normalised matrix product."""
    if m1.is_exact and m2.is_exact:
        prec = None
    else:
        prec = max(p for p in (m1.prec, m2.prec) if p is not None)
        if m1.is_exact:
            m1 = m1.to_floating(prec)
        if m2.is_exact:
            m2 = m2.to_floating(prec)
    a1, b1, c1, d1 = m1.entries()
    a2, b2, c2, d2 = m2.entries()
    with workprec(prec or 64):
        prod = MoebiusMap(
            a1 * a2 + b1 * c2, a1 * b2 + b1 * d2, c1 * a2 + d1 * c2, c1 * b2 + d1 * d2, prec=prec
        )
    return prod._normalized()


def _homogeneous(z, prec: int):
    if z is INF:
        return (to_mpc(1, prec), to_mpc(0, prec))
    return (to_mpc(z, prec), to_mpc(1, prec))


def apply(m: MoebiusMap, z):
    """Image of ``z`` (a scalar or :data:`INF`) under ``m``."""
    with workprec(m.prec or 64):
        if z is INF:
            return INF if _is_zero(m.c) else m.a / m.c
        num = m.a * z + m.b
        den = m.c * z + m.d
        if _is_zero(den):
            return INF
        return num / den


def chordal(z, w) -> float:
    """Chordal distance on the Riemann sphere (double precision)."""
    if z is INF and w is INF:
        return 0.0
    if z is INF or w is INF:
        u = to_complex(w if z is INF else z)
        return 2.0 / math.sqrt(1.0 + abs(u) ** 2)
    u, v = to_complex(z), to_complex(w)
    return 2.0 * abs(u - v) / math.sqrt((1.0 + abs(u) ** 2) * (1.0 + abs(v) ** 2))


def loxodromy_tolerance(prec: int) -> mpfr:
    return mpfr(2) ** (-(prec // 2))


def multiplier_from_trace(tr, det, prec: int) -> mpc:
    """Root ``q`` with ``|q| < 1`` of ``q + 1/q + 2 = tr^2/det``.

    The larger root of ``R^2 - (t - 2) R + 1`` is formed without cancellation
    and inverted, which keeps tiny multipliers accurate.
    """
    with workprec(prec):
        u = tr * tr / det - 2
        disc = gmpy2.sqrt(u * u - 4)
        r1 = u + disc
        r2 = u - disc
        big = r1 if cabs(r1) >= cabs(r2) else r2
        if _is_zero(big):
            raise ParabolicOrElliptic("trace relation has no loxodromic root")
        q = mpc(2) / big
        if abs(cabs(q) - 1) < loxodromy_tolerance(prec):
            raise ParabolicOrElliptic(f"|q| = {float(cabs(q))!r} is on the unit circle")
        return q


def multiplier(m: MoebiusMap) -> mpc:
    """Multiplier ``q`` of a loxodromic map, normalised to ``|q| < 1``."""
    prec = m.prec or default_precision()
    f = m if not m.is_exact else m.to_floating(prec)
    with workprec(prec):
        return multiplier_from_trace(to_mpc(f.trace(), prec), to_mpc(f.det(), prec), prec)


@dataclass(frozen=True)
class FixedPointPair:
    attractive: object
    repulsive: object


def fixed_points(m: MoebiusMap) -> FixedPointPair:
    """Attractive and repulsive fixed points, labelled by ``|m'| < 1``."""
    q = multiplier(m)  # raises for parabolic/elliptic input
    prec = m.prec or default_precision()
    f = m if not m.is_exact else m.to_floating(prec)
    a, b, c, d = f.entries()
    with workprec(prec):
        det = a * d - b * c
        if _is_zero(c):
            finite = b / (d - a)
            # z -> (a/d) z + b/d ; finite point attracts iff |a/d| < 1
            if cabs(a) < cabs(d):
                return FixedPointPair(finite, INF)
            return FixedPointPair(INF, finite)
        s = gmpy2.sqrt((a - d) * (a - d) + 4 * b * c)
        w1 = (a - d) + s
        w2 = (a - d) - s
        w = w1 if cabs(w1) >= cabs(w2) else w2
        z1 = w / (2 * c)
        z2 = -2 * b / w
        deriv1 = cabs(det / ((c * z1 + d) ** 2))
        if deriv1 < 1:
            return FixedPointPair(z1, z2)
        return FixedPointPair(z2, z1)


# ---------------------------------------------------------------------------
# circles and marked groups


@dataclass(frozen=True)
class Circle:
    """Oriented circle bounding the open disk it encloses.

    With ``outer=True`` the enclosed disk is ``|z - center| > radius`` (it
    contains infinity).
    """

    center: complex
    radius: float
    outer: bool = False

    def contains(self, z, slack: float = 0.0) -> bool:
        """Strict interior test; ``slack`` widens (positive) or shrinks the disk."""
        if z is INF:
            return self.outer
        r = abs(complex(to_complex(z)) - self.center)
        if self.outer:
            return r > self.radius - slack
        return r < self.radius + slack

    def points(self, n: int):
        return [self.center + self.radius * cmath.exp(2j * math.pi * k / n) for k in range(n)]

    def image(self, m: MoebiusMap) -> Optional["Circle"]:
        """Image circle under ``m``, or ``None`` if it degenerates to a line."""
        mf = m if not m.is_exact else m.to_floating()
        a, b, c, d = (to_complex(x) for x in mf.entries())
        pts = [self.center + self.radius * cmath.exp(1j * t) for t in (0.3, 2.4, 4.4)]
        imgs = []
        for z in pts:
            den = c * z + d
            if abs(den) < 1e-300:
                return None
            imgs.append((a * z + b) / den)
        cen, rad = _circumcircle(*imgs)
        if cen is None:
            return None
        # the preimage of infinity decides which side of the image is the disk
        if abs(c) < 1e-300 * max(abs(a), abs(d)):
            outer = self.outer
        else:
            outer = self.contains(-d / c)
        return Circle(cen, rad, outer)

    def to_json(self):
        return {"center": [repr(self.center.real), repr(self.center.imag)],
                "radius": repr(self.radius), "outer": self.outer}


def _circumcircle(z1: complex, z2: complex, z3: complex):
    d = 2 * (z1.real * (z2.imag - z3.imag) + z2.real * (z3.imag - z1.imag) + z3.real * (z1.imag - z2.imag))
    if abs(d) < 1e-300:
        return None, None
    n1, n2, n3 = abs(z1) ** 2, abs(z2) ** 2, abs(z3) ** 2
    ux = (n1 * (z2.imag - z3.imag) + n2 * (z3.imag - z1.imag) + n3 * (z1.imag - z2.imag)) / d
    uy = (n1 * (z3.real - z2.real) + n2 * (z1.real - z3.real) + n3 * (z2.real - z1.real)) / d
    cen = complex(ux, uy)
    return cen, abs(z1 - cen)


def circle_gap(c1: Circle, c2: Circle) -> float:
    """Signed separation of two closed disks (positive when disjoint)."""
    dist = abs(c1.center - c2.center)
    if c1.outer and c2.outer:
        return -math.inf
    if c1.outer or c2.outer:
        inner, outer = (c2, c1) if c1.outer else (c1, c2)
        return outer.radius - dist - inner.radius
    return dist - c1.radius - c2.radius


@dataclass(frozen=True, eq=False)
class MarkedSchottkyGroup:
    """Marked generators plus optional fundamental-domain circles.

    ``circles`` is ordered ``(C_1, C_-1, C_2, C_-2, ...)``; generator ``i``
    maps the exterior of ``C_i`` onto the interior of ``C_-i``.
    """

    generators: tuple
    circles: Optional[tuple] = None
    precision: int = field(default_factory=default_precision)
    name: str = ""

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise InvalidInput("a Schottky group needs at least one generator")
        object.__setattr__(self, "generators", gens)
        if self.circles is not None:
            if len(self.circles) != 2 * len(gens):
                raise InvalidInput(f"expected {2 * len(gens)} circles, got {len(self.circles)}")
            object.__setattr__(self, "circles", tuple(self.circles))
        if self.precision < 64:
            raise InvalidInput("precision must be at least 64 bits")

    @property
    def rank(self) -> int:
        return len(self.generators)

    @cached_property
    def floating_generators(self) -> tuple:
        return tuple(g.to_floating(self.precision) for g in self.generators)

    @cached_property
    def _letters(self) -> dict:
        out = {}
        for i, g in enumerate(self.floating_generators, start=1):
            out[i] = g
            out[-i] = g.inverse()._normalized()
        return out

    def letter(self, l: int) -> MoebiusMap:
        return self._letters[l]

    def circle(self, l: int) -> Circle:
        if self.circles is None:
            raise NotClassicalSchottky("group has no circles")
        i = abs(l)
        return self.circles[2 * (i - 1) + (0 if l > 0 else 1)]

    def generator_multipliers(self) -> list:
        return [multiplier(g) for g in self.floating_generators]

    def with_circles(self, circles) -> "MarkedSchottkyGroup":
        return MarkedSchottkyGroup(self.generators, circles, self.precision, self.name)

    def conjugate(self, p: MoebiusMap) -> "MarkedSchottkyGroup":
        """The group ``p G p^-1`` with circles transported when possible."""
        pinv = p.inverse()
        gens = tuple(compose(compose(p, g), pinv) for g in self.floating_generators)
        circles = None
        if self.circles is not None:
            imgs = [c.image(p) for c in self.circles]
            circles = None if any(c is None for c in imgs) else tuple(imgs)
        return MarkedSchottkyGroup(gens, circles, self.precision, self.name)


def _three_point_map(p1, p2, p3, prec: int) -> MoebiusMap:
    """Map sending p1 -> 0, p2 -> infinity, p3 -> 1 (points may be INF)."""
    with workprec(prec):
        h1, h2, h3 = (_homogeneous(p, prec) for p in (p1, p2, p3))

        def cross(u, v):
            return u[0] * v[1] - u[1] * v[0]

        k1 = cross(h3, h2)
        k2 = cross(h3, h1)
        if _is_zero(k1) or _is_zero(k2) or _is_zero(cross(h1, h2)):
            raise DegenerateMarking("normalising points coincide")
        return MoebiusMap.floating(k1 * h1[1], -k1 * h1[0], k2 * h2[1], -k2 * h2[0], prec=prec)


def normalize_marking(group: MarkedSchottkyGroup) -> MarkedSchottkyGroup:
    """Conjugate so that gamma_1 fixes 0 (attracting) and infinity, and gamma_2 attracts to 1."""
    if group.rank < 2:
        raise DegenerateMarking("normalisation needs rank >= 2")
    prec = group.precision
    fp1 = fixed_points(group.floating_generators[0])
    fp2 = fixed_points(group.floating_generators[1])
    for p in (fp1.attractive, fp1.repulsive):
        if chordal(p, fp2.attractive) < 2.0 ** (-(prec // 2)):
            raise DegenerateMarking("attractive point of gamma_2 coincides with a fixed point of gamma_1")
    p = _three_point_map(fp1.attractive, fp1.repulsive, fp2.attractive, prec)
    return group.conjugate(p)


def is_normalized(group: MarkedSchottkyGroup, tol: float = 1e-20) -> bool:
    if group.rank < 2:
        return False
    fp1 = fixed_points(group.floating_generators[0])
    fp2 = fixed_points(group.floating_generators[1])
    return (
        chordal(fp1.attractive, 0) < tol
        and chordal(fp1.repulsive, INF) < tol
        and chordal(fp2.attractive, 1) < tol
    )


# ---------------------------------------------------------------------------
# fundamental-domain certificates


@dataclass(frozen=True)
class SchottkyCertificate:
    circles: tuple
    margin: float
    boundary_error: float
    isometric: bool


def isometric_circles(group: MarkedSchottkyGroup) -> tuple:
    """Isometric circles ``|c z + d| = sqrt(det)`` of each generator and its inverse."""
    out = []
    for g in group.floating_generators:
        a, b, c, d = (to_complex(x) for x in g.entries())
        det = a * d - b * c
        s = cmath.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
        if abs(c) < 1e-300:
            raise NotClassicalSchottky("generator fixes infinity; it has no isometric circle")
        r = 1.0 / abs(c)
        out.append(Circle(-d / c, r))
        out.append(Circle(a / c, r))
    return tuple(out)


def validate_schottky(group: MarkedSchottkyGroup, samples: int = 64, tol: float = 1e-9) -> SchottkyCertificate:
    """Check that the circles bound a Schottky fundamental domain.

    Uses the group's circles when present, otherwise its isometric circles.
    A failed check does not prove the group is not Schottky.
    """
    isometric = group.circles is None
    circles = isometric_circles(group) if isometric else group.circles
    margin = math.inf
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            margin = min(margin, circle_gap(circles[i], circles[j]))
    if not margin > 0:
        raise NotClassicalSchottky(f"circles overlap (margin {margin:.3g})")
    worst = 0.0
    for i, g in enumerate(group.floating_generators, start=1):
        src, dst = circles[2 * (i - 1)], circles[2 * (i - 1) + 1]
        a, b, c, d = (to_complex(x) for x in g.entries())
        for z in src.points(samples):
            w = (a * z + b) / (c * z + d)
            err = abs(abs(w - dst.center) - dst.radius) / max(dst.radius, 1.0)
            worst = max(worst, err)
            # a point just outside the source disk must land inside the target disk
            step = (z - src.center) / abs(z - src.center) * src.radius * 1e-3
            zout = z - step if src.outer else z + step
            wout = (a * zout + b) / (c * zout + d) if abs(c * zout + d) > 0 else INF
            if not dst.contains(wout):
                raise NotClassicalSchottky(f"generator {i} does not map the exterior of C_{i} into C_-{i}")
        if worst > tol:
            raise NotClassicalSchottky(f"generator {i} does not map C_{i} onto C_-{i} (error {worst:.3g})")
    return SchottkyCertificate(tuple(circles), margin, worst, isometric)


def certified(group: MarkedSchottkyGroup) -> MarkedSchottkyGroup:
    """The group with certified circles attached (isometric ones if needed)."""
    cert = validate_schottky(group)
    return group.with_circles(cert.circles)
