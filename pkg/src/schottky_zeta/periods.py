"""Normalized holomorphic differentials as Poincare series, and the period matrix.

Evaluation is in double precision with numpy: the series terms are simple
poles at images of the generator fixed points, which lie inside nested disks
whose radii shrink geometrically.  A subtree is dropped once the isometric
radius of its word makes every further term negligible.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CertificateRequired, InvalidParameter, NotClassicalSchottky, PathCrossesCircle
from .moebius import Circle, MarkedSchottkyGroup, fixed_points, validate_schottky
from .numbers import INF, to_complex

TWO_PI_I = 2j * math.pi
DEFAULT_NODES = 2048
DEFAULT_PRUNE = 1e-15


# ---------------------------------------------------------------------------
# word trees in double precision


def unimodular_letters(group: MarkedSchottkyGroup) -> dict:
    """Letter matrices as complex 2x2 arrays with determinant 1."""
    out = {}
    for i, g in enumerate(group.floating_generators, start=1):
        m = np.array([[to_complex(g.a), to_complex(g.b)], [to_complex(g.c), to_complex(g.d)]])
        m = m / cmath.sqrt(np.linalg.det(m))
        out[i] = m
        out[-i] = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
    return out


def reduced_words(group: MarkedSchottkyGroup, max_len: int, weight: Callable, prune: float):
    """Reduced words with their matrices, depth first with pruning.

    ``weight(matrix)`` bounds the size of every term in the subtree; the
    subtree is skipped once it drops below ``prune``.  The identity comes
    first, then words in prefix-tree order of the letter sequence
    ``1, -1, 2, -2, ...``.
    """
    letters = unimodular_letters(group)
    order = [l for i in range(1, group.rank + 1) for l in (i, -i)]
    out = [((), np.eye(2, dtype=complex))]

    def walk(word, m):
        if len(word) >= max_len:
            return
        for l in order:
            if word and l == -word[-1]:
                continue
            mm = m @ letters[l]
            if weight(mm) < prune:
                continue
            w = word + (l,)
            out.append((w, mm))
            walk(w, mm)

    walk((), np.eye(2, dtype=complex))
    return out


def isometric_radius(m: np.ndarray) -> float:
    c = abs(m[1, 0])
    return math.inf if c == 0 else 1.0 / c


def _apply(m: np.ndarray, z: complex) -> complex:
    if z is INF or (isinstance(z, complex) and cmath.isinf(z)):
        return m[0, 0] / m[1, 0] if m[1, 0] != 0 else complex("inf")
    den = m[1, 0] * z + m[1, 1]
    if den == 0:
        return complex("inf")
    return (m[0, 0] * z + m[0, 1]) / den


# ---------------------------------------------------------------------------
# pole clouds


@dataclass(frozen=True)
class PoleCloud:
    """The rational function ``sum_k R_k / (z - P_k)``."""

    poles: np.ndarray
    residues: np.ndarray

    def __call__(self, z, block: int = 2048):
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        out = np.zeros(flat.shape, dtype=complex)
        for s in range(0, len(self.poles), block):
            P = self.poles[s:s + block]
            R = self.residues[s:s + block]
            out += (R[None, :] / (flat[:, None] - P[None, :])).sum(axis=1)
        return out.reshape(z.shape)

    def increment(self, u: complex, v: complex) -> complex:
        """Exact ``int_u^v`` along the straight segment (no pole on it)."""
        ratio = (v - self.poles) / (u - self.poles)
        return complex(np.sum(self.residues * np.log(ratio)))

    def residue_sum_inside(self, circle: Circle) -> complex:
        inside = np.array([circle.contains(complex(p)) for p in self.poles], dtype=bool)
        return complex(self.residues[inside].sum())

    def nearest(self, z: complex) -> float:
        return float(np.min(np.abs(self.poles - z))) if len(self.poles) else math.inf


# ---------------------------------------------------------------------------
# contour integrals


def boundary_sign(circle: Circle) -> int:
    """Orientation of ``circle`` as part of the fundamental-domain boundary.

    The domain lies outside an ordinary circle, so the boundary runs
    clockwise; for an outer circle (the domain is inside) it runs
    counterclockwise.
    """
    return 1 if circle.outer else -1


def contour_integral(f, circle: Circle, nodes: int = DEFAULT_NODES, orientation: str = "boundary") -> complex:
    """Trapezoidal rule for ``oint f(z) dz`` over ``circle``.

    ``orientation`` is ``"boundary"`` (as part of the fundamental-domain
    boundary), ``"ccw"`` or ``"cw"``.
    """
    if nodes < 4:
        raise InvalidParameter("need at least 4 nodes")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    rim = circle.radius * np.exp(1j * theta)
    z = circle.center + rim
    vals = np.asarray(f(z), dtype=complex)
    total = np.sum(vals * 1j * rim) * (2 * np.pi / nodes)
    sign = {"ccw": 1, "cw": -1, "boundary": boundary_sign(circle)}[orientation]
    return complex(sign * total)


# ---------------------------------------------------------------------------
# normalized differentials


def _circles(group: MarkedSchottkyGroup) -> tuple:
    if group.circles is not None:
        return group.circles
    try:
        return validate_schottky(group).circles
    except NotClassicalSchottky as exc:
        raise CertificateRequired(f"no fundamental-domain circles: {exc}") from exc


@dataclass(frozen=True)
class DifferentialEvaluator:
    """``omega_i = sum_phi 1/(z - phi(a_i)) - 1/(z - phi(b_i))`` over cosets of ``<gamma_i>``.

    ``a_i``/``b_i`` are the attractive/repulsive fixed points of ``gamma_i``.
    Coset representatives are reduced words not ending in ``±i``.
    """

    group: MarkedSchottkyGroup = field(repr=False)
    index: int
    max_len: int
    representatives: tuple = field(repr=False)
    cloud: PoleCloud = field(repr=False)
    circles: tuple = field(repr=False)

    def __call__(self, z):
        return self.cloud(z)

    def shell(self, length: int) -> PoleCloud:
        idx = [2 * k + j for k, w in enumerate(self.representatives) if len(w) == length for j in (0, 1)]
        return PoleCloud(self.cloud.poles[idx], self.cloud.residues[idx])

    def truncated(self, max_len: int) -> "DifferentialEvaluator":
        keep = [k for k, w in enumerate(self.representatives) if len(w) <= max_len]
        idx = [2 * k + j for k in keep for j in (0, 1)]
        reps = tuple(self.representatives[k] for k in keep)
        cloud = PoleCloud(self.cloud.poles[idx], self.cloud.residues[idx])
        return DifferentialEvaluator(self.group, self.index, max_len, reps, cloud, self.circles)

    @property
    def terms(self) -> int:
        return len(self.representatives)


def omega(group: MarkedSchottkyGroup, i: int, max_len: int, prune: float = DEFAULT_PRUNE) -> DifferentialEvaluator:
    """Poincare-series evaluator for the ``i``-th normalized differential."""
    if not 1 <= i <= group.rank:
        raise InvalidParameter(f"index {i} outside rank {group.rank}")
    if max_len < 0:
        raise InvalidParameter("max_len must be >= 0")
    circles = _circles(group)
    fp = fixed_points(group.floating_generators[i - 1])
    a, b = to_complex(fp.attractive), to_complex(fp.repulsive)
    scale = max(1.0, max(abs(c.center) + c.radius for c in circles if not c.outer))

    def weight(m):
        r = isometric_radius(m)
        return (r / scale) ** 2

    poles, res, reps = [], [], []
    for w, m in reduced_words(group, max_len, weight, prune):
        if w and abs(w[-1]) == i:
            continue
        pa, pb = _apply(m, a), _apply(m, b)
        reps.append(w)
        # a pole at infinity contributes nothing; keep the slot with zero weight
        for p, r in ((pa, 1.0), (pb, -1.0)):
            if cmath.isinf(p):
                poles.append(0j)
                res.append(0.0)
            else:
                poles.append(p)
                res.append(r)
    cloud = PoleCloud(np.array(poles, dtype=complex), np.array(res, dtype=complex))
    return DifferentialEvaluator(group, i, max_len, tuple(reps), cloud, tuple(circles))


def circle_for(circles: Sequence[Circle], l: int) -> Circle:
    return circles[2 * (abs(l) - 1) + (0 if l > 0 else 1)]


@dataclass(frozen=True)
class NormalizationReport:
    matrix: np.ndarray
    max_deviation: float
    exact_matrix: np.ndarray


def check_normalization(group: MarkedSchottkyGroup, max_len: int, nodes: int = DEFAULT_NODES,
                        prune: float = DEFAULT_PRUNE) -> NormalizationReport:
    """``M_ij = (1/2 pi i) oint_{C_j} omega_i`` with boundary orientation.

    ``exact_matrix`` uses residue counting instead of quadrature.
    """
    g = group.rank
    M = np.zeros((g, g), dtype=complex)
    E = np.zeros((g, g), dtype=complex)
    for i in range(1, g + 1):
        om = omega(group, i, max_len, prune)
        for j in range(1, g + 1):
            c = circle_for(om.circles, j)
            M[i - 1, j - 1] = contour_integral(om, c, nodes) / TWO_PI_I
            E[i - 1, j - 1] = boundary_sign(c) * om.cloud.residue_sum_inside(c)
    dev = float(np.max(np.abs(M - np.eye(g))))
    return NormalizationReport(M, dev, E)


# ---------------------------------------------------------------------------
# period matrix


def _segment_clear(u: complex, v: complex, circles: Sequence[Circle], slack: float = 1e-9) -> bool:
    """True when the open segment ``(u, v)`` stays outside every disk."""
    for c in circles:
        d = v - u
        L2 = (d * d.conjugate()).real
        if L2 == 0:
            continue
        if c.outer:
            # the domain is the inside; both endpoints inside implies the segment is
            if abs(u - c.center) > c.radius * (1 + slack) or abs(v - c.center) > c.radius * (1 + slack):
                return False
            continue
        t = ((c.center - u) * d.conjugate()).real / L2
        t = min(max(t, 0.0), 1.0)
        nearest = u + t * d
        dist = abs(nearest - c.center)
        if dist < c.radius * (1 - slack):
            return False
    return True


def _polyline_clear(pts, circles) -> bool:
    return all(_segment_clear(pts[k], pts[k + 1], circles) for k in range(len(pts) - 1))


def _cross(p: complex, q: complex, r: complex) -> float:
    return ((q - p).conjugate() * (r - p)).imag


def _segments_cross(u1: complex, v1: complex, u2: complex, v2: complex) -> bool:
    d1, d2 = _cross(u2, v2, u1), _cross(u2, v2, v1)
    d3, d4 = _cross(u1, v1, u2), _cross(u1, v1, v2)
    return d1 * d2 <= 0 and d3 * d4 <= 0


def _polylines_cross(p1, p2) -> bool:
    return any(_segments_cross(p1[a], p1[a + 1], p2[b], p2[b + 1])
               for a in range(len(p1) - 1) for b in range(len(p2) - 1))


def default_waypoints(circles: Sequence[Circle]) -> list:
    reach = max((abs(cc.center) + cc.radius for cc in circles if not cc.outer), default=1.0)
    pts = [0j]
    for r in (0.5, 1.2, 2.0):
        pts.extend(reach * r * cmath.exp(2j * math.pi * (k + 0.5 * (r > 1)) / 16) for k in range(16))
    return pts


def _path_candidates(group, j, circles, angles, waypoints):
    """Admissible polylines for ``beta_j``, by waypoint count and then length."""
    g = group.floating_generators[j - 1]
    a, b, c, d = (to_complex(x) for x in g.entries())
    src, dst = circle_for(circles, j), circle_for(circles, -j)

    # nudge endpoints off the circles into the domain so the segment test is strict
    def inward(z, circ):
        u = (z - circ.center) / abs(z - circ.center)
        return z - u * circ.radius * 1e-12 if circ.outer else z + u * circ.radius * 1e-12

    ends = []
    for k in range(angles):
        z0 = src.center + src.radius * cmath.exp(2j * math.pi * (k + 0.5) / angles)
        z1 = (a * z0 + b) / (c * z0 + d)
        ends.append((z0, z1, inward(z0, src), inward(z1, dst)))
    free = [w for w in waypoints if not any(cc.contains(w) for cc in circles)]

    def length(pts):
        return sum(abs(pts[k + 1] - pts[k]) for k in range(len(pts) - 1))

    for n_way in range(3):
        if n_way == 0:
            mids, base = [()], ends
        elif n_way == 1:
            mids, base = [(w,) for w in free], ends
        else:
            mids = [(w, x) for w in free for x in free if w != x]
            base = ends[:: max(1, angles // 8)]
        cands = []
        for z0, z1, s0, s1 in base:
            for m in mids:
                if _polyline_clear([s0, *m, s1], circles):
                    pts = [z0, *m, z1]
                    cands.append((length(pts), pts))
        cands.sort(key=lambda t: t[0])
        yield from (pts for _, pts in cands)


def beta_path(group: MarkedSchottkyGroup, j: int, circles: Sequence[Circle], angles: int = 32,
              waypoints: Optional[Sequence[complex]] = None) -> list:
    """Shortest polyline from ``z0`` on ``C_j`` to ``gamma_j(z0)`` on ``C_-j`` inside the domain."""
    wp = default_waypoints(circles) if waypoints is None else waypoints
    for pts in _path_candidates(group, j, circles, angles, wp):
        return pts
    raise PathCrossesCircle(f"no path from C_{j} to C_-{j} avoids the other circles")


def beta_paths(group: MarkedSchottkyGroup, circles: Sequence[Circle], angles: int = 32,
               waypoints: Optional[Sequence[complex]] = None) -> list:
    """Pairwise disjoint ``beta`` polylines, one per generator.

    Disjoint paths give a canonical homology basis; crossing paths shift
    some periods by integers and break the symmetry of ``tau``.
    """
    wp = default_waypoints(circles) if waypoints is None else waypoints
    chosen = []
    for j in range(1, group.rank + 1):
        for pts in _path_candidates(group, j, circles, angles, wp):
            if not any(_polylines_cross(pts, q) for q in chosen):
                chosen.append(pts)
                break
        else:
            raise PathCrossesCircle(f"no path for beta_{j} avoids the circles and the earlier paths")
    return chosen


@dataclass(frozen=True)
class PeriodMatrix:
    tau: np.ndarray
    raw: np.ndarray
    asymmetry: float
    normalization_error: float
    max_len: int
    nodes: int
    paths: tuple = field(repr=False, default=())

    def im_eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.tau.imag)

    @property
    def im_positive_definite(self) -> bool:
        return bool(np.all(self.im_eigenvalues() > 0))


def period_matrix(group: MarkedSchottkyGroup, max_len: int, nodes: int = DEFAULT_NODES,
                  prune: float = DEFAULT_PRUNE) -> PeriodMatrix:
    """``tau_ij = (1/2 pi i) int_{z0}^{gamma_j z0} omega_i`` along paths in the domain.

    Integrals along straight segments use the exact logarithmic
    antiderivative of each pole term.  The returned ``tau`` is symmetrised;
    ``raw`` and ``asymmetry`` keep the unsymmetrised data.
    """
    g = group.rank
    oms = [omega(group, i, max_len, prune) for i in range(1, g + 1)]
    circles = oms[0].circles
    paths = beta_paths(group, circles)
    raw = np.zeros((g, g), dtype=complex)
    for i, om in enumerate(oms):
        for j, path in enumerate(paths):
            total = sum(om.cloud.increment(path[k], path[k + 1]) for k in range(len(path) - 1))
            raw[i, j] = total / TWO_PI_I
    asym = float(np.max(np.abs(raw - raw.T))) if g > 1 else 0.0
    tau = (raw + raw.T) / 2
    norm = check_normalization(group, max_len, nodes, prune) if nodes else None
    return PeriodMatrix(tau, raw, asym, norm.max_deviation if norm else float("nan"), max_len, nodes, tuple(map(tuple, paths)))
