"""Eichler cocycles, Poincare series of weight 2k, and the duality pairing.

Polynomials are numpy coefficient vectors ordered by increasing degree.
The right action of a unimodular matrix ``m = [[a, b], [c, d]]`` on a
polynomial of degree at most ``2k - 2`` is

    (f . m)(z) = f(m z) (c z + d)^(2k - 2),

and cocycles extend from the generators by ``xi(gh) = xi(g) . h + xi(h)``.

Pairings are computed on the normalized conjugate of the group (the first
generator fixes 0 and infinity, the second attracts to 1), which is where
the standard cocycles form a basis of the cohomology.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import InvalidParameter, PoleInDomain, RankDeficientSeeds
from .moebius import MarkedSchottkyGroup, fixed_points, is_normalized, normalize_marking
from .numbers import to_complex
from .periods import (DEFAULT_NODES, TWO_PI_I, _circles, circle_for, contour_integral,
                      reduced_words, unimodular_letters)

DEFAULT_PRUNE = 1e-15
DEFAULT_MAX_LEN = 8


# ---------------------------------------------------------------------------
# polynomial action and cocycles


def act(f: np.ndarray, m: np.ndarray, k: int) -> np.ndarray:
    """``f(m z) (c z + d)^(2k-2)`` for a unimodular ``m``."""
    n = 2 * k - 2
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    num = np.array([b, a], dtype=complex)
    den = np.array([d, c], dtype=complex)
    out = np.zeros(n + 1, dtype=complex)
    for j, fj in enumerate(f):
        if fj == 0:
            continue
        term = P.polymul(P.polypow(num, j), P.polypow(den, n - j)) if j < n else P.polypow(num, j)
        out[: len(term)] += fj * term
    return out


@dataclass(frozen=True)
class Cocycle:
    """A crossed homomorphism given by its values on the generators."""

    k: int
    values: tuple
    label: str = ""

    def __post_init__(self):
        n = 2 * self.k - 1
        vals = []
        for v in self.values:
            v = np.asarray(v, dtype=complex)
            if v.ndim != 1 or len(v) > n:
                raise InvalidParameter(f"cocycle values must have degree <= {n - 1}")
            vals.append(np.pad(v, (0, n - len(v))))
        object.__setattr__(self, "values", tuple(vals))

    @property
    def rank(self) -> int:
        return len(self.values)

    def letter_value(self, l: int, letters: dict) -> np.ndarray:
        v = self.values[abs(l) - 1]
        if l > 0:
            return v
        # 0 = xi(g g^-1) = xi(g) . g^-1 + xi(g^-1)
        return -act(v, letters[l], self.k)

    def evaluate(self, word: Sequence[int], letters: dict) -> np.ndarray:
        """``xi`` on the product of the letters of ``word``, built from the right."""
        val = np.zeros(2 * self.k - 1, dtype=complex)
        m = np.eye(2, dtype=complex)
        for l in reversed(tuple(word)):
            val = act(self.letter_value(l, letters), m, self.k) + val
            m = letters[l] @ m
        return val

    def __add__(self, other: "Cocycle") -> "Cocycle":
        return Cocycle(self.k, tuple(u + v for u, v in zip(self.values, other.values)))

    def __mul__(self, s) -> "Cocycle":
        return Cocycle(self.k, tuple(s * v for v in self.values), self.label)

    __rmul__ = __mul__


def standard_cocycles(group: MarkedSchottkyGroup, k: int) -> list:
    """``xi_{1,k-1}``, ``xi_{2,1..2k-2}`` and ``xi_{i,0..2k-2}`` for ``i >= 3``.

    ``xi_{i,j}`` is ``(z-1)^j`` on the second generator when ``i = 2`` and
    ``z^j`` on generator ``i`` otherwise, zero on the other generators.
    """
    g = group.rank
    if g < 2 or k < 2:
        raise InvalidParameter("standard cocycles need rank >= 2 and k >= 2")
    n = 2 * k - 1
    zero = np.zeros(n, dtype=complex)

    def on(i, poly, label):
        vals = [zero] * g
        vals[i - 1] = poly
        return Cocycle(k, tuple(vals), label)

    out = [on(1, np.eye(n)[k - 1], f"xi_1,{k - 1}")]
    for j in range(1, 2 * k - 1):
        out.append(on(2, P.polypow(np.array([-1.0, 1.0]), j), f"xi_2,{j}"))
    for i in range(3, g + 1):
        for j in range(0, 2 * k - 1):
            out.append(on(i, np.eye(n)[j], f"xi_{i},{j}"))
    return out


def coboundary(group: MarkedSchottkyGroup, k: int, v) -> Cocycle:
    """``(delta v)(gamma) = v . gamma - v``."""
    letters = unimodular_letters(group)
    v = np.pad(np.asarray(v, dtype=complex), (0, 2 * k - 1 - len(v)))
    return Cocycle(k, tuple(act(v, letters[i], k) - v for i in range(1, group.rank + 1)), "coboundary")


# ---------------------------------------------------------------------------
# k-differentials


@dataclass(frozen=True)
class KDifferential:
    """``psi(z) = sum_t w_t prod_m 1/(alpha_tm z + beta_tm)``.

    For a seed ``f(z) = prod_m (z - p_m)^-1`` and a unimodular group element
    ``[[a, b], [c, d]]`` the weight-2k term ``f(g z) g'(z)^k`` equals
    ``prod_m 1/((a - p_m c) z + (b - p_m d))``; each row of the arrays holds
    one such term.  Linear combinations concatenate rows.
    """

    group: MarkedSchottkyGroup
    k: int
    alpha: np.ndarray
    beta: np.ndarray
    weights: np.ndarray
    lengths: np.ndarray
    max_len: int
    poles: tuple = field(default=())

    def __call__(self, z, max_len: Optional[int] = None):
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        # keep the (points x terms x poles) work array near a few megabytes
        block = max(1, (1 << 18) // max(1, len(flat) * 2 * self.k))
        keep = slice(None) if max_len is None else self.lengths <= max_len
        A, B, W = self.alpha[keep], self.beta[keep], self.weights[keep]
        out = np.zeros(flat.shape, dtype=complex)
        for s in range(0, len(W), block):
            a, b, w = A[s:s + block], B[s:s + block], W[s:s + block]
            lin = a[None, :, :] * flat[:, None, None] + b[None, :, :]
            out += (w[None, :] / np.prod(lin, axis=2)).sum(axis=1)
        return out.reshape(z.shape)

    def __mul__(self, s) -> "KDifferential":
        return KDifferential(self.group, self.k, self.alpha, self.beta, self.weights * s,
                             self.lengths, self.max_len, self.poles)

    __rmul__ = __mul__

    def __add__(self, other: "KDifferential") -> "KDifferential":
        if other.k != self.k:
            raise InvalidParameter("cannot add differentials of different weight")
        return KDifferential(self.group, self.k, np.concatenate([self.alpha, other.alpha]),
                             np.concatenate([self.beta, other.beta]),
                             np.concatenate([self.weights, other.weights]),
                             np.concatenate([self.lengths, other.lengths]),
                             min(self.max_len, other.max_len), ())

    @property
    def terms(self) -> int:
        return len(self.weights)

    def automorphy_residual(self, points: Optional[Sequence[complex]] = None) -> float:
        """``max |psi(g z) g'(z)^k - psi(z)|`` over generators and sample points."""
        circles = _circles(self.group)
        if points is None:
            points = _domain_samples(circles)
        z = np.asarray(points, dtype=complex)
        base = self(z)
        worst = 0.0
        for i, m in unimodular_letters(self.group).items():
            if i < 0:
                continue
            a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
            den = c * z + d
            moved = self((a * z + b) / den) / den ** (2 * self.k)
            worst = max(worst, float(np.max(np.abs(moved - base))))
        return worst


def _domain_samples(circles, per_circle: int = 8, push: float = 0.05) -> list:
    """Points just inside the fundamental domain near each boundary circle."""
    pts = []
    for c in circles:
        r = c.radius * (1 - push) if c.outer else c.radius * (1 + push)
        pts.extend(c.center + r * np.exp(2j * np.pi * (np.arange(per_circle) + 0.25) / per_circle))
    return [p for p in pts if not any(cc.contains(p) for cc in circles)]


def _pole_orbit_leaves_domain(p: complex, group: MarkedSchottkyGroup, circles, depth: int) -> bool:
    """Pull ``p`` back through the disks it lies in; False if it reaches the domain."""
    letters = unimodular_letters(group)
    z = complex(p)
    for _ in range(depth):
        hit = None
        for i in range(1, group.rank + 1):
            for l in (i, -i):
                if circle_for(circles, l).contains(z):
                    hit = l
        if hit is None:
            return False
        # the disk of C_l is the image of the domain side under the letter -l
        m = letters[hit]
        z = (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])
        if not np.isfinite(z):
            return True
    return True


def poincare_kdiff(group: MarkedSchottkyGroup, k: int, poles: Sequence[complex],
                   max_len: int = DEFAULT_MAX_LEN, prune: float = DEFAULT_PRUNE,
                   check_depth: int = 4) -> KDifferential:
    """Weight-2k Poincare series of ``prod_m (z - p_m)^-1`` over ``2k`` poles.

    The poles must lie in the limit set (fixed points of group elements are
    the usual choice) so that the whole orbit avoids the domain; a pole
    whose orbit reaches the domain raises ``PoleInDomain``.
    """
    if group.rank < 2:
        raise InvalidParameter("k-differentials are spanned this way only for rank >= 2")
    if k < 2:
        raise InvalidParameter("k must be >= 2")
    if max_len < 0:
        raise InvalidParameter("max_len must be >= 0")
    poles = tuple(complex(p) for p in poles)
    if len(poles) != 2 * k:
        raise InvalidParameter(f"need exactly {2 * k} poles for weight {2 * k}")
    if len(set(poles)) != len(poles) or not all(np.isfinite(p) for p in poles):
        raise InvalidParameter("poles must be distinct finite points")
    circles = _circles(group)
    for p in poles:
        if not _pole_orbit_leaves_domain(p, group, circles, check_depth):
            raise PoleInDomain(f"the orbit of the pole {p} meets the fundamental domain")
    pv = np.array(poles)
    ref = np.array(_domain_samples(circles, per_circle=6, push=0.0))

    def term_rows(m):
        return m[0, 0] - pv * m[1, 0], m[0, 1] - pv * m[1, 1]

    def size(m):
        a, b = term_rows(m)
        return float(np.max(np.abs(1.0 / np.prod(a[None, :] * ref[:, None] + b[None, :], axis=1))))

    scale = size(np.eye(2, dtype=complex))
    words = reduced_words(group, max_len, lambda m: size(m) / scale, prune)
    alpha = np.empty((len(words), 2 * k), dtype=complex)
    beta = np.empty_like(alpha)
    for t, (_, m) in enumerate(words):
        alpha[t], beta[t] = term_rows(m)
    lengths = np.array([len(w) for w, _ in words])
    return KDifferential(group, k, alpha, beta, np.ones(len(words), dtype=complex), lengths, max_len, poles)


# ---------------------------------------------------------------------------
# pairing and the normalized basis


def pairing(group: MarkedSchottkyGroup, k: int, psi: KDifferential, xi: Cocycle,
            nodes: int = DEFAULT_NODES) -> complex:
    """``(1/2 pi i) sum_i oint_{C_i} psi xi(gamma_i) dz`` with boundary orientation."""
    if xi.k != k or psi.k != k:
        raise InvalidParameter("weights of the differential and the cocycle differ")
    circles = _circles(group)
    total = 0j
    for i in range(1, group.rank + 1):
        poly = xi.values[i - 1]
        if not np.any(poly):
            continue
        total += contour_integral(lambda z, p=poly: psi(z) * P.polyval(z, p), circle_for(circles, i), nodes)
    return total / TWO_PI_I


def pairing_matrix(group, k, psis, xis, nodes: int = DEFAULT_NODES) -> np.ndarray:
    """All pairings at once, sharing one evaluation of each ``psi`` per circle."""
    circles = _circles(group)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    out = np.zeros((len(psis), len(xis)), dtype=complex)
    for i in range(1, group.rank + 1):
        c = circle_for(circles, i)
        rim = c.radius * np.exp(1j * theta)
        z = c.center + rim
        dz = (1 if c.outer else -1) * 1j * rim * (2 * np.pi / nodes)
        polys = np.array([P.polyval(z, xi.values[i - 1]) for xi in xis])
        for s, psi in enumerate(psis):
            out[s] += polys @ (psi(z) * dz)
    return out / TWO_PI_I


def eichler_frame(group: MarkedSchottkyGroup) -> MarkedSchottkyGroup:
    """The normalized conjugate of ``group`` carrying transported circles."""
    if group.circles is None:
        group = group.with_circles(_circles(group))
    return group if is_normalized(group) else normalize_marking(group)


def default_pole_sets(group: MarkedSchottkyGroup, k: int, count: int, word_len: int = 2) -> list:
    """Distinct ``2k``-subsets of finite fixed points of short words."""
    letters = unimodular_letters(group)
    pts = []
    order = [l for i in range(1, group.rank + 1) for l in (i, -i)]
    for n in range(1, word_len + 1):
        for w in itertools.product(order, repeat=n):
            if any(w[t] == -w[t + 1] for t in range(n - 1)) or w[0] < 0:
                continue
            m = np.eye(2, dtype=complex)
            for l in w:
                m = m @ letters[l]
            a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
            if abs(c) < 1e-300:
                cands = [b / (d - a)] if abs(d - a) > 1e-300 else []
            else:
                disc = np.sqrt((a + d) ** 2 - 4 + 0j)
                cands = [(a - d + disc) / (2 * c), (a - d - disc) / (2 * c)]
            for p in cands:
                if np.isfinite(p) and all(abs(p - q) > 1e-9 * (1 + abs(p)) for q in pts):
                    pts.append(complex(p))
    sets = list(itertools.islice(itertools.combinations(pts, 2 * k), count))
    if len(sets) < count:
        raise RankDeficientSeeds(f"only {len(sets)} pole sets available; use longer words")
    return sets


@dataclass(frozen=True)
class NormalizedBasis:
    basis: tuple
    cocycles: tuple
    gram: np.ndarray
    gram_residual: float
    seed_gram: np.ndarray
    condition: float
    rank: int
    frame: MarkedSchottkyGroup = field(repr=False, default=None)

    @property
    def dims(self) -> int:
        return len(self.basis)


def normalized_basis(group: MarkedSchottkyGroup, k: int, seeds: Optional[Sequence] = None,
                     max_len: int = DEFAULT_MAX_LEN, nodes: int = DEFAULT_NODES,
                     extra_seeds: int = 3) -> NormalizedBasis:
    """Combinations of seed series dual to the standard cocycles.

    ``seeds`` are pole tuples (or prebuilt ``KDifferential`` objects on the
    normalized frame).  The Gram matrix of the result is recomputed with
    twice the quadrature nodes, so ``gram_residual`` is an independent check
    and not the identity by construction.
    """
    frame = eichler_frame(group)
    xis = standard_cocycles(frame, k)
    dim = len(xis)
    if seeds is None:
        seeds = default_pole_sets(frame, k, dim + extra_seeds)
    psis = [s if isinstance(s, KDifferential) else poincare_kdiff(frame, k, s, max_len) for s in seeds]
    if len(psis) < dim:
        raise RankDeficientSeeds(f"need at least {dim} seeds, got {len(psis)}")
    G = pairing_matrix(frame, k, psis, xis, nodes)
    sv = np.linalg.svd(G, compute_uv=False)
    tol = sv[0] * max(G.shape) * 1e-12
    rank = int(np.sum(sv > tol))
    if rank < dim:
        raise RankDeficientSeeds(f"seed pairing matrix has rank {rank} < {dim}; add more poles")
    A = np.linalg.pinv(G)
    basis = []
    for row in A:
        acc = None
        for coef, psi in zip(row, psis):
            acc = psi * coef if acc is None else acc + psi * coef
        basis.append(acc)
    # pairing is linear in psi, so re-pairing the seeds on a finer rule checks the basis
    gram = A @ pairing_matrix(frame, k, psis, xis, 2 * nodes)
    resid = float(np.max(np.abs(gram - np.eye(dim))))
    return NormalizedBasis(tuple(basis), tuple(xis), gram, resid, G, float(sv[0] / sv[dim - 1]), rank, frame)
