"""Free-group words: reduction, primitivity, and enumeration of primitive classes.

Letters are nonzero ints ``±1..±g``; ``-i`` denotes the inverse of generator
``i``.  Words are tuples of letters.  Canonical class representatives are
least rotations under the letter order ``1 < -1 < 2 < -2 < ...``.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import EmptyWord, RankMismatch
from .moebius import MarkedSchottkyGroup, MoebiusMap, compose, multiplier_from_trace
from .numbers import to_mpc, workprec

Word = tuple


def letter_key(l: int) -> int:
    return 2 * (abs(l) - 1) + (1 if l < 0 else 0)


def key_letter(k: int) -> int:
    i = k // 2 + 1
    return -i if k % 2 else i


def word_key(w: Sequence[int]) -> tuple:
    return tuple(letter_key(l) for l in w)


def inverse_word(w: Sequence[int]) -> Word:
    return tuple(-l for l in reversed(w))


def free_reduce(w: Sequence[int]) -> Word:
    out: list = []
    for l in w:
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


def is_reduced(w: Sequence[int]) -> bool:
    return all(w[i] != -w[i + 1] for i in range(len(w) - 1))


def is_cyclically_reduced(w: Sequence[int]) -> bool:
    return is_reduced(w) and (len(w) < 2 or w[0] != -w[-1])


def cyclic_reduce(w: Sequence[int]) -> Word:
    """Freely reduce, then trim conjugating letters from both ends."""
    r = free_reduce(w)
    lo, hi = 0, len(r)
    while hi - lo >= 2 and r[lo] == -r[hi - 1]:
        lo += 1
        hi -= 1
    out = r[lo:hi]
    if w and not out:
        raise EmptyWord(f"{tuple(w)} represents the identity")
    return out


def rotations(w: Sequence[int]):
    w = tuple(w)
    return [w[i:] + w[:i] for i in range(len(w))] or [()]


def is_primitive(w: Sequence[int]) -> bool:
    """True iff the cyclic word is not a proper power (rotation-period test)."""
    w = tuple(w)
    n = len(w)
    if n == 0:
        return False
    doubled = w + w
    # the smallest nontrivial rotation fixing w is the period
    for p in range(1, n):
        if n % p == 0 and doubled[p:p + n] == w:
            return False
    return True


def canonical(w: Sequence[int]) -> Word:
    return min(rotations(w), key=word_key)


@dataclass(frozen=True)
class ConjClassRep:
    word: Word
    multiplier: Optional[mpc] = None

    @property
    def length(self) -> int:
        return len(self.word)

    def sort_key(self):
        return (len(self.word), word_key(self.word))


def _lyndon_words(rank: int, max_len: int, first: Optional[int] = None) -> Iterator[tuple]:
    """Cyclically reduced Lyndon words (as key tuples), prefix-tree order.

    A prenecklace search in the style of Fredricksen-Kessler-Maiorana, with
    the free-reduction constraint applied to every prefix.
    """
    K = 2 * rank
    a = [0] * (max_len + 1)

    def gen(t, p):
        lo = a[t - p]
        for j in range(lo, K):
            if t > 1 and j == a[t - 1] ^ 1:
                continue
            if t == 1 and first is not None and j != first:
                continue
            a[t] = j
            np_ = p if j == a[t - p] else t
            if np_ == t and (t == 1 or a[1] != j ^ 1):
                yield tuple(a[1:t + 1])
            if t < max_len:
                yield from gen(t + 1, np_)

    if max_len >= 1:
        yield from gen(1, 1)


def enumerate_classes(rank: int, max_len: int) -> list:
    """Every primitive conjugacy class with a representative of length <= max_len.

    Returned in (length, lexicographic) order; ``{w}`` and ``{w^-1}`` are
    distinct classes.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    keys = sorted(_lyndon_words(rank, max_len), key=lambda k: (len(k), k))
    return [ConjClassRep(tuple(key_letter(j) for j in k)) for k in keys]


def evaluate(w: Sequence[int], group: MarkedSchottkyGroup) -> MoebiusMap:
    out = MoebiusMap.identity(group.precision)
    for l in w:
        if l == 0 or abs(l) > group.rank:
            raise RankMismatch(f"letter {l} outside rank {group.rank}")
        out = compose(out, group.letter(l))
    return out


# ---------------------------------------------------------------------------
# fast multiplier spectrum


def _unimodular_letters(group: MarkedSchottkyGroup):
    """Letter matrices scaled to determinant 1, as raw tuples.

    Real groups with positive determinants stay in ``mpfr`` arithmetic.
    """
    prec = group.precision
    with workprec(prec):
        gens = group.floating_generators
        real = all(
            all(x.imag == 0 for x in g.entries()) and (g.det().real > 0) for g in gens
        )
        letters = {}
        for i, g in enumerate(gens, start=1):
            s = gmpy2.sqrt(g.det())
            ent = [x / s for x in g.entries()]
            if real:
                ent = [mpfr(x.real) for x in ent]
            a, b, c, d = ent
            letters[letter_key(i)] = (a, b, c, d)
            letters[letter_key(-i)] = (d, -b, -c, a)
    return letters, real


def _spectrum_shard(group: MarkedSchottkyGroup, max_len: int, first: Optional[int]):
    prec = group.precision
    letters, real = _unimodular_letters(group)
    K = 2 * group.rank
    out = []
    with workprec(prec):
        one = mpfr(1) if real else mpc(1)
        zero = mpfr(0) if real else mpc(0)
        a = [0] * (max_len + 1)
        mats = [None] * (max_len + 1)
        mats[0] = (one, zero, zero, one)

        def gen(t, p):
            lo = a[t - p]
            pa, pb, pc, pd = mats[t - 1]
            for j in range(lo, K):
                if t > 1 and j == a[t - 1] ^ 1:
                    continue
                if t == 1 and first is not None and j != first:
                    continue
                a[t] = j
                la, lb, lc, ld = letters[j]
                m = (pa * la + pb * lc, pa * lb + pb * ld, pc * la + pd * lc, pc * lb + pd * ld)
                mats[t] = m
                np_ = p if j == a[t - p] else t
                if np_ == t and (t == 1 or a[1] != j ^ 1):
                    out.append((tuple(a[1:t + 1]), m[0] + m[3]))
                if t < max_len:
                    gen(t + 1, np_)

        if max_len >= 1:
            gen(1, 1)
        res = []
        if real:
            tol = mpfr(2) ** (-(prec // 2))
            for key, tr in out:
                u = tr * tr - 2
                if u <= 2 + tol:
                    # not loxodromic-hyperbolic in real form; use the general path
                    res.append((key, multiplier_from_trace(mpc(tr), mpc(1), prec)))
                    continue
                q = 2 / (u + gmpy2.sqrt(u * u - 4))
                res.append((key, mpc(q, 0)))
        else:
            one_c = mpc(1)
            for key, tr in out:
                res.append((key, multiplier_from_trace(tr, one_c, prec)))
    return res


def multiplier_spectrum(group: MarkedSchottkyGroup, max_len: int, workers: int = 1) -> list:
    """Canonical class representatives with multipliers, in (length, lex) order.

    With ``workers > 1`` the search is sharded by first letter across
    processes; the merged list is re-sorted canonically so results do not
    depend on the worker count.
    """
    K = 2 * group.rank
    if workers > 1 and max_len >= 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_spectrum_shard, [group] * K, [max_len] * K, range(K)))
        raw = list(itertools.chain.from_iterable(parts))
    else:
        raw = _spectrum_shard(group, max_len, None)
    raw.sort(key=lambda kq: (len(kq[0]), kq[0]))
    return [ConjClassRep(tuple(key_letter(j) for j in k), q) for k, q in raw]


def brute_force_classes(rank: int, max_len: int) -> set:
    """Independent oracle: canonicalise every cyclically reduced primitive word."""
    letters = [l for i in range(1, rank + 1) for l in (i, -i)]
    found = set()
    for n in range(1, max_len + 1):
        for w in itertools.product(letters, repeat=n):
            if is_cyclically_reduced(w) and is_primitive(w):
                found.add(canonical(w))
    return found


def walk_classes(rank: int, max_len: int, root, step):
    """Depth-first walk over class representatives sharing prefix state.

    ``step(state, letter, depth)`` extends the state of a prefix by one
    letter.  Yields ``(word, state)`` for every canonical representative, in
    prefix-tree order.
    """
    K = 2 * rank
    a = [0] * (max_len + 1)
    states = [None] * (max_len + 1)
    states[0] = root

    def gen(t, p):
        lo = a[t - p]
        for j in range(lo, K):
            if t > 1 and j == a[t - 1] ^ 1:
                continue
            a[t] = j
            states[t] = step(states[t - 1], key_letter(j), t)
            np_ = p if j == a[t - p] else t
            if np_ == t and (t == 1 or a[1] != j ^ 1):
                yield tuple(key_letter(x) for x in a[1:t + 1]), states[t]
            if t < max_len:
                yield from gen(t + 1, np_)

    if max_len >= 1:
        yield from gen(1, 1)
