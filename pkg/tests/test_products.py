import itertools
import math
import warnings

import mpmath
import pytest
from gmpy2 import mpc, mpq
from hypothesis import given
from hypothesis import strategies as st

from schottky_zeta import arithdefo
from schottky_zeta.errors import (DivergenceSuspected, InvalidParameter, MultiplierOnUnitCircle, NotNormalized,
                                  NotRealGroup)
from schottky_zeta.moebius import MarkedSchottkyGroup, MoebiusMap, compose, multiplier
from schottky_zeta.numbers import INF, to_complex, workprec
from schottky_zeta.products import (
    CompensatedSum,
    _check_decay,
    check_ratio_identity,
    constants,
    d_k,
    default_m_max,
    degenerate_family,
    f1,
    fk,
    modified_ruelle,
    ruelle_zeta,
    subgroup,
    zeta_correction_log,
    zeta_prime_minus1,
)
from schottky_zeta.words import canonical, evaluate, is_cyclically_reduced, is_primitive

PREC = 128


def rank1_group(q):
    g = MoebiusMap.from_fixed_points(mpc(0), INF, q, PREC)
    return MarkedSchottkyGroup((g,), precision=PREC)


def c(v):
    return v.as_complex()


def test_empty_product():
    G = rank1_group(0.1)
    assert c(f1(G, 0)) == 1
    assert c(ruelle_zeta(G, 2, 0)) == 1


def test_rank1_f1_against_q_pochhammer():
    v = f1(rank1_group("0.1"), 3)
    with mpmath.workprec(PREC):
        ref = mpmath.qp(mpmath.mpf("0.1"), mpmath.mpf("0.1")) ** 2
    assert abs(c(v) - float(ref)) < 1e-15
    assert abs(float(v.value.real) - float(ref)) < 1e-15
    with mpmath.workprec(PREC):
        assert abs(mpmath.mpf(str(v.value.real)) - ref) < mpmath.mpf(2) ** -110
    assert abs(c(v) - 0.7921180) < 1e-7


def test_rank1_zeta():
    v = ruelle_zeta(rank1_group("0.1"), 2, 4)
    assert abs(c(v) - 1 / 0.99 ** 2) < 1e-15
    assert abs(c(v) - 1.0203040506) < 1e-10
    big = ruelle_zeta(rank1_group("0.1"), 60, 4)
    assert abs(c(big) - 1) < 1e-50 + 1e-16


def test_zeta_region_checks():
    G = rank1_group(0.1)
    with pytest.raises(InvalidParameter):
        ruelle_zeta(G, 1, 3)
    with pytest.warns(RuntimeWarning):
        ruelle_zeta(G, 1.5, 3)


def test_well_separated_stability(real_b):
    a, b = f1(real_b, 12), f1(real_b, 14)
    assert abs(c(a) - c(b)) < 1e-10
    assert b.tail_estimate >= 0


def test_fk_prefactor_only(real_a):
    q1, q2 = (to_complex(q) for q in real_a.generator_multipliers())
    v = fk(real_a, 2, 0)
    assert abs(c(v) - (1 - q1) ** 2 * (1 - q2)) < 1e-15
    v3 = fk(real_a, 3, 0)
    assert abs(c(v3) - ((1 - q1) * (1 - q1 ** 2)) ** 2 * (1 - q2 ** 2)) < 1e-15


def test_fk_real_in_unit_interval(real_a):
    for k in (2, 3):
        v = c(fk(real_a, k, 8))
        assert v.imag == 0 and 0 < v.real <= 1


def test_fk_needs_rank2():
    with pytest.raises(NotNormalized):
        fk(rank1_group(0.1), 2, 3)


def test_fk_matches_universal_series():
    # phi_i has repelling x_i and attracting x_-i; gamma_i = phi_i^-1 is normalized
    cfg = arithdefo.ArithConfig(2, {-2: "3"}, 8)
    y = {1: mpq(1, 10000), 2: mpq(1, 8000)}
    gens = (
        MoebiusMap.from_fixed_points(mpc(0), INF, y[1], PREC),
        MoebiusMap.from_fixed_points(mpc(1), mpc(3), y[2], PREC),
    )
    G = MarkedSchottkyGroup(gens, precision=PREC)
    for k, series in ((1, arithdefo.f1_series(cfg)), (2, arithdefo.fk_series(cfg, 2))):
        val = arithdefo.specialize(series, y).constant_term()
        num = f1(G, 10) if k == 1 else fk(G, 2, 10)
        assert abs(c(num) - float(val)) < 1e-14


def test_universal_series_truncation_shrinks():
    # the series has a finite radius in y, so check convergence in the degree cap
    y = {1: mpq(1, 100), 2: mpq(1, 80)}
    gens = (
        MoebiusMap.from_fixed_points(mpc(0), INF, y[1], PREC),
        MoebiusMap.from_fixed_points(mpc(1), mpc(3), y[2], PREC),
    )
    num = c(f1(MarkedSchottkyGroup(gens, precision=PREC), 10)).real
    errs = []
    for D in (4, 6, 8):
        s = arithdefo.f1_series(arithdefo.ArithConfig(2, {-2: "3"}, D))
        errs.append(abs(float(arithdefo.specialize(s, y).constant_term()) - num))
    assert errs[0] > 10 * errs[1] > 100 * errs[2]


def _naive_classes(rank, L):
    letters = [l for i in range(1, rank + 1) for l in (i, -i)]
    out = set()

    def grow(w):
        if w and is_cyclically_reduced(w) and is_primitive(w):
            out.add(canonical(w))
        if len(w) == L:
            return
        for l in letters:
            if not w or l != -w[-1]:
                grow(w + (l,))

    grow(())
    return out


def test_zeta_against_naive_enumeration(sample):
    L = 10
    v = ruelle_zeta(sample, 2, L)
    with mpmath.workprec(PREC):
        logz = mpmath.mpf(0)
        for w in sorted(_naive_classes(2, L), key=lambda w: (len(w), w)):
            q = multiplier(evaluate(w, sample))
            aq = mpmath.mpf(str(abs(q)))
            logz -= mpmath.log1p(-aq ** 2)
        ref = mpmath.exp(logz)
    assert abs(c(v).real - float(ref)) < 1e-14 and c(v).imag == 0


def test_modified_zeta():
    with workprec(PREC):
        assert zeta_correction_log(mpc(0), mpc(0), 2, PREC) == 0


def test_modified_zeta_real_positive(real_a):
    v = c(modified_ruelle(real_a, 2, 8))
    assert v.imag == 0 and v.real > 0


def test_monotone_truncation(real_a):
    vals = [c(f1(real_a, L)).real for L in range(0, 9)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_conjugation_invariance(real_a):
    p = MoebiusMap.floating(2, 1, 1, 3, PREC)
    conj = real_a.conjugate(p)
    assert abs(c(f1(conj, 8)) - c(f1(real_a, 8))) < 1e-25
    assert abs(c(ruelle_zeta(conj, 2, 8)) - c(ruelle_zeta(real_a, 2, 8))) < 1e-25


def test_shell_determinism(real_a):
    a = f1(real_a, 8)
    from schottky_zeta.groups import bundled

    b = f1(bundled("real_a"), 8, workers=2)
    assert a.value == b.value and a.shells == b.shells


def test_ratio_identity(real_a, real_b):
    for G in (real_a, real_b):
        for k in (2, 3):
            r = check_ratio_identity(G, k, 8)
            assert r.residual < 1e-9
            assert r.within_tails


def test_ratio_identity_rejects_complex(sample):
    with pytest.raises(NotRealGroup):
        check_ratio_identity(sample, 2, 4)


def test_divergence_and_unit_circle():
    with pytest.raises(DivergenceSuspected):
        _check_decay([1.0, 1.0, 1.1, 1.2, 1.3], "test")
    _check_decay([1.0, 1.0, 0.5, 0.6, 0.1], "test")
    with pytest.raises(MultiplierOnUnitCircle):
        default_m_max(1.0, PREC)


def test_default_m_max_bound():
    m = default_m_max(0.05, PREC)
    assert 0.05 ** m < 2.0 ** -PREC


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=60))
def test_compensated_sum_matches_exact(xs):
    with workprec(PREC):
        acc = CompensatedSum(True)
        for x in xs:
            acc.add(x)
        exact = sum(mpq(x) for x in xs)
        assert abs(mpq(acc.value().real) - exact) <= mpq(1, 2 ** 100) * (1 + sum(abs(mpq(x)) for x in xs))


def test_degenerate_family(real_a):
    Gt = degenerate_family(real_a, 0, 1e-3)
    assert abs(to_complex(multiplier(Gt.floating_generators[1])) - 1e-3) < 1e-30
    with pytest.raises(InvalidParameter):
        degenerate_family(real_a, 0, 0)
    base = c(f1(subgroup(real_a, [1]), 10))
    gaps = [abs(c(f1(degenerate_family(real_a, 0, t), 8)) - base) for t in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_degenerate_family_split(real_a):
    limit = c(f1(subgroup(real_a, [1]), 6)) * c(f1(subgroup(real_a, [2]), 6))
    gaps = [abs(c(f1(degenerate_family(real_a, 1, t), 6)) - limit) for t in (1e-2, 1e-3, 1e-4)]
    assert gaps[0] > gaps[1] > gaps[2]


def test_constants():
    assert d_k(2) == 13 and d_k(3) == 37
    with mpmath.workprec(200):
        ref = mpmath.zeta(-1, derivative=1)
        assert abs(zeta_prime_minus1(180) - ref) < mpmath.mpf(10) ** -50
    assert abs(float(zeta_prime_minus1(64)) + 0.16542114) < 1e-8
    b = constants(2, 2, 128)
    with mpmath.workprec(160):
        c2 = (2 * mpmath.pi) ** 4 * mpmath.exp((24 * ref + 1) / 6)
        assert abs(b.c_g / c2 - 1) < mpmath.mpf(10) ** -35
    with pytest.raises(InvalidParameter):
        constants(1, 2)
