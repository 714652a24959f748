import cmath
import math

import pytest
from gmpy2 import mpc
from hypothesis import given
from hypothesis import strategies as st

from schottky_zeta.errors import DegenerateMap, DegenerateMarking, NotClassicalSchottky, ParabolicOrElliptic
from schottky_zeta.moebius import (
    Circle,
    MarkedSchottkyGroup,
    MoebiusMap,
    compose,
    fixed_points,
    is_normalized,
    multiplier,
        normalize_marking,
    validate_schottky,
)
from schottky_zeta.numbers import INF, to_complex, workprec

PREC = 128


def fmap(a, b, c, d):
    return MoebiusMap.floating(a, b, c, d, PREC)


def close(x, y, tol=1e-30):
    return abs(to_complex(x) - to_complex(y)) <= tol * max(1.0, abs(to_complex(y)))


# random loxodromic maps: entries of moderate size, rejected when near-parabolic
entry = st.complex_numbers(min_magnitude=0.1, max_magnitude=4, allow_nan=False, allow_infinity=False)


@st.composite
def loxodromic(draw):
    a = draw(entry)
    b = draw(entry.filter(lambda z: abs(z - a) > 0.3))
    r = draw(st.floats(0.05, 0.9))
    t = draw(st.floats(-math.pi, math.pi))
    return MoebiusMap.from_fixed_points(mpc(a), mpc(b), mpc(cmath.rect(r, t)), PREC)


@st.composite
def conjugator(draw):
    a, b, c, d = draw(entry), draw(entry), draw(entry), draw(entry)
    if abs(a * d - b * c) < 0.5:
        a = a + 3
    return fmap(a, b, c, d)


def test_compose_identity_and_diagonal():
    m = fmap(2, 1, 1, 1)
    assert compose(MoebiusMap.identity(PREC), m) == m
    d = fmap(2, 0, 0, 0.5)
    assert compose(d, d) == fmap(4, 0, 0, 0.25)


def test_exact_compose_is_exact():
    m = MoebiusMap.exact(2, 1, 1, 1)
    p = compose(m, m.inverse())
    assert p.is_exact and p == MoebiusMap.exact(1, 0, 0, 1)


def test_degenerate_map_rejected():
    with pytest.raises(DegenerateMap):
        MoebiusMap.exact(1, 2, 2, 4)


def test_fixed_points_diagonal():
    fp = fixed_points(fmap(0.5, 0, 0, 2))
    assert close(fp.attractive, 0) and fp.repulsive is INF


def test_parabolic_rejected():
    with pytest.raises(ParabolicOrElliptic):
        fixed_points(fmap(1, 1, 0, 1))
    with pytest.raises(ParabolicOrElliptic):
        multiplier(fmap(1, 1, 0, 1))


def test_elliptic_rejected():
    t = math.pi / 5
    with pytest.raises(ParabolicOrElliptic):
        multiplier(fmap(math.cos(t), -math.sin(t), math.sin(t), math.cos(t)))


def test_fixed_points_power_iteration():
    m = MoebiusMap.exact(3, 1, 1, 1).to_floating(PREC)
    fp = fixed_points(m)
    z = mpc(0.3, 0.2)
    with workprec(PREC):
        for _ in range(200):
            z = m(z)
    assert close(z, fp.attractive, 1e-25)
    # roots of c z^2 + (d - a) z - b = z^2 - 2z - 1
    roots = {1 + math.sqrt(2), 1 - math.sqrt(2)}
    assert min(abs(to_complex(fp.attractive) - r) for r in roots) < 1e-14


def test_multiplier_examples():
    assert close(multiplier(fmap(1, 0, 0, 0.04)), 0.04, 1e-35)
    m = fmap(2, 1, 1, 1)  # trace 3, det 1
    assert close(multiplier(m), (7 - 3 * math.sqrt(5)) / 2, 1e-15)
    with workprec(PREC):
        exact = (7 - 3 * mpc(5) ** 0.5) / 2
    assert close(multiplier(m), exact, 1e-35)


def test_multiplier_tiny_is_accurate():
    q = mpc("1e-30")
    m = MoebiusMap.from_fixed_points(mpc(1), mpc(-1), q, PREC)
    assert close(multiplier(m), q, 1e-30)


@given(loxodromic(), conjugator())
def test_conjugation_invariance(m, p):
    q = multiplier(m)
    mc = compose(compose(p, m), p.inverse())
    assert close(multiplier(mc), q, 1e-25)
    fa = fixed_points(m).attractive
    fc = fixed_points(mc).attractive
    if fa is not INF and fc is not INF:
        img = p(fa)
        if img is not INF:
            assert abs(to_complex(img) - to_complex(fc)) < 1e-20 * max(1, abs(to_complex(fc)))


@given(loxodromic(), st.complex_numbers(min_magnitude=0.2, max_magnitude=5, allow_nan=False))
def test_projective_scaling_invariance(m, s):
    with workprec(PREC):
        scaled = MoebiusMap(*(x * mpc(s) for x in m.entries()), prec=PREC)
    assert close(multiplier(scaled), multiplier(m), 1e-25)
    assert scaled == m


@given(loxodromic())
def test_inverse_and_powers(m):
    q = multiplier(m)
    assert close(multiplier(m.inverse()), q, 1e-25)
    for n in range(2, 6):
        with workprec(PREC):
            qn = q ** n
        assert abs(to_complex(multiplier(m.power(n))) - to_complex(qn)) < 1e-22


def test_from_fixed_points_roundtrip():
    m = MoebiusMap.from_fixed_points(mpc(1, 1), mpc(-2), mpc(0.1, 0.05), PREC)
    fp = fixed_points(m)
    assert close(fp.attractive, complex(1, 1)) and close(fp.repulsive, -2)
    assert close(multiplier(m), complex(0.1, 0.05))


def test_normalize_marking(sample):
    n = normalize_marking(sample)
    assert is_normalized(n)
    f1, f2 = fixed_points(n.floating_generators[0]), fixed_points(n.floating_generators[1])
    assert close(f1.attractive, 0, 1e-30) and f1.repulsive is INF or abs(to_complex(f1.repulsive)) > 1e30
    assert close(f2.attractive, 1, 1e-30)
    for a, b in zip(sample.generator_multipliers(), n.generator_multipliers()):
        assert close(a, b, 1e-30)
    assert normalize_marking(n).floating_generators[0] == n.floating_generators[0]


def test_normalize_marking_degenerate():
    g1 = MoebiusMap.from_fixed_points(mpc(0), INF, mpc(0.1), PREC)
    g2 = MoebiusMap.from_fixed_points(mpc(0), mpc(3), mpc(0.1), PREC)
    with pytest.raises(DegenerateMarking):
        normalize_marking(MarkedSchottkyGroup((g1, g2), precision=PREC))


def test_validate_rank1_circles():
    # diag(1, y) is z -> z / y: it pushes the outside of |z| = 0.2 beyond |z| = 5
    g = fmap(1, 0, 0, 0.04)
    G = MarkedSchottkyGroup((g,), (Circle(0j, 0.2), Circle(0j, 5.0, True)), PREC)
    cert = validate_schottky(G)
    assert cert.margin > 0 and not cert.isometric


def test_validate_isometric_well_separated():
    g1 = MoebiusMap.from_fixed_points(mpc(-3), mpc(3), mpc(0.001), PREC)
    g2 = MoebiusMap.from_fixed_points(mpc(0, -3), mpc(0, 3), mpc(0.001), PREC)
    cert = validate_schottky(MarkedSchottkyGroup((g1, g2), precision=PREC))
    assert cert.isometric and cert.margin > 0


def test_validate_overlapping_rejected():
    g1 = MoebiusMap.from_fixed_points(mpc(-1), mpc(1), mpc(0.5), PREC)
    g2 = MoebiusMap.from_fixed_points(mpc(0, -1), mpc(0, 1), mpc(0.5), PREC)
    with pytest.raises(NotClassicalSchottky):
        validate_schottky(MarkedSchottkyGroup((g1, g2), precision=PREC))


def test_bundled_groups_certified(sample, real_a, real_b, rank1):
    for G in (sample, real_a, real_b, rank1):
        assert validate_schottky(G).margin > 0


def test_circle_image_maps_boundary():
    c = Circle(2 + 0j, 0.5)
    m = fmap(1, 1, 1, 2)
    img = c.image(m)
    for z in c.points(7):
        w = to_complex(m(mpc(z)))
        assert abs(abs(w - img.center) - img.radius) < 1e-12
    assert cmath.isfinite(img.center)
