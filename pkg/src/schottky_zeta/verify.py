"""Acceptance checks shared by the ``verify`` subcommand and the test suite.

Every check returns a :class:`CheckResult` whose ``details`` hold only
JSON-safe, run-independent values (no timings), so two runs of the same
suite serialize to identical bytes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import mpmath
import numpy as np
from gmpy2 import mpq

from . import arithdefo, eichler, periods, products, tate, words
from .groups import bundled
from .numbers import workprec


@dataclass
class CheckResult:
    key: str
    title: str
    passed: bool
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.details = _plain(self.details)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.key}: {self.title}"

    def to_json(self) -> dict:
        return {"key": self.key, "title": self.title, "passed": self.passed, "details": self.details}


def _plain(obj):
    """Replace numpy scalars by Python ones, recursively."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _f(x) -> float:
    """Round-trippable float for JSON (keeps determinism, drops numpy types)."""
    return float(x)


def _cx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


# ---------------------------------------------------------------------------
# exact identities


def check_tate(points=("2", "-3", "5/7"), order: int = 40, budget: float = 10.0) -> CheckResult:
    import time

    rows, ok = [], True
    for z0 in points:
        t0 = time.perf_counter()
        res = tate.weierstrass_check(z0, order)
        elapsed = time.perf_counter() - t0
        fast = elapsed < budget
        ok &= res.residual_zero and fast
        rows.append({"z0": z0, "residual_zero": res.residual_zero, "within_budget": fast})
    return CheckResult("tate", "Weierstrass equation of the Tate curve holds exactly", ok,
                       {"order": order, "points": rows})


def check_integrality(order: int = 200) -> CheckResult:
    a4, a6 = tate.a4_a6_series(order)
    spots = {"a4[1]": a4[1], "a6[1]": a6[1], "a6[2]": a6[2]}
    expect = {"a4[1]": -5, "a6[1]": -1, "a6[2]": -23}
    # independent oracle: divisor sums computed here from scratch
    def sigma(k, n):
        return sum(d ** k for d in range(1, n + 1) if n % d == 0)

    oracle_ok = all(a4[n] == -5 * sigma(3, n) and 12 * a6[n] == -(5 * sigma(3, n) + 7 * sigma(5, n))
                    for n in range(1, 31))
    ok = oracle_ok and all(spots[k] == expect[k] for k in expect)
    return CheckResult("integrality", "a4 and a6 have integer coefficients", ok,
                       {"order": order, "spot_values": spots, "divisor_sum_oracle": oracle_ok})


def check_telescope(ks=(2, 3, 5), order: int = 60) -> CheckResult:
    rows = {str(k): tate.telescoping_check(k, order).residual_zero for k in ks}
    return CheckResult("telescope", "shifted Euler products telescope exactly", all(rows.values()),
                       {"order": order, "residual_zero": rows})


def check_arith(x_sets=({-2: "3"}, {-2: "-5/2"}, {-2: "7/3"}), max_len: int = 4, D: int = 10) -> CheckResult:
    cfg0 = arithdefo.ArithConfig(2, dict(x_sets[0]), D)
    q1 = arithdefo.word_multiplier_series((1,), cfg0)
    q1_ok = q1 == arithdefo.MultiSeries.var(2, D, 1)
    div_ok, quad_ok, n_words = True, True, 0
    for xs in x_sets:
        cfg = arithdefo.ArithConfig(2, dict(xs), 6)
        for w in arithdefo.admissible_words(2, max_len):
            q = arithdefo.word_multiplier_series(w, cfg)
            exps = arithdefo.word_det_exponents(w, 2)
            div_ok &= q.divisible_by(exps)
            quad_ok &= not arithdefo.quadratic_residual(w, q, cfg)
            n_words += 1
    f1 = arithdefo.specialize(arithdefo.f1_series(cfg0), {2: 0})
    target = tate.euler_product(1, D, 2)
    spec_ok = arithdefo.univariate(f1, 1) == [mpq(c) for c in target.coeffs]
    ok = q1_ok and div_ok and quad_ok and spec_ok
    return CheckResult("arith", "universal multiplier expansions", ok,
                       {"q1_is_y1": q1_ok, "divisibility": div_ok, "quadratic_residual_zero": quad_ok,
                        "words_checked": n_words, "f1_at_y2_zero": spec_ok, "degree": D})


def check_enumeration(rank: int = 2, max_len: int = 6) -> CheckResult:
    stream = [c.word if hasattr(c, "word") else tuple(c) for c in words.enumerate_classes(rank, max_len)]
    dup = len(stream) - len(set(stream))
    brute = words.brute_force_classes(rank, max_len)
    same = set(stream) == brute
    counts = {}
    for w in stream:
        counts[len(w)] = counts.get(len(w), 0) + 1
    ok = same and dup == 0 and counts.get(1) == 4 and counts.get(2) == 4
    return CheckResult("enumeration", "class stream matches brute force", ok,
                       {"classes": len(stream), "duplicates": dup, "matches_brute_force": same,
                        "counts": {str(k): v for k, v in sorted(counts.items())}})


def check_constants(digits: int = 30) -> CheckResult:
    prec = 160
    ok = products.d_k(2) == 13 and products.d_k(3) == 37
    rows = []
    with mpmath.workprec(prec + 32):
        z_ref = mpmath.zeta(-1, derivative=1)
        for g, k in ((2, 2), (3, 2), (2, 3)):
            b = products.constants(g, k, prec)
            c_g = (2 * mpmath.pi) ** (2 * g) * mpmath.exp((g - 1) * (24 * z_ref + 1) / 6)
            c_gk = mpmath.exp((g - 1) * (24 * z_ref + 2 * products.d_k(k) - 1) / 6)
            rel = max(abs(b.c_g / c_g - 1), abs(b.c_gk / c_gk - 1), abs(b.zeta_prime_minus1 - z_ref))
            good = rel < mpmath.mpf(10) ** (-digits)
            ok &= bool(good)
            rows.append({"g": g, "k": k, "c_g": mpmath.nstr(b.c_g, digits),
                         "c_gk": mpmath.nstr(b.c_gk, digits), "agrees": bool(good)})
    return CheckResult("constants", "d_k, c_g and c_{g;k} against an independent zeta'(-1)", ok,
                       {"d_2": products.d_k(2), "d_3": products.d_k(3), "rows": rows})


# ---------------------------------------------------------------------------
# numeric self-consistency


def check_ratio(groups=("real_a", "real_b"), ks=(2, 3), lengths=(12, 14), tol: float = 1e-9) -> CheckResult:
    rows, ok = [], True
    for name in groups:
        G = bundled(name)
        for k in ks:
            res = [products.check_ratio_identity(G, k, L) for L in lengths]
            small = res[0].residual < tol
            shrinks = all(b.residual <= a.residual for a, b in zip(res, res[1:]))
            ok &= small and shrinks
            rows.append({"group": name, "k": k, "residuals": [_f(r.residual) for r in res],
                         "rounding_floor": _f(res[-1].rounding_floor), "below_tol": small,
                         "non_increasing": shrinks})
    return CheckResult("ratio", "modified zeta times F_k equals F_(k+1)", ok,
                       {"max_len": list(lengths), "tol": tol, "rows": rows})


def check_normalization(group: str = "sample", max_len: int = 12, nodes: int = 2048, tol: float = 1e-6) -> CheckResult:
    rep = periods.check_normalization(bundled(group), max_len, nodes)
    ok = rep.max_deviation < tol
    return CheckResult("normalization", "a-periods of omega_i form the identity", ok,
                       {"group": group, "max_len": max_len, "nodes": nodes, "max_deviation": _f(rep.max_deviation)})


def check_periods(group: str = "sample", max_len: int = 12, nodes: int = 2048, tol: float = 1e-6) -> CheckResult:
    pm = periods.period_matrix(bundled(group), max_len, nodes=0)
    eig = pm.im_eigenvalues()
    G1 = bundled("rank1")
    p1 = periods.period_matrix(G1, 1, nodes=0)
    q = complex(G1.generator_multipliers()[0])
    err1 = abs(np.exp(2j * math.pi * p1.tau[0, 0]) - q)
    ok = pm.asymmetry < tol and bool(np.all(eig > 0)) and err1 < 1e-10
    return CheckResult("periods", "period matrix is symmetric with positive imaginary part", ok,
                       {"group": group, "max_len": max_len, "asymmetry": _f(pm.asymmetry),
                        "im_eigenvalues": [_f(e) for e in eig], "rank1_exp_error": _f(err1)})


def check_eichler(group: str = "sample", k: int = 2, max_len: int = 8, nodes: int = 2048,
                  tol: float = 1e-5, cob_tol: float = 1e-6) -> CheckResult:
    nb = eichler.normalized_basis(bundled(group), k, max_len=max_len, nodes=nodes)
    rng = np.random.default_rng(20240601)
    cob = []
    for _ in range(3):
        v = rng.normal(size=2 * k - 1) + 1j * rng.normal(size=2 * k - 1)
        xi = eichler.coboundary(nb.frame, k, v)
        cob.append(max(abs(eichler.pairing(nb.frame, k, psi, xi, nodes)) for psi in nb.basis))
    ok = nb.gram_residual < tol and max(cob) < cob_tol and nb.dims == (2 * k - 1) * (nb.frame.rank - 1)
    return CheckResult("eichler", "normalized k-differentials are dual to the standard cocycles", ok,
                       {"group": group, "k": k, "dims": nb.dims, "gram_residual": _f(nb.gram_residual),
                        "condition": _f(nb.condition), "coboundary_max": _f(max(cob))})


def check_degeneration(group: str = "real_a", ts=(1e-2, 1e-3, 1e-4), max_len: int = 10) -> CheckResult:
    G = bundled(group)
    base = products.f1(products.subgroup(G, [1]), max_len).value
    gaps = []
    for t in ts:
        v = products.f1(products.degenerate_family(G, 0, t), max_len).value
        with workprec(G.precision):
            gaps.append(float(abs(v - base)))
    ok = all(b < a for a, b in zip(gaps, gaps[1:]))
    return CheckResult("degeneration", "F_1 approaches the rank-1 value as t -> 0", ok,
                       {"group": group, "t": list(ts), "gaps": gaps})


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "tate": check_tate,
    "integrality": check_integrality,
    "telescope": check_telescope,
    "ratio": check_ratio,
    "normalization": check_normalization,
    "periods": check_periods,
    "eichler": check_eichler,
    "arith": check_arith,
    "degeneration": check_degeneration,
    "enumeration": check_enumeration,
    "constants": check_constants,
}

SUITES: Dict[str, List[str]] = {
    "exact": ["tate", "integrality", "telescope", "arith", "enumeration", "constants"],
    "numeric": ["ratio", "normalization", "periods", "eichler", "degeneration"],
    "all": list(CHECKS),
}


def run_suite(name: str) -> List[CheckResult]:
    if name in SUITES:
        keys = SUITES[name]
    elif name in CHECKS:
        keys = [name]
    else:
        raise KeyError(name)
    return [CHECKS[k]() for k in keys]
