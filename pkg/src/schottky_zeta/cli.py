"""Command-line entry point: ``schottky-zeta <subcommand> ...``.

Each invocation writes one JSON document (or a CSV table) to standard
output and diagnostics to standard error.  Exit status is 0 on success,
1 on a computation error and 2 on invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from gmpy2 import mpc

from . import arithdefo, eichler, periods, products, tate, verify, words
from .errors import InvalidInput, InvalidParameter, SchottkyError
from .groups import load_group
from .numbers import default_precision, format_complex, parse_rational, workprec

SCHEMA = "schottky-zeta/1"
log = logging.getLogger("schottky_zeta")


@dataclass
class RunConfig:
    subcommand: str
    group: Optional[str] = None
    precision: Optional[int] = None
    max_len: Optional[int] = None
    m_max: Optional[int] = None
    degree: int = 10
    nodes: int = periods.DEFAULT_NODES
    output: str = "json"
    seed: int = 0
    workers: int = 1
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("max_len", "m_max"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise InvalidParameter(f"{name} must be >= 0")
        if self.degree < 0 or self.nodes < 4 or self.workers < 1:
            raise InvalidParameter("degree, nodes and workers must be positive")
        if self.precision is not None and self.precision < 64:
            raise InvalidParameter("precision must be at least 64 bits")
        if self.output not in ("json", "csv"):
            raise InvalidParameter("output must be json or csv")

    @property
    def bits(self) -> int:
        return self.precision or default_precision()


# ---------------------------------------------------------------------------
# emission helpers


def _doc(command: str, **payload) -> str:
    body = {"schema": SCHEMA, "command": command}
    body.update(payload)
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def _truncated_json(v: products.TruncatedValue) -> dict:
    return {
        "label": v.label,
        "value": format_complex(v.value),
        "log_value": format_complex(v.log_value),
        "tail": v.tail_estimate,
        "max_len": v.max_len,
        "m_max": v.m_max,
        "classes": v.classes,
        "precision": v.precision,
        "shells": [format_complex(s) for s in v.shells],
    }


def emit_shell_table(value: products.TruncatedValue) -> str:
    """CSV with one row per word-length shell and the running log sum."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["length", "shell_re", "shell_im", "cum_re", "cum_im"])
    for L, (s, c) in enumerate(zip(value.shells, value.cumulative()), start=1):
        sr, si = format_complex(s)
        cr, ci = format_complex(c)
        w.writerow([L, sr, si, cr, ci])
    return buf.getvalue()


def _ints(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise InvalidInput(f"expected comma-separated integers, got {text!r}") from exc


def _complex_arg(text: str):
    parts = [t.strip() for t in text.split(",")]
    if len(parts) not in (1, 2):
        raise InvalidInput(f"expected RE or RE,IM, got {text!r}")
    try:
        re = parse_rational(parts[0])
        im = parse_rational(parts[1]) if len(parts) == 2 else 0
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    return re, im


def _x_values(text: Optional[str]) -> dict:
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise InvalidInput(f"x-values entries look like -2=3/4, got {item!r}")
        k, v = item.split("=", 1)
        out[int(k)] = v.strip()
    return out


def _multi_json(s: arithdefo.MultiSeries, mod_p: Optional[int]) -> dict:
    if mod_p:
        if mod_p < 2:
            raise InvalidParameter("--mod-p needs a prime")
        report = arithdefo.primitivity_check(s, [mod_p])[0]
        terms = []
        for e, c in s.sorted_terms():
            if int(c.denominator) % mod_p:
                r = int(c.numerator) * pow(int(c.denominator), -1, mod_p) % mod_p
                if r:
                    terms.append({"exp": list(e), "residue": r})
            else:
                # not p-integral: report the obstruction instead of a residue
                terms.append({"exp": list(e), "residue": None, "den": str(c.denominator)})
        return {"mod_p": mod_p, "monomials": terms, "degree": s.D,
                "p_integral": report.p_integral, "primitive": report.primitive}
    terms = [{"exp": list(e), "num": str(c.numerator), "den": str(c.denominator)} for e, c in s.sorted_terms()]
    return {"monomials": terms, "degree": s.D}


# ---------------------------------------------------------------------------
# subcommands


def _group(cfg: RunConfig):
    if not cfg.group:
        raise InvalidInput("--group is required")
    return load_group(cfg.group, cfg.precision)


def _cmd_classes(cfg: RunConfig) -> str:
    rank = cfg.options["rank"]
    L = cfg.max_len if cfg.max_len is not None else 4
    if rank < 1:
        raise InvalidParameter("rank must be >= 1")
    reps = words.enumerate_classes(rank, L)
    if cfg.options.get("count_only"):
        counts = {}
        for r in reps:
            counts[str(r.length)] = counts.get(str(r.length), 0) + 1
        return _doc("classes", rank=rank, max_len=L, total=len(reps), counts=counts)
    # one JSON object per class, as a stream
    return "".join(json.dumps({"word": list(r.word), "length": r.length}) + "\n" for r in reps)


def _products_value(cfg: RunConfig, what: str):
    G = _group(cfg)
    L = cfg.max_len if cfg.max_len is not None else 8
    k = cfg.options.get("k") or 2
    if what == "f1":
        return products.f1(G, L, cfg.m_max, cfg.workers)
    if what == "fk":
        return products.fk(G, k, L, cfg.m_max, cfg.workers)
    if what == "zeta":
        re, im = cfg.options.get("s") or (2, 0)
        with workprec(G.precision):
            s = mpc(re, im) if im else mpc(re)
        return products.ruelle_zeta(G, s, L, cfg.workers)
    if what == "modified":
        return products.modified_ruelle(G, k, L, cfg.workers)
    if what == "ratio":
        return products.check_ratio_identity(G, k, L, cfg.m_max, cfg.workers)
    raise InvalidInput(f"unknown product {what!r}")


def _cmd_products(cfg: RunConfig, what: Optional[str] = None) -> str:
    what = what or cfg.options.get("what", "f1")
    res = _products_value(cfg, what)
    if isinstance(res, products.RatioCheck):
        if cfg.output == "csv":
            raise InvalidInput("CSV output is for single products, not the ratio check")
        return _doc("products", what="ratio", k=res.k, max_len=res.max_len, residual=res.residual,
                    tail_bound=res.tail_bound, rounding_floor=res.rounding_floor,
                    within_tails=res.within_tails,
                    modified_zeta=_truncated_json(res.modified_zeta), fk=_truncated_json(res.fk),
                    fk1=_truncated_json(res.fk1))
    if cfg.output == "csv":
        return emit_shell_table(res)
    return _doc("products", what=what, **_truncated_json(res))


def _cmd_periods(cfg: RunConfig) -> str:
    G = _group(cfg)
    L = cfg.max_len if cfg.max_len is not None else 12
    pm = periods.period_matrix(G, L, cfg.nodes)
    return _doc("periods", max_len=L, nodes=cfg.nodes,
                tau=[[format_complex(complex(x)) for x in row] for row in pm.tau],
                normalization_error=pm.normalization_error, asymmetry=pm.asymmetry,
                im_eigenvalues=[float(e) for e in pm.im_eigenvalues()])


def _cmd_eichler(cfg: RunConfig) -> str:
    G = _group(cfg)
    k = cfg.options.get("k") or 2
    L = cfg.max_len if cfg.max_len is not None else eichler.DEFAULT_MAX_LEN
    nb = eichler.normalized_basis(G, k, max_len=L, nodes=cfg.nodes)
    return _doc("eichler", k=k, max_len=L, nodes=cfg.nodes, dims=nb.dims, gram_residual=nb.gram_residual,
                condition=nb.condition, cocycles=[x.label for x in nb.cocycles])


def _series_doc(command: str, res: tate.SeriesCheck, **extra) -> str:
    payload = dict(extra, residual_zero=res.residual_zero)
    if not res.residual_zero:
        payload["first_nonzero_order"] = res.first_nonzero_order
    return _doc(command, **payload)


def _cmd_tate(cfg: RunConfig) -> str:
    z0 = cfg.options["z0"]
    N = cfg.options.get("order") or 40
    try:
        parse_rational(z0)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from exc
    return _series_doc("tate-check", tate.weierstrass_check(z0, N), z0=z0, order=N)


def _cmd_telescope(cfg: RunConfig) -> str:
    k = cfg.options.get("k") or 2
    N = cfg.options.get("order") or 60
    return _series_doc("telescope", tate.telescoping_check(k, N), k=k, order=N)


def _cmd_expand(cfg: RunConfig) -> str:
    o = cfg.options
    ac = arithdefo.ArithConfig(o["g"], _x_values(o.get("x_values")), cfg.degree)
    if o.get("word"):
        w = _ints(o["word"])
        s = arithdefo.word_multiplier_series(w, ac)
        what = {"word": list(w)}
    elif o.get("fk"):
        s = arithdefo.fk_series(ac, o["fk"])
        what = {"fk": o["fk"]}
    else:
        s = arithdefo.f1_series(ac)
        what = {"f1": True}
    return _doc("expand", g=ac.g, x_values={str(k): str(v) for k, v in ac.x_values.items()},
                **what, **_multi_json(s, o.get("mod_p")))


def _cmd_constants(cfg: RunConfig) -> str:
    b = products.constants(cfg.options.get("g") or 2, cfg.options.get("k") or 2, cfg.bits)
    import mpmath

    digits = max(15, int(cfg.bits * 0.30103))
    return _doc("constants", g=b.g, k=b.k, d_k=b.d_k, precision=b.precision,
                zeta_prime_minus1=mpmath.nstr(b.zeta_prime_minus1, digits),
                c_g=mpmath.nstr(b.c_g, digits), c_gk=mpmath.nstr(b.c_gk, digits), a_g=mpmath.nstr(b.a_g, digits))


def _cmd_verify(cfg: RunConfig) -> Tuple[int, str]:
    suite = cfg.options.get("suite") or "all"
    try:
        results = verify.run_suite(suite)
    except KeyError:
        raise InvalidInput(f"unknown suite {suite!r}") from None
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed for r in results)
    text = _doc("verify", suite=suite, passed=ok, checks=[r.to_json() for r in results])
    return (0 if ok else 1), text


def run(cfg: RunConfig) -> Tuple[int, str]:
    """Dispatch ``cfg``; returns the exit status and the text for stdout."""
    handlers = {
        "classes": _cmd_classes,
        "products": _cmd_products,
        "zeta": lambda c: _cmd_products(c, "zeta"),
        "periods": _cmd_periods,
        "eichler": _cmd_eichler,
        "tate-check": _cmd_tate,
        "telescope": _cmd_telescope,
        "expand": _cmd_expand,
        "constants": _cmd_constants,
    }
    try:
        if cfg.subcommand == "verify":
            return _cmd_verify(cfg)
        if cfg.subcommand not in handlers:
            raise InvalidInput(f"unknown subcommand {cfg.subcommand!r}")
        return 0, handlers[cfg.subcommand](cfg)
    except SchottkyError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_status, _doc(cfg.subcommand, error={"code": exc.code, "message": str(exc)})
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error [InvalidInput]: {exc}", file=sys.stderr)
        return 2, _doc(cfg.subcommand, error={"code": "InvalidInput", "message": str(exc)})


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schottky-zeta", description="Invariants of Schottky groups.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision", type=int, help="working precision in bits (>= 64)")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("classes", parents=[common], help="primitive conjugacy classes")
    s.add_argument("--rank", type=int, required=True)
    s.add_argument("--max-len", type=int, default=4)
    s.add_argument("--count-only", action="store_true")

    for name in ("products", "zeta"):
        s = sub.add_parser(name, parents=[common], help="infinite products over classes")
        s.add_argument("--group", required=True)
        s.add_argument("--max-len", type=int, default=8)
        s.add_argument("--m-max", type=int)
        s.add_argument("--k", type=int, default=2)
        s.add_argument("--s", type=_complex_arg, default=None, help="RE or RE,IM")
        s.add_argument("--csv", action="store_true", help="emit the shell table")
        if name == "products":
            s.add_argument("--what", choices=["f1", "fk", "zeta", "modified", "ratio"], default="f1")

    s = sub.add_parser("periods", parents=[common], help="normalized differentials and period matrix")
    s.add_argument("--group", required=True)
    s.add_argument("--max-len", type=int, default=12)
    s.add_argument("--nodes", type=int, default=periods.DEFAULT_NODES)

    s = sub.add_parser("eichler", parents=[common], help="normalized basis of k-differentials")
    s.add_argument("--group", required=True)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--max-len", type=int, default=eichler.DEFAULT_MAX_LEN)
    s.add_argument("--nodes", type=int, default=periods.DEFAULT_NODES)

    s = sub.add_parser("tate-check", parents=[common], help="Weierstrass equation of the Tate curve")
    s.add_argument("--z0", required=True)
    s.add_argument("--order", type=int, default=40)

    s = sub.add_parser("telescope", parents=[common], help="telescoping of shifted Euler products")
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--order", type=int, default=60)

    s = sub.add_parser("expand", parents=[common], help="universal multiplier and product series")
    s.add_argument("--g", type=int, required=True)
    s.add_argument("--x-values", help="comma list like -2=3,3=1/2,-3=-4")
    s.add_argument("--degree", type=int, default=10)
    what = s.add_mutually_exclusive_group()
    what.add_argument("--word")
    what.add_argument("--f1", action="store_true")
    what.add_argument("--fk", type=int)
    s.add_argument("--mod-p", type=int)

    s = sub.add_parser("constants", parents=[common], help="c_g, c_{g;k}, a(g), d_k")
    s.add_argument("--g", type=int, default=2)
    s.add_argument("--k", type=int, default=2)

    s = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    s.add_argument("--suite", default="all", help="all, exact, numeric, or a single check name")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    opts = {}
    for key in ("rank", "count_only", "what", "k", "s", "z0", "order", "g", "x_values", "word", "f1",
                "fk", "mod_p", "suite"):
        if hasattr(ns, key):
            opts[key] = getattr(ns, key)
    return RunConfig(
        subcommand=ns.subcommand,
        group=getattr(ns, "group", None),
        precision=ns.precision,
        max_len=getattr(ns, "max_len", None),
        m_max=getattr(ns, "m_max", None),
        degree=getattr(ns, "degree", 10),
        nodes=getattr(ns, "nodes", periods.DEFAULT_NODES),
        output="csv" if getattr(ns, "csv", False) else "json",
        seed=ns.seed,
        workers=ns.workers,
        options=opts,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
    except SchottkyError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_status
    status, text = run(cfg)
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
