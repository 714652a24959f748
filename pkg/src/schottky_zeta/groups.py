"""Group specifications: JSON input/output and the bundled test groups.

A group file looks like::

    {"name": "demo", "rank": 2, "precision_bits": 128,
     "generators": [{"attractive": "0", "repulsive": "inf", "multiplier": "0.04"},
                    ["2", "1", "1", "1"]],
     "circles": [{"center": ["0", "0"], "radius": "10", "outer": true}, ...]}

Scalars are decimal or ``p/q`` strings, or ``[re, im]`` pairs of them; the
string ``"inf"`` denotes the point at infinity.  Generators given by fixed
points and multiplier are built in floating point at the group precision.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from .errors import InvalidInput, RankMismatch
from .moebius import Circle, MarkedSchottkyGroup, MoebiusMap
from .numbers import INF, default_precision, format_complex, parse_complex, to_complex, to_mpc

BUNDLED = ("real_a", "real_b", "sample", "rank1")


def _scalar(v, what: str):
    if isinstance(v, str) and v.strip().lower() in ("inf", "infinity"):
        return INF
    try:
        return parse_complex(v)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{what}: cannot parse {v!r}: {exc}") from exc


def _finite(v, what: str):
    x = _scalar(v, what)
    if x is INF:
        raise InvalidInput(f"{what} must be finite")
    return x


def _generator(spec, prec: int, k: int) -> MoebiusMap:
    where = f"generator {k}"
    if isinstance(spec, list):
        spec = {"matrix": spec}
    if not isinstance(spec, dict):
        raise InvalidInput(f"{where}: expected an object")
    if "matrix" in spec:
        m = spec["matrix"]
        if isinstance(m, list) and len(m) == 2 and all(isinstance(r, list) and len(r) == 2 for r in m):
            m = [m[0][0], m[0][1], m[1][0], m[1][1]]
        if not isinstance(m, list) or len(m) != 4:
            raise InvalidInput(f"{where}: matrix must have four entries")
        a, b, c, d = (_finite(x, f"{where} matrix") for x in m)
        if a * d - b * c == 0:
            raise InvalidInput(f"{where}: singular matrix")
        return MoebiusMap.exact(a, b, c, d).to_floating(prec)
    try:
        att = _scalar(spec["attractive"], f"{where} attractive")
        rep = _scalar(spec["repulsive"], f"{where} repulsive")
        q = _finite(spec["multiplier"], f"{where} multiplier")
    except KeyError as exc:
        raise InvalidInput(f"{where}: missing field {exc}") from exc
    if not 0 < q.norm() < 1:
        raise InvalidInput(f"{where}: multiplier must satisfy 0 < |q| < 1")
    att = att if att is INF else to_mpc(att, prec)
    rep = rep if rep is INF else to_mpc(rep, prec)
    return MoebiusMap.from_fixed_points(att, rep, to_mpc(q, prec), prec)


def _circle(spec, k: int) -> Circle:
    if not isinstance(spec, dict) or "center" not in spec or "radius" not in spec:
        raise InvalidInput(f"circle {k}: needs center and radius")
    center = to_complex(_finite(spec["center"], f"circle {k} center"))
    r = to_complex(_finite(spec["radius"], f"circle {k} radius"))
    if r.imag != 0 or not r.real > 0:
        raise InvalidInput(f"circle {k}: radius must be a positive real")
    return Circle(center, r.real, bool(spec.get("outer", False)))


def group_from_dict(spec: dict, precision: Optional[int] = None) -> MarkedSchottkyGroup:
    if not isinstance(spec, dict):
        raise InvalidInput("group spec must be a JSON object")
    prec = int(precision or spec.get("precision_bits") or spec.get("precision") or default_precision())
    if prec < 64:
        raise InvalidInput("precision must be at least 64 bits")
    gens = spec.get("generators")
    if not isinstance(gens, list) or not gens:
        raise InvalidInput("group spec needs a nonempty 'generators' list")
    if "rank" in spec and spec["rank"] != len(gens):
        raise RankMismatch(f"rank {spec['rank']} but {len(gens)} generators")
    maps = tuple(_generator(g, prec, k) for k, g in enumerate(gens, start=1))
    circles = None
    if spec.get("circles") is not None:
        cs = spec["circles"]
        if not isinstance(cs, list) or len(cs) != 2 * len(maps):
            raise InvalidInput(f"expected {2 * len(maps)} circles")
        circles = tuple(_circle(c, k) for k, c in enumerate(cs))
    return MarkedSchottkyGroup(maps, circles, prec, str(spec.get("name", "")))


def load_group(source: Union[str, Path, dict], precision: Optional[int] = None) -> MarkedSchottkyGroup:
    """Read a group from a path, a bundled name, or an already parsed dict."""
    if isinstance(source, dict):
        return group_from_dict(source, precision)
    name = str(source)
    if name in BUNDLED and not Path(name).exists():
        return bundled(name, precision)
    try:
        text = Path(name).read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read group file {name}: {exc}") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{name}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return group_from_dict(spec, precision)


def bundled_spec(name: str) -> dict:
    if name not in BUNDLED:
        raise InvalidInput(f"unknown bundled group {name!r}; choose from {', '.join(BUNDLED)}")
    text = resources.files("schottky_zeta").joinpath("data").joinpath(f"{name}.json").read_text()
    return json.loads(text)


def bundled(name: str, precision: Optional[int] = None) -> MarkedSchottkyGroup:
    return group_from_dict(bundled_spec(name), precision)


def group_to_dict(group: MarkedSchottkyGroup) -> dict:
    gens = [{"matrix": [format_complex(x) for x in g.entries()]} for g in group.floating_generators]
    out = {"name": group.name, "rank": group.rank, "precision_bits": group.precision, "generators": gens}
    if group.circles is not None:
        out["circles"] = [c.to_json() for c in group.circles]
    return out


def apollonius_circles(attractive: complex, repulsive: complex, q: complex, s: float):
    """Circles ``(C_i, C_-i)`` for the map with the given fixed points and multiplier.

    In the coordinate ``w = (z - a)/(z - b)`` the map is ``w -> q w``; ``C_-i``
    is ``|w| = s`` around ``a`` and ``C_i`` is ``|w| = s/|q|`` around ``b``.
    """
    a, b = complex(attractive), complex(repulsive)

    def apollonius(k):
        center = (a - k * k * b) / (1 - k * k)
        radius = k * abs(a - b) / abs(1 - k * k)
        return Circle(center, radius)

    return apollonius(s / abs(q)), apollonius(s)
