"""Invariants of Schottky groups: class products, zeta values, periods, Eichler pairings and Tate-curve series."""

from .errors import SchottkyError
from .groups import bundled, load_group
from .moebius import MarkedSchottkyGroup, MoebiusMap, fixed_points, multiplier, normalize_marking, validate_schottky
from .products import check_ratio_identity, constants, f1, fk, modified_ruelle, ruelle_zeta
from .words import enumerate_classes

__version__ = "0.1.0"

__all__ = [
    "SchottkyError",
    "MarkedSchottkyGroup",
    "MoebiusMap",
    "bundled",
    "load_group",
    "fixed_points",
    "multiplier",
    "normalize_marking",
    "validate_schottky",
    "enumerate_classes",
    "f1",
    "fk",
    "ruelle_zeta",
    "modified_ruelle",
    "check_ratio_identity",
    "constants",
]
