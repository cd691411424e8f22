from typing import List, Tuple

from src.Functions.MomentumLattice import LatticeSite, canonicalize, parse_site

# Published listing of the orbits spanning Xi, one representative per orbit.
# Every orbit appears once; both chiralities of each are used.
REFERENCE_XI_ORBITS: Tuple[str, ...] = (
    "A(0,0)",
    "B(0,0)",
    "A(-1,0)", "A(0,-1)",
    "B(1,1)", "B(-1,0)", "B(0,-1)",
    "A(1,1)", "A(-1,-1)",
    "A(-2,0)", "A(0,-2)",
    "B(1,-2)", "B(-2,1)",
    "B(-1,-1)",
    "B(-2,0)", "B(0,-2)",
    "A(-3,1)", "A(-3,2)", "A(-1,-2)", "A(-2,-1)",
    "B(2,2)",
    "A(-3,0)", "A(0,-3)",
    "B(-3,1)", "B(-3,3)",
    "B(-2,-1)", "B(-2,4)",
    "A(-4,2)", "A(-2,-2)",
    "B(-3,0)", "B(-3,4)",
    "A(-4,1)", "A(-4,3)", "A(-3,-1)", "A(-3,4)",
    "B(-4,2)", "B(-4,3)",
    "A(-4,0)", "A(-4,4)",
    "B(-4,1)", "B(-4,4)",
)

# the two norm-7 orbits added on top of every orbit with |k|^2 <= 48
DESIGNATED_ORBITS: Tuple[str, ...] = ("B(-4,1)", "B(1,-4)")

# third norm-7 orbit; keeping it would give boundary sites two outside neighbours
CROSSED_OUT_ORBIT = "B(-2,-2)"

XI_SIZE = 81


def reference_orbit_sites() -> List[LatticeSite]:
    """Canonical representatives of the published listing."""
    return [canonicalize(parse_site(label)).site for label in REFERENCE_XI_ORBITS]


def designated_orbit_sites() -> List[LatticeSite]:
    return [canonicalize(parse_site(label)).site for label in DESIGNATED_ORBITS]


def crossed_out_site() -> LatticeSite:
    return canonicalize(parse_site(CROSSED_OUT_ORBIT)).site
