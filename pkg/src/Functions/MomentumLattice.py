"""Momentum-space honeycomb at the moire K point.

A sites are m*b1 + n*b2 and B sites are q1 + m*b1 + n*b2, with
b1 = (sqrt(3)/2, 3/2), b2 = (-sqrt(3)/2, 3/2) and q1 = (0, -1).
All geometry is done in integer (m, n) coordinates.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import List, NamedTuple, Tuple

from src.Functions.Errors import OriginHasNoPhase
from src.Functions.RadicalComplex import RadicalComplex


class LatticeSite(NamedTuple):
    sublattice: str  # "A" or "B"
    m: int
    n: int

    def __str__(self) -> str:
        return f"{self.sublattice}({self.m},{self.n})"


class OrbitIndex(NamedTuple):
    """Label of a chiral basis function: canonical orbit representative and chirality."""
    site: LatticeSite
    chirality: int

    @property
    def is_origin(self) -> bool:
        return self.site == ORIGIN_SITE

    def partner(self) -> "OrbitIndex":
        """Same orbit, opposite chirality (the origin is its own partner)."""
        if self.is_origin:
            return self
        return OrbitIndex(self.site, -self.chirality)

    def __str__(self) -> str:
        if self.is_origin:
            return "χ^{0}"
        return f"χ^{{{self.site},{self.chirality:+d}}}"


ORIGIN_SITE = LatticeSite("A", 0, 0)
ORIGIN = OrbitIndex(ORIGIN_SITE, 1)

_SITE_PATTERN = re.compile(r"^\s*([AB])\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*$")


def parse_site(label: str) -> LatticeSite:
    """Parse `A(m,n)` / `B(m,n)`."""
    match = _SITE_PATTERN.match(label)
    if not match:
        raise ValueError(f"malformed site label {label!r}, expected A(m,n) or B(m,n)")
    return LatticeSite(match.group(1), int(match.group(2)), int(match.group(3)))


def norm_sq(site: LatticeSite) -> int:
    m, n = site.m, site.n
    quadratic = 3 * (m * m + m * n + n * n)
    if site.sublattice == "A":
        return quadratic
    return quadratic - 3 * (m + n) + 1


def cartesian(site: LatticeSite) -> Tuple[Fraction, Fraction]:
    """Exact coordinates as (x / sqrt(3), y)."""
    x_over_sqrt3 = Fraction(site.m - site.n, 2)
    y = Fraction(3 * (site.m + site.n), 2)
    if site.sublattice == "B":
        y -= 1
    return x_over_sqrt3, y


def rotate(site: LatticeSite) -> LatticeSite:
    """Rotation by -2*pi/3: b1 -> -b2, b2 -> b1 - b2, q1 -> q1 + b2."""
    m, n = site.m, site.n
    if site.sublattice == "A":
        return LatticeSite("A", n, -m - n)
    return LatticeSite("B", n, 1 - m - n)


def orbit(site: LatticeSite) -> Tuple[LatticeSite, ...]:
    members = [site]
    current = rotate(site)
    while current != site:
        members.append(current)
        current = rotate(current)
    return tuple(members)


def orbit_size(site: LatticeSite) -> int:
    return 1 if site == ORIGIN_SITE else 3


@lru_cache(maxsize=None)
def z_hat(site: LatticeSite) -> RadicalComplex:
    """Unit complex (v1 + i v2)/|v| of the site's momentum vector."""
    if site == ORIGIN_SITE:
        raise OriginHasNoPhase("the origin A(0,0) has no direction")
    x_over_sqrt3, y = cartesian(site)
    size = norm_sq(site)
    z = RadicalComplex({3: (x_over_sqrt3, 0), 1: (0, y)})
    return z * RadicalComplex.sqrt(size) / size


@lru_cache(maxsize=None)
def canonicalize(site: LatticeSite, chirality: int = 1) -> OrbitIndex:
    if chirality not in (1, -1):
        raise ValueError(f"chirality must be +1 or -1, got {chirality}")
    representative = min(orbit(site))
    if representative == ORIGIN_SITE:
        return ORIGIN
    return OrbitIndex(representative, chirality)


def hopping_neighbours(site: LatticeSite) -> List[LatticeSite]:
    """The three nearest neighbours, ordered by hopping direction q1, q2, q3.

    A sites hop to s + q_j, B sites to s - q_j.
    """
    m, n = site.m, site.n
    if site.sublattice == "A":
        return [LatticeSite("B", m, n), LatticeSite("B", m + 1, n), LatticeSite("B", m, n + 1)]
    return [LatticeSite("A", m, n), LatticeSite("A", m - 1, n), LatticeSite("A", m, n - 1)]


def enumerate_orbits(max_norm_sq: int) -> List[LatticeSite]:
    """Canonical representatives of every orbit with norm_sq <= max_norm_sq,
    sorted by (norm_sq, representative)."""
    reach = isqrt(max(max_norm_sq, 0)) + 2
    found = set()
    for sublattice in ("A", "B"):
        for m in range(-reach, reach + 1):
            for n in range(-reach, reach + 1):
                site = LatticeSite(sublattice, m, n)
                if norm_sq(site) <= max_norm_sq:
                    found.add(canonicalize(site).site)
    return sorted(found, key=lambda s: (norm_sq(s), s))
