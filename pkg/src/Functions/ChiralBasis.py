from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Tuple

from src.Functions.Errors import WrongChirality
from src.Functions.MomentumLattice import (
    ORIGIN,
    ORIGIN_SITE,
    LatticeSite,
    OrbitIndex,
    canonicalize,
    hopping_neighbours,
    norm_sq,
    orbit_size,
    z_hat,
)
from src.Functions.RadicalComplex import ONE, ZERO, RadicalComplex

# e^{i*phi} with phi = 2*pi/3
PHASE = RadicalComplex({1: (Fraction(-1, 2), 0), 3: (0, Fraction(1, 2))})
HOPPING_PHASES = (ONE, PHASE, PHASE.conjugate())

Hop = Tuple[OrbitIndex, RadicalComplex]


class ChiralVector:
    """Sparse vector in the chiral basis; immutable, zero coefficients never stored."""

    __slots__ = ("_entries",)

    def __init__(self, entries: Optional[Mapping[OrbitIndex, RadicalComplex]] = None):
        self._entries: Dict[OrbitIndex, RadicalComplex] = {
            index: value for index, value in (entries or {}).items() if value
        }

    @classmethod
    def basis(cls, index: OrbitIndex, coefficient: RadicalComplex = ONE) -> "ChiralVector":
        return cls({index: coefficient})

    @classmethod
    def from_hops(cls, pieces: Iterable[Hop]) -> "ChiralVector":
        acc: Dict[OrbitIndex, RadicalComplex] = {}
        for index, value in pieces:
            acc[index] = acc[index] + value if index in acc else value
        return cls(acc)

    @property
    def entries(self) -> Dict[OrbitIndex, RadicalComplex]:
        return dict(self._entries)

    def items(self) -> Iterator[Tuple[OrbitIndex, RadicalComplex]]:
        return iter(self._entries.items())

    def support(self) -> List[OrbitIndex]:
        return sorted(self._entries)

    def chiralities(self) -> set:
        return {index.chirality for index in self._entries}

    def __getitem__(self, index: OrbitIndex) -> RadicalComplex:
        return self._entries.get(index, ZERO)

    def __contains__(self, index: OrbitIndex) -> bool:
        return index in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def __add__(self, other: "ChiralVector") -> "ChiralVector":
        acc = dict(self._entries)
        for index, value in other._entries.items():
            acc[index] = acc[index] + value if index in acc else value
        return ChiralVector(acc)

    def __neg__(self) -> "ChiralVector":
        return ChiralVector({index: -value for index, value in self._entries.items()})

    def __sub__(self, other: "ChiralVector") -> "ChiralVector":
        return self + (-other)

    def scale(self, factor) -> "ChiralVector":
        if not isinstance(factor, RadicalComplex):
            factor = RadicalComplex.rational(Fraction(factor))
        if not factor:
            return ChiralVector()
        return ChiralVector({index: value * factor for index, value in self._entries.items()})

    __mul__ = scale
    __rmul__ = scale

    def restrict(self, indices: Iterable[OrbitIndex]) -> "ChiralVector":
        keep = set(indices)
        return ChiralVector({i: v for i, v in self._entries.items() if i in keep})

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChiralVector):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(frozenset(self._entries.items()))

    def describe(self) -> str:
        """One `coefficient · χ^{site,chirality}` line per stored entry."""
        if not self._entries:
            return "0"
        ordered = sorted(self._entries, key=lambda i: (norm_sq(i.site), i))
        return "\n".join(f"{self._entries[i]} · {i}" for i in ordered)

    def __repr__(self) -> str:
        return f"ChiralVector({len(self._entries)} entries)"


@lru_cache(maxsize=None)
def root_norm(site: LatticeSite) -> RadicalComplex:
    return RadicalComplex.sqrt(norm_sq(site))


@lru_cache(maxsize=None)
def inverse_root_norm(site: LatticeSite) -> RadicalComplex:
    return root_norm(site).invert()


def _orbit_weight(source_size: int, target_size: int) -> RadicalComplex:
    if source_size == target_size:
        return ONE
    return RadicalComplex.sqrt(Fraction(source_size, target_size))


@lru_cache(maxsize=None)
def h1_hops(index: OrbitIndex) -> Tuple[Hop, ...]:
    """Image of one chiral basis function under H1, as (index, coefficient) pairs.

    +1 functions hop with amplitude p_j * conj(z_hat(target)), -1 functions with
    conj(p_j) * z_hat(source); both weighted by sqrt(|source orbit|/|target orbit|).
    A -1 image at the origin vanishes.
    """
    source = index.site
    source_size = orbit_size(source)
    acc: Dict[OrbitIndex, RadicalComplex] = {}
    for j, target in enumerate(hopping_neighbours(source)):
        if index.chirality == 1:
            if target == ORIGIN_SITE:
                continue
            image = canonicalize(target, -1)
            amplitude = HOPPING_PHASES[j] * z_hat(target).conjugate()
        else:
            image = canonicalize(target, 1)
            amplitude = HOPPING_PHASES[j].conjugate() * z_hat(source)
        amplitude = amplitude * _orbit_weight(source_size, orbit_size(target))
        acc[image] = acc[image] + amplitude if image in acc else amplitude
    return tuple(sorted((i, v) for i, v in acc.items() if v))


@lru_cache(maxsize=None)
def step_hops(index: OrbitIndex) -> Tuple[Hop, ...]:
    """Image of one basis function under -P(H0)^{-1}P H1."""
    return tuple(
        (image.partner(), -(value * inverse_root_norm(image.site)))
        for image, value in h1_hops(index)
        if not image.is_origin
    )


class ChiralOperators:
    """Exact actions of H0, P(H0)^{-1}P, H1 and the series step on chiral vectors."""

    @staticmethod
    def apply_H0(v: ChiralVector) -> ChiralVector:
        return ChiralVector({
            index.partner(): value * root_norm(index.site)
            for index, value in v.items()
            if not index.is_origin
        })

    @staticmethod
    def apply_H0_inv_perp(v: ChiralVector) -> ChiralVector:
        return ChiralVector({
            index.partner(): value * inverse_root_norm(index.site)
            for index, value in v.items()
            if not index.is_origin
        })

    @staticmethod
    def apply_H1(v: ChiralVector) -> ChiralVector:
        return ChiralVector.from_hops(
            (image, value * amplitude)
            for index, value in v.items()
            for image, amplitude in h1_hops(index)
        )

    @staticmethod
    def apply_step(v: ChiralVector) -> ChiralVector:
        return ChiralVector.from_hops(
            (image, value * amplitude)
            for index, value in v.items()
            for image, amplitude in step_hops(index)
        )

    @staticmethod
    def inner(u: ChiralVector, v: ChiralVector) -> RadicalComplex:
        """Sum of conj(u_i) * v_i."""
        total = ZERO
        if len(u) > len(v):
            for index, value in v.items():
                if index in u:
                    total = total + u[index].conjugate() * value
        else:
            for index, value in u.items():
                if index in v:
                    total = total + value.conjugate() * v[index]
        return total

    @staticmethod
    def conj_reflect(v: ChiralVector) -> ChiralVector:
        """f(r) -> conj(f(-r)); chirality +1 basis functions are fixed by it."""
        if -1 in v.chiralities():
            raise WrongChirality("conj_reflect is only defined on chirality +1 vectors")
        return ChiralVector({index: value.conjugate() for index, value in v.items()})

    @staticmethod
    def pairing(u: ChiralVector, v: ChiralVector) -> RadicalComplex:
        """<conj_reflect(u), v>, i.e. the unconjugated sum of u_i * v_i."""
        return ChiralOperators.inner(ChiralOperators.conj_reflect(u), v)


apply_H0 = ChiralOperators.apply_H0
apply_H0_inv_perp = ChiralOperators.apply_H0_inv_perp
apply_H1 = ChiralOperators.apply_H1
apply_step = ChiralOperators.apply_step
inner = ChiralOperators.inner
conj_reflect = ChiralOperators.conj_reflect
pairing = ChiralOperators.pairing

ZERO_MODE = ChiralVector.basis(ORIGIN)
