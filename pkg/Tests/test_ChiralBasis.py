import unittest
import sys
import logging
import cmath
import math
import random
from fractions import Fraction
from pathlib import Path

import numpy as np  # type: ignore

# Add the project root directory to Python path
project_root = str(Path(__file__).parent.parent)
sys.path.append(project_root)

logging.basicConfig(level=logging.DEBUG, format='%(message)s', force=True)

from src.Functions.ChiralBasis import (
    PHASE,
    ZERO_MODE,
    ChiralVector,
    apply_H0,
    apply_H0_inv_perp,
    apply_H1,
    apply_step,
    conj_reflect,
    inner,
    pairing,
)
from src.Functions.Errors import WrongChirality
from src.Functions.MomentumLattice import (
    ORIGIN,
    LatticeSite,
    OrbitIndex,
    canonicalize,
    enumerate_orbits,
    orbit,
)
from src.Functions.PerturbationSeries import compute_series
from src.Functions.RadicalComplex import I, ONE, SQRT3, RadicalComplex, rc_to_float

REACH = 6
SQ3 = math.sqrt(3)
B1 = np.array([SQ3 / 2, 1.5])
B2 = np.array([-SQ3 / 2, 1.5])
Q = [np.array([0.0, -1.0]), np.array([SQ3 / 2, 0.5]), np.array([-SQ3 / 2, 0.5])]
HOP_PHASES = [1, cmath.exp(2j * math.pi / 3), cmath.exp(-2j * math.pi / 3)]

Q1_SITE = LatticeSite("B", 0, 0)
MINUS_B1 = OrbitIndex(LatticeSite("A", -1, 0), 1)
MINUS_B2 = canonicalize(LatticeSite("A", 0, -1), 1)


def index(site: LatticeSite, chirality: int) -> OrbitIndex:
    return canonicalize(site, chirality)


class FullLatticeModel:
    """Plane waves on every honeycomb site in a box, H1 as literal hopping along q1, q2, q3."""

    def __init__(self, reach: int = REACH):
        self.sites = [
            LatticeSite(s, m, n)
            for s in "AB"
            for m in range(-reach, reach + 1)
            for n in range(-reach, reach + 1)
        ]
        self.by_position = {self._key(self.vector(s)): s for s in self.sites}
        self.slots = {}
        for site in self.sites:
            for chirality in ((1,) if self.is_origin(site) else (1, -1)):
                self.slots[(site, chirality)] = len(self.slots)
        self.matrix = self._hopping()

    @staticmethod
    def is_origin(site: LatticeSite) -> bool:
        return site == LatticeSite("A", 0, 0)

    @staticmethod
    def vector(site: LatticeSite) -> np.ndarray:
        v = site.m * B1 + site.n * B2
        return v + Q[0] if site.sublattice == "B" else v

    @staticmethod
    def _key(v: np.ndarray):
        return (round(float(v[0]) * 1e6), round(float(v[1]) * 1e6))

    def unit(self, site: LatticeSite) -> complex:
        v = self.vector(site)
        return complex(v[0], v[1]) / math.hypot(v[0], v[1])

    def _hopping(self) -> np.ndarray:
        size = len(self.slots)
        h = np.zeros((size, size), dtype=np.complex128)
        for site in self.sites:
            sign = 1 if site.sublattice == "A" else -1
            for j, q in enumerate(Q):
                target = self.by_position.get(self._key(self.vector(site) + sign * q))
                if target is None:
                    continue
                if not self.is_origin(target):
                    h[self.slots[(target, -1)], self.slots[(site, 1)]] += HOP_PHASES[j] * self.unit(target).conjugate()
                if not self.is_origin(site):
                    h[self.slots[(target, 1)], self.slots[(site, -1)]] += HOP_PHASES[j].conjugate() * self.unit(site)
        return h

    def symmetric(self, orbit_index: OrbitIndex) -> np.ndarray:
        """Uniform superposition over the rotation orbit, normalized."""
        column = np.zeros(len(self.slots), dtype=np.complex128)
        members = orbit(orbit_index.site)
        for member in members:
            column[self.slots[(member, orbit_index.chirality)]] = 1 / math.sqrt(len(members))
        return column

    def embed(self, v: ChiralVector) -> np.ndarray:
        total = np.zeros(len(self.slots), dtype=np.complex128)
        for key, value in v.items():
            total += rc_to_float(value)[0] * self.symmetric(key)
        return total


class TestH1AgainstFullLattice(unittest.TestCase):
    def setUp(self):
        self.model = FullLatticeModel()

    def test_orbit_rule_matches_hopping_model(self):
        """Orbit-level H1 equals the symmetrized full-lattice hopping for every orbit with |k|^2 <= 27."""
        checked = 0
        for site in enumerate_orbits(27):
            for chirality in ((1,) if site == LatticeSite("A", 0, 0) else (1, -1)):
                key = index(site, chirality)
                expected = self.model.matrix @ self.model.symmetric(key)
                actual = self.model.embed(apply_H1(ChiralVector.basis(key)))
                np.testing.assert_allclose(actual, expected, atol=1e-12)
                checked += 1
        self.assertGreater(checked, 40)

    def test_hopping_model_is_hermitian(self):
        np.testing.assert_allclose(self.model.matrix, self.model.matrix.conj().T, atol=1e-14)


class TestOperators(unittest.TestCase):
    def setUp(self):
        self.q1_plus = ChiralVector.basis(OrbitIndex(Q1_SITE, 1))
        self.q1_minus = ChiralVector.basis(OrbitIndex(Q1_SITE, -1))
        self.rng = random.Random(11)

    def random_vector(self, terms: int = 6) -> ChiralVector:
        keys = [index(s, c) for s in enumerate_orbits(27) for c in (1, -1)]
        chosen = self.rng.sample(sorted(set(keys)), terms)
        return ChiralVector({
            key: RadicalComplex({1: (Fraction(self.rng.randint(-5, 5), 3), Fraction(self.rng.randint(-5, 5), 2)),
                                 3: (Fraction(self.rng.randint(-3, 3), 7), 0)})
            for key in chosen
        })

    def test_H0(self):
        """q1 pairs with norm 1, the zero mode is annihilated, -b1 carries sqrt3."""
        self.assertEqual(apply_H0(self.q1_plus), self.q1_minus)
        self.assertFalse(apply_H0(ZERO_MODE))
        minus_b1 = ChiralVector.basis(OrbitIndex(MINUS_B1.site, -1))
        self.assertEqual(apply_H0(minus_b1), ChiralVector.basis(MINUS_B1, SQRT3))

    def test_H0_inverse_on_complement(self):
        self.assertEqual(apply_H0_inv_perp(self.q1_minus), self.q1_plus)
        self.assertFalse(apply_H0_inv_perp(ZERO_MODE))
        site = LatticeSite("B", 0, -1)   # q1 - b2, |k|^2 = 7
        result = apply_H0_inv_perp(ChiralVector.basis(index(site, 1)))
        self.assertEqual(result, ChiralVector.basis(index(site, -1), RadicalComplex({7: (Fraction(1, 7), 0)})))

    def test_H1_special_rules(self):
        """H1 chi^0 = sqrt3 i chi^{q1,-1}; H1 chi^{q1,-1} = -i(sqrt3 chi^0 + e^{-i phi} chi^{-b1} + e^{i phi} chi^{-b2})."""
        self.assertEqual(apply_H1(ZERO_MODE), ChiralVector.basis(OrbitIndex(Q1_SITE, -1), SQRT3 * I))
        expected = ChiralVector({
            ORIGIN: -I * SQRT3,
            MINUS_B1: -I * PHASE.conjugate(),
            MINUS_B2: -I * PHASE,
        })
        self.assertEqual(apply_H1(self.q1_minus), expected)

    def test_step(self):
        """step(chi^0) = -sqrt3 i chi^{q1,+1}; step(chi^{q1,+1}) is Psi^2 / (-sqrt3 i)."""
        self.assertEqual(apply_step(ZERO_MODE), ChiralVector.basis(OrbitIndex(Q1_SITE, 1), -SQRT3 * I))
        self.assertFalse(apply_step(ChiralVector()))
        scale = (-SQRT3 * I).invert()
        psi2 = ChiralVector({
            MINUS_B1: RadicalComplex({3: (Fraction(1, 2), 0), 1: (0, Fraction(-1, 2))}),
            MINUS_B2: RadicalComplex({3: (Fraction(1, 2), 0), 1: (0, Fraction(1, 2))}),
        })
        self.assertEqual(apply_step(self.q1_plus), psi2.scale(scale))

    def test_step_is_composite(self):
        for _ in range(20):
            v = self.random_vector()
            self.assertEqual(apply_step(v), -apply_H0_inv_perp(apply_H1(v)))

    def test_inner_products(self):
        psi = compute_series(2)
        self.assertEqual(inner(ZERO_MODE, ZERO_MODE), 1)
        self.assertEqual(inner(psi.term(1), psi.term(1)), 3)
        self.assertEqual(inner(psi.term(2), psi.term(2)), 2)
        self.assertEqual(inner(self.q1_plus, self.q1_minus), 0)

    def test_conj_reflect(self):
        psi = compute_series(2)
        self.assertEqual(conj_reflect(psi.term(1)), ChiralVector.basis(OrbitIndex(Q1_SITE, 1), SQRT3 * I))
        real = ChiralVector({MINUS_B1: ONE, MINUS_B2: SQRT3})
        self.assertEqual(conj_reflect(real), real)
        self.assertEqual(pairing(psi.term(2), psi.term(2)), 1)
        with self.assertRaises(WrongChirality):
            conj_reflect(self.q1_minus)

    def test_chirality_flip(self):
        for _ in range(20):
            v = self.random_vector()
            plus = v.restrict(k for k, _ in v.items() if k.chirality == 1 and not k.is_origin)
            self.assertLessEqual(apply_H0(plus).chiralities(), {-1})
            self.assertLessEqual(apply_H1(plus).chiralities(), {-1})

    def test_H1_self_adjoint(self):
        for _ in range(20):
            u, v = self.random_vector(), self.random_vector()
            self.assertEqual(inner(u, apply_H1(v)), inner(v, apply_H1(u)).conjugate())

    def test_step_norm_bound(self):
        """||step v||^2 <= 9 ||v||^2."""
        for _ in range(100):
            v = self.random_vector(self.rng.randint(1, 8))
            stepped = apply_step(v)
            ratio_ok = inner(stepped, stepped).to_fraction() <= 9 * inner(v, v).to_fraction()
            self.assertTrue(ratio_ok)

    def test_describe(self):
        text = apply_step(ZERO_MODE).describe()
        self.assertIn("χ^{B(0,0),+1}", text)
        self.assertEqual(ChiralVector().describe(), "0")


if __name__ == '__main__':
    unittest.main()
