import unittest
import sys
import logging
import random
from fractions import Fraction
from pathlib import Path

# Add the project root directory to Python path
project_root = str(Path(__file__).parent.parent)
sys.path.append(project_root)

logging.basicConfig(level=logging.DEBUG, format='%(message)s', force=True)

from src.Functions.RadicalComplex import SQRT3, RadicalComplex
from src.Functions.RationalPoly import RationalPoly


class TestRationalPoly(unittest.TestCase):
    def setUp(self):
        self.rng = random.Random(3)
        self.p = RationalPoly([1, 0, -3, 0, 1])   # 1 - 3a^2 + a^4
        self.q = RationalPoly([Fraction(1, 2), Fraction(-2, 3)])

    def test_trailing_zeros_trimmed(self):
        self.assertEqual(RationalPoly([1, 2, 0, 0]).degree, 1)
        self.assertEqual(RationalPoly([0, 0]).degree, -1)
        self.assertTrue(RationalPoly().is_zero())

    def test_evaluate_exact(self):
        """1 - 3a^2 + a^4 at a = 1/2 is 5/16."""
        self.assertEqual(self.p.evaluate(Fraction(1, 2)), Fraction(5, 16))
        self.assertEqual(self.p(0), 1)

    def test_multiplication_is_convolution(self):
        for _ in range(20):
            a = [Fraction(self.rng.randint(-9, 9), self.rng.randint(1, 9)) for _ in range(self.rng.randint(1, 6))]
            b = [Fraction(self.rng.randint(-9, 9), self.rng.randint(1, 9)) for _ in range(self.rng.randint(1, 6))]
            expected = [Fraction(0)] * (len(a) + len(b) - 1)
            for i, x in enumerate(a):
                for j, y in enumerate(b):
                    expected[i + j] += x * y
            self.assertEqual(RationalPoly(a) * RationalPoly(b), RationalPoly(expected))

    def test_arithmetic_identities(self):
        self.assertEqual(self.p - self.p, RationalPoly())
        self.assertEqual((self.p + self.q) * self.q, self.p * self.q + self.q * self.q)
        self.assertEqual(self.q ** 2, self.q * self.q)
        self.assertEqual(self.p.scale(2).coefficient(4), 2)
        self.assertEqual(RationalPoly.monomial(3, 5).coefficients, [0, 0, 0, 5])
        with self.assertRaises(ValueError):
            RationalPoly.monomial(-1)

    def test_radical_coefficients(self):
        """Coefficients may be radicals; evaluation stays exact."""
        p = RationalPoly([1, SQRT3])
        self.assertFalse(p.is_rational())
        self.assertEqual(p.evaluate(Fraction(2)), RadicalComplex({1: (1, 0), 3: (2, 0)}))
        squared = p * p
        self.assertTrue(RationalPoly([squared.coefficient(0), 0, squared.coefficient(2)]).is_rational())
        self.assertEqual(squared.coefficient(2), 3)
        with self.assertRaises(ValueError):
            p.to_rational()

    def test_equal_polynomials_hash_alike(self):
        """Fraction and rational radical coefficients give the same polynomial and hash."""
        plain = RationalPoly([3, Fraction(1, 2)])
        radical = RationalPoly([RadicalComplex.rational(3), RadicalComplex.rational(Fraction(1, 2))])
        self.assertEqual(plain, radical)
        self.assertEqual(hash(plain), hash(radical))
        self.assertEqual(len({plain, radical}), 1)


if __name__ == '__main__':
    unittest.main()
