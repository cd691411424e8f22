import unittest
import sys
import os
import logging
import random
from fractions import Fraction
from pathlib import Path

import mpmath  # type: ignore

# Add the project root directory to Python path
project_root = str(Path(__file__).parent.parent)
sys.path.append(project_root)

logging.basicConfig(level=logging.DEBUG, format='%(message)s', force=True)

from src.Functions.Errors import Inconclusive, SignMismatch, WrongOrder
from src.Functions.FermiCertifier import (
    FermiCertifier,
    FermiCertifierConfig,
    approximate_roots,
    bracket_magic_angle,
    build_envelopes,
    certify_sign,
    eta_bound,
)
from src.Functions.PerturbationSeries import compute_series
from src.Functions.RadicalComplex import RadicalComplex, rc_to_float
from src.Functions.RationalPoly import RationalPoly

SLOW = os.environ.get("CERTIFY_SLOW_TESTS") == "1"


def rounded_coefficients(poly: RationalPoly):
    """Doubles nearest to each coefficient, as the certificate converts them."""
    values = []
    for c in poly.coefficients:
        if not isinstance(c, RadicalComplex):
            c = RadicalComplex.rational(c)
        values.append(rc_to_float(c)[0].real)
    return values


class TestEnvelopes(unittest.TestCase):
    def setUp(self):
        self.series = compute_series(8)
        self.worst, self.best = build_envelopes(self.series)

    def test_cleared_degree(self):
        self.assertEqual(self.worst.cleared.degree, 18)
        self.assertEqual(self.best.cleared.degree, 18)

    def test_envelope_values(self):
        """worst(0.61) = -0.020263 and best(0.57) = 0.029138 to five figures."""
        self.assertAlmostEqual(float(self.worst.evaluate_mp(Fraction(61, 100))), -0.020263, delta=5e-7)
        self.assertAlmostEqual(float(self.best.evaluate_mp(Fraction(57, 100))), 0.029138, delta=5e-7)

    def test_worst_minus_best_is_twice_error(self):
        rng = random.Random(2)
        with mpmath.workprec(128):
            for _ in range(100):
                alpha = Fraction(rng.randint(0, 7000), 10000)
                gap = self.worst.evaluate_mp(alpha) - self.best.evaluate_mp(alpha)
                error = self.worst.error_term(alpha).to_mpc(128).real
                self.assertLessEqual(abs(gap - 2 * error), mpmath.mpf(2) ** -100 * (1 + abs(gap)))

    def test_exact_and_mp_evaluation_agree(self):
        alpha = Fraction(3, 5)
        exact = self.worst.evaluate_exact(alpha).to_mpc(128).real
        self.assertAlmostEqual(float(exact), float(self.worst.evaluate_mp(alpha)), places=14)

    def test_eta_bound(self):
        self.assertEqual(eta_bound(0, Fraction(3, 20)).to_fraction(), 0)
        self.assertEqual(eta_bound(Fraction(1, 2), 1).to_fraction(), Fraction(1, 2) ** 9 * 4)
        with self.assertRaises(ValueError):
            eta_bound(Fraction(3, 4), 1)

    def test_rounded_eta_norm_is_weaker(self):
        """3/20 >= ||H1 Psi^8||, so the rounded worst envelope sits above the exact one."""
        worst_rounded, _ = build_envelopes(self.series, FermiCertifierConfig(eta_norm="rounded"))
        alpha = Fraction(61, 100)
        self.assertGreaterEqual(worst_rounded.evaluate_mp(alpha), self.worst.evaluate_mp(alpha))
        with self.assertRaises(ValueError):
            build_envelopes(self.series, FermiCertifierConfig(eta_norm="loose"))

    def test_wrong_order(self):
        with self.assertRaises(WrongOrder):
            build_envelopes(compute_series(6))


class TestSignCertificates(unittest.TestCase):
    def setUp(self):
        self.series = compute_series(8)
        self.worst, self.best = build_envelopes(self.series)

    def test_worst_case_negative(self):
        for form in ("cleared", "direct"):
            certificate = certify_sign(self.worst, Fraction(61, 100), -1, form)
            self.assertEqual(certificate.certified_sign, -1)
            self.assertLess(certificate.bound, 1e-10)
        direct = certify_sign(self.worst, Fraction(61, 100), -1, "direct")
        self.assertAlmostEqual(direct.value, -0.020263, delta=5e-7)
        cleared = certify_sign(self.worst, Fraction(61, 100), -1, "cleared")
        self.assertAlmostEqual(cleared.value / (15 - 20 * 0.61) ** 2, -0.020263, delta=5e-7)
        self.assertTrue(cleared.reference_bound_holds)

    def test_best_case_positive(self):
        certificate = certify_sign(self.best, Fraction(57, 100), 1, "direct")
        self.assertEqual(certificate.certified_sign, 1)
        self.assertAlmostEqual(certificate.value, 0.029138, delta=5e-7)
        self.assertLess(certify_sign(self.best, Fraction(57, 100), 1, "cleared").bound, 1e-10)

    def test_certificate_serializes(self):
        payload = certify_sign(self.worst, Fraction(61, 100), -1).to_dict()
        self.assertEqual(payload["alpha"], "61/100")
        self.assertEqual(payload["certified_sign"], "-")
        self.assertEqual(payload["degree"], 18)

    def test_zero_polynomial_inconclusive(self):
        with self.assertRaises(Inconclusive):
            certify_sign(RationalPoly(), Fraction(1, 2), 1)

    def test_wrong_expected_sign(self):
        with self.assertRaises(SignMismatch):
            certify_sign(self.worst, Fraction(61, 100), 1)

    def test_bad_arguments(self):
        with self.assertRaises(ValueError):
            certify_sign(self.worst, 2, -1)
        with self.assertRaises(ValueError):
            certify_sign(self.worst, Fraction(61, 100), 0)
        with self.assertRaises(ValueError):
            certify_sign(self.worst, Fraction(61, 100), -1, form="sideways")

    def test_tripled_error_fails(self):
        config = FermiCertifierConfig(envelope_scale=Fraction(3))
        worst, best = build_envelopes(self.series, config)
        with self.assertRaises((Inconclusive, SignMismatch)):
            bracket_magic_angle(worst, best, config)

    def test_bracket(self):
        self.assertEqual(bracket_magic_angle(self.worst, self.best), (Fraction(57, 100), Fraction(61, 100)))

    def test_bracket_without_error_term(self):
        """With E = 0 the envelopes reduce to the truncated numerator, which still changes sign."""
        config = FermiCertifierConfig(envelope_scale=Fraction(0))
        worst, best = build_envelopes(self.series, config)
        self.assertEqual(worst.cleared, best.cleared)
        self.assertEqual(bracket_magic_angle(worst, best, config), (Fraction(57, 100), Fraction(61, 100)))

    def test_perturbed_coefficients_keep_sign(self):
        """Moving each rounded coefficient by bound/(n+1) cannot flip a certified sign."""
        rng = random.Random(11)
        for envelope, point, expected in ((self.worst, Fraction(61, 100), -1), (self.best, Fraction(57, 100), 1)):
            certificate = certify_sign(envelope, point, expected, "cleared")
            coefficients = [Fraction(c) for c in rounded_coefficients(envelope.cleared)]
            step = Fraction(certificate.bound) / len(coefficients)
            for _ in range(200):
                perturbed = [c + rng.choice((-1, 1)) * step for c in coefficients]
                value = RationalPoly(perturbed).evaluate(point)
                self.assertEqual(1 if value > 0 else -1, certificate.certified_sign)

    def test_signs_agree_with_128_bit_evaluation(self):
        """Every issued certificate matches the sign of the exact cleared form at 128 bits."""
        report = FermiCertifier(self.series).certify()
        for certificate in report.certificates:
            envelope = self.worst if certificate.envelope == "worst" else self.best
            exact = envelope.cleared.evaluate(certificate.alpha)
            if not isinstance(exact, RadicalComplex):
                exact = RadicalComplex.rational(exact)
            reference = exact.to_mpc(128).real
            self.assertNotEqual(reference, 0)
            self.assertEqual(1 if reference > 0 else -1, certificate.certified_sign)
            if certificate.form == "cleared":
                self.assertLessEqual(abs(certificate.value - float(reference)), certificate.bound)
            else:
                direct = envelope.evaluate_mp(certificate.alpha)
                self.assertLessEqual(abs(certificate.value - float(direct)), certificate.bound)


class TestRoots(unittest.TestCase):
    def setUp(self):
        self.certifier = FermiCertifier(compute_series(8))

    def test_approximate_roots(self):
        roots = self.certifier.roots()
        self.assertAlmostEqual(roots["base"][0], 0.58597, delta=1e-5)
        self.assertAlmostEqual(roots["worst"][0], 0.60177, delta=1e-5)
        self.assertAlmostEqual(roots["best"][0], 0.57683, delta=1e-5)

    def test_roots_of_simple_polynomial(self):
        """a^2 - 9/25 has its only root on [1/2, 7/10] at 3/5."""
        roots = approximate_roots(RationalPoly([Fraction(-9, 25), 0, 1]))
        self.assertEqual(len(roots), 1)
        self.assertAlmostEqual(roots[0], 0.6, places=12)

    def test_full_certification(self):
        report = self.certifier.certify()
        self.assertEqual(len(report.certificates), 4)
        self.assertEqual(report.bracket, (Fraction(57, 100), Fraction(61, 100)))
        self.assertLess(report.envelope_values["worst"], 0)
        self.assertGreater(report.envelope_values["best"], 0)

    @unittest.skipUnless(SLOW, "set CERTIFY_SLOW_TESTS=1 for the order-40 series")
    def test_order_40_root(self):
        """Truncating the numerator at order 40 gives the first zero to 13 significant figures."""
        roots = approximate_roots(compute_series(40).numerator_series())
        self.assertAlmostEqual(roots[0], 0.58566355838956, delta=1e-13)

    def test_check_zero_rows(self):
        rows = self.certifier.check_zero_rows(points=5)
        self.assertEqual([row["alpha"] for row in rows], [0.5, 0.55, 0.6, 0.65, 0.7])
        for row in rows:
            self.assertAlmostEqual(row["worst"] - row["base"], row["base"] - row["best"], places=12)
            self.assertGreaterEqual(row["worst"], row["best"])


if __name__ == '__main__':
    unittest.main()
