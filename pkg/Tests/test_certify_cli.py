import unittest
import sys
import csv
import json
import logging
import math
import tempfile
from pathlib import Path

# Add the project root directory to Python path
project_root = str(Path(__file__).parent.parent)
sys.path.append(project_root)

logging.basicConfig(level=logging.DEBUG, format='%(message)s', force=True)

from src.Simulations.certify import (
    FULL_GRID,
    CertificationReport,
    build_parser,
    main,
    write_series_files,
)


class TestParser(unittest.TestCase):
    def setUp(self):
        self.parser = build_parser()

    def test_defaults(self):
        args = self.parser.parse_args(["certify-all"])
        self.assertEqual(args.grid, FULL_GRID)
        self.assertEqual(args.eta_norm, "exact")
        self.assertEqual(args.eigensolver, "jacobi")
        self.assertFalse(args.survey)

    def test_orbit_flags_accumulate(self):
        args = self.parser.parse_args(["xi", "--add-orbit", "B(-2,-2)", "--drop-orbit", "B(-4,1)", "--check"])
        self.assertEqual(args.add_orbit, ["B(-2,-2)"])
        self.assertEqual(args.drop_orbit, ["B(-4,1)"])
        self.assertTrue(args.check)

    def test_command_required(self):
        with self.assertRaises(SystemExit):
            self.parser.parse_args([])


class TestCommands(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_series_order_zero(self):
        """At N = 0 both series are the constant 1."""
        files = write_series_files(0, str(self.out))
        with open(files["coefficients"], newline="") as handle:
            rows = list(csv.reader(handle))
        self.assertEqual(rows, [["power", "numerator", "denominator"], ["0", "1/1", "1/1"]])
        self.assertIn("||Psi^0||^2 = 1/1", Path(files["terms"]).read_text())

    def test_series_command(self):
        self.assertEqual(main(["series", "--order", "4", "--out", str(self.out)]), 0)
        with open(self.out / "series_coefficients.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(len(rows), 9)
        self.assertEqual(rows[2]["numerator"], "-3/1")

    def test_xi_check(self):
        report_path = self.out / "xi.json"
        self.assertEqual(main(["xi", "--check", "--out", str(report_path)]), 0)
        report = json.loads(report_path.read_text())
        self.assertEqual(report["mu_choice"]["mu_sq"], 49)
        self.assertEqual(report["mu_choice"]["mu"], "7/1")

    def test_crossed_out_orbit_fails_pipeline(self):
        report_path = self.out / "report.json"
        status = main(["certify-all", "--add-orbit", "B(-2,-2)", "--threads", "1", "--out", str(report_path)])
        self.assertEqual(status, 1)
        report = json.loads(report_path.read_text())
        self.assertEqual(report["failed_stage"], "verify_mu_choice")
        self.assertFalse(report["verdict"])
        self.assertIsNone(report["gap_certificate"])

    def test_coarse_full_grid_refused(self):
        report_path = self.out / "gap.json"
        status = main(["certify-gap", "--grid", "1000", "--threads", "1", "--out", str(report_path)])
        self.assertEqual(status, 1)
        self.assertEqual(json.loads(report_path.read_text())["failed_stage"], "sweep_and_certify")

    def test_certify_zero(self):
        report_path = self.out / "fermi.json"
        self.assertEqual(main(["certify-zero", "--out", str(report_path)]), 0)
        report = json.loads(report_path.read_text())
        self.assertEqual(report["bracket"], ["57/100", "61/100"])
        self.assertEqual(len(report["sign_certificates"]), 4)
        self.assertEqual(report["approximate_roots"]["note"], "non-rigorous")

    def test_certify_zero_verdict(self):
        report_path = self.out / "fermi.json"
        self.assertEqual(main(["certify-zero", "--out", str(report_path)]), 0)
        report = json.loads(report_path.read_text())
        self.assertTrue(report["verdict"])
        self.assertEqual(report["ingredients"]["epsilon_eff"], "1/281474976710656")

    def test_survey_exits_nonzero(self):
        """A survey certifies nothing, so its verdict is false and the exit status is 1."""
        report_path = self.out / "survey.json"
        status = main(["certify-all", "--survey", "--grid", "4", "--threads", "1", "--out", str(report_path)])
        self.assertEqual(status, 1)
        report = json.loads(report_path.read_text())
        self.assertFalse(report["verdict"])
        self.assertEqual(report["verdict_text"], "not certified (survey mode)")
        self.assertIsNone(report["failed_stage"])
        self.assertEqual(report["gap_certificate"]["grid"], 4)
        self.assertEqual(report["gap_certificate"]["nonzero_sector_size"], 80)
        self.assertEqual(report["ingredients"]["epsilon_eff"], "1/281474976710656")
        self.assertEqual(report["bracket"], ["57/100", "61/100"])

        gap_path = self.out / "gap_survey.json"
        self.assertEqual(main(["certify-gap", "--survey", "--grid", "4", "--threads", "1", "--out", str(gap_path)]), 1)
        self.assertFalse(json.loads(gap_path.read_text())["verdict"])

    def test_figures(self):
        """check_zero.csv is ordered worst >= base >= best; curves at alpha = 0 hold +/-1 and +/-sqrt(3)."""
        figures = self.out / "figures"
        self.assertEqual(main(["figures", "--out", str(figures), "--grid", "4", "--threads", "1"]), 0)
        with open(figures / "check_zero.csv", newline="") as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(len(rows), 201)
        middle = rows[100]
        self.assertEqual(float(middle["alpha"]), 0.6)
        self.assertGreater(float(middle["worst"]), float(middle["base"]))
        self.assertGreater(float(middle["base"]), float(middle["best"]))
        for row in rows:
            self.assertGreaterEqual(float(row["worst"]), float(row["best"]))

        with open(figures / "curves.csv", newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            curves = list(reader)
        self.assertEqual(header[0], "alpha")
        self.assertEqual(header[-1], "enclosure_radius")
        self.assertEqual(len(header), 83)
        self.assertEqual(len(curves), 5)
        at_zero = [float(x) for x in curves[0][1:-1]]
        self.assertEqual(float(curves[0][0]), 0.0)
        for target in (1.0, -1.0, math.sqrt(3), -math.sqrt(3)):
            self.assertTrue(any(abs(x - target) < 1e-12 for x in at_zero), f"{target} missing at alpha = 0")

    def test_report_carries_effective_epsilon(self):
        self.assertEqual(CertificationReport().ingredients["epsilon_eff"], "1/281474976710656")

    def test_report_round_trip(self):
        report = CertificationReport(command="xi")
        path = self.out / "nested" / "report.json"
        report.write(str(path))
        self.assertEqual(json.loads(path.read_text())["verdict_text"], "not certified")


if __name__ == '__main__':
    unittest.main()
