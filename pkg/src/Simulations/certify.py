import argparse
import csv
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from src.Functions.Errors import CertificationError
from src.Functions.FermiCertifier import FermiCertifier, FermiCertifierConfig, FermiReport
from src.Functions.GapCertifier import (
    GapCertificate,
    GapCertifierConfig,
    MuChoice,
    XiBasis,
    build_xi,
    check_decomposition,
    sweep_and_certify,
    verify_mu_choice,
)
from src.Functions.PerturbationSeries import compute_series

TOOL_VERSION = "1.0.0"
FULL_GRID = 272182
SURVEY_GRID = 700


def _ratio(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def cleanup_old_logs(logs_dir: str, keep_count: int = 3):
    """Keep only the most recent certification logs."""
    log_files = sorted(
        Path(logs_dir).glob('certification_*.log'),
        key=lambda x: x.stat().st_mtime,
        reverse=True
    )
    for log_file in log_files[keep_count:]:
        try:
            log_file.unlink()
        except OSError as e:
            logging.warning(f"Failed to remove old log file {log_file}: {e}")


def setup_logging(verbose: bool = False) -> Optional[str]:
    """Log to logs/certification_<timestamp>.log and to the console."""
    try:
        logs_dir = os.path.join(os.getcwd(), 'logs')
        os.makedirs(logs_dir, exist_ok=True)
        cleanup_old_logs(logs_dir, keep_count=2)
        log_file = os.path.join(logs_dir, f'certification_{datetime.now().strftime("%Y%m%d_%H%M%S")}.log')
        logging.basicConfig(
            level=logging.DEBUG if verbose else logging.INFO,
            format='%(message)s',
            handlers=[
                logging.FileHandler(log_file),
                logging.StreamHandler()
            ],
            force=True
        )
        return log_file
    except Exception as e:
        print(f"❌ Logging setup error: {e}")
        return None


@dataclass
class CertificationReport:
    version: str = TOOL_VERSION
    command: str = ""
    series_order: int = 8
    sign_certificates: List[Dict] = field(default_factory=list)
    gap_certificate: Optional[Dict] = None
    mu_choice: Optional[Dict] = None
    bracket: Optional[List[str]] = None
    approximate_roots: Dict[str, object] = field(default_factory=dict)
    ingredients: Dict[str, object] = field(default_factory=dict)
    verdict: bool = False
    verdict_text: str = "not certified"
    failed_stage: Optional[str] = None
    failure: Optional[str] = None
    started: str = ""
    finished: str = ""
    runtimes: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        # every rounded quantity in the certificates carries at most this relative error
        self.ingredients.setdefault("epsilon_eff", _ratio(Fraction(GapCertifierConfig().working_epsilon)))

    def add_fermi(self, report: FermiReport) -> None:
        self.sign_certificates = [c.to_dict() for c in report.certificates]
        self.bracket = [_ratio(report.bracket[0]), _ratio(report.bracket[1])]
        self.approximate_roots = {
            "note": "non-rigorous",
            **{name: values for name, values in report.roots.items()},
        }
        self.ingredients["envelope_values"] = report.envelope_values

    def add_mu_choice(self, choice: MuChoice) -> None:
        self.mu_choice = {
            "mu_sq": choice.mu_sq,
            "mu": _ratio(choice.mu),
            "boundary_norm": choice.boundary_norm,
            "max_boundary_degree": choice.max_boundary_degree,
            "boundary_norm_numeric": choice.boundary_norm_numeric,
        }
        self.ingredients["mu"] = _ratio(choice.mu)
        self.ingredients["boundary_norm"] = choice.boundary_norm

    def add_gap(self, certificate: GapCertificate) -> None:
        self.gap_certificate = certificate.to_dict()
        self.ingredients["lipschitz"] = certificate.lipschitz

    def to_dict(self) -> Dict:
        return {
            "version": self.version,
            "command": self.command,
            "series_order": self.series_order,
            "verdict": self.verdict,
            "verdict_text": self.verdict_text,
            "failed_stage": self.failed_stage,
            "failure": self.failure,
            "bracket": self.bracket,
            "sign_certificates": self.sign_certificates,
            "mu_choice": self.mu_choice,
            "gap_certificate": self.gap_certificate,
            "approximate_roots": self.approximate_roots,
            "ingredients": self.ingredients,
            "started": self.started,
            "finished": self.finished,
            "runtimes": self.runtimes,
        }

    def write(self, path: str) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as handle:
            json.dump(self.to_dict(), handle, indent=2)


def write_series_files(order: int, out_dir: str) -> Dict[str, str]:
    """series_coefficients.csv and psi_terms.txt for the order-N series."""
    logger = logging.getLogger(__name__)
    if order < 0:
        raise ValueError(f"series order must be non-negative, got {order}")
    series = compute_series(order)
    series.verify_invariants()
    numerator = series.numerator_series()
    denominator = series.denominator_series()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "series_coefficients.csv"
    with open(csv_path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["power", "numerator", "denominator"])
        for k in range(2 * order + 1):
            writer.writerow([k, _ratio(numerator.coefficient(k)), _ratio(denominator.coefficient(k))])
    terms_path = out / "psi_terms.txt"
    with open(terms_path, "w") as handle:
        for n in range(min(order, 8) + 1):
            handle.write(series.describe(n) + "\n")
            handle.write(f"||Psi^{n}||^2 = {_ratio(series.norm_sq_of_term(n))}\n\n")
    logger.info(f"✓ Wrote {csv_path} and {terms_path}")
    return {"coefficients": str(csv_path), "terms": str(terms_path)}


def write_curves(certificate: GapCertificate, path: str) -> None:
    """alpha, lambda_1..lambda_n (ascending), enclosure_radius."""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    rows = [p for p in certificate.points if p.eigenvalues is not None]
    size = len(rows[0].eigenvalues) if rows else 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["alpha"] + [f"lambda_{j}" for j in range(1, size + 1)] + ["enclosure_radius"])
        for point in rows:
            writer.writerow([repr(float(point.alpha))] + [repr(x) for x in point.eigenvalues] + [repr(point.radius)])


def write_check_zero(certifier: FermiCertifier, path: str, points: int = 201) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    rows = certifier.check_zero_rows(points=points)
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=["alpha", "worst", "base", "best", "ratio"])
        writer.writeheader()
        for row in rows:
            writer.writerow({key: repr(value) for key, value in row.items()})


def _xi_from_args(args) -> XiBasis:
    xi = build_xi()
    if getattr(args, "add_orbit", None) or getattr(args, "drop_orbit", None):
        xi = xi.with_orbits(add=args.add_orbit or (), drop=args.drop_orbit or ())
        logging.getLogger(__name__).info(
            f"Using modified Xi: +{args.add_orbit or []} -{args.drop_orbit or []} ({len(xi)} indices)"
        )
    return xi


def _gap_config(args) -> GapCertifierConfig:
    return GapCertifierConfig(
        threads=args.threads,
        survey=args.survey,
        keep_eigenvalues=bool(getattr(args, "curves", None)) or args.survey,
        eigensolver=getattr(args, "eigensolver", "jacobi"),
        block_size=getattr(args, "block_size", GapCertifierConfig().block_size),
    )


# --- commands ----------------------------------------------------------------
# Handlers fill in the report; main() derives the exit status from report.verdict.


def cmd_series(args, report: CertificationReport) -> None:
    files = write_series_files(args.order, args.out or "results")
    report.series_order = args.order
    report.ingredients.update(files)
    report.verdict = True
    report.verdict_text = "series written"


def cmd_certify_zero(args, report: CertificationReport) -> None:
    series = compute_series()
    fermi = FermiCertifier(series, FermiCertifierConfig(eta_norm=args.eta_norm))
    report.add_fermi(fermi.certify())
    report.ingredients["h1_psi8_norm_sq"] = _ratio(series.h1_norm_sq_of_term(8))
    report.verdict = True
    report.verdict_text = f"v(alpha) changes sign in ({report.bracket[0]}, {report.bracket[1]})"


def cmd_certify_gap(args, report: CertificationReport) -> None:
    config = _gap_config(args)
    certificate = sweep_and_certify(args.grid, args.threads, config)
    report.add_gap(certificate)
    if args.curves:
        write_curves(certificate, args.curves)
    if config.survey:
        report.verdict = False
        report.verdict_text = "not certified (survey mode)"
        return
    report.verdict = certificate.verdict
    report.verdict_text = "gap certified" if certificate.verdict else "gap not certified"


def cmd_certify_all(args, report: CertificationReport) -> None:
    logger = logging.getLogger(__name__)
    series = compute_series()
    xi = _xi_from_args(args)
    started = time.perf_counter()
    choice = verify_mu_choice(xi, series)
    report.add_mu_choice(choice)
    report.runtimes["verify_mu_choice"] = time.perf_counter() - started

    started = time.perf_counter()
    config = _gap_config(args)
    certificate = sweep_and_certify(args.grid, args.threads, config, series, xi)
    report.add_gap(certificate)
    report.runtimes["sweep_and_certify"] = time.perf_counter() - started
    if args.curves:
        write_curves(certificate, args.curves)

    decomposition = check_decomposition(config.gap_target, choice.mu, choice.boundary_norm, config.alpha_max)
    report.ingredients["remainder_denominator_at_alpha_max"] = _ratio(decomposition.denominator(config.alpha_max))

    started = time.perf_counter()
    fermi = FermiCertifier(series, FermiCertifierConfig(eta_norm=args.eta_norm))
    report.add_fermi(fermi.certify())
    report.ingredients["h1_psi8_norm_sq"] = _ratio(series.h1_norm_sq_of_term(8))
    report.runtimes["certify_sign"] = time.perf_counter() - started

    if config.survey:
        report.verdict = False
        report.verdict_text = "not certified (survey mode)"
        return
    report.verdict = certificate.verdict
    if report.verdict:
        report.verdict_text = f"first magic angle certified in ({report.bracket[0]}, {report.bracket[1]})"
        logger.info(f"\n✓ {report.verdict_text}")


def cmd_figures(args, report: CertificationReport) -> None:
    out = Path(args.out or "figures")
    series = compute_series()
    write_check_zero(FermiCertifier(series), str(out / "check_zero.csv"))
    config = GapCertifierConfig(threads=args.threads, survey=True, keep_eigenvalues=True, block_size=args.block_size)
    certificate = sweep_and_certify(args.grid, args.threads, config, series)
    write_curves(certificate, str(out / "curves.csv"))
    report.add_gap(certificate)
    report.verdict = True
    report.verdict_text = "figure data written"
    logging.getLogger(__name__).info(f"✓ Wrote figure data to {out}")


def cmd_xi(args, report: CertificationReport) -> None:
    logger = logging.getLogger(__name__)
    xi = _xi_from_args(args)
    logger.info(f"\n=== Xi ({len(xi)} chiral indices) ===")
    for label in xi.labels():
        logger.debug(f"  {label}")
    if args.check:
        report.add_mu_choice(verify_mu_choice(xi))
        report.verdict_text = "Xi verified"
    report.verdict = True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_certification",
        description="Verified numerics for the first magic angle of chiral twisted bilayer graphene.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    series = sub.add_parser("series", help="exact perturbation series coefficients")
    series.add_argument("--order", type=int, default=8)
    series.add_argument("--out", default="results", help="output directory")
    series.set_defaults(handler=cmd_series)

    def add_grid_flags(p, default_grid: int):
        p.add_argument("--grid", type=int, default=default_grid, help="number of grid intervals N")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--survey", action="store_true", help="coarse grid, figure data only")
        p.add_argument("--curves", help="CSV file for the eigenvalue curves")
        p.add_argument("--eigensolver", choices=("jacobi", "numpy"), default="jacobi")
        p.add_argument("--block-size", type=int, default=GapCertifierConfig().block_size,
                       help="consecutive grid points per warm-started block")

    def add_orbit_flags(p):
        p.add_argument("--add-orbit", action="append", metavar="LABEL", help="add an orbit, e.g. B(-2,-2)")
        p.add_argument("--drop-orbit", action="append", metavar="LABEL", help="remove an orbit")

    zero = sub.add_parser("certify-zero", help="Fermi velocity sign certificates")
    zero.add_argument("--out", default="results/fermi.json")
    zero.add_argument("--eta-norm", choices=("exact", "rounded"), default="exact")
    zero.set_defaults(handler=cmd_certify_zero)

    gap = sub.add_parser("certify-gap", help="spectral gap of the projected Hamiltonian")
    add_grid_flags(gap, FULL_GRID)
    gap.add_argument("--out", default="results/gap.json")
    gap.set_defaults(handler=cmd_certify_gap)

    full = sub.add_parser("certify-all", help="run the whole proof pipeline")
    add_grid_flags(full, FULL_GRID)
    add_orbit_flags(full)
    full.add_argument("--out", default="results/report.json")
    full.add_argument("--eta-norm", choices=("exact", "rounded"), default="exact")
    full.set_defaults(handler=cmd_certify_all)

    figures = sub.add_parser("figures", help="CSV data for the zero-crossing and eigenvalue plots")
    figures.add_argument("--out", default="figures", help="output directory")
    figures.add_argument("--grid", type=int, default=SURVEY_GRID)
    figures.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    figures.add_argument("--block-size", type=int, default=GapCertifierConfig().block_size)
    figures.set_defaults(handler=cmd_figures)

    xi = sub.add_parser("xi", help="list and verify the subspace Xi")
    xi.add_argument("--check", action="store_true", help="verify mu, boundary degree and support")
    xi.add_argument("--out", default=None)
    add_orbit_flags(xi)
    xi.set_defaults(handler=cmd_xi)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and write its report. Returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)
    logger = logging.getLogger(__name__)

    report = CertificationReport(command=args.command)
    report.started = datetime.now().isoformat(timespec="seconds")
    started = time.perf_counter()
    try:
        args.handler(args, report)
    except CertificationError as e:
        logger.error(f"❌ {e.stage}: {e}")
        report.failed_stage = e.stage
        report.failure = str(e)
        report.verdict = False
    status = 0 if report.verdict else 1
    report.finished = datetime.now().isoformat(timespec="seconds")
    report.runtimes["total"] = time.perf_counter() - started

    out = getattr(args, "out", None)
    if out and args.command not in ("series", "figures"):
        report.write(out)
        logger.info(f"Report written to {out}")
    return status


if __name__ == "__main__":
    sys.exit(main())
