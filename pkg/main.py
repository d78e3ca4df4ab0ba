"""
Main Orchestrator

This script is the command-line entry point. It parses the subcommand, runs
the matching engine (tree enumeration, dg-category homology, Green-kernel
certification, correlator evaluation, self-test) and writes a JSON report to
stdout or to ``--out``. Logs go to stderr and to the log file, never into the
report.

Exit codes: 0 success, 2 usage, 3 parse, 4 validation, 5 convergence,
6 self-test failure, 10 internal error (see docs/exit_codes.md).
"""
import argparse
import logging
import sys

from src import config, correlator, cyclic, hochschild, parsers, reporter, selftest
from src.dgcat import validate
from src.errors import HodgeCorError
from src.geometry import SpherePoint
from src.manifest import RunManifest
from src.sphere import GreenKernel, green_certification
from src.trees import DecoratedPolygon, enumerate_trees

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SELFTEST = 6
EXIT_INTERNAL = 10


# --- Logger Configuration ---
def setup_logger():
    """Configures the root logger to stream INFO to stderr and to the log file."""
    logger = logging.getLogger()
    logger.setLevel(logging.INFO)

    # Clean up any existing handlers to avoid duplicate logs
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)

    # Stream handler on stderr; stdout carries the report
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setLevel(logging.INFO)
    stream_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))

    file_handler = logging.FileHandler(config.LOG_FILE, mode='w')
    file_handler.setLevel(logging.INFO)
    file_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'))

    logger.addHandler(stream_handler)
    logger.addHandler(file_handler)


# --- Commands ---

def run_trees_enumerate(args, manifest: RunManifest) -> dict:
    polygon = DecoratedPolygon.plain(args.ngon)
    trees = enumerate_trees(polygon)
    if args.csv:
        reporter.save_csv(reporter.trees_frame(trees, polygon), args.csv)
    return reporter.trees_payload(trees, polygon)


def _load_category(args, manifest: RunManifest, check: bool = True):
    manifest.add_input(args.input)
    return parsers.parse_dgcat(args.input, check=check)


def run_dgcat_validate(args, manifest: RunManifest) -> dict:
    cat = _load_category(args, manifest, check=False)
    report = validate(cat)
    return {"summary": cat.summary(), **report.to_dict()}


def _window(args):
    return tuple(args.window) if args.window else None


def run_dgcat_hh(args, manifest: RunManifest) -> dict:
    cat = _load_category(args, manifest)
    return reporter.homology_payload(hochschild.hochschild_cohomology(cat, args.max_column, _window(args)))


def run_dgcat_hc(args, manifest: RunManifest) -> dict:
    cat = _load_category(args, manifest)
    return reporter.homology_payload(cyclic.cyclic_homology(cat, args.max_column, _window(args)))


def run_dgcat_hh0(args, manifest: RunManifest) -> dict:
    cat = _load_category(args, manifest)
    return reporter.cochain_payload(cat, hochschild.hh0_cocycles(cat, args.max_column))


def run_green_check(args, manifest: RunManifest) -> dict:
    """Weak-form residuals on random Gaussian test functions, a mis-normalized control and symmetry."""
    manifest.seed = args.seed
    kernel = GreenKernel(SpherePoint.parse(args.base_point))
    rows = green_certification(kernel, args.forms, args.resolution, args.tolerance, args.seed)
    return reporter.green_payload(rows)


def _load_spec(args, manifest: RunManifest) -> correlator.CorrelatorSpec:
    manifest.add_input(args.spec)
    spec = parsers.parse_spec(args.spec)
    spec = spec.with_options(method=args.method, samples=args.samples, resolution=args.resolution, seed=args.seed,
                             workers=args.workers, tolerance=args.tolerance)
    manifest.seed, manifest.workers = spec.seed, spec.workers
    return spec


def run_correlator_eval(args, manifest: RunManifest) -> dict:
    spec = _load_spec(args, manifest)
    result = correlator.evaluate(spec)
    if args.csv:
        reporter.save_csv(reporter.contributions_frame(result), args.csv)
    return reporter.correlator_payload(spec, result)


def run_correlator_invariance(args, manifest: RunManifest) -> dict:
    spec = _load_spec(args, manifest)
    return reporter.invariance_payload(spec, correlator.cyclic_invariance_check(spec))


def run_correlator_gauge(args, manifest: RunManifest) -> dict:
    spec = _load_spec(args, manifest)
    perturbation = parsers.parse_spec_perturbation(args.spec)
    if args.kind or perturbation is None:
        raw = {"kind": args.kind or "exact", "amplitude": args.amplitude,
               "eta": {"kind": "gaussian", "center": [0.3, -0.2], "width": 0.8}}
        if args.edge is not None:
            raw["edge"] = args.edge if args.edge == "all" else int(args.edge)
        perturbation = parsers.parse_perturbation(raw)
    return reporter.gauge_payload(spec, perturbation, correlator.gauge_perturbation_check(spec, perturbation))


def run_selftest(args, manifest: RunManifest) -> dict:
    manifest.seed = config.SEED
    return reporter.selftest_payload(selftest.run_selftest(args.only))


# --- Argument parsing ---

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        logging.error(f"Usage error: {message}")
        raise SystemExit(EXIT_USAGE)


def _numeric_flags(parser):
    parser.add_argument('--method', choices=['quad', 'mc'], help="Integration method.")
    parser.add_argument('--samples', type=int, help="Monte-Carlo evaluations per vegas iteration.")
    parser.add_argument('--resolution', type=int, help="Quadrature points per patch axis.")
    parser.add_argument('--seed', type=int, help="Random seed.")
    parser.add_argument('--workers', type=int, help="Worker threads.")
    parser.add_argument('--tolerance', type=float, help="Relative tolerance of the adaptive quadrature.")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="main.py", description="Hochschild/cyclic homology of dg categories and Hodge correlators.")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def command(group, name, handler, help_text):
        sub = group.add_parser(name, help=help_text)
        sub.add_argument('--out', help="Write the report here instead of stdout.")
        sub.set_defaults(handler=handler, command_name=name)
        return sub

    trees = groups.add_parser("trees", help="Plane trivalent trees.").add_subparsers(dest="command", required=True)
    sub = command(trees, "enumerate", run_trees_enumerate, "List the trees of an n-gon.")
    sub.add_argument('--ngon', type=int, default=config.env_override("NGON", 5, int), help="Number of polygon sides.")
    sub.add_argument('--csv', help="Also save the tree table as CSV.")

    dg = groups.add_parser("dgcat", help="dg-category homology.").add_subparsers(dest="command", required=True)
    for name, handler, text in [("validate", run_dgcat_validate, "Check the dg-category axioms."),
                                ("hh", run_dgcat_hh, "Hochschild cohomology dimensions."),
                                ("hc", run_dgcat_hc, "Cyclic homology dimensions."),
                                ("hh0", run_dgcat_hh0, "HH^0 cocycle representatives.")]:
        sub = command(dg, name, handler, text)
        sub.add_argument('--input', required=True, help="A .dgcat file.")
        if name != "validate":
            sub.add_argument('--max-column', type=int, default=config.MAX_COLUMN, help="Bicomplex truncation.")
            sub.add_argument('--window', type=int, nargs=2, metavar=("LO", "HI"), help="Degree window.")

    green = groups.add_parser("green", help="Green kernel checks.").add_subparsers(dest="command", required=True)
    sub = command(green, "check", run_green_check, "Certify the Green kernel by weak-form residuals.")
    sub.add_argument('--base-point', default="inf", help="Base point a ('inf' or a complex number).")
    sub.add_argument('--forms', type=int, default=config.GREEN_FORMS, help="Number of random test functions.")
    sub.add_argument('--resolution', type=int, default=config.GREEN_RESOLUTION,
                     help="Quadrature points per patch axis.")
    sub.add_argument('--tolerance', type=float, default=config.TOLERANCE, help="Quadrature tolerance.")
    sub.add_argument('--seed', type=int, default=config.SEED, help="Random seed.")

    cor = groups.add_parser("correlator", help="Hodge correlators.").add_subparsers(dest="command", required=True)
    for name, handler, text in [("eval", run_correlator_eval, "Evaluate a correlator spec."),
                                ("invariance", run_correlator_invariance, "Signed cyclic rotation check."),
                                ("gauge", run_correlator_gauge, "Green-kernel gauge perturbation check.")]:
        sub = command(cor, name, handler, text)
        sub.add_argument('--spec', required=True, help="A correlator spec JSON file.")
        _numeric_flags(sub)
        if name == "eval":
            sub.add_argument('--csv', help="Also save the per-tree table as CSV.")
        if name == "gauge":
            sub.add_argument('--kind', choices=['exact', 'harmonic'], help="Perturbation kind.")
            sub.add_argument('--amplitude', type=float, default=0.1, help="Harmonic shift t.")
            sub.add_argument('--edge', help="'all' or the index of one internal edge.")

    sub = groups.add_parser("selftest", help="Run the property suite.")
    sub.add_argument('--out', help="Write the report here instead of stdout.")
    sub.add_argument('--only', nargs="+", choices=sorted(selftest.SELFTESTS), help="Run only these properties.")
    sub.set_defaults(handler=run_selftest, command_name="selftest")
    return parser


# --- Runner ---

def run(argv: list = None) -> int:
    """Runs one command line and returns its exit code."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    command = args.command_name if args.group == "selftest" else f"{args.group} {args.command_name}"
    manifest = RunManifest(command)
    logging.info(f"--- Running '{command}' ---")
    try:
        payload = args.handler(args, manifest)
    except HodgeCorError as e:
        logging.error(f"'{command}' failed: {e}")
        reporter.write_report(reporter.error_report(command, e, manifest.finish().to_dict(), e.exit_code), args.out)
        return e.exit_code
    except Exception as e:
        logging.exception(f"Internal error in '{command}'")
        reporter.write_report(reporter.error_report(command, e, manifest.finish().to_dict(), EXIT_INTERNAL), args.out)
        return EXIT_INTERNAL

    report = reporter.Report(command, payload, manifest.finish().to_dict())
    code = EXIT_OK
    if args.group == "selftest" and not payload["passed"]:
        report.status = "error"
        report.error = {"type": "SelfTestFailure", "message": "one or more properties failed", "exit_code": EXIT_SELFTEST}
        code = EXIT_SELFTEST
    reporter.write_report(report, args.out)
    logging.info(f"'{command}' finished with exit code {code}.")
    return code


def main():
    """Main function to run the command line."""
    setup_logger()
    sys.exit(run())


if __name__ == "__main__":
    main()
