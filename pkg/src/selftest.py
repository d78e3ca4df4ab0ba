"""
Self-Test Module

A registry of property checks over the whole tool, run by
``python main.py selftest``. Each check returns ``(passed, detail)``; the
runner times them and collects the results in a DataFrame.
"""
import logging
import random
import time

import numpy as np
import pandas as pd

from src import config
from src.correlator import CorrelatorSpec, Decoration, cyclic_invariance_check, evaluate, selection_rule_holds
from src.cyclic import CyclicComplex, CyclicFunctional, chain_map_defect, cyclic_homology, trace_pairing
from src.dgcat import disjoint_union, matrix_category, point_category, random_category
from src.geometry import SpherePoint
from src.hochschild import d_squared_defects, hochschild_cohomology
from src.sphere import GreenKernel, green_certification
from src.trees import DecoratedPolygon, enumerate_trees

RANDOM_CATEGORIES = 10
CATALAN_3_TO_12 = [1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796]


# --- Combinatorics and homology ---

def check_catalan_counts() -> tuple:
    counts = [len(enumerate_trees(DecoratedPolygon.plain(n))) for n in range(3, 13)]
    return counts == CATALAN_3_TO_12, f"tree counts {counts}"


def check_hochschild_d_squared() -> tuple:
    rng = random.Random(config.SEED)
    for i in range(RANDOM_CATEGORIES):
        cat = random_category(rng)
        bad = d_squared_defects(cat, 3)
        if bad:
            return False, f"random category {i}: D^2 != 0 in degrees {bad}"
    return True, f"{RANDOM_CATEGORIES} random categories"


def check_cyclic_d_squared() -> tuple:
    cats = [point_category(), matrix_category(2), disjoint_union(point_category(), point_category())]
    for cat in cats:
        cplx = CyclicComplex(cat, 3)
        for p in cplx.degrees():
            first, second = cplx.differential(p), cplx.differential(p - 1)
            if 0 in first.shape or 0 in second.shape:
                continue
            if not second.matmul(first).is_zero_matrix:
                return False, f"{cat.name}: boundary squares to a non-zero map in degree {p}"
    return True, f"{len(cats)} categories"


def check_hochschild_bundled() -> tuple:
    expected = {"point": 1, "M2": 1, "point+point": 2}
    cats = [point_category(), matrix_category(2), disjoint_union(point_category(), point_category())]
    for cat in cats:
        result = hochschild_cohomology(cat, 4)
        if result.dims != {0: expected[cat.name], 1: 0, 2: 0} or not result.stable:
            return False, f"{cat.name}: HH dims {result.dims} (stable={result.stable})"
    return True, "HH^0 = 1, 1, 2 and HH^1 = HH^2 = 0"


def check_cyclic_point() -> tuple:
    result = cyclic_homology(point_category(), 4)
    return result.dims == {0: 1, 1: 0, 2: 1}, f"HC dims {result.dims}"


def check_dualize_chain_map() -> tuple:
    cat = matrix_category(2)
    pairing = trace_pairing(cat)
    problems = pairing.validate(cat)
    if problems:
        return False, problems[0]
    cplx = CyclicComplex(cat, 2)
    letter = cplx.letter("M", "M", 1)
    defect = chain_map_defect(cat, pairing, CyclicFunctional.from_words(cplx, {(letter,): 1}), 2)
    return defect.holds, f"{defect.mismatches} mismatching cochain entries"


# --- Green kernel ---

def check_green_symmetry() -> tuple:
    rng = np.random.default_rng(config.SEED)
    x = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    y = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    kernel = GreenKernel(SpherePoint(0.3 + 0.1j))
    same = np.array_equal(kernel(x, y), kernel(y, x))
    return same, "bitwise symmetric on 10^4 pairs"


def check_green_residual() -> tuple:
    rows = green_certification(GreenKernel(), config.GREEN_FORMS, config.GREEN_RESOLUTION)
    failed = [r["name"] for r in rows if not r["passed"]]
    worst = max((r["residual"] for r in rows if r["name"].startswith("weak_form")), default=0.0)
    detail = f"{len(rows)} checks at resolution {config.GREEN_RESOLUTION}, max weak-form residual {worst:.2e}"
    if failed:
        detail += f", failed: {failed}"
    return not failed, detail


# --- Correlators ---

def _pattern_spec(kinds: tuple) -> CorrelatorSpec:
    decorations = []
    for i, kind in enumerate(kinds):
        if kind == "delta":
            decorations.append(Decoration.delta(complex(i + 1, 0.5 * i)))
        else:
            decorations.append(Decoration("constant"))
    return CorrelatorSpec(tuple(decorations))


def check_degree_rule() -> tuple:
    checked = 0
    for n in range(3, 7):
        for mask in range(2 ** n):
            kinds = tuple("delta" if mask >> i & 1 else "constant" for i in range(n))
            spec = _pattern_spec(kinds)
            if selection_rule_holds(spec):
                continue
            result = evaluate(spec)
            if result.value != 0 or result.evaluations != 0 or result.contributions:
                return False, f"pattern {kinds} evaluated to {result.value}"
            checked += 1
    return True, f"{checked} violating patterns return exactly 0"


def check_triangle_closed_form() -> tuple:
    spec = CorrelatorSpec((Decoration("constant"), Decoration("constant"), Decoration.delta("inf", 2.5)))
    result = evaluate(spec)
    return result.value == 2.5 and result.error == 0, f"value {result.value}"


def check_square_invariance() -> tuple:
    spec = CorrelatorSpec((Decoration.delta(0.5), Decoration.delta(-1 + 1j), Decoration("constant"),
                           Decoration("constant")))
    report = cyclic_invariance_check(spec)
    return report.max_deviation < 1e-12, f"max deviation {report.max_deviation:.2e}"


# --- Registry ---

SELFTESTS = {
    "catalan_counts": check_catalan_counts,
    "hochschild_d_squared": check_hochschild_d_squared,
    "cyclic_d_squared": check_cyclic_d_squared,
    "hochschild_bundled": check_hochschild_bundled,
    "cyclic_point": check_cyclic_point,
    "dualize_chain_map": check_dualize_chain_map,
    "green_symmetry": check_green_symmetry,
    "green_residual": check_green_residual,
    "degree_rule": check_degree_rule,
    "triangle_closed_form": check_triangle_closed_form,
    "square_invariance": check_square_invariance,
}


def run_selftest(names: list = None) -> pd.DataFrame:
    """Runs the named checks (all by default); a check that raises counts as failed."""
    names = names or list(SELFTESTS)
    unknown = [n for n in names if n not in SELFTESTS]
    if unknown:
        raise KeyError(f"unknown self-test(s): {', '.join(unknown)}")
    logging.info(f"--- Starting self-test ({len(names)} properties) ---")
    rows = []
    for name in names:
        start = time.perf_counter()
        try:
            passed, detail = SELFTESTS[name]()
        except Exception as e:
            logging.error(f"Self-test '{name}' raised {type(e).__name__}: {e}")
            passed, detail = False, f"{type(e).__name__}: {e}"
        seconds = time.perf_counter() - start
        logging.info(f"{name}: {'PASS' if passed else 'FAIL'} ({detail})")
        rows.append({"name": name, "passed": bool(passed), "detail": detail, "seconds": seconds})
    return pd.DataFrame(rows, columns=["name", "passed", "detail", "seconds"])
