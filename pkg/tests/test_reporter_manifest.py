import json
import math

import pandas as pd
import pytest
from sympy import QQ

from src import config
from src.correlator import CorrelatorSpec, Decoration, cyclic_invariance_check, evaluate
from src.dgcat import DGCategory, validate
from src.errors import ConvergenceError, ParseError, ValidationError
from src.graded import GradedVectorSpace, HomComplex, Letter
from src.hochschild import HomologyResult, hochschild_cohomology
from src.manifest import RunManifest, hash_file, load_manifest, same_inputs
from src.reporter import (Report, certificate, complex_numeric, contributions_frame, correlator_payload, digits_of,
                          error_report, homology_payload, invariance_payload, numeric, save_csv, selftest_payload,
                          trees_frame, trees_payload, write_report)
from src.trees import DecoratedPolygon, enumerate_trees

SQUARE = CorrelatorSpec((Decoration.delta(0.5), Decoration.delta(-1 + 1j), Decoration("constant"),
                         Decoration("constant")), name="square")


# --- Numeric fields ---

@pytest.mark.parametrize("value, error, digits", [(1.0, 0.0, 15), (1.0, 1e-3, 3), (123.0, 1.0, 2),
                                                  (0.0, 0.5, 0), (1.0, math.inf, 0)])
def test_digits_of(value, error, digits):
    assert digits_of(value, error) == digits


def test_numeric_fields():
    assert numeric(2.5) == {"value": 2.5, "abs_error": 0.0, "digits": 15}
    mc = numeric(1.23456, 0.001, "mc")
    assert mc["display"].startswith("1.23")
    assert "display" not in numeric(1.23456, 0.001, "quad")
    z = complex_numeric(1 - 2j, 0.1)
    assert (z["re"]["value"], z["im"]["value"]) == (1.0, -2.0)


# --- Reports ---

def test_report_layout(schema_validator):
    manifest = RunManifest("dgcat hh", seed=None).finish().to_dict()
    report = Report("dgcat hh", {"x": 1}, manifest)
    doc = json.loads(report.to_json())
    assert doc["schema_version"] == config.REPORT_SCHEMA_VERSION
    assert "error" not in doc
    schema_validator(doc)


def test_parse_error_report_carries_the_location(schema_validator):
    manifest = RunManifest("dgcat validate").to_dict()
    report = error_report("dgcat validate", ParseError("malformed rational '3/'", 6, 54), manifest, 3)
    doc = report.to_dict()
    assert doc["status"] == "error"
    assert doc["error"]["line"] == 6 and doc["error"]["column"] == 54
    assert doc["error"]["exit_code"] == 3
    assert doc["payload"] == {"incomplete": True}
    schema_validator(doc)


def test_convergence_error_report_keeps_the_trace(schema_validator):
    exc = ConvergenceError("no luck", [{"resolution": 64, "value": 1.5, "error": 0.25}])
    doc = error_report("correlator eval", exc, RunManifest("correlator eval").to_dict(), 5, {"spec": "x"}).to_dict()
    assert doc["error"]["trace"] == [{"resolution": 64, "value": numeric(1.5), "error": numeric(0.25)}]
    assert doc["payload"] == {"spec": "x", "incomplete": True}
    schema_validator(doc)


def test_validation_error_report_lists_violations(point):
    broken = DGCategory(point.objects, point.homs, point.composition, {}, name="broken")
    exc = ValidationError("identity fails", validate(broken))
    doc = error_report("dgcat validate", exc, {}, 4).to_dict()
    assert doc["error"]["report"]["valid"] is False


def test_write_report(tmp_path, capsys):
    report = Report("selftest", {"passed": True})
    write_report(report)
    assert json.loads(capsys.readouterr().out)["command"] == "selftest"
    target = tmp_path / "nested" / "report.json"
    write_report(report, target)
    assert json.loads(target.read_text())["payload"] == {"passed": True}


# --- Payloads ---

def test_homology_payload(point, schema_validator):
    payload = homology_payload(hochschild_cohomology(point, 3))
    assert payload["rows"] == [{"degree": 0, "dimension": 1, "previous_dimension": 1},
                               {"degree": 1, "dimension": 0, "previous_dimension": 0},
                               {"degree": 2, "dimension": 0, "previous_dimension": 0}]
    schema_validator(payload, "homology.schema.json")
    assert payload["certified"] is True
    assert payload["certificate"] == "degree-bound"


@pytest.mark.parametrize("stable, reliable, expected", [(True, True, "degree-bound"), (False, True, "degree-bound"),
                                                        (True, False, "stability"), (False, False, "none")])
def test_certificate_names_the_flag_to_trust(schema_validator, stable, reliable, expected):
    result = HomologyResult("HH", "edge", {0: 1, 1: 0, 2: 0}, 3, (0, 2), stable, reliable, {0: 1, 1: 0, 2: 0})
    assert certificate(result) == expected
    payload = homology_payload(result)
    assert payload["certified"] == (expected != "none")
    assert payload["certificate"] == expected
    schema_validator(payload, "homology.schema.json")


def test_acyclic_edge_is_certified_by_stability(schema_validator):
    # Hom(o0, o1) = (a -> b) is acyclic but graded, so only the stability flag can certify it
    unit = HomComplex.build(GradedVectorSpace((Letter("id", 0),)))
    edge = HomComplex.build(GradedVectorSpace((Letter("a", 0), Letter("b", 1))), {(1, 0): 1})
    objs = ("o0", "o1")
    composition = {("o0", "o0", "o1"): {(0, a): {a: QQ(1)} for a in range(2)},
                   ("o0", "o1", "o1"): {(a, 0): {a: QQ(1)} for a in range(2)},
                   ("o0", "o0", "o0"): {(0, 0): {0: QQ(1)}}, ("o1", "o1", "o1"): {(0, 0): {0: QQ(1)}}}
    cat = DGCategory(objs, {("o0", "o0"): unit, ("o1", "o1"): unit, ("o0", "o1"): edge}, composition,
                     {"o0": {0: QQ(1)}, "o1": {0: QQ(1)}}, name="edge")
    assert validate(cat).ok
    result = hochschild_cohomology(cat, 3)
    payload = homology_payload(result)
    assert not result.window_reliable
    assert payload["certificate"] == ("stability" if result.stable else "none")
    assert payload["certified"] == result.stable
    schema_validator(payload, "homology.schema.json")


def test_trees_payload(schema_validator):
    polygon = DecoratedPolygon.plain(5)
    trees = enumerate_trees(polygon)
    payload = trees_payload(trees, polygon)
    assert payload["count"] == 5
    schema_validator(payload, "trees.schema.json")
    frame = trees_frame(trees, polygon)
    assert list(frame["tree"]) == [0, 1, 2, 3, 4]
    assert set(frame["sign_degree1"]) <= {-1, 1}


def test_correlator_payload(schema_validator):
    payload = correlator_payload(SQUARE, evaluate(SQUARE))
    assert payload["convention_fingerprint"] == config.convention_fingerprint()
    assert payload["value"]["re"]["value"] == pytest.approx(-math.log(3.25))
    assert len(payload["trees"]) == 2
    schema_validator(payload, "correlator.schema.json")


def test_invariance_payload(schema_validator):
    payload = invariance_payload(SQUARE, cyclic_invariance_check(SQUARE))
    assert [r["predicted_sign"] for r in payload["rotations"]] == [-1, 1, -1]
    assert payload["max_deviation"]["value"] < 1e-12
    schema_validator(payload, "correlator.schema.json")


def test_contributions_frame_and_csv(tmp_path):
    frame = contributions_frame(evaluate(SQUARE))
    assert set(frame["sign"].abs()) == {1}
    assert frame.loc[0, "sign"] == -1
    path = tmp_path / "out" / "trees.csv"
    save_csv(frame, path)
    again = pd.read_csv(path)
    assert list(again.columns) == list(frame.columns)
    assert len(again) == 2


def test_selftest_payload():
    df = pd.DataFrame([{"name": "a", "passed": True, "detail": "", "seconds": 0.1},
                       {"name": "b", "passed": False, "detail": "boom", "seconds": 0.2}])
    payload = selftest_payload(df)
    assert payload["passed"] is False
    assert payload["properties"][1]["detail"] == "boom"


# --- Manifests ---

def test_manifest_fields(tmp_path):
    source = tmp_path / "input.json"
    source.write_text("{}")
    manifest = RunManifest("correlator eval", seed=7, workers=2)
    manifest.add_input(source)
    manifest.add_input(None)
    doc = manifest.finish().to_dict()
    assert doc["input_hashes"] == {str(source): hash_file(source)}
    assert len(hash_file(source)) == 64
    assert (doc["seed"], doc["workers"]) == (7, 2)
    assert doc["wall_clock"]["value"] >= 0


def test_unreadable_input_hashes_to_empty(tmp_path):
    assert hash_file(tmp_path / "missing") == ""


def test_same_inputs_ignores_timing_and_workers(tmp_path):
    first = RunManifest("selftest", seed=1, workers=1).finish().to_dict()
    second = RunManifest("selftest", seed=1, workers=8).finish().to_dict()
    assert same_inputs(first, second)
    assert not same_inputs(first, RunManifest("selftest", seed=2).to_dict())


def test_load_manifest_from_a_report(tmp_path):
    path = tmp_path / "report.json"
    manifest = RunManifest("selftest", seed=3).finish().to_dict()
    write_report(Report("selftest", {}, manifest), path)
    assert load_manifest(path)["seed"] == 3
    assert load_manifest(tmp_path / "missing.json") == {}
