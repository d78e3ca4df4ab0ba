"""
Reporter Module

This module turns engine results into machine-readable reports and
human-readable tables.

A report is a JSON document with ``schema_version``, ``command``, ``payload``,
``manifest`` and ``status``. Numeric values never appear as bare floats:
they are objects ``{"value": x, "abs_error": e, "digits": k}`` (complex values
as ``{"re": ..., "im": ...}``) or exact ``"p/q"`` strings. Tabular payloads are
built as pandas DataFrames and can also be exported as CSV.
"""
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import gvar as gv
import pandas as pd

from src import config
from src.graded import format_scalar
from src.trees import DecoratedPolygon, dfs_edge_order, tree_sign, tree_table

MAX_DIGITS = 15


# --- Numeric fields ---

def digits_of(value: float, error: float) -> int:
    """Significant decimal digits supported by ``error``."""
    if error <= 0 or not math.isfinite(error):
        return MAX_DIGITS if math.isfinite(error) else 0
    scale = max(abs(value), error)
    return max(0, min(MAX_DIGITS, int(math.floor(math.log10(scale / error)))))


def numeric(value: float, error: float = 0.0, method: str = None) -> dict:
    out = {"value": float(value), "abs_error": float(error), "digits": digits_of(float(value), float(error))}
    if method == "mc" and error > 0:
        out["display"] = str(gv.gvar(float(value), float(error)))
    return out


def complex_numeric(value: complex, error: float = 0.0, method: str = None) -> dict:
    value = complex(value)
    return {"re": numeric(value.real, error, method), "im": numeric(value.imag, error, method)}


def exact(value) -> str:
    return format_scalar(value)


# --- Reports ---

@dataclass
class Report:
    command: str
    payload: dict
    manifest: dict = field(default_factory=dict)
    status: str = "ok"
    error: dict = None

    def to_dict(self) -> dict:
        out = {"schema_version": config.REPORT_SCHEMA_VERSION, "command": self.command, "status": self.status,
               "payload": self.payload, "manifest": self.manifest}
        if self.error is not None:
            out["error"] = self.error
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def error_report(command: str, exc: Exception, manifest: dict, exit_code: int, partial: dict = None) -> Report:
    """Report for a failed run; any partial payload is flagged as incomplete."""
    detail = {"type": type(exc).__name__, "message": str(exc), "exit_code": exit_code}
    for attribute in ("line", "column"):
        if getattr(exc, attribute, None) is not None:
            detail[attribute] = getattr(exc, attribute)
    if getattr(exc, "trace", None):
        detail["trace"] = [{k: numeric(v) if isinstance(v, float) else v for k, v in step.items()}
                           for step in exc.trace]
    report_obj = getattr(exc, "report", None)
    if report_obj is not None and hasattr(report_obj, "to_dict"):
        detail["report"] = report_obj.to_dict()
    payload = dict(partial or {})
    payload["incomplete"] = True
    return Report(command, payload, manifest, "error", detail)


def write_report(report: Report, out=None):
    """Writes the report to ``out`` or to stdout."""
    text = report.to_json()
    if out is None:
        sys.stdout.write(text + "\n")
        return
    path = Path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")
        logging.info(f"Saved report to {path}")
    except OSError as e:
        logging.error(f"Could not write report to {path}: {e}")
        raise


def save_csv(df: pd.DataFrame, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    logging.info(f"Saving table to {path}")
    df.to_csv(path, index=False, float_format="%.12g")


# --- Payload builders ---

def homology_table(result) -> pd.DataFrame:
    degrees = sorted(result.dims)
    return pd.DataFrame({
        "degree": degrees,
        "dimension": [result.dims[p] for p in degrees],
        "previous_dimension": [result.previous_dims.get(p) for p in degrees],
    })


def certificate(result) -> str:
    """Which flag backs the reported dims: ``degree-bound`` beats ``stability``; callers read ``certified``."""
    if result.window_reliable:
        return "degree-bound"
    return "stability" if result.stable else "none"


def homology_payload(result) -> dict:
    table = homology_table(result)
    kind = certificate(result)
    return {
        "kind": result.kind,
        "category": result.name,
        "max_column": result.max_column,
        "degree_window": list(result.window),
        "rows": json.loads(table.to_json(orient="records")),
        "stable": result.stable,
        "window_reliable": result.window_reliable,
        "certified": kind != "none",
        "certificate": kind,
    }


def cochain_payload(cat, cochains: list) -> dict:
    return {"category": cat.name, "classes": [c.to_dict(cat) for c in cochains]}


def trees_frame(trees: list, polygon: DecoratedPolygon) -> pd.DataFrame:
    degrees = [1] * len(polygon.vertices)
    rows = []
    for i, tree in enumerate(trees):
        rows.append({
            "tree": i,
            "triangles": " ".join("".join(str(v) for v in t) for t in tree.triangles),
            "diagonals": " ".join(f"{a}-{b}" for a, b in tree.diagonals),
            "dfs_order": " ".join(f"s{x}" if kind == "side" else f"d{x[0]}{x[1]}" for kind, x in dfs_edge_order(tree)),
            "sign_degree1": tree_sign(tree, degrees),
        })
    return pd.DataFrame(rows)


def trees_payload(trees: list, polygon: DecoratedPolygon) -> dict:
    listed = []
    for tree in trees:
        vertices, edges = tree_table(tree, polygon)
        listed.append({
            "triangles": [list(t) for t in tree.triangles],
            "diagonals": [list(d) for d in tree.diagonals],
            "vertices": json.loads(vertices.to_json(orient="records")),
            "edges": json.loads(edges.to_json(orient="records")),
        })
    return {"ngon": len(polygon.vertices), "count": len(trees), "trees": listed}


def contributions_frame(result) -> pd.DataFrame:
    rows = []
    for i, c in enumerate(result.contributions):
        rows.append({
            "tree": i,
            "triangles": " ".join("".join(str(v) for v in t) for t in c.tree.triangles),
            "sign": c.sign,
            "re": c.value.real,
            "im": c.value.imag,
            "abs_error": c.error,
            "evaluations": c.evaluations,
            "exact": c.exact,
            "zero_reason": c.zero_reason,
        })
    return pd.DataFrame(rows, columns=["tree", "triangles", "sign", "re", "im", "abs_error", "evaluations",
                                       "exact", "zero_reason"])


def correlator_payload(spec, result) -> dict:
    trees = []
    for c in result.contributions:
        trees.append({
            "triangles": [list(t) for t in c.tree.triangles],
            "sign": c.sign,
            "value": complex_numeric(c.value, c.error, c.method),
            "evaluations": c.evaluations,
            "exact": c.exact,
            "zero_reason": c.zero_reason,
            "refinements": [{"resolution": step["resolution"], "value": numeric(step["value"], step["error"])}
                            for step in c.trace if "resolution" in step],
        })
    return {
        "spec": spec.name,
        "ngon": len(spec.decorations),
        "method": spec.method,
        "selection_rule": result.selection_rule,
        "value": complex_numeric(result.value, result.error, result.method),
        "evaluations": result.evaluations,
        "trees": trees,
        "conventions": config.conventions(),
        "convention_fingerprint": config.convention_fingerprint(),
    }


def invariance_payload(spec, report) -> dict:
    payload = correlator_payload(spec, report.reference)
    payload["rotations"] = [{
        "rotation": row["rotation"],
        "predicted_sign": row["predicted_sign"],
        "value": complex_numeric(complex(*row["value"]), row["abs_error"], spec.method),
        "deviation": numeric(row["deviation"]),
    } for row in report.rows]
    payload["max_deviation"] = numeric(report.max_deviation)
    return payload


def gauge_payload(spec, perturbation, report) -> dict:
    payload = correlator_payload(spec, report.reference)
    payload["perturbation"] = {"kind": perturbation.kind, "edge": str(perturbation.edge),
                               "amplitude": numeric(perturbation.amplitude)}
    payload["perturbed_value"] = complex_numeric(report.perturbed.value, report.perturbed.error, spec.method)
    payload["deviation"] = numeric(report.deviation, report.reference.error + report.perturbed.error)
    payload["cocycle"] = spec.cocycle
    payload["passed"] = report.passed
    return payload


def green_payload(rows: list) -> dict:
    return {"checks": [{"name": r["name"], "residual": numeric(r["residual"], r.get("error", 0.0)),
                        "threshold": numeric(r["threshold"]), "passed": r["passed"]} for r in rows],
            "convention_fingerprint": config.convention_fingerprint()}


def selftest_payload(df: pd.DataFrame) -> dict:
    return {"passed": bool(df["passed"].all()) if len(df) else True,
            "properties": [{"name": r["name"], "passed": bool(r["passed"]), "detail": r["detail"],
                            "seconds": numeric(r["seconds"])} for r in df.to_dict(orient="records")]}
