"""
Parsers Module

This module reads and writes the input files of the tool: dg category
presentations (``*.dgcat``, JSON documents with ``"format": "dgcat/1"``) and
correlator specs (JSON). It performs no computation; parsed categories are
handed to ``dgcat.validate`` and parsed specs to the correlator engine.

Syntax problems raise ``ParseError`` with the 1-based line and column of the
offending token; axiom violations raise ``ValidationError`` carrying the
full validation report. See docs/dgcat_grammar.md for the file format.
"""
import json
import logging
from pathlib import Path

from src.correlator import CorrelatorSpec, Decoration, Perturbation
from src.dgcat import DGCategory, validate
from src.errors import ParseError, ValidationError
from src.geometry import SpherePoint
from src.graded import RATIONAL, GradedVectorSpace, HomComplex, Letter, format_scalar, parse_rational
from src.sphere import constant, gaussian

DGCAT_FORMAT = "dgcat/1"
SPEC_FIELDS = {"name", "decorations", "base_point", "method", "resolution", "samples", "seed", "tolerance",
               "max_refinements", "workers", "cocycle", "perturbation"}


# --- Helpers ---

def _read(source) -> tuple:
    """Returns ``(text, origin)`` for a path or for raw JSON text."""
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        path = Path(source)
        try:
            return path.read_text(encoding="utf-8"), str(path)
        except OSError as e:
            raise ParseError(f"cannot read {path}: {e}") from e
    return source, "<string>"


def _locate(text: str, token) -> tuple:
    """Line and column of the first occurrence of ``token`` as it is written in JSON."""
    needle = json.dumps(token) if not isinstance(token, str) or not token.startswith('"') else token
    at = text.find(needle)
    if at < 0:
        return None, None
    line = text.count("\n", 0, at) + 1
    column = at - (text.rfind("\n", 0, at) + 1) + 1
    return line, column


def _load_json(text: str, origin: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{origin}: {e.msg}", e.lineno, e.colno) from e
    if not isinstance(doc, dict):
        raise ParseError(f"{origin}: the top level must be an object", 1, 1)
    return doc


def _fail(text: str, token, message: str):
    line, column = _locate(text, token)
    raise ParseError(message, line, column)


def _rational(text: str, raw):
    try:
        return parse_rational(raw)
    except ParseError:
        _fail(text, raw, f"malformed rational {raw!r}")


# --- dg categories ---

def parse_dgcat(source, check: bool = True) -> DGCategory:
    """Reads a ``dgcat/1`` presentation from a path or a JSON string.

    With ``check`` the category is validated and a ``ValidationError`` names the
    first violated axiom and its witness.
    """
    text, origin = _read(source)
    doc = _load_json(text, origin)
    if doc.get("format") != DGCAT_FORMAT:
        _fail(text, "format", f"{origin}: expected \"format\": \"{DGCAT_FORMAT}\"")
    if doc.get("field", "QQ") != "QQ":
        _fail(text, "field", f"{origin}: only the rational field \"QQ\" is supported")

    objects = doc.get("objects")
    if not isinstance(objects, list) or not objects or not all(isinstance(o, str) for o in objects):
        _fail(text, "objects", f"{origin}: \"objects\" must be a non-empty list of names")
    if len(set(objects)) != len(objects):
        _fail(text, "objects", f"{origin}: duplicate object names")

    homs, labels = {}, {}
    for key, body in doc.get("homs", {}).items():
        if "->" not in key:
            _fail(text, key, f"{origin}: Hom key {key!r} is not of the form \"X->Y\"")
        x, y = (part.strip() for part in key.split("->", 1))
        if x not in objects or y not in objects:
            _fail(text, key, f"{origin}: Hom {key!r} mentions an undeclared object")
        basis = []
        for item in body.get("basis", []):
            if not isinstance(item, dict) or "label" not in item or not isinstance(item.get("degree"), int):
                _fail(text, item, f"{origin}: basis entries need a label and an integer degree")
            basis.append(Letter(str(item["label"]), item["degree"]))
        index = {b.label: i for i, b in enumerate(basis)}
        if len(index) != len(basis):
            _fail(text, key, f"{origin}: duplicate basis labels in {key!r}")
        entries = {}
        for row in body.get("differential", []):
            if not isinstance(row, list) or len(row) != 3 or row[0] not in index or row[1] not in index:
                _fail(text, row, f"{origin}: differential rows are [target, source, \"p/q\"] in {key!r}")
            entries[(index[row[0]], index[row[1]])] = _rational(text, row[2])
        homs[(x, y)] = HomComplex.build(GradedVectorSpace(tuple(basis)), entries, RATIONAL, check=False)
        labels[(x, y)] = index

    composition = {}
    for row in doc.get("composition", []):
        if not isinstance(row, list) or len(row) != 7:
            _fail(text, row, f"{origin}: composition rows are [X, Y, Z, a, b, c, \"p/q\"]")
        x, y, z, a, b, c, coef = row
        try:
            ia, ib, ic = labels[(x, y)][a], labels[(y, z)][b], labels[(x, z)][c]
        except KeyError:
            _fail(text, row, f"{origin}: composition row {row} names an unknown basis element")
        cell = composition.setdefault((x, y, z), {}).setdefault((ia, ib), {})
        cell[ic] = cell.get(ic, 0) + _rational(text, coef)

    identities = {}
    for x, body in doc.get("identities", {}).items():
        if (x, x) not in labels:
            _fail(text, x, f"{origin}: identity of {x!r} needs a Hom \"{x}->{x}\"")
        try:
            identities[x] = {labels[(x, x)][k]: _rational(text, v) for k, v in body.items()}
        except KeyError as e:
            _fail(text, x, f"{origin}: identity of {x!r} names unknown element {e}")

    name = doc.get("name") or Path(origin).stem
    cat = DGCategory(tuple(objects), homs, composition, identities, RATIONAL, name)
    logging.info(f"Parsed category '{name}' with {len(objects)} object(s) from {origin}.")
    if check:
        report = validate(cat)
        if not report.ok:
            first = report.violations[0]
            raise ValidationError(f"{origin}: {first.axiom} fails for {tuple(first.witness)}", report)
    return cat


def dgcat_to_dict(cat: DGCategory) -> dict:
    homs = {}
    for (x, y), hom in sorted(cat.homs.items()):
        basis = hom.space.basis
        homs[f"{x}->{y}"] = {
            "basis": [{"label": b.label, "degree": b.degree} for b in basis],
            "differential": [[basis[t].label, basis[s].label, format_scalar(c)] for (t, s), c in hom.differential],
        }
    composition = []
    for (x, y, z), table in sorted(cat.composition.items()):
        for (a, b), result in sorted(table.items()):
            for c, coef in sorted(result.items()):
                composition.append([x, y, z, cat.label(x, y, a), cat.label(y, z, b), cat.label(x, z, c),
                                    format_scalar(coef)])
    identities = {x: {cat.label(x, x, i): format_scalar(c) for i, c in sorted(ident.items())}
                  for x, ident in sorted(cat.identities.items())}
    return {"format": DGCAT_FORMAT, "name": cat.name, "field": "QQ", "objects": list(cat.objects),
            "homs": homs, "composition": composition, "identities": identities}


def serialize_dgcat(cat: DGCategory, path=None) -> str:
    """JSON text of a category; parsing it back gives an equal presentation."""
    text = json.dumps(dgcat_to_dict(cat), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
        logging.info(f"Saved category '{cat.name}' to {path}")
    return text


# --- Correlator specs ---

def _coefficient(raw) -> complex:
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return complex(float(raw[0]), float(raw[1]))
    if isinstance(raw, str):
        return complex(float(parse_rational(raw)))
    return complex(raw)


def _decoration(raw: dict) -> Decoration:
    kind = raw.get("kind")
    coefficient = _coefficient(raw.get("coefficient", 1))
    if kind == "delta":
        if "points" in raw:
            points = tuple(SpherePoint.parse(p) for p in raw["points"])
            weights = tuple(float(w) for w in raw.get("weights", [1.0] * len(points)))
        else:
            points, weights = (SpherePoint.parse(raw.get("point")),), (1.0,)
        return Decoration("delta", coefficient, points, weights)
    center = SpherePoint.parse(raw.get("center", [0.0, 0.0]))
    return Decoration(kind, coefficient, center=center.z if center.z is not None else 0j,
                      width=float(raw.get("width", 1.0)))


def _eta(raw: dict):
    if raw.get("kind", "gaussian") == "constant":
        return constant(float(raw.get("coefficient", 1.0)))
    center = SpherePoint.parse(raw.get("center", [0.0, 0.0]))
    return gaussian(center.z, float(raw.get("width", 1.0)), float(raw.get("coefficient", 1.0)))


def parse_perturbation(raw: dict) -> Perturbation:
    """``{"kind": "exact"|"harmonic", "eta": {...}, "amplitude": t, "edge": "all"|k}``."""
    kind = raw.get("kind", "exact")
    eta = _eta(raw.get("eta", {})) if kind == "exact" else None
    return Perturbation(kind, eta, float(raw.get("amplitude", 0.0)), raw.get("edge", "all"))


def spec_from_dict(doc: dict, name: str = "") -> CorrelatorSpec:
    unknown = set(doc) - SPEC_FIELDS
    if unknown:
        raise ParseError(f"unknown spec field(s): {', '.join(sorted(unknown))}")
    raw_decorations = doc.get("decorations")
    if not isinstance(raw_decorations, list):
        raise ParseError("\"decorations\" must be a list")
    decorations = tuple(_decoration(d) for d in raw_decorations)
    options = {k: doc[k] for k in ("method", "resolution", "samples", "seed", "tolerance", "max_refinements",
                                   "workers", "cocycle") if k in doc}
    spec = CorrelatorSpec(decorations, SpherePoint.parse(doc.get("base_point", "inf")), name=doc.get("name", name))
    return spec.with_options(**options)


def parse_spec(source) -> CorrelatorSpec:
    """Reads a correlator spec from a path or a JSON string."""
    text, origin = _read(source)
    doc = _load_json(text, origin)
    try:
        spec = spec_from_dict(doc, Path(origin).stem)
    except ParseError as e:
        if e.line is None:
            token = next(iter(set(doc) - SPEC_FIELDS), None)
            line, column = _locate(text, token) if token else (None, None)
            raise ParseError(f"{origin}: {e}", line, column) from e
        raise
    except (TypeError, ValueError) as e:
        raise ParseError(f"{origin}: {e}") from e
    logging.info(f"Parsed spec '{spec.name}' with {len(spec.decorations)} decoration(s) from {origin}.")
    return spec


def parse_spec_perturbation(source) -> Perturbation:
    text, origin = _read(source)
    raw = _load_json(text, origin).get("perturbation")
    return parse_perturbation(raw) if raw else None


def spec_to_dict(spec: CorrelatorSpec) -> dict:
    return {
        "name": spec.name,
        "decorations": [d.to_dict() for d in spec.decorations],
        "base_point": spec.base_point.to_json(),
        "method": spec.method,
        "resolution": spec.resolution,
        "samples": spec.samples,
        "seed": spec.seed,
        "tolerance": spec.tolerance,
        "max_refinements": spec.max_refinements,
        "workers": spec.workers,
        "cocycle": spec.cocycle,
    }


def serialize_spec(spec: CorrelatorSpec, path=None) -> str:
    text = json.dumps(spec_to_dict(spec), indent=2)
    if path is not None:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
