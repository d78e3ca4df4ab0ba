"""
DG Category Module

In-memory presentation of a small dg category: objects, a Hom complex for
each ordered pair of objects, sparse composition tables and identities.

Composition is read in diagrammatic order: ``compose(X, Y, Z, a, b)`` takes
``a`` in Hom(X, Y) and ``b`` in Hom(Y, Z) to Hom(X, Z), and the Leibniz rule is
``d(ab) = (da)b + (-1)^{|a|} a(db)``.

Also holds the validation report and the builders for the bundled and
randomized categories.
"""
import logging
import random
from dataclasses import dataclass, field
from itertools import product

from sympy import QQ

from src.graded import RATIONAL, Field, GradedVectorSpace, HomComplex, Letter, tensor

_EMPTY = GradedVectorSpace(())


@dataclass(frozen=True, eq=False)
class DGCategory:
    """A finite dg category presentation.

    ``composition[(X, Y, Z)]`` maps ``(a, b)`` basis indices to ``{c: coefficient}``;
    ``identities[X]`` maps basis indices of End(X) to coefficients.
    """

    objects: tuple
    homs: dict
    composition: dict
    identities: dict
    field: Field = RATIONAL
    name: str = ""

    def hom(self, source, target) -> HomComplex:
        found = self.homs.get((source, target))
        if found is None:
            return HomComplex(_EMPTY, (), self.field)
        return found

    def nonzero(self, source, target) -> bool:
        return self.hom(source, target).dimension > 0

    def degree(self, source, target, index: int) -> int:
        return self.hom(source, target).space.degree_of(index)

    def label(self, source, target, index: int) -> str:
        return self.hom(source, target).space.basis[index].label

    def compose(self, x, y, z, a: int, b: int) -> dict:
        return self.composition.get((x, y, z), {}).get((a, b), {})

    def compose_vectors(self, x, y, z, u: dict, v: dict) -> dict:
        """Bilinear extension of ``compose`` to ``{index: coefficient}`` vectors."""
        out = {}
        for a, ca in u.items():
            for b, cb in v.items():
                for c, cc in self.compose(x, y, z, a, b).items():
                    out[c] = out.get(c, 0) + ca * cb * cc
        return {k: v for k, v in out.items() if v != 0}

    def differential(self, source, target, index: int) -> dict:
        return self.hom(source, target).apply(index)

    def identity(self, obj) -> dict:
        return dict(self.identities.get(obj, {}))

    def degrees_present(self) -> set:
        return {b.degree for h in self.homs.values() for b in h.space.basis}

    def max_hom_dimension(self) -> int:
        return max((h.dimension for h in self.homs.values()), default=0)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "objects": list(self.objects),
            "homs": {f"{x}->{y}": h.space.dims() for (x, y), h in sorted(self.homs.items()) if h.dimension},
        }


# --- Validation ---

@dataclass
class Violation:
    axiom: str
    witness: tuple
    detail: str = ""

    def to_dict(self) -> dict:
        return {"axiom": self.axiom, "witness": list(self.witness), "detail": self.detail}


@dataclass
class ValidationReport:
    name: str = ""
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, axiom: str, witness: tuple, detail: str = ""):
        self.violations.append(Violation(axiom, witness, detail))

    def axioms(self) -> set:
        return {v.axiom for v in self.violations}

    def to_dict(self) -> dict:
        return {"name": self.name, "valid": self.ok, "violations": [v.to_dict() for v in self.violations]}


def _sub(u: dict, v: dict) -> dict:
    out = dict(u)
    for k, c in v.items():
        out[k] = out.get(k, 0) - c
    return {k: c for k, c in out.items() if c != 0}


def _scale(u: dict, s) -> dict:
    return {k: s * c for k, c in u.items() if s * c != 0}


def _add(u: dict, v: dict) -> dict:
    return _sub(u, _scale(v, -1))


def validate(cat: DGCategory) -> ValidationReport:
    """Checks every dg-category axiom; the report names each violating basis tuple."""
    report = ValidationReport(cat.name)
    objs = cat.objects
    for (x, y), hom in sorted(cat.homs.items()):
        if x not in objs or y not in objs:
            report.add("objects", (x, y), "Hom between undeclared objects")
            continue
        for problem in hom.validate():
            report.add("differential", (f"{x}->{y}",), problem)

    for (x, y, z), table in sorted(cat.composition.items()):
        for (a, b), result in sorted(table.items()):
            expected = cat.degree(x, y, a) + cat.degree(y, z, b)
            for c in result:
                if cat.degree(x, z, c) != expected:
                    report.add("composition-degree", (cat.label(x, y, a), cat.label(y, z, b)),
                               f"product lands in degree {cat.degree(x, z, c)}, expected {expected}")

    for x in objs:
        ident = cat.identity(x)
        if not cat.nonzero(x, x) or not ident:
            report.add("identity", (x,), "object has no identity")
            continue
        if any(cat.degree(x, x, i) != 0 for i in ident):
            report.add("identity", (x,), "identity is not of degree 0")
        if _differential_of(cat, x, x, ident):
            report.add("identity", (x,), "identity is not closed")
        for y in objs:
            for a in range(cat.hom(x, y).dimension):
                if cat.compose_vectors(x, x, y, ident, {a: QQ(1)}) != {a: QQ(1)}:
                    report.add("unit", (f"id_{x}", cat.label(x, y, a)), "left unit law fails")
            for a in range(cat.hom(y, x).dimension):
                if cat.compose_vectors(y, x, x, {a: QQ(1)}, ident) != {a: QQ(1)}:
                    report.add("unit", (cat.label(y, x, a), f"id_{x}"), "right unit law fails")

    for w, x, y, z in product(objs, repeat=4):
        for a, b, c in product(range(cat.hom(w, x).dimension), range(cat.hom(x, y).dimension),
                               range(cat.hom(y, z).dimension)):
            left = cat.compose_vectors(w, y, z, cat.compose(w, x, y, a, b), {c: QQ(1)})
            right = cat.compose_vectors(w, x, z, {a: QQ(1)}, cat.compose(x, y, z, b, c))
            if _sub(left, right):
                report.add("associativity", (cat.label(w, x, a), cat.label(x, y, b), cat.label(y, z, c)))

    for x, y, z in product(objs, repeat=3):
        for a, b in product(range(cat.hom(x, y).dimension), range(cat.hom(y, z).dimension)):
            lhs = _differential_of(cat, x, z, cat.compose(x, y, z, a, b))
            da = cat.compose_vectors(x, y, z, cat.differential(x, y, a), {b: QQ(1)})
            sign = -1 if cat.degree(x, y, a) % 2 else 1
            adb = cat.compose_vectors(x, y, z, {a: QQ(1)}, cat.differential(y, z, b))
            if _sub(lhs, _add(da, _scale(adb, sign))):
                report.add("leibniz", (cat.label(x, y, a), cat.label(y, z, b)))

    if report.ok:
        logging.info(f"Category '{cat.name}' passed validation.")
    else:
        logging.warning(f"Category '{cat.name}' has {len(report.violations)} axiom violation(s).")
    return report


def _differential_of(cat: DGCategory, x, y, vector: dict) -> dict:
    out = {}
    for i, c in vector.items():
        for t, dc in cat.differential(x, y, i).items():
            out[t] = out.get(t, 0) + c * dc
    return {k: v for k, v in out.items() if v != 0}


# --- Builders ---

def _one_object(name: str, obj: str, labels: list, products: dict, identity: dict) -> DGCategory:
    space = GradedVectorSpace(tuple(Letter(label, 0) for label in labels))
    hom = HomComplex.build(space, {}, RATIONAL)
    index = {label: i for i, label in enumerate(labels)}
    table = {}
    for (a, b), c in products.items():
        table[(index[a], index[b])] = {index[c]: QQ(1)}
    ident = {index[k]: QQ(v) for k, v in identity.items()}
    return DGCategory((obj,), {(obj, obj): hom}, {(obj, obj, obj): table}, {obj: ident}, RATIONAL, name)


def point_category() -> DGCategory:
    """One object whose endomorphisms are the ground field in degree 0."""
    return _one_object("point", "pt", ["1"], {("1", "1"): "1"}, {"1": 1})


def matrix_category(n: int) -> DGCategory:
    """One object with End = the n x n matrices, basis ``e<i><j>`` in degree 0."""
    labels = [f"e{i}{j}" for i in range(1, n + 1) for j in range(1, n + 1)]
    products = {(f"e{i}{j}", f"e{j}{k}"): f"e{i}{k}"
                for i in range(1, n + 1) for j in range(1, n + 1) for k in range(1, n + 1)}
    identity = {f"e{i}{i}": 1 for i in range(1, n + 1)}
    return _one_object(f"M{n}", "M", labels, products, identity)


def disjoint_union(*cats: DGCategory) -> DGCategory:
    """Coproduct of categories; object ``X`` of the i-th factor becomes ``"<i>.X"``."""
    objects, homs, composition, identities = [], {}, {}, {}
    for i, cat in enumerate(cats):
        rename = {x: f"{i}.{x}" for x in cat.objects}
        objects.extend(rename[x] for x in cat.objects)
        for (x, y), hom in cat.homs.items():
            homs[(rename[x], rename[y])] = hom
        for (x, y, z), table in cat.composition.items():
            composition[(rename[x], rename[y], rename[z])] = table
        for x, ident in cat.identities.items():
            identities[rename[x]] = ident
    name = "+".join(c.name for c in cats)
    return DGCategory(tuple(objects), homs, composition, identities, RATIONAL, name)


def _random_scalar(rng: random.Random):
    num = 0
    while num == 0:
        num = rng.randint(-3, 3)
    return QQ(num, rng.randint(1, 3))


def _random_complex(rng: random.Random, prefix: str, dimension: int, top_degree: int) -> HomComplex:
    """A sum of cells: closed generators, and pairs ``x -> c*y`` one degree apart."""
    letters, entries = [], {}
    while len(letters) < dimension:
        degree = rng.randint(0, top_degree)
        if len(letters) + 2 <= dimension and degree < top_degree and rng.random() < 0.5:
            src = len(letters)
            letters.append(Letter(f"{prefix}{src}", degree))
            letters.append(Letter(f"{prefix}{src + 1}", degree + 1))
            entries[(src + 1, src)] = _random_scalar(rng)
        else:
            letters.append(Letter(f"{prefix}{len(letters)}", degree))
    return HomComplex.build(GradedVectorSpace(tuple(letters)), entries, RATIONAL)


def random_category(rng: random.Random, n_objects: int = None, max_dimension: int = 3,
                    max_degree: int = 2) -> DGCategory:
    """A random valid category on objects ``o0, o1, ...`` with upper-triangular Homs.

    End(oi) is the square-zero extension ``k id + M_i`` of the ground field by a
    random complex ``M_i``: products inside ``M_i`` vanish and ``M_i`` acts by zero
    on every other Hom. Hom(oi, oj) vanishes unless i < j. With three objects,
    Hom(o0, o2) contains Hom(o0, o1) ⊗ Hom(o1, o2) plus an extra random summand,
    and composition is the inclusion of the tensor product, so it is a chain map
    and trivially associative.
    """
    n = n_objects if n_objects is not None else rng.randint(1, 3)
    objs = tuple(f"o{i}" for i in range(n))
    homs, composition, identities = {}, {}, {}
    unit = HomComplex.build(GradedVectorSpace((Letter("id", 0),)), {}, RATIONAL)
    for i, x in enumerate(objs):
        extension = rng.randint(0, min(2, max_dimension - 1))
        homs[(x, x)] = _direct_sum(unit, _random_complex(rng, f"e{i}.", extension, max_degree))
        identities[x] = {0: QQ(1)}
    low_degree = max(0, max_degree // 2)
    if n >= 2:
        d01 = rng.randint(1, max_dimension)
        homs[(objs[0], objs[1])] = _random_complex(rng, "f", d01, low_degree)
    if n >= 3:
        d12 = rng.randint(1, max(1, max_dimension // d01))
        homs[(objs[1], objs[2])] = _random_complex(rng, "g", d12, low_degree)
        product_cplx = tensor(homs[(objs[0], objs[1])], homs[(objs[1], objs[2])])
        extra_dim = rng.randint(0, max(0, max_dimension - product_cplx.dimension))
        extra = _random_complex(rng, "h", extra_dim, max_degree)
        homs[(objs[0], objs[2])] = _direct_sum(product_cplx, extra)
        table = {}
        for a in range(d01):
            for b in range(d12):
                table[(a, b)] = {a * d12 + b: QQ(1)}
        composition[(objs[0], objs[1], objs[2])] = table

    for (x, y), hom in homs.items():
        if x == y:
            continue
        composition[(x, x, y)] = {(0, a): {a: QQ(1)} for a in range(hom.dimension)}
        composition[(x, y, y)] = {(a, 0): {a: QQ(1)} for a in range(hom.dimension)}
    for x in objs:
        size = homs[(x, x)].dimension
        table = {(0, a): {a: QQ(1)} for a in range(size)}
        table.update({(a, 0): {a: QQ(1)} for a in range(1, size)})
        composition[(x, x, x)] = table
    return DGCategory(objs, homs, composition, identities, RATIONAL, f"random-{n}")


def _direct_sum(first: HomComplex, second: HomComplex) -> HomComplex:
    offset = first.dimension
    space = GradedVectorSpace(first.space.basis + second.space.basis)
    entries = dict(first.differential)
    for (t, s), c in second.differential:
        entries[(t + offset, s + offset)] = c
    return HomComplex.build(space, entries, first.field)
