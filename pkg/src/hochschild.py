"""
Hochschild Cohomology Module

Builds the truncated Hochschild bicomplex of a small dg category and computes
its cohomology by exact rank computations.

A cochain of column ``n`` over the object path ``X0 -> ... -> Xn`` is a map
``sA(X0,X1) ⊗ ... ⊗ sA(X(n-1),Xn) -> sA(X0,Xn)`` on the shifted Homs, where
``|sa| = |a| - 1``. An elementary cochain sends one basis word to one basis
element; its shifted degree ``q`` is the output degree minus the input
degrees, and it sits in total degree ``q + 1`` (so HH^0 is the centre of an
algebra in degree 0).

Shifted bar structure maps: ``b1(sa) = -s(da)`` and
``b2(sa, sb) = (-1)^{|sa|} s(ab)``. The differential is the Gerstenhaber
bracket ``D(phi) = b{phi} - (-1)^q phi{b}``. Columns above ``max_column`` form
a subcomplex; the truncation is the quotient complex.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from sympy import QQ

from src import config
from src.dgcat import DGCategory
from src.errors import RegimeError, ValidationError
from src.graded import RATIONAL, format_scalar
from src.linalg import complement_basis, exact_rank, image_basis, kernel_basis


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


@dataclass(frozen=True, order=True)
class CochainKey:
    """Elementary cochain: object path, one basis index per input Hom, output basis index."""

    objects: tuple
    inputs: tuple
    output: int

    @property
    def column(self) -> int:
        return len(self.inputs)


@dataclass
class Cochain:
    """A finite linear combination of elementary cochains."""

    coefficients: dict = field(default_factory=dict)

    def is_zero(self) -> bool:
        return not any(c != 0 for c in self.coefficients.values())

    def columns(self) -> set:
        return {k.column for k, c in self.coefficients.items() if c != 0}

    def __sub__(self, other: "Cochain") -> "Cochain":
        out = dict(self.coefficients)
        for k, c in other.coefficients.items():
            out[k] = out.get(k, 0) - c
        return Cochain({k: c for k, c in out.items() if c != 0})

    def value(self, objects: tuple, inputs: tuple) -> dict:
        """Output vector ``{output index: coefficient}`` on one input basis word."""
        return {k.output: c for k, c in self.coefficients.items()
                if k.objects == tuple(objects) and k.inputs == tuple(inputs) and c != 0}

    def to_dict(self, cat: DGCategory) -> list:
        rows = []
        for key, coeff in sorted(self.coefficients.items()):
            if coeff == 0:
                continue
            objs = key.objects
            inputs = [cat.label(objs[i], objs[i + 1], t) for i, t in enumerate(key.inputs)]
            rows.append({
                "objects": list(objs),
                "inputs": inputs,
                "output": cat.label(objs[0], objs[-1], key.output),
                "coefficient": format_scalar(coeff),
            })
        return rows


@dataclass
class HomologyResult:
    kind: str
    name: str
    dims: dict
    max_column: int
    window: tuple
    stable: bool
    window_reliable: bool
    previous_dims: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "category": self.name,
            "max_column": self.max_column,
            "degree_window": list(self.window),
            "dims": {str(k): v for k, v in sorted(self.dims.items())},
            "previous_dims": {str(k): v for k, v in sorted(self.previous_dims.items())},
            "stable": self.stable,
            "window_reliable": self.window_reliable,
        }


class HochschildBicomplex:
    """Columns ``0..max_column`` of the Hochschild bicomplex of ``cat``.

    ``d1(n)`` keeps the column (internal differentials), ``d2(n)`` raises it by
    one (composition terms); their sum is the total differential.
    """

    def __init__(self, cat: DGCategory, max_column: int):
        if not cat.field.exact:
            raise RegimeError("Hochschild cohomology is computed in the rational regime only")
        self.cat = cat
        self.max_column = max_column
        self._factorizations = {}
        for (x, y, z), table in cat.composition.items():
            for (u, v), result in table.items():
                for c, coeff in result.items():
                    self._factorizations.setdefault((x, z, c), []).append((y, u, v, coeff))
        self._sources = {}
        for (x, y), hom in cat.homs.items():
            for (t, s), coeff in hom.differential:
                self._sources.setdefault((x, y, t), []).append((s, coeff))
        self._by_degree = None
        self.column_basis = lru_cache(maxsize=None)(self._column_basis)

    # --- Basis ---

    def shifted_degree(self, x, y, index: int) -> int:
        return self.cat.degree(x, y, index) - 1

    def _paths(self, length: int) -> list:
        paths = [(x,) for x in self.cat.objects]
        for _ in range(length):
            paths = [p + (y,) for p in paths for y in self.cat.objects if self.cat.nonzero(p[-1], y)]
        return [p for p in paths if self.cat.nonzero(p[0], p[-1])]

    def _column_basis(self, n: int) -> list:
        keys = []
        for path in self._paths(n):
            ranges = [range(self.cat.hom(path[i], path[i + 1]).dimension) for i in range(n)]
            for word in product(*ranges):
                for out in range(self.cat.hom(path[0], path[-1]).dimension):
                    keys.append(CochainKey(path, word, out))
        return keys

    def shifted_cochain_degree(self, key: CochainKey) -> int:
        objs = key.objects
        inputs = sum(self.shifted_degree(objs[i], objs[i + 1], t) for i, t in enumerate(key.inputs))
        return self.shifted_degree(objs[0], objs[-1], key.output) - inputs

    def total_degree(self, key: CochainKey) -> int:
        return self.shifted_cochain_degree(key) + config.HH_DEGREE_OFFSET

    def degrees(self) -> list:
        self.total_basis(0)
        return sorted(self._by_degree)

    def total_basis(self, degree: int) -> list:
        if self._by_degree is None:
            self._by_degree = {}
            for n in range(self.max_column + 1):
                keys = self.column_basis(n)
                logging.info(f"Hochschild column {n}: {len(keys)} elementary cochains.")
                for key in keys:
                    self._by_degree.setdefault(self.total_degree(key), []).append(key)
        return self._by_degree.get(degree, [])

    # --- Differential ---

    def contributions(self, key: CochainKey) -> dict:
        """``D`` of one elementary cochain, split as ``{target key: coefficient}`` (all columns)."""
        cat = self.cat
        objs, word, out = key.objects, key.inputs, key.output
        n = len(word)
        x0, xn = objs[0], objs[-1]
        q = self.shifted_cochain_degree(key)
        out_shifted = self.shifted_degree(x0, xn, out)
        prefix = [0]
        for i, t in enumerate(word):
            prefix.append(prefix[-1] + self.shifted_degree(objs[i], objs[i + 1], t))
        result = {}

        def add(target, coeff):
            result[target] = result.get(target, 0) + coeff

        # b1 on the output
        for target, coeff in cat.differential(x0, xn, out).items():
            add(CochainKey(objs, word, target), -coeff)

        # b1 on one input
        for i in range(n):
            for source, coeff in self._sources.get((objs[i], objs[i + 1], word[i]), []):
                new_word = word[:i] + (source,) + word[i + 1:]
                add(CochainKey(objs, new_word, out), _sign(q + 1 + prefix[i]) * -coeff)

        # b2(phi(x1..xn), x(n+1))
        for y in cat.objects:
            for u in range(cat.hom(xn, y).dimension):
                if not cat.nonzero(x0, y):
                    continue
                for c, coeff in cat.compose(x0, xn, y, out, u).items():
                    add(CochainKey(objs + (y,), word + (u,), c), _sign(out_shifted) * coeff)

        # b2(x1, phi(x2..x(n+1)))
        for y in cat.objects:
            if not cat.nonzero(y, xn):
                continue
            for u in range(cat.hom(y, x0).dimension):
                su = self.shifted_degree(y, x0, u)
                for c, coeff in cat.compose(y, x0, xn, u, out).items():
                    add(CochainKey((y,) + objs, (u,) + word, c), _sign(q * su + su) * coeff)

        # phi(.., b2(x_i, x_(i+1)), ..)
        for i in range(n):
            left, right = objs[i], objs[i + 1]
            for y, u, v, coeff in self._factorizations.get((left, right, word[i]), []):
                su = self.shifted_degree(left, y, u)
                new_objs = objs[:i + 1] + (y,) + objs[i + 1:]
                new_word = word[:i] + (u, v) + word[i + 1:]
                add(CochainKey(new_objs, new_word, out), _sign(q + 1 + prefix[i] + su) * coeff)

        return {k: c for k, c in result.items() if c != 0}

    def _matrix(self, sources: list, targets: list, keep):
        index = {k: i for i, k in enumerate(targets)}
        entries = {}
        for j, key in enumerate(sources):
            for target, coeff in self.contributions(key).items():
                if not keep(key, target):
                    continue
                if target not in index:
                    raise ValidationError(f"differential left the assembled basis at {target}")
                entries[(index[target], j)] = entries.get((index[target], j), 0) + coeff
        return RATIONAL.matrix(entries, (len(targets), len(sources)))

    def d1(self, n: int):
        return self._matrix(self.column_basis(n), self.column_basis(n),
                            lambda s, t: t.column == s.column)

    def d2(self, n: int):
        return self._matrix(self.column_basis(n), self.column_basis(n + 1),
                            lambda s, t: t.column == s.column + 1)

    def total_differential(self, degree: int):
        """Matrix of ``D: T^degree -> T^(degree+1)`` on the truncation."""
        return self._matrix(self.total_basis(degree), self.total_basis(degree + 1),
                            lambda s, t: t.column <= self.max_column)

    def apply(self, cochain: Cochain, truncate: bool = True) -> Cochain:
        out = {}
        for key, coeff in cochain.coefficients.items():
            for target, c in self.contributions(key).items():
                if truncate and target.column > self.max_column:
                    continue
                out[target] = out.get(target, 0) + coeff * c
        return Cochain({k: c for k, c in out.items() if c != 0})


# --- Cohomology ---

def _check_arguments(cat: DGCategory, max_column: int, window):
    if not cat.field.exact:
        raise RegimeError("homology dimensions are computed with exact rationals only")
    if max_column < 1:
        raise ValidationError(f"max_column must be at least 1, got {max_column}")
    window = tuple(window) if window is not None else config.DEGREE_WINDOW
    if window[0] > window[1]:
        raise ValidationError(f"empty degree window {window}")
    return window


def window_reliable(cat: DGCategory, max_column: int, window: tuple) -> bool:
    """Columns above the truncation only reach total degrees above ``max_column`` when all Homs sit in degree 0."""
    return cat.degrees_present() <= {0} and window[1] <= max_column - 1


def _hochschild_dims(cat: DGCategory, max_column: int, window: tuple) -> dict:
    lo, hi = window
    bicomplex = HochschildBicomplex(cat, max_column)
    ranks = {p: exact_rank(bicomplex.total_differential(p)) for p in range(lo - 1, hi + 1)}
    return {p: len(bicomplex.total_basis(p)) - ranks[p] - ranks[p - 1] for p in range(lo, hi + 1)}


def hochschild_cohomology(cat: DGCategory, max_column: int, degree_window=None) -> HomologyResult:
    """Dimensions of HH^p for p in the window, with a stability flag against ``max_column - 1``."""
    window = _check_arguments(cat, max_column, degree_window)
    logging.info(f"--- Starting Hochschild cohomology of '{cat.name}' through column {max_column} ---")
    dims = _hochschild_dims(cat, max_column, window)
    previous = _hochschild_dims(cat, max_column - 1, window)
    reliable = window_reliable(cat, max_column, window)
    if not reliable:
        logging.warning(f"Degree window {window} exceeds the range fixed by {max_column} columns.")
    result = HomologyResult("HH", cat.name, dims, max_column, window, dims == previous, reliable, previous)
    logging.info(f"HH dims {dims} (stable={result.stable}).")
    return result


def hh0_cocycles(cat: DGCategory, max_column: int = 2) -> list:
    """Representatives of a basis of HH^0 as cochain families."""
    _check_arguments(cat, max_column, (0, 0))
    bicomplex = HochschildBicomplex(cat, max_column)
    basis = bicomplex.total_basis(0)
    cocycles = kernel_basis(bicomplex.total_differential(0))
    boundaries = image_basis(bicomplex.total_differential(-1))
    classes = complement_basis(boundaries, cocycles, len(basis))
    logging.info(f"HH^0 of '{cat.name}': {len(classes)} class(es) from {len(cocycles)} cocycle(s).")
    return [Cochain({basis[i]: QQ(c) for i, c in enumerate(vec) if c != 0}) for vec in classes]


def d_squared_defects(cat: DGCategory, max_column: int) -> list:
    """Total degrees ``p`` where ``D(p+1) D(p)`` is non-zero on the truncation."""
    bicomplex = HochschildBicomplex(cat, max_column)
    bad = []
    for p in bicomplex.degrees():
        first, second = bicomplex.total_differential(p), bicomplex.total_differential(p + 1)
        if 0 in first.shape or 0 in second.shape:
            continue
        if not second.matmul(first).is_zero_matrix:
            bad.append(p)
    if bad:
        logging.error(f"D^2 != 0 on '{cat.name}' in total degree(s) {bad}")
    return bad
