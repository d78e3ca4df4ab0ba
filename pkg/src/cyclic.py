"""
Cyclic Homology Module

Signed cyclic coinvariants of a small dg category (cyclic words of shifted
morphisms around closed object paths), their necklace differential, cyclic
homology, invariant pairings and the map turning cyclic functionals into
Hochschild cochains.

A cyclic word ``(x0, ..., xn)`` sits in column ``n`` and in homological degree
``-(|sx0| + ... + |sxn|) - 1``. The differential applies ``b1`` to each letter
and ``b2`` to each cyclically adjacent pair, after rotating that position to the
front with its Koszul sign. Columns up to ``max_column`` form a subcomplex.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from src.dgcat import DGCategory
from src.errors import DegreeMismatchError, RegimeError, ValidationError
from src.graded import RATIONAL, Letter, SignedCyclicWord, cyclic_normalize, format_scalar, vanishes_in_coinvariants
from src.hochschild import Cochain, CochainKey, HochschildBicomplex, HomologyResult, _check_arguments, window_reliable
from src.linalg import exact_rank


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


def letter_label(label: str, source, target) -> str:
    return f"{label}@{source}>{target}"


class CyclicComplex:
    """Signed cyclic coinvariants through ``max_column`` with the necklace differential."""

    def __init__(self, cat: DGCategory, max_column: int):
        if not cat.field.exact:
            raise RegimeError("cyclic homology is computed in the rational regime only")
        self.cat = cat
        self.max_column = max_column
        self._letters = {}
        self._positions = {}
        for (x, y), hom in sorted(cat.homs.items()):
            for i, basis in enumerate(hom.space.basis):
                letter = Letter(letter_label(basis.label, x, y), basis.degree - 1)
                self._letters[(x, y, i)] = letter
                self._positions[letter] = (x, y, i)
        self._by_degree = None
        self.boundary = lru_cache(maxsize=None)(self._boundary)

    def letter(self, source, target, index: int) -> Letter:
        return self._letters[(source, target, index)]

    def position(self, letter: Letter) -> tuple:
        return self._positions[letter]

    @staticmethod
    def degree(letters: tuple) -> int:
        return -sum(letter.degree for letter in letters) - 1

    def project(self, letters: tuple) -> dict:
        """Image of a linear word in the coinvariants, as ``{canonical letters: sign}``."""
        word = SignedCyclicWord(tuple(letters))
        if vanishes_in_coinvariants(word):
            return {}
        canonical, sign = cyclic_normalize(word)
        return {canonical.letters: sign}

    def _cycles(self, n: int) -> list:
        paths = [(x,) for x in self.cat.objects]
        for _ in range(n):
            paths = [p + (y,) for p in paths for y in self.cat.objects if self.cat.nonzero(p[-1], y)]
        return [p for p in paths if self.cat.nonzero(p[-1], p[0])]

    def column_basis(self, n: int) -> list:
        seen = set()
        for cycle in self._cycles(n):
            closed = cycle + (cycle[0],)
            ranges = [range(self.cat.hom(closed[i], closed[i + 1]).dimension) for i in range(n + 1)]
            for word in product(*ranges):
                letters = tuple(self._letters[(closed[i], closed[i + 1], w)] for i, w in enumerate(word))
                seen.update(self.project(letters))
        return sorted(seen)

    def degrees(self) -> list:
        self.basis(0)
        return sorted(self._by_degree)

    def basis(self, degree: int) -> list:
        if self._by_degree is None:
            self._by_degree = {}
            for n in range(self.max_column + 1):
                words = self.column_basis(n)
                logging.info(f"Cyclic column {n}: {len(words)} non-vanishing cyclic words.")
                for w in words:
                    self._by_degree.setdefault(self.degree(w), []).append(w)
        return self._by_degree.get(degree, [])

    def _boundary(self, letters: tuple) -> dict:
        cat = self.cat
        out = {}

        def add(new_letters, coeff):
            for canonical, sign in self.project(new_letters).items():
                out[canonical] = out.get(canonical, 0) + sign * coeff

        for rotated in SignedCyclicWord(tuple(letters)).rotations():
            first = rotated.letters[0]
            x, y, a = self._positions[first]
            rest = rotated.letters[1:]
            for t, c in cat.differential(x, y, a).items():
                add((self._letters[(x, y, t)],) + rest, -rotated.sign * c)
            if len(rotated.letters) < 2:
                continue
            _, z, b = self._positions[rotated.letters[1]]
            for c, coeff in cat.compose(x, y, z, a, b).items():
                add((self._letters[(x, z, c)],) + rotated.letters[2:],
                    rotated.sign * _sign(first.degree) * coeff)
        return {k: c for k, c in out.items() if c != 0}

    def differential(self, degree: int):
        """Matrix of the boundary from degree ``degree`` to ``degree - 1``."""
        sources, targets = self.basis(degree), self.basis(degree - 1)
        index = {w: i for i, w in enumerate(targets)}
        entries = {}
        for j, word in enumerate(sources):
            for target, coeff in self.boundary(word).items():
                entries[(index[target], j)] = entries.get((index[target], j), 0) + coeff
        return RATIONAL.matrix(entries, (len(targets), len(sources)))


def _cyclic_dims(cat: DGCategory, max_column: int, window: tuple) -> dict:
    lo, hi = window
    cplx = CyclicComplex(cat, max_column)
    ranks = {p: exact_rank(cplx.differential(p)) for p in range(lo, hi + 2)}
    return {p: len(cplx.basis(p)) - ranks[p] - ranks[p + 1] for p in range(lo, hi + 1)}


def cyclic_homology(cat: DGCategory, max_column: int, degree_window=None) -> HomologyResult:
    """Dimensions of HC_p for p in the window, with a stability flag against ``max_column - 1``."""
    window = _check_arguments(cat, max_column, degree_window)
    logging.info(f"--- Starting cyclic homology of '{cat.name}' through column {max_column} ---")
    dims = _cyclic_dims(cat, max_column, window)
    previous = _cyclic_dims(cat, max_column - 1, window)
    reliable = window_reliable(cat, max_column, window)
    if not reliable:
        logging.warning(f"Degree window {window} exceeds the range fixed by {max_column} columns.")
    result = HomologyResult("HC", cat.name, dims, max_column, window, dims == previous, reliable, previous)
    logging.info(f"HC dims {dims} (stable={result.stable}).")
    return result


# --- Pairings ---

@dataclass(frozen=True, eq=False)
class PairingTarget:
    """Pairings ``sA(X,Y) ⊗ sA(Y,X) -> H*`` into the dual of a line ``H`` of degree ``h_degree``.

    ``matrices[(X, Y)]`` maps basis index pairs ``(a, b)`` to the pairing value.
    """

    h_degree: int
    matrices: dict
    name: str = ""

    def pair(self, x, y, a: int, b: int):
        return self.matrices.get((x, y), {}).get((a, b), QQ(0))

    def pair_vectors(self, x, y, u: dict, v: dict):
        return sum((ca * cb * self.pair(x, y, a, b) for a, ca in u.items() for b, cb in v.items()), QQ(0))

    def matrix(self, cat: DGCategory, x, y) -> DomainMatrix:
        shape = (cat.hom(x, y).dimension, cat.hom(y, x).dimension)
        return RATIONAL.matrix(self.matrices.get((x, y), {}), shape)

    def validate(self, cat: DGCategory) -> list:
        """Lists failures of degree, non-degeneracy, compatibility with d and cyclic invariance."""
        problems = []
        for (x, y), table in sorted(self.matrices.items()):
            for (a, b), value in sorted(table.items()):
                total = (cat.degree(x, y, a) - 1) + (cat.degree(y, x, b) - 1) + self.h_degree
                if value != 0 and total != 0:
                    problems.append(f"degree: <{cat.label(x, y, a)}, {cat.label(y, x, b)}> pairs into degree {total}")
        for x, y in product(cat.objects, repeat=2):
            if not cat.nonzero(x, y) and not cat.nonzero(y, x):
                continue
            mat = self.matrix(cat, x, y)
            if mat.shape[0] != mat.shape[1] or exact_rank(mat) != mat.shape[0]:
                problems.append(f"non-degeneracy: pairing {x}->{y} with {y}->{x} is degenerate")
        for x, y in product(cat.objects, repeat=2):
            for a, b in product(range(cat.hom(x, y).dimension), range(cat.hom(y, x).dimension)):
                sa = cat.degree(x, y, a) - 1
                first = self.pair_vectors(x, y, cat.differential(x, y, a), {b: QQ(1)})
                second = self.pair_vectors(x, y, {a: QQ(1)}, cat.differential(y, x, b))
                if first + _sign(sa) * second != 0:
                    problems.append(f"differential: {cat.label(x, y, a)}, {cat.label(y, x, b)}")
        for x, y, z in product(cat.objects, repeat=3):
            for a, b, c in product(range(cat.hom(x, y).dimension), range(cat.hom(y, z).dimension),
                                   range(cat.hom(z, x).dimension)):
                sa, sb = cat.degree(x, y, a) - 1, cat.degree(y, z, b) - 1
                lhs = _sign(sa) * self.pair_vectors(x, z, cat.compose(x, y, z, a, b), {c: QQ(1)})
                rhs = _sign(sb) * self.pair_vectors(x, y, {a: QQ(1)}, cat.compose(y, z, x, b, c))
                if lhs != rhs:
                    problems.append(f"cyclicity: {cat.label(x, y, a)}, {cat.label(y, z, b)}, {cat.label(z, x, c)}")
        return problems

    def dual_output(self, cat: DGCategory, x, y, values: dict) -> dict:
        """The ``o`` in sA(X,Y) with ``<o, w> = values[w]`` for every basis ``w`` of sA(Y,X)."""
        mat = self.matrix(cat, x, y)
        n = mat.shape[0]
        rhs = DomainMatrix([[QQ(values.get(j, 0))] for j in range(n)], (n, 1), QQ)
        solution = mat.transpose().convert_to(QQ).inv().to_dense().matmul(rhs).to_list()
        return {i: row[0] for i, row in enumerate(solution) if row[0] != 0}


def _trace(cat: DGCategory, obj, vector: dict):
    support = set(cat.identity(obj))
    return sum((c for i, c in vector.items() if i in support), QQ(0))


def trace_pairing(cat: DGCategory) -> PairingTarget:
    """``<sa, sb> = tr(ab)``, where the trace sums the coefficients on the identity's basis support.

    Intended for categories concentrated in degree 0 (``H`` in degree 2).
    """
    matrices = {}
    for x, y in product(cat.objects, repeat=2):
        table = {}
        for a, b in product(range(cat.hom(x, y).dimension), range(cat.hom(y, x).dimension)):
            value = _trace(cat, x, cat.compose(x, y, x, a, b))
            if value != 0:
                table[(a, b)] = value
        if table:
            matrices[(x, y)] = table
    return PairingTarget(2, matrices, f"trace({cat.name})")


# --- Cyclic functionals and their dual cochains ---

@dataclass
class CyclicFunctional:
    """A functional on cyclic chains with values in ``H*``, stored on canonical words."""

    coefficients: dict = field(default_factory=dict)
    h_degree: int = 2

    @classmethod
    def from_words(cls, cplx: CyclicComplex, words: dict, h_degree: int = 2) -> "CyclicFunctional":
        """Takes ``{letters: value}`` on arbitrary rotations; vanishing words are dropped."""
        coefficients = {}
        for letters, value in words.items():
            projected = cplx.project(tuple(letters))
            if not projected:
                logging.warning("Dropping a functional value on a word that vanishes in the coinvariants.")
            for canonical, sign in projected.items():
                coefficients[canonical] = coefficients.get(canonical, 0) + sign * QQ(value)
        return cls({k: c for k, c in coefficients.items() if c != 0}, h_degree)

    def value(self, cplx: CyclicComplex, letters: tuple):
        total = QQ(0)
        for canonical, sign in cplx.project(tuple(letters)).items():
            total += sign * self.coefficients.get(canonical, 0)
        return total

    def support_degree(self):
        degrees = {sum(letter.degree for letter in w) for w, c in self.coefficients.items() if c != 0}
        if len(degrees) > 1:
            raise DegreeMismatchError(f"functional is not homogeneous: shifted degrees {sorted(degrees)}")
        return degrees.pop() if degrees else None

    def to_dict(self) -> list:
        return [{"word": [letter.label for letter in w], "value": format_scalar(c)}
                for w, c in sorted(self.coefficients.items())]


def coboundary(cplx: CyclicComplex, functional: CyclicFunctional) -> CyclicFunctional:
    """``f ∘ boundary`` on the assembled cyclic words."""
    out = {}
    for n in range(cplx.max_column + 1):
        for word in cplx.column_basis(n):
            value = sum((c * functional.coefficients.get(t, 0) for t, c in cplx.boundary(word).items()), QQ(0))
            if value != 0:
                out[word] = value
    return CyclicFunctional(out, functional.h_degree)


def pairing_dualize(cat: DGCategory, pairing: PairingTarget, functional: CyclicFunctional,
                    max_column: int = None) -> Cochain:
    """Hochschild cochain ``phi`` with ``<phi(x1..xn), y> = e(s) f((x1, .., xn, y))``.

    ``s`` is the total shifted degree of the support words and
    ``e(s) = (-1)^{s(s-1)/2}``.
    """
    if functional.h_degree != pairing.h_degree:
        raise DegreeMismatchError(
            f"functional takes values in degree {functional.h_degree}, pairing target has degree {pairing.h_degree}")
    total = functional.support_degree()
    if total is None:
        return Cochain({})
    epsilon = _sign(total * (total - 1) // 2)
    top = max(len(w) for w in functional.coefficients) - 1
    cplx = CyclicComplex(cat, max_column if max_column is not None else top)

    linear_words = set()
    for word in functional.coefficients:
        for rotated in SignedCyclicWord(word).rotations():
            linear_words.add(rotated.letters)

    values = {}
    for letters in sorted(linear_words):
        positions = [cplx.position(letter) for letter in letters]
        inputs, (_, _, y) = positions[:-1], positions[-1]
        path = tuple(p[0] for p in positions)
        value = functional.value(cplx, letters)
        if value != 0:
            values.setdefault((path, tuple(p[2] for p in inputs)), {})[y] = epsilon * value

    coefficients = {}
    for (path, inputs), by_output in values.items():
        for o, c in pairing.dual_output(cat, path[0], path[-1], by_output).items():
            coefficients[CochainKey(path, inputs, o)] = c
    return Cochain(coefficients)


@dataclass
class ChainMapDefect:
    defect: object
    mismatches: int
    lhs: Cochain
    rhs: Cochain

    @property
    def holds(self) -> bool:
        return self.mismatches == 0


def chain_map_defect(cat: DGCategory, pairing: PairingTarget, functional: CyclicFunctional,
                     max_column: int) -> ChainMapDefect:
    """Compares ``dualize(f ∘ boundary)`` with ``D(dualize(f))`` on the truncation."""
    if functional.coefficients:
        needed = max(len(w) for w in functional.coefficients)
        if max_column < needed:
            raise ValidationError(f"chain-map check needs max_column >= {needed}, got {max_column}")
    cplx = CyclicComplex(cat, max_column)
    lhs = pairing_dualize(cat, pairing, coboundary(cplx, functional), max_column)
    rhs = HochschildBicomplex(cat, max_column).apply(pairing_dualize(cat, pairing, functional, max_column))
    diff = lhs - rhs
    worst = max((abs(c) for c in diff.coefficients.values()), default=QQ(0))
    return ChainMapDefect(worst, len(diff.coefficients), lhs, rhs)
