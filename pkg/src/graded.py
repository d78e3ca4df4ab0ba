"""
Graded Core

Exact graded linear algebra shared by every other module: scalar regimes,
graded vector spaces and Hom complexes, shifts, tensor products with the
Koszul rule, and signed cyclic words.

Grading is cohomological; ``V[k]`` has ``(V[k])^i = V^{i+k}``, so shifting an
element by ``k`` lowers its degree by ``k``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from itertools import product
from typing import Iterable, Sequence

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from src import config
from src.errors import ParseError, RegimeError, ValidationError

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


# --- Scalar regimes ---

class Regime(Enum):
    RATIONAL = "rational"
    COMPLEX = "complex"


@dataclass(frozen=True)
class Field:
    """One scalar regime: exact rationals (sympy ``QQ``) or complex doubles with a tolerance."""

    regime: Regime
    tolerance: float = 0.0

    @property
    def exact(self) -> bool:
        return self.regime is Regime.RATIONAL

    def zero(self):
        return QQ(0) if self.exact else 0j

    def one(self):
        return QQ(1) if self.exact else 1 + 0j

    def parse(self, text):
        """Reads a scalar; rationals are written ``"p/q"`` or ``"p"``."""
        if not self.exact:
            if isinstance(text, (list, tuple)):
                return complex(float(text[0]), float(text[1]))
            return complex(text)
        return parse_rational(text)

    def coerce(self, value):
        if self.exact:
            if isinstance(value, str):
                return parse_rational(value)
            return QQ(value)
        return complex(value)

    def is_zero(self, value) -> bool:
        if self.exact:
            return value == 0
        return abs(value) <= self.tolerance

    def matrix(self, entries: dict, shape: tuple):
        """Builds a matrix from ``{(row, col): value}``; sparse ``DomainMatrix`` or ``ndarray``."""
        if self.exact:
            return DomainMatrix.from_dok({k: QQ(v) for k, v in entries.items() if v != 0}, shape, QQ)
        mat = np.zeros(shape, dtype=complex)
        for (i, j), v in entries.items():
            mat[i, j] = v
        return mat

    def matmul(self, a, b):
        if self.exact:
            return a.matmul(b)
        return a @ b

    def is_zero_matrix(self, mat) -> bool:
        if self.exact:
            return mat.is_zero_matrix
        return mat.size == 0 or float(np.max(np.abs(mat))) <= self.tolerance


RATIONAL = Field(Regime.RATIONAL)
COMPLEX = Field(Regime.COMPLEX, config.COMPLEX_TOLERANCE)


def parse_rational(text):
    """Parses ``"p/q"`` into an exact ``QQ`` element; raises ``ParseError`` on malformed input."""
    if isinstance(text, int):
        return QQ(text)
    if not isinstance(text, str):
        raise ParseError(f"expected a rational string 'p/q', got {text!r}")
    match = _RATIONAL_RE.match(text)
    if not match:
        raise ParseError(f"malformed rational {text!r}")
    num = int(match.group(1))
    den = int(match.group(2)) if match.group(2) is not None else 1
    if den == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return QQ(num, den)


def format_scalar(value) -> str:
    """Writes an exact scalar back as ``"p/q"`` (or ``"p"``)."""
    if isinstance(value, complex):
        return repr(value)
    value = QQ(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


# --- Graded spaces ---

@dataclass(frozen=True, order=True)
class Letter:
    """A homogeneous basis element: its label and its degree."""

    label: str
    degree: int

    def __post_init__(self):
        if not isinstance(self.degree, (int, np.integer)) or isinstance(self.degree, bool):
            raise ValidationError(f"letter {self.label!r} is not homogeneous (degree {self.degree!r})")


@dataclass(frozen=True)
class GradedVectorSpace:
    """Finite-dimensional graded space with a named, ordered basis."""

    basis: tuple = ()

    @classmethod
    def from_degrees(cls, by_degree: dict) -> "GradedVectorSpace":
        letters = [Letter(label, int(deg)) for deg in sorted(by_degree) for label in by_degree[deg]]
        return cls(tuple(letters))

    @classmethod
    def unit(cls) -> "GradedVectorSpace":
        return cls((Letter("1", 0),))

    def __post_init__(self):
        labels = [b.label for b in self.basis]
        if len(set(labels)) != len(labels):
            raise ValidationError(f"duplicate basis labels in {labels}")

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def dims(self) -> dict:
        out = {}
        for letter in self.basis:
            out[letter.degree] = out.get(letter.degree, 0) + 1
        return dict(sorted(out.items()))

    def support(self) -> list:
        return sorted(self.dims())

    def labels(self) -> list:
        return [b.label for b in self.basis]

    def index(self, label: str) -> int:
        for i, letter in enumerate(self.basis):
            if letter.label == label:
                return i
        raise KeyError(label)

    def degree_of(self, index: int) -> int:
        return self.basis[index].degree

    def indices_in_degree(self, degree: int) -> list:
        return [i for i, b in enumerate(self.basis) if b.degree == degree]


@dataclass(frozen=True)
class HomComplex:
    """A graded space with a degree +1 differential, stored sparsely as ``{(target, source): c}``."""

    space: GradedVectorSpace
    differential: tuple = ()
    field: Field = RATIONAL

    @classmethod
    def build(cls, space: GradedVectorSpace, entries: dict = None, field: Field = RATIONAL,
              check: bool = True) -> "HomComplex":
        entries = entries or {}
        clean = tuple(sorted(((t, s), field.coerce(v)) for (t, s), v in entries.items()
                             if not field.is_zero(field.coerce(v))))
        cplx = cls(space, clean, field)
        if check:
            problems = cplx.validate()
            if problems:
                raise ValidationError("; ".join(problems))
        return cplx

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def entries(self) -> dict:
        return dict(self.differential)

    def matrix(self):
        n = self.dimension
        return self.field.matrix(self.entries(), (n, n))

    def apply(self, source: int) -> dict:
        """d of one basis element, as ``{target: coefficient}``."""
        return {t: c for (t, s), c in self.differential if s == source}

    def validate(self) -> list:
        """Lists violated complex axioms: degree +1 and d∘d = 0."""
        problems = []
        for (t, s), _ in self.differential:
            if self.space.degree_of(t) != self.space.degree_of(s) + 1:
                problems.append(f"differential entry ({t},{s}) does not have degree +1")
        mat = self.matrix()
        if not self.field.is_zero_matrix(self.field.matmul(mat, mat)):
            problems.append("differential does not square to zero")
        return problems


@dataclass(frozen=True)
class ShiftedElement:
    """An element together with a shift offset; effective degree = degree - shift."""

    label: str
    degree: int
    offset: int = 0

    @property
    def effective_degree(self) -> int:
        return self.degree - self.offset

    def shift(self, k: int) -> "ShiftedElement":
        return ShiftedElement(self.label, self.degree, self.offset + k)

    def unshift(self) -> "ShiftedElement":
        return ShiftedElement(self.label, self.degree, 0)


def shift(obj, k: int):
    """Applies ``[k]`` to a space, complex or element; offsets add under composition."""
    if isinstance(obj, ShiftedElement):
        return obj.shift(k)
    if isinstance(obj, Letter):
        return Letter(obj.label, obj.degree - k)
    if isinstance(obj, GradedVectorSpace):
        return GradedVectorSpace(tuple(Letter(b.label, b.degree - k) for b in obj.basis))
    if isinstance(obj, HomComplex):
        sign = -1 if k % 2 else 1
        entries = {ts: sign * c for ts, c in obj.differential}
        return HomComplex.build(shift(obj.space, k), entries, obj.field, check=False)
    raise TypeError(f"cannot shift {type(obj).__name__}")


def _tensor_label(a: str, b: str) -> str:
    return f"{a}⊗{b}"


def tensor(*factors):
    """Tensor product of spaces, complexes or letter sequences.

    Spaces multiply dimensions degree-wise; complexes get ``d⊗1 + (-1)^{|a|} 1⊗d``;
    letter sequences concatenate.
    """
    if not factors:
        return GradedVectorSpace.unit()
    if all(isinstance(f, (list, tuple)) for f in factors):
        return tuple(letter for f in factors for letter in f)
    if all(isinstance(f, GradedVectorSpace) for f in factors):
        out = factors[0]
        for nxt in factors[1:]:
            out = GradedVectorSpace(tuple(
                Letter(_tensor_label(a.label, b.label), a.degree + b.degree)
                for a, b in product(out.basis, nxt.basis)))
        return out
    if all(isinstance(f, HomComplex) for f in factors):
        regimes = {f.field.regime for f in factors}
        if len(regimes) != 1:
            raise RegimeError("cannot tensor complexes from different scalar regimes")
        out = factors[0]
        for nxt in factors[1:]:
            out = _tensor_complexes(out, nxt)
        return out
    raise TypeError("tensor factors must all be spaces, complexes or letter sequences")


def _tensor_complexes(left: HomComplex, right: HomComplex) -> HomComplex:
    space = tensor(left.space, right.space)
    n_right = right.dimension
    entries = {}
    for (t, s), c in left.differential:
        for j in range(n_right):
            key = (t * n_right + j, s * n_right + j)
            entries[key] = entries.get(key, 0) + c
    for i in range(left.dimension):
        sign = -1 if left.space.degree_of(i) % 2 else 1
        for (t, s), c in right.differential:
            key = (i * n_right + t, i * n_right + s)
            entries[key] = entries.get(key, 0) + sign * c
    return HomComplex.build(space, entries, left.field, check=False)


def tensor_swap_matrix(left: GradedVectorSpace, right: GradedVectorSpace, field: Field = RATIONAL):
    """Matrix of ``a⊗b ↦ (-1)^{|a||b|} b⊗a`` from ``left⊗right`` to ``right⊗left``."""
    n_left, n_right = left.dimension, right.dimension
    entries = {}
    for i, a in enumerate(left.basis):
        for j, b in enumerate(right.basis):
            sign = -1 if (a.degree * b.degree) % 2 else 1
            entries[(j * n_left + i, i * n_right + j)] = sign
    return field.matrix(entries, (n_left * n_right, n_left * n_right))


# --- Koszul signs and cyclic words ---

def koszul_sign(permutation: Sequence[int], degrees: Sequence[int]) -> int:
    """Sign of reordering a word so that position ``i`` holds old letter ``permutation[i]``.

    Each inversion of two letters contributes ``(-1)^{deg_a * deg_b}``.
    """
    if len(permutation) != len(degrees):
        raise ValueError(f"permutation of length {len(permutation)} does not match {len(degrees)} degrees")
    if sorted(permutation) != list(range(len(permutation))):
        raise ValueError(f"{list(permutation)} is not a permutation")
    parity = 0
    for i in range(len(permutation)):
        for j in range(i + 1, len(permutation)):
            a, b = permutation[i], permutation[j]
            if a > b:
                parity += degrees[a] * degrees[b]
    return -1 if parity % 2 else 1


def rotation_permutation(length: int, steps: int) -> list:
    """Permutation moving the last ``steps`` letters to the front."""
    steps %= max(length, 1)
    return [(i - steps) % length for i in range(length)]


@dataclass(frozen=True)
class SignedCyclicWord:
    """A tensor word considered modulo signed cyclic rotation."""

    letters: tuple
    sign: int = 1
    rotation: int = 0

    @property
    def length(self) -> int:
        return len(self.letters)

    @property
    def degrees(self) -> list:
        return [letter.degree for letter in self.letters]

    @property
    def total_degree(self) -> int:
        return sum(self.degrees)

    def rotate(self) -> "SignedCyclicWord":
        """Moves the last letter to the front with sign ``(-1)^{deg last * sum(other degrees)}``."""
        if self.length <= 1:
            return SignedCyclicWord(self.letters, self.sign, 0)
        last = self.letters[-1]
        rest = self.total_degree - last.degree
        step = -1 if (last.degree * rest) % 2 else 1
        return SignedCyclicWord((last,) + self.letters[:-1], self.sign * step,
                                (self.rotation + 1) % self.length)

    def rotations(self) -> list:
        out = [self]
        for _ in range(self.length - 1):
            out.append(out[-1].rotate())
        return out


def _word_key(letters: Iterable[Letter]) -> tuple:
    return tuple((letter.label, letter.degree) for letter in letters)


def cyclic_normalize(word: SignedCyclicWord) -> tuple:
    """Canonical representative of ``word`` and the sign relating them.

    The representative is the lexicographically minimal rotation (earliest
    rotation wins ties); ``word == sign * canonical`` in the coinvariants.
    """
    for letter in word.letters:
        Letter(letter.label, letter.degree)
    if word.length == 0:
        return SignedCyclicWord((), 1, 0), word.sign
    best = None
    current = SignedCyclicWord(word.letters, 1, 0)
    for steps in range(word.length):
        key = _word_key(current.letters)
        if best is None or key < best[0]:
            best = (key, current, steps)
        current = current.rotate()
    _, canonical, steps = best
    return SignedCyclicWord(canonical.letters, 1, steps), word.sign * canonical.sign


def vanishes_in_coinvariants(word: SignedCyclicWord) -> bool:
    """True when some rotation fixes the letters but carries sign -1 (the class is zero)."""
    current = SignedCyclicWord(word.letters, 1, 0)
    for _ in range(1, word.length):
        current = current.rotate()
        if current.letters == word.letters and current.sign == -1:
            return True
    return False
