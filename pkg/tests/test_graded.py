import numpy as np
import pytest
from sympy import QQ, eye

from src.errors import ParseError, RegimeError, ValidationError
from src.graded import (COMPLEX, RATIONAL, GradedVectorSpace, HomComplex, Letter, ShiftedElement, SignedCyclicWord,
                        cyclic_normalize, format_scalar, koszul_sign, parse_rational, rotation_permutation, shift,
                        tensor, tensor_swap_matrix, vanishes_in_coinvariants)


def _space(*degrees):
    return GradedVectorSpace(tuple(Letter(f"x{i}", d) for i, d in enumerate(degrees)))


def test_shift_lowers_degrees():
    space = shift(_space(0, 1, 1), 1)
    assert space.dims() == {-1: 1, 0: 2}
    assert shift(shift(Letter("a", 2), 1), -1) == Letter("a", 2)
    assert shift(ShiftedElement("a", 2), 3).effective_degree == -1


def test_shift_flips_the_differential_sign():
    cplx = HomComplex.build(_space(0, 1), {(1, 0): 2})
    assert shift(cplx, 1).entries() == {(1, 0): -2}
    assert shift(cplx, 2).entries() == {(1, 0): 2}


def test_tensor_dimensions_multiply_degreewise():
    out = tensor(_space(0, 1), _space(0, 0, 2))
    assert out.dimension == 6
    assert out.dims() == {0: 2, 1: 2, 2: 1, 3: 1}


def test_tensor_of_complexes_squares_to_zero():
    a = HomComplex.build(_space(0, 1), {(1, 0): 1})
    b = HomComplex.build(_space(1, 2), {(1, 0): QQ(3, 2)})
    product = tensor(a, b)
    assert product.validate() == []
    # d(x0 ⊗ y0) = x1 ⊗ y0 + x0 ⊗ (3/2) y1
    assert product.apply(0) == {2: 1, 1: QQ(3, 2)}


def test_tensor_rejects_mixed_regimes():
    a = HomComplex.build(_space(0), {}, RATIONAL)
    b = HomComplex.build(_space(0), {}, COMPLEX)
    with pytest.raises(RegimeError):
        tensor(a, b)


def test_tensor_swap_is_an_involution_up_to_order():
    left, right = _space(1, 0), _space(1)
    forward = tensor_swap_matrix(left, right)
    backward = tensor_swap_matrix(right, left)
    assert backward.matmul(forward).to_Matrix() == eye(2)


def test_homcomplex_reports_broken_axioms():
    with pytest.raises(ValidationError):
        HomComplex.build(_space(0, 2), {(1, 0): 1})
    bad = HomComplex.build(_space(0, 1, 2), {(1, 0): 1, (2, 1): 1}, check=False)
    assert bad.validate() == ["differential does not square to zero"]


def test_letter_needs_an_integer_degree():
    with pytest.raises(ValidationError):
        Letter("a", 0.5)


def test_koszul_sign_counts_odd_crossings():
    assert koszul_sign([1, 0], [1, 1]) == -1
    assert koszul_sign([1, 0], [1, 2]) == 1
    assert koszul_sign([2, 0, 1], [1, 1, 1]) == 1
    assert koszul_sign([0, 1, 2], [5, 7, 9]) == 1
    with pytest.raises(ValueError):
        koszul_sign([0, 0], [1, 1])
    with pytest.raises(ValueError):
        koszul_sign([0, 1], [1])


def test_rotation_permutation_moves_the_tail_to_the_front():
    assert rotation_permutation(4, 1) == [3, 0, 1, 2]
    assert rotation_permutation(4, 4) == [0, 1, 2, 3]


def test_rotation_sign_matches_the_koszul_sign():
    rng = np.random.default_rng(3)
    for _ in range(50):
        degrees = [int(d) for d in rng.integers(-2, 3, size=rng.integers(1, 7))]
        word = SignedCyclicWord(tuple(Letter(f"l{i}", d) for i, d in enumerate(degrees)))
        rotated = word.rotate()
        assert rotated.sign == koszul_sign(rotation_permutation(len(degrees), 1), degrees)


def test_full_turn_returns_the_word_with_sign_one():
    word = SignedCyclicWord((Letter("a", 1), Letter("b", 0), Letter("c", 2)))
    turned = word
    for _ in range(word.length):
        turned = turned.rotate()
    assert turned.letters == word.letters
    assert turned.sign == 1


def test_cyclic_normalize_is_rotation_invariant():
    word = SignedCyclicWord((Letter("c", 1), Letter("a", 1), Letter("b", 0)))
    canonical, sign = cyclic_normalize(word)
    assert [letter.label for letter in canonical.letters] == ["a", "b", "c"]
    for rotated in word.rotations():
        again, again_sign = cyclic_normalize(rotated)
        assert again.letters == canonical.letters
        assert again_sign == sign


def test_even_repetition_of_an_odd_letter_vanishes():
    odd = Letter("a", 1)
    assert vanishes_in_coinvariants(SignedCyclicWord((odd, odd)))
    assert not vanishes_in_coinvariants(SignedCyclicWord((odd, odd, odd)))
    assert not vanishes_in_coinvariants(SignedCyclicWord((Letter("b", 0), Letter("b", 0))))


@pytest.mark.parametrize("text, value", [("3/4", QQ(3, 4)), ("-2", QQ(-2)), (" 6/ 4", QQ(3, 2)), (5, QQ(5))])
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("text", ["3/", "1/0", "x", "1.5", None])
def test_parse_rational_rejects_malformed_input(text):
    with pytest.raises(ParseError):
        parse_rational(text)


def test_format_scalar_round_trips():
    for q in [QQ(0), QQ(7), QQ(-3, 8)]:
        assert parse_rational(format_scalar(q)) == q
