from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from pellspace.exact_linalg import (
    DependentGenerators,
    DimensionMismatch,
    IntMatrix,
    NotInCone,
    NotUnimodular,
    adjugate_det,
    clear_denominators,
    int_inverse,
    mat_mul,
    primitive,
    rational_rank,
    solve_linear,
    solve_simplicial_membership,
)

# printed 5x5 tropical matrix and its inverse for d = 2
M2 = [[1, 0, -1, 0, 1], [0, 1, 0, -1, -1], [0, 0, -1, 0, 0], [0, 0, 0, -1, -1], [0, 0, -1, -1, 0]]
M2_INV = [[1, 0, 0, 1, -1], [0, 1, 0, -1, 0], [0, 0, -1, 0, 0], [0, 0, 1, 0, -1], [0, 0, -1, -1, 1]]


def square(n_min=1, n_max=6, lo=-6, hi=6):
    return st.integers(n_min, n_max).flatmap(
        lambda n: st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=n, max_size=n))


def test_identity_times_matrix():
    A = IntMatrix.from_rows(M2)
    assert IntMatrix.identity(5) @ A == A
    assert A @ IntMatrix.identity(5) == A


def test_printed_matrices_are_inverse():
    assert (IntMatrix.from_rows(M2) @ IntMatrix.from_rows(M2_INV)).is_identity()
    assert int_inverse(IntMatrix.from_rows(M2)) == IntMatrix.from_rows(M2_INV)


def test_one_by_one_product():
    assert mat_mul(IntMatrix.from_rows([[3]]), IntMatrix.from_rows([[4]])).to_rows() == [[12]]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        IntMatrix.from_rows([[1, 2]]) @ IntMatrix.from_rows([[1, 2]])
    with pytest.raises(DimensionMismatch):
        IntMatrix.from_rows([[1, 2], [3]])
    with pytest.raises(DimensionMismatch):
        IntMatrix(2, 2, (1, 2, 3))


def test_inverse_of_identity_and_non_unimodular():
    assert int_inverse(IntMatrix.identity(4)).is_identity()
    with pytest.raises(NotUnimodular):
        int_inverse(IntMatrix.from_rows([[2, 0], [0, 1]]))


def test_singular_adjugate_reports_zero_determinant():
    adj, det = adjugate_det(IntMatrix.from_rows([[1, 2], [2, 4]]))
    assert det == 0


@settings(max_examples=150, deadline=None)
@given(square())
def test_adjugate_and_determinant_match_sympy(rows):
    A = IntMatrix.from_rows(rows)
    adj, det = adjugate_det(A)
    S = sympy.Matrix(rows)
    assert det == S.det()
    if det != 0:
        assert adj.to_rows() == S.adjugate().tolist()


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 5).flatmap(
    lambda m: st.tuples(st.just(m), st.integers(1, 5),
                        st.lists(st.integers(-4, 4), min_size=25, max_size=25))))
def test_rank_matches_sympy(args):
    m, n, flat = args
    rows = [flat[i * n:(i + 1) * n] for i in range(m)]
    assert rational_rank(rows) == sympy.Matrix(rows).rank()


@st.composite
def unimodular(draw):
    # product of elementary matrices and a signed permutation
    n = draw(st.integers(1, 6))
    A = IntMatrix.identity(n)
    for _ in range(draw(st.integers(0, 12))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i == j:
            continue
        k = draw(st.integers(-3, 3))
        E = [[int(r == c) for c in range(n)] for r in range(n)]
        E[i][j] = k
        A = A @ IntMatrix.from_rows(E)
    if draw(st.booleans()):
        rows = A.to_rows()
        rows[0] = [-x for x in rows[0]]
        A = IntMatrix.from_rows(rows)
    return A


@settings(max_examples=200, deadline=None)
@given(unimodular())
def test_unimodular_inverse_is_two_sided(A):
    B = int_inverse(A)
    assert (A @ B).is_identity()
    assert (B @ A).is_identity()


def test_membership_examples():
    assert solve_simplicial_membership([(1, 0), (0, 1)], (3, 5)) == (3, 5)
    with pytest.raises(NotInCone) as exc:
        solve_simplicial_membership([(1, 0), (1, -1)], (0, 1))
    assert exc.value.coefficients == (1, -1)
    with pytest.raises(NotInCone):
        solve_simplicial_membership([(1, 0)], (-1, 0))
    with pytest.raises(DependentGenerators):
        solve_simplicial_membership([(1, 1), (2, 2)], (1, 1))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=9, max_size=9),
       st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=7), min_size=3, max_size=3))
def test_solution_reconstructs_target(flat, target):
    gens = [flat[0:3], flat[3:6], flat[6:9]]
    if rational_rank(gens) < 3:
        return
    lam = solve_linear(gens, target)
    assert lam is not None
    assert [sum(l * g[i] for l, g in zip(lam, gens)) for i in range(3)] == target


def test_out_of_span():
    assert solve_linear([(1, 0, 0)], (0, 1, 0)) is None


def test_primitive_helpers():
    assert primitive((4, -6, 0)) == (2, -3, 0)
    assert clear_denominators((Fraction(1, 2), Fraction(-1, 3))) == (3, -2)
    with pytest.raises(ValueError):
        primitive((0, 0))
