import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oplaxkit.field import GF, QQ, FieldMismatch
from oplaxkit.linalg import Matrix, inverse, kernel_basis, rank, rref, solve

F7 = GF(7)


def test_solve_identity_case():
    a = Matrix.identity(QQ, 2)
    b = Matrix.column(QQ, [3, Fraction(5, 2)])
    assert solve(a, b) == b


def test_solve_inconsistent_rank1():
    a = Matrix.from_rows(QQ, [[1, 2], [2, 4]])
    b = Matrix.from_rows(QQ, [[1], [3]])
    assert solve(a, b) is None


def test_solve_recovers_preimage_over_f7():
    rng = random.Random(5)
    for _ in range(10):
        while True:
            a = Matrix.from_rows(F7, [[rng.randrange(7) for _ in range(5)] for _ in range(5)])
            if rank(a) == 5:
                break
        x0 = Matrix.from_rows(F7, [[rng.randrange(7)] for _ in range(5)])
        b = a @ x0
        # oracle is the direct multiplication: the solver must recover x0 exactly
        assert solve(a, b) == x0


def test_kernel_zero_matrix():
    k = kernel_basis(Matrix.zeros(QQ, 2, 3))
    assert k.cols == 3 and k == Matrix.identity(QQ, 3)


def test_kernel_identity():
    assert kernel_basis(Matrix.identity(QQ, 3)).cols == 0


def test_kernel_known_example():
    a = Matrix.from_rows(QQ, [[1, 1, 0], [0, 0, 1]])
    k = kernel_basis(a)
    assert k.cols == 1
    assert (a @ k).is_zero()
    # spanned by (1, -1, 0) up to scaling
    col = k.col(0)
    assert col[2] == 0 and col[0] == -col[1] != 0


def test_rank_examples():
    assert rank(Matrix.identity(QQ, 3)) == 3
    assert rank(Matrix.zeros(QQ, 4, 2)) == 0
    # hand elimination: second row is twice the first
    assert rank(Matrix.from_rows(QQ, [[1, 2], [2, 4]])) == 1


def test_field_mismatch_rejected():
    a = Matrix.identity(QQ, 2)
    b = Matrix.identity(F7, 2)
    with pytest.raises(FieldMismatch):
        a @ b


def test_empty_matrices_compose_formally():
    a = Matrix.zeros(QQ, 0, 3)
    b = Matrix.zeros(QQ, 3, 2)
    assert (a @ b).rows == 0 and (a @ b).cols == 2
    assert rank(a) == 0
    assert kernel_basis(a).cols == 3


def _random_matrix(field, rng, rows, cols):
    if field.p is None:
        vals = [Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(rows * cols)]
    else:
        vals = [rng.randrange(field.p) for _ in range(rows * cols)]
    return Matrix(field, rows, cols, [field.coerce(v) for v in vals])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5), st.integers(0, 5), st.booleans(), st.integers(0, 10**6))
def test_rank_nullity_and_exact_solve(rows, cols, over_q, seed):
    field = QQ if over_q else F7
    rng = random.Random(seed)
    a = _random_matrix(field, rng, rows, cols)
    k = kernel_basis(a)
    assert rank(a) + k.cols == cols
    assert rank(a) == rank(a.transpose())
    if k.cols:
        assert (a @ k).is_zero()
    x = _random_matrix(field, rng, cols, 1)
    b = a @ x
    got = solve(a, b)
    assert got is not None
    assert a @ got == b  # exact, no tolerance


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10**6))
def test_inverse_two_sided(n, seed):
    rng = random.Random(seed)
    a = _random_matrix(F7, rng, n, n)
    inv = inverse(a)
    if inv is None:
        assert rank(a) < n
    else:
        eye = Matrix.identity(F7, n)
        assert a @ inv == eye and inv @ a == eye


def test_rref_deterministic_pivoting():
    a = Matrix.from_rows(QQ, [[0, 2, 4], [1, 1, 1]])
    r, piv = rref(a)
    assert piv == (0, 1)
    assert r == Matrix.from_rows(QQ, [[1, 0, -1], [0, 1, 2]])
