import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from persmod.scalars import (
    INF,
    NEG_INF,
    DimensionError,
    ExtendedRational,
    FieldScalar,
    Matrix,
    complement_basis,
    compose,
    ext,
    image_basis,
    kernel_basis,
    rank,
    rref,
    solve,
)


def brute_rank(m: Matrix) -> int:
    """Dimension of the column span, by enumerating all combinations."""
    cols = [tuple(c) for c in m.array.T]
    span = set()
    for coeffs in itertools.product(range(m.p), repeat=len(cols)):
        v = tuple(sum(c * col[i] for c, col in zip(coeffs, cols)) % m.p for i in range(m.rows))
        span.add(v)
    return round(np.log(len(span)) / np.log(m.p))


small_matrix = st.tuples(st.integers(1, 3), st.integers(1, 3), st.sampled_from([2, 3])).flatmap(
    lambda t: st.lists(st.integers(0, t[2] - 1), min_size=t[0] * t[1], max_size=t[0] * t[1]).map(
        lambda xs: Matrix(xs, t[2], shape=(t[0], t[1]))))


class TestExtendedRational:
    def test_lowest_terms(self):
        x = ext("6/4")
        assert (x.numerator, x.denominator) == (3, 2)
        assert ext(Fraction(-2, -4)) == ext("1/2")

    def test_order(self):
        assert NEG_INF < ext(-10**9) < ext(0) < ext(10**9) < INF
        assert sorted([INF, ext(1), NEG_INF]) == [NEG_INF, ext(1), INF]

    def test_arithmetic(self):
        assert ext("1/3") + ext("1/6") == ext("1/2")
        assert INF + 5 == INF
        assert abs(ext(3) - INF) == INF
        assert ext(3).half() == ext("3/2")
        assert ExtendedRational.mean(ext(0), ext(1)) == ext("1/2")
        with pytest.raises(ArithmeticError):
            INF + NEG_INF

    def test_parse_and_print(self):
        assert str(ext("0.25")) == "1/4"
        assert str(ext("inf")) == "inf" and str(ext("-inf")) == "-inf"
        assert str(ext(2)) == "2"
        with pytest.raises(ValueError):
            ext("abc")

    def test_hash_matches_fraction(self):
        assert hash(ext("1/2")) == hash(Fraction(1, 2))
        assert len({ext("2/4"), ext("1/2")}) == 1


class TestFieldScalar:
    def test_inverse(self):
        for p in (2, 3, 5, 7):
            for a in range(1, p):
                assert (FieldScalar(a, p) * FieldScalar(a, p).inverse()).residue == 1

    def test_rejects_composite(self):
        with pytest.raises(ValueError):
            FieldScalar(1, 4)


class TestMatrix:
    def test_rank_examples(self):
        assert rank(Matrix.identity(2, 2)) == 2
        assert rank(Matrix.zeros(3, 3, 2)) == 0
        assert rank(Matrix([[1, 1], [1, 1]], 2)) == 1

    def test_kernel_examples(self):
        assert kernel_basis(Matrix.identity(3, 2)).cols == 0
        assert kernel_basis(Matrix.zeros(1, 3, 2)).cols == 3
        k = kernel_basis(Matrix([[1, 1]], 2))
        assert k.tolist() == [[1], [1]]

    def test_solve_examples(self):
        b = Matrix([[1], [2]], 3)
        assert solve(Matrix.identity(2, 3), b) == b
        assert solve(Matrix.zeros(2, 2, 3), b) is None
        x = solve(Matrix([[1, 2]], 3), Matrix([[0]], 3))
        assert x.tolist() == [[0], [0]]
        with pytest.raises(DimensionError):
            solve(Matrix.identity(2, 3), Matrix([[1]], 3))

    def test_compose_examples(self):
        a = Matrix([[1, 2], [0, 1]], 3)
        i = Matrix.identity(2, 3)
        assert compose([a]) == a
        assert compose([i, a, i]) == a
        # diagram order: first map applied first
        b = Matrix([[1, 1]], 3)
        assert compose([a, b]) == b @ a

    def test_rref_pivots(self):
        m = Matrix([[0, 1, 1], [0, 1, 0]], 2)
        red, piv = rref(m)
        assert piv == [1, 2]
        assert red.tolist() == [[0, 1, 0], [0, 0, 1]]

    def test_immutable(self):
        m = Matrix([[1]], 2)
        with pytest.raises(ValueError):
            m.array[0, 0] = 0

    def test_field_mismatch(self):
        with pytest.raises(ValueError):
            Matrix([[1]], 2) @ Matrix([[1]], 3)

    @settings(max_examples=150, deadline=None)
    @given(small_matrix)
    def test_rank_matches_enumeration(self, m):
        assert rank(m) == brute_rank(m)

    @settings(max_examples=150, deadline=None)
    @given(small_matrix)
    def test_rank_nullity_and_bases(self, m):
        k = kernel_basis(m)
        assert (m @ k).is_zero()
        assert rank(k) == k.cols == m.cols - rank(m)
        im = image_basis(m)
        assert im.cols == rank(m) == rank(im)
        c = complement_basis(im)
        assert rank(im.hstack(c)) == m.rows

    @settings(max_examples=150, deadline=None)
    @given(small_matrix, st.integers(0, 10**6))
    def test_solve_is_consistent(self, m, seed):
        rng = random.Random(seed)
        x0 = Matrix([[rng.randrange(m.p)] for _ in range(m.cols)], m.p)
        b = m @ x0
        x = solve(m, b)
        assert x is not None and m @ x == b

    def test_compose_rank_bound(self):
        rng = random.Random(7)
        for _ in range(100):
            p = rng.choice((2, 3, 5))
            n, k, l = (rng.randint(1, 4) for _ in range(3))
            a = Matrix([[rng.randrange(p) for _ in range(n)] for _ in range(k)], p)
            b = Matrix([[rng.randrange(p) for _ in range(k)] for _ in range(l)], p)
            assert rank(compose([a, b])) <= min(rank(a), rank(b))
