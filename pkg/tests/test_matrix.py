"""Core exact matrix arithmetic and elimination."""

import itertools
import random
from fractions import Fraction

import pytest

from localsmith import Mat, format_rat, rat

from conftest import random_matrix


def cofactor_det(m: Mat) -> Fraction:
    """Independent determinant by recursive cofactor expansion."""
    n = m.rows
    if n == 0:
        return Fraction(1)
    if n == 1:
        return m.entries[0][0]
    total = Fraction(0)
    for j in range(n):
        if m.entries[0][j] == 0:
            continue
        minor = Mat(
            [[m.entries[i][c] for c in range(n) if c != j] for i in range(1, n)]
        )
        sign = 1 if j % 2 == 0 else -1
        total += sign * m.entries[0][j] * cofactor_det(minor)
    return total


def minor_rank(m: Mat) -> int:
    """Brute-force rank: the largest size of a nonzero minor."""
    upper = min(m.rows, m.cols)
    for size in range(upper, 0, -1):
        for row_idx in itertools.combinations(range(m.rows), size):
            for col_idx in itertools.combinations(range(m.cols), size):
                sub = Mat([[m.entries[i][j] for j in col_idx] for i in row_idx])
                if cofactor_det(sub) != 0:
                    return size
    return 0


class TestRat:
    def test_parse_forms(self):
        assert rat("3/4") == Fraction(3, 4)
        assert rat("-7") == Fraction(-7)
        assert rat(5) == Fraction(5)
        assert rat(Fraction(2, 6)) == Fraction(1, 3)

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError):
            rat("2/0")

    def test_float_rejected(self):
        with pytest.raises(ValueError):
            rat(0.5)

    def test_format_round_trip(self):
        for text in ("0", "5", "-5", "3/4", "-22/7"):
            assert format_rat(rat(text)) == text


class TestRref:
    def test_identity_is_fixed(self):
        reduced, pivots = Mat.identity(3).rref()
        assert reduced == Mat.identity(3)
        assert pivots == (0, 1, 2)

    def test_forced_elimination(self):
        reduced, pivots = Mat([[0, 1], [0, 2]]).rref()
        assert reduced == Mat([[0, 1], [0, 0]])
        assert pivots == (1,)

    def test_idempotent(self):
        rng = random.Random(101)
        for _ in range(25):
            m = random_matrix(rng, rng.randint(1, 5), rng.randint(1, 5))
            reduced, _ = m.rref()
            again, _ = reduced.rref()
            assert again == reduced

    def test_rank_matches_minor_search(self):
        rng = random.Random(42)
        for _ in range(20):
            m = random_matrix(rng, 4, 5, density=0.5)
            assert m.rank() == minor_rank(m)

    def test_pivots_strictly_increasing(self):
        rng = random.Random(3)
        for _ in range(20):
            m = random_matrix(rng, 4, 4, density=0.4)
            _, pivots = m.rref()
            assert list(pivots) == sorted(set(pivots))


class TestNullspace:
    def test_rank_nullity(self):
        rng = random.Random(7)
        for _ in range(30):
            rows, cols_ = rng.randint(1, 5), rng.randint(1, 5)
            m = random_matrix(rng, rows, cols_, density=0.5)
            assert m.rank() + m.nullspace().cols == cols_

    def test_kernel_vectors_annihilated(self):
        rng = random.Random(8)
        for _ in range(20):
            m = random_matrix(rng, 3, 5, density=0.5)
            basis = m.nullspace()
            assert (m @ basis).is_zero()

    def test_deterministic_parametrization(self):
        m = Mat([[1, 2, 3], [0, 0, 0]])
        basis = m.nullspace()
        # Free columns 1 and 2, each carrying a unit entry in rref order.
        assert basis == Mat([[-2, -3], [1, 0], [0, 1]])


class TestArithmetic:
    def test_exactness_no_foreign_denominators(self):
        a = Mat([[rat("1/3"), rat("2/3")], [1, 0]])
        b = Mat([[3, 0], [0, 3]])
        assert a @ b == Mat([[1, 2], [3, 0]])

    def test_solve_and_inverse(self):
        rng = random.Random(9)
        for _ in range(15):
            m = random_matrix(rng, 3, 3)
            if m.det() == 0:
                continue
            inv = m.inverse()
            assert m @ inv == Mat.identity(3)
            assert inv @ m == Mat.identity(3)
            rhs = random_matrix(rng, 3, 2)
            sol = m.solve(rhs)
            assert m @ sol == rhs

    def test_solve_inconsistent_returns_none(self):
        m = Mat([[1, 0], [1, 0]])
        rhs = Mat([[1], [2]])
        assert m.solve(rhs) is None

    def test_det_matches_cofactor_expansion(self):
        rng = random.Random(10)
        for _ in range(20):
            n = rng.randint(1, 4)
            m = random_matrix(rng, n, n)
            assert m.det() == cofactor_det(m)

    def test_zero_width_matrices(self):
        empty = Mat.zeros(3, 0)
        assert empty.rank() == 0
        assert (empty.transpose() @ empty) == Mat.zeros(0, 0)
        stacked = Mat.hstack([empty, Mat.identity(3)])
        assert stacked == Mat.identity(3)

    def test_immutable(self):
        m = Mat.identity(2)
        with pytest.raises(AttributeError):
            m.rows = 5
