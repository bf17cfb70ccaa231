"""The stage engine: golden stage data, E/M columns, stabilization,
Jordan chains, and the coefficient identities."""

import math
import random

import pytest

from localsmith import (
    Mat,
    MatSeries,
    RecursionState,
    StageBudgetError,
    Subspace,
    TruncationError,
    generic_rank,
    toeplitz_nullspace,
)

from conftest import ZERO3, cols, e, example1_family, random_family, random_matrix


def eps_identity(n: int) -> MatSeries:
    return MatSeries.polynomial([Mat.zeros(n, n), Mat.identity(n)])


def max_chain_length_from_root(family: MatSeries, b0: Mat, upto: int) -> int:
    """Oracle: the largest l <= upto so that b0 extends to a length-l chain.

    Fixes b0 and asks the stacked linear system for b_1..b_{l-1}: solvable
    iff augmenting the right side keeps the rank.
    """
    best = 0
    n = family.cols
    for l in range(1, upto + 1):
        # Conditions sum_{i+j=s} L_i b_j = 0 for s = 0..l-1, b_0 fixed.
        rows = []
        rhs_rows = []
        for s in range(l):
            row_blocks = [
                family.coefficient(s - j) if 0 <= s - j <= family.degree else Mat.zeros(family.rows, n)
                for j in range(1, l)
            ]
            block = Mat.hstack(row_blocks) if row_blocks else Mat.zeros(family.rows, 0)
            rows.append(block)
            rhs_rows.append(-(family.coefficient(s) @ b0))
        system = Mat.vstack(rows)
        rhs = Mat.vstack(rhs_rows)
        if system.cols == 0:
            solvable = rhs.is_zero()
        else:
            solvable = system.rank() == Mat.hstack([system, rhs]).rank()
        if solvable:
            best = l
        else:
            break
    return best


class TestGenericRank:
    def test_golden_family(self, example1):
        # det = eps^4 - eps^8, nonzero, so the generic rank is full.
        for t in range(2, 6):
            assert example1.evaluate(t).det() == t**4 - t**8
        assert generic_rank(example1) == 3

    def test_zero_family(self):
        assert generic_rank(MatSeries.polynomial([Mat.zeros(2, 3)])) == 0

    def test_eps_identity(self):
        assert generic_rank(eps_identity(2)) == 2


class TestStages:
    def test_golden_stage_ledger(self, example1):
        state = RecursionState(example1)
        assert state.run_until_stabilized() == 3
        dims = [(st.nc.dim, st.r.dim) for st in state.stages]
        assert dims == [(1, 1), (1, 1), (0, 0), (1, 1)]
        s2 = state.stage(2)
        assert s2.sbar == cols(ZERO3, ZERO3, e(2))
        assert s2.s == cols(ZERO3, ZERO3, e(2))
        s4 = state.stage(4)
        assert s4.sbar == cols(e(3), [0, 0, -1], (1, 1, 0))
        assert s4.s == cols(e(3), [0, 0, -1], ZERO3)
        assert s4.n.dim == 0
        assert s4.r.same_space(Subspace.spanned_by([e(3)], 3))
        assert s4.rc.dim == 0
        assert state.stage(1).splus == cols(e(1), ZERO3, ZERO3)
        assert state.stage(2).p == cols(ZERO3, ZERO3, e(3))
        assert state.stage(2).calp == cols(ZERO3, e(2), ZERO3)

    def test_invertible_leading_coefficient(self):
        rng = random.Random(41)
        lead = random_matrix(rng, 3, 3)
        while lead.det() == 0:
            lead = random_matrix(rng, 3, 3)
        state = RecursionState(MatSeries.polynomial([lead]))
        state.run_stage()
        assert state.stage(1).n.dim == 0
        assert state.stage(1).r.same_space(Subspace.full(3))
        assert state.detect_stabilization() == 0

    def test_splus_absorbs_projection(self, example1):
        # The restricted inverse kills everything outside its range part, so
        # composing with the range projection changes nothing.
        state = RecursionState(example1)
        state.run_until_stabilized()
        for st in state.stages:
            assert st.splus @ st.calp == st.splus

    def test_projections_partition_identity(self):
        rng = random.Random(48)
        for _ in range(5):
            fam = random_family(rng, 3, 4, 2, deficit=1)
            state = RecursionState(fam)
            k = state.run_until_stabilized()
            stages = state.stages[: k + 1]
            for a in stages:
                for b in stages:
                    if a.index != b.index:
                        assert (a.p @ b.p).is_zero()
                        assert (a.calp @ b.calp).is_zero()
            p_total = Mat.zeros(state.domain_dim, state.domain_dim)
            for st in stages:
                p_total = p_total + st.p
            tail = state.stage(k + 1).n
            # The leftover of the partition is the projection onto the tail
            # kernel, so the sum acts as the identity on every complement and
            # annihilates the tail.
            for st in stages:
                assert p_total @ st.nc.basis == st.nc.basis
            assert (p_total @ tail.basis).is_zero()

    def test_projection_refinement_consistency(self, example1):
        # Later splits only refine the codomain remainder, so recomputing an
        # early range projection against the final decomposition changes nothing.
        from localsmith import projection_matrix

        state = RecursionState(example1)
        state.run_until_stabilized()
        final_parts = [st.r for st in state.stages] + [state.stages[-1].rc]
        for idx, st in enumerate(state.stages):
            recomputed = projection_matrix(final_parts, idx)
            assert recomputed == st.calp


class TestEMColumns:
    def test_golden_columns(self, example1):
        state = RecursionState(example1)
        state.ensure_stages(5)
        identity = Mat.identity(3)
        assert state.e_block(1, 2).is_zero()
        assert state.e_block(2, 2) == identity
        assert state.e_block(1, 3).is_zero()
        assert state.e_block(2, 3) == cols(ZERO3, [0, 0, -1], ZERO3)
        assert state.e_block(3, 3) == identity
        assert state.e_block(1, 4) == cols(ZERO3, ZERO3, [-1, 0, 0])
        assert state.e_block(2, 4) == cols(ZERO3, ZERO3, [0, 0, -1])
        assert state.e_block(3, 4).is_zero()
        assert state.m_block(1, 4) == cols(ZERO3, ZERO3, [-1, 0, 0])
        assert state.m_block(2, 4) == cols(ZERO3, ZERO3, [0, 0, -1])
        assert state.m_block(3, 4) == cols(ZERO3, [0, 0, -1], ZERO3)
        assert state.m_block(4, 4) == identity
        assert state.m_block(1, 5) == cols(ZERO3, e(1), ZERO3)
        assert state.m_block(2, 5) == cols(ZERO3, e(3), [-1, 0, 0])
        assert state.m_block(3, 5).is_zero()
        assert state.m_block(4, 5) == cols(ZERO3, [0, 0, -1], [0, -1, 0])
        assert state.m_block(5, 5) == identity

    def test_golden_fifth_column(self, example1):
        state = RecursionState(example1)
        state.ensure_stages(5)
        assert state.e_block(1, 5) == cols(ZERO3, e(1), ZERO3)
        assert state.e_block(2, 5) == cols(ZERO3, e(3), ZERO3)
        assert state.e_block(3, 5).is_zero()
        assert state.e_block(4, 5) == cols(ZERO3, ZERO3, [0, -1, 0])
        assert state.e_block(5, 5) == Mat.identity(3)

    def test_triangular_system_direct_substitution(self, example1):
        # Assembling the block-triangular system and applying it to the E
        # column must reproduce (0, ..., 0, I).
        state = RecursionState(example1)
        state.ensure_stages(6)
        n = state.domain_dim
        for j in range(1, 7):
            for i in range(1, j + 1):
                acc = Mat.zeros(n, n)
                for v in range(i + 1, j + 1):
                    entry = state.stage(i).splus @ (state.stage(i).calp @ state.stage(v).sbar)
                    acc = acc + entry @ state.e_block(v, j)
                lhs = state.e_block(i, j) + acc
                assert lhs == (Mat.identity(n) if i == j else Mat.zeros(n, n))

    def closed_form_e_block(self, state, i, j):
        """Independent product form: the bottom-up solve telescopes into
        -Splus_i (I - B_{i+1}) ... (I - B_{j-1}) Sbar_j with B_v = Sbar_v Splus_v."""
        identity = Mat.identity(state.codomain_dim)
        acc = state.stage(j).sbar
        for v in range(j - 1, i, -1):
            b_v = state.stage(v).sbar @ state.stage(v).splus
            acc = (identity - b_v) @ acc
        return -(state.stage(i).splus @ acc)

    def test_e_blocks_match_product_form(self, example1):
        state = RecursionState(example1)
        state.ensure_stages(6)
        for j in range(2, 7):
            for i in range(1, j):
                assert state.e_block(i, j) == self.closed_form_e_block(state, i, j)

    def test_e_blocks_match_product_form_random(self):
        rng = random.Random(49)
        for _ in range(4):
            fam = random_family(rng, 3, 4, 2, deficit=1)
            state = RecursionState(fam)
            k = state.run_until_stabilized()
            state.ensure_stages(k + 4)
            for j in range(2, state.stage_count + 1):
                for i in range(1, j):
                    assert state.e_block(i, j) == self.closed_form_e_block(state, i, j)

    def test_coefficient_identity_every_stage(self):
        rng = random.Random(42)
        for _ in range(6):
            fam = random_family(rng, 3, 3, 2, deficit=1)
            state = RecursionState(fam)
            state.run_until_stabilized()
            state.ensure_stages(state.stabilization_k + 4)
            for j in range(1, state.stage_count + 1):
                assert state.coefficient_identity_holds(j)

    def test_post_stabilization_patterns(self):
        rng = random.Random(43)
        for _ in range(6):
            fam = random_family(rng, 4, 4, 2, deficit=2)
            state = RecursionState(fam)
            k = state.run_until_stabilized()
            state.ensure_stages(k + 6)
            for j in range(k + 2, state.stage_count + 1):
                for i in range(k + 2, j):
                    assert state.e_block(i, j).is_zero()
                length = j - (k + 1)
                for offset in range(1, length):
                    assert state.m_block(k + 1 + offset, j) == state.m_block(k + offset, j - 1)
                assert state.m_block(j, j).is_identity()


class TestStabilization:
    def test_golden_index(self, example1):
        state = RecursionState(example1)
        assert state.run_until_stabilized() == 3

    def test_eps_identity_index(self):
        state = RecursionState(eps_identity(2))
        assert state.run_until_stabilized() == 1
        assert state.stage(1).r.dim == 0
        assert state.stage(2).r.dim == 2

    def test_certificate_matches_complement_deaths(self):
        rng = random.Random(44)
        for _ in range(8):
            fam = random_family(rng, 3, 4, 2, deficit=1)
            state = RecursionState(fam)
            k = state.run_until_stabilized()
            state.ensure_stages(k + 4)
            assert state.stage(k + 1).nc.dim > 0 or k == 0
            for later in range(k + 2, state.stage_count + 1):
                assert state.stage(later).nc.dim == 0
                assert state.stage(later).r.dim == 0

    def test_high_degree_scalar_within_default_budget(self):
        # eps^5 on K^1 stabilizes at 5 and needs six stages; the default
        # budget accounts for the degree so this must not error.
        coeffs = [Mat.zeros(1, 1)] * 5 + [Mat.identity(1)]
        state = RecursionState(MatSeries.polynomial(coeffs))
        assert state.run_until_stabilized() == 5

    def test_budget_exceeded_raises(self, example1):
        state = RecursionState(example1, max_stages=2)
        with pytest.raises(StageBudgetError):
            state.run_until_stabilized()

    def test_truncated_input_stage_ceiling(self, example1):
        blunt = example1.truncate(2)
        state = RecursionState(blunt)
        with pytest.raises(TruncationError):
            state.ensure_stages(4)


class TestJordanChains:
    def test_golden_length_three_shape(self, example1):
        state = RecursionState(example1)
        state.ensure_stages(3)
        family = state.jordan_chain_basis(3)
        n1 = Mat([[0], [2], [3]])
        n2 = Mat([[0], [5], [0]])
        n3 = Mat([[0], [7], [0]])
        chain = family.chain_from([n1, n2, n3])
        assert chain.vectors == ((0, 2, 3), (0, 5, -7), (0, 7, 0))
        assert chain.root == (0, 7, 0)

    def test_length_one_is_leading_kernel(self, example1):
        state = RecursionState(example1)
        family = state.jordan_chain_basis(1)
        roots = [chain.root for chain in family.basis_chains()]
        assert roots == [(0, 1, 0), (0, 0, 1)]

    def test_stacked_dimension_matches_toeplitz_oracle(self, example1):
        state = RecursionState(example1)
        family = state.jordan_chain_basis(4)
        assert family.nullspace_dim == 4
        oracle = toeplitz_nullspace(example1, 4)
        assert oracle.dim == 4
        stacked = family.stacked_nullspace_basis()
        assert stacked.rank() == 4
        for j in range(stacked.cols):
            assert oracle.contains(stacked.column(j))

    def test_random_dims_match_oracle(self):
        rng = random.Random(45)
        for _ in range(6):
            fam = random_family(rng, 3, 3, 2, deficit=1)
            state = RecursionState(fam)
            k = state.run_until_stabilized()
            for length in range(1, k + 2):
                family = state.jordan_chain_basis(length)
                assert toeplitz_nullspace(fam, length).dim == family.nullspace_dim


class TestRankOfRoot:
    def test_golden_ranks(self, example1):
        state = RecursionState(example1)
        state.run_until_stabilized()
        assert state.rank_of_root(Mat([[0], [1], [0]])) == 3
        assert state.rank_of_root(Mat([[1], [0], [0]])) == 0
        assert state.rank_of_root(Mat([[0], [0], [1]])) == 1

    def test_zero_vector_rejected(self, example1):
        state = RecursionState(example1)
        state.run_until_stabilized()
        with pytest.raises(ValueError):
            state.rank_of_root(Mat.zeros(3, 1))

    def test_infinite_rank_in_singular_family(self):
        # Generic rank 1 on a 2x2 family: the kernel direction never dies.
        fam = MatSeries.polynomial([Mat([[1, 0], [0, 0]]), Mat([[0, 0], [1, 0]])])
        state = RecursionState(fam)
        state.run_until_stabilized()
        assert state.rank_of_root(Mat([[0], [1]])) == math.inf

    def test_random_roots_match_chain_oracle(self):
        rng = random.Random(46)
        checked = 0
        while checked < 6:
            fam = random_family(rng, 3, 3, 2, deficit=1)
            state = RecursionState(fam)
            k = state.run_until_stabilized()
            kernel = state.stage(1).n
            if kernel.dim == 0:
                continue
            b0 = kernel.basis.column(0)
            got = state.rank_of_root(b0)
            oracle = max_chain_length_from_root(fam, b0, k + 2)
            if got == math.inf:
                assert oracle >= k + 1
            else:
                assert got == oracle
            checked += 1


class TestPartialTriangularize:
    def test_golden_leading_coefficients(self, example1):
        state = RecursionState(example1)
        state.run_until_stabilized()
        p3, transformed = state.partial_triangularize(3)
        assert p3.coefficient(0) == Mat.identity(3)
        expected = [
            cols(e(1), ZERO3, ZERO3),
            cols(ZERO3, ZERO3, e(2)),
            cols(ZERO3, ZERO3, e(3)),
            cols(e(3), [0, 0, -1], ZERO3),
        ]
        for i, s_i in enumerate(expected):
            assert transformed.coefficient(i) == s_i

    def test_degree_zero_is_identity(self, example1):
        state = RecursionState(example1)
        state.ensure_stages(1)
        p0, transformed = state.partial_triangularize(0)
        assert p0 == MatSeries.identity(3)
        assert transformed == example1

    def test_leading_coefficient_mapping_properties(self):
        rng = random.Random(47)
        for _ in range(6):
            fam = random_family(rng, 3, 3, 2, deficit=1)
            state = RecursionState(fam)
            k = state.run_until_stabilized()
            _, transformed = state.partial_triangularize(k)
            for i in range(1, k + 2):
                st = state.stage(i)
                s_i = transformed.coefficient(i - 1)
                assert s_i == st.s
                assert (s_i @ st.n.basis).is_zero()
                if st.nc.dim:
                    from localsmith import image

                    assert image(s_i @ st.nc.basis).same_space(st.r)
                # Earlier complements land in the previous codomain remainder.
                prev_rc = (
                    Subspace.full(state.codomain_dim)
                    if i == 1
                    else state.stage(i - 1).rc
                )
                for earlier in range(1, i):
                    mapped = s_i @ state.stage(earlier).nc.basis
                    for col in range(mapped.cols):
                        assert prev_rc.contains(mapped.column(col))
