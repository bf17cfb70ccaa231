"""The stage-by-stage stabilization engine.

Each stage j builds the operator pair (S̄_j, S_j), splits the running kernel
chain N_{j-1} and codomain remainder Rc_{j-1}, and appends one column to the
block-triangular E and M matrices. Stabilization is certified when the
accumulated range dimensions reach the generic rank of the family, after
which no further range can appear and the chain of complements has died.

The E column solves an upper-triangular block system from the bottom up; the
M column is the E column pushed through the previous M triangle. Row k+1 of
the M matrix is what later becomes the right transformation's coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import (
    InputError,
    InternalConsistencyError,
    StageBudgetError,
    TruncationError,
)
from .matrix import Mat
from .series import MatSeries
from .subspaces import (
    Subspace,
    choose_complement,
    projection_matrix,
    restrict_and_split,
    restricted_inverse,
)


def generic_rank(family: MatSeries, degree_hint: int | None = None) -> int:
    """Rank of the family over the rational-function field.

    Computed as the maximum rank over d*min(rows, cols) + 1 distinct sample
    points 1, 2, 3, ...: the locus where the rank drops is cut out by a
    nonzero minor of degree at most d*min(rows, cols), so at least one
    sample point attains the generic value.
    """
    d = degree_hint if degree_hint is not None else family.degree
    samples = d * min(family.rows, family.cols) + 1
    best = 0
    limit = min(family.rows, family.cols)
    for t in range(1, samples + 1):
        best = max(best, family.evaluate(t).rank())
        if best == limit:
            break
    return best


@dataclass(frozen=True)
class Stage:
    """The per-stage ledger: operators, subspaces, projections, inverse."""

    index: int
    sbar: Mat
    s: Mat
    n: Subspace
    r: Subspace
    nc: Subspace
    rc: Subspace
    p: Mat
    calp: Mat
    splus: Mat


@dataclass
class ComplementPlan:
    """Optional per-stage complement bases (1-based stage index).

    Stages without an entry fall back to the deterministic pivot strategy.
    """

    nc_bases: dict[int, Mat]
    rc_bases: dict[int, Mat]

    @staticmethod
    def empty() -> "ComplementPlan":
        return ComplementPlan({}, {})


@dataclass(frozen=True)
class JordanChain:
    """A chain (b_{l-1}, ..., b_0); the root b_0 is the last entry."""

    vectors: tuple[tuple[Fraction, ...], ...]

    @property
    def length(self) -> int:
        return len(self.vectors)

    @property
    def root(self) -> tuple[Fraction, ...]:
        return self.vectors[-1]

    def stacked(self) -> Mat:
        return Mat([[x] for vec in self.vectors for x in vec])


class JordanChainFamily:
    """All kernel tuples of a given length, as the triangular map applied to
    the per-stage kernels: component i of the image is b_{l-i}."""

    def __init__(self, state: "RecursionState", length: int):
        self.state = state
        self.length = length
        self.stage_kernels = [state.stages[i].n for i in range(length)]

    @property
    def nullspace_dim(self) -> int:
        return sum(k.dim for k in self.stage_kernels)

    def chain_from(self, components: Sequence[Mat]) -> JordanChain:
        """Apply the triangular map to column vectors n_1..n_l (n_i in N_i)."""
        l = self.length
        if len(components) != l:
            raise ValueError(f"need {l} component vectors")
        for i, (vec, ker) in enumerate(zip(components, self.stage_kernels), start=1):
            if not ker.contains(vec):
                raise ValueError(f"component {i} is not in the stage-{i} kernel")
        out = []
        for row in range(1, l + 1):
            acc = Mat.zeros(self.state.domain_dim, 1)
            for col in range(row, l + 1):
                block = self.state.m_block(row, col)
                if not (block.is_zero() or components[col - 1].is_zero()):
                    acc = acc + block @ components[col - 1]
            out.append(tuple(x[0] for x in acc.entries))
        return JordanChain(tuple(out))

    def basis_chains(self) -> list[JordanChain]:
        """One genuine length-l chain per basis vector of the deepest kernel."""
        n_l = self.stage_kernels[-1]
        zero = Mat.zeros(self.state.domain_dim, 1)
        chains = []
        for j in range(n_l.dim):
            comps = [zero] * (self.length - 1) + [n_l.basis.column(j)]
            chains.append(self.chain_from(comps))
        return chains

    def stacked_nullspace_basis(self) -> Mat:
        """Generators of the length-l kernel tuples, stacked into K^{n*l}."""
        columns = []
        zero = Mat.zeros(self.state.domain_dim, 1)
        for i, ker in enumerate(self.stage_kernels, start=1):
            for j in range(ker.dim):
                comps = [zero] * self.length
                comps[i - 1] = ker.basis.column(j)
                chain = self.chain_from(comps)
                columns.append([x for vec in chain.vectors for x in vec])
        return Mat.from_columns(columns, rows=self.state.domain_dim * self.length)


class RecursionState:
    """Single-writer builder for the stage ledger and the E/M columns.

    Truncated (non-polynomial) input is treated as an exact polynomial of its
    truncation degree, but stages are refused once they would consume
    coefficients the truncation does not genuinely contain.
    """

    def __init__(
        self,
        family: MatSeries,
        complements: ComplementPlan | None = None,
        max_stages: int | None = None,
    ):
        self.input_family = family
        self.input_exact = family.exact
        self.input_trunc = None if family.exact else family.degree
        # The engine always works with the polynomial closure.
        self.L = family if family.exact else MatSeries.polynomial(family.coeffs)
        self.domain_dim = family.cols
        self.codomain_dim = family.rows
        self.complements = complements or ComplementPlan.empty()
        degree = family.degree
        if max_stages is None:
            max_stages = (
                max(
                    self.domain_dim + self.codomain_dim,
                    degree * min(self.domain_dim, self.codomain_dim),
                )
                + 2
            )
        self.max_stages = max_stages
        self.generic_rank = generic_rank(self.L)
        self.stages: list[Stage] = []
        self.E_cols: list[list[Mat]] = []
        self.M_cols: list[list[Mat]] = []
        self.stabilization_k: int | None = None
        self._calp_sum = Mat.zeros(self.codomain_dim, self.codomain_dim)

    # -- accessors ------------------------------------------------------

    @property
    def stage_count(self) -> int:
        return len(self.stages)

    def stage(self, i: int) -> Stage:
        return self.stages[i - 1]

    def m_block(self, i: int, j: int) -> Mat:
        """M_{i,j} for 1 <= i <= j <= stage_count."""
        return self.M_cols[j - 1][i - 1]

    def e_block(self, i: int, j: int) -> Mat:
        return self.E_cols[j - 1][i - 1]

    def kernel_chain(self, i: int) -> Subspace:
        """N_i, with N_0 the full domain."""
        return Subspace.full(self.domain_dim) if i == 0 else self.stages[i - 1].n

    # -- the stage step ---------------------------------------------------

    def run_stage(self) -> None:
        j = len(self.stages) + 1
        if self.input_trunc is not None and j - 1 > self.input_trunc:
            raise TruncationError(
                f"stage {j} needs the order-{j - 1} coefficient; input truncated "
                f"at order {self.input_trunc}"
            )
        if j == 1:
            sbar = self.L.coefficient(0)
        else:
            sbar = Mat.zeros(self.codomain_dim, self.domain_dim)
            for v in range(1, j):
                lv = self.L.coefficient(v)
                mv = self.m_block(v, j - 1)
                if not (lv.is_zero() or mv.is_zero()):
                    sbar = sbar + lv @ mv
        s = sbar if self._calp_sum.is_zero() else sbar - self._calp_sum @ sbar
        prev_n = self.kernel_chain(j - 1)
        prev_rc = (
            Subspace.full(self.codomain_dim) if j == 1 else self.stages[-1].rc
        )
        n_j, r_j = restrict_and_split(s, prev_n)
        try:
            nc_j = choose_complement(prev_n, n_j, given=self.complements.nc_bases.get(j))
            rc_j = choose_complement(prev_rc, r_j, given=self.complements.rc_bases.get(j))
            parts_domain = [st.nc for st in self.stages] + [nc_j, n_j]
            parts_codomain = [st.r for st in self.stages] + [r_j, rc_j]
            p_j = projection_matrix(parts_domain, j - 1)
            calp_j = projection_matrix(parts_codomain, j - 1)
            splus_j = restricted_inverse(s, nc_j, r_j, parts_codomain)
        except ValueError as exc:
            overridden = j in self.complements.nc_bases or j in self.complements.rc_bases
            # A bad user-supplied complement is an input problem; the pivot
            # strategy failing would be a bug in the engine itself.
            kind = InputError if overridden else InternalConsistencyError
            raise kind(
                f"stage {j} (kernel dim {n_j.dim}, range dim {r_j.dim}, "
                f"ambient {self.domain_dim}->{self.codomain_dim}): {exc}"
            ) from exc
        self.stages.append(
            Stage(j, sbar, s, n_j, r_j, nc_j, rc_j, p_j, calp_j, splus_j)
        )
        self._calp_sum = self._calp_sum + calp_j
        self.E_cols.append(self._build_e_column(j))
        self.M_cols.append(self._build_m_column(j))
        self._detect_stabilization()

    def _build_e_column(self, j: int) -> list[Mat]:
        """Solve the triangular system bottom-up: E_{j,j} = I and
        E_{i,j} = -S_i^+ * sum_{v>i} S̄_v E_{v,j}."""
        col: list[Mat] = [Mat.zeros(self.domain_dim, self.domain_dim)] * j
        col[j - 1] = Mat.identity(self.domain_dim)
        acc = Mat.zeros(self.codomain_dim, self.domain_dim)
        for i in range(j - 1, 0, -1):
            above = col[i]
            sbar_next = self.stages[i].sbar
            if not (sbar_next.is_zero() or above.is_zero()):
                acc = acc + sbar_next @ above
            splus = self.stages[i - 1].splus
            col[i - 1] = (
                Mat.zeros(self.domain_dim, self.domain_dim)
                if splus.is_zero() or acc.is_zero()
                else -(splus @ acc)
            )
        return col

    def _build_m_column(self, j: int) -> list[Mat]:
        """M column j = diag(I, M^{(j-1)}) applied to the E column."""
        ecol = self.E_cols[j - 1]
        mcol: list[Mat] = [ecol[0]]
        for row in range(2, j + 1):
            acc = Mat.zeros(self.domain_dim, self.domain_dim)
            for c in range(row - 1, j):
                block = self.m_block(row - 1, c)
                if not (block.is_zero() or ecol[c].is_zero()):
                    acc = acc + block @ ecol[c]
            mcol.append(acc)
        return mcol

    # -- stabilization ----------------------------------------------------

    def _detect_stabilization(self) -> None:
        if self.stabilization_k is not None:
            return
        total = sum(st.r.dim for st in self.stages)
        if total > self.generic_rank:
            raise InternalConsistencyError(
                f"accumulated range dimension {total} exceeds generic rank "
                f"{self.generic_rank}"
            )
        if self.generic_rank > 0 and total == self.generic_rank:
            last_positive = max(st.index for st in self.stages if st.r.dim > 0)
            self.stabilization_k = last_positive - 1

    def detect_stabilization(self) -> int | None:
        return self.stabilization_k

    def run_until_stabilized(self) -> int:
        while self.stabilization_k is None:
            if len(self.stages) >= self.max_stages:
                raise StageBudgetError(
                    f"no stabilization certificate within {self.max_stages} stages "
                    f"(accumulated rank {sum(st.r.dim for st in self.stages)} of "
                    f"{self.generic_rank})",
                    stages_run=len(self.stages),
                    rank_found=sum(st.r.dim for st in self.stages),
                    generic_rank=self.generic_rank,
                )
            self.run_stage()
        return self.stabilization_k

    def ensure_stages(self, count: int) -> None:
        while len(self.stages) < count:
            self.run_stage()

    # -- queries built on the ledger ---------------------------------------

    def coefficient_identity_holds(self, j: int) -> bool:
        """(L_0 ... L_{j-1}) applied to M column j equals S_j, exactly."""
        acc = Mat.zeros(self.codomain_dim, self.domain_dim)
        for v in range(1, j + 1):
            lv = self.L.coefficient(v - 1)
            mv = self.m_block(v, j)
            if not (lv.is_zero() or mv.is_zero()):
                acc = acc + lv @ mv
        return acc == self.stages[j - 1].s

    def jordan_chain_basis(self, length: int) -> JordanChainFamily:
        self.ensure_stages(length)
        return JordanChainFamily(self, length)

    def rank_of_root(self, b0) -> int | float:
        """Largest i with b0 in N_i; math.inf when b0 survives stabilization."""
        vec = b0 if isinstance(b0, Mat) else Mat([[x] for x in b0])
        if vec.is_zero():
            raise ValueError("rank is defined for nonzero root candidates only")
        rank = 0
        for st in self.stages:
            if not st.n.contains(vec):
                return rank
            rank = st.index
        if self.stabilization_k is not None and rank >= self.stabilization_k + 1:
            return math.inf
        raise TruncationError(
            f"vector still lies in N_{rank}; run more stages or stabilize first"
        )

    def partial_triangularize(self, k: int) -> tuple[MatSeries, MatSeries]:
        """The degree-k pre-transformation from M column k+1 and the
        transformed series whose k+1 leading coefficients are S_1..S_{k+1}."""
        self.ensure_stages(k + 1)
        coeffs = [self.m_block(k + 1 - i, k + 1) for i in range(k + 1)]
        p_k = MatSeries(coeffs, exact=True)
        return p_k, self.input_family @ p_k

    def phi_coefficient(self, i: int) -> Mat:
        """phi_i = M_{k+1, k+1+i}; stage k+1+i must be genuine."""
        k = self._require_stabilized()
        if i == 0:
            return Mat.identity(self.domain_dim)
        self.ensure_stages(k + 1 + i)
        return self.m_block(k + 1, k + 1 + i)

    def psi_coefficient(self, i: int) -> Mat:
        """psi_i = sum_j S_{i+j} Splus_j over j = 1..k+1 (psi_0 = I)."""
        k = self._require_stabilized()
        if i == 0:
            return Mat.identity(self.codomain_dim)
        self.ensure_stages(k + 1 + i)
        acc = Mat.zeros(self.codomain_dim, self.codomain_dim)
        for j in range(1, k + 2):
            s_next = self.stages[i + j - 1].s
            splus = self.stages[j - 1].splus
            if not (s_next.is_zero() or splus.is_zero()):
                acc = acc + s_next @ splus
        return acc

    def _require_stabilized(self) -> int:
        if self.stabilization_k is None:
            raise ValueError("stabilization has not been certified yet")
        return self.stabilization_k
