"""Subspaces as basis matrices, direct-sum splits, projections, and
restricted inverses.

These are the building blocks the stage recursion consumes: splitting a
kernel chain under a map, choosing deterministic complements, and turning a
full decomposition into projection matrices. Zero-dimensional subspaces are
first-class throughout; callers never special-case them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .matrix import Mat


@dataclass(frozen=True)
class Subspace:
    """A subspace of K^n given by an independent-column basis matrix."""

    ambient_dim: int
    basis: Mat

    def __post_init__(self):
        if self.basis.rows != self.ambient_dim:
            raise ValueError("basis has the wrong ambient dimension")
        if self.basis.rank() != self.basis.cols:
            raise ValueError("basis columns are linearly dependent")

    @staticmethod
    def zero(ambient_dim: int) -> Subspace:
        return Subspace(ambient_dim, Mat.zeros(ambient_dim, 0))

    @staticmethod
    def full(ambient_dim: int) -> Subspace:
        return Subspace(ambient_dim, Mat.identity(ambient_dim))

    @staticmethod
    def spanned_by(columns: Sequence[Sequence], ambient_dim: int) -> Subspace:
        """Span of the given vectors, reduced to an independent basis."""
        raw = Mat.from_columns(columns, rows=ambient_dim)
        keep = _independent_column_subset(raw)
        return Subspace(ambient_dim, raw.submatrix_columns(keep))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def is_zero(self) -> bool:
        return self.dim == 0

    def contains(self, vector) -> bool:
        vec = vector if isinstance(vector, Mat) else Mat([[x] for x in vector])
        if vec.rows != self.ambient_dim:
            raise ValueError("vector has the wrong ambient dimension")
        if vec.is_zero():
            return True
        if self.dim == 0:
            return False
        return Mat.hstack([self.basis, vec]).rank() == self.dim

    def contains_subspace(self, other: Subspace) -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise ValueError("ambient dimension mismatch")
        if other.dim == 0:
            return True
        return Mat.hstack([self.basis, other.basis]).rank() == self.dim

    def coordinates_of(self, vector: Mat) -> Mat | None:
        """Coordinates of a column vector in this basis, or None if outside."""
        return self.basis.solve(vector)

    def canonical_basis(self) -> Mat:
        """Basis in column-reduced canonical form; equal iff spaces are equal."""
        reduced, pivots = self.basis.transpose().rref()
        return reduced.transpose().submatrix_columns(range(len(pivots)))

    def same_space(self, other: Subspace) -> bool:
        return (
            self.ambient_dim == other.ambient_dim
            and self.canonical_basis() == other.canonical_basis()
        )

    def __repr__(self):
        return f"Subspace(dim {self.dim} of K^{self.ambient_dim})"


def _independent_column_subset(m: Mat) -> list[int]:
    """Indices of a greedy maximal independent column subset, in index order."""
    keep: list[int] = []
    rank = 0
    for j in range(m.cols):
        candidate = keep + [j]
        if m.submatrix_columns(candidate).rank() > rank:
            keep = candidate
            rank += 1
    return keep


def kernel_basis(m: Mat) -> Subspace:
    """The kernel {x : m @ x = 0} with the deterministic rref parametrization."""
    return Subspace(m.cols, m.nullspace())


def image(m: Mat) -> Subspace:
    """The column space of m, spanned by its pivot columns (deterministic)."""
    _, pivots = m.rref()
    return Subspace(m.rows, m.submatrix_columns(pivots))


def restrict_and_split(s: Mat, domain: Subspace) -> tuple[Subspace, Subspace]:
    """Kernel and range of the restriction of ``s`` to ``domain``.

    Returns (N, R): N = {x in domain : s x = 0} in ambient coordinates,
    R = s(domain). dim(domain) = dim(N) + dim(R) by rank-nullity.
    """
    if s.cols != domain.ambient_dim:
        raise ValueError("map and domain ambient dimension differ")
    mapped = s @ domain.basis
    coords = mapped.nullspace()
    n_sub = Subspace(domain.ambient_dim, domain.basis @ coords)
    _, pivots = mapped.rref()
    r_sub = Subspace(s.rows, mapped.submatrix_columns(pivots))
    return n_sub, r_sub


def choose_complement(
    ambient: Subspace, sub: Subspace, given: Mat | None = None
) -> Subspace:
    """A complement of ``sub`` inside ``ambient``: ambient = comp ⊕ sub.

    Default strategy extends sub's basis greedily by ambient basis columns in
    index order via rank tests, which makes every run reproducible. Passing
    ``given`` validates the supplied basis instead and uses it verbatim.
    """
    if ambient.ambient_dim != sub.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    if not ambient.contains_subspace(sub):
        raise ValueError("sub is not contained in ambient")
    want = ambient.dim - sub.dim
    if given is not None:
        comp = Subspace(ambient.ambient_dim, given)
        if comp.dim != want:
            raise ValueError(
                f"given complement has dimension {comp.dim}, need {want}"
            )
        if not ambient.contains_subspace(comp):
            raise ValueError("given complement is not contained in ambient")
        if want and Mat.hstack([sub.basis, comp.basis]).rank() != ambient.dim:
            raise ValueError("given basis does not complement the subspace")
        return comp
    chosen: list[int] = []
    current = sub.basis
    rank = sub.dim
    for j in range(ambient.dim):
        if rank == ambient.dim:
            break
        candidate = Mat.hstack([current, ambient.basis.column(j)])
        if candidate.rank() > rank:
            current = candidate
            rank += 1
            chosen.append(j)
    return Subspace(ambient.ambient_dim, ambient.basis.submatrix_columns(chosen))


def projection_matrix(parts: Sequence[Subspace], target: int) -> Mat:
    """The projection onto ``parts[target]`` along the remaining parts.

    The parts must decompose the full ambient space; the projection is
    returned as a full ambient-space matrix (idempotent, range = target part).
    """
    if not parts:
        raise ValueError("no parts given")
    n = parts[0].ambient_dim
    if any(p.ambient_dim != n for p in parts):
        raise ValueError("ambient dimension mismatch among parts")
    if sum(p.dim for p in parts) != n:
        raise ValueError("parts do not decompose the ambient space")
    full = Mat.hstack([p.basis for p in parts]) if n else Mat.zeros(0, 0)
    try:
        inv = full.inverse()
    except ValueError as exc:
        raise ValueError("parts do not decompose the ambient space") from exc
    offset = sum(parts[i].dim for i in range(target))
    width = parts[target].dim
    if width == 0:
        return Mat.zeros(n, n)
    block = full.submatrix_columns(range(offset, offset + width))
    rows = Mat(inv.entries[offset : offset + width], cols=n)
    return block @ rows


def restricted_inverse(
    s: Mat, nc: Subspace, r: Subspace, codomain_parts: Sequence[Subspace]
) -> Mat:
    """Full-space matrix of the inverse of ``s`` restricted to nc -> r.

    Requires s to map nc bijectively onto r, and ``codomain_parts`` (one of
    which is r) to decompose the codomain. The result T satisfies
    T (s x) = x for x in nc, T y = 0 for y in every other part, range(T) = nc.
    """
    if s.cols != nc.ambient_dim or s.rows != r.ambient_dim:
        raise ValueError("shape mismatch")
    mapped = s @ nc.basis
    if mapped.rank() != nc.dim:
        raise ValueError("map is not injective on the given subspace")
    if r.dim != nc.dim or (nc.dim > 0 and not image(mapped).same_space(r)):
        raise ValueError("image of the subspace differs from the stated range")
    target = None
    for idx, part in enumerate(codomain_parts):
        if part.same_space(r):
            target = idx
            break
    if target is None:
        raise ValueError("range does not appear among the codomain parts")
    m = r.ambient_dim
    if sum(p.dim for p in codomain_parts) != m:
        raise ValueError("codomain parts do not decompose the codomain")
    full = Mat.hstack([p.basis for p in codomain_parts])
    inv = full.inverse()
    # Build T = W @ full^{-1}: on r's basis columns act through the inverse of
    # the restriction, on every other part's columns act as zero.
    blocks = []
    for idx, part in enumerate(codomain_parts):
        if idx != target or part.dim == 0:
            blocks.append(Mat.zeros(nc.ambient_dim, part.dim))
            continue
        coords = mapped.solve(part.basis)
        if coords is None:
            raise ValueError("range basis not reachable from the subspace")
        blocks.append(nc.basis @ coords)
    w = Mat.hstack(blocks) if blocks else Mat.zeros(nc.ambient_dim, 0)
    return w @ inv
