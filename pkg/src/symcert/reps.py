"""Linear representations of finite groups over the reals or complexes.

One matrix per group element.  Provides validation at a small tolerance,
direct sums and Kronecker products, characters, subgroup averaging
projectors, simultaneous-eigenspace splitting for abelian groups, and the
projector-based disentanglement certificate for a direct-product
decomposition of the group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .groups import (
    DirectProductDecomposition,
    FiniteGroup,
    NotASubgroupError,
    Subgroup,
    conjugacy_classes,
    is_abelian,
    subgroup_group,
)

TOL_REP = 1e-9  # default homomorphism / identity tolerance
TOL_LIN = 1e-8  # default subspace / eigenvalue tolerance

# Eigenvalues of the matrices handled here are roots of unity of modest order,
# separated by ~0.1 or more, so this clustering gap has huge headroom.
_EIGEN_GAP = 1e-6


class RepresentationError(ValueError):
    pass


class IdentityNotMappedError(RepresentationError):
    def __init__(self, residual: float) -> None:
        self.residual = residual
        super().__init__(f"the identity is not mapped to the identity matrix (residual {residual:.3e})")


class HomomorphismError(RepresentationError):
    def __init__(self, pair: tuple[int, int], residual: float) -> None:
        self.pair = pair
        self.residual = residual
        g, h = pair
        super().__init__(f"matrix({g}*{h}) != matrix({g}) @ matrix({h}), residual {residual:.3e}")


class GroupMismatchError(RepresentationError):
    pass


class NonAbelianError(RepresentationError):
    pass


class DecompositionMismatchError(RepresentationError):
    pass


@dataclass(frozen=True, eq=False)
class LinearRepresentation:
    """Matrices indexed by group element; ``field`` is ``"real"`` or ``"complex"``."""

    group: FiniteGroup
    dim: int
    field: str
    matrices: np.ndarray

    def matrix(self, g: int) -> np.ndarray:
        return self.matrices[g]


@dataclass(frozen=True, eq=False)
class CharacterTable:
    """Per-element traces of a representation (complex valued)."""

    group: FiniteGroup
    values: np.ndarray


@dataclass(frozen=True, eq=False)
class SubspaceDecomposition:
    """Orthonormal bases of invariant blocks with per-block bookkeeping.

    ``assignments[b]`` is the factor index whose action the block carries, or
    ``None`` for an unassigned (globally fixed / trivial) block.  Eigenvalue
    labels, when present, give the scalar each element acts by on the block.
    """

    blocks: tuple[np.ndarray, ...]
    assignments: tuple[int | None, ...]
    characters: tuple[np.ndarray, ...] | None = None

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(b.shape[1] for b in self.blocks)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)


@dataclass(frozen=True, eq=False)
class DisentanglementCertificate:
    disentangled: bool
    decomposition: SubspaceDecomposition
    dimension_deficit: int
    basis_min_singular: float


def _frob(a: np.ndarray) -> float:
    return float(np.sqrt((np.abs(a) ** 2).sum()))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _coerce_matrices(
    group: FiniteGroup, matrices: object, field: str | None
) -> tuple[np.ndarray, str]:
    arr = np.asarray(matrices)
    if field is None:
        field = "complex" if np.iscomplexobj(arr) else "real"
    if field not in ("real", "complex"):
        raise RepresentationError(f"unknown field {field!r}")
    dtype = np.complex128 if field == "complex" else np.float64
    arr = arr.astype(dtype, copy=True)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise RepresentationError(f"expected a stack of square matrices, got shape {arr.shape}")
    if arr.shape[0] != group.order:
        raise RepresentationError(
            f"expected one matrix per element ({group.order}), got {arr.shape[0]}"
        )
    if not np.isfinite(arr).all():
        raise RepresentationError("matrices contain non-finite entries")
    return _readonly(arr), field


def homomorphism_residual(group: FiniteGroup, matrices: np.ndarray) -> tuple[float, tuple[int, int]]:
    """Largest Frobenius defect of matrix(g*h) against matrix(g) @ matrix(h),
    over all pairs, with the pair attaining it."""
    cay = group.table
    worst = 0.0
    witness = (group.identity, group.identity)
    for g in range(group.order):
        diff = matrices[g] @ matrices - matrices[cay[g]]
        res = np.sqrt((np.abs(diff) ** 2).sum(axis=(1, 2)))
        h = int(res.argmax())
        if res[h] > worst:
            worst = float(res[h])
            witness = (g, h)
    return worst, witness


def validate_representation(
    group: FiniteGroup,
    matrices: object,
    tol_rep: float = TOL_REP,
    field: str | None = None,
) -> LinearRepresentation:
    """Verify the homomorphism property, the identity image, and invertibility.

    Invertibility is checked through the condition number (bounded by
    ``1 / tol_rep``).  Raises with the offending pair and its residual.
    """
    arr, field = _coerce_matrices(group, matrices, field)
    d = arr.shape[1]
    id_res = _frob(arr[group.identity] - np.eye(d, dtype=arr.dtype))
    if id_res > tol_rep:
        raise IdentityNotMappedError(id_res)
    worst, witness = homomorphism_residual(group, arr)
    if worst > tol_rep:
        raise HomomorphismError(witness, worst)
    svals = np.linalg.svd(arr, compute_uv=False)
    cond = svals[:, 0] / svals[:, -1]
    if not np.isfinite(cond).all() or cond.max() > 1.0 / tol_rep:
        g = int(cond.argmax())
        raise RepresentationError(f"matrix for element {g} is numerically singular")
    return LinearRepresentation(group=group, dim=d, field=field, matrices=arr)


def direct_sum(r1: LinearRepresentation, r2: LinearRepresentation) -> LinearRepresentation:
    """Block-diagonal sum; the off-diagonal blocks are exactly zero."""
    if r1.group != r2.group:
        raise GroupMismatchError("direct sum requires representations of the same group")
    if r1.field != r2.field:
        raise GroupMismatchError("direct sum requires representations over the same field")
    n, d1, d2 = r1.group.order, r1.dim, r2.dim
    out = np.zeros((n, d1 + d2, d1 + d2), dtype=r1.matrices.dtype)
    out[:, :d1, :d1] = r1.matrices
    out[:, d1:, d1:] = r2.matrices
    return LinearRepresentation(r1.group, d1 + d2, r1.field, _readonly(out))


def tensor_product(r1: LinearRepresentation, r2: LinearRepresentation) -> LinearRepresentation:
    """Kronecker product per element, with the lexicographic pair basis."""
    if r1.group != r2.group:
        raise GroupMismatchError("tensor product requires representations of the same group")
    if r1.field != r2.field:
        raise GroupMismatchError("tensor product requires representations over the same field")
    n, d1, d2 = r1.group.order, r1.dim, r2.dim
    out = np.einsum("gik,gjl->gijkl", r1.matrices, r2.matrices).reshape(
        n, d1 * d2, d1 * d2
    )
    return LinearRepresentation(r1.group, d1 * d2, r1.field, _readonly(np.ascontiguousarray(out)))


def character(rep: LinearRepresentation, tol_lin: float = TOL_LIN) -> CharacterTable:
    """Per-element traces, verified constant on conjugacy classes."""
    vals = np.trace(rep.matrices, axis1=1, axis2=2).astype(np.complex128)
    for cls in conjugacy_classes(rep.group):
        spread = np.abs(vals[cls] - vals[cls].mean()).max()
        if spread > tol_lin:
            raise RepresentationError(
                f"trace is not constant on the conjugacy class of element {cls[0]}"
            )
    return CharacterTable(group=rep.group, values=_readonly(vals))


def fixed_subspace_projector(rep: LinearRepresentation, sub: Subgroup) -> np.ndarray:
    """Average of the subgroup's matrices; projects onto its fixed vectors."""
    if sub.parent != rep.group:
        raise NotASubgroupError("the subgroup belongs to a different group")
    return rep.matrices[list(sub.members)].mean(axis=0)


def restrict(rep: LinearRepresentation, sub: Subgroup) -> LinearRepresentation:
    """The same matrices, reindexed as a representation of the subgroup."""
    if sub.parent != rep.group:
        raise NotASubgroupError("the subgroup belongs to a different group")
    grp = subgroup_group(sub)
    mats = rep.matrices[list(sub.members)].copy()
    return LinearRepresentation(grp, rep.dim, rep.field, _readonly(mats))


def _range_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space of an (approximately) idempotent
    matrix.  Idempotents have singular values clustered at >= 1 and at 0, so
    a cut at 1/2 separates the range cleanly; validity of the resulting
    blocks is enforced by residual checks downstream."""
    u, s, _ = np.linalg.svd(p)
    rank = int((s > 0.5).sum())
    return u[:, :rank]


def _complement_within(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Basis of the part of span(outer) orthogonal to span(inner), where
    span(inner) is contained in span(outer) and both bases are orthonormal."""
    if inner.shape[1] == 0:
        return outer
    overlap = inner.conj().T @ outer
    _, s, vh = np.linalg.svd(overlap, full_matrices=True)
    rank = int((s > 0.5).sum())
    return outer @ vh[rank:].conj().T


def _split_block(mat: np.ndarray, basis: np.ndarray) -> list[np.ndarray]:
    """Refine an invariant block into the eigenspaces of ``mat`` inside it."""
    k = basis.shape[1]
    if k == 1:
        return [basis]
    m = basis.conj().T @ mat @ basis
    w, v = np.linalg.eig(m)
    order = np.lexsort((w.imag.round(9), w.real.round(9)))
    pieces = []
    cluster = [order[0]]
    for idx in order[1:]:
        if abs(w[idx] - w[cluster[-1]]) <= _EIGEN_GAP:
            cluster.append(idx)
        else:
            pieces.append(cluster)
            cluster = [idx]
    pieces.append(cluster)
    out = []
    for idx in pieces:
        q, _ = np.linalg.qr(v[:, idx])
        out.append(basis @ q)
    return out


def _block_characters(rep: LinearRepresentation, blocks: Sequence[np.ndarray]) -> list[np.ndarray]:
    chars = []
    for b in blocks:
        chi = np.einsum("rj,grs,sj->g", b.conj(), rep.matrices, b) / b.shape[1]
        chars.append(chi.astype(np.complex128))
    return chars


def _char_sort_key(chi: np.ndarray):
    return tuple(np.round(chi.view(float), 9).tolist())


def isotypic_decomposition(
    rep: LinearRepresentation, tol_lin: float = TOL_LIN
) -> SubspaceDecomposition:
    """Split an abelian-group representation into simultaneous eigenspaces.

    Over the complexes every irreducible of an abelian group is a scalar
    character, so the blocks returned here are the isotypic components, each
    labelled by the character it carries.  A real representation is first
    complexified, then conjugate character pairs are folded back into real
    blocks (real characters keep their own real block).

    Blocks need not be mutually orthogonal for representations that do not
    preserve the norm; each block basis itself is always orthonormal.
    """
    if not is_abelian(rep.group):
        raise NonAbelianError("eigenspace splitting is only implemented for abelian groups")
    if rep.field == "real":
        return _real_isotypic(rep, tol_lin)
    blocks = [np.eye(rep.dim, dtype=np.complex128)]
    for g in range(rep.group.order):
        blocks = [piece for b in blocks for piece in _split_block(rep.matrices[g], b)]
    chars = _block_characters(rep, blocks)
    order = sorted(range(len(blocks)), key=lambda i: _char_sort_key(chars[i]))
    blocks = [_readonly(blocks[i].copy()) for i in order]
    chars = [_readonly(chars[i].copy()) for i in order]
    return SubspaceDecomposition(
        blocks=tuple(blocks), assignments=(None,) * len(blocks), characters=tuple(chars)
    )


def _real_span(block: np.ndarray, dim: int) -> np.ndarray:
    stacked = np.hstack([block.real, block.imag])
    u, s, _ = np.linalg.svd(stacked)
    return u[:, :dim]


def _real_isotypic(rep: LinearRepresentation, tol_lin: float) -> SubspaceDecomposition:
    comp = LinearRepresentation(
        rep.group, rep.dim, "complex", _readonly(rep.matrices.astype(np.complex128))
    )
    dec = isotypic_decomposition(comp, tol_lin)
    assert dec.characters is not None
    used = [False] * len(dec.blocks)
    blocks: list[np.ndarray] = []
    chars: list[np.ndarray] = []
    for i, (b, chi) in enumerate(zip(dec.blocks, dec.characters)):
        if used[i]:
            continue
        used[i] = True
        if np.abs(chi.imag).max() <= 10 * tol_lin:
            blocks.append(_real_span(b, b.shape[1]))
            chars.append(chi)
            continue
        partner = None
        for j in range(i + 1, len(dec.blocks)):
            if not used[j] and np.abs(dec.characters[j] - chi.conj()).max() <= _EIGEN_GAP:
                partner = j
                break
        if partner is None:
            raise RepresentationError(
                "complexified blocks do not pair into conjugates; is the input real?"
            )
        used[partner] = True
        blocks.append(_real_span(b, 2 * b.shape[1]))
        # label the pair by its member with lexicographically larger values
        other = dec.characters[partner]
        chars.append(chi if _char_sort_key(chi) >= _char_sort_key(other) else other)
    order = sorted(range(len(blocks)), key=lambda i: _char_sort_key(chars[i]))
    return SubspaceDecomposition(
        blocks=tuple(_readonly(blocks[i].copy()) for i in order),
        assignments=(None,) * len(blocks),
        characters=tuple(_readonly(chars[i].copy()) for i in order),
    )


def is_disentangled_representation(
    rep: LinearRepresentation,
    decomposition: DirectProductDecomposition,
    tol_lin: float = TOL_LIN,
) -> DisentanglementCertificate:
    """Certify that the space splits into per-factor invariant blocks.

    The globally fixed subspace is split off first and assigned to no factor.
    For factor ``i``, the candidate block is the range of the product of the
    averaging projectors of all the other factors (the vectors they all fix),
    minus the globally fixed part.  The representation is disentangled exactly
    when those blocks account for the whole space: the block dimensions must
    sum to the full dimension and the concatenated bases must be jointly
    nonsingular.  Both checks are invariant under any invertible change of
    basis of the representation space.
    """
    if decomposition.parent != rep.group:
        raise DecompositionMismatchError("the decomposition belongs to a different group")
    mats = rep.matrices
    d = rep.dim
    b0 = _range_basis(mats.mean(axis=0))
    blocks: list[np.ndarray] = []
    assignments: list[int | None] = []
    if b0.shape[1]:
        blocks.append(b0)
        assignments.append(None)
    for i in range(len(decomposition.factors)):
        p = np.eye(d, dtype=mats.dtype)
        for j, f in enumerate(decomposition.factors):
            if j != i:
                p = p @ fixed_subspace_projector(rep, f)
        fixed_by_others = _range_basis(p)
        zi = _complement_within(fixed_by_others, b0)
        if zi.shape[1]:
            blocks.append(zi)
            assignments.append(i)
    total = sum(b.shape[1] for b in blocks)
    if blocks:
        concat = np.hstack(blocks)
        smin = float(np.linalg.svd(concat, compute_uv=False)[-1])
    else:
        smin = 0.0
    deficit = d - total
    # the blocks live in distinct isotypic components, so reaching full
    # dimension forces joint independence; the singular value guards numerics
    ok = deficit == 0 and smin > max(tol_lin, 1e-6)
    dec = SubspaceDecomposition(
        blocks=tuple(_readonly(b.copy()) for b in blocks),
        assignments=tuple(assignments),
    )
    return DisentanglementCertificate(
        disentangled=bool(ok),
        decomposition=dec,
        dimension_deficit=int(deficit),
        basis_min_singular=smin,
    )
