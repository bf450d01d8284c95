"""Group actions on finite sets, stored as full tables and checked exactly.

An action of a group of order ``n`` on ``m`` points is an ``n x m`` table;
row ``g``, column ``x`` holds the image ``g . x``.  As with groups, both
action axioms are integer checks with no tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .groups import (
    DirectProductDecomposition,
    FiniteGroup,
    SizeGuardExceededError,
    closure,
    direct_product,
)

#: Product-structure searches refuse point sets above this size.
SEARCH_GUARD = 4096


class ActionError(ValueError):
    """A table failed one of the exact action-axiom checks."""


class IdentityAxiomError(ActionError):
    def __init__(self, point: int) -> None:
        self.point = point
        super().__init__(f"the identity moves point {point}")


class CompatibilityError(ActionError):
    def __init__(self, g: int, h: int, point: int) -> None:
        self.g = g
        self.h = h
        self.point = point
        super().__init__(f"(g*h).x != g.(h.x) for (g, h, x) = ({g}, {h}, {point})")


class ArityMismatchError(ActionError):
    pass


@dataclass(frozen=True)
class FiniteAction:
    """A validated action; ``table[g][x]`` is the image of point ``x`` under ``g``."""

    group: FiniteGroup
    set_size: int
    table: tuple[tuple[int, ...], ...]

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.table, dtype=np.intp)
        arr.setflags(write=False)
        return arr


@dataclass(frozen=True)
class ProductStructure:
    """A bijective labelling of the points by factor coordinates.

    ``coords[x]`` is the coordinate tuple of point ``x``; the lexicographic
    labelling (last coordinate fastest) is the canonical one.
    """

    factor_sizes: tuple[int, ...]
    coords: tuple[tuple[int, ...], ...]

    @classmethod
    def lexicographic(cls, factor_sizes: Sequence[int]) -> "ProductStructure":
        sizes = tuple(int(s) for s in factor_sizes)
        total = int(np.prod(sizes))
        grids = np.unravel_index(np.arange(total), sizes)
        coords = tuple(zip(*(g.tolist() for g in grids)))
        return cls(factor_sizes=sizes, coords=coords)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.array(self.coords, dtype=np.intp)
        arr.setflags(write=False)
        return arr

    @cached_property
    def point_of(self) -> dict[tuple[int, ...], int]:
        return {c: i for i, c in enumerate(self.coords)}


def product_structure(
    factor_sizes: Sequence[int], coords: Sequence[Sequence[int]]
) -> ProductStructure:
    """Validate an explicit coordinate labelling (bijection onto the grid)."""
    sizes = tuple(int(s) for s in factor_sizes)
    tuples = tuple(tuple(int(v) for v in c) for c in coords)
    total = int(np.prod(sizes))
    if len(tuples) != total:
        raise ActionError(f"expected {total} coordinate tuples, got {len(tuples)}")
    for c in tuples:
        if len(c) != len(sizes) or any(not 0 <= v < s for v, s in zip(c, sizes)):
            raise ActionError(f"coordinate tuple {c} out of range for sizes {sizes}")
    if len(set(tuples)) != total:
        raise ActionError("coordinate labelling is not a bijection")
    return ProductStructure(factor_sizes=sizes, coords=tuples)


def validate_action(group: FiniteGroup, table: object) -> FiniteAction:
    """Check both action axioms exactly and return the validated action."""
    arr = np.asarray(table, dtype=np.intp)
    if arr.ndim != 2 or arr.shape[0] != group.order:
        raise ActionError(
            f"expected a table with {group.order} rows, got shape {arr.shape}"
        )
    m = arr.shape[1]
    if m == 0:
        raise ActionError("the action table has no points")
    if arr.min() < 0 or arr.max() >= m:
        raise ActionError("table entries must lie in 0..m-1")
    id_row = arr[group.identity]
    if not np.array_equal(id_row, np.arange(m)):
        raise IdentityAxiomError(int(np.flatnonzero(id_row != np.arange(m))[0]))
    cay = group.table
    for g in range(group.order):
        lhs = arr[cay[g]]  # [h, x] -> (g*h).x
        rhs = arr[g][arr]  # [h, x] -> g.(h.x)
        if not np.array_equal(lhs, rhs):
            h, x = np.argwhere(lhs != rhs)[0]
            raise CompatibilityError(g, int(h), int(x))
    return FiniteAction(
        group=group, set_size=m, table=tuple(tuple(row) for row in arr.tolist())
    )


def product_action(
    a1: FiniteAction, a2: FiniteAction
) -> tuple[FiniteAction, ProductStructure]:
    """The componentwise action of the direct product on the product set.

    Element ``(g1, g2)`` sends point ``(x1, x2)`` to ``(g1 . x1, g2 . x2)``;
    the returned lexicographic structure witnesses the decomposition.
    """
    grp = direct_product(a1.group, a2.group)
    t1, t2 = a1.array, a2.array
    m2 = a2.set_size
    table = (t1[:, None, :, None] * m2 + t2[None, :, None, :]).reshape(
        grp.order, a1.set_size * m2
    )
    return validate_action(grp, table), ProductStructure.lexicographic(
        (a1.set_size, m2)
    )


def orbits(action: FiniteAction) -> list[list[int]]:
    """Disjoint orbits covering the point set, ordered by smallest member."""
    arr = action.array
    seen = np.zeros(action.set_size, dtype=bool)
    out = []
    for x in range(action.set_size):
        if seen[x]:
            continue
        orb = np.unique(arr[:, x])
        seen[orb] = True
        out.append([int(v) for v in orb])
    return out


def is_transitive(action: FiniteAction) -> bool:
    return len(orbits(action)) == 1


def is_free(action: FiniteAction) -> bool:
    """True when only the identity fixes any point."""
    arr = action.array
    pts = np.arange(action.set_size)
    fixed = (arr == pts).any(axis=1)
    fixed[action.group.identity] = False
    return not fixed.any()


def _orbit_ids(table: np.ndarray, members: Sequence[int]) -> tuple[int, np.ndarray]:
    """Orbit count and per-point orbit id under a subgroup's rows of ``table``."""
    m = table.shape[1]
    rows = table[np.asarray(members, dtype=np.intp)]
    ids = np.full(m, -1, dtype=np.intp)
    k = 0
    for x in range(m):
        if ids[x] >= 0:
            continue
        orb = np.unique(rows[:, x])
        ids[orb] = k
        k += 1
    return k, ids


def is_disentangled_action(
    action: FiniteAction,
    decomposition: DirectProductDecomposition,
    structure: ProductStructure,
) -> tuple[bool, tuple[int, int, int] | None]:
    """Decide whether each factor moves only its own coordinate, consistently.

    Under the given labelling, every member of factor ``i`` must leave all
    other coordinates fixed and must transform coordinate ``i`` by a map that
    depends on coordinate ``i`` alone (so that per-factor actions exist).
    Returns ``(True, None)`` or ``(False, (g, x, coordinate))`` with the first
    violation found.
    """
    k = len(decomposition.factors)
    if k != len(structure.factor_sizes):
        raise ArityMismatchError(
            f"decomposition has {k} factors but the structure has "
            f"{len(structure.factor_sizes)}"
        )
    if decomposition.parent != action.group:
        raise ActionError("the decomposition belongs to a different group")
    if len(structure.coords) != action.set_size:
        raise ActionError("the structure labels a different number of points")
    coords = structure.array
    arr = action.array
    identity = action.group.identity
    for i, factor in enumerate(decomposition.factors):
        for g in factor.members:
            if g == identity:
                continue
            img = arr[g]
            moved = coords[img] != coords
            moved[:, i] = False
            if moved.any():
                x, j = np.argwhere(moved)[0]
                return False, (int(g), int(x), int(j))
            # coordinate i must move by a well-defined map of itself
            new = np.full(structure.factor_sizes[i], -1, dtype=np.intp)
            old_vals = coords[:, i]
            new_vals = coords[img, i]
            new[old_vals] = new_vals
            bad = new[old_vals] != new_vals
            if bad.any():
                return False, (int(g), int(np.flatnonzero(bad)[0]), i)
    return True, None


def search_product_structure(
    action: FiniteAction, decomposition: DirectProductDecomposition
) -> ProductStructure | None:
    """Recover a labelling that disentangles the action, or ``None``.

    Coordinate ``i`` of a point is the index of its orbit under the subgroup
    generated by all the other factors; elementwise commutation makes each
    factor permute those orbits, so whenever the combined coordinate map is
    bijective it disentangles the action.  The map is always bijective for
    free transitive actions; ``None`` reports that no labelling was found,
    not that none can exist.
    """
    if action.set_size > SEARCH_GUARD:
        raise SizeGuardExceededError(action.set_size, SEARCH_GUARD)
    if decomposition.parent != action.group:
        raise ActionError("the decomposition belongs to a different group")
    arr = action.array
    sizes = []
    cols = []
    for i in range(len(decomposition.factors)):
        others = [
            g
            for j, f in enumerate(decomposition.factors)
            if j != i
            for g in f.members
        ]
        complement = closure(action.group, others)
        count, ids = _orbit_ids(arr, complement)
        sizes.append(count)
        cols.append(ids)
    if int(np.prod(sizes)) != action.set_size:
        return None
    coords = np.stack(cols, axis=1)
    flat = np.ravel_multi_index(tuple(coords.T), tuple(sizes))
    if np.unique(flat).size != action.set_size:
        return None
    return product_structure(tuple(sizes), [tuple(row) for row in coords.tolist()])
