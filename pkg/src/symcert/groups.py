"""Finite groups stored extensionally as multiplication tables.

Element ``i * j`` is read off row ``i``, column ``j`` of an ``n x n`` index
table, so every axiom is a finite integer check and is verified exactly
(no tolerances).  All constructors route through :func:`validate_group`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

#: Exhaustive subgroup and decomposition searches refuse groups above this order.
SIZE_GUARD = 256


class GroupTableError(ValueError):
    """A table failed one of the exact group-axiom checks."""


class NoIdentityError(GroupTableError):
    pass


class NotInvertibleError(GroupTableError):
    def __init__(self, axis: str, index: int) -> None:
        self.axis = axis
        self.index = index
        super().__init__(f"{axis} {index} of the table is not a permutation of 0..n-1")


class NotAssociativeError(GroupTableError):
    def __init__(self, triple: tuple[int, int, int]) -> None:
        self.triple = triple
        x, y, z = triple
        super().__init__(f"(x*y)*z != x*(y*z) for (x, y, z) = ({x}, {y}, {z})")


class SizeGuardExceededError(GroupTableError):
    def __init__(self, order: int, limit: int) -> None:
        self.order = order
        self.limit = limit
        super().__init__(f"group order {order} exceeds the exhaustive-search guard {limit}")


class NotASubgroupError(GroupTableError):
    pass


class DecompositionError(GroupTableError):
    """A candidate factor list is not an internal direct-product decomposition."""


@dataclass(frozen=True)
class FiniteGroup:
    """A finite group of order ``n`` with elements identified by index.

    ``cayley[i][j]`` is the index of the product of elements ``i`` and ``j``.
    Labels are purely cosmetic and excluded from equality.
    """

    order: int
    cayley: tuple[tuple[int, ...], ...]
    identity: int
    labels: tuple[str, ...] = field(compare=False, repr=False)

    @cached_property
    def table(self) -> np.ndarray:
        arr = np.array(self.cayley, dtype=np.intp)
        arr.setflags(write=False)
        return arr

    @cached_property
    def inverses(self) -> np.ndarray:
        inv = np.argmax(self.table == self.identity, axis=1)
        inv.setflags(write=False)
        return inv

    def mul(self, a: int, b: int) -> int:
        return self.cayley[a][b]

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def element_order(self, a: int) -> int:
        k, acc = 1, a
        while acc != self.identity:
            acc = self.cayley[acc][a]
            k += 1
        return k

    def label(self, a: int) -> str:
        return self.labels[a]


@dataclass(frozen=True)
class Subgroup:
    """A validated subgroup, stored as the sorted member indices of its parent."""

    parent: FiniteGroup
    members: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.members)


def _as_index_table(table: object) -> np.ndarray:
    arr = np.asarray(table, dtype=np.intp)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise GroupTableError(f"expected a square index table, got shape {arr.shape}")
    n = arr.shape[0]
    if n == 0:
        raise GroupTableError("the table is empty")
    if arr.min() < 0 or arr.max() >= n:
        raise GroupTableError("table entries must lie in 0..n-1")
    return arr


def _check_associative(arr: np.ndarray) -> None:
    n = arr.shape[0]
    for x in range(n):
        lhs = arr[arr[x]]  # [y, z] -> (x*y)*z
        rhs = arr[x][arr]  # [y, z] -> x*(y*z)
        if not np.array_equal(lhs, rhs):
            y, z = np.argwhere(lhs != rhs)[0]
            raise NotAssociativeError((x, int(y), int(z)))


def validate_group(table: object, labels: Sequence[str] | None = None) -> FiniteGroup:
    """Check all three group axioms on a table and return the validated group.

    The identity is discovered from the table, not supplied.  Raises
    :class:`NoIdentityError`, :class:`NotInvertibleError` (with the offending
    row or column) or :class:`NotAssociativeError` (with the violating triple).
    """
    arr = _as_index_table(table)
    n = arr.shape[0]
    idx = np.arange(n)
    two_sided = np.flatnonzero((arr == idx).all(axis=1) & (arr == idx[:, None]).all(axis=0))
    if two_sided.size == 0:
        raise NoIdentityError("no element acts as a two-sided identity")
    identity = int(two_sided[0])
    for i in range(n):
        if not np.array_equal(np.sort(arr[i]), idx):
            raise NotInvertibleError("row", i)
    for j in range(n):
        if not np.array_equal(np.sort(arr[:, j]), idx):
            raise NotInvertibleError("column", j)
    _check_associative(arr)
    if labels is None:
        labels = tuple(str(i) for i in range(n))
    else:
        labels = tuple(str(s) for s in labels)
        if len(labels) != n:
            raise GroupTableError(f"expected {n} labels, got {len(labels)}")
    return FiniteGroup(
        order=n,
        cayley=tuple(tuple(row) for row in arr.tolist()),
        identity=identity,
        labels=labels,
    )


def cyclic_group(n: int) -> FiniteGroup:
    """Addition modulo ``n``; the identity is 0 and element 1 generates."""
    if n < 1:
        raise ValueError(f"cyclic group order must be at least 1, got {n}")
    idx = np.arange(n)
    return validate_group((idx[:, None] + idx[None, :]) % n)


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """Componentwise product on pairs ``(a, b)``, ordered with ``b`` fastest.

    Pair ``(a, b)`` gets index ``a * |H| + b``, so the embedded copies of the
    factors are recoverable with :func:`embedded_subgroups`.
    """
    m = h.order
    size = g.order * m
    a, b = divmod(np.arange(size), m)
    cay = g.table[a[:, None], a[None, :]] * m + h.table[b[:, None], b[None, :]]
    labels = tuple(f"({la},{lb})" for la in g.labels for lb in h.labels)
    return validate_group(cay, labels)


def embedded_subgroups(product: FiniteGroup, orders: Sequence[int]) -> list[Subgroup]:
    """Embedded factor copies inside a lexicographically indexed direct product.

    ``orders`` are the factor orders, outermost first, matching how
    :func:`direct_product` packs pair indices.
    """
    orders = [int(o) for o in orders]
    if int(np.prod(orders)) != product.order:
        raise DecompositionError("factor orders do not multiply to the group order")
    out = []
    e = product.identity
    stride = product.order
    for o in orders:
        stride //= o
        e_i = (e // stride) % o
        base = e - e_i * stride
        out.append(subgroup(product, [base + j * stride for j in range(o)]))
    return out


def subgroup(parent: FiniteGroup, members: Iterable[int]) -> Subgroup:
    """Validate a member set (identity, closure, inverses) and wrap it."""
    mem = np.unique(np.asarray(list(members), dtype=np.intp))
    if mem.size == 0 or mem.min() < 0 or mem.max() >= parent.order:
        raise NotASubgroupError("member indices out of range")
    mset = set(mem.tolist())
    if parent.identity not in mset:
        raise NotASubgroupError("the subset does not contain the identity")
    products = set(np.unique(parent.table[np.ix_(mem, mem)]).tolist())
    if not products <= mset:
        raise NotASubgroupError("the subset is not closed under the product")
    if not set(parent.inverses[mem].tolist()) <= mset:
        raise NotASubgroupError("the subset is not closed under inverses")
    return Subgroup(parent=parent, members=tuple(int(x) for x in mem))


def closure(parent: FiniteGroup, generators: Iterable[int]) -> tuple[int, ...]:
    """Smallest subgroup member set containing the given elements."""
    current = set(int(g) for g in generators) | {parent.identity}
    while True:
        mem = np.fromiter(current, dtype=np.intp)
        products = set(np.unique(parent.table[np.ix_(mem, mem)]).tolist())
        if products <= current:
            return tuple(sorted(current))
        current |= products


def all_subgroups(group: FiniteGroup) -> list[Subgroup]:
    """Every subgroup, found by closing one-element extensions exhaustively.

    Sorted by order, then by member list, for reproducible output.
    """
    if group.order > SIZE_GUARD:
        raise SizeGuardExceededError(group.order, SIZE_GUARD)
    trivial = (group.identity,)
    found = {trivial}
    worklist = [trivial]
    while worklist:
        base = worklist.pop()
        base_set = set(base)
        for g in range(group.order):
            if g in base_set:
                continue
            ext = closure(group, base + (g,))
            if ext not in found:
                found.add(ext)
                worklist.append(ext)
    subs = [subgroup(group, mem) for mem in found]
    subs.sort(key=lambda s: (s.order, s.members))
    return subs


def is_abelian(group: FiniteGroup) -> bool:
    return bool(np.array_equal(group.table, group.table.T))


def conjugacy_classes(group: FiniteGroup) -> list[list[int]]:
    """Partition of the elements into conjugacy classes, ordered by smallest member."""
    arr = group.table
    inv = group.inverses
    rows = np.arange(group.order)
    seen = np.zeros(group.order, dtype=bool)
    classes = []
    for x in range(group.order):
        if seen[x]:
            continue
        cls = np.unique(arr[arr[rows, x], inv[rows]])
        seen[cls] = True
        classes.append([int(v) for v in cls])
    return classes


@dataclass(frozen=True, eq=False)
class DirectProductDecomposition:
    """An internal direct-product decomposition of ``parent``.

    ``tuple_to_parent`` maps factor member positions ``(p_1, ..., p_k)`` to the
    parent element ``m_1 * m_2 * ... * m_k``; validation guarantees it is a
    bijection and a homomorphism for the componentwise product.
    """

    parent: FiniteGroup
    factors: tuple[Subgroup, ...]
    tuple_to_parent: np.ndarray

    @property
    def factor_orders(self) -> tuple[int, ...]:
        return tuple(f.order for f in self.factors)

    @cached_property
    def parent_to_tuple(self) -> np.ndarray:
        """Per parent element, the member positions of its factor components."""
        flat = self.tuple_to_parent.reshape(-1)
        pos = np.stack(np.unravel_index(np.arange(flat.size), self.tuple_to_parent.shape), axis=1)
        out = np.empty_like(pos)
        out[flat] = pos
        out.setflags(write=False)
        return out

    def compose(self, positions: Sequence[int]) -> int:
        return int(self.tuple_to_parent[tuple(positions)])


def _check_product_homomorphism(
    parent: FiniteGroup, factors: tuple[Subgroup, ...], fm: np.ndarray
) -> None:
    # Componentwise products of member tuples must map to parent products.
    flat = fm.reshape(-1)
    pos = np.unravel_index(np.arange(flat.size), fm.shape)
    pos_mul = []
    for f in factors:
        mem = np.asarray(f.members, dtype=np.intp)
        lookup = np.full(parent.order, -1, dtype=np.intp)
        lookup[mem] = np.arange(mem.size)
        pos_mul.append(lookup[parent.table[np.ix_(mem, mem)]])
    lhs = parent.table[flat[:, None], flat[None, :]]
    comp = tuple(pm[p[:, None], p[None, :]] for pm, p in zip(pos_mul, pos))
    rhs = fm[comp]
    if not np.array_equal(lhs, rhs):
        a, b = np.argwhere(lhs != rhs)[0]
        raise DecompositionError(
            f"componentwise product disagrees with the group product at pair ({a}, {b})"
        )


def decomposition_from_subgroups(
    parent: FiniteGroup, factor_members: Sequence[Iterable[int]]
) -> DirectProductDecomposition:
    """Validate commuting factors with trivial intersections whose products
    enumerate the parent bijectively, and return the decomposition.

    The product map is verified to be a homomorphism by exhaustive check for
    orders up to the size guard; above it, elementwise commutation plus
    bijectivity already force the homomorphism property.
    """
    factors = tuple(subgroup(parent, mem) for mem in factor_members)
    if not factors:
        raise DecompositionError("at least one factor is required")
    e = parent.identity
    for i in range(len(factors)):
        for j in range(i + 1, len(factors)):
            if set(factors[i].members) & set(factors[j].members) != {e}:
                raise DecompositionError(f"factors {i} and {j} intersect nontrivially")
            mi = np.asarray(factors[i].members, dtype=np.intp)
            mj = np.asarray(factors[j].members, dtype=np.intp)
            if not np.array_equal(parent.table[np.ix_(mi, mj)], parent.table[np.ix_(mj, mi)].T):
                raise DecompositionError(f"factors {i} and {j} do not commute elementwise")
    fm = np.asarray(factors[0].members, dtype=np.intp)
    for f in factors[1:]:
        fm = parent.table[fm[..., None], np.asarray(f.members, dtype=np.intp)]
    flat = fm.reshape(-1)
    if not np.array_equal(np.sort(flat), np.arange(parent.order)):
        raise DecompositionError("factor products do not enumerate the group bijectively")
    if parent.order <= SIZE_GUARD:
        _check_product_homomorphism(parent, factors, fm)
    fm = fm.copy()
    fm.setflags(write=False)
    return DirectProductDecomposition(parent=parent, factors=factors, tuple_to_parent=fm)


def find_direct_decompositions(
    group: FiniteGroup, max_factors: int | None = None
) -> list[DirectProductDecomposition]:
    """All internal direct-product decompositions into 2..``max_factors``
    nontrivial factors, deduplicated up to factor reordering.

    An empty list means the group admits no such decomposition.
    """
    if group.order > SIZE_GUARD:
        raise SizeGuardExceededError(group.order, SIZE_GUARD)
    if max_factors is None:
        max_factors = max(2, group.order.bit_length())
    subs = [s for s in all_subgroups(group) if s.order > 1]
    e = group.identity

    def compatible(a: Subgroup, b: Subgroup) -> bool:
        if set(a.members) & set(b.members) != {e}:
            return False
        ma = np.asarray(a.members, dtype=np.intp)
        mb = np.asarray(b.members, dtype=np.intp)
        return bool(np.array_equal(group.table[np.ix_(ma, mb)], group.table[np.ix_(mb, ma)].T))

    results: list[DirectProductDecomposition] = []

    def extend(start: int, chosen: list[Subgroup], prod: int) -> None:
        if len(chosen) >= 2 and prod == group.order:
            try:
                results.append(decomposition_from_subgroups(group, [s.members for s in chosen]))
            except DecompositionError:
                pass
            return
        if len(chosen) == max_factors:
            return
        for t in range(start, len(subs)):
            cand = subs[t]
            o = prod * cand.order
            if group.order % o:
                continue
            if all(compatible(c, cand) for c in chosen):
                extend(t + 1, chosen + [cand], o)

    extend(0, [], 1)
    results.sort(key=lambda d: tuple(sorted((f.order, f.members) for f in d.factors)))
    return results


def subgroup_group(sub: Subgroup) -> FiniteGroup:
    """The subgroup as a standalone group, elements in member order."""
    mem = np.asarray(sub.members, dtype=np.intp)
    lookup = np.full(sub.parent.order, -1, dtype=np.intp)
    lookup[mem] = np.arange(mem.size)
    table = lookup[sub.parent.table[np.ix_(mem, mem)]]
    labels = tuple(sub.parent.labels[m] for m in sub.members)
    return validate_group(table, labels)


def _cycle_notation(perm: Sequence[int]) -> str:
    seen = [False] * len(perm)
    parts = []
    for start in range(len(perm)):
        if seen[start] or perm[start] == start:
            seen[start] = True
            continue
        cyc = [start]
        seen[start] = True
        nxt = perm[start]
        while nxt != start:
            cyc.append(nxt)
            seen[nxt] = True
            nxt = perm[nxt]
        parts.append("(" + " ".join(str(v) for v in cyc) + ")")
    return "".join(parts) if parts else "e"


def cube_rotation_group() -> FiniteGroup:
    """The 24 orientation-preserving symmetries of the cube.

    Vertices are indexed by coordinate triples in ``{-1, +1}^3`` in
    lexicographic order; the group is the closure of two quarter-turn vertex
    permutations (about the z and x axes) under composition.
    """
    coords = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    index = {c: i for i, c in enumerate(coords)}

    def vertex_perm(rotate) -> tuple[int, ...]:
        return tuple(index[rotate(c)] for c in coords)

    quarter_z = vertex_perm(lambda c: (-c[1], c[0], c[2]))
    quarter_x = vertex_perm(lambda c: (c[0], -c[2], c[1]))
    identity = tuple(range(8))
    elems = {identity}
    frontier = [identity]
    while frontier:
        p = frontier.pop()
        for gen in (quarter_z, quarter_x):
            comp = tuple(p[gen[v]] for v in range(8))  # p after gen
            if comp not in elems:
                elems.add(comp)
                frontier.append(comp)
    perms = sorted(elems)
    pos = {p: i for i, p in enumerate(perms)}
    table = [
        [pos[tuple(p[q[v]] for v in range(8))] for q in perms]  # row p, column q: p after q
        for p in perms
    ]
    labels = [_cycle_notation(p) for p in perms]
    return validate_group(table, labels)
