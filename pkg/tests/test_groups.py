"""Group-table validation, construction, and decomposition search."""

import itertools

import numpy as np
import pytest

from symcert import (
    DecompositionError,
    NoIdentityError,
    NotASubgroupError,
    NotAssociativeError,
    NotInvertibleError,
    SizeGuardExceededError,
    all_subgroups,
    closure,
    conjugacy_classes,
    cube_rotation_group,
    cyclic_group,
    decomposition_from_subgroups,
    direct_product,
    embedded_subgroups,
    find_direct_decompositions,
    is_abelian,
    subgroup,
    subgroup_group,
    validate_group,
)
from symcert.groups import GroupTableError


# ---------------------------------------------------------------------------
# oracles


def permutation_table(n):
    """Composition table of all permutations of {0..n-1} (apply right, then left)."""
    perms = sorted(itertools.permutations(range(n)))
    pos = {p: i for i, p in enumerate(perms)}
    return [
        [pos[tuple(p[q[v]] for v in range(n))] for q in perms] for p in perms
    ], perms


def subgroups_by_subset_closure(group):
    """Every subgroup, as closures of all generator subsets (exponential oracle)."""
    out = set()
    elements = list(range(group.order))
    for r in range(len(elements) + 1):
        for seed in itertools.combinations(elements, r):
            out.add(closure(group, seed))
    return sorted(out, key=lambda m: (len(m), m))


def brute_force_isomorphic(g, h):
    """Search all |G|! relabelings for a table isomorphism."""
    if g.order != h.order:
        return False
    for phi in itertools.permutations(range(g.order)):
        if all(
            phi[g.cayley[a][b]] == h.cayley[phi[a]][phi[b]]
            for a in range(g.order)
            for b in range(g.order)
        ):
            return True
    return False


def assert_axioms_exact(group):
    """Zero-tolerance table checks of all three group axioms."""
    n = group.order
    cay = group.cayley
    e = group.identity
    assert all(cay[e][x] == x and cay[x][e] == x for x in range(n))
    for row in cay:
        assert sorted(row) == list(range(n))
    for j in range(n):
        assert sorted(cay[i][j] for i in range(n)) == list(range(n))
    for x in range(n):
        for y in range(n):
            for z in range(n):
                assert cay[cay[x][y]][z] == cay[x][cay[y][z]]


# ---------------------------------------------------------------------------
# validate_group


def test_addition_mod_3_is_a_group():
    table = [[(i + j) % 3 for j in range(3)] for i in range(3)]
    group = validate_group(table)
    assert group.order == 3
    assert group.identity == 0
    assert_axioms_exact(group)


def test_broken_two_by_two_table_rejected():
    with pytest.raises((NoIdentityError, NotInvertibleError)):
        validate_group([[0, 1], [1, 1]])


def test_symmetric_group_table_from_permutation_oracle():
    table, perms = permutation_table(3)
    group = validate_group(table)
    assert group.order == 6
    assert perms[group.identity] == (0, 1, 2)
    assert_axioms_exact(group)


def test_nonassociative_latin_square_rejected():
    # a quasigroup with identity that fails associativity (order 5)
    table = [
        [0, 1, 2, 3, 4],
        [1, 0, 3, 4, 2],
        [2, 4, 0, 1, 3],
        [3, 2, 4, 0, 1],
        [4, 3, 1, 2, 0],
    ]
    with pytest.raises(NotAssociativeError) as err:
        validate_group(table)
    x, y, z = err.value.triple
    cay = table
    assert cay[cay[x][y]][z] != cay[x][cay[y][z]]


def test_entry_out_of_range_rejected():
    with pytest.raises(GroupTableError):
        validate_group([[0, 1], [1, 2]])


# ---------------------------------------------------------------------------
# cyclic groups


def test_trivial_cyclic_group():
    group = cyclic_group(1)
    assert group.order == 1
    assert group.identity == 0


def test_cyclic_four_table():
    group = cyclic_group(4)
    assert group.mul(2, 3) == 1
    assert group.identity == 0


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_cyclic_generator_has_full_order(n):
    group = cyclic_group(n)
    if n == 1:
        assert group.element_order(0) == 1
    else:
        assert group.element_order(1) == n


def test_cyclic_zero_rejected():
    with pytest.raises(ValueError):
        cyclic_group(0)


# ---------------------------------------------------------------------------
# direct products


def test_product_order_multiplies():
    assert direct_product(cyclic_group(2), cyclic_group(3)).order == 6


def test_c2_times_c3_isomorphic_to_c6():
    product = direct_product(cyclic_group(2), cyclic_group(3))
    assert brute_force_isomorphic(product, cyclic_group(6))


def test_componentwise_identity_pairs():
    g, h = cyclic_group(3), cyclic_group(4)
    product = direct_product(g, h)
    for a in range(g.order):
        for b in range(h.order):
            left = a * h.order + h.identity
            right = g.identity * h.order + b
            assert product.mul(left, right) == a * h.order + b


def test_embedded_subgroups_recover_factors():
    product = direct_product(cyclic_group(2), cyclic_group(3))
    left, right = embedded_subgroups(product, [2, 3])
    assert left.members == (0, 3)
    assert right.members == (0, 1, 2)


# ---------------------------------------------------------------------------
# subgroups


def test_trivial_group_has_one_subgroup():
    assert len(all_subgroups(cyclic_group(1))) == 1


def test_c4_subgroups_match_subset_closure_oracle():
    group = cyclic_group(4)
    expected = subgroups_by_subset_closure(group)
    got = [s.members for s in all_subgroups(group)]
    assert got == expected
    assert sorted(len(m) for m in got) == [1, 2, 4]


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_prime_cyclic_groups_have_two_subgroups(p):
    group = cyclic_group(p)
    assert len(all_subgroups(group)) == 2
    assert [s.members for s in all_subgroups(group)] == subgroups_by_subset_closure(group)


def test_subgroup_validation_rejects_non_closed_subset():
    with pytest.raises(NotASubgroupError):
        subgroup(cyclic_group(4), [0, 1])
    with pytest.raises(NotASubgroupError):
        subgroup(cyclic_group(4), [1, 3])


def test_size_guard_on_subgroup_enumeration():
    big = direct_product(cyclic_group(32), cyclic_group(16))
    with pytest.raises(SizeGuardExceededError):
        all_subgroups(big)


def test_subgroup_as_standalone_group():
    group = cyclic_group(6)
    sub = subgroup(group, [0, 2, 4])
    small = subgroup_group(sub)
    assert brute_force_isomorphic(small, cyclic_group(3))


# ---------------------------------------------------------------------------
# abelianness and conjugacy


def test_cyclic_groups_are_abelian():
    assert is_abelian(cyclic_group(7))


def test_symmetric_group_is_not_abelian():
    table, _ = permutation_table(3)
    group = validate_group(table)
    assert not is_abelian(group)
    pairs = [
        (a, b)
        for a in range(6)
        for b in range(6)
        if group.mul(a, b) != group.mul(b, a)
    ]
    assert pairs


def test_products_of_abelian_groups_are_abelian():
    assert is_abelian(direct_product(cyclic_group(4), cyclic_group(6)))


def test_conjugacy_classes_partition_and_sizes():
    table, _ = permutation_table(3)
    group = validate_group(table)
    classes = conjugacy_classes(group)
    assert sorted(len(c) for c in classes) == [1, 2, 3]
    assert sorted(v for c in classes for v in c) == list(range(6))


# ---------------------------------------------------------------------------
# direct-product decomposition search


def oracle_two_factor_decompositions(group):
    """Independent check: all unordered subgroup pairs that form an internal
    direct product, by definition-level checks."""
    subs = subgroups_by_subset_closure(group)
    found = []
    e = group.identity
    for i in range(len(subs)):
        for j in range(i + 1, len(subs)):
            a, b = subs[i], subs[j]
            if len(a) < 2 or len(b) < 2 or len(a) * len(b) != group.order:
                continue
            if set(a) & set(b) != {e}:
                continue
            if any(group.mul(x, y) != group.mul(y, x) for x in a for y in b):
                continue
            products = {group.mul(x, y) for x in a for y in b}
            if len(products) == group.order:
                found.append((a, b))
    return found


def test_c6_has_exactly_one_decomposition():
    group = cyclic_group(6)
    found = find_direct_decompositions(group)
    assert len(found) == 1
    assert found[0].factor_orders == (2, 3)
    assert len(oracle_two_factor_decompositions(group)) == 1


def test_c4_is_indecomposable():
    group = cyclic_group(4)
    assert find_direct_decompositions(group) == []
    assert oracle_two_factor_decompositions(group) == []


def test_cube_group_is_indecomposable():
    group = cube_rotation_group()
    assert find_direct_decompositions(group, max_factors=4) == []


@pytest.mark.parametrize("p,q", [(2, 3), (3, 4), (2, 5), (3, 5)])
def test_coprime_cyclic_orders_decompose(p, q):
    group = cyclic_group(p * q)
    found = find_direct_decompositions(group, max_factors=2)
    assert [d.factor_orders for d in found] == [(p, q)]


@pytest.mark.parametrize("n", [4, 8, 9, 25])
def test_prime_power_cyclic_groups_do_not_decompose(n):
    assert find_direct_decompositions(cyclic_group(n)) == []


def test_product_group_always_recovers_its_factor_orders():
    for a, b in [(2, 3), (2, 5), (4, 3), (3, 5)]:
        product = direct_product(cyclic_group(a), cyclic_group(b))
        found = find_direct_decompositions(product)
        assert any(sorted(d.factor_orders) == sorted((a, b)) for d in found)


def test_decomposition_factor_map_is_bijective_homomorphism():
    group = direct_product(cyclic_group(2), cyclic_group(3))
    dec = decomposition_from_subgroups(group, [[0, 3], [0, 1, 2]])
    fm = dec.tuple_to_parent
    assert sorted(fm.reshape(-1).tolist()) == list(range(6))
    for (a1, a2) in np.ndindex(*fm.shape):
        for (b1, b2) in np.ndindex(*fm.shape):
            lhs = group.mul(int(fm[a1, a2]), int(fm[b1, b2]))
            rhs = fm[group.cayley[dec.factors[0].members[a1]][dec.factors[0].members[b1]] // 3,
                     group.cayley[dec.factors[1].members[a2]][dec.factors[1].members[b2]]]
            assert lhs == int(rhs)
    # round trip through the inverse map
    for g in range(group.order):
        assert dec.compose(dec.parent_to_tuple[g]) == g


def test_decomposition_rejects_overlapping_or_noncommuting_factors():
    c4 = cyclic_group(4)
    with pytest.raises(DecompositionError):
        decomposition_from_subgroups(c4, [[0, 2], [0, 2]])
    cube = cube_rotation_group()
    subs = [s for s in all_subgroups(cube) if s.order == 4]
    with pytest.raises(DecompositionError):
        decomposition_from_subgroups(cube, [subs[0].members, subs[1].members])


# ---------------------------------------------------------------------------
# the cube rotation group


def independent_cube_closure():
    coords = [(x, y, z) for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    index = {c: i for i, c in enumerate(coords)}
    rot_z = tuple(index[(-c[1], c[0], c[2])] for c in coords)
    rot_x = tuple(index[(c[0], -c[2], c[1])] for c in coords)
    elems = {tuple(range(8))}
    frontier = [tuple(range(8))]
    while frontier:
        p = frontier.pop()
        for q in (rot_z, rot_x):
            comp = tuple(q[p[v]] for v in range(8))
            if comp not in elems:
                elems.add(comp)
                frontier.append(comp)
    return elems


def test_cube_group_order_is_24():
    assert cube_rotation_group().order == 24
    assert len(independent_cube_closure()) == 24


def test_cube_group_not_abelian():
    assert not is_abelian(cube_rotation_group())


def test_cube_face_rotations_generate_everything():
    group = cube_rotation_group()
    order4 = [s for s in all_subgroups(group) if s.order == 4 and any(
        group.element_order(m) == 4 for m in s.members)]
    assert len(order4) == 3
    for a, b in itertools.combinations(order4, 2):
        assert len(closure(group, a.members + b.members)) == 24


# ---------------------------------------------------------------------------
# fault injection: a single corrupted entry is always caught with a witness


@pytest.mark.parametrize("seed", range(10))
def test_single_entry_faults_are_detected(seed):
    rng = np.random.default_rng(seed)
    base = cyclic_group(6)
    table = np.array(base.cayley)
    i, j = rng.integers(0, 6, size=2)
    bad = (table[i, j] + rng.integers(1, 6)) % 6
    table[i, j] = bad
    with pytest.raises(GroupTableError) as err:
        validate_group(table)
    exc = err.value
    assert isinstance(exc, (NoIdentityError, NotInvertibleError, NotAssociativeError))
    if isinstance(exc, NotInvertibleError):
        assert exc.axis in ("row", "column")
