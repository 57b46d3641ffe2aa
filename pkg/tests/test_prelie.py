import random
from fractions import Fraction
from itertools import product

import pytest

from rtcalc.decorations import Sym, symbols
from rtcalc.lincomb import LinComb
from rtcalc.phimaps import (
    IncompatiblePhi,
    from_table,
    identity_map,
    tensor_map,
)
from rtcalc.prelie import (
    apply_edge_maps,
    graft_free,
    graft_phi,
    multiple_prelie_defect,
    nap_coproduct,
    nap_eigen_defect,
    root_regraft,
    root_split,
    single_vertex,
    theta,
    theta_morphism_defect,
    tree_elem,
)
from rtcalc.trees import DecoratedTree, PlantedTree, leaf, node

E = symbols("E", ["a1", "a2"])
V = symbols("V", ["b1", "b2"])
a1, a2 = E.labels()
b1, b2 = V.labels()


def ladder(*pairs):
    """ladder((v0, e1), (v1, e2), ..., (vn,)): v0 at the root."""
    t = leaf(pairs[-1][0])
    for v, e in reversed(pairs[:-1]):
        t = node(v, [(e, t)])
    return t


def all_trees(max_vertices, elabels, vlabels):
    """Every decorated tree with at most the given number of vertices."""
    by_size = {1: [leaf(v) for v in vlabels]}
    for n in range(2, max_vertices + 1):
        acc = []
        # Partition n-1 vertices into child subtrees; build by attaching a
        # first child of size k to a smaller tree's root.  To avoid
        # duplicates, collect via a set of canonical trees instead.
        seen = set()
        for k in range(1, n):
            for sub in by_size[k]:
                for rest in by_size[n - k]:
                    for e in elabels:
                        t = node(rest.label, rest.children + ((e, sub),))
                        seen.add(t)
        acc = sorted(seen, key=lambda t: t.sort_key)
        by_size[n] = acc
    out = []
    for n in range(1, max_vertices + 1):
        out.extend(by_size[n])
    return out


def test_graft_free_on_single_vertices():
    x = single_vertex(b1)
    y = single_vertex(b2)
    out = graft_free(x, a1, y)
    assert out == LinComb.of(node(b2, [(a1, leaf(b1))]))


def test_graft_free_sums_over_all_vertices():
    x = single_vertex(b1)
    y = tree_elem(ladder((b1, a2), (b2,)))
    out = graft_free(x, a1, y)
    assert len(out) == 2
    assert sum(c for _, c in out.items()) == 2


def test_graft_phi_identity_is_free():
    phi = identity_map(E, V)
    x = tree_elem(ladder((b1, a1), (b2,)))
    y = tree_elem(node(b2, [(a2, leaf(b1))]))
    assert graft_phi(phi, x, a1, y) == graft_free(x, a1, y)


def test_graft_phi_relabels_target():
    phi = from_table(E, V, {(a1, b2): [(Fraction(1, 2), a2, b1)]})
    out = graft_phi(phi, single_vertex(b1), a1, single_vertex(b2))
    assert out == LinComb.of(node(b1, [(a2, leaf(b1))]), Fraction(1, 2))
    # Target pairs the table misses vanish.
    assert graft_phi(phi, single_vertex(b1), a1, single_vertex(b1)).is_zero


def test_graft_is_bilinear():
    phi = identity_map(E, V)
    x = single_vertex(b1) + 2 * single_vertex(b2)
    y = single_vertex(b1)
    out = graft_phi(phi, x, a1, y)
    assert out == graft_phi(phi, single_vertex(b1), a1, y) + 2 * graft_phi(
        phi, single_vertex(b2), a1, y
    )


def test_multiple_prelie_defect_free_product():
    rng = random.Random(2)
    trees = all_trees(2, [a1, a2], [b1, b2])
    for _ in range(20):
        x, y, z = (tree_elem(rng.choice(trees)) for _ in range(3))
        ia, ia2 = rng.choice([a1, a2]), rng.choice([a1, a2])
        d = multiple_prelie_defect(graft_free, ia, ia2, x, y, z)
        assert d.is_zero


def test_multiple_prelie_defect_detects_incompatible():
    bad = from_table(
        E,
        V,
        {
            (a1, b1): [(1, a2, b2)],
            (a1, b2): [(1, a1, b1)],
            (a2, b1): [(1, a2, b1)],
            (a2, b2): [(1, a1, b2)],
        },
    )

    def prod(x, a, y):
        return graft_phi(bad, x, a, y)

    found = False
    for ia, ia2, lx, ly, lz in product([a1, a2], [a1, a2], [b1, b2], [b1, b2], [b1, b2]):
        d = multiple_prelie_defect(
            prod, ia, ia2, single_vertex(lx), single_vertex(ly), single_vertex(lz)
        )
        if not d.is_zero:
            found = True
            break
    assert found


def test_apply_edge_maps_leaves_leaf_labels_alone():
    phi = from_table(
        E, V, {(a1, b1): [(1, a2, b2)], (a1, b2): [(1, a1, b1)], (a2, b1): [(2, a2, b1)]}
    )
    t = ladder((b1, a1), (b2,))  # root b1, upper vertex b2
    out = apply_edge_maps(phi, t)
    assert out == LinComb.of(ladder((b2, a2), (b2,)))


def test_theta_on_single_vertex_is_identity():
    phi = from_table(E, V, {(a1, b1): [(1, a2, b2)]})
    # Compatible on nothing to check for a single vertex: no edges at all.
    assert theta(phi, single_vertex(b1)) == single_vertex(b1)


def test_theta_refuses_refuted_map():
    bad = from_table(E, V, {(a1, b1): [(1, a2, b2)], (a1, b2): [(1, a1, b1)]})
    t = tree_elem(ladder((b1, a1), (b2,)))
    with pytest.raises(IncompatiblePhi):
        theta(bad, t)


def test_theta_order_independent_for_compatible():
    rng = random.Random(4)

    def rand_endo(labels):
        img = {l: LinComb([(m, rng.randint(-2, 2)) for m in labels]) for l in labels}
        return lambda l: img[l]

    phi = tensor_map(E, V, rand_endo(list(E.labels())), rand_endo(list(V.labels())))
    for t in all_trees(4, [a1, a2], [b1, b2])[:80]:
        theta(phi, tree_elem(t), check_order=True)


def test_theta_morphism_identity_psi():
    rng = random.Random(9)

    def rand_endo(labels):
        img = {l: LinComb([(m, rng.randint(-2, 2)) for m in labels]) for l in labels}
        return lambda l: img[l]

    phi = tensor_map(E, V, rand_endo(list(E.labels())), rand_endo(list(V.labels())))
    psi = identity_map(E, V)
    trees = all_trees(2, [a1, a2], [b1, b2])
    for tx, ty, a in product(trees[:6], trees[:6], [a1, a2]):
        d = theta_morphism_defect(phi, psi, tree_elem(tx), a, tree_elem(ty))
        assert d.is_zero


# --- root split -------------------------------------------------------------


def test_root_split_cherry():
    cherry = PlantedTree(a1, node(b1, [(a1, leaf(b2)), (a2, leaf(b1))]))
    out = root_split(cherry)
    assert len(out) == 2
    terms = dict(out.items())
    first = (
        PlantedTree(a1, leaf(b2)),
        PlantedTree(a1, node(b1, [(a2, leaf(b1))])),
    )
    second = (
        PlantedTree(a2, leaf(b1)),
        PlantedTree(a1, node(b1, [(a1, leaf(b2))])),
    )
    assert set(terms) == {first, second}
    assert all(c == 1 for c in terms.values())


def test_root_split_single_vertex_is_zero():
    assert root_split(PlantedTree(a1, leaf(b1))).is_zero


def test_regraft_after_split_scales_by_root_degree():
    deep = PlantedTree(
        a2,
        node(
            b1,
            [
                (a1, leaf(b2)),
                (a2, node(b2, [(a1, leaf(b1))])),
                (a1, leaf(b1)),
            ],
        ),
    )
    assert nap_eigen_defect(LinComb.of(deep)).is_zero
    assert root_regraft(root_split(deep)) == LinComb.of(deep, 3)


def test_nap_coproduct_linear():
    p = PlantedTree(a1, node(b1, [(a1, leaf(b2))]))
    q = PlantedTree(a2, node(b2, [(a2, leaf(b1))]))
    x = LinComb.of(p, 2) + LinComb.of(q, -1)
    assert nap_coproduct(x) == 2 * root_split(p) - root_split(q)
