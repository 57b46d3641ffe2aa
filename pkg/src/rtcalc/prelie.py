"""Grafting products on decorated trees and the edge-by-edge decoration map.

``graft_free`` sums, over the vertices of the right tree, the attachment
of the left tree through a new edge with the given decoration.  The
deformed variant ``graft_phi`` runs a decoration map over the fresh
(edge, target vertex) pair at each attachment; the free product is the
special case of the identity map.  The family of deformed products
satisfies the mutual pre-Lie relation exactly when the map is
tree-compatible, which is what ``multiple_prelie_defect`` measures.

``theta`` applies the decoration map once across every (edge, lower
endpoint) pair of a tree.  For tree-compatible maps the edge order is
irrelevant and the operator intertwines the free product with the
deformed one; ``theta_morphism_defect`` measures the general version of
that statement for a pair of maps.

The root-split coproduct at the bottom of the module cuts one root edge
at a time off a planted tree; regrafting the pieces back at the root
scales every tree by its number of root edges, and the kernel picks out
exactly the planted single vertices.
"""

from __future__ import annotations

from typing import Callable, Optional, Tuple

from .decorations import Label
from .lincomb import LinComb, lc_sum
from .phimaps import IncompatiblePhi, PhiMap, ensure_usable, identity_map
from .trees import (
    DecoratedTree,
    PlantedTree,
    graft_at,
    label_at,
    leaf,
    node,
    rebuild_tree,
    split_root_edge,
    tree_sites,
    vertex_ids,
)

TreeComb = LinComb  # combinations of DecoratedTree
PlantedComb = LinComb  # combinations of PlantedTree


def tree_elem(t: DecoratedTree) -> TreeComb:
    return LinComb.of(t)


def single_vertex(label: Label) -> TreeComb:
    return LinComb.of(leaf(label))


def graft_phi(phi: PhiMap, x: TreeComb, a: Label, y: TreeComb) -> TreeComb:
    """The deformed grafting product of two tree combinations.

    Every term of ``x`` is attached below every vertex v of every term of
    ``y``; the map acts on the pair (new edge decoration, decoration of
    v).  Well defined for any linear map, compatible or not.
    """

    def per_pair(tx: DecoratedTree, ty: DecoratedTree) -> TreeComb:
        out = LinComb()
        for v in vertex_ids(ty):
            for (a2, b2), c in phi(a, label_at(ty, v)).items():
                out = out + LinComb.of(graft_at(tx, v, ty, a2, relabel=b2), c)
        return out

    return lc_sum(
        cx * cy * per_pair(tx, ty) for tx, cx in x.items() for ty, cy in y.items()
    )


def graft_free(x: TreeComb, a: Label, y: TreeComb) -> TreeComb:
    """Undeformed grafting: attach below every vertex, edge decorated ``a``."""

    def per_pair(tx: DecoratedTree, ty: DecoratedTree) -> TreeComb:
        return lc_sum(LinComb.of(graft_at(tx, v, ty, a)) for v in vertex_ids(ty))

    return lc_sum(
        cx * cy * per_pair(tx, ty) for tx, cx in x.items() for ty, cy in y.items()
    )


def _labels_of_tree(t: DecoratedTree) -> Tuple[Tuple[Label, ...], Tuple[Label, ...]]:
    sites = tree_sites(t)
    edges = tuple(e for e in sites.elabel if e is not None)
    return edges, sites.vlabel


def apply_edge_maps(
    phi: PhiMap, t: DecoratedTree, order: Optional[Tuple[int, ...]] = None
) -> TreeComb:
    """Run the map over every (edge, lower endpoint) pair of one tree.

    The shape is frozen while the decoration arrays move; the result is
    re-canonicalized at the end.  ``order`` lists the edges (as their
    upper-endpoint site indices) in application sequence; the canonical
    choice is increasing site index.
    """
    sites = tree_sites(t)
    edges = order if order is not None else tuple(range(1, sites.size))
    states = LinComb.of(sites.initial_state())
    for v in edges:
        parent = sites.parent[v]

        def step(state, v=v, parent=parent):
            elabels, vlabels = state
            out = LinComb()
            for (a2, b2), c in phi(elabels[v], vlabels[parent]).items():
                ne = elabels[:v] + (a2,) + elabels[v + 1 :]
                nv = vlabels[:parent] + (b2,) + vlabels[parent + 1 :]
                out = out + LinComb.of((ne, nv), c)
            return out

        states = states.map_terms(step)
    return states.map_terms(lambda state: LinComb.of(rebuild_tree(sites, state)))


def theta(phi: PhiMap, x: TreeComb, *, check_order: bool = False) -> TreeComb:
    """The edge-product operator attached to a tree-compatible map.

    Refuses maps that are refuted on the labels in sight (full basis when
    finite).  With ``check_order`` the evaluation is repeated with the
    edges reversed and the two results are asserted equal, which checks
    order-independence on the actual input.
    """
    edge_labels, vertex_labels = set(), set()
    for t, _ in x.items():
        es, vs = _labels_of_tree(t)
        edge_labels.update(es)
        vertex_labels.update(vs)
    ensure_usable(phi, sorted(edge_labels, key=lambda l: l.sort_key()), sorted(vertex_labels, key=lambda l: l.sort_key()))

    out = x.map_terms(lambda t: apply_edge_maps(phi, t))
    if check_order:
        rev = x.map_terms(
            lambda t: apply_edge_maps(phi, t, order=tuple(range(t.vertex_count - 1, 0, -1)))
        )
        if rev != out:
            raise IncompatiblePhi("edge order changed the result")
    return out


def multiple_prelie_defect(
    product: Callable[[TreeComb, Label, TreeComb], TreeComb],
    a: Label,
    a2: Label,
    x: TreeComb,
    y: TreeComb,
    z: TreeComb,
) -> TreeComb:
    """Residual of the mutual pre-Lie relation for one product family.

    Zero for all inputs and all index pairs (a, a2) exactly when the
    family is pre-Lie in the multiple sense.
    """
    left = product(x, a, product(y, a2, z)) - product(product(x, a, y), a2, z)
    right = product(y, a2, product(x, a, z)) - product(product(y, a2, x), a, z)
    return left - right


def theta_morphism_defect(
    phi: PhiMap, psi: PhiMap, x: TreeComb, a: Label, y: TreeComb
) -> TreeComb:
    """Residual of the intertwining property of the edge-product operator.

    Applies the operator of ``phi`` to a psi-deformed product and
    compares with the (phi o psi)-deformed product of the images.  Zero
    (for all inputs) under the mixed commutation hypothesis on the pair;
    with ``psi`` the identity this says the operator maps the free
    product onto the phi-deformed one.
    """
    from .phimaps import compose

    lhs = theta(phi, graft_phi(psi, x, a, y))
    rhs = graft_phi(compose(phi, psi), theta(phi, x), a, theta(phi, y))
    return lhs - rhs


def identity_on(phi: PhiMap) -> PhiMap:
    return identity_map(phi.edge_basis, phi.vertex_basis)


# ---------------------------------------------------------------------------
# Root-split coproduct on planted trees


def planted_elem(p: PlantedTree) -> PlantedComb:
    return LinComb.of(p)


def planted_graft(phi: PhiMap, u: PlantedTree, w: PlantedTree) -> PlantedComb:
    """Graft the body of u onto the body of w through phi, keeping w's plant."""
    grafted = graft_phi(phi, LinComb.of(u.body), u.plant, LinComb.of(w.body))
    return grafted.map_terms(lambda t: LinComb.of(PlantedTree(w.plant, t)))


def root_split(p: PlantedTree) -> LinComb:
    """Cut each root edge in turn: pairs (branch planted on the cut edge,
    remainder on the original plant edge)."""
    out = LinComb()
    for i in range(len(p.body.children)):
        branch, rest = split_root_edge(p, (i,))
        out = out + LinComb.of((branch, rest))
    return out


def nap_coproduct(x: PlantedComb) -> LinComb:
    """Linear extension of the root split to combinations."""
    return x.map_terms(root_split)


def root_regraft(pairs: LinComb) -> PlantedComb:
    """Reattach the first component at the body root of the second."""

    def one(pair: Tuple[PlantedTree, PlantedTree]) -> PlantedComb:
        branch, rest = pair
        regrown = node(rest.body.label, rest.body.children + ((branch.plant, branch.body),))
        return LinComb.of(PlantedTree(rest.plant, regrown))

    return pairs.map_terms(one)


def nap_eigen_defect(x: PlantedComb) -> PlantedComb:
    """Regraft-after-split minus (number of root edges) times the input.

    Zero on every planted tree; stated per basis tree since the scaling
    weight depends on the tree.
    """
    out = LinComb()
    for p, c in x.items():
        alpha = len(p.body.children)
        out = out + c * (root_regraft(root_split(p)) - LinComb.of(p, alpha))
    return out
