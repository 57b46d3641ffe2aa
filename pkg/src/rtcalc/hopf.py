"""Forest algebra: deformed products, coproducts, and the duality pairing.

The symmetric algebra on planted trees carries two coproducts.  The
deshuffle coproduct splits the multiset of trees with multinomial
multiplicities and makes planted trees primitive.  The cut coproduct sums
over upper parts of the vertex set: the upper part keeps the vertices
whose children all stay with them, every severed edge runs the decoration
map against its lower endpoint before the two restrictions are taken, and
the cut edges replant the upper components.

The deformed forest product grafts each tree of the left factor onto a
chosen vertex of the right factor or leaves it alone, running the
decoration map over each (grafted edge, target vertex) pair.  For a
tree-compatible map this is associative and dual to the cut coproduct
under the isomorphism pairing below.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from math import comb
from typing import Callable, Dict, List, Optional, Tuple

from .decorations import Label, render_label
from .lincomb import LinComb, lc_sum
from .phimaps import PhiMap, ensure_usable
from .trees import (
    EMPTY_FOREST,
    DecoratedTree,
    Forest,
    PlantedTree,
    Sites,
    forest,
    forest_mul,
    forest_sites,
    rebuild_forest,
    restrict_state,
    upper_subsets,
)

ForestComb = LinComb  # combinations of Forest
PairComb = LinComb  # combinations of (Forest, Forest)

UNIT = LinComb.of(EMPTY_FOREST)


def forest_elem(f: Forest) -> ForestComb:
    return LinComb.of(f)


def _forest_labels(f: Forest) -> Tuple[Tuple[Label, ...], Tuple[Label, ...]]:
    s = forest_sites(f)
    return tuple(e for e in s.elabel if e is not None), s.vlabel


def _guard(phi: PhiMap, *forests: Forest) -> None:
    edge_labels, vertex_labels = set(), set()
    for f in forests:
        es, vs = _forest_labels(f)
        edge_labels.update(es)
        vertex_labels.update(vs)
    ensure_usable(
        phi,
        sorted(edge_labels, key=lambda l: l.sort_key()),
        sorted(vertex_labels, key=lambda l: l.sort_key()),
    )


State = Tuple[Tuple[Optional[Label], ...], Tuple[Label, ...]]


def _apply_pair_map(states: LinComb, phi: PhiMap, e_ix: int, v_ix: int) -> LinComb:
    """Run the map on (edge into e_ix, vertex label at v_ix) across states."""

    def step(state: State) -> LinComb:
        elabels, vlabels = state
        out = LinComb()
        for (a2, b2), c in phi(elabels[e_ix], vlabels[v_ix]).items():
            ne = elabels[:e_ix] + (a2,) + elabels[e_ix + 1 :]
            nv = vlabels[:v_ix] + (b2,) + vlabels[v_ix + 1 :]
            out = out + LinComb.of((ne, nv), c)
        return out

    return states.map_terms(step)


# ---------------------------------------------------------------------------
# Deformed forest product


def _star_basis(phi: PhiMap, F: Forest, G: Forest) -> ForestComb:
    sg = forest_sites(G)
    sf = forest_sites(F)
    off = sg.size
    parent_base = list(sg.parent) + [p + off if p >= 0 else -1 for p in sf.parent]
    elabel = sg.elabel + sf.elabel
    vlabel = sg.vlabel + sf.vlabel
    f_roots = [r + off for r in sf.roots]

    out = LinComb()
    scaffold_cache: Dict[Tuple[int, ...], Sites] = {}
    for gmap in iproduct(range(-1, sg.size), repeat=len(f_roots)):
        parent = list(parent_base)
        states = LinComb.of((elabel, vlabel))
        for i, target in enumerate(gmap):
            if target >= 0:
                parent[f_roots[i]] = target
                states = _apply_pair_map(states, phi, f_roots[i], target)
                if states.is_zero:
                    break
        if states.is_zero:
            continue
        key = tuple(parent)
        scaffold = scaffold_cache.get(key)
        if scaffold is None:
            scaffold = Sites(key, elabel, vlabel)
            scaffold_cache[key] = scaffold
        out = out + states.map_terms(
            lambda st, sc=scaffold: LinComb.of(rebuild_forest(sc, st))
        )
    return out


def star_product(phi: PhiMap, x: ForestComb, y: ForestComb) -> ForestComb:
    """The deformed product of two forest combinations.

    Each tree of the left factor either stays planted or grafts onto a
    vertex of the right factor, the map acting on each grafted pair.  The
    empty forest is the unit.  Refuses maps refuted on the labels in
    sight, since the result would depend on internal application order.
    """
    for f, _ in x.items():
        for g, _ in y.items():
            _guard(phi, f, g)
    return lc_sum(
        cx * cy * _star_basis(phi, fx, fy) for fx, cx in x.items() for fy, cy in y.items()
    )


def go_triangle(phi: PhiMap, x: ForestComb, p: LinComb) -> LinComb:
    """Graft every tree of each forest term somewhere onto one planted tree.

    Unlike the product, nothing may stay behind: the assignments run over
    vertices of the target only, so the result is again a combination of
    planted trees.  With a one-tree forest on the left this coincides
    with the deformed grafting of planted elements.
    """
    out = LinComb()
    for pt, cp in p.items():
        target = forest([pt])
        for F, c in x.items():
            _guard(phi, F, target)
            sg = forest_sites(target)
            sf = forest_sites(F)
            off = sg.size
            parent_base = list(sg.parent) + [q + off if q >= 0 else -1 for q in sf.parent]
            elabel = sg.elabel + sf.elabel
            vlabel = sg.vlabel + sf.vlabel
            f_roots = [r + off for r in sf.roots]
            for gmap in iproduct(range(sg.size), repeat=len(f_roots)):
                parent = list(parent_base)
                states = LinComb.of((elabel, vlabel))
                for i, tgt in enumerate(gmap):
                    parent[f_roots[i]] = tgt
                    states = _apply_pair_map(states, phi, f_roots[i], tgt)
                    if states.is_zero:
                        break
                if states.is_zero:
                    continue
                scaffold = Sites(tuple(parent), elabel, vlabel)
                out = out + (c * cp) * states.map_terms(
                    lambda st, sc=scaffold: LinComb.of(_only_tree(rebuild_forest(sc, st)))
                )
    return out


def _only_tree(f: Forest) -> PlantedTree:
    (t,) = f.trees
    return t


# ---------------------------------------------------------------------------
# Coproducts


def deshuffle(x: ForestComb) -> PairComb:
    """Split the multiset of trees in all ways, with multinomial weights.

    Repeated trees contribute binomial factors; planted trees are
    primitive and the empty forest is grouplike.
    """

    def split(f: Forest) -> PairComb:
        groups: List[Tuple[PlantedTree, int]] = []
        for t in f.trees:
            if groups and groups[-1][0] == t:
                groups[-1] = (t, groups[-1][1] + 1)
            else:
                groups.append((t, 1))
        out = LinComb()
        for picks in iproduct(*[range(m + 1) for _, m in groups]):
            weight = 1
            left: List[PlantedTree] = []
            right: List[PlantedTree] = []
            for (t, m), k in zip(groups, picks):
                weight *= comb(m, k)
                left.extend([t] * k)
                right.extend([t] * (m - k))
            out = out + LinComb.of((forest(left), forest(right)), weight)
        return out

    return x.map_terms(split)


def cut_coproduct(phi: PhiMap, x: ForestComb) -> PairComb:
    """Sum over upper parts, the map running over every severed edge.

    A severed edge has its lower endpoint outside the part and its upper
    endpoint inside; plant edges (no decorated lower endpoint) move to
    whichever side holds their tree's root, untouched.  The upper part
    lands in the left factor, replanted on the severed edges.
    """
    out = LinComb()
    for f, c in x.items():
        _guard(phi, f)
        sites = forest_sites(f)
        for part in upper_subsets(sites):
            complement = frozenset(range(sites.size)) - part
            states = LinComb.of(sites.initial_state())
            for v in sorted(part):
                pr = sites.parent[v]
                if pr >= 0 and pr not in part:
                    states = _apply_pair_map(states, phi, v, pr)
                    if states.is_zero:
                        break
            if states.is_zero:
                continue

            def finish(state: State) -> PairComb:
                left = restrict_state(sites, state, part)
                right = restrict_state(sites, state, complement)
                return LinComb.of((left, right))

            out = out + c * states.map_terms(finish)
    return out


def bck_coproduct(phi: PhiMap, x: ForestComb) -> PairComb:
    """Alias fitting the classical naming for the cut coproduct."""
    return cut_coproduct(phi, x)


def theta_bar(phi: PhiMap, x: ForestComb) -> ForestComb:
    """Edge-product operator on forests.

    Acts on each (edge, lower endpoint) pair inside tree bodies; plant
    edges have no decorated lower endpoint and keep their labels.  An
    algebra morphism by construction.
    """
    out = LinComb()
    for f, c in x.items():
        _guard(phi, f)
        sites = forest_sites(f)
        states = LinComb.of(sites.initial_state())
        for v in range(sites.size):
            if sites.parent[v] >= 0:
                states = _apply_pair_map(states, phi, v, sites.parent[v])
        out = out + c * states.map_terms(
            lambda st: LinComb.of(rebuild_forest(sites, st))
        )
    return out


# ---------------------------------------------------------------------------
# Pairing


@dataclass(frozen=True)
class Pairing:
    """A bilinear pairing of decoration pairs, extended to forests.

    ``base`` takes (edge', vertex', edge, vertex) and returns a scalar.
    Forests pair by summing over isomorphisms of the underlying planted
    forests and multiplying the base pairing over corresponding
    (incoming edge, vertex) pairs; no symmetry normalization is applied.
    """

    base: Callable[[Label, Label, Label, Label], Fraction]
    name: str = "pairing"
    _memo: Dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def on_pairs(self, aprime: Label, bprime: Label, a: Label, b: Label) -> Fraction:
        return self.base(aprime, bprime, a, b)

    def _tree(self, p1: PlantedTree, p2: PlantedTree) -> Fraction:
        key = (p1, p2)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        val = self._planted(p1.plant, p1.body, p2.plant, p2.body)
        self._memo[key] = val
        return val

    def _planted(self, e1: Label, t1: DecoratedTree, e2: Label, t2: DecoratedTree) -> Fraction:
        if t1.shape != t2.shape:
            return Fraction(0)
        head = self.base(e1, t1.label, e2, t2.label)
        if not head:
            return Fraction(0)
        k = len(t1.children)
        if k == 0:
            return head
        # Sum over bijections of children, a permanent of the child matrix.
        grid = [
            [self._planted(f1, c1, f2, c2) for (f2, c2) in t2.children]
            for (f1, c1) in t1.children
        ]
        return head * _permanent(grid)

    def forests(self, f1: Forest, f2: Forest) -> Fraction:
        if len(f1.trees) != len(f2.trees) or f1.vertex_count != f2.vertex_count:
            return Fraction(0)
        if not f1.trees:
            return Fraction(1)
        grid = [[self._tree(t1, t2) for t2 in f2.trees] for t1 in f1.trees]
        return _permanent(grid)


def _permanent(grid: List[List[Fraction]]) -> Fraction:
    n = len(grid)
    if n == 0:
        return Fraction(1)
    cols = list(range(n))
    total = Fraction(0)

    def rec(row: int, used: int, acc: Fraction):
        nonlocal total
        if row == n:
            total += acc
            return
        for c in cols:
            if used >> c & 1:
                continue
            v = grid[row][c]
            if v:
                rec(row + 1, used | 1 << c, acc * v)

    rec(0, 0, Fraction(1))
    return total


def delta_pairing() -> Pairing:
    """Basis-delta pairing: matching labels pair to 1."""

    def base(aprime, bprime, a, b):
        return Fraction(1) if (aprime == a and bprime == b) else Fraction(0)

    return Pairing(base, name="delta")


def pair_forests(pairing: Pairing, x: ForestComb, y: ForestComb) -> Fraction:
    """Bilinear extension of the forest pairing to combinations."""
    total = Fraction(0)
    for f1, c1 in x.items():
        for f2, c2 in y.items():
            if c1 and c2:
                total += c1 * c2 * pairing.forests(f1, f2)
    return total


def pair_tensor(pairing: Pairing, x: PairComb, y: PairComb) -> Fraction:
    """Pair two combinations of forest pairs factorwise."""
    total = Fraction(0)
    for (f1, g1), c1 in x.items():
        for (f2, g2), c2 in y.items():
            v1 = pairing.forests(f1, f2)
            if v1:
                total += c1 * c2 * v1 * pairing.forests(g1, g2)
    return total


class AdjointnessViolated(Exception):
    """The two maps fail to be adjoint for the base pairing."""


def counit(x: ForestComb) -> Fraction:
    return x.coeff(EMPTY_FOREST)


@dataclass(frozen=True)
class PairingDefect:
    identity: str
    inputs: Tuple
    lhs: Fraction
    rhs: Fraction


def check_adjoint(
    phi: PhiMap, phi2: PhiMap, pairing: Pairing, bound: Optional[int] = None
) -> None:
    """Assert the adjointness that duality needs, label pair by label pair."""

    def span(basis):
        if basis.is_finite:
            return basis.labels()
        if bound is None:
            raise ValueError("an explicit bound is required on an infinite basis")
        return basis.labels_up_to(bound)

    edges = span(phi.edge_basis)
    verts = span(phi.vertex_basis)
    for a2 in span(phi2.edge_basis):
        for b2 in span(phi2.vertex_basis):
            img2 = phi2(a2, b2)
            for a in edges:
                for b in verts:
                    lhs = sum(
                        (c * pairing.on_pairs(na, nb, a, b) for (na, nb), c in img2.items()),
                        Fraction(0),
                    )
                    rhs = sum(
                        (c * pairing.on_pairs(a2, b2, na, nb) for (na, nb), c in phi(a, b).items()),
                        Fraction(0),
                    )
                    if lhs != rhs:
                        raise AdjointnessViolated(
                            f"on ({render_label(a2)},{render_label(b2)}) vs ({render_label(a)},{render_label(b)}): {lhs} != {rhs}"
                        )


def hopf_pairing_defects(
    phi: PhiMap,
    phi2: PhiMap,
    pairing: Pairing,
    primed: List[Forest],
    unprimed: List[Forest],
    bound: Optional[int] = None,
) -> List[PairingDefect]:
    """Check the four duality identities over sample forests.

    Adjointness of the two maps is asserted first and raised as
    :class:`AdjointnessViolated` when broken; the returned list collects
    violations of the counit and product-coproduct identities (empty when
    everything holds).
    """
    check_adjoint(phi, phi2, pairing, bound=bound)
    defects: List[PairingDefect] = []

    for f in unprimed:
        lhs = pair_forests(pairing, UNIT, forest_elem(f))
        rhs = counit(forest_elem(f))
        if lhs != rhs:
            defects.append(PairingDefect("unit-counit", (f,), lhs, rhs))
    for f in primed:
        lhs = pair_forests(pairing, forest_elem(f), UNIT)
        rhs = counit(forest_elem(f))
        if lhs != rhs:
            defects.append(PairingDefect("counit-unit", (f,), lhs, rhs))

    cut_cache = {f: cut_coproduct(phi, forest_elem(f)) for f in unprimed}
    sizes = {f.vertex_count for f in unprimed}
    for x1 in primed:
        for y1 in primed:
            if x1.vertex_count + y1.vertex_count not in sizes:
                continue
            prod = star_product(phi2, forest_elem(x1), forest_elem(y1))
            for f in unprimed:
                if x1.vertex_count + y1.vertex_count != f.vertex_count:
                    continue
                lhs = pair_forests(pairing, prod, forest_elem(f))
                rhs = pair_tensor(
                    pairing, LinComb.of((x1, y1)), cut_cache[f]
                )
                if lhs != rhs:
                    defects.append(PairingDefect("product-vs-cut", (x1, y1, f), lhs, rhs))

    for x1 in primed:
        dx = deshuffle(forest_elem(x1))
        for f in unprimed:
            for g in unprimed:
                if f.vertex_count + g.vertex_count != x1.vertex_count:
                    continue
                lhs = pair_tensor(pairing, dx, LinComb.of((f, g)))
                rhs = pair_forests(pairing, forest_elem(x1), forest_elem(forest_mul(f, g)))
                if lhs != rhs:
                    defects.append(PairingDefect("deshuffle-vs-product", (x1, f, g), lhs, rhs))

    return defects
