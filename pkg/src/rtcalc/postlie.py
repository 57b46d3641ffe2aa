"""Semidirect post-Lie extension of the planted-tree pre-Lie algebra.

A finite post-Lie algebra P, given by structure constants, acts on the
decorations through a pair of actions: one on edge labels, one on vertex
labels.  The direct sum of the planted-tree space with P then carries a
bracket and a triangle product:

  planted ⊳ planted   deformed grafting through the decoration map,
  generator ⊳ planted one vertex relabeled by the vertex action, summed,
  planted ⊳ generator zero,
  {planted, planted}  zero,
  {planted, generator} edge action on the plant label,

with the generator-generator products taken from P.  The whole space is
post-Lie exactly when the actions satisfy four finite conditions tying
them to P and to the decoration map; ``psi_compat_defects`` measures
those, and ``postlie_axiom_defects`` measures the three post-Lie axioms
directly on elements of the extension.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .decorations import Label
from .lincomb import LinComb, Scalar, as_scalar
from .phimaps import PhiMap
from .prelie import graft_phi
from .trees import PlantedTree, rebuild_tree, tree_sites

Gen = str
GenComb = LinComb  # over generator names
PlantedComb = LinComb  # over PlantedTree


def _as_gencomb(entries, names: Tuple[str, ...]) -> GenComb:
    if isinstance(entries, LinComb):
        out = entries
    else:
        out = LinComb([(g, as_scalar(c)) for c, g in entries])
    for g, _ in out.items():
        if g not in names:
            raise ValueError(f"unknown generator {g!r}")
    return out


@dataclass(frozen=True)
class PostLieBase:
    """A post-Lie algebra on named generators, by structure constants.

    ``bracket`` and ``triangle`` hold the products of basis pairs; any
    missing pair is zero.  Construction refuses constants that break
    antisymmetry of the bracket or any of the three defining axioms on
    basis triples, so downstream code can rely on P itself being sound.
    """

    names: Tuple[str, ...]
    bracket: Mapping[Tuple[Gen, Gen], GenComb]
    triangle: Mapping[Tuple[Gen, Gen], GenComb]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate generator names")
        for (p, q) in list(self.bracket) + list(self.triangle):
            if p not in self.names or q not in self.names:
                raise ValueError(f"constants mention unknown generators ({p}, {q})")
        for p in self.names:
            for q in self.names:
                if self.bracket_of(p, q) != -self.bracket_of(q, p):
                    raise ValueError(f"bracket not antisymmetric on ({p}, {q})")
        for x in self.names:
            for y in self.names:
                for z in self.names:
                    if not self._jacobi(x, y, z).is_zero:
                        raise ValueError(f"bracket fails Jacobi on ({x}, {y}, {z})")
                    if not self._derivation(x, y, z).is_zero:
                        raise ValueError(
                            f"triangle is not a bracket derivation on ({x}, {y}, {z})"
                        )
                    if not self._associator(x, y, z).is_zero:
                        raise ValueError(
                            f"bracket does not match the triangle associator on ({x}, {y}, {z})"
                        )

    def bracket_of(self, p: Gen, q: Gen) -> GenComb:
        return self.bracket.get((p, q), LinComb())

    def triangle_of(self, p: Gen, q: Gen) -> GenComb:
        return self.triangle.get((p, q), LinComb())

    def bracket_lin(self, x: GenComb, y: GenComb) -> GenComb:
        out = LinComb()
        for p, c in x.items():
            for q, c2 in y.items():
                out = out + (c * c2) * self.bracket_of(p, q)
        return out

    def triangle_lin(self, x: GenComb, y: GenComb) -> GenComb:
        out = LinComb()
        for p, c in x.items():
            for q, c2 in y.items():
                out = out + (c * c2) * self.triangle_of(p, q)
        return out

    def _jacobi(self, x: Gen, y: Gen, z: Gen) -> GenComb:
        gx, gy, gz = (LinComb.of(g) for g in (x, y, z))
        return (
            self.bracket_lin(self.bracket_lin(gx, gy), gz)
            + self.bracket_lin(self.bracket_lin(gy, gz), gx)
            + self.bracket_lin(self.bracket_lin(gz, gx), gy)
        )

    def _derivation(self, x: Gen, y: Gen, z: Gen) -> GenComb:
        gx, gy, gz = (LinComb.of(g) for g in (x, y, z))
        return (
            self.triangle_lin(gx, self.bracket_lin(gy, gz))
            - self.bracket_lin(self.triangle_lin(gx, gy), gz)
            - self.bracket_lin(gy, self.triangle_lin(gx, gz))
        )

    def _associator(self, x: Gen, y: Gen, z: Gen) -> GenComb:
        gx, gy, gz = (LinComb.of(g) for g in (x, y, z))
        return (
            self.triangle_lin(self.bracket_lin(gx, gy), gz)
            - self.triangle_lin(gx, self.triangle_lin(gy, gz))
            + self.triangle_lin(self.triangle_lin(gx, gy), gz)
            + self.triangle_lin(gy, self.triangle_lin(gx, gz))
            - self.triangle_lin(self.triangle_lin(gy, gx), gz)
        )


def postlie_base(
    names: Sequence[str],
    bracket_consts: Optional[Mapping[Tuple[Gen, Gen], Iterable]] = None,
    triangle_consts: Optional[Mapping[Tuple[Gen, Gen], Iterable]] = None,
) -> PostLieBase:
    ns = tuple(names)
    br = {k: _as_gencomb(v, ns) for k, v in (bracket_consts or {}).items()}
    tr = {k: _as_gencomb(v, ns) for k, v in (triangle_consts or {}).items()}
    return PostLieBase(ns, br, tr)


def trivial_postlie(names: Sequence[str]) -> PostLieBase:
    """Abelian P with zero triangle; the leading example."""
    return postlie_base(names)


@dataclass(frozen=True)
class PsiPair:
    """Actions of the generators on edge labels and on vertex labels."""

    edge: Callable[[Gen, Label], LinComb]
    vertex: Callable[[Gen, Label], LinComb]

    def edge_lin(self, p: Gen, x: LinComb) -> LinComb:
        return x.map_terms(lambda a: self.edge(p, a))

    def vertex_lin(self, p: Gen, x: LinComb) -> LinComb:
        return x.map_terms(lambda b: self.vertex(p, b))


def psi_from_tables(
    edge_table: Mapping[Tuple[Gen, Label], Iterable],
    vertex_table: Mapping[Tuple[Gen, Label], Iterable],
) -> PsiPair:
    """Actions from explicit tables; unlisted inputs act as zero."""

    def compile_side(table):
        out: Dict[Tuple[Gen, Label], LinComb] = {}
        for key, entries in table.items():
            out[key] = (
                entries
                if isinstance(entries, LinComb)
                else LinComb([(lab, as_scalar(c)) for c, lab in entries])
            )
        return out

    etab = compile_side(edge_table)
    vtab = compile_side(vertex_table)
    return PsiPair(
        edge=lambda p, a: etab.get((p, a), LinComb()),
        vertex=lambda p, b: vtab.get((p, b), LinComb()),
    )


# ---------------------------------------------------------------------------
# Elements of the extension


@dataclass(frozen=True)
class ExtElem:
    """An element of the extension: a planted part plus a generator part."""

    planted: PlantedComb
    gens: GenComb

    @staticmethod
    def zero() -> "ExtElem":
        return ExtElem(LinComb(), LinComb())

    @property
    def is_zero(self) -> bool:
        return self.planted.is_zero and self.gens.is_zero

    def __add__(self, other: "ExtElem") -> "ExtElem":
        return ExtElem(self.planted + other.planted, self.gens + other.gens)

    def __sub__(self, other: "ExtElem") -> "ExtElem":
        return ExtElem(self.planted - other.planted, self.gens - other.gens)

    def __neg__(self) -> "ExtElem":
        return ExtElem(-self.planted, -self.gens)

    def scale(self, c) -> "ExtElem":
        s = as_scalar(c)
        return ExtElem(self.planted.scale(s), self.gens.scale(s))

    def __rmul__(self, c) -> "ExtElem":
        return self.scale(c)

    def render(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        if not self.planted.is_zero:
            parts.append(self.planted.render(lambda p: p.render()))
        if not self.gens.is_zero:
            parts.append(self.gens.render(lambda g: g))
        return " + ".join(parts)


def ext_planted(x) -> ExtElem:
    """Wrap a planted tree or a combination of planted trees."""
    comb = x if isinstance(x, LinComb) else LinComb.of(x)
    return ExtElem(comb, LinComb())


def ext_gen(name: Gen, c: Scalar = 1) -> ExtElem:
    return ExtElem(LinComb(), LinComb.of(name, as_scalar(c)))


def _vertex_action_on_tree(psi: PsiPair, p: Gen, t: PlantedTree) -> PlantedComb:
    """Sum over vertices of t with the vertex action applied at that spot."""
    sites = tree_sites(t.body)
    elabels, vlabels = sites.initial_state()
    out = LinComb()
    for v in range(sites.size):
        for nb, c in psi.vertex(p, vlabels[v]).items():
            nv = vlabels[:v] + (nb,) + vlabels[v + 1 :]
            out = out + LinComb.of(
                PlantedTree(t.plant, rebuild_tree(sites, (elabels, nv))), c
            )
    return out


def ext_triangle(phi: PhiMap, P: PostLieBase, psi: PsiPair, u: ExtElem, w: ExtElem) -> ExtElem:
    """The triangle product of the extension, case by case."""
    planted_out = LinComb()
    for p1, c1 in u.planted.items():
        for p2, c2 in w.planted.items():
            bodies = graft_phi(phi, LinComb.of(p1.body), p1.plant, LinComb.of(p2.body))
            planted_out = planted_out + (c1 * c2) * bodies.map_terms(
                lambda b, plant=p2.plant: LinComb.of(PlantedTree(plant, b))
            )
    for g, c in u.gens.items():
        for p2, c2 in w.planted.items():
            planted_out = planted_out + (c * c2) * _vertex_action_on_tree(psi, g, p2)
    # planted ⊳ generator contributes nothing.
    gen_out = P.triangle_lin(u.gens, w.gens)
    return ExtElem(planted_out, gen_out)


def ext_bracket(P: PostLieBase, psi: PsiPair, u: ExtElem, w: ExtElem) -> ExtElem:
    """The bracket of the extension: antisymmetric, zero between planted parts."""
    planted_out = LinComb()
    for p1, c1 in u.planted.items():
        for g, c2 in w.gens.items():
            for na, c3 in psi.edge(g, p1.plant).items():
                planted_out = planted_out + LinComb.of(
                    PlantedTree(na, p1.body), c1 * c2 * c3
                )
    for g, c1 in u.gens.items():
        for p2, c2 in w.planted.items():
            for na, c3 in psi.edge(g, p2.plant).items():
                planted_out = planted_out - LinComb.of(
                    PlantedTree(na, p2.body), c1 * c2 * c3
                )
    gen_out = P.bracket_lin(u.gens, w.gens)
    return ExtElem(planted_out, gen_out)


# ---------------------------------------------------------------------------
# Compatibility conditions on the actions


@dataclass(frozen=True)
class PsiDefect:
    condition: str
    gens: Tuple[Gen, ...]
    label: object
    residual: LinComb


def psi_compat_defects(
    phi: PhiMap,
    P: PostLieBase,
    psi: PsiPair,
    edge_labels: Sequence[Label],
    vertex_labels: Sequence[Label],
) -> List[PsiDefect]:
    """Residuals of the four conditions tying the actions to P and phi.

    For trivial P the first condition degenerates to commutation of the
    edge actions, the third to commutation of the vertex actions, and the
    second holds vacuously; the fourth is unchanged.  Returns only the
    nonzero residuals.
    """
    defects: List[PsiDefect] = []
    for p in P.names:
        for q in P.names:
            br = P.bracket_of(p, q)
            tr_pq = P.triangle_of(p, q)
            tr_qp = P.triangle_of(q, p)
            for a in edge_labels:
                lhs = LinComb()
                for g, c in br.items():
                    lhs = lhs + c * psi.edge(g, a)
                rhs = psi.edge_lin(q, psi.edge(p, a)) - psi.edge_lin(p, psi.edge(q, a))
                if lhs != rhs:
                    defects.append(
                        PsiDefect("edge-action-bracket", (p, q), a, lhs - rhs)
                    )
                tr_apply = LinComb()
                for g, c in tr_pq.items():
                    tr_apply = tr_apply + c * psi.edge(g, a)
                if not tr_apply.is_zero:
                    defects.append(
                        PsiDefect("edge-action-triangle", (p, q), a, tr_apply)
                    )
            for b in vertex_labels:
                lhs = LinComb()
                for g, c in br.items():
                    lhs = lhs + c * psi.vertex(g, b)
                rhs = psi.vertex_lin(p, psi.vertex(q, b)) - psi.vertex_lin(
                    q, psi.vertex(p, b)
                )
                for g, c in tr_pq.items():
                    rhs = rhs - c * psi.vertex(g, b)
                for g, c in tr_qp.items():
                    rhs = rhs + c * psi.vertex(g, b)
                if lhs != rhs:
                    defects.append(
                        PsiDefect("vertex-action-bracket", (p, q), b, lhs - rhs)
                    )
    for p in P.names:
        for a in edge_labels:
            for b in vertex_labels:
                lhs = LinComb()
                for na, c in psi.edge(p, a).items():
                    lhs = lhs + c * phi(na, b)
                rhs = LinComb()
                for nb, c in psi.vertex(p, b).items():
                    rhs = rhs + c * phi(a, nb)
                for (na, nb), c in phi(a, b).items():
                    for nb2, c2 in psi.vertex(p, nb).items():
                        rhs = rhs - LinComb.of((na, nb2), c * c2)
                if lhs != rhs:
                    defects.append(
                        PsiDefect("map-intertwining", (p,), (a, b), lhs - rhs)
                    )
    return defects


# ---------------------------------------------------------------------------
# The post-Lie axioms on the extension


@dataclass(frozen=True)
class AxiomDefects:
    jacobi: ExtElem
    derivation: ExtElem
    associator: ExtElem

    @property
    def all_zero(self) -> bool:
        return self.jacobi.is_zero and self.derivation.is_zero and self.associator.is_zero


def postlie_axiom_defects(
    phi: PhiMap, P: PostLieBase, psi: PsiPair, u: ExtElem, v: ExtElem, w: ExtElem
) -> AxiomDefects:
    """The three axiom residuals of the extension at (u, v, w)."""

    def b(x, y):
        return ext_bracket(P, psi, x, y)

    def t(x, y):
        return ext_triangle(phi, P, psi, x, y)

    jacobi = b(b(u, v), w) + b(b(v, w), u) + b(b(w, u), v)
    derivation = t(u, b(v, w)) - b(t(u, v), w) - b(v, t(u, w))
    associator = (
        t(b(u, v), w) - t(u, t(v, w)) + t(t(u, v), w) + t(v, t(u, w)) - t(t(v, u), w)
    )
    return AxiomDefects(jacobi, derivation, associator)
