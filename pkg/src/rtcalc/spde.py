"""Multi-index decorations for singular stochastic PDEs.

Edge and vertex labels both live in N^{d+1}.  The elementary map lowers
one coordinate on both sides of a pair at once, weighted by the vertex
entry; these steps pairwise commute and are locally nilpotent, so the
exponential of any coefficient-weighted span is defined and admits a
closed form as a binomial sum.  The resulting one-parameter family is a
semigroup under composition, with the sign-flipped member as inverse.

The noise variant adds one edge symbol and one vertex symbol via a
direct sum with a zero block.  Generators X_0 .. X_d act on decorations
by raising vertex labels and lowering edge labels; together with the
closed-form map at coefficients (1, .., 1) they satisfy the post-Lie
compatibility conditions.  ``xi_admissible`` characterizes the planted
trees generated from the three one-edge shapes, and
``xi_generation_probe`` re-derives each admissible tree constructively.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product as iproduct
from typing import Iterable, List, Sequence, Tuple, Union

from .decorations import (
    STAR,
    XI,
    Label,
    MultiIndex,
    MultiIndexBasis,
    NoiseOnlyBasis,
    lambda_pow,
    mi_unit,
)
from .lincomb import LinComb, Scalar, as_scalar
from .phimaps import PhiMap, direct_sum, exp_series, zero_map
from .postlie import PostLieBase, PsiPair, trivial_postlie
from .prelie import planted_graft
from .trees import DecoratedTree, PlantedTree, node


@dataclass(frozen=True)
class SpdeConfig:
    """Coordinate count, deformation coefficients, and the noise switch."""

    d: int
    lam: Tuple[Scalar, ...]
    noise: bool = False

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("d must be nonnegative")
        lam = tuple(as_scalar(c) for c in self.lam)
        if len(lam) != self.d + 1:
            raise ValueError(f"need {self.d + 1} coefficients, got {len(lam)}")
        object.__setattr__(self, "lam", lam)

    def negated(self) -> "SpdeConfig":
        return replace(self, lam=tuple(-c for c in self.lam))


def partial_j(j: int, a: MultiIndex, b: MultiIndex) -> LinComb:
    """One lowering step: b_j (a - e_j) (x) (b - e_j), zero at the boundary."""
    if not 0 <= j < len(a):
        raise ValueError(f"direction {j} out of range for length-{len(a)} multi-indices")
    eps = mi_unit(j, len(a) - 1)
    na = a.sub(eps)
    nb = b.sub(eps)
    if na is None or nb is None:
        return LinComb()
    return LinComb.of((na, nb), b[j])


def partial_lambda(cfg: SpdeConfig) -> PhiMap:
    """Coefficient-weighted span of the lowering steps.

    Compatible by construction: the steps pairwise commute on mixed
    slots, and that property passes to linear combinations.
    """
    basis = MultiIndexBasis(cfg.d)

    def act(a: Label, b: Label) -> LinComb:
        out = LinComb()
        for j, c in enumerate(cfg.lam):
            out = out + partial_j(j, a, b).scale(c)
        return out

    return PhiMap(basis, basis, act, name="partial_lambda", compat_by_construction=True)


def _memoized(act):
    """Per-map image cache; sound because labels and images are immutable."""
    cache: dict = {}

    def wrapped(a: Label, b: Label) -> LinComb:
        key = (a, b)
        hit = cache.get(key)
        if hit is None:
            hit = act(a, b)
            cache[key] = hit
        return hit

    return wrapped


_interned: dict = {}


def _intern_mi(entries: Tuple[int, ...]) -> MultiIndex:
    m = _interned.get(entries)
    if m is None:
        m = MultiIndex(entries)
        _interned[entries] = m
    return m


def phi_lambda(cfg: SpdeConfig) -> PhiMap:
    """Closed form of exp(partial_lambda): a binomial sum over l <= min(a, b)."""
    basis = MultiIndexBasis(cfg.d)
    monomials: dict = {}

    def act(a: Label, b: Label) -> LinComb:
        terms = []
        ae, be = a.entries, b.entries
        for low in iproduct(*(range(min(x, y) + 1) for x, y in zip(ae, be))):
            weight = monomials.get(low)
            if weight is None:
                weight = lambda_pow(cfg.lam, MultiIndex(low))
                monomials[low] = weight
            if weight == 0:
                continue
            coeff = weight * b.binom(_intern_mi(low))
            new_a = _intern_mi(tuple(x - y for x, y in zip(ae, low)))
            new_b = _intern_mi(tuple(x - y for x, y in zip(be, low)))
            terms.append(((new_a, new_b), coeff))
        return LinComb(terms)

    return PhiMap(basis, basis, _memoized(act), name="phi_lambda", compat_by_construction=True)


def phi_lambda_via_exp(cfg: SpdeConfig, max_iter: int = 64) -> PhiMap:
    """The same map built through the series, as an independent cross-check.

    Termination is guaranteed input by input: the n-th power of the span
    kills any pair (a, b) once n exceeds |min(a, b)|.
    """
    return exp_series(partial_lambda(cfg), max_iter=max_iter, name="phi_lambda_exp")


def noise_extend(cfg: SpdeConfig) -> PhiMap:
    """Extension to the noise symbols: direct sum with the zero block.

    The mixed scalars are 0 and 1, so a multi-index edge over the noise
    source vertex is killed while the noise edge over a multi-index
    vertex is left alone.
    """
    if not cfg.noise:
        raise ValueError("noise_extend needs a config with noise=True")
    block = zero_map(NoiseOnlyBasis(XI), NoiseOnlyBasis(STAR))
    combined = direct_sum(phi_lambda(cfg), block, 0, 1, name="noise_extend")
    return replace(combined, action=_memoized(combined.action))


def spde_phi(cfg: SpdeConfig) -> PhiMap:
    """The decoration map matching the config: extended when noise is on."""
    return noise_extend(cfg) if cfg.noise else phi_lambda(cfg)


def spde_psi(cfg: SpdeConfig) -> Tuple[PostLieBase, PsiPair]:
    """Abelian generators X_0 .. X_d with raising and lowering actions.

    The vertex action raises coordinate i, the edge action lowers it
    with the vanish convention, and both kill the noise symbols.  The
    pair meets the compatibility conditions for the closed-form map when
    every coefficient equals 1; the actions themselves do not depend on
    the coefficients.
    """
    names = tuple(f"X_{i}" for i in range(cfg.d + 1))
    direction = {name: i for i, name in enumerate(names)}

    def edge(gen: str, a: Label) -> LinComb:
        if a is XI:
            return LinComb()
        lowered = a.sub(mi_unit(direction[gen], cfg.d))
        return LinComb() if lowered is None else LinComb.of(lowered)

    def vertex(gen: str, b: Label) -> LinComb:
        if b is STAR:
            return LinComb()
        return LinComb.of(b.add(mi_unit(direction[gen], cfg.d)))

    return trivial_postlie(names), PsiPair(edge, vertex)


# ---------------------------------------------------------------------------
# The noise-generated planted subalgebra


def xi_admissible(p: PlantedTree, cfg: SpdeConfig) -> bool:
    """Membership test for the subalgebra generated by the one-edge shapes.

    Three conditions: a noise plant carries the bare source vertex,
    every noise edge ends at a source vertex, and source vertices are
    leaves.
    """
    if not cfg.noise:
        raise ValueError("admissibility concerns the noise extension; set noise=True")
    if p.plant is XI and (p.body.label is not STAR or p.body.children):
        return False
    return _body_admissible(p.body)


def _body_admissible(t: DecoratedTree) -> bool:
    if t.label is STAR and t.children:
        return False
    for elabel, child in t.children:
        if elabel is XI and child.label is not STAR:
            return False
        if not _body_admissible(child):
            return False
    return True


class NotReached(Exception):
    """A probe target could not be rebuilt from the generators."""

    def __init__(self, residual: LinComb, message: str):
        super().__init__(message)
        self.residual = residual


PlantedElem = Union[PlantedTree, LinComb]


def xi_generation_probe(
    cfg: SpdeConfig,
    targets: Iterable[PlantedElem],
    max_vertices: int = 8,
) -> bool:
    """Rebuild each admissible target from the one-edge generators.

    Follows the inductive construction: detach the first child subtree,
    apply the sign-flipped map to the pair (edge label, root label) so
    that grafting back onto the root reconstitutes the target exactly,
    and recurse into the strictly smaller factors and into the deeper
    grafting terms, which have one root child less.  Raises
    :class:`NotReached` with the offending element if any step leaves a
    residual outside the subalgebra.
    """
    if not cfg.noise:
        raise ValueError("the generation argument needs the noise extension")
    phi = noise_extend(cfg)
    phi_inv = noise_extend(cfg.negated())
    trees: List[PlantedTree] = []
    for elem in targets:
        support = [elem] if isinstance(elem, PlantedTree) else list(elem.support())
        for p in support:
            if not xi_admissible(p, cfg):
                raise ValueError(f"target {p.render()} is not admissible")
            if p.body.vertex_count > max_vertices:
                raise ValueError(
                    f"target {p.render()} exceeds the vertex bound {max_vertices}"
                )
            trees.append(p)
    verified: set = set()
    for p in trees:
        _probe(cfg, phi, phi_inv, p, verified)
    return True


def _probe(cfg: SpdeConfig, phi: PhiMap, phi_inv: PhiMap, p: PlantedTree, verified: set) -> None:
    if p in verified:
        return
    if not p.body.children:
        verified.add(p)
        return
    edge_label, first = p.body.children[0]
    rest_children = p.body.children[1:]
    correction = phi_inv(edge_label, p.body.label)
    total = LinComb()
    for (new_edge, new_root), coeff in correction.items():
        left = PlantedTree(new_edge, first)
        right = PlantedTree(p.plant, node(new_root, rest_children))
        _probe(cfg, phi, phi_inv, left, verified)
        _probe(cfg, phi, phi_inv, right, verified)
        total = total + planted_graft(phi, left, right).scale(coeff)
    residual = total - LinComb.of(p)
    if residual.coeff(p) != 0:
        raise NotReached(residual, f"target {p.render()} not met with coefficient 1")
    for q, _ in residual.items():
        if not xi_admissible(q, cfg):
            raise NotReached(residual, f"residual term {q.render()} left the subalgebra")
        if len(q.body.children) >= len(p.body.children):
            raise NotReached(residual, f"residual term {q.render()} did not shrink")
        _probe(cfg, phi, phi_inv, q, verified)
    verified.add(p)
