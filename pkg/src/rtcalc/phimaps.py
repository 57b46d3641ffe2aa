"""Linear maps on edge-vertex decoration pairs.

A :class:`PhiMap` sends a basis pair (edge label, vertex label) to a
linear combination of such pairs.  The central predicate is the
commutation of the two partial actions on triples (a, a', b): the map is
"tree-compatible" when acting through the first edge slot and then the
second agrees with the opposite order.  On finite bases that is decided
exactly; on multi-index bases it is only ever verified up to a bound.

The module also provides the combinators that preserve or transport
compatibility (direct sums, composition, polynomials, exponentials,
tensor products, transposes) and the bridge to block-matrix form for
finite bases, including the joint upper-triangular/diagonal normal form
on a two-dimensional vertex space.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .decorations import (
    DecorationBasis,
    Label,
    Pr,
    ProductBasis,
    SymbolBasis,
    render_label,
    union_bases,
)
from .lincomb import LinComb, Scalar, as_scalar
from .ratmat import (
    Matrix,
    commute,
    identity,
    inv2,
    mat,
    mat_mul,
    mat_sub,
    sqrt_fraction,
)


class IncompatiblePhi(Exception):
    """Raised when an operation that needs order-independence gets a refuted map."""


class NonNilpotentError(Exception):
    """Raised when an exponential series fails to terminate on some input."""


PairComb = LinComb  # combinations of (edge label, vertex label) pairs


@dataclass(frozen=True)
class PhiMap:
    edge_basis: DecorationBasis
    vertex_basis: DecorationBasis
    action: Callable[[Label, Label], PairComb]
    name: str = "phi"
    compat_by_construction: bool = False

    def __call__(self, a: Label, b: Label) -> PairComb:
        if not self.edge_basis.contains(a):
            raise ValueError(f"edge label {render_label(a)} outside the declared basis")
        if not self.vertex_basis.contains(b):
            raise ValueError(f"vertex label {render_label(b)} outside the declared basis")
        return self.action(a, b)

    def apply(self, pairs: PairComb) -> PairComb:
        """Linear extension to combinations of (edge, vertex) pairs."""
        return pairs.map_terms(lambda ab: self(*ab))

    def __repr__(self) -> str:
        return f"PhiMap({self.name})"


def identity_map(edge_basis: DecorationBasis, vertex_basis: DecorationBasis) -> PhiMap:
    return PhiMap(
        edge_basis,
        vertex_basis,
        lambda a, b: LinComb.of((a, b)),
        name="id",
        compat_by_construction=True,
    )


def zero_map(edge_basis: DecorationBasis, vertex_basis: DecorationBasis) -> PhiMap:
    return PhiMap(
        edge_basis,
        vertex_basis,
        lambda a, b: LinComb(),
        name="0",
        compat_by_construction=True,
    )


TableEntry = Iterable[Tuple[Union[Scalar, int, str], Label, Label]]


def from_table(
    edge_basis: DecorationBasis,
    vertex_basis: DecorationBasis,
    table: Dict[Tuple[Label, Label], TableEntry],
    name: str = "table",
) -> PhiMap:
    """A map given by an explicit table; unlisted pairs go to zero."""
    compiled: Dict[Tuple[Label, Label], PairComb] = {}
    for (a, b), out in table.items():
        if not edge_basis.contains(a) or not vertex_basis.contains(b):
            raise ValueError(f"table input ({render_label(a)},{render_label(b)}) outside the bases")
        comb = out if isinstance(out, LinComb) else LinComb([((a2, b2), as_scalar(c)) for c, a2, b2 in out])
        for (a2, b2), _ in comb.items():
            if not edge_basis.contains(a2) or not vertex_basis.contains(b2):
                raise ValueError(
                    f"table output ({render_label(a2)},{render_label(b2)}) outside the bases"
                )
        compiled[(a, b)] = comb
    return PhiMap(
        edge_basis,
        vertex_basis,
        lambda a, b: compiled.get((a, b), LinComb()),
        name=name,
    )


def tensor_map(
    edge_basis: DecorationBasis,
    vertex_basis: DecorationBasis,
    f: Callable[[Label], LinComb],
    g: Callable[[Label], LinComb],
    name: str = "f(x)g",
) -> PhiMap:
    """The decomposable map sending a (x) b to f(a) (x) g(b).

    Decomposable maps act through each slot independently, so they are
    tree-compatible outright.
    """

    def act(a: Label, b: Label) -> PairComb:
        return LinComb(
            [((a2, b2), ca * cb) for a2, ca in f(a).items() for b2, cb in g(b).items()]
        )

    return PhiMap(edge_basis, vertex_basis, act, name=name, compat_by_construction=True)


# ---------------------------------------------------------------------------
# Compatibility checking


@dataclass(frozen=True)
class Compatible:
    def __str__(self) -> str:
        return "Compatible"


@dataclass(frozen=True)
class VerifiedUpToBound:
    bound: int

    def __str__(self) -> str:
        return f"VerifiedUpToBound({self.bound})"


@dataclass(frozen=True)
class Refuted:
    witness: Tuple[Label, Label, Label]
    lhs: LinComb
    rhs: LinComb

    def __str__(self) -> str:
        a, a2, b = self.witness
        return f"Refuted(a={render_label(a)}, a'={render_label(a2)}, b={render_label(b)})"


Verdict = Union[Compatible, VerifiedUpToBound, Refuted]


def _act23(phi: PhiMap, triples: LinComb) -> LinComb:
    """Apply the map through slots (2, 3) of a triple combination."""

    def on_triple(t):
        a, a2, b = t
        return phi(a2, b).map_terms(lambda nb: LinComb.of((a, nb[0], nb[1])))

    return triples.map_terms(on_triple)


def _act13(phi: PhiMap, triples: LinComb) -> LinComb:
    """Apply the map through slots (1, 3) of a triple combination."""

    def on_triple(t):
        a, a2, b = t
        return phi(a, b).map_terms(lambda nb: LinComb.of((nb[0], a2, nb[1])))

    return triples.map_terms(on_triple)


def _sides(phi: PhiMap, a: Label, a2: Label, b: Label) -> Tuple[LinComb, LinComb]:
    start = LinComb.of((a, a2, b))
    return _act13(phi, _act23(phi, start)), _act23(phi, _act13(phi, start))


def phi13_phi23_defect(phi: PhiMap, a: Label, a2: Label, b: Label) -> LinComb:
    """The commutator of the two slot actions, evaluated on one triple."""
    lhs, rhs = _sides(phi, a, a2, b)
    return lhs - rhs


def mixed_commutation_defect(
    phi: PhiMap, psi: PhiMap, a: Label, a2: Label, b: Label
) -> LinComb:
    """psi through (1,3) after phi through (2,3), minus the other order.

    Vanishing of this on all triples is the hypothesis under which the
    edge-by-edge application of phi intertwines the psi-deformed grafting
    with the (phi o psi)-deformed one, and under which compositions and
    linear combinations of compatible maps stay compatible.
    """
    start = LinComb.of((a, a2, b))
    return _act13(psi, _act23(phi, start)) - _act23(phi, _act13(psi, start))


def check_compat(phi: PhiMap, bound: Optional[int] = None) -> Verdict:
    """Decide tree-compatibility on finite bases; verify up to a bound otherwise.

    On infinite (multi-index) bases the verdict is never ``Compatible``:
    the scan covers all labels with entries <= ``bound`` (noise labels
    included) and reports ``VerifiedUpToBound``.
    """
    finite = phi.edge_basis.is_finite and phi.vertex_basis.is_finite
    if finite:
        edge_labels = phi.edge_basis.labels()
        vertex_labels = phi.vertex_basis.labels()
    else:
        if bound is None:
            raise ValueError("an explicit bound is required on an infinite basis")
        edge_labels = phi.edge_basis.labels_up_to(bound)
        vertex_labels = phi.vertex_basis.labels_up_to(bound)
    for a in edge_labels:
        for a2 in edge_labels:
            for b in vertex_labels:
                lhs, rhs = _sides(phi, a, a2, b)
                if lhs != rhs:
                    return Refuted((a, a2, b), lhs, rhs)
    return Compatible() if finite else VerifiedUpToBound(bound)


@lru_cache(maxsize=None)
def _finite_verdict(phi: PhiMap) -> Verdict:
    return check_compat(phi)


def refuted_on(phi: PhiMap, edge_labels: Sequence[Label], vertex_labels: Sequence[Label]):
    """First refuting triple among the given labels, or None."""
    for a in edge_labels:
        for a2 in edge_labels:
            for b in vertex_labels:
                lhs, rhs = _sides(phi, a, a2, b)
                if lhs != rhs:
                    return Refuted((a, a2, b), lhs, rhs)
    return None


def ensure_usable(phi: PhiMap, edge_labels: Sequence[Label], vertex_labels: Sequence[Label]) -> None:
    """Refuse maps whose refutation is visible from the labels at hand.

    Maps flagged compatible-by-construction pass immediately.  On finite
    bases the full (cached) verdict decides; otherwise the scan runs over
    the labels actually occurring in the element being processed.
    """
    if phi.compat_by_construction:
        return
    if phi.edge_basis.is_finite and phi.vertex_basis.is_finite:
        verdict = _finite_verdict(phi)
        if isinstance(verdict, Refuted):
            raise IncompatiblePhi(str(verdict))
        return
    bad = refuted_on(phi, tuple(edge_labels), tuple(vertex_labels))
    if bad is not None:
        raise IncompatiblePhi(str(bad))


# ---------------------------------------------------------------------------
# Combinators


def direct_sum(phi1: PhiMap, phi2: PhiMap, lam, mu, name: Optional[str] = None) -> PhiMap:
    """Block map on a direct sum of bases.

    Diagonal blocks act by the two maps; the mixed blocks are scalar:
    (edge from the first summand, vertex from the second) is scaled by
    ``lam``, the opposite mix by ``mu``.  Compatible whenever both
    summands are, independently of the scalars.
    """
    lam, mu = as_scalar(lam), as_scalar(mu)
    E = union_bases(phi1.edge_basis, phi2.edge_basis)
    V = union_bases(phi1.vertex_basis, phi2.vertex_basis)

    def act(a: Label, b: Label) -> PairComb:
        a1 = phi1.edge_basis.contains(a)
        b1 = phi1.vertex_basis.contains(b)
        if a1 and b1:
            return phi1(a, b)
        if not a1 and not b1:
            return phi2(a, b)
        if a1:
            return LinComb.of((a, b), lam)
        return LinComb.of((a, b), mu)

    return PhiMap(
        E,
        V,
        act,
        name=name or f"({phi1.name})(+)({phi2.name})",
        compat_by_construction=phi1.compat_by_construction and phi2.compat_by_construction,
    )


def _require_same_bases(phi: PhiMap, psi: PhiMap) -> None:
    if phi.edge_basis != psi.edge_basis or phi.vertex_basis != psi.vertex_basis:
        raise ValueError("the maps act on different bases")


def compose(outer: PhiMap, inner: PhiMap, name: Optional[str] = None) -> PhiMap:
    """outer o inner.  Compatibility of the parts does not transfer by
    itself; it does under the mixed commutation hypothesis, which callers
    assert explicitly via ``mark_compatible`` when they have it."""
    _require_same_bases(outer, inner)
    return PhiMap(
        outer.edge_basis,
        outer.vertex_basis,
        lambda a, b: outer.apply(inner(a, b)),
        name=name or f"{outer.name}o{inner.name}",
    )


def lin_comb_maps(alpha, phi: PhiMap, beta, psi: PhiMap, name: Optional[str] = None) -> PhiMap:
    _require_same_bases(phi, psi)
    alpha, beta = as_scalar(alpha), as_scalar(beta)
    return PhiMap(
        phi.edge_basis,
        phi.vertex_basis,
        lambda a, b: phi(a, b).scale(alpha) + psi(a, b).scale(beta),
        name=name or f"{alpha}*{phi.name}+{beta}*{psi.name}",
    )


def mark_compatible(phi: PhiMap) -> PhiMap:
    """Assert compatibility established by an argument outside the checker."""
    return replace(phi, compat_by_construction=True)


def polynomial(phi: PhiMap, coeffs: Sequence, name: Optional[str] = None) -> PhiMap:
    """sum_k coeffs[k] * phi^k.  Polynomials in one compatible map are compatible."""
    cs = [as_scalar(c) for c in coeffs]

    def act(a: Label, b: Label) -> PairComb:
        acc = LinComb()
        cur = LinComb.of((a, b))
        for k, c in enumerate(cs):
            acc = acc + cur.scale(c)
            if k + 1 < len(cs):
                cur = phi.apply(cur)
        return acc

    return PhiMap(
        phi.edge_basis,
        phi.vertex_basis,
        act,
        name=name or f"poly({phi.name})",
        compat_by_construction=phi.compat_by_construction,
    )


def exp_series(phi: PhiMap, max_iter: int = 64, name: Optional[str] = None) -> PhiMap:
    """exp(phi), defined input by input for locally nilpotent maps.

    Iterates until the running power of the input vanishes; raises
    :class:`NonNilpotentError` if that has not happened after
    ``max_iter`` applications.
    """

    def act(a: Label, b: Label) -> PairComb:
        acc = LinComb()
        cur = LinComb.of((a, b))
        k = 0
        while cur:
            if k > max_iter:
                raise NonNilpotentError(
                    f"series for ({render_label(a)},{render_label(b)}) still alive after {max_iter} terms"
                )
            acc = acc + cur.scale(Fraction(1, factorial(k)))
            cur = phi.apply(cur)
            k += 1
        return acc

    return PhiMap(
        phi.edge_basis,
        phi.vertex_basis,
        act,
        name=name or f"exp({phi.name})",
        compat_by_construction=phi.compat_by_construction,
    )


def tensor_product(phi: PhiMap, psi: PhiMap, name: Optional[str] = None) -> PhiMap:
    """Slotwise tensor product, acting on product labels."""
    E = ProductBasis(phi.edge_basis, psi.edge_basis)
    V = ProductBasis(phi.vertex_basis, psi.vertex_basis)

    def act(a: Label, b: Label) -> PairComb:
        assert isinstance(a, Pr) and isinstance(b, Pr)
        left = phi(a.left, b.left)
        right = psi(a.right, b.right)
        return LinComb(
            [
                ((Pr(a1, a2), Pr(b1, b2)), c1 * c2)
                for (a1, b1), c1 in left.items()
                for (a2, b2), c2 in right.items()
            ]
        )

    return PhiMap(
        E,
        V,
        act,
        name=name or f"({phi.name})(x)({psi.name})",
        compat_by_construction=phi.compat_by_construction and psi.compat_by_construction,
    )


def transpose_map(phi: PhiMap, name: Optional[str] = None) -> PhiMap:
    """The adjoint with respect to the basis pairing; finite bases only."""
    if not (phi.edge_basis.is_finite and phi.vertex_basis.is_finite):
        raise ValueError("transpose needs finite bases")
    cols: Dict[Tuple[Label, Label], List[Tuple[Tuple[Label, Label], Fraction]]] = {}
    for a in phi.edge_basis.labels():
        for b in phi.vertex_basis.labels():
            for (a2, b2), c in phi(a, b).items():
                cols.setdefault((a2, b2), []).append(((a, b), c))
    table = {ab: LinComb(entries) for ab, entries in cols.items()}
    return PhiMap(
        phi.edge_basis,
        phi.vertex_basis,
        lambda a, b: table.get((a, b), LinComb()),
        name=name or f"{phi.name}^T",
        compat_by_construction=phi.compat_by_construction,
    )


# ---------------------------------------------------------------------------
# Block-matrix bridge (finite bases)


@dataclass(frozen=True)
class BlockMatrix:
    """m x m grid of n x n rational blocks.

    Encodes an endomorphism of a pair space with an m-dimensional edge
    side and n-dimensional vertex side: the image of (e_j, v) has its
    e_i-component equal to blocks[i][j] applied to v.
    """

    m: int
    n: int
    blocks: Tuple[Tuple[Matrix, ...], ...]

    def __post_init__(self):
        if len(self.blocks) != self.m or any(len(row) != self.m for row in self.blocks):
            raise ValueError("expected an m x m grid of blocks")
        for row in self.blocks:
            for blk in row:
                if len(blk) != self.n or any(len(r) != self.n for r in blk):
                    raise ValueError("every block must be n x n")

    def block(self, i: int, j: int) -> Matrix:
        return self.blocks[i][j]


def block_matrix(blocks: Sequence[Sequence[Sequence[Sequence]]]) -> BlockMatrix:
    grid = tuple(tuple(mat(blk) for blk in row) for row in blocks)
    m = len(grid)
    n = len(grid[0][0]) if m else 0
    return BlockMatrix(m, n, grid)


def default_block_bases(m: int, n: int) -> Tuple[SymbolBasis, SymbolBasis]:
    return (
        SymbolBasis("E", tuple(f"e{i + 1}" for i in range(m))),
        SymbolBasis("V", tuple(f"v{k + 1}" for k in range(n))),
    )


def from_blocks(
    M: BlockMatrix,
    edge_basis: Optional[SymbolBasis] = None,
    vertex_basis: Optional[SymbolBasis] = None,
    name: str = "blocks",
) -> PhiMap:
    dflt_e, dflt_v = default_block_bases(M.m, M.n)
    E = edge_basis or dflt_e
    V = vertex_basis or dflt_v
    if len(E.names) != M.m or len(V.names) != M.n:
        raise ValueError("basis sizes do not match the block grid")
    es, vs = E.labels(), V.labels()
    table: Dict[Tuple[Label, Label], LinComb] = {}
    for j in range(M.m):
        for l in range(M.n):
            entries = []
            for i in range(M.m):
                blk = M.blocks[i][j]
                for k in range(M.n):
                    if blk[k][l]:
                        entries.append(((es[i], vs[k]), blk[k][l]))
            table[(es[j], vs[l])] = LinComb(entries)
    return PhiMap(E, V, lambda a, b: table.get((a, b), LinComb()), name=name)


def to_blocks(phi: PhiMap) -> BlockMatrix:
    if not isinstance(phi.edge_basis, SymbolBasis) or not isinstance(phi.vertex_basis, SymbolBasis):
        raise ValueError("block form needs finite symbol bases")
    es, vs = phi.edge_basis.labels(), phi.vertex_basis.labels()
    m, n = len(es), len(vs)
    grid = [[[[Fraction(0)] * n for _ in range(n)] for _ in range(m)] for _ in range(m)]
    for j in range(m):
        for l in range(n):
            for (a2, b2), c in phi(es[j], vs[l]).items():
                i = es.index(a2)
                k = vs.index(b2)
                grid[i][j][k][l] = c
    return BlockMatrix(
        m, n, tuple(tuple(tuple(tuple(r) for r in blk) for blk in row) for row in grid)
    )


def noncommuting_pair(M: BlockMatrix) -> Optional[Tuple[Tuple[int, int], Tuple[int, int]]]:
    """The first pair of block positions that fail to commute, or None."""
    flat = [((i, j), M.blocks[i][j]) for i in range(M.m) for j in range(M.m)]
    for x in range(len(flat)):
        for y in range(x + 1, len(flat)):
            if not commute(flat[x][1], flat[y][1]):
                return (flat[x][0], flat[y][0])
    return None


def blocks_commute(M: BlockMatrix) -> bool:
    """Whether all blocks pairwise commute; equivalent to tree-compatibility."""
    return noncommuting_pair(M) is None


def assemble(M: BlockMatrix) -> Matrix:
    """The underlying (m*n) x (m*n) matrix, rows and columns grouped by edge index."""
    size = M.m * M.n
    rows = []
    for i in range(M.m):
        for k in range(M.n):
            row = []
            for j in range(M.m):
                for l in range(M.n):
                    row.append(M.blocks[i][j][k][l])
            rows.append(tuple(row))
    assert len(rows) == size
    return tuple(rows)


def jcell(a, b) -> Matrix:
    """Upper-triangular 2x2 cell with equal diagonal."""
    return mat([[a, b], [0, a]])


def dcell(a, b) -> Matrix:
    """Diagonal 2x2 cell."""
    return mat([[a, 0], [0, b]])


def build_JD(A: Sequence[Sequence], B: Sequence[Sequence], form: str) -> BlockMatrix:
    """The block matrix whose (i,j) block is the J- or D-cell of (A_ij, B_ij)."""
    A, B = mat(A), mat(B)
    if len(A) != len(B) or any(len(r) != len(A) for r in A + B):
        raise ValueError("need two square coefficient matrices of equal size")
    cell = jcell if form == "J" else dcell if form == "D" else None
    if cell is None:
        raise ValueError("form must be 'J' or 'D'")
    m = len(A)
    return BlockMatrix(
        m, 2, tuple(tuple(cell(A[i][j], B[i][j]) for j in range(m)) for i in range(m))
    )


@dataclass(frozen=True)
class AlreadyJD:
    form: str
    a: Matrix
    b: Matrix
    basis_change: Matrix


@dataclass(frozen=True)
class NotCompatible:
    witness: Tuple[Tuple[int, int], Tuple[int, int]]


@dataclass(frozen=True)
class NeedsAlgebraicExtension:
    block: Tuple[int, int]


ClassifyResult = Union[AlreadyJD, NotCompatible, NeedsAlgebraicExtension]


def _is_scalar(blk: Matrix) -> bool:
    return blk[0][1] == 0 and blk[1][0] == 0 and blk[0][0] == blk[1][1]


def _is_dcell(blk: Matrix) -> bool:
    return blk[0][1] == 0 and blk[1][0] == 0


def _is_jcell(blk: Matrix) -> bool:
    return blk[1][0] == 0 and blk[0][0] == blk[1][1]


def _read_cells(M: BlockMatrix, reader, form: str, P: Matrix) -> AlreadyJD:
    a = tuple(tuple(reader(M.blocks[i][j])[0] for j in range(M.m)) for i in range(M.m))
    b = tuple(tuple(reader(M.blocks[i][j])[1] for j in range(M.m)) for i in range(M.m))
    return AlreadyJD(form, a, b, P)


def classify_m2(M: BlockMatrix) -> ClassifyResult:
    """Joint normal form of a commuting family of 2x2 blocks over the rationals.

    Returns a vertex-basis change P putting every block simultaneously in
    J-cell or D-cell shape, a witness pair when the blocks do not commute,
    or ``NeedsAlgebraicExtension`` when the normal form would need
    irrational eigenvalues.  When several normal forms exist (the blocks
    do not pin the basis uniquely) the one found first is reported.
    """
    if M.n != 2:
        raise ValueError("classification applies to a two-dimensional vertex space")
    bad = noncommuting_pair(M)
    if bad is not None:
        return NotCompatible(bad)
    flat = [(i, j) for i in range(M.m) for j in range(M.m)]
    if all(_is_scalar(M.blocks[i][j]) for i, j in flat):
        return _read_cells(M, lambda blk: (blk[0][0], Fraction(0)), "J", identity(2))
    if all(_is_dcell(M.blocks[i][j]) for i, j in flat):
        return _read_cells(M, lambda blk: (blk[0][0], blk[1][1]), "D", identity(2))
    if all(_is_jcell(M.blocks[i][j]) for i, j in flat):
        return _read_cells(M, lambda blk: (blk[0][0], blk[0][1]), "J", identity(2))

    pivot = next((i, j) for i, j in flat if not _is_scalar(M.blocks[i][j]))
    blk = M.blocks[pivot[0]][pivot[1]]
    (p, q), (r, t) = blk
    tr, dt = p + t, p * t - q * r
    disc = tr * tr - 4 * dt
    s = sqrt_fraction(disc)
    if s is None:
        return NeedsAlgebraicExtension(pivot)

    if s != 0:
        l1, l2 = (tr + s) / 2, (tr - s) / 2

        def eigvec(l):
            if q != 0:
                return (q, l - p)
            if r != 0:
                return (l - t, r)
            return (Fraction(1), Fraction(0)) if l == p else (Fraction(0), Fraction(1))

        v1, v2 = eigvec(l1), eigvec(l2)
        P = mat([[v1[0], v2[0]], [v1[1], v2[1]]])
        form, check, reader = "D", _is_dcell, lambda c: (c[0][0], c[1][1])
    else:
        lam = tr / 2
        N = mat_sub(blk, mat([[lam, 0], [0, lam]]))
        w = (Fraction(1), Fraction(0))
        Nw = (N[0][0], N[1][0])
        if Nw == (0, 0):
            w = (Fraction(0), Fraction(1))
            Nw = (N[0][1], N[1][1])
        P = mat([[Nw[0], w[0]], [Nw[1], w[1]]])
        form, check, reader = "J", _is_jcell, lambda c: (c[0][0], c[0][1])

    Pinv = inv2(P)
    conj = tuple(
        tuple(mat_mul(Pinv, mat_mul(M.blocks[i][j], P)) for j in range(M.m)) for i in range(M.m)
    )
    for i, j in flat:
        # Commuting with the pivot forces every block into the same shape.
        assert check(conj[i][j]), (i, j)
    return _read_cells(BlockMatrix(M.m, 2, conj), reader, form, P)
