"""Decoration labels for tree edges and vertices, and the bases they live in.

Four kinds of label coexist:

* ``Sym`` -- a named symbol from a finite basis,
* ``MultiIndex`` -- a tuple of d+1 nonnegative integers,
* ``XI`` -- the extra edge label of a noise-extended multi-index basis,
* ``STAR`` -- the extra vertex label of a noise-extended multi-index basis.

Every label has a ``sort_key`` giving a total order across kinds: symbols
first (by basis id, then name), then multi-indices lexicographically, then
STAR and XI above every multi-index.  Product labels (``Pr``) appear only
as outputs of tensor-product constructions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product as iproduct
from math import comb
from typing import Iterable, Optional, Sequence, Tuple, Union

from .lincomb import Scalar, as_scalar


@dataclass(frozen=True)
class MultiIndex:
    """A multi-index in N^{d+1}; ``entries[j]`` counts the direction j."""

    entries: Tuple[int, ...]

    def __post_init__(self):
        if not all(isinstance(e, int) and e >= 0 for e in self.entries):
            raise ValueError(f"multi-index entries must be nonnegative ints: {self.entries}")

    @cached_property
    def _hash(self) -> int:
        return hash(self.entries)

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self):
        return (1, self.entries)

    def render(self) -> str:
        return "<" + ",".join(str(e) for e in self.entries) + ">"

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, j: int) -> int:
        return self.entries[j]

    @property
    def degree(self) -> int:
        """The total degree |a| = sum of the entries."""
        return sum(self.entries)

    def leq(self, other: "MultiIndex") -> bool:
        """Entrywise <=."""
        _same_length(self, other)
        return all(x <= y for x, y in zip(self.entries, other.entries))

    def min_with(self, other: "MultiIndex") -> "MultiIndex":
        """Entrywise minimum."""
        _same_length(self, other)
        return MultiIndex(tuple(min(x, y) for x, y in zip(self.entries, other.entries)))

    def add(self, other: "MultiIndex") -> "MultiIndex":
        _same_length(self, other)
        return MultiIndex(tuple(x + y for x, y in zip(self.entries, other.entries)))

    def sub(self, other: "MultiIndex") -> Optional["MultiIndex"]:
        """Entrywise difference, or None when any entry would go negative.

        The None result is the explicit "vanishes" outcome; it is not the
        zero multi-index.
        """
        _same_length(self, other)
        diff = tuple(x - y for x, y in zip(self.entries, other.entries))
        if any(e < 0 for e in diff):
            return None
        return MultiIndex(diff)

    def binom(self, lower: "MultiIndex") -> int:
        """Product of entrywise binomial coefficients; requires lower <= self."""
        if not lower.leq(self):
            raise ValueError(f"binom needs {lower.render()} <= {self.render()}")
        out = 1
        for b, l in zip(self.entries, lower.entries):
            out *= comb(b, l)
        return out

    def __repr__(self) -> str:
        return f"MultiIndex{self.entries}"


def _same_length(a: MultiIndex, b: MultiIndex) -> None:
    if len(a) != len(b):
        raise ValueError(f"multi-index length mismatch: {a.render()} vs {b.render()}")


def mi(*entries: int) -> MultiIndex:
    return MultiIndex(tuple(entries))


def mi_zero(d: int) -> MultiIndex:
    return MultiIndex((0,) * (d + 1))


def mi_unit(j: int, d: int) -> MultiIndex:
    """The j-th coordinate multi-index in N^{d+1}."""
    if not 0 <= j <= d:
        raise ValueError(f"direction {j} out of range for d={d}")
    return MultiIndex(tuple(1 if i == j else 0 for i in range(d + 1)))


def lambda_pow(lams: Sequence[Scalar], l: MultiIndex) -> Fraction:
    """The monomial lambda^l with the 0^0 = 1 convention."""
    if len(lams) != len(l):
        raise ValueError("coefficient vector and multi-index lengths differ")
    out = Fraction(1)
    for lam, e in zip(lams, l.entries):
        out *= as_scalar(lam) ** e
    return out


@dataclass(frozen=True)
class Sym:
    """A named basis symbol; ``basis_id`` keeps distinct bases disjoint."""

    basis_id: str
    name: str

    def sort_key(self):
        return (0, self.basis_id, self.name)

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class Noise:
    """One of the two reserved noise labels."""

    symbol: str

    def sort_key(self):
        # Above every multi-index; STAR and XI stay mutually ordered.
        return (2, self.symbol)

    def render(self) -> str:
        return self.symbol


XI = Noise("Xi")
STAR = Noise("*")


@dataclass(frozen=True)
class Pr:
    """A product label: one factor from each side of a tensor product."""

    left: "Label"
    right: "Label"

    def sort_key(self):
        from .lincomb import term_key

        return (4, term_key(self.left), term_key(self.right))

    def render(self) -> str:
        return f"({render_label(self.left)},{render_label(self.right)})"


Label = Union[Sym, MultiIndex, Noise, Pr]


def render_label(label: Label) -> str:
    return label.render()


# ---------------------------------------------------------------------------
# Decoration bases


class DecorationBasis:
    """Common surface of the basis kinds below."""

    is_finite: bool = False

    def contains(self, label: Label) -> bool:
        raise NotImplementedError

    def labels(self) -> Tuple[Label, ...]:
        raise ValueError(f"{self!r} is not a finite basis")

    def labels_up_to(self, bound: int) -> Tuple[Label, ...]:
        """A finite slice of the basis; the whole basis when it is finite."""
        return self.labels()

    def resolve_name(self, name: str) -> Optional[Label]:
        """The label a bare symbol name denotes in this basis, if any."""
        return None


@dataclass(frozen=True)
class SymbolBasis(DecorationBasis):
    basis_id: str
    names: Tuple[str, ...]

    is_finite = True

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate names in basis {self.basis_id}")

    def contains(self, label: Label) -> bool:
        return isinstance(label, Sym) and label.basis_id == self.basis_id and label.name in self.names

    def labels(self) -> Tuple[Label, ...]:
        return tuple(Sym(self.basis_id, n) for n in self.names)

    def resolve_name(self, name: str) -> Optional[Label]:
        if name in self.names:
            return Sym(self.basis_id, name)
        return None


def symbols(basis_id: str, names: Iterable[str]) -> SymbolBasis:
    return SymbolBasis(basis_id, tuple(names))


@dataclass(frozen=True)
class MultiIndexBasis(DecorationBasis):
    d: int

    is_finite = False

    def contains(self, label: Label) -> bool:
        return isinstance(label, MultiIndex) and len(label) == self.d + 1

    def labels_up_to(self, bound: int) -> Tuple[Label, ...]:
        rng = range(bound + 1)
        return tuple(MultiIndex(t) for t in iproduct(rng, repeat=self.d + 1))


@dataclass(frozen=True)
class MultiIndexNoiseBasis(DecorationBasis):
    """Multi-indices extended by one noise label (XI on edges, STAR on vertices)."""

    d: int
    noise: Noise

    is_finite = False

    def contains(self, label: Label) -> bool:
        if label == self.noise:
            return True
        return isinstance(label, MultiIndex) and len(label) == self.d + 1

    def labels_up_to(self, bound: int) -> Tuple[Label, ...]:
        rng = range(bound + 1)
        mis = tuple(MultiIndex(t) for t in iproduct(rng, repeat=self.d + 1))
        return mis + (self.noise,)

    def resolve_name(self, name: str) -> Optional[Label]:
        if self.noise is XI and name == "Xi":
            return XI
        return None


@dataclass(frozen=True)
class NoiseOnlyBasis(DecorationBasis):
    """The one-dimensional span of a single noise label."""

    noise: Noise

    is_finite = True

    def contains(self, label: Label) -> bool:
        return label == self.noise

    def labels(self) -> Tuple[Label, ...]:
        return (self.noise,)

    def resolve_name(self, name: str) -> Optional[Label]:
        if self.noise is XI and name == "Xi":
            return XI
        return None


@dataclass(frozen=True)
class UnionBasis(DecorationBasis):
    left: DecorationBasis
    right: DecorationBasis

    @property
    def is_finite(self) -> bool:  # type: ignore[override]
        return self.left.is_finite and self.right.is_finite

    def contains(self, label: Label) -> bool:
        return self.left.contains(label) or self.right.contains(label)

    def labels(self) -> Tuple[Label, ...]:
        return self.left.labels() + self.right.labels()

    def labels_up_to(self, bound: int) -> Tuple[Label, ...]:
        return self.left.labels_up_to(bound) + self.right.labels_up_to(bound)

    def resolve_name(self, name: str) -> Optional[Label]:
        return self.left.resolve_name(name) or self.right.resolve_name(name)

    def side(self, label: Label) -> int:
        """1 or 2 according to which summand the label belongs to."""
        if self.left.contains(label):
            return 1
        if self.right.contains(label):
            return 2
        raise ValueError(f"label {render_label(label)} not in the union basis")


@dataclass(frozen=True)
class ProductBasis(DecorationBasis):
    left: DecorationBasis
    right: DecorationBasis

    @property
    def is_finite(self) -> bool:  # type: ignore[override]
        return self.left.is_finite and self.right.is_finite

    def contains(self, label: Label) -> bool:
        return isinstance(label, Pr) and self.left.contains(label.left) and self.right.contains(label.right)

    def labels(self) -> Tuple[Label, ...]:
        return tuple(Pr(a, b) for a in self.left.labels() for b in self.right.labels())

    def labels_up_to(self, bound: int) -> Tuple[Label, ...]:
        return tuple(
            Pr(a, b)
            for a in self.left.labels_up_to(bound)
            for b in self.right.labels_up_to(bound)
        )


def bases_disjoint(b1: DecorationBasis, b2: DecorationBasis) -> bool:
    """Best-effort structural disjointness check for a direct sum."""
    if isinstance(b1, SymbolBasis) and isinstance(b2, SymbolBasis):
        return b1.basis_id != b2.basis_id or not set(b1.names) & set(b2.names)
    if isinstance(b1, MultiIndexBasis) and isinstance(b2, MultiIndexBasis):
        return b1.d != b2.d
    if isinstance(b1, NoiseOnlyBasis) and isinstance(b2, NoiseOnlyBasis):
        return b1.noise != b2.noise
    if isinstance(b1, (MultiIndexBasis, MultiIndexNoiseBasis)) and isinstance(
        b2, (MultiIndexBasis, MultiIndexNoiseBasis)
    ):
        return b1.d != b2.d
    if isinstance(b1, MultiIndexNoiseBasis) and isinstance(b2, NoiseOnlyBasis):
        return b1.noise != b2.noise
    if isinstance(b1, NoiseOnlyBasis) and isinstance(b2, MultiIndexNoiseBasis):
        return b1.noise != b2.noise
    # Mixed kinds never share a label.
    return True


def union_bases(b1: DecorationBasis, b2: DecorationBasis) -> DecorationBasis:
    """The basis of a direct sum; fuses multi-indices with a noise line."""
    if not bases_disjoint(b1, b2):
        raise ValueError("direct sum needs disjoint bases")
    if isinstance(b1, MultiIndexBasis) and isinstance(b2, NoiseOnlyBasis):
        return MultiIndexNoiseBasis(b1.d, b2.noise)
    if isinstance(b1, NoiseOnlyBasis) and isinstance(b2, MultiIndexBasis):
        return MultiIndexNoiseBasis(b2.d, b1.noise)
    return UnionBasis(b1, b2)
