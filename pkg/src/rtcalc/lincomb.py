"""Exact scalars and finite formal linear combinations.

Coefficients are arbitrary-precision rationals (``fractions.Fraction``),
which already keeps numerator/denominator in lowest terms with a positive
denominator.  A :class:`LinComb` is a finite map from basis terms to
nonzero coefficients; the zero combination is the empty map.  Terms can be
anything hashable that either is naturally orderable (ints, strings) or
exposes a ``sort_key`` attribute/method; tuples of such terms are ordered
componentwise.  All operations return new objects.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Iterator, Tuple

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def as_scalar(value) -> Fraction:
    """Coerce an int, string like ``"3/2"``, or Fraction to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"not an exact scalar: {value!r}")


def term_key(term):
    """Canonical sort key for a basis term.

    Tuples are keyed componentwise, objects with a ``sort_key`` use it
    (calling it when it is a method), everything else must be directly
    orderable.
    """
    if isinstance(term, tuple):
        return tuple(term_key(part) for part in term)
    key = getattr(term, "sort_key", None)
    if key is None:
        return term
    return key() if callable(key) else key


class LinComb:
    """A finite linear combination of basis terms with rational coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, items: Iterable[Tuple[Hashable, Scalar]] = ()):
        terms: Dict[Hashable, Fraction] = {}
        for term, coeff in items:
            c = as_scalar(coeff)
            if not c:
                continue
            acc = terms.get(term, ZERO) + c
            if acc:
                terms[term] = acc
            else:
                del terms[term]
        self._terms = terms

    @classmethod
    def of(cls, term, coeff: Scalar | int | str = 1) -> "LinComb":
        return cls([(term, as_scalar(coeff))])

    @classmethod
    def zero(cls) -> "LinComb":
        return cls()

    @classmethod
    def _raw(cls, terms: Dict[Hashable, Fraction]) -> "LinComb":
        out = cls.__new__(cls)
        out._terms = terms
        return out

    def coeff(self, term) -> Fraction:
        return self._terms.get(term, ZERO)

    def items(self):
        """Pairs ``(term, coeff)`` in canonical term order."""
        return sorted(self._terms.items(), key=lambda tc: term_key(tc[0]))

    def support(self):
        return [term for term, _ in self.items()]

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator:
        return iter(self.items())

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinComb):
            return NotImplemented
        return self._terms == other._terms

    def __ne__(self, other) -> bool:
        eq = self.__eq__(other)
        return NotImplemented if eq is NotImplemented else not eq

    def __add__(self, other: "LinComb") -> "LinComb":
        if not isinstance(other, LinComb):
            return NotImplemented
        terms = dict(self._terms)
        for term, c in other._terms.items():
            acc = terms.get(term, ZERO) + c
            if acc:
                terms[term] = acc
            else:
                terms.pop(term, None)
        return LinComb._raw(terms)

    def __sub__(self, other: "LinComb") -> "LinComb":
        if not isinstance(other, LinComb):
            return NotImplemented
        terms = dict(self._terms)
        for term, c in other._terms.items():
            acc = terms.get(term, ZERO) - c
            if acc:
                terms[term] = acc
            else:
                terms.pop(term, None)
        return LinComb._raw(terms)

    def __neg__(self) -> "LinComb":
        return LinComb._raw({t: -c for t, c in self._terms.items()})

    def scale(self, coeff) -> "LinComb":
        c = as_scalar(coeff)
        if not c:
            return LinComb()
        return LinComb._raw({t: c * v for t, v in self._terms.items()})

    def __mul__(self, coeff) -> "LinComb":
        return self.scale(coeff)

    __rmul__ = __mul__

    def map_terms(self, fn: Callable[[Hashable], "LinComb"]) -> "LinComb":
        """Linear extension of ``fn``, which sends a term to a LinComb."""
        acc: Dict[Hashable, Fraction] = {}
        for term, c in self._terms.items():
            for image, weight in fn(term)._terms.items():
                total = acc.get(image, ZERO) + c * weight
                if total:
                    acc[image] = total
                else:
                    acc.pop(image, None)
        return LinComb._raw(acc)

    def render(self, render_term: Callable[[Hashable], str] = str) -> str:
        """Canonical textual form, ``0`` for the empty combination.

        Terms appear in canonical order; a coefficient of +-1 is folded
        into the sign, otherwise it prints as ``p/q*term`` with the
        denominator omitted when it is 1.
        """
        if not self._terms:
            return "0"
        pieces = []
        for i, (term, c) in enumerate(self.items()):
            mag = abs(c)
            body = render_term(term) if mag == 1 else f"{mag}*{render_term(term)}"
            if i == 0:
                pieces.append(body if c > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if c > 0 else f"- {body}")
        return " ".join(pieces)

    def __repr__(self) -> str:
        return f"LinComb({self.render()})"


def lc_sum(parts: Iterable[LinComb]) -> LinComb:
    total = LinComb()
    for p in parts:
        total = total + p
    return total
