"""Exact polynomials over jet variables in four independent variables.

A jet variable is a dependent variable together with a multi-index of
derivative counts ``(i0, i1, i2, i3)``.  Polynomials carry exact
:class:`fractions.Fraction` coefficients and are kept in canonical form:
no zero coefficients, each monomial a sorted tuple of jet variables.

Text format (used by ``--dump-system`` and round-trippable via
:func:`parse_poly`)::

    -2/3*psi3r[(1,0,0,0)]*A0[(0,0,0,0)] + 5*A1[(0,0,0,2)] + 1/7

Terms are joined by ``" + "`` (negative coefficients carry their sign),
a coefficient is ``p`` or ``p/q`` and the zero polynomial prints as ``0``.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping
from enum import IntEnum
from fractions import Fraction
from typing import NamedTuple, Union

Scalar = Union[int, Fraction]


class DepVar(IntEnum):
    """The eleven real dependent variables, in ranking order."""

    A0 = 0
    PSI4I = 1
    PSI4R = 2
    PSI3I = 3
    PSI3R = 4
    PSI2I = 5
    PSI2R = 6
    A3 = 7
    A2 = 8
    A1 = 9
    PSI1R = 10

    @property
    def label(self) -> str:
        return _LABELS[self]

    @property
    def is_spinor(self) -> bool:
        return self not in (DepVar.A0, DepVar.A1, DepVar.A2, DepVar.A3)

    @classmethod
    def from_label(cls, label: str) -> DepVar:
        try:
            return _BY_LABEL[label]
        except KeyError:
            raise ValueError(f"unknown dependent variable {label!r}") from None


_LABELS = {
    DepVar.A0: "A0",
    DepVar.PSI4I: "psi4i",
    DepVar.PSI4R: "psi4r",
    DepVar.PSI3I: "psi3i",
    DepVar.PSI3R: "psi3r",
    DepVar.PSI2I: "psi2i",
    DepVar.PSI2R: "psi2r",
    DepVar.A3: "A3",
    DepVar.A2: "A2",
    DepVar.A1: "A1",
    DepVar.PSI1R: "psi1r",
}
_BY_LABEL = {v: k for k, v in _LABELS.items()}

SPINOR_VARS = tuple(v for v in DepVar if v.is_spinor)
FIELD_VARS = (DepVar.A0, DepVar.A1, DepVar.A2, DepVar.A3)


class MultiIndex(NamedTuple):
    """Derivative counts with respect to x0, x1, x2, x3."""

    i0: int = 0
    i1: int = 0
    i2: int = 0
    i3: int = 0

    def order(self) -> int:
        return self.i0 + self.i1 + self.i2 + self.i3

    def __add__(self, other: tuple) -> MultiIndex:  # type: ignore[override]
        return MultiIndex(*(a + b for a, b in zip(self, other)))

    def shift(self, d: int) -> MultiIndex:
        """Index with one more derivative in direction ``d``."""
        vals = list(self)
        vals[d] += 1
        return MultiIndex(*vals)

    def __str__(self) -> str:
        return "(" + ",".join(str(i) for i in self) + ")"


ZERO_INDEX = MultiIndex()


def multi_indices(order: int) -> list[MultiIndex]:
    """All multi-indices of exactly the given order, lexicographically ascending."""
    out = []
    for i0 in range(order + 1):
        for i1 in range(order - i0 + 1):
            for i2 in range(order - i0 - i1 + 1):
                out.append(MultiIndex(i0, i1, i2, order - i0 - i1 - i2))
    return sorted(out)


def multi_indices_upto(order: int) -> list[MultiIndex]:
    """Graded listing of all multi-indices with total order <= ``order``."""
    return [J for k in range(order + 1) for J in multi_indices(k)]


class JetVar(NamedTuple):
    """A dependent variable with a derivative multi-index.

    The field order makes plain tuple comparison the canonical ordering:
    total order first, then variable rank, then the index lexicographically.
    Build instances with :meth:`of` so that ``order`` stays consistent.
    """

    order: int
    var: DepVar
    idx: MultiIndex

    @classmethod
    def of(cls, var: DepVar, idx: Iterable[int] = ZERO_INDEX) -> JetVar:
        idx = MultiIndex(*idx)
        return cls(idx.order(), DepVar(var), idx)

    def shift(self, d: int) -> JetVar:
        return JetVar(self.order + 1, self.var, self.idx.shift(d))

    def __str__(self) -> str:
        return f"{self.var.label}[{self.idx}]"


Monomial = tuple  # sorted tuple of JetVar; () is the constant monomial


class MissingJetValue(KeyError):
    """Raised when a point does not assign a value to a jet variable."""

    def __init__(self, var: JetVar):
        super().__init__(str(var))
        self.var = var


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


class JetPolynomial:
    """Immutable polynomial with exact rational coefficients.

    Internally a mapping ``monomial -> Fraction`` without zero entries,
    which is what makes equality and hashing canonical.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        clean: dict[Monomial, Fraction] = {}
        if terms:
            for mono, c in terms.items():
                key = tuple(sorted(mono))
                s = clean.get(key, 0) + Fraction(c)
                if s:
                    clean[key] = s
                else:
                    clean.pop(key, None)
        self._terms = clean
        self._hash: int | None = None

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction]) -> JetPolynomial:
        # trusted constructor: terms already canonical
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def var(cls, v: JetVar | DepVar, idx: Iterable[int] = ZERO_INDEX) -> JetPolynomial:
        if not isinstance(v, JetVar):
            v = JetVar.of(v, idx)
        return cls._raw({(v,): Fraction(1)})

    @classmethod
    def const(cls, c: Scalar) -> JetPolynomial:
        return cls._raw({(): Fraction(c)} if c else {})

    # -- inspection -----------------------------------------------------

    @property
    def coeffs(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def terms(self) -> list[tuple[Fraction, Monomial]]:
        """Canonically sorted ``(coefficient, monomial)`` list."""
        return [(self._terms[m], m) for m in sorted(self._terms, key=_mono_key)]

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def degree(self) -> int:
        return max((len(m) for m in self._terms), default=0)

    def variables(self) -> set[JetVar]:
        return {v for m in self._terms for v in m}

    def coefficient(self, *factors: JetVar) -> Fraction:
        return self._terms.get(tuple(sorted(factors)), Fraction(0))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, JetPolynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == JetPolynomial.const(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- ring operations ------------------------------------------------

    def __add__(self, other: JetPolynomial | Scalar) -> JetPolynomial:
        other = _lift(other)
        out = dict(self._terms)
        for m, c in other._terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return JetPolynomial._raw(out)

    __radd__ = __add__

    def __neg__(self) -> JetPolynomial:
        return JetPolynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other: JetPolynomial | Scalar) -> JetPolynomial:
        return self + (-_lift(other))

    def __rsub__(self, other: Scalar) -> JetPolynomial:
        return _lift(other) - self

    def __mul__(self, other: JetPolynomial | Scalar) -> JetPolynomial:
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return JetPolynomial._raw(out)

    __rmul__ = __mul__

    def scale(self, c: Scalar) -> JetPolynomial:
        if not c:
            return JetPolynomial()
        c = Fraction(c)
        return JetPolynomial._raw({m: c * v for m, v in self._terms.items()})

    # -- calculus ---------------------------------------------------------

    def total_derivative(self, d: int) -> JetPolynomial:
        """Formal total derivative in direction ``d`` (Leibniz rule)."""
        if d not in (0, 1, 2, 3):
            raise ValueError(f"direction must be 0..3, got {d}")
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            for k in range(len(m)):
                # skip repeated factors; their multiplicity is folded into the coefficient
                if k and m[k] == m[k - 1]:
                    continue
                mult = m.count(m[k])
                new = tuple(sorted(m[:k] + (m[k].shift(d),) + m[k + 1 :]))
                s = out.get(new, 0) + c * mult
                if s:
                    out[new] = s
                else:
                    out.pop(new, None)
        return JetPolynomial._raw(out)

    def prolong(self, J: Iterable[int]) -> JetPolynomial:
        p = self
        for d, n in enumerate(J):
            for _ in range(n):
                p = p.total_derivative(d)
        return p

    def partial(self, v: JetVar) -> JetPolynomial:
        """Algebraic partial derivative treating jets as independent indeterminates."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            mult = m.count(v)
            if not mult:
                continue
            k = m.index(v)
            rest = m[:k] + m[k + 1 :]
            s = out.get(rest, 0) + c * mult
            if s:
                out[rest] = s
            else:
                out.pop(rest, None)
        return JetPolynomial._raw(out)

    def evaluate(self, pt: Mapping[JetVar, Fraction]) -> Fraction:
        total = Fraction(0)
        for m, c in self._terms.items():
            val = c
            for v in m:
                try:
                    val *= pt[v]
                except KeyError:
                    raise MissingJetValue(v) from None
            total += val
        return total

    def substitute(self, pt: Mapping[JetVar, Fraction]) -> JetPolynomial:
        """Replace every jet that has a value in ``pt``; others stay symbolic."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            rest = []
            for v in m:
                val = pt.get(v)
                if val is None:
                    rest.append(v)
                else:
                    c = c * val
                    if not c:
                        break
            if not c:
                continue
            key = tuple(rest)
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return JetPolynomial._raw(out)

    def max_order(self) -> int:
        """Largest derivative order among the jets occurring in the polynomial."""
        if not self._terms:
            raise ValueError("max_order is undefined for the zero polynomial")
        return max((v.order for m in self._terms for v in m), default=0)

    # -- text -------------------------------------------------------------

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"JetPolynomial({format_poly(self)!r})"


def _lift(x: JetPolynomial | Scalar) -> JetPolynomial:
    if isinstance(x, JetPolynomial):
        return x
    return JetPolynomial.const(x)


def _mono_key(m: Monomial) -> tuple:
    return (len(m), m)


def var(v: DepVar, *idx: int) -> JetPolynomial:
    """Shorthand: ``var(DepVar.A1, 1, 1, 0, 0)``."""
    return JetPolynomial.var(JetVar.of(v, idx or ZERO_INDEX))


def total_derivative(p: JetPolynomial, d: int) -> JetPolynomial:
    return p.total_derivative(d)


def partial_wrt(p: JetPolynomial, v: JetVar) -> JetPolynomial:
    return p.partial(v)


def evaluate(p: JetPolynomial, pt: Mapping[JetVar, Fraction]) -> Fraction:
    return p.evaluate(pt)


def max_order(p: JetPolynomial) -> int:
    return p.max_order()


# -- serialization ----------------------------------------------------------


def format_rational(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_poly(p: JetPolynomial) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for c, m in p.terms():
        parts.append("*".join([format_rational(c)] + [str(v) for v in m]))
    return " + ".join(parts)


_JET_RE = re.compile(r"^([A-Za-z0-9]+)\[\((\d+),(\d+),(\d+),(\d+)\)\]$")


def parse_jetvar(text: str) -> JetVar:
    m = _JET_RE.match(text.strip())
    if not m:
        raise ValueError(f"malformed jet variable {text!r}")
    return JetVar.of(DepVar.from_label(m.group(1)), map(int, m.groups()[1:]))


def parse_poly(text: str) -> JetPolynomial:
    """Inverse of :func:`format_poly`."""
    text = text.strip()
    if text == "0":
        return JetPolynomial()
    terms: dict[Monomial, Fraction] = {}
    for chunk in text.split(" + "):
        coeff, *factors = chunk.strip().split("*")
        mono = tuple(sorted(parse_jetvar(f) for f in factors))
        terms[mono] = terms.get(mono, 0) + Fraction(coeff)
    return JetPolynomial(terms)


def iter_jets(polys: Iterable[JetPolynomial]) -> Iterator[JetVar]:
    seen: set[JetVar] = set()
    for p in polys:
        for v in p.variables():
            if v not in seen:
                seen.add(v)
                yield v
