"""Prolongation of the base system up to a maximal jet order."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

from .jetpoly import JetPolynomial, MultiIndex, ZERO_INDEX, multi_indices_upto
from .mdsystem import SystemSpec


@dataclass(frozen=True)
class ProlongedEquation:
    base: str
    J: MultiIndex
    poly: JetPolynomial
    base_order: int

    @property
    def order(self) -> int:
        return self.base_order + self.J.order()

    @property
    def label(self) -> str:
        return f"{self.base}{self.J}"


def prolong(poly: JetPolynomial, J: tuple[int, ...]) -> JetPolynomial:
    return poly.prolong(J)


def _lower_parent(J: MultiIndex) -> tuple[MultiIndex, int]:
    # the memoized route: D^J = D_d D^{J - e_d}, d = last nonzero direction
    for d in (3, 2, 1, 0):
        if J[d]:
            vals = list(J)
            vals[d] -= 1
            return MultiIndex(*vals), d
    raise ValueError("zero multi-index has no parent")


def prolong_lattice(poly: JetPolynomial, max_J: int) -> dict[MultiIndex, JetPolynomial]:
    """``{J: D^J poly}`` for every |J| <= max_J, each obtained from one parent."""
    out = {ZERO_INDEX: poly}
    for J in multi_indices_upto(max_J)[1:]:
        parent, d = _lower_parent(J)
        out[J] = out[parent].total_derivative(d)
    return out


def used_count(max_order: int, n_first: int = 8, n_second: int = 4) -> int:
    """Closed-form size of the used system (stars and bars in 4 variables)."""
    return n_first * comb(max_order - 1 + 4, 4) + n_second * comb(max_order - 2 + 4, 4)


def enumerate_used_system(spec: SystemSpec, max_order: int) -> list[ProlongedEquation]:
    """Every prolongation D^J(eq) whose jets have total order <= max_order.

    Ordered by base equation, then J graded-lexicographically.  Raises if a
    prolongation fails to reach its nominal order (leading jets cancelled),
    since the order filter relies on that never happening.
    """
    if max_order < 2:
        raise ValueError("max_order must be at least 2")
    out = []
    for name, poly in spec:
        base_order = spec.order_of(name)
        lattice = prolong_lattice(poly, max_order - base_order)
        for J, p in lattice.items():
            if p.max_order() != base_order + J.order():
                raise AssertionError(f"{name}{J}: order {p.max_order()} != nominal")
            out.append(ProlongedEquation(name, J, p, base_order))
    return out
