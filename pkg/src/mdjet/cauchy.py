"""Initial-data schema, random Cauchy data and the background jet solver."""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import TextIO

from .jetpoly import DepVar, JetPolynomial, JetVar, format_rational, multi_indices_upto
from .linalg_exact import reduced_echelon
from .rng import SplitMix64

log = logging.getLogger(__name__)

INITIAL = "initial"
SOLVED = "solved"

_FREE_AT_T0 = frozenset(
    {DepVar.A0, DepVar.PSI1R, DepVar.PSI2R, DepVar.PSI3R, DepVar.PSI3I, DepVar.PSI4R, DepVar.PSI4I}
)


def is_initial_datum(v: JetVar) -> bool:
    """True for jets whose values are free Cauchy data."""
    i0, i1 = v.idx.i0, v.idx.i1
    if v.var in _FREE_AT_T0:
        return i0 == 0
    if v.var in (DepVar.A2, DepVar.A3):
        return i0 <= 1
    if v.var is DepVar.A1:
        return i0 == 0 or (i0 == 1 and i1 == 0)
    if v.var is DepVar.PSI2I:
        return i0 == 0 and i1 == 0
    raise ValueError(v)


def classify(v: JetVar) -> str:
    return INITIAL if is_initial_datum(v) else "determined"


def initial_jets(max_order: int) -> list[JetVar]:
    """All initial-datum jets of order <= max_order, canonically sorted."""
    jets = [JetVar.of(var, J) for var in DepVar for J in multi_indices_upto(max_order)]
    return sorted(v for v in jets if is_initial_datum(v))


def draw_initial_data(seed: int, max_order: int) -> dict[JetVar, Fraction]:
    """Random values ``+-p/q`` (p, q in 1..9) for every initial datum, in canonical order."""
    rng = SplitMix64(seed)
    return {v: rng.rational() for v in initial_jets(max_order)}


class StuckSolve(RuntimeError):
    def __init__(self, unknowns: Sequence[JetVar]):
        self.unknowns = sorted(unknowns)
        preview = ", ".join(str(v) for v in self.unknowns[:8])
        more = "" if len(self.unknowns) <= 8 else f" (+{len(self.unknowns) - 8} more)"
        super().__init__(f"{len(self.unknowns)} jets left undetermined: {preview}{more}")


class InconsistentSystem(RuntimeError):
    pass


@dataclass
class SolveRound:
    equations: int
    unknowns: int
    solved: list[JetVar]
    auxiliary: bool = False


@dataclass
class JetPoint:
    values: dict[JetVar, Fraction]
    provenance: dict[JetVar, str]
    rounds: list[SolveRound] = field(default_factory=list)

    def __getitem__(self, v: JetVar) -> Fraction:
        return self.values[v]

    def __contains__(self, v: object) -> bool:
        return v in self.values

    def __len__(self) -> int:
        return len(self.values)

    def counts(self) -> dict[str, int]:
        out = {INITIAL: 0, SOLVED: 0}
        for tag in self.provenance.values():
            out[tag] += 1
        return out

    def write(self, out: TextIO) -> None:
        """``var (i0,i1,i2,i3) = p/q initial|solved`` per line, canonical order."""
        for v in sorted(self.values):
            out.write(
                f"{v.var.label} {v.idx} = {format_rational(self.values[v])} {self.provenance[v]}\n"
            )


_CONST = -1


def _affine_rows(
    polys: Iterable[JetPolynomial], column: dict[JetVar, int]
) -> list[dict[int, int]]:
    rows = []
    for p in polys:
        den = lcm(*(c.denominator for c in p.coeffs.values()))
        row: dict[int, int] = {}
        for mono, c in p.coeffs.items():
            if mono:
                (v,) = mono
                k = column.setdefault(v, len(column))
            else:
                k = _CONST
            row[k] = c.numerator * (den // c.denominator)
        rows.append(row)
    return rows


def _solve_linear(polys: Sequence[JetPolynomial]) -> dict[JetVar, Fraction]:
    """Values of every unknown that the affine system pins to a unique value."""
    column: dict[JetVar, int] = {}
    rows = _affine_rows(polys, column)
    pivots, rest = reduced_echelon(rows, protected=frozenset({_CONST}))
    for r in rest:
        if r.get(_CONST):
            raise InconsistentSystem("linear subsystem reduces to a nonzero constant")
    by_col = {k: v for v, k in column.items()}
    out = {}
    for col, row in pivots:
        if all(k == col or k == _CONST for k in row):
            out[by_col[col]] = Fraction(-row.get(_CONST, 0), row[col])
    return out


def saturate_solve(
    eqs: Sequence,
    data: Mapping[JetVar, Fraction],
    aux: Sequence = (),
) -> JetPoint:
    """Complete ``data`` to a point annihilating every equation in ``eqs``.

    Fixpoint loop: substitute known jets, keep the equations that became
    affine in the remaining unknowns, and extract every unknown their joint
    linear system determines uniquely.  Equations still quadratic in unknowns
    wait for a later round.  ``aux`` equations take part in the solve, but
    jets occurring only there need not be determined.

    Items of ``eqs`` / ``aux`` may be polynomials or objects with ``.poly``.
    """
    polys = [getattr(e, "poly", e) for e in eqs]
    aux_polys = [getattr(e, "poly", e) for e in aux]
    targets = {v for p in polys for v in p.variables()}
    known = dict(data)
    provenance = {v: INITIAL for v in known}
    rounds: list[SolveRound] = []
    pending = [(p, False) for p in polys] + [(p, True) for p in aux_polys]

    while True:
        linear, still, aux_used = [], [], 0
        for p, is_aux in pending:
            r = p.substitute(known)
            if r.is_zero():
                continue
            if r.degree() == 0:
                raise InconsistentSystem(f"residual reduced to constant {r}")
            still.append((p, is_aux))
            if r.degree() == 1:
                linear.append(r)
                aux_used += is_aux
        pending = still
        if not linear:
            break
        found = _solve_linear(linear)
        if not found:
            break
        for v, x in found.items():
            known[v] = x
            provenance[v] = SOLVED
        n_unknowns = len({v for r in linear for v in r.variables()})
        rounds.append(SolveRound(len(linear), n_unknowns, sorted(found), aux_used > 0))
        log.debug("round %d: %d eqs, %d unknowns, %d solved",
                  len(rounds), len(linear), n_unknowns, len(found))

    missing = targets - known.keys()
    if missing:
        raise StuckSolve(sorted(missing))
    for p in polys:
        if p.evaluate(known):
            raise InconsistentSystem("nonzero residual after saturation")
    keep = targets | set(data)
    values = {v: known[v] for v in sorted(keep)}
    return JetPoint(values, {v: provenance[v] for v in values}, rounds)


@dataclass(frozen=True)
class ResidualReport:
    checked: int
    nonzero: int
    worst: str | None = None
    worst_value: Fraction | None = None


def residual_check(eqs: Sequence, pt: Mapping[JetVar, Fraction] | JetPoint) -> ResidualReport:
    values = pt.values if isinstance(pt, JetPoint) else pt
    nonzero, worst, worst_val = 0, None, None
    for e in eqs:
        poly = getattr(e, "poly", e)
        val = poly.evaluate(values)
        if val:
            nonzero += 1
            if worst_val is None or abs(val) > abs(worst_val):
                worst, worst_val = getattr(e, "label", str(poly)), val
    return ResidualReport(len(eqs), nonzero, worst, worst_val)
