"""Exact sparse linear algebra: linearization matrix, ranks, pin tests.

Two independent rank engines:

* exact: sparse fraction-free elimination over the integers with
  Markowitz-style pivot choice and content removal after every row update;
* modular: dense elimination with numpy over several word-sized primes.

``rank(..., mode="both")`` runs both and refuses to return unless they agree.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import TextIO

import gmpy2
import numpy as np

from .jetpoly import (
    SPINOR_VARS,
    JetVar,
    MissingJetValue,
    format_rational,
    multi_indices_upto,
    parse_jetvar,
)
from .rng import SplitMix64

log = logging.getLogger(__name__)

# numpy int64 holds p**2 only for p < 2**31.5; keep primes in [2**30, 2**31).
PRIME_LOW = 1 << 30
PRIME_HIGH = 1 << 31
DEFAULT_PRIME_COUNT = 3


class PrimeDisagreement(ArithmeticError):
    pass


class RankMismatch(AssertionError):
    """Exact and modular ranks differ in ``both`` mode."""


@dataclass(frozen=True)
class SparseRatMatrix:
    """Sparse exact-rational matrix; ``columns[k]`` labels column ``k``."""

    n_rows: int
    n_cols: int
    rows: tuple[tuple[tuple[int, Fraction], ...], ...]
    columns: tuple = ()
    row_labels: tuple[str, ...] = ()

    @classmethod
    def from_dense(cls, data: Sequence[Sequence], columns: Sequence = ()) -> SparseRatMatrix:
        n_cols = len(data[0]) if data else len(columns)
        rows = tuple(
            tuple((j, Fraction(x)) for j, x in enumerate(r) if x) for r in data
        )
        return cls(len(data), n_cols, rows, tuple(columns) or tuple(range(n_cols)))

    @classmethod
    def from_dicts(
        cls, rows: Iterable[Mapping[int, Fraction]], n_cols: int, columns: Sequence = ()
    ) -> SparseRatMatrix:
        rows = tuple(tuple(sorted((j, Fraction(x)) for j, x in r.items() if x)) for r in rows)
        return cls(len(rows), n_cols, rows, tuple(columns) or tuple(range(n_cols)))

    def to_dense(self) -> list[list[Fraction]]:
        out = [[Fraction(0)] * self.n_cols for _ in range(self.n_rows)]
        for i, r in enumerate(self.rows):
            for j, x in r:
                out[i][j] = x
        return out

    def column_index(self, label) -> int:
        try:
            return self.columns.index(label)
        except ValueError:
            raise KeyError(f"column {label} not in matrix") from None

    def delete_column(self, j: int) -> SparseRatMatrix:
        rows = tuple(
            tuple((k if k < j else k - 1, x) for k, x in r if k != j) for r in self.rows
        )
        cols = self.columns[:j] + self.columns[j + 1 :]
        return SparseRatMatrix(self.n_rows, self.n_cols - 1, rows, cols, self.row_labels)

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def integer_rows(self) -> list[dict[int, int]]:
        """Rows scaled by the lcm of their denominators."""
        out = []
        for r in self.rows:
            den = lcm(*(x.denominator for _, x in r)) if r else 1
            out.append({j: x.numerator * (den // x.denominator) for j, x in r})
        return out

    def matvec(self, x: Sequence[Fraction]) -> list[Fraction]:
        return [sum((v * x[j] for j, v in r), Fraction(0)) for r in self.rows]


# -- exact sparse elimination -----------------------------------------------


def _content(row: dict[int, int]) -> int:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return 1
    return g


def _make_primitive(row: dict[int, int]) -> None:
    g = _content(row)
    if g > 1:
        for k in row:
            row[k] //= g


class _Eliminator:
    """Fraction-free sparse Gauss(-Jordan) elimination over the integers.

    Pivots are chosen by a Markowitz-type rule: the active row with the fewest
    eligible entries, then within it the column occurring in the fewest active
    rows, ties broken by smallest absolute value.  ``protected`` columns are
    never pivots (used for the constant term of affine systems).
    """

    def __init__(self, rows: Iterable[dict[int, int]], protected: frozenset = frozenset()):
        self.rows: list[dict[int, int]] = []
        self.protected = protected
        self.col_rows: dict[int, set[int]] = {}
        self.active: set[int] = set()
        for r in rows:
            r = {k: int(v) for k, v in r.items() if v}
            _make_primitive(r)
            i = len(self.rows)
            self.rows.append(r)
            for k in r:
                self.col_rows.setdefault(k, set()).add(i)
            self.active.add(i)
        self.pivots: list[tuple[int, int]] = []  # (row id, column)

    def _eligible(self, i: int) -> int:
        r = self.rows[i]
        if not self.protected:
            return len(r)
        return sum(1 for k in r if k not in self.protected)

    def _choose(self) -> tuple[int, int] | None:
        best_row, best_len = None, None
        dead = []
        for i in self.active:
            n = self._eligible(i)
            if n == 0:
                dead.append(i)
                continue
            if best_len is None or n < best_len:
                best_row, best_len = i, n
                if n == 1:
                    break
        for i in dead:
            self.active.discard(i)
        if best_row is None:
            return None
        row = self.rows[best_row]
        best = None
        for k, v in row.items():
            if k in self.protected:
                continue
            key = (len(self.col_rows[k]), abs(v))
            if best is None or key < best[0]:
                best = (key, k)
        return best_row, best[1]

    def _reduce(self, i: int, p: int, col: int) -> None:
        r = self.rows[i]
        pr = self.rows[p]
        a, b = pr[col], r[col]
        g = gcd(a, b)
        a, b = a // g, b // g
        # r <- a*r - b*pr, which cancels ``col``
        if a != 1:
            for k in r:
                r[k] *= a
        for k, v in pr.items():
            nv = r.get(k, 0) - b * v
            if nv:
                if k not in r:
                    self.col_rows.setdefault(k, set()).add(i)
                r[k] = nv
            elif k in r:
                del r[k]
                self.col_rows[k].discard(i)
        _make_primitive(r)

    def run(self, full: bool = False) -> None:
        """Eliminate until no active row has an eligible entry.

        With ``full`` the pivot column is also cleared from earlier pivot rows,
        leaving a reduced echelon form (up to row scaling).
        """
        while True:
            choice = self._choose()
            if choice is None:
                return
            p, col = choice
            self.active.discard(p)
            self.pivots.append((p, col))
            for i in list(self.col_rows[col]):
                if i == p:
                    continue
                if i in self.active or full:
                    self._reduce(i, p, col)

    def rank(self) -> int:
        return len(self.pivots)


def exact_rank_rows(rows: Iterable[dict[int, int]]) -> int:
    e = _Eliminator(rows)
    e.run()
    return e.rank()


def exact_rank(M: SparseRatMatrix) -> int:
    return exact_rank_rows(M.integer_rows())


def reduced_echelon(
    rows: Iterable[dict[int, int]], protected: frozenset = frozenset()
) -> tuple[list[tuple[int, dict[int, int]]], list[dict[int, int]]]:
    """Full reduction; returns ``(pivot column, row)`` pairs and leftover rows.

    Leftover rows contain only protected columns (or nothing).
    """
    e = _Eliminator(rows, protected)
    e.run(full=True)
    pivots = [(col, e.rows[i]) for i, col in e.pivots]
    pivot_ids = {i for i, _ in e.pivots}
    rest = [r for i, r in enumerate(e.rows) if i not in pivot_ids and r]
    return pivots, rest


def nullspace_small(M: SparseRatMatrix) -> list[list[Fraction]]:
    """Exact basis of the right kernel, one vector per free column."""
    pivots, _ = reduced_echelon(M.integer_rows())
    pivot_cols = {col for col, _ in pivots}
    basis = []
    for f in range(M.n_cols):
        if f in pivot_cols:
            continue
        v = [Fraction(0)] * M.n_cols
        v[f] = Fraction(1)
        for col, row in pivots:
            if f in row:
                v[col] = Fraction(-row[f], row[col])
        basis.append(v)
    return basis


# -- modular dense elimination ------------------------------------------------


def rank_mod_p(rows: Sequence[dict[int, int]], n_cols: int, p: int) -> int:
    """Rank over GF(p) by dense row reduction; ``p`` must be below 2**31.

    Columns are processed from last to first: with columns sorted by jet
    order this visits the nearly triangular high-order block first and keeps
    fill-in small.
    """
    if p >= PRIME_HIGH:
        raise ValueError("prime too large for int64 elimination")
    m = len(rows)
    if m == 0 or n_cols == 0:
        return 0
    A = np.zeros((m, n_cols), dtype=np.int64)
    last = n_cols - 1
    for i, r in enumerate(rows):
        for j, v in r.items():
            A[i, last - j] = v % p
    rank = 0
    for c in range(n_cols):
        if rank == m:
            break
        nz = np.flatnonzero(A[rank:, c])
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), -1, p)
        A[rank, c:] = (A[rank, c:] * inv) % p
        below = rank + 1 + np.flatnonzero(A[rank + 1 :, c])
        if below.size:
            f = A[below, c][:, None]
            A[below, c:] = (A[below, c:] - (f * A[rank, c:][None, :]) % p) % p
        rank += 1
    return rank


def choose_primes(seed: int, count: int = DEFAULT_PRIME_COUNT) -> list[int]:
    """Distinct primes in [2**30, 2**31) derived deterministically from ``seed``."""
    rng = SplitMix64(seed ^ 0x5EED_0F_9121_1E5)
    primes: list[int] = []
    while len(primes) < count:
        start = PRIME_LOW + rng.next() % (PRIME_HIGH - PRIME_LOW - 1000)
        p = int(gmpy2.next_prime(start))
        if p < PRIME_HIGH and p not in primes:
            primes.append(p)
    return primes


def modular_rank(
    M: SparseRatMatrix, primes: Sequence[int] | None = None
) -> tuple[int, dict[int, int]]:
    """Rank over several primes; raises :class:`PrimeDisagreement` if they differ."""
    primes = list(primes) if primes is not None else choose_primes(0)
    if len(primes) < 3:
        raise ValueError("at least three primes are required")
    rows = M.integer_rows()
    ranks = {p: rank_mod_p(rows, M.n_cols, p) for p in primes}
    if len(set(ranks.values())) != 1:
        raise PrimeDisagreement(ranks)
    return max(ranks.values()), ranks


def rank(
    M: SparseRatMatrix, mode: str = "both", primes: Sequence[int] | None = None
) -> int:
    """Exact rank over the rationals.

    ``modular`` escalates to exact elimination when primes disagree;
    ``both`` runs both engines and raises :class:`RankMismatch` on a conflict.
    """
    if mode == "exact":
        return exact_rank(M)
    if mode == "modular":
        try:
            return modular_rank(M, primes)[0]
        except PrimeDisagreement as exc:
            log.warning("primes disagree (%s); falling back to exact rank", exc)
            return exact_rank(M)
    if mode == "both":
        exact = exact_rank(M)
        try:
            mod = modular_rank(M, primes)[0]
        except PrimeDisagreement as exc:
            log.warning("primes disagree (%s); exact rank %d stands", exc, exact)
            return exact
        if mod != exact:
            raise RankMismatch(f"modular rank {mod} != exact rank {exact}")
        return exact
    raise ValueError(f"unknown rank mode {mode!r}")


# -- pin test -------------------------------------------------------------------


@dataclass(frozen=True)
class PinVerdict:
    column: object
    rank_full: int
    rank_deleted: int

    @property
    def pinned(self) -> bool:
        return self.rank_full == self.rank_deleted + 1

    def __post_init__(self):
        if self.rank_deleted not in (self.rank_full, self.rank_full - 1):
            raise AssertionError(
                f"deleting one column changed rank {self.rank_full} -> {self.rank_deleted}"
            )


def pin_test(
    M: SparseRatMatrix,
    j: int,
    mode: str = "both",
    primes: Sequence[int] | None = None,
    rank_full: int | None = None,
) -> PinVerdict:
    """Does the linear system ``M x = 0`` force ``x[j] = 0``?

    That is the case exactly when column ``j`` is not in the span of the
    other columns, i.e. when deleting it drops the rank by one.
    """
    if not 0 <= j < M.n_cols:
        raise IndexError(j)
    full = rank(M, mode, primes) if rank_full is None else rank_full
    deleted = rank(M.delete_column(j), mode, primes)
    return PinVerdict(M.columns[j], full, deleted)


# -- linearization ----------------------------------------------------------------


def build_linearization(eqs, pt: Mapping[JetVar, Fraction], policy: str = "occurring",
                        max_order: int | None = None) -> SparseRatMatrix:
    """Jacobian of the equations w.r.t. spinor jets, evaluated at ``pt``.

    ``policy="occurring"`` uses every spinor jet that occurs in some equation;
    ``"all-jets"`` uses every spinor jet of order <= ``max_order`` (extra
    columns are zero and do not change the rank).
    """
    row_dicts: list[dict[JetVar, Fraction]] = []
    occurring: set[JetVar] = set()
    for e in eqs:
        row: dict[JetVar, Fraction] = {}
        for mono, c in e.poly.coeffs.items():
            n = len(mono)
            for k in range(n):
                v = mono[k]
                if not v.var.is_spinor or (k and mono[k - 1] == v):
                    continue
                occurring.add(v)
                mult = mono.count(v)
                val = c * mult
                skipped = False
                for w in mono:
                    if w == v and not skipped:
                        skipped = True
                        continue
                    try:
                        val *= pt[w]
                    except KeyError:
                        raise MissingJetValue(w) from None
                if val:
                    row[v] = row.get(v, 0) + val
        row_dicts.append({v: x for v, x in row.items() if x})
    if policy == "occurring":
        columns = sorted(occurring)
    elif policy == "all-jets":
        if max_order is None:
            max_order = max((v.order for v in occurring), default=0)
        columns = sorted(
            JetVar.of(var, J) for var in SPINOR_VARS for J in multi_indices_upto(max_order)
        )
    else:
        raise ValueError(f"unknown column policy {policy!r}")
    index = {v: k for k, v in enumerate(columns)}
    rows = tuple(tuple(sorted((index[v], x) for v, x in r.items())) for r in row_dicts)
    labels = tuple(e.label for e in eqs)
    return SparseRatMatrix(len(rows), len(columns), rows, tuple(columns), labels)


# -- export ------------------------------------------------------------------------


def write_triplets(M: SparseRatMatrix, out: TextIO) -> None:
    """``rows cols`` header, ``i j p/q`` lines (1-based), ``0 0 0`` terminator."""
    out.write(f"{M.n_rows} {M.n_cols}\n")
    for i, r in enumerate(M.rows, 1):
        for j, x in r:
            out.write(f"{i} {j + 1} {format_rational(x)}\n")
    out.write("0 0 0\n")


def write_column_map(M: SparseRatMatrix, out: TextIO) -> None:
    for j, c in enumerate(M.columns, 1):
        out.write(f"{j} {c}\n")


def read_triplets(text: TextIO, column_map: TextIO | None = None) -> SparseRatMatrix:
    header = text.readline().split()
    n_rows, n_cols = int(header[0]), int(header[1])
    rows: list[dict[int, Fraction]] = [dict() for _ in range(n_rows)]
    for line in text:
        i, j, x = line.split()
        if i == "0" and j == "0":
            break
        rows[int(i) - 1][int(j) - 1] = Fraction(x)
    columns: tuple = ()
    if column_map is not None:
        columns = tuple(parse_jetvar(line.split(None, 1)[1]) for line in column_map if line.strip())
    return SparseRatMatrix.from_dicts(rows, n_cols, columns)
