"""Gauge-fixed Maxwell-Dirac system as twelve real jet polynomials.

Conventions: metric diag(+1,-1,-1,-1), chiral gamma matrices, units with
hbar = c = m = 1 and the charge absorbed into the potential.  The gauge
condition makes psi1 real, so psi1 enters only through ``psi1r``.

The Dirac rows are typed in component form and cross-checked against the
same equation rebuilt from the gamma matrices; the Maxwell current is
always computed from the gamma matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .jetpoly import (
    DepVar,
    JetPolynomial,
    JetVar,
    MultiIndex,
    Scalar,
    ZERO_INDEX,
)

DEFAULT_E2 = Fraction(221, 2410)
METRIC = (1, -1, -1, -1)

DIRAC_NAMES = ("D3re", "D3im", "D4re", "D4im", "D5re", "D5im", "D6re", "D6im")
MAXWELL_NAMES = ("M0", "M1", "M2", "M3")
EQUATION_NAMES = DIRAC_NAMES + MAXWELL_NAMES


class GaugeViolation(AssertionError):
    pass


@dataclass(frozen=True)
class ComplexJetPolynomial:
    re: JetPolynomial = field(default_factory=JetPolynomial)
    im: JetPolynomial = field(default_factory=JetPolynomial)

    @classmethod
    def const(cls, re: Scalar = 0, im: Scalar = 0) -> ComplexJetPolynomial:
        return cls(JetPolynomial.const(re), JetPolynomial.const(im))

    def __add__(self, other: ComplexJetPolynomial) -> ComplexJetPolynomial:
        return ComplexJetPolynomial(self.re + other.re, self.im + other.im)

    def __sub__(self, other: ComplexJetPolynomial) -> ComplexJetPolynomial:
        return ComplexJetPolynomial(self.re - other.re, self.im - other.im)

    def __neg__(self) -> ComplexJetPolynomial:
        return ComplexJetPolynomial(-self.re, -self.im)

    def __mul__(self, other: ComplexJetPolynomial) -> ComplexJetPolynomial:
        return ComplexJetPolynomial(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def times_i(self) -> ComplexJetPolynomial:
        return ComplexJetPolynomial(-self.im, self.re)

    def scale(self, c: Scalar) -> ComplexJetPolynomial:
        return ComplexJetPolynomial(self.re.scale(c), self.im.scale(c))

    def conj(self) -> ComplexJetPolynomial:
        return ComplexJetPolynomial(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()


CZERO = ComplexJetPolynomial()
I_UNIT = ComplexJetPolynomial.const(0, 1)

Matrix = tuple[tuple[ComplexJetPolynomial, ...], ...]


def _mat(rows: list[list[tuple[int, int]]]) -> Matrix:
    return tuple(tuple(ComplexJetPolynomial.const(a, b) for a, b in row) for row in rows)


def matmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(len(b[0])):
            acc = CZERO
            for k in range(len(b)):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def matadd(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def matscale(a: Matrix, c: Scalar) -> Matrix:
    return tuple(tuple(x.scale(c) for x in row) for row in a)


def identity4() -> Matrix:
    return _mat([[(1 if i == j else 0, 0) for j in range(4)] for i in range(4)])


def gamma_matrices() -> tuple[Matrix, Matrix, Matrix, Matrix]:
    """Upper-index gamma matrices in the chiral representation."""
    z = (0, 0)
    g0 = _mat([[z, z, (-1, 0), z], [z, z, z, (-1, 0)], [(-1, 0), z, z, z], [z, (-1, 0), z, z]])
    # off-diagonal blocks [[0, s], [-s, 0]] for each Pauli matrix s
    paulis = (
        [[(0, 0), (1, 0)], [(1, 0), (0, 0)]],
        [[(0, 0), (0, -1)], [(0, 1), (0, 0)]],
        [[(1, 0), (0, 0)], [(0, 0), (-1, 0)]],
    )
    gs = [g0]
    for s in paulis:
        rows = [[z] * 4 for _ in range(4)]
        for r in range(2):
            for c in range(2):
                rows[r][c + 2] = s[r][c]
                rows[r + 2][c] = (-s[r][c][0], -s[r][c][1])
        gs.append(_mat(rows))
    return tuple(gs)  # type: ignore[return-value]


def spinor(idx: MultiIndex = ZERO_INDEX) -> tuple[ComplexJetPolynomial, ...]:
    """Gauge-fixed spinor components at a given derivative index (psi1 real)."""
    def jet(v: DepVar) -> JetPolynomial:
        return JetPolynomial.var(JetVar.of(v, idx))

    return (
        ComplexJetPolynomial(jet(DepVar.PSI1R)),
        ComplexJetPolynomial(jet(DepVar.PSI2R), jet(DepVar.PSI2I)),
        ComplexJetPolynomial(jet(DepVar.PSI3R), jet(DepVar.PSI3I)),
        ComplexJetPolynomial(jet(DepVar.PSI4R), jet(DepVar.PSI4I)),
    )


def _unit(d: int) -> MultiIndex:
    return ZERO_INDEX.shift(d)


def potential(idx: MultiIndex = ZERO_INDEX) -> tuple[JetPolynomial, ...]:
    """Upper-index potential A^0..A^3 at a derivative index."""
    return tuple(
        JetPolynomial.var(JetVar.of(v, idx))
        for v in (DepVar.A0, DepVar.A1, DepVar.A2, DepVar.A3)
    )


@dataclass(frozen=True)
class GammaOracle:
    gammas: tuple[Matrix, Matrix, Matrix, Matrix]
    currents: tuple[ComplexJetPolynomial, ...]  # psibar gamma_mu psi, lower index

    def anticommutator(self, mu: int, nu: int) -> Matrix:
        g = self.gammas
        return matadd(matmul(g[mu], g[nu]), matmul(g[nu], g[mu]))


def build_gamma_oracle() -> GammaOracle:
    gammas = gamma_matrices()
    psi = spinor()
    col = tuple((c,) for c in psi)
    row_dag = (tuple(c.conj() for c in psi),)
    psibar = matmul(row_dag, gammas[0])
    currents = []
    for mu in range(4):
        lowered = matscale(gammas[mu], METRIC[mu])
        currents.append(matmul(matmul(psibar, lowered), col)[0][0])
    return GammaOracle(gammas, tuple(currents))


def build_dirac_complex() -> tuple[ComplexJetPolynomial, ...]:
    """Residuals (left minus right) of the four component Dirac equations."""
    A0, A1, A2, A3 = (ComplexJetPolynomial(a) for a in potential())
    p1, p2, p3, p4 = spinor()
    d = [spinor(_unit(k)) for k in range(4)]  # d[k][n] = psi_{n+1, k}
    i = I_UNIT

    def ip(x: ComplexJetPolynomial) -> ComplexJetPolynomial:
        return x.times_i()

    A1_m_iA2 = A1 - i * A2
    A1_p_iA2 = A1 + i * A2
    eq3 = (A0 + A3) * p3 + A1_m_iA2 * p4 + ip(
        d[3][2] - ip(d[2][3]) + d[1][3] - d[0][2]
    ) - p1
    eq4 = A1_p_iA2 * p3 + (A0 - A3) * p4 - ip(
        d[3][3] - ip(d[2][2]) - d[1][2] + d[0][3]
    ) - p2
    eq5 = (A0 - A3) * p1 - A1_m_iA2 * p2 - ip(
        d[3][0] - ip(d[2][1]) + d[1][1] + d[0][0]
    ) - p3
    eq6 = -(A1_p_iA2 * p1) + (A0 + A3) * p2 + ip(d[3][1]) + d[2][0] - ip(
        d[1][0] + d[0][1]
    ) - p4
    return (eq3, eq4, eq5, eq6)


def dirac_from_gammas(oracle: GammaOracle | None = None) -> tuple[ComplexJetPolynomial, ...]:
    """(i gamma^mu d_mu - gamma^mu A_mu) psi - psi, row by row."""
    oracle = oracle or build_gamma_oracle()
    g = oracle.gammas
    A = potential()
    psi = spinor()
    rows = [CZERO] * 4
    for mu in range(4):
        dpsi = spinor(_unit(mu))
        a_lower = ComplexJetPolynomial(A[mu].scale(METRIC[mu]))
        for r in range(4):
            for c in range(4):
                gc = g[mu][r][c]
                if gc.is_zero():
                    continue
                rows[r] = rows[r] + (gc * dpsi[c]).times_i() - gc * a_lower * psi[c]
    return tuple(rows[r] - psi[r] for r in range(4))


def maxwell_operator(mu: int) -> JetPolynomial:
    """Box A_mu - d_mu (d_nu A^nu), with lower index mu."""
    out = JetPolynomial()
    lower_mu = METRIC[mu]
    for k in range(4):
        twice = _unit(k) + _unit(k)
        out = out + potential(twice)[mu].scale(METRIC[k] * lower_mu)
    for nu in range(4):
        out = out - potential(_unit(nu) + _unit(mu))[nu]
    return out


@dataclass(frozen=True)
class SystemSpec:
    names: tuple[str, ...]
    equations: tuple[JetPolynomial, ...]
    e2: Fraction
    base_order: tuple[int, ...]

    def __iter__(self):
        return iter(zip(self.names, self.equations))

    def __getitem__(self, name: str) -> JetPolynomial:
        return self.equations[self.names.index(name)]

    def order_of(self, name: str) -> int:
        return self.base_order[self.names.index(name)]


def build_system(e2: Scalar = DEFAULT_E2, flip_spatial_current: bool = False) -> SystemSpec:
    """The 8 real Dirac rows followed by the 4 Maxwell rows.

    ``flip_spatial_current`` negates the spatial current components; it exists
    only for sign-convention robustness experiments.
    """
    e2 = Fraction(e2)
    eqs: list[JetPolynomial] = []
    for c in build_dirac_complex():
        eqs.extend((c.re, c.im))
    oracle = build_gamma_oracle()
    for mu in range(4):
        sign = -1 if (flip_spatial_current and mu) else 1
        eqs.append(maxwell_operator(mu) - oracle.currents[mu].re.scale(e2 * sign))
    spec = SystemSpec(EQUATION_NAMES, tuple(eqs), e2, (1,) * 8 + (2,) * 4)
    allowed = set(DepVar)
    for name, p in spec:
        if any(v.var not in allowed for v in p.variables()):
            raise GaugeViolation(name)
    return spec


# -- cross-validation -----------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _safe(name: str, fn) -> Check:
    try:
        ok, detail = fn()
    except Exception as exc:  # report, never abort
        return Check(name, False, f"{type(exc).__name__}: {exc}")
    return Check(name, bool(ok), detail)


def verify_construction(spec: SystemSpec | None = None) -> VerificationReport:
    """Structural checks of the constructed system; each reported separately.

    These cannot detect a consistent physics sign error (for example a flipped
    sign in one Maxwell row), only transcription and bookkeeping errors.
    """
    spec = spec or build_system()
    oracle = build_gamma_oracle()

    def clifford():
        bad = []
        for mu in range(4):
            for nu in range(4):
                want = matscale(identity4(), 2 * METRIC[mu] if mu == nu else 0)
                if oracle.anticommutator(mu, nu) != want:
                    bad.append((mu, nu))
        return not bad, f"failing pairs: {bad}" if bad else "all 16 pairs"

    def currents_real():
        bad = [mu for mu, j in enumerate(oracle.currents) if not j.im.is_zero()]
        return not bad, f"non-real: {bad}" if bad else ""

    def currents_quadratic():
        bad = []
        for mu, j in enumerate(oracle.currents):
            degs = {len(m) for m in j.re.coeffs}
            if degs != {2} or any(not v.var.is_spinor for v in j.re.variables()):
                bad.append(mu)
        return not bad, f"bad currents: {bad}" if bad else ""

    def reconstruction():
        rebuilt = [
            ComplexJetPolynomial(spec[DIRAC_NAMES[2 * k]], spec[DIRAC_NAMES[2 * k + 1]])
            for k in range(4)
        ]
        return rebuilt == list(build_dirac_complex()), ""

    def dirac_matches_gammas():
        typed = build_dirac_complex()
        derived = dirac_from_gammas(oracle)
        bad = [k + 3 for k in range(4) if typed[k] != derived[k]]
        return not bad, f"mismatched rows: {bad}" if bad else ""

    def degrees():
        bad = [n for n, p in spec if p.degree() > 2]
        return not bad, f"degree > 2: {bad}" if bad else ""

    def gauge():
        present = {v.var for _, p in spec for v in p.variables()}
        return present == set(DepVar), f"{len(present)} variables occur"

    def dirac_first_order_constant():
        bad = []
        for name in DIRAC_NAMES:
            for m in spec[name].coeffs:
                if any(v.order >= 1 for v in m) and len(m) != 1:
                    bad.append(name)
                if any(v.order >= 1 and not v.var.is_spinor for v in m):
                    bad.append(name)
        return not bad, f"rows: {sorted(set(bad))}" if bad else ""

    def zero_solution():
        zero = {v: Fraction(0) for _, p in spec for v in p.variables()}
        bad = [n for n, p in spec if p.evaluate(zero) != 0]
        return not bad, ""

    checks = (
        _safe("clifford", clifford),
        _safe("currents_real", currents_real),
        _safe("currents_pure_quadratic", currents_quadratic),
        _safe("dirac_reconstruction", reconstruction),
        _safe("dirac_matches_gammas", dirac_matches_gammas),
        _safe("degree_le_2", degrees),
        _safe("gauge_fixed", gauge),
        _safe("dirac_first_order_constant", dirac_first_order_constant),
        _safe("zero_solution", zero_solution),
    )
    return VerificationReport(checks)
