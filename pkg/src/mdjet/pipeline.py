"""End-to-end run: build, prolong, draw, solve, linearize, pin-test."""

from __future__ import annotations

import json
import logging
import re
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import Any, TextIO

from .cauchy import (
    InconsistentSystem,
    JetPoint,
    StuckSolve,
    draw_initial_data,
    residual_check,
    saturate_solve,
)
from .jetpoly import SPINOR_VARS, DepVar, JetVar, format_rational
from .linalg_exact import (
    DEFAULT_PRIME_COUNT,
    PinVerdict,
    SparseRatMatrix,
    build_linearization,
    choose_primes,
    pin_test,
    rank,
)
from .mdsystem import DEFAULT_E2, SystemSpec, build_system
from .prolong import ProlongedEquation, enumerate_used_system

log = logging.getLogger(__name__)

SCHEMA_ID = "mdjet.run-report/1"
RANK_MODES = ("modular", "exact", "both")
COLUMN_POLICIES = ("occurring", "all-jets")


class ConfigError(ValueError):
    pass


def default_columns() -> tuple[JetVar, ...]:
    return tuple(sorted(JetVar.of(v) for v in SPINOR_VARS))


_COLUMN_RE = re.compile(r"([A-Za-z0-9]+)(?:@(\d+),(\d+),(\d+),(\d+))?")


def parse_columns(text: str) -> tuple[JetVar, ...]:
    """Parse ``psi1r@0,0,0,1,psi2r`` style lists; a bare name means index zero."""
    out = []
    pos = 0
    text = re.sub(r"\s+", "", text)
    while pos < len(text):
        m = _COLUMN_RE.match(text, pos)
        if not m or m.end() == pos:
            raise ConfigError(f"cannot parse column list at {text[pos:]!r}")
        try:
            var = DepVar.from_label(m.group(1))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        idx = tuple(int(g) for g in m.groups()[1:]) if m.group(2) else (0, 0, 0, 0)
        out.append(JetVar.of(var, idx))
        pos = m.end()
        if pos < len(text):
            if text[pos] != ",":
                raise ConfigError(f"expected ',' at {text[pos:]!r}")
            pos += 1
    return tuple(out)


def format_column(v: JetVar) -> str:
    return f"{v.var.label}@{','.join(map(str, v.idx))}"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    max_order: int = 5
    e2: Fraction = DEFAULT_E2
    test_columns: tuple[JetVar, ...] = field(default_factory=default_columns)
    rank_mode: str = "both"
    column_policy: str = "occurring"
    retries: int = 3
    # prolongation depth beyond max_order used only to pin the background
    extra_orders: int = 1
    prime_count: int = DEFAULT_PRIME_COUNT
    flip_spatial_current: bool = False

    def validate(self) -> None:
        if self.max_order < 2:
            raise ConfigError("max_order must be >= 2")
        if not 0 <= self.seed < 1 << 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.rank_mode not in RANK_MODES:
            raise ConfigError(f"rank_mode must be one of {RANK_MODES}")
        if self.column_policy not in COLUMN_POLICIES:
            raise ConfigError(f"column_policy must be one of {COLUMN_POLICIES}")
        if self.retries < 0 or self.extra_orders < 0:
            raise ConfigError("retries and extra_orders must be nonnegative")
        if self.prime_count < 3:
            raise ConfigError("prime_count must be >= 3")
        for v in self.test_columns:
            if not v.var.is_spinor:
                raise ConfigError(f"{v} is not a spinor jet")
            if v.order > self.max_order:
                raise ConfigError(f"{v} exceeds max_order {self.max_order}")

    def to_json(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "max_order": self.max_order,
            "e2": format_rational(Fraction(self.e2)),
            "test_columns": [format_column(v) for v in self.test_columns],
            "rank_mode": self.rank_mode,
            "column_policy": self.column_policy,
            "retries": self.retries,
            "extra_orders": self.extra_orders,
            "prime_count": self.prime_count,
            "flip_spatial_current": self.flip_spatial_current,
        }


@dataclass
class RunArtifacts:
    """Intermediate values kept for the dump options; not part of the report."""

    spec: SystemSpec
    equations: list[ProlongedEquation]
    point: JetPoint
    matrix: SparseRatMatrix


@dataclass
class RunReport:
    config: RunConfig
    seed_used: int
    failed_seeds: list[int]
    equation_count: int
    auxiliary_equation_count: int
    background: dict[str, Any]
    matrix_rows: int
    matrix_cols: int
    matrix_nnz: int
    primes: list[int]
    rank_full: int
    verdicts: list[PinVerdict]
    timings: dict[str, float] = field(default_factory=dict)
    artifacts: RunArtifacts | None = field(default=None, repr=False, compare=False)

    @property
    def all_pinned(self) -> bool:
        return all(v.pinned for v in self.verdicts)

    @property
    def verdict(self) -> str:
        pinned = sum(v.pinned for v in self.verdicts)
        if pinned == len(self.verdicts):
            return "all-pinned"
        return "none-pinned" if pinned == 0 else "partially-pinned"

    def to_json(self, timings: bool = True) -> dict[str, Any]:
        out = {
            "schema": SCHEMA_ID,
            "config": self.config.to_json(),
            "seed_used": self.seed_used,
            "failed_seeds": list(self.failed_seeds),
            "equations": {
                "used": self.equation_count,
                "auxiliary": self.auxiliary_equation_count,
            },
            "background": self.background,
            "matrix": {
                "rows": self.matrix_rows,
                "cols": self.matrix_cols,
                "nnz": self.matrix_nnz,
            },
            "primes": list(self.primes),
            "rank_full": self.rank_full,
            "verdicts": [
                {
                    "column": format_column(v.column),
                    "rank_full": v.rank_full,
                    "rank_deleted": v.rank_deleted,
                    "pinned": v.pinned,
                }
                for v in self.verdicts
            ],
            "verdict": self.verdict,
        }
        if timings:
            out["timings"] = {k: round(t, 6) for k, t in self.timings.items()}
        return out


def _solve_background(cfg: RunConfig, spec: SystemSpec, eqs: list[ProlongedEquation]):
    aux: list[ProlongedEquation] = []
    if cfg.extra_orders:
        wider = enumerate_used_system(spec, cfg.max_order + cfg.extra_orders)
        aux = [e for e in wider if e.order > cfg.max_order]
    failed = []
    seed = cfg.seed
    last: StuckSolve | None = None
    for _ in range(cfg.retries + 1):
        data = draw_initial_data(seed, cfg.max_order)
        try:
            return saturate_solve(eqs, data, aux), seed, failed, len(aux)
        except StuckSolve as exc:
            log.warning("seed %d: %s", seed, exc)
            failed.append(seed)
            last = exc
            seed = (seed + 1) % (1 << 64)
    assert last is not None
    last.failed_seeds = failed
    raise last


def run_pipeline(cfg: RunConfig, keep_artifacts: bool = False) -> RunReport:
    cfg.validate()
    timings: dict[str, float] = {}
    t = time.perf_counter()

    def lap(stage: str) -> None:
        nonlocal t
        now = time.perf_counter()
        timings[stage] = now - t
        t = now

    spec = build_system(cfg.e2, cfg.flip_spatial_current)
    eqs = enumerate_used_system(spec, cfg.max_order)
    lap("build")
    point, seed_used, failed, n_aux = _solve_background(cfg, spec, eqs)
    residuals = residual_check(eqs, point)
    if residuals.nonzero:
        raise InconsistentSystem(f"{residuals.nonzero} nonzero residuals")
    lap("solve")
    M = build_linearization(eqs, point.values, cfg.column_policy, cfg.max_order)
    lap("linearize")

    primes = choose_primes(seed_used, cfg.prime_count)
    full = rank(M, cfg.rank_mode, primes)
    verdicts = []
    for v in cfg.test_columns:
        try:
            j = M.column_index(v)
        except KeyError:
            raise ConfigError(f"column {v} does not occur in the linearized system") from None
        verdicts.append(pin_test(M, j, cfg.rank_mode, primes, rank_full=full))
    lap("rank")

    counts = point.counts()
    background = {
        "jets": len(point),
        "initial": counts["initial"],
        "solved": counts["solved"],
        "rounds": [
            {"equations": r.equations, "unknowns": r.unknowns, "solved": len(r.solved),
             "auxiliary": r.auxiliary}
            for r in point.rounds
        ],
        "residuals_checked": residuals.checked,
        "residuals_nonzero": residuals.nonzero,
    }
    return RunReport(
        config=cfg,
        seed_used=seed_used,
        failed_seeds=failed,
        equation_count=len(eqs),
        auxiliary_equation_count=n_aux,
        background=background,
        matrix_rows=M.n_rows,
        matrix_cols=M.n_cols,
        matrix_nnz=M.nnz(),
        primes=primes,
        rank_full=full,
        verdicts=verdicts,
        timings=timings,
        artifacts=RunArtifacts(spec, eqs, point, M) if keep_artifacts else None,
    )


# -- output ---------------------------------------------------------------------


def report_json(report: RunReport, timings: bool = True) -> str:
    return json.dumps(report.to_json(timings), indent=2, sort_keys=True) + "\n"


def report_text(report: RunReport) -> str:
    cfg = report.config
    lines = [
        f"max_order={cfg.max_order} seed={report.seed_used} e2={format_rational(Fraction(cfg.e2))} "
        f"rank_mode={cfg.rank_mode} policy={cfg.column_policy}",
        f"equations={report.equation_count} matrix={report.matrix_rows}x{report.matrix_cols} "
        f"rank_full={report.rank_full}",
    ]
    for v in report.verdicts:
        lines.append(
            f"{format_column(v.column):<20} rank_full={v.rank_full} "
            f"rank_deleted={v.rank_deleted} pinned={'yes' if v.pinned else 'no'}"
        )
    lines.append(f"verdict={report.verdict}")
    return "\n".join(lines) + "\n"


def emit(report: RunReport, fmt: str, out: TextIO) -> None:
    if fmt == "json":
        out.write(report_json(report))
    elif fmt == "text":
        out.write(report_text(report))
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_schema() -> dict[str, Any]:
    return json.loads(resources.files("mdjet").joinpath("report_schema.json").read_text())


def validate_report(data: dict[str, Any]) -> None:
    """Raise ``jsonschema.ValidationError`` if ``data`` is not a valid report."""
    import jsonschema

    jsonschema.validate(data, load_schema())


def order_sweep(cfg: RunConfig, orders=(3, 4, 5)) -> list[RunReport]:
    """The same run at several truncation orders, to expose the pinning transition."""
    reports = []
    for k in orders:
        cols = tuple(v for v in cfg.test_columns if v.order <= k)
        reports.append(run_pipeline(replace(cfg, max_order=k, test_columns=cols)))
    return reports
