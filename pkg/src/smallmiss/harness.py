"""Table, figure and verification outputs.

Every ``cmd_*`` function returns a process exit status: 0 success, 1 a
verification z-score at or beyond the gate, 2 bad arguments or I/O failure.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .estimators import (
    TABLE_PRESETS,
    EstimatorConfig,
    InadmissibleConfigError,
    MomentSummary,
    MomentTriple,
    SampleSpec,
    observed_moments,
)
from .exact_moments import INFINITE, QuadratureSpec, moments_for_d
from .montecarlo import verify

log = logging.getLogger(__name__)

UNDEF = "undef"
PARAMETERS = ("mu", "sigma2", "sigma")
MOMENTS = ("expectation", "bias", "se", "rmse")
TABLE_COLUMNS = ["n_obs", "estimator"] + [f"{p}_{m}" for p in PARAMETERS for m in MOMENTS]
FIGURE_COLUMNS = ["sweep_value", "estimator_label", "parameter", "rmse"]

DEFAULT_SIZES = (5, 20, 100)
DEFAULT_FIGURE_GRIDS = {
    1: (2, 3, 4, 5, 6, 8, 10, 15, 20, 30, 40, 50, 60, 80, 100),
    2: (3, 4, 5, 6, 8, 10, 15, 20, 30, 40, 50, 60, 80, 100),
    3: (1, 2, 3, 4, 5, 7, 10, 15, 20, 30, 50, 100),
}
FIGURE3_N = 20
FIGURE2_D = 5


@dataclass(frozen=True)
class TableRow:
    n_obs: int
    estimator_label: str
    moments: MomentTriple

    def cells(self) -> list[str]:
        return [str(self.n_obs), self.estimator_label] + [
            format_cell(getattr(summary, m)) for summary in self.moments for m in MOMENTS
        ]


def format_cell(value: Optional[float]) -> str:
    if value is None:
        return UNDEF
    text = f"{value:.2f}"
    return "0.00" if text == "-0.00" else text


def _format_exact(value: Optional[float]) -> str:
    return UNDEF if value is None else repr(float(value))


def table_moments(which: int, config: EstimatorConfig, spec: SampleSpec, D: float, quad: QuadratureSpec) -> MomentTriple:
    if which == 1:
        return observed_moments(config, spec)
    if which == 2:
        return moments_for_d(config, spec, 1, quad)
    if which == 3:
        return moments_for_d(config, spec, D, quad)
    raise ValueError(f"no table {which}")


def build_table(
    which: int,
    sizes: Sequence[int] = DEFAULT_SIZES,
    mu: float = 1.0,
    sigma: float = 1.0,
    D: float = 5,
    n_mis: Optional[int] = None,
    presets: Sequence[str] = TABLE_PRESETS,
    quad: QuadratureSpec = QuadratureSpec(),
) -> list[TableRow]:
    """Rows in reference order: sizes outer, presets inner.

    Table 1 has no missing values; tables 2 and 3 use ``n_mis = n_obs`` unless
    ``n_mis`` is given.
    """
    rows = []
    for n_obs in sizes:
        missing = 0 if which == 1 else (n_obs if n_mis is None else n_mis)
        spec = SampleSpec(mu, sigma, n_obs, missing)
        for label in presets:
            config = EstimatorConfig.from_label(label)
            rows.append(TableRow(n_obs, label, table_moments(which, config, spec, D, quad)))
    return rows


def render_table(rows: Iterable[TableRow], fmt: str = "csv") -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t" if fmt == "tsv" else ",", lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


@dataclass(frozen=True)
class FigurePoint:
    sweep_value: float
    estimator: str
    parameter: str
    rmse: Optional[float]


def build_figure(
    which: int,
    grid: Optional[Sequence[float]] = None,
    presets: Sequence[str] = TABLE_PRESETS,
    quad: QuadratureSpec = QuadratureSpec(),
) -> list[FigurePoint]:
    """RMSE series with sigma = 1.

    Figure 1 sweeps n_obs for the observed-data estimators, figure 2 sweeps
    n_obs (= n_mis) at D = 5, figure 3 sweeps D at n_obs = n_mis = 20.
    """
    if which not in DEFAULT_FIGURE_GRIDS:
        raise ValueError(f"no figure {which}")
    grid = DEFAULT_FIGURE_GRIDS[which] if grid is None else grid
    points = []
    for x in grid:
        for label in presets:
            config = EstimatorConfig.from_label(label)
            if which == 1:
                triple = observed_moments(config, SampleSpec(1.0, 1.0, int(x), 0))
            elif which == 2:
                triple = moments_for_d(config, SampleSpec(1.0, 1.0, int(x), int(x)), FIGURE2_D, quad)
            else:
                triple = moments_for_d(config, SampleSpec(1.0, 1.0, FIGURE3_N, FIGURE3_N), x, quad)
            for name, summary in zip(PARAMETERS, triple):
                points.append(FigurePoint(x, label, name, summary.rmse))
    return points


def render_figure(points: Iterable[FigurePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FIGURE_COLUMNS)
    for p in points:
        sweep = "inf" if p.sweep_value == INFINITE else f"{p.sweep_value:g}"
        writer.writerow([sweep, p.estimator, p.parameter, _format_exact(p.rmse)])
    return buf.getvalue()


def _write(text: str, out: Optional[str]) -> int:
    if out is None or out == "-":
        sys.stdout.write(text)
        return 0
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        log.error("cannot write %s: %s", out, exc)
        return 2
    return 0


def cmd_table(
    which: int,
    D: float = 5,
    sigma: float = 1.0,
    mu: float = 1.0,
    sizes: Sequence[int] = DEFAULT_SIZES,
    out: Optional[str] = None,
    fmt: str = "csv",
    n_mis: Optional[int] = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> int:
    try:
        rows = build_table(which, sizes, mu, sigma, D, n_mis, quad=quad)
    except ValueError as exc:
        log.error("%s", exc)
        return 2
    return _write(render_table(rows, fmt), out)


def cmd_figure(
    which: int,
    grid: Optional[Sequence[float]] = None,
    out: Optional[str] = None,
    quad: QuadratureSpec = QuadratureSpec(),
) -> int:
    try:
        points = build_figure(which, grid, quad=quad)
    except ValueError as exc:
        log.error("%s", exc)
        return 2
    return _write(render_figure(points), out)


MIN_REPLICATIONS = 10_000


def cmd_verify(
    configs: Sequence[EstimatorConfig],
    specs: Sequence[SampleSpec],
    Ds: Sequence[int],
    replications: int,
    master_seed: int,
    out: Optional[str] = None,
    quad: QuadratureSpec = QuadratureSpec(),
    workers: Optional[int] = None,
) -> int:
    """Run a campaign over every (config, spec, D) combination and write a JSON report."""
    if replications < MIN_REPLICATIONS:
        log.error("need at least %d replications, got %d", MIN_REPLICATIONS, replications)
        return 2
    reports = []
    try:
        for config in configs:
            for spec in specs:
                for D in Ds:
                    report = verify(config, spec, D, replications, master_seed, quad, workers=workers)
                    log.info("%s n_obs=%d n_mis=%d D=%d passed=%s", config.label, spec.n_obs,
                             spec.n_mis, D, report.passed)
                    reports.append(report)
    except (InadmissibleConfigError, ValueError) as exc:
        log.error("%s", exc)
        return 2
    payload = {"passed": all(r.passed for r in reports), "reports": [r.to_dict() for r in reports]}
    text = json.dumps(payload, indent=2, default=_json_default) + "\n"
    status = _write(text, out)
    if status:
        return status
    return 0 if payload["passed"] else 1


def _json_default(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


__all__ = [
    "DEFAULT_SIZES",
    "FigurePoint",
    "MomentSummary",
    "TableRow",
    "UNDEF",
    "build_figure",
    "build_table",
    "cmd_figure",
    "cmd_table",
    "cmd_verify",
    "format_cell",
    "render_figure",
    "render_table",
]
