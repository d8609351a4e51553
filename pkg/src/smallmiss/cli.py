"""Command-line entry point.

    smallmiss --table 1                       # Table 1 as CSV on stdout
    smallmiss --table 3 --d 10 --format tsv --out t3.tsv
    smallmiss --figure 2 --grid 5,10,20,50,100
    smallmiss --verify --estimator M0,M1,PD2,PD7 --n-obs 5,20 --d 1,5

``SMALLMISS_SEED`` overrides ``--seed`` when set.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from .estimators import EstimatorConfig, InadmissibleConfigError, SampleSpec
from .exact_moments import INFINITE
from .harness import DEFAULT_SIZES, cmd_figure, cmd_table, cmd_verify
from .quadrature import QuadratureSpec

DEFAULT_SEED = 20240601
DEFAULT_REPS = 200_000
SEED_ENV = "SMALLMISS_SEED"


class _UsageError(Exception):
    pass


def _split(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in _split(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _d_values(text: str) -> list[float]:
    out = []
    for t in _split(text):
        if t.lower() in ("inf", "infinity"):
            out.append(INFINITE)
            continue
        try:
            out.append(int(t))
        except ValueError:
            raise argparse.ArgumentTypeError(f"D must be an integer or 'inf', got {t!r}") from None
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="smallmiss",
        description="Exact small-sample moments of ML-like and posterior-draw imputation estimators.",
    )
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--table", type=int, choices=(1, 2, 3), help="write a moment table")
    mode.add_argument("--figure", type=int, choices=(1, 2, 3), help="write RMSE series for a figure")
    mode.add_argument("--verify", action="store_true", help="run a Monte Carlo verification campaign")

    p.add_argument("--n-obs", type=_ints, help="observed sample size(s), comma-separated")
    p.add_argument("--n-mis", type=int, help="missing count (default: equal to n_obs; tables 2-3 and --verify)")
    p.add_argument("--d", type=_d_values, help="number of imputations; comma-separated for --verify")
    p.add_argument("--estimator", type=_split, help="preset label(s) such as M1 or PD-2")
    p.add_argument("--cm", type=float, help="ML-like estimator with this c_M")
    p.add_argument("--nu-prior", type=float, help="posterior-draw estimator with this nu_prior")
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=DEFAULT_REPS, help="Monte Carlo replications (>= 10000)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, help="worker threads for --verify")
    p.add_argument("--grid", type=_d_values, help="figure sweep values, comma-separated")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "tsv"), default="csv")
    p.add_argument("--quad-nodes", type=int, default=QuadratureSpec().nodes_per_axis)
    p.add_argument("--quad-tol", type=float, default=QuadratureSpec().target_rel_tol)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _seed(args: argparse.Namespace) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env.strip() == "":
        return args.seed
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _configs(args: argparse.Namespace) -> list[EstimatorConfig]:
    configs = [EstimatorConfig.from_label(label) for label in (args.estimator or [])]
    if args.cm is not None:
        configs.append(EstimatorConfig.mlike(args.cm))
    if args.nu_prior is not None:
        configs.append(EstimatorConfig.posterior_draw(args.nu_prior))
    if not configs:
        raise _UsageError("--verify needs --estimator, --cm or --nu-prior")
    return configs


def _run(args: argparse.Namespace) -> int:
    quad = QuadratureSpec(args.quad_nodes, args.quad_tol)
    if args.table is not None:
        ds = args.d or [5]
        if len(ds) != 1:
            raise _UsageError("--table takes a single --d")
        return cmd_table(
            args.table, ds[0], args.sigma, args.mu, args.n_obs or list(DEFAULT_SIZES),
            args.out, args.format, args.n_mis, quad,
        )
    if args.figure is not None:
        return cmd_figure(args.figure, args.grid, args.out, quad)

    if any(d == INFINITE for d in args.d or []):
        raise _UsageError("--verify needs a finite --d")
    specs = [
        SampleSpec(args.mu, args.sigma, n, n if args.n_mis is None else args.n_mis)
        for n in (args.n_obs or [20])
    ]
    return cmd_verify(_configs(args), specs, args.d or [5], args.reps, _seed(args), args.out, quad, args.workers)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage and 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return _run(args)
    except (_UsageError, InadmissibleConfigError, ValueError) as exc:
        logging.getLogger("smallmiss").error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
