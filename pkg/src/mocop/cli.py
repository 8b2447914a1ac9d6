"""Command-line front end: pair, fit, gof, simulate, surface.

Every command is deterministic given its inputs, options and seed; the
resolved configuration (seed included) is embedded in all outputs.  Exit
status 0 means success, 1 means the estimation finished with warnings
(boundary estimates or per-family failures), 2 means an input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .copulas import FAMILIES, ParameterError, make_copula
from .estimation import (
    SampleError,
    classify_censored,
    classify_complete,
    fit_family,
    fit_mo_censored,
)
from .gof import bootstrap_pvalue
from .marginals import TimeObservation, pseudo_observations
from .pipeline import (
    IngestError,
    cohort_sample,
    ingest,
    pair_countries,
    read_paired_sample,
    write_paired_sample,
)

DEFAULT_FAMILIES = "mo,gaussian,gumbel,frank,clayton,fcg"


@dataclass
class RunConfig:
    command: str
    seed: int
    format: str = "table"
    inputs: tuple = ()
    output: str | None = None
    families: tuple = ()
    censored: bool = False
    tstar_mode: str = "log"
    t_star: float | None = None
    tie_tol: float = 0.0
    replicates: int = 0
    grid: int = 0
    family: str | None = None
    params: tuple = ()
    n: int = 0
    censor_quantile: float | None = None
    rule: str | None = None
    origin_offset: int = 1

    def as_dict(self):
        return dataclasses.asdict(self)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render(rows, columns, config: RunConfig) -> str:
    fmt = config.format
    if fmt == "json":
        return json.dumps({"config": config.as_dict(), "results": rows}, indent=2, default=str) + "\n"
    str_rows = [[_cell(row.get(c)) for c in columns] for row in rows]
    if fmt == "csv":
        lines = ["# config: " + json.dumps(config.as_dict(), default=str)]
        lines.append(",".join(columns))
        lines += [",".join(r) for r in str_rows]
        return "\n".join(lines) + "\n"
    # table
    widths = [max(len(c), *(len(r[i]) for r in str_rows)) if str_rows else len(c) for i, c in enumerate(columns)]
    lines = [f"# {k}: {v}" for k, v in config.as_dict().items() if v not in (None, (), "", 0) or k == "seed"]
    lines.append("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    lines += ["  ".join(r[i].ljust(widths[i]) for i in range(len(columns))) for r in str_rows]
    return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _param_text(fit) -> str:
    names = {
        "mo": ["theta"],
        "gaussian": ["rho"],
        "gumbel": ["r"],
        "frank": ["alpha"],
        "clayton": ["gamma"],
        "fcg": ["pi_f", "pi_c", "alpha", "gamma", "r"],
    }[fit.family]
    return " ".join(f"{n}={p:.4g}" for n, p in zip(names, fit.params))


def _fit_row(fit) -> dict:
    lower, upper = fit.copula.tail_dependence()
    row = {
        "family": fit.family,
        "params": _param_text(fit),
        "chi_lower": float(lower),
        "chi_upper": float(upper),
        "loglik": fit.loglik,
        "aic_c": fit.aic_c,
        "method": fit.method,
        "flags": ",".join(sorted(fit.flags)),
    }
    if fit.family == "mo":
        theta = fit.params[0]
        if theta > 0.5:
            row["verdict"] = "systematic dominates"
        elif theta < 0.5:
            row["verdict"] = "idiosyncratic dominates"
        else:
            row["verdict"] = "balanced"
    return row


def _parse_families(text: str) -> tuple:
    families = tuple(f.strip().lower() for f in text.split(",") if f.strip())
    for f in families:
        if f not in FAMILIES:
            raise ParameterError(f"unknown family {f!r}; choose from {sorted(FAMILIES)}")
    if not families:
        raise ParameterError("no family selected")
    return families


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_pair(args) -> int:
    config = RunConfig(
        command="pair",
        seed=args.seed,
        inputs=(args.country_a, args.country_b),
        output=args.output,
        censored=args.censoring == "censored",
        rule=args.rule,
        origin_offset=args.origin_offset,
    )
    records_a = ingest(args.country_a)
    records_b = ingest(args.country_b)
    cohort = pair_countries(records_a, records_b, rule=args.rule)
    uv, deltas, x_times, y_times, t_star = cohort_sample(
        cohort, censored=config.censored, origin_offset=args.origin_offset
    )
    write_paired_sample(args.output, uv, deltas, x_times, y_times)
    sys.stderr.write(
        f"wrote {uv.shape[0]} pairs to {args.output} (t*={t_star:g}, censoring={args.censoring}, seed={args.seed})\n"
    )
    return 0


def cmd_fit(args) -> int:
    families = _parse_families(args.families)
    config = RunConfig(
        command="fit",
        seed=args.seed,
        format=args.format,
        inputs=(args.pairs,),
        output=args.output,
        families=families,
        censored=args.censored,
        tstar_mode=args.tstar_mode,
        t_star=args.tstar,
        tie_tol=args.tie_tol,
    )
    uv, deltas, x_times, y_times = read_paired_sample(args.pairs)
    rows, warn = _fit_all(uv, deltas, x_times, y_times, config)
    columns = [
        "family",
        "params",
        "chi_lower",
        "chi_upper",
        "loglik",
        "aic_c",
        "method",
        "flags",
        "verdict",
        "error",
    ]
    _emit(_render(rows, columns, config), args.output)
    return 1 if warn else 0


def _fit_all(uv, deltas, x_times, y_times, config: RunConfig):
    rows = []
    warn = False
    observed_mask = (deltas == 1).all(axis=1)
    for family in config.families:
        try:
            if config.censored and family == "mo":
                t_star = config.t_star
                if t_star is None and config.tstar_mode == "literal":
                    times = np.concatenate([x_times[deltas[:, 0] == 1], y_times[deltas[:, 1] == 1]])
                    times = times[~np.isnan(times)]
                    if times.size == 0:
                        raise SampleError("literal mode needs observed times or --tstar")
                    t_star = float(times.max())
                cs = classify_censored(
                    uv, deltas, t_star=t_star, tie_tol=config.tie_tol, tstar_mode=config.tstar_mode
                )
                fit = fit_mo_censored(cs)
            else:
                sub = uv[observed_mask] if config.censored else uv
                if sub.shape[0] == 0:
                    raise SampleError("no fully observed pair to fit on")
                ps = classify_complete(sub, tie_tol=config.tie_tol)
                fit = fit_family(family, ps, seed=config.seed)
            row = _fit_row(fit)
            if fit.flags:
                warn = True
        except Exception as exc:  # surface per family, keep fitting the others
            row = {"family": family, "error": str(exc)}
            warn = True
        rows.append(row)
    return rows, warn


def cmd_gof(args) -> int:
    families = _parse_families(args.families)
    config = RunConfig(
        command="gof",
        seed=args.seed,
        format=args.format,
        inputs=(args.pairs,),
        output=args.output,
        families=families,
        tie_tol=args.tie_tol,
        replicates=args.replicates,
    )
    uv, deltas, _, _ = read_paired_sample(args.pairs)
    sample = classify_complete(uv, tie_tol=args.tie_tol)
    rows = []
    warn = False
    for family in families:
        try:
            report = bootstrap_pvalue(sample, family, replicates=args.replicates, seed=args.seed)
            row = _fit_row(report.fitted)
            row.update(
                {
                    "cvm_statistic": report.statistic,
                    "p_value": report.p_value,
                    "replicates": report.replicates,
                }
            )
            if report.fitted.flags or report.failed_replicates:
                warn = True
        except Exception as exc:
            row = {"family": family, "error": str(exc)}
            warn = True
        rows.append(row)
    columns = ["family", "params", "aic_c", "cvm_statistic", "p_value", "replicates", "flags", "error"]
    _emit(_render(rows, columns, config), args.output)
    return 1 if warn else 0


def cmd_simulate(args) -> int:
    params = tuple(args.params)
    config = RunConfig(
        command="simulate",
        seed=args.seed,
        output=args.output,
        family=args.family,
        params=params,
        n=args.n,
        censor_quantile=args.censor_quantile,
    )
    if args.n < 1:
        raise ParameterError(f"n must be >= 1, got {args.n}")
    copula = make_copula(args.family, params)
    uv = copula.sample(args.n, args.seed)
    if args.censor_quantile is None:
        write_paired_sample(args.output, uv, np.ones_like(uv, dtype=int), uv[:, 0], uv[:, 1])
    else:
        q = args.censor_quantile
        if not 0.0 < q < 1.0:
            raise ParameterError(f"censor quantile must be in (0, 1), got {q}")
        x_obs = [TimeObservation(min(t, q), t <= q) for t in uv[:, 0]]
        y_obs = [TimeObservation(min(t, q), t <= q) for t in uv[:, 1]]
        puv, deltas = pseudo_observations(x_obs, y_obs, censored=True)
        write_paired_sample(
            args.output,
            puv,
            deltas,
            np.array([o.time for o in x_obs]),
            np.array([o.time for o in y_obs]),
        )
    sys.stderr.write(f"wrote {args.n} draws to {args.output} (seed={args.seed})\n")
    return 0


def cmd_surface(args) -> int:
    if args.grid < 2:
        raise ParameterError(f"grid resolution must be >= 2, got {args.grid}")
    config = RunConfig(
        command="surface",
        seed=args.seed,
        format=args.format,
        output=args.output,
        family=args.family,
        params=tuple(args.params),
        grid=args.grid,
    )
    copula = make_copula(args.family, args.params)
    axis = np.linspace(0.0, 1.0, args.grid)
    rows = []
    for gu in axis:
        for gv in axis:
            rows.append({"u": float(gu), "v": float(gv), "c": float(copula.cdf(gu, gv))})
    _emit(_render(rows, ["u", "v", "c"], config), args.output)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mocop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0, help="random seed recorded in all outputs")
        p.add_argument("--format", choices=["table", "json", "csv"], default="table")
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    p = sub.add_parser("pair", help="pair two country files into a paired-sample file")
    p.add_argument("country_a")
    p.add_argument("country_b")
    p.add_argument("--rule", choices=["by-assets", "by-distress"], default="by-assets")
    p.add_argument("--censoring", choices=["complete", "censored"], default="censored")
    p.add_argument("--origin-offset", type=int, default=1, help="time assigned to the first panel year")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("fit", help="fit copula families to a paired-sample file")
    p.add_argument("pairs")
    p.add_argument("--families", default=DEFAULT_FAMILIES)
    p.add_argument("--censored", action="store_true", help="censored MO estimator; other families use the fully observed pairs")
    p.add_argument("--tstar-mode", choices=["log", "literal"], default="log")
    p.add_argument("--tstar", type=float, default=None, help="threshold time for literal mode")
    p.add_argument("--tie-tol", type=float, default=0.0)
    add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gof", help="bootstrap goodness of fit per family")
    p.add_argument("pairs")
    p.add_argument("--families", default=DEFAULT_FAMILIES)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--tie-tol", type=float, default=0.0)
    add_common(p)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("simulate", help="draw pairs from a copula")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--params", type=float, nargs="+", required=True)
    p.add_argument("-n", type=int, required=True)
    p.add_argument(
        "--censor-quantile",
        type=float,
        default=None,
        help="export in the time domain with type-I censoring at this quantile",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("surface", help="CDF values on a regular grid for contour plotting")
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--params", type=float, nargs="+", required=True)
    p.add_argument("--grid", type=int, required=True)
    add_common(p)
    p.set_defaults(func=cmd_surface)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (IngestError, SampleError, ParameterError, FileNotFoundError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
