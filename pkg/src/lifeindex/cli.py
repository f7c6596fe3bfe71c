"""Command-line front end.

Exit codes: 0 success, 1 input or validation problem (including usage
errors), 2 numerical or constraint failure.

Scenario arguments are file paths. ``@name`` refers to a bundled synthetic
scenario (``@us_like``, ``@china_like``, ``@sweden_like``). A relative path
that does not exist in the working directory is also looked up in
``$LIFEINDEX_CONFIG_DIR``.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from . import __version__
from .allocator import CATEGORY_NAMES, SOLVERS, optimize
from .errors import (
    ComputationError,
    CoverageError,
    InputError,
    LifeIndexError,
    ParseError,
    SeriesLookupError,
)
from .profiles_io import atomic_write_text, canonical_json, load_scenario
from .reports import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    REPORT_FIELDS,
    MetricReport,
    earliest_computable_year,
    evaluate,
)

CONFIG_DIR_ENV = "LIFEINDEX_CONFIG_DIR"
DATA_DIR = Path(__file__).resolve().parent / "data"
EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2


class UsageError(InputError):
    """Bad command-line usage."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def resolve_scenario_path(arg: str) -> Path:
    if arg.startswith("@"):
        return DATA_DIR / f"{arg[1:]}.scenario.json"
    path = Path(arg)
    if not path.is_absolute() and not path.exists():
        config_dir = os.environ.get(CONFIG_DIR_ENV)
        if config_dir and (Path(config_dir) / path).exists():
            return Path(config_dir) / path
    return path


def _load(arg: str):
    return load_scenario(resolve_scenario_path(arg))


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "; ".join(str(v) for v in value)
    return str(value)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        atomic_write_text(out, text)
    else:
        sys.stdout.write(text)


def _warn(messages) -> None:
    for msg in messages:
        print(f"warning: {msg}", file=sys.stderr)


# --------------------------------------------------------------------------
# commands


def cmd_evaluate(args) -> int:
    scenario = _load(args.scenario)
    report = evaluate(
        scenario, args.year, samples=args.samples, seed=args.seed,
        quadrature=args.quadrature, workers=args.workers,
    )
    _warn(report.warnings)
    _emit(canonical_json(report.to_dict()), args.out)
    return EXIT_OK


def ranking(reports: list[MetricReport]) -> list[int]:
    """Input indices ordered by descending l_index; ties keep input order."""
    return sorted(range(len(reports)), key=lambda i: -reports[i].l_index)


def cmd_compare(args) -> int:
    if len(args.scenarios) < 2:
        raise UsageError("compare needs at least two scenarios")
    reports = []
    for arg in args.scenarios:
        try:
            scenario = _load(arg)
            reports.append(evaluate(
                scenario, samples=args.samples, seed=args.seed, quadrature=args.quadrature,
                workers=args.workers,
            ))
        except LifeIndexError as exc:
            raise _in_file(exc, arg) from exc
    order = ranking(reports)
    rank = {i: r + 1 for r, i in enumerate(order)}
    for rep in reports:
        _warn(f"{rep.country}: {w}" for w in rep.warnings)

    rows = [{"rank": rank[i], "input_index": i, "scenario": arg, **reports[i].to_dict()}
            for i, arg in enumerate(args.scenarios)]
    doc = {"rows": rows, "ranking": [rows[i]["country"] for i in order]}
    header = ("rank", "input_index", "scenario", *REPORT_FIELDS)
    wide = _csv_text(header, ([row[h] for h in header] for row in rows))
    metrics = [f for f in REPORT_FIELDS if f not in ("country", "year", "warnings")]
    long_rows = ((row["input_index"], row["country"], row["year"], m, row[m]) for row in rows for m in metrics)
    long = _csv_text(("input_index", "country", "year", "metric", "value"), long_rows)
    if args.out:
        atomic_write_text(f"{args.out}.json", canonical_json(doc))
        atomic_write_text(f"{args.out}.csv", wide)
        atomic_write_text(f"{args.out}_long.csv", long)
    else:
        sys.stdout.write(wide)
    return EXIT_OK


class ScenarioInputError(InputError):
    """An input error raised while processing one scenario of several."""


class ScenarioComputationError(ComputationError):
    """A computation error raised while processing one scenario of several."""


def _in_file(exc: LifeIndexError, arg: str) -> LifeIndexError:
    """Wrap ``exc`` in the same exit-code category, naming the scenario file."""
    cls = ScenarioInputError if isinstance(exc, InputError) else ScenarioComputationError
    wrapped = cls(f"scenario {arg}: {type(exc).__name__}: {exc}")
    wrapped.issues = getattr(exc, "issues", None)
    wrapped.source = arg
    return wrapped


def cmd_history(args) -> int:
    scenario = _load(args.scenario)
    first, last = args.year_from, args.year_to
    if last < first:
        raise UsageError(f"--to ({last}) is before --from ({first})")
    reports, errors = [], []
    for year in range(first, last + 1):
        try:
            reports.append(evaluate(
                scenario, year, samples=args.samples, seed=args.seed,
                quadrature=args.quadrature, workers=args.workers,
            ))
        except (CoverageError, SeriesLookupError) as exc:
            errors.append((year, exc))
    if errors:
        earliest = earliest_computable_year(scenario)
        lines = [f"{year}: {exc}" for year, exc in errors]
        lines.append(
            "no year of this profile is computable" if earliest is None
            else f"earliest computable year is {earliest}"
        )
        if args.strict:
            raise CoverageError(errors[0][0], "history coverage gaps:\n  " + "\n  ".join(lines))
        _warn(f"omitted {line}" for line in lines)
    for rep in reports:
        _warn(f"{rep.year}: {w}" for w in rep.warnings)
    rows = ([getattr(rep, f) for f in REPORT_FIELDS] for rep in reports)
    _emit(_csv_text(REPORT_FIELDS, rows), args.out)
    return EXIT_OK


def _plan_table(plan, prob) -> str:
    lines = [f"{'category':<26}{'baseline':>16}{'increment':>16}{'total':>16}"]
    for name, base, inc in zip(CATEGORY_NAMES, prob.baseline, plan.x.f):
        lines.append(f"{name:<26}{base:>16.2f}{inc:>16.2f}{base + inc:>16.2f}")
    lines.append(f"{'sum of increments':<26}{'':>16}{plan.x.total():>16.2f}")
    p_ei, p_mr, p_hc = plan.components
    lines.append(
        f"solver={plan.solver} objective={plan.objective:.12g} "
        f"p_ei={p_ei:.6g} p_mr={p_mr:.6g} p_hc={p_hc:.6g} feasible={plan.feasible}"
    )
    return "\n".join(lines) + "\n"


def cmd_optimize(args) -> int:
    scenario = _load(args.scenario)
    prob = scenario.allocation_problem(args.budget)
    step = args.step if args.step is not None else scenario.allocation.step
    dims = args.dims
    if args.solver == "grid" and dims is None:
        dims = [1, 2, 3]
    plan = optimize(prob, solver=args.solver, step=step, dims=dims, chunks=args.chunks)
    doc = plan.to_dict(prob)
    doc["scenario"] = str(args.scenario)
    if args.out:
        atomic_write_text(args.out, canonical_json(doc))
    sys.stdout.write(_plan_table(plan, prob))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser and entry point


def _dims(text: str) -> list[int]:
    try:
        dims = [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated category numbers, got {text!r}")
    if not dims:
        raise argparse.ArgumentTypeError("--dims needs at least one category")
    return dims


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return value


def _add_mc_flags(p) -> None:
    p.add_argument("--samples", type=_positive_int, default=DEFAULT_SAMPLES,
                   help=f"Monte Carlo samples for P_ei (default {DEFAULT_SAMPLES})")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="64-bit unsigned RNG seed")
    p.add_argument("--quadrature", action="store_true", help="use deterministic quadrature for P_ei")
    p.add_argument("--workers", type=_positive_int, default=1, help="Monte Carlo worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lifeindex", description="Life-index health system evaluation and budget allocation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--error-format", choices=("text", "json"), default="text",
                        help="format of error reports on stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="compute all metrics for one profile year")
    p.add_argument("scenario")
    p.add_argument("--year", type=int, default=None)
    _add_mc_flags(p)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="evaluate and rank several scenarios")
    p.add_argument("scenarios", nargs="+")
    _add_mc_flags(p)
    p.add_argument("--out", help="output prefix: writes PREFIX.json, PREFIX.csv and PREFIX_long.csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("history", help="per-year metrics over an inclusive range (CSV)")
    p.add_argument("scenario")
    p.add_argument("--from", dest="year_from", type=int, required=True)
    p.add_argument("--to", dest="year_to", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--strict", dest="strict", action="store_true", default=True,
                      help="fail on any coverage gap (default)")
    mode.add_argument("--lenient", dest="strict", action="store_false",
                      help="omit uncovered years with a warning")
    _add_mc_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_history)

    p = sub.add_parser("optimize", help="allocate an extra budget across the nine spending categories")
    p.add_argument("scenario")
    p.add_argument("--budget", type=float, default=None, help="extra budget (money units); default from scenario")
    p.add_argument("--solver", choices=SOLVERS, default="ascent",
                   help="greedy, ascent (greedy then projected ascent; default) or grid")
    p.add_argument("--step", type=float, default=None, help="greedy chunk size")
    p.add_argument("--dims", type=_dims, default=None, help="comma-separated 1-based categories, e.g. 1,2,3")
    p.add_argument("--chunks", type=_positive_int, default=10, help="grid resolution (grid solver)")
    p.add_argument("--out", help="write the JSON plan here")
    p.set_defaults(func=cmd_optimize)
    return parser


def _report_error(exc: LifeIndexError, fmt: str) -> None:
    kind = type(exc).__name__
    issues = getattr(exc, "issues", None) or []
    if fmt == "json":
        doc = {"error": kind, "message": str(exc)}
        if issues:
            doc["issues"] = [{"path": p, "message": m} for p, m in issues]
        if isinstance(exc, ParseError):
            doc["line"], doc["column"] = exc.line, exc.column
        sys.stderr.write(canonical_json(doc))
        return
    if issues:
        source = getattr(exc, "source", None)
        print(f"error: {kind}: {len(issues)} issue(s){f' in {source}' if source else ''}", file=sys.stderr)
        for p, m in issues:
            print(f"  {p or '<document>'}: {m}", file=sys.stderr)
    else:
        print(f"error: {kind}: {exc}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lifeindex: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InputError as exc:
        _report_error(exc, args.error_format)
        return EXIT_INPUT
    except ComputationError as exc:
        _report_error(exc, args.error_format)
        return EXIT_COMPUTE
    except LifeIndexError as exc:  # pragma: no cover - every error is one of the two kinds
        _report_error(exc, args.error_format)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
