"""Command-line front end.

Subcommands::

    pcbsde problems
    pcbsde solve     --problem example2 --a -0.5 --x0 1 --alpha 0.5 --N 64
    pcbsde converge  --problem example1 --out results --svg
    pcbsde stability --problem linear --c 1e-4,1e-3,1e-2 --out results

A flat ``key = value`` config file (``--config``) may supply any option;
command-line flags win. Exit codes: 0 success, 1 runtime or numerical
failure, 2 usage error.
"""

import argparse
import csv
from dataclasses import dataclass
import io
import logging
from pathlib import Path
import sys
from typing import Optional, Tuple

from .analysis import run_convergence_study, worker_count
from .errors import ConfigurationError, NumericalEvaluationError
from .plot import report_svg
from .problems import BUILTINS, get_problem
from .scheme import SchemeParams, solve
from .stability import PerturbationSpec, deviation, solve_perturbed

log = logging.getLogger("pcbsde")

DEFAULT_ALPHAS = (0.25, 0.5, 0.75, 1.0)
DEFAULT_NS = (8, 16, 32, 64, 128)
DEFAULT_CS = (1e-4, 1e-3, 1e-2)

# config-file key -> RunConfig attribute
CONFIG_KEYS = {
    "problem": "problem",
    "a": "a",
    "x0": "x0",
    "alpha": "alphas",
    "N": "Ns",
    "quadrature.K": "K",
    "grid.halfwidth_sigmas": "halfwidth_sigmas",
    "grid.points": "grid_points",
    "output": "output",
    "svg": "emit_svg",
    "timings": "timings",
    "stability.c": "cs",
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    problem: str = "example1"
    a: Optional[float] = None
    x0: Optional[float] = None
    alphas: Tuple[float, ...] = DEFAULT_ALPHAS
    Ns: Tuple[int, ...] = DEFAULT_NS
    K: int = 12
    halfwidth_sigmas: float = 6.0
    grid_points: int = SchemeParams.grid_points
    output: Optional[Path] = None
    emit_svg: bool = False
    timings: bool = True
    cs: Tuple[float, ...] = DEFAULT_CS

    def params(self, alpha):
        return SchemeParams(alpha=alpha, K=self.K, halfwidth_sigmas=self.halfwidth_sigmas,
                            grid_points=self.grid_points)


def _floats(text):
    try:
        return tuple(float(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _ints(text):
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _scalar(kind):
    def conv(text):
        try:
            return kind(text)
        except ValueError:
            raise UsageError(f"invalid value {text!r}") from None
    return conv


CONVERTERS = {
    "problem": str,
    "a": _scalar(float),
    "x0": _scalar(float),
    "alphas": _floats,
    "Ns": _ints,
    "K": _scalar(int),
    "halfwidth_sigmas": _scalar(float),
    "grid_points": _scalar(int),
    "output": Path,
    "emit_svg": _bool,
    "timings": _bool,
    "cs": _floats,
}


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        attr = CONFIG_KEYS[key]
        values[attr] = CONVERTERS[attr](value)
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="pcbsde", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-run progress")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    sub.add_parser("problems", help="list built-in problems")
    for name, helptext in (("solve", "solve and print Y0, Z0"),
                           ("converge", "run a convergence study, write CSV/SVG"),
                           ("stability", "perturbation sweep, write CSV")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", type=Path, help="key = value config file")
        p.add_argument("--problem", choices=sorted(BUILTINS))
        p.add_argument("--a", type=float)
        p.add_argument("--x0", type=float)
        p.add_argument("--alpha", dest="alphas", type=_floats, help="comma-separated alpha values")
        p.add_argument("--N", dest="Ns", type=_ints, help="comma-separated step counts")
        p.add_argument("--K", type=int, help="Gauss-Hermite order")
        p.add_argument("--halfwidth-sigmas", type=float)
        p.add_argument("--grid-points", type=int)
        p.add_argument("--out", dest="output", type=Path, help="output directory")
        if name == "converge":
            p.add_argument("--svg", dest="emit_svg", action="store_true", default=None)
        if name in ("converge", "stability"):
            p.add_argument("--no-timings", dest="timings", action="store_false", default=None,
                           help="write NA instead of wall times (byte-reproducible output)")
        if name == "stability":
            p.add_argument("--c", dest="cs", type=_floats, help="comma-separated perturbation sizes")
    return parser


def parse_config(argv):
    """Build a validated :class:`RunConfig`; raises :class:`UsageError`."""
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code == 0:
            raise
        raise UsageError("invalid command line") from None

    cfg = RunConfig(subcommand=ns.subcommand)
    if ns.subcommand == "problems":
        return cfg, ns.verbose

    values = read_config_file(ns.config) if ns.config else {}
    for attr in CONVERTERS:
        flag = getattr(ns, attr, None)
        if flag is not None:
            values[attr] = flag
    for attr, v in values.items():
        setattr(cfg, attr, v)

    if cfg.problem not in BUILTINS:
        raise UsageError(f"unknown problem {cfg.problem!r}")
    if not cfg.alphas or any(not 0 < a <= 1 for a in cfg.alphas):
        raise UsageError(f"alpha values must lie in (0, 1], got {cfg.alphas}")
    if not cfg.Ns or any(n < 1 for n in cfg.Ns):
        raise UsageError(f"N values must be positive, got {cfg.Ns}")
    if cfg.subcommand == "stability" and any(c < 0 for c in cfg.cs):
        raise UsageError(f"perturbation sizes must be non-negative, got {cfg.cs}")
    try:
        get_problem(cfg.problem, cfg.a, cfg.x0)
        for alpha in cfg.alphas:
            cfg.params(alpha)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    return cfg, ns.verbose


def _num(x):
    return "NA" if x is None else repr(float(x))


def report_csv(report, timings=True):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["N", "h", "err_y", "err_z", "runtime_s"])
    for r in report.rows:
        w.writerow([r.N, _num(r.h), _num(r.err_y), _num(r.err_z), _num(r.wall_time) if timings else "NA"])
    w.writerow(["CR_y", _num(report.cr_y)])
    w.writerow(["CR_z", _num(report.cr_z)])
    return buf.getvalue()


def parse_report_csv(text):
    """Inverse of :func:`report_csv`: rows as dicts plus the two rates."""
    rows, rates = [], {}
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    for rec in reader:
        if rec[0] in ("CR_y", "CR_z"):
            rates[rec[0]] = None if rec[1] == "NA" else float(rec[1])
            continue
        row = dict(zip(header, rec))
        rows.append({k: (int(v) if k == "N" else None if v == "NA" else float(v)) for k, v in row.items()})
    return rows, rates


def _stem(report):
    return f"{report.problem}_{report.alpha:g}"


def _write(path, text):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc
    return path


def emit_report(report, directory, emit_svg=False, timings=True):
    """Write ``<problem>_<alpha>.csv`` (and ``.svg``); returns the paths."""
    directory = Path(directory)
    paths = [_write(directory / f"{_stem(report)}.csv", report_csv(report, timings))]
    if emit_svg:
        paths.append(_write(directory / f"{_stem(report)}.svg", report_svg(report)))
    return paths


def _cmd_problems(cfg, out):
    for name, factory in sorted(BUILTINS.items()):
        doc = (factory.__doc__ or "").strip().splitlines()[0]
        print(f"{name:10s} {doc}", file=out)


def _cmd_solve(cfg, out):
    problem = get_problem(cfg.problem, cfg.a, cfg.x0)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["problem", "alpha", "N", "y0", "z0", "err_y", "err_z", "out_of_domain", "runtime_s"])
    for alpha in cfg.alphas:
        params = cfg.params(alpha)
        for N in cfg.Ns:
            r = solve(problem, params, N)
            w.writerow([problem.name, repr(alpha), N, _num(r.y0), _num(r.z0), _num(r.err_y), _num(r.err_z),
                        r.out_of_domain, f"{r.wall_time:.3f}"])


def _cmd_converge(cfg, out):
    problem = get_problem(cfg.problem, cfg.a, cfg.x0)
    workers = worker_count()
    for alpha in cfg.alphas:
        report = run_convergence_study(problem, cfg.params(alpha), cfg.Ns, workers=workers)
        print(f"{problem.name} alpha={alpha:g}  CR_y={_num(report.cr_y)}  CR_z={_num(report.cr_z)}", file=out)
        if cfg.output is not None:
            for p in emit_report(report, cfg.output, cfg.emit_svg, cfg.timings):
                print(f"  wrote {p}", file=out)


def stability_rows(problem, params, Ns, cs):
    """``(c, N, DeviationReport)`` for a constant generator perturbation ``c``."""
    rows = []
    for N in Ns:
        base = solve(problem, params, N, keep_fields=True)
        for c in cs:
            pert = solve_perturbed(problem, params, N, PerturbationSpec.constant(f=c))
            rows.append((c, N, deviation(base, pert)))
    return rows


def _cmd_stability(cfg, out):
    problem = get_problem(cfg.problem, cfg.a, cfg.x0)
    for alpha in cfg.alphas:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["c", "N", "dev", "dev_y0", "dev_z_sum"])
        for c, N, rep in stability_rows(problem, cfg.params(alpha), cfg.Ns, cfg.cs):
            w.writerow([repr(c), N, _num(rep.dev), _num(rep.dev_y0), _num(rep.dev_z_sum)])
        if cfg.output is None:
            print(f"# {problem.name} alpha={alpha:g}", file=out)
            out.write(buf.getvalue())
        else:
            path = _write(Path(cfg.output) / f"stability_{problem.name}_{alpha:g}.csv", buf.getvalue())
            print(f"wrote {path}", file=out)


COMMANDS = {
    "problems": _cmd_problems,
    "solve": _cmd_solve,
    "converge": _cmd_converge,
    "stability": _cmd_stability,
}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    try:
        cfg, verbose = parse_config(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(f"pcbsde: usage error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[cfg.subcommand](cfg, out)
    except ConfigurationError as exc:
        print(f"pcbsde: usage error: {exc}", file=sys.stderr)
        return 2
    except (NumericalEvaluationError, OSError) as exc:
        print(f"pcbsde: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
