"""Convergence-rate estimation and the convergence-study driver."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging
import os
from typing import List, Optional

import numpy as np

from .errors import ConfigurationError
from .quadrature import hermite_rule
from .scheme import solve

log = logging.getLogger(__name__)

ERROR_FLOOR = 1e-11


def convergence_rate(hs, errs):
    """Least-squares slope of ``ln(errs)`` against ``ln(hs)``."""
    hs = np.asarray(hs, dtype=float)
    errs = np.asarray(errs, dtype=float)
    if hs.shape != errs.shape or hs.ndim != 1:
        raise ConfigurationError(f"hs and errs must be 1-D of equal length, got {hs.shape} and {errs.shape}")
    if hs.size < 2:
        raise ConfigurationError("need at least two points for a convergence rate")
    if not (np.all(hs > 0) and np.all(errs > 0)):
        raise ConfigurationError("step sizes and errors must be positive")
    lh, le = np.log(hs), np.log(errs)
    lh_c = lh - lh.mean()
    return float(np.dot(lh_c, le - le.mean()) / np.dot(lh_c, lh_c))


@dataclass
class ConvergenceRow:
    N: int
    h: float
    err_y: float
    err_z: float
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class ConvergenceReport:
    problem: str
    alpha: float
    rows: List[ConvergenceRow]
    cr_y: Optional[float] = None
    cr_z: Optional[float] = None
    # N values whose error sat below ERROR_FLOOR and was left out of the fit
    floored_y: List[int] = field(default_factory=list)
    floored_z: List[int] = field(default_factory=list)


def _rate_above_floor(rows, attr):
    kept = [r for r in rows if getattr(r, attr) >= ERROR_FLOOR]
    floored = [r.N for r in rows if getattr(r, attr) < ERROR_FLOOR]
    if len(kept) < 2:
        return None, floored
    return convergence_rate([r.h for r in kept], [getattr(r, attr) for r in kept]), floored


def worker_count(env=None):
    """Thread cap from ``BSDE_THREADS`` (unset or 0 means one per CPU)."""
    env = os.environ if env is None else env
    raw = env.get("BSDE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(f"BSDE_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ConfigurationError(f"BSDE_THREADS must be non-negative, got {n}")
    return n or (os.cpu_count() or 1)


def build_report(problem_name, alpha, rows):
    rows = sorted(rows, key=lambda r: r.N)
    cr_y, floored_y = _rate_above_floor(rows, "err_y")
    cr_z, floored_z = _rate_above_floor(rows, "err_z")
    return ConvergenceReport(problem_name, alpha, rows, cr_y, cr_z, floored_y, floored_z)


def run_convergence_study(problem, params, Ns, workers=1):
    """Solve once per ``N`` and regress the errors at ``(0, x0)`` on ``h``."""
    if not problem.has_exact:
        raise ConfigurationError(f"problem {problem.name!r} has no exact solution to measure errors against")
    Ns = sorted(int(n) for n in Ns)
    if not Ns or Ns[0] < 1:
        raise ConfigurationError(f"N values must be positive, got {Ns}")
    rule = hermite_rule(params.K)

    def one(N):
        res = solve(problem, params, N, rule=rule)
        log.info("%s alpha=%g N=%d err_y=%.4e err_z=%.4e (%.2fs)",
                 problem.name, params.alpha, N, res.err_y, res.err_z, res.wall_time)
        return ConvergenceRow(N, problem.terminal_time / N, res.err_y, res.err_z, res.wall_time)

    if workers > 1 and len(Ns) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, Ns))
    else:
        rows = [one(N) for N in Ns]
    return build_report(problem.name, params.alpha, rows)


def loglog_fit_line(hs, errs, slope=None):
    """Intercept (and slope) of a least-squares line in log-log space."""
    lh, le = np.log(hs), np.log(errs)
    if slope is None:
        slope = convergence_rate(hs, errs)
    return slope, float(np.mean(le - slope * lh))
