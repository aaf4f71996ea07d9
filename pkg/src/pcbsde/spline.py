"""Not-a-knot cubic spline with linear extrapolation outside the knot hull."""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConfigurationError, NumericalEvaluationError


@dataclass(eq=False)
class CubicSpline:
    """Piecewise cubic ``c0 + c1*d + c2*d**2 + c3*d**3`` with ``d = x - knots[j]``.

    ``out_of_domain`` counts evaluations that fell outside
    ``[knots[0], knots[-1]]`` and were linearly extrapolated.
    """

    knots: np.ndarray
    values: np.ndarray
    coeffs: np.ndarray  # shape (4, n - 1)
    slopes: np.ndarray
    out_of_domain: int = field(default=0, compare=False)

    def __call__(self, x):
        return eval_spline(self, x)

    def derivative(self, x, order=1):
        """First or second derivative inside the hull (used by tests)."""
        x = np.asarray(x, dtype=float)
        j = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, len(self.knots) - 2)
        d = x - self.knots[j]
        c0, c1, c2, c3 = self.coeffs[:, j]
        if order == 1:
            return c1 + d * (2.0 * c2 + d * 3.0 * c3)
        if order == 2:
            return 2.0 * c2 + 6.0 * c3 * d
        raise ValueError("order must be 1 or 2")


def fit(knots, values):
    """Fit the not-a-knot interpolating cubic spline."""
    x = np.asarray(knots, dtype=float)
    y = np.asarray(values, dtype=float)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise ConfigurationError(f"knots and values must be 1-D of equal length, got {x.shape} and {y.shape}")
    n = x.size
    if n < 4:
        raise ConfigurationError(f"not-a-knot spline needs at least 4 knots, got {n}")
    dx = np.diff(x)
    if not np.all(dx > 0):
        raise ConfigurationError("knots must be strictly increasing")
    if not np.all(np.isfinite(y)):
        j = int(np.flatnonzero(~np.isfinite(y))[0])
        raise NumericalEvaluationError(f"non-finite spline value at knot {x[j]!r}", where=float(x[j]))

    secant = np.diff(y) / dx

    # Banded system for the knot slopes: rows 0 and n-1 encode the
    # third-derivative continuity at knots 1 and n-2.
    ab = np.zeros((3, n))
    rhs = np.empty(n)
    ab[1, 1:-1] = 2.0 * (dx[:-1] + dx[1:])
    ab[0, 2:] = dx[:-1]
    ab[2, :-2] = dx[1:]
    rhs[1:-1] = 3.0 * (dx[1:] * secant[:-1] + dx[:-1] * secant[1:])

    span = x[2] - x[0]
    ab[1, 0] = dx[1]
    ab[0, 1] = span
    rhs[0] = ((dx[0] + 2.0 * span) * dx[1] * secant[0] + dx[0] ** 2 * secant[1]) / span

    span = x[-1] - x[-3]
    ab[1, -1] = dx[-2]
    ab[2, -2] = span
    rhs[-1] = (dx[-1] ** 2 * secant[-2] + (2.0 * span + dx[-1]) * dx[-2] * secant[-1]) / span

    m = solve_banded((1, 1), ab, rhs, overwrite_ab=True, overwrite_b=True, check_finite=False)

    t = (m[:-1] + m[1:] - 2.0 * secant) / dx
    coeffs = np.vstack([y[:-1], m[:-1], (secant - m[:-1]) / dx - t, t / dx])
    for arr in (x, y, coeffs, m):
        arr.flags.writeable = False
    return CubicSpline(x, y, coeffs, m)


def eval_spline(s, x):
    """Evaluate ``s`` at ``x`` (scalar or array).

    Points left of the hull continue the first piece linearly, points right
    of it continue the last piece linearly; each such point increments
    ``s.out_of_domain``.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        bad = x[~np.isfinite(x)].flat[0]
        raise NumericalEvaluationError(f"non-finite spline argument {bad!r}", where=float(bad))
    knots = s.knots
    lo, hi = knots[0], knots[-1]
    j = np.clip(np.searchsorted(knots, x, side="right") - 1, 0, knots.size - 2)
    d = x - knots[j]
    c0, c1, c2, c3 = s.coeffs[:, j]
    out = c0 + d * (c1 + d * (c2 + d * c3))

    left = x < lo
    right = x >= hi
    if np.any(left) or np.any(right):
        out = np.where(left, s.values[0] + s.slopes[0] * (x - lo), out)
        out = np.where(right, s.values[-1] + s.slopes[-1] * (x - hi), out)
        s.out_of_domain += int(np.count_nonzero(left) + np.count_nonzero(x > hi))
    return out[()]
