"""Time mesh, spatial grid and per-level value fields."""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError, NumericalEvaluationError
from .spline import CubicSpline, fit


@dataclass(frozen=True)
class TimeMesh:
    N: int
    T: float
    alpha: float

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigurationError(f"N must be a positive integer, got {self.N}")
        if not 0 < self.alpha <= 1:
            raise ConfigurationError(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def h(self):
        return self.T / self.N

    def time(self, i):
        # i*T/N rather than accumulated sums: t_N == T exactly
        return i * self.T / self.N

    @property
    def times(self):
        return np.array([self.time(i) for i in range(self.N + 1)])

    def intermediate(self, i):
        """``t_{i+1-alpha} = t_i + (1 - alpha) h``; equals ``t_i`` at alpha = 1."""
        if self.alpha == 1:
            return self.time(i)
        return self.time(i) + (1.0 - self.alpha) * self.h


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform odd-sized grid centred on ``x0``.

    ``core_half_width`` is the part of the grid from which one quadrature
    hop is guaranteed to stay inside the hull.
    """

    center: float
    half_width: float
    M: int
    core_half_width: float

    @property
    def points(self):
        j = np.arange(self.M) - (self.M - 1) // 2
        return self.center + j * (2.0 * self.half_width / (self.M - 1))

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.M - 1)

    def core_mask(self):
        return np.abs(self.points - self.center) <= self.core_half_width


def build_grid(problem, params, N, rule=None):
    """Grid of ``params.grid_points`` points over ``x0 +- (c * sigma_max * sqrt(T) + margin)``.

    The margin is one quadrature excursion over a full step,
    ``sqrt(2h) * max|node| * sigma_max + |b|_max * h``.
    """
    from .quadrature import hermite_rule

    if rule is None:
        rule = hermite_rule(params.K)
    T = problem.terminal_time
    h = T / N
    c = params.halfwidth_sigmas
    ts = np.linspace(0.0, T, 9)
    xs = problem.x0 + c * math.sqrt(T) * np.linspace(-1.0, 1.0, 33)
    sigma_max = max(float(np.max(np.abs(np.broadcast_to(problem.diffusion(t, xs), xs.shape)))) for t in ts)
    drift_max = max(float(np.max(np.abs(np.broadcast_to(problem.drift(t, xs), xs.shape)))) for t in ts)
    core = c * sigma_max * math.sqrt(T)
    margin = math.sqrt(2.0 * h) * rule.max_node * sigma_max + drift_max * h
    half_width = core + margin
    if not (half_width > 0 and math.isfinite(half_width)):
        raise ConfigurationError(f"computed grid half-width {half_width!r} is not positive")
    return SpatialGrid(float(problem.x0), half_width, int(params.grid_points), core)


@dataclass(frozen=True)
class ValueField:
    """``(Y, Z)`` on the grid at one time level, with interpolating splines."""

    grid: SpatialGrid
    time: float
    y_values: np.ndarray
    z_values: np.ndarray
    y_spline: CubicSpline
    z_spline: CubicSpline

    def y(self, x):
        return self.y_spline(x)

    def z(self, x):
        return self.z_spline(x)

    @property
    def extrapolations(self):
        return self.y_spline.out_of_domain + self.z_spline.out_of_domain


def field_from_values(grid, t, y_values, z_values, level=None):
    points = grid.points
    for label, vals in (("Y", y_values), ("Z", z_values)):
        bad = ~np.isfinite(vals)
        if np.any(bad):
            j = int(np.flatnonzero(bad)[0])
            where = (level, j) if level is not None else float(points[j])
            raise NumericalEvaluationError(
                f"non-finite {label} at t={t!r}, grid index {j} (x={points[j]!r})", where=where
            )
    y_values = np.array(y_values, dtype=float)
    z_values = np.array(z_values, dtype=float)
    y_values.flags.writeable = False
    z_values.flags.writeable = False
    return ValueField(grid, t, y_values, z_values, fit(points, y_values), fit(points, z_values))


def field_from_functions(grid, t, y_fn, z_fn):
    """Sample ``y_fn`` and ``z_fn`` on the grid and spline them."""
    points = grid.points
    ys = np.broadcast_to(np.asarray(y_fn(points), dtype=float), points.shape)
    zs = np.broadcast_to(np.asarray(z_fn(points), dtype=float), points.shape)
    return field_from_values(grid, t, ys, zs)
