"""Perturbed scheme and the discrete stability functional.

The perturbed run is the ordinary solver applied to a problem whose
generator and terminal data carry the perturbations, so both runs share
every code path.
"""

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .errors import ConfigurationError
from .scheme import solve


def _zero3(t, y, z):
    return np.zeros(np.broadcast(np.asarray(y), np.asarray(z)).shape)[()]


def _zero1(x):
    return np.zeros(np.shape(x))[()]


@dataclass(frozen=True)
class PerturbationSpec:
    """Generator perturbation ``eps_f(t, y, z)`` and terminal shifts for ``Y_N`` and ``Z_N``."""

    eps_f: Callable = _zero3
    eps_yN: Callable = _zero1
    eps_zN: Callable = _zero1

    @classmethod
    def constant(cls, f=0.0, yN=0.0, zN=0.0):
        def eps_f(t, y, z):
            return np.full(np.broadcast(np.asarray(y), np.asarray(z)).shape, float(f))[()]

        return cls(
            eps_f=eps_f,
            eps_yN=lambda x: np.full(np.shape(x), float(yN))[()],
            eps_zN=lambda x: np.full(np.shape(x), float(zN))[()],
        )

    def apply(self, problem):
        f, phi, zeta = problem.generator, problem.terminal_y, problem.terminal_z
        eps_f, eps_y, eps_z = self.eps_f, self.eps_yN, self.eps_zN

        # exact solutions belong to the unperturbed problem
        return replace(
            problem,
            name=problem.name + "+perturbed",
            generator=lambda t, y, z: f(t, y, z) + eps_f(t, y, z),
            terminal_y=lambda x: phi(x) + eps_y(x),
            terminal_z=lambda x: zeta(x) + eps_z(x),
            exact_y=None,
            exact_z=None,
        )


@dataclass(frozen=True)
class DeviationReport:
    h: float
    dev_y: np.ndarray  # sup over grid of |eps_y,i|, i = 0..N
    dev_z: np.ndarray  # sup over grid of |eps_z,i|, i = 0..N
    y_at_x0: float
    z_at_x0: float

    @property
    def dev_y0(self):
        return float(self.dev_y[0] ** 2)

    @property
    def dev_z_sum(self):
        return float(self.h * np.sum(self.dev_z[:-1] ** 2))

    @property
    def dev(self):
        """``sup|eps_y,0|^2 + h * sum_{l<N} sup|eps_z,l|^2``."""
        return self.dev_y0 + self.dev_z_sum


def solve_perturbed(problem, params, N, pert, rule=None):
    return solve(pert.apply(problem), params, N, keep_fields=True, rule=rule)


def deviation(base, pert):
    """Per-level sup-norm deviations between two runs on the same mesh and grid."""
    if base.fields is None or pert.fields is None:
        raise ConfigurationError("deviation needs results solved with keep_fields=True")
    if len(base.fields) != len(pert.fields):
        raise ConfigurationError(f"mesh mismatch: {len(base.fields) - 1} vs {len(pert.fields) - 1} steps")
    g0, g1 = base.fields[0].grid, pert.fields[0].grid
    if g0 != g1:
        raise ConfigurationError("grid mismatch between runs")
    for a, b in zip(base.fields, pert.fields):
        if a.time != b.time:
            raise ConfigurationError(f"time level mismatch: {a.time} vs {b.time}")

    dev_y = np.array([np.max(np.abs(b.y_values - a.y_values)) for a, b in zip(base.fields, pert.fields)])
    dev_z = np.array([np.max(np.abs(b.z_values - a.z_values)) for a, b in zip(base.fields, pert.fields)])
    N = len(base.fields) - 1
    h = (base.fields[-1].time - base.fields[0].time) / N
    return DeviationReport(h, dev_y, dev_z, pert.y0 - base.y0, pert.z0 - base.z0)
