"""Decoupled FBSDE problem data and the two built-in benchmarks.

Coefficient functions receive numpy arrays for the state argument and must
broadcast; scalars work too.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from .errors import ConfigurationError

_CONSISTENCY_TOL = 1e-12


def _zero(t, x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _one(t, x):
    return np.ones_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class FbsdeProblem:
    """Forward state ``dX = b dt + sigma dW`` and backward generator ``f``.

    ``terminal_z`` is ``u_x(T, x) * sigma(T, x)``; use
    :func:`terminal_z_from_phi` when no closed form is at hand.
    """

    name: str
    terminal_time: float
    x0: float
    drift: Callable
    diffusion: Callable
    generator: Callable
    terminal_y: Callable
    terminal_z: Callable
    exact_y: Optional[Callable] = None
    exact_z: Optional[Callable] = None

    def __post_init__(self):
        if not self.terminal_time > 0:
            raise ConfigurationError(f"terminal time must be positive, got {self.terminal_time}")
        if not np.isfinite(self.x0):
            raise ConfigurationError(f"x0 must be finite, got {self.x0}")
        xs = self.x0 + np.linspace(-5.0, 5.0, 11)
        T = self.terminal_time
        if self.exact_y is not None:
            gap = np.max(np.abs(self.exact_y(T, xs) - self.terminal_y(xs)))
            if not gap <= _CONSISTENCY_TOL:
                raise ConfigurationError(f"{self.name}: exact_y(T, .) differs from terminal_y by {gap:.3e}")
        if self.exact_z is not None:
            gap = np.max(np.abs(self.exact_z(T, xs) - self.terminal_z(xs)))
            if not gap <= _CONSISTENCY_TOL:
                raise ConfigurationError(f"{self.name}: exact_z(T, .) differs from terminal_z by {gap:.3e}")

    @property
    def has_exact(self):
        return self.exact_y is not None and self.exact_z is not None


def terminal_z_from_phi(terminal_y, diffusion, terminal_time):
    """Central-difference ``Phi'(x) * sigma(T, x)`` with step ``1e-6 * max(1, |x|)``."""

    def terminal_z(x):
        x = np.asarray(x, dtype=float)
        step = 1e-6 * np.maximum(1.0, np.abs(x))
        slope = (terminal_y(x + step) - terminal_y(x - step)) / (2.0 * step)
        return slope * diffusion(terminal_time, x)

    return terminal_z


def example1():
    """``f(y) = -y^3 + 2.5 y^2 - 1.5 y`` with logistic solution in ``W_t + t``.

    The state is the Brownian path itself (``b = 0``, ``sigma = 1``,
    ``x0 = 0``, ``T = 1``).
    """
    T = 1.0

    def generator(t, y, z):
        return -y ** 3 + 2.5 * y ** 2 - 1.5 * y

    def exact_y(t, x):
        return expit(np.add(x, t))

    def exact_z(t, x):
        s = np.add(x, t)
        return expit(s) * expit(-s)

    return FbsdeProblem(
        name="example1",
        terminal_time=T,
        x0=0.0,
        drift=_zero,
        diffusion=_one,
        generator=generator,
        terminal_y=lambda x: exact_y(T, x),
        terminal_z=lambda x: exact_z(T, x),
        exact_y=exact_y,
        exact_z=exact_z,
    )


def example2(a=-0.5, x0=1.0):
    """FitzHugh-Nagumo type generator ``-y^3 + (1 + a) y^2 - a y``.

    ``X = x0 + W``, ``T = 1`` and ``Y_t = 1 / (1 + exp(X_t - (0.5 - a)(T - t)))``.
    """
    T = 1.0
    a = float(a)
    x0 = float(x0)
    shift = 0.5 - a

    def generator(t, y, z):
        return -y ** 3 + (1.0 + a) * y ** 2 - a * y

    def exact_y(t, x):
        return expit(-(np.asarray(x, dtype=float) - shift * (T - np.asarray(t, dtype=float))))

    def exact_z(t, x):
        v = np.asarray(x, dtype=float) - shift * (T - np.asarray(t, dtype=float))
        return -expit(v) * expit(-v)

    return FbsdeProblem(
        name="example2",
        terminal_time=T,
        x0=x0,
        drift=_zero,
        diffusion=_one,
        generator=generator,
        terminal_y=lambda x: expit(-np.asarray(x, dtype=float)),
        terminal_z=lambda x: exact_z(T, x),
        exact_y=exact_y,
        exact_z=exact_z,
    )


def linear(x0=0.0, T=1.0):
    """``f = 0``, ``Phi(x) = x``, ``X = x0 + W``: ``Y_t = X_t`` and ``Z_t = 1``.

    Every step of the scheme is exact here, which makes it a handy
    regression and perturbation baseline.
    """
    return FbsdeProblem(
        name="linear",
        terminal_time=float(T),
        x0=float(x0),
        drift=_zero,
        diffusion=_one,
        generator=lambda t, y, z: np.zeros(np.broadcast(np.asarray(y), np.asarray(z)).shape)[()],
        terminal_y=lambda x: np.asarray(x, dtype=float),
        terminal_z=lambda x: np.ones_like(np.asarray(x, dtype=float)),
        exact_y=lambda t, x: np.asarray(x, dtype=float) + 0.0 * np.asarray(t, dtype=float),
        exact_z=lambda t, x: np.ones(np.broadcast(np.asarray(t), np.asarray(x)).shape)[()],
    )


BUILTINS = {
    "example1": example1,
    "example2": example2,
    "linear": linear,
}


def get_problem(name, a=None, x0=None):
    """Look up a built-in problem by name.

    ``a`` only applies to example2; ``x0`` to example2 and linear.
    """
    if name not in BUILTINS:
        raise ConfigurationError(f"unknown problem {name!r}; choose from {sorted(BUILTINS)}")
    if a is not None and name != "example2":
        raise ConfigurationError(f"{name} takes no parameter 'a'")
    if x0 is not None and name == "example1":
        raise ConfigurationError("example1 has x0 fixed at 0")
    kwargs = {}
    if a is not None:
        kwargs["a"] = a
    if x0 is not None:
        kwargs["x0"] = x0
    return BUILTINS[name](**kwargs)
