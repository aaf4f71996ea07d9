"""Gauss-Hermite rules and the one-step Gaussian conditional expectations.

Every conditional expectation in the backward scheme is a Gaussian
integral over a single Brownian increment, so two primitives suffice::

    expect(v, x, t, delta)           ~ E[ v(X_{t+delta}) | X_t = x ]
    expect_weighted(v, x, t, delta)  ~ E[ dW * v(X_{t+delta}) | X_t = x ]

The forward transition is a weak Euler step with coefficients frozen at
``(t, x)``; for constant ``b`` and ``sigma`` it is exact.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ConfigurationError, NumericalEvaluationError

MAX_ORDER = 64
_NEWTON_TOL = 1e-15
_NEWTON_MAXIT = 100
_SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class QuadratureRule:
    """Physicists' Gauss-Hermite rule (weight ``exp(-x**2)``)."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def max_node(self):
        return float(self.nodes[-1])


def _hermite_orthonormal(K, x):
    """Orthonormal Hermite values ``p_K(x)`` and ``p_{K-1}(x)``."""
    p1 = np.full_like(x, math.pi ** -0.25)
    p2 = np.zeros_like(x)
    for j in range(K):
        p3 = p2
        p2 = p1
        p1 = x * math.sqrt(2.0 / (j + 1)) * p2 - math.sqrt(j / (j + 1)) * p3
    return p1, p2


def hermite_rule(K):
    """Return the K-point Gauss-Hermite rule.

    Starting guesses are the eigenvalues of the symmetric Jacobi matrix of
    the Hermite recurrence; each root is then polished by Newton iteration
    on the orthonormal three-term recurrence, which also yields the weights.
    """
    if isinstance(K, bool) or not isinstance(K, (int, np.integer)):
        raise ConfigurationError(f"quadrature order must be an integer, got {K!r}")
    K = int(K)
    if not 1 <= K <= MAX_ORDER:
        raise ConfigurationError(f"quadrature order K={K} outside [1, {MAX_ORDER}]")

    if K == 1:
        return QuadratureRule(1, np.array([0.0]), np.array([_SQRT_PI]))

    offdiag = np.sqrt(np.arange(1, K) / 2.0)
    jacobi = np.diag(offdiag, 1) + np.diag(offdiag, -1)
    x = np.sort(np.linalg.eigvalsh(jacobi))

    for _ in range(_NEWTON_MAXIT):
        p, pm1 = _hermite_orthonormal(K, x)
        dp = math.sqrt(2.0 * K) * pm1
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= _NEWTON_TOL * max(1.0, float(np.max(np.abs(x)))):
            break
    else:
        raise NumericalEvaluationError(f"Hermite root iteration did not converge for K={K}")

    _, pm1 = _hermite_orthonormal(K, x)
    w = 2.0 / (math.sqrt(2.0 * K) * pm1) ** 2

    # enforce exact mirror symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if K % 2 == 1:
        x[K // 2] = 0.0
    x.flags.writeable = False
    w.flags.writeable = False
    return QuadratureRule(K, x, w)


def _coefficient(fn, t, x):
    return np.broadcast_to(np.asarray(fn(t, x), dtype=float), np.shape(x))


def _abscissas(x, t, delta, problem, rule):
    """Transition images of ``x`` (shape ``x.shape + (K,)``) and the increments."""
    x = np.asarray(x, dtype=float)
    sigma = _coefficient(problem.diffusion, t, x)
    if np.any(~(sigma > 0)):
        raise ConfigurationError(f"diffusion coefficient must be positive; got {sigma.min()!r} at t={t}")
    drift = _coefficient(problem.drift, t, x)
    dw = math.sqrt(2.0 * delta) * rule.nodes
    images = (x + drift * delta)[..., None] + sigma[..., None] * dw
    return images, dw


def _evaluate(v, images):
    values = np.asarray(v(images), dtype=float)
    values = np.broadcast_to(values, images.shape)
    bad = ~np.isfinite(values)
    if np.any(bad):
        where = float(images[bad].flat[0])
        raise NumericalEvaluationError(f"non-finite integrand at abscissa {where!r}", where=where)
    return values


def expect(v, x, t, delta, problem, rule):
    """``E[v(X_{t+delta}) | X_t = x]`` by Gauss-Hermite quadrature.

    ``v`` must accept a numpy array; ``x`` may be a scalar or an array of
    launch points. ``delta == 0`` returns ``v(x)`` untouched.
    """
    if delta < 0:
        raise ConfigurationError(f"delta must be non-negative, got {delta}")
    if delta == 0:
        x = np.asarray(x, dtype=float)
        return _evaluate(v, x)[()]
    images, _ = _abscissas(x, t, delta, problem, rule)
    values = _evaluate(v, images)
    return (values @ rule.weights) / _SQRT_PI


def expect_weighted(v, x, t, delta, problem, rule):
    """``E[dW * v(X_{t+delta}) | X_t = x]`` with ``dW ~ N(0, delta)``.

    ``delta == 0`` returns exactly zero.
    """
    if delta < 0:
        raise ConfigurationError(f"delta must be non-negative, got {delta}")
    if delta == 0:
        return np.zeros(np.shape(x))[()]
    images, dw = _abscissas(x, t, delta, problem, rule)
    values = _evaluate(v, images)
    return (values @ (rule.weights * dw)) / _SQRT_PI
