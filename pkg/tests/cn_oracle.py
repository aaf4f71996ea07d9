"""Crank-Nicolson predictor-corrector written directly, for cross-checking.

Independent of the package internals: nodes come from numpy's
``hermgauss``, interpolation from scipy's not-a-knot ``CubicSpline`` with
hand-rolled linear extrapolation, and the alpha = 1 update is written out
term by term::

    Yp = E[Y' + h f'],  Zp = E[(Y' + h f') dW] / h
    Y  = E[Y'] + h/2 f(t, Yp, Zp) + h/2 E[f']
    Z  = 2/h E[Y' dW] + E[f' dW] - E[Z']

Only valid for b = 0 and sigma = 1 (the built-in benchmarks).
"""

import math

import numpy as np
from scipy.interpolate import CubicSpline


class _LinearTails:
    def __init__(self, x, y):
        self.x = x
        self.s = CubicSpline(x, y, bc_type="not-a-knot")
        self.d = self.s.derivative()
        self.lo, self.hi = x[0], x[-1]
        self.ylo, self.yhi = y[0], y[-1]
        self.dlo, self.dhi = float(self.d(self.lo)), float(self.d(self.hi))

    def __call__(self, q):
        out = self.s(q)
        out = np.where(q < self.lo, self.ylo + self.dlo * (q - self.lo), out)
        return np.where(q > self.hi, self.yhi + self.dhi * (q - self.hi), out)


def crank_nicolson(problem, N, K=12, M=513, halfwidth_sigmas=6.0):
    """Return ``(x_grid, Y0, Z0)`` arrays at t = 0."""
    T = problem.terminal_time
    h = T / N
    nodes, weights = np.polynomial.hermite.hermgauss(K)
    weights = weights / math.sqrt(math.pi)
    hw = halfwidth_sigmas * math.sqrt(T) + math.sqrt(2 * h) * nodes.max()
    x = problem.x0 + np.linspace(-hw, hw, M)
    dw = math.sqrt(2 * h) * nodes           # Brownian increment at each node
    q = x[:, None] + dw[None, :]            # (M, K) abscissas

    y = problem.terminal_y(x)
    z = problem.terminal_z(x)
    f = problem.generator
    for i in range(N - 1, -1, -1):
        t, t1 = i * T / N, (i + 1) * T / N
        Ys, Zs = _LinearTails(x, y), _LinearTails(x, z)
        Yq, Zq = Ys(q), Zs(q)
        fq = f(t1, Yq, Zq)

        E_Y = Yq @ weights
        E_f = fq @ weights
        E_Z = Zq @ weights
        E_YdW = Yq @ (weights * dw)
        E_fdW = fq @ (weights * dw)

        y_pred = E_Y + h * E_f
        z_pred = (E_YdW + h * E_fdW) / h

        y = E_Y + 0.5 * h * f(t, y_pred, z_pred) + 0.5 * h * E_f
        z = (2.0 / h) * E_YdW + E_fdW - E_Z
    return x, y, z
