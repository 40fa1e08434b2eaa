"""Independent reference computations used to check the main code paths."""

from __future__ import annotations

import math

import numpy as np
import scipy.integrate
import scipy.linalg


def natural_cubic_spline(x, y):
    """Natural cubic spline through (x, y), extended linearly beyond the ends.

    Second derivatives M solve the usual tridiagonal system with M_0 = M_n = 0.
    Returns a vectorized callable.
    """
    order = np.argsort(x)
    x = np.asarray(x, dtype=float)[order]
    y = np.asarray(y, dtype=float)[order]
    n = len(x)
    h = np.diff(x)
    M = np.zeros(n)
    if n > 2:
        ab = np.zeros((3, n - 2))
        ab[0, 1:] = h[1:-1]
        ab[1] = 2 * (h[:-1] + h[1:])
        ab[2, :-1] = h[1:-1]
        rhs = 6 * (np.diff(y[1:]) / h[1:] - np.diff(y[:-1]) / h[:-1])
        M[1:-1] = scipy.linalg.solve_banded((1, 1), ab, rhs)
    slope0 = (y[1] - y[0]) / h[0] - h[0] * (2 * M[0] + M[1]) / 6
    slope1 = (y[-1] - y[-2]) / h[-1] + h[-1] * (M[-2] + 2 * M[-1]) / 6

    def s(t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(x, t) - 1, 0, n - 2)
        a, b = x[i], x[i + 1]
        hi = b - a
        u, v = b - t, t - a
        inside = (M[i] * u**3 + M[i + 1] * v**3) / (6 * hi) + (y[i] / hi - M[i] * hi / 6) * u
        inside = inside + (y[i + 1] / hi - M[i + 1] * hi / 6) * v
        out = np.where(t < x[0], y[0] + slope0 * (t - x[0]), inside)
        return np.where(t > x[-1], y[-1] + slope1 * (t - x[-1]), out)

    return s


def fourier_transform_1d(g, omega: float, upper: float = np.inf) -> float:
    """(2 pi)^(-1/2) int g(x) exp(-i omega x) dx for an even, integrable g.

    Uses the cosine-weighted QUADPACK routines on [0, upper). Pass a finite
    ``upper`` for integrands that decay faster than exponentially, where
    the infinite-range cycle extrapolation breaks down.
    """
    if omega == 0:
        val, _ = scipy.integrate.quad(g, 0, upper, epsabs=0, epsrel=1e-12, limit=400)
    elif np.isinf(upper):
        val, _ = scipy.integrate.quad(g, 0, upper, weight="cos", wvar=abs(omega), epsabs=1e-15, limlst=200)
    else:
        val, _ = scipy.integrate.quad(g, 0, upper, weight="cos", wvar=abs(omega), epsabs=0, epsrel=1e-10, limit=400)
    return 2 * val / math.sqrt(2 * math.pi)
