import math

import numpy as np
import pytest

from greenkernel.quadrature import integrate_1d, integrate_2d, integrate_cells_1d, integrate_cells_2d


def vec(fn):
    return lambda p: np.atleast_2d(fn(p)).T if np.ndim(fn(p)) == 1 else fn(p)


def test_polynomial_exact():
    res = integrate_1d(lambda p: p**5 - p, [0, 2])
    assert res.total == pytest.approx(2**6 / 6 - 2, rel=1e-14)
    assert res.converged


def test_vector_valued():
    res = integrate_1d(lambda p: np.hstack([np.sin(p), np.exp(p)]), [0, math.pi])
    assert res.values == pytest.approx([2.0, math.exp(math.pi) - 1], rel=1e-12)


def test_kink_at_break():
    res = integrate_1d(lambda p: np.abs(p - 0.3) ** 3, [-1, 0.3, 2])
    assert res.total == pytest.approx((1.3**4 + 1.7**4) / 4, rel=1e-13)


def test_adaptive_refines_sharp_peak():
    res = integrate_1d(lambda p: 1 / (1e-4 + p * p), [-1, 1], rtol=1e-12)
    assert res.total == pytest.approx(2 / 1e-2 * math.atan(1 / 1e-2), rel=1e-10)
    assert res.converged and res.evaluations > 15 * 10


def test_union_of_cells():
    res = integrate_cells_1d(lambda p: p * p, [[-2, -1], [1, 3]])
    assert res.total == pytest.approx(7 / 3 + 26 / 3, rel=1e-14)


def test_depth_cap_reports_nonconvergence():
    res = integrate_1d(lambda p: np.abs(p - 0.1) ** -0.9, [-1, 1], rtol=1e-14, max_depth=3)
    assert not res.converged


def test_infinite_values_are_not_converged():
    # the centre node of the 15-point rule sits exactly on the pole
    with np.errstate(divide="ignore"):
        res = integrate_1d(lambda p: np.abs(p) ** -0.9, [-1, 1])
    assert not res.converged


def test_2d_gaussian():
    res = integrate_2d(lambda p: np.exp(-(p * p).sum(axis=1, keepdims=True)), [-6, 6], [-6, 0, 6])
    assert res.total == pytest.approx(math.pi, rel=1e-11)


def test_2d_cells():
    res = integrate_cells_2d(lambda p: (p[:, :1] * p[:, 1:]) ** 2, [[0, 1, 0, 1], [1, 2, 0, 1]])
    assert res.total == pytest.approx(8 / 9, rel=1e-13)


def test_graded_corner_log_singularity():
    # int_{[0,1]^2} log^2 r = 4 int_0^{pi/4} int_0^{1/cos t} r log^2 r dr dt, done in polar form
    from scipy.integrate import quad

    def inner(t):
        R = 1 / math.cos(t)
        return R * R * (2 * math.log(R) ** 2 - 2 * math.log(R) + 1) / 4

    exact = 2 * quad(inner, 0, math.pi / 4, epsabs=1e-14, epsrel=1e-14)[0]
    f = lambda p: np.log(np.maximum((p * p).sum(axis=1, keepdims=True), 1e-300)) ** 2 / 4
    res = integrate_2d(f, [0, 1], [0, 1], rtol=1e-10, singular=np.zeros((1, 2)))
    assert res.total == pytest.approx(exact, rel=1e-9)
    plain = integrate_2d(f, [0, 1], [0, 1], rtol=1e-10)
    assert res.evaluations < plain.evaluations
