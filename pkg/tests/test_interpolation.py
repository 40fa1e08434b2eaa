import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import CubicSpline

from greenkernel.acceptance import random_sites
from greenkernel.errors import NumericalError, ValidationError
from greenkernel.interpolation import (
    Dataset,
    InterpolationModel,
    cpd_certificate,
    fit,
    gram_seminorm,
    gram_seminorm_squared,
    loocv_bruteforce,
    loocv_error,
    loocv_residuals,
    loocv_scale_sweep,
    moment_residual,
    orthogonality_check,
)
from greenkernel.kernels import GreenKernel, default_catalog
from greenkernel.polyspace import PolySpace

CUBIC = GreenKernel("cubic")
LIN1 = PolySpace.total_degree(1, 1)
TPS = GreenKernel("thin_plate", 2)
LIN2 = PolySpace.total_degree(2, 1)


def test_cubic_spline_through_three_points():
    model = fit(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]))
    assert model.predict([0.5, 1.5]) == pytest.approx([0.6875, 0.6875], rel=1e-14)
    assert np.allclose(model.predict([0, 1, 2]), [0, 1, 0], atol=1e-15)


def test_cubic_equals_natural_spline_inside_hull():
    rng = np.random.default_rng(5)
    x = np.sort(random_sites(rng, 9, 1, 0.0, 3.0)[:, 0])
    y = rng.normal(size=9)
    model = fit(CUBIC, LIN1, Dataset(x, y))
    grid = np.linspace(x[0], x[-1], 301)
    ref = CubicSpline(x, y, bc_type="natural")(grid)
    assert np.max(np.abs(model.predict(grid) - ref)) < 1e-8


def test_linear_beyond_hull():
    x = np.array([0.0, 0.4, 1.3, 2.0])
    model = fit(CUBIC, LIN1, Dataset(x, [1.0, -1.0, 0.5, 2.0]))
    out = np.array([-3.0, -1.0, 2.5, 7.0])
    assert np.allclose(model.derivative(out, (2,)), 0.0, atol=1e-12)


@pytest.mark.parametrize("kernel,space", [
    (CUBIC, LIN1),
    (GreenKernel("tension", scale=1.5), PolySpace.total_degree(1, 0)),
    (TPS, LIN2),
    (GreenKernel("polyharmonic", 3, smoothness=2), PolySpace.total_degree(3, 1)),
])
def test_reproduces_polynomial_space(kernel, space):
    rng = np.random.default_rng(2)
    X = rng.uniform(0, 1, (12, kernel.dim))
    beta = rng.normal(size=space.size)
    model = fit(kernel, space, Dataset(X, space.vandermonde(X) @ beta))
    assert np.max(np.abs(model.c)) < 1e-9
    assert np.allclose(model.beta, beta, atol=1e-9)
    assert gram_seminorm(model) < 1e-8


def test_pure_polynomial_predict():
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    Y = 1 + 2 * X[:, 0] + 3 * X[:, 1]
    model = fit(TPS, LIN2, Dataset(X, Y))
    assert model.predict([[1.0, 4 / 3]])[0] == pytest.approx(7.0, rel=1e-13)


def test_single_gaussian_site():
    g = GreenKernel("gaussian", 1, 1.0)
    model = fit(g, PolySpace.total_degree(1, -1), Dataset([0.3], [2.0]))
    assert model.c[0] == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-15)


def test_gaussian_two_site_seminorm():
    g = GreenKernel("gaussian", 1, 1.0)
    y = np.array([1.0, -0.5])
    a, b = 1 / math.sqrt(math.pi), math.exp(-1) / math.sqrt(math.pi)
    expected = (a * (y @ y) - 2 * b * y[0] * y[1]) / (a * a - b * b)
    empty = PolySpace.total_degree(1, -1)
    model = fit(g, empty, Dataset([0.0, 1.0], y))
    assert gram_seminorm_squared(model) == pytest.approx(expected, rel=1e-13)
    doubled = fit(g, empty, Dataset([0.0, 1.0], 2 * y))
    assert gram_seminorm(doubled) == pytest.approx(2 * gram_seminorm(model), rel=1e-13)


@pytest.mark.parametrize("kernel", default_catalog(), ids=lambda k: k.name)
def test_moments_and_residual(kernel):
    space = PolySpace.for_order(kernel.dim, kernel.cpd_order)
    rng = np.random.default_rng(11)
    n = 6 if kernel.name == "gaussian" else 15
    X = rng.uniform(0, 1, (n, kernel.dim))
    Y = np.sin(4 * X).sum(axis=1)
    model = fit(kernel, space, Dataset(X, Y))
    assert np.max(np.abs(model.predict(X) - Y)) <= 1e-9 * (1 + np.max(np.abs(Y)))
    assert moment_residual(model) <= 1e-8 * max(1.0, np.abs(model.c).max())
    assert gram_seminorm_squared(model) >= -1e-10


def test_translation_equivariance():
    rng = np.random.default_rng(4)
    X = rng.uniform(0, 1, (10, 2))
    Y = rng.normal(size=10)
    shift = np.array([3.0, -7.0])
    a = fit(TPS, LIN2, Dataset(X, Y))
    b = fit(TPS, LIN2, Dataset(X + shift, Y))
    grid = rng.uniform(-1, 2, (50, 2))
    assert np.allclose(a.predict(grid), b.predict(grid + shift), atol=1e-9)
    assert np.allclose(a.c, b.c, atol=1e-8)


def test_ridge_for_regularized_kernel():
    kernel = next(k for k in default_catalog() if k.name == "regularized_log_bessel")
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (20, 2))
    Y = X[:, 0] - X[:, 1] ** 2
    space = PolySpace.for_order(2, kernel.cpd_order)
    exact = fit(kernel, space, Dataset(X, Y))
    smoothed = fit(kernel, space, Dataset(X, Y), ridge=1e-2)
    assert np.max(np.abs(exact.predict(X) - Y)) < 1e-9
    assert np.max(np.abs(smoothed.predict(X) - Y)) > 1e-6


def test_validation_errors():
    with pytest.raises(ValidationError):
        Dataset([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValidationError):
        Dataset([0.0, np.nan], [1.0, 2.0])
    with pytest.raises(ValidationError):
        Dataset(np.zeros((0, 1)), [])
    with pytest.raises(ValidationError):
        Dataset([0.0, 1.0], [1.0])
    with pytest.raises(ValidationError):
        fit(TPS, LIN2, Dataset([[0, 0], [1, 1], [2, 2], [3, 3]], [1, 2, 3, 4]))
    with pytest.raises(ValidationError):
        fit(CUBIC, LIN1, Dataset([0.5], [1.0]))
    with pytest.raises(ValidationError):
        fit(TPS, LIN1, Dataset([0.0, 1.0], [1.0, 2.0]))


def test_singular_gaussian_system():
    g = GreenKernel("gaussian", 1, 0.01)
    x = np.linspace(0, 1e-3, 12)
    with pytest.raises(NumericalError):
        fit(g, PolySpace.total_degree(1, -1), Dataset(x, np.sin(x)))


def test_json_round_trip_is_bit_exact():
    rng = np.random.default_rng(9)
    X = rng.uniform(0, 1, (8, 2))
    model = fit(TPS, LIN2, Dataset(X, rng.normal(size=8)))
    import json

    back = InterpolationModel.from_json(json.loads(json.dumps(model.to_json())))
    grid = rng.uniform(0, 1, (20, 2))
    assert np.array_equal(back.predict(grid), model.predict(grid))
    assert np.array_equal(back.c, model.c) and np.array_equal(back.beta, model.beta)


def test_model_is_read_only():
    model = fit(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        model.c[0] = 1.0


def test_loocv_zero_on_polynomial_data():
    x = np.linspace(0, 1, 7)
    assert loocv_error(CUBIC, LIN1, Dataset(x, 2 - 3 * x)) < 1e-10


def test_loocv_shortcut_matches_refits():
    g = GreenKernel("gaussian", 1, 2.0)
    x = np.array([0.0, 0.3, 0.55, 0.8, 1.0])
    data = Dataset(x, np.cos(3 * x))
    empty = PolySpace.total_degree(1, -1)
    assert np.allclose(loocv_residuals(g, empty, data), loocv_bruteforce(g, empty, data), rtol=1e-9)
    X = np.random.default_rng(1).uniform(0, 1, (14, 2))
    d2 = Dataset(X, X[:, 0] ** 2 - X[:, 1])
    assert np.allclose(loocv_residuals(TPS, LIN2, d2), loocv_bruteforce(TPS, LIN2, d2), rtol=1e-8)


def test_loocv_needs_enough_sites():
    with pytest.raises(ValidationError):
        loocv_residuals(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0], [1.0, 0.0, 1.0]))


def test_scale_sweep_ties_pick_smallest():
    # linear data: every tension scale reproduces it, so all errors tie at ~0
    x = np.linspace(0, 1, 6)
    sweep = loocv_scale_sweep(GreenKernel("tension", scale=1.0), LIN1, Dataset(x, 1 + x), [4.0, 0.5, 2.0])
    assert sweep.scales == (0.5, 2.0, 4.0)
    assert sweep.best_scale == 0.5


def test_scale_sweep_records_failures_as_inf():
    x = np.linspace(0, 1, 30)
    sweep = loocv_scale_sweep(GreenKernel("gaussian", 1, 1.0), PolySpace.total_degree(1, -1),
                              Dataset(x, np.sin(x)), [0.05, 20.0])
    assert sweep.errors[0] == np.inf and np.isfinite(sweep.errors[1])
    assert sweep.best_scale == 20.0
    with pytest.raises(ValidationError):
        loocv_scale_sweep(CUBIC, LIN1, Dataset(x, x), [1.0])


def test_orthogonality_nested_sites():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    small = fit(CUBIC, LIN1, Dataset(x[:3], y[:3]))
    large = fit(CUBIC, LIN1, Dataset(x, y))
    rep = orthogonality_check(small, large)
    assert rep.passed and rep.relative_gap < 1e-12
    assert rep.large >= rep.small


def test_orthogonality_requires_nested_centers():
    a = fit(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]))
    b = fit(CUBIC, LIN1, Dataset([0.0, 1.5, 2.0, 3.0], [0.0, 1.0, 0.0, 1.0]))
    with pytest.raises(ValidationError):
        orthogonality_check(a, b)


@pytest.mark.parametrize("kernel", [CUBIC, TPS, GreenKernel("polyharmonic", 3, smoothness=2)],
                         ids=lambda k: k.name)
def test_cpd_certificate_passes(kernel):
    rep = cpd_certificate(kernel, trials=200, seed=3)
    assert rep.passed is True and rep.min_scaled_form > 0 and rep.n_nonpositive == 0


def test_cpd_certificate_detects_wrong_space():
    # cubic without its linear null space is not positive
    rep = cpd_certificate(CUBIC, PolySpace.total_degree(1, -1), trials=200, seed=3)
    assert rep.passed is False and rep.n_nonpositive > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(4, 14))
def test_pythagoras_property(seed, n):
    rng = np.random.default_rng(seed)
    x = random_sites(rng, n, 1)[:, 0]
    y = rng.normal(size=n)
    k = int(rng.integers(2, n))
    idx = rng.permutation(n)
    small = fit(CUBIC, LIN1, Dataset(x[idx[:k]], y[idx[:k]]))
    large = fit(CUBIC, LIN1, Dataset(x[idx], y[idx]))
    assert orthogonality_check(small, large).relative_gap < 1e-8
    assert gram_seminorm_squared(large) >= gram_seminorm_squared(small) * (1 - 1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_interpolation_residual_property(seed):
    rng = np.random.default_rng(seed)
    X = random_sites(rng, 10, 2)
    Y = rng.normal(size=10)
    model = fit(TPS, LIN2, Dataset(X, Y))
    assert np.max(np.abs(model.predict(X) - Y)) <= 1e-9 * (1 + np.abs(Y).max())


def test_gaussian_two_site_example():
    g = GreenKernel("gaussian", 1, 1.0)
    A = np.array([[1, math.exp(-1)], [math.exp(-1), 1]]) / math.sqrt(math.pi)
    c = np.linalg.solve(A, [1.0, 0.0])
    model = fit(g, PolySpace.total_degree(1, -1), Dataset([0.0, 1.0], [1.0, 0.0]))
    assert gram_seminorm_squared(model) == pytest.approx(c @ A @ c, rel=1e-13)


def test_orthogonality_examples():
    x, y = np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0])
    small = fit(CUBIC, LIN1, Dataset(x, y))
    same = orthogonality_check(small, fit(CUBIC, LIN1, Dataset(x, y)))
    assert same.difference == 0.0 and same.passed
    s05 = small.predict([0.5])[0]
    consistent = fit(CUBIC, LIN1, Dataset(np.append(x, 0.5), np.append(y, s05)))
    rep = orthogonality_check(small, consistent)
    assert rep.difference <= 1e-12 * rep.large and rep.passed
    bumped = fit(CUBIC, LIN1, Dataset(np.append(x, 0.5), np.append(y, s05 + 1)))
    rep = orthogonality_check(small, bumped)
    assert rep.passed and rep.relative_gap <= 1e-8 and rep.difference > 0


def test_cubic_example_matches_spline_oracle():
    from greenkernel.oracles import natural_cubic_spline

    x, y = np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0, 0.0])
    model = fit(CUBIC, LIN1, Dataset(x, y))
    pts = np.array([0.5, 1.5])
    assert np.allclose(model.predict(pts), natural_cubic_spline(x, y)(pts), atol=1e-8)
