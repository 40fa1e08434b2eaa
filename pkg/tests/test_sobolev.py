import math

import numpy as np
import pytest

from greenkernel.errors import ValidationError
from greenkernel.interpolation import Dataset, InterpolationModel, fit
from greenkernel.kernels import GreenKernel
from greenkernel.polyspace import PolySpace
from greenkernel.sobolev import QuadSpec, compare_scaled_spaces, hp_seminorm
from greenkernel.symbols import DifferentialEntry, OperatorVector, operator_for_kernel, sobolev_operator

CUBIC = GreenKernel("cubic")
LIN1 = PolySpace.total_degree(1, 1)
BILINEAR = PolySpace(2, ((0, 0), (1, 0), (0, 1), (1, 1)))


def test_cubic_three_points():
    model = fit(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]))
    rep = hp_seminorm(model)
    # s'' is the hat 3 t on [0,1] and 3 (2 - t) on [1,2], mirrored with sign: int = 2 * 3
    assert rep.gram_value == pytest.approx(6.0, rel=1e-12)
    assert rep.quadrature_value == pytest.approx(6.0, rel=1e-12)
    assert rep.agrees(1e-6) and rep.converged
    # outside the hull the integrand vanishes
    assert rep.tail_bound <= 1e-12


def test_polynomial_data_gives_zero():
    model = fit(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0, 3.0], [1.0, 3.0, 5.0, 7.0]))
    rep = hp_seminorm(model)
    assert abs(rep.gram_value) < 1e-12 and abs(rep.quadrature_value) < 1e-20
    assert rep.relative_gap <= 1.0


@pytest.mark.parametrize("kernel", [GreenKernel("tension", scale=1.0), GreenKernel("sobolev1d", scale=1.0),
                                    GreenKernel("compare_k_s"), GreenKernel("matern", 1, 2.0, 2)],
                         ids=lambda k: k.name)
def test_one_dimensional_kernels(kernel):
    x = np.array([0.0, 1.0, 2.0])
    space = PolySpace.for_order(1, kernel.cpd_order)
    model = fit(kernel, space, Dataset(x, [0.0, 1.0, 0.0]))
    rep = hp_seminorm(model)
    assert rep.agrees(1e-4) and rep.relative_gap < 1e-8 and rep.converged


def test_tension_per_operator_split():
    model = fit(GreenKernel("tension", scale=1.0), PolySpace.total_degree(1, 0), Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]))
    rep = hp_seminorm(model)
    assert len(rep.per_operator) == 2 and sum(rep.per_operator) == pytest.approx(rep.quadrature_value)
    assert set(rep.per_order) == {1, 2}


@pytest.mark.parametrize("name", ["thin_plate", "laplacian_tps"])
def test_two_dimensional(name):
    rng = np.random.default_rng(0)
    X = rng.uniform(0, 1, (6, 2))
    model = fit(GreenKernel(name, 2), PolySpace.total_degree(2, 1), Dataset(X, np.sin(X[:, 0]) + X[:, 1] ** 2))
    rep = hp_seminorm(model)
    assert rep.relative_gap <= 1e-4 and rep.converged


def test_box_with_bilinear_polynomial():
    # q = x1 x2 carried by the polynomial part only
    model = InterpolationModel(GreenKernel("thin_plate", 2), BILINEAR, np.array([[0.0, 0.0]]), np.zeros(1),
                               np.array([0.0, 0.0, 0.0, 1.0]))
    spec = QuadSpec(box=((0.0, 2.0), (-1.0, 1.0)))
    duchon = hp_seminorm(model, operator_for_kernel(GreenKernel("thin_plate", 2)), spec)
    laplace = hp_seminorm(model, operator_for_kernel(GreenKernel("laplacian_tps", 2)), spec)
    assert duchon.quadrature_value == pytest.approx(2 * 4.0, rel=1e-12)
    assert laplace.quadrature_value == 0.0
    assert duchon.domain == ((0.0, 2.0), (-1.0, 1.0))


def test_modified_tps_with_bilinear_space():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 1, (10, 2))
    model = fit(GreenKernel("laplacian_tps", 2), BILINEAR, Dataset(X, X[:, 0] * X[:, 1]))
    assert np.max(np.abs(model.c)) < 1e-10
    rep = hp_seminorm(model)
    assert rep.quadrature_value < 1e-18 and abs(rep.gram_value) < 1e-12


def test_compare_polynomial_is_nan():
    model = fit(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]))
    d2 = OperatorVector((DifferentialEntry((((2,), 1.0),)),), 1)
    cmp = compare_scaled_spaces(model, (d2, d2))
    assert math.isnan(cmp.ratio)


def test_compare_identical_operators():
    model = fit(GreenKernel("sobolev1d", scale=1.0), PolySpace.total_degree(1, -1), Dataset([0.0, 0.6, 1.5], [1, -1, 2]))
    op = operator_for_kernel(model.kernel)
    assert compare_scaled_spaces(model, (op, op)).ratio == pytest.approx(1.0, abs=1e-12)


def test_compare_scaled_sobolev_orders():
    model = fit(GreenKernel("sobolev1d", scale=1.0), PolySpace.total_degree(1, -1), Dataset([0.0, 0.6, 1.5], [1, -1, 2]))
    cmp = compare_scaled_spaces(model, (sobolev_operator(1, 2, 1.0), sobolev_operator(1, 2, 2.0)))
    r = cmp.order_ratios()
    assert r[0] == pytest.approx(16.0, rel=1e-12)
    assert r[1] == pytest.approx(4.0, rel=1e-12)
    assert r[2] == pytest.approx(1.0, rel=1e-12)
    assert cmp.to_json()["order_ratios"]["0"] == r[0]


def test_gaussian_needs_truncation():
    g = GreenKernel("gaussian", 1, 1.0)
    model = fit(g, PolySpace.total_degree(1, -1), Dataset([0.0, 1.0], [1.0, 0.0]))
    with pytest.raises(ValidationError, match="n_max"):
        hp_seminorm(model)
    gaps = []
    for n_max in (12, 20, 40):
        rep = hp_seminorm(model, quad_spec=QuadSpec(n_max=n_max))
        assert f"n_max={n_max}" in rep.operator_label
        # truncated sum approaches the Gram value from below
        assert rep.quadrature_value <= rep.gram_value * (1 + 1e-12)
        gaps.append((rep.relative_gap, rep.truncation_remainder))
    (g12, r12), (g20, r20), (g40, r40) = gaps
    assert g12 > g20 > g40 and g40 < 1e-12
    assert r12 > r20 > r40 > 0


def test_operator_order_too_high():
    model = fit(GreenKernel("tension", scale=1.0), PolySpace.total_degree(1, 0), Dataset([0.0, 1.0, 2.0], [0, 1, 0]))
    d3 = OperatorVector((DifferentialEntry((((3,), 1.0),)),), 1)
    with pytest.raises(ValidationError, match="order-3"):
        hp_seminorm(model, d3)


def test_dimension_limits():
    kernel = GreenKernel("polyharmonic", 3, smoothness=2)
    X = np.random.default_rng(0).uniform(0, 1, (6, 3))
    model = fit(kernel, PolySpace.total_degree(3, 1), Dataset(X, X[:, 0] ** 2))
    with pytest.raises(ValidationError):
        hp_seminorm(model)
    with pytest.raises(ValidationError):
        hp_seminorm(fit(CUBIC, LIN1, Dataset([0.0, 1.0], [0, 1])), operator_for_kernel(GreenKernel("thin_plate", 2)))


def test_report_json():
    rep = hp_seminorm(fit(CUBIC, LIN1, Dataset([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])))
    out = rep.to_json()
    assert out["operator"] == "d2" and out["per_order"] == {"2": rep.quadrature_value}
    assert out["converged"] is True
