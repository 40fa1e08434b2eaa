import math

import numpy as np
import pytest

from greenkernel.errors import NumericalError, ValidationError
from greenkernel.kernels import GreenKernel, default_catalog
from greenkernel.symbols import (
    ClosedFormEntry,
    DifferentialEntry,
    OperatorVector,
    check_symbol_hypotheses,
    estimate_cpd_order,
    operator_for_kernel,
    polyharmonic_operator,
    sobolev_operator,
)


@pytest.mark.parametrize("kernel", [k for k in default_catalog() if k.has_symbol], ids=lambda k: k.name)
def test_symbol_is_reciprocal_of_l_hat(kernel):
    op = operator_for_kernel(kernel)
    w = np.random.default_rng(3).normal(size=(50, kernel.dim)) * 2
    expected = (2 * math.pi) ** (-kernel.dim / 2) / op.l_symbol(w)
    assert np.allclose(kernel.fourier_symbol(w), expected, rtol=1e-13)


def test_l_hat_closed_forms():
    w = np.linspace(0.1, 3, 9)
    assert np.allclose(operator_for_kernel(GreenKernel("cubic")).l_symbol(w), w**4)
    assert np.allclose(operator_for_kernel(GreenKernel("tension", scale=2.0)).l_symbol(w), w**4 + 4 * w**2)
    assert np.allclose(sobolev_operator(1, 2, 1.5).l_symbol(w), (2.25 + w**2) ** 2)
    assert np.allclose(operator_for_kernel(GreenKernel("compare_k_s")).l_symbol(w), (1 + w**2 + w**4) / math.sqrt(3))
    assert np.allclose(operator_for_kernel(GreenKernel("gaussian", 1, 2.0)).l_symbol(w), np.exp(w**2 / 16))


def test_polyharmonic_operator_is_isotropic():
    w = np.random.default_rng(0).normal(size=(20, 3))
    r2 = np.sum(w * w, axis=1)
    assert np.allclose(polyharmonic_operator(3, 2).l_symbol(w), r2**2)
    assert np.allclose(polyharmonic_operator(2, 3).l_symbol(w[:, :2]), np.sum(w[:, :2] ** 2, axis=1) ** 3)


def test_duchon_and_laplacian_share_l_hat():
    w = np.random.default_rng(1).normal(size=(20, 2))
    a = operator_for_kernel(GreenKernel("thin_plate", 2)).l_symbol(w)
    b = operator_for_kernel(GreenKernel("laplacian_tps", 2)).l_symbol(w)
    assert np.allclose(a, b)


@pytest.mark.parametrize("kernel,m", [
    (GreenKernel("cubic"), 2),
    (GreenKernel("tension", scale=1.0), 1),
    (GreenKernel("thin_plate", 2), 2),
    (GreenKernel("polyharmonic", 3, smoothness=2), 2),
    (GreenKernel("polyharmonic", 2, smoothness=3), 3),
    (GreenKernel("matern", 2, 1.0, 2), 0),
    (GreenKernel("gaussian", 2, 1.0), 0),
])
def test_order_estimate(kernel, m):
    m_hat, slope = estimate_cpd_order(operator_for_kernel(kernel))
    assert m_hat == m
    assert abs(slope - 2 * m) <= 0.05


def test_no_uniform_order():
    # l_hat = w^4 + 1e-6 w^2 crosses over inside the fitting window
    op = OperatorVector((DifferentialEntry((((2,), 1.0),)), DifferentialEntry((((1,), 1e-3),))), 1)
    with pytest.raises(NumericalError, match="no uniform order"):
        estimate_cpd_order(op)


def test_anisotropic_operator_rejected():
    op = OperatorVector((DifferentialEntry((((2, 0), 1.0),)), DifferentialEntry((((0, 1), 1.0),))), 2)
    with pytest.raises(NumericalError):
        estimate_cpd_order(op)


def test_truncation_remainder():
    op = operator_for_kernel(GreenKernel("gaussian", 1, 1.0))
    assert not op.is_differential
    t = op.truncated(5)
    assert t.is_differential
    assert t.truncation_remainder == pytest.approx(1 / (math.factorial(5) * 4**5))
    # partial sums of exp(w^2/4) from below
    w = np.array([0.5, 1.0, 2.0])
    partial = sum((w**2 / 4) ** n / math.factorial(n) for n in range(6))
    assert np.allclose(t.l_symbol(w), partial, rtol=1e-14)


def test_hypotheses_report():
    rep = check_symbol_hypotheses(operator_for_kernel(GreenKernel("thin_plate", 2)))
    assert rep.positive and rep.slowly_increasing
    assert rep.l_hat_at_origin == 0.0
    assert rep.origin_slope == pytest.approx(4.0, abs=0.05)
    g = check_symbol_hypotheses(operator_for_kernel(GreenKernel("gaussian", 1, 1.0)))
    assert g.positive and g.l_hat_at_origin == pytest.approx(1.0)
    # l_hat^-1 decays faster than any power
    assert g.slowly_increasing and g.growth_exponent == -np.inf


def test_operator_json_round_trip():
    for kernel in default_catalog():
        try:
            op = operator_for_kernel(kernel)
        except ValidationError:
            continue
        back = OperatorVector.from_json(op.to_json())
        assert back == op


def test_operator_json_errors():
    with pytest.raises(ValidationError):
        OperatorVector.from_json({"entries": [{"type": "integral"}]})
    with pytest.raises(ValidationError):
        ClosedFormEntry("cauchy", 1)
    with pytest.raises(ValidationError):
        DifferentialEntry(())


def test_regularized_kernel_has_no_operator():
    kernel = next(k for k in default_catalog() if k.name == "regularized_log_bessel")
    with pytest.raises(ValidationError):
        operator_for_kernel(kernel)


def test_l_hat_examples():
    assert operator_for_kernel(GreenKernel("tension", scale=1.0)).l_symbol(1.0) == pytest.approx(2.0)
    assert operator_for_kernel(GreenKernel("sobolev1d", scale=1.0)).l_symbol(0.0) == pytest.approx(1.0)
    for kernel in (GreenKernel("cubic"), GreenKernel("tension", scale=1.0), GreenKernel("thin_plate", 2)):
        assert operator_for_kernel(kernel).l_symbol(np.zeros(kernel.dim)) == 0.0


@pytest.mark.parametrize("kernel", [k for k in default_catalog() if k.name not in ("regularized_log_bessel", "gaussian")],
                         ids=lambda k: k.name)
def test_conjugation_rule(kernel):
    op = operator_for_kernel(kernel)
    w = np.random.default_rng(8).normal(size=(25, kernel.dim))
    assert np.allclose(op.symbols(-w), np.conj(op.symbols(w)), rtol=1e-15, atol=0)


def test_hypotheses_sobolev_and_tension():
    s = check_symbol_hypotheses(operator_for_kernel(GreenKernel("sobolev1d", scale=1.0)))
    assert s.min_l_hat == pytest.approx(1.0, rel=1e-5)
    assert s.growth_exponent == pytest.approx(-4.0, abs=0.01)
    assert s.origin_slope == pytest.approx(0.0, abs=0.01)
    t = check_symbol_hypotheses(operator_for_kernel(GreenKernel("tension", scale=1.0)))
    assert t.origin_slope == pytest.approx(2.0, abs=0.05)
    assert t.growth_exponent == pytest.approx(-4.0, abs=0.01)
    c = check_symbol_hypotheses(operator_for_kernel(GreenKernel("cubic")))
    assert c.l_hat_at_origin == 0.0 and c.positive and c.origin_slope == pytest.approx(4.0, abs=0.01)
