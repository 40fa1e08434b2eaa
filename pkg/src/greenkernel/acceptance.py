"""The acceptance suite: ten numerical criteria with fixed seeds.

Each ``criterion_*`` function returns a :class:`CriterionResult`; the CLI's
``verify-all`` and the test suite both run them through :func:`run_all`.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from greenkernel.errors import GreenKernelError
from greenkernel.interpolation import (
    Dataset,
    cpd_certificate,
    fit,
    gram_seminorm,
    loocv_bruteforce,
    loocv_residuals,
    orthogonality_check,
)
from greenkernel.kernels import GreenKernel, default_catalog
from greenkernel.oracles import fourier_transform_1d, natural_cubic_spline
from greenkernel.polyspace import PolySpace
from greenkernel.rkhs import build_rk, check_equivalence, check_pd
from greenkernel.sobolev import hp_seminorm
from greenkernel.symbols import estimate_cpd_order, operator_for_kernel

SEED = 20240521

# points per catalog entry for interpolation checks; smooth kernels on the
# unit cube become numerically singular quickly, so they get fewer sites
SITES = {
    "cubic": 50,
    "tension": 50,
    "sobolev1d": 30,
    "compare_k_s": 30,
    "thin_plate": 50,
    "laplacian_tps": 50,
    "polyharmonic": 50,
    "matern": 30,
    "gaussian": 6,
    "regularized_log_bessel": 50,
}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed: float = 0.0
    time_limit: float | None = None
    data: dict = field(default_factory=dict)

    @property
    def within_time(self) -> bool:
        return self.time_limit is None or self.elapsed < self.time_limit

    @property
    def ok(self) -> bool:
        return self.passed and self.within_time

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        limit = f" (limit {self.time_limit:g}s)" if self.time_limit else ""
        return f"[{status}] {self.number:2d} {self.name}: {self.detail} [{self.elapsed:.2f}s{limit}]"

    def to_json(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.ok,
            "detail": self.detail,
            "elapsed": self.elapsed,
            "time_limit": self.time_limit,
            "data": self.data,
        }


def smooth_values(X: np.ndarray) -> np.ndarray:
    """A fixed smooth test function on [0, 1]^d, with no polynomial part."""
    return np.sin(3 * X[:, 0]) + np.cos(2 * X.sum(axis=1)) + np.exp(-X[:, -1])


def random_sites(rng: np.random.Generator, n: int, dim: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """Uniform points in [low, high]^dim, pairwise at least 0.2 n^(-1/dim) (high - low) apart.

    Near-coincident sites make any interpolant's coefficients explode, and
    the residual then measures cancellation in double precision rather
    than the solver.
    """
    sep = 0.2 * n ** (-1.0 / dim) * (high - low)
    pts = np.empty((0, dim))
    while len(pts) < n:
        p = rng.uniform(low, high, dim)
        if not len(pts) or np.min(np.linalg.norm(pts - p, axis=1)) >= sep:
            pts = np.vstack([pts, p])
    return pts


def null_space(kernel: GreenKernel) -> PolySpace:
    return PolySpace.for_order(kernel.dim, kernel.cpd_order)


def _timed(number, name, limit=None):
    def wrap(fn):
        def run(*args, **kwargs) -> CriterionResult:
            t0 = time.perf_counter()
            try:
                passed, detail, data = fn(*args, **kwargs)
            except GreenKernelError as exc:
                passed, detail, data = False, f"error: {exc}", {}
            return CriterionResult(number, name, bool(passed), detail, time.perf_counter() - t0, limit, data)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run

    return wrap


@_timed(1, "interpolation exactness", 10.0)
def criterion_interpolation(seed: int = SEED):
    """Residual at the data sites <= 1e-9 (1 + max|Y|) for every catalog kernel."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    data = {}
    for kernel in default_catalog():
        X = random_sites(rng, SITES[kernel.name], kernel.dim)
        Y = smooth_values(X)
        model = fit(kernel, null_space(kernel), Dataset(X, Y))
        rel = float(np.max(np.abs(model.predict(X) - Y)) / (1 + np.max(np.abs(Y))))
        data[kernel.describe()] = rel
        worst = max(worst, rel)
    return worst <= 1e-9, f"worst scaled residual {worst:.2e} over {len(data)} kernels", data


@_timed(2, "CPD certificates", 30.0)
def criterion_cpd(seed: int = SEED, trials: int = 1000):
    """1000 constrained quadratic-form trials per kernel, all strictly positive."""
    data = {}
    ok = True
    for i, kernel in enumerate(default_catalog()):
        rep = cpd_certificate(kernel, trials=trials, max_points=20, seed=seed + i)
        data[kernel.describe()] = rep.min_scaled_form
        ok &= rep.passed
    worst = min(data.values())
    return ok, f"min scaled form {worst:.2e}, {trials} trials x {len(data)} kernels", data


@_timed(3, "cubic kernel equals natural spline")
def criterion_natural_spline(seed: int = SEED):
    """Cubic interpolant vs tridiagonal natural spline on hull +- 1, <= 1e-8."""
    rng = np.random.default_rng(seed)
    kernel = GreenKernel("cubic")
    worst = 0.0
    for _ in range(5):
        n = int(rng.integers(4, 13))
        x = np.sort(random_sites(rng, n, 1)[:, 0])
        y = rng.standard_normal(n)
        model = fit(kernel, null_space(kernel), Dataset(x, y))
        grid = np.linspace(x[0] - 1, x[-1] + 1, 200)
        worst = max(worst, float(np.max(np.abs(model.predict(grid) - natural_cubic_spline(x, y)(grid)))))
    return worst <= 1e-8, f"max grid deviation {worst:.2e} over 5 datasets", {"max_deviation": worst}


@_timed(4, "semi-norm equality (Gram vs operator quadrature)", 60.0)
def criterion_seminorm(seed: int = SEED):
    """c'Ac vs sum_j int |P_j s|^2 on N <= 10 datasets."""
    rng = np.random.default_rng(seed)
    cases = [
        (GreenKernel("cubic"), 1e-6, 3, 10),
        (GreenKernel("tension", scale=1.0), 1e-4, 3, 10),
        (GreenKernel("sobolev1d", scale=1.0), 1e-4, 3, 10),
        (GreenKernel("thin_plate", dim=2), 1e-4, 2, 8),
    ]
    ok = True
    data = {}
    for kernel, tol, reps, n in cases:
        gaps = []
        for _ in range(reps):
            X = random_sites(rng, n, kernel.dim)
            rep = hp_seminorm(fit(kernel, null_space(kernel), Dataset(X, smooth_values(X))))
            gaps.append(rep.relative_gap)
            ok &= rep.relative_gap <= tol and rep.converged
        data[kernel.describe()] = max(gaps)
    detail = ", ".join(f"{k.split('(')[0]} {v:.1e}" for k, v in data.items())
    return ok, f"max relative gaps: {detail}", data


@_timed(5, "Fourier symbol identity")
def criterion_symbols(seed: int = SEED):
    """Catalog symbol vs (2 pi)^(-d/2) / l_hat(P) at 1000 frequencies; numerical FT at 10."""
    rng = np.random.default_rng(seed)
    worst_id = 0.0
    for kernel in default_catalog():
        if not kernel.has_symbol:
            continue
        op = operator_for_kernel(kernel)
        dirs = rng.standard_normal((1000, kernel.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        top = 6.0 * kernel.scale if kernel.name == "gaussian" else 100.0
        radii = 10 ** rng.uniform(-2, np.log10(top), 1000)
        w = dirs * radii[:, None]
        a = kernel.fourier_symbol(w)
        b = (2 * math.pi) ** (-kernel.dim / 2) / op.l_symbol(w)
        worst_id = max(worst_id, float(np.max(np.abs(a - b) / np.abs(b))))
    worst_ft = 0.0
    for kernel, upper in ((GreenKernel("matern", 1, 1.0, 2), 60.0), (GreenKernel("gaussian", 1, 1.0), 10.0)):
        for w in np.linspace(0.25, 4.0, 10):
            ft = fourier_transform_1d(lambda x: float(kernel.profile(x)), w, upper)
            sym = float(kernel.fourier_symbol(w))
            worst_ft = max(worst_ft, abs(ft - sym) / abs(sym))
    ok = worst_id <= 1e-12 and worst_ft <= 1e-4
    return ok, f"identity {worst_id:.1e} (tol 1e-12), numerical FT {worst_ft:.1e} (tol 1e-4)", {
        "identity": worst_id,
        "numerical_ft": worst_ft,
    }


@_timed(6, "CPD order recovery from symbol slope")
def criterion_order(seed: int = SEED):
    """Slope of log l_hat near 0 within 0.05 of 2m."""
    targets = [
        GreenKernel("cubic"),
        GreenKernel("tension", scale=1.0),
        GreenKernel("thin_plate", dim=2),
        GreenKernel("polyharmonic", dim=3, smoothness=2),
        GreenKernel("matern", 1, 1.0, 2),
        GreenKernel("gaussian", 1, 1.0),
    ]
    ok = True
    data = {}
    for kernel in targets:
        m_hat, slope = estimate_cpd_order(operator_for_kernel(kernel), seed)
        data[kernel.describe()] = slope
        ok &= abs(slope - 2 * kernel.cpd_order) <= 0.05 and m_hat == kernel.cpd_order
    detail = ", ".join(f"{k.split('(')[0]} {v:.3f}" for k, v in data.items())
    return ok, f"slopes: {detail}", data


@_timed(7, "reproducing kernel equivalence and positivity")
def criterion_rk(seed: int = SEED):
    """K-span vs Phi+polynomial interpolants <= 1e-7; K-Gram min eigenvalues > 0."""
    rng = np.random.default_rng(seed)
    ok = True
    data = {}
    for kernel, n in ((GreenKernel("cubic"), 10), (GreenKernel("thin_plate", dim=2), 10)):
        X = random_sites(rng, n, kernel.dim)
        space = null_space(kernel)
        rk = build_rk(kernel, None, space, candidates=X)
        grid = rng.uniform(-0.5, 1.5, (400, kernel.dim))
        eq = check_equivalence(rk, Dataset(X, smooth_values(X)), grid)
        pd = check_pd(rk, trials=100, n_points=8, seed=seed)
        data[kernel.describe()] = {"deviation": eq.max_deviation, "min_eigenvalue": min(pd.min_eigenvalues)}
        ok &= eq.max_deviation <= 1e-7 and pd.passed and min(pd.min_eigenvalues) > 0
    detail = "; ".join(f"{k.split('(')[0]} dev {v['deviation']:.1e}, min eig {v['min_eigenvalue']:.1e}"
                       for k, v in data.items())
    return ok, detail, data


@_timed(8, "minimum-norm Pythagoras identity")
def criterion_pythagoras(seed: int = SEED):
    """|s_L|^2 = |s_S|^2 + |s_L - s_S|^2 to 1e-8 relative, 10 cases per kernel."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for kernel in default_catalog():
        space = null_space(kernel)
        # noisy data on 6 Gaussian sites already costs ~8 digits
        n_max = 5 if kernel.name == "gaussian" else 16
        for _ in range(10):
            n = int(rng.integers(space.size + 2, n_max + 1))
            X = random_sites(rng, n, kernel.dim)
            Y = smooth_values(X) + 0.1 * rng.standard_normal(n)
            k = int(rng.integers(space.size + 1, n))
            small = fit(kernel, space, Dataset(X[:k], Y[:k]))
            large = fit(kernel, space, Dataset(X, Y))
            worst = max(worst, orthogonality_check(small, large).relative_gap)
    return worst <= 1e-8, f"worst relative gap {worst:.1e} over {len(default_catalog())} kernels", {
        "worst_gap": worst
    }


@_timed(9, "extended null space for the modified thin plate spline")
def criterion_extended_space(seed: int = SEED):
    """q = x1 x2 with span{1, x1, x2, x1 x2}: c = 0; with pi_1 the semi-norm > 1e-3."""
    rng = np.random.default_rng(seed)
    kernel = GreenKernel("laplacian_tps", dim=2)
    X = random_sites(rng, 10, 2)
    Y = X[:, 0] * X[:, 1]
    extended = PolySpace(2, ((0, 0), (1, 0), (0, 1), (1, 1)))
    m_ext = fit(kernel, extended, Dataset(X, Y))
    m_lin = fit(kernel, PolySpace.for_order(2, 2), Dataset(X, Y))
    c_max = float(np.max(np.abs(m_ext.c)))
    norm_ext, norm_lin = gram_seminorm(m_ext), gram_seminorm(m_lin)
    ok = c_max <= 1e-8 and norm_ext <= 1e-8 and norm_lin > 1e-3
    return ok, f"extended |c|inf {c_max:.1e}, semi-norm {norm_ext:.1e}; linear semi-norm {norm_lin:.3g}", {
        "c_max": c_max,
        "seminorm_extended": norm_ext,
        "seminorm_linear": norm_lin,
    }


@_timed(10, "leave-one-out shortcut vs refits")
def criterion_loocv(seed: int = SEED):
    """Rippa shortcut equals N brute-force refits to 1e-8 relative."""
    rng = np.random.default_rng(seed)
    kernels = [
        GreenKernel("gaussian", 1, 4.0),
        GreenKernel("cubic"),
        GreenKernel("thin_plate", dim=2),
        GreenKernel("matern", 1, 2.0, 2),
        GreenKernel("tension", scale=1.0),
    ]
    worst = 0.0
    for kernel in kernels:
        n = 8 if kernel.name == "gaussian" else int(rng.integers(10, 31))
        X = random_sites(rng, n, kernel.dim)
        data = Dataset(X, smooth_values(X))
        space = null_space(kernel)
        fast = loocv_residuals(kernel, space, data)
        slow = loocv_bruteforce(kernel, space, data)
        worst = max(worst, float(np.max(np.abs(fast - slow)) / np.max(np.abs(slow))))
    return worst <= 1e-8, f"worst relative difference {worst:.1e} over 5 problems", {"worst": worst}


CRITERIA = (
    criterion_interpolation,
    criterion_cpd,
    criterion_natural_spline,
    criterion_seminorm,
    criterion_symbols,
    criterion_order,
    criterion_rk,
    criterion_pythagoras,
    criterion_extended_space,
    criterion_loocv,
)


def run_all(seed: int = SEED, fail_fast: bool = False, echo=None) -> list[CriterionResult]:
    """Run every criterion; ``echo`` receives each result as it finishes."""
    results = []
    for crit in CRITERIA:
        res = crit(seed)
        results.append(res)
        if echo is not None:
            echo(res)
        if fail_fast and not res.ok:
            break
    return results
