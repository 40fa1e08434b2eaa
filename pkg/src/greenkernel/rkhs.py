"""Positive definite reproducing kernel built from a CPD kernel.

With a unisolvent set Xi and its Lagrange basis q_1..q_Q,

    K(x, y) = Phi(x - y) - sum_k q_k(x) Phi(xi_k - y) - sum_l q_l(y) Phi(x - xi_l)
              + sum_{k,l} q_k(x) q_l(y) Phi(xi_k - xi_l) + sum_k q_k(x) q_k(y).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from greenkernel.errors import NumericalError, ValidationError
from greenkernel.interpolation import Dataset, _as_points, fit
from greenkernel.kernels import GreenKernel
from greenkernel.polyspace import PolySpace, UnisolventSet, select_unisolvent

PD_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class RKKernel:
    phi: GreenKernel
    xi_set: UnisolventSet
    space: PolySpace

    def __post_init__(self):
        # Phi on Xi x Xi is the only table K needs up front
        object.__setattr__(self, "_phi_xixi", self.phi.gram(self.xi_set.xi) if self.space.size else None)

    @property
    def dim(self) -> int:
        return self.phi.dim

    def gram(self, X, Y=None) -> np.ndarray:
        """K(X[i], Y[j]) as an (N, M) matrix; Y defaults to X."""
        X = _as_points(X, self.dim)
        Y = X if Y is None else _as_points(Y, self.dim)
        out = self.phi.gram(X, Y)
        if not self.space.size:
            return out
        xi = self.xi_set.xi
        LX = self.xi_set.lagrange(X)
        LY = self.xi_set.lagrange(Y)
        out = out - LX @ self.phi.gram(xi, Y) - self.phi.gram(X, xi) @ LY.T
        out += LX @ self._phi_xixi @ LY.T + LX @ LY.T
        return out

    def __call__(self, x, y) -> float:
        return float(self.gram(x, y)[0, 0])

    def to_json(self) -> dict:
        return {"phi": self.phi.to_json(), "xi": self.xi_set.xi.tolist(), "space": self.space.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> RKKernel:
        phi = GreenKernel.from_json(obj["phi"])
        space = PolySpace.from_json(obj["space"])
        return build_rk(phi, UnisolventSet.from_points(space, obj["xi"]), space)


def build_rk(phi: GreenKernel, xi_set: UnisolventSet | None, space: PolySpace,
             candidates=None) -> RKKernel:
    """Assemble K from ``phi`` and a unisolvent set.

    When ``xi_set`` is None, Xi is selected from ``candidates`` by pivoted
    elimination.
    """
    if phi.dim != space.dim:
        raise ValidationError(f"kernel dimension {phi.dim} does not match space dimension {space.dim}")
    if xi_set is None:
        if candidates is None:
            raise ValidationError("either xi_set or candidates must be given")
        xi_set = select_unisolvent(space, _as_points(candidates, phi.dim))
    elif xi_set.space != space:
        xi_set = UnisolventSet.from_points(space, xi_set.xi)
    if phi.cpd_order > 0 and not space.contains_total_degree(phi.cpd_order - 1):
        raise ValidationError(f"space must contain all polynomials of degree < {phi.cpd_order}")
    return RKKernel(phi, xi_set, space)


def _solve_pd(M: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            return scipy.linalg.solve(M, rhs, assume_a="pos")
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise NumericalError(f"K-Gram matrix is singular or indefinite (cond {np.linalg.cond(M):.3g})") from exc


def fit_rk(rk: RKKernel, data: Dataset) -> np.ndarray:
    """Coefficients c of s_K = sum_j c_j K(., x_j) interpolating ``data``."""
    return _solve_pd(rk.gram(data.X), data.Y)


@dataclass(frozen=True)
class EquivalenceReport:
    max_deviation: float
    data_residual: float
    n_grid: int

    def to_json(self) -> dict:
        return dict(self.__dict__)


def check_equivalence(rk: RKKernel, data: Dataset, grid) -> EquivalenceReport:
    """Compare the pure K-span interpolant against Phi plus polynomials.

    The two coincide when Xi is contained in the data sites, since the extra
    point-evaluation term in the K inner product is then fixed by the data.
    """
    grid = _as_points(grid, rk.dim)
    c = fit_rk(rk, data)
    s_k = rk.gram(grid, data.X) @ c
    model = fit(rk.phi, rk.space, data)
    s_phi = model.predict(grid)
    resid = float(np.max(np.abs(rk.gram(data.X) @ c - data.Y)))
    return EquivalenceReport(float(np.max(np.abs(s_k - s_phi))), resid, len(grid))


def min_eigenvalue(M: np.ndarray) -> float:
    return float(scipy.linalg.eigvalsh(0.5 * (M + M.T), subset_by_index=[0, 0])[0])


@dataclass(frozen=True)
class PDReport:
    trials: int
    n_points: int
    min_eigenvalues: tuple[float, ...]
    scaled_min: float
    singular: bool
    passed: bool

    def to_json(self) -> dict:
        ev = np.asarray(self.min_eigenvalues)
        return {
            "trials": self.trials,
            "n_points": self.n_points,
            "min": float(ev.min()),
            "median": float(np.median(ev)),
            "max": float(ev.max()),
            "scaled_min": self.scaled_min,
            "singular": self.singular,
            "passed": self.passed,
        }


def check_pd(rk: RKKernel, trials: int = 100, n_points: int = 8, seed: int = 0,
             low: float = 0.0, high: float = 1.0, points=None) -> PDReport:
    """Minimum eigenvalue of K-Gram matrices on random point sets.

    A minimum eigenvalue below 100 * n * eps * max|K| is flagged as
    numerically singular (rank deficiency). Passes when no trial is
    singular and none falls below -1e-10 * max|K|. ``points`` overrides the
    random draw, e.g. to inject a duplicated site.
    """
    rng = np.random.default_rng(seed)
    mins = []
    worst = np.inf
    for _ in range(trials):
        pts = rng.uniform(low, high, (n_points, rk.dim)) if points is None else _as_points(points, rk.dim)
        M = rk.gram(pts)
        lam = min_eigenvalue(M)
        mins.append(lam)
        worst = min(worst, lam / max(np.abs(M).max(), np.finfo(float).tiny))
    n = n_points if points is None else len(_as_points(points, rk.dim))
    singular = bool(worst <= 100 * n * np.finfo(float).eps)
    passed = not singular and bool(worst > -PD_TOLERANCE)
    return PDReport(trials, n, tuple(mins), float(worst), singular, passed)
