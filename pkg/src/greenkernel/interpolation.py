"""Kernel interpolation with polynomial augmentation.

The interpolant s(x) = sum_j c_j G(x - x_j) + sum_k beta_k p_k(x) solves the
bordered system

    [A  P] [c   ]   [Y]
    [P' 0] [beta] = [0],    A_jk = G(x_j - x_k),  P_jk = p_k(x_j),

by a symmetric-indefinite (Bunch-Kaufman) factorization.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.spatial.distance import pdist

from greenkernel.errors import NumericalError, ValidationError
from greenkernel.kernels import GreenKernel
from greenkernel.polyspace import PolySpace, is_unisolvent

RESIDUAL_TOL = 1e-9
MOMENT_TOL = 1e-8
TIE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != Y.shape[0]:
            raise ValidationError("X must be (N, d) and Y must have N values")
        if X.shape[0] == 0:
            raise ValidationError("empty dataset")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValidationError("data must be finite")
        if X.shape[0] > 1 and pdist(X).min() == 0:
            raise ValidationError("data sites must be pairwise distinct")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> Dataset:
        return Dataset(self.X[idx], self.Y[idx])


@dataclass(frozen=True, eq=False)
class GramSystem:
    A: np.ndarray
    P: np.ndarray
    rhs: np.ndarray

    @classmethod
    def assemble(cls, kernel: GreenKernel, space: PolySpace, data: Dataset, ridge: float = 0.0) -> GramSystem:
        A = kernel.gram(data.X)
        A = 0.5 * (A + A.T)
        if ridge:
            A = A + ridge * np.eye(data.n)
        P = space.vandermonde(data.X)
        rhs = np.concatenate([data.Y, np.zeros(space.size)])
        return cls(A, P, rhs)

    @property
    def matrix(self) -> np.ndarray:
        Q = self.P.shape[1]
        return np.block([[self.A, self.P], [self.P.T, np.zeros((Q, Q))]])

    def solve(self) -> np.ndarray:
        B = self.matrix
        with warnings.catch_warnings():
            warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
            try:
                return scipy.linalg.solve(B, self.rhs, assume_a="sym")
            except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError) as exc:
                cond = np.linalg.cond(B)
                raise NumericalError(f"interpolation system is singular to working precision (cond {cond:.3g})") from exc


@dataclass(frozen=True, eq=False)
class InterpolationModel:
    """A fitted interpolant; treat as immutable."""

    kernel: GreenKernel
    space: PolySpace
    centers: np.ndarray
    c: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        for name in ("centers", "c", "beta"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.centers.ndim == 1:
            object.__setattr__(self, "centers", self.centers.reshape(-1, self.kernel.dim))

    @property
    def dim(self) -> int:
        return self.kernel.dim

    def predict(self, points) -> np.ndarray:
        """s(x) at each row of ``points``."""
        pts = _as_points(points, self.dim)
        out = self.kernel.gram(pts, self.centers) @ self.c if self.c.size else np.zeros(len(pts))
        if self.space.size:
            out = out + self.space.vandermonde(pts) @ self.beta
        return out

    def derivative(self, points, alpha) -> np.ndarray:
        """D^alpha s(x), applied term by term."""
        pts = _as_points(points, self.dim)
        out = np.zeros(len(pts))
        if self.c.size:
            out += self.kernel.derivative_gram(pts, self.centers, alpha) @ self.c
        if self.space.size:
            out += self.space.derivative_matrix(pts, alpha) @ self.beta
        return out

    def gram_matrix(self) -> np.ndarray:
        return self.kernel.gram(self.centers)

    def to_json(self) -> dict:
        return {
            "kernel": self.kernel.to_json(),
            "space": self.space.to_json(),
            "centers": self.centers.tolist(),
            "c": self.c.tolist(),
            "beta": self.beta.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> InterpolationModel:
        kernel = GreenKernel.from_json(obj["kernel"])
        space = PolySpace.from_json(obj["space"])
        centers = np.asarray(obj["centers"], dtype=float).reshape(-1, kernel.dim)
        return cls(kernel, space, centers, np.asarray(obj["c"], float), np.asarray(obj["beta"], float))


def _as_points(points, dim) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if dim == 1 and (pts.ndim < 2 or pts.shape[-1] != 1):
        pts = pts.reshape(-1, 1)
    pts = np.atleast_2d(pts)
    if pts.shape[1] != dim:
        raise ValidationError(f"points have dimension {pts.shape[1]}, model has {dim}")
    return pts


def _check_compatible(kernel: GreenKernel, space: PolySpace, data: Dataset):
    if kernel.dim != data.dim or space.dim != data.dim:
        raise ValidationError(f"dimension mismatch: kernel {kernel.dim}, space {space.dim}, data {data.dim}")
    if data.n < space.size:
        raise ValidationError(f"need at least {space.size} data sites, got {data.n}")
    if space.size:
        ok, cond = is_unisolvent(space, data.X)
        if not ok:
            raise ValidationError(f"data sites are not unisolvent for the polynomial space (condition {cond:.3g})")


def fit(kernel: GreenKernel, space: PolySpace, data: Dataset, ridge: float = 0.0) -> InterpolationModel:
    """Solve the bordered interpolation system.

    ``ridge`` adds ridge * I to A; leave it at 0 except for kernels without a
    CPD guarantee.

    Raises
    ------
    ValidationError
        Non-unisolvent sites or dimension mismatch.
    NumericalError
        Singular system, or a residual above 1e-9 (1 + max|Y|) when ``ridge == 0``.
    """
    _check_compatible(kernel, space, data)
    system = GramSystem.assemble(kernel, space, data, ridge)
    sol = system.solve()
    model = InterpolationModel(kernel, space, data.X, sol[: data.n], sol[data.n :])
    if ridge == 0.0:
        resid = np.max(np.abs(model.predict(data.X) - data.Y))
        if resid > RESIDUAL_TOL * (1 + np.max(np.abs(data.Y))):
            raise NumericalError(f"interpolation residual {resid:.3g} exceeds tolerance")
    return model


def moment_residual(model: InterpolationModel) -> float:
    """max |P' c|, which the moment conditions force to zero."""
    if not model.space.size:
        return 0.0
    return float(np.max(np.abs(model.space.vandermonde(model.centers).T @ model.c)))


def gram_seminorm_squared(model: InterpolationModel) -> float:
    """c' A c, the squared native-space semi-norm of the interpolant."""
    return float(model.c @ model.gram_matrix() @ model.c)


def gram_seminorm(model: InterpolationModel) -> float:
    """sqrt(c' A c); round-off negatives down to -1e-12 * scale clamp to 0."""
    q = gram_seminorm_squared(model)
    if q < 0:
        A = model.gram_matrix()
        scale = float(np.abs(model.c).sum() ** 2 * max(np.abs(A).max(), 1e-300))
        if q < -1e-12 * scale:
            raise NumericalError(f"negative quadratic form {q:.3g}: kernel is not CPD for this space")
        q = 0.0
    return float(np.sqrt(q))


# ----------------------------------------------------------------------
# leave-one-out cross-validation


def loocv_residuals(kernel: GreenKernel, space: PolySpace, data: Dataset) -> np.ndarray:
    """e_k = y_k - s^(k)(x_k) by Rippa's shortcut e_k = z_k / (B^-1)_kk."""
    _check_compatible(kernel, space, data)
    if data.n < space.size + 2:
        raise ValidationError(f"leave-one-out needs at least {space.size + 2} sites")
    if space.size:
        for k in range(data.n):
            ok, cond = is_unisolvent(space, np.delete(data.X, k, axis=0))
            if not ok:
                raise ValidationError(f"leaving out site {k} breaks unisolvence (condition {cond:.3g})")
    system = GramSystem.assemble(kernel, space, data)
    B = system.matrix
    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            Binv = scipy.linalg.inv(B)
        except (scipy.linalg.LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise NumericalError("interpolation system is singular to working precision") from exc
    # inv() does not warn on ill-conditioning, so check the 1-norm condition here
    cond = np.abs(B).sum(axis=0).max() * np.abs(Binv).sum(axis=0).max()
    if not np.isfinite(cond) or cond * np.finfo(float).eps >= 1:
        raise NumericalError(f"interpolation system is singular to working precision (cond {cond:.3g})")
    z = Binv @ system.rhs
    n = data.n
    return z[:n] / np.diag(Binv)[:n]


def loocv_error(kernel: GreenKernel, space: PolySpace, data: Dataset) -> float:
    """Root-mean-square leave-one-out error."""
    e = loocv_residuals(kernel, space, data)
    return float(np.sqrt(np.mean(e * e)))


def loocv_bruteforce(kernel: GreenKernel, space: PolySpace, data: Dataset) -> np.ndarray:
    """The same residuals from N explicit refits; the oracle for the shortcut."""
    out = np.empty(data.n)
    for k in range(data.n):
        keep = np.delete(np.arange(data.n), k)
        model = fit(kernel, space, data.subset(keep))
        out[k] = data.Y[k] - model.predict(data.X[k : k + 1])[0]
    return out


@dataclass(frozen=True)
class ScaleSweep:
    best_scale: float
    scales: tuple[float, ...]
    errors: tuple[float, ...]

    def to_json(self) -> dict:
        return {"best_scale": self.best_scale, "scales": list(self.scales), "errors": list(self.errors)}


def loocv_scale_sweep(kernel: GreenKernel, space: PolySpace, data: Dataset, scales) -> ScaleSweep:
    """LOOCV error over candidate scales; ties go to the smallest scale.

    Errors within 1e-12 max|Y| of the minimum count as tied, so round-off
    differences between exact reproductions do not decide the winner.
    Scales whose system is numerically singular score ``inf``.
    """
    if kernel.scale is None:
        raise ValidationError(f"{kernel.name} has no scale parameter")
    scales = sorted(float(s) for s in scales)
    errors = []
    for s in scales:
        k = GreenKernel(kernel.name, kernel.dim, s, kernel.smoothness, kernel.regularization)
        try:
            errors.append(loocv_error(k, space, data))
        except NumericalError:
            errors.append(float("inf"))
    err = np.asarray(errors)
    tie = TIE_TOL * max(float(np.max(np.abs(data.Y))), np.finfo(float).tiny)
    best = scales[int(np.flatnonzero(err <= err.min() + tie)[0])] if np.isfinite(err.min()) else scales[0]
    return ScaleSweep(best, tuple(scales), tuple(errors))


# ----------------------------------------------------------------------
# minimum-norm property


@dataclass(frozen=True)
class OrthogonalityReport:
    large: float
    small: float
    difference: float
    relative_gap: float
    passed: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def orthogonality_check(model_small: InterpolationModel, model_large: InterpolationModel,
                        rtol: float = 1e-8) -> OrthogonalityReport:
    """Check |s_L|^2 = |s_S|^2 + |s_L - s_S|^2 in the Gram semi-norm.

    ``model_large`` must interpolate on a superset of the small model's
    centers; the difference is evaluated on the large center set.
    """
    if model_small.kernel != model_large.kernel or model_small.space != model_large.space:
        raise ValidationError("models must share kernel and polynomial space")
    big = model_large.centers
    index = []
    for x in model_small.centers:
        hit = np.flatnonzero(np.all(big == x, axis=1))
        if hit.size == 0:
            raise ValidationError("large model's centers must contain the small model's centers")
        index.append(int(hit[0]))
    A = model_large.gram_matrix()
    c_small = np.zeros(len(big))
    c_small[index] = model_small.c
    c_diff = model_large.c - c_small
    large = float(model_large.c @ A @ model_large.c)
    small = float(c_small @ A @ c_small)
    diff = float(c_diff @ A @ c_diff)
    gap = abs(large - small - diff) / max(abs(large), np.finfo(float).tiny)
    if large == 0.0 and small == 0.0 and diff == 0.0:
        gap = 0.0
    return OrthogonalityReport(large, small, diff, gap, bool(gap <= rtol))


# ----------------------------------------------------------------------
# stochastic CPD certificate


@dataclass(frozen=True)
class CPDReport:
    kernel: str
    trials: int
    max_points: int
    min_scaled_form: float
    n_nonpositive: int
    passed: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def cpd_certificate(kernel: GreenKernel, space: PolySpace | None = None, trials: int = 1000,
                    max_points: int = 20, seed: int = 0, low: float = 0.0, high: float = 1.0) -> CPDReport:
    """Random trials of the constrained quadratic form c' A c with P' c = 0.

    Each trial draws between Q + 1 and ``max_points`` uniform points and a
    Gaussian c projected onto the null space of P'. The form is scaled by
    |c|^2 max|A|; the certificate passes when every trial is strictly
    positive.
    """
    space = space if space is not None else PolySpace.for_order(kernel.dim, kernel.cpd_order)
    rng = np.random.default_rng(seed)
    lo_n = space.size + 1
    if max_points < lo_n:
        raise ValidationError(f"max_points must be at least {lo_n}")
    worst = np.inf
    bad = 0
    for _ in range(trials):
        n = int(rng.integers(lo_n, max_points + 1))
        X = rng.uniform(low, high, (n, kernel.dim))
        A = kernel.gram(X)
        z = rng.standard_normal(n)
        if space.size:
            Z = scipy.linalg.null_space(space.vandermonde(X).T)
            c = Z @ rng.standard_normal(Z.shape[1])
        else:
            c = z
        scale = float(c @ c) * np.abs(A).max()
        # an all-zero Gram matrix (e.g. one cubic site) gives a zero form
        q = float(c @ A @ c) / scale if scale > 0 else 0.0
        worst = min(worst, q)
        bad += q <= 0
    return CPDReport(kernel.describe(), trials, max_points, float(worst), int(bad), bool(bad == 0))
