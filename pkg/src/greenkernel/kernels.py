"""Catalog of even, translation-invariant Green functions.

Every entry G(x) = f(||x||) is radial. Entries carry their CPD order, the
closed-form symbol l_hat of the operator they invert, and derivatives.

Derivatives come from one of three routes:

* 1-D exponential entries (tension, sobolev1d, compare_k_s): closed-form
  f^(k)(r) with D^k G(x) = sign(x)^k f^(k)(|x|);
* all other analytic entries: closed forms for g^(k)(t), where G = g(t)
  with t = ||x||^2 / 2, combined coordinate-wise through
  d^a/dx^a g(x^2/2) = sum_j a! / ((2j-a)! (a-j)! 2^(a-j)) x^(2j-a) g^(j);
* regularized_log_bessel: central finite differences.

At the origin a derivative of order k exists only if k <= ``regularity``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from greenkernel.bessel import kv, scaled_kv
from greenkernel.errors import SingularityError, ValidationError

KERNEL_NAMES = (
    "cubic",
    "tension",
    "sobolev1d",
    "compare_k_s",
    "thin_plate",
    "laplacian_tps",
    "polyharmonic",
    "matern",
    "gaussian",
    "regularized_log_bessel",
)
_SCALED = {"tension", "sobolev1d", "matern", "gaussian", "regularized_log_bessel"}
_SMOOTHNESS = {"polyharmonic", "matern"}
_ONE_D = {"cubic", "tension", "sobolev1d", "compare_k_s"}
_TWO_D = {"thin_plate", "laplacian_tps", "regularized_log_bessel"}
_DIRECT_1D = {"tension", "sobolev1d", "compare_k_s"}

# compare_k_s(x) = exp(-sqrt(3)/2 |x|) sin(|x|/2 + pi/6) = Im(exp(i pi/6) exp(w |x|))
_KS_W = complex(-math.sqrt(3.0) / 2.0, 0.5)
_KS_PHASE = complex(math.cos(math.pi / 6), math.sin(math.pi / 6))

_EPS = np.finfo(float).eps


def _coord_coeff(a: int, j: int) -> float:
    return math.factorial(a) / (math.factorial(2 * j - a) * math.factorial(a - j) * 2 ** (a - j))


@dataclass(frozen=True)
class GreenKernel:
    """Descriptor of one catalog entry; immutable and hashable.

    Parameters
    ----------
    name : str
        One of ``KERNEL_NAMES``.
    dim : int
        Spatial dimension d.
    scale : float, optional
        sigma > 0 for the scaled entries (defaults to 1).
    smoothness : int, optional
        m for polyharmonic, n for matern.
    regularization : float, optional
        r > 0, only for regularized_log_bessel.
    """

    name: str
    dim: int = 1
    scale: float | None = None
    smoothness: int | None = None
    regularization: float | None = None

    def __post_init__(self):
        name, d = self.name, self.dim
        if name not in KERNEL_NAMES:
            raise ValidationError(f"unknown kernel {name!r}; choose from {', '.join(KERNEL_NAMES)}")
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ValidationError("dim must be a positive integer")
        object.__setattr__(self, "dim", int(d))
        if name in _ONE_D and d != 1:
            raise ValidationError(f"{name} requires dim = 1")
        if name in _TWO_D and d != 2:
            raise ValidationError(f"{name} requires dim = 2")

        if name in _SCALED:
            scale = 1.0 if self.scale is None else float(self.scale)
            if not np.isfinite(scale) or scale <= 0:
                raise ValidationError("scale must be positive")
            object.__setattr__(self, "scale", scale)
        elif self.scale is not None:
            raise ValidationError(f"{name} takes no scale parameter")

        if name in _SMOOTHNESS:
            if self.smoothness is None:
                raise ValidationError(f"{name} requires a smoothness parameter")
            s = int(self.smoothness)
            if s != self.smoothness or 2 * s <= d:
                raise ValidationError(f"{name} requires an integer smoothness > dim/2")
            object.__setattr__(self, "smoothness", s)
        elif self.smoothness is not None:
            raise ValidationError(f"{name} takes no smoothness parameter")

        if name == "regularized_log_bessel":
            reg = self.regularization
            if reg is None or not float(reg) > 0:
                raise ValidationError("regularized_log_bessel requires regularization > 0")
            object.__setattr__(self, "regularization", float(reg))
        elif self.regularization is not None:
            raise ValidationError(f"{name} takes no regularization parameter")

    # ------------------------------------------------------------------
    # metadata

    @property
    def cpd_order(self) -> int:
        return {
            "cubic": 2,
            "tension": 1,
            "sobolev1d": 0,
            "compare_k_s": 0,
            "thin_plate": 2,
            "laplacian_tps": 2,
            "polyharmonic": self.smoothness,
            "matern": 0,
            "gaussian": 0,
            "regularized_log_bessel": 1,
        }[self.name]

    @property
    def regularity(self) -> float:
        """Largest k such that every k-th derivative of G is continuous at 0."""
        name = self.name
        if name in ("cubic", "tension", "sobolev1d", "compare_k_s"):
            return 2
        if name in ("thin_plate", "laplacian_tps"):
            return 1
        if name == "polyharmonic":
            return 2 * self.smoothness - self.dim - 1
        if name == "matern":
            return 2 * self.smoothness - self.dim - 1
        if name == "gaussian":
            return math.inf
        return 0

    @property
    def has_symbol(self) -> bool:
        return self.name != "regularized_log_bessel"

    @cached_property
    def _matern_const(self) -> float:
        n, d, s = self.smoothness, self.dim, self.scale
        return 2.0 ** (1 - n - d / 2) / (math.pi ** (d / 2) * math.gamma(n) * s ** (2 * n - d))

    @cached_property
    def _polyharmonic(self) -> tuple[float, int, bool]:
        """(constant, power, has_log) with G = C r^p (log r)^has_log."""
        if self.name == "cubic":
            return 1.0 / 12.0, 3, False
        if self.name in ("thin_plate", "laplacian_tps"):
            return 1.0 / (8.0 * math.pi), 2, True
        m, d = self.smoothness, self.dim
        p = 2 * m - d
        if d % 2:
            c = math.gamma(d / 2 - m) / (2 ** (2 * m) * math.pi ** (d / 2) * math.factorial(m - 1))
            return c, p, False
        c = (-1) ** (m + d // 2 - 1) / (
            2 ** (2 * m - 1) * math.pi ** (d / 2) * math.factorial(m - 1) * math.factorial(m - d // 2)
        )
        return c, p, True

    # ------------------------------------------------------------------
    # input handling

    def _points(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        if x.ndim == 0 or x.shape[-1] != self.dim:
            raise ValidationError(f"expected points of dimension {self.dim}")
        if not np.all(np.isfinite(x)):
            raise ValidationError("points must be finite")
        return x

    # ------------------------------------------------------------------
    # values

    def profile(self, r) -> np.ndarray:
        """f(r) with G(x) = f(||x||), for r >= 0."""
        r = np.asarray(r, dtype=float)
        name, s = self.name, self.scale
        if name == "tension":
            return -(np.exp(-s * r) + s * r) / (2 * s**3)
        if name == "sobolev1d":
            return (1 + s * r) * np.exp(-s * r) / (4 * s**3)
        if name == "compare_k_s":
            return np.exp(-math.sqrt(3) / 2 * r) * np.sin(r / 2 + math.pi / 6)
        if name == "matern":
            mu = self.smoothness - self.dim / 2
            return self._matern_const * scaled_kv(mu, s * r)
        if name == "gaussian":
            return s**self.dim / math.pi ** (self.dim / 2) * np.exp(-((s * r) ** 2))
        if name == "regularized_log_bessel":
            z = s * r + self.regularization
            return -(kv(0, z) + np.log(z)) / (2 * math.pi * s**2)
        c, p, has_log = self._polyharmonic
        out = c * r**p
        if has_log:
            with np.errstate(divide="ignore", invalid="ignore"):
                out = np.where(r > 0, out * np.log(np.where(r > 0, r, 1.0)), 0.0)
        return out

    def evaluate(self, x) -> np.ndarray:
        """G(x) for points of shape (..., dim); returns shape (...)."""
        pts = self._points(x)
        return self.profile(np.linalg.norm(pts, axis=-1))

    __call__ = evaluate

    def gram(self, X, Y=None) -> np.ndarray:
        """Matrix G(X_i - Y_j)."""
        X = self._points(X).reshape(-1, self.dim)
        Y = X if Y is None else self._points(Y).reshape(-1, self.dim)
        return self.evaluate(X[:, None, :] - Y[None, :, :])

    # ------------------------------------------------------------------
    # derivatives

    def radial_derivative(self, r, k: int) -> np.ndarray:
        """f^(k)(r) for r > 0 (right derivative at r = 0) for the 1-D exponential entries."""
        r = np.asarray(r, dtype=float)
        s = self.scale
        if self.name == "tension":
            if k == 0:
                return self.profile(r)
            if k == 1:
                return (np.exp(-s * r) - 1) / (2 * s**2)
            return -((-s) ** k) * np.exp(-s * r) / (2 * s**3)
        if self.name == "sobolev1d":
            return (-s) ** k * np.exp(-s * r) * (1 + s * r - k) / (4 * s**3)
        if self.name == "compare_k_s":
            return np.imag(_KS_PHASE * _KS_W**k * np.exp(_KS_W * r))
        raise ValidationError(f"no direct radial derivative for {self.name}")

    def t_derivative(self, r, k: int) -> np.ndarray:
        """g^(k)(t) at t = r^2/2 (that is, (r^-1 d/dr)^k f), for r > 0."""
        r = np.asarray(r, dtype=float)
        if self.name == "gaussian":
            s, d = self.scale, self.dim
            return s**d / math.pi ** (d / 2) * (-2 * s * s) ** k * np.exp(-((s * r) ** 2))
        if self.name == "matern":
            s = self.scale
            mu = self.smoothness - self.dim / 2
            return self._matern_const * (-s * s) ** k * scaled_kv(mu - k, s * r)
        a, b, p = self._t_log_coeffs(k)
        q = p - 2 * k
        out = b * r**q
        if a:
            out = out + a * r**q * np.log(r)
        return out

    def _t_log_coeffs(self, k: int) -> tuple[float, float, int]:
        # g^(k) = a r^(p-2k) log r + b r^(p-2k)
        c, p, has_log = self._polyharmonic
        a, b = (c, 0.0) if has_log else (0.0, c)
        for i in range(k):
            a, b = a * (p - 2 * i), b * (p - 2 * i) + a
        return a, b, p

    def _t_derivative_origin(self, k: int) -> float:
        if self.name == "gaussian":
            return float(self.t_derivative(0.0, k))
        if self.name == "matern":
            mu = self.smoothness - self.dim / 2 - k
            if mu <= 0:
                raise SingularityError(f"matern derivative of order {2 * k} is singular at 0")
            return float(self._matern_const * (-self.scale**2) ** k * 2.0 ** (mu - 1) * math.gamma(mu))
        a, b, p = self._t_log_coeffs(k)
        q = p - 2 * k
        if q > 0:
            return 0.0
        if q == 0 and a == 0:
            return b
        raise SingularityError(f"{self.name} derivative of order {2 * k} is singular at 0")

    def derivative(self, x, alpha) -> np.ndarray:
        """D^alpha G at points of shape (..., dim).

        Raises
        ------
        SingularityError
            If a point is the origin and |alpha| exceeds ``regularity``.
        """
        pts = self._points(x)
        alpha = tuple(int(a) for a in np.atleast_1d(alpha))
        if len(alpha) != self.dim or min(alpha) < 0:
            raise ValidationError(f"multi-index {alpha} does not match dim {self.dim}")
        order = sum(alpha)
        if order == 0:
            return self.evaluate(pts)
        r = np.linalg.norm(pts, axis=-1)
        at_origin = r == 0
        if at_origin.any() and order > self.regularity:
            raise SingularityError(f"{self.name}: derivative of order {order} does not exist at 0")
        if self.name == "regularized_log_bessel":
            return self._finite_difference(pts, alpha)
        if self.name in _DIRECT_1D:
            x1 = pts[..., 0]
            out = np.sign(x1) ** order * self.radial_derivative(r, order)
            if order % 2 == 0:
                return np.where(at_origin, self.radial_derivative(0.0, order), out)
            return np.where(at_origin, 0.0, out)
        return self._t_path(pts, r, alpha, at_origin)

    def _t_path(self, pts, r, alpha, at_origin):
        out = np.zeros(r.shape)
        safe = ~at_origin
        rs = r[safe]
        ps = pts[safe]
        ranges = [range((a + 1) // 2, a + 1) for a in alpha]
        gcache = {}
        for js in itertools.product(*ranges):
            k = sum(js)
            if k not in gcache:
                gcache[k] = self.t_derivative(rs, k)
            term = gcache[k].copy()
            for i, (a, j) in enumerate(zip(alpha, js)):
                term *= _coord_coeff(a, j)
                if 2 * j - a:
                    term *= ps[:, i] ** (2 * j - a) if ps.ndim == 2 else ps[..., i] ** (2 * j - a)
            out[safe] += term
        if at_origin.any():
            if all(a % 2 == 0 for a in alpha):
                c = math.prod(_coord_coeff(a, a // 2) for a in alpha)
                out[at_origin] = c * self._t_derivative_origin(sum(alpha) // 2)
            else:
                out[at_origin] = 0.0
        return out

    def _finite_difference(self, pts, alpha):
        order = sum(alpha)
        scale = 1.0 + np.linalg.norm(pts, axis=-1)
        h = _EPS ** (1.0 / (2 + order)) * scale if order > 1 else _EPS ** (1.0 / 3.0) * scale
        stencil = []
        for i, a in enumerate(alpha):
            stencil.append([(a / 2 - k, (-1) ** k * math.comb(a, k)) for k in range(a + 1)])
        out = np.zeros(pts.shape[:-1])
        for combo in itertools.product(*stencil):
            shift = np.array([off for off, _ in combo])
            weight = math.prod(w for _, w in combo)
            out += weight * self.evaluate(pts + h[..., None] * shift)
        return out / h**order

    def derivative_gram(self, X, Y, alpha) -> np.ndarray:
        """Matrix D^alpha G(X_i - Y_j)."""
        X = self._points(X).reshape(-1, self.dim)
        Y = self._points(Y).reshape(-1, self.dim)
        return self.derivative(X[:, None, :] - Y[None, :, :], alpha)

    # ------------------------------------------------------------------
    # Fourier side

    def l_hat(self, omega) -> np.ndarray:
        """Closed-form symbol of the operator L with L G = delta."""
        w = self._points(omega)
        w2 = np.sum(w * w, axis=-1)
        name, s = self.name, self.scale
        if name in ("cubic", "thin_plate", "laplacian_tps"):
            return w2**2
        if name == "tension":
            return w2**2 + s * s * w2
        if name == "sobolev1d":
            return (s * s + w2) ** 2
        if name == "compare_k_s":
            return (1 + w2 + w2**2) / math.sqrt(3)
        if name == "polyharmonic":
            return w2**self.smoothness
        if name == "matern":
            return (s * s + w2) ** self.smoothness
        if name == "gaussian":
            return np.exp(w2 / (4 * s * s))
        raise ValidationError(f"{name} has no closed-form symbol")

    def fourier_symbol(self, omega) -> np.ndarray:
        """Generalized Fourier transform (2 pi)^(-d/2) / l_hat(omega)."""
        w = self._points(omega)
        if self.cpd_order > 0 and np.any(np.all(w == 0, axis=-1)):
            raise ValidationError(f"{self.name}: generalized Fourier transform is undefined at omega = 0")
        return (2 * math.pi) ** (-self.dim / 2) / self.l_hat(w)

    # ------------------------------------------------------------------
    # serialization

    def to_json(self) -> dict:
        out = {"name": self.name, "dim": self.dim}
        for key in ("scale", "smoothness", "regularization"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    @classmethod
    def from_json(cls, obj: dict) -> GreenKernel:
        unknown = set(obj) - {"name", "dim", "scale", "smoothness", "regularization"}
        if unknown:
            raise ValidationError(f"unknown kernel fields: {sorted(unknown)}")
        return cls(
            obj["name"],
            int(obj.get("dim", 1)),
            obj.get("scale"),
            obj.get("smoothness"),
            obj.get("regularization"),
        )

    def describe(self) -> str:
        parts = [f"{self.name}(d={self.dim}"]
        if self.scale is not None:
            parts.append(f"sigma={self.scale:g}")
        if self.smoothness is not None:
            parts.append(f"order={self.smoothness}")
        if self.regularization is not None:
            parts.append(f"r={self.regularization:g}")
        return ", ".join(parts) + ")"


def default_catalog() -> list[GreenKernel]:
    """One representative descriptor per catalog entry."""
    return [
        GreenKernel("cubic"),
        GreenKernel("tension", scale=1.0),
        GreenKernel("sobolev1d", scale=1.0),
        GreenKernel("compare_k_s"),
        GreenKernel("thin_plate", dim=2),
        GreenKernel("laplacian_tps", dim=2),
        GreenKernel("polyharmonic", dim=3, smoothness=2),
        GreenKernel("matern", dim=1, scale=1.0, smoothness=2),
        GreenKernel("gaussian", dim=1, scale=1.0),
        GreenKernel("regularized_log_bessel", dim=2, scale=1.0, regularization=0.1),
    ]
