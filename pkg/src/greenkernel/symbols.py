"""Fourier-symbol calculus for vectors of translation-invariant operators.

An operator vector P = (P_1, ..., P_n) is stored entry by entry. Differential
entries keep their constant coefficients, so that the symbol
p_hat(omega) = sum_alpha c_alpha (i omega)^alpha can be formed and the
operator can also be applied to an interpolant. Closed-form entries only know
their symbol. The symbol of L = P*^T P is l_hat = sum_j |p_hat_j|^2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from greenkernel.errors import NumericalError, ValidationError
from greenkernel.kernels import GreenKernel

DEFAULT_SEED = 0x5EED
SLOPE_WINDOW = (1e-4, 1e-2)
SLOPE_RADII = 32
SLOPE_DIRECTIONS = 8
SLOPE_TOLERANCE = 0.05


@dataclass(frozen=True)
class DifferentialEntry:
    """sum_alpha c_alpha D^alpha with real constant coefficients."""

    terms: tuple[tuple[tuple[int, ...], float], ...]

    def __post_init__(self):
        terms = tuple((tuple(int(a) for a in alpha), float(c)) for alpha, c in self.terms)
        if not terms:
            raise ValidationError("differential entry needs at least one term")
        if len({len(alpha) for alpha, _ in terms}) != 1:
            raise ValidationError("multi-indices in one entry must share a dimension")
        object.__setattr__(self, "terms", terms)

    @property
    def dim(self) -> int:
        return len(self.terms[0][0])

    @property
    def order(self) -> int:
        return max(sum(alpha) for alpha, _ in self.terms)

    def symbol(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        out = np.zeros(w.shape[:-1], dtype=complex)
        for alpha, c in self.terms:
            out += c * np.prod((1j * w) ** np.array(alpha), axis=-1)
        return out

    def to_json(self) -> dict:
        return {"type": "differential", "terms": [{"alpha": list(a), "coeff": c} for a, c in self.terms]}


@dataclass(frozen=True)
class ClosedFormEntry:
    """An entry known only through its symbol; currently the Gaussian's.

    ``gaussian``: p_hat(omega) = exp(|omega|^2 / (8 sigma^2)), so that
    |p_hat|^2 = exp(|omega|^2 / (4 sigma^2)).
    """

    name: str
    dim: int
    scale: float = 1.0

    def __post_init__(self):
        if self.name != "gaussian":
            raise ValidationError(f"unknown closed-form symbol {self.name!r}")

    order = math.inf

    def symbol(self, omega) -> np.ndarray:
        w = np.asarray(omega, dtype=float)
        with np.errstate(over="ignore"):
            return np.exp(np.sum(w * w, axis=-1) / (8 * self.scale**2)).astype(complex)

    def to_json(self) -> dict:
        return {"type": "closed_form", "name": self.name, "dim": self.dim, "scale": self.scale}


@dataclass(frozen=True)
class OperatorVector:
    entries: tuple
    dim: int
    claimed_order: int = 0
    label: str = ""
    # remainder bound of a truncated infinite vector, if this is one
    truncation_remainder: float | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        for e in self.entries:
            if e.dim != self.dim:
                raise ValidationError("operator entry dimension mismatch")

    @property
    def is_differential(self) -> bool:
        return all(isinstance(e, DifferentialEntry) for e in self.entries)

    def symbols(self, omega) -> np.ndarray:
        """p_hat_j(omega), shape (..., n)."""
        w = _as_omega(omega, self.dim)
        return np.stack([e.symbol(w) for e in self.entries], axis=-1)

    def l_symbol(self, omega) -> np.ndarray:
        """l_hat(omega) = sum_j |p_hat_j(omega)|^2."""
        p = self.symbols(omega)
        with np.errstate(over="ignore", invalid="ignore"):
            return np.sum(p.real**2 + p.imag**2, axis=-1)

    def truncated(self, n_max: int = 20) -> OperatorVector:
        """Replace closed-form entries by their first ``n_max + 1`` differential blocks."""
        if self.is_differential:
            return self
        entries = []
        remainder = 0.0
        for e in self.entries:
            if isinstance(e, DifferentialEntry):
                entries.append(e)
                continue
            entries.extend(gaussian_entries(e.dim, e.scale, n_max))
            remainder = 1.0 / (math.factorial(n_max) * 4.0**n_max * e.scale ** (2 * n_max))
        return OperatorVector(tuple(entries), self.dim, self.claimed_order, self.label + f"[n_max={n_max}]", remainder)

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "claimed_order": self.claimed_order,
            "label": self.label,
            "entries": [e.to_json() for e in self.entries],
        }

    @classmethod
    def from_json(cls, obj) -> OperatorVector:
        if isinstance(obj, list):
            obj = {"entries": obj}
        entries = []
        for item in obj["entries"]:
            if item["type"] == "differential":
                entries.append(DifferentialEntry(tuple((tuple(t["alpha"]), t["coeff"]) for t in item["terms"])))
            elif item["type"] == "closed_form":
                entries.append(ClosedFormEntry(item["name"], int(item["dim"]), float(item.get("scale", 1.0))))
            else:
                raise ValidationError(f"unknown operator entry type {item['type']!r}")
        dim = obj.get("dim") or entries[0].dim
        return cls(tuple(entries), int(dim), int(obj.get("claimed_order", 0)), obj.get("label", ""))


def _as_omega(omega, dim) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    if dim == 1 and (w.ndim == 0 or w.shape[-1] != 1):
        w = w[..., None]
    if w.shape[-1] != dim:
        raise ValidationError(f"frequencies must have dimension {dim}")
    return w


# ----------------------------------------------------------------------
# builders


def _unit(dim, i, k=1):
    e = [0] * dim
    e[i] = k
    return tuple(e)


def _laplacian_power(dim: int, k: int, extra: tuple[int, ...] | None = None):
    """Terms of Delta^k (times D^extra): sum_{|beta|=k} k!/beta! D^(2 beta + extra)."""
    extra = extra or (0,) * dim
    terms = []
    for beta in itertools.product(range(k + 1), repeat=dim):
        if sum(beta) != k:
            continue
        coeff = math.factorial(k) / math.prod(math.factorial(b) for b in beta)
        terms.append((tuple(2 * b + e for b, e in zip(beta, extra)), coeff))
    return terms


def _scaled(terms, w):
    return DifferentialEntry(tuple((a, w * c) for a, c in terms))


def graded_laplacian_entries(dim: int, weights: list[float]):
    """Blocks Q_j = w_j Delta^k (j = 2k) or w_j Delta^k grad (j = 2k + 1)."""
    out = []
    for j, w in enumerate(weights):
        k = j // 2
        if j % 2 == 0:
            out.append(_scaled(_laplacian_power(dim, k), w))
        else:
            for i in range(dim):
                out.append(_scaled(_laplacian_power(dim, k, _unit(dim, i)), w))
    return out


def sobolev_operator(dim: int, n: int, sigma: float) -> OperatorVector:
    """Weighted H^n operator with l_hat = (sigma^2 + |omega|^2)^n."""
    weights = [math.sqrt(math.comb(n, j) * sigma ** (2 * n - 2 * j)) for j in range(n + 1)]
    return OperatorVector(tuple(graded_laplacian_entries(dim, weights)), dim, 0, f"sobolev(n={n}, sigma={sigma:g})")


def gaussian_entries(dim: int, sigma: float, n_max: int):
    weights = [math.sqrt(1.0 / (math.factorial(n) * 4.0**n * sigma ** (2 * n))) for n in range(n_max + 1)]
    return graded_laplacian_entries(dim, weights)


def polyharmonic_operator(dim: int, m: int) -> OperatorVector:
    """All sqrt(m!/alpha!) D^alpha with |alpha| = m; l_hat = |omega|^(2m)."""
    entries = []
    for alpha in itertools.product(range(m + 1), repeat=dim):
        if sum(alpha) == m:
            w = math.sqrt(math.factorial(m) / math.prod(math.factorial(a) for a in alpha))
            entries.append(DifferentialEntry(((alpha, w),)))
    # graded-lex order: d^m/dx1^m first
    entries.sort(key=lambda e: tuple(-a for a in e.terms[0][0]))
    return OperatorVector(tuple(entries), dim, m, f"polyharmonic(m={m})")


def operator_for_kernel(kernel: GreenKernel) -> OperatorVector:
    """The operator vector P whose L = P*^T P has ``kernel`` as Green function."""
    name, s, d = kernel.name, kernel.scale, kernel.dim
    D = DifferentialEntry
    if name == "cubic":
        return OperatorVector((D((((2,), 1.0),)),), 1, 2, "d2")
    if name == "tension":
        return OperatorVector((D((((2,), 1.0),)), D((((1,), s),))), 1, 1, f"tension(sigma={s:g})")
    if name == "sobolev1d":
        return sobolev_operator(1, 2, s)
    if name == "compare_k_s":
        w = 3.0**-0.25
        entries = (D((((2,), w),)), D((((1,), w),)), D((((0,), w),)))
        return OperatorVector(entries, 1, 0, "compare_k_s")
    if name == "thin_plate":
        entries = (D((((2, 0), 1.0),)), D((((1, 1), math.sqrt(2.0)),)), D((((0, 2), 1.0),)))
        return OperatorVector(entries, 2, 2, "duchon")
    if name == "laplacian_tps":
        return OperatorVector((D((((2, 0), 1.0), ((0, 2), 1.0))),), 2, 2, "laplacian")
    if name == "polyharmonic":
        return polyharmonic_operator(d, kernel.smoothness)
    if name == "matern":
        op = sobolev_operator(d, kernel.smoothness, s)
        return OperatorVector(op.entries, d, 0, f"matern(n={kernel.smoothness}, sigma={s:g})")
    if name == "gaussian":
        return OperatorVector((ClosedFormEntry("gaussian", d, s),), d, 0, f"gaussian(sigma={s:g})")
    raise ValidationError(f"{name} has no operator vector")


# ----------------------------------------------------------------------
# diagnostics


def _directions(dim, count, rng):
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _loglog_slope(radii, values):
    return float(np.polyfit(np.log(radii), np.log(values), 1)[0])


def origin_slopes(op: OperatorVector, seed: int = DEFAULT_SEED, window=SLOPE_WINDOW,
                  n_radii: int = SLOPE_RADII, n_directions: int = SLOPE_DIRECTIONS) -> np.ndarray:
    """Least-squares slope of log l_hat against log ||omega|| near 0, per direction."""
    rng = np.random.default_rng(seed)
    radii = np.logspace(np.log10(window[0]), np.log10(window[1]), n_radii)
    slopes = []
    for u in _directions(op.dim, n_directions, rng):
        vals = op.l_symbol(radii[:, None] * u)
        if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            raise NumericalError("l_hat is not positive on the sampled window")
        slopes.append(_loglog_slope(radii, vals))
    return np.array(slopes)


def estimate_cpd_order(op: OperatorVector, seed: int = DEFAULT_SEED) -> tuple[int, float]:
    """Estimate m from l_hat(omega) = Theta(||omega||^(2m)) near the origin.

    Returns
    -------
    (m_hat, slope)
        ``m_hat = round(slope / 2)`` with ``slope`` the direction-averaged fit.

    Raises
    ------
    NumericalError
        "no uniform order" if directions disagree or the slope is not close
        to an even integer.
    """
    slopes = origin_slopes(op, seed)
    if np.ptp(slopes) > SLOPE_TOLERANCE:
        raise NumericalError(f"no uniform order: slopes range over {slopes.min():.4f}..{slopes.max():.4f}")
    slope = float(slopes.mean())
    m_hat = int(round(slope / 2))
    if abs(slope - 2 * m_hat) > SLOPE_TOLERANCE:
        raise NumericalError(f"no uniform order: slope {slope:.4f} is not near an even integer")
    return m_hat, slope


@dataclass(frozen=True)
class HypothesisReport:
    """Sampled evidence for the symbol hypotheses; not a proof."""

    min_l_hat: float
    argmin_radius: float
    l_hat_at_origin: float
    growth_exponent: float
    origin_slope: float
    positive: bool
    slowly_increasing: bool
    truncation_remainder: float | None
    note: str = "passes only in the sampled, falsifiable sense"

    def to_json(self) -> dict:
        return dict(self.__dict__)


def check_symbol_hypotheses(op: OperatorVector, seed: int = DEFAULT_SEED, n_radii: int = 61,
                             n_directions: int = 16, radius_range=(1e-3, 1e3),
                             max_growth: float = 64.0) -> HypothesisReport:
    """Sample l_hat on log-spaced shells and report positivity and growth.

    * ``min_l_hat``: minimum over shells with radius in ``radius_range``;
    * ``growth_exponent``: fitted power of l_hat^-1 over the outer decade,
      the slow-increase proxy (it passes when the exponent is at most
      ``max_growth``);
    * ``origin_slope``: the small-radius slope of l_hat.
    """
    rng = np.random.default_rng(seed)
    radii = np.logspace(np.log10(radius_range[0]), np.log10(radius_range[1]), n_radii)
    dirs = _directions(op.dim, n_directions, rng)
    vals = op.l_symbol(radii[:, None, None] * dirs[None, :, :])
    i = np.unravel_index(np.argmin(vals), vals.shape)
    outer = radii >= radius_range[1] / 10
    with np.errstate(divide="ignore", over="ignore"):
        inv = 1.0 / vals[outer].min(axis=1)
        # l_hat^-1 underflowing to 0 decays faster than any power
        growth = _loglog_slope(radii[outer], inv) if np.all(inv > 0) else -np.inf
    slopes = origin_slopes(op, seed) if vals.min() > 0 else np.array([np.nan])
    return HypothesisReport(
        min_l_hat=float(vals.min()),
        argmin_radius=float(radii[i[0]]),
        l_hat_at_origin=float(op.l_symbol(np.zeros(op.dim))),
        growth_exponent=float(growth),
        origin_slope=float(np.mean(slopes)),
        positive=bool(vals.min() > 0),
        slowly_increasing=bool(not np.isnan(vals).any() and growth <= max_growth),
        truncation_remainder=op.truncation_remainder,
    )
