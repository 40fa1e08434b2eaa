"""Quadrature check of native-space semi-norms against operator energies.

For an interpolant s with coefficients c, the Gram value c' A c should equal
sum_j int |P_j s|^2 over the whole space, where P is the operator vector
whose L = P*' P has the kernel as Green function.

Integration covers a core box (the hull of the centers, cut along every
center coordinate so kernel singularities sit on panel edges) followed by
square rings of doubling width until a ring adds less than ``tail_tol``
relative mass. The omitted mass is estimated by geometric extrapolation of
the last two rings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from greenkernel.errors import ValidationError
from greenkernel.interpolation import InterpolationModel, gram_seminorm_squared
from greenkernel.quadrature import integrate_1d, integrate_2d, integrate_cells_1d, integrate_cells_2d
from greenkernel.symbols import OperatorVector, operator_for_kernel

MAX_DIM = 2


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature settings.

    ``box`` restricts integration to [lo_i, hi_i] per axis and disables the
    exterior rings. ``n_max`` truncates closed-form operator entries.
    """

    rtol: float = 1e-9
    tail_tol: float = 1e-12
    max_rings: int = 60
    max_depth_1d: int = 40
    max_depth_2d: int = 18
    box: tuple[tuple[float, float], ...] | None = None
    n_max: int | None = None


@dataclass(frozen=True)
class SeminormReport:
    gram_value: float
    quadrature_value: float
    per_operator: tuple[float, ...]
    domain: tuple[tuple[float, float], ...]
    tail_bound: float
    quadrature_error: float
    evaluations: int
    converged: bool
    operator_label: str = ""
    per_order: dict = field(default_factory=dict)
    truncation_remainder: float | None = None

    @property
    def relative_gap(self) -> float:
        if self.gram_value == 0 and self.quadrature_value == 0:
            return 0.0
        return abs(self.quadrature_value - self.gram_value) / max(abs(self.gram_value), abs(self.quadrature_value))

    def agrees(self, rtol: float) -> bool:
        """|quad - gram| <= rtol * |gram| + tail_bound."""
        return abs(self.quadrature_value - self.gram_value) <= rtol * abs(self.gram_value) + self.tail_bound

    def to_json(self) -> dict:
        return {
            "operator": self.operator_label,
            "gram_value": self.gram_value,
            "quadrature_value": self.quadrature_value,
            "relative_gap": self.relative_gap,
            "per_operator": list(self.per_operator),
            "per_order": {str(k): v for k, v in sorted(self.per_order.items())},
            "domain": [list(b) for b in self.domain],
            "tail_bound": self.tail_bound,
            "quadrature_error": self.quadrature_error,
            "evaluations": self.evaluations,
            "converged": self.converged,
            "truncation_remainder": self.truncation_remainder,
        }


def _resolve_operator(model: InterpolationModel, op: OperatorVector, spec: QuadSpec) -> OperatorVector:
    if op.dim != model.dim:
        raise ValidationError(f"operator dimension {op.dim} does not match model dimension {model.dim}")
    if not op.is_differential:
        if spec.n_max is None:
            raise ValidationError("operator has closed-form entries; supply a truncation n_max")
        op = op.truncated(spec.n_max)
    if model.c.any():
        try:
            native = operator_for_kernel(model.kernel)
        except ValidationError as exc:
            raise ValidationError(f"{model.kernel.name} has no operator vector to bound derivative orders") from exc
        limit = math.inf if not native.is_differential else max(e.order for e in native.entries)
        need = max(e.order for e in op.entries)
        if need > limit:
            raise ValidationError(f"operator needs order-{need} derivatives, {model.kernel.name} supports {limit}")
    return op


def _integrand(model: InterpolationModel, op: OperatorVector):
    alphas = sorted({alpha for e in op.entries for alpha, _ in e.terms})

    def f(points):
        D = {a: model.derivative(points, a) for a in alphas}
        vals = np.stack([sum(c * D[a] for a, c in e.terms) for e in op.entries], axis=-1)
        return vals * vals

    return f


def _core_breaks(model: InterpolationModel, axis: int, lo=None, hi=None) -> np.ndarray:
    coords = model.centers[:, axis]
    if lo is None:
        lo, hi = coords.min(), coords.max()
        if hi - lo == 0:
            lo, hi = lo - 0.5, hi + 0.5
    inner = coords[(coords > lo) & (coords < hi)]
    return np.unique(np.concatenate([[lo, hi], inner]))


def _ring_cells_1d(lo, hi, width):
    return np.array([[lo - width, lo], [hi, hi + width]])


def _ring_cells_2d(cx, cy, a):
    # the 12 tiles of side a between squares of half-width a and 2a
    edges = np.array([-2 * a, -a, 0.0, a, 2 * a])
    cells = []
    for i in range(4):
        for j in range(4):
            if 1 <= i <= 2 and 1 <= j <= 2:
                continue
            cells.append([cx + edges[i], cx + edges[i + 1], cy + edges[j], cy + edges[j + 1]])
    return np.array(cells)


def _integrate(model: InterpolationModel, op: OperatorVector, spec: QuadSpec):
    """Return (values per entry, error, evaluations, converged, domain, tail)."""
    f = _integrand(model, op)
    d = model.dim
    if d > MAX_DIM:
        raise ValidationError(f"quadrature supports dimension <= {MAX_DIM}, got {d}")

    if spec.box is not None:
        box = tuple((float(a), float(b)) for a, b in spec.box)
        if len(box) != d:
            raise ValidationError("box dimension does not match the model")
        if d == 1:
            res = integrate_1d(f, _core_breaks(model, 0, *box[0]), spec.rtol, None, spec.max_depth_1d)
        else:
            bx, by = _core_breaks(model, 0, *box[0]), _core_breaks(model, 1, *box[1])
            res = _integrate_grid(f, bx, by, spec, model.centers)
        return res.values, res.error, res.evaluations, res.converged, box, 0.0

    if d == 1:
        breaks = _core_breaks(model, 0)
        core = integrate_1d(f, breaks, spec.rtol, None, spec.max_depth_1d)
        lo, hi = breaks[0], breaks[-1]
        width = 0.5 * (hi - lo)
    else:
        bx, by = _core_breaks(model, 0), _core_breaks(model, 1)
        # square core so the rings tile cleanly
        cx, cy = 0.5 * (bx[0] + bx[-1]), 0.5 * (by[0] + by[-1])
        a = 0.5 * max(bx[-1] - bx[0], by[-1] - by[0])
        bx = np.unique(np.concatenate([bx, [cx - a, cx + a]]))
        by = np.unique(np.concatenate([by, [cy - a, cy + a]]))
        core = _integrate_grid(f, bx, by, spec, model.centers)
        width = a

    values = core.values.copy()
    err, evals, converged = core.error, core.evaluations, core.converged
    atol = max(spec.rtol * abs(core.total) * 1e-3, 1e-300)
    rings = []
    quiet = 0
    for _ in range(spec.max_rings):
        if d == 1:
            cells = _ring_cells_1d(lo, hi, width)
            res = integrate_cells_1d(f, cells, spec.rtol, atol, spec.max_depth_1d)
            lo, hi = lo - width, hi + width
        else:
            res = integrate_cells_2d(f, _ring_cells_2d(cx, cy, width), spec.rtol, atol, spec.max_depth_2d)
        width *= 2
        values += res.values
        err += res.error
        evals += res.evaluations
        converged = converged and res.converged
        rings.append(res.total)
        if res.total <= spec.tail_tol * values.sum():
            quiet += 1
            decaying = len(rings) > 1 and rings[-1] < 0.5 * rings[-2]
            if decaying or quiet >= 2:
                break
        else:
            quiet = 0
    else:
        converged = False

    tail = _geometric_tail(rings)
    if d == 1:
        domain = ((float(lo), float(hi)),)
    else:
        # width was doubled after the last ring, so it is the outer half-width
        domain = ((float(cx - width), float(cx + width)), (float(cy - width), float(cy + width)))
    return values, err, evals, converged, domain, tail


def _integrate_grid(f, bx, by, spec, centers):
    return integrate_2d(f, bx, by, spec.rtol, None, spec.max_depth_2d, singular=centers)


def _geometric_tail(rings) -> float:
    """Mass beyond the last ring, assuming ring masses decay geometrically.

    Rings that stopped decaying are at the round-off floor; their size is
    reported instead.
    """
    if len(rings) < 2 or rings[-1] == 0:
        return 0.0
    prev, last = rings[-2], rings[-1]
    rho = last / prev if prev > 0 else 1.0
    if rho >= 1:
        return float(max(prev, last))
    return float(last * rho / (1 - rho))


def _per_order(op: OperatorVector, values) -> dict:
    out: dict[int, float] = {}
    for e, v in zip(op.entries, values):
        out[e.order] = out.get(e.order, 0.0) + float(v)
    return out


def _truncation_remainder(model: InterpolationModel, op: OperatorVector, domain) -> float | None:
    """coefficient * sup |top-order block of s|^2, sampled over ``domain``.

    For a truncated Gaussian vector the top block's squared weight is the
    coefficient 1/(n! 4^n sigma^2n), so the sampled sup of its integrand is
    the recorded remainder directly.
    """
    if op.truncation_remainder is None:
        return None
    top = max(e.order for e in op.entries)
    block = OperatorVector(tuple(e for e in op.entries if e.order == top), op.dim)
    axes = [np.linspace(lo, hi, 2001 if model.dim == 1 else 101) for lo, hi in domain]
    grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    pts = np.vstack([grid, model.centers])
    return float(_integrand(model, block)(pts).sum(axis=1).max())


def hp_seminorm(model: InterpolationModel, op: OperatorVector | None = None,
                quad_spec: QuadSpec | None = None) -> SeminormReport:
    """Squared H_P semi-norm of ``model`` by quadrature, beside c' A c.

    ``op`` defaults to the kernel's own operator vector.

    Raises
    ------
    ValidationError
        Dimension above 2, closed-form entries without ``n_max``, or an
        operator of higher order than the kernel supports.
    """
    spec = quad_spec or QuadSpec()
    op = _resolve_operator(model, op if op is not None else operator_for_kernel(model.kernel), spec)
    values, err, evals, converged, domain, tail = _integrate(model, op, spec)
    return SeminormReport(
        gram_value=gram_seminorm_squared(model),
        quadrature_value=float(values.sum()),
        per_operator=tuple(float(v) for v in values),
        domain=domain,
        tail_bound=tail,
        quadrature_error=float(err),
        evaluations=int(evals),
        converged=bool(converged),
        operator_label=op.label,
        per_order=_per_order(op, values),
        truncation_remainder=_truncation_remainder(model, op, domain),
    )


@dataclass(frozen=True)
class ScaledComparison:
    first: SeminormReport
    second: SeminormReport

    @property
    def ratio(self) -> float:
        """second / first for the squared semi-norms; NaN when both vanish."""
        a, b = self.first.quadrature_value, self.second.quadrature_value
        if a == 0 and b == 0:
            return math.nan
        return b / a if a else math.inf

    def order_ratios(self) -> dict:
        out = {}
        for k in sorted(set(self.first.per_order) | set(self.second.per_order)):
            a, b = self.first.per_order.get(k, 0.0), self.second.per_order.get(k, 0.0)
            out[k] = math.nan if a == 0 and b == 0 else (b / a if a else math.inf)
        return out

    def to_json(self) -> dict:
        return {
            "ratio": self.ratio,
            "order_ratios": {str(k): v for k, v in self.order_ratios().items()},
            "first": self.first.to_json(),
            "second": self.second.to_json(),
        }


def compare_scaled_spaces(models, ops, quad_spec: QuadSpec | None = None) -> ScaledComparison:
    """Evaluate one function under two operator weightings on a shared box.

    ``models`` is one model or a pair; ``ops`` is a pair of operator
    vectors. Without an explicit box the bounding box of the first model's
    centers is used, so functions with polynomial growth stay finite.
    """
    if isinstance(models, InterpolationModel):
        models = (models, models)
    op_a, op_b = ops
    spec = quad_spec or QuadSpec()
    if spec.box is None:
        C = models[0].centers
        box = tuple((float(lo), float(hi)) for lo, hi in zip(C.min(axis=0), C.max(axis=0)))
        spec = QuadSpec(spec.rtol, spec.tail_tol, spec.max_rings, spec.max_depth_1d, spec.max_depth_2d, box, spec.n_max)
    return ScaledComparison(hp_seminorm(models[0], op_a, spec), hp_seminorm(models[1], op_b, spec))
