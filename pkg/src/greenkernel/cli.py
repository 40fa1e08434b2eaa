"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 numerical failure or a breached
verification tolerance. Reports are JSON on stdout (or ``--out``);
``--pretty`` renders them as text.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from greenkernel import acceptance, io
from greenkernel.errors import NumericalError, ValidationError
from greenkernel.interpolation import (
    InterpolationModel,
    cpd_certificate,
    fit,
    gram_seminorm_squared,
    loocv_error,
    loocv_scale_sweep,
)
from greenkernel.kernels import GreenKernel, default_catalog
from greenkernel.polyspace import PolySpace, UnisolventSet
from greenkernel.rkhs import RKKernel, build_rk, check_equivalence, check_pd
from greenkernel.sobolev import QuadSpec, hp_seminorm
from greenkernel.symbols import OperatorVector, check_symbol_hypotheses, estimate_cpd_order, operator_for_kernel

DEFAULT_SEED = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


class _Breach(Exception):
    """A verification ran but missed its tolerance; carries the report."""

    def __init__(self, report):
        super().__init__("tolerance breached")
        self.report = report


# ----------------------------------------------------------------------
# argument helpers


def _kernel_args(p):
    p.add_argument("--kernel", required=True, help="catalog name, see `kernels list`")
    p.add_argument("--dim", type=int, default=1)
    p.add_argument("--scale", type=float, help="sigma for scaled kernels")
    p.add_argument("--smoothness", type=int, help="m for polyharmonic, n for matern")
    p.add_argument("--regularization", type=float, help="rho for regularized_log_bessel")


def _kernel(ns) -> GreenKernel:
    return GreenKernel(ns.kernel, ns.dim, ns.scale, ns.smoothness, ns.regularization)


def _space(ns, kernel: GreenKernel) -> PolySpace:
    if getattr(ns, "space", None):
        return PolySpace.parse(ns.space, kernel.dim)
    return PolySpace.for_order(kernel.dim, kernel.cpd_order)


def _load_model(path) -> InterpolationModel:
    try:
        return InterpolationModel.from_json(io.read_json(path))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{path}: not a model file ({exc})") from exc


# ----------------------------------------------------------------------
# commands


def cmd_kernels(ns):
    rows = []
    for k in default_catalog():
        rows.append({
            "name": k.name,
            "descriptor": k.to_json(),
            "cpd_order": k.cpd_order,
            "null_space_degree": k.cpd_order - 1,
            "has_symbol": k.has_symbol,
            "regularity_at_origin": k.regularity,
        })
    return {"kernels": rows}


def cmd_fit(ns):
    kernel = _kernel(ns)
    space = _space(ns, kernel)
    data = io.read_dataset(ns.data, kernel.dim)
    model = fit(kernel, space, data, ridge=ns.ridge)
    return model.to_json()


def cmd_predict(ns):
    model = _load_model(ns.model)
    pts = io.read_points(ns.points, model.dim)
    return ("csv", io.format_csv(pts, model.predict(pts)))


def cmd_cpd_check(ns):
    kernel = _kernel(ns)
    rep = cpd_certificate(kernel, _space(ns, kernel), ns.trials, ns.n, ns.seed)
    out = rep.to_json()
    out["summary"] = "min quadratic form > 0" if rep.passed else "non-positive quadratic form found"
    if not rep.passed:
        raise _Breach(out)
    return out


def cmd_order_estimate(ns):
    kernel = _kernel(ns)
    op = operator_for_kernel(kernel)
    m_hat, slope = estimate_cpd_order(op, ns.seed)
    out = {
        "kernel": kernel.to_json(),
        "slope": slope,
        "estimated_order": m_hat,
        "catalog_order": kernel.cpd_order,
        "matches_catalog": m_hat == kernel.cpd_order,
        "hypotheses": check_symbol_hypotheses(op, ns.seed).to_json(),
    }
    if m_hat != kernel.cpd_order:
        raise _Breach(out)
    return out


def cmd_seminorm(ns):
    model = _load_model(ns.model)
    out = {"kernel": model.kernel.to_json()}
    if ns.method in ("gram", "both"):
        out["gram_value"] = gram_seminorm_squared(model)
    if ns.method in ("quadrature", "both"):
        op = OperatorVector.from_json(io.read_json(ns.operator)) if ns.operator else None
        box = None
        if ns.box:
            vals = [float(v) for v in ns.box.split(",")]
            if len(vals) != 2 * model.dim:
                raise ValidationError(f"--box needs {2 * model.dim} numbers lo1,hi1,...")
            box = tuple(zip(vals[::2], vals[1::2]))
        rep = hp_seminorm(model, op, QuadSpec(rtol=ns.rtol, box=box, n_max=ns.n_max))
        out.update(rep.to_json())
        if ns.method == "both":
            out["tolerance"] = ns.tol
            out["agrees"] = rep.agrees(ns.tol)
            if not out["agrees"]:
                raise _Breach(out)
    return out


def cmd_rk_build(ns):
    kernel = _kernel(ns)
    space = _space(ns, kernel)
    if ns.xi:
        rk = build_rk(kernel, UnisolventSet.from_points(space, io.read_points(ns.xi, kernel.dim)), space)
    elif ns.data:
        rk = build_rk(kernel, None, space, candidates=io.read_dataset(ns.data, kernel.dim).X)
    else:
        raise ValidationError("rk-build needs --xi or --data")
    return rk.to_json()


def cmd_rk_equivalence(ns):
    obj = io.read_json(ns.rk)
    try:
        rk = RKKernel.from_json(obj)
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"{ns.rk}: not a kernel file ({exc})") from exc
    data = io.read_dataset(ns.data, rk.dim)
    if ns.grid:
        grid = io.read_points(ns.grid, rk.dim)
    else:
        rng = np.random.default_rng(ns.seed)
        lo, hi = data.X.min(axis=0), data.X.max(axis=0)
        pad = 0.25 * np.maximum(hi - lo, 1e-3)
        grid = rng.uniform(lo - pad, hi + pad, (ns.grid_size, rk.dim))
    eq = check_equivalence(rk, data, grid)
    pd = check_pd(rk, ns.pd_trials, ns.pd_points, ns.seed)
    out = {"equivalence": eq.to_json(), "tolerance": ns.tol, "positive_definite": pd.to_json()}
    out["passed"] = bool(eq.max_deviation <= ns.tol and pd.passed)
    if not out["passed"]:
        raise _Breach(out)
    return out


def cmd_loocv(ns):
    kernel = _kernel(ns)
    space = _space(ns, kernel)
    data = io.read_dataset(ns.data, kernel.dim)
    if ns.scales:
        scales = [float(s) for s in ns.scales.split(",")]
        return loocv_scale_sweep(kernel, space, data, scales).to_json()
    return {"kernel": kernel.to_json(), "loocv_rms": loocv_error(kernel, space, data)}


def cmd_verify_all(ns):
    echo = None
    if ns.pretty:
        def echo(r):
            print(r.line(), flush=True)

    results = acceptance.run_all(ns.seed, fail_fast=ns.fail_fast, echo=echo)
    rows = []
    for r in results:
        row = r.to_json()
        if not ns.timings:
            row.pop("elapsed")
        rows.append(row)
    out = {"seed": ns.seed, "passed": all(r.ok for r in results), "criteria": rows}
    if not out["passed"]:
        failed = next(r for r in results if not r.ok)
        out["first_failure"] = failed.name
        raise _Breach(out)
    return out


# ----------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output instead of JSON")
    common.add_argument("--out", help="write the result here instead of stdout")

    parser = _Parser(prog="greenkernel", description="Green-function kernels: fit, inspect and verify.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernels", parents=[common], help="catalog inspection")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_kernels)

    p = sub.add_parser("fit", parents=[common], help="fit an interpolant to a data CSV")
    _kernel_args(p)
    p.add_argument("--space", help="poly:<degree> or monomials:a,b;c,d (default: the kernel's null space)")
    p.add_argument("--data", required=True)
    p.add_argument("--ridge", type=float, default=0.0)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="evaluate a model at the points of a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--points", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cpd-check", parents=[common], help="random constrained quadratic-form trials")
    _kernel_args(p)
    p.add_argument("--space")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--n", type=int, default=20, help="maximum points per trial")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_cpd_check)

    p = sub.add_parser("order-estimate", parents=[common], help="CPD order from the symbol's slope at 0")
    _kernel_args(p)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_order_estimate)

    p = sub.add_parser("seminorm", parents=[common], help="Gram and/or quadrature semi-norm of a model")
    p.add_argument("--model", required=True)
    p.add_argument("--method", choices=["gram", "quadrature", "both"], default="both")
    p.add_argument("--operator", help="operator vector JSON (default: the kernel's own)")
    p.add_argument("--n-max", type=int, help="truncation for closed-form operator entries")
    p.add_argument("--box", help="integrate over lo1,hi1[,lo2,hi2] only")
    p.add_argument("--rtol", type=float, default=1e-9)
    p.add_argument("--tol", type=float, default=1e-4, help="relative agreement required by --method both")
    p.set_defaults(func=cmd_seminorm)

    p = sub.add_parser("rk-build", parents=[common], help="build a reproducing kernel from a CPD kernel")
    _kernel_args(p)
    p.add_argument("--space")
    p.add_argument("--xi", help="CSV of unisolvent points")
    p.add_argument("--data", help="select the unisolvent points from this data CSV")
    p.set_defaults(func=cmd_rk_build)

    p = sub.add_parser("rk-equivalence", parents=[common], help="compare K-span and kernel+polynomial fits")
    p.add_argument("--rk", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--grid", help="CSV of evaluation points (default: random around the data)")
    p.add_argument("--grid-size", type=int, default=200)
    p.add_argument("--pd-trials", type=int, default=100)
    p.add_argument("--pd-points", type=int, default=8)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--tol", type=float, default=1e-7)
    p.set_defaults(func=cmd_rk_equivalence)

    p = sub.add_parser("loocv", parents=[common], help="leave-one-out error, optionally over scales")
    _kernel_args(p)
    p.add_argument("--space")
    p.add_argument("--data", required=True)
    p.add_argument("--scales", help="comma-separated candidate scales")
    p.set_defaults(func=cmd_loocv)

    p = sub.add_parser("verify-all", parents=[common], help="run the acceptance suite")
    p.add_argument("--seed", type=int, default=acceptance.SEED)
    p.add_argument("--fail-fast", action="store_true")
    p.add_argument("--timings", action="store_true", help="include run times in the JSON report")
    p.set_defaults(func=cmd_verify_all)
    return parser


# ----------------------------------------------------------------------
# rendering


def _render_pretty(result) -> str:
    if "criteria" in result:
        lines = [f"{'#':>2}  {'criterion':<56} result"]
        for c in result["criteria"]:
            lines.append(f"{c['number']:>2}  {c['name']:<56} {'PASS' if c['passed'] else 'FAIL'}")
        lines.append("all criteria passed" if result["passed"] else f"FAILED: {result.get('first_failure')}")
        return "\n".join(lines)
    if "kernels" in result:
        lines = [f"{'name':<24} {'dim':>3} {'order':>5}  symbol"]
        for k in result["kernels"]:
            lines.append(f"{k['name']:<24} {k['descriptor']['dim']:>3} {k['cpd_order']:>5}  {k['has_symbol']}")
        return "\n".join(lines)
    return "\n".join(f"{k}: {io.dumps(v)}" for k, v in result.items())


def _emit(ns, result) -> None:
    if isinstance(result, tuple) and result[0] == "csv":
        text = result[1]
    elif ns.pretty:
        text = _render_pretty(result) + "\n"
    else:
        text = io.dumps(result) + "\n"
    if ns.out:
        Path(ns.out).write_text(text)
    else:
        sys.stdout.write(text)


def _thread_limit():
    raw = os.environ.get("GREENKERNEL_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"GREENKERNEL_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"GREENKERNEL_THREADS must be a positive integer, got {raw!r}")
    return n


def run(argv=None) -> int:
    """Parse ``argv``, run one command and return its exit code."""
    ns = None
    try:
        ns = build_parser().parse_args(argv)
        limit = _thread_limit()
        if limit is not None:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=limit):
                result = ns.func(ns)
        else:
            result = ns.func(ns)
        _emit(ns, result)
        return 0
    except _Breach as breach:
        _emit(ns, breach.report)
        return 2
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
