"""Adaptive panel Gauss-Legendre quadrature on intervals and rectangles.

Integrands are vector valued: ``f(points)`` maps (M, d) points to an (M, K)
array of nonnegative components, integrated simultaneously. A cell is
accepted when its one-level refinement changes the summed integral by less
than ``max(rtol * |fine|, atol)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ORDER = 15
CHUNK = 20000

_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(ORDER)


@dataclass(frozen=True)
class QuadResult:
    values: np.ndarray
    error: float
    evaluations: int
    converged: bool

    @property
    def total(self) -> float:
        return float(self.values.sum())


def _rule_1d(cells: np.ndarray):
    a, b = cells[:, 0:1], cells[:, 1:2]
    half = 0.5 * (b - a)
    pts = 0.5 * (a + b) + half * _NODES
    return pts[..., None], half * _WEIGHTS


def _split_1d(cells: np.ndarray) -> np.ndarray:
    mid = 0.5 * (cells[:, 0] + cells[:, 1])
    left = np.stack([cells[:, 0], mid], axis=1)
    right = np.stack([mid, cells[:, 1]], axis=1)
    return np.stack([left, right], axis=1).reshape(-1, 2)


GRADING = 3

_U = 0.5 * (1 + _NODES)
_GRADED_NODES = _U**GRADING
_GRADED_WEIGHTS = 0.5 * _WEIGHTS * GRADING * _U ** (GRADING - 1)


def _axis_rule(lo, hi, toward):
    """Nodes and weights on [lo, hi] per cell; graded toward lo (-1), hi (+1) or plain (0)."""
    width = (hi - lo)[:, None]
    plain_x = 0.5 * (lo + hi)[:, None] + 0.5 * width * _NODES
    plain_w = 0.5 * width * _WEIGHTS
    from_lo = lo[:, None] + width * _GRADED_NODES
    from_hi = hi[:, None] - width * _GRADED_NODES
    graded_w = width * _GRADED_WEIGHTS
    t = toward[:, None]
    x = np.where(t < 0, from_lo, np.where(t > 0, from_hi, plain_x))
    w = np.where(t == 0, plain_w, graded_w)
    return x, w


def _singular_corner(cells: np.ndarray, singular: np.ndarray | None):
    """Per cell, the (x, y) grading direction toward a singular corner, or zeros."""
    tx = np.zeros(len(cells), dtype=int)
    ty = np.zeros(len(cells), dtype=int)
    if singular is None or not len(singular):
        return tx, ty
    for sx, ix in ((-1, 0), (1, 1)):
        for sy, iy in ((-1, 2), (1, 3)):
            corner = cells[:, [ix, iy]]
            hit = (corner[:, None, :] == singular[None, :, :]).all(-1).any(-1) & (tx == 0)
            tx[hit], ty[hit] = sx, sy
    return tx, ty


def _rule_2d(cells: np.ndarray, singular: np.ndarray | None = None):
    tx, ty = _singular_corner(cells, singular)
    gx, wx = _axis_rule(cells[:, 0], cells[:, 1], tx)
    gy, wy = _axis_rule(cells[:, 2], cells[:, 3], ty)
    X, Y = np.broadcast_arrays(gx[:, :, None], gy[:, None, :])
    pts = np.stack([X, Y], axis=-1).reshape(len(cells), -1, 2)
    w = (wx[:, :, None] * wy[:, None, :]).reshape(len(cells), -1)
    return pts, w


def _split_2d(cells: np.ndarray) -> np.ndarray:
    x0, x1, y0, y1 = cells.T
    xm, ym = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    kids = [
        np.stack([x0, xm, y0, ym], 1),
        np.stack([xm, x1, y0, ym], 1),
        np.stack([x0, xm, ym, y1], 1),
        np.stack([xm, x1, ym, y1], 1),
    ]
    return np.stack(kids, axis=1).reshape(-1, 4)


def _apply(f, cells, rule):
    pts, w = rule(cells)
    C, P, d = pts.shape
    flat = pts.reshape(-1, d)
    vals = np.concatenate([f(flat[i : i + CHUNK]) for i in range(0, len(flat), CHUNK)])
    vals = vals.reshape(C, P, -1)
    return np.einsum("cp,cpk->ck", w, vals), C * P


def _adaptive(f, cells, rule, split, nchild, rtol, atol, max_depth) -> QuadResult:
    cells = np.asarray(cells, dtype=float)
    coarse, n = _apply(f, cells, rule)
    if atol is None:
        # per-cell floor so cells at integrable singularities can terminate
        atol = max(rtol * abs(coarse.sum()) * 1e-3, 1e-300)
    total = np.zeros(coarse.shape[1])
    err = 0.0
    converged = True
    depth = 0
    while len(cells):
        kids = split(cells)
        kid_vals, m = _apply(f, kids, rule)
        n += m
        kid_vals = kid_vals.reshape(len(cells), nchild, -1)
        fine = kid_vals.sum(axis=1)
        diff = np.abs(fine.sum(-1) - coarse.sum(-1))
        ok = diff <= np.maximum(rtol * np.abs(fine.sum(-1)), atol)
        if depth >= max_depth:
            converged = converged and bool(ok.all())
            ok[:] = True
        total += fine[ok].sum(axis=0)
        err += float(diff[ok].sum())
        keep = ~ok
        cells = kids.reshape(len(cells), nchild, -1)[keep].reshape(-1, kids.shape[-1])
        coarse = kid_vals[keep].reshape(-1, kid_vals.shape[-1])
        depth += 1
    if not (np.all(np.isfinite(total)) and np.isfinite(err)):
        converged = False
    return QuadResult(total, err, n, converged)


def integrate_1d(f, breaks, rtol: float = 1e-11, atol: float | None = None, max_depth: int = 40) -> QuadResult:
    """Integrate over [breaks[0], breaks[-1]], with panels split at every break."""
    b = np.unique(np.asarray(breaks, dtype=float))
    cells = np.stack([b[:-1], b[1:]], axis=1)
    return _adaptive(f, cells, _rule_1d, _split_1d, 2, rtol, atol, max_depth)


def integrate_cells_1d(f, cells, rtol: float = 1e-11, atol: float | None = None, max_depth: int = 40) -> QuadResult:
    """Integrate over a union of intervals given as rows [a, b]."""
    return _adaptive(f, np.asarray(cells, dtype=float), _rule_1d, _split_1d, 2, rtol, atol, max_depth)


def integrate_2d(f, xbreaks, ybreaks, rtol: float = 1e-11, atol: float | None = None,
                 max_depth: int = 18, singular=None) -> QuadResult:
    """Integrate over a rectangle tiled by the tensor grid of the break lines."""
    bx = np.unique(np.asarray(xbreaks, dtype=float))
    by = np.unique(np.asarray(ybreaks, dtype=float))
    X0, Y0 = np.meshgrid(bx[:-1], by[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(bx[1:], by[1:], indexing="ij")
    cells = np.stack([X0.ravel(), X1.ravel(), Y0.ravel(), Y1.ravel()], axis=1)
    return integrate_cells_2d(f, cells, rtol, atol, max_depth, singular)


def integrate_cells_2d(f, cells, rtol: float = 1e-11, atol: float | None = None, max_depth: int = 18,
                       singular=None) -> QuadResult:
    """Integrate over a union of rectangles given as rows [x0, x1, y0, y1].

    Cells with a corner in ``singular`` (an (S, 2) array) use a tensor rule
    graded toward that corner, which absorbs integrable point singularities
    such as log^2 r.
    """
    sing = None if singular is None else np.asarray(singular, dtype=float).reshape(-1, 2)

    def rule(cells):
        return _rule_2d(cells, sing)

    return _adaptive(f, np.asarray(cells, dtype=float), rule, _split_2d, 4, rtol, atol, max_depth)
