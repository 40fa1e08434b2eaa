"""Monomial polynomial spaces, unisolvence tests and Lagrange bases."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial
from typing import NamedTuple

import numpy as np

from greenkernel.errors import ValidationError

CONDITION_THRESHOLD = 1e12


def _graded_lex(dim: int, degree: int) -> tuple[tuple[int, ...], ...]:
    exps = [e for e in itertools.product(range(degree + 1), repeat=dim) if sum(e) <= degree]
    # graded, then lexicographic with x1 leading: 1, x1, x2, x1^2, x1 x2, x2^2, ...
    exps.sort(key=lambda e: (sum(e), tuple(-k for k in e)))
    return tuple(exps)


@dataclass(frozen=True)
class PolySpace:
    """Span of a finite list of monomials x**alpha in R^dim.

    ``exponents`` holds one exponent vector per basis element; the order is
    the column order used in every Vandermonde matrix.
    """

    dim: int
    exponents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("polynomial space dimension must be >= 1")
        exps = tuple(tuple(int(k) for k in e) for e in self.exponents)
        for e in exps:
            if len(e) != self.dim or min(e, default=0) < 0:
                raise ValidationError(f"bad exponent vector {e} for dim {self.dim}")
        if len(set(exps)) != len(exps):
            raise ValidationError("duplicate monomials in polynomial space")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def total_degree(cls, dim: int, degree: int) -> PolySpace:
        """pi_degree(R^dim); ``degree = -1`` gives the zero space."""
        if degree < 0:
            return cls(dim, ())
        return cls(dim, _graded_lex(dim, degree))

    @classmethod
    def for_order(cls, dim: int, cpd_order: int) -> PolySpace:
        """The null space pi_{m-1}(R^dim) that accompanies a CPD order m."""
        return cls.total_degree(dim, cpd_order - 1)

    @property
    def size(self) -> int:
        return len(self.exponents)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self.exponents), default=-1)

    def contains_total_degree(self, degree: int) -> bool:
        return set(_graded_lex(self.dim, degree)) <= set(self.exponents) if degree >= 0 else True

    def vandermonde(self, points) -> np.ndarray:
        """Matrix with entries points[i]**exponents[k], shape (N, Q)."""
        return self.derivative_matrix(points, (0,) * self.dim)

    def derivative_matrix(self, points, alpha) -> np.ndarray:
        """D^alpha of every basis monomial at every point, shape (N, Q)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValidationError(f"points have dimension {pts.shape[1]}, space has {self.dim}")
        out = np.ones((pts.shape[0], self.size))
        for k, e in enumerate(self.exponents):
            for i, (p, a) in enumerate(zip(e, alpha)):
                if a > p:
                    out[:, k] = 0.0
                    break
                if a or p:
                    out[:, k] *= factorial(p) // factorial(p - a) * pts[:, i] ** (p - a)
        return out

    def to_json(self) -> dict:
        return {"dim": self.dim, "exponents": [list(e) for e in self.exponents]}

    @classmethod
    def from_json(cls, obj: dict) -> PolySpace:
        return cls(int(obj["dim"]), tuple(tuple(e) for e in obj["exponents"]))

    @classmethod
    def parse(cls, spec: str, dim: int) -> PolySpace:
        """Parse ``poly:<degree>`` or ``monomials:a,b;c,d;...``."""
        kind, _, body = spec.partition(":")
        if kind == "poly":
            return cls.total_degree(dim, int(body))
        if kind == "monomials":
            exps = tuple(tuple(int(k) for k in item.split(",")) for item in body.split(";") if item)
            return cls(dim, exps)
        raise ValidationError(f"unknown polynomial space spec {spec!r}")


def binomial_dimension(dim: int, degree: int) -> int:
    """dim pi_degree(R^dim) = C(degree + dim, dim)."""
    return comb(degree + dim, dim) if degree >= 0 else 0


class Unisolvence(NamedTuple):
    unisolvent: bool
    condition: float


def is_unisolvent(space: PolySpace, points) -> Unisolvence:
    """Whether ``points`` determine every element of ``space`` uniquely.

    True iff the (N, Q) Vandermonde matrix has numerical rank Q, judged by a
    2-norm condition number below ``CONDITION_THRESHOLD``.
    """
    if space.size == 0:
        return Unisolvence(True, 1.0)
    V = space.vandermonde(points)
    if V.shape[0] < space.size:
        return Unisolvence(False, np.inf)
    sv = np.linalg.svd(V, compute_uv=False)
    cond = np.inf if sv[-1] == 0 else sv[0] / sv[-1]
    return Unisolvence(bool(cond < CONDITION_THRESHOLD), float(cond))


@dataclass(frozen=True, eq=False)
class UnisolventSet:
    """Points xi_1..xi_Q with the Lagrange basis q_k(xi_l) = delta_kl.

    ``lagrange_coeffs[:, k]`` are the monomial coefficients of q_k.
    """

    space: PolySpace
    xi: np.ndarray
    lagrange_coeffs: np.ndarray
    indices: tuple[int, ...] = ()

    def lagrange(self, points) -> np.ndarray:
        """q_k(points[i]), shape (N, Q)."""
        return self.space.vandermonde(points) @ self.lagrange_coeffs

    def lagrange_derivative(self, points, alpha) -> np.ndarray:
        return self.space.derivative_matrix(points, alpha) @ self.lagrange_coeffs

    def to_json(self) -> dict:
        return {"space": self.space.to_json(), "xi": self.xi.tolist()}

    @classmethod
    def from_points(cls, space: PolySpace, xi) -> UnisolventSet:
        xi = np.atleast_2d(np.asarray(xi, dtype=float)).reshape(-1, space.dim)
        if xi.shape[0] != space.size:
            raise ValidationError(f"need exactly {space.size} points, got {xi.shape[0]}")
        ok, cond = is_unisolvent(space, xi)
        if not ok:
            raise ValidationError(f"points are not unisolvent (condition {cond:.3g})")
        coeffs = np.linalg.solve(space.vandermonde(xi), np.eye(space.size))
        return cls(space, xi, coeffs, tuple(range(space.size)))


def select_unisolvent(space: PolySpace, candidates) -> UnisolventSet:
    """Pick Q candidate points by Gaussian elimination with row pivoting.

    Column k of the Vandermonde matrix is eliminated against the points
    already chosen and the remaining candidate with the largest pivot wins;
    ties go to the earliest candidate. A vanishing pivot column means the
    candidates are not unisolvent at all.
    """
    pts = np.atleast_2d(np.asarray(candidates, dtype=float))
    Q = space.size
    if Q == 0:
        return UnisolventSet(space, np.empty((0, space.dim)), np.empty((0, 0)), ())
    if pts.shape[0] < Q:
        raise ValidationError(f"need at least {Q} candidates, got {pts.shape[0]}")
    R = space.vandermonde(pts).copy()
    scale = np.abs(R).max()
    free = np.ones(pts.shape[0], dtype=bool)
    chosen = []
    for k in range(Q):
        col = np.where(free, np.abs(R[:, k]), -1.0)
        i = int(np.argmax(col))
        if col[i] <= scale / CONDITION_THRESHOLD:
            raise ValidationError("candidates contain no unisolvent subset")
        chosen.append(i)
        free[i] = False
        R[free, k:] -= np.outer(R[free, k] / R[i, k], R[i, k:])
    xi = pts[chosen]
    V = space.vandermonde(xi)
    if np.linalg.cond(V) >= CONDITION_THRESHOLD:
        raise ValidationError("selected points are too ill-conditioned")
    coeffs = np.linalg.solve(V, np.eye(Q))
    return UnisolventSet(space, xi, coeffs, tuple(chosen))
