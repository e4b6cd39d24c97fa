"""Trust-region subproblem models and solvers.

The subproblem is ``min_d  <g, d> + 1/2 d^T A d  s.t.  ||d||_2 <= delta``
where the curvature A is available only through matrix-vector products (it is
never materialized).  Both solvers guarantee at least half of the Cauchy-point
model decrease, which is the contract the outer acceptance loop relies on.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

CurvatureOperator = Callable[[np.ndarray], np.ndarray]


class NumericsError(RuntimeError):
    """Arithmetic broke down (NaN/overflow in an operator or objective)."""


class TRStatus(Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    NEGATIVE_CURVATURE = "negative_curvature"
    ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class QuadraticModel:
    """Quadratic model ``m(d) = center_value + <gradient, d> + 1/2 d^T A d``.

    ``curvature`` applies the symmetric operator A to a vector; ``None``
    stands for the zero operator (pure first-order model).
    """

    center_value: float
    gradient: np.ndarray
    curvature: Optional[CurvatureOperator] = None

    @property
    def dim(self) -> int:
        return self.gradient.shape[0]

    def apply_curvature(self, v: np.ndarray) -> np.ndarray:
        if self.curvature is None:
            return np.zeros_like(v)
        return self.curvature(v)


@dataclass(frozen=True)
class TRSolution:
    """Approximate subproblem minimizer with its model decrease m(0) - m(d)."""

    step: np.ndarray
    predicted_decrease: float
    status: TRStatus


def matrix_operator(a) -> CurvatureOperator:
    """Wrap a dense or sparse symmetric matrix as a curvature operator."""

    def apply(v: np.ndarray) -> np.ndarray:
        return np.asarray(a @ v)

    return apply


def model_eval(model: QuadraticModel, d: np.ndarray) -> float:
    """Evaluate the quadratic model at displacement ``d``."""
    d = np.asarray(d, dtype=float)
    if d.shape != model.gradient.shape:
        raise ValueError(
            f"displacement shape {d.shape} does not match gradient shape "
            f"{model.gradient.shape}"
        )
    return float(
        model.center_value
        + model.gradient @ d
        + 0.5 * (d @ model.apply_curvature(d))
    )


def _boundary_intersection(z: np.ndarray, p: np.ndarray, delta: float) -> float:
    """Positive t with ||z + t p|| = delta, for ||z|| < delta and p != 0."""
    pp = float(p @ p)
    zp = float(z @ p)
    zz = float(z @ z)
    disc = zp * zp + pp * (delta * delta - zz)
    # strictly inside the ball with a nonzero direction => disc > 0
    return (-zp + np.sqrt(disc)) / pp


def solve_gradient_step(model: QuadraticModel, delta: float) -> TRSolution:
    """Exact subproblem solution for a zero curvature operator.

    The minimizer is the boundary point along the negative gradient,
    ``d = -delta * g / ||g||``, with model decrease ``delta * ||g||``.
    """
    gnorm = float(np.linalg.norm(model.gradient))
    if not gnorm > 0.0:
        raise ValueError("gradient step undefined for zero gradient")
    if not delta > 0.0:
        raise ValueError("trust-region radius must be positive")
    step = -(delta / gnorm) * model.gradient
    return TRSolution(step=step, predicted_decrease=delta * gnorm, status=TRStatus.BOUNDARY)


def solve_steihaug(
    model: QuadraticModel,
    delta: float,
    cg_tol: float = 1e-4,
    max_cg: int = 30,
) -> TRSolution:
    """Truncated-CG subproblem solver.

    Runs conjugate-gradient iterations from d = 0 and stops at the first of:
    a direction of nonpositive curvature (move to the boundary along it), an
    iterate leaving the ball (move to the boundary), residual norm below
    ``cg_tol * ||g||`` (interior solution), or ``max_cg`` iterations.  The
    first iteration already achieves the Cauchy-point decrease, so every
    returned solution satisfies the half-Cauchy decrease bound.
    """
    g = model.gradient
    rr = float(g @ g)
    if not rr > 0.0:
        raise ValueError("subproblem solver requires a nonzero gradient")
    if not delta > 0.0:
        raise ValueError("trust-region radius must be positive")

    z = np.zeros_like(g)
    r = g.copy()
    p = -g
    decrease = 0.0
    tol = cg_tol * np.sqrt(rr)

    for _ in range(max_cg):
        ap = model.apply_curvature(p)
        pap = float(p @ ap)
        if not np.isfinite(pap):
            raise NumericsError("curvature operator produced non-finite values")
        if pap <= 0.0:
            t = _boundary_intersection(z, p, delta)
            step = z + t * p
            return TRSolution(
                step=step,
                predicted_decrease=decrease + t * rr - 0.5 * t * t * pap,
                status=TRStatus.NEGATIVE_CURVATURE,
            )
        alpha = rr / pap
        z_next = z + alpha * p
        if float(np.linalg.norm(z_next)) >= delta:
            t = _boundary_intersection(z, p, delta)
            step = z + t * p
            return TRSolution(
                step=step,
                predicted_decrease=decrease + t * rr - 0.5 * t * t * pap,
                status=TRStatus.BOUNDARY,
            )
        decrease += 0.5 * alpha * rr
        r = r + alpha * ap
        rr_next = float(r @ r)
        if not np.isfinite(rr_next):
            raise NumericsError("non-finite residual in CG iteration")
        if np.sqrt(rr_next) <= tol:
            return TRSolution(step=z_next, predicted_decrease=decrease, status=TRStatus.INTERIOR)
        p = -r + (rr_next / rr) * p
        z = z_next
        rr = rr_next

    return TRSolution(step=z, predicted_decrease=decrease, status=TRStatus.ITERATION_CAP)
