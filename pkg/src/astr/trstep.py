"""Single trust-region step: shrink the radius until the ratio test passes.

Given a quadratic model of the sampled objective at x, repeatedly solve the
subproblem, compare the actual decrease of the sampled objective against the
model's predicted decrease, and shrink the radius (``delta <- gamma1 *
||d||``) while the ratio stays below ``eta1``.  On exit the radius for the
next step is expanded by ``gamma2`` only when the accepted step was very
successful *and* hit the boundary.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .trs import NumericsError, QuadraticModel, TRSolution, TRStatus

SubproblemSolver = Callable[[QuadraticModel, float], TRSolution]

#: Hard cap on radius shrinks; smooth objectives terminate long before this.
MAX_SHRINKS = 60

#: Relative tolerance for deciding that a step lies on the boundary.
BOUNDARY_RTOL = 1e-12


@dataclass(frozen=True)
class TRStepConfig:
    """Acceptance thresholds and radius update factors."""

    eta1: float = 0.1
    eta2: float = 0.75
    gamma1: float = 0.5
    gamma2: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.eta1 <= self.eta2 < 1.0:
            raise ValueError("need 0 < eta1 <= eta2 < 1")
        if not 0.0 < self.gamma1 < 1.0 < self.gamma2:
            raise ValueError("need 0 < gamma1 < 1 < gamma2")


@dataclass
class TRStepResult:
    """Accepted step and the initial radius for the next trust-region step.

    When ``stalled`` is true the model decrease fell below the floating-point
    noise floor of the objective; no step was taken and the remaining fields
    describe the unchanged state (the caller should treat it like the
    small-gradient skip).
    """

    step: np.ndarray
    delta_next: float
    rho: float
    retries: int
    actual_decrease: float
    predicted_decrease: float
    status: TRStatus
    f_trial: float
    stalled: bool = False


def trust_region_step(
    objective_on_sample: Callable[[np.ndarray], float],
    x: np.ndarray,
    model: QuadraticModel,
    delta0: float,
    cfg: TRStepConfig,
    solver: SubproblemSolver,
) -> TRStepResult:
    """Solve-and-shrink loop returning an acceptable step.

    ``model.center_value`` must equal ``objective_on_sample(x)`` and the model
    gradient must be nonzero (the caller filters small gradients).  The ratio
    is ``rho = (F_S(x) - F_S(x + d)) / (m(0) - m(d))``; the loop exits once
    ``rho >= eta1``, which happens after finitely many shrinks for smooth
    objectives.
    """
    if not delta0 > 0.0:
        raise ValueError("initial trust-region radius must be positive")
    f0 = model.center_value
    # both decreases below this are indistinguishable from rounding noise
    noise_floor = 4.0 * np.finfo(float).eps * abs(f0)
    delta = float(delta0)

    for retries in range(MAX_SHRINKS + 1):
        sol = solver(model, delta)
        pred = sol.predicted_decrease
        if not np.isfinite(pred) or pred <= 0.0:
            raise ValueError(
                f"subproblem solver returned nonpositive predicted decrease {pred}"
            )
        if pred <= noise_floor:
            return TRStepResult(
                step=np.zeros_like(x),
                delta_next=float(delta0),
                rho=float("nan"),
                retries=retries,
                actual_decrease=0.0,
                predicted_decrease=pred,
                status=sol.status,
                f_trial=f0,
                stalled=True,
            )
        f_trial = float(objective_on_sample(x + sol.step))
        if not np.isfinite(f_trial):
            raise NumericsError("objective returned a non-finite trial value")
        actual = f0 - f_trial
        rho = actual / pred
        if rho >= cfg.eta1:
            step_norm = float(np.linalg.norm(sol.step))
            on_boundary = abs(step_norm - delta) <= BOUNDARY_RTOL * delta
            delta_next = cfg.gamma2 * delta if (rho >= cfg.eta2 and on_boundary) else delta
            return TRStepResult(
                step=sol.step,
                delta_next=delta_next,
                rho=rho,
                retries=retries,
                actual_decrease=actual,
                predicted_decrease=pred,
                status=sol.status,
                f_trial=f_trial,
            )
        delta = cfg.gamma1 * float(np.linalg.norm(sol.step))

    raise NumericsError(
        f"no acceptable trust-region step within {MAX_SHRINKS} radius shrinks; "
        "the sampled objective is likely non-smooth or broken"
    )
