"""Adaptive-sample-size trust-region driver (the ASTR method).

The outer loop monitors the ratio ``tau = a / b`` of true objective
improvement to the average improvement predicted by the sampled inner
iterations; whenever the sampled steps stop transferring to the full
objective (``tau < theta``) the sample size is grown geometrically, so the
method eventually becomes a full-batch trust-region method.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .accounting import CostBudget, CostTracker, InstrumentedObjective, RunLog, RunRecord, Stopwatch
from .trs import QuadraticModel, solve_gradient_step, solve_steihaug
from .trstep import TRStepConfig, trust_region_step


class CurvatureMode(Enum):
    NONE = "none"
    SUBSAMPLED_HESSIAN = "subsampled_hessian"


@dataclass(frozen=True)
class AstrConfig:
    """Hyper-parameters of the adaptive driver.

    ``s0`` and ``r_hat`` may be left ``None``; they then default to
    ceil(0.01 * n) and ceil(2n / s0) once the problem size is known.
    """

    s0: Optional[int] = None
    r_hat: Optional[int] = None
    delta0: float = 1.0
    theta: float = 0.5
    epsilon: float = 1e-14
    omega: float = 2.0
    curvature_mode: CurvatureMode = CurvatureMode.SUBSAMPLED_HESSIAN
    hessian_fraction: float = 0.1
    alpha_bar: float = 5.0
    beta_bar: float = 20.0
    tr: TRStepConfig = field(default_factory=TRStepConfig)
    cg_tol: float = 1e-4
    max_cg: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.s0 is not None and self.s0 < 1:
            raise ValueError("s0 must be at least 1")
        if self.r_hat is not None and self.r_hat < 1:
            raise ValueError("r_hat must be at least 1")
        if not self.theta > 0.0:
            raise ValueError("theta must be positive")
        if not self.omega > 1.0:
            raise ValueError("omega must exceed 1")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.hessian_fraction <= 1.0:
            raise ValueError("hessian_fraction must lie in (0, 1]")
        if not self.delta0 > 0.0:
            raise ValueError("delta0 must be positive")

    def resolve(self, n: int) -> tuple[int, int]:
        """Concrete (s0, r_hat) for a problem with n data points."""
        s0 = self.s0 if self.s0 is not None else max(1, math.ceil(0.01 * n))
        s0 = min(s0, n)
        r_hat = self.r_hat if self.r_hat is not None else max(1, math.ceil(2 * n / s0))
        return s0, r_hat


@dataclass(frozen=True)
class OuterState:
    """Evolving outer-loop state: iterate, sample sizes, radius, cached F."""

    nu: int
    x: np.ndarray
    s: int
    s_h: int
    delta: float
    f_current: float


@dataclass
class InnerResult:
    """Outcome of one batch of inner iterations."""

    x_hat: np.ndarray
    b: float
    delta_out: float
    skipped: int
    cost: float
    R: int
    b_steps: list[float]
    f_final: Optional[float]


def schedule_R(
    s: int,
    s_h: int,
    n: int,
    mode: CurvatureMode,
    alpha_bar: float,
    beta_bar: float,
    r_hat: int,
) -> int:
    """Inner-iteration count balancing inner work against one full F pass.

    With no curvature an inner iteration costs one sampled gradient, giving
    ``R = n / (2 s)``; with subsampled-Hessian CG steps the per-iteration
    cost grows to ``(2 + alpha_bar) s + 2 beta_bar s_h`` gradient-equivalents.
    Rounded half-to-even, clamped to [1, r_hat].
    """
    if mode == CurvatureMode.NONE:
        raw = n / (2.0 * s)
    else:
        raw = n / ((2.0 + alpha_bar) * s + 2.0 * beta_bar * s_h)
    return int(min(max(round(raw), 1), r_hat))


def _draw_sample(rng: np.random.Generator, n: int, s: int) -> Optional[np.ndarray]:
    """Uniform size-s subset of {0..n-1} via shuffle-prefix; None = full set."""
    if s >= n:
        return None
    return rng.permutation(n)[:s]


def _draw_subset(
    rng: np.random.Generator, sample: Optional[np.ndarray], n: int, m: int
) -> Optional[np.ndarray]:
    """Uniform size-m subset of ``sample`` (of the full set when None)."""
    size = n if sample is None else len(sample)
    if m >= size:
        return sample
    positions = rng.permutation(size)[:m]
    return positions if sample is None else sample[positions]


def run_inner(
    state: OuterState,
    R: int,
    problem,
    cfg: AstrConfig,
    rng: np.random.Generator,
) -> InnerResult:
    """R sampled trust-region steps from ``state.x``.

    Each iteration draws a fresh sample, skips when the sampled gradient norm
    falls below ``cfg.epsilon`` (or when the model decrease is below rounding
    noise), and otherwise advances the iterate by one accepted trust-region
    step.  Returns the final iterate, the average per-step improvement on the
    sampled objectives, and the final radius.
    """
    if R < 1:
        raise ValueError("R must be at least 1")
    n = problem.n
    tracker = getattr(problem, "tracker", None)
    cost_before = tracker.total if tracker is not None else 0.0

    x = state.x
    delta = state.delta
    b_steps: list[float] = []
    skipped = 0
    f_final: Optional[float] = None

    for _ in range(R):
        sample = _draw_sample(rng, n, state.s)
        grad = problem.gradient(x, sample)
        if float(np.linalg.norm(grad)) < cfg.epsilon:
            skipped += 1
            b_steps.append(0.0)
            continue

        if cfg.curvature_mode == CurvatureMode.SUBSAMPLED_HESSIAN:
            hess_sample = _draw_subset(rng, sample, n, state.s_h)
            if hasattr(problem, "hvp_operator"):
                curvature = problem.hvp_operator(x, hess_sample)
            else:
                curvature = lambda v, _x=x, _s=hess_sample: problem.hvp(_x, _s, v)  # noqa: E731

            def solver(model, radius):
                return solve_steihaug(model, radius, cfg.cg_tol, cfg.max_cg)
        else:
            curvature = None

            def solver(model, radius):
                return solve_gradient_step(model, radius)

        f_center = problem.value(x, sample)
        model = QuadraticModel(center_value=f_center, gradient=grad, curvature=curvature)
        result = trust_region_step(
            lambda y, _s=sample: problem.value(y, _s), x, model, delta, cfg.tr, solver
        )
        if result.stalled:
            skipped += 1
            b_steps.append(0.0)
            continue
        x = x + result.step
        delta = result.delta_next
        b_steps.append(result.actual_decrease)
        f_final = result.f_trial

    cost_after = tracker.total if tracker is not None else 0.0
    return InnerResult(
        x_hat=x,
        b=sum(b_steps) / R,
        delta_out=delta,
        skipped=skipped,
        cost=cost_after - cost_before,
        R=R,
        b_steps=b_steps,
        f_final=f_final,
    )


def outer_update(
    state: OuterState,
    inner: InnerResult,
    problem,
    cfg: AstrConfig,
) -> tuple[OuterState, RunRecord]:
    """Accept/reject the inner candidate and adjust the sample sizes.

    While ``s < n`` the candidate is accepted iff the full objective did not
    increase, and the sample grows geometrically (never decreases) whenever
    ``tau < theta``.  Once ``s == n`` every candidate is accepted and the
    Hessian subsample is doubled each outer iteration until it reaches n.
    """
    if inner.b < 0.0:
        raise ValueError(f"inner result reported negative average improvement {inner.b}")
    n = problem.n

    if state.s < n:
        if inner.skipped == inner.R:
            # candidate is the current iterate; no fresh full pass needed
            f_hat = state.f_current
            a = 0.0
            accepted = True
        else:
            f_hat = problem.value_full(inner.x_hat)
            a = state.f_current - f_hat
            accepted = a >= 0.0
        x_next = inner.x_hat if accepted else state.x
        f_next = f_hat if accepted else state.f_current
        tau = a / inner.b if inner.b > 0.0 else 0.0
        if tau < cfg.theta:
            s_next = min(math.ceil(cfg.omega * state.s), n)
        else:
            s_next = state.s
        s_h_next = min(s_next, max(1, math.ceil(cfg.hessian_fraction * s_next)))
    else:
        accepted = True
        x_next = inner.x_hat
        f_next = inner.f_final if inner.f_final is not None else state.f_current
        a = state.f_current - f_next
        tau = a / inner.b if inner.b > 0.0 else 0.0
        s_next = n
        if cfg.curvature_mode == CurvatureMode.SUBSAMPLED_HESSIAN:
            s_h_next = min(2 * state.s_h, n)
        else:
            s_h_next = state.s_h

    next_state = OuterState(
        nu=state.nu + 1,
        x=x_next,
        s=s_next,
        s_h=s_h_next,
        delta=inner.delta_out,
        f_current=f_next,
    )
    record = RunRecord(
        nu=state.nu + 1,
        seconds=0.0,
        egrads=0.0,
        f=f_next,
        test_acc=None,
        s=s_next,
        s_h=s_h_next,
        R=inner.R,
        delta=inner.delta_out,
        accepted=accepted,
        tau=tau,
        b=inner.b,
        a=a,
        skipped=inner.skipped,
    )
    return next_state, record


def run_astr(
    problem,
    cfg: AstrConfig,
    budget: CostBudget,
    x0: Optional[np.ndarray] = None,
    eval_hook: Optional[Callable[[np.ndarray], float]] = None,
) -> RunLog:
    """Run the adaptive method until the budget is exhausted.

    Deterministic for a fixed seed (single-threaded driver).  ``eval_hook``
    is called with the current iterate at every log record; its cost is not
    charged to the run.
    """
    tracker = CostTracker()
    instrumented = InstrumentedObjective(problem, tracker)
    n, d = problem.n, problem.dim
    s0, r_hat = cfg.resolve(n)
    rng = np.random.default_rng(cfg.seed)
    watch = Stopwatch()

    x = np.zeros(d) if x0 is None else np.array(x0, dtype=float)
    f0 = instrumented.value_full(x)
    s_h0 = min(s0, max(1, math.ceil(cfg.hessian_fraction * s0)))
    state = OuterState(nu=0, x=x, s=s0, s_h=s_h0, delta=cfg.delta0, f_current=f0)

    log = RunLog(method="astr", seed=cfg.seed, n=n)
    log.append(
        RunRecord(
            nu=0,
            seconds=watch.elapsed(),
            egrads=tracker.total,
            f=f0,
            test_acc=eval_hook(x) if eval_hook else None,
            s=s0,
            s_h=s_h0,
            R=0,
            delta=cfg.delta0,
            accepted=True,
            tau=0.0,
            b=0.0,
            a=0.0,
        )
    )

    while not budget.exhausted(tracker.total, watch.elapsed()):
        R = schedule_R(
            state.s, state.s_h, n, cfg.curvature_mode, cfg.alpha_bar, cfg.beta_bar, r_hat
        )
        inner = run_inner(state, R, instrumented, cfg, rng)
        state, record = outer_update(state, inner, instrumented, cfg)
        record.egrads = tracker.total
        record.seconds = watch.elapsed()
        record.test_acc = eval_hook(state.x) if eval_hook else None
        log.append(record)

    log.final_x = state.x
    return log
