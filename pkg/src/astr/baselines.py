"""Comparison optimizers: mini-batch SGD, SVRG and full-batch trust region.

All three share the cost accounting and RunLog contracts of the adaptive
driver so runs are directly comparable in effective gradient evaluations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .accounting import CostBudget, CostTracker, InstrumentedObjective, RunLog, RunRecord, Stopwatch
from .trs import QuadraticModel, solve_steihaug
from .trstep import TRStepConfig, trust_region_step

# Hyper-parameter grids used for tuning the first-order baselines.
STEP_SIZE_GRID = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0]
SVRG_INNER_FRACTION_GRID = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 2.0]


def sgd_batch_fraction_grid(n: int) -> list[float]:
    """Mini-batch fractions 1/n (single point) through 1e-1."""
    return [1.0 / n, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1]


@dataclass(frozen=True)
class SgdConfig:
    step_size: float
    batch_fraction: float
    seed: int = 0
    log_every: float = 1.0  # egrads between log records

    def __post_init__(self):
        if not self.step_size >= 0.0:
            raise ValueError("step size must be nonnegative")
        if not self.batch_fraction > 0.0:
            raise ValueError("batch fraction must be positive")


@dataclass(frozen=True)
class SvrgConfig:
    step_size: float
    inner_count_fraction: float
    seed: int = 0

    def __post_init__(self):
        if not self.step_size >= 0.0:
            raise ValueError("step size must be nonnegative")
        if not self.inner_count_fraction > 0.0:
            raise ValueError("inner count fraction must be positive")


@dataclass(frozen=True)
class FullBatchTrConfig:
    delta0: float = 1.0
    epsilon: float = 1e-14
    cg_tol: float = 1e-4
    max_cg: int = 30
    tr: TRStepConfig = field(default_factory=TRStepConfig)
    seed: int = 0


def _baseline_record(nu, watch, tracker, f, hook, x, s, s_h, R, delta, tau=0.0, b=0.0, a=0.0,
                     accepted=True, skipped=0, grad_norm=None) -> RunRecord:
    return RunRecord(
        nu=nu,
        seconds=watch.elapsed(),
        egrads=tracker.total,
        f=f,
        test_acc=hook(x) if hook else None,
        s=s,
        s_h=s_h,
        R=R,
        delta=delta,
        accepted=accepted,
        tau=tau,
        b=b,
        a=a,
        skipped=skipped,
        grad_norm=grad_norm,
    )


def run_sgd(
    problem,
    cfg: SgdConfig,
    budget: CostBudget,
    x0: Optional[np.ndarray] = None,
    eval_hook: Optional[Callable[[np.ndarray], float]] = None,
) -> RunLog:
    """Mini-batch SGD with a fixed step size.

    Batches are drawn uniformly without replacement, independently per step.
    Progress is logged every ``cfg.log_every`` egrads; the objective values in
    the log are measurements and are not charged to the budget.
    """
    tracker = CostTracker()
    instrumented = InstrumentedObjective(problem, tracker)
    n = problem.n
    batch = min(n, max(1, math.ceil(cfg.batch_fraction * n)))
    rng = np.random.default_rng(cfg.seed)
    watch = Stopwatch()

    x = np.zeros(problem.dim) if x0 is None else np.array(x0, dtype=float)
    log = RunLog(method="sgd", seed=cfg.seed, n=n)
    log.append(_baseline_record(0, watch, tracker, problem.value_full(x), eval_hook, x,
                                s=batch, s_h=0, R=0, delta=float("nan")))

    k = 0
    next_mark = cfg.log_every
    while not budget.exhausted(tracker.total, watch.elapsed()):
        sample = rng.choice(n, size=batch, replace=False)
        grad = instrumented.gradient(x, sample)
        x = x - cfg.step_size * grad
        k += 1
        if not np.all(np.isfinite(x)):
            log.status = "diverged"
            log.append(_baseline_record(k, watch, tracker, float("nan"), None, x,
                                        s=batch, s_h=0, R=0, delta=float("nan"),
                                        accepted=False))
            log.final_x = x
            return log
        if tracker.total >= next_mark or budget.exhausted(tracker.total, watch.elapsed()):
            log.append(_baseline_record(k, watch, tracker, problem.value_full(x),
                                        eval_hook, x, s=batch, s_h=0, R=0,
                                        delta=float("nan")))
            while next_mark <= tracker.total:
                next_mark += cfg.log_every
    log.final_x = x
    return log


def run_svrg(
    problem,
    cfg: SvrgConfig,
    budget: CostBudget,
    x0: Optional[np.ndarray] = None,
    eval_hook: Optional[Callable[[np.ndarray], float]] = None,
) -> RunLog:
    """Variance-reduced SGD with full-gradient snapshots.

    Each epoch computes the full gradient at the snapshot, then runs
    K = ceil(mu * n) corrected single-point steps with indices drawn uniformly
    with replacement; the snapshot then moves to the last iterate.  One log
    record per epoch (the record's ``grad_norm`` carries the snapshot
    gradient norm).
    """
    tracker = CostTracker()
    instrumented = InstrumentedObjective(problem, tracker)
    n = problem.n
    k_inner = max(1, math.ceil(cfg.inner_count_fraction * n))
    rng = np.random.default_rng(cfg.seed)
    watch = Stopwatch()

    x = np.zeros(problem.dim) if x0 is None else np.array(x0, dtype=float)
    log = RunLog(method="svrg", seed=cfg.seed, n=n)
    log.append(_baseline_record(0, watch, tracker, problem.value_full(x), eval_hook, x,
                                s=1, s_h=0, R=k_inner, delta=float("nan")))

    epoch = 0
    while not budget.exhausted(tracker.total, watch.elapsed()):
        snapshot = x
        mu_full = instrumented.gradient(snapshot, None)
        epoch += 1
        indices = rng.integers(0, n, size=k_inner)
        for i in indices:
            gi = instrumented.gradient(x, [i])
            gi_snap = instrumented.gradient(snapshot, [i])
            x = x - cfg.step_size * (gi - gi_snap + mu_full)
            if budget.exhausted(tracker.total, watch.elapsed()):
                break
        if not np.all(np.isfinite(x)):
            log.status = "diverged"
            log.append(_baseline_record(epoch, watch, tracker, float("nan"), None, x,
                                        s=1, s_h=0, R=k_inner, delta=float("nan"),
                                        accepted=False,
                                        grad_norm=float(np.linalg.norm(mu_full))))
            log.final_x = x
            return log
        log.append(_baseline_record(epoch, watch, tracker, problem.value_full(x),
                                    eval_hook, x, s=1, s_h=0, R=k_inner,
                                    delta=float("nan"),
                                    grad_norm=float(np.linalg.norm(mu_full))))
    log.final_x = x
    return log


def run_fullbatch_tr(
    problem,
    cfg: FullBatchTrConfig,
    budget: CostBudget,
    x0: Optional[np.ndarray] = None,
    eval_hook: Optional[Callable[[np.ndarray], float]] = None,
) -> RunLog:
    """Trust-region Newton-CG over the full data set every iteration.

    Equivalent to the adaptive driver configured with s0 = n and
    hessian_fraction = 1 (one inner iteration per outer iteration); iterates,
    objective values and egrad charges coincide exactly for equal seeds.
    Iterations whose full gradient norm falls below ``cfg.epsilon`` take no
    step but still appear in the log.
    """
    tracker = CostTracker()
    instrumented = InstrumentedObjective(problem, tracker)
    n = problem.n
    watch = Stopwatch()

    x = np.zeros(problem.dim) if x0 is None else np.array(x0, dtype=float)
    delta = cfg.delta0
    f_x = instrumented.value_full(x)
    log = RunLog(method="tr", seed=cfg.seed, n=n)
    log.append(_baseline_record(0, watch, tracker, f_x, eval_hook, x,
                                s=n, s_h=n, R=0, delta=delta))

    def solver(model, radius):
        return solve_steihaug(model, radius, cfg.cg_tol, cfg.max_cg)

    nu = 0
    while not budget.exhausted(tracker.total, watch.elapsed()):
        nu += 1
        grad = instrumented.gradient(x, None)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < cfg.epsilon:
            log.append(_baseline_record(nu, watch, tracker, f_x, eval_hook, x,
                                        s=n, s_h=n, R=1, delta=delta, skipped=1,
                                        grad_norm=gnorm))
            continue
        f_center = instrumented.value(x, None)
        model = QuadraticModel(
            center_value=f_center,
            gradient=grad,
            curvature=instrumented.hvp_operator(x, None),
        )
        result = trust_region_step(
            lambda y: instrumented.value(y, None), x, model, delta, cfg.tr, solver
        )
        if result.stalled:
            log.append(_baseline_record(nu, watch, tracker, f_x, eval_hook, x,
                                        s=n, s_h=n, R=1, delta=delta, skipped=1,
                                        grad_norm=gnorm))
            continue
        x = x + result.step
        delta = result.delta_next
        b = result.actual_decrease
        f_new = result.f_trial
        a = f_x - f_new
        f_x = f_new
        log.append(_baseline_record(nu, watch, tracker, f_x, eval_hook, x,
                                    s=n, s_h=n, R=1, delta=delta,
                                    tau=a / b if b > 0.0 else 0.0, b=b, a=a,
                                    grad_norm=gnorm))
    log.final_x = x
    return log
