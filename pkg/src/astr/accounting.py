"""Cost accounting, run budgets and per-iteration telemetry.

Costs are measured in *effective gradient evaluations* (egrads): one gradient
over the full data set costs 1, a function value over the full set costs 0.5,
and a Hessian-vector product over a set costs the same as a gradient over that
set.  All optimizers in this package log their progress into the same
:class:`RunLog` structure and write the same CSV schema.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

#: Relative cost of one evaluation over the full data set, per operation kind.
_KIND_FACTORS = {"value": 0.5, "gradient": 1.0, "hvp": 1.0}

#: Fixed CSV column order written by :meth:`RunLog.to_csv`.
CSV_HEADER = "nu,seconds,egrads,f,gap,test_acc,s,s_H,R,delta,accepted,tau,b,a"


def account(kind: str, sample_size: int, n: int) -> float:
    """Egrad cost of evaluating ``kind`` on ``sample_size`` of ``n`` points.

    value -> 0.5 * sample_size / n, gradient -> sample_size / n,
    hvp -> sample_size / n.
    """
    if kind not in _KIND_FACTORS:
        raise ValueError(f"unknown evaluation kind {kind!r}")
    if not 1 <= sample_size <= n:
        raise ValueError(f"sample size {sample_size} outside [1, {n}]")
    return _KIND_FACTORS[kind] * sample_size / n


class CostTracker:
    """Accumulates egrad charges; one per optimizer run."""

    def __init__(self):
        self.total = 0.0
        self.counts = {kind: 0 for kind in _KIND_FACTORS}

    def add(self, kind: str, sample_size: int, n: int) -> None:
        self.total += account(kind, sample_size, n)
        self.counts[kind] += 1


class InstrumentedObjective:
    """Wraps a finite-sum objective so every evaluation is charged.

    Exposes the same evaluation surface as the wrapped problem
    (``n``, ``dim``, ``value``, ``gradient``, ``hvp``, ``value_full``); the
    accumulated cost lives in ``self.tracker``.
    """

    def __init__(self, problem, tracker: CostTracker | None = None):
        self.problem = problem
        self.tracker = tracker if tracker is not None else CostTracker()

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def dim(self) -> int:
        return self.problem.dim

    def _size(self, sample) -> int:
        return self.n if sample is None else len(sample)

    def value(self, x, sample=None):
        self.tracker.add("value", self._size(sample), self.n)
        return self.problem.value(x, sample)

    def gradient(self, x, sample=None):
        self.tracker.add("gradient", self._size(sample), self.n)
        return self.problem.gradient(x, sample)

    def hvp(self, x, sample, v):
        self.tracker.add("hvp", self._size(sample), self.n)
        return self.problem.hvp(x, sample, v)

    def hvp_operator(self, x, sample):
        if hasattr(self.problem, "hvp_operator"):
            apply = self.problem.hvp_operator(x, sample)
        else:
            apply = lambda v: self.problem.hvp(x, sample, v)  # noqa: E731
        size = self._size(sample)

        def charged(v):
            self.tracker.add("hvp", size, self.n)
            return apply(v)

        return charged

    def value_full(self, x):
        return self.value(x, None)


@dataclass(frozen=True)
class CostBudget:
    """Stopping rule for a run; whichever bound binds first wins."""

    max_egrads: float = math.inf
    max_seconds: float = math.inf

    def __post_init__(self):
        if math.isinf(self.max_egrads) and math.isinf(self.max_seconds):
            raise ValueError("at least one budget bound must be finite")
        if self.max_egrads < 0 or self.max_seconds < 0:
            raise ValueError("budget bounds must be nonnegative")

    def exhausted(self, egrads: float, seconds: float) -> bool:
        return egrads >= self.max_egrads or seconds >= self.max_seconds


@dataclass
class RunRecord:
    """One outer iteration (or one logging event for SGD/SVRG)."""

    nu: int
    seconds: float
    egrads: float
    f: float
    test_acc: float | None
    s: int
    s_h: int
    R: int
    delta: float
    accepted: bool
    tau: float
    b: float
    a: float
    # diagnostics not part of the CSV schema
    skipped: int = 0
    grad_norm: float | None = None


def _fmt(v) -> str:
    if v is None:
        return "nan"
    return f"{float(v):.17g}"


@dataclass
class RunLog:
    """Ordered per-iteration telemetry for one optimizer run."""

    method: str
    seed: int
    n: int
    records: list[RunRecord] = field(default_factory=list)
    status: str = "ok"
    final_x: np.ndarray | None = None

    def append(self, record: RunRecord) -> None:
        self.records.append(record)

    @property
    def final(self) -> RunRecord:
        return self.records[-1]

    def column(self, name: str) -> np.ndarray:
        vals = [getattr(r, name) for r in self.records]
        if name in ("nu", "s", "s_h", "R", "skipped"):
            return np.array(vals, dtype=int)
        if name == "accepted":
            return np.array(vals, dtype=bool)
        return np.array([np.nan if v is None else v for v in vals], dtype=float)

    def to_csv(self, path_or_stream, f_star: float | None = None) -> None:
        """Write the fixed-schema CSV; floats carry 17 significant digits."""
        close = False
        if hasattr(path_or_stream, "write"):
            fh = path_or_stream
        else:
            fh = open(path_or_stream, "w")
            close = True
        try:
            fh.write(CSV_HEADER + "\n")
            for r in self.records:
                gap = None if f_star is None else r.f - f_star
                fields = [
                    str(r.nu),
                    _fmt(r.seconds),
                    _fmt(r.egrads),
                    _fmt(r.f),
                    _fmt(gap),
                    _fmt(r.test_acc),
                    str(r.s),
                    str(r.s_h),
                    str(r.R),
                    _fmt(r.delta),
                    str(int(r.accepted)),
                    _fmt(r.tau),
                    _fmt(r.b),
                    _fmt(r.a),
                ]
                fh.write(",".join(fields) + "\n")
        finally:
            if close:
                fh.close()


def load_csv(path) -> dict[str, np.ndarray]:
    """Read a harness CSV back into a dict of float columns."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header: {header!r}")
        names = header.split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    cols = {name: np.array([float(row[i]) for row in rows]) for i, name in enumerate(names)}
    return cols


class Stopwatch:
    """Wall-clock seconds since construction."""

    def __init__(self):
        self._t0 = time.perf_counter()

    def elapsed(self) -> float:
        return time.perf_counter() - self._t0
