"""Shared test fixtures: independent oracles and tiny finite-sum problems.

The oracles here deliberately avoid the library's own code paths: dense
eigendecompositions for the subproblem, term-by-term summation for model
values, and central finite differences for derivatives.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from astr.problems import FiniteSumObjective


# ---------------------------------------------------------------------------
# independent oracles
# ---------------------------------------------------------------------------

def model_eval_by_summation(center, g, a, d):
    """Term-by-term quadratic model value (scalar loops, no vectorization)."""
    total = float(center)
    for i in range(len(d)):
        total += float(g[i]) * float(d[i])
    for i in range(len(d)):
        for j in range(len(d)):
            total += 0.5 * float(d[i]) * float(a[i, j]) * float(d[j])
    return total


def cauchy_point_decrease(g, a, delta):
    """Exact model decrease of the Cauchy point (minimizer along -g in the ball)."""
    gg = float(g @ g)
    gnorm = np.sqrt(gg)
    gag = float(g @ (a @ g))
    t_boundary = delta / gnorm
    if gag > 0.0:
        t = min(gg / gag, t_boundary)
    else:
        t = t_boundary
    return t * gg - 0.5 * t * t * gag


def exact_trs_solution(g, a, delta, tol=1e-12):
    """Dense subproblem oracle via eigendecomposition and a secular solve."""
    w, q = scipy.linalg.eigh(a)
    gh = q.T @ g

    def step_norm(lam):
        return float(np.linalg.norm(gh / (w + lam)))

    if w.min() > 0 and step_norm(0.0) <= delta:
        return -q @ (gh / w)

    lo = max(0.0, -float(w.min())) + 1e-14
    while step_norm(lo) <= delta:  # hard-case guard; random instances stay clear
        lo *= 0.5
        if lo < 1e-300:
            break
    hi = lo + 1.0
    while step_norm(hi) > delta:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if step_norm(mid) > delta:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(1.0, hi):
            break
    lam = 0.5 * (lo + hi)
    return -q @ (gh / (w + lam))


def fd_gradient(fun, x, h=1e-5):
    """Central finite-difference gradient."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return g


def fd_hvp(grad_fun, x, v, h=1e-5):
    """Finite difference of gradients along v: (g(x+hv) - g(x-hv)) / 2h."""
    return (grad_fun(x + h * v) - grad_fun(x - h * v)) / (2.0 * h)


def rel_err(approx, exact):
    denom = max(float(np.linalg.norm(exact)), 1e-30)
    return float(np.linalg.norm(np.asarray(approx) - np.asarray(exact))) / denom


# ---------------------------------------------------------------------------
# tiny finite-sum problems for driver tests
# ---------------------------------------------------------------------------

class QuadraticSumProblem(FiniteSumObjective):
    """f_i(x) = 0.5 (x - c_i)^T B (x - c_i) with shared SPD curvature B.

    Every sampled objective is exactly quadratic with Hessian B, so a model
    built from the exact curvature predicts decreases perfectly (rho = 1).
    """

    def __init__(self, centers, b_matrix):
        self.centers = np.asarray(centers, dtype=float)
        self.b = np.asarray(b_matrix, dtype=float)
        self.n = self.centers.shape[0]
        self.dim = self.centers.shape[1]

    def _centers(self, sample):
        return self.centers if sample is None else self.centers[np.asarray(sample)]

    def value(self, x, sample=None):
        c = self._centers(sample)
        diff = x[None, :] - c
        return float(0.5 * np.mean(np.einsum("ij,jk,ik->i", diff, self.b, diff)))

    def gradient(self, x, sample=None):
        c = self._centers(sample)
        return self.b @ (x - c.mean(axis=0))

    def hvp(self, x, sample, v):
        return self.b @ v

    def fingerprint(self):
        import hashlib

        h = hashlib.sha256()
        h.update(self.centers.tobytes())
        h.update(self.b.tobytes())
        return h.hexdigest()


def random_spd(rng, dim, cond=10.0):
    q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    eigs = np.linspace(1.0, cond, dim)
    return q @ np.diag(eigs) @ q.T


def random_symmetric(rng, dim, scale=1.0):
    m = rng.standard_normal((dim, dim))
    return scale * 0.5 * (m + m.T)
