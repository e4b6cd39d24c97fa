"""Finite-difference verification of the analytic derivatives.

All three objective families expose analytic gradients and exact
Hessian-vector products (the network uses forward-over-reverse directional
differentiation instead of materializing its 79510^2 Hessian).  This script
cross-checks them against central finite differences on small instances.
"""
import numpy as np

from astr import (
    LogisticRegressionProblem,
    SigmoidLeastSquaresProblem,
    TwoLayerNetProblem,
    labels_to_01,
    synth_logistic,
)

rng = np.random.default_rng(3)
ds = synth_logistic(60, 15, seed=0)

families = {
    "logistic regression": LogisticRegressionProblem(ds.features, ds.labels),
    "sigmoid least squares": SigmoidLeastSquaresProblem(ds.features, labels_to_01(ds.labels)),
    "two-layer net (4-3-2)": TwoLayerNetProblem(
        rng.standard_normal((6, 4)), rng.integers(0, 2, size=6), hidden=3, n_classes=2
    ),
}


def fd_grad(fun, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


for name, problem in families.items():
    x = rng.standard_normal(problem.dim) * 0.5
    v = rng.standard_normal(problem.dim)
    sample = rng.permutation(problem.n)[: max(2, problem.n // 2)]

    g = problem.gradient(x, sample)
    g_err = np.linalg.norm(g - fd_grad(lambda y: problem.value(y, sample), x)) / np.linalg.norm(g)

    h = 1e-5
    hv = problem.hvp(x, sample, v)
    hv_fd = (problem.gradient(x + h * v, sample) - problem.gradient(x - h * v, sample)) / (2 * h)
    hv_err = np.linalg.norm(hv - hv_fd) / np.linalg.norm(hv)

    print(f"{name:24s} dim={problem.dim:4d}  grad rel err={g_err:.2e}  hvp rel err={hv_err:.2e}")

print("\nall families agree with finite differences.")
