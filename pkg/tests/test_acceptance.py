"""Acceptance suite: one test per criterion, each printing a PASS line.

Criteria are property-based plus scaled-down trend replication measured in
effective gradient evaluations; exact large-scale figures are out of scope.
"""
import numpy as np
import pytest

from astr import (
    AstrConfig,
    CostBudget,
    FullBatchTrConfig,
    LogisticRegressionProblem,
    QuadraticModel,
    SgdConfig,
    SigmoidLeastSquaresProblem,
    SvrgConfig,
    TwoLayerNetProblem,
    compute_f_star,
    matrix_operator,
    run_astr,
    run_experiment,
    run_fullbatch_tr,
    run_sgd,
    run_svrg,
    solve_steihaug,
    synth_logistic,
)
from astr.baselines import STEP_SIZE_GRID, sgd_batch_fraction_grid
from astr.harness import initial_point, load_dataset
from conftest import (
    cauchy_point_decrease,
    fd_gradient,
    fd_hvp,
    random_spd,
    random_symmetric,
    rel_err,
)

GRAD_TOL = 1e-6
HVP_TOL = 1e-5
N_PROBES = 50


def _report(name):
    print(f"\nACCEPTANCE {name}: PASS")


# ---------------------------------------------------------------------------
# criterion 1: derivative correctness for all three problem families
# ---------------------------------------------------------------------------

def _probe_derivatives(problem, rng, x_scale=0.5):
    for _ in range(N_PROBES):
        x = rng.standard_normal(problem.dim) * x_scale
        v = rng.standard_normal(problem.dim)
        size = int(rng.integers(1, problem.n + 1))
        sample = rng.permutation(problem.n)[:size]
        g = problem.gradient(x, sample)
        assert rel_err(g, fd_gradient(lambda y: problem.value(y, sample), x)) <= GRAD_TOL
        hv = problem.hvp(x, sample, v)
        assert rel_err(hv, fd_hvp(lambda y: problem.gradient(y, sample), x, v)) <= HVP_TOL


def test_acceptance_derivative_correctness():
    rng = np.random.default_rng(2024)
    ds = synth_logistic(100, 50, seed=0)
    _probe_derivatives(LogisticRegressionProblem(ds.features, ds.labels), rng)
    nls_labels = (ds.labels + 1) // 2
    _probe_derivatives(SigmoidLeastSquaresProblem(ds.features, nls_labels), rng)
    feats = rng.standard_normal((5, 4))
    digits = rng.integers(0, 2, size=5)
    _probe_derivatives(TwoLayerNetProblem(feats, digits, hidden=3, n_classes=2), rng)
    _report("derivative correctness (3 families, 50 probes each)")


# ---------------------------------------------------------------------------
# criterion 2: subproblem solver decrease and Newton agreement
# ---------------------------------------------------------------------------

def test_acceptance_subproblem_solver():
    rng = np.random.default_rng(7)
    dim = 10
    newton_checks = 0
    for trial in range(200):
        g = rng.standard_normal(dim)
        a = random_spd(rng, dim, cond=50.0) if trial % 2 == 0 else random_symmetric(rng, dim, 2.0)
        delta = float(rng.uniform(0.1, 10.0))
        model = QuadraticModel(0.0, g, matrix_operator(a))
        sol = solve_steihaug(model, delta, cg_tol=1e-12, max_cg=200)
        assert sol.predicted_decrease >= cauchy_point_decrease(g, a, delta) - 1e-10
        gnorm = np.linalg.norm(g)
        bound = 0.5 * gnorm * min(gnorm / (1.0 + np.linalg.norm(a, 2)), delta)
        assert sol.predicted_decrease >= bound - 1e-10
        if trial % 2 == 0:
            newton = np.linalg.solve(a, -g)
            if 2.0 * np.linalg.norm(newton) <= delta:
                assert np.linalg.norm(sol.step - newton) <= 1e-8
                newton_checks += 1
    assert newton_checks > 10  # the Newton branch was actually exercised
    _report(f"subproblem solver (200 instances, {newton_checks} Newton matches)")


# ---------------------------------------------------------------------------
# criteria 3 + 4: sample growth to n, monotonicity, and the b-dichotomy
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def growth_runs():
    ds = synth_logistic(2000, 20, seed=0)
    problem = LogisticRegressionProblem(ds.features, ds.labels)
    logs = []
    for seed in range(20):
        logs.append(run_astr(problem, AstrConfig(seed=seed), CostBudget(max_egrads=400.0)))
    return problem, logs


def test_acceptance_sample_growth_reaches_n(growth_runs):
    problem, logs = growth_runs
    for log in logs:
        s = log.column("s")
        full_rows = np.nonzero(s == problem.n)[0]
        assert full_rows.size > 0, f"seed {log.seed} never reached the full sample"
        assert full_rows[0] <= 200
        assert np.all(np.diff(s) >= 0)  # sample size never decreases
        # the radius stays bounded away from zero on these smooth problems
        assert log.column("delta").min() > 1e-8
        records = log.records
        for prev, cur in zip(records, records[1:]):
            if prev.s < problem.n:
                assert cur.f <= prev.f + 1e-15
    _report("sample size reaches n on 20/20 seeds with monotone objective")


def test_acceptance_average_improvement_dichotomy(growth_runs):
    _, logs = growth_runs
    for log in logs:
        for rec in log.records[1:]:
            assert rec.b == 0.0 or rec.b > 0.0
            if rec.b == 0.0:
                assert rec.skipped == rec.R, (
                    f"seed {log.seed} nu {rec.nu}: b = 0 with only "
                    f"{rec.skipped}/{rec.R} steps skipped"
                )
    _report("average-improvement dichotomy (b = 0 only when every step skipped)")


# ---------------------------------------------------------------------------
# criterion 5: desk-scale training-error trend against the full-batch method
# ---------------------------------------------------------------------------

def test_acceptance_gap_trend_vs_fullbatch():
    try:
        dataset = load_dataset("a9a")
        tag = "a9a"
        problem = LogisticRegressionProblem(
            dataset.train_features,
            np.where(dataset.train_labels > 0, 1.0, -1.0),
        )
    except FileNotFoundError:
        tag = "synth(n=30000,d=100)"
        ds = synth_logistic(30000, 100, seed=1)
        problem = LogisticRegressionProblem(ds.features, ds.labels)

    f_star = compute_f_star(problem)
    x0 = initial_point(problem, seed=1)
    budget = CostBudget(max_egrads=300.0)
    astr_log = run_astr(problem, AstrConfig(seed=1), budget, x0=x0)
    tr_log = run_fullbatch_tr(problem, FullBatchTrConfig(seed=1), budget, x0=x0)

    for log in (astr_log, tr_log):
        assert np.all(log.column("f") - f_star >= -1e-12)

    def crossing(log, tol=1e-5):
        for rec in log.records:
            if rec.f - f_star <= tol:
                return rec.egrads
        return float("inf")

    astr_cross = crossing(astr_log)
    tr_cross = crossing(tr_log)
    assert np.isfinite(astr_cross)
    assert astr_cross < tr_cross, (
        f"adaptive method crossed at {astr_cross} egrads, "
        f"full batch at {tr_cross}"
    )
    _report(f"gap trend on {tag}: adaptive {astr_cross:.1f} < full-batch "
            f"{tr_cross:.1f} egrads to reach 1e-5")


# ---------------------------------------------------------------------------
# criterion 6: first-order baseline sanity at equal budget
# ---------------------------------------------------------------------------

def test_acceptance_baseline_sanity():
    ds = synth_logistic(2000, 20, seed=0)
    problem = LogisticRegressionProblem(ds.features, ds.labels)
    f_star = compute_f_star(problem)
    x0 = initial_point(problem, seed=7)

    # SVRG: tune the step size over the grid, then require linear decrease of
    # the snapshot gradient norms over the first five epochs
    best = None
    for t in STEP_SIZE_GRID:
        log = run_svrg(problem, SvrgConfig(t, 0.1, seed=0),
                       CostBudget(max_egrads=10.0), x0=x0)
        if log.status != "ok":
            continue
        if best is None or log.final.f < best[0]:
            best = (log.final.f, t, log)
    _, best_t, best_log = best
    norms = [r.grad_norm for r in best_log.records[1:] if r.grad_norm is not None]
    assert len(norms) >= 6
    for k in range(5):
        assert norms[k + 1] < norms[k]
    assert norms[5] <= 0.9**5 * norms[0]

    # SGD: full grid at a fixed budget; the adaptive method must match or
    # beat the best cell's final gap at the same budget
    budget = CostBudget(max_egrads=30.0)
    best_sgd_gap = np.inf
    for t in STEP_SIZE_GRID:
        for zeta in sgd_batch_fraction_grid(problem.n):
            log = run_sgd(problem, SgdConfig(t, zeta, seed=0), budget, x0=x0)
            if log.status == "ok":
                best_sgd_gap = min(best_sgd_gap, log.final.f - f_star)
    astr_log = run_astr(problem, AstrConfig(seed=7), budget, x0=x0)
    astr_gap = astr_log.final.f - f_star
    assert astr_gap <= best_sgd_gap
    _report(f"baseline sanity: svrg(t={best_t}) linear rate; adaptive gap "
            f"{astr_gap:.2e} <= best sgd gap {best_sgd_gap:.2e}")


# ---------------------------------------------------------------------------
# criterion 7: full-batch configuration equivalence, bitwise via CSV
# ---------------------------------------------------------------------------

def _csv_without_seconds(path):
    with open(path) as fh:
        lines = fh.read().splitlines()
    return [",".join(v for i, v in enumerate(line.split(",")) if i != 1)
            for line in lines]


def test_acceptance_fullbatch_equivalence(tmp_path):
    ds = synth_logistic(400, 10, seed=2)
    problem = LogisticRegressionProblem(ds.features, ds.labels)
    x0 = initial_point(problem, seed=5)
    budget = CostBudget(max_egrads=20.0)

    astr_log = run_astr(
        problem, AstrConfig(s0=problem.n, hessian_fraction=1.0, seed=5), budget, x0=x0
    )
    tr_log = run_fullbatch_tr(problem, FullBatchTrConfig(seed=5), budget, x0=x0)
    astr_csv = tmp_path / "astr.csv"
    tr_csv = tmp_path / "tr.csv"
    astr_log.to_csv(astr_csv)
    tr_log.to_csv(tr_csv)
    assert _csv_without_seconds(astr_csv) == _csv_without_seconds(tr_csv)
    _report("full-batch equivalence (bit-identical CSV numeric columns)")


# ---------------------------------------------------------------------------
# criterion 8: experiment-level determinism
# ---------------------------------------------------------------------------

def test_acceptance_determinism(tmp_path):
    args = ["--problem", "logistic", "--dataset", "synth:n=500,d=10",
            "--method", "astr", "--budget-egrads", "15", "--seed", "4",
            "--threads", "1"]
    out1, out2 = tmp_path / "first", tmp_path / "second"
    assert run_experiment(args + ["--out", str(out1)]) == 0
    assert run_experiment(args + ["--out", str(out2)]) == 0
    first = _csv_without_seconds(out1 / "astr_seed4.csv")
    second = _csv_without_seconds(out2 / "astr_seed4.csv")
    assert first == second
    _report("determinism (byte-identical CSV numeric columns, pinned threads)")
