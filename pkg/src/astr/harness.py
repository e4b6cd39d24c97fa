"""Benchmark harness: dataset registry, reference optima, CSV logs and CLI.

One CSV is written per (method, seed) pair, plus a JSON manifest recording
the configuration, the dataset fingerprint and the reference value F*.
Budgets are expressed in effective gradient evaluations for reproducibility;
wall-clock budgets are supported but runs under them are not reproducible.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .accounting import CostBudget, RunLog, account  # noqa: F401  (RunLog/account are part of this module's surface)
from .adaptive import AstrConfig, CurvatureMode, run_astr
from .baselines import (
    STEP_SIZE_GRID,
    SVRG_INNER_FRACTION_GRID,
    FullBatchTrConfig,
    SgdConfig,
    SvrgConfig,
    run_fullbatch_tr,
    run_sgd,
    run_svrg,
    sgd_batch_fraction_grid,
)
from .data import Dataset, load_idx, parse_libsvm, random_split, scale_features_maxabs, synth_logistic
from .problems import (
    LogisticRegressionProblem,
    SigmoidLeastSquaresProblem,
    TwoLayerNetProblem,
    labels_to_01,
    labels_to_pm1,
)

DATA_DIR_ENV = "ASTR_DATA_DIR"

PROBLEMS = ("logistic", "nls", "nn")
METHODS = ("astr", "tr", "sgd", "svrg", "grid:sgd", "grid:svrg")

#: Known data sets: file candidates relative to the data dir, plus the source
#: URL documented for manual download (nothing is fetched automatically).
NAMED_DATASETS = {
    "a9a": {
        "files": ["a9a", "a9a.txt", "a9a.libsvm", "a9a.gz"],
        "format": "libsvm",
        "n_features": 123,
        "url": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary.html#a9a",
    },
    "w8a": {
        "files": ["w8a", "w8a.txt", "w8a.libsvm", "w8a.gz"],
        "format": "libsvm",
        "n_features": 300,
        "url": "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary.html#w8a",
    },
    "odd_even": {
        "files": ["train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"],
        "label_files": ["train-labels-idx1-ubyte", "train-labels-idx1-ubyte.gz"],
        "format": "idx",
        "mapping": "odd_even",
        "url": "http://yann.lecun.com/exdb/mnist/",
    },
    "mnist": {
        "files": ["train-images-idx3-ubyte", "train-images-idx3-ubyte.gz"],
        "label_files": ["train-labels-idx1-ubyte", "train-labels-idx1-ubyte.gz"],
        "format": "idx",
        "mapping": "digits",
        "url": "http://yann.lecun.com/exdb/mnist/",
    },
}

_FSTAR_CACHE: dict[tuple, float] = {}


def compute_f_star(
    problem,
    tr_config: FullBatchTrConfig | None = None,
    iteration_cap: int = 10_000,
) -> float:
    """Reference optimal value: full-batch trust region run to numerical stall.

    Stops once two consecutive accepted iterations improve F by less than
    ``4 * eps * |F|`` or the radius underflows; returns the best value seen.
    Results are cached by (problem fingerprint, solver configuration); the
    evaluations performed here are never charged to any run budget.
    """
    cfg = tr_config if tr_config is not None else FullBatchTrConfig()
    key = (problem.fingerprint(), cfg)
    if key in _FSTAR_CACHE:
        return _FSTAR_CACHE[key]

    from .trs import QuadraticModel, solve_steihaug
    from .trstep import trust_region_step

    x = np.zeros(problem.dim)
    delta = cfg.delta0
    f_x = problem.value_full(x)
    f_best = f_x
    eps = np.finfo(float).eps
    consecutive_small = 0

    def solver(model, radius):
        return solve_steihaug(model, radius, cfg.cg_tol, cfg.max_cg)

    for _ in range(iteration_cap):
        grad = problem.gradient(x, None)
        if float(np.linalg.norm(grad)) < cfg.epsilon:
            break
        if hasattr(problem, "hvp_operator"):
            curvature = problem.hvp_operator(x, None)
        else:
            curvature = lambda v, _x=x: problem.hvp(_x, None, v)  # noqa: E731
        model = QuadraticModel(
            center_value=f_x,
            gradient=grad,
            curvature=curvature,
        )
        result = trust_region_step(
            lambda y: problem.value(y, None), x, model, delta, cfg.tr, solver
        )
        if result.stalled:
            break
        x = x + result.step
        delta = result.delta_next
        improvement = f_x - result.f_trial
        f_x = result.f_trial
        f_best = min(f_best, f_x)
        if improvement < 4.0 * eps * abs(f_x):
            consecutive_small += 1
            if consecutive_small >= 2:
                break
        else:
            consecutive_small = 0
        if delta < 1e-30:
            break
    else:
        warnings.warn(
            f"reference solve hit the {iteration_cap}-iteration cap; "
            "returning the best value seen",
            RuntimeWarning,
        )

    _FSTAR_CACHE[key] = f_best
    return f_best


# ---------------------------------------------------------------------------
# dataset / problem construction
# ---------------------------------------------------------------------------

def data_dir() -> str:
    return os.environ.get(DATA_DIR_ENV, os.path.join(os.getcwd(), "datasets"))


def _find_file(candidates) -> str | None:
    for name in candidates:
        path = os.path.join(data_dir(), name)
        if os.path.exists(path):
            return path
    return None


def parse_synth_spec(spec: str) -> dict:
    """Parse ``synth:n=2000,d=20[,seed=0]`` into generator arguments."""
    params = {"seed": 0}
    body = spec.split(":", 1)[1] if ":" in spec else ""
    for item in filter(None, body.split(",")):
        if "=" not in item:
            raise ValueError(f"bad synth parameter {item!r}")
        key, value = item.split("=", 1)
        if key not in ("n", "d", "seed"):
            raise ValueError(f"unknown synth parameter {key!r}")
        params[key] = int(value)
    if "n" not in params or "d" not in params:
        raise ValueError("synth spec needs at least n and d, e.g. synth:n=2000,d=20")
    return params


def load_dataset(name: str, split_seed: int = 0) -> Dataset:
    """Resolve a dataset argument: synth spec, registry name, or file path."""
    if name.startswith("synth:") or name == "synth":
        params = parse_synth_spec(name)
        ds = synth_logistic(params["n"], params["d"], params["seed"])
        return random_split(ds, test_fraction=0.1, seed=split_seed)
    if name in NAMED_DATASETS:
        entry = NAMED_DATASETS[name]
        path = _find_file(entry["files"])
        if path is None:
            raise FileNotFoundError(
                f"dataset {name!r} not found under {data_dir()!r} "
                f"(set ${DATA_DIR_ENV}); download from {entry['url']}"
            )
        if entry["format"] == "libsvm":
            ds = parse_libsvm(path, n_features=entry.get("n_features"))
        else:
            label_path = _find_file(entry["label_files"])
            if label_path is None:
                raise FileNotFoundError(f"label file for {name!r} not found")
            ds = load_idx(path, label_path, mapping=entry["mapping"])
        return random_split(ds, test_fraction=0.1, seed=split_seed)
    if os.path.exists(name):
        ds = parse_libsvm(name)
        return random_split(ds, test_fraction=0.1, seed=split_seed)
    raise FileNotFoundError(f"unknown dataset {name!r} and no such file exists")


def make_problem(kind: str, dataset: Dataset):
    """Build the training objective and a test-accuracy hook from a dataset."""
    feats = dataset.train_features
    labels = dataset.train_labels
    if kind == "logistic":
        problem = LogisticRegressionProblem(feats, labels_to_pm1(labels))
        test_labels = labels_to_pm1(dataset.test_labels) if dataset.n_test else None
    elif kind == "nls":
        problem = SigmoidLeastSquaresProblem(feats, labels_to_01(labels))
        test_labels = labels_to_01(dataset.test_labels) if dataset.n_test else None
    elif kind == "nn":
        digits = labels
        if np.min(labels) < 0:  # binary -1/+1 sources become classes {0, 1}
            digits = labels_to_01(labels).astype(int)
        problem = TwoLayerNetProblem(feats, digits, n_classes=int(np.max(digits)) + 1)
        if dataset.n_test:
            test_labels = dataset.test_labels
            if np.min(test_labels) < 0:
                test_labels = labels_to_01(test_labels).astype(int)
        else:
            test_labels = None
    else:
        raise ValueError(f"unknown problem kind {kind!r}")

    if dataset.n_test:
        test_feats = dataset.test_features

        def eval_hook(x):
            return problem.accuracy(x, test_feats, test_labels)
    else:
        eval_hook = None
    return problem, eval_hook


def initial_point(problem, seed: int) -> np.ndarray:
    """Shared random starting point; every method at a seed gets the same x0."""
    rng = np.random.default_rng([seed, 0x5EED])
    if isinstance(problem, TwoLayerNetProblem):
        return problem.init_point(rng)
    return rng.standard_normal(problem.dim) * 0.1


# ---------------------------------------------------------------------------
# experiment driver
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="astr-bench",
        description="Benchmark adaptive-sample-size trust region against SGD/SVRG/TR.",
    )
    p.add_argument("--problem", choices=PROBLEMS, default="logistic")
    p.add_argument("--dataset", default="synth:n=2000,d=20",
                   help="registry name, synth:n=..,d=..[,seed=..], or a LIBSVM file path")
    p.add_argument("--method", default="astr",
                   help="astr | tr | sgd | svrg | grid:sgd | grid:svrg")
    p.add_argument("--budget-egrads", type=float, default=None,
                   help="effective-gradient-evaluation budget (default 50 if no budget given)")
    p.add_argument("--budget-seconds", type=float, default=None)
    p.add_argument("--seed", type=int, nargs="+", default=[1])
    p.add_argument("--out", default="runs", help="output directory for CSV logs")
    p.add_argument("--curvature", choices=["none", "hessian"], default="hessian")
    p.add_argument("--theta", type=float, default=0.5)
    p.add_argument("--omega", type=float, default=2.0)
    p.add_argument("--s0-frac", type=float, default=0.01)
    p.add_argument("--hess-frac", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=1e-14)
    p.add_argument("--sgd-step", type=float, default=0.01)
    p.add_argument("--sgd-batch-frac", type=float, default=0.01)
    p.add_argument("--svrg-step", type=float, default=0.1)
    p.add_argument("--svrg-mu", type=float, default=0.1)
    p.add_argument("--scale", action="store_true",
                   help="max-abs scale feature columns before building the problem")
    p.add_argument("--no-fstar", action="store_true",
                   help="skip the reference F* solve (gap column becomes nan)")
    p.add_argument("--threads", type=int, default=None,
                   help="pin the BLAS thread count for reproducible runs")
    p.add_argument("--jobs", type=int, default=1,
                   help="concurrent grid cells (each cell stays deterministic)")
    p.add_argument("--list", action="store_true",
                   help="list problems, methods and known datasets, then exit")
    return p


def _print_listing() -> None:
    print("problems: " + " ".join(PROBLEMS))
    print("methods:  " + " ".join(METHODS))
    print("datasets: synth:n=<n>,d=<d>[,seed=<s>] | <libsvm file path>")
    for name, entry in NAMED_DATASETS.items():
        print(f"  {name:10s} ({entry['format']}) {entry['url']}")
    print(f"data dir: {data_dir()}  (override with ${DATA_DIR_ENV})")


def _pin_threads(count: int) -> None:
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(count)
    except ImportError:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(count)
        warnings.warn(
            "threadpoolctl not available; thread env vars were set but may not "
            "affect already-initialized BLAS pools",
            RuntimeWarning,
        )


def _astr_config(args, n: int, seed: int) -> AstrConfig:
    mode = CurvatureMode.NONE if args.curvature == "none" else CurvatureMode.SUBSAMPLED_HESSIAN
    return AstrConfig(
        s0=max(1, math.ceil(args.s0_frac * n)),
        theta=args.theta,
        omega=args.omega,
        epsilon=args.eps,
        curvature_mode=mode,
        hessian_fraction=args.hess_frac,
        seed=seed,
    )


def _run_single(method, problem, args, seed, budget, eval_hook):
    x0 = initial_point(problem, seed)
    if method == "astr":
        return run_astr(problem, _astr_config(args, problem.n, seed), budget, x0, eval_hook)
    if method == "tr":
        return run_fullbatch_tr(problem, FullBatchTrConfig(epsilon=args.eps, seed=seed),
                                budget, x0, eval_hook)
    if method == "sgd":
        return run_sgd(problem, SgdConfig(args.sgd_step, args.sgd_batch_frac, seed=seed),
                       budget, x0, eval_hook)
    if method == "svrg":
        return run_svrg(problem, SvrgConfig(args.svrg_step, args.svrg_mu, seed=seed),
                        budget, x0, eval_hook)
    raise ValueError(f"unknown method {method!r}")


def _grid_cells(method: str, n: int):
    if method == "grid:sgd":
        return [("sgd", {"step_size": t, "batch_fraction": z})
                for t in STEP_SIZE_GRID for z in sgd_batch_fraction_grid(n)]
    if method == "grid:svrg":
        return [("svrg", {"step_size": t, "inner_count_fraction": mu})
                for t in STEP_SIZE_GRID for mu in SVRG_INNER_FRACTION_GRID]
    raise ValueError(f"unknown grid {method!r}")


def _run_grid_cell(cell_args):
    base, params, problem, budget, seed, x0 = cell_args
    if base == "sgd":
        log = run_sgd(problem, SgdConfig(seed=seed, **params), budget, x0)
    else:
        log = run_svrg(problem, SvrgConfig(seed=seed, **params), budget, x0)
    return params, log


def _cell_tag(params: dict) -> str:
    return "_".join(f"{k[0]}{v:g}" for k, v in sorted(params.items()))


def run_experiment(argv) -> int:
    """Execute one CLI invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.list:
        _print_listing()
        return 0

    if args.threads is not None:
        _pin_threads(args.threads)

    if args.budget_egrads is None and args.budget_seconds is None:
        args.budget_egrads = 50.0
    budget = CostBudget(
        max_egrads=args.budget_egrads if args.budget_egrads is not None else math.inf,
        max_seconds=args.budget_seconds if args.budget_seconds is not None else math.inf,
    )

    if args.method not in METHODS:
        print(f"error: unknown method {args.method!r}", file=sys.stderr)
        return 2
    try:
        dataset = load_dataset(args.dataset)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.scale:
        dataset = scale_features_maxabs(dataset)
    problem, eval_hook = make_problem(args.problem, dataset)

    os.makedirs(args.out, exist_ok=True)
    f_star = None if args.no_fstar else compute_f_star(problem)

    manifest = {
        "version": __version__,
        "argv": list(argv) if argv is not None else sys.argv[1:],
        "problem": args.problem,
        "dataset": args.dataset,
        "dataset_fingerprint": problem.fingerprint(),
        "n": problem.n,
        "dim": problem.dim,
        "method": args.method,
        "seeds": args.seed,
        "budget_egrads": args.budget_egrads,
        "budget_seconds": args.budget_seconds,
        "f_star": f_star,
        "runs": [],
    }

    for seed in args.seed:
        if args.method.startswith("grid:"):
            cells = _grid_cells(args.method, problem.n)
            x0 = initial_point(problem, seed)
            work = [(base, params, problem, budget, seed, x0) for base, params in cells]
            if args.jobs > 1:
                with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                    results = list(pool.map(_run_grid_cell, work))
            else:
                results = [_run_grid_cell(w) for w in work]
            summary_rows = []
            base = args.method.split(":", 1)[1]
            for params, log in results:
                name = f"{base}_{_cell_tag(params)}_seed{seed}.csv"
                log.to_csv(os.path.join(args.out, name), f_star=f_star)
                final_f = log.final.f
                summary_rows.append((params, final_f, log.final.egrads, log.status, name))
                manifest["runs"].append({"file": name, "status": log.status,
                                         "params": params, "final_f": final_f})
            summary_rows.sort(key=lambda row: (math.isnan(row[1]), row[1]))
            summary_path = os.path.join(args.out, f"grid_{base}_seed{seed}_summary.csv")
            with open(summary_path, "w") as fh:
                keys = sorted(summary_rows[0][0])
                fh.write(",".join(keys) + ",final_f,final_gap,egrads,status,file\n")
                for params, final_f, egrads, status, name in summary_rows:
                    gap = final_f - f_star if f_star is not None else float("nan")
                    fh.write(",".join(f"{params[k]:.17g}" for k in keys)
                             + f",{final_f:.17g},{gap:.17g},{egrads:.17g},{status},{name}\n")
        else:
            log = _run_single(args.method, problem, args, seed, budget, eval_hook)
            name = f"{args.method}_seed{seed}.csv"
            log.to_csv(os.path.join(args.out, name), f_star=f_star)
            manifest["runs"].append({"file": name, "status": log.status,
                                     "final_f": log.final.f,
                                     "final_egrads": log.final.egrads})

    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    return 0


def main(argv=None) -> int:
    return run_experiment(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
