"""Command-line experiment runner.

Three subcommands, all driven by a JSON config plus a few flags:

* masses    -- per-trial subset-LS total masses over a feature-count sweep,
               with a quadrature reference when the dimension allows it.
* approx    -- Gram approximation error sweep, emitted as CSV.
* classify  -- normalize, sample, estimate masses, transform, cross-validate
               and test a linear classifier; reports asymmetric features
               against symmetrized, RBF and raw-linear baselines.

Every command is reproducible from (config, seed list) alone: banks are
drawn per trial from the trial seed, subsets and synthetic data from the
data seed, and rows are ordered by (m, trial) before emission.  Trials are
independent; --workers runs them in a thread pool with the same output
ordering.

Exit code 0 on success; on failure a one-line JSON error object goes to
stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import classifier, dataio, evalbench, features, masses, sampler, spectral

_C_GRID = [2.0**j for j in range(-5, 6)]
_TRAIN_CAP = 10_000


def _standard_kernels(dim: int, sigma: float = 2.0) -> list[spectral.SpectralKernel]:
    """The three asymmetric families at the conventional desk parameters:
    shift 2/d, skew pi/(2 d), both along the all-ones direction."""
    ones = np.ones(dim)
    return [
        spectral.SpectralKernel(spectral.Family.SHIFT_GAUSSIAN, dim, sigma,
                                shift=2.0 / dim * ones),
        spectral.SpectralKernel(spectral.Family.SINH_GAUSSIAN, dim, sigma,
                                skew=0.5 * math.pi / dim * ones),
        spectral.SpectralKernel(spectral.Family.COSH_GAUSSIAN, dim, sigma,
                                skew=0.5 * math.pi / dim * ones),
    ]


class ExperimentConfig:
    """Validated view of the config JSON; see README for the schema."""

    def __init__(self, obj: dict, seed_flag=None, trials_flag=None):
        if not isinstance(obj, dict):
            raise ValueError("config must be a JSON object")
        self.raw = obj
        self.trials = int(trials_flag or obj.get("trials", 10))
        seeds = obj.get("seeds")
        if seeds is not None:
            seeds = [int(s) for s in seeds]
            if trials_flag is None and "trials" not in obj:
                self.trials = len(seeds)
            if len(seeds) != self.trials:
                raise ValueError(
                    f"trials={self.trials} but {len(seeds)} seeds were given"
                )
            self.seeds = seeds
        else:
            base = int(seed_flag if seed_flag is not None else obj.get("seed", 0))
            self.seeds = [base + t for t in range(self.trials)]
        self.data_seed = int(obj.get("data_seed", 0))
        self.n_points = int(obj.get("n_points", 1000))
        self.n_s = int(obj.get("n_s", 50))
        self.m = obj.get("m")
        self.m_sweep = obj.get("m_sweep")
        self.subset_strategy = obj.get("subset_strategy", "spread")
        self.c_grid = [float(c) for c in obj.get("c_grid", _C_GRID)]
        self.rbf_sigma = float(obj.get("rbf_sigma", 2.0))
        self.train = obj.get("train")
        self.test = obj.get("test")

    def kernels(self, dim: int | None = None) -> list[spectral.SpectralKernel]:
        spec = self.raw.get("kernels", self.raw.get("kernel"))
        if spec is None:
            raise ValueError("config needs 'kernel', 'kernels', or 'kernels': 'standard'")
        if spec == "standard":
            dim = dim or self.raw.get("dim")
            if dim is None:
                raise ValueError("'kernels': 'standard' needs 'dim' or data")
            return _standard_kernels(int(dim), float(self.raw.get("sigma", 2.0)))
        if isinstance(spec, dict):
            spec = [spec]
        return [spectral.kernel_from_config(k) for k in spec]

    def sweep(self, dim: int) -> list[int]:
        if self.m_sweep is not None:
            return [int(m) for m in self.m_sweep]
        if self.m is not None:
            return [int(self.m)]
        return [dim * 2**j for j in range(1, 11)]


def _label(kernel: spectral.SpectralKernel) -> str:
    return kernel.family.value


def _resolve(path, data_dir):
    p = Path(path)
    return p if p.is_absolute() or data_dir is None else Path(data_dir) / p


def _synthetic_points(n, dim, seed):
    # matches the normalized-data convention: uniform on the unit cube
    return np.random.default_rng(seed).random((n, dim))


def _run_jobs(jobs, fn, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


def cmd_masses(config: ExperimentConfig, data_dir=None, workers=1) -> dict:
    kernels = config.kernels()
    dim = kernels[0].dim
    if any(k.dim != dim for k in kernels):
        raise ValueError("all kernels in one run must share a dimension")
    if config.train:
        data = dataio.load_libsvm(_resolve(config.train, data_dir)).X
        if data.shape[1] != dim:
            raise ValueError(f"data has d={data.shape[1]} but kernels have d={dim}")
    else:
        data = np.random.default_rng(config.data_seed).standard_normal(
            (config.n_points, dim)
        )
    n_s = int(config.raw.get("n_s", 10))
    subset = data[masses.choose_subset(data, n_s, config.data_seed,
                                       config.subset_strategy)]
    report = {"command": "masses", "n_s": n_s, "n_points": data.shape[0],
              "seeds": config.seeds, "rows": [], "summary": [], "quadrature": {}}
    for kernel in kernels:
        label = _label(kernel)
        try:
            quad = masses.masses_quadrature(kernel)
            report["quadrature"][label] = quad.to_json()
        except masses.UnsupportedDimensionError:
            report["quadrature"][label] = None
        for m in config.sweep(dim):
            def one_trial(item):
                trial, seed = item
                bank = sampler.sample_bank(kernel, m, seed)
                est = masses.masses_subset_ls(kernel, bank, subset)
                return {"kernel": label, "m": m, "trial": trial,
                        "xi1": est.xi1, "xi2": est.xi2, "xi3": est.xi3}
            rows = _run_jobs(list(enumerate(config.seeds)), one_trial, workers)
            rows.sort(key=lambda r: r["trial"])
            report["rows"].extend(rows)
            arr = np.array([[r["xi1"], r["xi2"], r["xi3"]] for r in rows])
            report["summary"].append({
                "kernel": label, "m": m,
                "mean": dict(zip(("xi1", "xi2", "xi3"), map(float, arr.mean(0)))),
                "std": dict(zip(("xi1", "xi2", "xi3"), map(float, arr.std(0)))),
            })
    return report


def cmd_approx(config: ExperimentConfig, data_dir=None, workers=1) -> list[dict]:
    kernels = config.kernels()
    dim = kernels[0].dim
    if any(k.dim != dim for k in kernels):
        raise ValueError("all kernels in one run must share a dimension")
    if config.train:
        data = dataio.load_libsvm(_resolve(config.train, data_dir)).X
        if data.shape[1] != dim:
            raise ValueError(f"data has d={data.shape[1]} but kernels have d={dim}")
        if data.shape[0] > config.n_points:
            pick = np.random.default_rng(config.data_seed).choice(
                data.shape[0], size=config.n_points, replace=False
            )
            data = data[pick]
    else:
        data = _synthetic_points(config.n_points, dim, config.data_seed)
    rows = []
    for kernel in kernels:
        rows.extend(
            evalbench.approx_error_sweep(
                kernel, data, config.sweep(dim), config.seeds,
                n_s=config.n_s, label=_label(kernel),
            )
        )
    rows.sort(key=lambda r: (r["kernel"], r["m"], r["trial"]))
    return rows


def _accuracy_block(per_seed, extra=None):
    arr = np.asarray(per_seed, dtype=float)
    out = {"mean": float(arr.mean()), "std": float(arr.std()),
           "per_seed": list(map(float, arr))}
    if extra:
        out.update(extra)
    return out


def _cv_train_eval(train_x, train_y, test_x, test_y, c_grid, seed):
    best_c, _ = classifier.cv_select(train_x, train_y, c_grid, seed)
    model = classifier.fit(train_x, train_y, best_c)
    return classifier.evaluate(model, test_x, test_y), best_c


def cmd_classify(config: ExperimentConfig, data_dir=None, workers=1,
                 full=False) -> dict:
    if not config.train or not config.test:
        raise ValueError("classify needs 'train' and 'test' files in the config")
    train, test = dataio.load_pair(
        _resolve(config.train, data_dir), _resolve(config.test, data_dir)
    )
    if not full and train.n > _TRAIN_CAP:
        pick = np.random.default_rng(config.data_seed).choice(
            train.n, size=_TRAIN_CAP, replace=False
        )
        train = dataio.Dataset(train.X[pick], train.y[pick], train.name)
    train, test = dataio.normalize_minmax(train, test)
    kernels = config.kernels(dim=train.dim)
    m = int(config.m) if config.m is not None else 2 * train.dim
    subset = train.X[masses.choose_subset(train.X, min(config.n_s, train.n),
                                          config.data_seed, config.subset_strategy)]

    report = {
        "command": "classify",
        "dataset": {"train": str(config.train), "test": str(config.test),
                    "n_train": train.n, "n_test": test.n, "dim": train.dim},
        "m": m, "n_s": config.n_s, "seeds": config.seeds,
        "kernels": {}, "baselines": {},
    }

    def kernel_runs(kernel):
        label = _label(kernel)
        asym_acc, sym_acc, asym_c, sym_c, sample_ms = [], [], [], [], []
        for seed in config.seeds:
            t0 = time.perf_counter()
            bank = sampler.sample_bank(kernel, m, seed)
            sample_ms.append((time.perf_counter() - t0) * 1e3)
            mass = masses.masses_subset_ls(kernel, bank, subset)
            fmap = features.FeatureMap(bank, mass)
            for which, acc_list, c_list in (
                (fmap, asym_acc, asym_c),
                (features.symmetrize(fmap), sym_acc, sym_c),
            ):
                ftr = features.transform(which, train.X)
                fte = features.transform(which, test.X)
                acc, best_c = _cv_train_eval(ftr, train.y, fte, test.y,
                                             config.c_grid, seed)
                acc_list.append(acc)
                c_list.append(best_c)
        return label, {
            "asymmetric": _accuracy_block(asym_acc, {"best_c": asym_c}),
            "symmetrized": _accuracy_block(sym_acc, {"best_c": sym_c}),
            "sampling_time_ms": _accuracy_block(sample_ms),
        }

    for label, block in _run_jobs(kernels, kernel_runs, workers):
        report["kernels"][label] = block

    # seed-independent linear baseline (deterministic), seed-dependent RBF
    rbf_kernel = spectral.SpectralKernel(
        spectral.Family.GAUSSIAN, train.dim, config.rbf_sigma
    )
    rbf_acc, rbf_c = [], []
    for seed in config.seeds:
        bank = sampler.sample_bank(rbf_kernel, m, seed)
        fmap = features.FeatureMap(bank, masses.masses_analytic(rbf_kernel))
        acc, best_c = _cv_train_eval(
            features.transform(fmap, train.X), train.y,
            features.transform(fmap, test.X), test.y, config.c_grid, seed,
        )
        rbf_acc.append(acc)
        rbf_c.append(best_c)
    report["baselines"]["rbf"] = _accuracy_block(rbf_acc, {"best_c": rbf_c})

    lin_acc, lin_c = [], []
    for seed in config.seeds:
        acc, best_c = _cv_train_eval(train.X, train.y, test.X, test.y,
                                     config.c_grid, seed)
        lin_acc.append(acc)
        lin_c.append(best_c)
    report["baselines"]["linear"] = _accuracy_block(lin_acc, {"best_c": lin_c})
    return report


def _emit(text: str, out_path):
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="asymrff",
        description="Asymmetric-kernel random Fourier feature experiments",
    )
    parser.add_argument("command", choices=["masses", "approx", "classify"])
    parser.add_argument("--config", required=True, help="path to the JSON config")
    parser.add_argument("--data-dir", default=None,
                        help="directory for relative dataset paths")
    parser.add_argument("--out", default=None, help="output file (default stdout)")
    parser.add_argument("--seed", type=int, default=None,
                        help="base seed when the config lists none")
    parser.add_argument("--trials", type=int, default=None,
                        help="override the config trial count")
    parser.add_argument("--full", action="store_true",
                        help="disable the training-row cap for classify")
    parser.add_argument("--workers", type=int, default=1,
                        help="thread pool size for independent trials")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            config = ExperimentConfig(json.load(fh), args.seed, args.trials)
        if args.command == "masses":
            report = cmd_masses(config, args.data_dir, args.workers)
            _emit(json.dumps(report, indent=2) + "\n", args.out)
        elif args.command == "approx":
            rows = cmd_approx(config, args.data_dir, args.workers)
            import io

            buf = io.StringIO()
            fields = ["kernel", "m", "trial", "rel_error", "sup_error",
                      "wall_time_ms"]
            import csv as _csv

            writer = _csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
            _emit(buf.getvalue(), args.out)
        else:
            report = cmd_classify(config, args.data_dir, args.workers, args.full)
            _emit(json.dumps(report, indent=2) + "\n", args.out)
    except Exception as exc:  # structured failure for scripting
        sys.stderr.write(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n"
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
