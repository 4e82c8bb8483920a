"""Gram-matrix benchmarking and the uniform-convergence bound calculator.

gram_exact evaluates the closed-form kernel pairwise (asymmetric in
general); gram_approx applies the feature-block estimate via three matrix
products, never per-entry loops.  relative_error is the Frobenius ratio
||K - K~||_F / ||K||_F.

bound_min_features computes the smallest feature count M that guarantees
sup-error <= eps with probability 1 - delta over a difference set of
diameter l:

    M >= 4 (d+2) ||mu||^2 / eps^2 * (log(beta_d / delta)
         + 2d/(d+2) * log(alpha_mu l / eps))

with beta_d = ((d/2)^(-d/(d+2)) + (d/2)^(2/(d+2))) * 2^((6d+2)/(d+2)) and
alpha_mu^2 = (xi1^2 + xi2^2 + 2 xi3^2) * sigma_mu^2, where sigma_mu^2 sums
the mean squared frequency norms of the three sampled pieces (estimated
empirically from a bank -- it only feeds this calculator).
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass

import numpy as np

from .features import FeatureMap, _pair_gram
from .masses import MassSet, choose_subset, masses_subset_ls
from .sampler import FrequencyBank, sample_bank
from .spectral import Family, SpectralKernel, kernel_eval, _guard_exponent

__all__ = [
    "gram_exact",
    "gram_approx",
    "relative_error",
    "beta_d",
    "BoundInputs",
    "bound_inputs",
    "sigma_mu_sq",
    "alpha_mu",
    "bound_min_features",
    "sup_error_grid",
    "approx_error_sweep",
    "write_sweep_csv",
]


def _check_matrix(x, dim, name):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"{name} must have shape (n, {dim})")
    return arr


def _sq_dists(rows, cols):
    sq = (
        np.sum(rows * rows, axis=1)[:, None]
        + np.sum(cols * cols, axis=1)[None, :]
        - 2.0 * rows @ cols.T
    )
    return np.maximum(sq, 0.0)


def gram_exact(kernel: SpectralKernel, rows, cols) -> np.ndarray:
    """Exact Gram K[i, j] = k(rows_i - cols_j); asymmetric in general."""
    rows = _check_matrix(rows, kernel.dim, "rows")
    cols = _check_matrix(cols, kernel.dim, "cols")
    s2 = kernel.sigma**2
    if kernel.family == Family.SHIFT_GAUSSIAN:
        return np.exp(-_sq_dists(rows + kernel.shift, cols) / (2.0 * s2))
    if kernel.family == Family.GAUSSIAN:
        return np.exp(-_sq_dists(rows, cols) / (2.0 * s2))
    expo = -_sq_dists(rows, cols) / (2.0 * s2)
    skew = (rows @ kernel.skew)[:, None] - (cols @ kernel.skew)[None, :]
    if kernel.family == Family.COSH_GAUSSIAN:
        return np.exp(_guard_exponent(expo + skew))
    return np.exp(expo) + 0.5 * (
        np.exp(_guard_exponent(expo + skew)) - np.exp(expo - skew)
    )


def gram_approx(fmap: FeatureMap, rows, cols) -> np.ndarray:
    """Feature-block Gram estimate; entry (i, j) equals approx_kernel(x_i, y_j)."""
    d = fmap.bank.dim
    return _pair_gram(fmap, _check_matrix(rows, d, "rows"), _check_matrix(cols, d, "cols"))


def relative_error(k_exact, k_approx) -> float:
    """Frobenius-norm relative approximation error."""
    k_exact = np.asarray(k_exact, dtype=float)
    k_approx = np.asarray(k_approx, dtype=float)
    if k_exact.shape != k_approx.shape:
        raise ValueError(
            f"shape mismatch: {k_exact.shape} vs {k_approx.shape}"
        )
    norm = np.linalg.norm(k_exact)
    if norm == 0:
        raise ValueError("reference matrix has zero Frobenius norm")
    return float(np.linalg.norm(k_exact - k_approx) / norm)


def beta_d(d: int) -> float:
    """Covering-number constant of the min-features bound; -> 64 as d grows."""
    half = d / 2.0
    return (half ** (-d / (d + 2.0)) + half ** (2.0 / (d + 2.0))) * 2.0 ** (
        (6.0 * d + 2.0) / (d + 2.0)
    )


@dataclass(frozen=True)
class BoundInputs:
    """Everything the min-features bound needs."""

    d: int
    l: float
    eps: float
    delta: float
    total_mass: float
    alpha_mu: float

    @property
    def beta(self) -> float:
        return beta_d(self.d)


def sigma_mu_sq(bank: FrequencyBank) -> float:
    """Empirical E||omega||^2 + E||zeta||^2 + 2 E||nu||^2; empty banks add 0."""

    def mean_sq(mat):
        if mat.shape[0] == 0:
            return 0.0
        return float(np.mean(np.sum(mat * mat, axis=1)))

    return mean_sq(bank.omega) + mean_sq(bank.zeta) + 2.0 * mean_sq(bank.nu)


def alpha_mu(masses: MassSet, bank: FrequencyBank) -> float:
    weights = masses.xi1**2 + masses.xi2**2 + 2.0 * masses.xi3**2
    return math.sqrt(weights * sigma_mu_sq(bank))


def bound_inputs(
    kernel: SpectralKernel,
    masses: MassSet,
    l: float,
    eps: float,
    delta: float,
    bank: FrequencyBank | None = None,
    probe_m: int = 10_000,
    probe_seed: int = 0,
) -> BoundInputs:
    """Assemble BoundInputs, estimating sigma_mu^2 from a 10^4-sample bank."""
    if bank is None:
        bank = sample_bank(kernel, probe_m, probe_seed)
    return BoundInputs(
        d=kernel.dim,
        l=l,
        eps=eps,
        delta=delta,
        total_mass=masses.total_mass,
        alpha_mu=alpha_mu(masses, bank),
    )


def bound_min_features(b: BoundInputs) -> int:
    """Smallest M satisfying the bound; at least 1."""
    if not 0.0 < b.delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {b.delta}")
    if min(b.eps, b.l, b.total_mass, b.alpha_mu) <= 0:
        raise ValueError("eps, l, total_mass and alpha_mu must be positive")
    rhs = (4.0 * (b.d + 2) * b.total_mass**2 / b.eps**2) * (
        math.log(b.beta / b.delta)
        + (2.0 * b.d / (b.d + 2)) * math.log(b.alpha_mu * b.l / b.eps)
    )
    return max(1, math.ceil(rhs))


def sup_error_grid(kernel: SpectralKernel, fmap: FeatureMap, grid) -> float:
    """max over the grid of |s(delta) - k(delta)|, s taken on pairs (delta, 0)."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("grid must be non-empty")
    if grid.shape[1] != kernel.dim:
        raise ValueError(f"grid must have {kernel.dim} columns")
    s_vals = _pair_gram(fmap, grid, np.zeros((1, kernel.dim)))[:, 0]
    k_vals = np.asarray(kernel_eval(kernel, grid))
    return float(np.max(np.abs(s_vals - k_vals)))


def approx_error_sweep(
    kernel: SpectralKernel,
    data: np.ndarray,
    m_values,
    seeds,
    n_s: int = 50,
    label: str | None = None,
) -> list[dict]:
    """Gram approximation errors over a feature-count sweep.

    For each (m, trial seed): draw a fresh bank, estimate masses on a fixed
    spread subset of n_s points from `data`, and compare gram_approx to
    gram_exact on all of `data`.  Returns one row dict per (m, trial) with
    keys kernel, m, trial, rel_error, sup_error, wall_time_ms; sup_error is
    the largest absolute entry error, i.e. the sup over the sampled
    difference set.
    """
    data = _check_matrix(data, kernel.dim, "data")
    label = label or kernel.family.value
    k_exact = gram_exact(kernel, data, data)
    subset = data[choose_subset(data, min(n_s, data.shape[0]))]
    rows = []
    for m in m_values:
        for trial, seed in enumerate(seeds):
            t0 = time.perf_counter()
            bank = sample_bank(kernel, int(m), int(seed))
            mass = masses_subset_ls(kernel, bank, subset)
            k_approx = gram_approx(FeatureMap(bank, mass), data, data)
            wall_ms = (time.perf_counter() - t0) * 1e3
            rows.append(
                {
                    "kernel": label,
                    "m": int(m),
                    "trial": trial,
                    "rel_error": relative_error(k_exact, k_approx),
                    "sup_error": float(np.max(np.abs(k_exact - k_approx))),
                    "wall_time_ms": wall_ms,
                }
            )
    return rows


def write_sweep_csv(rows: list[dict], path: str) -> None:
    fields = ["kernel", "m", "trial", "rel_error", "sup_error", "wall_time_ms"]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in fields})
