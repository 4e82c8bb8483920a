"""Explicit random feature maps and the kernel approximation they induce.

For a frequency matrix W with M rows, the paired maps are

    phi(W, x) = [cos(W x) ; sin(W x)] / sqrt(M)        (2M entries)
    psi(W, y) = [-sin(W y) ; cos(W y)] / sqrt(M)

so phi(W, x) . phi(W, y) averages cos(w.(x - y)) and phi(W, x) . psi(W, y)
averages sin(w.(x - y)).  With total masses (xi1, xi2, xi3) of the three
sampled spectral pieces, the kernel estimate is

    s(x, y) = xi1 phi_omega(x).phi_omega(y)
            - xi2 phi_zeta(x).phi_zeta(y)
            - 2 xi3 phi_nu(x).psi_nu(y).

The concatenated classification features carry sqrt-mass weights per block;
the bilinear form recovering s from them needs a sign flip on both the zeta
and nu blocks, i.e. s(x, y) = left(x)^T diag(I, -I, -I) right(y).  A linear
classifier trained on the left features absorbs any fixed block sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

from .sampler import FrequencyBank
from .spectral import _as_batch

if TYPE_CHECKING:  # pragma: no cover
    from .masses import MassSet

__all__ = [
    "Side",
    "FeatureMap",
    "phi_block",
    "psi_block",
    "approx_kernel",
    "transform",
    "symmetrize",
    "feature_layout",
]


class Side(Enum):
    LEFT = "left"
    RIGHT = "right"


def phi_block(freqs: np.ndarray, x) -> np.ndarray:
    """[all cosines | all sines] block, rows normalized to unit length.

    freqs: (M, d) frequency matrix; x: (d,) or (n, d).  Returns (2M,) or
    (n, 2M).
    """
    pts, vec = _as_batch(x, freqs.shape[1], "x")
    proj = pts @ freqs.T
    out = np.concatenate([np.cos(proj), np.sin(proj)], axis=1)
    out /= math.sqrt(freqs.shape[0])
    return out[0] if vec else out


def psi_block(freqs: np.ndarray, y) -> np.ndarray:
    """[-sines | cosines] block, the quarter-phase partner of phi_block."""
    pts, vec = _as_batch(y, freqs.shape[1], "y")
    proj = pts @ freqs.T
    out = np.concatenate([-np.sin(proj), np.cos(proj)], axis=1)
    out /= math.sqrt(freqs.shape[0])
    return out[0] if vec else out


@dataclass
class FeatureMap:
    """A frequency bank paired with the total masses that weight it."""

    bank: FrequencyBank
    masses: "MassSet"

    def __post_init__(self):
        xi = self.masses
        if min(xi.xi1, xi.xi2, xi.xi3) < 0 or not all(
            map(math.isfinite, (xi.xi1, xi.xi2, xi.xi3))
        ):
            raise ValueError("masses must be finite and nonnegative")
        if xi.xi2 > 0 and self.bank.zeta.shape[0] == 0:
            raise ValueError("xi2 > 0 but the zeta bank is empty")
        if xi.xi3 > 0 and self.bank.nu.shape[0] == 0:
            raise ValueError("xi3 > 0 but the nu bank is empty")


def _pair_gram(fmap: FeatureMap, rows, cols):
    """The three-block estimate s(x_i, y_j) as an (n_rows, n_cols) matrix."""
    bank, xi = fmap.bank, fmap.masses
    out = xi.xi1 * (phi_block(bank.omega, rows) @ phi_block(bank.omega, cols).T)
    if bank.zeta.shape[0]:
        out -= xi.xi2 * (phi_block(bank.zeta, rows) @ phi_block(bank.zeta, cols).T)
    if bank.nu.shape[0]:
        out -= 2.0 * xi.xi3 * (phi_block(bank.nu, rows) @ psi_block(bank.nu, cols).T)
    return out


def approx_kernel(fmap: FeatureMap, x, y) -> float:
    """Estimate k(x - y) from the feature blocks; degenerate banks add 0."""
    d = fmap.bank.dim
    xr, xvec = _as_batch(x, d, "x")
    yr, yvec = _as_batch(y, d, "y")
    if not (xvec and yvec):
        raise ValueError("approx_kernel takes single points; use gram_approx for batches")
    return float(_pair_gram(fmap, xr, yr)[0, 0])


def transform(fmap: FeatureMap, data, side: Side = Side.LEFT) -> np.ndarray:
    """Concatenated sqrt-mass-weighted feature blocks for a data matrix.

    Row i is [sqrt(xi1) phi_omega(x_i), sqrt(xi2) phi_zeta(x_i),
    sqrt(2 xi3) phi_nu(x_i)]; side=RIGHT swaps the last block to psi_nu.
    Blocks whose bank is empty are omitted, so the width is 2M times the
    number of live pieces.  An empty data matrix gives a (0, width) result.
    """
    side = Side(side)
    bank, xi = fmap.bank, fmap.masses
    pts, vec = _as_batch(data, bank.dim, "data")
    if vec:
        raise ValueError("transform takes an (n, d) matrix")
    blocks = [math.sqrt(xi.xi1) * phi_block(bank.omega, pts)]
    if bank.zeta.shape[0]:
        blocks.append(math.sqrt(xi.xi2) * phi_block(bank.zeta, pts))
    if bank.nu.shape[0]:
        last = phi_block if side == Side.LEFT else psi_block
        blocks.append(math.sqrt(2.0 * xi.xi3) * last(bank.nu, pts))
    return np.concatenate(blocks, axis=1)


def symmetrize(fmap: FeatureMap) -> FeatureMap:
    """Drop the sine (nu) block: features of the kernel's even part.

    The skew-symmetric half of the Gram estimate lives entirely in the nu
    block, so removing it approximates (K + K^T)/2 -- the baseline for
    judging what the asymmetric part contributes.
    """
    from dataclasses import replace

    bank = fmap.bank
    stripped = FrequencyBank(
        omega=bank.omega,
        zeta=bank.zeta,
        nu=np.zeros((0, bank.dim)),
        seed=bank.seed,
        m=bank.m,
    )
    return FeatureMap(stripped, replace(fmap.masses, xi3=0.0))


def feature_layout(fmap: FeatureMap, side: Side = Side.LEFT) -> dict:
    """JSON-ready description of the transform output's block structure."""
    bank, xi = fmap.bank, fmap.masses
    blocks = [{"piece": "real_pos", "weight": math.sqrt(xi.xi1), "width": 2 * bank.m}]
    if bank.zeta.shape[0]:
        blocks.append({"piece": "real_neg", "weight": math.sqrt(xi.xi2),
                       "width": 2 * bank.m})
    if bank.nu.shape[0]:
        blocks.append({"piece": "imag", "weight": math.sqrt(2.0 * xi.xi3),
                       "width": 2 * bank.m})
    return {
        "m": bank.m,
        "dim": bank.dim,
        "side": Side(side).value,
        "seed": bank.seed,
        "blocks": blocks,
    }
