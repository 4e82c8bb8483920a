"""Frequency sampling from the nonnegative spectral pieces.

Draws from each unnormalized piece f by acceptance-rejection against the
shared Gaussian envelope g = N(0, sigma^-2 I): every family's density is
g times a bounded modulation, so sup f / g is known analytically.

Total masses are never needed here -- proposals are accepted with
probability f / (c g), which is exactly the clipped modulation -- so banks
can be drawn before any mass estimation happens.

RNG contract: one Philox (counter-based) stream per (part, seed), keyed by
``SeedSequence(entropy=seed, spawn_key=(part.value,))`` and consumed in
fixed-size chunks of proposals.  Identical (part, m, seed) triples therefore
reproduce bit-identical matrices in any process.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .spectral import Family, Part, PartDensity, SpectralKernel

__all__ = [
    "DegenerateMeasureError",
    "EnvelopeFailureError",
    "FrequencyBank",
    "is_degenerate",
    "acceptance_ratio",
    "envelope_constant",
    "sample_part",
    "sample_bank",
    "save_bank",
    "load_bank",
]

# proposals are drawn (and the RNG stream consumed) in blocks of this size
_CHUNK = 1 << 16
# probe threshold: below this acceptance rate after the first chunk the
# envelope constant cannot be right for the configured kernel
_MIN_RATE = 1e-4
# hard cap on proposals per accepted sample before giving up
_MAX_PROPOSALS_PER_SAMPLE = 10**6


class DegenerateMeasureError(ValueError):
    """Raised when asked to sample a piece that is identically zero."""


class EnvelopeFailureError(RuntimeError):
    """Raised when the rejection loop's acceptance rate collapses."""


@dataclass
class FrequencyBank:
    """Sampled frequency matrices for the three pieces the estimator uses.

    omega: (m, d) draws from the normalized positive-real piece.
    zeta:  (m, d) draws from the negative-real piece, or (0, d) when that
           piece is identically zero.
    nu:    (m, d) draws from the positive-imaginary piece, or (0, d).
    """

    omega: np.ndarray
    zeta: np.ndarray
    nu: np.ndarray
    seed: int
    m: int

    @property
    def dim(self) -> int:
        return self.omega.shape[1]


def is_degenerate(part: PartDensity) -> bool:
    """True iff this piece is identically zero for its family (analytic)."""
    kernel = part.kernel
    which = part.part
    if kernel.family == Family.GAUSSIAN:
        return which != Part.REAL_POS
    if kernel.family == Family.SHIFT_GAUSSIAN:
        if not np.any(kernel.shift):
            return which != Part.REAL_POS
        return False
    # sinh / cosh
    if not np.any(kernel.skew):
        return which != Part.REAL_POS
    if kernel.family == Family.SINH_GAUSSIAN:
        # real part is the bare envelope, so it never goes negative
        return which == Part.REAL_NEG
    return False


def acceptance_ratio(part: PartDensity, w: np.ndarray) -> np.ndarray:
    """f(w) / (c g(w)) for proposals w of shape (n, d); values in [0, 1].

    The Gaussian envelope and the skew prefactor cancel between f and c*g,
    leaving only the clipped trigonometric modulation.
    """
    kernel = part.kernel
    which = part.part
    if is_degenerate(part):
        return np.zeros(w.shape[0])
    if kernel.family == Family.GAUSSIAN:
        return np.ones(w.shape[0])
    if kernel.family == Family.SHIFT_GAUSSIAN:
        phase = w @ kernel.shift
        mod = {
            Part.REAL_POS: np.cos(phase),
            Part.REAL_NEG: -np.cos(phase),
            Part.IMAG_POS: np.sin(phase),
            Part.IMAG_NEG: -np.sin(phase),
        }[which]
        return np.maximum(mod, 0.0)
    if kernel.family == Family.SINH_GAUSSIAN and which == Part.REAL_POS:
        return np.ones(w.shape[0])
    phase = kernel.sigma**2 * (w @ kernel.skew)
    mod = {
        Part.REAL_POS: np.cos(phase),
        Part.REAL_NEG: -np.cos(phase),
        Part.IMAG_POS: -np.sin(phase),
        Part.IMAG_NEG: np.sin(phase),
    }[which]
    return np.maximum(mod, 0.0)


def envelope_constant(part: PartDensity) -> float:
    """The analytic c with sup f/g <= c for the Gaussian proposal g.

    1 for the gaussian and shift families (and the sinh real piece);
    exp(sigma^2 ||skew||^2 / 2) for the skewed pieces.
    """
    kernel = part.kernel
    if kernel.family in (Family.GAUSSIAN, Family.SHIFT_GAUSSIAN):
        return 1.0
    if kernel.family == Family.SINH_GAUSSIAN and part.part == Part.REAL_POS:
        return 1.0
    gain = kernel.log_skew_gain
    if gain > 709.0:
        raise OverflowError("envelope constant exceeds double range")
    return float(np.exp(gain))


def _stream(seed: int, part: Part) -> np.random.Generator:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(part.value,))
    return np.random.Generator(np.random.Philox(ss))


def sample_part(part: PartDensity, m: int, seed: int) -> np.ndarray:
    """Draw m frequencies distributed as this piece over its total mass.

    Returns an (m, d) matrix.  Deterministic given (part, m, seed).  Raises
    DegenerateMeasureError for identically-zero pieces and
    EnvelopeFailureError if the acceptance rate is hopeless (bad envelope
    constant or a skew so small the piece is numerically negligible).
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if is_degenerate(part):
        raise DegenerateMeasureError(
            f"{part.part.name} is identically zero for this "
            f"{part.kernel.family.value} kernel"
        )
    kernel = part.kernel
    rng = _stream(seed, part.part)
    accepted = []
    n_acc = 0
    n_prop = 0
    cap = m * _MAX_PROPOSALS_PER_SAMPLE
    while n_acc < m:
        w = rng.standard_normal((_CHUNK, kernel.dim)) / kernel.sigma
        u = rng.random(_CHUNK)
        keep = u <= acceptance_ratio(part, w)
        n_prop += _CHUNK
        got = w[keep]
        if got.size:
            accepted.append(got)
            n_acc += got.shape[0]
        if n_prop == _CHUNK and n_acc < _MIN_RATE * _CHUNK:
            raise EnvelopeFailureError(
                f"acceptance rate {n_acc / n_prop:.2e} after a probe batch of "
                f"{_CHUNK} proposals for {part.part.name}; envelope constant "
                "does not match this kernel's density"
            )
        if n_prop > cap:
            raise EnvelopeFailureError(
                f"exceeded {cap} proposals while collecting {m} samples "
                f"for {part.part.name}"
            )
    return np.concatenate(accepted, axis=0)[:m]


def sample_bank(kernel: SpectralKernel, m: int, seed: int) -> FrequencyBank:
    """Sample the omega/zeta/nu banks; degenerate pieces get (0, d) matrices."""

    def draw(which):
        part = PartDensity(which, kernel)
        if is_degenerate(part):
            return np.zeros((0, kernel.dim))
        return sample_part(part, m, seed)

    return FrequencyBank(
        omega=draw(Part.REAL_POS),
        zeta=draw(Part.REAL_NEG),
        nu=draw(Part.IMAG_POS),
        seed=int(seed),
        m=int(m),
    )


_BANK_FILES = {"omega": Part.REAL_POS, "zeta": Part.REAL_NEG, "nu": Part.IMAG_POS}


def save_bank(bank: FrequencyBank, directory: str) -> None:
    """Write the bank as three CSV files with one JSON header line each."""
    os.makedirs(directory, exist_ok=True)
    for name, part in _BANK_FILES.items():
        mat = getattr(bank, name)
        header = json.dumps(
            {"m": bank.m, "d": bank.dim, "seed": bank.seed, "part": part.name.lower()}
        )
        path = os.path.join(directory, f"{name}.csv")
        np.savetxt(path, mat.reshape(mat.shape[0], -1), fmt="%.17g",
                   delimiter=",", header=header)


def load_bank(directory: str) -> FrequencyBank:
    """Read a bank written by save_bank; matrices round-trip bit-for-bit."""
    mats = {}
    meta = None
    for name in _BANK_FILES:
        path = os.path.join(directory, f"{name}.csv")
        with open(path) as fh:
            head = fh.readline()
        if not head.startswith("#"):
            raise ValueError(f"{path} is missing its JSON header line")
        info = json.loads(head[1:])
        if meta is None:
            meta = {"m": info["m"], "d": info["d"], "seed": info["seed"]}
        elif (info["m"], info["d"], info["seed"]) != (meta["m"], meta["d"], meta["seed"]):
            raise ValueError(f"inconsistent bank headers in {directory}")
        mat = np.loadtxt(path, delimiter=",", ndmin=2)
        if mat.size == 0:
            mat = np.zeros((0, meta["d"]))
        mats[name] = mat
    return FrequencyBank(
        omega=mats["omega"], zeta=mats["zeta"], nu=mats["nu"],
        seed=meta["seed"], m=meta["m"],
    )
