"""Shift-invariant kernel families and their complex spectral densities.

Each supported kernel k(x, y) = k(x - y) is real and absolutely integrable but
not necessarily symmetric.  Its Fourier transform is a complex-valued density

    mu(w) = mu_R(w) + i * mu_I(w),

with mu_R even and mu_I odd.  Splitting the real and imaginary parts into
positive and negative pieces gives four nonnegative densities (``Part``),
which is what the frequency sampler and the mass estimators consume.

Every family factors as a Gaussian envelope ``(sigma/sqrt(2*pi))^d *
exp(-sigma^2 ||w||^2 / 2)`` -- the probability density of N(0, sigma^-2 I) --
times a bounded modulation, so rejection sampling with that Gaussian as the
proposal has an analytic acceptance constant per family.

Families
--------
gaussian        k(D) = exp(-||D||^2 / 2 sigma^2)                 (symmetric)
shift_gaussian  k(D) = exp(-||D + r||^2 / 2 sigma^2)
sinh_gaussian   k(D) = exp(-||D||^2 / 2 sigma^2) (1 + sinh(b.D))
cosh_gaussian   k(D) = exp(-||D||^2 / 2 sigma^2) exp(b.D)

The hyperbolic names refer to the skew factor convention: note that the
cosh family's factor exp(b.D) equals cosh(b.D) + sinh(b.D), and the sinh
family's factor is 1 + sinh(b.D), not sinh alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "Family",
    "Part",
    "SpectralKernel",
    "PartDensity",
    "kernel_eval",
    "density_complex",
    "part_density_eval",
    "kernel_from_config",
    "kernel_to_config",
]

# exp() overflows IEEE doubles just above this exponent
_LOG_MAX = 709.0


class Family(str, Enum):
    GAUSSIAN = "gaussian"
    SHIFT_GAUSSIAN = "shift_gaussian"
    SINH_GAUSSIAN = "sinh_gaussian"
    COSH_GAUSSIAN = "cosh_gaussian"


class Part(Enum):
    """Selector for one of the four nonnegative pieces of the density."""

    REAL_POS = 0
    REAL_NEG = 1
    IMAG_POS = 2
    IMAG_NEG = 3


@dataclass(frozen=True)
class SpectralKernel:
    """A kernel family instance with validated, immutable parameters.

    Parameters
    ----------
    family : Family
        One of the four supported families.
    dim : int
        Input dimension d.
    sigma : float
        Bandwidth of the Gaussian envelope, > 0.
    shift : array of shape (dim,), only for the shift family
        Time-domain shift r.
    skew : array of shape (dim,), only for the sinh/cosh families
        Skew direction b.
    """

    family: Family
    dim: int
    sigma: float
    shift: np.ndarray | None = None
    skew: np.ndarray | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be a positive finite real, got {self.sigma}")
        family = Family(self.family)
        object.__setattr__(self, "family", family)

        def lock(name, required):
            vec = getattr(self, name)
            if required:
                if vec is None:
                    raise ValueError(f"{family.value} kernel requires '{name}'")
                arr = np.asarray(vec, dtype=float).reshape(-1).copy()
                if arr.shape[0] != self.dim:
                    raise ValueError(
                        f"'{name}' has length {arr.shape[0]}, expected dim={self.dim}"
                    )
                if not np.all(np.isfinite(arr)):
                    raise ValueError(f"'{name}' must be finite")
                arr.setflags(write=False)
                object.__setattr__(self, name, arr)
            elif vec is not None:
                raise ValueError(f"'{name}' is not a parameter of {family.value}")

        lock("shift", family == Family.SHIFT_GAUSSIAN)
        lock("skew", family in (Family.SINH_GAUSSIAN, Family.COSH_GAUSSIAN))

    @property
    def log_skew_gain(self) -> float:
        """log of the spectral prefactor exp(sigma^2 ||b||^2 / 2); 0 if no skew."""
        if self.skew is None:
            return 0.0
        return 0.5 * self.sigma**2 * float(self.skew @ self.skew)

    @property
    def log_envelope_norm(self) -> float:
        """log of (sigma / sqrt(2 pi))^d, the envelope's peak value."""
        return self.dim * (math.log(self.sigma) - 0.5 * math.log(2.0 * math.pi))


@dataclass(frozen=True)
class PartDensity:
    """One nonnegative piece of a kernel's spectral density."""

    part: Part
    kernel: SpectralKernel


def _as_batch(x, dim, name="input"):
    """Coerce a (d,) vector or (n, d) matrix to (n, d); return (array, was_vector)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        if arr.shape[0] != dim:
            raise ValueError(f"{name} has length {arr.shape[0]}, expected {dim}")
        return arr[None, :], True
    if arr.ndim == 2:
        if arr.shape[1] != dim:
            raise ValueError(f"{name} has {arr.shape[1]} columns, expected {dim}")
        return arr, False
    raise ValueError(f"{name} must be a vector or matrix, got ndim={arr.ndim}")


def _unbatch(values, was_vector):
    return float(values[0]) if was_vector else values


def _guard_exponent(ex):
    ex = np.asarray(ex)
    if np.any(ex > _LOG_MAX):
        raise OverflowError(
            "kernel parameters put exp() past double range "
            "(sigma^2 ||skew||^2 / 2 too large); reduce sigma or the skew"
        )
    return ex


def kernel_eval(kernel: SpectralKernel, delta):
    """Evaluate k(delta) for one difference vector or a batch of them.

    Accepts shape (d,) -> float or (n, d) -> (n,) array.  Skewed families are
    evaluated in log space so large sigma*||skew|| raises OverflowError
    instead of returning inf.
    """
    d, vec = _as_batch(delta, kernel.dim, "delta")
    s2 = kernel.sigma**2
    if kernel.family == Family.GAUSSIAN:
        out = np.exp(-np.sum(d * d, axis=1) / (2.0 * s2))
    elif kernel.family == Family.SHIFT_GAUSSIAN:
        shifted = d + kernel.shift
        out = np.exp(-np.sum(shifted * shifted, axis=1) / (2.0 * s2))
    else:
        a = np.sum(d * d, axis=1) / (2.0 * s2)
        t = d @ kernel.skew
        if kernel.family == Family.COSH_GAUSSIAN:
            # t - a <= sigma^2 ||b||^2 / 2 by completing the square
            out = np.exp(_guard_exponent(t - a))
        else:
            out = np.exp(-a) + 0.5 * (
                np.exp(_guard_exponent(t - a)) - np.exp(-t - a)
            )
    return _unbatch(out, vec)


def density_complex(kernel: SpectralKernel, omega):
    """Real and imaginary parts of the spectral density at frequencies omega.

    Returns a pair (re, im); floats for a single (d,) input, (n,) arrays for a
    batch.  Values are unnormalized, exactly as the closed-form transforms
    state them, including the (sigma/sqrt(2 pi))^d prefactor.
    """
    w, vec = _as_batch(omega, kernel.dim, "omega")
    s2 = kernel.sigma**2
    log_env = kernel.log_envelope_norm - 0.5 * s2 * np.sum(w * w, axis=1)
    if kernel.family == Family.GAUSSIAN:
        env = np.exp(log_env)
        return _unbatch(env, vec), _unbatch(np.zeros_like(env), vec)
    if kernel.family == Family.SHIFT_GAUSSIAN:
        env = np.exp(log_env)
        phase = w @ kernel.shift
        return _unbatch(env * np.cos(phase), vec), _unbatch(env * np.sin(phase), vec)
    phase = s2 * (w @ kernel.skew)
    gained = np.exp(_guard_exponent(log_env + kernel.log_skew_gain))
    if kernel.family == Family.SINH_GAUSSIAN:
        re = np.exp(log_env)
        im = -gained * np.sin(phase)
    else:  # cosh
        re = gained * np.cos(phase)
        im = -gained * np.sin(phase)
    return _unbatch(re, vec), _unbatch(im, vec)


def part_density_eval(part: PartDensity, omega):
    """Evaluate one nonnegative piece: max(+-Re mu, 0) or max(+-Im mu, 0)."""
    re, im = density_complex(part.kernel, omega)
    which = part.part
    if which == Part.REAL_POS:
        return np.maximum(re, 0.0)
    if which == Part.REAL_NEG:
        return np.maximum(-np.asarray(re), 0.0)
    if which == Part.IMAG_POS:
        return np.maximum(im, 0.0)
    return np.maximum(-np.asarray(im), 0.0)


def kernel_from_config(config: dict) -> SpectralKernel:
    """Build a kernel from a JSON-style dict.

    Expected keys: "family" (one of the Family values), "dim", "sigma", and
    "shift"/"skew" vectors where the family requires them.  Vector lengths
    must match "dim".
    """
    if not isinstance(config, dict):
        raise ValueError("kernel config must be a JSON object")
    try:
        family = Family(config["family"])
    except KeyError:
        raise ValueError("kernel config is missing 'family'") from None
    except ValueError:
        raise ValueError(
            f"unknown kernel family {config.get('family')!r}; expected one of "
            f"{[f.value for f in Family]}"
        ) from None
    for key in ("dim", "sigma"):
        if key not in config:
            raise ValueError(f"kernel config is missing '{key}'")
    known = {"family", "dim", "sigma", "shift", "skew"}
    extra = set(config) - known
    if extra:
        raise ValueError(f"unknown kernel config keys: {sorted(extra)}")
    return SpectralKernel(
        family=family,
        dim=int(config["dim"]),
        sigma=float(config["sigma"]),
        shift=config.get("shift"),
        skew=config.get("skew"),
    )


def kernel_to_config(kernel: SpectralKernel) -> dict:
    """Inverse of kernel_from_config; arrays become plain lists."""
    config = {
        "family": kernel.family.value,
        "dim": kernel.dim,
        "sigma": kernel.sigma,
    }
    if kernel.shift is not None:
        config["shift"] = list(map(float, kernel.shift))
    if kernel.skew is not None:
        config["skew"] = list(map(float, kernel.skew))
    return config
