"""Random Fourier features for asymmetric shift-invariant kernels.

The spectral density of a real, absolutely integrable kernel is complex in
general; splitting its real and imaginary parts into nonnegative pieces
gives sampling measures for randomized trigonometric features that
approximate the kernel even when k(x, y) != k(y, x).  This package bundles
the kernel families, the frequency sampler, the feature maps, total-mass
estimation, Gram benchmarking, and a linear-classification pipeline on the
resulting features.
"""

from .spectral import (
    Family,
    Part,
    PartDensity,
    SpectralKernel,
    density_complex,
    kernel_eval,
    kernel_from_config,
    kernel_to_config,
    part_density_eval,
)
from .sampler import (
    DegenerateMeasureError,
    EnvelopeFailureError,
    FrequencyBank,
    is_degenerate,
    load_bank,
    sample_bank,
    sample_part,
    save_bank,
)
from .features import FeatureMap, Side, approx_kernel, phi_block, psi_block, transform
from .masses import (
    MassSet,
    MassSource,
    UnsupportedDimensionError,
    masses_analytic,
    masses_quadrature,
    masses_subset_ls,
)
from .evalbench import (
    BoundInputs,
    beta_d,
    bound_inputs,
    bound_min_features,
    gram_approx,
    gram_exact,
    relative_error,
    sup_error_grid,
)

__version__ = "0.1.0"

__all__ = [
    "Family",
    "Part",
    "PartDensity",
    "SpectralKernel",
    "density_complex",
    "kernel_eval",
    "kernel_from_config",
    "kernel_to_config",
    "part_density_eval",
    "DegenerateMeasureError",
    "EnvelopeFailureError",
    "FrequencyBank",
    "is_degenerate",
    "load_bank",
    "sample_bank",
    "sample_part",
    "save_bank",
    "FeatureMap",
    "Side",
    "approx_kernel",
    "phi_block",
    "psi_block",
    "transform",
    "MassSet",
    "MassSource",
    "UnsupportedDimensionError",
    "masses_analytic",
    "masses_quadrature",
    "masses_subset_ls",
    "BoundInputs",
    "beta_d",
    "bound_inputs",
    "bound_min_features",
    "gram_approx",
    "gram_exact",
    "relative_error",
    "sup_error_grid",
    "__version__",
]
