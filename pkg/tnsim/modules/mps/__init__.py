"""
MPS Module

Matrix product states on open and periodic chains.

Key Components:
- MatrixProductState: immutable chain of (D_left, D_right, d) site tensors
- canonicalize / vidal_gauge: gauge fixing and the Gamma/Lambda form
- overlap / expect_product / schmidt_spectrum: measurements
- truncate / approximation_bounds: bond reduction and its error bounds
- save_mps / load_mps: HDF5 containers
"""

from .gauge import (
    VidalForm,
    absorb_into_next,
    absorb_into_previous,
    canonicalize,
    canonicalize_with_norm,
    is_canonical,
    left_orthonormalize_site,
    right_orthonormalize_site,
    shift_center,
    vidal_gauge,
)
from .measure import (
    SchmidtSpectrum,
    correlation,
    entanglement_profile,
    expect_product,
    expect_product_raw,
    expect_two_site,
    norm_squared,
    overlap,
    schmidt_spectrum,
)
from .serialization import load_mps, read_container, save_mps, write_container
from .state import (
    Boundary,
    CanonicalForm,
    MatrixProductState,
    aklt_mps,
    basis_state,
    from_vector,
    product_mps,
    random_mps,
    singlet_mps,
    to_vector,
)
from .truncation import (
    ApproximationBounds,
    TruncationResult,
    approximation_bounds,
    truncate,
    truncation_bound_check,
)

__all__ = [
    "VidalForm",
    "absorb_into_next",
    "absorb_into_previous",
    "canonicalize",
    "canonicalize_with_norm",
    "is_canonical",
    "left_orthonormalize_site",
    "right_orthonormalize_site",
    "shift_center",
    "vidal_gauge",
    "SchmidtSpectrum",
    "correlation",
    "entanglement_profile",
    "expect_product",
    "expect_product_raw",
    "expect_two_site",
    "norm_squared",
    "overlap",
    "schmidt_spectrum",
    "load_mps",
    "read_container",
    "save_mps",
    "write_container",
    "Boundary",
    "CanonicalForm",
    "MatrixProductState",
    "aklt_mps",
    "basis_state",
    "from_vector",
    "product_mps",
    "random_mps",
    "singlet_mps",
    "to_vector",
    "ApproximationBounds",
    "TruncationResult",
    "approximation_bounds",
    "truncate",
    "truncation_bound_check",
]
