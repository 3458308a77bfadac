"""Direct and inverse spectral computations for Jacobi-type pencils J5 - lam J3."""

__version__ = "0.1.0"

from .errors import PencilError  # noqa: E402
from .measure import Measure, gauss_rule, hankel, jacobi_from_measure, moments, orthonormal_polys  # noqa: E402
from .pencil import (FiveDiagMatrix, JacobiMatrix, Pencil, associated_polynomials,  # noqa: E402
                     pencil_apply, square_jacobi, validate)
from .operator import (OperatorMatrix, apply_poly_at_e0, build_associated_operator,  # noqa: E402
                       spectral_function)

__all__ = [
    "PencilError", "Measure", "gauss_rule", "hankel", "jacobi_from_measure", "moments",
    "orthonormal_polys", "FiveDiagMatrix", "JacobiMatrix", "Pencil",
    "associated_polynomials", "pencil_apply", "square_jacobi", "validate",
    "OperatorMatrix", "apply_poly_at_e0", "build_associated_operator", "spectral_function",
]
