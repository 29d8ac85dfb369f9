"""Hardy-space tools on top of a wavelet basis: atoms, norms, decomposition, maximal functions, signs."""

from .atoms import Atom, annulus_constants, make_atom, validate_atom, validate_molecule
from .decomposition import (
    AtomicDecomposition,
    Piece,
    core_ball_constant,
    decompose,
    molecule_report,
    save_decomposition,
)
from .maximal import (
    cube_averages,
    dyadic_maximal,
    hl_maximal,
    lebesgue_differentiation_check,
    level_set_cubes,
    maximal_comparison,
    maximal_domination_check,
    weak_type_check,
)
from .norms import coarse_energy, norm_iii, norm_iv, norm_v, phi, square_function_iii, square_function_iv, square_function_v
from .signs import (
    cz_kernel,
    cz_kernel_check,
    khintchine_check,
    khintchine_ratio,
    random_sign_synthesis,
    random_signs,
    sign_isometry_error,
    sign_uniform_bound,
    square_function_vs_signs,
)

__all__ = [
    "Atom",
    "AtomicDecomposition",
    "Piece",
    "annulus_constants",
    "coarse_energy",
    "core_ball_constant",
    "cube_averages",
    "cz_kernel",
    "cz_kernel_check",
    "decompose",
    "dyadic_maximal",
    "hl_maximal",
    "khintchine_check",
    "khintchine_ratio",
    "lebesgue_differentiation_check",
    "level_set_cubes",
    "make_atom",
    "maximal_comparison",
    "maximal_domination_check",
    "molecule_report",
    "norm_iii",
    "norm_iv",
    "norm_v",
    "phi",
    "random_sign_synthesis",
    "random_signs",
    "save_decomposition",
    "sign_isometry_error",
    "sign_uniform_bound",
    "square_function_iii",
    "square_function_iv",
    "square_function_v",
    "square_function_vs_signs",
    "validate_atom",
    "validate_molecule",
    "weak_type_check",
]
