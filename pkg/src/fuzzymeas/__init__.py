"""Post-measurement state transformers for fuzzy quantum measurements.

Two maps are compared for a fuzzified sharp observable: the standard
instrument ``rho -> sum_m sqrt(F_m) rho sqrt(F_m)`` and the epistemic map
``rho -> F_d (sum_m E_m rho E_m) F_d^T`` obtained by dualizing the
fuzzification of the effects.
"""

__version__ = "0.1.0"

from .fuzzification import (
    EffectSet,
    FuzzyKernel,
    build_effects,
    delta_kernel,
    fuzzifier,
    gaussian_kernel,
    is_regular_effect,
    kernel_from_weights,
    psi0,
    psi_half,
)
from .operators import ContractError, DensityOperator, LatticeWindow, hermitize, purity, validate_density
from .transformers import (
    KrausSet,
    epistemic_transform,
    kraus_apply,
    oqp_transform,
    probability,
    transform,
    von_neumann_transform,
)
