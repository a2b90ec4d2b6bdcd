"""Moments and linear entropies of the post-measurement states."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .fuzzification import FuzzyKernel, delta_kernel, gaussian_kernel, psi0, psi_half
from .operators import ContractError, DensityOperator, LatticeWindow, as_matrix, purity
from .transformers import epistemic_transform, oqp_transform, transform

INITIAL = "initial"


class MomentReport(NamedTuple):
    order: int
    value: float
    flavor: str


class EntropyReport(NamedTuple):
    S_formula_O: float
    S_formula_E: float
    S_brute_O: float
    S_brute_E: float
    S_closed: float | None = None

    @property
    def formula_gap(self) -> float:
        return max(abs(self.S_formula_O - self.S_brute_O), abs(self.S_formula_E - self.S_brute_E))


def _order(n) -> int:
    if int(n) != n or n < 0:
        raise ValueError(f"moment order must be a nonnegative integer, got {n!r}")
    return int(n)


def sharp_moment(window: LatticeWindow, rho, n: int) -> float:
    """``M_n = sum_m m^n rho[m, m]``."""
    n = _order(n)
    populations = np.diagonal(as_matrix(rho)).real
    return float(np.sum(window.sites.astype(float) ** n * populations))


def kernel_moment(kernel: FuzzyKernel, n: int) -> float:
    """``sum_u u^n w_u`` over signed cyclic offsets of a homogeneous kernel."""
    n = _order(n)
    if not kernel.homogeneous:
        raise ContractError("kernel moments are only defined for homogeneous kernels")
    u = kernel.window.sites.astype(float)
    return float(np.sum(u**n * kernel.profile()))


def moment_after(flavor: str, kernel: FuzzyKernel, rho, n: int) -> MomentReport:
    """Moment of the sharp observable in the nonselective output of ``flavor``."""
    n = _order(n)
    if flavor == INITIAL:
        state = as_matrix(rho)
    else:
        state = transform(flavor, kernel, rho, "all")
    return MomentReport(n, sharp_moment(kernel.window, state, n), flavor)


def convolution_moment(kernel: FuzzyKernel, rho, n: int) -> float:
    """``sum_k C(n, k) M_k M^w_{n-k}``: the epistemic moment predicted from the initial one."""
    n = _order(n)
    return math.fsum(
        math.comb(n, k) * sharp_moment(kernel.window, rho, k) * kernel_moment(kernel, n - k)
        for k in range(n + 1)
    )


def linear_entropy(rho) -> float:
    return 1.0 - purity(rho)


def _squared_overlaps(kernel: FuzzyKernel) -> np.ndarray:
    root = np.sqrt(kernel.weights)
    return np.einsum("mk,mn->kn", root, root) ** 2


def entropy_formula_oqp(kernel: FuzzyKernel, rho) -> float:
    """``1 - sum_{n,k} (sum_m sqrt(w_mk w_mn))^2 rho_kn rho_nk``."""
    rho = as_matrix(rho)
    return float(1.0 - np.sum(_squared_overlaps(kernel) * rho * rho.T).real)


def entropy_formula_epistemic(kernel: FuzzyKernel, rho) -> float:
    """``1 - sum_{n,k} (sum_m sqrt(w_mk w_mn))^2 rho_nn rho_kk``."""
    p = np.diagonal(as_matrix(rho)).real
    return float(1.0 - p @ _squared_overlaps(kernel) @ p)


def entropy_report(kernel: FuzzyKernel, rho, closed: float | None = None) -> EntropyReport:
    return EntropyReport(
        entropy_formula_oqp(kernel, rho),
        entropy_formula_epistemic(kernel, rho),
        linear_entropy(oqp_transform(kernel, rho)),
        linear_entropy(epistemic_transform(kernel, rho)),
        closed,
    )


def gaussian_fuzzy_state(a: int, alpha: float, window: LatticeWindow) -> DensityOperator:
    """Pure state ``F_d |a>`` for the Gaussian kernel of width ``alpha``."""
    if alpha < 0:
        raise ValueError(f"alpha must be nonnegative, got {alpha!r}")
    column = window.index(a)
    kernel = gaussian_kernel(alpha, window) if alpha > 0 else delta_kernel(window)
    return DensityOperator.from_vector(np.sqrt(kernel.weights[:, column]), window)


def entropy_equality_gap(alpha: float, sigma: float, a: int, window: LatticeWindow) -> float:
    rho = gaussian_fuzzy_state(a, alpha, window)
    kernel = gaussian_kernel(sigma, window)
    return abs(entropy_formula_oqp(kernel, rho) - entropy_formula_epistemic(kernel, rho))


def _theta_bracket(alpha, sigma, even_arg, odd_weight_arg) -> float:
    ratio = psi_half(sigma) / psi0(sigma)
    return (
        psi0(even_arg) * psi0(odd_weight_arg)
        + ratio**2 * psi_half(even_arg) * psi_half(odd_weight_arg)
    ) / psi0(alpha) ** 2


def gaussian_entropy_closed_form(alpha: float, sigma: float) -> float:
    """Theta-sum expression with arguments ``alpha/2`` and ``alpha sigma / sqrt(2 (alpha^2 + 2 sigma^2))``.

    Kept verbatim for comparison. Direct lattice summation does not agree
    with it; :func:`gaussian_entropy_theta` is the expression that does.
    """
    q = alpha * sigma / math.sqrt(2 * (alpha**2 + 2 * sigma**2))
    return 1.0 - _theta_bracket(alpha, sigma, alpha / 2, q)


def gaussian_entropy_theta(alpha: float, sigma: float) -> float:
    """Entropy of the Gaussian fuzzy state after a Gaussian measurement, on the infinite lattice.

    Splitting ``sum_{n,k}`` by the parity of ``n + k`` and summing over
    ``n + k`` and ``n - k`` separately gives arguments ``alpha / sqrt(2)``
    and ``alpha sigma / sqrt(2 (alpha^2 + sigma^2))``.
    """
    q = alpha * sigma / math.sqrt(2 * (alpha**2 + sigma**2))
    return 1.0 - _theta_bracket(alpha, sigma, alpha / math.sqrt(2), q)


def unsharp_asymptote(alpha: float, sigma: float) -> float:
    """Large-width approximation ``1 - sigma / sqrt(2 (alpha^2 + 2 sigma^2))`` of the closed form."""
    return 1.0 - sigma / math.sqrt(2 * (alpha**2 + 2 * sigma**2))


def sharp_limit_report(alpha: float, window: LatticeWindow | None = None) -> dict:
    """Every available value of the entropy for a sharp measurement of a fuzzy state.

    ``quoted_asymptote`` is the large-``alpha`` value ``1 - alpha/sqrt(pi)``;
    it turns negative for ``alpha > sqrt(pi)`` and is reported, not trusted.
    """
    window = window or LatticeWindow.for_parameters(alpha)
    rho = gaussian_fuzzy_state(0, alpha, window)
    return {
        "alpha": alpha,
        "quoted_asymptote": 1.0 - alpha / math.sqrt(math.pi),
        "closed_form_limit": 1.0 - psi0(alpha / 2) / psi0(alpha) ** 2,
        "theta_limit": 1.0 - psi0(alpha / math.sqrt(2)) / psi0(alpha) ** 2,
        "large_alpha_limit": 1.0 - 1.0 / (alpha * math.sqrt(2 * math.pi)),
        "brute_force": linear_entropy(oqp_transform(delta_kernel(window), rho)),
    }
