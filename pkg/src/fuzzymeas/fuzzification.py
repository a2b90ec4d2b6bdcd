"""Fuzzy kernels, fuzzified effects and the discrete fuzzifier operator."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import circulant

from .operators import ContractError, LatticeWindow, as_matrix

STOCHASTIC_TOL = 1e-14
HOMOGENEITY_TOL = 1e-14


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not sigma > 0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be positive and finite, got {sigma!r}")
    return sigma


def psi0(sigma: float) -> float:
    """Integer Gaussian theta sum ``sum_m exp(-m^2 / sigma^2)``."""
    sigma = _check_sigma(sigma)
    cut = math.ceil(10 * sigma) + 2
    return math.fsum(math.exp(-(m / sigma) ** 2) for m in range(-cut, cut + 1))


def psi_half(sigma: float) -> float:
    """Half-integer Gaussian theta sum ``sum_m exp(-(m + 1/2)^2 / sigma^2)``."""
    sigma = _check_sigma(sigma)
    cut = math.ceil(10 * sigma) + 2
    return math.fsum(math.exp(-((m + 0.5) / sigma) ** 2) for m in range(-cut - 1, cut + 1))


def _dual_terms(sigma: float, alternating: bool) -> float:
    # exponent reaches pi^2 * 9 > 88 at the cut
    cut = math.ceil(3 / sigma) + 2
    terms = [1.0]
    for n in range(1, cut + 1):
        t = 2 * math.exp(-((math.pi * sigma * n) ** 2))
        terms.append(-t if alternating and n % 2 else t)
    return math.sqrt(math.pi) * sigma * math.fsum(terms)


def psi0_dual(sigma: float) -> float:
    """``psi0`` evaluated from its Poisson-summed series; an independent route."""
    return _dual_terms(_check_sigma(sigma), alternating=False)


def psi_half_dual(sigma: float) -> float:
    """``psi_half`` evaluated from its Poisson-summed series."""
    return _dual_terms(_check_sigma(sigma), alternating=True)


@dataclass(frozen=True)
class FuzzyKernel:
    """Column-stochastic weights ``w[alpha, m]`` over a lattice window.

    Rows index the fuzzy outcome ``alpha``, columns the sharp site ``m``.
    Build instances with :func:`gaussian_kernel`, :func:`delta_kernel` or
    :func:`kernel_from_weights`; they normalize the columns.
    """

    weights: np.ndarray = field(repr=False)
    window: LatticeWindow
    sigma: float | None = None
    homogeneous: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.window.dim, self.window.dim):
            raise ValueError(f"kernel shape {w.shape} does not match window dimension {self.window.dim}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("kernel weights must be finite and nonnegative")
        gap = np.max(np.abs(w.sum(axis=0) - 1))
        if gap > STOCHASTIC_TOL:
            raise ValueError(f"kernel columns must sum to 1 (worst gap {gap:.3e})")
        if self.homogeneous and not _is_homogeneous(w, self.window):
            raise ValueError("kernel marked homogeneous but w[m+u, m] depends on m")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.window.dim

    def profile(self) -> np.ndarray:
        """``w_u = w[m+u, m]`` for signed offsets ``u = -L..L``."""
        if not self.homogeneous:
            raise ContractError("only homogeneous kernels have an offset profile")
        u = self.window.sites
        return self.weights[u % self.dim, 0]


def _is_homogeneous(w: np.ndarray, window: LatticeWindow) -> bool:
    if not window.periodic:
        return False
    d = window.dim
    # column j shifted up by j must reproduce column 0
    cols = np.stack([np.roll(w[:, j], -j) for j in range(d)], axis=1)
    return bool(np.max(np.abs(cols - w[:, :1])) <= HOMOGENEITY_TOL)


def delta_kernel(window: LatticeWindow) -> FuzzyKernel:
    return FuzzyKernel(np.eye(window.dim), window, sigma=0.0, homogeneous=window.periodic)


def gaussian_kernel(sigma: float, window: LatticeWindow) -> FuzzyKernel:
    """``w[k, m] proportional to exp(-(k - m)^2 / sigma^2)``, columns renormalized on the window.

    ``sigma = 0`` gives the delta kernel. On a periodic window the offset is
    the cyclic one and the kernel is circulant, hence homogeneous.
    """
    sigma = float(sigma)
    if sigma < 0 or not math.isfinite(sigma):
        raise ValueError(f"sigma must be nonnegative and finite, got {sigma!r}")
    if sigma == 0:
        return delta_kernel(window)
    if window.periodic:
        offsets = (np.arange(window.dim) + window.half_width) % window.dim - window.half_width
        with np.errstate(over="ignore"):
            column = np.exp(-(offsets / sigma) ** 2)
        column /= column.sum()
        return FuzzyKernel(circulant(column), window, sigma=sigma, homogeneous=True)
    with np.errstate(over="ignore"):
        w = np.exp(-(window.offsets() / sigma) ** 2)
    return FuzzyKernel(w / w.sum(axis=0), window, sigma=sigma)


def kernel_from_weights(weights, window: LatticeWindow) -> FuzzyKernel:
    """Custom kernel; columns are rescaled to sum to one and homogeneity is detected."""
    w = np.array(as_matrix(weights), dtype=complex)
    if np.any(np.abs(w.imag) > 0):
        raise ValueError("kernel weights must be real")
    w = w.real
    if w.shape != (window.dim, window.dim):
        raise ValueError(f"kernel shape {w.shape} does not match window dimension {window.dim}")
    if np.any(w < 0):
        raise ValueError("kernel weights must be nonnegative")
    sums = w.sum(axis=0)
    if np.any(sums <= 0):
        raise ValueError("every kernel column needs positive total weight")
    w = w / sums
    return FuzzyKernel(w, window, homogeneous=_is_homogeneous(w, window))


class EffectSet:
    """The POVM ``F_alpha = sum_m w[alpha, m] E_m``.

    Every effect is diagonal in the sharp basis, so only the diagonals are
    kept; ``effects[alpha]`` materializes the dense matrix for site ``alpha``.
    """

    def __init__(self, kernel: FuzzyKernel):
        self.kernel = kernel
        self.window = kernel.window

    def __len__(self) -> int:
        return self.kernel.dim

    def diagonal(self, alpha: int) -> np.ndarray:
        return self.kernel.weights[self.window.index(alpha)]

    def __getitem__(self, alpha: int) -> np.ndarray:
        return np.diag(self.diagonal(alpha))

    def __iter__(self):
        return (self[a] for a in self.window.sites)

    def total(self) -> np.ndarray:
        return np.diag(self.kernel.weights.sum(axis=0))


def build_effects(kernel: FuzzyKernel, window: LatticeWindow | None = None) -> EffectSet:
    if window is not None and window != kernel.window:
        raise ValueError("kernel and sharp observable live on different windows")
    return EffectSet(kernel)


def fuzzifier(kernel: FuzzyKernel) -> np.ndarray:
    """Real nonnegative ``F_d`` with ``<k|F_d|m> = sqrt(w[k, m])``."""
    return np.sqrt(kernel.weights)


def is_regular_effect(effect) -> bool:
    """True iff the effect is neither below nor above half the identity."""
    ev = np.linalg.eigvalsh(as_matrix(effect))
    return bool(ev[0] < 0.5 < ev[-1])
