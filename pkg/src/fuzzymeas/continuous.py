"""Unsharp position measurement on a periodic grid.

Conventions:

* grid points ``x_j = (j - N/2) dx``, wave numbers ``k = 2 pi fftfreq(N, dx)``
  (so ``k`` covers ``[-pi/dx, pi/dx)``), ``k = -i d/dx`` and
  ``psi~(k) ~ sum_j psi(x_j) exp(-i k x_j)``;
* the orthonormal basis vector ``|j>`` carries amplitude ``psi(x_j) sqrt(dx)``,
  so density matrices have unit trace and ``rho(y, y') = rho[i, j] / dx``;
* integrals over ``x`` are Riemann sums with weight ``dx``; offsets wrap
  around the period.

With these conventions the coherence term of :func:`momko_value` agrees
with the direct expectation ``Tr(rho k)`` with sign ``+1``
(:data:`FORMULA_SIGN`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import circulant

from .operators import DensityOperator, as_matrix, hermitize, max_norm

FORMULA_SIGN = 1
RESOLUTION_STEPS = 3

SPECTRAL = "spectral"
CENTRAL = "central"


@dataclass(frozen=True)
class GridSpec:
    n_points: int
    length: float

    def __post_init__(self):
        n = self.n_points
        if int(n) != n or n < 16 or int(n) & (int(n) - 1):
            raise ValueError(f"n_points must be a power of two >= 16, got {n!r}")
        if not self.length > 0 or not math.isfinite(self.length):
            raise ValueError(f"length must be positive, got {self.length!r}")
        object.__setattr__(self, "n_points", int(n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dim(self) -> int:
        return self.n_points

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def positions(self) -> np.ndarray:
        return (np.arange(self.n_points) - self.n_points // 2) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Wave numbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_points, self.spacing)

    def steps(self, shift: float) -> int:
        """Number of grid steps in ``shift``; it must be a whole number."""
        steps = shift / self.spacing
        if abs(steps - round(steps)) > 1e-9 * max(1.0, abs(steps)):
            raise ValueError(f"shift {shift!r} is not a multiple of the grid spacing {self.spacing!r}")
        return int(round(steps))

    def shift_operator(self, steps: int) -> np.ndarray:
        """``U |x_j> = |x_j - steps dx>``, cyclic."""
        return np.roll(np.eye(self.n_points), -int(steps), axis=0)


def make_grid(n_points: int, length: float) -> GridSpec:
    return GridSpec(n_points, length)


@dataclass(frozen=True)
class SmearingKernel:
    """Samples ``f(x_j) >= 0`` on the grid with ``sum_j f(x_j) dx = 1``."""

    grid: GridSpec
    samples: np.ndarray = field(repr=False)
    sigma: float | None = None

    def __post_init__(self):
        f = np.array(self.samples, dtype=float)
        if f.shape != (self.grid.n_points,):
            raise ValueError(f"need {self.grid.n_points} samples, got shape {f.shape}")
        if np.any(f < 0) or not np.all(np.isfinite(f)):
            raise ValueError("smearing samples must be finite and nonnegative")
        total = f.sum() * self.grid.spacing
        if abs(total - 1) > 1e-14:
            raise ValueError(f"smearing kernel is not normalized (integral {total!r})")
        f.flags.writeable = False
        object.__setattr__(self, "samples", f)

    def offset_values(self) -> np.ndarray:
        """``f(l dx)`` for cyclic offsets ``l = 0..N-1``."""
        return np.roll(self.samples, -(self.grid.n_points // 2))

    def matrix(self) -> np.ndarray:
        """``M[i, j] = f(x_i - x_j)``."""
        return circulant(self.offset_values())


def smearing_from_samples(samples, grid: GridSpec) -> SmearingKernel:
    f = np.asarray(samples, dtype=float)
    if np.any(f < 0):
        raise ValueError("smearing samples must be nonnegative")
    total = f.sum() * grid.spacing
    if not total > 0:
        raise ValueError("smearing samples have no weight")
    return SmearingKernel(grid, f / total)


def gaussian_smearing(sigma: float, grid: GridSpec) -> SmearingKernel:
    """``f(x)`` proportional to ``exp(-x^2 / sigma^2)``; needs ``sigma >= 3 dx``."""
    if not sigma >= RESOLUTION_STEPS * grid.spacing:
        raise ValueError(
            f"sigma={sigma!r} is under-resolved; need sigma >= {RESOLUTION_STEPS} * dx = {RESOLUTION_STEPS * grid.spacing!r}"
        )
    f = np.exp(-((grid.positions / sigma) ** 2))
    return SmearingKernel(grid, f / (f.sum() * grid.spacing), float(sigma))


@dataclass(frozen=True)
class ContinuousFuzzifier:
    """``F_c`` as a Fourier multiplier: circulant with first column ``sqrt(f(l dx) dx)``."""

    grid: GridSpec
    multiplier: np.ndarray = field(repr=False)
    column: np.ndarray = field(repr=False)

    def apply(self, v, axis: int = 0) -> np.ndarray:
        v = np.asarray(v)
        shape = [1] * v.ndim
        shape[axis] = -1
        m = self.multiplier.reshape(shape)
        return np.fft.ifft(m * np.fft.fft(v, axis=axis), axis=axis)

    def dense(self) -> np.ndarray:
        return circulant(self.column)


def continuous_fuzzifier(f: SmearingKernel) -> ContinuousFuzzifier:
    column = np.sqrt(f.offset_values() * f.grid.spacing)
    return ContinuousFuzzifier(f.grid, np.fft.fft(column), column)


def _indices(grid: GridSpec, outcomes) -> np.ndarray:
    if isinstance(outcomes, str):
        if outcomes != "all":
            raise ValueError(f"outcome set must be 'all' or grid indices, got {outcomes!r}")
        return np.arange(grid.n_points)
    idx = [int(i) for i in outcomes]
    if len(set(idx)) != len(idx):
        raise ValueError(f"outcome set has duplicate grid points: {idx}")
    if any(not 0 <= i < grid.n_points for i in idx):
        raise ValueError("outcome grid indices out of range")
    return np.array(idx, dtype=int)


def _root_rows(f: SmearingKernel) -> np.ndarray:
    """``R[x, y] = sqrt(f(x - y) dx)``; row ``x`` is the diagonal of ``A_x``."""
    return np.sqrt(f.matrix() * f.grid.spacing)


def coherence_profile(f: SmearingKernel) -> np.ndarray:
    """``g(l dx) = sum_x sqrt(f(x) f(x - l dx)) dx`` for cyclic offsets ``l``."""
    r = np.sqrt(f.offset_values())
    spectrum = np.fft.fft(r)
    return np.fft.ifft(np.abs(spectrum) ** 2).real * f.grid.spacing


def oqp_transform_continuous(f: SmearingKernel, rho, outcomes="all", method: str = "coherence") -> np.ndarray:
    """``sum_{x in B} A_x rho A_x`` with ``A_x = diag_y sqrt(f(x - y) dx)``.

    ``method="coherence"`` multiplies ``rho`` entrywise by the overlap
    factors (an FFT autocorrelation when ``B`` is everything);
    ``method="kraus"`` sums the Kraus terms one by one.
    """
    rho = as_matrix(rho)
    idx = _indices(f.grid, outcomes)
    if method == "kraus":
        rows = _root_rows(f)[idx]
        out = np.zeros(rho.shape, dtype=complex)
        for a in rows:
            out += a[:, None] * rho * a[None, :]
        return hermitize(out)
    if method != "coherence":
        raise ValueError(f"unknown method {method!r}")
    if len(idx) == f.grid.n_points:
        factors = circulant(coherence_profile(f))
    else:
        rows = _root_rows(f)[idx]
        factors = rows.T @ rows
    return hermitize(rho * factors)


def epistemic_transform_continuous(f: SmearingKernel, rho, outcomes="all", method: str = "multiplier") -> np.ndarray:
    """``sum_{x in B} rho(x, x) F_c |x><x| F_c^T``; ``F_c diag(rho) F_c^T`` for all outcomes."""
    rho = as_matrix(rho)
    idx = _indices(f.grid, outcomes)
    fc = continuous_fuzzifier(f)
    populations = np.zeros(f.grid.n_points)
    populations[idx] = np.diagonal(rho).real[idx]
    if method == "dense":
        cols = fc.dense()[:, idx]
        out = (cols * populations[idx]) @ cols.T
    elif method == "multiplier":
        half = fc.apply(np.diag(populations), axis=0)
        out = fc.apply(half.T, axis=0).T
        if np.isrealobj(fc.column):
            out = out.real
    else:
        raise ValueError(f"unknown method {method!r}")
    return hermitize(np.asarray(out, dtype=complex))


def transform_continuous(flavor: str, f: SmearingKernel, rho, outcomes="all") -> np.ndarray:
    if flavor == "oqp":
        return oqp_transform_continuous(f, rho, outcomes)
    if flavor == "epistemic":
        return epistemic_transform_continuous(f, rho, outcomes)
    raise ValueError(f"unknown flavor {flavor!r}; expected 'oqp' or 'epistemic'")


def _covariance_sets(grid: GridSpec):
    c = grid.n_points // 2
    return ([c], list(range(c - 2, c + 3)), [0, 5, 17 % grid.n_points], "all")


def translation_covariance_gap_continuous(flavor: str, f: SmearingKernel, rho, shift: float, outcome_sets=None) -> float:
    """Worst violation of ``T(B + s, rho) = U_s^dag T(B, U_s rho U_s^dag) U_s`` over grid outcome sets."""
    grid = f.grid
    steps = grid.steps(shift)
    rho = as_matrix(rho)
    u = grid.shift_operator(steps)
    moved = u @ rho @ u.conj().T
    worst = 0.0
    for family in outcome_sets or _covariance_sets(grid):
        if isinstance(family, str):
            base = shifted = family
        else:
            base = list(family)
            shifted = [(b + steps) % grid.n_points for b in base]
        lhs = transform_continuous(flavor, f, rho, shifted)
        rhs = u.conj().T @ transform_continuous(flavor, f, moved, base) @ u
        worst = max(worst, max_norm(lhs - rhs))
    return worst


def fuzzifier_shift_commutator(f: SmearingKernel, shift: float) -> float:
    """Max-norm of ``F_c U_s - U_s F_c``."""
    fc = continuous_fuzzifier(f).dense()
    u = f.grid.shift_operator(f.grid.steps(shift))
    return max_norm(fc @ u - u @ fc)


def gaussian_packet(grid: GridSpec, x0: float = 0.0, k0: float = 0.0, w: float = 1.0) -> DensityOperator:
    """Pure state ``exp(i k0 x - (x - x0)^2 / (4 w^2))``."""
    if not w > 0:
        raise ValueError(f"packet width must be positive, got {w!r}")
    x = grid.positions
    psi = np.exp(1j * k0 * x - ((x - x0) / (2 * w)) ** 2)
    return DensityOperator.from_vector(psi, grid)


def momentum_distribution(rho, grid: GridSpec) -> np.ndarray:
    """Diagonal of ``rho`` in the wave-number basis (FFT order)."""
    rho = as_matrix(rho)
    rho_k = np.fft.fft(np.fft.ifft(rho, axis=1, norm="ortho"), axis=0, norm="ortho")
    return np.diagonal(rho_k).real


def momentum_first_moment(rho, grid: GridSpec) -> float:
    """``Tr(rho k)`` with ``k = -i d/dx``."""
    return float(np.sum(grid.wavenumbers * momentum_distribution(rho, grid)))


def _derivative(values: np.ndarray, grid: GridSpec, axis: int, method: str) -> np.ndarray:
    if method == CENTRAL:
        return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2 * grid.spacing)
    if method != SPECTRAL:
        raise ValueError(f"unknown derivative method {method!r}")
    k = grid.wavenumbers.copy()
    k[grid.n_points // 2] = 0.0  # Nyquist mode has no odd derivative
    shape = [1] * values.ndim
    shape[axis] = -1
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(values, axis=axis), axis=axis)


def memory_term(rho, grid: GridSpec, derivative: str = SPECTRAL) -> float:
    """``i * integral dy (d rho / d y')(y, y' = y)``."""
    rho = as_matrix(rho)
    d_rho = _derivative(rho, grid, axis=1, method=derivative)
    return float((1j * np.trace(d_rho)).real)


def _smearing_slope_integral(f: SmearingKernel, derivative: str) -> float:
    # integral of f'(x - y) over x; independent of y on the periodic grid
    slope = _derivative(f.samples, f.grid, axis=0, method=derivative)
    return float(np.sum(slope).real * f.grid.spacing)


def momke_value(rho, f: SmearingKernel, derivative: str = SPECTRAL) -> float:
    """``-(i/2) integral dy rho(y, y) integral dx f'(x - y)``, real part.

    The term is imaginary as written and is zero whenever ``f`` is periodic
    on the grid, since ``f'`` then integrates to zero.
    """
    populations = np.diagonal(as_matrix(rho)).real
    value = -0.5j * np.sum(populations) * _smearing_slope_integral(f, derivative)
    return float(value.real)


def momko_value(rho, f: SmearingKernel, derivative: str = SPECTRAL) -> float:
    """Coherence (memory) term plus the smearing-slope term of :func:`momke_value`."""
    return FORMULA_SIGN * memory_term(rho, f.grid, derivative) + momke_value(rho, f, derivative)


def momentum_sign(rho, f: SmearingKernel, derivative: str = SPECTRAL) -> int:
    """Global sign that makes :func:`momko_value` match the OQP output's direct mean momentum."""
    direct = momentum_first_moment(oqp_transform_continuous(f, rho), f.grid)
    formula = momko_value(rho, f, derivative)
    return 1 if abs(formula - direct) <= abs(formula + direct) else -1


def central_difference_error(rho, grid: GridSpec) -> float:
    """Leading error ``dx^2 |<k^3>| / 6`` of the central-difference memory term."""
    k = grid.wavenumbers
    third = float(np.sum(k**3 * momentum_distribution(rho, grid)))
    return grid.spacing**2 * abs(third) / 6
