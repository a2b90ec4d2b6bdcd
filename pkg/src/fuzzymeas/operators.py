"""Dense operator algebra on a truncated lattice.

Sites are the integers ``m`` in ``[-L, L]``; site ``m`` lives at matrix
index ``m + L``. The sharp observable is the rank-one PVM ``E_m = |m><m|``
of that basis and is never stored explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10

OPEN = "open"
PERIODIC = "periodic"


class ContractError(ValueError):
    """An operation was called outside its contract or broke an invariant."""


@dataclass(frozen=True)
class LatticeWindow:
    half_width: int
    boundary: str = OPEN

    def __post_init__(self):
        if int(self.half_width) != self.half_width or self.half_width < 1:
            raise ValueError(f"half_width must be a positive integer, got {self.half_width!r}")
        if self.boundary not in (OPEN, PERIODIC):
            raise ValueError(f"boundary must be 'open' or 'periodic', got {self.boundary!r}")
        object.__setattr__(self, "half_width", int(self.half_width))

    @classmethod
    def for_parameters(cls, *widths: float, center: int = 0, boundary: str = OPEN) -> "LatticeWindow":
        """Smallest window keeping Gaussian tails of the given widths below 1e-14."""
        widest = max([0.0, *widths])
        return cls(math.ceil(6 * widest) + abs(int(center)) + 2, boundary)

    @property
    def dim(self) -> int:
        return 2 * self.half_width + 1

    @property
    def periodic(self) -> bool:
        return self.boundary == PERIODIC

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def index(self, site: int) -> int:
        if not -self.half_width <= site <= self.half_width:
            raise ValueError(f"site {site} outside window [-{self.half_width}, {self.half_width}]")
        return int(site) + self.half_width

    def wrap(self, site: int) -> int:
        """Signed cyclic representative of ``site`` in ``[-L, L]``."""
        return (int(site) + self.half_width) % self.dim - self.half_width

    def offsets(self) -> np.ndarray:
        """Matrix of signed site differences ``k - m``, cyclic on periodic windows."""
        s = self.sites
        diff = s[:, None] - s[None, :]
        if self.periodic:
            diff = (diff + self.half_width) % self.dim - self.half_width
        return diff

    def shift_operator(self, a: int) -> np.ndarray:
        """Cyclic shift ``U_a |m> = |m - a>``."""
        if not self.periodic:
            raise ContractError("shift operators are only unitary on a periodic window")
        return np.roll(np.eye(self.dim), -int(a), axis=0)


@dataclass(frozen=True)
class DensityOperator:
    """A density matrix tied to its basis (a ``LatticeWindow`` or ``GridSpec``).

    Construction checks only the shape; physical validity is reported by
    :func:`validate_density`.
    """

    matrix: np.ndarray = field(repr=False)
    basis: Any

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.basis.dim:
            raise ValueError(f"matrix dimension {m.shape[0]} does not match basis dimension {self.basis.dim}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, psi, basis) -> "DensityOperator":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), basis)

    @classmethod
    def basis_state(cls, window: LatticeWindow, site: int) -> "DensityOperator":
        psi = np.zeros(window.dim)
        psi[window.index(site)] = 1.0
        return cls.from_vector(psi, window)

    @classmethod
    def uniform_superposition(cls, window: LatticeWindow, sites) -> "DensityOperator":
        sites = list(sites)
        if not sites:
            raise ValueError("superposition needs at least one site")
        psi = np.zeros(window.dim)
        for s in sites:
            psi[window.index(s)] = 1.0
        return cls.from_vector(psi, window)

    @classmethod
    def maximally_mixed(cls, basis) -> "DensityOperator":
        return cls(np.eye(basis.dim) / basis.dim, basis)

    @classmethod
    def random(cls, basis, rng: np.random.Generator, rank: int | None = None) -> "DensityOperator":
        return cls(random_density_matrix(basis.dim, rng, rank), basis)


class DensityReport(NamedTuple):
    hermiticity_gap: float
    trace_gap: float
    min_eigenvalue: float

    @property
    def valid(self) -> bool:
        return (
            self.hermiticity_gap <= HERMITICITY_TOL
            and self.trace_gap <= TRACE_TOL
            and self.min_eigenvalue >= -POSITIVITY_TOL
        )


def as_matrix(rho) -> np.ndarray:
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """``G G^dagger / Tr`` for a complex Gaussian ``dim x rank`` matrix ``G``."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return hermitize(rho / np.trace(rho).real)


def hermitize(m) -> np.ndarray:
    m = np.asarray(m)
    return (m + m.conj().T) / 2


def min_eigenvalue(m) -> float:
    return float(np.linalg.eigvalsh(hermitize(as_matrix(m)))[0])


def validate_density(rho) -> DensityReport:
    m = as_matrix(rho)
    herm = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    trace = float(abs(np.trace(m) - 1))
    return DensityReport(herm, trace, min_eigenvalue(m))


def purity(rho) -> float:
    """``Tr(rho^2)``, computed as the squared Frobenius norm of the Hermitian part."""
    m = hermitize(as_matrix(rho))
    return float(np.vdot(m, m).real)


def max_norm(m) -> float:
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0
