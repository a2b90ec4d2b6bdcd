"""Post-measurement state maps for a fuzzified sharp observable.

Three flavors share one calling convention ``(kernel, rho, outcomes)``:

* ``von_neumann``: ``sum_{m in B} E_m rho E_m`` (the kernel only supplies the window);
* ``oqp``: ``sum_{m in B} sqrt(F_m) rho sqrt(F_m)``;
* ``epistemic``: ``sum_{m in B} F_d E_m rho E_m F_d^T``, whose ``B = all``
  value is ``F_d diag(rho) F_d^T``.

``outcomes`` is ``"all"`` or an iterable of site labels. All maps return
the unnormalized, hermitized output matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fuzzification import EffectSet, FuzzyKernel, build_effects, fuzzifier
from .operators import ContractError, LatticeWindow, as_matrix, hermitize, max_norm

VON_NEUMANN = "von_neumann"
OQP = "oqp"
EPISTEMIC = "epistemic"
FLAVORS = (VON_NEUMANN, OQP, EPISTEMIC)

COMPLETENESS_TOL = 1e-12

# offsets of the outcome sets used by the covariance checks
COVARIANCE_TEST_SETS = ([0], [-2, -1, 0, 1, 2], [1, 4, 9], [-7, 3], "all")


def _resolve(labels, outcomes) -> np.ndarray:
    """Positions of ``outcomes`` within ``labels``."""
    labels = list(labels)
    if isinstance(outcomes, str):
        if outcomes != "all":
            raise ValueError(f"outcome set must be 'all' or a list of sites, got {outcomes!r}")
        return np.arange(len(labels))
    outcomes = [int(b) for b in outcomes]
    if len(set(outcomes)) != len(outcomes):
        raise ValueError(f"outcome set has duplicate sites: {outcomes}")
    pos = {lab: i for i, lab in enumerate(labels)}
    missing = [b for b in outcomes if b not in pos]
    if missing:
        raise ValueError(f"outcomes {missing} are not in the window")
    return np.array([pos[b] for b in outcomes], dtype=int)


def outcome_indices(window: LatticeWindow, outcomes="all") -> np.ndarray:
    return _resolve(window.sites.tolist(), outcomes)


@dataclass(frozen=True)
class KrausSet:
    operators: np.ndarray = field(repr=False)
    flavor: str = "custom"
    labels: tuple = None

    def __post_init__(self):
        ops = np.array(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2]:
            raise ValueError(f"Kraus operators must be stacked square matrices, got shape {ops.shape}")
        labels = tuple(range(len(ops))) if self.labels is None else tuple(int(x) for x in self.labels)
        if len(labels) != len(ops):
            raise ValueError("need exactly one label per Kraus operator")
        ops.flags.writeable = False
        object.__setattr__(self, "operators", ops)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.operators)

    def completeness_gap(self) -> float:
        a = self.operators
        total = np.einsum("mki,mkj->ij", a.conj(), a)
        return max_norm(total - np.eye(a.shape[1]))


def von_neumann_kraus(window: LatticeWindow) -> KrausSet:
    d = window.dim
    ops = np.zeros((d, d, d))
    ops[np.arange(d), np.arange(d), np.arange(d)] = 1.0
    return KrausSet(ops, VON_NEUMANN, window.sites)


def oqp_kraus(kernel: FuzzyKernel) -> KrausSet:
    """``A_m = sqrt(F_m) = sum_k sqrt(w[m, k]) E_k``."""
    root = np.sqrt(kernel.weights)
    d = kernel.dim
    ops = np.zeros((d, d, d))
    ops[:, np.arange(d), np.arange(d)] = root
    return KrausSet(ops, OQP, kernel.window.sites)


def epistemic_kraus(kernel: FuzzyKernel) -> KrausSet:
    """``A_m = F_d E_m``: column ``m`` of ``F_d``, zeros elsewhere."""
    f = fuzzifier(kernel)
    d = kernel.dim
    ops = np.zeros((d, d, d))
    for m in range(d):
        ops[m, :, m] = f[:, m]
    return KrausSet(ops, EPISTEMIC, kernel.window.sites)


def kraus_set(flavor: str, kernel: FuzzyKernel) -> KrausSet:
    if flavor == VON_NEUMANN:
        return von_neumann_kraus(kernel.window)
    if flavor == OQP:
        return oqp_kraus(kernel)
    if flavor == EPISTEMIC:
        return epistemic_kraus(kernel)
    raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")


def kraus_apply(kraus: KrausSet, rho, outcomes="all") -> np.ndarray:
    gap = kraus.completeness_gap()
    if gap > COMPLETENESS_TOL:
        raise ContractError(f"Kraus set is not complete: max |sum A^dag A - 1| = {gap:.3e}")
    rho = as_matrix(rho)
    ops = kraus.operators[_resolve(kraus.labels, outcomes)]
    out = np.einsum("mij,jk,mlk->il", ops, rho, ops.conj(), optimize=True)
    return hermitize(out)


def von_neumann_transform(window: LatticeWindow, rho, outcomes="all") -> np.ndarray:
    rho = as_matrix(rho)
    idx = outcome_indices(window, outcomes)
    out = np.zeros(rho.shape, dtype=complex)
    out[idx, idx] = rho[idx, idx]
    return hermitize(out)


def coherence_factors(kernel: FuzzyKernel, outcomes="all") -> np.ndarray:
    """``G[k, n] = sum_{m in B} sqrt(w[m, k] w[m, n])``."""
    root = np.sqrt(kernel.weights)[outcome_indices(kernel.window, outcomes)]
    return root.T @ root


def oqp_transform(kernel: FuzzyKernel, rho, outcomes="all") -> np.ndarray:
    # sqrt(F_m) is diagonal in the sharp basis, so the sum is an entrywise product
    rho = as_matrix(rho)
    return hermitize(rho * coherence_factors(kernel, outcomes))


def epistemic_transform(kernel: FuzzyKernel, rho, outcomes="all") -> np.ndarray:
    rho = as_matrix(rho)
    idx = outcome_indices(kernel.window, outcomes)
    cols = fuzzifier(kernel)[:, idx]
    populations = np.diagonal(rho).real[idx]
    return hermitize(((cols * populations) @ cols.T).astype(complex))


def transform(flavor: str, kernel: FuzzyKernel, rho, outcomes="all") -> np.ndarray:
    if flavor == VON_NEUMANN:
        return von_neumann_transform(kernel.window, rho, outcomes)
    if flavor == OQP:
        return oqp_transform(kernel, rho, outcomes)
    if flavor == EPISTEMIC:
        return epistemic_transform(kernel, rho, outcomes)
    raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")


def probability(effects: EffectSet, rho, outcomes="all") -> float:
    """``p(B) = sum_{alpha in B} Tr(F_alpha rho)``."""
    populations = np.diagonal(as_matrix(rho)).real
    idx = outcome_indices(effects.window, outcomes)
    return float(np.sum(effects.kernel.weights[idx] @ populations))


def probability_consistency_gap(kernel: FuzzyKernel, rho, outcomes="all") -> float:
    """Distance between ``Tr(F(B) rho)`` and ``Tr(E(B) rho_post)`` for the nonselective epistemic state."""
    fuzzy = probability(build_effects(kernel), rho, outcomes)
    post = epistemic_transform(kernel, rho, "all")
    idx = outcome_indices(kernel.window, outcomes)
    sharp = float(np.sum(np.diagonal(post).real[idx]))
    return abs(fuzzy - sharp)


def nonselective_decomposition_gap(flavor: str, kernel: FuzzyKernel, rho) -> float:
    full = transform(flavor, kernel, rho, "all")
    parts = sum(transform(flavor, kernel, rho, [m]) for m in kernel.window.sites)
    return max_norm(full - parts)


def shift_covariance_gap(flavor: str, kernel: FuzzyKernel, rho, shift: int, outcome_sets=COVARIANCE_TEST_SETS) -> float:
    """Worst max-norm violation of ``T(B + a, rho) = U_a^dag T(B, U_a rho U_a^dag) U_a``."""
    window = kernel.window
    if not window.periodic:
        raise ContractError("shift covariance is only exact on a periodic window")
    if not kernel.homogeneous:
        raise ContractError("shift covariance needs a homogeneous kernel")
    rho = as_matrix(rho)
    u = window.shift_operator(shift)
    moved = u @ rho @ u.conj().T
    worst = 0.0
    for family in outcome_sets:
        if isinstance(family, str):
            base = shifted = family
        else:
            base = list(dict.fromkeys(window.wrap(b) for b in family))
            shifted = [window.wrap(b + shift) for b in base]
        lhs = transform(flavor, kernel, rho, shifted)
        rhs = u.conj().T @ transform(flavor, kernel, moved, base) @ u
        worst = max(worst, max_norm(lhs - rhs))
    return worst
