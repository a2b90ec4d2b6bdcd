import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import sqrtm

from fuzzymeas.fuzzification import build_effects, delta_kernel, fuzzifier, gaussian_kernel, kernel_from_weights
from fuzzymeas.operators import ContractError, DensityOperator, LatticeWindow, min_eigenvalue, random_density_matrix
from fuzzymeas.transformers import (
    EPISTEMIC,
    FLAVORS,
    OQP,
    VON_NEUMANN,
    KrausSet,
    coherence_factors,
    epistemic_transform,
    kraus_apply,
    kraus_set,
    nonselective_decomposition_gap,
    oqp_transform,
    outcome_indices,
    probability,
    probability_consistency_gap,
    shift_covariance_gap,
    transform,
    von_neumann_transform,
)


def projector(d, i):
    e = np.zeros((d, d))
    e[i, i] = 1
    return e


def oqp_loop(kernel, rho, outcomes):
    effects = build_effects(kernel)
    out = np.zeros_like(rho, dtype=complex)
    for m in outcomes:
        root = sqrtm(effects[m])
        out += root @ rho @ root.conj().T
    return out


def epistemic_loop(kernel, rho, outcomes):
    f = fuzzifier(kernel)
    w = kernel.window
    out = np.zeros_like(rho, dtype=complex)
    for m in outcomes:
        e = projector(w.dim, w.index(m))
        out += f @ e @ rho @ e @ f.T
    return out


def test_kraus_apply_identity():
    rho = np.array([[0.5, 0.5], [0.5, 0.5]])
    ks = KrausSet(np.eye(2)[None])
    assert np.allclose(kraus_apply(ks, rho), rho, atol=1e-15)


def test_kraus_apply_dephasing():
    rho = np.array([[0.5, 0.5], [0.5, 0.5]])
    ks = KrausSet(np.stack([projector(2, 0), projector(2, 1)]))
    assert np.max(np.abs(kraus_apply(ks, rho) - np.diag([0.5, 0.5]))) <= 1e-15


def test_kraus_apply_rejects_incomplete_set():
    ks = KrausSet(np.stack([projector(2, 0)]))
    with pytest.raises(ContractError):
        kraus_apply(ks, np.eye(2) / 2)


def test_kraus_set_validation():
    with pytest.raises(ValueError):
        KrausSet(np.eye(2))
    with pytest.raises(ValueError):
        KrausSet(np.stack([np.eye(2)]), labels=(0, 1))
    with pytest.raises(ValueError):
        kraus_set("lueders", delta_kernel(LatticeWindow(2)))


@pytest.mark.parametrize("sigma", [0.0, 0.3, 1.0, 2.5])
@pytest.mark.parametrize("flavor", FLAVORS)
def test_kraus_sets_complete(flavor, sigma):
    w = LatticeWindow(8)
    kernel = gaussian_kernel(sigma, w)
    assert kraus_set(flavor, kernel).completeness_gap() <= 1e-12


def test_von_neumann_examples():
    w = LatticeWindow(2)
    rho = DensityOperator.uniform_superposition(w, [0, 1])
    single = von_neumann_transform(w, rho, [0])
    expected = np.zeros((5, 5))
    expected[w.index(0), w.index(0)] = 0.5
    assert np.max(np.abs(single - expected)) <= 1e-15
    full = von_neumann_transform(w, rho, "all")
    assert np.max(np.abs(full - np.diag(np.diagonal(rho.matrix)))) <= 1e-15


def test_oqp_coherence_entry():
    w = LatticeWindow(12)
    kernel = gaussian_kernel(1.0, w)
    rho = DensityOperator.uniform_superposition(w, [0, 1])
    out = oqp_transform(kernel, rho)
    i, j = w.index(0), w.index(1)
    omega = kernel.weights
    overlap = sum(np.sqrt(omega[m, i] * omega[m, j]) for m in range(w.dim))
    assert abs(out[i, j] - 0.5 * overlap) <= 1e-15
    assert abs(out[i, i] - 0.5) <= 1e-15
    assert 0 < out[i, j].real < 0.5


def test_epistemic_basis_state():
    w = LatticeWindow(12)
    kernel = gaussian_kernel(1.0, w)
    out = epistemic_transform(kernel, DensityOperator.basis_state(w, 0))
    column = fuzzifier(kernel)[:, w.index(0)]
    assert np.max(np.abs(out - np.outer(column, column))) <= 1e-15
    assert abs(np.trace(out).real - 1) <= 1e-14


def test_probability_examples():
    w = LatticeWindow(10)
    kernel = gaussian_kernel(0.3, w)
    effects = build_effects(kernel)
    rho = DensityOperator.basis_state(w, 0)
    assert probability(effects, rho, "all") == pytest.approx(1, abs=1e-14)
    assert probability(effects, rho, [0]) == pytest.approx(kernel.weights[w.index(0), w.index(0)], abs=1e-15)
    assert probability(effects, rho, [0]) > 0.999


def test_probability_consistency(window, rng):
    kernel = gaussian_kernel(1.4, window)
    for _ in range(10):
        rho = random_density_matrix(window.dim, rng)
        for outcomes in ("all", [0], [-3, 2, 7]):
            assert probability_consistency_gap(kernel, rho, outcomes) <= 1e-12


@pytest.mark.parametrize("flavor", FLAVORS)
def test_nonselective_decomposition(flavor, window, rng):
    kernel = gaussian_kernel(0.9, window)
    rho = random_density_matrix(window.dim, rng)
    assert nonselective_decomposition_gap(flavor, kernel, rho) <= 1e-13


def test_outcome_validation(window):
    kernel = gaussian_kernel(1.0, window)
    rho = np.eye(window.dim) / window.dim
    with pytest.raises(ValueError):
        transform(OQP, kernel, rho, [0, 0])
    with pytest.raises(ValueError):
        transform(OQP, kernel, rho, [99])
    with pytest.raises(ValueError):
        transform(OQP, kernel, rho, "some")
    with pytest.raises(ValueError):
        transform("lueders", kernel, rho)
    assert list(outcome_indices(window, [-10, 10])) == [0, 20]


@pytest.mark.parametrize("flavor", [OQP, EPISTEMIC])
def test_shift_covariance(flavor, ring, rng):
    kernel = gaussian_kernel(1.0, ring)
    rho = random_density_matrix(ring.dim, rng)
    assert shift_covariance_gap(flavor, kernel, rho, 0) == 0.0
    assert shift_covariance_gap(flavor, kernel, rho, 3) <= 1e-12
    assert shift_covariance_gap(flavor, kernel, rho, -11) <= 1e-12


def test_shift_covariance_contracts(window, ring):
    with pytest.raises(ContractError):
        shift_covariance_gap(OQP, gaussian_kernel(1.0, window), np.eye(window.dim) / window.dim, 1)
    raw = np.random.default_rng(1).uniform(0, 1, (ring.dim, ring.dim))
    with pytest.raises(ContractError):
        shift_covariance_gap(OQP, kernel_from_weights(raw, ring), np.eye(ring.dim) / ring.dim, 1)


def test_positivity_over_random_states(rng):
    worst = np.inf
    for sigma in (0.3, 1.0, 3.0):
        w = LatticeWindow.for_parameters(sigma)
        kernel = gaussian_kernel(sigma, w)
        for _ in range(100 // 3 + 1):
            rho = random_density_matrix(w.dim, rng)
            for flavor in FLAVORS:
                out = transform(flavor, kernel, rho)
                assert abs(np.trace(out).real - 1) <= 1e-12
                worst = min(worst, min_eigenvalue(out))
    assert worst >= -1e-10


@settings(max_examples=40, deadline=None)
@given(
    st.floats(min_value=0.0, max_value=3.0),
    st.lists(st.integers(-6, 6), min_size=1, max_size=6, unique=True),
    st.integers(0, 2**32 - 1),
)
def test_dedicated_paths_match_kraus(sigma, outcomes, seed):
    w = LatticeWindow(6)
    kernel = gaussian_kernel(sigma, w)
    rho = random_density_matrix(w.dim, np.random.default_rng(seed))
    for flavor in FLAVORS:
        direct = transform(flavor, kernel, rho, outcomes)
        via_kraus = kraus_apply(kraus_set(flavor, kernel), rho, outcomes)
        assert np.max(np.abs(direct - via_kraus)) <= 1e-13
    assert np.max(np.abs(oqp_transform(kernel, rho, outcomes) - oqp_loop(kernel, rho, outcomes))) <= 1e-12
    assert np.max(np.abs(epistemic_transform(kernel, rho, outcomes) - epistemic_loop(kernel, rho, outcomes))) <= 1e-13


@settings(max_examples=30, deadline=None)
@given(
    st.floats(min_value=0.1, max_value=3.0),
    st.lists(st.integers(-6, 6), min_size=1, max_size=12, unique=True),
    st.integers(0, 2**32 - 1),
)
def test_trace_monotone_in_outcome_set(sigma, outcomes, seed):
    w = LatticeWindow(6)
    kernel = gaussian_kernel(sigma, w)
    rho = random_density_matrix(w.dim, np.random.default_rng(seed))
    for flavor in FLAVORS:
        traces = [np.trace(transform(flavor, kernel, rho, outcomes[:k])).real for k in range(1, len(outcomes) + 1)]
        assert all(b >= a - 1e-14 for a, b in zip(traces, traces[1:]))


def test_sharp_limit_collapse(window, rng):
    kernel = delta_kernel(window)
    rho = random_density_matrix(window.dim, rng)
    outs = [transform(fl, kernel, rho, [-2, 0, 5]) for fl in FLAVORS]
    assert np.max(np.abs(outs[0] - outs[1])) <= 1e-14
    assert np.max(np.abs(outs[0] - outs[2])) <= 1e-14


def test_flavors_distinct_for_fuzzy_kernel(window, rng):
    kernel = gaussian_kernel(1.0, window)
    rho = random_density_matrix(window.dim, rng)
    outs = {fl: transform(fl, kernel, rho) for fl in FLAVORS}
    assert np.max(np.abs(outs[VON_NEUMANN] - outs[OQP])) > 1e-3
    assert np.max(np.abs(outs[OQP] - outs[EPISTEMIC])) > 1e-3
    assert np.max(np.abs(outs[VON_NEUMANN] - outs[EPISTEMIC])) > 1e-3


def test_coherence_factors_shape(window):
    g = coherence_factors(gaussian_kernel(1.0, window), [0, 1])
    assert g.shape == (window.dim, window.dim)
    assert np.allclose(g, g.T, atol=0)
