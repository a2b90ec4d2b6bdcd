import numpy as np
import pytest

from fuzzymeas.operators import (
    ContractError,
    DensityOperator,
    LatticeWindow,
    hermitize,
    purity,
    random_density_matrix,
    validate_density,
)


def test_window_basics():
    w = LatticeWindow(3)
    assert w.dim == 7
    assert list(w.sites) == [-3, -2, -1, 0, 1, 2, 3]
    assert [w.index(s) for s in w.sites] == list(range(7))
    with pytest.raises(ValueError):
        w.index(4)
    with pytest.raises(ValueError):
        LatticeWindow(0)
    with pytest.raises(ValueError):
        LatticeWindow(2, "twisted")


def test_window_sizing_rule():
    # L >= ceil(6 max(sigma, alpha)) + |a| + 2
    assert LatticeWindow.for_parameters(1.0).half_width == 8
    assert LatticeWindow.for_parameters(0.3, 2.1, center=-4).half_width == 13 + 4 + 2


def test_periodic_offsets_and_shift():
    w = LatticeWindow(2, "periodic")
    assert w.wrap(3) == -2 and w.wrap(-3) == 2
    off = w.offsets()
    assert off[0, 4] == 1  # site -2 minus site 2 wraps to +1
    u = w.shift_operator(1)
    e = np.eye(5)
    # U_a |m> = |m - a>
    assert np.array_equal(u @ e[w.index(0)], e[w.index(-1)])
    assert np.array_equal(u @ e[w.index(-2)], e[w.index(2)])
    with pytest.raises(ContractError):
        LatticeWindow(2).shift_operator(1)


def test_validate_maximally_mixed():
    w = LatticeWindow(2)
    rep = validate_density(DensityOperator.maximally_mixed(w))
    assert rep.hermiticity_gap == 0 and rep.trace_gap < 1e-15
    assert rep.min_eigenvalue == pytest.approx(0.2)
    assert rep.valid


def test_validate_pure_projector():
    rep = validate_density(DensityOperator.basis_state(LatticeWindow(2), -2))
    assert rep.valid
    assert abs(rep.min_eigenvalue) < 1e-15


def test_validate_negative_eigenvalue():
    m = np.zeros((5, 5))
    m[0, 0], m[1, 1], m[2, 2] = 1.0, -0.01, 0.01
    rep = validate_density(DensityOperator(m, LatticeWindow(2)))
    assert not rep.valid
    assert rep.min_eigenvalue == pytest.approx(-0.01, abs=1e-15)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        DensityOperator(np.eye(4) / 4, LatticeWindow(2))
    with pytest.raises(ValueError):
        validate_density(np.ones((2, 3)))


def test_purity_examples():
    w = LatticeWindow(2)
    assert purity(DensityOperator.basis_state(w, 1)) == pytest.approx(1.0, abs=1e-15)
    assert purity(DensityOperator.maximally_mixed(w)) == pytest.approx(0.2, abs=1e-15)
    mix = np.diag([0.5, 0.5, 0, 0, 0])
    assert purity(mix) == pytest.approx(0.5, abs=1e-15)


def test_purity_permutation_invariant(rng):
    rho = random_density_matrix(7, rng)
    perm = rng.permutation(7)
    assert purity(rho[np.ix_(perm, perm)]) == pytest.approx(purity(rho), abs=1e-15)


def test_hermitize():
    h = np.array([[1.0, 2 - 1j], [2 + 1j, 3.0]])
    assert np.array_equal(hermitize(h), h)
    m = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.array_equal(hermitize(m), [[0, 0.5], [0.5, 0]])
    a = np.array([[1j, 2.0], [-2.0, 0.5j]])
    assert np.array_equal(hermitize(a), np.zeros((2, 2)))


def test_random_states_are_valid(rng):
    for rank in (1, 3, None):
        rep = validate_density(random_density_matrix(9, rng, rank))
        assert rep.valid
    assert purity(random_density_matrix(9, rng, 1)) == pytest.approx(1.0, abs=1e-12)


def test_density_operator_is_immutable(window):
    rho = DensityOperator.basis_state(window, 0)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 2
