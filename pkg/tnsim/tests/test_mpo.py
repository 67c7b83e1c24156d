"""Tests for Hamiltonian specs, MPO compilation and purifications."""

import numpy as np
import pytest
from scipy.stats import unitary_group

from exceptions import DimensionError, UnsupportedModelError, UnsupportedRangeError
from modules.mpo import (
    SIGMA_X,
    SIGMA_Z,
    HamiltonianSpec,
    Term,
    apply_mpo,
    build_preset,
    h_moments,
    heisenberg,
    identity_mpo,
    lift_to_purification,
    mpo_product,
    mpo_scale_shift,
    nn_hamiltonian_mpo,
    product_mpo,
    purified_identity,
    spec_from_terms,
    to_dense,
    trap_potential,
)
from modules.mps import basis_state, from_vector, overlap, random_mps, to_vector
from modules.oracle import dense_hamiltonian, embed_operator, exact_spectrum

CHAIN_PRESETS = [
    ("heisenberg", {"n": 6, "j": 1.0, "field": 0.3}),
    ("heisenberg", {"n": 5, "boundary": "periodic"}),
    ("xxz", {"n": 6, "delta": 0.5}),
    ("ising_transverse", {"n": 6, "h": 0.7}),
    ("ising_transverse", {"n": 4, "h": 1.0, "boundary": "periodic"}),
    ("xx_field", {"n": 6, "fields": [0.5, -0.5, 0.5, 0.5, -0.5, 0.1]}),
    ("aklt", {"n": 4}),
    ("field_only", {"n": 5, "h": 0.4}),
]


# ------------------------------------------------------------------ #
# Hamiltonian specs                                                   #
# ------------------------------------------------------------------ #


class TestHamiltonianSpec:
    def test_operator_shape_is_validated(self):
        with pytest.raises(DimensionError):
            HamiltonianSpec(2, 2, (Term((0, 1), SIGMA_Z),))

    def test_three_site_terms_are_rejected(self):
        with pytest.raises(UnsupportedRangeError):
            HamiltonianSpec(3, 2, (Term((0, 1, 2), np.eye(8)),))

    def test_long_range_terms_fail_the_neighbour_check(self):
        spec = HamiltonianSpec(4, 2, (Term((0, 2), np.kron(SIGMA_Z, SIGMA_Z)),))
        assert not spec.is_nearest_neighbour()
        with pytest.raises(UnsupportedRangeError):
            nn_hamiltonian_mpo(spec)

    def test_bond_operator_is_symmetrized_by_site_order(self):
        op = np.kron(SIGMA_Z, SIGMA_X)
        spec = HamiltonianSpec(2, 2, (Term((1, 0), op),))
        assert np.allclose(spec.bond_operator(0, 1), np.kron(SIGMA_X, SIGMA_Z))

    def test_uniform_bond_operator_splits_fields(self):
        spec = build_preset("ising_transverse", n=4, h=1.0)
        bond = spec.uniform_bond_operator()
        expected = np.kron(SIGMA_Z, SIGMA_Z) + 0.5 * (np.kron(SIGMA_X, np.eye(2)) + np.kron(np.eye(2), SIGMA_X))
        assert np.allclose(bond, expected)

    def test_uniform_bond_operator_rejects_disorder(self):
        spec = build_preset("xx_field", n=4, fields=[0.5, -0.5, 0.5, 0.5])
        with pytest.raises(UnsupportedModelError):
            spec.uniform_bond_operator()

    def test_unknown_preset(self):
        with pytest.raises(KeyError, match="unknown preset"):
            build_preset("hubbard", n=4)

    def test_term_table(self):
        spec = spec_from_terms(3, 2, [
            {"sites": [0, 1], "ops": ["sz", "sz"], "coupling": -1.0},
            {"sites": [2], "ops": ["sx"], "coupling": 0.5},
        ])
        expected = -embed_operator(np.kron(SIGMA_Z, SIGMA_Z), [0, 1], [2] * 3) + 0.5 * embed_operator(SIGMA_X, [2], [2] * 3)
        assert np.allclose(dense_hamiltonian(spec), expected)

    def test_trap_is_centered(self):
        trap = trap_potential(4, 4, 36.0).reshape(4, 4)
        assert np.allclose(trap, trap[::-1, ::-1])
        assert trap.min() == pytest.approx(36.0 * 0.5 / 16.0)


# ------------------------------------------------------------------ #
# Compilation and dense forms                                         #
# ------------------------------------------------------------------ #


class TestNearestNeighbourMpo:
    @pytest.mark.parametrize("name,params", CHAIN_PRESETS)
    def test_matches_dense_hamiltonian(self, name, params):
        spec = build_preset(name, **params)
        mpo = nn_hamiltonian_mpo(spec)
        assert np.max(np.abs(to_dense(mpo) - dense_hamiltonian(spec))) <= 1e-12

    def test_heisenberg_bond_dimension_is_five(self):
        assert nn_hamiltonian_mpo(heisenberg(8)).max_bond == 5

    def test_field_only_bond_dimension_is_two(self):
        assert nn_hamiltonian_mpo(build_preset("field_only", n=6, h=1.0)).max_bond == 2

    def test_single_site_chain(self):
        spec = HamiltonianSpec(1, 2, (Term((0,), SIGMA_X, 2.0),))
        assert np.allclose(to_dense(nn_hamiltonian_mpo(spec)), 2.0 * SIGMA_X)

    def test_lattice_specs_are_rejected(self):
        with pytest.raises(UnsupportedRangeError):
            nn_hamiltonian_mpo(build_preset("heisenberg_2d", rows=2, cols=2))


class TestDenseForms:
    def test_identity(self):
        assert np.allclose(to_dense(identity_mpo(2, 3)), np.eye(8))

    def test_heisenberg_three_sites_by_kronecker(self):
        dims = [2] * 3
        expected = sum(
            embed_operator(np.kron(s, s), [k, k + 1], dims)
            for k in range(2)
            for s in (SIGMA_X, np.array([[0, -1j], [1j, 0]]), SIGMA_Z)
        )
        assert np.allclose(to_dense(nn_hamiltonian_mpo(heisenberg(3))), expected, atol=1e-12)

    def test_product_squares_the_matrix(self):
        mpo = nn_hamiltonian_mpo(heisenberg(4))
        dense = to_dense(mpo)
        assert np.allclose(to_dense(mpo_product(mpo, mpo)), dense @ dense, atol=1e-11)

    def test_scale_shift(self):
        mpo = nn_hamiltonian_mpo(heisenberg(3))
        shifted = mpo_scale_shift(mpo, scale=-0.5, shift=2.0)
        assert np.allclose(to_dense(shifted), -0.5 * to_dense(mpo) + 2.0 * np.eye(8), atol=1e-12)


class TestApplyMpo:
    def test_identity_keeps_state(self):
        psi = random_mps(5, 2, 3, seed=1)
        applied = apply_mpo(identity_mpo(2, 5), psi)
        assert np.allclose(to_vector(applied), to_vector(psi))

    def test_bond_dimensions_multiply(self):
        psi = random_mps(5, 2, 3, seed=1)
        mpo = nn_hamiltonian_mpo(build_preset("ising_transverse", n=5, h=0.5))
        assert mpo.max_bond == 3
        out = apply_mpo(mpo, psi)
        assert out.bond_dims == tuple(a * b for a, b in zip(psi.bond_dims, mpo.bond_dims))

    def test_matches_dense_matrix_vector(self):
        psi = random_mps(5, 2, 3, seed=2, complex_entries=True)
        spec = heisenberg(5, field=0.2)
        out = apply_mpo(nn_hamiltonian_mpo(spec), psi)
        assert np.allclose(to_vector(out), dense_hamiltonian(spec) @ to_vector(psi), atol=1e-11)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            apply_mpo(identity_mpo(3, 4), random_mps(4, 2, 2, seed=0))


# ------------------------------------------------------------------ #
# Moments                                                             #
# ------------------------------------------------------------------ #


class TestMoments:
    def test_eigenstate_has_zero_variance(self):
        spec = heisenberg(6)
        ground = exact_spectrum(spec, 1).vectors[:, 0]
        moments = h_moments(from_vector(ground, [2] * 6), spec)
        assert moments.variance <= 1e-10

    def test_random_state_matches_dense(self):
        spec = heisenberg(6, field=0.1)
        psi = random_mps(6, 2, 3, seed=3)
        vector = to_vector(psi)
        vector = vector / np.linalg.norm(vector)
        h = dense_hamiltonian(spec)
        moments = h_moments(psi, spec)
        assert moments.e1 == pytest.approx(np.vdot(vector, h @ vector).real, abs=1e-10)
        assert moments.e2 == pytest.approx(np.vdot(h @ vector, h @ vector).real, abs=1e-10)

    def test_product_state_with_field(self):
        spec = build_preset("field_only", n=4, h=0.5, op="sz")
        psi = basis_state([0, 1, 0, 0])
        moments = h_moments(psi, spec)
        assert moments.e1 == pytest.approx(0.5 * (1 - 1 + 1 + 1))
        assert moments.e2 == pytest.approx(moments.e1 ** 2)


# ------------------------------------------------------------------ #
# Purification                                                        #
# ------------------------------------------------------------------ #


class TestPurification:
    def test_single_site_is_a_bell_pair(self):
        purified = purified_identity(1, 2)
        assert np.allclose(purified.reduced_density(), np.eye(2) / 2)

    def test_trace_trick(self):
        unitaries = [unitary_group.rvs(2, random_state=seed) for seed in range(3)]
        lifted = lift_to_purification(product_mpo(unitaries))
        identity = purified_identity(3, 2)
        value = overlap(identity.state, apply_mpo(lifted, identity.state))
        expected = np.prod([np.trace(u) for u in unitaries]) / 8.0
        assert value == pytest.approx(expected, abs=1e-12)
