"""Tests for matrix product states: construction, gauges, measurements and truncation."""

import h5py
import numpy as np
import pytest

from exceptions import DimensionError, DomainError, UnsupportedGaugeError
from modules.mpo import SIGMA_Z, spin_one_projector_two
from modules.mps import (
    Boundary,
    CanonicalForm,
    MatrixProductState,
    aklt_mps,
    approximation_bounds,
    basis_state,
    canonicalize,
    correlation,
    entanglement_profile,
    expect_product,
    expect_two_site,
    from_vector,
    is_canonical,
    load_mps,
    norm_squared,
    overlap,
    random_mps,
    save_mps,
    schmidt_spectrum,
    singlet_mps,
    to_vector,
    truncate,
    truncation_bound_check,
    vidal_gauge,
)
from modules.oracle import embed_operator


def _dense_schmidt(vector: np.ndarray, cut: int, n: int, d: int = 2) -> np.ndarray:
    unit = vector / np.linalg.norm(vector)
    return np.linalg.svd(unit.reshape(d ** cut, d ** (n - cut)), compute_uv=False)


# ------------------------------------------------------------------ #
# Construction                                                        #
# ------------------------------------------------------------------ #


class TestRandomMps:
    def test_bond_one_is_a_product_state(self):
        psi = random_mps(2, 2, 1, seed=3)
        assert psi.bond_dims == (1,)
        assert [a.shape for a in psi.sites] == [(1, 1, 2), (1, 1, 2)]

    def test_fixed_seed_is_deterministic(self):
        a = random_mps(10, 2, 5, seed=42)
        b = random_mps(10, 2, 5, seed=42)
        assert all(np.array_equal(x, y) for x, y in zip(a.sites, b.sites))

    def test_periodic_bonds_include_the_wrap(self):
        psi = random_mps(6, 3, 4, boundary=Boundary.PERIODIC, seed=1)
        assert psi.bond_dims == (4,) * 6
        assert psi.phys_dims == (3,) * 6

    def test_rejects_degenerate_sizes(self):
        with pytest.raises(DimensionError):
            random_mps(1, 2, 2)

    def test_open_chain_needs_unit_outer_bonds(self):
        with pytest.raises(DimensionError, match="outer bonds"):
            MatrixProductState((np.ones((2, 1, 2)), np.ones((1, 1, 2))))


class TestDenseConversion:
    def test_basis_state_vector(self):
        vector = to_vector(basis_state([1, 0, 1]))
        expected = np.zeros(8)
        expected[0b101] = 1.0
        assert np.allclose(vector, expected)

    def test_from_vector_reproduces_amplitudes(self, rng):
        vector = rng.standard_normal(32) + 1j * rng.standard_normal(32)
        psi = from_vector(vector, [2] * 5)
        assert np.allclose(to_vector(psi), vector, atol=1e-12)


# ------------------------------------------------------------------ #
# Gauges                                                              #
# ------------------------------------------------------------------ #


class TestCanonicalize:
    def test_left_form_is_isometric(self):
        psi = canonicalize(random_mps(8, 2, 6, seed=7), "left")
        assert psi.canonical == CanonicalForm.LEFT
        assert is_canonical(psi, "left")

    def test_right_and_mixed_forms(self):
        psi = random_mps(8, 2, 6, seed=7)
        assert is_canonical(canonicalize(psi, "right"), "right")
        mixed = canonicalize(psi, "mixed", center=3)
        assert mixed.center == 3
        assert is_canonical(mixed, "mixed", center=3)

    def test_canonicalization_is_idempotent(self):
        once = canonicalize(random_mps(6, 2, 2, seed=11), "left")
        twice = canonicalize(once, "left")
        for a, b in zip(once.sites, twice.sites):
            assert np.allclose(a, b, atol=1e-12)

    def test_state_is_preserved_up_to_norm(self):
        psi = random_mps(6, 2, 3, seed=5)
        vector = to_vector(psi)
        assert np.allclose(to_vector(canonicalize(psi, "right")), vector / np.linalg.norm(vector), atol=1e-12)

    def test_product_state_is_canonical_in_every_form(self):
        psi = basis_state([0, 1, 0])
        assert is_canonical(psi, "left")
        assert is_canonical(psi, "right")
        assert is_canonical(psi, "mixed", center=1)

    def test_periodic_chain_is_rejected(self):
        with pytest.raises(UnsupportedGaugeError):
            canonicalize(random_mps(4, 2, 2, boundary="periodic", seed=0))

    def test_mixed_form_needs_center(self):
        with pytest.raises(ValueError, match="center"):
            canonicalize(random_mps(4, 2, 2, seed=0), "mixed")


class TestVidalGauge:
    def test_product_state_has_trivial_lambdas(self):
        vidal = vidal_gauge(basis_state([0, 1, 1, 0]))
        for spectrum in vidal.lambdas:
            assert np.allclose(spectrum.coefficients, [1.0])

    def test_singlet_lambdas(self):
        vidal = vidal_gauge(singlet_mps())
        assert np.allclose(vidal.lambdas[0].coefficients, [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)

    def test_lambdas_match_dense_bipartitions(self):
        psi = random_mps(6, 2, 3, seed=21)
        vector = to_vector(psi)
        vidal = vidal_gauge(psi)
        for cut in range(1, 6):
            expected = _dense_schmidt(vector, cut, 6)
            found = vidal.lambdas[cut - 1].coefficients
            assert np.allclose(found, expected[: found.size], atol=1e-10)

    def test_reassembled_state_is_normalized_input(self):
        psi = random_mps(5, 2, 2, seed=2)
        vector = to_vector(psi)
        rebuilt = to_vector(vidal_gauge(psi).to_mps())
        assert np.allclose(rebuilt, vector / np.linalg.norm(vector), atol=1e-10)


# ------------------------------------------------------------------ #
# Measurements                                                        #
# ------------------------------------------------------------------ #


class TestOverlap:
    def test_canonical_state_has_unit_norm(self):
        psi = canonicalize(random_mps(6, 2, 3, seed=8))
        assert overlap(psi, psi) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_product_states(self):
        assert abs(overlap(basis_state([0, 0]), basis_state([1, 0]))) < 1e-15

    def test_matches_dense_inner_product(self):
        a = random_mps(6, 2, 3, seed=1, complex_entries=True)
        b = random_mps(6, 2, 3, seed=2, complex_entries=True)
        expected = np.vdot(to_vector(a), to_vector(b))
        assert overlap(a, b) == pytest.approx(expected, abs=1e-12)
        assert overlap(a, b, from_right=True) == pytest.approx(expected, abs=1e-12)

    def test_periodic_overlap_matches_dense(self):
        a = random_mps(4, 2, 2, boundary="periodic", seed=4)
        sites = a.sites
        # periodic amplitudes are traces of matrix products
        amplitudes = np.zeros(16, dtype=complex)
        for index in range(16):
            bits = [(index >> (3 - k)) & 1 for k in range(4)]
            m = np.eye(2)
            for k, bit in enumerate(bits):
                m = m @ sites[k][:, :, bit]
            amplitudes[index] = np.trace(m)
        assert norm_squared(a) == pytest.approx(np.vdot(amplitudes, amplitudes).real, rel=1e-12)

    def test_shape_mismatch_raises(self):
        with pytest.raises(DimensionError):
            overlap(basis_state([0, 0]), basis_state([0, 0, 0]))


class TestExpectations:
    def test_all_up_sigma_z(self):
        assert expect_product(basis_state([0] * 5), {2: SIGMA_Z}) == pytest.approx(1.0)

    def test_aklt_state_is_annihilated_by_bond_projectors(self):
        psi = aklt_mps(6)
        projector = spin_one_projector_two()
        for site in range(5):
            assert abs(expect_two_site(psi, site, projector)) < 1e-12

    def test_two_point_correlator_matches_dense(self):
        psi = random_mps(6, 2, 3, seed=9)
        vector = to_vector(psi)
        vector = vector / np.linalg.norm(vector)
        dims = [2] * 6
        za = embed_operator(SIGMA_Z, [1], dims)
        zb = embed_operator(SIGMA_Z, [4], dims)
        joint = np.vdot(vector, za @ zb @ vector)
        expected = joint - np.vdot(vector, za @ vector) * np.vdot(vector, zb @ vector)
        assert correlation(psi, SIGMA_Z, 1, SIGMA_Z, 4) == pytest.approx(expected, abs=1e-11)

    def test_operator_shape_is_checked(self):
        with pytest.raises(DimensionError):
            expect_product(basis_state([0, 0]), {0: np.eye(3)})


class TestSchmidtSpectrum:
    def test_product_state(self):
        spectrum = schmidt_spectrum(basis_state([0, 1, 0, 1]), 2)
        assert np.allclose(spectrum.coefficients, [1.0])
        assert spectrum.entropy() == pytest.approx(0.0, abs=1e-14)

    def test_aklt_bulk_bond_has_two_nearly_equal_values(self):
        psi = aklt_mps(8)
        spectrum = schmidt_spectrum(psi, 4)
        assert np.allclose(spectrum.coefficients, _dense_schmidt(to_vector(psi), 4, 8, d=3)[:2], atol=1e-10)
        # edge corrections decay as 3^-k away from the boundary spins
        assert np.allclose(spectrum.coefficients, [1 / np.sqrt(2)] * 2, atol=2e-2)
        assert spectrum.entropy() == pytest.approx(np.log(2.0), abs=1e-3)

    def test_matches_dense_bipartition(self):
        psi = random_mps(8, 2, 4, seed=13)
        vector = to_vector(psi)
        for cut in (1, 4, 7):
            found = schmidt_spectrum(psi, cut).coefficients
            assert np.allclose(found, _dense_schmidt(vector, cut, 8)[: found.size], atol=1e-10)

    def test_profile_has_one_entry_per_bond(self):
        assert len(entanglement_profile(random_mps(5, 2, 2, seed=0))) == 4


# ------------------------------------------------------------------ #
# Truncation and bounds                                               #
# ------------------------------------------------------------------ #


class TestTruncate:
    def test_large_bond_keeps_state(self):
        psi = canonicalize(random_mps(6, 2, 3, seed=14))
        result = truncate(psi, 8)
        assert result.discarded_weight == pytest.approx(0.0, abs=1e-20)
        assert abs(overlap(psi, result.state)) == pytest.approx(1.0, abs=1e-12)

    def test_singlet_to_product(self):
        result = truncate(singlet_mps(), 1)
        assert result.discarded_weight == pytest.approx(0.5, abs=1e-12)
        assert result.state.max_bond == 1

    def test_truncation_error_is_bounded_by_discarded_weight(self):
        for seed in range(10):
            psi = random_mps(10, 2, 8, seed=seed)
            for bond in (1, 2, 4, 6):
                error, bound = truncation_bound_check(psi, bond)
                assert error <= bound + 1e-12

    def test_rejects_zero_bond(self):
        with pytest.raises(ValueError):
            truncate(singlet_mps(), 0)


class TestApproximationBounds:
    def test_flat_spectrum_below_bond_has_zero_truncation_bound(self):
        flat = np.full(4, 0.25)
        assert approximation_bounds(flat, 4, 0.5).truncation_bound == pytest.approx(0.0)

    def test_tail_bound_dominates_discarded_weight(self, rng):
        for _ in range(20):
            p = rng.random(16)
            p /= p.sum()
            for bond in (1, 3, 8):
                tail = np.sort(p)[::-1][bond:].sum()
                for alpha in (0.25, 0.5, 0.75):
                    assert tail <= approximation_bounds(p, bond, alpha).renyi_tail_bound + 1e-12

    def test_maximally_mixed_qubit(self):
        bounds = approximation_bounds(np.array([0.5, 0.5]), 1, 0.5)
        # exp(log 2 - log 2) with S_1/2 = log 2 and D / (1 - alpha) = 2
        assert bounds.renyi_tail_bound == pytest.approx(1.0)
        assert bounds.truncation_bound == pytest.approx(1.0)

    def test_alpha_outside_unit_interval(self):
        with pytest.raises(DomainError):
            approximation_bounds(np.array([1.0]), 1, 1.0)


# ------------------------------------------------------------------ #
# Serialization                                                       #
# ------------------------------------------------------------------ #


class TestContainers:
    def test_save_and_load(self, tmp_path):
        psi = canonicalize(random_mps(5, 2, 3, seed=6, complex_entries=True), "mixed", center=2)
        path = tmp_path / "state.h5"
        save_mps(path, psi)
        loaded = load_mps(path)
        assert loaded.canonical == CanonicalForm.MIXED and loaded.center == 2
        assert all(np.array_equal(a, b) for a, b in zip(psi.sites, loaded.sites))

    def test_wrong_format_is_rejected(self, tmp_path):
        path = tmp_path / "other.h5"
        with h5py.File(path, "w") as handle:
            handle.attrs["format"] = "something-else"
        with pytest.raises(DimensionError, match="expected"):
            load_mps(path)
