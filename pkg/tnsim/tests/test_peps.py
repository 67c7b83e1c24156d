"""Tests for PEPS containers, boundary contraction, ALS ground states and evolution."""

import numpy as np
import pytest
from scipy import linalg as sla
from scipy.stats import unitary_group

from config import settings
from exceptions import CapacityError, ConditioningError, DimensionError, UnsupportedModelError
from modules.evolve import EvolutionMode
from modules.mpo import SIGMA_X, SIGMA_Z, field_only_2d, hardcore_bosons_2d, heisenberg, heisenberg_2d
from modules.oracle import dense_hamiltonian, embed_operator, ground_energy, sparse_ground_energy
from modules.peps import (
    GatedPeps,
    LatticePart,
    Peps,
    apply_gate,
    bond_schmidt_reduce,
    conditioned_fit,
    fit_peps,
    four_part_hamiltonians,
    joint_bond_matrix,
    load_peps,
    mott_peps,
    padded_to_bond,
    peps_evolve_step,
    peps_exact_contract,
    peps_expectation,
    peps_ground,
    peps_imaginary_ground,
    peps_norm,
    peps_time_evolution,
    peps_to_vector,
    product_peps,
    random_peps,
    save_peps,
    schmidt_reduce,
    site_occupations,
    trap_mott_occupation,
)
from modules.peps import evolution as peps_evolution
from modules.peps.evolution import K_TOLERANCE, FitResult, part_sequence

from .conftest import random_hermitian

HORIZONTAL = ((0, 0), (0, 1))
VERTICAL = ((0, 1), (1, 1))


def exact_expectation(psi, ops):
    return peps_exact_contract(psi, ops) / peps_exact_contract(psi)


def dense_trotter_step(spec, dt: float, order: int = 2) -> np.ndarray:
    rows, cols = spec.lattice
    dims = [spec.d] * (rows * cols)
    step = np.eye(spec.d ** (rows * cols), dtype=np.complex128)
    parts = four_part_hamiltonians(spec)
    for part, fraction in part_sequence(order):
        for term in parts[part]:
            (i, j), (k, l) = term.bond
            gate = sla.expm(-1j * dt * fraction * term.hamiltonian)
            step = embed_operator(gate, [i * cols + j, k * cols + l], dims) @ step
    return step


def infidelity(a: np.ndarray, b: np.ndarray) -> float:
    return 1.0 - abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)


# ------------------------------------------------------------------ #
# Containers                                                          #
# ------------------------------------------------------------------ #


class TestPepsContainer:
    def test_open_edges_have_extent_one(self):
        with pytest.raises(DimensionError, match="open"):
            Peps(((np.ones((2, 2, 1, 1, 1)),),))

    def test_shared_bonds_must_agree(self):
        a = np.ones((2, 1, 2, 1, 1))
        b = np.ones((2, 3, 1, 1, 1))
        with pytest.raises(DimensionError, match="mismatch"):
            Peps(((a, b),))

    def test_random_shapes(self):
        psi = random_peps(3, 3, 2, 2, seed=0)
        assert psi.site(1, 1).shape == (2, 2, 2, 2, 2)
        assert psi.site(0, 0).shape == (2, 1, 2, 1, 2)
        assert psi.max_bond == 2

    def test_padding_keeps_the_state(self):
        psi = random_peps(2, 3, 2, 2, seed=1)
        assert np.allclose(peps_to_vector(padded_to_bond(psi, 3)), peps_to_vector(psi))

    def test_mott_state_places_particles(self):
        psi = mott_peps([[True, False], [False, True]])
        assert np.allclose(site_occupations(psi, 1), [[1.0, 0.0], [0.0, 1.0]])

    def test_trap_occupation_is_centered(self):
        occupied = trap_mott_occupation(4, 4, 36.0, 3.4)
        assert occupied[1][1] and occupied[2][2]
        assert not occupied[0][0]

    def test_container_round_trip(self, tmp_path):
        psi = random_peps(2, 3, 2, 2, seed=4, complex_entries=True)
        save_peps(tmp_path / "state.h5", psi)
        loaded = load_peps(tmp_path / "state.h5")
        assert (loaded.rows, loaded.cols) == (2, 3)
        assert np.allclose(peps_to_vector(loaded), peps_to_vector(psi))


# ------------------------------------------------------------------ #
# Contraction                                                         #
# ------------------------------------------------------------------ #


class TestContraction:
    def test_product_state_expectation(self):
        theta = 0.3
        psi = product_peps([[np.array([np.cos(theta), np.sin(theta)])] * 2] * 2)
        result = peps_expectation(psi, {(1, 0): SIGMA_Z}, 1)
        assert result.value == pytest.approx(np.cos(2 * theta), abs=1e-12)

    def test_random_three_by_three_matches_exact(self):
        psi = random_peps(3, 3, 2, 2, seed=7, complex_entries=True)
        for ops in ({(1, 1): SIGMA_Z}, {(0, 0): SIGMA_X, (2, 2): SIGMA_Z}, {(0, 2): SIGMA_X, (1, 2): SIGMA_X}):
            result = peps_expectation(psi, ops, dtilde=4)
            assert result.value == pytest.approx(exact_expectation(psi, ops), abs=1e-8)

    @pytest.mark.parametrize("shape", [(2, 2), (2, 3)])
    def test_norm_matches_exact_contraction(self, shape):
        psi = random_peps(*shape, 2, 2, seed=3)
        exact = peps_exact_contract(psi).real
        assert exact > 0.0
        assert peps_norm(psi, 4) == pytest.approx(exact, rel=1e-9)

    def test_exact_contraction_cap(self, monkeypatch):
        monkeypatch.setattr(settings, "peps_exact_max_amplitudes", 64)
        with pytest.raises(CapacityError):
            peps_exact_contract(random_peps(3, 3, 2, 2, seed=0))

    def test_operator_outside_lattice(self):
        with pytest.raises(DimensionError):
            peps_expectation(random_peps(2, 2, 2, 1, seed=0), {(2, 0): SIGMA_Z}, 1)


# ------------------------------------------------------------------ #
# Ground states                                                       #
# ------------------------------------------------------------------ #


class TestPepsGround:
    def test_plaquette_heisenberg(self):
        spec = heisenberg_2d(2, 2)
        result = peps_ground(spec, bond=3, max_sweeps=200, precision=1e-13, seed=0)
        exact = ground_energy(spec)
        assert result.energy == pytest.approx(exact, abs=1e-6)
        assert result.energy >= exact - 1e-9

    def test_field_only_reaches_the_product_state(self):
        spec = field_only_2d(2, 3, h=0.8)
        result = peps_ground(spec, bond=1, max_sweeps=10, precision=1e-12, seed=2)
        assert result.energy == pytest.approx(-0.8 * 6, abs=1e-10)

    def test_chain_spec_is_rejected(self):
        with pytest.raises(UnsupportedModelError):
            peps_ground(heisenberg(4), bond=2)


# ------------------------------------------------------------------ #
# Evolution                                                           #
# ------------------------------------------------------------------ #


class TestFourPartSplit:
    def test_parts_sum_to_the_hamiltonian(self):
        spec = hardcore_bosons_2d(3, 3, v0=2.0, mu=0.5)
        dims = [2] * 9
        total = np.zeros((512, 512), dtype=np.complex128)
        for terms in four_part_hamiltonians(spec).values():
            for term in terms:
                (i, j), (k, l) = term.bond
                total += embed_operator(term.hamiltonian, [3 * i + j, 3 * k + l], dims)
        assert np.allclose(total, dense_hamiltonian(spec), atol=1e-12)

    def test_symmetric_sequence(self):
        sequence = part_sequence(2)
        assert len(sequence) == 7
        assert sequence[3] == (LatticePart.VERTICAL_ODD, 1.0)
        for part in LatticePart:
            assert sum(f for p, f in sequence if p == part) == pytest.approx(1.0)


class TestGatesAndReduction:
    def test_gate_matches_dense_action(self):
        psi = random_peps(2, 2, 2, 2, seed=5, complex_entries=True)
        gate = unitary_group.rvs(4, random_state=1)
        for bond in (HORIZONTAL, VERTICAL):
            (i, j), (k, l) = bond
            expected = embed_operator(gate, [2 * i + j, 2 * k + l], [2] * 4) @ peps_to_vector(psi)
            assert np.allclose(peps_to_vector(apply_gate(psi, bond, gate)), expected)

    def test_small_bond_is_left_alone(self):
        psi = random_peps(2, 2, 2, 2, seed=0)
        assert bond_schmidt_reduce(psi, HORIZONTAL, 2) is psi

    def test_rank_limited_bond_is_exact(self):
        psi = product_peps([[np.array([1.0, 0.0])] * 2] * 2)
        gate = sla.expm(-0.3j * np.kron(SIGMA_X, SIGMA_X))
        grown = apply_gate(apply_gate(psi, HORIZONTAL, gate), HORIZONTAL, gate)
        assert grown.site(0, 0).shape[2] == 4
        reduced, discarded = schmidt_reduce(grown, HORIZONTAL, 2)
        assert discarded <= 1e-24
        assert np.allclose(peps_to_vector(reduced), peps_to_vector(grown))

    def test_discarded_weight_is_the_dropped_schmidt_tail(self):
        psi = random_peps(2, 2, 2, 4, seed=9)
        singular = np.linalg.svd(joint_bond_matrix(psi, VERTICAL), compute_uv=False)
        _, discarded = schmidt_reduce(psi, VERTICAL, 2)
        assert discarded == pytest.approx(float(np.sum(singular[2:] ** 2)), rel=1e-10)

    def test_fit_to_itself(self):
        target = random_peps(2, 2, 2, 2, seed=6)
        fit = fit_peps(target, target, dtilde=16)
        assert fit.distance <= 1e-10

    def test_gated_norm_needs_one_grown_layer(self, rng):
        base = random_peps(2, 2, 2, 2, seed=11, complex_entries=True)
        gates = ((HORIZONTAL, sla.expm(-0.3 * random_hermitian(rng, 4))),
                 (((1, 0), (1, 1)), sla.expm(-0.3 * random_hermitian(rng, 4))))
        target = GatedPeps(base, gates)
        grown = peps_to_vector(target.state())
        assert np.vdot(peps_to_vector(base), peps_to_vector(target.norm_ket())) == pytest.approx(
            np.vdot(grown, grown), rel=1e-10)

    def test_reported_distance_is_the_dense_distance(self, rng):
        base = random_peps(2, 2, 2, 2, seed=12, complex_entries=True)
        bonds = (HORIZONTAL, ((1, 0), (1, 1)))
        target = GatedPeps(base, tuple((bond, sla.expm(-0.4j * random_hermitian(rng, 4))) for bond in bonds))
        start = target.state()
        for bond in bonds:
            start = bond_schmidt_reduce(start, bond, 2)
        fit = fit_peps(target, start, dtilde=64, max_sweeps=2)
        b, c = peps_to_vector(target.state()), peps_to_vector(fit.state)
        expected = np.vdot(c - b, c - b).real / np.vdot(b, b).real
        assert fit.distance == pytest.approx(expected, abs=1e-10)
        assert fit.dtilde == 64


class TestConditionedFit:
    def test_negative_distance_raises_dtilde(self, mocker):
        base = random_peps(2, 2, 2, 1, seed=0)
        good = FitResult(base, 1e-4, dtilde=8)
        fit = mocker.patch.object(peps_evolution, "fit_peps", side_effect=[FitResult(base, -1e-3, dtilde=4), good])
        assert conditioned_fit(GatedPeps(base, ()), base, 4, max_sweeps=2, precision=1e-10) is good
        assert [call.args[2] for call in fit.call_args_list] == [4, 8]

    def test_negative_distance_at_the_limit_is_an_error(self, mocker):
        base = random_peps(2, 2, 2, 1, seed=0)
        mocker.patch.object(peps_evolution, "fit_peps", return_value=FitResult(base, -1e-3))
        with pytest.raises(ConditioningError, match="negative"):
            conditioned_fit(GatedPeps(base, ()), base, 4, max_sweeps=2, precision=1e-10, max_dtilde=8)

    def test_rounding_below_tolerance_is_accepted(self, mocker):
        base = random_peps(2, 2, 2, 1, seed=0)
        fit = mocker.patch.object(peps_evolution, "fit_peps",
                                  return_value=FitResult(base, -0.5 * K_TOLERANCE, dtilde=4))
        conditioned_fit(GatedPeps(base, ()), base, 4, max_sweeps=2, precision=1e-10)
        assert fit.call_count == 1


class TestPepsEvolution:
    def test_zero_step_is_identity(self):
        psi = random_peps(2, 2, 2, 2, seed=8)
        spec = hardcore_bosons_2d(2, 2, v0=1.0, mu=0.2)
        result = peps_evolve_step(psi, spec, 0.0, EvolutionMode.REAL, bond=2, dtilde=16)
        assert result.fit_distance <= 1e-10
        overlap = np.vdot(peps_to_vector(psi), peps_to_vector(result.state))
        norms = np.linalg.norm(peps_to_vector(psi)) * np.linalg.norm(peps_to_vector(result.state))
        assert abs(overlap) / norms == pytest.approx(1.0, abs=1e-10)

    def test_field_precession_is_exact(self):
        h, dt = 0.7, 0.1
        psi = mott_peps([[True] * 3] * 2)
        spec = field_only_2d(2, 3, h=h)
        _, rows = peps_time_evolution(psi, spec, dt, 5, bond=1, observables={"sz": {(1, 2): SIGMA_Z}})
        for row in rows:
            assert row.fit_distance == 0.0
            assert row.values["sz"] == pytest.approx(np.cos(2 * h * row.time), abs=1e-10)

    def test_fit_distance_decreases_within_a_sub_step(self):
        spec = hardcore_bosons_2d(2, 2, v0=1.0, mu=0.5)
        psi = padded_to_bond(mott_peps([[True, False], [False, True]]), 2)
        result = peps_evolve_step(psi, spec, 0.2, EvolutionMode.REAL, bond=2, dtilde=16)
        for distances in result.site_distances:
            assert np.all(np.diff(distances) <= 1e-10)

    def test_particle_number_is_tracked(self):
        spec = hardcore_bosons_2d(2, 2, v0=1.0, mu=0.5)
        psi = mott_peps([[True, False], [False, True]])
        _, rows = peps_time_evolution(psi, spec, 0.05, 2, bond=2, dtilde=16, track_particles=True)
        assert rows[0].particle_number == pytest.approx(2.0)
        assert all(abs(row.particle_number - 2.0) <= 1e-2 for row in rows)

    def test_bond_three_fit_pairs_at_most_one_grown_layer(self, mocker):
        bond, eta = 3, 4
        spec = hardcore_bosons_2d(2, 2, v0=1.0, mu=0.5)
        psi = mott_peps([[True, False], [False, True]])
        spy = mocker.spy(peps_evolution, "contract_grid")
        for _ in range(2):
            result = peps_evolve_step(psi, spec, 0.1, EvolutionMode.REAL, bond=bond)
            psi = result.state
            assert min(result.sub_step_distances) >= -K_TOLERANCE
        assert spy.call_count > 0
        for call in spy.call_args_list:
            grid = call.args[0]
            assert max(max(x.shape) for row in grid for x in row) <= bond * bond * eta

    def test_xx_quench_matches_dense_trotter_on_two_by_two(self):
        dt = 0.05
        spec = hardcore_bosons_2d(2, 2, v0=0.0, mu=0.0)
        psi = mott_peps([[True, False], [False, True]])
        step = dense_trotter_step(spec, dt)
        exact = peps_to_vector(psi)
        for _ in range(4):
            psi = peps_evolve_step(psi, spec, dt, EvolutionMode.REAL, bond=4, dtilde=64,
                                   fit_sweeps=30, fit_precision=1e-13).state
            exact = step @ exact
            assert infidelity(peps_to_vector(psi), exact) <= 1e-6


# ------------------------------------------------------------------ #
# Acceptance                                                          #
# ------------------------------------------------------------------ #


@pytest.mark.slow
class TestPepsAcceptance:
    V0, MU = 36.0, 3.4

    def test_trapped_hardcore_bosons_ground_state(self):
        spec = hardcore_bosons_2d(4, 4, v0=self.V0, mu=self.MU)
        start = mott_peps(trap_mott_occupation(4, 4, self.V0, self.MU))
        result = peps_imaginary_ground(spec, start, bond_ladder=(2, 3, 4, 5), dt_schedule=(0.1, 0.03, 0.01),
                                       steps_per_dt=20, polish_sweeps=2)
        assert abs(result.energy - sparse_ground_energy(spec)) <= 5e-4

    def test_fit_distance_drops_with_bond(self):
        spec = hardcore_bosons_2d(4, 4, v0=self.V0, mu=self.MU)
        start = mott_peps(trap_mott_occupation(4, 4, self.V0, self.MU))
        means = {}
        for bond in (2, 3):
            _, rows = peps_time_evolution(start, spec, 0.03, 3, bond=bond)
            means[bond] = float(np.mean([row.fit_distance for row in rows[1:]]))
        assert means[3] < means[2]

    def test_xx_quench_matches_dense_trotter_on_two_by_three(self):
        dt = 0.05
        spec = hardcore_bosons_2d(2, 3, v0=0.0, mu=0.0)
        psi = mott_peps([[True, False, True], [False, True, False]])
        step = dense_trotter_step(spec, dt)
        exact = peps_to_vector(psi)
        for _ in range(3):
            psi = peps_evolve_step(psi, spec, dt, EvolutionMode.REAL, bond=4, dtilde=64,
                                   fit_sweeps=30, fit_precision=1e-13).state
            exact = step @ exact
            assert infidelity(peps_to_vector(psi), exact) <= 1e-6
