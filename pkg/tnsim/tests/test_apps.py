"""Tests for thermal states, disorder averages, spectra and partition functions."""

import itertools

import numpy as np
import pytest
from scipy import linalg as sla

from exceptions import DimensionError, DomainError, UnsupportedDistributionError
from modules.apps import (
    ClassicalModel,
    DisorderSpec,
    RandomTerm,
    bulk_free_energy_density,
    classical_partition_2d,
    close_boundary,
    density_of_states,
    disorder_average,
    disorder_second_moment,
    gibbs_state,
    ising_model,
    log_z_derivative,
    realization_average,
    spectral_peaks,
    spectrum_from_samples,
    sweep_rows,
    thermal_expectation,
    thermal_partition_network,
    trace_samples,
)
from modules.evolve import Observable, TrotterScheme
from modules.mpo import SIGMA_X, SIGMA_Z, heisenberg, identity_mpo, xx_field
from modules.mps import basis_state, product_mps, to_vector
from modules.oracle import (
    dense_density_of_states,
    dense_hamiltonian,
    embed_operator,
    enumerate_log_z,
    onsager_free_energy_density,
    thermal_data,
    trotter_step_dense,
)


def brute_force_correlation(rows, cols, beta, first, second):
    weights, values = [], []
    for config in itertools.product((1, -1), repeat=rows * cols):
        s = np.asarray(config, dtype=float).reshape(rows, cols)
        energy = -(s[:, :-1] * s[:, 1:]).sum() - (s[:-1, :] * s[1:, :]).sum()
        weights.append(np.exp(-beta * energy))
        values.append(s[first] * s[second])
    weights = np.asarray(weights)
    return float(np.dot(weights, values) / weights.sum())


def random_field_model():
    base = heisenberg(4)
    variables = [
        RandomTerm((1,), SIGMA_Z, (-0.5, 0.5)),
        RandomTerm((2,), SIGMA_X, (0.0, 1.0)),
    ]
    return base, variables


# ------------------------------------------------------------------ #
# Gibbs states                                                        #
# ------------------------------------------------------------------ #


class TestGibbsState:
    def test_infinite_temperature(self):
        result = gibbs_state(heisenberg(4), 0.0, trotter_steps=1, bond=4)
        assert result.log_z == pytest.approx(4 * np.log(2))
        assert result.energy == pytest.approx(0.0, abs=1e-12)
        assert result.free_energy_density is None

    def test_matches_dense_thermodynamics(self):
        spec = heisenberg(4, field=0.3)
        result = gibbs_state(spec, 1.0, trotter_steps=50, bond=16)
        exact = thermal_data(spec, 1.0)
        assert result.log_z == pytest.approx(exact.log_z, abs=1e-3)
        assert result.energy == pytest.approx(exact.energy, abs=1e-3)
        assert result.entropy_identity_defect() <= 1e-10

    def test_local_expectation(self):
        spec = heisenberg(4, field=0.5)
        result = gibbs_state(spec, 0.8, trotter_steps=40, bond=16)
        rho = sla.expm(-0.8 * dense_hamiltonian(spec))
        rho /= np.trace(rho)
        expected = np.trace(rho @ embed_operator(SIGMA_Z, [0], [2] * 4)).real
        assert thermal_expectation(result, {0: SIGMA_Z}).real == pytest.approx(expected, abs=1e-3)

    def test_negative_beta(self):
        with pytest.raises(DomainError):
            gibbs_state(heisenberg(2), -1.0, trotter_steps=1, bond=2)

    def test_log_norm_derivative_matches_energy(self):
        result = gibbs_state(heisenberg(4, field=0.3), 1.0, trotter_steps=100, bond=16)
        assert result.energy_from_log_z is not None
        assert result.energy_consistency_defect() <= 1e-3
        assert result.entropy_in_range

    def test_log_z_derivative_is_exact_for_quadratics(self):
        beta, steps = 1.0, 4
        grid = np.linspace(0.0, beta, steps + 1)
        log_z = 2.0 - 3.0 * grid + 0.5 * grid ** 2
        log_norms = 0.5 * np.diff(log_z)
        assert log_z_derivative(log_norms, beta) == pytest.approx(2.0, abs=1e-12)

    def test_entropy_out_of_range_is_flagged(self):
        result = gibbs_state(heisenberg(6), 2.0, trotter_steps=2, bond=1)
        assert not result.entropy_in_range

    def test_extrapolation_cancels_step_squared_error(self):
        spec = heisenberg(4)
        exact = thermal_data(spec, 2.0).log_z
        plain = gibbs_state(spec, 2.0, trotter_steps=32, bond=16)
        extrapolated = gibbs_state(spec, 2.0, trotter_steps=32, bond=16, extrapolate=True)
        plain_error = abs(plain.log_z - exact)
        assert abs(extrapolated.log_z - exact) <= 0.1 * plain_error
        assert extrapolated.trotter_error == pytest.approx(plain_error, rel=0.2)
        assert extrapolated.entropy_identity_defect() <= 1e-10

    def test_extrapolation_needs_second_order(self):
        with pytest.raises(DomainError):
            gibbs_state(heisenberg(2), 1.0, trotter_steps=4, bond=4, order=1, extrapolate=True)
        with pytest.raises(DomainError):
            gibbs_state(heisenberg(2), 1.0, trotter_steps=1, bond=4, extrapolate=True)


# ------------------------------------------------------------------ #
# Disorder                                                            #
# ------------------------------------------------------------------ #


class TestDisorderSpec:
    def test_one_variable_per_host(self):
        base = heisenberg(3)
        variables = [RandomTerm((1,), SIGMA_Z, (0.0, 1.0)), RandomTerm((1, 2), np.kron(SIGMA_Z, SIGMA_Z), (1.0,))]
        with pytest.raises(DimensionError):
            DisorderSpec.uniform(base, variables)

    def test_probabilities_must_sum_to_one(self):
        base, variables = random_field_model()
        with pytest.raises(DomainError):
            DisorderSpec(base, tuple(variables), marginals=(np.array([0.5, 0.4]), np.array([0.5, 0.5])))

    def test_distribution_is_required(self):
        base, variables = random_field_model()
        with pytest.raises(UnsupportedDistributionError):
            DisorderSpec(base, tuple(variables))

    def test_joint_table_from_mapping(self):
        base, variables = random_field_model()
        dspec = DisorderSpec.from_distribution(base, variables, {(0, 0): 0.25, (1, 1): 0.75})
        assert dspec.probability((1, 1)) == pytest.approx(0.75)
        assert dspec.probability((0, 1)) == 0.0


class TestDisorderAverage:
    DT, STEPS = 0.05, 10

    def observables(self):
        return [Observable(f"sz_{k}", {k: SIGMA_Z}) for k in range(4)]

    def check_against_realizations(self, dspec, squared=False):
        psi0 = basis_state([0, 1, 0, 1])
        run = disorder_second_moment if squared else disorder_average
        bond = 64 if squared else 16
        result = run(dspec, psi0, TrotterScheme.real_time(self.DT), bond, self.STEPS * self.DT, self.observables())
        expected = realization_average(dspec, to_vector(psi0), self.DT, self.STEPS, self.observables(), squared=squared)
        assert len(result.times) == self.STEPS + 1
        for name, series in expected.items():
            assert np.allclose(result.values[name], series, atol=1e-8)

    def test_product_distribution(self):
        base, variables = random_field_model()
        self.check_against_realizations(DisorderSpec.uniform(base, variables))

    def test_correlated_distribution(self):
        base, variables = random_field_model()
        self.check_against_realizations(DisorderSpec.from_distribution(base, variables, {(0, 1): 0.3, (1, 0): 0.7}))

    def test_second_moment(self):
        base, variables = random_field_model()
        self.check_against_realizations(DisorderSpec.uniform(base, variables), squared=True)

    def test_adiabatic_ramp_needs_initial_hamiltonian(self):
        base, variables = random_field_model()
        with pytest.raises(DomainError):
            disorder_average(DisorderSpec.uniform(base, variables), basis_state([0, 1, 0, 1]),
                             TrotterScheme.real_time(0.1), 4, 1.0, self.observables(), evolution="adiabatic")


# ------------------------------------------------------------------ #
# Density of states                                                   #
# ------------------------------------------------------------------ #


class TestDensityOfStates:
    def test_trace_samples_match_dense_trotter(self):
        spec = heisenberg(3)
        samples = trace_samples(spec, 0.5, 0.05, bond=16)
        step = trotter_step_dense(spec, 0.05j, 2)
        expected = [np.trace(np.linalg.matrix_power(step, k)) for k in range(len(samples))]
        assert samples[0] == pytest.approx(8.0)
        assert np.allclose(samples, expected, atol=1e-8)

    def test_synthetic_line(self):
        dt, half = 0.1, 100
        omega = 2.0 * np.pi * 5 / ((2 * half + 1) * dt)
        samples = 2.0 * np.exp(-1j * omega * dt * np.arange(half + 1))
        result = spectrum_from_samples(samples, dt)
        assert result.metadata["parseval_ratio"] == pytest.approx(1.0, abs=1e-10)
        assert np.sum(result.spectrum).real * result.bin_width == pytest.approx(2.0, abs=1e-10)
        assert np.allclose(spectral_peaks(result), [omega])

    def test_peaks_sit_on_eigenvalues(self):
        spec = heisenberg(3)
        result = density_of_states(spec, t_max=10.0, dt=0.05, bond=16)
        energies = np.unique(np.round(dense_density_of_states(spec), 8))
        peaks = spectral_peaks(result)
        for peak in peaks:
            assert np.min(np.abs(energies - peak)) <= 2 * result.bin_width
        for energy in energies:
            assert np.min(np.abs(peaks - energy)) <= 2 * result.bin_width

    def test_transform_matches_explicit_sum(self, rng):
        dt, half = 0.2, 6
        samples = rng.normal(size=half + 1) + 1j * rng.normal(size=half + 1)
        samples[0] = samples[0].real
        result = spectrum_from_samples(samples, dt, window="rectangular")
        k = np.arange(-half, half + 1)
        points = 2 * half + 1
        explicit = np.exp(2j * np.pi * np.outer(k, k) / points) @ result.f_samples
        assert np.allclose(result.spectrum, dt * explicit / (2.0 * np.pi), atol=1e-12)
        assert np.allclose(result.omegas, 2.0 * np.pi * k / (points * dt))

    def test_unknown_window(self):
        with pytest.raises(DomainError, match="unknown window"):
            density_of_states(heisenberg(2), 1.0, 0.1, 4, window="blackman")

    def test_time_range(self):
        with pytest.raises(DomainError):
            density_of_states(heisenberg(2), 0.01, 0.1, 4)


# ------------------------------------------------------------------ #
# Partition functions                                                 #
# ------------------------------------------------------------------ #


class TestClassicalPartition:
    def test_exact_boundary_matches_enumeration(self):
        result = classical_partition_2d(ising_model(3, 3), 0.4, dtilde=8)
        assert result.log_z == pytest.approx(enumerate_log_z(3, 3, 0.4), abs=1e-10)
        assert result.max_delta_k <= 1e-20

    def test_inhomogeneous_couplings(self, rng):
        j_h, j_v = rng.uniform(0.5, 1.5, (4, 3)), rng.uniform(0.5, 1.5, (3, 4))
        model = ising_model(4, 4, j_h=j_h, j_v=j_v)
        result = classical_partition_2d(model, 0.3, dtilde=16)
        assert result.log_z == pytest.approx(enumerate_log_z(4, 4, 0.3, j_h, j_v), abs=1e-9)

    def test_infinite_temperature(self):
        assert classical_partition_2d(ising_model(3, 4), 0.0, dtilde=2).log_z == pytest.approx(12 * np.log(2))

    def test_correlation_insertion(self):
        values = np.array([1.0, -1.0])
        result = classical_partition_2d(ising_model(3, 3), 0.5, dtilde=8,
                                        observables={"ss": {(0, 0): values, (1, 1): values}})
        expected = brute_force_correlation(3, 3, 0.5, (0, 0), (1, 1))
        assert result.observables["ss"] == pytest.approx(expected, abs=1e-10)

    def test_boundary_bond_grows_on_demand(self):
        result = classical_partition_2d(ising_model(4, 4), 0.4, dtilde=1, delta_k_tolerance=1e-14, max_dtilde=16)
        assert result.dtilde > 1
        assert result.log_z == pytest.approx(enumerate_log_z(4, 4, 0.4), abs=1e-8)

    def test_lattice_too_small(self):
        with pytest.raises(DimensionError):
            ClassicalModel(1, 3, 2, np.zeros((1, 2, 2, 2)), np.zeros((0, 3, 2, 2)))

    def test_sizes_must_be_consecutive(self):
        with pytest.raises(DomainError):
            bulk_free_energy_density(lambda size: ising_model(size, size), (4, 6, 8), 0.3, 8)


class TestThermalPartitionNetwork:
    def test_matches_dense_trotter_trace(self):
        spec = heisenberg(4)
        beta, steps = 1.0, 20
        result = thermal_partition_network(spec, beta, steps, dtilde=16)
        step = trotter_step_dense(spec, beta / steps, 2)
        expected = np.log(np.trace(np.linalg.matrix_power(step, steps)).real)
        assert result.log_z == pytest.approx(expected, abs=1e-7)
        assert result.log_z == pytest.approx(thermal_data(spec, beta).log_z, abs=1e-2)

    def test_infinite_temperature(self):
        assert thermal_partition_network(heisenberg(3), 0.0, 1, 4).log_z == pytest.approx(3 * np.log(2))


class TestBoundary:
    def test_identity_rows_keep_the_value(self):
        top = product_mps([np.array([1.0, 2.0])] * 3)
        result = sweep_rows(top, [identity_mpo(2, 3)] * 2, dtilde=1)
        assert np.exp(result.log_scale) * close_boundary(result.state) == pytest.approx(27.0)

    def test_rejects_empty_boundary_bond(self):
        with pytest.raises(DomainError):
            sweep_rows(product_mps([np.ones(2)] * 2), [], dtilde=0)


# ------------------------------------------------------------------ #
# Acceptance                                                          #
# ------------------------------------------------------------------ #


@pytest.mark.slow
class TestApplicationAcceptance:
    @pytest.mark.parametrize("beta", [0.5, 2.0])
    def test_heisenberg_free_energy(self, beta):
        spec = heisenberg(6)
        result = gibbs_state(spec, beta, trotter_steps=64, bond=32, extrapolate=True)
        exact = thermal_data(spec, beta)
        assert result.free_energy_density == pytest.approx(exact.free_energy_density, rel=1e-4)
        assert result.entropy_identity_defect() <= 1e-8
        assert result.energy_consistency_defect() <= 1e-3
        assert result.entropy_in_range

    def test_random_field_xx_chain(self):
        n, dt, steps = 6, 0.05, 20
        dspec = DisorderSpec.uniform(xx_field(n), [RandomTerm((k,), SIGMA_Z, (-0.5, 0.5)) for k in range(n)])
        psi0 = basis_state([0, 1] * 3)
        observables = [Observable(f"sz_{k}", {k: SIGMA_Z}) for k in range(n)]
        result = disorder_average(dspec, psi0, TrotterScheme.real_time(dt), 64, steps * dt, observables)
        expected = realization_average(dspec, to_vector(psi0), dt, steps, observables)
        for name, series in expected.items():
            assert np.max(np.abs(result.values[name] - series)) <= 1e-6

    def test_four_by_four_ising(self):
        exact = enumerate_log_z(4, 4, 0.4)
        result = classical_partition_2d(ising_model(4, 4), 0.4, dtilde=16)
        assert abs(result.log_z - exact) <= 1e-9 * abs(exact)

    @pytest.mark.parametrize("beta", [0.3, 0.6])
    def test_bulk_free_energy_approaches_onsager(self, beta):
        value = bulk_free_energy_density(lambda size: ising_model(size, size), (14, 15, 16), beta, dtilde=32)
        assert value == pytest.approx(onsager_free_energy_density(beta), abs=1e-3)

    def test_heisenberg_density_of_states(self):
        spec = heisenberg(4)
        t_max = 50.0
        result = density_of_states(spec, t_max=t_max, dt=0.05, bond=16)
        energies = dense_density_of_states(spec)
        peaks = spectral_peaks(result)
        assert len(peaks) > 0
        for peak in peaks:
            assert np.min(np.abs(energies - peak)) <= 2.0 * np.pi / t_max
