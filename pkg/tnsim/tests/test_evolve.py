"""Tests for Trotter layers, TEBD, variational compression and iTEBD."""

import numpy as np
import pytest
from scipy import linalg as sla

from config import settings
from exceptions import DimensionError, DomainError, InvalidSchemeError, UnsupportedModelError
from modules.evolve import (
    EvolutionMode,
    Observable,
    SchemeKind,
    TruncationMethod,
    TrotterScheme,
    compress_product,
    compress_variational,
    evolve,
    fixed_point,
    itebd,
    layer_to_mpo,
    product_norm_squared,
    state_distance,
    tebd_step,
    trotter_layers,
    truncate_uniform,
    zip_up,
    zz_channel_mpo,
)
from modules.mpo import (
    SIGMA_X,
    SIGMA_Z,
    HamiltonianSpec,
    MatrixProductOperator,
    Term,
    apply_mpo,
    heisenberg,
    ising_transverse,
    to_dense,
)
from modules.mps import basis_state, random_mps, to_vector, truncate
from modules.oracle import (
    dense_hamiltonian,
    embed_operator,
    evolve_dense,
    ground_energy,
    run_dense_trajectory,
    site_expectation,
    transverse_ising_energy_density,
    trotter_step_dense,
)


def sz_observables(n: int):
    return [Observable(f"sz_{k}", {k: SIGMA_Z}) for k in range(n)]


def random_mpo(n: int, d_out: int, d_in: int, bond: int, rng: np.random.Generator) -> MatrixProductOperator:
    dims = [1] + [bond] * (n - 1) + [1]
    shapes = [(dims[k], dims[k + 1], d_out, d_in) for k in range(n)]
    return MatrixProductOperator(tuple(rng.normal(size=s) + 1j * rng.normal(size=s) for s in shapes))


def flipped_center(n: int):
    config = [0] * n
    config[n // 2] = 1
    return basis_state(config)


def layers_dense(spec: HamiltonianSpec, scheme: TrotterScheme) -> np.ndarray:
    dims = [spec.d] * spec.n
    step = np.eye(spec.d ** spec.n, dtype=complex)
    for layer in trotter_layers(spec, scheme):
        step = to_dense(layer_to_mpo(layer, dims)) @ step
    return step


# ------------------------------------------------------------------ #
# Trotter schemes and layers                                          #
# ------------------------------------------------------------------ #


class TestTrotterScheme:
    def test_order_is_validated(self):
        with pytest.raises(InvalidSchemeError):
            TrotterScheme(order=3)

    def test_real_time_needs_imaginary_dt(self):
        with pytest.raises(InvalidSchemeError):
            TrotterScheme.imaginary_time(0.1).check_mode(EvolutionMode.REAL)

    def test_imaginary_time_needs_positive_dt(self):
        with pytest.raises(InvalidSchemeError):
            TrotterScheme.real_time(0.1).check_mode(EvolutionMode.IMAGINARY)
        with pytest.raises(InvalidSchemeError):
            TrotterScheme(dt=-0.1).check_mode(EvolutionMode.IMAGINARY)

    def test_step_length(self):
        assert TrotterScheme.real_time(0.03).step_length == pytest.approx(0.03)


class TestTrotterLayers:
    @pytest.mark.parametrize("order", [1, 2])
    def test_even_odd_matches_dense_step(self, order):
        spec = heisenberg(5, field=0.3)
        scheme = TrotterScheme.real_time(0.1, order=order)
        assert np.allclose(layers_dense(spec, scheme), trotter_step_dense(spec, scheme.dt, order), atol=1e-12)

    def test_second_order_error_scaling(self):
        spec = ising_transverse(4, h=0.8)
        exact = sla.expm(-0.02j * dense_hamiltonian(spec))
        for kind in (SchemeKind.EVEN_ODD, SchemeKind.CHANNEL_SPLIT):
            step = layers_dense(spec, TrotterScheme.real_time(0.02, kind=kind))
            assert np.linalg.norm(step - exact, 2) <= 1e-4

    def test_channel_layers_are_mpos(self):
        layers = trotter_layers(ising_transverse(4, h=1.0), TrotterScheme.real_time(0.1, kind="channel_split"))
        # zz / x split: half, full, half
        assert len(layers) == 3
        assert all(layer.is_mpo for layer in layers)

    def test_non_commuting_channel_is_rejected(self):
        spec = HamiltonianSpec(2, 2, (Term((0,), SIGMA_X, 1.0, "mixed"), Term((0,), SIGMA_Z, 1.0, "mixed")))
        with pytest.raises(InvalidSchemeError, match="non-commuting"):
            trotter_layers(spec, TrotterScheme.real_time(0.1, kind="channel_split"))

    def test_zz_channel_mpo_matches_exponential(self):
        n, delta = 4, 0.3
        dense = sum(embed_operator(np.kron(SIGMA_Z, SIGMA_Z), [k, k + 1], [2] * n) for k in range(n - 1))
        assert np.allclose(to_dense(zz_channel_mpo(n, delta)), sla.expm(delta * dense), atol=1e-12)


# ------------------------------------------------------------------ #
# Finite-chain evolution                                              #
# ------------------------------------------------------------------ #


class TestEvolve:
    @pytest.mark.parametrize("method", [TruncationMethod.TEBD, TruncationMethod.VARIATIONAL])
    def test_untruncated_run_matches_dense_trotter(self, method):
        n, steps, delta = 6, 10, 0.05
        spec = heisenberg(n)
        psi0 = flipped_center(n)
        scheme = TrotterScheme.real_time(delta)
        trajectory = evolve(psi0, spec, scheme, 8, steps * delta, observables=sz_observables(n), method=method)
        assert len(trajectory.rows) == steps + 1

        def observe(vector):
            return [site_expectation(vector, SIGMA_Z, k, [2] * n).real for k in range(n)]

        expected = run_dense_trajectory(trotter_step_dense(spec, scheme.dt, 2), to_vector(psi0), steps, observe)
        for k in range(n):
            assert np.allclose(trajectory.series(f"sz_{k}"), expected[:, k], atol=1e-6)

    def test_tebd_reports_discarded_weight_when_truncating(self):
        spec = heisenberg(8)
        psi0 = basis_state([0, 1] * 4)
        trajectory = evolve(psi0, spec, TrotterScheme.real_time(0.1), 2, 0.5)
        assert sum(row.discarded_weight for row in trajectory.rows) > 0.0
        assert trajectory.state.max_bond <= 2

    def test_imaginary_time_reaches_ground_state(self):
        spec = heisenberg(6)
        psi0 = basis_state([0, 1] * 3)
        trajectory = evolve(psi0, spec, TrotterScheme.imaginary_time(0.02), 8, 8.0,
                            mode=EvolutionMode.IMAGINARY, track_energy=True)
        assert trajectory.energies[-1] == pytest.approx(ground_energy(spec), rel=1e-3)

    def test_adaptive_steps_shrink_dt(self):
        spec = heisenberg(4)
        trajectory = evolve(basis_state([0, 1, 0, 1]), spec, TrotterScheme.imaginary_time(0.1), 4, 20.0,
                            mode=EvolutionMode.IMAGINARY, adaptive=True, adaptive_tolerance=1e-6)
        assert abs(trajectory.final_dt) < 0.1

    def test_adaptive_requires_imaginary_time(self):
        with pytest.raises(DomainError):
            evolve(basis_state([0, 1]), heisenberg(2), TrotterScheme.real_time(0.1), 2, 1.0, adaptive=True)

    def test_negative_time_is_rejected(self):
        with pytest.raises(DomainError):
            evolve(basis_state([0, 1]), heisenberg(2), TrotterScheme.real_time(0.1), 2, -1.0)

    def test_mode_mismatch_is_rejected(self):
        with pytest.raises(InvalidSchemeError):
            evolve(basis_state([0, 1]), heisenberg(2), TrotterScheme.imaginary_time(0.1), 2, 1.0)


class TestTebdStep:
    def test_untruncated_layer_is_exact(self):
        layer = trotter_layers(heisenberg(6), TrotterScheme.real_time(0.1))[0]
        psi = random_mps(6, 2, 2, seed=3)
        result = tebd_step(psi, layer, 16)
        expected = to_dense(layer_to_mpo(layer, [2] * 6)) @ to_vector(psi)
        assert np.allclose(to_vector(result.state), expected)
        assert result.discarded_weight <= 1e-20

    def test_truncation_caps_the_bond(self):
        layer = trotter_layers(heisenberg(6), TrotterScheme.real_time(0.3))[1]
        result = tebd_step(random_mps(6, 2, 4, seed=1), layer, 1)
        # odd layer: gates on (1, 2) and (3, 4)
        assert result.state.bond_dims[1] == 1
        assert result.state.bond_dims[3] == 1
        assert result.discarded_weight > 0.0

    def test_mpo_layer_is_rejected(self):
        layer = trotter_layers(ising_transverse(4, h=1.0), TrotterScheme.real_time(0.1, kind="channel_split"))[0]
        with pytest.raises(DimensionError):
            tebd_step(random_mps(4, 2, 2, seed=0), layer, 4)


class TestCompression:
    def test_never_worse_than_schmidt_truncation(self):
        target = random_mps(8, 2, 8, seed=5)
        result = compress_variational(target, 3, precision=1e-10)
        truncated = truncate(target, 3).state
        assert result.distance <= state_distance(truncated, target) + 1e-10

    def test_representable_target_is_exact(self):
        target = random_mps(6, 2, 3, seed=2)
        result = compress_variational(target, 4)
        assert result.distance <= 1e-10


class TestProductCompression:
    def test_distance_matches_dense_product(self, rng):
        op, ket = random_mpo(6, 2, 2, 3, rng), random_mps(6, 2, 4, seed=1, complex_entries=True)
        exact = to_dense(op) @ to_vector(ket)
        result = compress_product(op, ket, 5, precision=1e-12)
        assert result.norm_exact
        assert result.state.max_bond <= 5
        assert result.target_norm_squared == pytest.approx(np.vdot(exact, exact).real, rel=1e-10)
        assert result.distance == pytest.approx(np.linalg.norm(to_vector(result.state) - exact), rel=1e-6, abs=1e-9)

    def test_sweeps_improve_on_the_zip_up_start(self, rng):
        op, ket = random_mpo(6, 2, 2, 3, rng), random_mps(6, 2, 4, seed=3)
        exact = to_dense(op) @ to_vector(ket)
        start = zip_up(op, ket, 4)
        result = compress_product(op, ket, 4, precision=1e-12)
        assert start.max_bond <= 4
        assert result.distance <= np.linalg.norm(to_vector(start) - exact) + 1e-10

    def test_small_product_is_applied_exactly(self, rng):
        op, ket = random_mpo(5, 2, 2, 2, rng), random_mps(5, 2, 3, seed=0)
        result = compress_product(op, ket, 6)
        assert result.distance == 0.0
        assert np.allclose(to_vector(result.state), to_dense(op) @ to_vector(ket))

    def test_norm_without_the_product(self, rng):
        op, ket = random_mpo(5, 2, 2, 3, rng), random_mps(5, 2, 3, seed=7, complex_entries=True)
        product = apply_mpo(op, ket)
        assert product_norm_squared(op, ket) == pytest.approx(np.vdot(to_vector(product), to_vector(product)).real,
                                                              rel=1e-10)

    def test_rectangular_operator(self, rng):
        op, ket = random_mpo(5, 3, 2, 2, rng), random_mps(5, 2, 3, seed=4)
        exact = to_dense(op) @ to_vector(ket)
        assert np.allclose(to_vector(zip_up(op, ket, 64)), exact)
        result = compress_product(op, ket, 3, precision=1e-12)
        assert result.state.phys_dims == (3,) * 5
        assert result.distance == pytest.approx(np.linalg.norm(to_vector(result.state) - exact), rel=1e-6, abs=1e-9)

    def test_large_norm_contraction_falls_back_to_the_zip_up_weight(self, rng, monkeypatch):
        monkeypatch.setattr(settings, "product_norm_max_entries", 1)
        op, ket = random_mpo(6, 2, 2, 3, rng), random_mps(6, 2, 4, seed=1)
        result = compress_product(op, ket, 4)
        assert not result.norm_exact
        assert result.state.max_bond <= 4
        assert result.distance > 0.0

    def test_mismatched_dims_are_rejected(self, rng):
        with pytest.raises(DimensionError):
            compress_product(random_mpo(4, 2, 3, 2, rng), random_mps(4, 2, 2, seed=0), 2)


# ------------------------------------------------------------------ #
# Infinite chains                                                     #
# ------------------------------------------------------------------ #


class TestItebd:
    @pytest.mark.parametrize("kind", [SchemeKind.CHANNEL_SPLIT, SchemeKind.EVEN_ODD])
    def test_gapped_transverse_ising(self, kind):
        spec = ising_transverse(4, h=1.5, boundary="periodic")
        result = itebd(spec, kind, bond=8, dt_schedule=[0.1, 0.05, 0.01], tolerance=1e-10, max_steps_per_dt=500)
        assert result.energy_density == pytest.approx(transverse_ising_energy_density(1.5), abs=5e-4)
        assert not result.degenerate

    def test_warm_started_fixed_point_matches_dense_eigenvector(self, rng):
        a = rng.normal(size=(10, 10, 2)) + 1j * rng.normal(size=(10, 10, 2))
        transfer = np.einsum("abs,cds->bdac", a.conj(), a).reshape(100, 100)
        values, vectors = np.linalg.eig(transfer)
        top = int(np.argmax(np.abs(values)))
        expected = vectors[:, top].reshape(10, 10)
        expected = expected / np.trace(expected)
        start = expected + 0.01 * np.eye(10)
        eta, x = fixed_point(a, "left", start)
        assert eta == pytest.approx(abs(values[top]), rel=1e-8)
        assert np.allclose(x / np.trace(x), expected, atol=1e-8)

    def test_uncut_truncation_returns_schmidt_fixed_points(self, rng):
        a = rng.normal(size=(4, 4, 2)) + 1j * rng.normal(size=(4, 4, 2))
        new, dropped, (x_l, x_r) = truncate_uniform(a, bond=4)
        assert dropped == pytest.approx(0.0, abs=1e-12)
        eta_l, exact_l = fixed_point(new, "left")
        _, exact_r = fixed_point(new, "right")
        assert eta_l == pytest.approx(1.0, rel=1e-8)
        assert np.allclose(x_l / np.trace(x_l), exact_l / np.trace(exact_l), atol=1e-8)
        assert np.allclose(x_r / np.trace(x_r), exact_r / np.trace(exact_r), atol=1e-8)

    def test_non_uniform_chain_is_rejected(self):
        spec = HamiltonianSpec(3, 2, (Term((0,), SIGMA_X, 1.0),), boundary="periodic")
        with pytest.raises(UnsupportedModelError):
            itebd(spec, SchemeKind.CHANNEL_SPLIT, bond=2, dt_schedule=[0.1])

    def test_empty_schedule(self):
        with pytest.raises(DimensionError):
            itebd(ising_transverse(4, h=1.0, boundary="periodic"), SchemeKind.CHANNEL_SPLIT, 2, [])


# ------------------------------------------------------------------ #
# Acceptance                                                          #
# ------------------------------------------------------------------ #


@pytest.mark.slow
class TestEvolutionAcceptance:
    @pytest.mark.parametrize("method", [TruncationMethod.TEBD, TruncationMethod.VARIATIONAL])
    def test_flipped_spin_quench(self, method):
        n, delta, steps = 10, 0.03, 50
        spec = heisenberg(n)
        psi0 = flipped_center(n)
        trajectory = evolve(psi0, spec, TrotterScheme.real_time(delta), 5, steps * delta,
                            observables=sz_observables(n), method=method)
        states = evolve_dense(dense_hamiltonian(spec), to_vector(psi0), 1j * delta, steps)
        for site in (n // 2 - 1, n // 2, n // 2 + 1):
            exact = [site_expectation(v, SIGMA_Z, site, [2] * n).real for v in states]
            assert np.max(np.abs(trajectory.series(f"sz_{site}") - exact)) <= 1e-2

    def test_critical_ising_channel_split(self):
        spec = ising_transverse(4, h=1.0, boundary="periodic")
        result = itebd(spec, SchemeKind.CHANNEL_SPLIT, bond=16,
                       dt_schedule=[0.1, 0.02, 0.005, 0.001], tolerance=1e-8, max_steps_per_dt=2000)
        assert abs(abs(result.energy_density) - 4.0 / np.pi) <= 1e-5
