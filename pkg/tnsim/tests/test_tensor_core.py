"""Tests for the tensor-core primitives."""

import numpy as np
import pytest
from scipy.sparse.linalg import LinearOperator

from config import settings
from exceptions import ConditioningError, DimensionError, NumericInputError
from modules.tensor_core import (
    contract,
    eig_smallest,
    lanczos_smallest,
    numerical_rank,
    operator_schmidt,
    orthogonal_complement,
    project_psd,
    solve_hermitian,
    svd_econ,
    truncated_svd,
)

from .conftest import random_hermitian


# ------------------------------------------------------------------ #
# Contraction and SVD                                                 #
# ------------------------------------------------------------------ #


class TestContract:
    def test_matches_tensordot_ordering(self, rng):
        x = rng.standard_normal((2, 3, 4))
        y = rng.standard_normal((4, 5, 3))
        result = contract(x, [1, 2], y, [2, 0])
        assert result.shape == (2, 5)
        assert np.allclose(result, np.einsum("abc,cdb->ad", x, y))

    def test_full_contraction_is_scalar(self, rng):
        x = rng.standard_normal((3, 3))
        assert contract(x, [0, 1], x, [0, 1]).shape == ()

    def test_extent_mismatch_raises(self, rng):
        with pytest.raises(DimensionError, match="extent mismatch"):
            contract(rng.standard_normal((2, 3)), [1], rng.standard_normal((4, 2)), [0])

    def test_duplicate_index_raises(self, rng):
        x = rng.standard_normal((2, 2))
        with pytest.raises(DimensionError, match="duplicate"):
            contract(x, [0, 0], x, [0, 1])


class TestSvd:
    def test_reconstructs_input(self, rng):
        m = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
        u, s, v = svd_econ(m)
        assert u.shape == (5, 3) and v.shape == (3, 3)
        assert np.allclose(u @ np.diag(s) @ v, m)

    def test_rejects_non_finite(self):
        with pytest.raises(NumericInputError):
            svd_econ(np.array([[1.0, np.nan], [0.0, 1.0]]))

    def test_truncation_reports_discarded_weight(self, rng):
        m = rng.standard_normal((6, 6))
        kept, discarded = truncated_svd(m, 2)
        s = np.linalg.svd(m, compute_uv=False)
        assert kept.s.shape == (2,)
        assert discarded == pytest.approx(np.sum(s[2:] ** 2))

    def test_rank_deficient_matrix_keeps_numerical_rank(self, rng):
        a = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 6))
        kept, discarded = truncated_svd(a, 5)
        assert kept.s.shape == (2,)
        assert discarded < 1e-20
        assert numerical_rank(np.zeros(3)) == 0


class TestOperatorSchmidt:
    def test_channels_rebuild_operator(self, rng):
        op = random_hermitian(rng, 6)
        left, right = operator_schmidt(op, 2, 3)
        rebuilt = sum(np.kron(l, r) for l, r in zip(left, right))
        assert np.allclose(rebuilt, op)

    def test_product_operator_has_one_channel(self, rng):
        a, b = random_hermitian(rng, 2), random_hermitian(rng, 2)
        left, _ = operator_schmidt(np.kron(a, b), 2, 2)
        assert left.shape[0] == 1

    def test_wrong_shape_raises(self):
        with pytest.raises(DimensionError):
            operator_schmidt(np.eye(3), 2, 2)


# ------------------------------------------------------------------ #
# Eigen- and linear solvers                                           #
# ------------------------------------------------------------------ #


class TestEigSmallest:
    def test_dense_standard_problem(self, rng):
        h = random_hermitian(rng, 20)
        pair = eig_smallest(h)
        assert pair.value == pytest.approx(np.linalg.eigvalsh(h)[0], abs=1e-10)
        assert np.allclose(h @ pair.vector, pair.value * pair.vector, atol=1e-8)

    def test_generalized_problem_normalized_in_metric(self, rng):
        h = random_hermitian(rng, 8)
        b = rng.standard_normal((8, 8))
        n = b @ b.T + 8 * np.eye(8)
        pair = eig_smallest(h, n)
        assert np.vdot(pair.vector, n @ pair.vector).real == pytest.approx(1.0)
        residual = h @ pair.vector - pair.value * (n @ pair.vector)
        assert np.linalg.norm(residual) < 1e-8

    def test_projector_restricts_the_search(self, rng):
        h = np.diag(np.arange(5.0))
        ground = np.eye(5)[:, [0]]
        complement = orthogonal_complement(ground)
        pair = eig_smallest(h, projector=complement)
        assert pair.value == pytest.approx(1.0)
        assert abs(pair.vector[0]) < 1e-10

    def test_iterative_branch_matches_dense(self, rng, monkeypatch):
        monkeypatch.setattr(settings, "eig_dense_max_dim", 4)
        h = random_hermitian(rng, 40)
        operator = LinearOperator(h.shape, matvec=lambda v: h @ v, dtype=np.complex128)
        pair = eig_smallest(operator)
        assert pair.value == pytest.approx(np.linalg.eigvalsh(h)[0], abs=1e-8)

    def test_indefinite_metric_raises(self, rng):
        h = random_hermitian(rng, 3)
        with pytest.raises(ConditioningError) as info:
            eig_smallest(h, np.diag([1.0, -1.0, 1.0]))
        assert info.value.smallest_eigenvalue == pytest.approx(-1.0)

    def test_non_hermitian_input_raises(self):
        with pytest.raises(DimensionError, match="Hermitian"):
            eig_smallest(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestLanczos:
    def test_warm_start_with_eigenvector_returns_immediately(self, rng):
        h = random_hermitian(rng, 30)
        w, v = np.linalg.eigh(h)
        pair = lanczos_smallest(lambda x: h @ x, 30, v0=v[:, 0])
        assert pair.value == pytest.approx(w[0], abs=1e-10)


class TestSolveAndProject:
    def test_solve_positive_definite(self, rng):
        b = rng.standard_normal((6, 6))
        a = b @ b.T + np.eye(6)
        rhs = rng.standard_normal(6)
        assert np.allclose(a @ solve_hermitian(a, rhs), rhs)

    def test_singular_but_consistent_system(self):
        a = np.diag([1.0, 2.0, 0.0])
        x = solve_hermitian(a, np.array([1.0, 2.0, 0.0]))
        assert np.allclose(a @ x, [1.0, 2.0, 0.0])

    def test_project_psd_clips_negative_part(self):
        a = np.diag([2.0, -1e-3, 1.0])
        projection = project_psd(a)
        assert np.allclose(projection.matrix, np.diag([2.0, 0.0, 1.0]))
        assert projection.hermitian_defect == 0.0
        assert projection.clipped_weight == pytest.approx(1e-3 / np.linalg.norm(a))

    def test_project_psd_reports_hermitian_defect(self):
        a = np.array([[1.0, 0.1], [0.0, 1.0]])
        assert project_psd(a).hermitian_defect > 0.0
