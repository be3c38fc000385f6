"""Frozen reference values for the convex-set primitives and dense kernels."""

import numpy as np
import pytest

from robust_split.errors import ProjectionError, UnsupportedOperation
from robust_split.geometry.linalg import (jacobi_eigenvalues, lambda_extremes_sym, operator_norm,
                                          simplex_project, sur)
from robust_split.geometry.minnorm import min_norm, min_norm_single, nnls, polar_membership
from robust_split.geometry.polyhedral import dykstra, project_polyhedron
from robust_split.geometry.sets import (Ball, Box, FinGenCone, Halfspaces, NonnegOrthant, NonposOrthant,
                                        Singleton, WholeSpace, distance, from_json, interior_empty,
                                        is_pointed_cone, normal_cone_generators, polar_generators,
                                        project, support)

GOLDEN = (1 + np.sqrt(5)) / 2


class TestProject:
    def test_nonpos_orthant_clamps(self):
        p, d = project(NonposOrthant(2), [1.0, -1.0])
        np.testing.assert_allclose(p, [0.0, -1.0])
        assert d == pytest.approx(1.0)

    def test_halfspace_closed_form(self):
        p, d = project(Halfspaces([[1.0, -1.0]], [0.0]), [1.0, 0.0])
        np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-12)
        assert d == pytest.approx(1 / np.sqrt(2))

    def test_ball_radial(self):
        p, d = project(Ball([0.0, 0.0], 1.0), [3.0, 4.0])
        np.testing.assert_allclose(p, [0.6, 0.8])
        assert d == pytest.approx(4.0)

    def test_distance_examples(self):
        assert distance(Singleton([0.0, 0.0]), [3.0, 4.0]) == pytest.approx(5.0)
        assert distance(NonnegOrthant(2), [1.0, 1.0]) == 0.0
        assert distance(Box([0, 0], [1, 1]), [2.0, 2.0]) == pytest.approx(np.sqrt(2))

    def test_fingen_cone_projection(self):
        K = FinGenCone([[1.0, 0.0], [1.0, 1.0]])
        p, d = project(K, [0.0, 1.0])
        np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-10)
        assert d == pytest.approx(1 / np.sqrt(2))

    def test_polyhedron_corner(self):
        # x <= 0 and y <= 0 written with redundant scaled rows
        G = [[2.0, 0.0], [0.0, 3.0], [1.0, 1.0]]
        p, d = project(Halfspaces(G, [0, 0, 0]), [1.0, 2.0])
        np.testing.assert_allclose(p, [0.0, 0.0], atol=1e-9)
        assert d == pytest.approx(np.sqrt(5), abs=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            project(NonnegOrthant(2), [1.0, 2.0, 3.0])

    def test_failure_carries_last_iterate_and_gap(self):
        S = Halfspaces([[1.0, 0.0], [-1.0, 0.0]], [-1.0, -1.0])  # x1 <= -1 and x1 >= 1
        with pytest.raises(ProjectionError) as info:
            S.project([0.0, 0.0])
        assert info.value.last.shape == (2,)
        assert info.value.gap > 1e-6


class TestSupport:
    def test_examples(self):
        assert support(Ball([0, 0], 1.0), [0.0, 2.0]) == pytest.approx(2.0)
        # sup over y <= 0 of <y, u>: 0 for u >= 0, unbounded once some u_i < 0
        assert support(NonposOrthant(2), [1.0, 1.0]) == 0.0
        assert support(NonposOrthant(2), [1.0, 2.0]) == 0.0
        assert support(NonposOrthant(2), [-1.0, 2.0]) == np.inf
        assert support(Box([0, 0], [1, 2]), [1.0, -1.0]) == pytest.approx(1.0)
        assert support(Singleton([1.0, 2.0]), [3.0, 1.0]) == pytest.approx(5.0)

    def test_polyhedral_cone(self):
        K = Halfspaces([[1.0, -1.0]], [0.0])
        assert support(K, [2.0, -2.0]) == 0.0
        assert support(K, [1.0, 0.0]) == np.inf

    def test_unsupported(self):
        with pytest.raises(UnsupportedOperation):
            support(Halfspaces([[1.0, 0.0]], [1.0]), [1.0, 0.0])


class TestConeData:
    def test_polar_generators(self):
        np.testing.assert_allclose(polar_generators(NonposOrthant(2)), np.eye(2))
        assert len(polar_generators(WholeSpace(2))) == 0
        np.testing.assert_allclose(polar_generators(Halfspaces(np.eye(2), [0, 0])), np.eye(2))

    def test_normal_cone_generators(self):
        np.testing.assert_allclose(normal_cone_generators(NonposOrthant(2), [0.0, -1.0]), [[1.0, 0.0]])
        assert len(normal_cone_generators(Box([0, 0], [1, 1]), [0.5, 0.5])) == 0
        N = normal_cone_generators(Halfspaces([[1.0, -1.0]], [0.0]), [1.0, 1.0])
        np.testing.assert_allclose(N / np.linalg.norm(N, axis=1, keepdims=True), [[1, -1] / np.sqrt(2)])

    def test_pointed_and_interior(self):
        assert is_pointed_cone(NonposOrthant(3))
        assert not is_pointed_cone(Halfspaces([[1.0, 0.0]], [0.0]))
        assert interior_empty(Halfspaces([[-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]], [0, 0, 0]))
        assert not interior_empty(NonposOrthant(2))

    def test_json_round_trip(self):
        for S in [NonnegOrthant(2), NonposOrthant(3), Box([0, -1], [1, 1]), Ball([1, 2], 0.5),
                  Halfspaces([[1.0, 2.0]], [3.0]), FinGenCone([[1.0, 0.0]]), Singleton([1.0]), WholeSpace(4)]:
            assert from_json(S.to_json()).to_json() == S.to_json()


class TestLinalg:
    def test_simplex_project(self):
        np.testing.assert_allclose(simplex_project([0.5, 0.5]), [0.5, 0.5])
        np.testing.assert_allclose(simplex_project([2.0, 0.0]), [1.0, 0.0])
        np.testing.assert_allclose(simplex_project([1.0, 1.0]), [0.5, 0.5])

    def test_simplex_project_matches_grid(self):
        rng = np.random.default_rng(3)
        t = np.linspace(0, 1, 100_001)
        grid = np.stack([t, 1 - t], axis=1)
        for _ in range(20):
            w = rng.normal(size=2) * 2
            best = grid[np.argmin(np.linalg.norm(grid - w, axis=1))]
            np.testing.assert_allclose(simplex_project(w), best, atol=2e-5)

    def test_lambda_extremes(self):
        assert lambda_extremes_sym(np.eye(2)) == pytest.approx((1.0, 1.0))
        assert lambda_extremes_sym(np.diag([1.0, 4.0])) == pytest.approx((1.0, 4.0))
        assert lambda_extremes_sym([[2.0, 1.0], [1.0, 2.0]]) == pytest.approx((1.0, 3.0))

    def test_jacobi_against_numpy(self):
        rng = np.random.default_rng(0)
        for n in range(1, 7):
            B = rng.normal(size=(n, n))
            S = B + B.T
            np.testing.assert_allclose(np.sort(jacobi_eigenvalues(S)), np.linalg.eigvalsh(S), atol=1e-10)

    def test_operator_norm(self):
        assert operator_norm(np.eye(2)) == pytest.approx(1.0)
        assert operator_norm(3 * np.eye(3)) == pytest.approx(3.0)
        assert operator_norm([[1.0, -1.0], [0.0, 1.0]]) == pytest.approx(GOLDEN)

    def test_sur(self):
        assert sur(np.eye(2)) == pytest.approx(1.0)
        assert sur(np.full((2, 2), 0.5)) == pytest.approx(0.0, abs=1e-7)
        assert sur([[1.0, -1.0], [0.0, 1.0]]) == pytest.approx(1 / GOLDEN)
        # wide matrix: onto, so positive; tall matrix: never onto
        assert sur([[1.0, 0.0, 0.0]]) == pytest.approx(1.0)
        assert sur([[1.0], [0.0]]) == 0.0


class TestMinNorm:
    def test_polar_membership(self):
        assert polar_membership(np.eye(2), [1.0, 1.0])
        assert not polar_membership([[1.0, 0.0]], [0.0, 1.0])
        assert polar_membership([[1.0, 0.0], [1.0, 1.0]], [2.0, 1.0])

    def test_segment_min_norm(self):
        r = min_norm_single([[1.0, 1.0], [1.0, -1.0]])
        np.testing.assert_allclose(r.point, [1.0, 0.0], atol=1e-12)
        assert r.norm == pytest.approx(1.0)
        assert r.gap <= 1e-12

    def test_cone_and_shift(self):
        # conv{(1, 0)} + cone{(-1, 0)} + (0, 2): min norm 2
        r = min_norm_single([[1.0, 0.0]], [[-1.0, 0.0]], [0.0, 2.0])
        assert r.norm == pytest.approx(2.0)
        assert r.lower == pytest.approx(2.0)

    def test_batched_matches_single(self):
        rng = np.random.default_rng(1)
        V = rng.normal(size=(5, 3, 2))
        batch = min_norm(V)
        for s in range(5):
            assert batch.norm[s] == pytest.approx(min_norm_single(V[s]).norm, abs=1e-12)

    def test_nnls(self):
        lam = nnls(np.array([[1.0, 1.0], [0.0, 1.0]]), np.array([[2.0, 1.0]]))
        np.testing.assert_allclose(lam, [[1.0, 1.0]], atol=1e-10)


class TestDykstra:
    def test_square_matches_clamp(self):
        G = np.vstack([np.eye(2), -np.eye(2)])
        h = np.array([1.0, 1.0, 0.0, 0.0])
        X = np.array([[2.0, 3.0], [-1.0, 0.5], [0.5, 0.5]])
        r = dykstra(G, h, X)
        np.testing.assert_allclose(r.points, np.clip(X, 0, 1), atol=1e-8)
        assert r.converged.all()

    def test_empty_system_flagged(self):
        G = np.array([[1.0], [-1.0]])
        h = np.array([-1.0, -1.0])  # x <= -1 and x >= 1
        r = project_polyhedron(G, h, np.array([[0.0]]))
        assert r.likely_empty.all()
