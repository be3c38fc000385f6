"""Distances to the robust solution set and sampled error-bound ratios."""

import numpy as np
import pytest

from robust_split.errors import NoSamplesError, UnsupportedOperation
from robust_split.geometry.sets import Ball, NonposOrthant, WholeSpace
from robust_split.instances import BUILTINS, ex3_1_infeasible, ex3_2_tau1, ex3_3_sqrt2, ex4_2_polyhedral
from robust_split.oracle import empirical_tau, grid_solv_distances, solv_distance, solv_distances
from robust_split.residual import Problem, residual_values
from robust_split.uncertainty import UncertaintySet


def test_reference_distances():
    assert solv_distance(ex4_2_polyhedral(), [1.0, 1.0]) == pytest.approx(np.sqrt(2))
    assert solv_distance(ex3_3_sqrt2(), [-1.0, -1.0]) == 0.0
    for x in ([0.5], [-3.0], [4.0]):
        assert solv_distance(ex3_1_infeasible(), x) == np.inf


@pytest.mark.parametrize("name", ["ex3_3_sqrt2", "ex4_2_polyhedral"])
def test_exact_agrees_with_grid(name):
    P = BUILTINS[name].build()
    X = np.random.default_rng(2).uniform(-4, 4, (25, 2))
    exact, _ = solv_distances(P, X)
    step = 10.0 / 500
    grid = grid_solv_distances(P, X, box_radius=10.0, step=step)
    assert np.all(np.abs(exact - grid) <= 2 * step)


def test_grid_fallback_for_ball():
    P = Problem(Ball([0.0, 0.0], 1.0), NonposOrthant(2), UncertaintySet([np.eye(2)]))
    # Solv is the lower half-disc; nearest point to (2, -2) is (0, -1)
    d = solv_distance(P, [2.0, -2.0], box_radius=3.0)
    assert d == pytest.approx(np.sqrt(5), abs=2 * 3.0 / 500)


def test_grid_fallback_refuses_high_dimension():
    P = Problem(Ball(np.zeros(4), 1.0), NonposOrthant(4), UncertaintySet([np.eye(4)]))
    with pytest.raises(UnsupportedOperation):
        solv_distance(P, np.ones(4))


@pytest.mark.parametrize("name", ["ex3_3_sqrt2", "ex4_2_polyhedral", "ex3_2_tau1"])
def test_zero_distance_iff_feasible(name):
    P = BUILTINS[name].build()
    rng = np.random.default_rng(9)
    X = rng.uniform(-3, 3, (300, P.n))
    X[::3] = np.minimum(X[::3], 0)  # plenty of feasible points too
    d, _ = solv_distances(P, X)
    p = residual_values(P, X)[0]
    feas = p <= P.tol.tol_feas
    assert np.all((d <= 1e-9) == feas)


def test_empirical_tau_examples():
    r = empirical_tau(ex3_2_tau1(), samples=2000)
    assert r.sup_ratio <= 1 + 1e-6
    r = empirical_tau(ex3_3_sqrt2(), samples=2000)
    assert r.sup_ratio <= np.sqrt(2) + 1e-6
    r = empirical_tau(ex3_1_infeasible(), samples=200)
    assert r.solv_empty_suspected and r.sup_ratio == np.inf


def test_empirical_tau_monotone_in_samples():
    P = ex4_2_polyhedral()
    ratios = [empirical_tau(P, samples=s, seed=1).sup_ratio for s in (100, 400, 1600)]
    assert ratios == sorted(ratios)


def test_all_feasible_samples():
    P = Problem(WholeSpace(2), NonposOrthant(2), UncertaintySet([np.zeros((2, 2))]))
    with pytest.raises(NoSamplesError):
        empirical_tau(P, samples=50)
