"""Subgradient solver and exact polyhedral polishing."""

import numpy as np
import pytest

from robust_split.errors import UnsupportedOperation
from robust_split.geometry.sets import Ball, NonposOrthant, WholeSpace
from robust_split.instances import (BUILTINS, ex2_1_birkhoff, ex3_1_infeasible, ex3_2_tau1, ex3_3_sqrt2,
                                    ex4_2_polyhedral)
from robust_split.residual import Problem
from robust_split.solver import SolveConfig, assembled_system, polish_polyhedral, solve, solve_auto
from robust_split.uncertainty import UncertaintySet


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(max_iter=0)
    with pytest.raises(ValueError):
        SolveConfig(step_rule="armijo")


def test_feasible_from_positive_quadrant():
    rep = solve(ex3_3_sqrt2(), SolveConfig(x0=np.array([1.0, 1.0])))
    assert rep.feasible and rep.p_best <= 1e-9
    assert np.all(rep.x_best <= 1e-9)


def test_feasible_start_takes_no_iterations():
    rep = solve(ex3_3_sqrt2(), SolveConfig(x0=np.array([-1.0, -3.0])))
    assert rep.feasible and rep.iterations == 0


def test_nontrivial_start_avoids_origin():
    rep = solve(ex3_3_sqrt2(), SolveConfig(nontrivial=True, seed=2, max_iter=1))
    assert np.linalg.norm(rep.x_best) > 0


def test_infeasible_instance_reports_floor():
    rep = solve_auto(ex3_1_infeasible())
    assert not rep.feasible
    assert rep.verdict == "residual-floor"
    assert 0.95 <= rep.p_floor <= 1.05


def test_floor_matches_brute_force_line_search():
    P = ex3_1_infeasible()
    from robust_split.residual import residual_values

    t = np.linspace(-5, 5, 100_001)[:, None]
    brute = residual_values(P, t)[0].min()
    assert brute == pytest.approx(1.0, abs=1e-12)
    assert solve_auto(P).p_floor == pytest.approx(brute, abs=0.05)


def test_diminishing_rule():
    rep = solve(ex4_2_polyhedral(), SolveConfig(step_rule="diminishing", s0=0.5, x0=np.array([3.0, 1.0])))
    assert rep.p_best <= 1e-3


@pytest.mark.parametrize("name", ["ex2_1_birkhoff", "ex3_2_tau1", "ex3_3_sqrt2", "ex4_2_polyhedral"])
def test_polyak_reaches_feasibility_on_feasible_builtins(name):
    P = BUILTINS[name].build()
    rep = solve_auto(P, SolveConfig(x0=np.full(P.n, 3.0)))
    assert rep.feasible


def test_best_value_trace_is_monotone():
    rep = solve(ex3_1_infeasible(), SolveConfig(x0=np.array([7.0]), step_rule="diminishing"))
    vals = [v for _, v in rep.trace]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_polish_examples():
    x, d = polish_polyhedral(ex4_2_polyhedral(), [1.0, 1.0])
    np.testing.assert_allclose(x, [0.0, 0.0], atol=1e-9)
    assert d == pytest.approx(np.sqrt(2))
    x, d = polish_polyhedral(ex3_3_sqrt2(), [-1.0, -2.0])
    np.testing.assert_array_equal(x, [-1.0, -2.0])
    assert d == 0.0
    _, d = polish_polyhedral(ex3_1_infeasible(), [0.5])
    assert d == np.inf


def test_polish_against_grid():
    P = ex3_2_tau1()
    G, h, ok = assembled_system(P)
    assert ok
    rng = np.random.default_rng(5)
    P2 = ex2_1_birkhoff()
    x, d = polish_polyhedral(P2, [1.0, -2.0, 0.5])
    G2, h2, _ = assembled_system(P2)
    assert np.all(G2 @ x - h2 <= 1e-9)
    grid = np.stack(np.meshgrid(*[np.arange(-3, 3, 0.05)] * 3), -1).reshape(-1, 3)
    grid = grid[np.all(grid @ G2.T - h2 <= 1e-12, axis=1)]
    assert d <= np.linalg.norm(grid - [1.0, -2.0, 0.5], axis=1).min() + 1e-12
    assert d >= np.linalg.norm(grid - [1.0, -2.0, 0.5], axis=1).min() - 2 * 0.05 * np.sqrt(3)
    for _ in range(50):
        x0 = rng.uniform(-3, 3, 1)
        x, d = polish_polyhedral(P, x0)
        assert d == pytest.approx(abs(x0[0]))


def test_polish_needs_polyhedral_sets():
    P = Problem(Ball([0.0, 0.0], 1.0), NonposOrthant(2), UncertaintySet([np.eye(2)]))
    with pytest.raises(UnsupportedOperation):
        polish_polyhedral(P, [1.0, 1.0])
    P = Problem(WholeSpace(2), NonposOrthant(2), UncertaintySet([np.eye(2)]))
    assert polish_polyhedral(P, [1.0, -1.0])[1] == pytest.approx(1.0)
